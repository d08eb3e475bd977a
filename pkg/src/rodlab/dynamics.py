"""Hyperelastic rod evolution on the torus.

    u_t = -gamma u u_x - d_x (1 - d_x^2)^{-1} [ (3 - gamma)/2 u^2 + gamma/2 u_x^2 ]

gamma = 1 is Camassa-Holm, gamma = 0 is BBM. Products are dealiased, so the
semi-discrete system is a Galerkin truncation and conserves the H^1 energy.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .spectral import (
    SpectralField,
    TorusGrid,
    derivative,
    from_padded_values,
    helmholtz_inverse,
    pairing,
    bessel_potential,
    product,
    sobolev_norm,
    to_padded_values,
)


class BlowUpError(RuntimeError):
    """Raised when an evolution leaves the representable regime.

    ``trajectory`` holds every snapshot recorded before the failure.
    """

    def __init__(self, message, time, trajectory=None):
        super().__init__(message)
        self.time = time
        self.trajectory = trajectory


class StabilityError(ValueError):
    pass


@dataclass(frozen=True)
class HRParams:
    gamma: float
    dt: float
    t_final: float
    snapshot_every: int = 1
    norm_index: float = 1.0
    blowup_threshold: float = 1e6

    def __post_init__(self):
        if not self.dt > 0 or not self.t_final > 0:
            raise ValueError("dt and t_final must be positive")
        if self.snapshot_every < 1:
            raise ValueError("snapshot_every must be >= 1")

    @property
    def n_steps(self) -> int:
        return max(1, int(round(self.t_final / self.dt)))

    @property
    def step(self) -> float:
        """Step actually taken, so that n_steps * step lands on t_final."""
        return self.t_final / self.n_steps


@dataclass
class Trajectory:
    params: HRParams
    times: list = field(default_factory=list)
    fields: list = field(default_factory=list)

    def append(self, t: float, u: SpectralField):
        if self.times and not t > self.times[-1]:
            raise ValueError("snapshot times must be strictly increasing")
        if not self.times and t != 0.0:
            raise ValueError("first snapshot must be at t = 0")
        self.times.append(float(t))
        self.fields.append(u)

    @property
    def snapshots(self):
        return list(zip(self.times, self.fields))

    @property
    def grid(self) -> TorusGrid:
        return self.fields[0].grid

    @property
    def final(self) -> SpectralField:
        return self.fields[-1]

    def __len__(self):
        return len(self.times)


# -- right-hand sides -----------------------------------------------------------

def hr_rhs(u: SpectralField, gamma: float) -> SpectralField:
    grid = u.grid
    ux = derivative(u)
    pu = to_padded_values(u)
    pux = to_padded_values(ux)
    transport = from_padded_values(grid, pu * pux)
    bracket = from_padded_values(
        grid, 0.5 * (3.0 - gamma) * pu * pu + 0.5 * gamma * pux * pux
    )
    return -gamma * transport - derivative(helmholtz_inverse(bracket))


def difference_rhs(
    v: SpectralField, u: SpectralField, w: SpectralField, gamma: float
) -> SpectralField:
    """Right-hand side of the equation solved by ``v = u - w``.

    Equals ``hr_rhs(u) - hr_rhs(w)`` whenever ``v = u - w``.
    """
    s = u + w
    vs = product(v, s)
    vx_sx = product(derivative(v), derivative(s))
    nonlocal_ = 0.5 * (3.0 - gamma) * vs + 0.5 * gamma * vx_sx
    return -0.5 * gamma * derivative(vs) - derivative(helmholtz_inverse(nonlocal_))


def h1_energy(u: SpectralField) -> float:
    return sobolev_norm(1.0, u) ** 2


# -- time stepping --------------------------------------------------------------

def stable_dt(u: SpectralField, gamma: float) -> float:
    """Advective step limit ``0.5 / (max|k| * max|gamma u|)``."""
    speed = abs(gamma) * float(np.abs(u.values()).max())
    if speed == 0.0:
        return math.inf
    return 0.5 / (u.grid.kmax * speed)


def step_rk4(u: SpectralField, params: HRParams, t: float = 0.0) -> SpectralField:
    h = params.step
    g = params.gamma
    k1 = hr_rhs(u, g)
    k2 = hr_rhs(u + (0.5 * h) * k1, g)
    k3 = hr_rhs(u + (0.5 * h) * k2, g)
    k4 = hr_rhs(u + h * k3, g)
    out = u + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not out.is_finite():
        raise BlowUpError(f"non-finite coefficients at t = {t + h:.6g}", t + h)
    return out


def evolve(u0: SpectralField, params: HRParams, check_stability: bool = True) -> Trajectory:
    """Integrate from ``u0`` to ``params.t_final`` with classical RK4.

    Snapshots are kept every ``params.snapshot_every`` steps; the initial and
    final states are always kept.
    """
    if check_stability:
        limit = stable_dt(u0, params.gamma)
        if params.step > limit:
            raise StabilityError(
                f"dt = {params.step:.3g} exceeds stability limit {limit:.3g}"
            )
    traj = Trajectory(params)
    traj.append(0.0, u0)
    u = u0
    n = params.n_steps
    h = params.step
    for i in range(1, n + 1):
        t_prev = (i - 1) * h
        try:
            u = step_rk4(u, params, t_prev)
        except BlowUpError as exc:
            exc.trajectory = traj
            raise
        t = params.t_final if i == n else i * h
        norm = sobolev_norm(params.norm_index, u)
        if norm > params.blowup_threshold:
            raise BlowUpError(
                f"H^{params.norm_index} norm {norm:.3g} exceeds "
                f"{params.blowup_threshold:.3g} at t = {t:.6g}",
                t,
                traj,
            )
        if i % params.snapshot_every == 0 or i == n:
            traj.append(t, u)
    return traj


# -- energy identity ------------------------------------------------------------

def energy_integrals(
    u: SpectralField, w: SpectralField, r: float, gamma: float
) -> tuple:
    """The three terms whose sum is ``(1/2) d/dt ||u - w||_{H^r}^2``.

    Integrals use the normalised measure ``dx/2pi`` to match the norm
    convention. Returns ``(transport, nonlocal_1, nonlocal_2)``.
    """
    v = u - w
    s = u + w
    Drv = bessel_potential(r, v)
    vs_x = derivative(product(v, s))
    transport = -0.5 * gamma * pairing(bessel_potential(r, vs_x), Drv)
    first = -0.5 * (3.0 - gamma) * pairing(bessel_potential(r - 2.0, vs_x), Drv)
    grad = derivative(product(derivative(v), derivative(s)))
    second = -0.5 * gamma * pairing(bessel_potential(r - 2.0, grad), Drv)
    return transport, first, second


def energy_identity_residual(
    u_traj: Trajectory, w_traj: Trajectory, r: float, t: float
) -> float:
    """Sum of the energy integrals minus a centred difference of ``||v||_r^2/2``.

    The snapshot nearest to ``t`` is used and must have neighbours on both
    sides; the derivative is the three-point (second order) formula.
    """
    if u_traj.params != w_traj.params or u_traj.times != w_traj.times:
        raise ValueError("trajectories must share params and snapshot times")
    times = np.asarray(u_traj.times)
    if not times[0] < t < times[-1]:
        raise ValueError(f"t = {t} outside the open interval ({times[0]}, {times[-1]})")
    i = int(np.argmin(np.abs(times - t)))
    i = min(max(i, 1), len(times) - 2)
    t0, t1, t2 = times[i - 1], times[i], times[i + 1]

    def half_sq(j):
        return 0.5 * sobolev_norm(r, u_traj.fields[j] - w_traj.fields[j]) ** 2

    e0, e1, e2 = half_sq(i - 1), half_sq(i), half_sq(i + 1)
    h0, h1 = t1 - t0, t2 - t1
    d_dt = (
        -h1 / (h0 * (h0 + h1)) * e0
        + (h1 - h0) / (h0 * h1) * e1
        + h0 / (h1 * (h0 + h1)) * e2
    )
    rhs = sum(energy_integrals(u_traj.fields[i], w_traj.fields[i], r, u_traj.params.gamma))
    return rhs - d_dt


# -- export ---------------------------------------------------------------------

def write_trajectory_csv(traj: Trajectory, path) -> None:
    k = traj.grid.wavenumbers
    order = np.argsort(k, kind="stable")
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["time", "k", "re_coeff", "im_coeff"])
        for t, u in traj.snapshots:
            c = u.coeffs
            for j in order:
                out.writerow([repr(t), int(k[j]), repr(float(c[j].real)), repr(float(c[j].imag))])


def config_hash(obj) -> str:
    text = json.dumps(obj, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def run_manifest(traj: Trajectory, seeds=None, extra=None) -> dict:
    body = {
        "params": asdict(traj.params),
        "grid": {"n_points": traj.grid.n_points, "period": "2*pi"},
        "seeds": list(seeds or []),
        "n_snapshots": len(traj),
    }
    if extra:
        body.update(extra)
    body["config_hash"] = config_hash(body)
    return body
