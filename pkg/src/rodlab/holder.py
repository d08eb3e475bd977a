"""Hoelder continuity of the HR data-to-solution map, measured numerically.

Parameter regions in the (s, r) plane and their exponents:

    Omega1: s > 3/2, -1 <= r <= s-1, r >= 2-s        alpha = 1
    Omega2: 3/2 < s < 3, -1 <= r < 2-s               alpha = 2(s-1)/(s-r)
    Omega3: s > 3/2, s-1 < r < s                     alpha = s-r

Inequalities are applied exactly as written: closed for Omega1, strict where
shown for Omega2/Omega3. Anything else is ``Outside``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import BlowUpError, HRParams, evolve
from .inequalities import member_rng
from .spectral import SpectralField, TorusGrid, random_field, sobolev_norm


# upper end of the s-range for the middle region, as printed (some earlier
# results only covered s < 2)
OMEGA2_S_MAX = 3.0


class Region(str, enum.Enum):
    OMEGA1 = "Omega1"
    OMEGA2 = "Omega2"
    OMEGA3 = "Omega3"
    OUTSIDE = "Outside"


class RegionError(ValueError):
    pass


def classify_region(s: float, r: float) -> Region:
    if s > 1.5 and -1.0 <= r <= s - 1.0 and r >= 2.0 - s:
        return Region.OMEGA1
    if 1.5 < s < OMEGA2_S_MAX and -1.0 <= r < 2.0 - s:
        return Region.OMEGA2
    if s > 1.5 and s - 1.0 < r < s:
        return Region.OMEGA3
    return Region.OUTSIDE


def theoretical_alpha(s: float, r: float) -> float:
    region = classify_region(s, r)
    if region is Region.OMEGA1:
        return 1.0
    if region is Region.OMEGA2:
        return 2.0 * (s - 1.0) / (s - r)
    if region is Region.OMEGA3:
        return s - r
    raise RegionError(f"(s, r) = ({s}, {r}) lies outside every region")


def region_alpha_table(s_values=None, r_values=None) -> list:
    """Rows ``(s, r, region, alpha)``; alpha is NaN outside the regions.

    Defaults: s in 1.55, 1.60, ..., 4.00 and r in -1.00, -0.95, ..., 3.95.
    """
    if s_values is None:
        s_values = np.round(1.5 + 0.05 * np.arange(1, 51), 10)
    if r_values is None:
        r_values = np.round(-1.0 + 0.05 * np.arange(100), 10)
    rows = []
    for s in s_values:
        for r in r_values:
            s, r = float(s), float(r)
            region = classify_region(s, r)
            alpha = math.nan if region is Region.OUTSIDE else theoretical_alpha(s, r)
            rows.append((s, r, region.value, alpha))
    return rows


# -- data ---------------------------------------------------------------------------

def generate_data(seed: int, s: float, R: float, grid: TorusGrid,
                  bandwidth: int | None = None) -> SpectralField:
    """Random real field with ``||u||_{H^s} = 0.9 R``."""
    if not R > 0:
        raise ValueError("R must be positive")
    u = random_field(grid, s, member_rng(seed, 7), bandwidth)
    return u * (0.9 * R / sobolev_norm(s, u))


def interpolation_chain_check(u: SpectralField, w: SpectralField, s: float, r: float) -> float:
    """Slack in the interpolation step used for Omega2 or Omega3.

    Omega2: ``||d||_{2-s} <= ||d||_r^{2(s-1)/(s-r)} ||d||_s^{(2-s-r)/(s-r)}``.
    Omega3: ``||d||_r <= ||d||_{s-1}^{s-r} ||d||_s^{1-s+r}``.
    Here ``d = u - w``; returns right side minus left side.
    """
    region = classify_region(s, r)
    d = u - w
    if region is Region.OMEGA2:
        lhs = sobolev_norm(2.0 - s, d)
        rhs = sobolev_norm(r, d) ** (2.0 * (s - 1.0) / (s - r)) * sobolev_norm(s, d) ** (
            (2.0 - s - r) / (s - r)
        )
    elif region is Region.OMEGA3:
        lhs = sobolev_norm(r, d)
        rhs = sobolev_norm(s - 1.0, d) ** (s - r) * sobolev_norm(s, d) ** (1.0 - s + r)
    else:
        raise RegionError(f"no interpolation chain for region {region.value}")
    return rhs - lhs


# -- the sweep ----------------------------------------------------------------------

DEFAULT_EPS = tuple(2.0 ** -j for j in range(3, 11))


@dataclass
class ExperimentConfig:
    s: float
    r: float
    R: float = 1.0
    gamma: float = 1.0
    n_points: int = 256
    dt: float = 1e-3
    t_final: float = 1.0
    eps_sweep: tuple = DEFAULT_EPS
    seed: int = 0
    perturbation_seed: int = 1
    slope_tol: float = 0.05
    max_over_time: bool = False
    c0: float = 1.0

    def __post_init__(self):
        eps = tuple(float(e) for e in self.eps_sweep)
        if len(eps) < 5 or any(e <= 0 for e in eps) or any(b >= a for a, b in zip(eps, eps[1:])):
            raise ValueError("eps_sweep must hold at least 5 strictly decreasing positive values")
        self.eps_sweep = eps
        if not self.R > 0:
            raise ValueError("R must be positive")

    @property
    def grid(self) -> TorusGrid:
        return TorusGrid(self.n_points)

    @property
    def horizon(self) -> float:
        """Lifespan heuristic ``T = min(t_final, 1/(4 c0 R))``."""
        return min(self.t_final, 1.0 / (4.0 * self.c0 * self.R))

    @property
    def params(self) -> HRParams:
        return HRParams(gamma=self.gamma, dt=self.dt, t_final=self.horizon,
                        norm_index=self.s)


@dataclass
class HolderFit:
    epsilons: list
    distances0: list
    distancesT: list
    slope: float
    intercept: float
    alpha_theory: float
    region: Region
    consistent: bool
    slope_tol: float
    envelope_constant: float = math.nan
    envelope_ok: bool = False
    norms_T: list = field(default_factory=list)
    dropped: list = field(default_factory=list)
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "epsilons": self.epsilons,
            "distances0": self.distances0,
            "distancesT": self.distancesT,
            "slope": self.slope,
            "intercept": self.intercept,
            "alpha_theory": self.alpha_theory,
            "region": self.region.value,
            "consistent": self.consistent,
            "slope_tol": self.slope_tol,
            "envelope_constant": self.envelope_constant,
            "envelope_ok": self.envelope_ok,
            "norms_T": self.norms_T,
            "dropped": self.dropped,
            "note": self.note,
            "omega2_s_range": [1.5, OMEGA2_S_MAX],
        }


def perturbation_direction(config: ExperimentConfig) -> SpectralField:
    phi = random_field(config.grid, config.s, member_rng(config.perturbation_seed, 11))
    return phi / sobolev_norm(config.s, phi)


def _distance(traj_u, traj_v, r, max_over_time):
    if max_over_time:
        return max(sobolev_norm(r, a - b) for a, b in zip(traj_u.fields, traj_v.fields))
    return sobolev_norm(r, traj_u.final - traj_v.final)


def _branch(u0: SpectralField, phi: SpectralField, eps: float, config: ExperimentConfig):
    v0 = u0 + eps * phi
    nv = sobolev_norm(config.s, v0)
    if nv > config.R:
        v0 = v0 * (config.R / nv)
    return v0, evolve(v0, config.params)


def _branch_task(args):
    u0, phi, eps, config = args
    v0, traj = _branch(u0, phi, eps, config)
    return v0, traj


def envelope_check(sizes, distancesT, alpha, margin):
    """Constant fitted on the coarser half of the sweep, tested on the finer half.

    ``C = max distT / size^alpha`` over the largest perturbations; every finer
    point must obey ``distT <= (1 + margin) C size^alpha``.
    """
    q = np.asarray(distancesT) / np.asarray(sizes) ** alpha
    half = max(1, len(q) // 2)
    C = float(q[:half].max())
    return C, bool(np.all(q[half:] <= (1.0 + margin) * C))


def fit_loglog(x, y) -> tuple:
    slope, intercept = np.polyfit(np.log(x), np.log(y), 1)
    return float(slope), float(intercept)


def holder_sweep(config: ExperimentConfig, mapper=map, phi: SpectralField | None = None) -> HolderFit:
    """Fit the exponent of ``||u(T) - v(T)||_r`` against ``||u0 - v0||_r``.

    Raises :class:`BlowUpError` if any branch leaves the representable regime
    before ``T``; the exception carries the partial distances in ``partial``.
    """
    region = classify_region(config.s, config.r)
    if region is Region.OUTSIDE:
        raise RegionError(f"(s, r) = ({config.s}, {config.r}) lies outside every region")
    alpha = theoretical_alpha(config.s, config.r)
    grid = config.grid
    u0 = generate_data(config.seed, config.s, config.R, grid)
    if phi is None:
        phi = perturbation_direction(config)
    u_traj = evolve(u0, config.params)

    eps_list = list(config.eps_sweep)
    results = mapper(_branch_task, [(u0, phi, e, config) for e in eps_list])

    d0, dT, normsT, used, dropped = [], [], [], [], []
    floor_scale = 1e3 * np.finfo(float).eps * max(sobolev_norm(config.r, u_traj.final), 1e-300)
    try:
        for eps, (v0, v_traj) in zip(eps_list, results):
            a = sobolev_norm(config.r, u0 - v0)
            b = _distance(u_traj, v_traj, config.r, config.max_over_time)
            normsT.append(sobolev_norm(config.r, u_traj.final) + sobolev_norm(config.r, v_traj.final))
            if a == 0.0 or b < floor_scale:
                dropped.append(eps)
                continue
            used.append(eps)
            d0.append(a)
            dT.append(b)
    except BlowUpError as exc:
        exc.partial = {"epsilons": used, "distances0": d0, "distancesT": dT}
        raise

    if len(d0) < 2:
        return HolderFit(used, d0, dT, math.nan, math.nan, alpha, region, False,
                         config.slope_tol, norms_T=normsT, dropped=dropped,
                         note="degenerate sweep: fewer than two usable perturbations")
    slope, intercept = fit_loglog(d0, dT)
    C, ok = envelope_check(used, dT, alpha, config.slope_tol)
    return HolderFit(
        epsilons=used,
        distances0=d0,
        distancesT=dT,
        slope=slope,
        intercept=intercept,
        alpha_theory=alpha,
        region=region,
        consistent=bool(slope >= alpha - config.slope_tol),
        slope_tol=config.slope_tol,
        envelope_constant=C,
        envelope_ok=ok,
        norms_T=normsT,
        dropped=dropped,
    )
