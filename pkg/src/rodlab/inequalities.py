"""Numerical stress tests for the commutator, product and weighted-integral bounds.

Implicit constants are never asserted. Boundedness is judged from how the
worst empirical ratio moves as the bandwidth (or frequency shift) doubles:
a least-squares log2 slope at most ``SLOPE_BOUNDED`` counts as bounded.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import integrate

from .spectral import (
    SpectralField,
    TorusGrid,
    bessel_potential,
    derivative,
    product,
    random_field,
    sobolev_norm,
)

SLOPE_BOUNDED = 0.1
DEFAULT_BANDWIDTHS = (64, 128, 256, 512)
DEFAULT_EPS = 1e-2


class RegionError(ValueError):
    pass


@dataclass
class RatioReport:
    lemma: str
    point: tuple
    ensemble_size: int
    max_ratio: float
    ratio_vs_bandwidth: list
    slope: float
    verdict: str
    meta: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["point"] = list(self.point)
        d["ratio_vs_bandwidth"] = [list(row) for row in self.ratio_vs_bandwidth]
        return d


def log2_slope(xs, ys) -> float:
    """Least-squares slope of log2(y) against log2(x)."""
    lx = np.log2(np.asarray(xs, dtype=float))
    ly = np.log2(np.asarray(ys, dtype=float))
    return float(np.polyfit(lx, ly, 1)[0])


def _report(lemma, point, ensemble_size, rows, meta=None, fit_from=0) -> RatioReport:
    """Assemble a report; the verdict slope uses ``rows[fit_from:]``."""
    bands = [b for b, _ in rows]
    if any(b2 <= b1 for b1, b2 in zip(bands, bands[1:])):
        raise ValueError("bandwidths must be strictly increasing")
    ratios = [m for _, m in rows]
    fit = rows[fit_from:]
    if len(fit) >= 2 and min(m for _, m in fit) > 0:
        slope = log2_slope([b for b, _ in fit], [m for _, m in fit])
    else:
        slope = 0.0
    return RatioReport(
        lemma=lemma,
        point=tuple(point),
        ensemble_size=ensemble_size,
        max_ratio=max(ratios) if ratios else 0.0,
        ratio_vs_bandwidth=[(int(b) if float(b).is_integer() else b, m) for b, m in rows],
        slope=slope,
        verdict="bounded" if slope <= SLOPE_BOUNDED else "growing",
        meta=dict(meta or {}),
    )


def grid_for_bandwidth(bandwidth: int) -> TorusGrid:
    """Smallest power-of-two grid resolving a product of two such fields exactly."""
    n = 8
    while n // 2 - 1 < 2 * bandwidth:
        n *= 2
    return TorusGrid(n)


def member_rng(seed: int, *key) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, key)]))


# -- commutator -------------------------------------------------------------------

def commutator_apply(f: SpectralField, g: SpectralField, r: float) -> SpectralField:
    """``[D^r d_x, f] g = D^r d_x (f g) - f D^r d_x g``."""
    return bessel_potential(r, derivative(product(f, g))) - product(
        f, bessel_potential(r, derivative(g))
    )


def commutator_ratio(f: SpectralField, g: SpectralField, s: float, r: float) -> float:
    den = sobolev_norm(s, f) * sobolev_norm(r, g)
    if den == 0:
        raise ValueError("zero denominator")
    return sobolev_norm(0.0, commutator_apply(f, g, r)) / den


def _check_commutator_region(s, r):
    if not (s > 1.5 and -1.0 <= r <= s - 1.0):
        raise RegionError(f"commutator estimate needs s > 3/2 and -1 <= r <= s-1, got ({s}, {r})")


def _commutator_band(s, r, bandwidth, ensemble_size, seed):
    grid = grid_for_bandwidth(bandwidth)
    best = 0.0
    for j in range(ensemble_size):
        rng = member_rng(seed, 1, bandwidth, j)
        f = random_field(grid, s, rng, bandwidth)
        g = random_field(grid, r, rng, bandwidth)
        best = max(best, commutator_ratio(f, g, s, r))
    return best


def commutator_ratio_sweep(
    s: float,
    r: float,
    ensemble_size: int = 100,
    bandwidths=DEFAULT_BANDWIDTHS,
    seed: int = 0,
    mapper=map,
) -> RatioReport:
    _check_commutator_region(s, r)
    bandwidths = list(bandwidths)
    maxima = list(
        mapper(
            _commutator_band,
            [s] * len(bandwidths),
            [r] * len(bandwidths),
            bandwidths,
            [ensemble_size] * len(bandwidths),
            [seed] * len(bandwidths),
        )
    )
    return _report("commutator", (s, r), ensemble_size, list(zip(bandwidths, maxima)),
                   {"seed": seed})


# -- product estimate ---------------------------------------------------------------

def _check_product_region(s, r):
    if not (s > 1.5 and r <= s and s + r >= 2.0):
        raise RegionError(f"product estimate needs s > 3/2, r <= s, s + r >= 2, got ({s}, {r})")


def product_estimate_ratio(f: SpectralField, g: SpectralField, s: float, r: float) -> float:
    """``||fg||_{r-1} / (||f||_{s-1} ||g||_{r-1})``."""
    _check_product_region(s, r)
    den = sobolev_norm(s - 1.0, f) * sobolev_norm(r - 1.0, g)
    if den == 0:
        raise ValueError("zero denominator")
    return sobolev_norm(r - 1.0, product(f, g)) / den


def _product_band(s, r, bandwidth, ensemble_size, seed):
    grid = grid_for_bandwidth(bandwidth)
    best = swapped = 0.0
    for j in range(ensemble_size):
        rng = member_rng(seed, 2, bandwidth, j)
        f = random_field(grid, s - 1.0, rng, bandwidth)
        g = random_field(grid, r - 1.0, rng, bandwidth)
        best = max(best, product_estimate_ratio(f, g, s, r))
        # orientation as literally stated: roles of f and g exchanged
        swapped = max(swapped, product_estimate_ratio(g, f, s, r))
    return best, swapped


def product_ratio_sweep(
    s: float,
    r: float,
    ensemble_size: int = 100,
    bandwidths=DEFAULT_BANDWIDTHS,
    seed: int = 0,
    mapper=map,
) -> RatioReport:
    _check_product_region(s, r)
    bandwidths = list(bandwidths)
    out = list(
        mapper(
            _product_band,
            [s] * len(bandwidths),
            [r] * len(bandwidths),
            bandwidths,
            [ensemble_size] * len(bandwidths),
            [seed] * len(bandwidths),
        )
    )
    rows = [(b, m) for b, (m, _) in zip(bandwidths, out)]
    swapped = [[b, m] for b, (_, m) in zip(bandwidths, out)]
    return _report("product", (s, r), ensemble_size, rows,
                   {"seed": seed, "swapped_orientation": swapped})


# -- periodic kernel sums -------------------------------------------------------------

def _kernel_terms(n, k, s, r):
    n = np.asarray(n, dtype=np.float64)
    return (1.0 + n * n) ** (1.0 - s) * (1.0 + (n - k) ** 2) ** (r - 1.0)


def kernel_tail_bound(k: int, s: float, r: float, n_max: int) -> float:
    """Bound on the terms with ``|n| > n_max`` (needs ``n_max >= 8(|k|+1)``)."""
    p = 2.0 * (s - r)
    if p <= 1.0:
        return math.inf
    # |n - k| lies within [7|n|/8, 9|n|/8] beyond n_max
    if r <= 1.0:
        c = (7.0 / 8.0) ** (2.0 * (r - 1.0))
    else:
        c = (81.0 / 64.0) ** (r - 1.0)
    return 2.0 * c * n_max ** (1.0 - p) / (p - 1.0)


def _check_nmax(k, n_max):
    if n_max < 8 * (abs(k) + 1):
        raise ValueError(f"n_max = {n_max} too small for k = {k}; need >= {8 * (abs(k) + 1)}")


def kernel_partial_sum(k: int, s: float, r: float, n_max: int) -> float:
    _check_nmax(k, n_max)
    n = np.arange(-n_max, n_max + 1)
    return float(np.sum(_kernel_terms(n, k, s, r)))


def convolution_kernel_sum(k: int, s: float, r: float, n_max: int | None = None) -> float:
    """``sum_n (1+n^2)^{1-s} (1+(n-k)^2)^{r-1}``, as an upper bound.

    The finite sum over ``|n| <= n_max`` plus the analytic tail majorant.
    """
    if n_max is None:
        n_max = 8 * (abs(k) + 1)
    return kernel_partial_sum(k, s, r, n_max) + kernel_tail_bound(k, s, r, n_max)


@dataclass(frozen=True)
class KernelSplit:
    I: float
    II: float
    III: float
    i: float
    ii: float
    iii: float
    overlap: float  # n = 0 term, present in both I and III

    @property
    def total(self) -> float:
        return self.I + self.II + self.III - self.overlap


def kernel_sum_splitting(k: int, s: float, r: float, n_max: int | None = None) -> KernelSplit:
    """Partial sums over the index windows of the periodic product argument.

    ``I``: 0 <= n <= 2k, split into ``i`` (n <= k/2), ``ii`` (k/2 < n <= 3k/2),
    ``iii`` (3k/2 < n <= 2k); ``II``: 2k < n <= n_max; ``III``: the reflected
    sum over 0 <= n <= n_max of ``(1+n^2)^{1-s} (1+(n+k)^2)^{r-1}``.
    """
    if k < 0 or k % 2:
        raise ValueError(f"k must be even and nonnegative, got {k}")
    if n_max is None:
        n_max = 8 * (k + 1)
    _check_nmax(k, n_max)
    n = np.arange(0, n_max + 1)
    t = _kernel_terms(n, k, s, r)
    refl = _kernel_terms(n, -k, s, r)
    i = float(t[: k // 2 + 1].sum())
    ii = float(t[k // 2 + 1: 3 * k // 2 + 1].sum())
    iii = float(t[3 * k // 2 + 1: 2 * k + 1].sum())
    return KernelSplit(
        I=float(t[: 2 * k + 1].sum()),
        II=float(t[2 * k + 1:].sum()),
        III=float(refl.sum()),
        i=i,
        ii=ii,
        iii=iii,
        overlap=float(t[0]),
    )


def kernel_growth_sweep(s: float, r: float, ks=None) -> RatioReport:
    """``sum / (1+k^2)^{r-1}`` across ``k``; bounded exactly when the sum decays at that rate."""
    ks = list(ks if ks is not None else [2 ** j for j in range(11)])
    rows = [(k, convolution_kernel_sum(k, s, r) / (1.0 + k * k) ** (r - 1.0)) for k in ks]
    rep = _report("kernel_sum", (s, r), 1, rows)
    rep.meta["growth_exponent"] = rep.slope
    rep.meta["predicted_exponent"] = max(0.0, 2.0 * (2.0 - s - r))
    rep.meta["in_region"] = bool(s > 1.5 and r <= 0.5 and s + r >= 2.0)
    return rep


# -- weighted integral on the line --------------------------------------------------

@dataclass(frozen=True)
class PeetreParams:
    p: float
    q: float
    a: float = 0.0
    epsilon: float = DEFAULT_EPS

    def __post_init__(self):
        if not (self.p > 0 and self.q > 0):
            raise ValueError("p and q must be positive")
        if not self.p + self.q > 1:
            raise ValueError(f"p + q = {self.p + self.q} <= 1: the integral diverges")
        if not 0 < self.epsilon <= 0.1:
            raise ValueError("epsilon must lie in (0, 0.1]")

    @property
    def decay_exponent(self) -> float:
        """``min{p - eps_q, q - eps_p, p + q - 1}`` with eps_j > 0 only when j == 1."""
        eps_q = self.epsilon if self.q == 1 else 0.0
        eps_p = self.epsilon if self.p == 1 else 0.0
        return min(self.p - eps_q, self.q - eps_p, self.p + self.q - 1.0)


def _bracket(y):
    return 1.0 + abs(y)


def weighted_integral(p: float, q: float, a: float, rtol: float = 1e-10) -> float:
    """``integral_R <x - a>^{-p} <x>^{-q} dx`` with ``<y> = 1 + |y|``; allows q = 0.

    The core ``[-L, L]``, ``L = 8(1 + |a|)``, is cut at both peaks and their
    midpoint; the tails ``|x| > L`` run to infinity. Each piece is integrated
    adaptively in the coordinate ``t = log(1 + distance to its peak)``, where
    the algebraic decay becomes exponential.
    """
    if p + q <= 1:
        raise ValueError("p + q must exceed 1")
    a = abs(float(a))  # the integral is even in a
    L = 8.0 * (1.0 + a)

    def piece(center, sign, d0, d1):
        def g(t):
            d = math.expm1(t)
            x = center + sign * d
            return _bracket(x - a) ** -p * _bracket(x) ** -q * (1.0 + d)

        return integrate.quad(g, math.log1p(d0), math.log1p(d1),
                              epsabs=0.0, epsrel=rtol, limit=400)[0]

    def tail(weight, d0):
        # beyond L the integrand is (1+d)^{-(p+q)} (1 + a/(1+d))^{-weight};
        # tau = (p+q-1) log(1+d) makes the decay exactly exp(-tau)
        c = p + q - 1.0

        def g(tau):
            return math.exp(-tau - weight * math.log1p(a * math.exp(-tau / c))) / c

        # the integrand is below exp(-tau), so stopping 60 units on loses < 1e-26
        t0 = c * math.log1p(d0)
        return integrate.quad(g, t0, t0 + 60.0, epsabs=0.0, epsrel=rtol, limit=400)[0]

    half = 0.5 * a
    return (
        tail(p, L)                       # (-inf, -L]
        + piece(0.0, -1.0, 0.0, L)       # [-L, 0]
        + piece(0.0, 1.0, 0.0, half)     # [0, a/2]
        + piece(a, -1.0, 0.0, half)      # [a/2, a]
        + piece(a, 1.0, 0.0, L - a)      # [a, L]
        + tail(q, L - a)                 # [L, inf)
    )


def peetre_tail_majorant(params: PeetreParams) -> float:
    """Closed-form bound on the part of the integral outside ``[-L, L]``."""
    p, q, a = params.p, params.q, abs(params.a)
    L = 8.0 * (1.0 + a)
    # beyond L, <x - a> >= (7/8) |x| and <x> >= |x|
    return 2.0 * (8.0 / 7.0) ** p * L ** (1.0 - p - q) / (p + q - 1.0)


def peetre_integral(params: PeetreParams) -> float:
    return weighted_integral(params.p, params.q, params.a)


def peetre_closed_form_a0(p: float, q: float) -> float:
    return 2.0 / (p + q - 1.0)


def peetre_decay_sweep(p: float, q: float, shifts=None, epsilon: float = DEFAULT_EPS) -> RatioReport:
    """``integral * <a>^rho`` across shifts ``a``; should stay bounded."""
    shifts = list(shifts if shifts is not None else [2.0 ** j for j in range(11)])
    rho = PeetreParams(p, q, 0.0, epsilon).decay_exponent
    rows = [(a, peetre_integral(PeetreParams(p, q, a, epsilon)) * _bracket(a) ** rho) for a in shifts]
    # when epsilon lowers rho the integral decays like log<a>/<a>^(rho+epsilon),
    # which beats <a>^-rho only for log<a> beyond 1/epsilon: no finite window shows it
    log_loss = rho < min(p, q, p + q - 1.0)
    return _report("peetre", (p, q), 1, rows,
                   {"rho": rho, "epsilon": epsilon, "log_loss": log_loss,
                    "epsilon_reading": "eps_j > 0 iff exponent j == 1"})


def nonperiodic_product_bound_check(
    s: float, r: float, shifts=None, epsilon: float = DEFAULT_EPS
) -> RatioReport:
    """Check ``integral <xi - eta>^{-2(s-1)} <xi>^{-2(1-r)} dxi <~ <eta>^{-2(1-r)}``.

    Near ``s + r = 2`` the scaled integral approaches its limit only like
    ``eta^{-(2s-3)}``, so the verdict is fitted on the upper half of the shifts
    (default ``2^0 .. 2^20``). Also records whether the integral lemma's exponent covers ``2 delta``,
    ``delta = 1 - r``; at ``r = 1/2`` the first exponent is lowered by
    ``epsilon`` as the lemma requires.
    """
    if not (s > 1.5 and r <= 1.0 and s + r >= 2.0):
        raise RegionError(f"non-periodic product bound needs s > 3/2, r <= 1, s + r >= 2, got ({s}, {r})")
    shifts = list(shifts if shifts is not None else [2.0 ** j for j in range(21)])
    p, q = 2.0 * (s - 1.0), 2.0 * (1.0 - r)
    delta = 1.0 - r
    if q > 0:
        rho = PeetreParams(p, q, 0.0, epsilon).decay_exponent
        if r == 0.5:
            rho = min(p - epsilon, q, p + q - 1.0)
    else:
        rho = 0.0
    rows = [(eta, weighted_integral(p, q, eta) * _bracket(eta) ** (2.0 * delta)) for eta in shifts]
    rep = _report("nonperiodic_product", (s, r), 1, rows, fit_from=len(rows) // 2)
    rep.meta.update(
        p=p, q=q, delta=delta, rho=rho,
        exponent_covers=bool(rho >= 2.0 * delta - 1e-12),
        epsilon=epsilon,
    )
    return rep
