"""Fourier representation of real functions on the 2*pi-periodic torus.

Coefficients follow the normalised convention

    u_hat(k) = (1/2pi) * integral_T u(x) exp(-i k x) dx,

so that ``||u||_{H^s}^2 = sum_k (1 + k^2)^s |u_hat(k)|^2``. Spectra are stored in
full (both signs of ``k``) in numpy FFT order; the wavenumber of each slot is
given by :attr:`TorusGrid.wavenumbers`.

Real fields are kept conjugate symmetric. The unpaired Nyquist slot
``k = -n_points/2`` has no real-valued counterpart and is held at zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

SIGMA_EDGE = 0.51


class GridMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class TorusGrid:
    n_points: int

    def __post_init__(self):
        n = self.n_points
        if int(n) != n or n < 8 or n % 2:
            raise ValueError(f"n_points must be an even integer >= 8, got {n!r}")
        object.__setattr__(self, "n_points", int(n))

    @property
    def period(self) -> float:
        return 2.0 * np.pi

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        k = np.fft.fftfreq(self.n_points, d=1.0 / self.n_points).round().astype(np.int64)
        k.flags.writeable = False
        return k

    @cached_property
    def nodes(self) -> np.ndarray:
        x = 2.0 * np.pi * np.arange(self.n_points) / self.n_points
        x.flags.writeable = False
        return x

    @property
    def kmax(self) -> int:
        """Largest resolved |k| of a real field (the Nyquist slot is excluded)."""
        return self.n_points // 2 - 1

    @cached_property
    def _mirror(self) -> np.ndarray:
        # slot holding -k for each slot k
        return (-np.arange(self.n_points)) % self.n_points

    def index(self, k: int) -> int:
        if not -self.n_points // 2 <= k < self.n_points // 2:
            raise ValueError(f"wavenumber {k} not on a grid of {self.n_points} points")
        return k % self.n_points


def symmetrize(coeffs: np.ndarray, grid: TorusGrid) -> np.ndarray:
    """Project a spectrum onto real fields: c(-k) = conj(c(k)), Nyquist slot zeroed."""
    out = 0.5 * (coeffs + np.conj(coeffs[grid._mirror]))
    out[grid.n_points // 2] = 0.0
    return out


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Immutable spectrum of a real function on a :class:`TorusGrid`."""

    grid: TorusGrid
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=np.complex128)
        if c.shape != (self.grid.n_points,):
            raise ValueError(
                f"expected {self.grid.n_points} coefficients, got shape {c.shape}"
            )
        c = symmetrize(c, self.grid)
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    # -- constructors -------------------------------------------------------
    @classmethod
    def zeros(cls, grid: TorusGrid) -> "SpectralField":
        return cls(grid, np.zeros(grid.n_points, dtype=np.complex128))

    @classmethod
    def constant(cls, grid: TorusGrid, c: float) -> "SpectralField":
        coeffs = np.zeros(grid.n_points, dtype=np.complex128)
        coeffs[0] = c
        return cls(grid, coeffs)

    @classmethod
    def from_modes(cls, grid: TorusGrid, modes: dict) -> "SpectralField":
        """Build a field from ``{k: u_hat(k)}``.

        Only one of each ``+-k`` pair needs to be given; missing partners are
        filled in by conjugate symmetry.
        """
        coeffs = np.zeros(grid.n_points, dtype=np.complex128)
        given = set()
        for k, c in modes.items():
            coeffs[grid.index(k)] = c
            given.add(k)
        for k in given:
            if -k not in given and -k >= -grid.n_points // 2:
                coeffs[grid.index(-k)] = np.conj(coeffs[grid.index(k)])
        return cls(grid, coeffs)

    @classmethod
    def from_values(cls, grid: TorusGrid, values) -> "SpectralField":
        values = np.asarray(values, dtype=np.float64)
        return cls(grid, np.fft.fft(values) / grid.n_points)

    @classmethod
    def from_function(cls, grid: TorusGrid, func) -> "SpectralField":
        return cls.from_values(grid, func(grid.nodes))

    # -- views --------------------------------------------------------------
    def values(self) -> np.ndarray:
        """Real values at the grid nodes."""
        return np.fft.ifft(self.coeffs * self.grid.n_points).real

    def coeff(self, k: int) -> complex:
        return complex(self.coeffs[self.grid.index(k)])

    def bandwidth(self) -> int:
        nz = np.nonzero(np.abs(self.coeffs) > 0)[0]
        if nz.size == 0:
            return 0
        return int(np.abs(self.grid.wavenumbers[nz]).max())

    # -- linear algebra -----------------------------------------------------
    def _check(self, other: "SpectralField"):
        if not isinstance(other, SpectralField):
            return NotImplemented
        if other.grid != self.grid:
            raise GridMismatchError(
                f"grids differ: {self.grid.n_points} vs {other.grid.n_points} points"
            )
        return None

    def __add__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return SpectralField(self.grid, self.coeffs + other.coeffs)

    def __sub__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return SpectralField(self.grid, self.coeffs - other.coeffs)

    def __neg__(self):
        return SpectralField(self.grid, -self.coeffs)

    def __mul__(self, scalar):
        if isinstance(scalar, SpectralField):
            return product(self, scalar)
        return SpectralField(self.grid, self.coeffs * float(scalar))

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return SpectralField(self.grid, self.coeffs / float(scalar))

    def allclose(self, other: "SpectralField", rtol=1e-12, atol=0.0) -> bool:
        self._check(other)
        scale = max(np.abs(self.coeffs).max(), np.abs(other.coeffs).max())
        return bool(np.abs(self.coeffs - other.coeffs).max() <= atol + rtol * scale)

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.coeffs)))


# -- Fourier multipliers ----------------------------------------------------

def _japanese(grid: TorusGrid) -> np.ndarray:
    return 1.0 + grid.wavenumbers.astype(np.float64) ** 2


def multiplier(f: SpectralField, symbol: np.ndarray) -> SpectralField:
    return SpectralField(f.grid, f.coeffs * symbol)


def bessel_potential(m: float, f: SpectralField) -> SpectralField:
    """Apply ``D^m = (1 - d_x^2)^{m/2}``, i.e. multiply by ``(1 + k^2)^{m/2}``."""
    if m == 0:
        return f
    return multiplier(f, _japanese(f.grid) ** (0.5 * m))


def derivative(f: SpectralField, order: int = 1) -> SpectralField:
    return multiplier(f, (1j * f.grid.wavenumbers) ** order)


def helmholtz_inverse(f: SpectralField) -> SpectralField:
    """``(1 - d_x^2)^{-1} f``; identical to ``bessel_potential(-2, f)``."""
    return multiplier(f, 1.0 / _japanese(f.grid))


# -- dealiased products -----------------------------------------------------

def padded_size(n_points: int) -> int:
    """Transform length for an alias-free quadratic product (3/2 rule)."""
    return 3 * n_points // 2


def to_padded_values(f: SpectralField, m: int | None = None) -> np.ndarray:
    n = f.grid.n_points
    m = padded_size(n) if m is None else m
    half = n // 2
    pad = np.zeros(m, dtype=np.complex128)
    pad[:half] = f.coeffs[:half]
    pad[m - half:] = f.coeffs[half:]
    return np.fft.ifft(pad * m).real


def from_padded_values(grid: TorusGrid, values: np.ndarray) -> SpectralField:
    m = values.shape[0]
    half = grid.n_points // 2
    full = np.fft.fft(values) / m
    coeffs = np.concatenate([full[:half], full[m - half:]])
    return SpectralField(grid, coeffs)


def product(f: SpectralField, g: SpectralField) -> SpectralField:
    """Pointwise product with zero-padded transforms.

    Exact (no aliasing) truncation of the convolution ``sum_k f(k) g(n-k)`` to
    the resolved band ``|n| < n_points/2``.
    """
    if not isinstance(f, SpectralField) or not isinstance(g, SpectralField):
        raise TypeError("product expects two SpectralField operands")
    if f.grid != g.grid:
        raise GridMismatchError(
            f"grids differ: {f.grid.n_points} vs {g.grid.n_points} points"
        )
    return from_padded_values(f.grid, to_padded_values(f) * to_padded_values(g))


# -- norms --------------------------------------------------------------------

def sobolev_norm(s: float, f: SpectralField) -> float:
    weights = _japanese(f.grid) ** s
    return float(np.sqrt(np.sum(weights * np.abs(f.coeffs) ** 2)))


def pairing(f: SpectralField, g: SpectralField) -> float:
    """Normalised L^2 pairing ``(1/2pi) * integral f g dx`` via Plancherel."""
    f._check(g)
    return float(np.sum((f.coeffs * np.conj(g.coeffs)).real))


def interpolation_gap(f: SpectralField, m1: float, m: float, m2: float) -> float:
    """Slack in ``||f||_m <= ||f||_{m1}^theta ||f||_{m2}^(1-theta)``.

    ``theta = (m2 - m)/(m2 - m1)``. Returns the right side minus the left side,
    which is nonnegative up to roundoff by Hoelder's inequality.
    """
    if not m1 < m < m2:
        raise ValueError(f"need m1 < m < m2, got ({m1}, {m}, {m2})")
    lo, mid, hi = sobolev_norm(m1, f), sobolev_norm(m, f), sobolev_norm(m2, f)
    if mid == 0.0:
        raise ValueError("interpolation_gap is undefined for the zero field")
    theta = (m2 - m) / (m2 - m1)
    return lo ** theta * hi ** (1.0 - theta) - mid


# -- random data ----------------------------------------------------------------

def random_field(
    grid: TorusGrid,
    index: float,
    rng: np.random.Generator,
    bandwidth: int | None = None,
    sigma: float = SIGMA_EDGE,
) -> SpectralField:
    """Random real field sitting just inside ``H^index``.

    Coefficients are ``(1 + k^2)^{-(sigma + index)/2}`` times a standard complex
    Gaussian for ``|k| <= bandwidth``.
    """
    kmax = grid.kmax if bandwidth is None else int(bandwidth)
    if kmax > grid.kmax:
        raise ValueError(f"bandwidth {kmax} exceeds grid limit {grid.kmax}")
    n = grid.n_points
    z = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / np.sqrt(2.0)
    k = grid.wavenumbers
    z[np.abs(k) > kmax] = 0.0
    z[0] = z[0].real * np.sqrt(2.0)
    coeffs = _japanese(grid) ** (-0.5 * (sigma + index)) * z
    # symmetrize halves the paired modes; pair explicitly to keep unit variance
    pos = k > 0
    coeffs[grid._mirror[pos]] = np.conj(coeffs[pos])
    return SpectralField(grid, coeffs)
