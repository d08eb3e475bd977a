import numpy as np
import pytest

from rodlab.spectral import SpectralField, TorusGrid, random_field

ACCEPTANCE_LINES = []


@pytest.fixture
def grid():
    return TorusGrid(32)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def band_limited(grid, rng, bandwidth, index=0.0):
    return random_field(grid, index, rng, bandwidth)


def brute_convolution(f: SpectralField, g: SpectralField) -> np.ndarray:
    """Direct sum over k of f(k) g(n - k), truncated to the grid's band."""
    grid = f.grid
    half = grid.n_points // 2
    out = np.zeros(grid.n_points, dtype=complex)
    for n in range(-half + 1, half):
        acc = 0j
        for k in range(-half + 1, half):
            m = n - k
            if -half < m < half:
                acc += f.coeff(k) * g.coeff(m)
        out[grid.index(n)] = acc
    return out


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
