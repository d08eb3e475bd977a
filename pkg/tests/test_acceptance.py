"""Acceptance suite: one test per criterion, each reporting a PASS/FAIL line."""

import time
from contextlib import contextmanager

import numpy as np

from rodlab.cli import main
from rodlab.dynamics import (
    HRParams,
    difference_rhs,
    energy_identity_residual,
    evolve,
    h1_energy,
    hr_rhs,
)
from rodlab.holder import (
    ExperimentConfig,
    Region,
    classify_region,
    envelope_check,
    holder_sweep,
    interpolation_chain_check,
    theoretical_alpha,
)
from rodlab.inequalities import (
    PeetreParams,
    commutator_ratio_sweep,
    kernel_growth_sweep,
    peetre_integral,
    product_ratio_sweep,
)
from rodlab.spectral import (
    SpectralField,
    TorusGrid,
    interpolation_gap,
    random_field,
    sobolev_norm,
)

from conftest import ACCEPTANCE_LINES


@contextmanager
def criterion(number, title, limit_s):
    """Time the block, then record and assert a single verdict.

    The block yields a dict; it must set ``ok`` and may set ``detail``.
    """
    state = {"ok": False, "detail": ""}
    start = time.perf_counter()
    try:
        yield state
    finally:
        elapsed = time.perf_counter() - start
        within = limit_s is None or elapsed < limit_s
        ok = bool(state["ok"]) and within
        timing = f"{elapsed:.2f}s" + ("" if limit_s is None else f" (limit {limit_s:g}s)")
        ACCEPTANCE_LINES.append(
            f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title}; {state['detail']}; {timing}"
        )
    assert state["ok"], state["detail"]
    assert within, f"took {elapsed:.2f}s, limit {limit_s}s"


def test_criterion_1_regions():
    with criterion(1, "region and exponent fidelity", 1.0) as c:
        labels = {
            (2.0, 0.5): (Region.OMEGA1, 1.0),
            (1.6, -0.5): (Region.OMEGA2, 4.0 / 7.0),
            (2.0, 1.5): (Region.OMEGA3, 0.5),
        }
        spots = all(
            classify_region(s, r) is reg and abs(theoretical_alpha(s, r) - a) <= 1e-12
            for (s, r), (reg, a) in labels.items()
        )
        bad = 0
        for s in np.linspace(1.5, 4.0, 201)[1:]:
            for r in np.linspace(-1.0, 4.0, 201)[:-1]:
                hits = (
                    (s > 1.5 and -1 <= r <= s - 1 and r >= 2 - s)
                    + (1.5 < s < 3 and -1 <= r < 2 - s)
                    + (s > 1.5 and s - 1 < r < s)
                )
                region = classify_region(s, r)
                bad += hits > 1 or (hits == 1) == (region is Region.OUTSIDE)
        jump = 0.0
        for s in np.linspace(1.55, 2.95, 29):
            # approach each boundary from the neighbouring open region
            jump = max(jump, abs(theoretical_alpha(s, 2 - s - 1e-13) - theoretical_alpha(s, 2 - s)))
            jump = max(jump, abs(theoretical_alpha(s, s - 1 + 1e-13) - theoretical_alpha(s, s - 1)))
        c["ok"] = spots and bad == 0 and jump <= 1e-12
        c["detail"] = f"spot rows {'ok' if spots else 'wrong'}, {bad} grid mislabels, max boundary jump {jump:.1e}"


def test_criterion_2_peetre_closed_form():
    with criterion(2, "weighted integral closed form at a = 0", 1.0) as c:
        v11 = peetre_integral(PeetreParams(1.0, 1.0, 0.0))
        v22 = peetre_integral(PeetreParams(2.0, 2.0, 0.0))
        e11, e22 = abs(v11 / 2.0 - 1), abs(v22 / (2.0 / 3.0) - 1)
        c["ok"] = e11 <= 1e-8 and e22 <= 1e-8
        c["detail"] = f"p=q=1 -> {v11!r} (rel {e11:.1e}), p=q=2 -> {v22!r} (rel {e22:.1e})"


def test_criterion_3_decay_laws():
    with criterion(3, "decay rate and kernel negative control", 30.0) as c:
        base = peetre_integral(PeetreParams(2.0, 2.0, 1.0)) * 2.0**2
        scaled = [peetre_integral(PeetreParams(2.0, 2.0, a)) * (1 + a) ** 2 for a in 2.0 ** np.arange(11)]
        spread = max(max(scaled) / base, base / min(scaled))
        rep = kernel_growth_sweep(1.6, 0.0, [2**j for j in range(11)])
        g = rep.meta["growth_exponent"]
        c["ok"] = spread <= 3.0 and abs(g - 0.8) <= 0.1
        c["detail"] = f"<a>^2 I(a) within factor {spread:.3f} of a=1, growth exponent {g:.4f}"


def test_criterion_4_inequality_boundedness():
    with criterion(4, "commutator and product ratios bounded", 120.0) as c:
        parts, ok = [], True
        for s, r in [(2.0, 0.5), (2.0, 1.0), (1.6, 0.6)]:
            rep = commutator_ratio_sweep(s, r, ensemble_size=100, bandwidths=(64, 128, 256, 512))
            ok &= rep.verdict == "bounded" and rep.slope <= 0.1
            parts.append(f"comm{(s, r)} {rep.slope:+.3f}")
        for s, r in [(2.0, 0.5), (1.6, 0.4), (2.0, 0.0)]:
            rep = product_ratio_sweep(s, r, ensemble_size=100, bandwidths=(64, 128, 256, 512))
            ok &= rep.verdict == "bounded" and rep.slope <= 0.1
            parts.append(f"prod{(s, r)} {rep.slope:+.3f}")
        c["ok"] = ok
        c["detail"] = "slopes " + ", ".join(parts)


def test_criterion_5_solver():
    with criterion(5, "solver correctness", 60.0) as c:
        grid = TorusGrid(64)
        const = SpectralField.constant(grid, 0.7)
        fixed = all(np.abs(hr_rhs(const, g).coeffs).max() == 0.0 for g in (-1.0, 0.0, 1.0, 2.0))

        a = 0.3
        cosine = SpectralField.from_function(grid, lambda x: a * np.cos(x))
        rhs_err = max(
            np.abs(hr_rhs(cosine, g).values() - 3 * (g + 1) * a * a / 10 * np.sin(2 * grid.nodes)).max()
            for g in (-1.0, 0.0, 1.0, 2.0)
        )

        u0 = SpectralField.from_modes(grid, {1: 0.25, 2: 0.1j, 3: 0.05})
        sols = [evolve(u0, HRParams(0.5, dt, 2.0)).final for dt in (0.02, 0.01, 0.005)]
        order = np.log2(sobolev_norm(0, sols[0] - sols[1]) / sobolev_norm(0, sols[1] - sols[2]))

        big = TorusGrid(256)
        drift = 0.0
        for gamma in (-1.0, 0.0, 0.5, 1.0, 2.0):
            w = random_field(big, 3.0, np.random.default_rng(17))
            w = w * (0.9 / sobolev_norm(3.0, w))
            traj = evolve(w, HRParams(gamma, 1e-3, 1.0, snapshot_every=50))
            e0 = h1_energy(w)
            drift = max(drift, max(abs(h1_energy(u) / e0 - 1) for u in traj.fields))

        c["ok"] = fixed and rhs_err <= 1e-12 and abs(order - 4.0) <= 0.2 and drift <= 1e-8
        c["detail"] = (f"constants fixed {fixed}, cosine rhs err {rhs_err:.1e}, "
                       f"RK4 order {order:.3f}, max H1 drift {drift:.1e}")


def test_criterion_6_identities():
    with criterion(6, "difference and energy identities", 60.0) as c:
        rng = np.random.default_rng(6)
        grid = TorusGrid(64)
        worst = 0.0
        for j in range(100):
            u = random_field(grid, 1.0, rng, 20)
            w = random_field(grid, 1.0, rng, 20)
            gamma = (-1.0, 0.0, 0.5, 1.0, 2.0)[j % 5]
            diff = hr_rhs(u, gamma) - hr_rhs(w, gamma) - difference_rhs(u - w, u, w, gamma)
            scale = sobolev_norm(0, hr_rhs(u, gamma)) + sobolev_norm(0, hr_rhs(w, gamma))
            worst = max(worst, sobolev_norm(0, diff) / scale)

        u0 = SpectralField.from_modes(grid, {1: 0.25, 2: 0.1j, 3: 0.05})
        w0 = SpectralField.from_modes(grid, {1: 0.2, 2: 0.05})
        res = []
        for dt in (0.01, 0.005):
            p = HRParams(1.0, dt, 0.5)
            res.append(energy_identity_residual(evolve(u0, p), evolve(w0, p), 0.5, 0.25))
        ratio = res[0] / res[1]
        c["ok"] = worst <= 1e-13 and abs(ratio - 4.0) <= 0.2
        c["detail"] = f"difference mismatch {worst:.1e} (relative), residual ratio {ratio:.3f}"


def test_criterion_7_holder():
    with criterion(7, "Hoelder experiment consistency", 300.0) as c:
        parts, ok = [], True
        for s, r in [(2.0, 0.5), (2.0, 1.5), (1.6, -0.5)]:
            cfg = ExperimentConfig(s, r, n_points=256)
            fit = holder_sweep(cfg)
            alpha = fit.alpha_theory
            if classify_region(s, r) is Region.OMEGA1:
                good = abs(fit.slope - 1.0) <= 0.05
            else:
                good = fit.slope >= alpha - 0.05
            # single C fitted on the coarse half must cover every finer epsilon
            C, envelope = envelope_check(fit.epsilons, fit.distancesT, alpha, cfg.slope_tol)
            ok &= good and envelope and len(fit.epsilons) == 8
            parts.append(f"{(s, r)} slope {fit.slope:.4f} vs alpha {alpha:.4f}, C {C:.3g}")
        c["ok"] = ok
        c["detail"] = "; ".join(parts)


def test_criterion_8_interpolation():
    with criterion(8, "interpolation inequalities", 10.0) as c:
        rng = np.random.default_rng(8)
        grid = TorusGrid(64)
        worst = 0.0
        for _ in range(1000):
            f = random_field(grid, rng.uniform(-1, 3), rng, int(rng.integers(1, 31)))
            m1, m, m2 = np.sort(rng.uniform(-2, 4, 3))
            worst = min(worst, interpolation_gap(f, m1, m, m2) / sobolev_norm(m, f))
        points = [(1.75, 0.0), (1.6, -0.5), (2.0, 1.5), (2.5, 1.75)]
        for j in range(1000):
            s, r = points[j % 4]
            u = random_field(grid, s, rng, int(rng.integers(1, 31)))
            w = random_field(grid, s, rng, int(rng.integers(1, 31)))
            scale = sobolev_norm(s, u - w)
            worst = min(worst, interpolation_chain_check(u, w, s, r) / scale)
        single = 0.0
        mode = SpectralField.from_modes(grid, {7: 0.4})
        for m1, m, m2 in [(0, 1, 2), (-1, 0.3, 2.5), (0.5, 0.75, 4)]:
            single = max(single, abs(interpolation_gap(mode, m1, m, m2)) / sobolev_norm(m, mode))
        for s, r in points:
            single = max(single, abs(interpolation_chain_check(mode, SpectralField.zeros(grid), s, r))
                         / sobolev_norm(s, mode))
        c["ok"] = worst >= -1e-10 and single <= 1e-14
        c["detail"] = f"most negative scaled slack {worst:.1e}, single-mode gap {single:.1e}"


def _csvs(root):
    return {str(p.relative_to(root)): p.read_bytes() for p in sorted(root.rglob("*.csv"))}


def test_criterion_9_reproducibility(tmp_path):
    with criterion(9, "bit-identical artifacts across reruns and jobs 1/4", None) as c:
        mismatched, codes = [], {}
        for command in ("evolve", "inequality", "holder", "region-map"):
            runs = []
            for tag, jobs in (("a", 1), ("b", 1), ("c", 4)):
                out = tmp_path / command / tag
                codes[command, tag] = main([command, "--out", str(out), "--jobs", str(jobs)])
                runs.append(_csvs(out))
            if not runs[0] or runs[0] != runs[1] or runs[0] != runs[2]:
                mismatched.append(command)
        c["ok"] = not mismatched and all(code == 0 for code in codes.values())
        c["detail"] = (f"{len(codes)} runs, exit codes {sorted(set(codes.values()))}, "
                       f"mismatches {mismatched or 'none'}")
