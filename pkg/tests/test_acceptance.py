"""Acceptance checks, one test per criterion.

Each test prints a ``[PASS]``/``[FAIL]`` line (also echoed in the pytest
terminal summary).  The Monte Carlo run behind criteria 3 and 4 takes roughly
15 minutes on one core.
"""
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from lppl_sloppy import (
    Ar1Config, FitConfig, LpplParams, McConfig, PriceSeries, SynthSpec, ar1_generate,
    confidence_window, eigendecompose, eval_lppl, gaussianity_check, grad_lppl, hessian_of_s,
    linear_subfit, make_series, multistart_fit, run_mc, sloppiness_report,
)
from lppl_sloppy.cli import main

T_C = 834.0
CBRT_EPS = np.finfo(float).eps ** (1 / 3)


def record(number, title, passed, detail):
    line = f"[{'PASS' if passed else 'FAIL'}] {number:>2}. {title}: {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert passed, line


@pytest.fixture(scope="module")
def reference_fit():
    series = make_series(SynthSpec(), 0)
    start = time.perf_counter()
    fit = multistart_fit(series, FitConfig(n_starts=500, seed=0))
    report = sloppiness_report(hessian_of_s(fit.params, series))
    return fit, report, time.perf_counter() - start


@pytest.fixture(scope="module")
def reference_mc():
    config = McConfig(spec=SynthSpec(), n_samples=200)
    start = time.perf_counter()
    summary = run_mc(config)
    return summary, time.perf_counter() - start


def test_01_sloppiness_signature(reference_fit):
    fit, report, elapsed = reference_fit
    orders = report.orders_of_separation
    ok = orders is not None and orders >= 6 and elapsed < 120
    record(1, "Hessian spectrum spans >= 6 orders, 500 starts < 2 min", ok,
           f"orders={orders}, lambda=[{report.eigenvalues[0]:.3g} .. {report.eigenvalues[-1]:.3g}], "
           f"{elapsed:.1f}s, S={fit.s:.6g}")


def test_02_tc_sloppy_direction(reference_fit):
    _, report, _ = reference_fit
    names = list(report.parameter_names)
    i_tc, i_phi = names.index("t_c"), names.index("phi")
    smallest = report.eigenvectors[-2:]
    hits = [bool(np.argmax(np.abs(v)) == i_tc and abs(v[i_phi]) > 0.1) for v in smallest]
    dominant = [names[int(np.argmax(np.abs(v)))] for v in smallest]
    tc_rank = next((k for k, v in enumerate(report.eigenvectors) if np.argmax(np.abs(v)) == i_tc), None)
    record(2, "a two-smallest eigenvector is t_c-led with |phi| > 0.1", any(hits),
           f"two smallest led by {dominant}; t_c-led vector is eigenvalue #{tc_rank + 1} of 7"
           if tc_rank is not None else f"two smallest led by {dominant}; no t_c-led vector")


def test_03_mc_bias_within_60_days(reference_mc):
    summary, elapsed = reference_mc
    rows = [r for r in summary.rows if T_C - r.window_end <= 60]
    worst = max(rows, key=lambda r: abs(r.bias))
    ok = all(abs(r.bias) < 10 for r in rows)
    biases = ", ".join(f"{int(T_C - r.window_end)}d:{r.bias:+.1f}" for r in rows)
    record(3, "|mean t_c - t_c| < 10 days within 60 days of t_c", ok,
           f"bias by days-to-t_c {biases}; worst {worst.bias:+.2f}; run {elapsed / 60:.1f} min on 1 core")


def test_04_mc_dispersion_ratio(reference_mc):
    summary, _ = reference_mc
    rows = [r for r in summary.rows if 20 <= T_C - r.window_end <= 100]
    ratios = [r.std_tc / (T_C - r.window_end) for r in rows]
    ok = all(0.25 <= q <= 0.75 for q in ratios)
    text = ", ".join(f"{int(T_C - r.window_end)}d:{q:.2f}" for r, q in zip(rows, ratios))
    record(4, "std_tc / (t_c - t) in [0.25, 0.75] for 20-100 days out", ok, text)


def test_04b_gaussianity_recorded(reference_mc):
    summary, _ = reference_mc
    col = list(summary.rows).index(summary.row(int(T_C - 60)))
    check = gaussianity_check(summary.estimates[:, col])
    line = (f"[INFO]     t_c estimates at 60 days out: skew={check.skewness:.2f}, "
            f"excess kurtosis={check.excess_kurtosis:.2f}, JB={check.statistic:.1f}, "
            f"gaussian={'yes' if check.passed else 'no'} (recorded, not asserted)")
    print(line)
    ACCEPTANCE_LINES.append(line)


def test_05_ninety_five_percent_window():
    worst = 0.0
    for t_c, t in [(834.0, 774.0), (834.0, 684.0), (100.0, 99.0), (1e4, 37.5)]:
        d = t_c - t
        lo, hi = confidence_window(t_c, d / 2, 0.95)
        worst = max(worst, abs(lo - (t_c - 0.97998 * d)) / d, abs(hi - (t_c + 0.97998 * d)) / d)
    exact = confidence_window(0.0, 0.5, 0.95)[1]
    record(5, "95% window = t_c -+ 0.97998 (t_c - t)", worst < 1e-6,
           f"max deviation {worst:.2e} x (t_c - t); exact coefficient z_0.975 / 2 = {exact:.10f}")


def test_06_ar1_stationary_variance():
    start = time.perf_counter()
    eta = ar1_generate(Ar1Config(lam=0.06, seed=0), 10**6)
    elapsed = time.perf_counter() - start
    target = 1 / (1 - 0.94**2)
    rel = abs(np.var(eta) - target) / target
    record(6, "AR(1) variance within 2% of 8.5911 over 1e6 steps < 5 s", rel < 0.02 and elapsed < 5,
           f"var={np.var(eta):.4f} (rel err {rel:.2%}), {elapsed:.2f}s")


def test_07_gradient_against_finite_differences():
    rng = np.random.default_rng(7)
    worst_norm = worst_comp = 0.0
    for _ in range(100):
        p = LpplParams(A=rng.uniform(-1e3, 1e4), B=rng.uniform(-1e3, 1e3), C=rng.uniform(-0.9, 0.9),
                       t_c=rng.uniform(100, 1000), alpha=rng.uniform(0.05, 1.95),
                       omega=rng.uniform(2, 25), phi=rng.uniform(0, 2 * np.pi))
        # interior: at least 37 days before the singularity
        t = p.t_c - rng.uniform(37, p.t_c)
        x = p.as_array()
        h = CBRT_EPS * np.maximum(np.abs(x), 1.0)
        fd = np.empty(7)
        for i in range(7):
            xp, xm = x.copy(), x.copy()
            xp[i] += h[i]
            xm[i] -= h[i]
            fd[i] = (eval_lppl(LpplParams.from_array(xp), t)
                     - eval_lppl(LpplParams.from_array(xm), t)) / (2 * h[i])
        g = grad_lppl(p, t)
        worst_norm = max(worst_norm, np.linalg.norm(g - fd) / np.linalg.norm(g))
        worst_comp = max(worst_comp, np.max(np.abs(g - fd) / np.abs(g)))
    record(7, "grad_lppl vs central differences, rel err < 1e-6 at 100 points", worst_norm < 1e-6,
           f"max normwise {worst_norm:.2e} (max componentwise {worst_comp:.2e})")


def test_08_linear_subfit_beats_grid():
    rng = np.random.default_rng(8)
    failures = 0
    margin = np.inf
    for _ in range(20):
        truth = LpplParams(A=rng.uniform(100, 5000), B=rng.uniform(-200, -5), C=rng.uniform(0.02, 0.3),
                           t_c=rng.uniform(310, 400), alpha=rng.uniform(0.2, 0.9),
                           omega=rng.uniform(4, 15), phi=rng.uniform(0, 2 * np.pi))
        t = np.arange(300.0)
        values = eval_lppl(truth, t) + rng.uniform(1, 30) * rng.standard_normal(300)
        series = PriceSeries(0, values)
        nl = (truth.t_c * rng.uniform(0.99, 1.01), truth.alpha, truth.omega, truth.phi)
        fit = linear_subfit(nl, series)
        dt = nl[0] - t
        u = dt ** nl[1]
        v = u * np.cos(nl[2] * np.log(dt) + nl[3])
        axes = [np.linspace(-3 * abs(c), 3 * abs(c), 50) for c in (fit.A, fit.B, fit.B * fit.C)]
        best = np.inf
        for a in axes[0]:
            pred = a + axes[1][:, None, None] * u + axes[2][None, :, None] * v
            best = min(best, (np.sum((pred - values) ** 2, axis=2) / (299 - 7)).min())
        failures += fit.s > best
        margin = min(margin, best / fit.s)
    record(8, "linear_subfit S <= 50^3 grid minimum on 20 instances", failures == 0,
           f"{failures} violations, min grid/S ratio {margin:.4f}")


def test_09_jacobi_solver():
    rng = np.random.default_rng(9)
    recon = ortho = 0.0
    for _ in range(100):
        m = rng.standard_normal((7, 7)) * rng.uniform(1e-3, 1e3)
        h = m + m.T
        w, v = eigendecompose(h)
        recon = max(recon, np.linalg.norm(v @ np.diag(w) @ v.T - h) / np.linalg.norm(h))
        ortho = max(ortho, np.max(np.abs(v.T @ v - np.eye(7))))
    record(9, "Jacobi reconstruction < 1e-9 ||H||, orthonormality 1e-10", recon < 1e-9 and ortho < 1e-10,
           f"reconstruction {recon:.2e}, orthonormality {ortho:.2e}")


def test_10_noiseless_recovery():
    spec = SynthSpec(noise=Ar1Config(sigma=0.0))
    fit = multistart_fit(make_series(spec), FitConfig(n_starts=500))
    truth = spec.truth.as_dict()
    rel = max(abs(getattr(fit.params, k) - v) / abs(v) for k, v in truth.items())
    summary = run_mc(McConfig(spec=spec, n_samples=3))
    bias = max(abs(r.bias) for r in summary.rows)
    std = max(r.std_tc for r in summary.rows)
    ok = rel < 1e-4 and bias < 1e-3 and std < 1e-3
    record(10, "sigma=0: params within 1e-4, MC bias and std < 1e-3 days", ok,
           f"max param rel err {rel:.2e}; over {len(summary.rows)} window ends max |bias| {bias:.2e}, "
           f"max std {std:.2e}")


def test_11_cli_replay_determinism(tmp_path):
    data = tmp_path / "series.csv"
    assert main(["synth", "--output-dir", str(tmp_path / "data")]) == 0
    data.write_bytes((tmp_path / "data" / "series.csv").read_bytes())
    runs = {
        "fit": ["--input", str(data), "--starts", "50"],
        "sloppy": ["--input", str(data), "--starts", "50"],
        "track": ["--input", str(data), "--starts", "20", "--horizon", "60", "--stride", "20"],
        "synth": ["--noise-seed", "11", "--sample", "3"],
        "mc": ["--samples", "4", "--starts", "10", "--window-ends", "774:824:25"],
    }
    mismatched = []
    for command, args in runs.items():
        original = tmp_path / command
        assert main([command, *args, "--output-dir", str(original)]) == 0
        ref = {p.name: p.read_bytes() for p in original.iterdir() if p.name != "manifest.json"}
        for threads in ("1", "2"):
            out = tmp_path / f"{command}-replay-{threads}"
            code = main(["replay", str(original / "manifest.json"), "--output-dir", str(out),
                         "--threads", threads])
            got = {p.name: p.read_bytes() for p in out.iterdir() if p.name != "manifest.json"}
            if code != 0 or got != ref:
                mismatched.append(f"{command}@{threads}")
    record(11, "CLI replays from manifest are byte-identical at 1 and 2 threads", not mismatched,
           "all 5 subcommands identical" if not mismatched else f"mismatch: {mismatched}")
