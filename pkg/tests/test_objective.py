import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lppl_sloppy import (
    BZero, DegenerateDesign, DegenerateWindow, DomainError, LpplParams, PriceSeries, eval_lppl,
    gradient_of_s, hessian_of_s, linear_subfit, normalized_sse, residuals,
)
from lppl_sloppy.model import Model
from lppl_sloppy.objective import degrees_of_freedom, fd_steps


def noisy(truth, n, sigma, seed):
    rng = np.random.default_rng(seed)
    t = np.arange(n, dtype=float)
    return PriceSeries(0, eval_lppl(truth, t) + sigma * rng.standard_normal(n))


def test_perfect_fit_has_zero_objective(small_truth, small_series):
    assert abs(normalized_sse(small_truth, small_series)) <= 1e-18


def test_forced_arithmetic():
    values = np.full(10, 2.0)
    values[5] = 4.0
    p = LpplParams(A=2, B=0, C=0, t_c=20, alpha=0.5, omega=6, phi=0)
    assert normalized_sse(p, PriceSeries(0, values)) == 2.0


def test_degenerate_window():
    p = LpplParams(A=2, B=0, C=0, t_c=20, alpha=0.5, omega=6, phi=0)
    with pytest.raises(DegenerateWindow):
        normalized_sse(p, PriceSeries(0, np.ones(8)))
    assert degrees_of_freedom(PriceSeries(0, np.ones(8)), 5) == 2


@pytest.mark.parametrize("t_c", [199.0, 150.0])
def test_singularity_inside_window(small_truth, small_series, t_c):
    with pytest.raises(DomainError):
        normalized_sse(small_truth.replace(t_c=t_c), small_series)
    with pytest.raises(DomainError):
        linear_subfit((t_c, 0.5, 7.0, 1.0), small_series)


def test_objective_summation_is_accurate(noisy_series, reference_spec):
    p = reference_spec.truth
    r = residuals(p, noisy_series)
    exact = math.fsum(float(x) * float(x) for x in r) / (noisy_series.t1 - 7)
    assert normalized_sse(p, noisy_series) == pytest.approx(exact, rel=1e-12)
    perm = np.random.default_rng(0).permutation(r.size)
    assert np.sum(r[perm] ** 2) / (noisy_series.t1 - 7) == pytest.approx(exact, rel=1e-12)


def test_linear_subfit_recovers_exact_linear_parameters(small_truth, small_series):
    fit = linear_subfit((small_truth.t_c, small_truth.alpha, small_truth.omega, small_truth.phi), small_series)
    for got, want in [(fit.A, small_truth.A), (fit.B, small_truth.B), (fit.C, small_truth.C)]:
        assert got == pytest.approx(want, rel=1e-8)


def test_linear_subfit_s_is_objective_at_assembled_params(small_truth):
    series = noisy(small_truth, 200, 1.0, 4)
    fit = linear_subfit((212.0, 0.55, 7.5, 1.2), series)
    assert fit.s == normalized_sse(fit.params, series)
    assert (fit.params.A, fit.params.B, fit.params.C) == (fit.A, fit.B, fit.C)


def test_linear_subfit_zero_exponent_is_degenerate(small_series):
    with pytest.raises(DegenerateDesign):
        linear_subfit((210.0, 0.0, 8.0, 1.0), small_series)


def test_linear_subfit_flat_series_has_zero_b():
    series = PriceSeries(0, np.full(50, 3.0))
    with pytest.raises(BZero):
        linear_subfit((60.0, 0.5, 8.0, 1.0), series)


def grid_oracle_holds(series, nonlinear, n=50):
    fit = linear_subfit(nonlinear, series)
    t_c, alpha, omega, phi = nonlinear
    dt = t_c - series.times
    u = dt ** alpha
    cosv = u * np.cos(omega * np.log(dt) + phi)
    dof = series.t1 - series.t0 - 7
    best = np.inf
    c2 = fit.B * fit.C
    axes = [np.linspace(-3 * abs(v), 3 * abs(v), n) for v in (fit.A, fit.B, c2)]
    for a in axes[0]:
        # vectorized over (B, C2)
        pred = a + axes[1][:, None, None] * u + axes[2][None, :, None] * cosv
        s = np.sum((pred - series.values) ** 2, axis=2) / dof
        best = min(best, s.min())
    return fit.s <= best, fit.s, best


def test_linear_subfit_beats_brute_force_grid(small_truth):
    series = noisy(small_truth, 200, 2.0, 11)
    ok, s, best = grid_oracle_holds(series, (213.0, 0.6, 8.2, 0.9))
    assert ok, (s, best)


@settings(max_examples=50, deadline=None)
@given(st.floats(1e-3, 1e3))
def test_linear_subfit_scale_equivariance(k):
    truth = LpplParams(A=500.0, B=-20.0, C=0.1, t_c=210.0, alpha=0.6, omega=8.0, phi=1.0)
    series = noisy(truth, 200, 1.0, 5)
    scaled = PriceSeries(0, k * series.values)
    nl = (212.0, 0.55, 7.7, 1.1)
    a, b = linear_subfit(nl, series), linear_subfit(nl, scaled)
    assert b.A == pytest.approx(k * a.A, rel=1e-10)
    assert b.B == pytest.approx(k * a.B, rel=1e-10)
    assert b.C == pytest.approx(a.C, rel=1e-10)
    assert b.s == pytest.approx(k * k * a.s, rel=1e-10)


def test_linear_subfit_power_law(small_truth):
    pl = small_truth.replace(C=0.0)
    series = PriceSeries(0, eval_lppl(pl, np.arange(200.0)))
    fit = linear_subfit((pl.t_c, pl.alpha), series, Model.POWER_LAW)
    assert fit.C == 0 and fit.A == pytest.approx(pl.A, rel=1e-9)
    assert fit.s == normalized_sse(fit.params, series, 5)


def test_gradient_of_s_matches_finite_differences(small_truth):
    series = noisy(small_truth, 200, 1.0, 6)
    p = small_truth.replace(t_c=212.0, omega=7.8)
    g = gradient_of_s(p, series)
    x = p.as_array()
    h = fd_steps(x)
    for i in range(7):
        xp, xm = x.copy(), x.copy()
        xp[i] += h[i]
        xm[i] -= h[i]
        fd = (normalized_sse(LpplParams.from_array(xp), series)
              - normalized_sse(LpplParams.from_array(xm), series)) / (2 * h[i])
        assert fd == pytest.approx(g[i], rel=1e-6, abs=1e-8 * np.abs(g).max())


def s_mp(x, times, values, dof):
    A, B, C, t_c, alpha, omega, phi = x
    total = mpmath.mpf(0)
    for t, v in zip(times, values):
        dt = t_c - t
        f = A + B * dt ** alpha * (1 + C * mpmath.cos(omega * mpmath.log(dt) + phi))
        total += (f - v) ** 2
    return total / dof


def test_hessian_matches_high_precision_double_differences():
    truth = LpplParams(A=50.0, B=-4.0, C=0.1, t_c=40.0, alpha=0.6, omega=6.0, phi=1.0)
    series = noisy(truth, 30, 0.3, 9)
    p = truth.replace(t_c=41.0, alpha=0.55)
    H = hessian_of_s(p, series)
    dof = series.t1 - 7
    with mpmath.workdps(40):
        x = [mpmath.mpf(v) for v in p.as_array()]
        times = [mpmath.mpf(float(t)) for t in series.times]
        vals = [mpmath.mpf(float(v)) for v in series.values]
        h = [mpmath.mpf(1e-6) * max(abs(v), 1) for v in x]

        def S(dx):
            return s_mp([a + b for a, b in zip(x, dx)], times, vals, dof)

        ref = np.empty((7, 7))
        for i in range(7):
            for j in range(i, 7):
                def e(si, sj):
                    d = [mpmath.mpf(0)] * 7
                    d[i] += si * h[i]
                    d[j] += sj * h[j]
                    return S(d)
                ref[i, j] = ref[j, i] = float(
                    (e(1, 1) - e(1, -1) - e(-1, 1) + e(-1, -1)) / (4 * h[i] * h[j]))
    mask = np.abs(ref) > 1e-8 * np.linalg.norm(ref)
    rel = np.abs(H - ref)[mask] / np.abs(ref)[mask]
    assert rel.max() < 1e-4


def test_hessian_symmetric_and_finite(small_truth):
    series = noisy(small_truth, 200, 1.0, 7)
    H = hessian_of_s(small_truth, series)
    assert H.shape == (7, 7) and np.all(np.isfinite(H))
    np.testing.assert_array_equal(H, H.T)


def test_hessian_at_noiseless_minimum(noiseless_spec, noiseless_series):
    p = noiseless_spec.truth
    g = gradient_of_s(p, noiseless_series)
    scale = np.max(np.abs(noiseless_series.values)) ** 2
    assert np.max(np.abs(g)) < 1e-6 * scale
    lam = np.linalg.eigvalsh(hessian_of_s(p, noiseless_series))
    assert lam.min() >= -1e-6 * lam.max()


def test_hessian_needs_room_before_window_end(small_truth, small_series):
    with pytest.raises(DomainError):
        hessian_of_s(small_truth.replace(t_c=199.0 + 1e-4), small_series)


def test_power_law_hessian_uses_free_parameters(small_truth):
    series = noisy(small_truth.replace(C=0.0), 200, 1.0, 8)
    H = hessian_of_s(small_truth.replace(C=0.0), series, Model.POWER_LAW)
    assert H.shape == (4, 4)
