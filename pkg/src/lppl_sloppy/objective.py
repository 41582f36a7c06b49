"""Normalized squared residual, the linear (A, B, C) sub-problem and the Hessian."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import BZero, DegenerateDesign, DegenerateWindow, DomainError
from .model import LpplParams, Model, PriceSeries, eval_lppl, grad_lppl

# Condition limit on the (equilibrated) normal equations of the linear sub-problem.
MAX_CONDITION = 1e12
B_ZERO_RTOL = 1e-12
_CBRT_EPS = np.finfo(float).eps ** (1.0 / 3.0)
# Natural step scales (A, B, C, t_c [days], alpha, omega, phi) for finite differences.
FD_SCALES = np.array([1.0, 1.0, 1.0, 1.0, 1.0, 0.1, 1.0])


def degrees_of_freedom(series: PriceSeries, n_params: int = 7) -> int:
    dof = series.t1 - series.t0 - n_params
    if dof <= 0:
        raise DegenerateWindow(
            f"window t0={series.t0}..t1={series.t1} leaves {dof} degrees of freedom "
            f"for {n_params} parameters"
        )
    return dof


def _model_values(params: LpplParams, series: PriceSeries) -> np.ndarray:
    if params.t_c <= series.t1:
        raise DomainError(f"t_c={params.t_c} does not lie beyond the window end {series.t1}")
    return eval_lppl(params, series.times)


def residuals(params: LpplParams, series: PriceSeries) -> np.ndarray:
    """``f(t) - p(t)`` over the whole window."""
    return _model_values(params, series) - series.values


def normalized_sse(params: LpplParams, series: PriceSeries, n_params: int = 7) -> float:
    """Sum of squared residuals divided by ``t1 - t0 - n_params``.

    The power-law variant is covered by passing ``C = 0`` and ``n_params=5``.
    """
    dof = degrees_of_freedom(series, n_params)
    r = residuals(params, series)
    # np.sum reduces contiguous float64 pairwise, so the order is fixed.
    return float(np.sum(r * r) / dof)


@dataclass(frozen=True)
class LinearFit:
    A: float
    B: float
    C: float
    s: float
    params: LpplParams


def _design(nonlinear, times: np.ndarray, oscillating: bool) -> np.ndarray:
    t_c, alpha, omega, phi = (float(v) for v in nonlinear)
    dt = t_c - times
    log_dt = np.log(dt)
    u = np.exp(alpha * log_dt)
    cols = [np.ones_like(dt), u]
    if oscillating:
        cols.append(u * np.cos(omega * log_dt + phi))
    return np.column_stack(cols)


def solve_normal_equations(X: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Least squares through Cholesky on column-equilibrated normal equations.

    Raises :class:`DegenerateDesign` instead of regularizing when the
    equilibrated Gram matrix has condition number above ``MAX_CONDITION``.
    """
    gram = X.T @ X
    rhs = X.T @ y
    d = np.sqrt(np.diag(gram))
    if not np.all(np.isfinite(gram)) or np.any(d == 0):
        raise DegenerateDesign("design matrix has a zero or non-finite column")
    gram_eq = gram / np.outer(d, d)
    cond = np.linalg.cond(gram_eq)
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        raise DegenerateDesign(f"normal equations condition {cond:.3g} exceeds {MAX_CONDITION:g}")
    c, low = scipy.linalg.cho_factor(gram_eq)
    return scipy.linalg.cho_solve((c, low), rhs / d) / d


def linear_subfit(nonlinear, series: PriceSeries, model: Model = Model.LPPL) -> LinearFit:
    """Optimal ``(A, B, C)`` for fixed ``(t_c, alpha, omega, phi)``.

    The model is linear in ``(A, B, C2)`` with ``C2 = B * C``; ``C`` is
    recovered afterwards, which fails with :class:`BZero` when ``B`` vanishes.
    For ``Model.POWER_LAW`` only ``(A, B)`` are solved and ``C = 0``.
    """
    model = Model(model)
    nonlinear = tuple(float(v) for v in nonlinear)
    if len(nonlinear) == 2:
        nonlinear = nonlinear + (0.0, 0.0)
    t_c, alpha, omega, phi = nonlinear
    if t_c <= series.t1:
        raise DomainError(f"t_c={t_c} does not lie beyond the window end {series.t1}")
    oscillating = model is Model.LPPL
    X = _design(nonlinear, series.times, oscillating)
    theta = solve_normal_equations(X, series.values)
    A, B = theta[0], theta[1]
    if abs(B) < B_ZERO_RTOL * np.max(np.abs(series.values)):
        raise BZero(f"B={B:.3g} is numerically zero")
    C = theta[2] / B if oscillating else 0.0
    params = LpplParams(A, B, C, t_c, alpha, omega, phi)
    return LinearFit(float(A), float(B), float(C), normalized_sse(params, series, model.n_params), params)


def gradient_of_s(params: LpplParams, series: PriceSeries, n_params: int = 7) -> np.ndarray:
    """Analytic gradient of :func:`normalized_sse` with respect to all seven parameters."""
    dof = degrees_of_freedom(series, n_params)
    r = residuals(params, series)
    return 2.0 * (grad_lppl(params, series.times).T @ r) / dof


def fd_steps(x: np.ndarray) -> np.ndarray:
    return _CBRT_EPS * np.maximum(np.abs(x), FD_SCALES)


def hessian_of_s(params: LpplParams, series: PriceSeries, model: Model = Model.LPPL) -> np.ndarray:
    """Hessian of S by central differences of its analytic gradient.

    Rows and columns follow ``PARAM_NAMES`` restricted to ``model.free_index``
    (all seven for the LPPL, ``A, B, t_c, alpha`` for the power law).  The
    result is symmetrized.
    """
    model = Model(model)
    free = model.free_index
    x = params.as_array()
    h = fd_steps(x)
    if x[3] - h[3] <= series.t1:
        raise DomainError(
            f"t_c={x[3]} is within one finite-difference step of the window end {series.t1}"
        )
    n = len(free)
    H = np.empty((n, n))
    for col, j in enumerate(free):
        xp, xm = x.copy(), x.copy()
        xp[j] += h[j]
        xm[j] -= h[j]
        gp = gradient_of_s(LpplParams.from_array(xp), series, model.n_params)
        gm = gradient_of_s(LpplParams.from_array(xm), series, model.n_params)
        H[:, col] = (gp - gm)[list(free)] / (2.0 * h[j])
    return 0.5 * (H + H.T)
