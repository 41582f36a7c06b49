"""Levenberg-Marquardt fitting of the LPPL with the linear part projected out."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import _lmcore
from .errors import BZero, DegenerateDesign, DomainError, InitInvalid, LpplError
from .model import LpplParams, Model, PriceSeries
from .objective import degrees_of_freedom, normalized_sse
from .rng import stream, uniform_open

TWO_PI = 2.0 * math.pi

DEFAULT_INIT_RANGES = {
    # t_c is expressed in units of the window length (t1 - t0) past t1 and
    # clamped below at t1 + 1.
    "t_c": (0.0, 2.0),
    "alpha": (0.05, 1.95),
    "omega": (2.0, 25.0),
    "phi": (0.0, TWO_PI),
}

# Open box the local search may not leave; t_c is in window lengths past t1.
DEFAULT_SEARCH_BOX = {
    "t_c": (0.0, 5.0),
    "alpha": (0.0, 2.0),
    "omega": (0.0, 50.0),
    "phi": (-math.inf, math.inf),
}

_STATUS_NAMES = {
    _lmcore.CONVERGED_GRAD: "converged-gradient",
    _lmcore.CONVERGED_STEP: "converged-step",
    _lmcore.MAX_ITERS: "max-iterations",
    _lmcore.ALL_REJECTED: "all-steps-rejected",
    _lmcore.INIT_INVALID: "init-invalid",
}


@dataclass(frozen=True)
class FitConfig:
    max_iters: int = 500
    grad_tol: float = 1e-8
    step_tol: float = 1e-10
    damping_init_factor: float = 1e-3
    damping_scale: float = 10.0
    n_starts: int = 50
    seed: int = 0
    model: Model = Model.LPPL
    init_ranges: dict = field(default_factory=lambda: dict(DEFAULT_INIT_RANGES))
    search_box: dict = field(default_factory=lambda: dict(DEFAULT_SEARCH_BOX))

    def __post_init__(self):
        object.__setattr__(self, "model", Model(self.model))
        ranges = dict(DEFAULT_INIT_RANGES)
        ranges.update({k: tuple(float(b) for b in v) for k, v in self.init_ranges.items()})
        object.__setattr__(self, "init_ranges", ranges)
        box = dict(DEFAULT_SEARCH_BOX)
        box.update({k: tuple(float(b) for b in v) for k, v in self.search_box.items()})
        object.__setattr__(self, "search_box", box)
        for name, (lo, hi) in box.items():
            if name not in DEFAULT_SEARCH_BOX or not lo < hi:
                raise ValueError(f"bad search box entry {name}: ({lo}, {hi})")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.n_starts < 1:
            raise ValueError("n_starts must be >= 1")
        for name, (lo, hi) in ranges.items():
            if name not in DEFAULT_INIT_RANGES:
                raise ValueError(f"unknown init range {name!r}")
            if not lo < hi:
                raise ValueError(f"empty init range for {name}: ({lo}, {hi})")

    def replace(self, **changes) -> "FitConfig":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return {
            "max_iters": self.max_iters,
            "grad_tol": self.grad_tol,
            "step_tol": self.step_tol,
            "damping_init_factor": self.damping_init_factor,
            "damping_scale": self.damping_scale,
            "n_starts": self.n_starts,
            "seed": self.seed,
            "model": self.model.value,
            "init_ranges": {k: list(v) for k, v in self.init_ranges.items()},
            "search_box": {k: list(v) for k, v in self.search_box.items()},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FitConfig":
        d = dict(d)
        d["init_ranges"] = {k: tuple(v) for k, v in d.get("init_ranges", {}).items()}
        d["search_box"] = {k: tuple(v) for k, v in d.get("search_box", {}).items()}
        return cls(**d)


@dataclass(frozen=True)
class FitResult:
    params: LpplParams
    s: float
    converged: bool
    iterations: int
    start_index: int
    status: str
    n_params: int = 7
    accepted_s: tuple = ()


def _n_nonlinear(model: Model) -> int:
    return 4 if model is Model.LPPL else 2


def _canonical(x: np.ndarray, theta: np.ndarray, model: Model) -> LpplParams:
    """Assemble the seven parameters with ``C >= 0``, ``omega >= 0`` and ``phi`` in [0, 2pi)."""
    A, B, C2 = (float(v) for v in theta)
    t_c, alpha = float(x[0]), float(x[1])
    if model is Model.POWER_LAW:
        return LpplParams(A, B, 0.0, t_c, alpha, 0.0, 0.0)
    omega, phi = float(x[2]), float(x[3])
    C = C2 / B
    if omega < 0.0:
        omega, phi = -omega, -phi
    if C < 0.0:
        C, phi = -C, phi + math.pi
    phi = math.fmod(phi, TWO_PI)
    if phi < 0.0:
        phi += TWO_PI
    if phi >= TWO_PI:
        phi = 0.0
    return LpplParams(A, B, C, t_c, alpha, omega, phi)


def _init_vector(init, model: Model) -> np.ndarray:
    if isinstance(init, dict):
        names = ("t_c", "alpha", "omega", "phi")[: _n_nonlinear(model)]
        return np.array([float(init[k]) for k in names])
    x = np.asarray(init, dtype=float).ravel()
    return x[: _n_nonlinear(model)].copy()


def search_bounds(series: PriceSeries, config: FitConfig):
    """Open ``(lo, hi)`` arrays over the nonlinear parameters; ``lo[0]`` is ``t1``."""
    span = series.t1 - series.t0
    names = ("t_c", "alpha", "omega", "phi")[: _n_nonlinear(config.model)]
    lo = np.array([config.search_box[k][0] for k in names])
    hi = np.array([config.search_box[k][1] for k in names])
    lo[0] = series.t1 + max(lo[0] * span, 0.0)
    hi[0] = series.t1 + hi[0] * span
    return lo, hi


def _prepare(series: PriceSeries, config: FitConfig):
    degrees_of_freedom(series, config.model.n_params)
    lo, hi = search_bounds(series, config)
    return series.times, np.ascontiguousarray(series.values, dtype=float), lo, hi


def _finish(series, config, x, theta, status, iterations, start_index, hist=()) -> FitResult:
    if status == _lmcore.INIT_INVALID:
        raise InitInvalid(f"no admissible linear fit at start {start_index}: x={x}")
    params = _canonical(x, theta, config.model)
    return FitResult(
        params=params,
        s=normalized_sse(params, series, config.model.n_params),
        converged=status in (_lmcore.CONVERGED_GRAD, _lmcore.CONVERGED_STEP),
        iterations=int(iterations),
        start_index=int(start_index),
        status=_STATUS_NAMES[int(status)],
        n_params=config.model.n_params,
        accepted_s=tuple(float(v) for v in hist),
    )


def lm_fit(series: PriceSeries, init, config: FitConfig = FitConfig()) -> FitResult:
    """Local Levenberg-Marquardt descent from one start.

    ``init`` is ``(t_c, alpha, omega, phi)`` as a sequence or dict; the power
    law only uses ``(t_c, alpha)``.  ``FitResult.accepted_s`` lists the
    normalized S after every accepted step.
    """
    t, y, lo, hi = _prepare(series, config)
    x0 = _init_vector(init, config.model)
    if not np.all(np.isfinite(x0)):
        raise InitInvalid(f"non-finite start {x0}")
    if not x0[0] > series.t1:
        raise InitInvalid(f"start t_c={x0[0]} is not beyond the window end {series.t1}")
    if not np.all((lo < x0) & (x0 < hi)):
        raise InitInvalid(f"start {x0} lies outside the search box")
    x_out = np.zeros(4)
    theta = np.zeros(3)
    hist = np.empty(config.max_iters + 1)
    status, it, n_hist, _ = _lmcore.lm(
        t, y, x0, lo, hi, config.max_iters, config.grad_tol, config.step_tol,
        config.damping_init_factor, config.damping_scale, x_out, theta, hist,
    )
    dof = degrees_of_freedom(series, config.model.n_params)
    return _finish(series, config, x_out, theta, status, it, 0, hist[:n_hist] / dof)


def sample_starts(series: PriceSeries, config: FitConfig, n_starts: int | None = None) -> np.ndarray:
    """Initial ``(t_c, alpha, omega, phi)`` rows; row ``i`` comes from stream ``i``.

    Each row depends only on ``(seed, i)``, so the first ``k`` rows are the
    same whatever ``n_starts`` is.
    """
    n = config.n_starts if n_starts is None else n_starts
    span = series.t1 - series.t0
    lo_tc, hi_tc = config.init_ranges["t_c"]
    bounds = np.array([
        (max(series.t1 + 1.0, series.t1 + lo_tc * span), series.t1 + hi_tc * span),
        config.init_ranges["alpha"],
        config.init_ranges["omega"],
        config.init_ranges["phi"],
    ])
    out = np.empty((n, 4))
    for i in range(n):
        u = uniform_open(stream(config.seed, i), 4)
        out[i] = bounds[:, 0] + u * (bounds[:, 1] - bounds[:, 0])
    return out


def multistart_fit(series: PriceSeries, config: FitConfig = FitConfig()) -> FitResult:
    """Best of ``config.n_starts`` local fits, ties going to the lowest start index."""
    t, y, lo, hi = _prepare(series, config)
    inits = np.ascontiguousarray(sample_starts(series, config)[:, : _n_nonlinear(config.model)])
    n = inits.shape[0]
    x_out = np.zeros((n, 4))
    theta = np.zeros((n, 3))
    status = np.zeros(n, dtype=np.int64)
    iters = np.zeros(n, dtype=np.int64)
    sse = np.zeros(n)
    _lmcore.multistart(
        t, y, inits, lo, hi, config.max_iters, config.grad_tol, config.step_tol,
        config.damping_init_factor, config.damping_scale, x_out, theta, status, iters, sse,
    )
    best = None
    errors = []
    for k in range(n):
        try:
            res = _finish(series, config, x_out[k], theta[k], status[k], iters[k], k)
        except (InitInvalid, DomainError, DegenerateDesign, BZero, ValueError) as exc:
            errors.append(exc)
            continue
        if best is None or res.s < best.s:
            best = res
    if best is None:
        raise errors[0] if errors and isinstance(errors[0], LpplError) else InitInvalid(
            "every start failed"
        )
    return best


def all_start_results(series: PriceSeries, config: FitConfig) -> list:
    """Per-start results (``None`` for failed starts), mainly for diagnostics and tests."""
    out = []
    for k, x0 in enumerate(sample_starts(series, config)):
        try:
            res = lm_fit(series, x0, config)
            out.append(replace(res, start_index=k, accepted_s=()))
        except LpplError:
            out.append(None)
    return out
