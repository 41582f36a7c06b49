"""The log-periodic power law and its parameter gradient.

The function is

    f(t) = A + B (t_c - t)^alpha [1 + C cos(omega ln(t_c - t) + phi)]

and is only defined strictly before the singularity ``t_c``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, fields, replace

import numpy as np

from .errors import DomainError

PARAM_NAMES = ("A", "B", "C", "t_c", "alpha", "omega", "phi")
NONLINEAR_NAMES = ("t_c", "alpha", "omega", "phi")
NONLINEAR_INDEX = (3, 4, 5, 6)


@dataclass(frozen=True)
class LpplParams:
    A: float
    B: float
    C: float
    t_c: float
    alpha: float
    omega: float
    phi: float

    def __post_init__(self):
        for f in fields(self):
            v = float(getattr(self, f.name))
            if not np.isfinite(v):
                raise ValueError(f"parameter {f.name} is not finite: {v}")
            object.__setattr__(self, f.name, v)

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, n) for n in PARAM_NAMES], dtype=float)

    @classmethod
    def from_array(cls, x) -> "LpplParams":
        x = np.asarray(x, dtype=float)
        if x.shape != (7,):
            raise ValueError(f"expected 7 parameters, got shape {x.shape}")
        return cls(*x.tolist())

    def as_dict(self) -> dict:
        return {n: getattr(self, n) for n in PARAM_NAMES}

    def replace(self, **changes) -> "LpplParams":
        return replace(self, **changes)


class Model(str, enum.Enum):
    """Full LPPL or the pure power law obtained with ``C = 0``."""

    LPPL = "lppl"
    POWER_LAW = "power-law"

    @property
    def n_params(self) -> int:
        return 7 if self is Model.LPPL else 5

    @property
    def free_index(self) -> tuple:
        """Indices into ``PARAM_NAMES`` that the model actually fits."""
        return tuple(range(7)) if self is Model.LPPL else (0, 1, 3, 4)


class Scale(str, enum.Enum):
    RAW = "raw"
    LOG = "log"


@dataclass(frozen=True, eq=False)
class PriceSeries:
    """Observations at the consecutive integer days ``t0 .. t1``."""

    t0: int
    values: np.ndarray
    scale: Scale = Scale.RAW

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 1 or values.size < 2:
            raise ValueError("a price series needs at least two observations")
        if not np.all(np.isfinite(values)):
            raise ValueError("price series contains non-finite values")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "t0", int(self.t0))
        object.__setattr__(self, "scale", Scale(self.scale))

    def __len__(self):
        return self.values.size

    @property
    def t1(self) -> int:
        return self.t0 + self.values.size - 1

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.t0, self.t1 + 1, dtype=float)

    def truncate(self, t_end: int) -> "PriceSeries":
        """Prefix of the series ending at day ``t_end`` (inclusive)."""
        t_end = int(t_end)
        if not self.t0 < t_end <= self.t1:
            raise ValueError(f"t_end={t_end} outside ({self.t0}, {self.t1}]")
        return PriceSeries(self.t0, self.values[: t_end - self.t0 + 1], self.scale)


def _check_domain(params: LpplParams, t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if np.any(t >= params.t_c):
        raise DomainError(f"evaluation at t >= t_c = {params.t_c}")
    return t


def _scalar_or_array(x, t):
    return float(x) if np.ndim(t) == 0 else x


def eval_lppl(params: LpplParams, t):
    """Evaluate the LPPL at ``t`` (scalar or array), all ``t < t_c``."""
    tt = _check_domain(params, t)
    dt = params.t_c - tt
    log_dt = np.log(dt)
    power = dt ** params.alpha
    osc = 1.0 + params.C * np.cos(params.omega * log_dt + params.phi)
    return _scalar_or_array(params.A + params.B * power * osc, t)


def eval_power_law(params: LpplParams, t):
    """``A + B (t_c - t)^alpha``; the oscillation parameters are ignored."""
    tt = _check_domain(params, t)
    dt = params.t_c - tt
    return _scalar_or_array(params.A + params.B * dt ** params.alpha, t)


def grad_lppl(params: LpplParams, t) -> np.ndarray:
    """Analytic partial derivatives ordered as ``PARAM_NAMES``.

    Returns shape ``(7,)`` for scalar ``t`` and ``(len(t), 7)`` otherwise.
    """
    tt = _check_domain(params, t)
    A, B, C, t_c, alpha, omega, phi = params.as_array()
    dt = t_c - np.atleast_1d(tt)
    log_dt = np.log(dt)
    power = dt ** alpha
    arg = omega * log_dt + phi
    cos_, sin_ = np.cos(arg), np.sin(arg)
    osc = 1.0 + C * cos_

    g = np.empty((dt.size, 7))
    g[:, 0] = 1.0
    g[:, 1] = power * osc
    g[:, 2] = B * power * cos_
    g[:, 3] = B * power / dt * (alpha * osc - C * omega * sin_)
    g[:, 4] = B * power * log_dt * osc
    g[:, 5] = -B * C * power * log_dt * sin_
    g[:, 6] = -B * C * power * sin_
    return g[0] if np.ndim(t) == 0 else g
