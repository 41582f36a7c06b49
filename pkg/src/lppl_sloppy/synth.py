"""AR(1) noise and synthetic LPPL-plus-noise series."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.signal import lfilter

from .errors import DomainError
from .model import PARAM_NAMES, LpplParams, PriceSeries, Scale, eval_lppl
from .rng import standard_normal, stream

# Noise level and memory loss that mimic the residuals of the 1987 Hang Seng fit.
HANG_SENG_1987_LAMBDA = 0.06
HANG_SENG_1987_SIGMA = 25.0
HANG_SENG_1987_LENGTH = 834

# Synthetic truth: an index rising from ~1100 to ~3900 over 834 trading days.
REFERENCE_1987 = LpplParams(A=4000.0, B=-100.0, C=0.08, t_c=834.0, alpha=0.5, omega=7.4, phi=2.0)

_NOISE_STREAM = 0


@dataclass(frozen=True)
class Ar1Config:
    lam: float = HANG_SENG_1987_LAMBDA
    sigma: float = HANG_SENG_1987_SIGMA
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.lam <= 1.0:
            raise ValueError(f"memory loss must lie in (0, 1], got {self.lam}")
        if not self.sigma >= 0.0:
            raise ValueError(f"sigma must be >= 0, got {self.sigma}")

    @property
    def stationary_variance(self) -> float:
        """Variance of the unit-innovation recursion once the cold start has decayed."""
        rho = 1.0 - self.lam
        return 1.0 / (1.0 - rho * rho)


def ar1_generate(config: Ar1Config, length: int, *path: int) -> np.ndarray:
    """``eta(1..length)`` with ``eta(0) = 0`` and ``eta(t) = (1 - lam) eta(t-1) + eps(t)``.

    The innovations are unit normals from the stream ``(config.seed, *path)``;
    ``sigma`` is *not* applied here.
    """
    if length < 1:
        raise ValueError("length must be >= 1")
    eps = standard_normal(stream(config.seed, _NOISE_STREAM, *path), int(length))
    return lfilter([1.0], [1.0, -(1.0 - config.lam)], eps)


@dataclass(frozen=True)
class SynthSpec:
    truth: LpplParams = REFERENCE_1987
    noise: Ar1Config = field(default_factory=Ar1Config)
    length: int = HANG_SENG_1987_LENGTH
    t0: int = 0

    def __post_init__(self):
        if self.length < 2:
            raise ValueError("length must be >= 2")
        if not self.truth.t_c > self.t0:
            raise ValueError("t_c must lie after t0")

    @property
    def t1(self) -> int:
        return self.t0 + self.length - 1

    def to_dict(self) -> dict:
        d = self.truth.as_dict()
        d.update(lambda_=self.noise.lam, sigma=self.noise.sigma, seed=self.noise.seed,
                 length=self.length, t0=self.t0)
        d["lambda"] = d.pop("lambda_")
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SynthSpec":
        return cls(
            truth=LpplParams(**{k: d[k] for k in PARAM_NAMES}),
            noise=Ar1Config(lam=float(d["lambda"]), sigma=float(d["sigma"]), seed=int(d["seed"])),
            length=int(d["length"]),
            t0=int(d["t0"]),
        )

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path) -> "SynthSpec":
        return cls.from_dict(json.loads(Path(path).read_text()))


def make_series(spec: SynthSpec, *path: int) -> PriceSeries:
    """The truth curve plus ``sigma * eta`` on days ``t0 .. t0 + length - 1``.

    ``path`` selects an independent noise realization (Monte Carlo sample).
    """
    times = np.arange(spec.t0, spec.t1 + 1, dtype=float)
    if spec.t1 >= spec.truth.t_c:
        raise DomainError(f"day {spec.t1} is not before t_c = {spec.truth.t_c}")
    curve = eval_lppl(spec.truth, times)
    noise = spec.noise.sigma * ar1_generate(spec.noise, spec.length, *path)
    return PriceSeries(spec.t0, curve + noise, Scale.RAW)


def estimate_ar1_memory_loss(noise: np.ndarray) -> float:
    """Memory loss from the lag-1 least-squares slope (no intercept)."""
    x, y = noise[:-1], noise[1:]
    return 1.0 - float(x @ y) / float(x @ x)
