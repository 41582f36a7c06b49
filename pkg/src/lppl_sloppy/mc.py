"""Expanding-window Monte Carlo of the crash-time estimate on synthetic data."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np
from scipy import stats
from scipy.special import ndtri

from .errors import LpplError, SummaryEmpty, TooFewSamples
from .fitter import FitConfig, multistart_fit
from .parallel import map_ordered
from .synth import SynthSpec, make_series

DEFAULT_LEVELS = (0.80, 0.95)


def default_window_ends(spec: SynthSpec, horizon: int = 150, stride: int = 10) -> tuple:
    """Every ``stride`` days from ``t_c - horizon`` up to ``t_c - stride``."""
    t_c = int(np.ceil(spec.truth.t_c))
    ends = [t_c - horizon + k * stride for k in range(horizon // stride)]
    return tuple(e for e in ends if spec.t0 + 8 < e <= spec.t1)


def fit_seed(base_seed: int, sample: int, window: int) -> int:
    """Multistart seed for one (sample, window) cell of the Monte Carlo grid."""
    ss = np.random.SeedSequence(int(base_seed) & ((1 << 64) - 1), spawn_key=(1, sample, window))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True)
class McConfig:
    spec: SynthSpec = field(default_factory=SynthSpec)
    n_samples: int = 200
    window_ends: tuple = ()
    fit_config: FitConfig = field(default_factory=lambda: FitConfig(n_starts=50))
    confidence_levels: tuple = DEFAULT_LEVELS

    def __post_init__(self):
        ends = tuple(int(e) for e in (self.window_ends or default_window_ends(self.spec)))
        object.__setattr__(self, "window_ends", ends)
        object.__setattr__(self, "confidence_levels", tuple(float(x) for x in self.confidence_levels))
        if self.n_samples < 2:
            raise ValueError("n_samples must be >= 2")
        if not ends:
            raise ValueError("no window ends")
        if any(b <= a for a, b in zip(ends, ends[1:])):
            raise ValueError("window ends must be strictly increasing")
        if ends[-1] >= self.spec.truth.t_c or ends[-1] > self.spec.t1:
            raise ValueError("window ends must precede t_c and lie inside the series")
        if any(not 0.0 < lv < 1.0 for lv in self.confidence_levels):
            raise ValueError("confidence levels must lie in (0, 1)")


def confidence_window(mean: float, std: float, level: float) -> tuple:
    """Gaussian interval ``mean +- z std`` with ``z`` the ``(1 + level) / 2`` quantile."""
    if std < 0:
        raise ValueError("std must be >= 0")
    if not 0.0 < level < 1.0:
        raise ValueError("level must lie in (0, 1)")
    z = float(ndtri(0.5 * (1.0 + level)))
    return (mean - z * std, mean + z * std)


def third_rule_window(t_c: float, days_to_tc: float) -> tuple:
    """The narrower ``t_c +- (t_c - t) / 3`` band sometimes quoted as an 80% window.

    With ``std = (t_c - t) / 2`` the Gaussian 80% half-width is ``0.64 (t_c - t)``,
    so this band covers only about 50%; it is kept for comparison only.
    """
    half = days_to_tc / 3.0
    return (t_c - half, t_c + half)


@dataclass(frozen=True)
class GaussianityCheck:
    skewness: float
    excess_kurtosis: float
    skewness_se: float
    kurtosis_se: float
    passed: bool

    @property
    def statistic(self) -> float:
        """Jarque-Bera statistic built from the same two moments."""
        n_eff = 6.0 / self.skewness_se**2
        return n_eff / 6.0 * (self.skewness**2 + self.excess_kurtosis**2 / 4.0)


def gaussianity_check(samples, n_se: float = 5.0) -> GaussianityCheck:
    """Pass iff skewness and excess kurtosis are both within ``n_se`` standard errors of 0."""
    x = np.asarray(samples, dtype=float)
    x = x[np.isfinite(x)]
    n = x.size
    if n < 20:
        raise TooFewSamples(f"need at least 20 samples, got {n}")
    skew = float(stats.skew(x, bias=False))
    kurt = float(stats.kurtosis(x, fisher=True, bias=False))
    se_skew = np.sqrt(6.0 * n * (n - 1) / ((n - 2) * (n + 1) * (n + 3)))
    se_kurt = 2.0 * se_skew * np.sqrt((n * n - 1.0) / ((n - 3) * (n + 5)))
    ok = abs(skew) <= n_se * se_skew and abs(kurt) <= n_se * se_kurt
    return GaussianityCheck(skew, kurt, float(se_skew), float(se_kurt), bool(ok))


@dataclass(frozen=True)
class WindowStats:
    window_end: int
    n_used: int
    n_failed: int
    mean_tc: float
    std_tc: float
    bias: float
    windows: dict  # level -> (lo, hi)


@dataclass
class McSummary:
    true_tc: float
    rows: list
    estimates: np.ndarray  # (n_samples, n_window_ends); NaN where the fit failed
    levels: tuple = DEFAULT_LEVELS

    def row(self, window_end: int) -> WindowStats:
        for r in self.rows:
            if r.window_end == window_end:
                return r
        raise KeyError(window_end)

    def to_csv(self) -> str:
        from .io import fmt_float

        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        header = ["window_end", "n_used", "n_failed", "mean_tc", "std_tc", "bias"]
        for lv in self.levels:
            tag = f"{100 * lv:g}"
            header += [f"lo{tag}", f"hi{tag}"]
        w.writerow(header)
        for r in self.rows:
            line = [r.window_end, r.n_used, r.n_failed,
                    fmt_float(r.mean_tc), fmt_float(r.std_tc), fmt_float(r.bias)]
            for lv in self.levels:
                lo, hi = r.windows[lv]
                line += [fmt_float(lo), fmt_float(hi)]
            w.writerow(line)
        return buf.getvalue()


def _sample_estimates(config: McConfig, sample: int) -> np.ndarray:
    series = make_series(config.spec, sample)
    out = np.full(len(config.window_ends), np.nan)
    for w, end in enumerate(config.window_ends):
        cfg = config.fit_config.replace(seed=fit_seed(config.fit_config.seed, sample, w))
        try:
            fit = multistart_fit(series.truncate(end), cfg)
        except LpplError:
            continue
        if fit.converged:
            out[w] = fit.params.t_c
    return out


def summarize(estimates: np.ndarray, window_ends, true_tc: float, levels=DEFAULT_LEVELS) -> McSummary:
    rows = []
    for w, end in enumerate(window_ends):
        col = estimates[:, w]
        used = col[np.isfinite(col)]
        if used.size == 0:
            raise SummaryEmpty(f"every fit failed at window end {end}")
        mean = float(np.mean(used))
        std = float(np.std(used, ddof=1)) if used.size > 1 else float("nan")
        windows = {lv: confidence_window(mean, std, lv) for lv in levels}
        rows.append(WindowStats(int(end), int(used.size), int(col.size - used.size),
                                mean, std, mean - true_tc, windows))
    return McSummary(float(true_tc), rows, estimates, tuple(levels))


def run_mc(config: McConfig, threads: int | None = None, progress=None) -> McSummary:
    """Fit every (noise sample, window end) pair and summarize ``t_c`` per window end.

    Sample ``s`` always draws noise stream ``s`` and window ``w`` always uses
    the multistart seed :func:`fit_seed` ``(seed, s, w)``, so the result does
    not depend on ``threads``.  ``progress``, if given, is called with the
    sample index after each sample finishes.
    """
    def one(s):
        est = _sample_estimates(config, s)
        if progress is not None:
            progress(s)
        return est

    per_sample = map_ordered(one, range(config.n_samples), threads)
    estimates = np.vstack(per_sample)
    return summarize(estimates, config.window_ends, config.spec.truth.t_c, config.confidence_levels)
