"""Eigen-analysis of the Hessian of S: stiff and sloppy parameter combinations."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import LpplError, NotSymmetric
from .fitter import FitConfig, multistart_fit
from .model import NONLINEAR_NAMES, PARAM_NAMES, Model, PriceSeries
from .objective import hessian_of_s
from .parallel import map_ordered

MAJOR_THRESHOLD = 0.1
SYMMETRY_RTOL = 1e-9
OFFDIAG_RTOL = 1e-13
MAX_SWEEPS = 100


def check_symmetric(h: np.ndarray) -> np.ndarray:
    h = np.asarray(h, dtype=float)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise NotSymmetric(f"expected a square matrix, got shape {h.shape}")
    if not np.all(np.isfinite(h)):
        raise NotSymmetric("matrix has non-finite entries")
    if np.any(np.abs(h - h.T) >= SYMMETRY_RTOL * np.maximum(np.abs(h), 1.0)):
        raise NotSymmetric("matrix is not symmetric")
    return h


def jacobi_eigh(h: np.ndarray, rtol: float = OFFDIAG_RTOL):
    """Cyclic Jacobi diagonalization of a symmetric matrix.

    Sweeps over all ``(p, q)`` pairs, annihilating each off-diagonal entry with
    a plane rotation, until the off-diagonal Frobenius mass drops below
    ``rtol * ||h||_F``.  Returns unsorted eigenvalues and the column
    eigenvector matrix.
    """
    a = np.array(h, dtype=float)
    n = a.shape[0]
    v = np.eye(n)
    target = rtol * np.linalg.norm(a)
    for _ in range(MAX_SWEEPS):
        # summed directly: total minus diagonal mass cancels catastrophically
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off <= target:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                # A <- J^T A J with J the (p, q) rotation
                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                ap = a[p, :].copy()
                aq = a[q, :].copy()
                a[p, :] = c * ap - s * aq
                a[q, :] = s * ap + c * aq
                a[p, q] = a[q, p] = 0.0
                vp = v[:, p].copy()
                v[:, p] = c * vp - s * v[:, q]
                v[:, q] = s * vp + c * v[:, q]
    else:
        raise LpplError("Jacobi iteration did not converge")
    return np.diag(a).copy(), v


def eigendecompose(h):
    """Eigenvalues (descending) and matching column eigenvectors of a symmetric matrix."""
    h = check_symmetric(h)
    w, v = jacobi_eigh(h)
    order = np.argsort(-w, kind="stable")
    return w[order], v[:, order]


def _canonical_signs(rows: np.ndarray) -> np.ndarray:
    rows = rows.copy()
    for k, row in enumerate(rows):
        big = np.flatnonzero(np.abs(row) > MAJOR_THRESHOLD)
        lead = big[0] if big.size else int(np.argmax(np.abs(row)))
        if row[lead] < 0:
            rows[k] = -row
    return rows


@dataclass
class SloppinessReport:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # rows, aligned with eigenvalues
    orders_of_separation: int | None
    major_components: list
    parameter_names: tuple = PARAM_NAMES

    @property
    def separation_defined(self) -> bool:
        return self.orders_of_separation is not None

    def to_dict(self) -> dict:
        return {
            "eigenvalues": [float(x) for x in self.eigenvalues],
            "eigenvectors": [[float(x) for x in row] for row in self.eigenvectors],
            "orders_of_separation": self.orders_of_separation,
            "major_components": [list(map(int, m)) for m in self.major_components],
        }

    def to_json(self) -> str:
        from .io import dumps_json

        return dumps_json(self.to_dict())

    def to_csv(self) -> str:
        """Table with one row per eigenvalue: ``lambda`` then one column per parameter."""
        from .io import fmt_float

        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["lambda", *self.parameter_names])
        for lam, row in zip(self.eigenvalues, self.eigenvectors):
            w.writerow([fmt_float(lam), *(fmt_float(x) for x in row)])
        return buf.getvalue()


def sloppiness_report(h, parameter_names=PARAM_NAMES) -> SloppinessReport:
    w, v = eigendecompose(h)
    rows = _canonical_signs(v.T)
    if w[-1] > 0:
        orders = int(math.floor(math.log10(w[0] / w[-1])))
    else:
        orders = None
    major = [np.flatnonzero(np.abs(r) > MAJOR_THRESHOLD).tolist() for r in rows]
    return SloppinessReport(w, rows, orders, major, tuple(parameter_names))


def nonlinear_block(report: SloppinessReport, size: int = 4) -> np.ndarray:
    """Indices (into the report) of the eigenvalues attributed to ``t_c, alpha, omega, phi``.

    An eigenvalue qualifies when its eigenvector's largest component is on a
    nonlinear parameter.  Shortfalls are filled, and surpluses trimmed, by the
    squared mass each eigenvector puts on the nonlinear parameters.
    """
    names = list(report.parameter_names)
    nl = [names.index(n) for n in NONLINEAR_NAMES if n in names]
    size = min(size, len(nl))
    vec = report.eigenvectors
    mass = np.sum(vec[:, nl] ** 2, axis=1)
    qualifies = np.isin(np.argmax(np.abs(vec), axis=1), nl)
    chosen = [k for k in np.argsort(-mass, kind="stable") if qualifies[k]][:size]
    if len(chosen) < size:
        rest = [k for k in np.argsort(-mass, kind="stable") if k not in chosen]
        chosen += rest[: size - len(chosen)]
    return np.sort(np.array(chosen, dtype=int))


@dataclass
class EigenTrack:
    dates: np.ndarray
    days_to_tc: np.ndarray
    spectra: np.ndarray  # (n_dates, 4), NaN rows for failed dates
    crossings: int
    failed: list = field(default_factory=list)

    def to_csv(self) -> str:
        from .io import fmt_float

        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        k = self.spectra.shape[1]
        w.writerow(["date", *(f"lambda{i + 1}" for i in range(k))])
        for d, row in zip(self.dates, self.spectra):
            w.writerow([int(d), *(fmt_float(x) for x in row)])
        return buf.getvalue()


def _count_crossings(blocks: list) -> int:
    """Rank swaps between consecutive spectra, matching eigenvectors by overlap."""
    crossings = 0
    prev = None
    for blk in blocks:
        if blk is None:
            continue
        if prev is not None:
            overlap = np.abs(prev[1] @ blk[1].T)
            rows, cols = linear_sum_assignment(-overlap)
            rank_now = cols[np.argsort(rows)]
            for i in range(len(rank_now)):
                for j in range(i + 1, len(rank_now)):
                    if rank_now[i] > rank_now[j]:
                        crossings += 1
        prev = blk
    return crossings


def track_dates(series: PriceSeries, horizon: int, stride: int) -> np.ndarray:
    if not 1 <= stride:
        raise ValueError("stride must be >= 1")
    if not 0 < horizon < len(series):
        raise ValueError("horizon must be positive and shorter than the series")
    dates = np.arange(series.t1, series.t1 - horizon, -stride)
    return dates[::-1]


def rolling_track(series: PriceSeries, true_or_fit_tc: float, horizon: int = 150, stride: int = 10,
                  fit_config: FitConfig = FitConfig(), threads: int | None = None) -> EigenTrack:
    """Nonlinear-block Hessian eigenvalues of fits to growing prefixes of ``series``.

    Evaluation dates step back from the last day by ``stride`` while staying
    inside the final ``horizon`` days.  A date whose fit or Hessian fails is
    kept as a NaN row and listed in ``failed``.
    """
    dates = track_dates(series, horizon, stride)
    model = Model(fit_config.model)
    names = tuple(PARAM_NAMES[i] for i in model.free_index)

    def one(d):
        try:
            sub = series.truncate(int(d))
            fit = multistart_fit(sub, fit_config)
            rep = sloppiness_report(hessian_of_s(fit.params, sub, model), names)
        except (LpplError, ValueError):
            return None
        idx = nonlinear_block(rep)
        return rep.eigenvalues[idx], rep.eigenvectors[idx]

    blocks = map_ordered(one, dates, threads)
    width = 4 if model is Model.LPPL else 2
    spectra = np.full((len(dates), width), np.nan)
    for k, blk in enumerate(blocks):
        if blk is not None:
            spectra[k] = blk[0]
    failed = [int(d) for d, blk in zip(dates, blocks) if blk is None]
    return EigenTrack(dates, float(true_or_fit_tc) - dates, spectra, _count_crossings(blocks), failed)
