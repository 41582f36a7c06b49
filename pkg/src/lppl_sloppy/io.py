"""CSV/JSON reading and writing with round-trip-exact floats."""
from __future__ import annotations

import csv
import json
import math
import os
import re
import tempfile
from pathlib import Path

import numpy as np

from .errors import GapError, NonPositiveError, ParseError
from .model import PriceSeries, Scale

_FLOAT_TAG = "@@float17@@"
_FLOAT_RE = re.compile('"' + re.escape(_FLOAT_TAG) + r'([^"]*)"')


def fmt_float(x) -> str:
    """17 significant digits, enough to round-trip any float64."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def _tag_floats(obj):
    if isinstance(obj, dict):
        return {str(k): _tag_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_tag_floats(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return _FLOAT_TAG + fmt_float(x) if math.isfinite(x) else None
    return obj


def dumps_json(obj) -> str:
    """JSON with every float written at 17 significant digits; NaN/inf become null."""
    text = json.dumps(_tag_floats(obj), indent=2, sort_keys=False)
    return _FLOAT_RE.sub(lambda m: m.group(1), text) + "\n"


def atomic_write(path, text: str) -> None:
    """Write via a temporary file in the same directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_csv(path, log_scale: bool = False) -> PriceSeries:
    """Read ``t,price`` rows (optional header) with consecutive integer ``t``.

    Row numbers in errors are 1-based file lines.
    """
    times, prices = [], []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not c.strip() for c in row):
                continue
            cells = [c.strip() for c in row]
            if lineno == 1 and [c.lower() for c in cells] == ["t", "price"]:
                continue
            if len(cells) != 2:
                raise ParseError(f"expected 2 columns, got {len(cells)}", lineno)
            try:
                t_val = float(cells[0])
                p_val = float(cells[1])
            except ValueError:
                raise ParseError(f"non-numeric value in {row!r}", lineno) from None
            if not t_val.is_integer():
                raise ParseError(f"t={cells[0]} is not an integer day", lineno)
            if not math.isfinite(p_val):
                raise ParseError(f"price {cells[1]} is not finite", lineno)
            t_int = int(t_val)
            if times and t_int != times[-1] + 1:
                raise GapError(f"t={t_int} does not follow t={times[-1]}", lineno)
            if log_scale and p_val <= 0:
                raise NonPositiveError(f"price {p_val} cannot be log-transformed", lineno)
            times.append(t_int)
            prices.append(p_val)
    if len(prices) < 2:
        raise ParseError("need at least two observations")
    values = np.log(prices) if log_scale else np.array(prices)
    return PriceSeries(times[0], values, Scale.LOG if log_scale else Scale.RAW)


def series_to_csv(series: PriceSeries) -> str:
    lines = ["t,price"]
    lines += [f"{series.t0 + i},{fmt_float(v)}" for i, v in enumerate(series.values)]
    return "\n".join(lines) + "\n"


def write_csv(path, series: PriceSeries) -> None:
    atomic_write(path, series_to_csv(series))
