"""Reproducible random streams.

Every stream is a Philox4x64 counter-based generator whose 128-bit key is
hashed from ``(seed, *path)``.  Streams with different paths are
independent, so any unit of work can draw its numbers without knowing how
many other units exist or in what order they run.
"""
from __future__ import annotations

import numpy as np
from scipy.special import ndtri

_MASK64 = (1 << 64) - 1


def stream(seed: int, *path: int) -> np.random.Generator:
    """Generator for the stream addressed by ``seed`` and an integer path."""
    ss = np.random.SeedSequence(int(seed) & _MASK64, spawn_key=tuple(int(p) for p in path))
    key = ss.generate_state(2, dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def uniform_open(gen: np.random.Generator, size: int) -> np.ndarray:
    """Uniforms on the open interval (0, 1) built from 53 raw bits each."""
    raw = gen.bit_generator.random_raw(size) >> np.uint64(11)
    return (raw.astype(float) + 0.5) * 2.0**-53


def standard_normal(gen: np.random.Generator, size: int) -> np.ndarray:
    """Standard normal draws by inverse-CDF transform of :func:`uniform_open`."""
    return ndtri(uniform_open(gen, size))
