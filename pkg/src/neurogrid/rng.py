"""Counter-based random streams.

Every episode owns one master seed; each consumer (food respawn, slip, ...)
draws from its own Philox substream keyed by a label hash. Adding a new
consumer therefore never perturbs the draws seen by existing ones, which keeps
regression traces stable.
"""

from __future__ import annotations

import numpy as np

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF


def label_hash(label: str) -> int:
    """64-bit FNV-1a of a stream label."""
    h = _FNV_OFFSET
    for byte in label.encode("utf-8"):
        h = ((h ^ byte) * _FNV_PRIME) & _MASK64
    return h


def substream(seed: int, label: str) -> np.random.Generator:
    """Independent generator for (seed, label)."""
    key = np.array([np.uint64(seed & _MASK64), np.uint64(label_hash(label))])
    return np.random.Generator(np.random.Philox(key=key))


_GOLDEN = 0x9E3779B97F4A7C15


def _mix(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def unit_noise(salt: int, *coords: int) -> float:
    """Deterministic pseudo-uniform in [0, 1) from integer coordinates.

    Splitmix64 finalizer folded per coordinate. Independent of any episode
    seed, so scenario-pinned jitter patterns replay identically across seeds
    and platforms.
    """
    x = salt & _MASK64
    for c in coords:
        x = _mix((x + _GOLDEN + (c & _MASK64)) & _MASK64)
    return x / float(1 << 64)


def noise_field(salt: int, tick: int, width: int, height: int) -> np.ndarray:
    """Vectorized unit_noise(salt, tick, x, y) over a whole (height, width)
    grid; bit-identical to the scalar form."""
    base = _mix(((salt & _MASK64) + _GOLDEN + (tick & _MASK64)) & _MASK64)
    xs = np.arange(width, dtype=np.uint64)[None, :]
    ys = np.arange(height, dtype=np.uint64)[:, None]
    golden = np.uint64(_GOLDEN)

    def mix(z):
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        return z ^ (z >> np.uint64(31))

    with np.errstate(over="ignore"):
        vx = mix(np.uint64((base + _GOLDEN) & _MASK64) + xs)
        v = mix(vx + golden + ys)
    return v.astype(np.float64) / float(1 << 64)
