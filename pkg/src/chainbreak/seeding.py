"""Stable 64-bit seed splitting.

Every derived stream in the package (problem instances, per-sample annealing
runs) gets its seed from ``hash64(parent_seed, *indices)``.  The mixer is the
SplitMix64 finalizer, applied once per word, so derived seeds are identical
across platforms, Python versions and worker counts.
"""

from __future__ import annotations

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15


def mix64(z: int) -> int:
    """SplitMix64 output function (Steele, Lea & Flood 2014)."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def hash64(seed: int, *words: int) -> int:
    """Fold ``words`` into ``seed`` and return a well-mixed 64-bit integer.

    ``hash64(s, i)`` is the seed of child ``i`` of stream ``s``; nesting is
    done by passing several words, e.g. ``hash64(s, problem, k_index)``.
    """
    h = mix64((seed & MASK64) + GOLDEN_GAMMA)
    for w in words:
        h = mix64((h ^ (w & MASK64)) + GOLDEN_GAMMA)
    return h
