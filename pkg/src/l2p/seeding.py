"""Deterministic seed derivation for replicate fan-out.

Replicate i of a Monte-Carlo batch gets ``replicate_seed(base_seed, i)``,
a splitmix64 avalanche of the pair. Streams derived this way are
decorrelated even for adjacent (base_seed, i) pairs, and the mapping is
frozen: changing it would silently re-randomize every archived run.
"""

from __future__ import annotations

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(state: int) -> int:
    """One splitmix64 step: returns the avalanche of ``state + GOLDEN``."""
    z = (state + _GOLDEN) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return (z ^ (z >> 31)) & _MASK


def replicate_seed(base_seed: int, rep: int) -> int:
    """64-bit seed for replicate ``rep`` derived from ``base_seed``."""
    if rep < 0:
        raise ValueError("replicate index must be nonnegative")
    return splitmix64(splitmix64(base_seed & _MASK) ^ (rep & _MASK))
