"""Seedable, portable random number generator for reproducible trace synthesis.

The core generator is SplitMix64 (Steele/Lea/Vigna): a 64-bit counter advanced
by the odd constant ``0x9E3779B97F4A7C15`` per draw, with the output finalizer

    z ^= z >> 30;  z *= 0xBF58476D1CE4E5B9
    z ^= z >> 27;  z *= 0x94D049BB133111EB
    z ^= z >> 31

applied to the advanced counter (all arithmetic mod 2**64).  Derived draws:

* ``random()``   uniform double in [0, 1): top 53 bits of a draw times 2**-53
* ``next_byte()`` top 8 bits of a draw
* ``gauss()``    standard normal via the Marsaglia polar method.  Each
  rejection round consumes exactly two uniforms, mapped to ``u = 2x - 1`` and
  ``v = 2x - 1`` in that order; an accepted round yields the pair
  ``(u*f, v*f)`` with ``f = sqrt(-2 ln s / s)``, ``s = u*u + v*v``, returned
  first-then-cached.  The cached spare is used by the next ``gauss()`` call on
  the same stream and is lost when the stream object is dropped.

Independent sub-streams are derived from an integer index path with
``derive_stream``; synthesis code gives every unit of work (trace, grid cell)
its own stream so parallel and serial execution produce identical output.
The whole scheme is fixed so a reimplementation in any language can replicate
committed fixtures byte for byte.
"""

from __future__ import annotations

import math

import numpy as np

_MASK = 0xFFFFFFFFFFFFFFFF
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def _mix(z: int) -> int:
    """SplitMix64 output finalizer (no counter advance)."""
    z &= _MASK
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK
    return z ^ (z >> 31)


def derive_stream(seed: int, *path: int) -> int:
    """Seed of the independent child stream at ``path`` under ``seed``.

    Applied per path element: ``s = mix(s ^ mix((index + 1) * GOLDEN))``.
    Distinct paths give statistically independent streams; the empty path
    returns ``seed`` itself.
    """
    s = seed & _MASK
    for idx in path:
        s = _mix(s ^ _mix(((idx + 1) * _GOLDEN) & _MASK))
    return s


class Rng:
    """One SplitMix64 stream."""

    __slots__ = ("_state", "_spare", "_has_spare")

    def __init__(self, seed: int):
        self._state = seed & _MASK
        self._spare = 0.0
        self._has_spare = False

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK
        return _mix(self._state)

    def random(self) -> float:
        """Uniform double in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * 2.0**-53

    def next_byte(self) -> int:
        return self.next_u64() >> 56

    def gauss(self) -> float:
        """Standard normal draw (Marsaglia polar method, see module doc)."""
        if self._has_spare:
            self._has_spare = False
            return self._spare
        while True:
            u = 2.0 * self.random() - 1.0
            v = 2.0 * self.random() - 1.0
            s = u * u + v * v
            if 0.0 < s < 1.0:
                break
        f = math.sqrt(-2.0 * math.log(s) / s)
        self._spare = v * f
        self._has_spare = True
        return u * f

    def gaussians(self, n: int) -> np.ndarray:
        """Array of ``n`` sequential ``gauss()`` draws."""
        out = np.empty(n)
        for i in range(n):
            out[i] = self.gauss()
        return out
