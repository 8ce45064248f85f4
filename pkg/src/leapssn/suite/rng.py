"""Deterministic random streams for the problem suite.

SplitMix64 with the usual golden-gamma increment, vectorised over numpy
uint64 (wraparound is the algorithm, so overflow warnings are silenced
locally).  Uniforms map the top 53 bits into (0, 1]; normals come from
Box-Muller pairs.  The stream is part of the reproducibility contract:
tests freeze its first outputs, so any change here is a breaking change.
"""

from __future__ import annotations

import numpy as np

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
MIX1 = np.uint64(0xBF58476D1CE4E5B9)
MIX2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_ONE = np.uint64(1)
_TWO53 = float(2.0 ** -53)


class SplitMix64:
    """Sequential SplitMix64 stream, drawn in vectorised blocks."""

    def __init__(self, seed: int):
        self.state = np.uint64(seed & 0xFFFFFFFFFFFFFFFF)

    def raw(self, count: int) -> np.ndarray:
        """Next ``count`` raw uint64 outputs."""
        with np.errstate(over="ignore"):
            idx = np.arange(1, count + 1, dtype=np.uint64)
            z = self.state + idx * GOLDEN
            self.state = self.state + np.uint64(count) * GOLDEN
            z = (z ^ (z >> _S30)) * MIX1
            z = (z ^ (z >> _S27)) * MIX2
            z = z ^ (z >> _S31)
        return z

    def uniforms(self, count: int) -> np.ndarray:
        """count floats in (0, 1]."""
        return (((self.raw(count) >> _S11) + _ONE)).astype(np.float64) * _TWO53

    def normals(self, count: int) -> np.ndarray:
        """count standard normals via Box-Muller on uniform pairs."""
        pairs = (count + 1) // 2
        u = self.uniforms(2 * pairs)
        r = np.sqrt(-2.0 * np.log(u[0::2]))
        th = (2.0 * np.pi) * u[1::2]
        z = np.empty(2 * pairs)
        z[0::2] = r * np.cos(th)
        z[1::2] = r * np.sin(th)
        return z[:count]

    def signs(self, count: int) -> np.ndarray:
        """count values from {+1.0, -1.0}, P(+1) = 1/2."""
        return np.where(self.uniforms(count) <= 0.5, 1.0, -1.0)
