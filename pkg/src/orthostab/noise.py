"""Deterministic bounded noise fields keyed on quantized points.

The perturbation of a Pexider component must be a *function* of its argument,
so it is generated by hashing ``(seed, component, quantized x)`` with the
SplitMix64 finalizer instead of drawing from a stateful generator.

Quantization keeps 20 mantissa bits per coordinate.  Multiplying by a
power of two only shifts the exponent, so the doubling orbit ``2^n x`` stays
on the lattice and every orbit point gets its own independent draw.
"""

from __future__ import annotations

import numpy as np

from .spaces import NormedSpace

MANTISSA_BITS = 20

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


def splitmix64(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def quantize(r: np.ndarray):
    """Sign-symmetric ``(mantissa, exponent)`` integer keys of real coordinates."""
    m, e = np.frexp(r)
    q = np.rint(m * 2.0**MANTISSA_BITS).astype(np.int64)
    e = e.astype(np.int64)
    # rounding up to 2^20 is the same lattice point as 2^19 one octave higher
    carry = np.abs(q) == 2**MANTISSA_BITS
    q = np.where(carry, q // 2, q)
    e = np.where(carry, e + 1, e)
    return q, e


def hash_points(seed: int, stream: int, r: np.ndarray) -> np.ndarray:
    """One 64-bit key per row of the real coordinate array ``r``."""
    q, e = quantize(r)
    n = r.shape[0]
    with np.errstate(over="ignore"):
        h = splitmix64(np.full(n, np.uint64(seed % 2**64)) ^ (_GAMMA * np.uint64(stream + 1)))
        for j in range(r.shape[1]):
            h = splitmix64(h + _GAMMA + q[:, j].astype(np.uint64))
            h = splitmix64(h + _GAMMA + e[:, j].astype(np.uint64))
    return h


def uniforms(h: np.ndarray, count: int) -> np.ndarray:
    """``count`` uniforms in ``[0, 1)`` per key, shape ``(n, count)``."""
    with np.errstate(over="ignore"):
        ctr = h[:, None] + _GAMMA * np.arange(1, count + 1, dtype=np.uint64)[None, :]
    bits = splitmix64(ctr) >> np.uint64(11)
    return bits.astype(np.float64) * 2.0**-53


class NoiseField:
    """Map ``x -> rho_i(x)`` in ``Y`` with ``||rho_i(x)||_Y <= amp``."""

    def __init__(self, seed: int, amp: float, domain: NormedSpace, codomain: NormedSpace):
        if amp < 0:
            raise ValueError("noise amplitude must be nonnegative")
        self.seed = int(seed)
        self.amp = float(amp)
        self.domain = domain
        self.codomain = codomain

    def __call__(self, component: int, x) -> np.ndarray:
        x = self.domain.check(x)
        shape = x.shape[:-1]
        Y = self.codomain
        if self.amp == 0:
            return Y.zeros(*shape)
        r = self.domain.realify(x.reshape(-1, self.domain.dim))
        h = hash_points(self.seed, component, r)
        u = uniforms(h, Y.real_dim + 1)
        v = Y.complexify(2.0 * u[:, :-1] - 1.0)
        nv = Y.norm(v)
        nv = np.where(nv > 0, nv, 1.0)
        out = v * (self.amp * u[:, -1] / nv)[:, None]
        return out.reshape(shape + (Y.dim,))
