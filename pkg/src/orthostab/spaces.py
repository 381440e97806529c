"""Finite-dimensional real and complex normed coordinate spaces.

Vectors are plain numpy arrays whose trailing axis is the coordinate axis, so
every operation here accepts a single vector of shape ``(dim,)`` or a batch of
shape ``(..., dim)``.  Complex spaces use ``complex128`` coordinates; wherever
a *real* structure is needed (ranks, planes, Gram-Schmidt) the vector is
realified into ``2 * dim`` real coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

MAX_DIM = 64
# singular-value ratio below which two vectors count as linearly dependent
RANK_RTOL = 1e-10

FIELDS = ("real", "complex")
NORMS = ("euclidean", "p_norm", "weighted_euclidean")


class DimensionMismatch(ValueError):
    """A vector does not belong to the space it was used with."""


class DegenerateSubspace(ValueError):
    """Two vectors expected to span a plane are linearly dependent."""


@dataclass(frozen=True)
class NormedSpace:
    dim: int
    field: str = "real"
    norm_kind: str = "euclidean"
    p: Optional[float] = None
    weights: Optional[Tuple[float, ...]] = None

    def __post_init__(self):
        if self.field not in FIELDS:
            raise ValueError(f"unknown field {self.field!r}")
        if self.norm_kind not in NORMS:
            raise ValueError(f"unknown norm {self.norm_kind!r}")
        if not isinstance(self.dim, (int, np.integer)) or not 2 <= self.dim <= MAX_DIM:
            raise ValueError(f"dim must be an integer in [2, {MAX_DIM}], got {self.dim!r}")
        if self.norm_kind == "p_norm":
            if self.p is None or not self.p >= 1:
                raise ValueError("p_norm requires p >= 1")
        if self.norm_kind == "weighted_euclidean":
            if self.weights is None or len(self.weights) != self.dim:
                raise ValueError("weighted_euclidean requires one weight per coordinate")
            if not all(w > 0 and np.isfinite(w) for w in self.weights):
                raise ValueError("weights must be strictly positive")
            object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))

    @property
    def dtype(self):
        return np.complex128 if self.field == "complex" else np.float64

    @property
    def is_inner_product(self) -> bool:
        """True when the norm comes from an inner product."""
        return self.norm_kind in ("euclidean", "weighted_euclidean") or (
            self.norm_kind == "p_norm" and self.p == 2
        )

    @property
    def real_dim(self) -> int:
        return 2 * self.dim if self.field == "complex" else self.dim

    def _weights(self) -> np.ndarray:
        if self.norm_kind == "weighted_euclidean":
            return np.asarray(self.weights)
        return np.ones(self.dim)

    def check(self, v) -> np.ndarray:
        v = np.asarray(v)
        if v.ndim == 0 or v.shape[-1] != self.dim:
            raise DimensionMismatch(f"expected trailing dimension {self.dim}, got shape {v.shape}")
        if self.field == "real" and np.iscomplexobj(v):
            raise DimensionMismatch("complex vector used in a real space")
        return v.astype(self.dtype, copy=False)

    def norm(self, v) -> np.ndarray:
        v = self.check(v)
        a = np.abs(v)
        if self.norm_kind == "euclidean":
            return np.sqrt(np.sum(a * a, axis=-1))
        if self.norm_kind == "weighted_euclidean":
            return np.sqrt(np.sum(self._weights() * a * a, axis=-1))
        p = self.p
        if p == 1:
            return np.sum(a, axis=-1)
        if np.isinf(p):
            return np.max(a, axis=-1)
        # scale out the largest entry so |v|^p cannot overflow
        m = np.max(a, axis=-1, keepdims=True)
        safe = np.where(m > 0, m, 1.0)
        return (m[..., 0] * np.sum((a / safe) ** p, axis=-1) ** (1.0 / p))

    def inner(self, x, y) -> np.ndarray:
        """Real inner product ``Re sum w_j x_j conj(y_j)``; inner-product norms only."""
        if not self.is_inner_product:
            raise ValueError(f"{self.norm_kind} norm has no inner product")
        x, y = self.check(x), self.check(y)
        return np.real(np.sum(self._weights() * x * np.conj(y), axis=-1))

    def quadratic_kernel(self, v) -> np.ndarray:
        """Squared inner-product norm, the orthogonally additive quadratic form."""
        v = self.check(v)
        a = np.abs(v)
        return np.sum(self._weights() * a * a, axis=-1)

    def zeros(self, *batch) -> np.ndarray:
        return np.zeros(batch + (self.dim,), dtype=self.dtype)

    def basis(self, j: int) -> np.ndarray:
        e = self.zeros()
        e[j] = 1.0
        return e

    def real_basis(self) -> np.ndarray:
        """Basis of the space viewed as a real vector space, shape ``(real_dim, dim)``."""
        eye = np.eye(self.dim, dtype=self.dtype)
        if self.field == "real":
            return eye
        return np.concatenate([eye, 1j * eye])

    def realify(self, v) -> np.ndarray:
        v = self.check(v)
        if self.field == "real":
            return v.astype(np.float64)
        return np.concatenate([v.real, v.imag], axis=-1)

    def complexify(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=np.float64)
        if self.field == "real":
            return r
        return r[..., : self.dim] + 1j * r[..., self.dim:]

    def random(self, rng: np.random.Generator, *batch) -> np.ndarray:
        """Standard Gaussian vectors (real and imaginary parts independent)."""
        g = rng.standard_normal(batch + (self.real_dim,))
        return self.complexify(g)


def independent(space: NormedSpace, u, v) -> np.ndarray:
    """Linear independence over the reals by singular-value ratio (batched)."""
    ru, rv = space.realify(u), space.realify(v)
    ru, rv = np.broadcast_arrays(ru, rv)
    m = np.stack([ru, rv], axis=-1)
    s = np.linalg.svd(m, compute_uv=False)
    smax = s[..., 0]
    return (smax > 0) & (s[..., 1] > RANK_RTOL * smax)


@dataclass(frozen=True)
class Subspace2:
    """A real 2-dimensional subspace with a coordinate-orthonormal basis."""

    space: NormedSpace
    u1: np.ndarray
    u2: np.ndarray

    def point(self, alpha, beta) -> np.ndarray:
        alpha = np.asarray(alpha, dtype=np.float64)[..., None]
        beta = np.asarray(beta, dtype=np.float64)[..., None]
        return alpha * self.u1 + beta * self.u2

    def coords(self, x) -> np.ndarray:
        r = self.space.realify(x)
        b1, b2 = self.space.realify(self.u1), self.space.realify(self.u2)
        return np.stack([r @ b1, r @ b2], axis=-1)

    def contains(self, x, rtol: float = 1e-9) -> bool:
        c = self.coords(x)
        back = self.point(c[..., 0], c[..., 1])
        r = self.space.realify(np.asarray(x) - back)
        scale = np.linalg.norm(self.space.realify(x), axis=-1)
        return bool(np.all(np.linalg.norm(r, axis=-1) <= rtol * (1.0 + scale)))


def span2(space: NormedSpace, u, v) -> Subspace2:
    """Orthonormal (in coordinates) basis of the real plane spanned by ``u``, ``v``."""
    u, v = space.check(u), space.check(v)
    if u.ndim != 1 or v.ndim != 1:
        raise DimensionMismatch("span2 takes single vectors")
    if not independent(space, u, v):
        raise DegenerateSubspace("vectors are linearly dependent")
    ru, rv = space.realify(u), space.realify(v)
    b1 = ru / np.linalg.norm(ru)
    w = rv - (rv @ b1) * b1
    # second pass restores orthogonality lost to cancellation
    w = w - (w @ b1) * b1
    b2 = w / np.linalg.norm(w)
    return Subspace2(space, space.complexify(b1), space.complexify(b2))
