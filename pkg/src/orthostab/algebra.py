"""Unital normed scalar algebras acting on coordinate spaces.

A scalar is stored as an array whose trailing axis has length ``k``: ``k = 1``
for signs and unit complex numbers, ``k = d`` for diagonal matrices.  With
that layout the module action, products and squares are all plain
broadcasting, and batches of scalars of shape ``(..., k)`` come for free.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spaces import DimensionMismatch, NormedSpace

KINDS = ("real_signs", "complex_circle", "diagonal_real")
UNIT_TOL = 1e-12


@dataclass(frozen=True)
class ScalarAlgebra:
    kind: str
    action_space: NormedSpace

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown algebra {self.kind!r}")
        if self.kind == "complex_circle" and self.action_space.field != "complex":
            raise ValueError("complex_circle acts on complex spaces only")
        if self.kind == "diagonal_real" and self.action_space.field != "real":
            raise ValueError("diagonal_real acts on real spaces only")

    @property
    def width(self) -> int:
        return self.action_space.dim if self.kind == "diagonal_real" else 1

    @property
    def dtype(self):
        return np.complex128 if self.kind == "complex_circle" else np.float64

    @property
    def commutes_with_all_linear_maps(self) -> bool:
        return self.kind != "diagonal_real"

    def unit(self) -> np.ndarray:
        return np.ones(self.width, dtype=self.dtype)

    def norm(self, a) -> np.ndarray:
        # sup operator norm of a diagonal matrix; modulus for k = 1
        return np.max(np.abs(a), axis=-1)

    def contains(self, a) -> np.ndarray:
        """Membership in the unit sphere A_1."""
        a = np.asarray(a)
        on_sphere = np.abs(self.norm(a) - 1.0) <= UNIT_TOL
        if self.kind == "real_signs":
            return on_sphere & np.all(np.isreal(a), axis=-1)
        if self.kind == "diagonal_real":
            return on_sphere & np.all(np.abs(a) <= 1.0 + UNIT_TOL, axis=-1)
        return on_sphere

    def sample_unit(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if self.kind == "real_signs":
            return rng.choice([-1.0, 1.0], size=(n, 1))
        if self.kind == "complex_circle":
            return np.exp(1j * rng.uniform(0.0, 2 * np.pi, size=(n, 1)))
        d = self.width
        a = rng.uniform(-1.0, 1.0, size=(n, d))
        j = rng.integers(0, d, size=n)
        a[np.arange(n), j] = rng.choice([-1.0, 1.0], size=n)
        return a

    def sample_idempotent_unit(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """Idempotents of norm one.  Signs and the circle only have the unit."""
        if self.kind != "diagonal_real":
            return np.ones((n, 1), dtype=self.dtype)
        d = self.width
        a = (rng.uniform(size=(n, d)) < 0.5).astype(np.float64)
        j = rng.integers(0, d, size=n)
        a[np.arange(n), j] = 1.0
        return a

    def check(self, a) -> np.ndarray:
        a = np.asarray(a)
        if a.ndim == 0 or a.shape[-1] != self.width:
            raise DimensionMismatch(f"{self.kind} scalars have trailing width {self.width}, got {a.shape}")
        return a


def act(a, x) -> np.ndarray:
    """Module action ``a x``; broadcasts a ``(..., k)`` scalar over ``(..., dim)`` vectors."""
    a, x = np.asarray(a), np.asarray(x)
    if a.shape[-1] not in (1, x.shape[-1]):
        raise DimensionMismatch(f"scalar width {a.shape[-1]} does not act on dimension {x.shape[-1]}")
    return a * x


def mul(a, b) -> np.ndarray:
    a, b = np.asarray(a), np.asarray(b)
    if a.shape[-1] != b.shape[-1]:
        raise DimensionMismatch("scalars from different algebras")
    return a * b


def square(a) -> np.ndarray:
    return mul(a, a)
