"""Perturbed Pexider triples ``(f1, f2, f3)`` and their measured defect level.

Each component is ``f_i(x) = c_Q q(x) u_Y + L x + c_i + eta_i(x)`` where ``q`` is an
orthogonally additive quadratic kernel for the chosen relation, ``u_Y`` is
the first basis vector of ``Y`` and ``eta_i`` is a deterministic noise field
bounded by ``delta``.  With ``delta = 0`` the centered triple solves the
orthogonal Pexider equation exactly, so the measured ``eps_hat`` reflects only
the noise and the offsets.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .algebra import ScalarAlgebra, act, mul, square
from .noise import NoiseField
from .orthogonality import OrthogonalityRelation, sample_orthogonal_pairs
from .spaces import DimensionMismatch, NormedSpace

SHAPES = ("eq1", "eq12", "eq22", "eq29")
PARITIES = ("even", "odd", "general")
SCALAR_MODES = ("independent", "equal", "a_only", "unit")
# shapes stated for centered maps F_i = f_i - f_i(0)
CENTERED_SHAPES = ("eq1", "eq12")


class NonOrthogonalPair(ValueError):
    pass


def quadratic_kernel(relation: OrthogonalityRelation) -> Optional[Callable]:
    """Orthogonally additive quadratic form for ``relation``, or ``None``.

    Squared inner-product norms are additive on orthogonal pairs by
    Pythagoras; Birkhoff-James coincides with inner-product orthogonality
    when the norm is an inner-product norm.  Other cases have no canonical
    choice.
    """
    sp = relation.space
    if relation.kind in ("inner_product", "birkhoff_james") and sp.is_inner_product:
        return sp.quadratic_kernel
    return None


@dataclass(frozen=True, eq=False)
class GroundTruth:
    quad_coeff: float
    linear: np.ndarray
    offsets: np.ndarray
    noise_amp: float = 0.0
    seed: int = 0
    # proportional override: f2 = alpha * f1
    alpha: Optional[float] = None

    def __post_init__(self):
        L = np.array(self.linear)
        c = np.array(self.offsets)
        if L.ndim != 2 or not np.all(np.isfinite(L)):
            raise ValueError("linear map must be a finite matrix")
        if c.ndim != 2 or c.shape[0] != 3:
            raise ValueError("offsets must have shape (3, dim)")
        if not self.noise_amp >= 0:
            raise ValueError("noise amplitude must be nonnegative")
        L.setflags(write=False)
        c.setflags(write=False)
        object.__setattr__(self, "linear", L)
        object.__setattr__(self, "offsets", c)


@dataclass(frozen=True, eq=False)
class PexiderInstance:
    ground: GroundTruth
    X: NormedSpace
    Y: NormedSpace
    relation: OrthogonalityRelation
    parity: str = "general"

    def __post_init__(self):
        g = self.ground
        if self.parity not in PARITIES:
            raise ValueError(f"unknown parity {self.parity!r}")
        if self.relation.space != self.X:
            raise ValueError("relation must live on the domain space")
        if g.linear.shape != (self.Y.dim, self.X.dim):
            raise DimensionMismatch(f"linear map shape {g.linear.shape} != {(self.Y.dim, self.X.dim)}")
        if g.offsets.shape[1] != self.Y.dim:
            raise DimensionMismatch("offsets must live in Y")
        if self.Y.field == "real" and (np.iscomplexobj(g.linear) or np.iscomplexobj(g.offsets)):
            if np.any(np.imag(g.linear) != 0) or np.any(np.imag(g.offsets) != 0):
                raise ValueError("complex coefficients need a complex codomain")
        if g.quad_coeff != 0 and quadratic_kernel(self.relation) is None:
            raise ValueError(f"no orthogonally additive quadratic kernel for {self.relation.kind} on {self.X.norm_kind}")
        if self.parity == "even" and np.any(g.linear != 0):
            raise ValueError("even instances need L = 0")
        if self.parity == "odd" and (g.quad_coeff != 0 or np.any(g.offsets != 0)):
            raise ValueError("odd instances need c_Q = 0 and zero offsets")
        object.__setattr__(self, "_noise", NoiseField(g.seed, g.noise_amp, self.X, self.Y))
        object.__setattr__(self, "_kernel", quadratic_kernel(self.relation))

    @property
    def carrier(self) -> np.ndarray:
        return self.Y.basis(0)

    def exact(self, i: int, x) -> np.ndarray:
        """Noise-free part of ``f_i``."""
        g = self.ground
        x = self.X.check(x)
        if g.quad_coeff != 0:
            out = (g.quad_coeff * self._kernel(x))[..., None] * self.carrier
        else:
            out = np.zeros(x.shape[:-1] + (self.Y.dim,), dtype=self.Y.dtype)
        out = out + x @ g.linear.T
        return out + g.offsets[i - 1]

    def noise(self, i: int, x) -> np.ndarray:
        x = self.X.check(x)
        rho = self._noise
        if self.parity == "general" or rho.amp == 0:
            return rho(i, x)
        plus, minus = rho(i, x), rho(i, -x)
        if self.parity == "odd":
            return (plus - minus) / 2
        eta = (plus + minus) / 2
        origin = ~np.any(x != 0, axis=-1)
        return np.where(origin[..., None], 0.0, eta)

    def eval(self, i: int, x) -> np.ndarray:
        if i not in (1, 2, 3):
            raise ValueError("component index must be 1, 2 or 3")
        if i == 2 and self.ground.alpha is not None:
            return self.ground.alpha * self.eval(1, x)
        return self.exact(i, x) + self.noise(i, x)

    def centered(self, i: int, x) -> np.ndarray:
        x = self.X.check(x)
        return self.eval(i, x) - self.eval(i, self.X.zeros())


def defect(instance: PexiderInstance, x, y, a, b, shape: str, check: bool = True) -> np.ndarray:
    """Norm of the Pexider expression for ``shape`` at orthogonal ``(x, y)``.

    ``eq1``:  ``F1(ax+ay) - a^2 F2(x) - a^2 F3(y)``   (centered maps)
    ``eq12``: ``F1(ax+ay) - a F2(x) - a F3(y)``       (centered maps)
    ``eq22``: ``f1(ax+ay) - ab f2(x) - ab f3(y)``
    ``eq29``: ``f1(x+y) - f2(x) - f3(y)``
    """
    if shape not in SHAPES:
        raise ValueError(f"unknown shape {shape!r}")
    X = instance.X
    x, y = np.broadcast_arrays(X.check(x), X.check(y))
    if check and not np.all(instance.relation.orthogonal(x, y)):
        raise NonOrthogonalPair("defect is only defined on orthogonal pairs")
    f = instance.centered if shape in CENTERED_SHAPES else instance.eval
    if shape == "eq29":
        return instance.Y.norm(f(1, x + y) - f(2, x) - f(3, y))
    a = np.asarray(a)
    if shape == "eq1":
        s = square(a)
    elif shape == "eq12":
        s = a
    else:
        s = mul(a, np.asarray(b))
    lhs = f(1, act(a, x) + act(a, y))
    return instance.Y.norm(lhs - act(s, f(2, x)) - act(s, f(3, y)))


def scalar_pairs(algebra: ScalarAlgebra, mode: str, n: int, seed, idempotent: bool = False):
    """``(A, B)`` scalar samples for the hypothesis; row 0 is always ``(1, 1)``."""
    if mode not in SCALAR_MODES:
        raise ValueError(f"unknown scalar mode {mode!r}")
    one = algebra.unit()[None, :]
    if mode == "unit" or n <= 1:
        return one.copy(), one.copy()
    rng = np.random.default_rng([*np.atleast_1d(seed).tolist(), 7])
    draw = algebra.sample_idempotent_unit if idempotent else algebra.sample_unit
    A = np.concatenate([one, draw(rng, n - 1)])
    if mode == "a_only":
        B = np.repeat(one, n, axis=0)
    elif mode == "equal":
        B = A.copy()
    else:
        B = np.concatenate([one, draw(rng, n - 1)])
    return A, B


@dataclass
class EpsilonEstimate:
    eps_hat: float
    n_pairs: int
    n_evaluations: int
    argmax_witness: tuple

    def to_dict(self) -> dict:
        from .serialize import encode

        x, y, a, b = self.argmax_witness
        return {
            "eps_hat": self.eps_hat,
            "n_pairs": self.n_pairs,
            "n_evaluations": self.n_evaluations,
            "argmax_witness": {"x": encode(x), "y": encode(y), "a": encode(a), "b": encode(b)},
        }


def hypothesis_pairs(relation: OrthogonalityRelation, seed, n_pairs: int):
    """Sampled orthogonal pairs plus the degenerate pairs ``(x, 0)``, ``(0, y)``, ``(0, 0)``."""
    Xs, Ys = sample_orthogonal_pairs(relation, seed, n_pairs)
    Z = relation.space.zeros(n_pairs)
    P = np.concatenate([Xs, Xs, Z, relation.space.zeros(1)])
    Q = np.concatenate([Ys, Z, Ys, relation.space.zeros(1)])
    return P, Q


def estimate_epsilon(
    instance: PexiderInstance,
    shape: str,
    algebra: ScalarAlgebra,
    n_pairs: int,
    n_scalars: int,
    seed=0,
    scalar_mode: str = "independent",
    idempotent: bool = False,
) -> EpsilonEstimate:
    """Largest defect over sampled orthogonal pairs and scalar samples."""
    if n_pairs < 1:
        raise ValueError("n_pairs must be >= 1")
    if shape == "eq29":
        scalar_mode = "unit"
    P, Q = hypothesis_pairs(instance.relation, [*np.atleast_1d(seed).tolist(), 1], n_pairs)
    A, B = scalar_pairs(algebra, scalar_mode, n_scalars, seed, idempotent)
    m, s = P.shape[0], A.shape[0]
    Pr, Qr = np.repeat(P, s, axis=0), np.repeat(Q, s, axis=0)
    Ar, Br = np.tile(A, (m, 1)), np.tile(B, (m, 1))
    vals = defect(instance, Pr, Qr, Ar, Br, shape, check=False)
    k = int(np.argmax(vals))
    return EpsilonEstimate(float(vals[k]), m, int(vals.size), (Pr[k], Qr[k], Ar[k], Br[k]))
