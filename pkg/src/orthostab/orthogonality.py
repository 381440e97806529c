"""Orthogonality relations in the sense of Ratz and checks of axioms (O1)-(O4).

Three relations are provided: the trivial one (zero or linearly independent),
inner-product orthogonality, and Birkhoff-James orthogonality
``x _|_ y  <=>  ||x + t y|| >= ||x|| for every real t``.

All membership tests are batched over the leading axes of their arguments.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .linesearch import bisect_sign, bracket_convex, golden_min
from .spaces import NormedSpace, Subspace2, independent

KINDS = ("trivial", "inner_product", "birkhoff_james")
MAG_RANGE = (1e-2, 1e2)


class ThalesianFailure(RuntimeError):
    def __init__(self, message: str, best: Optional[np.ndarray] = None, residuals=None):
        super().__init__(message)
        self.best = best
        self.residuals = residuals


class SamplerExhausted(RuntimeError):
    pass


def log_uniform(rng: np.random.Generator, size, lo: float = MAG_RANGE[0], hi: float = MAG_RANGE[1]):
    return np.exp(rng.uniform(np.log(lo), np.log(hi), size=size))


@dataclass(frozen=True)
class OrthogonalityRelation:
    kind: str
    space: NormedSpace
    tol: float = 1e-9

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown orthogonality {self.kind!r}")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.kind == "inner_product" and not self.space.is_inner_product:
            raise ValueError("inner_product orthogonality needs a euclidean or weighted_euclidean norm")

    def residual(self, x, y) -> np.ndarray:
        """Scale-free violation of ``x _|_ y``; orthogonal iff ``residual <= tol``."""
        sp = self.space
        x, y = np.broadcast_arrays(sp.check(x), sp.check(y))
        nx, ny = sp.norm(x), sp.norm(y)
        scale = 1.0 + nx * ny
        if self.kind == "inner_product":
            return np.abs(sp.inner(x, y)) / scale
        if self.kind == "trivial":
            ok = (nx == 0) | (ny == 0) | independent(sp, x, y)
            return np.where(ok, 0.0, 1.0)
        _, m = bj_minimum(sp, x, y)
        return np.maximum(nx - m, 0.0) / scale

    def orthogonal(self, x, y) -> np.ndarray:
        return self.residual(x, y) <= self.tol


def is_orthogonal(rel: OrthogonalityRelation, x, y) -> bool:
    return bool(np.all(rel.orthogonal(x, y)))


def bj_minimum(space: NormedSpace, x, y) -> Tuple[np.ndarray, np.ndarray]:
    """``(argmin_t, min_t)`` of ``||x + t y||`` over real ``t``, batched.

    Rows with ``y = 0`` report ``t = 0``.  The minimum never exceeds ``||x||``.
    """
    x, y = np.broadcast_arrays(space.check(x), space.check(y))
    shape = x.shape[:-1]
    xf = x.reshape(-1, space.dim)
    yf = y.reshape(-1, space.dim)
    nx, ny = space.norm(xf), space.norm(yf)
    live = ny > 0
    # rescale t so the minimizer is O(1)
    s = np.where(live, np.where(nx > 0, nx, 1.0) / np.where(live, ny, 1.0), 0.0)
    ys = yf * s[:, None]

    def obj(t):
        return space.norm(xf + t[:, None] * ys)

    lo, hi = bracket_convex(obj, xf.shape[0])
    t, m = golden_min(obj, lo, hi)
    better = m < nx
    t = np.where(better & live, t * s, 0.0)
    m = np.where(better & live, m, nx)
    return t.reshape(shape), m.reshape(shape)


def _plane_frame(space: NormedSpace, x, v):
    """Coordinate-orthonormal ``(e1, e2)`` with ``e1 = x/|x|`` spanning ``span(x, v)``."""
    rx, rv = space.realify(x), space.realify(v)
    e1 = rx / np.linalg.norm(rx, axis=-1, keepdims=True)
    w = rv - np.sum(rv * e1, axis=-1, keepdims=True) * e1
    w = w - np.sum(w * e1, axis=-1, keepdims=True) * e1
    e2 = w / np.linalg.norm(w, axis=-1, keepdims=True)
    return space.complexify(e1), space.complexify(e2)


def bj_orthogonal_direction(space: NormedSpace, x, e2, n_iter: int = 60) -> np.ndarray:
    """Unit direction ``d`` in ``span(x, e2)`` with ``x _|_ d`` in the Birkhoff-James sense.

    ``e2`` must be coordinate-orthonormal to ``x/|x|``.  With
    ``d(theta) = cos(theta) e1 + sin(theta) e2`` the minimizer of
    ``||x + t d(theta)||`` is negative at ``theta = 0`` and positive at
    ``theta = pi``; bisection on its sign locates the orthogonal direction.
    """
    x = space.check(x)
    rx = space.realify(x)
    e1 = space.complexify(rx / np.linalg.norm(rx, axis=-1, keepdims=True))

    def d_of(theta):
        return np.cos(theta)[:, None] * e1 + np.sin(theta)[:, None] * e2

    def signed(theta):
        t, _ = bj_minimum(space, x, d_of(theta))
        return t

    n = x.shape[0]
    theta = bisect_sign(signed, np.zeros(n), np.full(n, np.pi), n_iter=n_iter)
    return d_of(theta)


def sample_orthogonal_pairs(rel: OrthogonalityRelation, seed, n: int, max_rounds: int = 20):
    """``n`` orthogonal pairs ``(X, Y)`` with norms log-uniform in ``[1e-2, 1e2]``.

    Each role (x directions, y directions, magnitudes) has its own stream, so
    the first ``k`` pairs do not depend on ``n``.
    """
    sp = rel.space
    streams = [np.random.default_rng([*np.atleast_1d(seed).tolist(), role]) for role in range(4)]
    rx, ry, rmag, rretry = streams
    X = sp.random(rx, n)
    V = sp.random(ry, n)
    mx, my = log_uniform(rmag, (n, 2)).T
    X, Y = _pair_from(rel, X, V)
    bad = ~(rel.orthogonal(X, Y) & (sp.norm(Y) > 0))
    rounds = 0
    while bad.any():
        rounds += 1
        if rounds > max_rounds:
            raise SamplerExhausted(f"{int(bad.sum())} of {n} pairs still rejected after {max_rounds} rounds")
        k = int(bad.sum())
        Xb, Yb = _pair_from(rel, sp.random(rretry, k), sp.random(rretry, k))
        X[bad], Y[bad] = Xb, Yb
        bad = ~(rel.orthogonal(X, Y) & (sp.norm(Y) > 0))
    X = X * (mx / sp.norm(X))[:, None]
    Y = Y * (my / sp.norm(Y))[:, None]
    return X, Y


def _pair_from(rel: OrthogonalityRelation, X, V):
    sp = rel.space
    if rel.kind == "trivial":
        return X, V
    if rel.kind == "inner_product":
        Y = V - (sp.inner(V, X) / sp.inner(X, X))[:, None] * X
        Y = Y - (sp.inner(Y, X) / sp.inner(X, X))[:, None] * X
        return X, Y
    _, e2 = _plane_frame(sp, X, V)
    return X, bj_orthogonal_direction(sp, X, e2)


def sample_orthogonal_pair(rel: OrthogonalityRelation, rng: np.random.Generator):
    """One orthogonal pair drawn from ``rng``."""
    seed = int(rng.integers(0, 2**63 - 1))
    X, Y = sample_orthogonal_pairs(rel, seed, 1)
    return X[0], Y[0]


# -- Thalesian property (O4) --------------------------------------------------


def thalesian_solve(rel: OrthogonalityRelation, P: Subspace2, x, lam: float) -> np.ndarray:
    """``y0`` in ``P`` with ``x _|_ y0`` and ``x + y0 _|_ lam*x - y0``."""
    sp = rel.space
    x = sp.check(x)
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    if not np.any(x != 0):
        raise ValueError("x must be nonzero")
    if not P.contains(x):
        raise ValueError("x is not in the plane P")
    # second basis vector of P that is not parallel to x
    c = P.coords(x)
    v = P.point(-c[1], c[0])
    y0, res = thalesian_batch(rel, x[None], v[None], np.array([float(lam)]))
    if not np.all(res[0] <= rel.tol):
        raise ThalesianFailure(
            f"Thalesian solver did not reach tol={rel.tol}: residuals {res[0].tolist()}",
            best=y0[0],
            residuals=res[0],
        )
    return y0[0]


def thalesian_batch(rel: OrthogonalityRelation, X, V, lam):
    """Batched Thalesian solve in the planes ``span(x_k, v_k)``.

    Returns ``(Y0, residuals)`` where ``residuals[k] = (r1, r2)`` are the
    scaled violations of ``x _|_ y0`` and ``x + y0 _|_ lam x - y0``.  No
    exception is raised here; callers decide what counts as failure.
    """
    sp = rel.space
    X = sp.check(X)
    lam = np.asarray(lam, dtype=np.float64)
    e1, e2 = _plane_frame(sp, X, V)
    if rel.kind == "trivial":
        Y0 = np.linalg.norm(sp.realify(X), axis=-1)[:, None] * e2
    elif rel.kind == "inner_product":
        u = e2 - (sp.inner(e2, X) / sp.inner(X, X))[:, None] * X
        u = u / sp.norm(u)[:, None]
        Y0 = (np.sqrt(lam) * sp.norm(X))[:, None] * u
    else:
        Y0 = _bj_thalesian(rel, X, e2, lam)
    res = _thales_residuals(rel, X, Y0, lam)
    bad = np.any(res > rel.tol, axis=-1)
    if rel.kind == "birkhoff_james" and bad.any():
        for k in np.flatnonzero(bad):
            Y0[k] = _bj_thalesian_scan(rel, X[k], e1[k], e2[k], float(lam[k]))
        res = _thales_residuals(rel, X, Y0, lam)
    return Y0, res


def _thales_residuals(rel, X, Y0, lam):
    r1 = rel.residual(X, Y0)
    r2 = rel.residual(X + Y0, lam[:, None] * X - Y0)
    return np.stack([r1, r2], axis=-1)


def _bj_thalesian(rel, X, e2, lam, n_iter: int = 60):
    sp = rel.space
    n = X.shape[0]
    d = bj_orthogonal_direction(sp, X, e2)
    zero = lam == 0

    def h(r):
        U = X + r[:, None] * d
        W = lam[:, None] * X - r[:, None] * d
        t, _ = bj_minimum(sp, U, W)
        return t

    # h(0) = -1/lam < 0 and h(r) -> 1 as r grows
    R = sp.norm(X) / sp.norm(d) * np.maximum(1.0, np.sqrt(lam))
    for _ in range(60):
        up = (h(R) > 0) | zero
        if up.all():
            break
        R = np.where(up, R, 2 * R)
    r = bisect_sign(h, np.zeros(n), R, n_iter=n_iter)
    r = np.where(zero, 0.0, r)
    return r[:, None] * d


def _bj_thalesian_scan(rel, x, e1, e2, lam, n_grid: int = 400, n_refine: int = 4):
    """Dense ``(theta, r)`` scan with local refinement, used when bisection is not bracketed."""
    sp = rel.space
    nx = float(sp.norm(x))
    r_max = 4.0 * nx * max(1.0, np.sqrt(lam))
    th = np.linspace(0.0, np.pi, n_grid, endpoint=False)
    rr = np.linspace(0.0, r_max, n_grid)
    best, best_val = None, np.inf
    for _ in range(n_refine + 1):
        T, R = np.meshgrid(th, rr, indexing="ij")
        T, R = T.ravel(), R.ravel()
        Y = R[:, None] * (np.cos(T)[:, None] * e1 + np.sin(T)[:, None] * e2)
        Xb = np.broadcast_to(x, Y.shape)
        res = _thales_residuals(rel, Xb, Y, np.full(T.shape, lam)).sum(axis=-1)
        k = int(np.argmin(res))
        if res[k] < best_val:
            best, best_val = Y[k].copy(), float(res[k])
        dt = th[1] - th[0] if th.size > 1 else np.pi / n_grid
        dr = rr[1] - rr[0] if rr.size > 1 else r_max / n_grid
        th = np.linspace(T[k] - 2 * dt, T[k] + 2 * dt, 21)
        rr = np.linspace(max(R[k] - 2 * dr, 0.0), R[k] + 2 * dr, 21)
    return best


# -- axiom checks ---------------------------------------------------------------


@dataclass
class AxiomReport:
    o1_pass: bool
    o2_pass: bool
    o3_pass: bool
    o4_pass: bool
    o3_samples: int
    o4_samples: int
    o4_pass_rate: float
    max_thales_residual: float
    failures: List[dict] = field(default_factory=list)

    @property
    def all_pass(self) -> bool:
        return self.o1_pass and self.o2_pass and self.o3_pass and self.o4_pass

    def to_dict(self) -> dict:
        return {
            "o1_pass": self.o1_pass,
            "o2_pass": self.o2_pass,
            "o3_pass": self.o3_pass,
            "o4_pass": self.o4_pass,
            "o3_samples": self.o3_samples,
            "o4_samples": self.o4_samples,
            "o4_pass_rate": self.o4_pass_rate,
            "max_thales_residual": self.max_thales_residual,
            "failures": self.failures,
        }


def _witness(axiom: str, **vectors) -> dict:
    out = {"axiom": axiom}
    for k, v in vectors.items():
        v = np.asarray(v)
        out[k] = [[float(z.real), float(z.imag)] for z in v.ravel()] if np.iscomplexobj(v) else v.tolist()
    return out


def check_axioms(
    rel: OrthogonalityRelation,
    sampler_seed,
    n_samples: int,
    n_scalings: int = 4,
    max_witnesses: int = 5,
) -> AxiomReport:
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    sp = rel.space
    base = [*np.atleast_1d(sampler_seed).tolist()]
    rng = np.random.default_rng(base + [101])
    failures: List[dict] = []

    def record(mask, axiom, **arrays):
        for k in np.flatnonzero(mask)[:max_witnesses]:
            failures.append(_witness(axiom, **{name: a[k] for name, a in arrays.items()}))

    # O1: x _|_ 0 and 0 _|_ x
    X1 = sp.random(rng, n_samples)
    X1 *= (log_uniform(rng, n_samples) / sp.norm(X1))[:, None]
    Z = sp.zeros(n_samples)
    bad1 = ~(rel.orthogonal(X1, Z) & rel.orthogonal(Z, X1))
    record(bad1, "O1", x=X1)

    # O2: nonzero orthogonal pairs are independent
    X, Y = sample_orthogonal_pairs(rel, base + [102], n_samples)
    bad2 = ~independent(sp, X, Y)
    record(bad2, "O2", x=X, y=Y)

    # O3: (alpha x) _|_ (beta y), signs and zeros included
    m = n_samples * n_scalings
    coef = log_uniform(rng, (2, m)) * rng.choice([-1.0, 1.0], size=(2, m))
    coef[rng.uniform(size=(2, m)) < 0.1] = 0.0
    Xr, Yr = np.repeat(X, n_scalings, axis=0), np.repeat(Y, n_scalings, axis=0)
    A3, B3 = coef[0][:, None] * Xr, coef[1][:, None] * Yr
    bad3 = ~rel.orthogonal(A3, B3)
    record(bad3, "O3", x=Xr, y=Yr, alpha=coef[0], beta=coef[1])

    # O4: Thalesian solve on random planes
    V1, V2 = sp.random(rng, n_samples), sp.random(rng, n_samples)
    c = rng.standard_normal((n_samples, 2))
    X4 = c[:, :1] * V1 + c[:, 1:] * V2
    X4 *= (log_uniform(rng, n_samples) / sp.norm(X4))[:, None]
    lam = log_uniform(rng, n_samples)
    lam[rng.uniform(size=n_samples) < 0.125] = 0.0
    V4 = np.where(np.abs(c[:, :1]) >= np.abs(c[:, 1:]), V2, V1)
    Y0, res = thalesian_batch(rel, X4, V4, lam)
    ok4 = np.all(res <= rel.tol, axis=-1)
    record(~ok4, "O4", x=X4, plane_vector=V4, lam=lam, y0=Y0, residuals=res)

    return AxiomReport(
        o1_pass=not bad1.any(),
        o2_pass=not bad2.any(),
        o3_pass=not bad3.any(),
        o4_pass=bool(ok4.all()),
        o3_samples=m,
        o4_samples=n_samples,
        o4_pass_rate=float(ok4.mean()),
        max_thales_residual=float(res.max()),
        failures=failures,
    )
