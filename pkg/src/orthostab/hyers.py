"""Hyers limit constructions and certification of the stability bounds.

The quadratic approximant of an even centered map ``F`` is the limit of
``4^-n F(2^n x)``, the additive approximant of an odd one the limit of
``2^-n F(2^n x)``.  Both are computed pointwise and in batches; the stop rule
is on successive increments.

Floating point limits the additive sequence: when ``f`` carries a large
quadratic part, the odd part ``(F(z) - F(-z))/2`` at ``z = 2^n x`` loses the
linear term to cancellation, and the resulting error grows like ``2^n``.  The
stop threshold is therefore ``max(stop_tol(x), floor_n(x))`` where ``floor_n``
is the rounding scale of the evaluation, and the threshold actually used is
reported as the point's effective tolerance.

A single small increment can be a coincidence of the noise, so the rule asks
for the last ``min(n, STOP_WINDOW)`` increments to be below threshold.  An
exactly quadratic or additive map still stops at ``N = 1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, List, Optional

import numpy as np

from .algebra import act, square
from .pexider import PexiderInstance, SHAPES
from .spaces import NormedSpace

N_MAX_LIMIT = 48
EPS_MACH = np.finfo(np.float64).eps
FLOOR_FACTOR = 16.0
# stop once this many consecutive increments (fewer at the orbit start) are below tolerance
STOP_WINDOW = 4

EVEN_CONSTANTS = {"F1": Fraction(13, 3), "F2": Fraction(16, 3), "F3": Fraction(16, 3)}
ODD_CONSTANTS = {"F1": Fraction(7), "F2": Fraction(8), "F3": Fraction(8)}
GENERAL_CONSTANTS = {"f1": Fraction(68, 3), "f2": Fraction(80, 3), "f3": Fraction(80, 3)}
# even and odd constants at 2*eps, once the offsets are removed
GENERAL_EVEN_PART = Fraction(26, 3)
GENERAL_ODD_PART = Fraction(14)


class OrbitOverflow(ArithmeticError):
    pass


class CanonicalizationMismatch(RuntimeError):
    def __init__(self, message: str, q_residual: float, t_residual: float):
        super().__init__(message)
        self.q_residual = q_residual
        self.t_residual = t_residual


@dataclass(frozen=True)
class ApproximantConfig:
    n_max: int = N_MAX_LIMIT
    stop_tol: float = 1e-10
    mode: str = "quadratic"

    def __post_init__(self):
        if not 1 <= self.n_max <= N_MAX_LIMIT:
            raise ValueError(f"n_max must be in [1, {N_MAX_LIMIT}]")
        if not self.stop_tol > 0:
            raise ValueError("stop_tol must be positive")
        if self.mode not in ("quadratic", "additive"):
            raise ValueError(f"unknown mode {self.mode!r}")

    def with_mode(self, mode: str) -> "ApproximantConfig":
        return ApproximantConfig(self.n_max, self.stop_tol, mode)

    def tol_at(self, x) -> np.ndarray:
        """Relative stopping tolerance ``stop_tol * (1 + |x|^2)``."""
        r = np.abs(np.asarray(x))
        return self.stop_tol * (1.0 + np.sum(r * r, axis=-1))


# -- centered even/odd parts ----------------------------------------------------


def center_and_split(instance: PexiderInstance, i: int, x):
    """``(F_i^e(x), F_i^o(x))`` for ``F_i = f_i - f_i(0)``."""
    x = instance.X.check(x)
    Fp = instance.centered(i, x)
    Fm = instance.centered(i, -x)
    return (Fp + Fm) / 2, (Fp - Fm) / 2


class ComponentPart:
    """Even or odd part of a centered component, with its rounding scale."""

    def __init__(self, instance: PexiderInstance, i: int, part: str):
        if part not in ("even", "odd"):
            raise ValueError("part must be 'even' or 'odd'")
        self.instance = instance
        self.i = i
        self.part = part
        self.codomain = instance.Y
        self._f0 = instance.eval(i, instance.X.zeros())
        self._f0_norm = float(instance.Y.norm(self._f0))

    def with_scale(self, x):
        inst = self.instance
        fp, fm = inst.eval(self.i, x), inst.eval(self.i, -x)
        Fp, Fm = fp - self._f0, fm - self._f0
        val = (Fp + Fm) / 2 if self.part == "even" else (Fp - Fm) / 2
        Y = self.codomain
        scale = np.maximum(Y.norm(fp), Y.norm(fm)) + self._f0_norm
        return val, scale

    def __call__(self, x):
        return self.with_scale(x)[0]


# -- Hyers limits ----------------------------------------------------------------


@dataclass
class Approximation:
    value: np.ndarray
    n_used: np.ndarray
    increment: np.ndarray
    tol: np.ndarray
    converged: np.ndarray
    floor_limited: np.ndarray


def _evaluate(F, z, norm):
    if hasattr(F, "with_scale"):
        return F.with_scale(z)
    v = np.asarray(F(z))
    return v, norm(v)


def _coord_norm(v):
    a = np.abs(v)
    return np.sqrt(np.sum(a * a, axis=-1))


def hyers_limit(F: Callable, x, cfg: ApproximantConfig, degree: int, base: int = 2, norm=None) -> Approximation:
    """Batched ``lim base^(-degree n) F(base^n x)`` with the increment stop rule."""
    # overflow surfaces as OrbitOverflow, not as a warning
    with np.errstate(over="ignore", invalid="ignore"):
        return _hyers_limit(F, x, cfg, degree, base, norm)


def _hyers_limit(F, x, cfg, degree, base, norm):
    if norm is None:
        norm = getattr(getattr(F, "codomain", None), "norm", None) or _coord_norm
    x = np.asarray(x)
    single = x.ndim == 1
    X = np.atleast_2d(x)
    n = X.shape[0]
    stol = cfg.tol_at(X)
    v0, _ = _evaluate(F, X, norm)
    v0 = np.array(v0)
    if not np.all(np.isfinite(v0)):
        raise OrbitOverflow("non-finite value at the orbit start")
    value = v0.copy()
    prev = v0.copy()
    n_used = np.zeros(n, dtype=np.int64)
    inc = np.full(n, np.inf)
    tol = stol.copy()
    conv = np.zeros(n, dtype=bool)
    floor_hit = np.zeros(n, dtype=bool)
    idx = np.arange(n)
    streak = np.zeros(n, dtype=np.int64)
    for k in range(1, cfg.n_max + 1):
        z = float(base) ** k * X[idx]
        w = float(base) ** (-degree * k)
        val, scale = _evaluate(F, z, norm)
        if not (np.all(np.isfinite(val)) and np.all(np.isfinite(z))):
            raise OrbitOverflow(f"non-finite value on the Hyers orbit at step {k}")
        v = val * w
        d = norm(v - prev[idx])
        floor = FLOOR_FACTOR * EPS_MACH * scale * w
        thr = np.maximum(stol[idx], floor)
        value[idx], prev[idx] = v, v
        n_used[idx], inc[idx], tol[idx] = k, d, thr
        below = d <= thr
        streak[idx] = np.where(below, streak[idx] + 1, 0)
        done = streak[idx] >= min(k, STOP_WINDOW)
        conv[idx[done]] = True
        floor_hit[idx[done]] = floor[done] > stol[idx][done]
        idx = idx[~done]
        if idx.size == 0:
            break
    out = Approximation(value, n_used, inc, tol, conv, floor_hit)
    if single:
        out = Approximation(value[0], n_used[0], inc[0], tol[0], conv[0], floor_hit[0])
    return out


def quadratic_approximant(F_even: Callable, x, cfg: ApproximantConfig, norm=None) -> Approximation:
    if cfg.mode != "quadratic":
        raise ValueError("config mode must be 'quadratic'")
    return hyers_limit(F_even, x, cfg, degree=2, norm=norm)


def additive_approximant(F_odd: Callable, x, cfg: ApproximantConfig, norm=None) -> Approximation:
    if cfg.mode != "additive":
        raise ValueError("config mode must be 'additive'")
    return hyers_limit(F_odd, x, cfg, degree=1, norm=norm)


def orbit_deviation(F: Callable, x, degree: int, n_steps: int, base: int = 2, norm=None):
    """``(dev, floor)`` of shape ``(n_steps, n)``: ``|base^(-dn) F(base^n x) - F(x)|``.

    ``floor`` is the rounding scale of the orbit evaluation at each step.
    """
    if norm is None:
        norm = getattr(getattr(F, "codomain", None), "norm", None) or _coord_norm
    X = np.atleast_2d(np.asarray(x))
    v0, s0 = _evaluate(F, X, norm)
    devs, floors = [], []
    for k in range(1, n_steps + 1):
        w = float(base) ** (-degree * k)
        val, scale = _evaluate(F, float(base) ** k * X, norm)
        devs.append(norm(val * w - v0))
        floors.append(FLOOR_FACTOR * EPS_MACH * (scale * w + s0))
    return np.array(devs), np.array(floors)


@dataclass
class PartFit:
    """Pointwise quadratic and additive approximants of ``F_1`` on a point set."""

    q: Approximation
    t: Approximation

    @property
    def tol(self) -> np.ndarray:
        return np.maximum(self.q.tol, self.t.tol)


def fit_parts(instance: PexiderInstance, X, cfg: ApproximantConfig, base: int = 2) -> PartFit:
    even = ComponentPart(instance, 1, "even")
    odd = ComponentPart(instance, 1, "odd")
    q = hyers_limit(even, X, cfg.with_mode("quadratic"), degree=2, base=base)
    t = hyers_limit(odd, X, cfg.with_mode("additive"), degree=1, base=base)
    return PartFit(q, t)


# -- canonical matrices -----------------------------------------------------------


@dataclass
class CanonicalDecomposition:
    Q_matrix: np.ndarray
    T_matrix: np.ndarray
    carrier: np.ndarray
    q_residual: float
    t_residual: float
    q_allowed: float
    t_allowed: float
    domain: NormedSpace = field(repr=False, default=None)
    # pointwise comparison of residuals against their allowances
    consistent: bool = True

    def q_form(self, X) -> np.ndarray:
        r = self.domain.realify(X)
        s = np.einsum("...i,ij,...j->...", r, self.Q_matrix, r)
        return s[..., None] * self.carrier

    def t_form(self, X) -> np.ndarray:
        return np.asarray(X) @ self.T_matrix.T

    def to_dict(self) -> dict:
        return {
            "Q_matrix": self.Q_matrix,
            "T_matrix": self.T_matrix,
            "q_residual": self.q_residual,
            "t_residual": self.t_residual,
            "q_allowed": self.q_allowed,
            "t_allowed": self.t_allowed,
            "consistent": self.consistent,
        }


def canonicalize(instance: PexiderInstance, cfg: ApproximantConfig, validation_samples, raise_on_mismatch=True):
    """Matrices of the quadratic and additive approximants of ``F_1``.

    ``T`` is read off its values at the basis vectors; the quadratic form by
    polarization ``B(e_k, e_l) = (Q(e_k + e_l) - Q(e_k) - Q(e_l)) / 2`` along
    the carrier.  Residuals are measured on ``validation_samples`` and
    compared with ``10 * tol`` plus the propagated basis-point tolerances.
    """
    Xs, Ys = instance.X, instance.Y
    carrier = instance.carrier
    even = ComponentPart(instance, 1, "even")
    odd = ComponentPart(instance, 1, "odd")
    qcfg, tcfg = cfg.with_mode("quadratic"), cfg.with_mode("additive")

    E = np.eye(Xs.dim, dtype=Xs.dtype)
    tb = additive_approximant(odd, E, tcfg)
    T = tb.value.T.copy()

    R = Xs.real_basis()
    m = R.shape[0]
    ii, jj = np.triu_indices(m, k=1)
    pts = np.concatenate([R, R[ii] + R[jj]])
    qb = quadratic_approximant(even, pts, qcfg)
    proj = np.real(qb.value @ np.conj(carrier))
    diag, off = proj[:m], proj[m:]
    M = np.diag(diag)
    B = (off - diag[ii] - diag[jj]) / 2
    M[ii, jj] = B
    M[jj, ii] = B
    dtol, otol = qb.tol[:m], qb.tol[m:]
    B_err = np.diag(dtol)
    B_err[ii, jj] = B_err[jj, ii] = (otol + dtol[ii] + dtol[jj]) / 2

    dec = CanonicalDecomposition(M, T, carrier, 0.0, 0.0, 0.0, 0.0, Xs)
    V = Xs.check(validation_samples)
    qa = quadratic_approximant(even, V, qcfg)
    ta = additive_approximant(odd, V, tcfg)
    q_res = Ys.norm(qa.value - dec.q_form(V))
    t_res = Ys.norm(ta.value - dec.t_form(V))
    r = np.abs(Xs.realify(V))
    q_allow = 10 * qa.tol + np.einsum("...i,ij,...j->...", r, B_err, r)
    t_allow = 10 * ta.tol + np.abs(V) @ tb.tol
    dec.q_residual, dec.t_residual = float(q_res.max()), float(t_res.max())
    dec.q_allowed, dec.t_allowed = float(q_allow.max()), float(t_allow.max())
    dec.consistent = not (np.any(q_res > q_allow) or np.any(t_res > t_allow))
    if raise_on_mismatch and not dec.consistent:
        raise CanonicalizationMismatch(
            f"pointwise limits are not matrix forms at tolerance: "
            f"q_residual={dec.q_residual:.3e}, t_residual={dec.t_residual:.3e}",
            dec.q_residual,
            dec.t_residual,
        )
    return dec


# -- certificate -----------------------------------------------------------------


@dataclass
class BoundRecord:
    name: str
    constant: float
    attained_sup: float
    ratio: Optional[float]
    slack: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "constant": self.constant,
            "attained_sup": self.attained_sup,
            "ratio": self.ratio,
            "slack": self.slack,
            "pass": self.passed,
        }


@dataclass
class HomogeneityRecord:
    scalar_sample: np.ndarray
    factor: float
    t_residual: float
    q_residual: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "scalar_sample": self.scalar_sample,
            "factor": self.factor,
            "t_residual": self.t_residual,
            "q_residual": self.q_residual,
            "pass": self.passed,
        }


@dataclass
class StabilityCertificate:
    eps_hat: float
    bounds: List[BoundRecord]
    homogeneity: List[HomogeneityRecord]
    uniqueness: dict

    @property
    def all_pass(self) -> bool:
        return (
            all(b.passed for b in self.bounds)
            and all(h.passed for h in self.homogeneity)
            and bool(self.uniqueness.get("pass", True))
        )

    def bound(self, name: str) -> BoundRecord:
        for b in self.bounds:
            if b.name == name:
                return b
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "eps_hat": self.eps_hat,
            "all_pass": self.all_pass,
            "bounds": [b.to_dict() for b in self.bounds],
            "homogeneity": [h.to_dict() for h in self.homogeneity],
            "uniqueness": self.uniqueness,
        }


def _bound(name, constant, dev, eps, slack) -> BoundRecord:
    c = float(constant)
    dev = np.asarray(dev, dtype=np.float64)
    limit = c * eps
    ok = dev <= limit + slack
    sup = float(dev.max())
    ratio = sup / limit if limit > 0 else (0.0 if sup <= 0 else None)
    return BoundRecord(name, c, sup, ratio, float(np.max(slack)), bool(np.all(ok)))


def _rate_bound(name, constant, F, X, degree, n_steps, eps, stol):
    dev, floor = orbit_deviation(F, X, degree, n_steps)
    steps = np.arange(1, n_steps + 1, dtype=np.float64)[:, None]
    factor = 1.0 - 2.0 ** (-degree * steps)
    limit = factor * float(constant) * eps
    slack = 4 * stol[None, :] + floor
    ok = dev <= limit + slack
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(limit > 0, dev / limit, np.where(dev > 0, np.inf, 0.0))
    worst = float(np.max(ratios))
    return BoundRecord(
        name,
        float(constant),
        float(dev.max()),
        worst if np.isfinite(worst) else None,
        float(slack.max()),
        bool(np.all(ok)),
    )


def certify(
    instance: PexiderInstance,
    shape: str,
    eps_estimate,
    decomposition: CanonicalDecomposition,
    samples,
    scalar_samples,
    cfg: ApproximantConfig = ApproximantConfig(),
    n_orbit: int = 100,
    orbit_steps: int = 30,
    n_homogeneity: int = 100,
    scale_factors=(),
) -> StabilityCertificate:
    """Check every bound that applies to ``shape`` at the sample points.

    A bound passes when ``attained <= constant * eps_hat + slack`` at every
    point, with ``slack = 4 * tol(x) + canonicalization residual``.
    """
    if shape not in SHAPES:
        raise ValueError(f"unknown shape {shape!r}")
    eps = float(eps_estimate.eps_hat)
    Xs, Ys = instance.X, instance.Y
    X = Xs.check(samples)
    fit = fit_parts(instance, X, cfg)
    Qx, Tx = fit.q.value, fit.t.value
    canon = decomposition.q_residual + decomposition.t_residual if decomposition is not None else 0.0
    slack = 4 * fit.tol + canon
    even = ComponentPart(instance, 1, "even")
    odd = ComponentPart(instance, 1, "odd")
    Xo = X[:n_orbit]
    stol_o = cfg.tol_at(Xo)
    bounds: List[BoundRecord] = []

    if shape == "eq1":
        for i in (1, 2, 3):
            dev = Ys.norm(instance.centered(i, X) - Qx)
            bounds.append(_bound(f"F{i}_vs_Q", EVEN_CONSTANTS[f"F{i}"], dev, eps, slack))
        bounds.append(_rate_bound("F1_orbit_rate", EVEN_CONSTANTS["F1"], even, Xo, 2, orbit_steps, eps, stol_o))
    elif shape == "eq12":
        for i in (1, 2, 3):
            dev = Ys.norm(instance.centered(i, X) - Tx)
            bounds.append(_bound(f"F{i}_vs_T", ODD_CONSTANTS[f"F{i}"], dev, eps, slack))
        bounds.append(_rate_bound("F1_orbit_rate", ODD_CONSTANTS["F1"], odd, Xo, 1, orbit_steps, eps, stol_o))
    else:
        for i in (1, 2, 3):
            dev = Ys.norm(instance.centered(i, X) - Qx - Tx)
            bounds.append(_bound(f"f{i}_vs_Q_plus_T", GENERAL_CONSTANTS[f"f{i}"], dev, eps, slack))
        Fe, Fo = center_and_split(instance, 1, X)
        bounds.append(_bound("F1_even_vs_Q", GENERAL_EVEN_PART, Ys.norm(Fe - Qx), eps, slack))
        bounds.append(_bound("F1_odd_vs_T", GENERAL_ODD_PART, Ys.norm(Fo - Tx), eps, slack))
        bounds.append(_rate_bound("F1_even_orbit_rate", GENERAL_EVEN_PART, even, Xo, 2, orbit_steps, eps, stol_o))
        bounds.append(_rate_bound("F1_odd_orbit_rate", GENERAL_ODD_PART, odd, Xo, 1, orbit_steps, eps, stol_o))
        if instance.ground.alpha is not None:
            f0 = [float(Ys.norm(instance.eval(i, Xs.zeros()))) for i in (1, 3)]
            bounds.append(_bound("f1_norm_collapse", GENERAL_CONSTANTS["f1"], Ys.norm(instance.eval(1, X)) - f0[0], eps, slack))
            bounds.append(_bound("f3_norm_collapse", GENERAL_CONSTANTS["f3"], Ys.norm(instance.eval(3, X)) - f0[1], eps, slack))
            alpha = instance.ground.alpha
            if alpha != 1.0:
                # y = 0, a = b = 1 gives |1 - alpha| |F1| <= eps
                dev = Ys.norm(instance.centered(1, X))
                bounds.append(_bound("F1_alpha_collapse", 1.0 / abs(1.0 - alpha), dev, eps, slack))
            if decomposition is not None:
                mat_tol = 10 * cfg.stop_tol
                for label, M in (("Q_matrix_vanishes", decomposition.Q_matrix), ("T_matrix_vanishes", decomposition.T_matrix)):
                    nrm = float(np.linalg.norm(M, 2))
                    bounds.append(BoundRecord(label, 0.0, nrm, None, mat_tol, nrm <= mat_tol))

    homogeneity = homogeneity_records(instance, X[:n_homogeneity], scalar_samples, cfg, scale_factors)
    uniqueness = uniqueness_probe(instance, X, fit, cfg)
    return StabilityCertificate(eps, bounds, homogeneity, uniqueness)


def homogeneity_records(instance, X, scalar_samples, cfg, scale_factors=()) -> List[HomogeneityRecord]:
    """``|T(ax) - aT(x)|`` and ``|Q(ax) - a^2 Q(x)|`` per scalar, against ``10 * tol``.

    ``scale_factors`` add the non-unit scalars ``t * a`` (``t`` real), which
    probe homogeneity over the whole algebra rather than its unit sphere.
    """
    Ys = instance.Y
    A = np.asarray(scalar_samples)
    factors = [1.0] + [float(t) for t in scale_factors]
    base = fit_parts(instance, X, cfg)
    n, m = X.shape[0], A.shape[0]
    records = []
    for t in factors:
        S = t * A
        Xa = act(np.repeat(S, n, axis=0), np.tile(X, (m, 1)))
        fa = fit_parts(instance, Xa, cfg)
        Sr = np.repeat(S, n, axis=0)
        t_res = Ys.norm(fa.t.value - act(Sr, np.tile(base.t.value, (m, 1))))
        q_res = Ys.norm(fa.q.value - act(square(Sr), np.tile(base.q.value, (m, 1))))
        t_tol = 10 * np.maximum(fa.t.tol, np.tile(base.t.tol, m) * max(1.0, abs(t)))
        q_tol = 10 * np.maximum(fa.q.tol, np.tile(base.q.tol, m) * max(1.0, t * t))
        t_res, q_res = t_res.reshape(m, n), q_res.reshape(m, n)
        ok = (t_res <= t_tol.reshape(m, n)) & (q_res <= q_tol.reshape(m, n))
        for j in range(m):
            records.append(
                HomogeneityRecord(A[j], t, float(t_res[j].max()), float(q_res[j].max()), bool(ok[j].all()))
            )
    return records


def uniqueness_probe(instance, X, fit: PartFit, cfg) -> dict:
    """Compare with the tripling sequences ``9^-n F(3^n x)`` and ``3^-n F(3^n x)``.

    Any quadratic (additive) map at bounded distance from ``F_1`` is the limit
    of both sequences, so they must agree with the doubling limits.
    """
    alt = fit_parts(instance, X, cfg, base=3)
    Ys = instance.Y
    dq = Ys.norm(fit.q.value - alt.q.value)
    dt = Ys.norm(fit.t.value - alt.t.value)
    okq = dq <= 2 * np.maximum(fit.q.tol, alt.q.tol)
    okt = dt <= 2 * np.maximum(fit.t.tol, alt.t.tol)
    return {
        "q_max_diff": float(dq.max()),
        "t_max_diff": float(dt.max()),
        "pass": bool(okq.all() and okt.all()),
    }
