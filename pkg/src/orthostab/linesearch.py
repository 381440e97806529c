"""Batched one-dimensional convex minimization by golden-section search."""

from __future__ import annotations

import numpy as np

INVPHI = (np.sqrt(5.0) - 1.0) / 2.0
MAX_ITER = 200
MAX_DOUBLINGS = 80


def bracket_convex(fun, n: int):
    """Symmetric brackets ``[-R, R]`` that contain a minimizer of each convex objective.

    ``fun`` maps an ``(n,)`` array of abscissae to ``(n,)`` objective values.
    Starting from ``R = 1`` the radius doubles until the objective does not
    decrease towards either end, which for a convex function pins the
    minimizer inside.
    """
    R = np.ones(n)
    active = np.ones(n, dtype=bool)
    for _ in range(MAX_DOUBLINGS):
        hi, half = fun(R), fun(R / 2)
        lo, lhalf = fun(-R), fun(-R / 2)
        active &= (hi < half) | (lo < lhalf)
        if not active.any():
            break
        R = np.where(active, 2 * R, R)
    return -R, R


def golden_min(fun, lo, hi, xtol: float = 1e-13, max_iter: int = MAX_ITER):
    """Minimize convex objectives on ``[lo, hi]`` elementwise.

    Returns ``(argmin, minimum)``.  The minimum is the smallest value actually
    evaluated, so it is attained at the returned abscissa.
    """
    a = np.array(lo, dtype=np.float64)
    b = np.array(hi, dtype=np.float64)
    c = b - INVPHI * (b - a)
    d = a + INVPHI * (b - a)
    fc, fd = fun(c), fun(d)
    for _ in range(max_iter):
        if np.all(b - a <= xtol * (1.0 + np.abs(a) + np.abs(b))):
            break
        left = fc < fd
        # left: keep [a, d], old c becomes new d
        # right: keep [c, b], old d becomes new c
        a, b = np.where(left, a, c), np.where(left, d, b)
        probe = np.where(left, b - INVPHI * (b - a), a + INVPHI * (b - a))
        fp = fun(probe)
        c, d, fc, fd = (
            np.where(left, probe, d),
            np.where(left, c, probe),
            np.where(left, fp, fd),
            np.where(left, fc, fp),
        )
    t = 0.5 * (a + b)
    pts = np.stack([t, c, d])
    vals = np.stack([fun(t), fc, fd])
    k = np.argmin(vals, axis=0)
    idx = np.arange(pts.shape[1])
    return pts[k, idx], vals[k, idx]


def bisect_sign(fun, lo, hi, n_iter: int = 100):
    """Batched bisection for a sign change of ``fun`` on ``[lo, hi]``.

    Assumes ``fun(lo) <= 0 <= fun(hi)`` elementwise; entries where this fails
    are still narrowed but the caller must verify the root.
    """
    lo = np.array(lo, dtype=np.float64)
    hi = np.array(hi, dtype=np.float64)
    for _ in range(n_iter):
        mid = 0.5 * (lo + hi)
        neg = fun(mid) <= 0
        lo, hi = np.where(neg, mid, lo), np.where(neg, hi, mid)
        if np.all(hi - lo <= 1e-16 * (1.0 + np.abs(lo))):
            break
    return 0.5 * (lo + hi)
