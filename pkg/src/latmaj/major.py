"""Majorization toolkit: T-transform checks, the majorization order, the
minimum-variance profile, the dissipation ledger, and profile functionals.

All functions are pure and operate on plain float profiles (the log-norm
vector p extracted from a GSO state).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .lll import cdelta
from .tracing import Trace

__all__ = [
    "is_t_transform",
    "majorizes",
    "gsa_profile",
    "min_variance_check",
    "DissipationLedger",
    "ledger_from_trace",
    "roi_bound_check",
    "schur_scores",
]


def is_t_transform(pre, post, k: int, tol: float = 1e-10) -> tuple[bool, float]:
    """Check that post is pre with coordinates (k-1, k) moved toward each
    other by some eps in the open interval (0, gap), all else fixed.

    Returns (ok, eps) where eps = pre[k-1] - post[k-1].
    """
    pre = np.asarray(pre, dtype=float)
    post = np.asarray(post, dtype=float)
    if pre.shape != post.shape:
        raise ValueError("profiles must have equal length")
    d = len(pre)
    if not (1 <= k < d):
        raise ValueError(f"pair index k={k} out of range for d={d}")
    eps = float(pre[k - 1] - post[k - 1])
    others = np.abs(pre - post)
    others[k - 1] = 0.0
    others[k] = 0.0
    if np.any(others > tol):
        return False, eps
    if abs((pre[k - 1] + pre[k]) - (post[k - 1] + post[k])) > tol:
        return False, eps
    gap = float(pre[k - 1] - pre[k])
    if gap <= 0.0:
        return False, eps
    if not (0.0 < eps < gap):
        return False, eps
    return True, eps


def majorizes(x, y, tol: float = 1e-9) -> bool:
    """True when y is majorized by x: descending prefix sums of y never exceed
    those of x (within tol) and the totals agree (within tol)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ValueError("profiles must have equal length")
    xs = np.cumsum(np.sort(x)[::-1])
    ys = np.cumsum(np.sort(y)[::-1])
    if abs(xs[-1] - ys[-1]) > tol:
        return False
    return bool(np.all(ys <= xs + tol))


def gsa_profile(d: int, L: float, delta: float) -> np.ndarray:
    """Arithmetic progression with sum L and adjacent gaps exactly c_delta."""
    if d < 1:
        raise ValueError("d must be positive")
    c = cdelta(delta)
    i = np.arange(1, d + 1, dtype=float)
    return L / d + c * (d + 1 - 2 * i) / 2.0


def min_variance_check(p, delta: float, tol: float = 1e-9) -> bool:
    """Verify sum(p^2) >= sum(p*^2) for a profile feasible for the gap polytope.

    p* is the constrained minimum-variance profile with the same sum.  Raises
    on infeasible input (some adjacent gap below c_delta - tol).
    """
    p = np.asarray(p, dtype=float)
    c = cdelta(delta)
    gaps = p[:-1] - p[1:]
    if np.any(gaps < c - tol):
        raise ValueError("profile infeasible: adjacent gap below c_delta")
    pstar = gsa_profile(len(p), float(np.sum(p)), delta)
    return bool(np.dot(p, p) >= np.dot(pstar, pstar) - tol)


@dataclass
class DissipationLedger:
    """Per-step variance dissipation of an adjacent-swap trace.

    V[t] is the relative variance after t swaps; drops[s] = 2*eps*(gap - eps)
    for swap s; V[0] - V[N] telescopes to sum(drops).
    """

    V: np.ndarray
    drops: np.ndarray
    L: float
    pstar_sum_sq: float
    bound: float

    @property
    def n(self) -> int:
        return len(self.drops)


def ledger_from_trace(trace: Trace, delta: float | None = None) -> DissipationLedger:
    """Build the dissipation ledger of a plain-LLL trace and check the
    swap-count lower bound N >= (V(0) - V(N)) / max drop."""
    if not trace.all_adjacent():
        raise ValueError("dissipation ledger is defined for adjacent-swap traces only")
    if delta is None:
        delta = trace.delta
    pstar = gsa_profile(trace.d, trace.sum_p_initial, delta)
    pss = float(np.dot(pstar, pstar))
    V = [trace.sum_sq_initial - pss]
    drops = []
    for e in trace.events:
        V.append(e.sum_sq_post - pss)
        drops.append(2.0 * e.epsilon * (e.gap_pre - e.epsilon))
    V = np.array(V)
    drops = np.array(drops)
    if len(drops) and drops.max() > 0:
        bound = float((V[0] - V[-1]) / drops.max())
    else:
        bound = 0.0
    n = len(drops)
    if n + 1e-9 < bound:
        raise AssertionError(f"swap count {n} below dissipation bound {bound}")
    return DissipationLedger(V=V, drops=drops, L=trace.sum_p_initial, pstar_sum_sq=pss, bound=bound)


def roi_bound_check(trace: Trace) -> tuple[int, float, bool]:
    """Check total insertion depth W against the dissipation/efficiency bound
    W >= sum(delta_V) / max realized (delta_V / depth).

    Returns (W, bound, ok).  An empty trace is trivially ok.
    """
    events = [e for e in trace.events if e.kind == "deep-insertion"]
    if not events:
        return 0, 0.0, True
    W = sum(e.depth for e in events)
    dv = np.array([e.delta_v for e in events])
    depth = np.array([e.depth for e in events], dtype=float)
    eta = dv / depth
    max_eta = float(eta.max())
    if max_eta <= 0:
        return W, 0.0, True
    bound = float(dv.sum() / max_eta)
    return W, bound, bool(W + 1e-9 >= bound)


def schur_scores(p, alphas=()) -> dict[str, float]:
    """Named profile functionals: sum of squares, variance, the weighted
    potential, thermal sums for the requested alphas, and (when the
    normalized profile is strictly positive) Shannon entropy."""
    p = np.asarray(p, dtype=float)
    d = len(p)
    out: dict[str, float] = {}
    out["sum_sq"] = float(np.dot(p, p))
    out["variance"] = float(np.var(p))
    w = np.arange(d, 0, -1, dtype=float)
    out["potential"] = float(np.dot(w, p))
    for a in alphas:
        out[f"phi_{a:g}"] = float(np.sum(np.exp(2.0 * a * p)))
    total = float(np.sum(p))
    if total != 0.0:
        x = p / total
        if np.all(x > 0.0):
            out["entropy"] = float(-np.sum(x * np.log(x)))
    return out
