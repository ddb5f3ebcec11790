"""Greedy deep-insertion reduction: projection cascade, admissibility,
post-insertion norms, and every scored selector.

Each iteration size-reduces the basis, enumerates admissible (k, j) pairs,
scores them under the selector's objective, and applies the best strictly
positive candidate.  Scores are evaluated on the full candidate matrix with
numpy; `score` is the readable per-pair reference the batch path is tested
against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .gso import GsoState, NumericalError, compute_gso, refresh, size_reduce, transpose_update
from .intmat import Basis
from .lll import ReductionParams, cdelta
from .major import gsa_profile
from .tracing import Trace, TraceEvent, TraceSink, make_event

__all__ = [
    "SelectorSpec",
    "Candidate",
    "CascadeState",
    "parse_selector",
    "cascade",
    "admissible",
    "post_insertion_profile",
    "score",
    "score_window_direct",
    "adaptive_alpha",
    "greedy_reduce",
    "GreedyResult",
    "KINDS",
]

KINDS = (
    "lll",
    "deepvar",
    "thermal",
    "thermal-adaptive",
    "thermal-sched",
    "ssgg",
    "gdlll",
    "gdlll-rt",
    "gdlll-ca",
    "schurk",
    "falphabeta",
    "pot",
)

_GDLLL_FAMILY = ("gdlll", "gdlll-rt", "gdlll-ca")
_THERMAL_LIKE = ("thermal", "thermal-adaptive", "thermal-sched")


@dataclass
class SelectorSpec:
    """Which selector to run, with all of its constants."""

    kind: str
    alpha: float = 1.0           # thermal / falphabeta exponent on r
    beta: float = 0.0            # falphabeta position-weight exponent
    gamma: float = 2.0           # adaptive schedule steepness
    alpha_min: float = 0.4       # adaptive schedule floor
    shortlist_k: int | None = None  # gdlll family; None -> ceil(d/3)
    tau: float = 0.01            # gdlll family descent threshold factor
    schur_k: int | None = None   # schurk top-K; None -> ceil(d/2)
    period_p: int = 40           # thermal-sched re-estimation period
    ca_overhead: float = 8.0     # gdlll-ca fixed per-insertion cost
    cv_from_raw: bool = True     # measure CV on the raw input profile

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown selector kind {self.kind!r}")
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if self.beta < 0:
            raise ValueError("beta must be nonnegative")
        if self.tau < 0:
            raise ValueError("tau must be nonnegative")
        for name in ("shortlist_k", "schur_k"):
            v = getattr(self, name)
            if v is not None and v < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.period_p < 1:
            raise ValueError("period_p must be >= 1")


_KEY_ALIASES = {
    "alpha": "alpha",
    "beta": "beta",
    "gamma": "gamma",
    "alpha_min": "alpha_min",
    "tau": "tau",
    "p": "period_p",
    "overhead": "ca_overhead",
}


def parse_selector(text: str) -> SelectorSpec:
    """Parse a CLI selector string, e.g. `thermal:alpha=1.5`,
    `gdlll:K=auto,tau=0.01`, `thermal-adaptive:gamma=2,alpha_min=0.4`."""
    kind, _, rest = text.strip().partition(":")
    kind = kind.strip().lower().replace("_", "-")
    if kind not in KINDS:
        raise ValueError(f"unknown selector kind {kind!r}")
    kwargs: dict = {}
    if rest:
        for item in rest.split(","):
            key, _, value = item.partition("=")
            key = key.strip()
            value = value.strip()
            if not key or not value:
                raise ValueError(f"malformed selector option {item!r}")
            if key == "K":
                target = "schur_k" if kind == "schurk" else "shortlist_k"
                kwargs[target] = None if value.lower() == "auto" else int(value)
            elif key.lower() in _KEY_ALIASES:
                field_name = _KEY_ALIASES[key.lower()]
                kwargs[field_name] = int(value) if field_name == "period_p" else float(value)
            else:
                raise ValueError(f"unknown selector option {key!r} for kind {kind!r}")
    return SelectorSpec(kind=kind, **kwargs)


@dataclass
class CascadeState:
    """Squared projection norms of row k at levels 0..k (P[k] = r_k)."""

    k: int
    P: np.ndarray


@dataclass
class Candidate:
    """One admissible insertion with its selector score and dissipation data."""

    k: int
    j: int
    delta_score: float
    delta_V: float

    @property
    def depth(self) -> int:
        return self.k - self.j

    @property
    def eta(self) -> float:
        return self.delta_V / self.depth


def cascade(gso: GsoState, k: int) -> CascadeState:
    """P_l = P_{l+1} + mu_{k,l}^2 r_l computed down from P_k = r_k."""
    r = gso.r
    muk = gso.mu[k, :k]
    u = muk * muk * r[:k]
    P = np.empty(k + 1)
    P[k] = r[k]
    if k:
        P[:k] = r[k] + np.cumsum(u[::-1])[::-1]
    return CascadeState(k=k, P=P)


def admissible(gso: GsoState, k: int, j: int, delta: float) -> bool:
    """Generalized Lovasz test: P_j < delta * r_j (strict)."""
    if not (0 <= j < k):
        raise ValueError("admissible requires j < k")
    P = cascade(gso, k).P
    return bool(P[j] < delta * gso.r[j])


def post_insertion_profile(gso: GsoState, k: int, j: int) -> np.ndarray:
    """New squared GS norms of the window j..k after inserting row k at j.

    r'_j = P_j and r'_i = r_{i-1} P_i / P_{i-1} for i = j+1..k; entries
    outside the window are unchanged and the window product is preserved.
    """
    if not (0 <= j < k):
        raise ValueError("post_insertion_profile requires j < k")
    P = cascade(gso, k).P
    r = gso.r
    out = np.empty(k - j + 1)
    out[0] = P[j]
    idx = np.arange(j + 1, k + 1)
    out[1:] = r[idx - 1] * (P[idx] / P[idx - 1])
    return out


def _window_profiles(gso: GsoState, k: int, j: int) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """(r_old, r_new, p_old, p_new) over window positions j..k."""
    r_old = gso.r[j : k + 1].copy()
    r_new = post_insertion_profile(gso, k, j)
    p_old = gso.p[j : k + 1].copy()
    p_new = 0.5 * (np.log(r_new) + gso.log_scale)
    return r_old, r_new, p_old, p_new


def score_window_direct(gso: GsoState, k: int, j: int, func) -> float:
    """Direct window recompute of a separable score drop sum f(old) - f(new).

    `func` maps (scaled r window) -> per-entry values.  This is the
    independent reference path used to validate incremental score formulas.
    """
    r_old, r_new, _, _ = _window_profiles(gso, k, j)
    return float(np.sum(func(r_old)) - np.sum(func(r_new)))


def adaptive_alpha(initial_profile, gamma: float = 2.0, alpha_min: float = 0.4) -> float:
    """Map initial-profile flatness to a thermal exponent.

    CV_0 = sigma_0 / |mu_0| over ln r_{0,i} = 2 p_i; the schedule is
    alpha_0 = max(alpha_min, (2 / (1 + CV_0))**gamma), so CV_0 = 1 gives
    alpha_0 = 1 and flatter profiles run hotter.
    """
    p = np.asarray(initial_profile, dtype=float)
    ln_r = 2.0 * p
    mu0 = float(np.mean(ln_r))
    if mu0 == 0.0:
        return alpha_min
    cv = float(np.std(ln_r)) / abs(mu0)
    return max(alpha_min, (2.0 / (1.0 + cv)) ** gamma)


def score(
    spec: SelectorSpec,
    gso: GsoState,
    k: int,
    j: int,
    alpha: float | None = None,
    delta: float | None = None,
) -> Candidate:
    """Score one admissible pair under the selector's own objective.

    Passing delta validates admissibility (non-admissible pairs are an
    error).  This is the per-pair reference implementation; the batch scan
    used by `greedy_reduce` must agree with it.
    """
    if delta is not None and not admissible(gso, k, j, delta):
        raise ValueError(f"pair (k={k}, j={j}) is not admissible at delta={delta}")
    P = cascade(gso, k).P
    r_old, r_new, p_old, p_new = _window_profiles(gso, k, j)
    delta_v = float(np.dot(p_old, p_old) - np.dot(p_new, p_new))
    a = spec.alpha if alpha is None else alpha
    kind = spec.kind
    d = gso.dim
    if kind == "deepvar":
        ds = delta_v
    elif kind in _THERMAL_LIKE:
        ds = float(np.sum(r_old**a) - np.sum(r_new**a))
    elif kind == "ssgg":
        # incremental identity: sum over l = j..k-1 of mu^2 r_l (r_l/P_l - 1)
        muk = gso.mu[k, j:k]
        rl = gso.r[j:k]
        Pl = P[j:k]
        ds = float(np.sum(muk * muk * rl * (rl / Pl - 1.0)))
    elif kind in _GDLLL_FAMILY:
        depth = k - j
        cost = spec.ca_overhead + depth if kind == "gdlll-ca" else depth
        ds = delta_v / cost
    elif kind == "schurk":
        K = spec.schur_k or math.ceil(d / 2)
        p_full = gso.p.copy()
        before = float(np.sum(np.sort(p_full)[::-1][:K]))
        p_full[j : k + 1] = p_new
        after = float(np.sum(np.sort(p_full)[::-1][:K]))
        ds = before - after
    elif kind == "falphabeta":
        w = (d - np.arange(j, k + 1, dtype=float)) ** spec.beta
        ds = float(np.dot(w, r_old**a) - np.dot(w, r_new**a))
    elif kind == "pot":
        w = d - np.arange(j, k + 1, dtype=float)
        ds = float(np.dot(w, p_old) - np.dot(w, p_new))
    else:
        raise ValueError(f"selector kind {kind!r} has no pair score")
    return Candidate(k=k, j=j, delta_score=ds, delta_V=delta_v)


_STRICT_LOWER_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _masks(d: int) -> tuple[np.ndarray, np.ndarray]:
    got = _STRICT_LOWER_CACHE.get(d)
    if got is None:
        rows = np.arange(d)[:, None]
        cols = np.arange(d)[None, :]
        strict = cols < rows                      # (d, d): j < k
        interior = np.arange(d - 1)[None, :] < rows  # (d, d-1): col c=i-1 < k
        got = (strict, interior)
        _STRICT_LOWER_CACHE[d] = got
    return got


def _suffix_sum(a: np.ndarray) -> np.ndarray:
    return np.cumsum(a[:, ::-1], axis=1)[:, ::-1]


def _scan_matrices(gso: GsoState) -> dict:
    """Candidate matrices shared by every selector: cascade values P[k, j],
    admission-ready geometry, and the variance drop dV[k, j]."""
    mu, r, p = gso.mu, gso.r, gso.p
    d = gso.dim
    strict, interior = _masks(d)
    u = mu * mu * r[None, :]
    u = np.where(strict, u, 0.0)
    P = _suffix_sum(u) + r[:, None]      # P[k, l]; equals r_k at/right of diag
    ratio = P[:, 1:] / P[:, :-1]         # positive everywhere
    rin = r[None, :-1] * ratio           # rin[k, i-1]: new value at position i
    pin = 0.5 * (np.log(rin) + gso.log_scale)
    p_head = 0.5 * (np.log(P) + gso.log_scale)  # new value at position j
    ds = np.where(interior, p[None, 1:] ** 2 - pin**2, 0.0)
    dv = p[None, :] ** 2 - p_head**2
    dv[:, : d - 1] += _suffix_sum(ds)
    return {
        "strict": strict,
        "interior": interior,
        "u": u,
        "P": P,
        "rin": rin,
        "pin": pin,
        "p_head": p_head,
        "dV": dv,
    }


def _score_matrix(gso: GsoState, kind: str, alpha: float, beta: float, schur_k: int | None, ca_overhead: float, mats: dict) -> np.ndarray:
    mu, r, p = gso.mu, gso.r, gso.p
    d = gso.dim
    strict, interior = mats["strict"], mats["interior"]
    P, rin, pin, p_head, dv = mats["P"], mats["rin"], mats["pin"], mats["p_head"], mats["dV"]
    if kind == "deepvar":
        return dv.copy()
    if kind in _THERMAL_LIKE:
        dec = np.where(interior, r[None, 1:] ** alpha - rin**alpha, 0.0)
        s = r[None, :] ** alpha - P**alpha
        s[:, : d - 1] += _suffix_sum(dec)
        return s
    if kind == "ssgg":
        terms = np.where(strict, mats["u"] * (r[None, :] / P - 1.0), 0.0)
        return _suffix_sum(terms)
    if kind in _GDLLL_FAMILY:
        depth = np.arange(d)[:, None] - np.arange(d)[None, :]
        depth = np.where(strict, depth, 1).astype(float)
        if kind == "gdlll-ca":
            return dv / (ca_overhead + depth)
        return dv / depth
    if kind == "falphabeta":
        w = (d - np.arange(d, dtype=float)) ** beta
        dec = np.where(interior, w[None, 1:] * (r[None, 1:] ** alpha - rin**alpha), 0.0)
        s = w[None, :] * (r[None, :] ** alpha - P**alpha)
        s[:, : d - 1] += _suffix_sum(dec)
        return s
    if kind == "pot":
        w = d - np.arange(d, dtype=float)
        dec = np.where(interior, w[None, 1:] * (p[None, 1:] - pin), 0.0)
        s = w[None, :] * (p[None, :] - p_head)
        s[:, : d - 1] += _suffix_sum(dec)
        return s
    if kind == "schurk":
        return _schurk_scores(gso, schur_k or math.ceil(d / 2), mats)
    raise ValueError(f"selector kind {kind!r} has no score matrix")


def _schurk_scores(gso: GsoState, K: int, mats: dict) -> np.ndarray:
    """Per-candidate drop in the top-K partial sum of the sorted profile."""
    p = gso.p
    d = gso.dim
    pin, p_head = mats["pin"], mats["p_head"]
    before = float(np.sum(np.sort(p)[::-1][:K]))
    out = np.full((d, d), -np.inf)
    for k in range(1, d):
        cand = np.tile(p, (k, 1))
        cols = np.arange(1, k + 1)
        cand[:, cols] = np.where(
            cols[None, :] > np.arange(k)[:, None], pin[k, cols - 1][None, :], cand[:, cols]
        )
        cand[np.arange(k), np.arange(k)] = p_head[k, :k]
        tops = np.sort(cand, axis=1)[:, ::-1][:, :K].sum(axis=1)
        out[k, :k] = before - tops
    return out


def accept_threshold(gso: GsoState, kind: str, alpha: float, beta: float, schur_k: int | None) -> float:
    """Positivity cutoff for one scan step: 1e-12 of the score functional's
    current magnitude.  Scores below it are float noise on an exact zero
    (stalled or degenerate moves), not descent."""
    d = gso.dim
    if kind in _THERMAL_LIKE or kind == "ssgg":
        a = 1.0 if kind == "ssgg" else alpha
        base = float(np.sum(gso.r**a))
    elif kind == "falphabeta":
        w = (d - np.arange(d, dtype=float)) ** beta
        base = float(np.dot(w, gso.r**alpha))
    elif kind == "pot":
        base = abs(gso.potential())
    elif kind == "schurk":
        K = schur_k or math.ceil(d / 2)
        base = abs(float(np.sum(np.sort(gso.p)[::-1][:K])))
    else:
        base = gso.sum_p_sq()
    if not math.isfinite(base):
        raise NumericalError(f"score functional for {kind!r} overflows double precision")
    return 1e-12 * (1.0 + base)


def _best_candidate(scores: np.ndarray, valid: np.ndarray, dv: np.ndarray, threshold: float = 0.0) -> Candidate | None:
    """Deterministic argmax: highest score, ties to smaller k then larger j."""
    s = np.where(valid, scores, -np.inf)
    if not np.isfinite(s).any():
        return None
    d = s.shape[0]
    rev = s[:, ::-1]
    jbest = d - 1 - np.argmax(rev, axis=1)
    rowmax = s[np.arange(d), jbest]
    k = int(np.argmax(rowmax))
    best = float(rowmax[k])
    if best <= threshold or not np.isfinite(best):
        return None
    j = int(jbest[k])
    return Candidate(k=k, j=j, delta_score=best, delta_V=float(dv[k, j]))


@dataclass
class GreedyResult:
    basis: Basis
    gso: GsoState
    trace: Trace
    n: int
    w: int
    terminal: bool
    scans: int
    selector_state: dict


def _size_reduce_all(basis: Basis, gso: GsoState) -> None:
    mu_abs = np.abs(np.tril(gso.mu, -1))
    rows = np.nonzero((mu_abs > 0.5 + 1e-9).any(axis=1))[0]
    for k in rows:
        size_reduce(basis, gso, int(k))


def greedy_reduce(
    basis: Basis,
    params: ReductionParams | None = None,
    spec: SelectorSpec | None = None,
    trace_sink: TraceSink | None = None,
    keep_events: bool = True,
) -> GreedyResult:
    """Greedy deep-insertion loop for every scored selector.

    Per iteration: size-reduce, enumerate admissible pairs (full scan, or the
    shortlist for the gdlll family with a full-scan fallback so the filters
    never cause early termination), apply the best strictly positive
    candidate, update the GSO through the insertion window, and trace.
    """
    params = params or ReductionParams()
    if spec is None or spec.kind == "lll":
        raise ValueError("greedy_reduce requires a deep-insertion selector kind")
    delta = params.delta
    gso = compute_gso(basis)
    d = gso.dim
    selector_state: dict = {}

    alpha = spec.alpha
    if spec.kind in ("thermal-adaptive", "thermal-sched"):
        if spec.cv_from_raw:
            alpha = adaptive_alpha(gso.p, spec.gamma, spec.alpha_min)
        else:
            _size_reduce_all(basis, gso)
            alpha = adaptive_alpha(gso.p, spec.gamma, spec.alpha_min)
        selector_state["alpha0"] = alpha

    trace = Trace(
        d=d,
        delta=delta,
        selector=spec.kind,
        sum_p_initial=gso.sum_p(),
        sum_sq_initial=gso.sum_p_sq(),
        potential_initial=gso.potential(),
        log_scale=gso.log_scale,
    )
    potential_prev = trace.potential_initial
    c_delta = cdelta(delta)
    use_shortlist = spec.kind in _GDLLL_FAMILY
    moves = 0
    w_total = 0
    scans = 0
    phi_increases = 0
    terminal = True

    while True:
        _size_reduce_all(basis, gso)
        mats = _scan_matrices(gso)
        adm = mats["strict"] & (mats["P"] < delta * gso.r[None, :])
        if not adm.any():
            break
        scores = _score_matrix(gso, spec.kind, alpha, spec.beta, spec.schur_k, spec.ca_overhead, mats)
        if not np.isfinite(np.where(adm, scores, 0.0)).all():
            raise NumericalError(
                f"selector {spec.kind!r} produced non-finite scores; the profile "
                "dynamic range exceeds double precision for this objective"
            )
        valid = adm
        if spec.kind == "gdlll-rt":
            pstar = gsa_profile(d, gso.sum_p(), delta)
            valid = valid & ((gso.p - pstar) > 0.0)[:, None]
        scans += int(valid.sum())
        threshold = accept_threshold(gso, spec.kind, alpha, spec.beta, spec.schur_k)
        best = None
        if use_shortlist:
            K = spec.shortlist_k or math.ceil(d / 3)
            deficits = (gso.p[:-1] - gso.p[1:]) - c_delta
            top = 1 + np.argsort(-deficits, kind="stable")[:K]
            src_mask = np.zeros(d, dtype=bool)
            src_mask[top] = True
            filtered = valid & src_mask[:, None] & (mats["dV"] > spec.tau * gso.sum_p_sq())
            best = _best_candidate(scores, filtered, mats["dV"], threshold)
        if best is None:
            best = _best_candidate(scores, valid, mats["dV"], threshold)
        if best is None:
            break
        if moves >= params.max_moves:
            terminal = False
            break

        k, j = best.k, best.j
        mu_abs = abs(float(gso.mu[k, k - 1])) if k - j == 1 else None
        a_pre = float(gso.p[j])
        b_pre = float(gso.p[k])
        sum_sq_pre = gso.sum_p_sq()
        p_pre = gso.profile() if trace_sink else None
        basis.move_row(k, j)
        for t in range(k, j, -1):
            transpose_update(gso, t)
        event = make_event(
            step=moves,
            kind="deep-insertion",
            k=k,
            j=j,
            mu_abs=mu_abs,
            a=a_pre,
            b=b_pre,
            gso=gso,
            sum_sq_pre=sum_sq_pre,
            score=best.delta_score,
        )
        # Admissibility only constrains the cascade at level j, so a
        # score-positive insertion can raise the weighted potential; count it
        # (termination rests on strict score descent, not on the potential).
        if not event.potential_post < potential_prev:
            phi_increases += 1
        potential_prev = event.potential_post
        if keep_events:
            trace.events.append(event)
        if trace_sink:
            trace_sink(event, p_pre, gso.profile())
        moves += 1
        w_total += k - j
        if spec.kind == "thermal-sched" and moves % spec.period_p == 0:
            alpha = adaptive_alpha(gso.p, spec.gamma, spec.alpha_min)
        if moves % params.refresh_every == 0:
            gso = refresh(basis, gso)
            potential_prev = gso.potential()

    gso = refresh(basis, gso)
    trace.terminal = terminal
    selector_state["phi_increases"] = phi_increases
    if spec.kind in ("thermal-adaptive", "thermal-sched"):
        selector_state["alpha_final"] = alpha
    if not keep_events:
        trace.n_total = moves
        trace.w_total = w_total
        trace.events = []
    return GreedyResult(
        basis=basis,
        gso=gso,
        trace=trace,
        n=moves,
        w=w_total,
        terminal=terminal,
        scans=scans,
        selector_state=selector_state,
    )
