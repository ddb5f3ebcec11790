"""Standard delta-LLL with full per-swap tracing.

Every accepted swap is recorded with the pair gap data (gap_pre, gap_post,
epsilon) and the profile functionals needed to audit the per-swap laws: the
post-swap profile must be majorized by the pre-swap one, the sum of squares
must drop by exactly 2*eps*(gap - eps), and the position-weighted potential
must decrease strictly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gso import GsoState, NumericalError, compute_gso, refresh, size_reduce, transpose_update
from .intmat import Basis
from .tracing import Trace, TraceEvent, TraceSink, make_event

__all__ = [
    "ReductionParams",
    "cdelta",
    "lovasz_violated",
    "lovasz_swap",
    "lll_reduce",
    "LllResult",
]


@dataclass
class ReductionParams:
    """Reduction controls: threshold delta, safety cap, refresh cadence."""

    delta: float = 0.99
    max_moves: int = 10_000_000
    refresh_every: int = 64

    def __post_init__(self):
        if not (0.25 < self.delta <= 1.0):
            raise ValueError(f"delta must lie in (1/4, 1], got {self.delta}")
        if self.max_moves < 1 or self.refresh_every < 1:
            raise ValueError("max_moves and refresh_every must be positive")


def cdelta(delta: float) -> float:
    """Worst-case terminal adjacent log-gap: 0.5 * ln(1 / (delta - 1/4))."""
    if not (0.25 < delta <= 1.0):
        raise ValueError(f"delta must lie in (1/4, 1], got {delta}")
    return 0.5 * math.log(1.0 / (delta - 0.25))


def lovasz_violated(gso: GsoState, k: int, delta: float) -> bool:
    """True when r_k < (delta - mu_{k,k-1}^2) * r_{k-1} (strict)."""
    m = gso.mu[k, k - 1]
    return bool(gso.r[k] < (delta - m * m) * gso.r[k - 1])


@dataclass
class LllResult:
    basis: Basis
    gso: GsoState
    trace: Trace
    n: int
    terminal: bool


def lovasz_swap(basis: Basis, gso: GsoState, k: int, step: int = 0, score: float = 0.0) -> TraceEvent:
    """Swap rows k-1, k (Lovasz condition must hold) and record the event."""
    mu_abs = abs(float(gso.mu[k, k - 1]))
    a = float(gso.p[k - 1])
    b = float(gso.p[k])
    sum_sq_pre = gso.sum_p_sq()
    basis.move_row(k, k - 1)
    transpose_update(gso, k)
    return make_event(step, "adjacent-swap", k, k - 1, mu_abs, a, b, gso, sum_sq_pre, score)


def lll_reduce(
    basis: Basis,
    params: ReductionParams | None = None,
    trace_sink: TraceSink | None = None,
    keep_events: bool = True,
) -> LllResult:
    """Classical delta-LLL sweep: size-reduce, test Lovasz, swap and drop back.

    Raises NumericalError if the weighted potential ever fails to decrease at
    an accepted swap (a sign the floating state has degraded).
    """
    params = params or ReductionParams()
    delta = params.delta
    gso = compute_gso(basis)
    d = gso.dim
    trace = Trace(
        d=d,
        delta=delta,
        selector="lll",
        sum_p_initial=gso.sum_p(),
        sum_sq_initial=gso.sum_p_sq(),
        potential_initial=gso.potential(),
        log_scale=gso.log_scale,
    )
    potential_prev = trace.potential_initial
    moves = 0
    terminal = True
    k = 1
    while k < d:
        size_reduce(basis, gso, k)
        if lovasz_violated(gso, k, delta):
            if moves >= params.max_moves:
                terminal = False
                break
            p_pre = gso.profile() if trace_sink else None
            event = lovasz_swap(basis, gso, k, step=moves)
            if not event.potential_post < potential_prev:
                raise NumericalError(
                    f"potential did not decrease at swap {moves} (k={k}): "
                    f"{potential_prev} -> {event.potential_post}"
                )
            potential_prev = event.potential_post
            if keep_events:
                trace.events.append(event)
            if trace_sink:
                trace_sink(event, p_pre, gso.profile())
            moves += 1
            if moves % params.refresh_every == 0:
                gso = refresh(basis, gso)
                potential_prev = gso.potential()
            k = max(k - 1, 1)
        else:
            k += 1
    gso = refresh(basis, gso)
    trace.terminal = terminal
    if not keep_events:
        trace.n_total = moves
        trace.w_total = moves
        trace.events = []
    return LllResult(basis=basis, gso=gso, trace=trace, n=moves, terminal=terminal)
