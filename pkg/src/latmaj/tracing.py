"""Trace records for accepted moves, run reports, and JSONL (de)serialization.

One accepted swap/insertion produces one TraceEvent.  A serialized trace is
one JSON object per line: a `meta` record, the events, and a `final` record.
Positions are 0-based row indices throughout; an adjacent swap at position k
exchanges rows k-1 and k.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import IO, Callable

import numpy as np

from .intmat import Basis

__all__ = ["TraceEvent", "Trace", "ReductionReport", "make_event", "write_trace", "read_trace"]

TraceSink = Callable[["TraceEvent", np.ndarray, np.ndarray], None]

_EVENT_KEYS = (
    "step",
    "kind",
    "k",
    "j",
    "mu_abs",
    "gap_pre",
    "gap_post",
    "epsilon",
    "degenerate",
    "sum_sq_pre",
    "sum_sq_post",
    "potential_post",
    "score",
)


@dataclass
class TraceEvent:
    """One accepted move.

    For adjacent pairs (depth 1) the gap data follows the per-swap identity:
    gap_pre/gap_post are the absolute log-gaps of the affected pair and
    epsilon = (gap_pre - gap_post) / 2.  Deeper insertions carry None there.
    """

    step: int
    kind: str  # "adjacent-swap" | "deep-insertion"
    k: int
    j: int
    mu_abs: float | None
    gap_pre: float | None
    gap_post: float | None
    epsilon: float | None
    degenerate: bool
    sum_sq_pre: float
    sum_sq_post: float
    potential_post: float
    score: float

    @property
    def depth(self) -> int:
        return self.k - self.j

    @property
    def delta_v(self) -> float:
        """Realized drop in sum of squared log norms."""
        return self.sum_sq_pre - self.sum_sq_post


@dataclass
class Trace:
    """All events of one run plus the run-level context needed to verify them."""

    d: int
    delta: float
    selector: str
    sum_p_initial: float
    sum_sq_initial: float
    potential_initial: float
    log_scale: float = 0.0
    events: list[TraceEvent] = field(default_factory=list)
    terminal: bool = True
    n_total: int | None = None  # set when events were discarded to save memory
    w_total: int | None = None

    @property
    def n(self) -> int:
        return self.n_total if self.n_total is not None else len(self.events)

    @property
    def w(self) -> int:
        return self.w_total if self.w_total is not None else sum(e.depth for e in self.events)

    def all_adjacent(self) -> bool:
        return all(e.kind == "adjacent-swap" for e in self.events)


@dataclass
class ReductionReport:
    """Terminal metrics of one reduction run.

    n counts accepted moves; w sums insertion depths (w == n for plain LLL).
    delta0 is the root-Hermite factor of the terminal basis.
    """

    n: int
    w: int
    delta0: float
    final_sum_sq: float
    wall_ns: int
    terminal: bool
    trace: Trace | None = None
    basis: Basis | None = None
    final_profile: np.ndarray | None = None
    scans: int = 0
    selector_state: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)


def make_event(
    step: int,
    kind: str,
    k: int,
    j: int,
    mu_abs: float | None,
    a: float,
    b: float,
    gso,
    sum_sq_pre: float,
    score: float,
) -> TraceEvent:
    """Build the record for a just-applied move.

    a, b are the pre-move log norms at positions j and k.  For adjacent pairs
    (depth 1) the gap data follows the per-swap identity; deeper insertions
    carry None there.  gso is the post-move state (duck-typed: needs p,
    sum_p_sq, potential).
    """
    if k - j == 1:
        gap_pre = abs(a - b)
        gap_post = abs(float(gso.p[j]) - float(gso.p[j + 1]))
        degenerate = mu_abs == 0.0
        eps = 0.0 if degenerate else 0.5 * (gap_pre - gap_post)
    else:
        gap_pre = gap_post = eps = None
        degenerate = False
    return TraceEvent(
        step=step,
        kind=kind,
        k=k,
        j=j,
        mu_abs=mu_abs,
        gap_pre=gap_pre,
        gap_post=gap_post,
        epsilon=eps,
        degenerate=degenerate,
        sum_sq_pre=sum_sq_pre,
        sum_sq_post=gso.sum_p_sq(),
        potential_post=gso.potential(),
        score=score,
    )


def write_trace(trace: Trace, fp: IO[str]) -> None:
    meta = {
        "record": "meta",
        "d": trace.d,
        "delta": trace.delta,
        "selector": trace.selector,
        "sum_p_initial": trace.sum_p_initial,
        "sum_sq_initial": trace.sum_sq_initial,
        "potential_initial": trace.potential_initial,
        "log_scale": trace.log_scale,
    }
    fp.write(json.dumps(meta) + "\n")
    for e in trace.events:
        rec = {key: getattr(e, key) for key in _EVENT_KEYS}
        fp.write(json.dumps(rec) + "\n")
    fp.write(json.dumps({"record": "final", "n": trace.n, "w": trace.w, "terminal": trace.terminal}) + "\n")


def read_trace(fp: IO[str]) -> Trace:
    meta = None
    events: list[TraceEvent] = []
    terminal = True
    for line in fp:
        line = line.strip()
        if not line:
            continue
        rec = json.loads(line)
        kind = rec.get("record")
        if kind == "meta":
            meta = rec
        elif kind == "final":
            terminal = bool(rec.get("terminal", True))
        else:
            events.append(TraceEvent(**{key: rec[key] for key in _EVENT_KEYS}))
    if meta is None:
        raise ValueError("trace stream has no meta record")
    return Trace(
        d=int(meta["d"]),
        delta=float(meta["delta"]),
        selector=str(meta["selector"]),
        sum_p_initial=float(meta["sum_p_initial"]),
        sum_sq_initial=float(meta["sum_sq_initial"]),
        potential_initial=float(meta["potential_initial"]),
        log_scale=float(meta.get("log_scale", 0.0)),
        events=events,
        terminal=terminal,
    )
