"""Benchmark runner: (family x dimension x selector x trials) grids, terminal
metrics, the profile-universality analysis, and CSV/JSONL emission.

Trials are paired across selectors: the lattice for (family, d, trial) is a
pure function of (base_seed, family, d, trial), so every selector in a grid
reduces the same instances.  Reports are deterministic for a fixed config and
seed; only the wall-clock columns vary between runs.
"""

from __future__ import annotations

import concurrent.futures
import hashlib
import io
import json
import math
import os
import time
from dataclasses import dataclass, field

import numpy as np

from . import deep
from .gso import GsoState, compute_gso
from .intmat import Basis
from .latgen import GeneratorSpec, generate
from .lll import ReductionParams, lll_reduce, lovasz_violated
from .tracing import ReductionReport, Trace, write_trace

__all__ = [
    "GridConfig",
    "BenchRow",
    "root_hermite",
    "run_reduction",
    "run_trial",
    "run_grid",
    "rows_to_csv",
    "universality",
    "verify_terminal",
    "CSV_COLUMNS",
    "METRICS",
]

METRICS = ("N", "W", "delta0", "final_sum_sq", "wall_ns")

CSV_COLUMNS = (
    "family",
    "d",
    "selector",
    "n_trials",
    "seed_base",
    "config_hash",
    "mean_N",
    "stderr_N",
    "mean_W",
    "stderr_W",
    "mean_delta0",
    "stderr_delta0",
    "mean_final_sum_sq",
    "stderr_final_sum_sq",
    "mean_wall_ns",
    "stderr_wall_ns",
    "failures",
)


def root_hermite(basis: Basis, gso: GsoState) -> float:
    """delta0 = exp((ln||b_1|| - L/d) / d), ||b_1|| exact, L = sum of log norms."""
    b1 = basis.rows[0]
    norm_sq = sum(x * x for x in b1)
    ln_b1 = 0.5 * math.log(norm_sq)
    d = basis.dim
    L = gso.sum_p()
    return math.exp((ln_b1 - L / d) / d)


def verify_terminal(
    basis: Basis,
    gso: GsoState,
    selector: deep.SelectorSpec | None,
    delta: float,
    alpha: float | None = None,
) -> dict:
    """Terminal-state contract: size-reduced, no adjacent Lovasz violation,
    and no positive-descent candidate under the run's own selector.

    For the adaptive kinds, pass the alpha the run actually used; otherwise
    it is re-derived from the terminal profile, which is hotter than the
    run's own value.
    """
    d = gso.dim
    mu_abs = np.abs(np.tril(gso.mu, -1))
    out = {
        "size_reduced": bool(mu_abs.max(initial=0.0) <= 0.5 + 1e-9),
        "no_lovasz_violation": not any(lovasz_violated(gso, k, delta) for k in range(1, d)),
    }
    if selector is None or selector.kind == "lll":
        out["no_positive_candidate"] = out["no_lovasz_violation"]
        return out
    mats = deep._scan_matrices(gso)
    adm = mats["strict"] & (mats["P"] < delta * gso.r[None, :])
    if not adm.any():
        out["no_positive_candidate"] = True
        return out
    if alpha is None:
        alpha = selector.alpha
        if selector.kind in ("thermal-adaptive", "thermal-sched"):
            alpha = deep.adaptive_alpha(gso.p, selector.gamma, selector.alpha_min)
    scores = deep._score_matrix(
        gso, selector.kind, alpha, selector.beta, selector.schur_k, selector.ca_overhead, mats
    )
    valid = adm
    if selector.kind == "gdlll-rt":
        from .major import gsa_profile

        pstar = gsa_profile(d, gso.sum_p(), delta)
        valid = valid & ((gso.p - pstar) > 0.0)[:, None]
    threshold = deep.accept_threshold(gso, selector.kind, alpha, selector.beta, selector.schur_k)
    best = deep._best_candidate(scores, valid, mats["dV"], threshold)
    out["no_positive_candidate"] = best is None
    return out


def run_reduction(
    basis: Basis,
    selector: deep.SelectorSpec,
    params: ReductionParams | None = None,
    keep_trace: bool = False,
    keep_basis: bool = False,
    check_terminal: bool = True,
) -> ReductionReport:
    """Reduce one basis under one selector and collect terminal metrics."""
    params = params or ReductionParams()
    t0 = time.perf_counter_ns()
    if selector.kind == "lll":
        res = lll_reduce(basis, params, keep_events=keep_trace)
        n, w = res.n, res.n
        gso, trace = res.gso, res.trace
        terminal = res.terminal
        scans = 0
        state: dict = {}
    else:
        res = deep.greedy_reduce(basis, params, selector, keep_events=keep_trace)
        n, w = res.n, res.w
        gso, trace = res.gso, res.trace
        terminal = res.terminal
        scans = res.scans
        state = res.selector_state
    wall = time.perf_counter_ns() - t0
    trace.n_total = n
    trace.w_total = w
    report = ReductionReport(
        n=n,
        w=w,
        delta0=root_hermite(basis, gso),
        final_sum_sq=gso.sum_p_sq(),
        wall_ns=wall,
        terminal=terminal,
        trace=trace if keep_trace else None,
        basis=basis if keep_basis else None,
        final_profile=gso.profile(),
        scans=scans,
        selector_state=state,
    )
    if check_terminal and terminal:
        alpha_used = state.get("alpha_final", state.get("alpha0"))
        report.checks = verify_terminal(basis, gso, selector, params.delta, alpha=alpha_used)
    return report


@dataclass
class GridConfig:
    families: list[str]
    dims: list[int]
    selectors: list[str]
    n: int = 30
    delta: float = 0.99
    seed: int = 42
    q: int = 1009
    traces_dir: str | None = None
    jobs: int = 1
    max_moves: int = 10_000_000
    refresh_every: int = 64

    def hash(self) -> str:
        payload = json.dumps(
            {
                "families": self.families,
                "dims": self.dims,
                "selectors": self.selectors,
                "n": self.n,
                "delta": self.delta,
                "seed": self.seed,
                "q": self.q,
            },
            sort_keys=True,
        )
        return hashlib.sha256(payload.encode()).hexdigest()[:12]


@dataclass
class BenchRow:
    """One grid cell with per-metric mean and standard error."""

    family: str
    d: int
    selector: str
    n_trials: int
    seed_base: int
    config_hash: str
    means: dict = field(default_factory=dict)
    stderrs: dict = field(default_factory=dict)
    failures: int = 0
    reports: list = field(default_factory=list)


def trial_seed(base_seed: int, family: str, d: int, trial: int) -> int:
    """Deterministic per-instance seed, identical across selectors."""
    h = hashlib.sha256(f"{base_seed}:{family}:{d}:{trial}".encode()).digest()
    return int.from_bytes(h[:8], "big")


def make_basis(family: str, d: int, seed: int, q: int = 1009) -> Basis:
    spec = GeneratorSpec(family=family, d=d, seed=seed, q=q if family == "qary" else None)
    return generate(spec)


def run_trial(args) -> tuple[int, ReductionReport | None]:
    from .gso import NumericalError

    family, d, selector_text, trial, base_seed, q, delta, max_moves, refresh_every, keep_trace = args
    basis = make_basis(family, d, trial_seed(base_seed, family, d, trial), q)
    selector = deep.parse_selector(selector_text)
    params = ReductionParams(delta=delta, max_moves=max_moves, refresh_every=refresh_every)
    try:
        report = run_reduction(basis, selector, params, keep_trace=keep_trace)
    except NumericalError:
        return trial, None
    return trial, report


def _aggregate(cell_reports: list[ReductionReport]) -> tuple[dict, dict]:
    values = {
        "N": [r.n for r in cell_reports],
        "W": [r.w for r in cell_reports],
        "delta0": [r.delta0 for r in cell_reports],
        "final_sum_sq": [r.final_sum_sq for r in cell_reports],
        "wall_ns": [r.wall_ns for r in cell_reports],
    }
    means = {}
    stderrs = {}
    for key, vals in values.items():
        arr = np.asarray(vals, dtype=float)
        means[key] = float(arr.mean())
        stderrs[key] = float(arr.std(ddof=1) / math.sqrt(len(arr))) if len(arr) > 1 else None
    return means, stderrs


def run_grid(config: GridConfig, progress=None) -> list[BenchRow]:
    """Run every (family, d, selector) cell; returns one BenchRow per cell."""
    params_tuple = (config.delta, config.max_moves, config.refresh_every)
    keep_trace = config.traces_dir is not None
    if keep_trace:
        os.makedirs(config.traces_dir, exist_ok=True)
    rows: list[BenchRow] = []
    chash = config.hash()
    for family in config.families:
        for d in config.dims:
            for selector_text in config.selectors:
                tasks = [
                    (family, d, selector_text, t, config.seed, config.q, *params_tuple, keep_trace)
                    for t in range(config.n)
                ]
                results: list[tuple[int, ReductionReport]] = []
                failures = 0
                if config.jobs > 1:
                    with concurrent.futures.ProcessPoolExecutor(max_workers=config.jobs) as ex:
                        for got in ex.map(run_trial, tasks):
                            results.append(got)
                else:
                    for task in tasks:
                        results.append(run_trial(task))
                results.sort(key=lambda tr: tr[0])
                reports = [r for _, r in results if r is not None]
                ok = [r for r in reports if r.terminal]
                failures = config.n - len(ok)
                if keep_trace:
                    for t, rep in results:
                        if rep is None or rep.trace is None:
                            continue
                        name = f"{family}_d{d}_{selector_text.replace(':', '_').replace(',', '_')}_t{t}.jsonl"
                        with open(os.path.join(config.traces_dir, name), "w") as fp:
                            write_trace(rep.trace, fp)
                        rep.trace = None
                means, stderrs = _aggregate(ok) if ok else ({}, {})
                rows.append(
                    BenchRow(
                        family=family,
                        d=d,
                        selector=selector_text,
                        n_trials=len(ok),
                        seed_base=config.seed,
                        config_hash=chash,
                        means=means,
                        stderrs=stderrs,
                        failures=failures,
                        reports=reports,
                    )
                )
                if progress:
                    progress(rows[-1])
    return rows


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def rows_to_csv(rows: list[BenchRow]) -> str:
    out = io.StringIO()
    out.write(",".join(CSV_COLUMNS) + "\n")
    for row in rows:
        rec = [
            row.family,
            str(row.d),
            row.selector,
            str(row.n_trials),
            str(row.seed_base),
            row.config_hash,
        ]
        for metric in METRICS:
            rec.append(_fmt(row.means.get(metric)))
            rec.append(_fmt(row.stderrs.get(metric)))
        rec.append(str(row.failures))
        out.write(",".join(rec) + "\n")
    return out.getvalue()


def universality(
    dims: list[int],
    n_per_dim,
    seed: int = 42,
    delta: float = 0.99,
    grid_points: int = 100,
) -> tuple[dict[int, np.ndarray], np.ndarray]:
    """Mean normalized post-LLL profiles on a common grid and their pairwise
    Pearson correlations (uniform family).

    n_per_dim is an int or a per-dimension mapping; at least 2 trials per
    dimension are required.
    """
    if isinstance(n_per_dim, int):
        n_map = {d: n_per_dim for d in dims}
    else:
        n_map = dict(n_per_dim)
    for d in dims:
        if n_map.get(d, 0) < 2:
            raise ValueError(f"universality needs n >= 2 per dimension (d={d})")
    grid = np.linspace(0.0, 1.0, grid_points)
    profiles: dict[int, np.ndarray] = {}
    params = ReductionParams(delta=delta)
    for d in dims:
        acc = np.zeros(d)
        for t in range(n_map[d]):
            basis = make_basis("uniform", d, trial_seed(seed, "uniform", d, t))
            res = lll_reduce(basis, params, keep_events=False)
            p = res.gso.profile()
            acc += p / np.sum(np.abs(p))
        mean_profile = acc / n_map[d]
        positions = np.arange(1, d + 1, dtype=float)
        target = 1.0 + grid * (d - 1)
        profiles[d] = np.interp(target, positions, mean_profile)
    m = len(dims)
    corr = np.eye(m)
    for i in range(m):
        for j in range(i + 1, m):
            c = np.corrcoef(profiles[dims[i]], profiles[dims[j]])[0, 1]
            corr[i, j] = corr[j, i] = c
    return profiles, corr
