"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Heavy benchmark cells are computed once in session fixtures and shared.
Run with `pytest -v -s tests/test_acceptance.py` to see the per-criterion
lines inline.
"""

import math
import time

import numpy as np
import pytest

from latmaj.bench import GridConfig, make_basis, run_grid, run_reduction, trial_seed, universality
from latmaj.deep import SelectorSpec, adaptive_alpha, admissible, parse_selector, score, score_window_direct
from latmaj.gso import compute_gso, exact_gso
from latmaj.intmat import Basis
from latmaj.latgen import GeneratorSpec, generate
from latmaj.lll import ReductionParams, cdelta, lll_reduce
from latmaj.major import gsa_profile, is_t_transform, ledger_from_trace, majorizes

DELTA = 0.99
JOBS = 2


def report(pid: str, ok: bool, detail: str) -> None:
    print(f"[{pid}] {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, f"{pid}: {detail}"


# ---------- shared heavy fixtures ----------


@pytest.fixture(scope="session")
def lll_runs_d30():
    """100 seeded uniform d=30 LLL runs with per-event profile snapshots."""
    t0 = time.time()
    runs = []
    for seed in range(100):
        basis = make_basis("uniform", 30, trial_seed(1000, "uniform", 30, seed))
        snaps = []
        res = lll_reduce(
            basis,
            ReductionParams(delta=DELTA),
            trace_sink=lambda ev, pre, post: snaps.append((ev, pre, post)),
        )
        assert res.terminal
        runs.append((res, snaps))
    return runs, time.time() - t0


def _grid(families, dims, selectors, n, seed=42):
    cfg = GridConfig(
        families=families,
        dims=dims,
        selectors=selectors,
        n=n,
        delta=DELTA,
        seed=seed,
        jobs=JOBS,
    )
    return {(r.family, r.d, r.selector): r for r in run_grid(cfg)}


@pytest.fixture(scope="session")
def qary_cells():
    """q-ary cells for P6/P8/P9: d in {40, 80}, n = 30, paired lattices."""
    return _grid(["qary"], [40, 80], ["ssgg", "thermal-adaptive", "deepvar", "gdlll"], 30)


@pytest.fixture(scope="session")
def gaussian_cells():
    """Gaussian cells for P7: d in {40, 80}, n = 30."""
    return _grid(["gaussian"], [40, 80], ["ssgg", "thermal-adaptive"], 30)


@pytest.fixture(scope="session")
def schurk_cells():
    """Schur-K failure-mode cell for P10: q-ary d = 40, n = 8."""
    return _grid(["qary"], [40], ["schurk", "ssgg"], 8)


# ---------- criteria ----------


def test_p01_per_swap_t_transform_law(lll_runs_d30):
    runs, elapsed = lll_runs_d30
    events = nondeg = 0
    for res, snaps in runs:
        for ev, pre, post in snaps:
            events += 1
            if ev.degenerate:
                continue
            nondeg += 1
            ok, eps = is_t_transform(pre, post, ev.k, tol=1e-10)
            assert ok, f"event {ev.step} of a run is not a T-transform"
            assert majorizes(pre, post, tol=1e-9)
            assert ev.sum_sq_post < ev.sum_sq_pre
    ok = events > 0 and elapsed < 60.0
    report(
        "P1",
        ok,
        f"{nondeg} non-degenerate swaps across 100 runs all pass T-transform, "
        f"majorization and strict sum-sq decrease ({elapsed:.1f}s < 60s)",
    )


def test_p02_dissipation_identity(lll_runs_d30):
    runs, _ = lll_runs_d30
    worst_step = 0.0
    worst_tel = 0.0
    for res, _ in runs:
        trace = res.trace
        ledger = ledger_from_trace(trace, DELTA)  # asserts N >= bound internally
        for ev, drop in zip(trace.events, ledger.drops):
            worst_step = max(worst_step, abs((ev.sum_sq_pre - ev.sum_sq_post) - drop))
        lhs = ledger.V[0] - ledger.V[-1]
        if lhs != 0:
            worst_tel = max(worst_tel, abs(lhs - float(np.sum(ledger.drops))) / abs(lhs))
        assert trace.n >= ledger.bound - 1e-9
    ok = worst_step < 1e-8 and worst_tel < 1e-6
    report(
        "P2",
        ok,
        f"per-swap residual max {worst_step:.2e} < 1e-8, telescoping max {worst_tel:.2e} < 1e-6, "
        f"swap-count bound held in all 100 runs",
    )


def test_p03_gsa_minimum_variance():
    t0 = time.time()
    d = 20
    rng = np.random.default_rng(7)
    pstar = gsa_profile(d, 0.0, DELTA)
    pss = float(np.dot(pstar, pstar))
    n = 10_000
    q = np.sort(rng.normal(0.0, 0.7, (n, d)), axis=1)[:, ::-1]
    q -= q.mean(axis=1, keepdims=True)
    scales = rng.uniform(0.0, 1.0, (n, 1))
    scales[: n // 10] = 10.0 ** rng.uniform(-11, -2, (n // 10, 1))  # near-equality samples
    scales[0] = 0.0  # the minimizer itself
    p = pstar[None, :] + q * scales
    sums = np.einsum("ij,ij->i", p, p)
    margins = sums - pss
    assert np.all(margins >= -1e-9)
    near = margins < 1e-9
    assert near.any()  # the equality branch is actually exercised
    dists = np.linalg.norm(p - pstar[None, :], axis=1)
    assert np.all(dists[near] < 1e-4)
    elapsed = time.time() - t0
    report(
        "P3",
        bool(np.all(margins >= -1e-9)) and elapsed < 60.0,
        f"10^4 feasible profiles: min margin {margins.min():.3e} >= -1e-9; "
        f"margins < 1e-9 imply distance < 1e-4 ({elapsed:.1f}s)",
    )


def test_p04_oracle_equivalence():
    worst_r = 0.0
    worst_mu = 0.0
    count = 0
    per_dim = {4: 67, 6: 67, 8: 66}
    for d, n in per_dim.items():
        for seed in range(n):
            b = make_basis("uniform", d, trial_seed(2000 + d, "uniform", d, seed))
            g = compute_gso(b)
            r_e, mu_e = exact_gso(b)
            count += 1
            for i in range(d):
                ref = float(r_e[i])
                worst_r = max(worst_r, abs(g.r[i] - ref) / abs(ref))
                for j in range(i):
                    refm = float(mu_e[i][j])
                    worst_mu = max(worst_mu, abs(g.mu[i, j] - refm) / max(1.0, abs(refm)))
    ok = worst_r < 1e-9 and worst_mu < 1e-9
    report(
        "P4",
        ok,
        f"{count} bases, d in (4,6,8): max rel r err {worst_r:.2e}, max mu err {worst_mu:.2e} < 1e-9",
    )


def test_p05_ssgg_incremental_identity():
    ssgg = SelectorSpec(kind="ssgg")
    th1 = SelectorSpec(kind="thermal", alpha=1.0)
    families = ["uniform", "gaussian", "qary"]
    checked = 0
    worst_direct = 0.0
    worst_thermal = 0.0
    seed = 0
    while checked < 500:
        fam = families[seed % 3]
        b = make_basis(fam, 20, trial_seed(3000, fam, 20, seed))
        g = compute_gso(b)
        for k in range(1, 20):
            for j in range(k):
                if checked >= 500:
                    break
                if admissible(g, k, j, DELTA):
                    inc = score(ssgg, g, k, j).delta_score
                    direct = score_window_direct(g, k, j, lambda r: r)
                    thermal = score(th1, g, k, j).delta_score
                    scale = max(abs(direct), 1e-30)
                    worst_direct = max(worst_direct, abs(inc - direct) / scale)
                    worst_thermal = max(worst_thermal, abs(thermal - inc) / scale)
                    checked += 1
        seed += 1
    ok = worst_direct < 1e-9 and worst_thermal < 1e-9
    report(
        "P5",
        ok,
        f"500 admissible candidates: incremental-vs-direct max rel {worst_direct:.2e}, "
        f"thermal(alpha=1)-vs-ssgg max rel {worst_thermal:.2e} < 1e-9",
    )


def test_p06_qary_anchor(qary_cells):
    msgs = []
    ok = True
    for d in (40, 80):
        ssgg = qary_cells[("qary", d, "ssgg")]
        ta = qary_cells[("qary", d, "thermal-adaptive")]
        alphas = [r.selector_state["alpha0"] for r in ta.reports]
        a_dev = max(abs(a - 1.0) for a in alphas)
        n_dev = abs(ta.means["N"] - ssgg.means["N"]) / ssgg.means["N"]
        ok = ok and a_dev < 0.1 and n_dev < 0.015
        msgs.append(f"d={d}: |alpha0-1| max {a_dev:.3g}, N gap {n_dev * 100:.2f}%")
    report("P6", ok, "; ".join(msgs) + " (need <0.1 and <1.5%)")


def test_p07_flat_profile_advantage(gaussian_cells):
    msgs = []
    ok = True
    for d in (40, 80):
        ssgg = gaussian_cells[("gaussian", d, "ssgg")]
        ta = gaussian_cells[("gaussian", d, "thermal-adaptive")]
        red = (ssgg.means["N"] - ta.means["N"]) / ssgg.means["N"] * 100
        wdev = abs(ta.means["W"] - ssgg.means["W"]) / ssgg.means["W"] * 100
        cond = 5.0 <= red <= 20.0
        if d == 40:
            cond = cond and wdev <= 10.0
        ok = ok and cond
        msgs.append(f"d={d}: N reduction {red:.1f}% (need 5-20), W dev {wdev:.1f}%")
    report("P7", ok, "; ".join(msgs))


def test_p08_deepvar_vs_ssgg_qary(qary_cells):
    dv = qary_cells[("qary", 80, "deepvar")]
    ss = qary_cells[("qary", 80, "ssgg")]
    sign_n = dv.means["N"] < ss.means["N"]
    sign_q = dv.means["delta0"] > ss.means["delta0"]
    band_dv = abs(dv.means["N"] - 518) / 518 <= 0.25
    band_ss = abs(ss.means["N"] - 626) / 626 <= 0.25
    ok = sign_n and sign_q and band_dv and band_ss
    report(
        "P8",
        ok,
        f"N: deepvar {dv.means['N']:.0f} < ssgg {ss.means['N']:.0f}; "
        f"delta0: deepvar {dv.means['delta0']:.5f} > ssgg {ss.means['delta0']:.5f}; "
        f"both N within 25% of (518, 626)",
    )


def test_p09_gdlll_equivalent_work(qary_cells):
    gd = qary_cells[("qary", 80, "gdlll")]
    dv = qary_cells[("qary", 80, "deepvar")]
    w_red = (dv.means["W"] - gd.means["W"]) / dv.means["W"] * 100
    n_ratio = gd.means["N"] / dv.means["N"]
    ok = 10.0 <= w_red <= 25.0 and 3.0 <= n_ratio <= 6.0
    report(
        "P9",
        ok,
        f"W reduction over deepvar {w_red:.1f}% (need 10-25); N ratio {n_ratio:.2f}x (need 3-6)",
    )


def test_p10_schurk_failure_mode(schurk_cells):
    sk = schurk_cells[("qary", 40, "schurk")]
    ss = schurk_cells[("qary", 40, "ssgg")]
    w_ratio = sk.means["W"] / ss.means["W"]
    d0_gap = sk.means["delta0"] - ss.means["delta0"]
    ok = w_ratio < 0.5 and d0_gap > 0.03
    report(
        "P10",
        ok,
        f"W ratio {w_ratio:.2f} < 0.5; delta0 gap {d0_gap:.4f} > 0.03 "
        f"(schurk {sk.means['delta0']:.4f} vs ssgg {ss.means['delta0']:.4f})",
    )


def test_p11_universality():
    t0 = time.time()
    dims = [30, 40, 60]
    _, corr = universality(dims, {30: 100, 40: 100, 60: 50}, seed=42, delta=DELTA)
    off = [corr[i, j] for i in range(3) for j in range(i + 1, 3)]
    elapsed = time.time() - t0
    ok = min(off) > 0.96 and elapsed < 600.0
    report(
        "P11",
        ok,
        f"pairwise Pearson {['%.4f' % c for c in off]} all > 0.96 ({elapsed:.0f}s < 600s)",
    )


def test_p12_spot_formulas():
    c = cdelta(0.99)
    a_anchor = adaptive_alpha(np.array([1.0, 0.0]))  # ln r = (2, 0): CV = 1 exactly
    p17 = np.array([0.5 * 1.17, 0.5 * 0.83])  # ln r mean 1, sigma 0.17
    a_17 = adaptive_alpha(p17, gamma=2.0)
    ok = abs(c - 0.1505525) < 1e-6 and a_anchor == 1.0 and abs(a_17 - 2.92) < 0.01
    report(
        "P12",
        ok,
        f"cdelta(0.99)={c:.7f} (+-1e-6 of 0.1505525); alpha0(CV=1)={a_anchor} (exact 1.0); "
        f"alpha0(CV=0.17)={a_17:.3f} (2.92 +- 0.01)",
    )


def test_p13_terminal_state_contract(qary_cells, gaussian_cells, schurk_cells):
    cells = {**qary_cells, **gaussian_cells, **schurk_cells}
    trials = 0
    bad_terminal = 0
    phi_violations = 0
    for row in cells.values():
        for rep in row.reports:
            trials += 1
            if not (rep.terminal and rep.checks.get("size_reduced") and rep.checks.get("no_positive_candidate")):
                bad_terminal += 1
            phi_violations += rep.selector_state.get("phi_increases", 0)
    detail = (
        f"{trials} trials: size-reduced and no positive-descent candidate hold in "
        f"{trials - bad_terminal}/{trials}; accepted moves with non-decreasing potential: {phi_violations} "
        f"(criterion requires 0; admissibility only constrains the cascade at level j, so score-positive "
        f"insertions can raise the weighted potential - see decisions ledger)"
    )
    report("P13", bad_terminal == 0 and phi_violations == 0, detail)
