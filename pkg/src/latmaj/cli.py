"""latmaj command line: generate lattices, reduce bases, run benchmark grids,
verify traces, and run the profile-universality analysis.

Exit codes: 0 ok, 1 usage error, 2 numerical failure, 3 non-terminal run.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import bench, deep, major
from .gso import NumericalError
from .intmat import RankError, read_basis, write_basis
from .latgen import FAMILIES, GeneratorSpec, generate
from .lll import ReductionParams
from .tracing import read_trace, write_trace

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2
EXIT_NONTERMINAL = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _parse_dims(text: str) -> list[int]:
    """Accept `30,40,60` lists and `20:200:20` start:stop:step ranges."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) not in (2, 3):
            raise ValueError(f"bad dims range {text!r}")
        start, stop = int(parts[0]), int(parts[1])
        step = int(parts[2]) if len(parts) == 3 else 1
        return list(range(start, stop + 1, step))
    return [int(tok) for tok in text.split(",") if tok]


_FAMILY_ALIASES = {"gm": "goldstein_mayer", "goldstein-mayer": "goldstein_mayer"}


def _parse_families(text: str) -> list[str]:
    out = []
    for tok in text.split(","):
        tok = tok.strip().lower()
        if not tok:
            continue
        tok = _FAMILY_ALIASES.get(tok, tok)
        if tok not in FAMILIES:
            raise ValueError(f"unknown family {tok!r}")
        out.append(tok)
    if not out:
        raise ValueError("no families given")
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="latmaj", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a lattice basis")
    g.add_argument("--family", required=True)
    g.add_argument("--d", type=int, required=True)
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--q", type=int, default=None)
    g.add_argument("--k", type=int, default=None)
    g.add_argument("--out", default=None, help="output file (default stdout)")

    r = sub.add_parser("reduce", help="reduce a basis file with one selector")
    r.add_argument("--in", dest="infile", required=True)
    r.add_argument("--selector", default="lll")
    r.add_argument("--delta", type=float, default=0.99)
    r.add_argument("--trace", default=None, help="write JSONL trace here")
    r.add_argument("--out", default=None, help="reduced basis file (default stdout)")
    r.add_argument("--max-moves", type=int, default=10_000_000)

    b = sub.add_parser("bench", help="run a benchmark grid, emit CSV")
    b.add_argument("--families", required=True)
    b.add_argument("--dims", required=True)
    b.add_argument("--selectors", required=True)
    b.add_argument("--n", type=int, default=30)
    b.add_argument("--delta", type=float, default=0.99)
    b.add_argument("--seed", type=int, default=42)
    b.add_argument("--q", type=int, default=1009)
    b.add_argument("--out", required=True)
    b.add_argument("--traces", default=None, help="retain per-trial JSONL traces in this directory")
    b.add_argument("--jobs", type=int, default=1)

    v = sub.add_parser("verify", help="check the per-swap identities of a trace")
    v.add_argument("--trace", required=True)

    u = sub.add_parser("universality", help="cross-dimension profile correlation")
    u.add_argument("--dims", required=True)
    u.add_argument("--n", type=int, default=100)
    u.add_argument("--seed", type=int, default=42)
    u.add_argument("--delta", type=float, default=0.99)
    u.add_argument("--out", default=None, help="write correlations as CSV here")
    return parser


def _cmd_gen(args) -> int:
    spec = GeneratorSpec(family=_parse_families(args.family)[0], d=args.d, seed=args.seed, q=args.q, k=args.k)
    text = write_basis(generate(spec))
    if args.out:
        with open(args.out, "w") as fp:
            fp.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_reduce(args) -> int:
    with open(args.infile) as fp:
        basis = read_basis(fp.read())
    selector = deep.parse_selector(args.selector)
    params = ReductionParams(delta=args.delta, max_moves=args.max_moves)
    report = bench.run_reduction(basis, selector, params, keep_trace=True, keep_basis=True)
    text = write_basis(report.basis)
    if args.out:
        with open(args.out, "w") as fp:
            fp.write(text)
    else:
        sys.stdout.write(text)
    if args.trace:
        with open(args.trace, "w") as fp:
            write_trace(report.trace, fp)
    summary = {
        "N": report.n,
        "W": report.w,
        "delta0": report.delta0,
        "final_sum_sq": report.final_sum_sq,
        "terminal": report.terminal,
    }
    print(json.dumps(summary), file=sys.stderr)
    return EXIT_OK if report.terminal else EXIT_NONTERMINAL


def _cmd_bench(args) -> int:
    config = bench.GridConfig(
        families=_parse_families(args.families),
        dims=_parse_dims(args.dims),
        selectors=[s.strip() for s in args.selectors.split(",") if s.strip()],
        n=args.n,
        delta=args.delta,
        seed=args.seed,
        q=args.q,
        traces_dir=args.traces,
        jobs=args.jobs,
    )
    for selector in config.selectors:
        deep.parse_selector(selector)

    def progress(row):
        print(
            f"[{row.family} d={row.d} {row.selector}] n={row.n_trials} "
            f"N={row.means.get('N', float('nan')):.1f} W={row.means.get('W', float('nan')):.1f}",
            file=sys.stderr,
        )

    rows = bench.run_grid(config, progress=progress)
    with open(args.out, "w") as fp:
        fp.write(bench.rows_to_csv(rows))
    if any(row.failures for row in rows):
        return EXIT_NONTERMINAL
    return EXIT_OK


def _cmd_verify(args) -> int:
    with open(args.trace) as fp:
        trace = read_trace(fp)
    problems: list[str] = []
    if trace.all_adjacent():
        try:
            ledger = major.ledger_from_trace(trace)
        except AssertionError as exc:
            problems.append(str(exc))
            ledger = None
        if ledger is not None:
            drops = ledger.drops
            if np.any(drops < 0):
                problems.append("negative dissipation drop")
            for e, drop in zip(trace.events, drops):
                if e.degenerate != (drop == 0.0):
                    problems.append(f"step {e.step}: degenerate flag does not match zero drop")
                    break
                resid = abs((e.sum_sq_pre - e.sum_sq_post) - drop)
                if resid > 1e-8:
                    problems.append(f"step {e.step}: per-swap identity residual {resid:.3g}")
                    break
            total = float(np.sum(drops))
            lhs = ledger.V[0] - ledger.V[-1]
            denom = max(abs(lhs), 1e-30)
            if abs(lhs - total) / denom > 1e-6:
                problems.append("telescoping identity residual exceeds 1e-6 relative")
            print(
                json.dumps(
                    {
                        "kind": "adjacent",
                        "events": trace.n,
                        "V0": ledger.V[0],
                        "VN": float(ledger.V[-1]),
                        "swap_count_bound": ledger.bound,
                        "ok": not problems,
                    }
                )
            )
    else:
        w, bound, ok = major.roi_bound_check(trace)
        if not ok:
            problems.append(f"equivalent-work bound violated: W={w} < {bound}")
        for e in trace.events:
            if e.kind == "deep-insertion" and not e.score > 0:
                problems.append(f"step {e.step}: accepted move has nonpositive score")
                break
        print(json.dumps({"kind": "deep", "events": trace.n, "W": w, "roi_bound": bound, "ok": not problems}))
    for msg in problems:
        print(f"FAIL: {msg}", file=sys.stderr)
    return EXIT_OK if not problems else EXIT_NUMERICAL


def _cmd_universality(args) -> int:
    dims = _parse_dims(args.dims)
    profiles, corr = bench.universality(dims, args.n, seed=args.seed, delta=args.delta)
    lines = ["d_i,d_j,pearson"]
    for i, di in enumerate(dims):
        for j in range(i + 1, len(dims)):
            lines.append(f"{di},{dims[j]},{corr[i, j]!r}")
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fp:
            fp.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    handlers = {
        "gen": _cmd_gen,
        "reduce": _cmd_reduce,
        "bench": _cmd_bench,
        "verify": _cmd_verify,
        "universality": _cmd_universality,
    }
    try:
        return handlers[args.command](args)
    except (ValueError, RankError, FileNotFoundError) as exc:
        print(f"latmaj: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"latmaj: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
