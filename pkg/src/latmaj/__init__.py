"""Lattice reduction with per-swap majorization instrumentation.

Exact integer bases, double-precision Gram-Schmidt state, delta-LLL and a
family of greedy deep-insertion selectors, a majorization toolkit for the
per-swap identities, seeded benchmark lattice generators, and a grid runner.
"""

from .intmat import Basis, RankError, read_basis, write_basis
from .gso import GsoState, NumericalError, compute_gso, exact_gso, refresh, size_reduce
from .lll import ReductionParams, cdelta, lll_reduce, lovasz_swap, lovasz_violated
from .deep import (
    Candidate,
    SelectorSpec,
    adaptive_alpha,
    admissible,
    cascade,
    greedy_reduce,
    parse_selector,
    post_insertion_profile,
    score,
)
from .major import (
    DissipationLedger,
    gsa_profile,
    is_t_transform,
    ledger_from_trace,
    majorizes,
    min_variance_check,
    roi_bound_check,
    schur_scores,
)
from .latgen import GeneratorSpec, generate
from .bench import GridConfig, root_hermite, run_grid, run_reduction, universality
from .tracing import ReductionReport, Trace, TraceEvent, read_trace, write_trace

__version__ = "0.1.0"
