"""Gram-Schmidt data (mu, r, p) in double precision, with an exact rational oracle.

The floating state is seeded from the exact integer Gram matrix and updated
incrementally; `refresh` recomputes it from the basis to cap drift.  Inputs
whose Gram matrix overflows double range are scaled by a power of two first;
inputs whose GS norms are lost to cancellation in double (huge-entry
Goldstein-Mayer style bases) fall back to exact rational elimination and keep
`r` in a uniformly scaled space recorded in `log_scale`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .intmat import Basis, gram_matrix

__all__ = [
    "GsoState",
    "NumericalError",
    "compute_gso",
    "exact_gso",
    "size_reduce",
    "refresh",
    "transpose_update",
    "SIZE_RED_TOL",
]

SIZE_RED_TOL = 1e-9          # size reduction enforces |mu| <= 1/2 + this
EXACT_GSO_MAX_DIM = 12       # cost guard for the public rational oracle
_SCALE_BITS_LIMIT = 600      # scale exact Gram down when entries exceed 2^600


class NumericalError(RuntimeError):
    """GSO not representable/computable in double precision."""


@dataclass
class GsoState:
    """Floating GSO data for one basis.

    mu is lower triangular with unit diagonal; r holds squared GS norms in a
    uniformly scaled space (true ln r_i = ln r[i] + log_scale); p holds the
    true log norms p_i = (ln r[i] + log_scale) / 2.  stale_from marks the
    first row whose data may have drifted since the last full recomputation.
    """

    mu: np.ndarray
    r: np.ndarray
    p: np.ndarray
    log_scale: float = 0.0
    stale_from: int = 0

    @property
    def dim(self) -> int:
        return len(self.r)

    def profile(self) -> np.ndarray:
        """Copy of the log-norm profile p."""
        return self.p.copy()

    def sum_p(self) -> float:
        return float(np.sum(self.p))

    def sum_p_sq(self) -> float:
        return float(np.dot(self.p, self.p))

    def potential(self) -> float:
        """Position-weighted sum sum_i (d-i) * p_i over 0-based i (weights d..1)."""
        d = self.dim
        w = np.arange(d, 0, -1, dtype=float)
        return float(np.dot(w, self.p))

    def touch(self, row: int) -> None:
        if row < self.stale_from:
            self.stale_from = row


_LONGDOUBLE_MANT = np.finfo(np.longdouble).nmant  # 63 on x86-64, 52 where absent


def _int_to_longdouble_shifted(x: int, shift: int):
    """longdouble(x * 2**-shift) keeping the full extended mantissa."""
    neg = x < 0
    if neg:
        x = -x
    bits = x.bit_length()
    if bits <= _LONGDOUBLE_MANT + 1:
        y = np.ldexp(np.longdouble(x), -shift) if shift else np.longdouble(x)
    else:
        keep = bits - (_LONGDOUBLE_MANT + 1)
        y = np.ldexp(np.longdouble(x >> keep), keep - shift)
    return -y if neg else y


def _gram_to_float(g: list[list[int]]) -> tuple[np.ndarray, float]:
    """Convert exact Gram to extended precision, scaled by 2^-s when entries
    would overflow double range downstream."""
    max_bits = max((abs(x).bit_length() for row in g for x in row), default=0)
    shift = max(0, max_bits - _SCALE_BITS_LIMIT)
    d = len(g)
    gf = np.empty((d, d), dtype=np.longdouble)
    for i in range(d):
        gi = g[i]
        for j in range(d):
            gf[i, j] = _int_to_longdouble_shifted(gi[j], shift)
    return gf, shift * math.log(2.0)


def _gso_from_float_gram(gf: np.ndarray) -> tuple[np.ndarray, np.ndarray] | None:
    """Right-looking LDL^T in extended precision: G = L D L^T with L the unit
    lower-triangular mu matrix and D the squared GS norms."""
    d = len(gf)
    a = gf.copy()
    mu = np.eye(d, dtype=np.longdouble)
    r = np.empty(d, dtype=np.longdouble)
    for j in range(d):
        rj = a[j, j]
        if not np.isfinite(rj) or rj <= 0.0:
            return None
        r[j] = rj
        if j + 1 < d:
            col = a[j + 1 :, j].copy()
            mu[j + 1 :, j] = col / rj
            # dividing the exact product (not the column) keeps integer-valued
            # intermediates exact, e.g. the q-ary (q^2, ..., 1, ...) profile
            a[j + 1 :, j + 1 :] -= np.outer(col, col) / rj
    r64 = r.astype(np.float64)
    if not np.all(np.isfinite(r64)) or np.any(r64 <= 0.0):
        return None
    return mu.astype(np.float64), r64


def _exact_gso_fractions(g: list[list[int]]) -> tuple[list[Fraction], list[list[Fraction]]]:
    """Exact rational GSO from an integer Gram matrix.

    Returns (r, mu) with mu a full lower-unit-triangular d x d list-of-lists.
    """
    d = len(g)
    mu = [[Fraction(0)] * d for _ in range(d)]
    c = [[Fraction(0)] * d for _ in range(d)]  # c[i][j] = <b_i, b*_j>
    r = [Fraction(0)] * d
    for i in range(d):
        mu[i][i] = Fraction(1)
        for j in range(i + 1):
            s = Fraction(g[i][j])
            cj = c[j]
            ci = c[i]
            muj = mu[j]
            for t in range(j):
                if muj[t]:
                    s -= muj[t] * ci[t]
            ci[j] = s
            if j < i:
                if r[j] == 0:
                    raise NumericalError("zero GS norm: basis not full rank")
                mu[i][j] = s / r[j]
            else:
                if s <= 0:
                    raise NumericalError("nonpositive GS norm: basis not full rank")
                r[i] = s
    return r, mu


def _log_fraction(x: Fraction) -> float:
    return math.log(x.numerator) - math.log(x.denominator)


def _gso_from_gram(g: list[list[int]]) -> GsoState:
    gf, log_scale = _gram_to_float(g)
    out = _gso_from_float_gram(gf)
    if out is not None:
        mu, r = out
        p = 0.5 * (np.log(r) + log_scale)
        return GsoState(mu=mu, r=r, p=p, log_scale=log_scale, stale_from=len(r))
    # Double-precision Cholesky lost the small GS norms to cancellation.
    # Recover them exactly, then store r recentred so both ends of the
    # dynamic range stay inside double range.
    r_exact, mu_exact = _exact_gso_fractions(g)
    d = len(r_exact)
    ln_r = np.array([_log_fraction(x) for x in r_exact])
    log_scale = float((ln_r.max() + ln_r.min()) / 2.0)
    if (ln_r.max() - ln_r.min()) / 2.0 > 700.0:
        raise NumericalError(
            "GS norm dynamic range exceeds double-precision representable span; "
            f"spread e^{ln_r.max() - ln_r.min():.0f} cannot be stored"
        )
    r = np.exp(ln_r - log_scale)
    mu = np.array([[float(mu_exact[i][j]) for j in range(d)] for i in range(d)])
    mu = np.tril(mu)
    p = 0.5 * ln_r
    return GsoState(mu=mu, r=r, p=p, log_scale=log_scale, stale_from=d)


def compute_gso(basis: Basis) -> GsoState:
    """Classical Gram-Schmidt over the rows, seeded from exact inner products."""
    return _gso_from_gram(gram_matrix(basis))


_DIVERGENCE_TOL = 1e-3  # honest drift after 10^5 float updates stays below 1e-9


def refresh(basis: Basis, gso: GsoState | None = None) -> GsoState:
    """Full recomputation of the GSO from the basis.

    When the previous state is supplied, a profile discrepancy far beyond
    accumulated roundoff means double precision could not track this basis
    (mu values too large to size-reduce correctly); that raises rather than
    silently continuing from a corrupted trajectory.
    """
    fresh = compute_gso(basis)
    if gso is not None and len(gso.p) == len(fresh.p):
        drift = float(np.max(np.abs(gso.p - fresh.p)))
        if drift > _DIVERGENCE_TOL:
            raise NumericalError(
                f"floating GSO diverged from the basis (profile drift {drift:.3g}); "
                "entries of this magnitude exceed double-precision size reduction"
            )
    return fresh


def exact_gso(basis: Basis) -> tuple[list[Fraction], list[list[Fraction]]]:
    """Exact rational (r, mu) test oracle; guarded to d <= 12 for cost."""
    if basis.dim > EXACT_GSO_MAX_DIM:
        raise ValueError(f"exact_gso is limited to d <= {EXACT_GSO_MAX_DIM}")
    return _exact_gso_fractions(gram_matrix(basis))


def size_reduce(basis: Basis, gso: GsoState, k: int) -> None:
    """Make |mu[k, j]| <= 1/2 for all j < k via exact row operations.

    A single descending pass suffices; r and p are unchanged (the row
    operations only shear within the span of earlier vectors).  Rounding is
    round-half-to-even.
    """
    mu = gso.mu
    muk = mu[k, :k]
    pairs: list[tuple[int, int]] = []
    # Descending pass, skipping columns already within 1/2.  Reducing at
    # column j only disturbs columns < j, so rescanning below the last
    # reduced column reproduces the plain j = k-1..0 sweep exactly.
    j_hi = k
    while j_hi > 0:
        bad = np.flatnonzero(np.abs(muk[:j_hi]) > 0.5)
        if bad.size == 0:
            break
        j = int(bad[-1])
        c = round(float(muk[j]))
        if c:
            pairs.append((j, c))
            if j > 0:
                muk[:j] -= c * mu[j, :j]
            muk[j] -= c
        j_hi = j
    if pairs:
        basis.row_combine_many(k, pairs)
        gso.touch(k)


def transpose_update(gso: GsoState, k: int) -> None:
    """Update (mu, r, p) for a transposition of rows k-1 and k of the basis.

    Implements the standard GS swap formulas: r'_{k-1} = r_k + mu^2 r_{k-1},
    r'_k = r_{k-1} r_k / r'_{k-1}.  The degenerate case mu = 0 is handled as
    an exact exchange so swapped profiles are bit-identical.
    """
    mu, r, p = gso.mu, gso.r, gso.p
    d = gso.dim
    m = float(mu[k, k - 1])
    r1 = float(r[k - 1])
    r2 = float(r[k])
    if m == 0.0:
        r[k - 1], r[k] = r2, r1
        p[k - 1], p[k] = p[k], p[k - 1]
        if k + 1 < d:
            col = mu[k + 1 :, k - 1].copy()
            mu[k + 1 :, k - 1] = mu[k + 1 :, k]
            mu[k + 1 :, k] = col
    else:
        rp1 = r2 + m * m * r1
        nu = m * r1 / rp1
        rp2 = r1 * r2 / rp1
        if k + 1 < d:
            a = mu[k + 1 :, k - 1].copy()
            b = mu[k + 1 :, k]
            mu[k + 1 :, k - 1] = nu * a + (r2 / rp1) * b
            mu[k + 1 :, k] = a - m * b
        mu[k, k - 1] = nu
        r[k - 1] = rp1
        r[k] = rp2
        p[k - 1] = 0.5 * (math.log(rp1) + gso.log_scale)
        p[k] = 0.5 * (math.log(rp2) + gso.log_scale)
    if k >= 2:
        head = mu[k - 1, : k - 1].copy()
        mu[k - 1, : k - 1] = mu[k, : k - 1]
        mu[k, : k - 1] = head
    gso.touch(k - 1)
