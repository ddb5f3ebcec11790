"""Arbitrary-precision integer basis matrices with exact row operations and text I/O.

Entries are Python ints, so 10d-bit moduli and anything a reduction produces
along the way are exact.  Construction certifies full row rank over the
rationals once; row operations assume it afterwards.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

__all__ = [
    "Basis",
    "RankError",
    "read_basis",
    "write_basis",
    "gram_matrix",
    "int_det",
    "gram_det",
]

# Rank certification works modulo small primes first (p < 2^24 so int64 row
# elimination cannot overflow); a full-rank result mod p certifies full rank
# over Q.  Only if every prime fails do we pay for exact rational elimination.
_RANK_PRIMES = (16777213, 8388593)


class RankError(ValueError):
    """Rows are linearly dependent over the rationals."""


class Basis:
    """A d-row integer basis, rows of equal length m >= d, full rank over Q.

    Rows are lists of Python ints and stay exact at any magnitude.  A
    synchronized int64 mirror accelerates row arithmetic while entries
    provably fit; it is dropped permanently the first time a bound check
    fails.  Mutate only through the methods here, or the mirror desyncs.
    All mutating operations are unimodular, so the Gram determinant is
    invariant.
    """

    __slots__ = ("rows", "dim", "width", "_np")

    def __init__(self, rows, check_rank: bool = True):
        rows = [[int(x) for x in row] for row in rows]
        if not rows:
            raise ValueError("empty basis")
        m = len(rows[0])
        if any(len(row) != m for row in rows):
            raise ValueError("ragged rows: all rows must have equal length")
        d = len(rows)
        if d > m:
            raise RankError(f"{d} rows of length {m} cannot be independent")
        self.rows = rows
        self.dim = d
        self.width = m
        self._np = self._build_mirror()
        if check_rank and _rank(rows) < d:
            raise RankError("rows are linearly dependent over the rationals")

    def _build_mirror(self):
        try:
            return np.array(self.rows, dtype=np.int64)
        except OverflowError:
            return None

    def copy(self) -> "Basis":
        b = Basis.__new__(Basis)
        b.rows = [row[:] for row in self.rows]
        b.dim = self.dim
        b.width = self.width
        b._np = None if self._np is None else self._np.copy()
        return b

    def __eq__(self, other) -> bool:
        return isinstance(other, Basis) and self.rows == other.rows

    def __repr__(self) -> str:
        return f"Basis(d={self.dim}, m={self.width})"

    def row_combine(self, target: int, source: int, coeff: int) -> None:
        """row[target] -= coeff * row[source], exactly.  Determinant unchanged."""
        d = self.dim
        if not (0 <= target < d and 0 <= source < d):
            raise IndexError(f"row index out of range (d={d})")
        if target == source:
            raise ValueError("target and source rows must differ")
        if coeff == 0:
            return
        self.row_combine_many(target, [(source, coeff)])

    def row_combine_many(self, target: int, pairs: list[tuple[int, int]]) -> None:
        """row[target] -= sum over (source, coeff) pairs, exactly.

        Equivalent to chained row_combine calls; uses one int64 matrix-vector
        product when magnitudes provably fit, else exact Python ints.
        """
        if not pairs:
            return
        d = self.dim
        if not 0 <= target < d:
            raise IndexError(f"row index out of range (d={d})")
        for j, _ in pairs:
            if not 0 <= j < d:
                raise IndexError(f"row index out of range (d={d})")
            if j == target:
                raise ValueError("target and source rows must differ")
        t = self.rows[target]
        max_c = max(abs(c) for _, c in pairs)
        if max_c == 0:
            return
        a = self._np
        if a is not None:
            js = [j for j, _ in pairs]
            sub = a[js]
            bound = len(pairs) * max_c * max(1, int(np.abs(sub).max(initial=0)))
            bound += int(np.abs(a[target]).max(initial=0))
            if 0 < max_c < 2**62 and bound < 2**62:
                cs = np.array([c for _, c in pairs], dtype=np.int64)
                delta = cs @ sub
                a[target] -= delta
                for i in range(self.width):
                    t[i] -= int(delta[i])
                return
            self._np = None
        for j, c in pairs:
            if c:
                s = self.rows[j]
                for i in range(self.width):
                    t[i] -= c * s[i]

    def move_row(self, src: int, dst: int) -> None:
        """Insert row src at position dst < src, shifting rows dst..src-1 right."""
        d = self.dim
        if not (0 <= src < d and 0 <= dst < d):
            raise IndexError(f"row index out of range (d={d})")
        if dst >= src:
            raise ValueError("move_row requires dst < src")
        self.rows.insert(dst, self.rows.pop(src))
        a = self._np
        if a is not None:
            tmp = a[src].copy()
            a[dst + 1 : src + 1] = a[dst:src]
            a[dst] = tmp

    def max_abs_entry(self) -> int:
        if self._np is not None:
            return int(np.abs(self._np).max(initial=0))
        return max(abs(x) for row in self.rows for x in row)


def _rank(rows) -> int:
    d = len(rows)
    for p in _RANK_PRIMES:
        if _rank_mod(rows, p) == d:
            return d
    return _rank_exact(rows)


def _rank_mod(rows, p: int) -> int:
    a = np.array([[x % p for x in row] for row in rows], dtype=np.int64)
    d, m = a.shape
    rank = 0
    col = 0
    while rank < d and col < m:
        piv = np.nonzero(a[rank:, col])[0]
        if piv.size == 0:
            col += 1
            continue
        i = rank + int(piv[0])
        if i != rank:
            a[[rank, i]] = a[[i, rank]]
        inv = pow(int(a[rank, col]), p - 2, p)
        a[rank] = a[rank] * inv % p
        below = a[rank + 1 :, col]
        nz = np.nonzero(below)[0]
        if nz.size:
            a[rank + 1 + nz] = (a[rank + 1 + nz] - below[nz, None] * a[rank][None, :]) % p
        rank += 1
        col += 1
    return rank


def _rank_exact(rows) -> int:
    a = [[Fraction(x) for x in row] for row in rows]
    d, m = len(a), len(a[0])
    rank = 0
    col = 0
    while rank < d and col < m:
        piv = next((i for i in range(rank, d) if a[i][col]), None)
        if piv is None:
            col += 1
            continue
        a[rank], a[piv] = a[piv], a[rank]
        prow = a[rank]
        inv = 1 / prow[col]
        for i in range(rank + 1, d):
            f = a[i][col] * inv
            if f:
                a[i] = [x - f * y for x, y in zip(a[i], prow)]
        rank += 1
        col += 1
    return rank


def gram_matrix(basis: Basis) -> list[list[int]]:
    """Exact integer Gram matrix B @ B^T."""
    rows = basis.rows
    d, m = basis.dim, basis.width
    mx = basis.max_abs_entry()
    if basis._np is not None and mx and m * mx * mx < 2**62:
        a = basis._np
        return (a @ a.T).tolist()
    g = [[0] * d for _ in range(d)]
    for i in range(d):
        ri = rows[i]
        for j in range(i + 1):
            s = sum(x * y for x, y in zip(ri, rows[j]))
            g[i][j] = s
            g[j][i] = s
    return g


def int_det(a: list[list[int]]) -> int:
    """Exact determinant of a square integer matrix (fraction-free Bareiss)."""
    n = len(a)
    a = [row[:] for row in a]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            piv = next((i for i in range(k + 1, n) if a[i][k]), None)
            if piv is None:
                return 0
            a[k], a[piv] = a[piv], a[k]
            sign = -sign
        akk = a[k][k]
        for i in range(k + 1, n):
            aik = a[i][k]
            row_i = a[i]
            row_k = a[k]
            for j in range(k + 1, n):
                row_i[j] = (row_i[j] * akk - aik * row_k[j]) // prev
            row_i[k] = 0
        prev = akk
    return sign * a[n - 1][n - 1]


def gram_det(basis: Basis) -> int:
    """Exact det(B B^T); positive for any full-rank basis."""
    return int_det(gram_matrix(basis))


def read_basis(text: str, check_rank: bool = True) -> Basis:
    """Parse the bracketed matrix format `[[r11 r12 ...][r21 ...]...]`.

    Any whitespace (including newlines) may separate tokens.
    """
    tokens = text.replace("[", " [ ").replace("]", " ] ").split()
    if not tokens or tokens[0] != "[" or tokens[-1] != "]":
        raise ValueError("malformed basis: expected outer [ ... ]")
    rows: list[list[int]] = []
    i = 1
    while i < len(tokens) - 1:
        if tokens[i] != "[":
            raise ValueError(f"malformed basis: expected '[' at row start, got {tokens[i]!r}")
        i += 1
        row: list[int] = []
        while i < len(tokens) - 1 and tokens[i] != "]":
            tok = tokens[i]
            if tok == "[":
                raise ValueError("malformed basis: nested '[' inside a row")
            try:
                row.append(int(tok))
            except ValueError:
                raise ValueError(f"non-integer token {tok!r}") from None
            i += 1
        if i >= len(tokens) - 1:
            raise ValueError("malformed basis: unterminated row")
        if not row:
            raise ValueError("malformed basis: empty row")
        rows.append(row)
        i += 1
    if not rows:
        raise ValueError("malformed basis: no rows")
    return Basis(rows, check_rank=check_rank)


def write_basis(basis: Basis) -> str:
    """Serialize to the canonical bracketed format (one row per line)."""
    body = "\n".join("[" + " ".join(str(x) for x in row) + "]" for row in basis.rows)
    return "[" + body + "]\n"
