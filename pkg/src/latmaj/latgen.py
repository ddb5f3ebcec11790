"""Seeded generators for the benchmark lattice families.

All randomness flows through a counter-based Philox generator keyed by the
seed, so the same (family, d, seed, ...) reproduces the same basis
bit-for-bit on any platform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .intmat import Basis, RankError

__all__ = ["GeneratorSpec", "generate", "random_prime", "miller_rabin", "FAMILIES"]

FAMILIES = ("uniform", "gaussian", "qary", "goldstein_mayer")

_RESAMPLE_CAP = 100
_MR_ROUNDS = 64


@dataclass
class GeneratorSpec:
    """One lattice instance: family, dimension, seed, and family knobs.

    q defaults to 1009 for qary; goldstein_mayer derives a random prime with
    exactly 10*d bits.  k is the qary sublattice rank (default d // 2).
    """

    family: str
    d: int
    seed: int
    q: int | None = None
    k: int | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.d < 2:
            raise ValueError("d must be at least 2")
        if self.family == "qary":
            k = self.k if self.k is not None else self.d // 2
            if not (1 <= k <= self.d - 1):
                raise ValueError(f"qary rank k={k} outside [1, d-1]")


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed & (2**64 - 1)))


def _rand_bits(rng: np.random.Generator, bits: int) -> int:
    words = rng.integers(0, 2**64, size=(bits + 63) // 64, dtype=np.uint64)
    x = 0
    for w in words:
        x = (x << 64) | int(w)
    return x >> (len(words) * 64 - bits)


def _rand_below(rng: np.random.Generator, n: int) -> int:
    bits = n.bit_length()
    while True:
        x = _rand_bits(rng, bits)
        if x < n:
            return x


def miller_rabin(n: int, rounds: int, rng: np.random.Generator) -> bool:
    """Probabilistic primality test with random bases."""
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d = n - 1
    s = 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for _ in range(rounds):
        a = 2 + _rand_below(rng, n - 3)
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def random_prime(bits: int, rng: np.random.Generator) -> int:
    """Uniformly sampled prime with exactly `bits` bits (Miller-Rabin, 64 rounds)."""
    if bits < 2:
        raise ValueError("need at least 2 bits")
    while True:
        cand = _rand_bits(rng, bits) | (1 << (bits - 1)) | 1
        if miller_rabin(cand, _MR_ROUNDS, rng):
            return cand


def generate(spec: GeneratorSpec) -> Basis:
    """Generate one basis; same spec always yields the same basis."""
    rng = _rng(spec.seed)
    d = spec.d
    if spec.family == "uniform":
        return _resample(lambda: rng.integers(-10, 11, size=(d, d)).tolist())
    if spec.family == "gaussian":
        return _resample(lambda: np.rint(rng.normal(0.0, 5.0, size=(d, d))).astype(np.int64).tolist())
    if spec.family == "qary":
        q = spec.q if spec.q is not None else 1009
        k = spec.k if spec.k is not None else d // 2
        rows = [[0] * d for _ in range(d)]
        for i in range(k):
            rows[i][i] = q
        a = rng.integers(0, q, size=(d - k, k))
        for i in range(d - k):
            row = rows[k + i]
            for j in range(k):
                row[j] = int(a[i, j])
            row[k + i] = 1
        return Basis(rows)
    if spec.family == "goldstein_mayer":
        if spec.q is not None:
            q = spec.q
            if not miller_rabin(q, _MR_ROUNDS, _rng(q)):
                raise ValueError("goldstein_mayer modulus must be prime")
        else:
            q = random_prime(10 * d, rng)
        rows = [[0] * d for _ in range(d)]
        rows[0][0] = q
        for i in range(1, d):
            rows[i][0] = _rand_below(rng, q)
            rows[i][i] = 1
        return Basis(rows)
    raise ValueError(f"unknown family {spec.family!r}")


def _resample(draw) -> Basis:
    for _ in range(_RESAMPLE_CAP):
        try:
            return Basis(draw())
        except RankError:
            continue
    raise RuntimeError(f"no full-rank sample after {_RESAMPLE_CAP} draws")
