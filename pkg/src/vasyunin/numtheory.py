"""Arithmetic functions on 1..N: Möbius, powers of two, Dirichlet algebra.

Sequences are dense and 1-based: ``seq[m]`` is a(m) for 1 <= m <= N.
The closed-form correction coefficient is

    c(2^r * m) = 2^max(r-1, 0) * mu(m),   m odd,

which is the Dirichlet inverse of the alternating sequence (-1)^(m+1).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable

from gmpy2 import mpq

from .rational import rational

__all__ = [
    "ArithSeq",
    "alternating",
    "coeff_closed",
    "delta",
    "dirichlet_convolve",
    "dirichlet_inverse",
    "mobius",
    "mobius_seq",
    "ones",
    "psi_pow2",
    "psi_seq",
    "split_two_adic",
    "weighted_psi_seq",
]


def _check_positive(n: int, name: str = "n") -> int:
    if isinstance(n, bool) or int(n) != n:
        raise TypeError(f"{name} must be an integer")
    n = int(n)
    if n < 1:
        raise ValueError(f"{name} must be a positive integer, got {n}")
    return n


def mobius(n: int) -> int:
    """mu(n) by trial division."""
    n = _check_positive(n)
    sign = 1
    p = 2
    while p * p <= n:
        if n % p == 0:
            n //= p
            if n % p == 0:
                return 0
            sign = -sign
        p += 1 if p == 2 else 2
    if n > 1:
        sign = -sign
    return sign


def psi_pow2(n: int) -> int:
    """1 if n is a power of two (1 included), else 0."""
    n = _check_positive(n)
    return 1 if n & (n - 1) == 0 else 0


def split_two_adic(k: int) -> tuple[int, int]:
    """Return (r, m) with k = 2**r * m and m odd."""
    k = _check_positive(k, "k")
    r = (k & -k).bit_length() - 1
    return r, k >> r


def coeff_closed(k: int) -> int:
    r, m = split_two_adic(k)
    return (1 << max(r - 1, 0)) * mobius(m)


@dataclass(frozen=True)
class ArithSeq:
    """Immutable 1-based sequence of exact rationals a(1..N)."""

    values: tuple

    def __post_init__(self):
        if len(self.values) < 1:
            raise ValueError("an arithmetic sequence needs N >= 1")
        object.__setattr__(self, "values", tuple(rational(v) for v in self.values))

    @classmethod
    def from_function(cls, fn: Callable[[int], object], n: int) -> "ArithSeq":
        n = _check_positive(n, "N")
        return cls(tuple(fn(m) for m in range(1, n + 1)))

    @property
    def N(self) -> int:
        return len(self.values)

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, m: int) -> mpq:
        if not 1 <= m <= len(self.values):
            raise IndexError(f"index {m} outside 1..{len(self.values)}")
        return self.values[m - 1]

    def __iter__(self):
        return iter(self.values)

    def as_ints(self) -> list[int]:
        out = []
        for v in self.values:
            if v.denominator != 1:
                raise ValueError(f"non-integral entry {v}")
            out.append(int(v.numerator))
        return out


def delta(n: int) -> ArithSeq:
    return ArithSeq.from_function(lambda m: 1 if m == 1 else 0, n)


def ones(n: int) -> ArithSeq:
    return ArithSeq.from_function(lambda m: 1, n)


def mobius_seq(n: int) -> ArithSeq:
    return ArithSeq.from_function(mobius, n)


def psi_seq(n: int) -> ArithSeq:
    return ArithSeq.from_function(psi_pow2, n)


def weighted_psi_seq(n: int) -> ArithSeq:
    """m * psi(m): 2^r at m = 2^r, else 0.

    This is the sequence whose convolution with mu gives the correction
    coefficients; the bare indicator psi does not.
    """
    return ArithSeq.from_function(lambda m: m * psi_pow2(m), n)


def alternating(n: int) -> ArithSeq:
    """(-1)^(m+1): 1, -1, 1, -1, ..."""
    return ArithSeq.from_function(lambda m: 1 if m % 2 else -1, n)


def dirichlet_convolve(f: ArithSeq, g: ArithSeq) -> ArithSeq:
    if len(f) != len(g):
        raise ValueError(f"length mismatch: {len(f)} != {len(g)}")
    n = len(f)
    fv, gv = f.values, g.values
    acc = [mpq(0)] * (n + 1)
    for d in range(1, n + 1):
        a = fv[d - 1]
        if not a:
            continue
        for q in range(1, n // d + 1):
            b = gv[q - 1]
            if b:
                acc[d * q] += a * b
    return ArithSeq(tuple(acc[1:]))


def dirichlet_inverse(f: ArithSeq) -> ArithSeq:
    """Inverse under Dirichlet convolution, by the divisor sieve

        g(1) = 1/f(1),  g(m) = -(1/f(1)) * sum_{d | m, d > 1} f(d) g(m/d).
    """
    n = len(f)
    fv = f.values
    f1 = fv[0]
    if f1 == 0:
        raise ZeroDivisionError("f(1) = 0: sequence has no Dirichlet inverse")
    inv_f1 = 1 / f1
    # acc[m] collects sum_{d | m, d > 1} f(d) g(m/d) as each g(q) becomes known
    acc = [mpq(0)] * (n + 1)
    g = [mpq(0)] * (n + 1)
    for q in range(1, n + 1):
        g[q] = ((1 if q == 1 else 0) - acc[q]) * inv_f1
        gq = g[q]
        if not gq:
            continue
        for d in range(2, n // q + 1):
            fd = fv[d - 1]
            if fd:
                acc[d * q] += fd * gq
    return ArithSeq(tuple(g[1:]))


def divisors(m: int) -> Iterable[int]:
    """Divisors of m in increasing order (trial division)."""
    m = _check_positive(m, "m")
    small, large = [], []
    d = 1
    while d * d <= m:
        if m % d == 0:
            small.append(d)
            if d * d != m:
                large.append(m // d)
        d += 1
    return small + large[::-1]
