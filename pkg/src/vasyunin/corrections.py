"""Seed families, the correction recurrence and canonical forms.

A correction of length n is phi_n = sum_{k<=n} c_k seed_k, with

    c_n = 1 - sum_{k<n} c_k seed_k(n),

so that phi_n == 1 on [1, n+1).  Three seed families are supported:

    FIRST   [x/n] - 2[x/2n]
    SECOND  [x/n] - [x/(n+1)] - [x/n(n+1)]
    THIRD   [x/n] - [x/(n+1)] - [x/2n] + [x/2(n+1)] - [x/2n(n+1)]
"""
from __future__ import annotations

import enum
import threading
from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np
from gmpy2 import mpq

from .natfunc import (
    NaturalFunction,
    ZERO,
    add_scaled,
    make_natural,
    period,
    profile,
)
from .numtheory import mobius

__all__ = [
    "Correction",
    "SeedFamily",
    "Witness",
    "build_correction",
    "correction_coefficients",
    "idempotency_check",
    "iter_corrections",
    "leading_coefficients_check",
    "seed",
    "seed_idempotency_check",
    "seed_values_at",
    "to_canonical",
    "verify_plateau",
]


class SeedFamily(enum.Enum):
    FIRST = "first"
    SECOND = "second"
    THIRD = "third"

    @classmethod
    def parse(cls, tag) -> "SeedFamily":
        if isinstance(tag, cls):
            return tag
        try:
            return cls(str(tag).lower())
        except ValueError:
            raise ValueError(f"unknown seed family {tag!r}; expected first, second or third") from None

    def seed_terms(self, n: int) -> list[tuple[int, int]]:
        """(denominator, coefficient) pairs of the n-th seed, before merging."""
        if self is SeedFamily.FIRST:
            return [(n, 1), (2 * n, -2)]
        if self is SeedFamily.SECOND:
            return [(n, 1), (n + 1, -1), (n * (n + 1), -1)]
        return [(n, 1), (n + 1, -1), (2 * n, -1), (2 * (n + 1), 1), (2 * n * (n + 1), -1)]


def _positive(n, name="n") -> int:
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise ValueError(f"{name} must be a positive integer, got {n!r}")
    return int(n)


def seed(family, n: int) -> NaturalFunction:
    family = SeedFamily.parse(family)
    n = _positive(n)
    f = make_natural(family.seed_terms(n))
    if not f.certified_zero_sum:
        raise AssertionError(f"{family.value} seed {n} is not zero-sum")
    return f


def seed_values_at(family, ks: np.ndarray, x: int) -> np.ndarray:
    """seed_k(x) for an integer array of k, vectorised over k."""
    family = SeedFamily.parse(family)
    ks = np.asarray(ks, dtype=np.int64)
    if family is SeedFamily.FIRST:
        return x // ks - 2 * (x // (2 * ks))
    k1 = ks + 1
    if family is SeedFamily.SECOND:
        return x // ks - x // k1 - x // (ks * k1)
    return x // ks - x // k1 - x // (2 * ks) + x // (2 * k1) - x // (2 * ks * k1)


class _CoefficientTable:
    """Longest coefficient prefix computed so far, per family.

    Coefficients of phi_n are a prefix of those of phi_{n+1}, so one growing
    list serves every n.  Purely a speed-up; guarded for concurrent use.
    """

    def __init__(self):
        self._lock = threading.Lock()
        self._table: dict[SeedFamily, list[int]] = {}

    def get(self, family: SeedFamily, n: int) -> list[int]:
        with self._lock:
            coeffs = self._table.setdefault(family, [])
            if len(coeffs) < n:
                _extend(family, coeffs, n)
            return coeffs[:n]


def _extend(family: SeedFamily, coeffs: list[int], n: int) -> None:
    safe = all(abs(c) < 1 << 40 for c in coeffs)
    arr = np.array(coeffs, dtype=np.int64 if safe else object)
    for m in range(len(coeffs) + 1, n + 1):
        if int(seed_values_at(family, [m], m)[0]) != 1:
            raise ValueError(f"{family.value} seed {m} does not equal 1 at x = {m}; "
                             "the recurrence is ill-posed for this family")
        s = seed_values_at(family, np.arange(1, m, dtype=np.int64), m)
        if safe:
            c = 1 - int(np.dot(arr[: m - 1], s))
        else:
            c = 1 - sum(int(a) * int(b) for a, b in zip(arr[: m - 1], s) if b)
        coeffs.append(c)
        if safe and abs(c) >= 1 << 40:
            safe = False
            arr = np.array(coeffs, dtype=object)
        else:
            arr = np.append(arr, np.array([c], dtype=arr.dtype))


_COEFFICIENTS = _CoefficientTable()


def correction_coefficients(family, n: int) -> list[mpq]:
    """c_1..c_n from the recurrence, as exact rationals."""
    family = SeedFamily.parse(family)
    n = _positive(n)
    return [mpq(c) for c in _COEFFICIENTS.get(family, n)]


@dataclass(frozen=True)
class Correction:
    family: SeedFamily
    n: int
    coeffs: tuple
    phi: NaturalFunction

    def c(self, k: int) -> mpq:
        """1-based coefficient access."""
        if not 1 <= k <= self.n:
            raise IndexError(f"coefficient index {k} outside 1..{self.n}")
        return self.coeffs[k - 1]


def _assemble(family: SeedFamily, coeffs) -> NaturalFunction:
    acc: dict[int, mpq] = {}
    for k, c in enumerate(coeffs, start=1):
        if not c:
            continue
        for a, w in family.seed_terms(k):
            acc[a] = acc.get(a, mpq(0)) + c * w
    return make_natural(acc)


def build_correction(family, n: int) -> Correction:
    family = SeedFamily.parse(family)
    coeffs = tuple(correction_coefficients(family, n))
    if family is SeedFamily.FIRST and any(c.denominator != 1 for c in coeffs):
        raise AssertionError("first-family coefficients must be integers")
    phi = _assemble(family, coeffs)
    return Correction(family, n, coeffs, phi)


def iter_corrections(family, n_max: int) -> Iterator[Correction]:
    """phi_1, phi_2, ... built incrementally by phi_n = phi_{n-1} + c_n seed_n."""
    family = SeedFamily.parse(family)
    coeffs = correction_coefficients(family, n_max)
    phi = ZERO
    for n in range(1, n_max + 1):
        phi = add_scaled(phi, seed(family, n), coeffs[n - 1])
        yield Correction(family, n, tuple(coeffs[:n]), phi)


@dataclass(frozen=True)
class Witness:
    """Outcome of a check: ``ok`` or the first failing index and value."""

    ok: bool
    name: str
    index: Optional[int] = None
    value: Optional[object] = None
    expected: Optional[object] = None
    detail: str = ""

    def __bool__(self):
        return self.ok


def verify_plateau(corr: Correction) -> Witness:
    """v_0 = 0 and v_m = 1 for 1 <= m <= n."""
    prof = profile(corr.phi, corr.n + 1)
    values = prof.values
    if values[0] != 0:
        return Witness(False, "plateau", 0, values[0], mpq(0))
    for m in range(1, corr.n + 1):
        if values[m] != 1:
            return Witness(False, "plateau", m, values[m], mpq(1))
    return Witness(True, "plateau", detail=f"{corr.family.value} n={corr.n}")


def to_canonical(corr: Correction) -> NaturalFunction:
    """First family only: sum_{k<=n} mu(k)[x/k] - 2 sum_{n/2<k<=n} c_k [x/2k]."""
    if corr.family is not SeedFamily.FIRST:
        raise ValueError("the canonical formula is specific to the first family; "
                         "expand other families with add_scaled")
    n = corr.n
    terms = [(k, mobius(k)) for k in range(1, n + 1)]
    terms += [(2 * k, -2 * corr.c(k)) for k in range(n // 2 + 1, n + 1)]
    return make_natural(terms)


def leading_coefficients_check(corr: Correction) -> Witness:
    """Canonical coefficient at every denominator k <= n equals mu(k)."""
    for k in range(1, corr.n + 1):
        got = corr.phi.coefficient(k)
        if got != mobius(k):
            return Witness(False, "leading_coefficients", k, got, mobius(k))
    return Witness(True, "leading_coefficients", detail=f"{corr.family.value} n={corr.n}")


def idempotency_check(f: NaturalFunction, name: str = "idempotency") -> Witness:
    """f takes only the values 0 and 1 over one full period."""
    prof = profile(f, period(f))
    bad = np.nonzero((prof.numerators != 0) & (prof.numerators != prof.denominator))[0]
    if len(bad):
        m = int(bad[0])
        return Witness(False, name, m, prof[m], "0 or 1")
    return Witness(True, name, detail=f"period={prof.horizon}")


def seed_idempotency_check(family, n: int) -> Witness:
    family = SeedFamily.parse(family)
    w = idempotency_check(seed(family, n))
    if w.ok:
        return Witness(True, "idempotency", detail=f"{family.value} n={n} {w.detail}")
    return w
