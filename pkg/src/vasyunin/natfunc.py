"""Finite combinations of dilated floor functions, sum_a alpha_a [x/a].

Everything here is exact.  A combination is *zero-sum* when
sum_a alpha_a / a == 0; it is then bounded by sum_a |alpha_a| and periodic
with period lcm(a).  Integrals over (X, oo) are never evaluated
symbolically: `integral_to_infinity` returns a closed form together with an
exact truncation and a rigorous tail bound.

The weighted integral of a single floor term has the closed form

    int_A^B [x/a] dx/x^2 = (H(floor(B/a)) - H(floor(A/a))) / a
                           - floor(B/a)/B + floor(A/a)/A,

with H the harmonic numbers, which `integrate_weighted` uses by default.
The plain interval-by-interval sum is kept as ``method="pieces"``.
"""
from __future__ import annotations

import bisect
import math
import threading
from collections import OrderedDict
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional

import mpmath
import numpy as np
from gmpy2 import mpq, mpz

from .rational import DEFAULT_PRECISION, rational

__all__ = [
    "InfiniteIntegral",
    "NaturalFunction",
    "StepProfile",
    "ZERO",
    "add_scaled",
    "evaluate",
    "harmonic",
    "integral_to_infinity",
    "integrate_weighted",
    "jump_at",
    "make_natural",
    "norm_weighted",
    "period",
    "profile",
    "sup_bound",
]

_INT64_SAFE = 1 << 62


@dataclass(frozen=True, eq=False)
class NaturalFunction:
    """Canonical sparse form: one nonzero coefficient per denominator."""

    terms: Mapping[int, mpq]
    certified_zero_sum: bool

    def __eq__(self, other):
        if not isinstance(other, NaturalFunction):
            return NotImplemented
        return dict(self.terms) == dict(other.terms)

    def __hash__(self):
        return hash(tuple(sorted(self.terms.items())))

    def __call__(self, x) -> mpq:
        return evaluate(self, x)

    def __repr__(self):
        body = ", ".join(f"{a}: {c}" for a, c in sorted(self.terms.items()))
        return f"NaturalFunction({{{body}}}, zero_sum={self.certified_zero_sum})"

    @property
    def denominators(self) -> list[int]:
        return sorted(self.terms)

    @property
    def max_denominator(self) -> int:
        return max(self.terms, default=1)

    def coefficient(self, a: int) -> mpq:
        return self.terms.get(a, mpq(0))

    def is_zero(self) -> bool:
        return not self.terms


def _freeze(acc: dict) -> NaturalFunction:
    terms = {a: c for a, c in sorted(acc.items()) if c}
    zero_sum = sum((c / a for a, c in terms.items()), mpq(0)) == 0
    return NaturalFunction(terms, zero_sum)


def make_natural(terms: Iterable[tuple[int, object]] | Mapping[int, object] = ()) -> NaturalFunction:
    """Merge (denominator, coefficient) pairs into canonical form.

    The zero-sum flag is set by an exact test, never taken on trust.
    """
    if isinstance(terms, Mapping):
        terms = terms.items()
    acc: dict[int, mpq] = {}
    for a, c in terms:
        if isinstance(a, bool) or int(a) != a:
            raise TypeError(f"denominator must be an integer, got {a!r}")
        a = int(a)
        if a < 1:
            raise ValueError(f"denominators must be positive, got {a}")
        acc[a] = acc.get(a, mpq(0)) + rational(c)
    return _freeze(acc)


ZERO = make_natural()


def add_scaled(phi: NaturalFunction, psi: NaturalFunction, lam=1) -> NaturalFunction:
    """phi + lam * psi."""
    lam = rational(lam)
    acc = dict(phi.terms)
    if lam:
        for a, c in psi.terms.items():
            acc[a] = acc.get(a, mpq(0)) + lam * c
    if phi.certified_zero_sum and psi.certified_zero_sum:
        terms = {a: c for a, c in sorted(acc.items()) if c}
        return NaturalFunction(terms, True)
    return _freeze(acc)


def _nonnegative(x, name="x") -> mpq:
    x = rational(x)
    if x < 0:
        raise ValueError(f"{name} must be nonnegative, got {x}")
    return x


def _floor_div(x: mpq, a: int) -> mpz:
    # floor(x / a) for x = p/q: Euclidean division of p by q*a
    return x.numerator // (x.denominator * a)


def evaluate(phi: NaturalFunction, x) -> mpq:
    x = _nonnegative(x)
    total = mpq(0)
    for a, c in phi.terms.items():
        k = _floor_div(x, a)
        if k:
            total += c * k
    return total


def jump_at(phi: NaturalFunction, m: int) -> mpq:
    """phi(m) - phi(m-): the sum of alpha_a over a dividing m."""
    if isinstance(m, bool) or int(m) != m or m < 1:
        raise ValueError(f"jump location must be a positive integer, got {m!r}")
    m = int(m)
    return sum((c for a, c in phi.terms.items() if m % a == 0), mpq(0))


def sup_bound(phi: NaturalFunction) -> mpq:
    """sum |alpha_a|; bounds |phi| everywhere when phi is zero-sum."""
    return sum((abs(c) for c in phi.terms.values()), mpq(0))


def _require_zero_sum(phi: NaturalFunction, what: str) -> None:
    if not phi.certified_zero_sum:
        raise ValueError(f"{what} requires a zero-sum natural function")


def period(phi: NaturalFunction) -> int:
    _require_zero_sum(phi, "period")
    return math.lcm(*phi.terms) if phi.terms else 1


@dataclass(frozen=True)
class StepProfile:
    """Values of a step function on [m, m+1), m = 0..horizon-1.

    Stored as integer numerators over one common denominator so long
    profiles stay cheap; ``values`` gives the exact rationals.
    """

    numerators: np.ndarray
    denominator: int
    horizon: int
    period: Optional[int] = None

    def __len__(self):
        return self.horizon

    def __getitem__(self, m: int) -> mpq:
        return mpq(int(self.numerators[m]), self.denominator)

    @property
    def values(self) -> list[mpq]:
        d = self.denominator
        return [mpq(int(v), d) for v in self.numerators]

    def value_set(self) -> set:
        return {mpq(int(v), self.denominator) for v in np.unique(self.numerators)}


def profile(phi: NaturalFunction, horizon: int) -> StepProfile:
    if horizon < 0:
        raise ValueError("horizon must be nonnegative")
    horizon = int(horizon)
    den = math.lcm(*(int(c.denominator) for c in phi.terms.values())) if phi.terms else 1
    nums = {a: int(c.numerator) * (den // int(c.denominator)) for a, c in phi.terms.items()}
    magnitude = sum(abs(n) * (horizon // a + 1) for a, n in nums.items())
    dtype = np.int64 if magnitude < _INT64_SAFE else object
    m = np.arange(horizon, dtype=np.int64)
    out = np.zeros(horizon, dtype=dtype)
    for a, n in nums.items():
        if a >= horizon:
            # [m/a] vanishes on the whole window
            continue
        q = m // a
        out += (q if dtype is np.int64 else q.astype(object)) * n
    per = period(phi) if phi.certified_zero_sum else None
    return StepProfile(out, den, horizon, per)


# ---------------------------------------------------------------- harmonic


def _harmonic_range(lo: int, hi: int) -> tuple[mpz, mpz]:
    """sum_{m=lo}^{hi} 1/m as an unreduced pair (p, q), binary splitting."""
    if hi - lo < 32:
        p, q = mpz(0), mpz(1)
        for m in range(lo, hi + 1):
            p = p * m + q
            q *= m
        return p, q
    mid = (lo + hi) // 2
    p1, q1 = _harmonic_range(lo, mid)
    p2, q2 = _harmonic_range(mid + 1, hi)
    return p1 * q2 + p2 * q1, q1 * q2


class _HarmonicCache:
    """Bounded LRU of exact harmonic numbers.

    A new H(K) is built on the nearest cached H(K') with K' < K, so
    sweeps over many K pay for each range of 1/m only once.  The cache only
    affects speed; values are the same with or without it.
    """

    def __init__(self, maxsize: int = 256):
        self.maxsize = maxsize
        self._lock = threading.Lock()
        self._data: OrderedDict[int, mpq] = OrderedDict()
        self._keys: list[int] = []

    def get(self, k: int) -> mpq:
        if k <= 0:
            return mpq(0)
        with self._lock:
            hit = self._data.get(k)
            if hit is not None:
                self._data.move_to_end(k)
                return hit
            i = bisect.bisect_left(self._keys, k)
            base_k = self._keys[i - 1] if i else 0
            base = self._data[base_k] if base_k else mpq(0)
        p, q = _harmonic_range(base_k + 1, k)
        value = base + mpq(p, q)
        with self._lock:
            if k not in self._data:
                self._data[k] = value
                bisect.insort(self._keys, k)
                while len(self._data) > self.maxsize:
                    old, _ = self._data.popitem(last=False)
                    self._keys.remove(old)
        return value

    def clear(self):
        with self._lock:
            self._data.clear()
            self._keys.clear()


_HARMONIC = _HarmonicCache()


def harmonic(k: int) -> mpq:
    """H(k) = 1 + 1/2 + ... + 1/k exactly; H(0) = 0."""
    return _HARMONIC.get(int(k))


# ------------------------------------------------------------- integration


def _tree_sum(values: list[mpq]) -> mpq:
    # pairwise summation keeps operand sizes balanced for big denominators
    if not values:
        return mpq(0)
    while len(values) > 1:
        nxt = [values[i] + values[i + 1] for i in range(0, len(values) - 1, 2)]
        if len(values) % 2:
            nxt.append(values[-1])
        values = nxt
    return values[0]


def _window(A, B) -> tuple[mpq, mpq]:
    A, B = rational(A), rational(B)
    if A < 0:
        raise ValueError(f"window start must be nonnegative, got {A}")
    if A > B:
        raise ValueError(f"empty window: A={A} > B={B}")
    return A, B


def _integrate_harmonic(phi: NaturalFunction, A: mpq, B: mpq) -> mpq:
    parts = []
    for a, c in phi.terms.items():
        kb = _floor_div(B, a)
        if kb == 0:
            continue
        ka = _floor_div(A, a)
        h = harmonic(kb) - harmonic(ka)
        part = h / a - kb / B
        if ka:
            part += ka / A
        parts.append(c * part)
    return _tree_sum(parts)


def _integrate_pieces(phi: NaturalFunction, A: mpq, B: mpq) -> mpq:
    lo = math.ceil(A)
    hi = math.floor(B)
    cuts = [A] + [mpq(m) for m in range(lo, hi + 1) if A < m < B] + [B]
    parts = []
    for left, right in zip(cuts, cuts[1:]):
        v = evaluate(phi, left)
        if not v:
            continue
        if left == 0:
            raise ValueError("integral diverges: function is nonzero at 0")
        parts.append(v * (1 / left - 1 / right))
    return _tree_sum(parts)


def integrate_weighted(phi: NaturalFunction, A, B, method: str = "harmonic") -> mpq:
    """Exact int_A^B phi(x) dx / x^2 for 0 <= A <= B."""
    A, B = _window(A, B)
    if A == B:
        return mpq(0)
    if A == 0 and evaluate(phi, 0) != 0:
        raise ValueError("integral diverges: function is nonzero on [0, 1)")
    if method == "harmonic":
        return _integrate_harmonic(phi, A, B)
    if method == "pieces":
        return _integrate_pieces(phi, A, B)
    raise ValueError(f"unknown integration method {method!r}")


def _breakpoints(phi: NaturalFunction, A: mpq, B: mpq) -> list[mpq]:
    points = {A, B}
    for a in phi.terms:
        first = math.floor(A / a) + 1
        last = math.ceil(B / a) - 1
        for k in range(first, last + 1):
            points.add(mpq(k * a))
    return sorted(points)


def norm_weighted(phi: NaturalFunction, ref, p: int, A, B) -> mpq:
    """Exact int_A^B |phi(x) - ref|^p dx / x^2 over 1 <= A <= B.

    The integrand can only change where some [x/a] jumps, so the window is
    cut at multiples of the denominators rather than at every integer.
    """
    if p not in (1, 2):
        raise ValueError("p must be 1 or 2")
    ref = rational(ref)
    A, B = _window(A, B)
    if A < 1:
        raise ValueError("norm windows start at 1 or later")
    cuts = _breakpoints(phi, A, B)
    parts = []
    for left, right in zip(cuts, cuts[1:]):
        v = abs(evaluate(phi, left) - ref) ** p
        if v:
            parts.append(v * (right - left) / (left * right))
    return _tree_sum(parts)


@dataclass(frozen=True)
class InfiniteIntegral:
    """int_1^oo phi dx/x^2 as closed form plus exact truncation and tail bound."""

    closed_form: mpmath.mpf
    truncated: mpq
    tail_bound: mpq
    X: int
    precision: int = DEFAULT_PRECISION

    def consistent(self) -> bool:
        """|closed_form - truncated| <= tail_bound, checked at working precision."""
        with mpmath.workdps(self.precision + 10):
            gap = abs(self.closed_form - mpmath.mpf(int(self.truncated.numerator)) / int(self.truncated.denominator))
            bound = mpmath.mpf(int(self.tail_bound.numerator)) / int(self.tail_bound.denominator)
            return bool(gap <= bound)


def log_closed_form(phi: NaturalFunction, precision: int = DEFAULT_PRECISION) -> mpmath.mpf:
    """-sum_a alpha_a ln(a) / a."""
    with mpmath.workdps(precision + 10):
        total = mpmath.mpf(0)
        for a, c in phi.terms.items():
            if a > 1:
                total -= mpmath.mpf(int(c.numerator)) / int(c.denominator) * mpmath.log(a) / a
        return +total


def integral_to_infinity(phi: NaturalFunction, X: int = 1 << 16,
                         precision: int = DEFAULT_PRECISION) -> InfiniteIntegral:
    _require_zero_sum(phi, "integral_to_infinity")
    X = int(X)
    if X < 1:
        raise ValueError("truncation point must be >= 1")
    truncated = integrate_weighted(phi, 1, X)
    tail = sup_bound(phi) / X
    return InfiniteIntegral(log_closed_form(phi, precision), truncated, tail, X, precision)
