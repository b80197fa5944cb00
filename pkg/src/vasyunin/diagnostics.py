"""Divergence measurements for correction sequences.

Every infinite-window quantity is reported as an exact truncation over
[1, X] plus a rigorous bound on the omitted tail, so each estimate is an
interval that provably contains the true value.

For the first family, n = 2^r gives c_n = n/2 and

    ||phi_n - phi_{n-1}||_1 = (n/2) int_1^oo f_n dx/x^2 = (ln 2)/2,

independently of r, so the sequence cannot be Cauchy.
"""
from __future__ import annotations

import concurrent.futures
import datetime
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import mpmath
from gmpy2 import mpq

from .corrections import SeedFamily, Witness, build_correction, correction_coefficients, seed
from .natfunc import integrate_weighted, make_natural, norm_weighted, sup_bound
from .numtheory import coeff_closed
from .rational import DEFAULT_PRECISION, to_mpf

__all__ = [
    "DEFAULT_X_SHIFT",
    "DivergenceReport",
    "IntegralDiagnostic",
    "NON_CAUCHY_THRESHOLD",
    "NormEstimate",
    "ReportRow",
    "default_truncation",
    "delta_norm",
    "divergence_constant",
    "divergence_report",
    "identity_audit",
    "integral_diagnostic",
]

DEFAULT_X_SHIFT = 12
NON_CAUCHY_THRESHOLD = mpq(3, 10)


def default_truncation(n: int) -> int:
    return n << DEFAULT_X_SHIFT


def divergence_constant(precision: int = DEFAULT_PRECISION) -> mpmath.mpf:
    """(ln 2)/2."""
    with mpmath.workdps(precision + 10):
        return mpmath.log(2) / 2


@dataclass(frozen=True)
class NormEstimate:
    """Exact value over [1, X]; the full-window value lies within tail_bound."""

    truncated: mpq
    X: int
    tail_bound: mpq
    precision: int = DEFAULT_PRECISION

    @property
    def lower(self) -> mpq:
        return self.truncated - self.tail_bound

    @property
    def upper(self) -> mpq:
        return self.truncated + self.tail_bound

    @property
    def decimal(self) -> mpmath.mpf:
        return to_mpf(self.truncated, self.precision)

    def contains(self, value, slack=0) -> bool:
        """Whether a real ``value`` lies in the interval (widened by slack)."""
        with mpmath.workdps(self.precision + 10):
            gap = abs(mpmath.mpf(value) - self.decimal)
            return bool(gap <= to_mpf(self.tail_bound, self.precision) + slack)


@dataclass(frozen=True)
class IntegralDiagnostic:
    """int_1^oo (phi_n - 1) dx/x^2: closed form (first family only) and bounds."""

    n: int
    closed_form: Optional[mpmath.mpf]
    truncated: mpq
    X: int
    tail_bound: mpq
    precision: int = DEFAULT_PRECISION

    def consistent(self) -> Optional[bool]:
        if self.closed_form is None:
            return None
        with mpmath.workdps(self.precision + 10):
            gap = abs(self.closed_form - to_mpf(self.truncated, self.precision))
            return bool(gap <= to_mpf(self.tail_bound, self.precision))


def _check_x(n: int, X: int) -> int:
    X = int(X)
    if X < n:
        raise ValueError(f"truncation point X={X} is below n={n}")
    return X


def delta_norm(family, n: int, X: Optional[int] = None,
               precision: int = DEFAULT_PRECISION) -> NormEstimate:
    """||phi_n - phi_{n-1}||_1 = ||c_n seed_n||_1 on [1, X] with tail bound."""
    family = SeedFamily.parse(family)
    if n < 2:
        raise ValueError("delta_norm needs n >= 2")
    X = _check_x(n, default_truncation(n) if X is None else X)
    c_n = correction_coefficients(family, n)[-1]
    s = seed(family, n)
    if c_n == 0:
        return NormEstimate(mpq(0), X, mpq(0), precision)
    diff = make_natural({a: c_n * w for a, w in s.terms.items()})
    truncated = norm_weighted(diff, 0, 1, 1, X)
    tail = abs(c_n) * sup_bound(s) / X
    return NormEstimate(truncated, X, tail, precision)


def integral_diagnostic(family, n: int, X: Optional[int] = None,
                        precision: int = DEFAULT_PRECISION) -> IntegralDiagnostic:
    """I_n = int_1^oo (phi_n(x) - 1) dx/x^2.

    First family closed form, from int_1^oo f_k dx/x^2 = (ln 2)/k:
    I_n = ln 2 * sum_{k<=n} c_k/k - 1.
    """
    family = SeedFamily.parse(family)
    if n < 1:
        raise ValueError("n must be >= 1")
    X = _check_x(n, default_truncation(n) if X is None else X)
    corr = build_correction(family, n)
    truncated = integrate_weighted(corr.phi, 1, X) - (1 - mpq(1, X))
    tail = (1 + sup_bound(corr.phi)) / X
    closed = None
    if family is SeedFamily.FIRST:
        weight = sum((c / k for k, c in enumerate(corr.coeffs, start=1)), mpq(0))
        with mpmath.workdps(precision + 10):
            closed = mpmath.log(2) * to_mpf(weight, precision) - 1
    return IntegralDiagnostic(n, closed, truncated, X, tail, precision)


def integral_jump_factor(family, n: int) -> mpq:
    """Exact rational r with I_n - I_{n-1} = r * ln 2 (first family): c_n / n."""
    if SeedFamily.parse(family) is not SeedFamily.FIRST:
        raise ValueError("closed-form integral differences exist only for the first family")
    return correction_coefficients(family, n)[-1] / n


@dataclass(frozen=True)
class ReportRow:
    n: int
    c_n: mpq
    delta_l1: NormEstimate
    integral: IntegralDiagnostic


@dataclass
class DivergenceReport:
    family: SeedFamily
    n_max: int
    rows: list
    initial_integral: IntegralDiagnostic
    x_policy: str
    precision: int
    non_cauchy: Optional[bool]
    timestamp: Optional[str] = None

    def row(self, n: int) -> ReportRow:
        return self.rows[n - 2]


def _row(args) -> ReportRow:
    family, n, X, precision = args
    c_n = correction_coefficients(family, n)[-1]
    return ReportRow(
        n=n,
        c_n=c_n,
        delta_l1=delta_norm(family, n, X, precision),
        integral=integral_diagnostic(family, n, X, precision),
    )


def _non_cauchy(rows: Sequence[ReportRow], n_max: int) -> bool:
    powers = [1 << r for r in range(1, n_max.bit_length()) if 1 << r <= n_max]
    by_n = {row.n: row for row in rows}
    return bool(powers) and all(by_n[p].delta_l1.lower >= NON_CAUCHY_THRESHOLD for p in powers)


def divergence_report(family, n_max: int, X: Optional[int] = None,
                      precision: int = DEFAULT_PRECISION, workers: int = 1,
                      stamp: bool = False) -> DivergenceReport:
    """Rows for 2 <= n <= n_max, truncated at X (default n * 2^12 per row).

    With ``workers > 1`` rows are computed in a process pool; the row order
    is by n either way.
    """
    family = SeedFamily.parse(family)
    if n_max < 2:
        raise ValueError("n_max must be >= 2")
    if X is not None and X < n_max:
        raise ValueError(f"fixed truncation X={X} is below n_max={n_max}")
    correction_coefficients(family, n_max)
    jobs = [(family, n, X, precision) for n in range(2, n_max + 1)]
    if workers > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_row, jobs))
    else:
        rows = [_row(job) for job in jobs]
    flag = _non_cauchy(rows, n_max) if family is SeedFamily.FIRST else None
    policy = f"X={X}" if X is not None else f"X=n*2^{DEFAULT_X_SHIFT}"
    return DivergenceReport(
        family=family,
        n_max=n_max,
        rows=rows,
        initial_integral=integral_diagnostic(family, 1, X, precision),
        x_policy=policy,
        precision=precision,
        non_cauchy=flag,
        timestamp=datetime.datetime.now(datetime.timezone.utc).isoformat() if stamp else None,
    )


def identity_audit(N: int, coeff: Callable[[int], object] = coeff_closed) -> Witness:
    """sum_{k | m} c_k (-1)^(m/k + 1) == delta(m) for every m <= N.

    ``coeff`` defaults to the closed form; pass a mutated version for a
    negative control.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    acc = [0] * (N + 1)
    for k in range(1, N + 1):
        c = coeff(k)
        if not c:
            continue
        for q in range(1, N // k + 1):
            acc[k * q] += c if q % 2 else -c
    for m in range(1, N + 1):
        want = 1 if m == 1 else 0
        if acc[m] != want:
            return Witness(False, "identity_audit", m, acc[m], want)
    return Witness(True, "identity_audit", detail=f"N={N}")
