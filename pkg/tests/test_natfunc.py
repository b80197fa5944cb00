import random
from fractions import Fraction

import mpmath
import pytest
from gmpy2 import mpq
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from vasyunin.natfunc import (
    ZERO,
    add_scaled,
    evaluate,
    harmonic,
    integral_to_infinity,
    integrate_weighted,
    jump_at,
    make_natural,
    norm_weighted,
    period,
    profile,
    sup_bound,
)

f1 = make_natural([(1, 1), (2, -2)])
f2 = make_natural([(2, 1), (4, -2)])
f3 = make_natural([(3, 1), (6, -2)])
f5 = make_natural([(5, 1), (10, -2)])
phi2 = add_scaled(f1, f2, 1)


def first(n):
    return make_natural([(n, 1), (2 * n, -2)])


def random_zero_sum(rng, max_den=30, max_coeff=5):
    """Integer coefficients in [-max_coeff, max_coeff], last one solved for zero-sum."""
    while True:
        dens = rng.sample(range(1, max_den + 1), rng.randint(2, 6))
        coeffs = [rng.choice([c for c in range(-max_coeff, max_coeff + 1) if c]) for _ in dens[:-1]]
        last = -dens[-1] * sum(Fraction(c, a) for c, a in zip(coeffs, dens))
        if last.denominator == 1 and last and abs(last) <= max_coeff:
            return make_natural(list(zip(dens, coeffs + [int(last)])))


# ------------------------------------------------------------ construction


def test_make_natural_examples():
    assert f1.terms == {1: 1, 2: -2} and f1.certified_zero_sum
    one = make_natural([(1, 1)])
    assert not one.certified_zero_sum
    z = make_natural([(2, 1), (2, -1)])
    assert z.is_zero() and z.certified_zero_sum and z == ZERO


def test_make_natural_rejects_bad_denominators():
    with pytest.raises(ValueError):
        make_natural([(0, 1)])
    with pytest.raises(TypeError):
        make_natural([(1.5, 1)])


def test_empty_is_zero_sum():
    assert ZERO.certified_zero_sum and ZERO.terms == {}


def test_add_scaled_examples():
    assert add_scaled(f1, f1, -1) == ZERO
    assert phi2.terms == {1: 1, 2: -1, 4: -2}
    assert add_scaled(ZERO, f3, 5).terms == {3: 5, 6: -10}
    mixed = add_scaled(f1, make_natural([(1, 1)]), 1)
    assert not mixed.certified_zero_sum


# ------------------------------------------------------------ evaluation


def test_evaluate_examples():
    assert evaluate(f1, mpq(3, 2)) == 1
    assert evaluate(f1, mpq(1, 2)) == 0
    assert evaluate(phi2, 4) == 0
    with pytest.raises(ValueError):
        evaluate(f1, -1)


def test_evaluate_matches_fraction_oracle():
    rng = random.Random(3)
    for _ in range(20):
        phi = random_zero_sum(rng)
        for _ in range(20):
            x = Fraction(rng.randint(0, 4000), rng.randint(1, 50))
            assert evaluate(phi, x) == oracles.floor_sum(phi.terms, x)


def test_jump_examples():
    for n in (1, 2, 7):
        assert jump_at(add_scaled(f1, first(n), 0), 1) == 1
    assert jump_at(f1, 2) == -1
    assert jump_at(f5, 3) == 0
    with pytest.raises(ValueError):
        jump_at(f1, 0)


def test_period_examples():
    assert period(f1) == 2
    assert [evaluate(f1, m) for m in range(6)] == [0, 1, 0, 1, 0, 1]
    g2 = make_natural([(2, 1), (3, -1), (6, -1)])
    assert period(g2) == 6
    assert period(ZERO) == 1
    with pytest.raises(ValueError):
        period(make_natural([(1, 1)]))


def test_profile_examples():
    p = profile(f1, 4)
    assert p.values == [0, 1, 0, 1] and p.period == 2
    assert profile(ZERO, 3).values == [0, 0, 0]
    assert profile(f2, 5).values == [0, 0, 1, 1, 0]
    assert profile(f1, 0).values == []
    assert profile(make_natural([(1, 1)]), 3).period is None


def test_profile_rational_coefficients():
    phi = make_natural([(1, Fraction(1, 3)), (2, Fraction(-2, 3)), (5, Fraction(7, 2))])
    p = profile(phi, 40)
    assert p.values == [oracles.floor_sum(phi.terms, m) for m in range(40)]


def test_profile_switches_to_python_ints_on_overflow():
    big = 1 << 70
    phi = make_natural([(1, big), (2, -2 * big)])
    p = profile(phi, 6)
    assert p.values == [0, big, 0, big, 0, big]


# ------------------------------------------------------------ integration


def test_integrate_examples():
    assert integrate_weighted(f1, 1, 2) == mpq(1, 2)
    assert integrate_weighted(f1, 1, 4) == mpq(7, 12)
    assert integrate_weighted(f1, mpq(5, 3), mpq(5, 3)) == 0
    with pytest.raises(ValueError):
        integrate_weighted(f1, 3, 2)
    with pytest.raises(ValueError):
        integrate_weighted(f1, -1, 2)


def test_integrate_from_zero_is_finite():
    # every denominator is >= 1 so the function vanishes on [0, 1)
    assert integrate_weighted(f1, 0, 4) == integrate_weighted(f1, 1, 4)


def test_harmonic_numbers():
    assert harmonic(0) == 0
    assert harmonic(1) == 1
    assert harmonic(4) == mpq(25, 12)
    assert harmonic(100) == sum(Fraction(1, m) for m in range(1, 101))
    # served from a smaller cached value
    harmonic(300)
    assert harmonic(301) == harmonic(300) + mpq(1, 301)


@pytest.mark.parametrize("method", ["harmonic", "pieces"])
def test_both_integration_routes_match_fraction_oracle(method):
    rng = random.Random(11)
    for _ in range(25):
        phi = random_zero_sum(rng, max_den=12)
        a = Fraction(rng.randint(0, 300), rng.randint(1, 9))
        b = a + Fraction(rng.randint(0, 300), rng.randint(1, 9))
        assert integrate_weighted(phi, a, b, method=method) == oracles.weighted_integral(phi.terms, a, b)


def test_integrate_non_zero_sum_function():
    floor_x = make_natural([(1, 1)])
    # int_1^3 [x] dx/x^2 = (1 - 1/2) + 2 (1/2 - 1/3)
    assert integrate_weighted(floor_x, 1, 3) == mpq(5, 6)
    assert integrate_weighted(floor_x, 1, 3, method="pieces") == mpq(5, 6)


def test_unknown_method():
    with pytest.raises(ValueError):
        integrate_weighted(f1, 1, 2, method="simpson")


@settings(max_examples=60, deadline=None)
@given(
    st.fractions(min_value=0, max_value=200, max_denominator=12),
    st.fractions(min_value=0, max_value=200, max_denominator=12),
    st.fractions(min_value=0, max_value=200, max_denominator=12),
)
def test_window_additivity(a, b, c):
    A, B, C = sorted((a, b, c))
    phi = make_natural([(1, 2), (3, -3), (4, 5), (12, -7)])
    assert integrate_weighted(phi, A, C) == integrate_weighted(phi, A, B) + integrate_weighted(phi, B, C)


@settings(max_examples=60, deadline=None)
@given(st.fractions(min_value=0, max_value=500, max_denominator=30),
       st.fractions(min_value=-20, max_value=20, max_denominator=7))
def test_linearity(x, lam):
    phi = make_natural([(1, 1), (2, -2), (7, 3)])
    psi = make_natural([(3, 4), (5, Fraction(-1, 2))])
    assert evaluate(add_scaled(phi, psi, lam), x) == evaluate(phi, x) + lam * evaluate(psi, x)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 100), st.fractions(min_value=0, max_value=10_000, max_denominator=97))
def test_dilation_identity(n, x):
    assert evaluate(first(n), x) == evaluate(f1, Fraction(x) / n)


def test_periodicity_and_boundedness():
    rng = random.Random(5)
    for _ in range(10):
        phi = random_zero_sum(rng)
        P = period(phi)
        bound = sup_bound(phi)
        for _ in range(1000):
            x = Fraction(rng.randint(0, 10**7), rng.randint(1, 60))
            v = evaluate(phi, x)
            assert abs(v) <= bound
            assert evaluate(phi, x + P) == v


def test_boundedness_ten_thousand_points():
    rng = random.Random(9)
    phi = random_zero_sum(rng)
    bound = sup_bound(phi)
    for _ in range(10_000):
        assert abs(evaluate(phi, Fraction(rng.randint(0, 10**9), rng.randint(1, 1000)))) <= bound


def test_jump_consistency():
    rng = random.Random(13)
    for _ in range(10):
        phi = random_zero_sum(rng)
        K = 2 * phi.max_denominator
        for m in range(1, 3 * period(phi) if period(phi) < 200 else 600):
            left = evaluate(phi, Fraction(m) - Fraction(1, K))
            assert evaluate(phi, m) - left == jump_at(phi, m)


def test_profile_periodic():
    rng = random.Random(17)
    for _ in range(10):
        phi = random_zero_sum(rng, max_den=12)
        P = period(phi)
        p = profile(phi, 3 * P)
        assert all(p[m + P] == p[m] for m in range(2 * P))


# ------------------------------------------------------------ infinite window


def test_integral_to_infinity_first_seed_is_ln2():
    X = 1 << 16
    res = integral_to_infinity(f1, X)
    assert res.tail_bound == mpq(3, X)
    with mpmath.workdps(60):
        series = oracles.ln2_series()
        assert abs(res.closed_form - series) < mpmath.mpf(10) ** -45
        trunc = mpmath.mpf(int(res.truncated.numerator)) / int(res.truncated.denominator)
        assert abs(series - trunc) <= mpmath.mpf(3) / X
    assert res.consistent()


@pytest.mark.parametrize("n", [1, 2, 3, 5, 8, 13])
def test_integral_of_dilated_seed(n):
    res = integral_to_infinity(first(n), 1 << 14)
    with mpmath.workdps(60):
        assert abs(res.closed_form - mpmath.log(2) / n) < mpmath.mpf(10) ** -45
    assert res.consistent()


def test_integral_zero_function():
    res = integral_to_infinity(ZERO, 1 << 10)
    assert res.closed_form == 0 and res.truncated == 0 and res.tail_bound == 0


def test_integral_to_infinity_requires_zero_sum():
    with pytest.raises(ValueError):
        integral_to_infinity(make_natural([(1, 1)]))


def test_closed_form_vs_truncation_fifty_random_functions():
    rng = random.Random(2024)
    for _ in range(50):
        phi = random_zero_sum(rng)
        assert integral_to_infinity(phi, 1 << 20).consistent(), phi


# ------------------------------------------------------------ norms


def test_norm_examples():
    assert norm_weighted(f1, 0, 1, 1, 2) == mpq(1, 2)
    assert norm_weighted(f1, 1, 2, 1, 2) == 0
    assert norm_weighted(ZERO, 1, 1, 1, 3) == mpq(2, 3)
    with pytest.raises(ValueError):
        norm_weighted(f1, 0, 1, 3, 2)
    with pytest.raises(ValueError):
        norm_weighted(f1, 0, 3, 1, 2)


def test_norm_matches_unit_interval_oracle():
    rng = random.Random(23)
    for _ in range(15):
        phi = random_zero_sum(rng, max_den=10)
        ref = Fraction(rng.randint(-3, 3), rng.randint(1, 3))
        A = Fraction(rng.randint(4, 40), 4)
        B = A + Fraction(rng.randint(0, 200), 3)
        for p in (1, 2):
            # unit-interval oracle on |phi - ref|^p
            cuts = [A] + [Fraction(m) for m in range(int(A) + 1, int(B) + 1) if A < m < B] + [B]
            want = sum(
                abs(oracles.floor_sum(phi.terms, l) - ref) ** p * (1 / l - 1 / r)
                for l, r in zip(cuts, cuts[1:])
            )
            assert oracles.frac(norm_weighted(phi, ref, p, A, B)) == want


def test_norm_equals_integral_for_nonnegative_function():
    assert norm_weighted(f1, 0, 1, 1, 1000) == integrate_weighted(f1, 1, 1000)
