from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gsp4bessel.scalars import (
    OrderMismatchError,
    RationalFunction,
    Scalar,
    ScalarError,
    UnitRootExp,
    geometric_closed_form,
    parse_scalar,
    q_power,
    root_of_unity,
    scalar_arith,
    sqrt_q,
    var,
)

PRIMES = (2, 3, 5, 7)


def zeta(num, den):
    return root_of_unity(UnitRootExp(num, den))


# ---------------------------------------------------------------- examples


def test_root_of_unity_trivial_exponent():
    assert root_of_unity(UnitRootExp(0, 1)) == 1


def test_root_of_unity_order_two_is_minus_one():
    assert zeta(1, 2) == -1


def test_fourth_root_squared():
    assert zeta(1, 4) ** 2 == -1


def test_order_mismatch_raises():
    with pytest.raises(OrderMismatchError):
        root_of_unity(UnitRootExp(1, 3), order=4)


@pytest.mark.parametrize("q", PRIMES)
def test_sqrt_q_squares_to_q(q):
    assert sqrt_q(q) * sqrt_q(q) == q


def test_conjugate_of_fourth_root():
    assert scalar_arith(zeta(1, 4), None, "conj") == zeta(3, 4)


def test_exact_polynomial_division():
    a, b = var("aT"), var("bT")
    assert (a * a - b * b) / (a - b) == a + b


def test_geometric_closed_form_definition():
    r = var("aT")
    g = geometric_closed_form(1, r, 3)
    assert g == RationalFunction.from_coeffs([1], [1, 0, 0, -r])


def test_geometric_truncation_matches_series():
    r = var("aT")
    partial = [Scalar.of(0)] * 22
    for k in range(8):
        partial[3 * k] = r**k
    assert geometric_closed_form(1, r, 3).series(21) == partial


def test_geometric_with_paper_ratio():
    q, om = 5, -1
    C = Fraction(4, 936)
    r = -om / var("aT") * q_power(q, -4)
    g = geometric_closed_form(C, r, 3)
    expected = RationalFunction.from_coeffs([C], [1, 0, 0, om / var("aT") * Fraction(1, q**2)])
    assert g == expected


def test_q_power_half_steps():
    assert q_power(5, 2) == 5
    assert q_power(5, -4) == Fraction(1, 25)
    assert q_power(3, 3) == 3 * sqrt_q(3)


# ------------------------------------------------------------- properties

small = st.integers(min_value=-6, max_value=6)
rationals = st.fractions(min_value=-5, max_value=5, max_denominator=7)


@st.composite
def scalars(draw, constant=False):
    q = draw(st.sampled_from((3, 5)))
    value = Scalar.of(draw(rationals))
    for _ in range(draw(st.integers(0, 3))):
        term = Scalar.of(draw(rationals))
        if draw(st.booleans()):
            term = term * zeta(draw(small), draw(st.sampled_from((3, 4, 5))))
        if draw(st.booleans()):
            term = term * q_power(q, draw(small))
        if not constant and draw(st.booleans()):
            term = term * var(draw(st.sampled_from(("aT", "bT", "omg", "lam"))))
        value = value + term
    return value


@settings(max_examples=40, deadline=None)
@given(scalars(), scalars(), scalars())
def test_ring_axioms(x, y, z):
    assert x + y == y + x
    assert x * y == y * x
    assert (x + y) + z == x + (y + z)
    assert (x * y) * z == x * (y * z)
    assert x * (y + z) == x * y + x * z


@settings(max_examples=40, deadline=None)
@given(scalars())
def test_inverse(x):
    if x.is_zero():
        with pytest.raises(ZeroDivisionError):
            x.inverse()
    else:
        assert x * x.inverse() == 1


@settings(max_examples=40, deadline=None)
@given(scalars(constant=True), scalars(constant=True))
def test_conjugation_is_a_ring_map(x, y):
    assert (x * y).conj() == x.conj() * y.conj()
    assert (x + y).conj() == x.conj() + y.conj()
    assert x.conj().conj() == x


def test_conjugation_rejects_indeterminates():
    with pytest.raises(ScalarError):
        var("aT").conj()


@settings(max_examples=40, deadline=None)
@given(scalars())
def test_text_round_trip(x):
    assert parse_scalar(x.to_text()) == x


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 12), st.integers(-20, 20))
def test_root_exponents_add(den, k):
    assert zeta(k, den) * zeta(1, den) == zeta(k + 1, den)
    assert zeta(k, den) ** den == 1


@settings(max_examples=25, deadline=None)
@given(rationals.filter(lambda f: f != 0), st.integers(1, 4), st.integers(2, 6))
def test_geometric_series_coefficients(r, k, terms):
    g = geometric_closed_form(1, r, k)
    coeffs = g.series(k * terms)
    for i, c in enumerate(coeffs):
        assert c == (Scalar.of(r) ** (i // k) if i % k == 0 else 0)
