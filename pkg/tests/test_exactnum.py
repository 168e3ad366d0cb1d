"""Exact scalar layer: rationals, Gaussian rationals, angles, intervals.

Numeric oracles in this file were computed independently (high-precision
mpmath at 50 digits, plus hand-checked rational arithmetic) and frozen as
rational bounds, so the assertions do not reuse the code under test to
produce its own expected values.
"""

from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from exactqfa.exactnum import (
    ApproxProb,
    ExactnessError,
    ExactProb,
    GaussianRational,
    RationalInterval,
    SymbolicAngle,
    angle_probability,
    compare,
    cos_sin_exact,
    dyadic_pi,
    format_gaussian,
    format_rational,
    is_perfect_square,
    one_minus_inv_e_bracket,
    parse_gaussian,
    parse_rational,
    sqrt2_pi,
    sqrt_exact,
)

rationals = st.fractions(
    min_value=Fraction(-1000), max_value=Fraction(1000), max_denominator=10 ** 6
)


def test_compare_three_way() -> None:
    assert compare(Fraction(1, 3), Fraction(1, 2)) == -1
    assert compare(Fraction(2, 4), Fraction(1, 2)) == 0
    # Oracle: 1 - (24/25)^25 = 0.63960... which exceeds 158/250 = 0.632.
    assert compare(1 - Fraction(24, 25) ** 25, Fraction(158, 250)) == 1


def test_format_rational_canonical() -> None:
    assert format_rational(Fraction(1)) == "1/1"
    assert format_rational(Fraction(-3, 6)) == "-1/2"
    assert parse_rational("16/25") == Fraction(16, 25)
    assert parse_rational("7") == Fraction(7)
    with pytest.raises(ValueError):
        parse_rational("1/0")


@given(rationals)
def test_rational_round_trip(x: Fraction) -> None:
    assert parse_rational(format_rational(x)) == x


def test_gaussian_arithmetic_basics() -> None:
    i = GaussianRational(Fraction(0), Fraction(1))
    assert i * i == GaussianRational(Fraction(-1), Fraction(0))
    z = GaussianRational(Fraction(3, 5), Fraction(-4, 5))
    assert z.abs2() == Fraction(1)
    assert z * z.conjugate() == GaussianRational(Fraction(1), Fraction(0))
    assert (z / z) == GaussianRational(Fraction(1), Fraction(0))
    with pytest.raises(ZeroDivisionError):
        z / GaussianRational(Fraction(0), Fraction(0))


gaussians = st.builds(GaussianRational, rationals, rationals)


@given(gaussians, gaussians, gaussians)
@settings(max_examples=60)
def test_gaussian_ring_laws(a: GaussianRational, b: GaussianRational, c: GaussianRational) -> None:
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert (a * b).conjugate() == a.conjugate() * b.conjugate()
    assert (a * b).abs2() == a.abs2() * b.abs2()


@given(gaussians)
def test_gaussian_round_trip(z: GaussianRational) -> None:
    assert parse_gaussian(format_gaussian(z)) == z


def test_gaussian_format_examples() -> None:
    assert format_gaussian(GaussianRational(Fraction(1, 2), Fraction(-1, 3))) == "1/2-1/3 i"
    assert format_gaussian(GaussianRational(Fraction(0), Fraction(1))) == "0/1+1/1 i"
    assert parse_gaussian("-2/5+7/3 i") == GaussianRational(Fraction(-2, 5), Fraction(7, 3))
    assert parse_gaussian("4/9") == GaussianRational(Fraction(4, 9), Fraction(0))


def test_perfect_square_detection() -> None:
    assert is_perfect_square(Fraction(9, 16))
    assert not is_perfect_square(Fraction(2))
    assert not is_perfect_square(Fraction(-1))
    assert sqrt_exact(Fraction(9, 16)) == Fraction(3, 4)
    with pytest.raises(ExactnessError):
        sqrt_exact(Fraction(1, 2))


@given(rationals)
def test_sqrt_exact_inverts_square(x: Fraction) -> None:
    assert sqrt_exact(x * x) == abs(x)


def test_angle_kind_rules() -> None:
    with pytest.raises(ValueError):
        SymbolicAngle("DyadicPi", Fraction(1, 3))
    with pytest.raises(ValueError):
        SymbolicAngle("Euler", Fraction(1))
    a = dyadic_pi(Fraction(1, 4))
    b = sqrt2_pi(Fraction(2))
    with pytest.raises(ExactnessError):
        a + b
    # Zero of either kind mixes freely.
    zero = dyadic_pi(0)
    assert (zero + b) == b
    assert (b + zero) == b
    assert (a + dyadic_pi(Fraction(1, 4))).coeff == Fraction(1, 2)
    assert (b + sqrt2_pi(3)).coeff == Fraction(5)
    assert SymbolicAngle.from_json(b.to_json()) == b


def test_angle_probability_exact_cases() -> None:
    assert angle_probability(dyadic_pi(Fraction(1, 2))) == ExactProb(Fraction(1))
    assert angle_probability(dyadic_pi(1)) == ExactProb(Fraction(0))
    assert angle_probability(dyadic_pi(Fraction(-3, 2))) == ExactProb(Fraction(1))
    assert angle_probability(dyadic_pi(0)) == ExactProb(Fraction(0))
    assert angle_probability(sqrt2_pi(0)) == ExactProb(Fraction(0))


def test_angle_probability_rejects_low_precision() -> None:
    with pytest.raises(ValueError):
        angle_probability(sqrt2_pi(1), precision_bits=8)


def test_angle_probability_dyadic_quarter() -> None:
    # sin^2(pi/4) = 1/2 exactly; the dyadic-but-not-half-integer case is
    # interval valued but must certify tightly around 1/2.
    p = angle_probability(dyadic_pi(Fraction(1, 4)), precision_bits=64)
    assert isinstance(p, ApproxProb)
    assert p.interval.contains(Fraction(1, 2))
    assert p.interval.width <= Fraction(1, 2 ** 64)


def test_angle_probability_sqrt2_oracles() -> None:
    # Oracle: sin^2(sqrt(2) pi) = 0.9291080928344088... (50-digit mpmath).
    p1 = angle_probability(sqrt2_pi(1), precision_bits=64)
    assert isinstance(p1, ApproxProb)
    assert p1.interval.entirely_gt(Fraction(9291, 10000))
    assert p1.interval.entirely_lt(Fraction(9292, 10000))
    assert p1.interval.width <= Fraction(1, 2 ** 64)
    # Oracle: sin^2(2 sqrt(2) pi) = 0.2634649786560654... (50-digit mpmath).
    p2 = angle_probability(sqrt2_pi(2), precision_bits=64)
    assert p2.as_interval().entirely_gt(Fraction(2634, 10000))
    assert p2.as_interval().entirely_lt(Fraction(2635, 10000))


@given(st.fractions(min_value=Fraction(-50), max_value=Fraction(50), max_denominator=997))
@settings(max_examples=40, deadline=None)
def test_angle_probability_precision_nesting(coeff: Fraction) -> None:
    # Doubling the precision must tighten the enclosure, never move it.
    angle = sqrt2_pi(coeff)
    wide = angle_probability(angle, precision_bits=64).as_interval()
    narrow = angle_probability(angle, precision_bits=128).as_interval()
    assert wide.contains_interval(narrow)
    assert Fraction(0) <= wide.lo and wide.hi <= Fraction(1)
    assert narrow.width <= Fraction(1, 2 ** 128)


def test_cos_sin_exact_table() -> None:
    assert cos_sin_exact(dyadic_pi(0)) == (Fraction(1), Fraction(0))
    assert cos_sin_exact(dyadic_pi(Fraction(1, 2))) == (Fraction(0), Fraction(1))
    assert cos_sin_exact(dyadic_pi(1)) == (Fraction(-1), Fraction(0))
    assert cos_sin_exact(dyadic_pi(Fraction(3, 2))) == (Fraction(0), Fraction(-1))
    assert cos_sin_exact(dyadic_pi(Fraction(-1, 2))) == (Fraction(0), Fraction(-1))
    with pytest.raises(ExactnessError):
        cos_sin_exact(dyadic_pi(Fraction(1, 4)))
    with pytest.raises(ExactnessError):
        cos_sin_exact(sqrt2_pi(1))


def test_interval_invariants() -> None:
    with pytest.raises(ValueError):
        RationalInterval(Fraction(1), Fraction(0))
    box = RationalInterval(Fraction(1, 3), Fraction(1, 2))
    assert box.contains(Fraction(2, 5))
    assert not box.contains(Fraction(2, 3))
    assert box.entirely_ge(Fraction(1, 3))
    assert not box.entirely_gt(Fraction(1, 3))
    assert box.reciprocal() == RationalInterval(Fraction(2), Fraction(3))
    with pytest.raises(ZeroDivisionError):
        RationalInterval(Fraction(-1), Fraction(1)).reciprocal()


@given(rationals, rationals, rationals, rationals)
@settings(max_examples=60)
def test_interval_arithmetic_containment(x: Fraction, y: Fraction, sx: Fraction, sy: Fraction) -> None:
    a = RationalInterval(x - abs(sx), x + abs(sx))
    b = RationalInterval(y - abs(sy), y + abs(sy))
    assert (a + b).contains(x + y)
    assert (a - b).contains(x - y)
    assert (a * b).contains(x * y)


def test_one_minus_inv_e_bracket() -> None:
    # Oracle: 1 - 1/e = 0.6321205588285576... (50-digit mpmath); the
    # certified bracket must pin it inside (0.632, 0.6322) with lots of slack.
    box = one_minus_inv_e_bracket()
    assert box.entirely_gt(Fraction(79, 125))
    assert box.entirely_lt(Fraction(3161, 5000))
    assert box.width < Fraction(1, 10 ** 20)
