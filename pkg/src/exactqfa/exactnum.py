"""Exact scalar arithmetic: big-integer rationals, Gaussian rationals,
symbolic angles, and certified interval evaluation of trigonometric values.

Every quantity that can be represented exactly is kept as a
``fractions.Fraction`` (arbitrary precision, always canonical: reduced,
positive denominator). Quantities that are provably irrational, such as
sin^2 of a sqrt(2) multiple of pi, are returned as closed rational
intervals guaranteed to contain the true value, evaluated with directed
(outward) rounding at a caller-chosen precision. Interval endpoints are
exact rationals, so every downstream comparison against an interval is a
certified bound check, never a sampled float comparison.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

import mpmath

# Canonical exact rational scalar used across the package.
Rational = Fraction

DYADIC_PI = "DyadicPi"
SQRT2_PI = "Sqrt2Pi"

MIN_PRECISION_BITS = 16


class ExactnessError(ValueError):
    """Raised when an exact rational value is required but unavailable."""


def rational(numerator: int, denominator: int = 1) -> Fraction:
    """Build a canonical rational; denominator 0 raises ZeroDivisionError."""
    return Fraction(numerator, denominator)


def compare(a: Fraction, b: Fraction) -> int:
    """Three-way exact comparison: -1 if a < b, 0 if equal, 1 if a > b."""
    if a < b:
        return -1
    if a > b:
        return 1
    return 0


def pow_int(a: Fraction, exponent: int) -> Fraction:
    """Exact integer power; negative exponents of 0 raise ZeroDivisionError."""
    return a ** exponent


def format_rational(value: Fraction) -> str:
    """Serialize as "p/q" with q > 0 and gcd(p, q) == 1, e.g. "-3/5", "1/1"."""
    return f"{value.numerator}/{value.denominator}"


def parse_rational(text: str) -> Fraction:
    """Parse "p/q" (or a bare integer "p"); denominator 0 is a ValueError."""
    body = text.strip()
    if "/" in body:
        num_text, den_text = body.split("/", 1)
        den = int(den_text)
        if den == 0:
            raise ValueError(f"rational with denominator 0: {text!r}")
        return Fraction(int(num_text), den)
    return Fraction(int(body))


def is_perfect_square(value: Fraction) -> bool:
    """True when value is the square of a rational."""
    if value < 0:
        return False
    num, den = value.numerator, value.denominator
    return math.isqrt(num) ** 2 == num and math.isqrt(den) ** 2 == den


def sqrt_exact(value: Fraction) -> Fraction:
    """Exact nonnegative square root; raises ExactnessError if irrational."""
    if not is_perfect_square(value):
        raise ExactnessError(f"{value} has no rational square root")
    return Fraction(math.isqrt(value.numerator), math.isqrt(value.denominator))


@dataclass(frozen=True)
class GaussianRational:
    """Complex number with exact rational real and imaginary parts."""

    re: Fraction
    im: Fraction = Fraction(0)

    @staticmethod
    def from_rational(value: Union[Fraction, int]) -> "GaussianRational":
        return GaussianRational(Fraction(value), Fraction(0))

    def __add__(self, other: "GaussianRational") -> "GaussianRational":
        return GaussianRational(self.re + other.re, self.im + other.im)

    def __sub__(self, other: "GaussianRational") -> "GaussianRational":
        return GaussianRational(self.re - other.re, self.im - other.im)

    def __mul__(self, other: "GaussianRational") -> "GaussianRational":
        return GaussianRational(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    def __neg__(self) -> "GaussianRational":
        return GaussianRational(-self.re, -self.im)

    def __truediv__(self, other: "GaussianRational") -> "GaussianRational":
        norm = other.abs2()
        if norm == 0:
            raise ZeroDivisionError("division by zero GaussianRational")
        conj = other.conjugate()
        prod = self * conj
        return GaussianRational(prod.re / norm, prod.im / norm)

    def scale(self, factor: Fraction) -> "GaussianRational":
        return GaussianRational(self.re * factor, self.im * factor)

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    def abs2(self) -> Fraction:
        """Squared modulus, always an exact nonnegative rational."""
        return self.re * self.re + self.im * self.im

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0


GR_ZERO = GaussianRational(Fraction(0), Fraction(0))
GR_ONE = GaussianRational(Fraction(1), Fraction(0))


def format_gaussian(value: GaussianRational) -> str:
    """Serialize as "p/q+r/s i" (sign of the imaginary part folds into the +)."""
    re_text = format_rational(value.re)
    if value.im < 0:
        return f"{re_text}-{format_rational(-value.im)} i"
    return f"{re_text}+{format_rational(value.im)} i"


def parse_gaussian(text: str) -> GaussianRational:
    """Parse "p/q+r/s i" or "p/q-r/s i"; a bare rational means imaginary part 0."""
    body = text.strip()
    if body.endswith("i"):
        body = body[:-1].strip()
        # Split at the sign that separates real from imaginary, skipping a
        # leading sign on the real part.
        for pos in range(len(body) - 1, 0, -1):
            ch = body[pos]
            if ch in "+-" and body[pos - 1] not in "+-/":
                re_part = parse_rational(body[:pos])
                im_part = parse_rational(body[pos + 1:])
                if ch == "-":
                    im_part = -im_part
                return GaussianRational(re_part, im_part)
        raise ValueError(f"malformed Gaussian rational: {text!r}")
    return GaussianRational(parse_rational(body), Fraction(0))


@dataclass(frozen=True)
class SymbolicAngle:
    """An angle of one of exactly two symbolic kinds.

    DyadicPi represents coeff * pi where coeff is a dyadic rational
    (denominator a power of two). Sqrt2Pi represents coeff * sqrt(2) * pi
    with any rational coeff. These are the only two angle families the
    automata in this package rotate by, so no general symbolic field is
    needed. Addition is defined within one kind, or when either operand is
    the zero angle (zero is common to both kinds).
    """

    kind: str
    coeff: Fraction

    def __post_init__(self) -> None:
        if self.kind not in (DYADIC_PI, SQRT2_PI):
            raise ValueError(f"unknown angle kind: {self.kind!r}")
        if self.kind == DYADIC_PI:
            den = self.coeff.denominator
            if den & (den - 1):
                raise ValueError(
                    f"DyadicPi coefficient must have a power-of-two denominator, got {self.coeff}"
                )

    def is_zero(self) -> bool:
        return self.coeff == 0

    def __add__(self, other: "SymbolicAngle") -> "SymbolicAngle":
        if self.is_zero():
            return other
        if other.is_zero():
            return self
        if self.kind != other.kind:
            raise ExactnessError(
                f"cannot add angles of different kinds: {self.kind} + {other.kind}"
            )
        return SymbolicAngle(self.kind, self.coeff + other.coeff)

    def __neg__(self) -> "SymbolicAngle":
        return SymbolicAngle(self.kind, -self.coeff)

    def scale(self, factor: int) -> "SymbolicAngle":
        return SymbolicAngle(self.kind, self.coeff * factor)

    def to_json(self) -> dict:
        return {"coeff": format_rational(self.coeff), "kind": self.kind}

    @staticmethod
    def from_json(doc: dict) -> "SymbolicAngle":
        return SymbolicAngle(doc["kind"], parse_rational(doc["coeff"]))


def dyadic_pi(coeff) -> SymbolicAngle:
    return SymbolicAngle(DYADIC_PI, Fraction(coeff))


def sqrt2_pi(coeff) -> SymbolicAngle:
    return SymbolicAngle(SQRT2_PI, Fraction(coeff))


ZERO_ANGLE = SymbolicAngle(DYADIC_PI, Fraction(0))


@dataclass(frozen=True)
class RationalInterval:
    """Closed interval [lo, hi] with exact rational endpoints."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self) -> None:
        if self.lo > self.hi:
            raise ValueError(f"interval endpoints out of order: [{self.lo}, {self.hi}]")

    @staticmethod
    def point(value: Fraction) -> "RationalInterval":
        value = Fraction(value)
        return RationalInterval(value, value)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def contains(self, value: Fraction) -> bool:
        return self.lo <= value <= self.hi

    def contains_interval(self, other: "RationalInterval") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def intersects(self, other: "RationalInterval") -> bool:
        return max(self.lo, other.lo) <= min(self.hi, other.hi)

    def is_point(self) -> bool:
        return self.lo == self.hi

    # Certified order checks: true only when the whole interval satisfies
    # the relation, regardless of where the true value lies inside it.
    def entirely_ge(self, value: Fraction) -> bool:
        return self.lo >= value

    def entirely_gt(self, value: Fraction) -> bool:
        return self.lo > value

    def entirely_le(self, value: Fraction) -> bool:
        return self.hi <= value

    def entirely_lt(self, value: Fraction) -> bool:
        return self.hi < value

    def __add__(self, other: "RationalInterval") -> "RationalInterval":
        return RationalInterval(self.lo + other.lo, self.hi + other.hi)

    def __sub__(self, other: "RationalInterval") -> "RationalInterval":
        return RationalInterval(self.lo - other.hi, self.hi - other.lo)

    def __mul__(self, other: "RationalInterval") -> "RationalInterval":
        products = (
            self.lo * other.lo,
            self.lo * other.hi,
            self.hi * other.lo,
            self.hi * other.hi,
        )
        return RationalInterval(min(products), max(products))

    def scale(self, factor: Fraction) -> "RationalInterval":
        a, b = self.lo * factor, self.hi * factor
        return RationalInterval(min(a, b), max(a, b))

    def reciprocal(self) -> "RationalInterval":
        """1/x for intervals strictly above or strictly below zero."""
        if self.lo <= 0 <= self.hi:
            raise ZeroDivisionError(f"reciprocal of interval containing zero: {self}")
        return RationalInterval(1 / self.hi, 1 / self.lo)


@dataclass(frozen=True)
class ExactProb:
    """Probability known exactly as a rational."""

    value: Fraction

    def as_interval(self) -> RationalInterval:
        return RationalInterval.point(self.value)

    def is_exact(self) -> bool:
        return True


@dataclass(frozen=True)
class ApproxProb:
    """Probability known only as a certified enclosing interval."""

    interval: RationalInterval

    def as_interval(self) -> RationalInterval:
        return self.interval

    def is_exact(self) -> bool:
        return False


AngleProbability = Union[ExactProb, ApproxProb]

# General alias: any probability-like quantity that is either an exact
# rational or a certified enclosing interval.
ProbValue = AngleProbability

PROB_ZERO = ExactProb(Fraction(0))
PROB_ONE = ExactProb(Fraction(1))


def prob_exact(value) -> ExactProb:
    return ExactProb(Fraction(value))


def _tighten(interval: RationalInterval) -> ProbValue:
    if interval.is_point():
        return ExactProb(interval.lo)
    return ApproxProb(interval)


def prob_add(a: ProbValue, b: ProbValue) -> ProbValue:
    if a.is_exact() and b.is_exact():
        return ExactProb(a.value + b.value)
    return _tighten(a.as_interval() + b.as_interval())


def prob_sub(a: ProbValue, b: ProbValue) -> ProbValue:
    if a.is_exact() and b.is_exact():
        return ExactProb(a.value - b.value)
    return _tighten(a.as_interval() - b.as_interval())


def prob_mul(a: ProbValue, b: ProbValue) -> ProbValue:
    if a.is_exact() and b.is_exact():
        return ExactProb(a.value * b.value)
    # An exact zero annihilates even an interval factor.
    for p in (a, b):
        if p.is_exact() and p.value == 0:
            return PROB_ZERO
    return _tighten(a.as_interval() * b.as_interval())


def prob_scale(p: ProbValue, factor: Fraction) -> ProbValue:
    if p.is_exact():
        return ExactProb(p.value * factor)
    return _tighten(p.as_interval().scale(Fraction(factor)))


def prob_complement(p: ProbValue) -> ProbValue:
    return prob_sub(PROB_ONE, p)


def prob_sum(values) -> ProbValue:
    total: ProbValue = PROB_ZERO
    for p in values:
        total = prob_add(total, p)
    return total


def prob_reciprocal(p: ProbValue) -> ProbValue:
    if p.is_exact():
        if p.value == 0:
            raise ZeroDivisionError("reciprocal of an exactly zero probability")
        return ExactProb(1 / p.value)
    return _tighten(p.as_interval().reciprocal())


def prob_div(a: ProbValue, b: ProbValue) -> ProbValue:
    if a.is_exact() and a.value == 0:
        # 0 divided by anything nonzero is exactly 0; still insist the
        # denominator cannot be zero.
        if b.is_exact() and b.value == 0:
            raise ZeroDivisionError("0/0 probability ratio")
        return PROB_ZERO
    return prob_mul(a, prob_reciprocal(b))


def _mpf_tuple_to_fraction(t) -> Fraction:
    sign, man, exp, _ = t
    man = int(man)
    if man == 0:
        return Fraction(0)
    value = Fraction(man * 2 ** exp) if exp >= 0 else Fraction(man, 2 ** (-exp))
    return -value if sign else value


def _interval_sin_squared(angle: SymbolicAngle, precision_bits: int) -> RationalInterval:
    """Directed-rounding enclosure of sin^2(angle), width <= 2^-precision_bits.

    Evaluated as (1 - cos(2*angle)) / 2 to keep the enclosure tight, with
    the working precision raised until the requested width is met. The
    result is intersected with [0, 1], which preserves containment because
    the true value always lies in [0, 1].
    """
    coeff = angle.coeff
    if angle.kind == DYADIC_PI:
        # sin^2(c*pi) has period 1 in c; exact reduction keeps arguments small.
        coeff = coeff % 1
    target_width = Fraction(1, 2 ** precision_bits)
    iv = mpmath.iv
    saved_prec = iv.prec
    try:
        # Guard bits cover the argument magnitude plus rounding slack.
        magnitude_bits = max(abs(coeff.numerator), 1).bit_length() + 4
        work = precision_bits + magnitude_bits + 16
        while True:
            iv.prec = work
            coeff_iv = iv.mpf(coeff.numerator) / iv.mpf(coeff.denominator)
            if angle.kind == DYADIC_PI:
                arg = iv.pi * coeff_iv
            else:
                arg = iv.pi * iv.sqrt(2) * coeff_iv
            result = (iv.mpf(1) - iv.cos(2 * arg)) / 2
            lo_t, hi_t = result._mpi_
            lo = _mpf_tuple_to_fraction(lo_t)
            hi = _mpf_tuple_to_fraction(hi_t)
            lo = max(lo, Fraction(0))
            hi = min(hi, Fraction(1))
            if hi >= lo and hi - lo <= target_width:
                return RationalInterval(lo, hi)
            work *= 2
    finally:
        iv.prec = saved_prec


def angle_probability(angle: SymbolicAngle, precision_bits: int = 64) -> AngleProbability:
    """sin^2 of a symbolic angle, exact when analytically forced.

    Returns ExactProb exactly when the value is forced to 0 or 1: a
    DyadicPi angle whose coefficient is an integer multiple of 1/2, or the
    zero angle of either kind. Every other case returns ApproxProb with a
    certified enclosure of width at most 2^-precision_bits.
    """
    if precision_bits < MIN_PRECISION_BITS:
        raise ValueError(f"precision_bits must be >= {MIN_PRECISION_BITS}, got {precision_bits}")
    if angle.coeff == 0:
        return ExactProb(Fraction(0))
    if angle.kind == DYADIC_PI and (2 * angle.coeff).denominator == 1:
        # Half-integer multiples of pi: sin^2 is 0 at integers, 1 at halves.
        return ExactProb(Fraction(0) if angle.coeff.denominator == 1 else Fraction(1))
    return ApproxProb(_interval_sin_squared(angle, precision_bits))


def cos_sin_exact(angle: SymbolicAngle) -> "tuple[Fraction, Fraction]":
    """(cos, sin) of an angle whose components are forced into {-1, 0, 1}.

    Only DyadicPi angles with half-integer coefficients qualify. Raises
    ExactnessError otherwise.
    """
    if angle.coeff == 0:
        return Fraction(1), Fraction(0)
    if angle.kind != DYADIC_PI or (2 * angle.coeff).denominator != 1:
        raise ExactnessError(f"cos/sin of {angle} is not exactly representable")
    quarter_turns = int(2 * angle.coeff) % 4
    table = {
        0: (Fraction(1), Fraction(0)),
        1: (Fraction(0), Fraction(1)),
        2: (Fraction(-1), Fraction(0)),
        3: (Fraction(0), Fraction(-1)),
    }
    return table[quarter_turns]


def one_minus_inv_e_bracket(terms: int = 24) -> RationalInterval:
    """Certified rational bracket around 1 - 1/e.

    Uses the exact Taylor partial sum for e with the standard tail bound
    sum_{k>n} 1/k! < 2/(n+1)!, all in rational arithmetic, so both
    endpoints are proven bounds rather than floating-point estimates.
    """
    if terms < 4:
        raise ValueError("need at least 4 Taylor terms")
    partial = Fraction(0)
    factorial = 1
    for k in range(terms + 1):
        if k > 0:
            factorial *= k
        partial += Fraction(1, factorial)
    tail = Fraction(2, factorial * (terms + 1))
    e_lo, e_hi = partial, partial + tail
    # 1 - 1/e is increasing in e, so bounds map monotonically.
    return RationalInterval(1 - Fraction(1, 1) / e_lo, 1 - Fraction(1, 1) / e_hi)
