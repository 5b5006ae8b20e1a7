"""Exact scalars: rationals and rational functions of the coupling nu.

Every coefficient in the package is a ``NuScalar``: a ratio of two
polynomials in the coupling nu with ``fractions.Fraction`` coefficients.
Plain rationals are degree-0 instances of the same type, so matrix
entries, expansion coefficients and evaluated values all flow through
one representation.

Canonical form: numerator and denominator are coprime, the denominator
has integer coefficients with content 1 and a positive leading
coefficient.  Canonicalization is idempotent and two equal values always
have identical coefficient tuples, so ``==`` and ``hash`` are structural.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd as _int_gcd
from typing import Iterable, Union

import mpmath
from mpmath.libmp import from_rational, round_nearest

from .errors import DivideByZero, PoleError

Rat = Fraction

_ZERO = Fraction(0)
_ONE = Fraction(1)


def _trim(coeffs: list[Fraction]) -> tuple[Fraction, ...]:
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    return tuple(coeffs)


class NuPoly:
    """Dense univariate polynomial in nu over the rationals.

    Coefficients are stored ascending by power; the zero polynomial is
    the empty tuple.  Instances are immutable.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable[Union[int, Fraction]] = ()):
        self.coeffs = _trim([Fraction(c) for c in coeffs])

    @property
    def degree(self) -> int:
        """Degree, with the convention degree(0) = -1."""
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def leading(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else _ZERO

    def evaluate(self, nu: Fraction) -> Fraction:
        acc = _ZERO
        for c in reversed(self.coeffs):
            acc = acc * nu + c
        return acc

    def __add__(self, other: "NuPoly") -> "NuPoly":
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] += c
        return NuPoly(out)

    def __neg__(self) -> "NuPoly":
        return NuPoly([-c for c in self.coeffs])

    def __sub__(self, other: "NuPoly") -> "NuPoly":
        return self + (-other)

    def __mul__(self, other: "NuPoly") -> "NuPoly":
        if self.is_zero() or other.is_zero():
            return NuPoly()
        out = [_ZERO] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return NuPoly(out)

    def scale(self, k: Fraction) -> "NuPoly":
        if k == 0:
            return NuPoly()
        return NuPoly([c * k for c in self.coeffs])

    def divmod(self, other: "NuPoly") -> tuple["NuPoly", "NuPoly"]:
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dq = len(rem) - len(other.coeffs)
        if dq < 0:
            return NuPoly(), self
        quo = [_ZERO] * (dq + 1)
        lead = other.leading()
        for i in range(dq, -1, -1):
            top = rem[i + other.degree]
            if top == 0:
                continue
            q = top / lead
            quo[i] = q
            for j, c in enumerate(other.coeffs):
                rem[i + j] -= q * c
        return NuPoly(quo), NuPoly(rem)

    def monic(self) -> "NuPoly":
        if self.is_zero():
            return self
        return self.scale(1 / self.leading())

    def primitive(self) -> tuple[Fraction, "NuPoly"]:
        """Factor as content * primitive with integer coefficients.

        The primitive part has coprime integer coefficients and positive
        leading coefficient; the content carries sign and scale.
        """
        if self.is_zero():
            return _ONE, self
        den_lcm = 1
        for c in self.coeffs:
            den_lcm = den_lcm * c.denominator // _int_gcd(den_lcm, c.denominator)
        ints = [int(c * den_lcm) for c in self.coeffs]
        g = 0
        for v in ints:
            g = _int_gcd(g, abs(v))
        if ints[-1] < 0:
            g = -g
        content = Fraction(g, den_lcm)
        return content, NuPoly([Fraction(v, g) for v in ints])

    def __eq__(self, other) -> bool:
        return isinstance(other, NuPoly) and self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def __repr__(self) -> str:
        return f"NuPoly({format_poly(self)!r})"


def poly_gcd(a: NuPoly, b: NuPoly) -> NuPoly:
    """Monic gcd via the Euclidean algorithm over exact rationals."""
    while not b.is_zero():
        a, b = b, a.divmod(b)[1]
    return a.monic()


def format_poly(p: NuPoly, var: str = "nu") -> str:
    if p.is_zero():
        return "0"
    parts = []
    for k, c in enumerate(p.coeffs):
        if c == 0:
            continue
        if k == 0:
            parts.append(str(c))
        else:
            mag = "" if abs(c) == 1 else f"{abs(c)}*"
            term = f"{mag}{var}" if k == 1 else f"{mag}{var}^{k}"
            term = ("-" if c < 0 else "+" if parts else "") + term
            parts.append(term)
    out = parts[0]
    for t in parts[1:]:
        out += t if t[0] in "+-" else "+" + t
    return out


ScalarLike = Union["NuScalar", NuPoly, Fraction, int]


class NuScalar:
    """Ratio of two nu-polynomials in canonical reduced form."""

    __slots__ = ("num", "den")

    def __init__(self, num: ScalarLike = 0, den: ScalarLike = 1):
        n = _as_poly(num)
        d = _as_poly(den)
        if d.is_zero():
            raise DivideByZero("zero denominator")
        g = poly_gcd(n, d)
        if g.degree > 0:
            n = n.divmod(g)[0]
            d = d.divmod(g)[0]
        content, d = d.primitive()
        self.num = n.scale(1 / content)
        self.den = d

    @staticmethod
    def from_rat(r: Union[Fraction, int]) -> "NuScalar":
        return NuScalar(NuPoly([Fraction(r)]))

    @staticmethod
    def nu() -> "NuScalar":
        """The indeterminate coupling itself."""
        return NuScalar(NuPoly([0, 1]))

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_constant(self) -> bool:
        return self.num.degree <= 0 and self.den.degree == 0

    def as_rat(self) -> Fraction:
        """Constant value, for scalars that do not involve nu."""
        if not self.is_constant():
            raise ValueError(f"not a constant: {self}")
        if self.is_zero():
            return _ZERO
        return self.num.coeffs[0] / self.den.coeffs[0]

    def evaluate(self, nu: Fraction) -> Fraction:
        d = self.den.evaluate(nu)
        if d == 0:
            raise PoleError(format_poly(self.den), nu)
        return self.num.evaluate(nu) / d

    def __add__(self, other: ScalarLike) -> "NuScalar":
        o = _as_scalar(other)
        return NuScalar(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __neg__(self) -> "NuScalar":
        return NuScalar(-self.num, self.den)

    def __sub__(self, other: ScalarLike) -> "NuScalar":
        return self + (-_as_scalar(other))

    def __rsub__(self, other: ScalarLike) -> "NuScalar":
        return _as_scalar(other) - self

    def __mul__(self, other: ScalarLike) -> "NuScalar":
        o = _as_scalar(other)
        return NuScalar(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def __truediv__(self, other: ScalarLike) -> "NuScalar":
        o = _as_scalar(other)
        if o.is_zero():
            raise DivideByZero("division by zero scalar")
        return NuScalar(self.num * o.den, self.den * o.num)

    def __rtruediv__(self, other: ScalarLike) -> "NuScalar":
        return _as_scalar(other) / self

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction, NuPoly)):
            other = _as_scalar(other)
        return (
            isinstance(other, NuScalar)
            and self.num == other.num
            and self.den == other.den
        )

    def __hash__(self) -> int:
        return hash((self.num, self.den))

    def __repr__(self) -> str:
        return f"NuScalar({self})"

    def __str__(self) -> str:
        num = format_poly(self.num)
        if self.den.degree == 0 and self.den.coeffs[0] == 1:
            return num
        return f"({num})/({format_poly(self.den)})"


def _as_poly(v: ScalarLike) -> NuPoly:
    if isinstance(v, NuPoly):
        return v
    if isinstance(v, (int, Fraction)):
        return NuPoly([Fraction(v)])
    raise TypeError(f"cannot build polynomial from {type(v).__name__}")


def _as_scalar(v: ScalarLike) -> NuScalar:
    if isinstance(v, NuScalar):
        return v
    if isinstance(v, (int, Fraction, NuPoly)):
        return NuScalar(_as_poly(v))
    raise TypeError(f"cannot coerce {type(v).__name__} to NuScalar")


NU = NuScalar.nu()
ONE = NuScalar(1)
ZERO = NuScalar(0)


def arith(a: NuScalar, b: NuScalar, op: str) -> NuScalar:
    """Dispatch one of the four field operations by name."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ValueError(f"unknown op {op!r}")


def to_float(r: Fraction, bits: int = 53) -> mpmath.mpf:
    """Correctly rounded binary float of a rational at the given precision."""
    with mpmath.workprec(bits):
        return mpmath.mpf(from_rational(r.numerator, r.denominator, bits, round_nearest))


# --- serialization ---------------------------------------------------------

def rat_to_str(r: Fraction) -> str:
    return str(r)


def rat_from_str(s: str) -> Fraction:
    return Fraction(s)


def poly_to_json(p: NuPoly) -> list[str]:
    return [rat_to_str(c) for c in p.coeffs]


def poly_from_json(data: list[str]) -> NuPoly:
    return NuPoly([rat_from_str(c) for c in data])


def scalar_to_json(s: NuScalar) -> dict:
    return {"num": poly_to_json(s.num), "den": poly_to_json(s.den)}


def scalar_from_json(data: dict) -> NuScalar:
    return NuScalar(poly_from_json(data["num"]), poly_from_json(data["den"]))
