"""Exact univariate rational functions with integer coefficients.

Polynomials are dense coefficient tuples, lowest degree first. A
:class:`RationalFunction` is always reduced: numerator and denominator are
coprime over Q, both have integer coefficients with no common content, and the
denominator's leading coefficient is positive.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Sequence

from .errors import ArgumentError

Coeffs = tuple  # tuple of int or Fraction, lowest degree first


def _trim(c: Sequence) -> tuple:
    c = list(c)
    while c and c[-1] == 0:
        c.pop()
    return tuple(c)


def poly_add(a: Coeffs, b: Coeffs) -> Coeffs:
    n = max(len(a), len(b))
    return _trim((a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n))


def poly_neg(a: Coeffs) -> Coeffs:
    return tuple(-x for x in a)


def poly_mul(a: Coeffs, b: Coeffs) -> Coeffs:
    if not a or not b:
        return ()
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return _trim(out)


def poly_divmod(a: Coeffs, b: Coeffs) -> tuple[Coeffs, Coeffs]:
    """Division over Q."""
    a, b = _trim(a), _trim(b)
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    rem = [Fraction(x) for x in a]
    quot = [Fraction(0)] * max(len(a) - len(b) + 1, 0)
    lead = Fraction(b[-1])
    for shift in range(len(a) - len(b), -1, -1):
        coef = rem[shift + len(b) - 1] / lead
        quot[shift] = coef
        if coef:
            for j, y in enumerate(b):
                rem[shift + j] -= coef * y
    return _trim(quot), _trim(rem[: len(b) - 1])


def poly_gcd(a: Coeffs, b: Coeffs) -> Coeffs:
    """Monic gcd over Q (Euclid)."""
    a, b = _trim(a), _trim(b)
    while b:
        a, b = b, poly_divmod(a, b)[1]
    if not a:
        return ()
    lead = Fraction(a[-1])
    return tuple(Fraction(x) / lead for x in a)


def poly_eval(a: Coeffs, x):
    acc = 0
    for c in reversed(a):
        acc = acc * x + c
    return acc


def _content_normalize(num: Coeffs, den: Coeffs) -> tuple[tuple[int, ...], tuple[int, ...]]:
    # clear denominators jointly, then remove the common integer content
    fr = [Fraction(x) for x in num + den]
    lcm = 1
    for f in fr:
        lcm = lcm * f.denominator // gcd(lcm, f.denominator)
    ints = [int(f * lcm) for f in fr]
    g = 0
    for v in ints:
        g = gcd(g, v)
    g = g or 1
    if ints[len(num):][-1] < 0:
        g = -g
    ints = [v // g for v in ints]
    return tuple(ints[: len(num)]), tuple(ints[len(num):])


def _fmt_poly(c: Sequence[int], var: str) -> str:
    terms = []
    for k in range(len(c) - 1, -1, -1):
        x = c[k]
        if x == 0:
            continue
        mag = abs(x)
        if k == 0:
            body = str(mag)
        else:
            mono = var if k == 1 else f"{var}^{k}"
            body = mono if mag == 1 else f"{mag}*{mono}"
        terms.append(("-" if x < 0 else "+", body))
    if not terms:
        return "0"
    s = ("-" if terms[0][0] == "-" else "") + terms[0][1]
    for sign, body in terms[1:]:
        s += f" {sign} {body}"
    return s


class RationalFunction:
    """Reduced ratio of integer polynomials in one symbol (``M`` by default)."""

    __slots__ = ("num", "den", "var")

    def __init__(self, num: Sequence = (), den: Sequence = (1,), var: str = "M"):
        num, den = _trim(num), _trim(den)
        if not den:
            raise ZeroDivisionError("zero denominator")
        if not num:
            num, den = (), (1,)
        else:
            g = poly_gcd(num, den)
            if len(g) > 1:
                num = poly_divmod(num, g)[0]
                den = poly_divmod(den, g)[0]
        if num:
            num, den = _content_normalize(num, den)
        else:
            den = (1,)
        self.num: tuple[int, ...] = tuple(int(x) for x in num)
        self.den: tuple[int, ...] = tuple(int(x) for x in den)
        self.var = var

    @classmethod
    def constant(cls, c, var: str = "M") -> RationalFunction:
        c = Fraction(c)
        return cls((c.numerator,), (c.denominator,), var)

    @classmethod
    def monomial(cls, power: int, coeff=1, var: str = "M") -> RationalFunction:
        c = Fraction(coeff)
        if power >= 0:
            return cls((0,) * power + (c.numerator,), (c.denominator,), var)
        return cls((c.numerator,), (0,) * (-power) + (c.denominator,), var)

    @staticmethod
    def _coerce(x, var) -> RationalFunction:
        if isinstance(x, RationalFunction):
            return x
        if isinstance(x, (int, Fraction)):
            return RationalFunction.constant(x, var)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other, self.var)
        if o is NotImplemented:
            return o
        return RationalFunction(
            poly_add(poly_mul(self.num, o.den), poly_mul(o.num, self.den)),
            poly_mul(self.den, o.den),
            self.var,
        )

    __radd__ = __add__

    def __neg__(self):
        return RationalFunction(poly_neg(self.num), self.den, self.var)

    def __sub__(self, other):
        o = self._coerce(other, self.var)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other, self.var)
        if o is NotImplemented:
            return o
        return RationalFunction(poly_mul(self.num, o.num), poly_mul(self.den, o.den), self.var)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other, self.var)
        if o is NotImplemented:
            return o
        if not o.num:
            raise ZeroDivisionError("division by the zero rational function")
        return RationalFunction(poly_mul(self.num, o.den), poly_mul(self.den, o.num), self.var)

    def __rtruediv__(self, other):
        return self._coerce(other, self.var) / self

    def __eq__(self, other):
        o = self._coerce(other, self.var)
        if o is NotImplemented:
            return NotImplemented
        return self.num == o.num and self.den == o.den

    def __hash__(self):
        return hash((self.num, self.den))

    def is_zero(self) -> bool:
        return not self.num

    def __call__(self, x) -> Fraction:
        """Exact value at an integer or rational point."""
        x = Fraction(x)
        d = poly_eval(self.den, x)
        if d == 0:
            raise ArgumentError(f"denominator vanishes at {self.var}={x}")
        return Fraction(poly_eval(self.num, x)) / d

    def substitute_power(self, k: int, var: str | None = None) -> RationalFunction:
        """Substitute ``var -> var**k`` (e.g. M -> n^2)."""

        def spread(c):
            out = [0] * ((len(c) - 1) * k + 1) if c else []
            for i, x in enumerate(c):
                out[i * k] = x
            return tuple(out)

        return RationalFunction(spread(self.num), spread(self.den), var or self.var)

    def leading_term(self) -> tuple[int, Fraction]:
        """(exponent, coefficient) of the behaviour at infinity; zero gives (None, 0)."""
        if not self.num:
            return None, Fraction(0)
        return len(self.num) - len(self.den), Fraction(self.num[-1], self.den[-1])

    def to_json(self) -> dict:
        return {"var": self.var, "numerator": list(self.num), "denominator": list(self.den)}

    @classmethod
    def from_json(cls, obj: dict) -> RationalFunction:
        return cls(obj["numerator"], obj["denominator"], obj.get("var", "M"))

    def __str__(self):
        n = _fmt_poly(self.num, self.var)
        if self.den == (1,):
            return n
        d = _fmt_poly(self.den, self.var)
        wrap = lambda s: f"({s})" if " " in s or "*" in s else s  # noqa: E731
        return f"{wrap(n)}/{wrap(d)}"

    def __repr__(self):
        return f"RationalFunction({self})"
