"""Exact scalars in Q or Q(sqrt d), and exact logarithmic distances.

Every length, area and modulus handled by the package is a :class:`Scalar`
``a + b*sqrt(d)`` with rational ``a, b``.  A computation uses a single
square-free ``d``; pure rationals (``b == 0``) are compatible with every
``d``.  Distances of the form ``c * log(r)`` are carried as :class:`LogRatio`
so that they can be compared and added without rounding.
"""

from __future__ import annotations

import math
import re
from decimal import Decimal, localcontext
from fractions import Fraction
from functools import total_ordering
from typing import Iterable, Union

__all__ = [
    "FieldMismatchError",
    "Scalar",
    "LogRatio",
    "as_scalar",
    "parse_scalar",
    "scalar_cmp",
    "logratio_max",
    "is_squarefree",
    "render_decimal",
]

Number = Union[int, Fraction, "Scalar"]

_DECIMAL_PREC = 60


class FieldMismatchError(ValueError):
    """Raised when two scalars live in incompatible quadratic fields."""


def is_squarefree(n: int) -> bool:
    if n < 1:
        return False
    k = 2
    while k * k <= n:
        if n % (k * k) == 0:
            return False
        k += 1
    return True


def _common_d(d1: int, d2: int) -> int:
    if d1 == 1:
        return d2
    if d2 == 1 or d1 == d2:
        return d1
    raise FieldMismatchError(f"cannot mix sqrt({d1}) and sqrt({d2}) in one computation")


@total_ordering
class Scalar:
    """The number ``a + b*sqrt(d)``; ``d == 1`` marks a pure rational."""

    __slots__ = ("a", "b", "d")

    def __init__(self, a=0, b=0, d: int = 1):
        a = Fraction(a)
        b = Fraction(b)
        if b == 0 or d == 1:
            if d == 1 and b != 0:
                a, b = a + b, Fraction(0)
            d = 1
        elif not is_squarefree(d) or d < 2:
            raise ValueError(f"d must be a square-free integer >= 2, got {d}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "d", d)

    def __setattr__(self, name, value):
        raise AttributeError("Scalar is immutable")

    # -- arithmetic -------------------------------------------------------
    def _coerce(self, other) -> "Scalar":
        if isinstance(other, Scalar):
            return other
        if isinstance(other, (int, Fraction)):
            return Scalar(other)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return Scalar(self.a + o.a, self.b + o.b, _common_d(self.d, o.d))

    __radd__ = __add__

    def __neg__(self):
        return Scalar(-self.a, -self.b, self.d)

    def __pos__(self):
        return self

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return Scalar(self.a - o.a, self.b - o.b, _common_d(self.d, o.d))

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o - self

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        d = _common_d(self.d, o.d)
        return Scalar(self.a * o.a + self.b * o.b * d, self.a * o.b + self.b * o.a, d)

    __rmul__ = __mul__

    def conjugate(self) -> "Scalar":
        return Scalar(self.a, -self.b, self.d)

    def norm(self) -> Fraction:
        """Field norm ``a^2 - d b^2``."""
        return self.a * self.a - self.d * self.b * self.b

    def inverse(self) -> "Scalar":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero Scalar")
        return Scalar(self.a / n, -self.b / n, self.d)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        _common_d(self.d, o.d)
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o * self.inverse()

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        result = Scalar(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __abs__(self):
        return -self if self.sign() < 0 else self

    # -- ordering ---------------------------------------------------------
    def sign(self) -> int:
        a, b = self.a, self.b
        if b == 0:
            return (a > 0) - (a < 0)
        if a == 0:
            return (b > 0) - (b < 0)
        if (a > 0) == (b > 0):
            return 1 if a > 0 else -1
        # opposite signs: compare a^2 with b^2 d
        diff = a * a - b * b * self.d
        s = (diff > 0) - (diff < 0)
        return s if a > 0 else -s

    def __eq__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        if self.b != 0 and o.b != 0:
            _common_d(self.d, o.d)
        return self.a == o.a and self.b == o.b

    def __lt__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return (self - o).sign() < 0

    def __hash__(self):
        if self.b == 0:
            return hash(self.a)
        return hash((self.a, self.b, self.d))

    def __bool__(self):
        return self.a != 0 or self.b != 0

    # -- conversions ------------------------------------------------------
    @property
    def is_rational(self) -> bool:
        return self.b == 0

    def to_fraction(self) -> Fraction:
        if self.b != 0:
            raise ValueError(f"{self} is not rational")
        return self.a

    def to_decimal(self, prec: int = _DECIMAL_PREC) -> Decimal:
        with localcontext() as ctx:
            ctx.prec = prec
            val = Decimal(self.a.numerator) / Decimal(self.a.denominator)
            if self.b != 0:
                val += Decimal(self.b.numerator) / Decimal(self.b.denominator) * Decimal(self.d).sqrt()
            return +val

    def __float__(self):
        return float(self.to_decimal(30))

    def floor(self) -> int:
        """Exact floor."""
        n = math.floor(float(self))
        # float guess may be off by one near integers
        while Scalar(n) > self:
            n -= 1
        while Scalar(n + 1) <= self:
            n += 1
        return n

    def __str__(self):
        if self.b == 0:
            return str(self.a)
        tail = f"{abs(self.b)}*sqrt({self.d})"
        if self.a == 0:
            return tail if self.b > 0 else "-" + tail
        return f"{self.a}{'+' if self.b > 0 else '-'}{tail}"

    def __repr__(self):
        return f"Scalar('{self}')"

    def __reduce__(self):
        return (parse_scalar, (str(self),))


_TERM = re.compile(
    r"""\s*(?P<sign>[+-]?)\s*
        (?:(?P<coef>\d+(?:/\d+)?)\s*\*?\s*)?
        (?P<root>sqrt\(\s*(?P<d>\d+)\s*\))?\s*""",
    re.VERBOSE,
)


def parse_scalar(text) -> Scalar:
    """Parse ``"p/q"``, ``"p/q+r/s*sqrt(d)"`` and similar forms."""
    if isinstance(text, Scalar):
        return text
    if isinstance(text, (int, Fraction)):
        return Scalar(text)
    s = str(text).strip()
    if not s:
        raise ValueError("empty scalar string")
    pos = 0
    a = Fraction(0)
    b = Fraction(0)
    d = 1
    first = True
    while pos < len(s):
        m = _TERM.match(s, pos)
        if not m or m.end() == pos or (not m.group("coef") and not m.group("root")):
            raise ValueError(f"malformed scalar {text!r}")
        if not first and not m.group("sign"):
            raise ValueError(f"malformed scalar {text!r}")
        first = False
        coef = Fraction(m.group("coef")) if m.group("coef") else Fraction(1)
        if m.group("sign") == "-":
            coef = -coef
        if m.group("root"):
            dd = int(m.group("d"))
            if d != 1 and dd != d:
                raise FieldMismatchError(f"two different radicals in {text!r}")
            d = dd
            b += coef
        else:
            a += coef
        pos = m.end()
    if d != 1:
        r = math.isqrt(d)
        if r * r == d:
            return Scalar(a + b * r)
    return Scalar(a, b, d)


def as_scalar(x) -> Scalar:
    if isinstance(x, Scalar):
        return x
    if isinstance(x, str):
        return parse_scalar(x)
    if isinstance(x, (int, Fraction)):
        return Scalar(x)
    raise TypeError(f"cannot convert {type(x).__name__} to Scalar exactly")


def scalar_cmp(x, y) -> int:
    """Exact three-way comparison: -1, 0 or 1."""
    return (as_scalar(x) - as_scalar(y)).sign()


def render_decimal(value, digits: int = 12) -> str:
    """Decimal rendering with ``digits`` significant digits."""
    if isinstance(value, Scalar):
        dec = value.to_decimal()
    else:
        dec = Decimal(value)
    if dec == 0:
        return "0"
    with localcontext() as ctx:
        ctx.prec = digits
        dec = +dec
    out = format(dec, f".{digits}g")
    return out


def _perfect_root(q: Fraction, k: int):
    """Exact k-th root of a positive rational, or None."""
    def iroot(n):
        r = round(n ** (1.0 / k)) if n < 2**1000 else int(Decimal(n) ** (Decimal(1) / k))
        for c in (r - 1, r, r + 1):
            if c >= 0 and c**k == n:
                return c
        return None

    num = iroot(q.numerator)
    den = iroot(q.denominator)
    if num is None or den is None:
        return None
    return Fraction(num, den)


@total_ordering
class LogRatio:
    """The real number ``coeff * log(ratio)`` with ``ratio > 0`` exact.

    The default coefficient is ``1/2`` so ``LogRatio(r)`` is the Teichmuller
    style distance ``1/2 log r``.  Sums multiply ratios; comparisons raise
    both ratios to a common integer power and compare exactly.
    """

    __slots__ = ("ratio", "coeff")

    def __init__(self, ratio, coeff=Fraction(1, 2)):
        ratio = as_scalar(ratio)
        coeff = Fraction(coeff)
        if ratio.sign() <= 0:
            raise ValueError(f"LogRatio needs a positive ratio, got {ratio}")
        if coeff == 0 or ratio == 1:
            ratio, coeff = Scalar(1), Fraction(1, 2)
        elif coeff < 0:
            ratio, coeff = ratio.inverse(), -coeff
        object.__setattr__(self, "ratio", ratio)
        object.__setattr__(self, "coeff", coeff)

    def __setattr__(self, name, value):
        raise AttributeError("LogRatio is immutable")

    @classmethod
    def zero(cls) -> "LogRatio":
        return cls(1)

    def _powers(self, other: "LogRatio"):
        p1, q1 = self.coeff.numerator, self.coeff.denominator
        p2, q2 = other.coeff.numerator, other.coeff.denominator
        return self.ratio ** (p1 * q2), other.ratio ** (p2 * q1)

    def __eq__(self, other):
        if not isinstance(other, LogRatio):
            return NotImplemented
        x, y = self._powers(other)
        return x == y

    def __lt__(self, other):
        if not isinstance(other, LogRatio):
            return NotImplemented
        x, y = self._powers(other)
        return x < y

    __hash__ = None

    def __add__(self, other):
        if not isinstance(other, LogRatio):
            return NotImplemented
        if self.is_zero():
            return other
        if other.is_zero():
            return self
        c1, c2 = self.coeff, other.coeff
        # common rational g with c1/g, c2/g integers
        g = Fraction(math.gcd(c1.numerator * c2.denominator, c2.numerator * c1.denominator),
                     c1.denominator * c2.denominator)
        r = self.ratio ** int(c1 / g) * other.ratio ** int(c2 / g)
        return LogRatio(r, g)

    def __neg__(self):
        return LogRatio(self.ratio.inverse(), self.coeff)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, factor) -> "LogRatio":
        """Multiply the value by a rational factor."""
        return LogRatio(self.ratio, self.coeff * Fraction(factor))

    def is_zero(self) -> bool:
        return self.ratio == 1

    def exp2(self) -> Scalar:
        """``exp(2*value)`` when that is a field element, i.e. ``ratio**(2*coeff)``."""
        e = 2 * self.coeff
        if e.denominator != 1:
            raise ValueError(f"exp(2*{self}) is not exact in the field")
        return self.ratio ** int(e)

    def to_decimal(self, prec: int = _DECIMAL_PREC) -> Decimal:
        with localcontext() as ctx:
            ctx.prec = prec
            c = Decimal(self.coeff.numerator) / Decimal(self.coeff.denominator)
            return +(c * self.ratio.to_decimal(prec + 10).ln())

    def __float__(self):
        return float(self.to_decimal(30))

    def pretty(self) -> str:
        """Human form such as ``"1/2 log 2"`` or ``"log 2"``; perfect powers are reduced."""
        if self.is_zero():
            return "0"
        coeff, base = self.coeff, self.ratio
        if base.is_rational:
            q = base.to_fraction()
            for k in range(64, 1, -1):
                root = _perfect_root(q, k)
                if root is not None and root != 1:
                    coeff, base = coeff * k, Scalar(root)
                    break
        if base < 1:
            coeff, base = -coeff, base.inverse()
        b = str(base)
        if not base.is_rational:
            b = f"({b})"
        if coeff == 1:
            return f"log {b}"
        if coeff == -1:
            return f"-log {b}"
        return f"{coeff} log {b}"

    def to_json(self) -> dict:
        return {
            "ratio": str(self.ratio),
            "coeff": str(self.coeff),
            "exact": self.pretty(),
            "decimal": render_decimal(self.to_decimal()),
        }

    def __str__(self):
        return self.pretty()

    def __repr__(self):
        return f"LogRatio({self.ratio!s}, coeff={self.coeff})"


def logratio_max(values: Iterable[LogRatio]) -> LogRatio:
    vals = list(values)
    if not vals:
        raise ValueError("logratio_max of an empty list")
    best = vals[0]
    for v in vals[1:]:
        if v > best:
            best = v
    return best
