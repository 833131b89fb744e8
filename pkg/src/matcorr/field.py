"""Exact arithmetic in Q(sqrt(2), w) with w = exp(2*pi*i/3).

Elements are stored on the basis {1, sqrt2, w, sqrt2*w} with rational
coordinates, reduced via (sqrt2)^2 = 2 and w^2 = -1 - w.  Every exact
computation in the package bottoms out here; there is no epsilon anywhere
in this module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

SQRT2_FLOAT = 1.4142135623730951
OMEGA_COMPLEX = complex(-0.5, 0.8660254037844386)

_FracLike = int | Fraction


class FieldError(ValueError):
    """Base class for exact-field failures."""


class FieldDivisionError(FieldError):
    """Inverse of zero requested."""


class FieldRangeError(FieldError):
    """Rational coordinate does not fit in a double."""


class FieldSqrtError(FieldError):
    """Element has no square root inside the field (needs numeric fallback)."""


def _frac(x: _FracLike) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


def _sign_sqrt2_part(a: Fraction, b: Fraction) -> int:
    """Exact sign of the real number a + b*sqrt(2)."""
    if a == 0 and b == 0:
        return 0
    if a >= 0 and b >= 0:
        return 1
    if a <= 0 and b <= 0:
        return -1
    # mixed signs: compare a^2 against 2 b^2 (equality impossible over Q)
    lead = 1 if a > 0 else -1
    d = a * a - 2 * b * b
    return lead * (1 if d > 0 else -1)


def _sqrt_fraction(x: Fraction) -> Fraction | None:
    if x < 0:
        return None
    rn = math.isqrt(x.numerator)
    rd = math.isqrt(x.denominator)
    if rn * rn == x.numerator and rd * rd == x.denominator:
        return Fraction(rn, rd)
    return None


@dataclass(frozen=True, slots=True)
class FieldElement:
    """a + b*sqrt2 + c*w + d*sqrt2*w with rational a, b, c, d."""

    a: Fraction
    b: Fraction
    c: Fraction
    d: Fraction

    @staticmethod
    def make(a: _FracLike = 0, b: _FracLike = 0, c: _FracLike = 0, d: _FracLike = 0) -> "FieldElement":
        return FieldElement(_frac(a), _frac(b), _frac(c), _frac(d))

    @staticmethod
    def from_rational(p: _FracLike, q: _FracLike = 1) -> "FieldElement":
        return FieldElement(Fraction(p, q) if not isinstance(p, Fraction) else p / _frac(q),
                            Fraction(0), Fraction(0), Fraction(0))

    # -- ring structure -------------------------------------------------

    def __add__(self, other: "FieldElement | int | Fraction") -> "FieldElement":
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return FieldElement(self.a + other.a, self.b + other.b,
                            self.c + other.c, self.d + other.d)

    __radd__ = __add__

    def __sub__(self, other: "FieldElement | int | Fraction") -> "FieldElement":
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return FieldElement(self.a - other.a, self.b - other.b,
                            self.c - other.c, self.d - other.d)

    def __rsub__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return other - self

    def __neg__(self) -> "FieldElement":
        return FieldElement(-self.a, -self.b, -self.c, -self.d)

    def __mul__(self, other: "FieldElement | int | Fraction") -> "FieldElement":
        other = _coerce(other)
        if other is None:
            return NotImplemented
        a1, b1, c1, d1 = self.a, self.b, self.c, self.d
        a2, b2, c2, d2 = other.a, other.b, other.c, other.d
        # reduce with (sqrt2)^2 = 2 and w^2 = -1 - w
        return FieldElement(
            a1 * a2 + 2 * b1 * b2 - c1 * c2 - 2 * d1 * d2,
            a1 * b2 + a2 * b1 - c1 * d2 - c2 * d1,
            a1 * c2 + a2 * c1 + 2 * b1 * d2 + 2 * b2 * d1 - c1 * c2 - 2 * d1 * d2,
            a1 * d2 + a2 * d1 + b1 * c2 + b2 * c1 - c1 * d2 - c2 * d1,
        )

    __rmul__ = __mul__

    def __truediv__(self, other: "FieldElement | int | Fraction") -> "FieldElement":
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return self * other.inv()

    def __rtruediv__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return other * self.inv()

    def __pow__(self, n: int) -> "FieldElement":
        if n < 0:
            return self.inv() ** (-n)
        result = ONE
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def inv(self) -> "FieldElement":
        """Multiplicative inverse, by solving the 4x4 rational system of
        multiplication-by-self on the basis {1, sqrt2, w, sqrt2*w}."""
        if self.is_zero():
            raise FieldDivisionError("division by zero in Q(sqrt2, w)")
        cols = [self * e for e in _BASIS]
        # augmented system M v = e_1 over Fraction
        rows = [[cols[k].a for k in range(4)] + [Fraction(1)],
                [cols[k].b for k in range(4)] + [Fraction(0)],
                [cols[k].c for k in range(4)] + [Fraction(0)],
                [cols[k].d for k in range(4)] + [Fraction(0)]]
        for col in range(4):
            pivot = next(r for r in range(col, 4) if rows[r][col] != 0)
            rows[col], rows[pivot] = rows[pivot], rows[col]
            pv = rows[col][col]
            rows[col] = [x / pv for x in rows[col]]
            for r in range(4):
                if r != col and rows[r][col] != 0:
                    f = rows[r][col]
                    rows[r] = [x - f * y for x, y in zip(rows[r], rows[col])]
        return FieldElement(rows[0][4], rows[1][4], rows[2][4], rows[3][4])

    def conj(self) -> "FieldElement":
        """Complex conjugation: sqrt2 is real, conj(w) = w^2 = -1 - w."""
        return FieldElement(self.a - self.c, self.b - self.d, -self.c, -self.d)

    # -- predicates and real-subfield helpers ----------------------------

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0 and self.c == 0 and self.d == 0

    def is_one(self) -> bool:
        return self.a == 1 and self.b == 0 and self.c == 0 and self.d == 0

    def is_real(self) -> bool:
        return self.c == 0 and self.d == 0

    def is_rational(self) -> bool:
        return self.b == 0 and self.c == 0 and self.d == 0

    def __bool__(self) -> bool:
        return not self.is_zero()

    def real_coords(self) -> tuple[Fraction, Fraction]:
        if not self.is_real():
            raise FieldError(f"element {self} is not real")
        return self.a, self.b

    def sign_real(self) -> int:
        a, b = self.real_coords()
        return _sign_sqrt2_part(a, b)

    def abs2(self) -> "FieldElement":
        """|x|^2 = x * conj(x); always a real element."""
        return self * self.conj()

    def sqrt_real(self) -> "FieldElement":
        """Nonnegative square root of a nonnegative real element, when the
        root lies in Q(sqrt2).  Raises FieldSqrtError otherwise."""
        a, b = self.real_coords()
        if _sign_sqrt2_part(a, b) < 0:
            raise FieldSqrtError(f"negative element {self} has no real square root")
        if b == 0:
            r = _sqrt_fraction(a)
            if r is not None:
                return FieldElement.make(r)
            r = _sqrt_fraction(a / 2)
            if r is not None:
                return FieldElement.make(0, r)
            raise FieldSqrtError(f"{self}: square root not in field; needs numeric fallback")
        disc = _sqrt_fraction(a * a - 2 * b * b)
        if disc is not None:
            for q2 in ((a + disc) / 4, (a - disc) / 4):
                q = _sqrt_fraction(q2)
                if q is None or q == 0:
                    continue
                p = b / (2 * q)
                if p * p + 2 * q * q == a:
                    cand = FieldElement.make(p, q)
                    if cand.sign_real() >= 0:
                        return cand
                    return -cand
        raise FieldSqrtError(f"{self}: square root not in field; needs numeric fallback")

    # -- numeric embedding ------------------------------------------------

    def to_complex(self) -> complex:
        """Double-precision embedding with sqrt2 -> 1.4142135623730951 and
        w -> -0.5 + 0.8660254037844386i."""
        try:
            fa, fb = float(self.a), float(self.b)
            fc, fd = float(self.c), float(self.d)
        except OverflowError as exc:
            raise FieldRangeError("rational coordinate exceeds double range") from exc
        return complex(fa) + fb * SQRT2_FLOAT + (fc + fd * SQRT2_FLOAT) * OMEGA_COMPLEX

    # -- rendering ----------------------------------------------------------

    def to_json(self) -> dict[str, str]:
        return {name: f"{getattr(self, name).numerator}/{getattr(self, name).denominator}"
                for name in ("a", "b", "c", "d")}

    @staticmethod
    def from_json(obj: dict[str, str]) -> "FieldElement":
        try:
            return FieldElement.make(*(Fraction(obj[name]) for name in ("a", "b", "c", "d")))
        except (KeyError, ValueError, ZeroDivisionError) as exc:
            raise FieldError(f"malformed exact scalar {obj!r}") from exc

    def __str__(self) -> str:
        parts: list[str] = []
        for coef, sym in ((self.a, ""), (self.b, "√2"), (self.c, "ω"), (self.d, "√2ω")):
            if coef == 0:
                continue
            mag = abs(coef)
            if sym and mag == 1:
                body = sym
            elif sym:
                body = f"{mag}·{sym}"
            else:
                body = str(mag)
            if not parts:
                parts.append(body if coef > 0 else f"-{body}")
            else:
                parts.append(f"+ {body}" if coef > 0 else f"- {body}")
        return " ".join(parts) if parts else "0"


def _coerce(x) -> FieldElement | None:
    if isinstance(x, FieldElement):
        return x
    if isinstance(x, (int, Fraction)):
        return FieldElement.make(x)
    return None


ZERO = FieldElement.make(0)
ONE = FieldElement.make(1)
SQRT2 = FieldElement.make(0, 1)
OMEGA = FieldElement.make(0, 0, 1)
INV_SQRT2 = FieldElement.make(0, Fraction(1, 2))
HALF = FieldElement.make(Fraction(1, 2))
THIRD = FieldElement.make(Fraction(1, 3))

_BASIS = (ONE, SQRT2, OMEGA, SQRT2 * OMEGA)


def omega_power(n: int) -> FieldElement:
    """w^n reduced mod 3."""
    n %= 3
    if n == 0:
        return ONE
    if n == 1:
        return OMEGA
    return FieldElement.make(-1, 0, -1)
