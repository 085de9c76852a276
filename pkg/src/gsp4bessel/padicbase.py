"""Rational p-adic numbers and the quadratic algebra attached to (a, b, c).

Elements of ``F = Q_p`` are modelled by :class:`fractions.Fraction`; only the
p-adic valuation is ever consulted.  The algebra ``L`` is either a quadratic
field ``F(sqrt d)`` or the split algebra ``F + F``; :class:`LElement` covers
both.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

import sympy

FElement = Fraction
Number = Union[int, Fraction]
INF = math.inf


class AssumptionError(ValueError):
    """The input data violate a standing assumption on (p, a, b, c)."""


def fval(x: Number, p: int) -> Union[int, float]:
    """p-adic valuation; ``inf`` for zero."""
    x = Fraction(x)
    if x == 0:
        return INF
    v = 0
    num, den = x.numerator, x.denominator
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v


def unit_part(x: Number, p: int) -> Fraction:
    x = Fraction(x)
    return x / Fraction(p) ** fval(x, p)


def residue(x: Number, p: int, k: int = 1) -> int:
    """Image of an integral ``x`` in ``Z/p^k``."""
    x = Fraction(x)
    mod = p**k
    if fval(x, p) < 0:
        raise ValueError(f"{x} is not {p}-integral")
    return x.numerator * pow(x.denominator, -1, mod) % mod


def is_integral(x: Number, p: int) -> bool:
    return fval(x, p) >= 0


def is_unit(x: Number, p: int) -> bool:
    return fval(x, p) == 0


def _is_qp_square_unit(d: Fraction, p: int) -> bool:
    if p == 2:
        return residue(d, 2, 3) == 1
    return pow(residue(d, p), (p - 1) // 2, p) == 1


def _rational_sqrt(d: Fraction) -> Optional[Fraction]:
    if d < 0:
        return None
    rn, rd = math.isqrt(d.numerator), math.isqrt(d.denominator)
    if rn * rn == d.numerator and rd * rd == d.denominator:
        return Fraction(rn, rd)
    return None


@dataclass(frozen=True)
class LElement:
    """``x + y*sqrt(d)`` in the field case, the pair ``(x, y)`` in the split case."""

    x: Fraction
    y: Fraction
    d: Fraction
    split: bool

    def _coerce(self, other) -> "LElement":
        if isinstance(other, LElement):
            if other.d != self.d or other.split != self.split:
                raise TypeError("elements of different quadratic algebras")
            return other
        f = Fraction(other)
        return LElement(f, f if self.split else Fraction(0), self.d, self.split)

    def __add__(self, other) -> "LElement":
        o = self._coerce(other)
        return LElement(self.x + o.x, self.y + o.y, self.d, self.split)

    __radd__ = __add__

    def __neg__(self) -> "LElement":
        return LElement(-self.x, -self.y, self.d, self.split)

    def __sub__(self, other) -> "LElement":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "LElement":
        return self._coerce(other) - self

    def __mul__(self, other) -> "LElement":
        if isinstance(other, (int, Fraction)):
            return LElement(self.x * other, self.y * other, self.d, self.split)
        o = self._coerce(other)
        if self.split:
            return LElement(self.x * o.x, self.y * o.y, self.d, True)
        return LElement(self.x * o.x + self.d * self.y * o.y, self.x * o.y + self.y * o.x, self.d, False)

    __rmul__ = __mul__

    def conj(self) -> "LElement":
        if self.split:
            return LElement(self.y, self.x, self.d, True)
        return LElement(self.x, -self.y, self.d, False)

    def norm(self) -> Fraction:
        if self.split:
            return self.x * self.y
        return self.x * self.x - self.d * self.y * self.y

    def trace(self) -> Fraction:
        if self.split:
            return self.x + self.y
        return 2 * self.x

    def inverse(self) -> "LElement":
        nrm = self.norm()
        if nrm == 0:
            raise ZeroDivisionError("element is not invertible")
        return self.conj() * (1 / nrm)

    def __truediv__(self, other) -> "LElement":
        return self * self._coerce(other).inverse()

    def __rtruediv__(self, other) -> "LElement":
        return self._coerce(other) * self.inverse()

    def __pow__(self, k: int) -> "LElement":
        if k < 0:
            return self.inverse() ** (-k)
        out = self._coerce(1)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = self._coerce(other)
        if not isinstance(other, LElement):
            return NotImplemented
        return (self.x, self.y, self.d, self.split) == (other.x, other.y, other.d, other.split)

    def __hash__(self) -> int:
        return hash((self.x, self.y, self.d, self.split))

    def is_zero(self) -> bool:
        return self.x == 0 and self.y == 0

    def __bool__(self) -> bool:
        return not self.is_zero()

    def in_base(self) -> bool:
        """True when the element lies in the diagonal copy of F."""
        return self.x == self.y if self.split else self.y == 0

    def base_value(self) -> Fraction:
        if not self.in_base():
            raise ValueError("element is not in F")
        return self.x

    def __repr__(self) -> str:
        if self.split:
            return f"({self.x}, {self.y})"
        return f"{self.x} + {self.y}*sqrt({self.d})"


@dataclass(frozen=True)
class FieldData:
    """The local datum: prime, (a, b, c), and everything derived from them."""

    p: int
    a: Fraction
    b: Fraction
    c: Fraction
    d: Fraction
    case: int
    sqrt_d: Optional[Fraction] = None
    w0: Optional[Fraction] = None
    split_roots: Optional[tuple[Fraction, Fraction]] = None
    _alpha: Optional[LElement] = field(default=None, repr=False, compare=False)

    @property
    def q(self) -> int:
        return self.p

    @property
    def split(self) -> bool:
        return self.case == 1

    def elem(self, x: Number, y: Number = 0) -> LElement:
        """Raw coordinates: ``x + y sqrt(d)`` or the pair ``(x, y)``."""
        return LElement(Fraction(x), Fraction(y), self.d, self.split)

    def embed(self, x: Number) -> LElement:
        x = Fraction(x)
        return self.elem(x, x) if self.split else self.elem(x, 0)

    @property
    def alpha(self) -> LElement:
        if self._alpha is not None:
            return self._alpha
        if self.split:
            r = self.sqrt_d
            return self.elem((self.b + r) / (2 * self.c), (self.b - r) / (2 * self.c))
        return self.elem(self.b / (2 * self.c), 1 / (2 * self.c))

    def from_basis(self, u: Number, v: Number) -> LElement:
        """The element ``u + v*alpha``."""
        return self.embed(u) + self.alpha * Fraction(v)

    def to_basis(self, z: LElement) -> tuple[Fraction, Fraction]:
        """Coordinates ``(u, v)`` with ``z = u + v*alpha``."""
        if self.split:
            a1, a2 = self.alpha.x, self.alpha.y
            v = (z.x - z.y) / (a1 - a2)
            return z.x - v * a1, v
        v = 2 * self.c * z.y
        return z.x - self.b * z.y, v

    def from_xy(self, x: Number, y: Number) -> LElement:
        """The torus coordinate ``x + y*sqrt(d)/2``."""
        x, y = Fraction(x), Fraction(y)
        if self.split:
            return self.elem(x + y * self.sqrt_d / 2, x - y * self.sqrt_d / 2)
        return self.elem(x, y / 2)

    def to_xy(self, z: LElement) -> tuple[Fraction, Fraction]:
        u, v = self.to_basis(z)
        return u + v * self.b / (2 * self.c), v / self.c

    def uniformizer_L(self) -> LElement:
        if self.case == -1:
            return self.embed(self.p)
        if self.case == 0:
            return self.alpha + self.w0
        return self.elem(self.p, 1)

    def residues(self) -> range:
        return range(self.p)

    def describe(self) -> dict:
        out = {"p": self.p, "a": str(self.a), "b": str(self.b), "c": str(self.c), "d": str(self.d), "case": self.case}
        if self.w0 is not None:
            out["w0"] = str(self.w0)
        if self.split_roots is not None:
            out["split_roots"] = [str(r) for r in self.split_roots]
        return out


def build_field_data(p: int, a: Number, b: Number, c: Number) -> FieldData:
    """Validate (p, a, b, c) and classify ``L``; raises :class:`AssumptionError`."""
    if not sympy.isprime(p):
        raise AssumptionError(f"p = {p} is not prime")
    a, b, c = Fraction(a), Fraction(b), Fraction(c)
    if not (is_integral(a, p) and is_integral(b, p)):
        raise AssumptionError("A1: a and b must be integral")
    if not is_unit(c, p):
        raise AssumptionError("A1: c must be a unit")
    d = b * b - 4 * a * c
    if d == 0:
        raise AssumptionError("d = b^2 - 4ac must be nonzero")
    v = fval(d, p)
    if v == 0 and _is_qp_square_unit(d, p):
        r = _rational_sqrt(d)
        if r is None:
            raise AssumptionError("split case needs d to be a rational square (unsupported otherwise)")
        roots = ((-b + r) / (2 * c), (-b - r) / (2 * c))
        if not (is_integral(roots[0], p) and is_integral(roots[1], p)):
            raise AssumptionError("split roots are not integral")
        return FieldData(p, a, b, c, d, 1, sqrt_d=r, split_roots=roots)
    if v == 0:
        if p == 2 and residue(d, 2, 3) != 5:
            raise AssumptionError("A2: for p = 2 a nonsquare unit d must be 5 mod 8")
        return FieldData(p, a, b, c, d, -1)
    if v == 1 and p != 2:
        return FieldData(p, a, b, c, d, 0, w0=-b / (2 * c))
    if v == 1:
        raise AssumptionError("ramified case is supported for odd p only")
    raise AssumptionError(f"A2: d has valuation {v}; it must generate the discriminant")


@dataclass(frozen=True)
class LClass:
    in_oL: bool
    in_Pn: bool
    in_oLunits: bool
    in_ounits_plus_Pn: bool


def l_class(fd: FieldData, z: LElement, n: int) -> LClass:
    """Membership of ``z`` in ``o_L``, ``P^n``, ``o_L^x`` and ``o^x + P^n``."""
    u, v = fd.to_basis(z)
    p = fd.p
    in_oL = fval(u, p) >= 0 and fval(v, p) >= 0
    in_Pn = fval(u, p) >= n and fval(v, p) >= n
    in_units = in_oL and fval(z.norm(), p) == 0
    if n == 0:
        plus = in_oL
    else:
        plus = fval(v, p) >= n and fval(u, p) == 0
    return LClass(in_oL, in_Pn, in_units, plus)


def l_norm_trace_conj(z: LElement) -> tuple[Fraction, Fraction, LElement]:
    return z.norm(), z.trace(), z.conj()


def beta_wm(fd: FieldData, w: Number, m: int) -> tuple[Fraction, bool]:
    """``a p^(2m) + b p^m w + c w^2`` and whether it is a unit."""
    w = Fraction(w)
    pm = Fraction(fd.p) ** m
    value = fd.a * pm * pm + fd.b * pm * w + fd.c * w * w
    return value, fval(value, fd.p) == 0


def unit_coset_reps(fd: FieldData, m: int) -> list[LElement]:
    """Representatives of ``((o^x + P^(m-1)) cap o_L^x) / (o^x + P^m)``."""
    if m < 1:
        raise ValueError("m must be at least 1")
    alpha = fd.alpha
    reps: list[LElement] = []
    if m >= 2:
        shift = alpha * Fraction(fd.p) ** (m - 1)
        reps = [shift + w for w in range(1, fd.p)]
    else:
        for w in fd.residues():
            if beta_wm(fd, w, 0)[1]:
                reps.append(alpha + w)
    reps.append(fd.embed(1))
    return reps


def same_unit_class(fd: FieldData, z1: LElement, z2: LElement, m: int) -> bool:
    """``z1/z2`` lies in ``o^x + P^m``."""
    return l_class(fd, z1 / z2, m).in_ounits_plus_Pn
