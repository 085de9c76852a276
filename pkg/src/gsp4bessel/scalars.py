"""Exact coefficient arithmetic.

A :class:`Scalar` is an element of ``K(X, aT, bT, omg, lam)`` where ``K`` is a
cyclotomic field ``Q(zeta_n)``.  Square roots of primes live inside ``K`` as
quadratic Gauss sums, so ``sqrt_q(q)**2 == q`` holds exactly and ``K`` stays a
field.  Each scalar remembers its own cyclotomic order ``n``; binary
operations lift both operands to the least common multiple.

Canonical form: the numerator is a dict ``j -> P_j`` with ``P_j`` in
``Q[vars]`` meaning ``sum_j zeta_n**j * P_j`` for ``0 <= j < phi(n)``; the
denominator is a monic polynomial in ``Q[vars]`` coprime to the gcd of all
``P_j``.  Two scalars with the same ``n`` are equal iff their canonical
forms coincide.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Union

import sympy
from sympy import QQ
from sympy.polys.rings import ring

VARIABLES = ("X", "aT", "bT", "omg", "lam")
POLY_RING, *_GENS = ring(",".join(VARIABLES), QQ)
_GEN_BY_NAME = dict(zip(VARIABLES, _GENS))
_PRINT_RING, *_ = ring(",".join(("z",) + VARIABLES), QQ)

ONE_POLY = POLY_RING.one
ZERO_POLY = POLY_RING.zero


class ScalarError(ArithmeticError):
    """Raised for undefined scalar operations."""


class OrderMismatchError(ScalarError):
    """A root of unity does not fit the requested cyclotomic order."""


# ---------------------------------------------------------------- cyclotomy


@lru_cache(maxsize=None)
def _phi(n: int) -> int:
    return int(sympy.totient(n))


@lru_cache(maxsize=None)
def _reduction_table(n: int) -> tuple[tuple[tuple[int, int], ...], ...]:
    """Power-basis coordinates of ``zeta_n**e`` for ``0 <= e < n``."""
    deg = _phi(n)
    coeffs = [int(c) for c in reversed(sympy.Poly(sympy.cyclotomic_poly(n, sympy.Symbol("x"))).all_coeffs())]
    low = [(k, -c) for k, c in enumerate(coeffs[:deg]) if c]
    table: list[tuple[tuple[int, int], ...]] = []
    for e in range(n):
        if e < deg:
            table.append(((e, 1),))
            continue
        acc: dict[int, int] = {}
        for k, c in low:
            for j, v in table[e - deg + k]:
                acc[j] = acc.get(j, 0) + c * v
        table.append(tuple(sorted((j, v) for j, v in acc.items() if v)))
    return tuple(table)


def _reduce_num(n: int, raw: dict[int, object]) -> dict[int, object]:
    """Map exponents (any integers) to power-basis coordinates."""
    table = _reduction_table(n)
    out: dict[int, object] = {}
    for e, poly in raw.items():
        for j, c in table[e % n]:
            val = poly * c if c != 1 else poly
            if j in out:
                out[j] = out[j] + val
            else:
                out[j] = val
    return {j: v for j, v in out.items() if v}


def _lift_num(num: dict[int, object], n: int, target: int) -> dict[int, object]:
    if n == target:
        return num
    step = target // n
    return _reduce_num(target, {j * step: p for j, p in num.items()})


@lru_cache(maxsize=None)
def _sqrt_prime_data(q: int) -> tuple[int, tuple[tuple[int, int], ...]]:
    """Order ``n`` and exponent/coefficient pairs with ``sum c*zeta_n**e == sqrt(q)``."""
    if q == 2:
        return 8, ((1, 1), (7, 1))
    if not sympy.isprime(q):
        raise ScalarError(f"square roots are provided for primes only, got {q}")
    # Gauss sum g = sum (t/q) zeta_q^t has g^2 = (-1/q) q.
    terms = [(t, int(sympy.legendre_symbol(t, q))) for t in range(1, q)]
    if q % 4 == 1:
        return q, tuple(terms)
    # g = i*sqrt(q), so sqrt(q) = -i*g with i = zeta_4.
    n = 4 * q
    shifted = [((4 * t + 3 * q) % n, c) for t, c in terms]
    return n, tuple(shifted)


# ------------------------------------------------------------------- values


@dataclass(frozen=True)
class UnitRootExp:
    """A reduced fraction in Q/Z naming the root of unity exp(2*pi*i*num/den)."""

    num: int
    den: int

    def __post_init__(self) -> None:
        if self.den <= 0:
            raise ValueError("denominator must be positive")
        num = self.num % self.den
        g = math.gcd(num, self.den)
        object.__setattr__(self, "num", num // g)
        object.__setattr__(self, "den", self.den // g)

    @classmethod
    def of(cls, value: Union[Fraction, int, str]) -> "UnitRootExp":
        f = Fraction(value)
        return cls(f.numerator, f.denominator)

    def __add__(self, other: "UnitRootExp") -> "UnitRootExp":
        return UnitRootExp.of(Fraction(self.num, self.den) + Fraction(other.num, other.den))

    def __neg__(self) -> "UnitRootExp":
        return UnitRootExp(-self.num, self.den)

    def __mul__(self, k: int) -> "UnitRootExp":
        return UnitRootExp(self.num * k, self.den)


Coercible = Union["Scalar", int, Fraction]


class Scalar:
    """Exact element of ``Q(zeta_n)(X, aT, bT, omg, lam)``; immutable."""

    __slots__ = ("n", "num", "den")

    def __init__(self, n: int, num: dict[int, object], den=ONE_POLY, *, _canonical: bool = False):
        self.n = n
        if _canonical:
            self.num = num
            self.den = den
        else:
            if not den:
                raise ZeroDivisionError("zero denominator")
            self.num, self.den = _normalize(num, den)

    # construction ---------------------------------------------------------
    @classmethod
    def of(cls, value: Coercible) -> "Scalar":
        if isinstance(value, Scalar):
            return value
        if isinstance(value, (int, Fraction)):
            f = Fraction(value)
            if f == 0:
                return cls(1, {}, ONE_POLY, _canonical=True)
            return cls(1, {0: POLY_RING(QQ(f.numerator, f.denominator))}, ONE_POLY, _canonical=True)
        raise TypeError(f"cannot make a Scalar from {type(value).__name__}")

    @classmethod
    def var(cls, name: str) -> "Scalar":
        if name not in _GEN_BY_NAME:
            raise ScalarError(f"unknown indeterminate {name!r}; known: {', '.join(VARIABLES)}")
        return cls(1, {0: _GEN_BY_NAME[name]}, ONE_POLY, _canonical=True)

    # structure ------------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.num

    def is_constant(self) -> bool:
        """True when free of indeterminates."""
        return self.den == ONE_POLY and all(p.is_ground for p in self.num.values())

    def is_rational(self) -> bool:
        return self.is_constant() and set(self.num) <= {0}

    def to_fraction(self) -> Fraction:
        if not self.is_rational():
            raise ScalarError("scalar is not rational")
        if not self.num:
            return Fraction(0)
        c = self.num[0].LC
        return Fraction(int(c.numerator), int(c.denominator))

    def variables(self) -> set[str]:
        used: set[str] = set()
        for p in list(self.num.values()) + [self.den]:
            for mon in p.monoms():
                used.update(VARIABLES[i] for i, e in enumerate(mon) if e)
        return used

    def lift(self, target: int) -> "Scalar":
        if target % self.n:
            raise OrderMismatchError(f"cannot lift order {self.n} to {target}")
        if target == self.n:
            return self
        return Scalar(target, _lift_num(self.num, self.n, target), self.den, _canonical=True)

    # arithmetic -----------------------------------------------------------
    def _pair(self, other: Coercible) -> tuple["Scalar", "Scalar"]:
        other = Scalar.of(other)
        if other.n == self.n:
            return self, other
        n = math.lcm(self.n, other.n)
        return self.lift(n), other.lift(n)

    def __add__(self, other: Coercible) -> "Scalar":
        a, b = self._pair(other)
        if not a.num:
            return b
        if not b.num:
            return a
        if a.den == b.den:
            num = dict(a.num)
            for j, p in b.num.items():
                num[j] = num[j] + p if j in num else p
            num = {j: p for j, p in num.items() if p}
            if a.den == ONE_POLY:
                return Scalar(a.n, num, ONE_POLY, _canonical=True)
            return Scalar(a.n, num, a.den)
        num = {j: p * b.den for j, p in a.num.items()}
        for j, p in b.num.items():
            v = p * a.den
            num[j] = num[j] + v if j in num else v
        return Scalar(a.n, {j: p for j, p in num.items() if p}, a.den * b.den)

    __radd__ = __add__

    def __neg__(self) -> "Scalar":
        return Scalar(self.n, {j: -p for j, p in self.num.items()}, self.den, _canonical=True)

    def __sub__(self, other: Coercible) -> "Scalar":
        return self + (-Scalar.of(other))

    def __rsub__(self, other: Coercible) -> "Scalar":
        return Scalar.of(other) + (-self)

    def __mul__(self, other: Coercible) -> "Scalar":
        if isinstance(other, (int, Fraction)):
            if other == 0:
                return Scalar.of(0)
            c = QQ(Fraction(other).numerator, Fraction(other).denominator)
            return Scalar(self.n, {j: p * c for j, p in self.num.items()}, self.den, _canonical=True)
        a, b = self._pair(other)
        if not a.num or not b.num:
            return Scalar.of(0)
        raw: dict[int, object] = {}
        for i, p in a.num.items():
            for j, r in b.num.items():
                v = p * r
                raw[i + j] = raw[i + j] + v if (i + j) in raw else v
        num = _reduce_num(a.n, raw)
        den = a.den * b.den
        if den == ONE_POLY:
            return Scalar(a.n, num, ONE_POLY, _canonical=True)
        return Scalar(a.n, num, den)

    __rmul__ = __mul__

    def inverse(self) -> "Scalar":
        if not self.num:
            raise ZeroDivisionError("division by zero scalar")
        cof = _norm_cofactor(self.n, self.num)
        prod = _mul_num(self.n, self.num, cof)
        if set(prod) != {0}:
            raise ScalarError("internal error: norm is not rational")
        norm = prod[0]
        return Scalar(self.n, {j: p * self.den for j, p in cof.items()}, norm)

    def __truediv__(self, other: Coercible) -> "Scalar":
        return self * Scalar.of(other).inverse()

    def __rtruediv__(self, other: Coercible) -> "Scalar":
        return Scalar.of(other) * self.inverse()

    def __pow__(self, k: int) -> "Scalar":
        if k < 0:
            return self.inverse() ** (-k)
        result = Scalar.of(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def conj(self) -> "Scalar":
        """Complex conjugation; defined only without indeterminates."""
        if not self.is_constant():
            raise ScalarError("conjugation is undefined on scalars with indeterminates")
        return Scalar(self.n, _reduce_num(self.n, {-j: p for j, p in self.num.items()}), ONE_POLY, _canonical=True)

    def galois(self, k: int) -> "Scalar":
        """Apply ``zeta_n -> zeta_n**k`` for ``k`` prime to ``n``."""
        if math.gcd(k, self.n) != 1:
            raise ScalarError("Galois exponent must be prime to the order")
        return Scalar(self.n, _reduce_num(self.n, {j * k: p for j, p in self.num.items()}), self.den, _canonical=True)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction)):
            other = Scalar.of(other)
        if not isinstance(other, Scalar):
            return NotImplemented
        a, b = self._pair(other)
        return a.den == b.den and a.num == b.num

    def __hash__(self) -> int:
        # Orders differ between equal values only through lifting, so hash
        # the rational part alone; equal scalars still share a hash.
        if self.is_rational():
            return hash(self.to_fraction())
        return hash(("scalar", len(self.variables())))

    def subs(self, values: dict[str, Coercible]) -> "Scalar":
        """Substitute scalars for indeterminates."""
        images = {name: Scalar.of(v) for name, v in values.items()}
        return _evaluate_num(self.num, self.n, images) / _evaluate_poly(self.den, images)

    def __repr__(self) -> str:
        return f"Scalar({self.to_text()!r})"

    __str__ = lambda self: self.to_text()

    # serialization ---------------------------------------------------------
    def to_text(self) -> str:
        """Canonical text; :func:`parse_scalar` inverts it exactly."""
        z = _PRINT_RING.gens[0]
        top = _PRINT_RING.zero
        for j, p in sorted(self.num.items()):
            top += z**j * _to_print_ring(p)
        body = str(top)
        if self.den != ONE_POLY:
            body = f"({body})/({_to_print_ring(self.den)})"
        if self.n > 1 and any(j for j in self.num):
            return f"E{self.n}:{body}"
        return body


Scalar.ZERO = Scalar.of(0)  # type: ignore[attr-defined]
Scalar.ONE = Scalar.of(1)  # type: ignore[attr-defined]


def _to_print_ring(p) -> object:
    return _PRINT_RING.from_dict({(0,) + mon: c for mon, c in p.items()})


def _mul_num(n: int, a: dict, b: dict) -> dict:
    raw: dict[int, object] = {}
    for i, p in a.items():
        for j, r in b.items():
            v = p * r
            raw[i + j] = raw[i + j] + v if (i + j) in raw else v
    return _reduce_num(n, raw)


def _normalize(num: dict[int, object], den) -> tuple[dict[int, object], object]:
    num = {j: p for j, p in num.items() if p}
    if not num:
        return {}, ONE_POLY
    if den.is_ground:
        c = den.LC
        if c == 1:
            return num, ONE_POLY
        return {j: p.quo_ground(c) for j, p in num.items()}, ONE_POLY
    g = den
    for p in num.values():
        g = g.gcd(p)
        if g.is_ground:
            break
    if not g.is_ground:
        den = den.exquo(g)
        num = {j: p.exquo(g) for j, p in num.items()}
    c = den.LC
    if c != 1:
        den = den.quo_ground(c)
        num = {j: p.quo_ground(c) for j, p in num.items()}
    return num, den


def _galois_num(n: int, num: dict, k: int) -> dict:
    return _reduce_num(n, {j * k: p for j, p in num.items()})


def _key(num: dict) -> tuple:
    return tuple(sorted((j, tuple(sorted(p.items()))) for j, p in num.items()))


def _norm_cofactor(n: int, num: dict) -> dict:
    """Product of the distinct Galois conjugates of ``num`` other than itself."""
    if set(num) <= {0}:
        return {0: ONE_POLY}
    if len(num) == 1:
        (j, _), = num.items()
        # zeta**j * P with P rational: cofactor zeta**(-j).
        return _reduce_num(n, {-j: ONE_POLY})
    seen = {_key(num)}
    cof: dict = {0: ONE_POLY}
    for k in range(2, n):
        if math.gcd(k, n) != 1:
            continue
        conj = _galois_num(n, num, k)
        key = _key(conj)
        if key in seen:
            continue
        seen.add(key)
        cof = _mul_num(n, cof, conj)
    return cof


def _evaluate_poly(p, images: dict[str, Scalar]) -> Scalar:
    total = Scalar.of(0)
    for mon, c in p.items():
        term = Scalar.of(Fraction(int(c.numerator), int(c.denominator)))
        for i, e in enumerate(mon):
            if e:
                name = VARIABLES[i]
                base = images.get(name, Scalar.var(name))
                term = term * base**e
        total = total + term
    return total


def _evaluate_num(num: dict, n: int, images: dict[str, Scalar]) -> Scalar:
    total = Scalar.of(0)
    for j, p in num.items():
        total = total + root_of_unity(UnitRootExp(j, n)) * _evaluate_poly(p, images)
    return total


# --------------------------------------------------------------- public API


def root_of_unity(e: UnitRootExp, order: int | None = None) -> Scalar:
    """``exp(2*pi*i*e)``; with ``order`` given, its denominator must divide it."""
    if order is not None and order % e.den:
        raise OrderMismatchError(f"denominator {e.den} does not divide the order {order}")
    n = order if order is not None else e.den
    if n == 1:
        return Scalar.of(1)
    k = e.num * (n // e.den)
    return Scalar(n, _reduce_num(n, {k: ONE_POLY}), ONE_POLY, _canonical=True)


def sqrt_q(q: int) -> Scalar:
    """The positive square root of the prime ``q``."""
    n, terms = _sqrt_prime_data(q)
    return Scalar(n, _reduce_num(n, {e: POLY_RING(c) for e, c in terms}), ONE_POLY, _canonical=True)


def q_power(q: int, half_exponent: int) -> Scalar:
    """``q**(half_exponent/2)`` exactly."""
    whole, odd = divmod(half_exponent, 2)
    value = Scalar.of(Fraction(q) ** whole)
    return value * sqrt_q(q) if odd else value


def var(name: str) -> Scalar:
    return Scalar.var(name)


def scalar_arith(a: Coercible, b: Coercible | None, kind: str):
    """Dispatch ``add``, ``mul``, ``div``, ``eq`` or ``conj``."""
    a = Scalar.of(a)
    if kind == "conj":
        return a.conj()
    b = Scalar.of(b)  # type: ignore[arg-type]
    if kind == "add":
        return a + b
    if kind == "mul":
        return a * b
    if kind == "div":
        return a / b
    if kind == "eq":
        return a == b
    raise ValueError(f"unknown operation {kind!r}")


def parse_scalar(text: str) -> Scalar:
    """Inverse of :meth:`Scalar.to_text`."""
    text = text.strip()
    n = 1
    if text.startswith("E") and ":" in text:
        head, text = text.split(":", 1)
        n = int(head[1:])
    expr = sympy.sympify(text, locals={name: sympy.Symbol(name) for name in ("z",) + VARIABLES})
    numer, denom = sympy.fraction(sympy.together(expr))
    top = _PRINT_RING.from_expr(sympy.expand(numer))
    bottom = _PRINT_RING.from_expr(sympy.expand(denom))
    raw: dict[int, object] = {}
    for mon, c in top.items():
        mono = POLY_RING.from_dict({mon[1:]: c})
        raw[mon[0]] = raw[mon[0]] + mono if mon[0] in raw else mono
    if any(mon[0] for mon in bottom.monoms()):
        raise ScalarError("denominator must be free of roots of unity")
    den = POLY_RING.from_dict({mon[1:]: c for mon, c in bottom.items()})
    return Scalar(n, _reduce_num(n, raw), den)


def sum_scalars(values: Iterable[Coercible]) -> Scalar:
    total = Scalar.of(0)
    for v in values:
        total = total + v
    return total


# ------------------------------------------------------- rational functions


class RationalFunction:
    """Rational function of ``X`` over scalars; equality is exact."""

    __slots__ = ("value",)

    def __init__(self, value: Coercible):
        self.value = Scalar.of(value)

    @classmethod
    def from_coeffs(cls, numerator: list[Coercible], denominator: list[Coercible]) -> "RationalFunction":
        x = Scalar.var("X")
        top = sum_scalars(Scalar.of(c) * x**k for k, c in enumerate(numerator))
        bottom = sum_scalars(Scalar.of(c) * x**k for k, c in enumerate(denominator))
        return cls(top / bottom)

    def _coeffs(self, num: dict, n: int, den_side: bool) -> list[Scalar]:
        by_power: dict[int, dict] = {}
        for j, p in num.items():
            for mon, c in p.items():
                bucket = by_power.setdefault(mon[0], {})
                piece = POLY_RING.from_dict({(0,) + mon[1:]: c})
                bucket[j] = bucket[j] + piece if j in bucket else piece
        if not by_power:
            return [Scalar.of(0)]
        top = max(by_power)
        return [Scalar(n, by_power.get(k, {}), ONE_POLY, _canonical=True) for k in range(top + 1)]

    def numerator_coeffs(self) -> list[Scalar]:
        """Coefficients in ``X`` of the numerator, ascending."""
        return self._coeffs(self.value.num, self.value.n, False)

    def denominator_coeffs(self) -> list[Scalar]:
        return self._coeffs({0: self.value.den}, 1, True)

    def normalized_parts(self) -> tuple[list[Scalar], list[Scalar]]:
        """Numerator and denominator scaled so the denominator is 1 at ``X = 0``."""
        num, den = self.numerator_coeffs(), self.denominator_coeffs()
        d0 = den[0]
        if d0.is_zero():
            raise ScalarError("denominator vanishes at X = 0")
        return [c / d0 for c in num], [c / d0 for c in den]

    def series(self, degree: int) -> list[Scalar]:
        """Power-series coefficients of ``X**0 .. X**degree``."""
        num, den = self.normalized_parts()
        out: list[Scalar] = []
        for k in range(degree + 1):
            acc = num[k] if k < len(num) else Scalar.of(0)
            for i in range(1, min(k, len(den) - 1) + 1):
                acc = acc - den[i] * out[k - i]
            out.append(acc)
        return out

    def cross_equal(self, other: "RationalFunction") -> bool:
        """Equality by cross multiplication of numerators and denominators."""
        x = Scalar.var("X")
        def poly(cs: list[Scalar]) -> Scalar:
            return sum_scalars(c * x**k for k, c in enumerate(cs))
        lhs = poly(self.numerator_coeffs()) * poly(other.denominator_coeffs())
        rhs = poly(other.numerator_coeffs()) * poly(self.denominator_coeffs())
        return (lhs - rhs).is_zero()

    def __add__(self, other) -> "RationalFunction":
        return RationalFunction(self.value + _rf_value(other))

    def __sub__(self, other) -> "RationalFunction":
        return RationalFunction(self.value - _rf_value(other))

    def __mul__(self, other) -> "RationalFunction":
        return RationalFunction(self.value * _rf_value(other))

    __rmul__ = __mul__

    def __truediv__(self, other) -> "RationalFunction":
        return RationalFunction(self.value / _rf_value(other))

    def __eq__(self, other: object) -> bool:
        if isinstance(other, RationalFunction):
            return self.value == other.value
        if isinstance(other, (Scalar, int, Fraction)):
            return self.value == Scalar.of(other)
        return NotImplemented

    __hash__ = None  # type: ignore[assignment]

    def to_text(self) -> str:
        return self.value.to_text()

    def __repr__(self) -> str:
        return f"RationalFunction({self.to_text()!r})"


def _rf_value(other) -> Scalar:
    return other.value if isinstance(other, RationalFunction) else Scalar.of(other)


def geometric_closed_form(c0: Coercible, r: Coercible, k: int) -> RationalFunction:
    """``sum_{l >= 0} c0 * r**l * X**(k*l)`` as ``c0 / (1 - r*X**k)``."""
    if k < 1:
        raise ValueError("k must be positive")
    x = Scalar.var("X")
    return RationalFunction(Scalar.of(c0) / (1 - Scalar.of(r) * x**k))
