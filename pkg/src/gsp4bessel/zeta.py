"""The local zeta integral against GL(2) newforms and its L-factor identity.

Everything is a rational function of ``X = q^(-s)`` with exact coefficients.
The integral collapses to a single sum over ``l >= 0`` because the section
``W#`` is supported only on the frame ``(m, t) = (0, 1)``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .besselcore import (
    BesselContext,
    CosetAddress,
    LamCondition,
    b_table,
    dim_and_testvector,
)
from .grp import WEYL_ONE, WEYL_WORDS, Matrix, T_zeta, U_X, eta, in_iwahori, lift_to_L, similitude, similitude_inverse
from .padicbase import FieldData, LElement, fval
from .scalars import RationalFunction, Scalar, geometric_closed_form, q_power, var

TAU_CLASSES = ("unram_ps", "unram_ram_ps", "ram_ram_ps", "supercuspidal_or_ramSt", "unramSt")
TRUNCATION_TERMS = 12
SERIES_DEGREE = 36


class ZetaError(ValueError):
    """Invalid tau data or a context that does not carry a test vector."""


class DegenerateParameterError(ZetaError):
    """A geometric ratio or a partial-fraction denominator degenerates formally."""


@dataclass(frozen=True)
class TauSpec:
    """A generic irreducible representation of GL(2) by class and unramified data.

    ``a``, ``b`` are ``alpha(varpi)``, ``beta(varpi)`` and ``omg`` is
    ``Omega'(varpi)``; each defaults to its indeterminate.
    """

    cls: str
    a: Scalar = None  # type: ignore[assignment]
    b: Scalar = None  # type: ignore[assignment]
    omg: Scalar = None  # type: ignore[assignment]
    conductor: Optional[int] = None

    def __post_init__(self) -> None:
        if self.cls not in TAU_CLASSES:
            raise ZetaError(f"unknown tau class {self.cls!r}")
        for name, default in (("a", "aT"), ("b", "bT"), ("omg", "omg")):
            value = getattr(self, name)
            object.__setattr__(self, name, var(default) if value is None else Scalar.of(value))
        n = self.conductor
        if n is None:
            n = {"unram_ps": 0, "unram_ram_ps": 1, "unramSt": 1}.get(self.cls, 2)
            object.__setattr__(self, "conductor", n)
        if (n == 0) != (self.cls == "unram_ps"):
            raise ZetaError("conductor 0 occurs exactly for the unramified principal series")
        if self.cls == "unramSt" and n != 1:
            raise ZetaError("the unramified twist of Steinberg has conductor 1")
        if self.cls in ("unram_ps", "unram_ram_ps"):
            if self.a.is_zero() or self.b.is_zero():
                raise ZetaError("Satake parameters must be nonzero")
        if self.cls == "unramSt" and self.omg.is_zero():
            raise ZetaError("omg must be nonzero")

    @property
    def n0(self) -> int:
        return max(1, self.conductor)

    def central_value(self) -> Scalar:
        """``omega_tau(varpi)``."""
        if self.cls == "unramSt":
            return self.omg * self.omg
        return self.a * self.b

    def irregularity_ok(self, q: int) -> Optional[bool]:
        """``a/b`` avoids ``q^(+-1)``; None while that is undecidable symbolically."""
        if self.cls == "unram_ps":
            ratio = self.a / self.b
            if not ratio.is_constant():
                return None
            return ratio != q and ratio != Fraction(1, q)
        return True


@dataclass(frozen=True)
class ZetaContext:
    bctx: BesselContext
    tau: TauSpec

    def __post_init__(self) -> None:
        if self.bctx.m0 > 1:
            raise ZetaError("the character Lambda must have conductor at most 1")
        dim, tv = dim_and_testvector(self.bctx)
        # A symbolic split lam stays generic; B(h(l,0)) does not involve it.
        if dim != 1 or not (isinstance(tv, LamCondition) or tv):
            raise ZetaError("the Iwahori vector is not a test vector for this Lambda")
        if self.tau.irregularity_ok(self.bctx.fd.q) is False:
            raise ZetaError("alpha/beta must not equal q or 1/q")

    @property
    def q(self) -> int:
        return self.bctx.fd.q

    @property
    def omega(self) -> int:
        return self.bctx.omega

    @property
    def C(self) -> Fraction:
        q = Fraction(self.q)
        return (1 - self.bctx.fd.case / q) * q / ((1 + q) ** 2 * (1 + q**2))


def make_zeta_context(bctx: BesselContext, cls: str, **params) -> ZetaContext:
    return ZetaContext(bctx, TauSpec(cls, **params))


# ----------------------------------------------------------- Whittaker


def whittaker_newform(tau: TauSpec, q: int, l: int) -> Scalar:
    """The normalized newform at ``diag(varpi^l, 1)``."""
    if l < 0:
        raise ZetaError("l must be nonnegative")
    if tau.cls == "unram_ps":
        top = tau.a ** (l + 1) - tau.b ** (l + 1)
        return q_power(q, -l) * top / (tau.a - tau.b) if tau.a != tau.b else q_power(q, -l) * (l + 1) * tau.a**l
    if tau.cls == "unram_ram_ps":
        return tau.central_value() ** l * tau.a ** (-l) * q_power(q, -l)
    if tau.cls == "unramSt":
        return tau.omg**l * Fraction(q) ** (-l)
    return Scalar.of(1 if l == 0 else 0)


def wsharp_support(m: int, t: str) -> bool:
    """Whether ``eta * h(l,m) * t`` meets the support of ``W#``."""
    if m < 0 or t not in WEYL_WORDS:
        raise ZetaError(f"invalid frame ({m}, {t!r})")
    return m == 0 and t == "1"


def wsharp_at_frame(zctx: ZetaContext, l: int) -> tuple[Scalar, int]:
    """``(coefficient, k)`` with ``W#(eta h(l,0), s) = coefficient * X^k``."""
    if l < 0:
        raise ZetaError("l must be nonnegative")
    q = zctx.q
    coef = q_power(q, -3 * l) * zctx.tau.central_value() ** (-l) * whittaker_newform(zctx.tau, q, l)
    return coef, 3 * l


def volume_V(zctx: ZetaContext, l: int) -> Fraction:
    if l < 0:
        raise ZetaError("l must be nonnegative")
    return zctx.C * Fraction(zctx.q) ** (3 * l)


# ------------------------------------------------------ the integral


def zeta_term(zctx: ZetaContext, l: int, m: int = 0, t: str = "1") -> tuple[Scalar, int]:
    """One summand ``W# * B * V`` of the double sum, as ``(coefficient, X-degree)``."""
    if not wsharp_support(m, t):
        return Scalar.of(0), 0
    w, k = wsharp_at_frame(zctx, l)
    b = b_table(zctx.bctx, CosetAddress(l, 0, "none", "1"))
    return w * b * volume_V(zctx, l), k


def zeta_truncated(zctx: ZetaContext, terms: int = TRUNCATION_TERMS, mmax: int = 3) -> list[Scalar]:
    """Coefficients of ``X^0 .. X^(3*terms)`` of the double sum over ``l < terms``, ``m <= mmax``."""
    out = [Scalar.of(0)] * (3 * terms + 1)
    for l in range(terms):
        for m in range(mmax + 1):
            for t in WEYL_WORDS if m > 0 else WEYL_ONE:
                if not wsharp_support(m, t):
                    continue
                coef, k = zeta_term(zctx, l, m, t)
                out[k] = out[k] + coef
    return out


def _geometric(c0: Scalar, r: Scalar) -> RationalFunction:
    if r == 1:
        raise DegenerateParameterError("geometric ratio equals 1")
    return geometric_closed_form(c0, r, 3)


def zeta_closed(zctx: ZetaContext) -> RationalFunction:
    """``Z(s)`` summed as geometric series in ``X^3``."""
    tau, q, om, C = zctx.tau, zctx.q, zctx.omega, zctx.C
    if tau.cls == "unram_ps":
        if tau.a == tau.b:
            raise DegenerateParameterError("partial fractions need alpha(varpi) != beta(varpi)")
        # sum_l (a b^-l - b a^-l)/(a - b) * (-om q^-2)^l X^3l
        base = Scalar.of(Fraction(-om, q**2))
        diff = tau.a - tau.b
        first = _geometric(C * tau.a / diff, base / tau.b)
        second = _geometric(C * tau.b / diff, base / tau.a)
        return first - second
    if tau.cls == "unram_ram_ps":
        return _geometric(Scalar.of(C), Scalar.of(Fraction(-om, q**2)) / tau.a)
    if tau.cls == "unramSt":
        return _geometric(Scalar.of(C), q_power(q, -5) * (-om) / tau.omg)
    return RationalFunction(C)


def _euler(coef: Scalar) -> Scalar:
    """``1 - coef * X^3``."""
    return 1 - coef * var("X") ** 3


def l_factor(zctx: ZetaContext) -> RationalFunction:
    """``L(3s + 1/2, pi x contragredient(tau))`` as a function of ``X``."""
    tau, q = zctx.tau, zctx.q
    Om = Scalar.of(zctx.bctx.Omega)
    if tau.cls == "unram_ps":
        return RationalFunction(1 / (_euler(Om / tau.a * q_power(q, -4)) * _euler(Om / tau.b * q_power(q, -4))))
    if tau.cls == "unram_ram_ps":
        return RationalFunction(1 / _euler(Om / tau.a * q_power(q, -4)))
    if tau.cls == "unramSt":
        return RationalFunction(1 / (_euler(Om / tau.omg * q_power(q, -3)) * _euler(Om / tau.omg * q_power(q, -5))))
    return RationalFunction(1)


def y_prime(zctx: ZetaContext) -> RationalFunction:
    C = Scalar.of(zctx.C)
    if zctx.tau.cls == "unramSt":
        return RationalFunction(C * _euler(q_power(zctx.q, -3) * (-zctx.omega) / zctx.tau.omg))
    return RationalFunction(C)


@dataclass
class TheoremCheck:
    passed: bool
    lhs: str
    rhs: str
    difference: str
    series_ok: bool
    l_factor_normalized: bool


def verify_integral_theorem(zctx: ZetaContext) -> TheoremCheck:
    """``Z = Y' * L`` exactly, and the truncated sum agrees with the series of ``Z``."""
    z = zeta_closed(zctx)
    rhs = y_prime(zctx) * l_factor(zctx)
    diff = z - rhs
    exact = z == rhs and z.cross_equal(rhs)
    series = z.series(SERIES_DEGREE)
    direct = zeta_truncated(zctx, TRUNCATION_TERMS)
    series_ok = all(series[k] == direct[k] for k in range(SERIES_DEGREE))
    normalized = l_factor(zctx).denominator_coeffs()[0] == l_factor(zctx).numerator_coeffs()[0]
    return TheoremCheck(exact and series_ok and normalized, z.to_text(), rhs.to_text(), diff.to_text(), series_ok, normalized)


# ------------------------------------------- well-definedness guard


def l_valuation(fd: FieldData, z: LElement):
    """Normalized valuation on ``L``; the minimum over both factors when split."""
    p = fd.p
    if fd.split:
        return min(fval(z.x, p), fval(z.y, p))
    v = fval(z.norm(), p)
    return v if fd.case == 0 else v // 2 if v != float("inf") else v


def _random_oL(fd: FieldData, rng: random.Random, scale: int = 1) -> LElement:
    u, v = rng.randrange(fd.p**2), rng.randrange(fd.p**2)
    return fd.from_basis(u * scale, v * scale)


def _klingen_element(fd: FieldData, zeta, a, b, c, d, mu, z, w, y) -> Matrix:
    zero, one = fd.embed(0), fd.embed(1)
    m = Matrix([[zeta, zero, zero, zero], [zero, a, zero, b], [zero, zero, zeta.conj().inverse() * mu, zero], [zero, c, zero, d]])
    n1 = Matrix([[one, z, zero, zero], [zero, one, zero, zero], [zero, zero, one, zero], [zero, zero, -z.conj(), one]])
    n2 = Matrix([[one, zero, fd.embed(w), y], [zero, one, y.conj(), zero], [zero, zero, one, zero], [zero, zero, zero, one]])
    return m @ n1 @ n2


def _congruence_factor(fd: FieldData, n0: int, rng: random.Random) -> Matrix:
    """An element of ``P(F)`` congruent to 1 modulo ``p^n0``."""
    pn = fd.p**n0
    zeta = 1 + _random_oL(fd, rng, pn)
    lam = 1 + _random_oL(fd, rng, pn)
    g = [[1 + pn * rng.randrange(fd.p), pn * rng.randrange(fd.p)], [pn * rng.randrange(fd.p), 1 + pn * rng.randrange(fd.p)]]
    det = Fraction(g[0][0] * g[1][1] - g[0][1] * g[1][0])
    a, b, c, d = (lam * Fraction(e) for e in (g[0][0], g[0][1], g[1][0], g[1][1]))
    mu = lam.norm() * det
    return _klingen_element(fd, zeta, a, b, c, d, mu, _random_oL(fd, rng, pn), Fraction(pn * rng.randrange(fd.p)), _random_oL(fd, rng, pn))


def _iwahori_parabolic_factor(fd: FieldData, rng: random.Random) -> Optional[Matrix]:
    """A random ``k`` in ``I`` with ``eta k eta^-1`` in ``P``, or None."""
    p = fd.p
    t = fd.from_basis(rng.randrange(1, p * p + 1), p * rng.randrange(p * p))
    if fval(t.norm(), p) != 0:
        return None
    k = T_zeta(fd, t) @ U_X(rng.randrange(p * p), rng.randrange(p * p), rng.randrange(p * p))
    return k if in_iwahori(k, p) else None


@dataclass
class GuardReport:
    passed: bool
    samples: int
    failures: list


def wsharp_guard_check(zctx: ZetaContext, samples: int = 50, seed: int = 0) -> GuardReport:
    """Sample ``A in I * Gamma(P^n0)`` with ``eta A eta^-1 = m n`` and test ``c'`` and ``a'/conj(zeta)``."""
    fd, n0 = zctx.bctx.fd, zctx.tau.n0
    rng = random.Random(seed)
    et = eta(fd)
    et_inv = similitude_inverse(et, "G")
    failures = []
    done = 0
    while done < samples:
        k = _iwahori_parabolic_factor(fd, rng)
        if k is None:
            continue
        gamma_conj = _congruence_factor(fd, n0, rng)
        if similitude(gamma_conj, "G") is None:
            raise ZetaError("constructed parabolic factor is not unitary")
        mn = lift_to_L(fd, et @ lift_to_L(fd, k) @ et_inv @ gamma_conj)
        if any(not mn[i, 0].is_zero() for i in (1, 2, 3)):
            raise ZetaError("eta k eta^-1 left the parabolic")
        zeta, a1, c1 = mn[0, 0], mn[1, 1], mn[3, 1]
        ok = l_valuation(fd, c1) >= n0 and l_valuation(fd, a1 / zeta.conj() - 1) >= n0
        if not ok:
            failures.append({"k": k.serialize()})
        done += 1
    return GuardReport(not failures, done, failures)
