"""Characters, coset addresses, the Bessel value table and evaluation of B.

A Bessel function ``B`` is right invariant under the Iwahori subgroup I and
transforms on the left by ``Lambda (x) theta`` of ``R = T U``.  Every element
of ``H(F)`` lies in exactly one double coset ``R * frame * I`` for a frame
named by a :class:`CosetAddress`; :func:`reduce` finds that frame together with
an explicit, verified factorization.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

from .grp import (
    WEYL_ONE,
    WEYL_WORDS,
    Matrix,
    U_X,
    W_w,
    center,
    embed_levi,
    h_inverse,
    h_lm,
    in_iwahori,
    similitude,
    torus_block,
    weyl,
)
from .padicbase import FieldData, LElement, fval, residue
from .scalars import Scalar, UnitRootExp, root_of_unity, var

PSI_MAX_DEPTH = 8
WTAGS = ("none", "w0", "wplus", "wminus")


class BesselError(ValueError):
    """Invalid character data or coset address."""


class ReductionError(ValueError):
    """No verified factorization ``h = r * frame * k`` was found."""


# ----------------------------------------------------------------- theta


def psi(x, p: int, max_depth: int = PSI_MAX_DEPTH) -> Scalar:
    """``exp(2 pi i * frac_p(x))``: the additive character of conductor o."""
    x = Fraction(x)
    v = fval(x, p)
    if v >= 0:
        return Scalar.of(1)
    k = -v
    if k > max_depth:
        raise BesselError(f"p-denominator p^{k} exceeds the cyclotomic limit p^{max_depth}")
    mod = p**k
    return root_of_unity(UnitRootExp(residue(x * mod, p, k), mod))


def theta_eval(fd: FieldData, X, max_depth: int = PSI_MAX_DEPTH) -> Scalar:
    """``psi(tr(S X))`` for a symmetric 2x2 ``X``, given as a Matrix or ``(x11, x12, x22)``."""
    if isinstance(X, Matrix):
        if X[0, 1] != X[1, 0]:
            raise BesselError("X must be symmetric")
        x11, x12, x22 = X[0, 0], X[0, 1], X[1, 1]
    else:
        x11, x12, x22 = (Fraction(e) for e in X)
    return psi(fd.a * x11 + fd.b * x12 + fd.c * x22, fd.p, max_depth)


# ---------------------------------------------------------------- Lambda


def _unit_class(fd: FieldData, z: LElement, m0: int) -> tuple[int, int]:
    """Canonical label of ``z in o_L^x`` in ``o_L^x / o^x (1 + P^m0)``."""
    u, v = fd.to_basis(z)
    p, mod = fd.p, fd.p**m0
    u, v = residue(u, p, m0), residue(v, p, m0)
    if u % p:
        return 1, v * pow(u, -1, mod) % mod
    return u * pow(v, -1, mod) % mod, 1


@dataclass(frozen=True)
class UnitQuotient:
    """The finite cyclic group ``o_L^x / o^x (1 + P^m0)`` with a chosen generator."""

    m0: int
    order: int
    generator: LElement
    log: dict = field(repr=False)

    def discrete_log(self, fd: FieldData, z: LElement) -> int:
        if self.m0 == 0:
            return 0
        return self.log[_unit_class(fd, z, self.m0)]


def _is_oL_unit(fd: FieldData, z: LElement) -> bool:
    u, v = fd.to_basis(z)
    return fval(u, fd.p) >= 0 and fval(v, fd.p) >= 0 and fval(z.norm(), fd.p) == 0


def unit_quotient(fd: FieldData, m0: int, generator: Optional[LElement] = None) -> UnitQuotient:
    """Enumerate the quotient and take discrete logs to a generator."""
    one = fd.embed(1)
    if m0 == 0:
        return UnitQuotient(0, 1, one, {(1, 0): 0})
    mod = fd.p**m0
    labels = set()
    for u in range(mod):
        for v in range(mod):
            z = fd.from_basis(u, v)
            if _is_oL_unit(fd, z):
                labels.add(_unit_class(fd, z, m0))
    order = len(labels)

    def cycle(g: LElement) -> dict:
        out, z, k = {}, one, 0
        while True:
            lab = _unit_class(fd, z, m0)
            if lab in out:
                return out
            out[lab] = k
            z, k = z * g, k + 1

    if generator is not None:
        if not _is_oL_unit(fd, generator):
            raise BesselError("generator must be a unit of o_L")
        log = cycle(generator)
        if len(log) != order:
            raise BesselError(f"{generator} does not generate the quotient of order {order}")
        return UnitQuotient(m0, order, generator, log)
    for lab in sorted(labels):
        g = fd.from_basis(*lab)
        log = cycle(g)
        if len(log) == order:
            return UnitQuotient(m0, order, g, log)
    raise BesselError(f"the quotient of order {order} is not cyclic; only cyclic quotients are supported")


@dataclass(frozen=True)
class LambdaSpec:
    """A character of ``L^x`` trivial on ``F^x``.

    On units it sends the quotient generator to ``exp(2 pi i j / order)``.
    Field case, ramified: ``Lambda(varpi_L) = sign * sqrt(Lambda(varpi_L^2/varpi))``
    with the square root taken in the canonical cyclotomic order.
    Split case: ``lam = Lambda((varpi, 1))``, so ``Lambda((1, varpi)) = lam^-1``.
    """

    m0: int
    quotient: UnitQuotient
    j: int
    sign: int = 1
    lam: Optional[Scalar] = None

    def unit_value(self, fd: FieldData, z: LElement) -> Scalar:
        k = self.quotient.discrete_log(fd, z)
        return root_of_unity(UnitRootExp(self.j * k, self.quotient.order))


def conductor(fd: FieldData, quotient: UnitQuotient, j: int) -> int:
    """Least ``m`` with the unit character trivial on ``1 + P^m``."""
    m0 = quotient.m0
    if m0 == 0 or j % quotient.order == 0:
        return 0
    for m in range(m0 - 1, -1, -1):
        step = fd.p**m
        for u in range(0, fd.p**m0, step):
            for v in range(0, fd.p**m0, step):
                z = fd.from_basis(1 + u, v) if m > 0 else fd.from_basis(u, v)
                if _is_oL_unit(fd, z) and (j * quotient.discrete_log(fd, z)) % quotient.order:
                    return m + 1
    return 0


def make_lambda(
    fd: FieldData,
    m0: int,
    j: int = 1,
    *,
    sign: int = 1,
    lam: Union[Scalar, int, None] = None,
    generator: Optional[LElement] = None,
) -> LambdaSpec:
    """Build and validate a character of exact conductor ``m0``."""
    if m0 < 0:
        raise BesselError("m0 must be nonnegative")
    quotient = unit_quotient(fd, m0, generator)
    if m0 == 0:
        j = 0
    if conductor(fd, quotient, j) != m0:
        raise BesselError(f"the character with j = {j} does not have conductor {m0}")
    if sign not in (1, -1):
        raise BesselError("sign must be +1 or -1")
    if fd.split:
        lam = var("lam") if lam is None else Scalar.of(lam)
    elif lam is not None:
        raise BesselError("lam is only meaningful for split L")
    return LambdaSpec(m0, quotient, j % quotient.order, sign, lam)


def uniformizer_value(fd: FieldData, spec: LambdaSpec) -> Scalar:
    """``Lambda(varpi_L)`` in the field cases."""
    if fd.case == -1:
        return Scalar.of(1)
    if fd.case == 0:
        u0 = fd.uniformizer_L() * fd.uniformizer_L() * Fraction(1, fd.p)
        k = spec.quotient.discrete_log(fd, u0) * spec.j
        half = root_of_unity(UnitRootExp(k, 2 * spec.quotient.order))
        return half * spec.sign
    raise BesselError("the split case has no uniformizer of L; use lam")


def lambda_eval_spec(fd: FieldData, spec: LambdaSpec, z: LElement) -> Scalar:
    if z.norm() == 0:
        raise BesselError("Lambda is evaluated on invertible elements only")
    p = fd.p
    if fd.split:
        ratio = z.x / z.y
        k = fval(ratio, p)
        unit = fd.elem(ratio / Fraction(p) ** k, 1)
        return spec.lam**k * spec.unit_value(fd, unit)
    nv = fval(z.norm(), p)
    if fd.case == -1:
        unit = z * Fraction(p) ** (-(nv // 2))
        return spec.unit_value(fd, unit)
    unit = z / fd.uniformizer_L() ** nv
    return uniformizer_value(fd, spec) ** nv * spec.unit_value(fd, unit)


# ------------------------------------------------------------- addresses


@dataclass(frozen=True)
class CosetAddress:
    l: int
    m: int
    wtag: str = "none"
    stag: str = "1"

    def __post_init__(self) -> None:
        if self.wtag not in WTAGS:
            raise BesselError(f"unknown wtag {self.wtag!r}")
        if self.m < 0:
            raise BesselError("m must be nonnegative")
        allowed = WEYL_WORDS if (self.wtag == "none" and self.m > 0) else WEYL_ONE
        if self.stag not in allowed:
            raise BesselError(f"stag {self.stag!r} is not allowed here")
        if self.wtag != "none" and self.m != 0:
            raise BesselError("W-type addresses need m = 0")

    def check_case(self, fd: FieldData) -> None:
        if self.wtag == "w0" and fd.case != 0:
            raise BesselError("w0 addresses exist only for ramified L")
        if self.wtag in ("wplus", "wminus") and fd.case != 1:
            raise BesselError("wplus/wminus addresses exist only for split L")

    def to_text(self) -> str:
        s = "" if self.stag == "1" else "·" + self.stag
        if self.wtag == "none":
            return f"h({self.l},{self.m})·{self.stag}"
        sym = {"w0": "W0", "wplus": "W+", "wminus": "W-"}[self.wtag]
        return f"h({self.l},0)·{sym}·s1{s}"

    def shifted(self, dl: int) -> "CosetAddress":
        return CosetAddress(self.l + dl, self.m, self.wtag, self.stag)


def wtag_value(fd: FieldData, wtag: str) -> Fraction:
    if wtag == "w0":
        return fd.w0
    if wtag == "wplus":
        return fd.split_roots[0]
    if wtag == "wminus":
        return fd.split_roots[1]
    raise BesselError(f"no w attached to {wtag!r}")


def frame_matrix(fd: FieldData, addr: CosetAddress) -> Matrix:
    addr.check_case(fd)
    if addr.wtag == "none":
        return h_lm(fd.p, addr.l, addr.m) @ weyl(addr.stag)
    return h_lm(fd.p, addr.l, 0) @ W_w(wtag_value(fd, addr.wtag)) @ weyl("s1") @ weyl(addr.stag)


def addresses(fd: FieldData, lrange=range(-2, 4), mrange=range(0, 4)) -> list[CosetAddress]:
    """All valid addresses in a window."""
    wtags = {-1: (), 0: ("w0",), 1: ("wplus", "wminus")}[fd.case]
    out = []
    for l in lrange:
        for m in mrange:
            for s in WEYL_WORDS if m > 0 else WEYL_ONE:
                out.append(CosetAddress(l, m, "none", s))
            if m == 0:
                out.extend(CosetAddress(l, 0, w, s) for w in wtags for s in WEYL_ONE)
    return out


# ------------------------------------------------------------ the table


@dataclass(frozen=True)
class BesselContext:
    """Field data, the character Lambda and ``Omega(varpi)``; immutable."""

    fd: FieldData
    lam: LambdaSpec
    Omega: int

    def __post_init__(self) -> None:
        if self.Omega not in (1, -1):
            raise BesselError("Omega(varpi) must be +1 or -1")

    @property
    def omega(self) -> int:
        return -self.Omega

    @property
    def m0(self) -> int:
        return self.lam.m0

    def lambda_eval(self, z: LElement) -> Scalar:
        return lambda_eval_spec(self.fd, self.lam, z)

    def lambda_one_varpi(self) -> Scalar:
        """``Lambda((1, varpi))`` in the split case."""
        return self.lam.lam.inverse()

    def split_degenerate(self) -> bool:
        """Split, ``m0 = 0`` and ``omega * Lambda((1, varpi)) = -1`` (so ``C_0 = 0``)."""
        if not self.fd.split or self.m0 != 0:
            return False
        return self.lambda_one_varpi() * self.omega == -1

    def c_vanishes(self) -> bool:
        """``C_{m0} = 0`` (all values on the h(l,m) frames vanish)."""
        if self.m0 != 0:
            return False
        if self.fd.case == -1:
            return True
        if self.fd.case == 0:
            return uniformizer_value(self.fd, self.lam) == self.Omega
        return self.split_degenerate()


def make_context(
    fd: FieldData, m0: int = 0, j: int = 1, Omega: int = 1, *, sign: int = 1, lam=None, generator=None
) -> BesselContext:
    return BesselContext(fd, make_lambda(fd, m0, j, sign=sign, lam=lam, generator=generator), Omega)


def lambda_eval(ctx: BesselContext, z: LElement) -> Scalar:
    return ctx.lambda_eval(z)


def a_lm(ctx: BesselContext, l: int, m: int) -> Scalar:
    q = Fraction(ctx.fd.q)
    shift = m - ctx.m0 + 1 if ctx.m0 >= 1 else m
    return Scalar.of(q ** (-4 * shift) * (-ctx.omega * q**-3) ** l)


def _table_h(ctx: BesselContext, l: int, m: int, s: str) -> Scalar:
    q, om, m0 = Fraction(ctx.fd.q), ctx.omega, ctx.m0
    if s in WEYL_ONE:
        if m <= m0 - 2:
            return Scalar.of(0)
        coef = {"1": 1, "s2": -1 / q, "s2s1": 1 / q**2, "s2s1s2": -1 / q**3}[s]
        at_minus_one = {"s2s1s2": om}.get(s)
    else:
        if m <= m0 - 1:
            return Scalar.of(0)
        coef = {"s1": -q, "s1s2": 1, "s1s2s1": -1 / q, "s1s2s1s2": 1 / q**2}[s]
        at_minus_one = {"s1s2": -om * q**3, "s1s2s1": om * q**2, "s1s2s1s2": -om * q}.get(s)
    if l >= 0:
        return a_lm(ctx, l, m) * coef
    if l == -1 and at_minus_one is not None:
        return a_lm(ctx, 0, m) * at_minus_one
    return Scalar.of(0)


def _table_w(ctx: BesselContext, l: int, wtag: str, s: str) -> Scalar:
    q, om = Fraction(ctx.fd.q), ctx.omega
    zero = Scalar.of(0)
    if ctx.m0 >= 1:
        return zero
    if wtag == "w0":
        if ctx.c_vanishes():
            return zero
        if s == "1":
            return a_lm(ctx, l, 0) * (-q) if l >= 0 else zero
        if s == "s2":
            if l == -1:
                return Scalar.of(-om * q**3)
            return a_lm(ctx, l, 0) if l >= 0 else zero
        coef = om * q**2 if s == "s2s1" else -om * q
        return a_lm(ctx, l + 1, 0) * coef if l >= -1 else zero
    # W+ = omega*Lambda((1,varpi)) * W-; the displayed nondegenerate rows are the W- values
    y = ctx.lambda_one_varpi() * om
    if ctx.split_degenerate():
        row = _split_degenerate_row(ctx, l, s)
        return row if wtag == "wplus" else row / y
    row = _split_row(ctx, l, s)
    return row * y if wtag == "wplus" else row


def _split_degenerate_row(ctx: BesselContext, l: int, s: str) -> Scalar:
    q, om, zero = Fraction(ctx.fd.q), ctx.omega, Scalar.of(0)
    if s == "1":
        return a_lm(ctx, l, 0) if l >= 0 else zero
    if s == "s2":
        return a_lm(ctx, l, 0) * (-1 / q) if l >= 0 else zero
    coef = -om * q if s == "s2s1" else om
    return a_lm(ctx, l + 1, 0) * coef if l >= -1 else zero


def _split_row(ctx: BesselContext, l: int, s: str) -> Scalar:
    q, om, zero = Fraction(ctx.fd.q), ctx.omega, Scalar.of(0)
    den = ctx.lambda_one_varpi() * om + 1
    if s == "1":
        return a_lm(ctx, l, 0) * (-(q - 1)) / den if l >= 0 else zero
    if s == "s2":
        return a_lm(ctx, l, 0) * ((q - 1) / q) / den if l >= 0 else zero
    coef = om * q * (q - 1) if s == "s2s1" else -om * (q - 1)
    return a_lm(ctx, l + 1, 0) * coef / den if l >= -1 else zero


def b_table(ctx: BesselContext, addr: CosetAddress) -> Scalar:
    """The value of the normalized Bessel function at the frame of ``addr``."""
    addr.check_case(ctx.fd)
    if addr.wtag != "none":
        return _table_w(ctx, addr.l, addr.wtag, addr.stag)
    if ctx.c_vanishes():
        return Scalar.of(0)
    return _table_h(ctx, addr.l, addr.m, addr.stag)


def dim_and_testvector(ctx: BesselContext):
    """``(dim, testvector)``; ``testvector`` is a :class:`LamCondition` when it depends on a symbolic lam."""
    fd = ctx.fd
    if fd.case != 1 and ctx.c_vanishes():
        return 0, False
    if ctx.m0 > 1:
        return 1, False
    if fd.split and ctx.m0 == 0:
        value = ctx.lambda_one_varpi()
        if not value.is_constant():
            return 1, LamCondition(excluded=Scalar.of(ctx.Omega))
        return 1, value != ctx.Omega
    return 1, True


@dataclass(frozen=True)
class LamCondition:
    """True exactly when ``Lambda((1, varpi)) != excluded``."""

    excluded: Scalar

    def evaluate(self, lam_value) -> bool:
        return Scalar.of(lam_value).inverse() != self.excluded

    def __bool__(self) -> bool:
        raise TypeError("the test-vector condition depends on lam; call evaluate()")

    def to_text(self) -> str:
        return f"Lambda((1,varpi)) != {self.excluded.to_text()}"


# ------------------------------------------------------------ reduction


@dataclass(frozen=True)
class Factorization:
    """``h = U_X * T(zeta) * z * frame(addr) * k`` with ``z`` central and ``k`` in I."""

    X: tuple
    zeta: LElement
    z: Fraction
    addr: CosetAddress
    k: Matrix

    def matrix(self, fd: FieldData) -> Matrix:
        return U_X(*self.X) @ embed_levi(torus_block(fd, self.zeta)) @ center(self.z) @ frame_matrix(fd, self.addr) @ self.k


def _levi(g2: Matrix, lam: Fraction) -> Matrix:
    lower = g2.transpose().inverse().scale(lam)
    return Matrix.from_blocks(g2, Matrix([[0, 0], [0, 0]]), Matrix([[0, 0], [0, 0]]), lower)


def _siegel_step(g: Matrix, p: int):
    """Find ``s`` in W1 with ``g = P * s * n``, ``P`` Siegel parabolic and ``n`` in I."""
    for s in WEYL_ONE:
        ws = weyl(s)
        G = g @ h_inverse(ws)
        D = G.block(1, 1)
        if D.det() == 0:
            continue
        Y = D.inverse() @ G.block(1, 0)
        lower = Matrix.from_blocks(Matrix.identity(2), Matrix([[0, 0], [0, 0]]), Y, Matrix.identity(2))
        n = h_inverse(ws) @ lower @ ws
        if in_iwahori(n, p):
            return s, G @ h_inverse(lower), n
    raise ReductionError("no Siegel-parabolic factorization with an Iwahori remainder")


def _min_val(mat: Matrix, p: int):
    return min(fval(e, p) for row in mat.rows for e in row)


def _torus_frame(fd: FieldData, A: Matrix):
    """``A = T(zeta0) * diag(p^m, 1) * gamma`` with ``gamma`` in GL2(o)."""
    p = fd.p
    S = torus_block(fd, fd.alpha)
    conj = A.inverse() @ S @ A
    m = max(0, -_min_val(conj, p))
    pm = Fraction(p) ** m
    target = fval(A.det(), p)
    Spm = S.scale(pm)
    for x in [(0, 1)] + [(1, t) for t in range(p)]:
        v1 = A[0, 0] * x[0] + A[0, 1] * x[1]
        v2 = A[1, 0] * x[0] + A[1, 1] * x[1]
        w1 = Spm[0, 0] * v1 + Spm[0, 1] * v2
        w2 = Spm[1, 0] * v1 + Spm[1, 1] * v2
        if fval(v1 * w2 - v2 * w1, p) == target:
            zeta0 = fd.from_basis(v2, v1)
            F0 = Matrix.diag(pm, 1)
            gamma = F0.inverse() @ torus_block(fd, zeta0).inverse() @ A
            return m, zeta0, gamma
    raise ReductionError("no generator of the lattice found")


def _line_frame(fd: FieldData, m: int, gamma: Matrix):
    """Split ``gamma = F0^-1 T(eps) F0 * frame2 * kappa`` with ``kappa`` lower triangular mod p."""
    p = fd.p
    x, y = gamma[0, 1], gamma[1, 1]
    sigma = Matrix([[0, 1], [1, 0]])
    if m > 0:
        if fval(y, p) == 0:
            t = Fraction(residue(x / y, p))
            return fd.from_basis(1, t * Fraction(p) ** m), Matrix.identity(2), "none", None
        return fd.embed(1), sigma, "none", "s1"
    eps = fd.from_basis(y, x)
    if fval(eps.norm(), p) == 0:
        return eps, Matrix.identity(2), "none", None
    slope = residue(y / x, p)
    tags = {0: ("w0",), 1: ("wplus", "wminus")}.get(fd.case, ())
    for tag in tags:
        w = wtag_value(fd, tag)
        if residue(w, p) == slope:
            return fd.embed(1), Matrix([[1, 0], [w, 1]]) @ sigma, tag, None
    raise ReductionError("the line is fixed by the torus but matches no w")


def _compose_stag(prefix: Optional[str], s: str) -> str:
    if prefix is None:
        return s
    word = prefix + ("" if s == "1" else s)
    if word not in WEYL_WORDS:
        raise ReductionError(f"unexpected Weyl word {word}")
    return word


def factorize(fd: FieldData, h: Matrix) -> Factorization:
    """A verified factorization ``h = u t z * frame * k``."""
    p = fd.p
    lam_h = similitude(h, "H")
    if lam_h is None:
        raise ReductionError("matrix is not in GSp4(F)")
    s, P, n = _siegel_step(h, p)
    A, B, D = P.block(0, 0), P.block(0, 1), P.block(1, 1)
    Xm = B @ D.inverse()
    m, zeta0, gamma = _torus_frame(fd, A)
    eps, frame2, wtag, prefix = _line_frame(fd, m, gamma)
    zeta = zeta0 * eps
    F0 = Matrix.diag(Fraction(p) ** m, 1)
    kappa = frame2.inverse() @ F0.inverse() @ torus_block(fd, eps).inverse() @ F0 @ gamma
    lam1 = lam_h / zeta.norm()
    l = -fval(lam1, p)
    nu = lam1 * Fraction(p) ** l
    ws = weyl(s)
    k = h_inverse(ws) @ _levi(kappa, nu) @ ws @ n
    if wtag == "none":
        addr = CosetAddress(l, m, "none", _compose_stag(prefix, s))
    else:
        addr = CosetAddress(l, 0, wtag, s)
    fac = Factorization((Xm[0, 0], Xm[0, 1], Xm[1, 1]), zeta, Fraction(p) ** (-(m + l)), addr, k)
    verify_factorization(fd, h, fac)
    return fac


def verify_factorization(fd: FieldData, h: Matrix, fac: Factorization) -> None:
    if not in_iwahori(fac.k, fd.p):
        raise ReductionError("witness k is not in I")
    if fac.matrix(fd) != h:
        raise ReductionError("factorization does not multiply back to h")


@dataclass(frozen=True)
class Reduction:
    rvalue: Scalar
    addr: CosetAddress
    witness: Factorization


def reduce(ctx: BesselContext, h: Union[Matrix, Factorization]) -> Reduction:
    """``(Lambda (x) theta)(r)``, the address and the verified witness for ``h``."""
    fd = ctx.fd
    if isinstance(h, Factorization):
        verify_factorization(fd, h.matrix(fd), h)
        fac = h
    else:
        fac = factorize(fd, h)
    rvalue = ctx.lambda_eval(fac.zeta) * theta_eval(fd, fac.X)
    return Reduction(rvalue, fac.addr, fac)


def b_eval(ctx: BesselContext, h: Union[Matrix, Factorization]) -> Scalar:
    """``B(h)`` for the normalized Bessel function of ``ctx``."""
    red = reduce(ctx, h)
    value = b_table(ctx, red.addr)
    if value.is_zero():
        return value
    return red.rvalue * value
