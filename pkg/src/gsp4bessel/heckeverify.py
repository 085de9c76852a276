"""Exact verification of the finite identities satisfied by the Bessel function.

Covers the Hecke and Atkin-Lehner conditions at every coset frame, the
well-definedness of the value table, the character sums, the flag-variety
index and the norm formula with a counting-based volume oracle.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .besselcore import (
    BesselContext,
    CosetAddress,
    addresses,
    b_eval,
    b_table,
    frame_matrix,
    theta_eval,
)
from .grp import (
    WEYL_WORDS,
    WORD_LENGTH,
    Matrix,
    T_zeta,
    torus_block,
    U_X,
    eta0,
    gsp4_mod_p_count,
    h_inverse,
    in_iwahori,
    u1,
    u2,
    weyl,
)
from .padicbase import FieldData, beta_wm, fval
from .scalars import Scalar, sum_scalars


class VerificationError(RuntimeError):
    """A verification harness could not run (not a failed check)."""


@dataclass
class VerificationReport:
    check: str
    params: dict
    status: str
    lhs: Optional[str] = None
    rhs: Optional[str] = None
    witness: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def to_json(self) -> str:
        row = {"check": self.check, "params": self.params, "status": self.status, "lhs": self.lhs, "rhs": self.rhs}
        if self.witness:
            row["witness"] = self.witness
        return json.dumps(row, sort_keys=True, ensure_ascii=False)


def _text(x) -> str:
    return Scalar.of(x).to_text() if not isinstance(x, Scalar) else x.to_text()


def _report(check: str, params: dict, lhs, rhs, witness: Optional[dict] = None) -> VerificationReport:
    ok = Scalar.of(lhs) == Scalar.of(rhs)
    return VerificationReport(check, params, "pass" if ok else "fail", _text(lhs), _text(rhs), witness or {})


# ------------------------------------------------------------- Hecke


HECKE_KINDS = ("T1", "T2", "AL")


def hecke_lhs(ctx: BesselContext, kind: str, h: Matrix) -> Scalar:
    """The left side of the Hecke or Atkin-Lehner condition at ``h``; zero when it holds."""
    p = ctx.fd.p
    if kind == "T1":
        terms = [b_eval(ctx, h @ u1(w)) for w in range(p)] + [b_eval(ctx, h @ weyl("s1"))]
    elif kind == "T2":
        terms = [b_eval(ctx, h @ u2(y)) for y in range(p)] + [b_eval(ctx, h @ weyl("s2"))]
    elif kind == "AL":
        terms = [b_eval(ctx, h @ eta0(p)), b_eval(ctx, h) * (-ctx.omega)]
    else:
        raise VerificationError(f"unknown Hecke kind {kind!r}")
    return sum_scalars(terms)


def verify_hecke(ctx: BesselContext, lrange=range(-2, 5), mrange=range(0, 5)) -> list[VerificationReport]:
    """One report per (kind, address) in the window."""
    out = []
    for addr in addresses(ctx.fd, lrange, mrange):
        h = frame_matrix(ctx.fd, addr)
        for kind in HECKE_KINDS:
            lhs = hecke_lhs(ctx, kind, h)
            out.append(_report(f"hecke_{kind}", {"addr": addr.to_text()}, lhs, 0))
    return out


# --------------------------------------------------- lattice solving


def solve_integrality(M: list[list[Fraction]], c: list[Fraction], p: int):
    """Solve ``c + M x in Z_(p)^rows`` for ``x in Q^n``.

    Returns ``(x0, T, free)`` where the solutions are ``x0 + T y`` with ``y``
    integral in the first ``rank`` coordinates and arbitrary in the ``free``
    trailing ones, or ``None`` when there is no solution.
    """
    rows = [list(map(Fraction, r)) for r in M]
    c = list(map(Fraction, c))
    n = len(rows[0]) if rows else 0
    T = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    pivots = []
    used = set()
    for col in range(n):
        best = None
        for r in range(len(rows)):
            if r in used:
                continue
            for j in range(col, n):
                e = rows[r][j]
                if e != 0 and (best is None or fval(e, p) < best[0]):
                    best = (fval(e, p), r, j)
        if best is None:
            break
        _, r, j = best
        for row in rows + [*T]:
            row[col], row[j] = row[j], row[col]
        piv = rows[r][col]
        # scale the variable so the pivot becomes 1
        for row in rows + T:
            row[col] = row[col] / piv
        # clear the pivot row by column operations
        for k in range(n):
            if k != col and rows[r][k] != 0:
                f = rows[r][k]
                for row in rows + T:
                    row[k] = row[k] - f * row[col]
        # clear the pivot column by integral row operations
        for r2 in range(len(rows)):
            if r2 != r and rows[r2][col] != 0:
                f = rows[r2][col]
                assert fval(f, p) >= 0
                rows[r2] = [a - f * b for a, b in zip(rows[r2], rows[r])]
                c[r2] = c[r2] - f * c[r]
        used.add(r)
        pivots.append(r)
    for r in range(len(rows)):
        if r not in used and fval(c[r], p) < 0:
            return None
    rank = len(pivots)
    y0 = [-c[r] for r in pivots] + [Fraction(0)] * (n - rank)
    x0 = [sum(T[i][j] * y0[j] for j in range(n)) for i in range(n)]
    return x0, Matrix(T) if n else None, n - rank


_X_BASIS = ((1, 0, 0), (0, 1, 0), (0, 0, 1))
# 1 where Iwahori membership asks for an entry in p rather than o
_IWAHORI_LEVEL = [[0, 1, 0, 0], [0, 0, 0, 0], [1, 1, 0, 0], [1, 1, 1, 0]]


def unipotent_lattice(fd: FieldData, frame: Matrix) -> Matrix:
    """Basis (as columns) of ``{X : frame^-1 U_X frame in I}`` in coordinates (x11, x12, x22)."""
    p = fd.p
    finv = h_inverse(frame)
    images = [finv @ (U_X(*e) - Matrix.identity()) @ frame for e in _X_BASIS]
    M = []
    for i in range(4):
        for j in range(4):
            shift = Fraction(1, p) if _IWAHORI_LEVEL[i][j] else Fraction(1)
            M.append([img[i, j] * shift for img in images])
    sol = solve_integrality(M, [0] * len(M), p)
    if sol is None or sol[2]:
        raise VerificationError("unipotent stabilizer is not a full lattice")
    return sol[1]


def torus_fraction(fd: FieldData, frame: Matrix, m: int, depth: int) -> Fraction:
    """Share of the classes of ``O_m^x`` mod ``o^x (1 + p^m P^depth)`` in the frame's stabilizer.

    ``T(u + v alpha) = u + v T(alpha)``, so conjugation by the frame is linear in (u, v).
    """
    p, mod = fd.p, fd.p**depth
    pm = Fraction(p) ** m
    finv = h_inverse(frame)
    A = torus_block(fd, fd.alpha * pm)
    adj_t = Matrix([[A[1, 1], -A[1, 0]], [-A[0, 1], A[0, 0]]])
    C = finv @ Matrix.from_blocks(A, Matrix.diag(0, 0), Matrix.diag(0, 0), adj_t) @ frame
    entries = [(i, j, C[i, j], _IWAHORI_LEVEL[i][j]) for i in range(4) for j in range(4)]
    good = total = 0
    for u in range(mod):
        for v in range(mod):
            if fval(fd.from_basis(u, v * pm).norm(), p) != 0:
                continue
            total += 1
            if all(fval(v * cij + (u if i == j else 0), p) >= lev for i, j, cij, lev in entries):
                good += 1
    return Fraction(good, total)


def unit_index(fd: FieldData, m: int) -> int:
    """``[o_L^x : o^x (1 + P^m)]``; cross-checked against enumeration in the tests."""
    if m == 0:
        return 1
    return (fd.q - fd.case) * fd.q ** (m - 1)


@dataclass(frozen=True)
class VolumeRatio:
    rho: Fraction
    torus_volume: Fraction
    lattice_volume: Fraction


def volume_ratio(fd: FieldData, addr: CosetAddress, depths=(2, 3)) -> VolumeRatio:
    """``vol(R \\ R s I) / vol(I)`` with ``vol(o_L^x / o^x) = vol(Sym2(o)) = 1``.

    The torus share is counted at each depth; the counts must agree.
    """
    frame = frame_matrix(fd, addr)
    shares = {torus_fraction(fd, frame, addr.m, d) for d in depths}
    if len(shares) != 1:
        raise VerificationError(f"torus volume did not stabilize at {addr.to_text()}: {sorted(shares)}")
    tvol = shares.pop() / unit_index(fd, addr.m)
    basis = unipotent_lattice(fd, frame)
    uvol = Fraction(fd.p) ** (-fval(basis.det(), fd.p))
    return VolumeRatio(1 / (tvol * uvol), tvol, uvol)


def norm_squared(x: Scalar) -> Fraction:
    """``|x|^2 = x * conj(x)`` for a numeric scalar."""
    value = x * x.conj()
    if not value.is_rational():
        raise VerificationError(f"|x|^2 of {x.to_text()} is not rational")
    return value.to_fraction()


# ------------------------------------------------- well-definedness


def _random_torus_element(fd: FieldData, frame: Matrix, m: int, rng: random.Random, tries: int = 200):
    """A random unit ``zeta`` with ``frame^-1 T(zeta) frame`` in I."""
    finv = h_inverse(frame)
    p = fd.p
    for _ in range(tries):
        u = rng.randrange(-3 * p * p, 3 * p * p + 1)
        v = rng.randrange(-3 * p * p, 3 * p * p + 1)
        z = fd.from_basis(u, Fraction(v) * Fraction(p) ** m)
        if fval(z.norm(), p) != 0:
            continue
        if in_iwahori(finv @ T_zeta(fd, z) @ frame, p):
            return z
    raise VerificationError("no torus element found in the stabilizer")


def welldef_check(ctx: BesselContext, addr: CosetAddress, samples: int, seed: int = 0) -> VerificationReport:
    """Every ``r = t u`` with ``frame^-1 r frame`` in I has ``(Lambda (x) theta)(r) = 1``, or B vanishes there."""
    if samples < 1:
        raise VerificationError("samples must be positive")
    fd, p = ctx.fd, ctx.fd.p
    rng = random.Random(seed)
    frame = frame_matrix(fd, addr)
    finv = h_inverse(frame)
    basis = unipotent_lattice(fd, frame)
    value = b_table(ctx, addr)
    params = {"addr": addr.to_text(), "samples": samples}
    for i in range(samples):
        if i == 0:
            zeta, y, z = fd.embed(1), (0, 0, 0), Fraction(1)
        else:
            zeta = _random_torus_element(fd, frame, addr.m, rng)
            y = tuple(rng.randrange(-2 * p, 2 * p + 1) for _ in range(3))
            z = Fraction(p) ** rng.randrange(-2, 3)
        X = [sum(basis[r, j] * y[j] for j in range(3)) for r in range(3)]
        # r = z t u lies in Z * frame I frame^-1; the central factor is split off before the test
        k = finv @ T_zeta(fd, zeta) @ U_X(*X) @ frame
        if not in_iwahori(k, p):
            raise VerificationError(f"sampler produced r outside the stabilizer at {addr.to_text()}")
        char = ctx.lambda_eval(zeta * z) * theta_eval(fd, X)
        if not (char == 1 or value.is_zero()):
            witness = {"zeta": repr(zeta), "X": [str(x) for x in X]}
            return VerificationReport("welldef", params, "fail", char.to_text(), "1", witness)
    return VerificationReport("welldef", params, "pass", "1", "1")


# ----------------------------------------------------- character sums


def char_sum(ctx: BesselContext, m: int):
    """``(computed, expected)`` for the character sum at level ``m``.

    ``expected`` is None where the identity is vacuous because ``B(h(l, m)) = 0``.
    """
    fd, q, m0 = ctx.fd, ctx.fd.q, ctx.m0
    alpha = fd.alpha
    if m > 0:
        shift = alpha * Fraction(fd.p) ** m
        terms = [ctx.lambda_eval(shift + w) for w in range(1, fd.p)]
        if m >= m0:
            expected = Scalar.of(q)
        elif m == m0 - 1:
            expected = Scalar.of(0)
        else:
            expected = None
    else:
        terms = [ctx.lambda_eval(alpha + w) for w in range(fd.p) if beta_wm(fd, w, 0)[1]]
        expected = Scalar.of(0 if m0 >= 1 else q - fd.case) if m0 <= 1 else None
    return sum_scalars(terms) + 1, expected


# --------------------------------------------------------- flag index


def poincare_polynomial(q) -> int:
    """``sum over W of q^length``."""
    return sum(q ** WORD_LENGTH[w] for w in WEYL_WORDS)


def flag_index(q: int) -> int:
    """``[K^H : I]`` by enumerating ``GSp4(F_q)``."""
    if q not in (2, 3):
        raise VerificationError("enumeration is only feasible for q in {2, 3}")
    total, borel = gsp4_mod_p_count(q)
    if total % borel:
        raise VerificationError("Iwahori image does not divide the group order")
    return total // borel


# ------------------------------------------------------------- norm


def norm_closed_form(ctx: BesselContext) -> Fraction:
    """The closed form for ``<B, B> / vol(I)`` with the table's normalization."""
    fd, m0 = ctx.fd, ctx.m0
    q = Fraction(fd.q)
    if fd.split and not ctx.lambda_one_varpi().is_rational():
        raise VerificationError("the closed form needs a rational Lambda((1, varpi))")
    if m0 >= 1:
        return (1 - fd.case / q) * 2 * q ** (4 * m0 - 3) / ((1 - 1 / q) * (1 - q**-3))
    if ctx.c_vanishes() and fd.case != 1:
        return Fraction(0)
    if fd.case == 0:
        return (2 * q**5 + q**4 + q**2 - 2 * q) / ((1 - q**-3) * (1 - 1 / q))
    if ctx.split_degenerate():
        return 2 * (1 + 1 / q) * (q + 2 + 1 / q) / (1 - q**-3)
    wl = (ctx.lambda_one_varpi() * ctx.omega).to_fraction()
    return 2 * q**5 / (1 - q**-3) + 2 * q**2 * (1 - 1 / q) ** 3 * (q + 2 + 1 / q) / ((1 - q**-3) * (1 + wl) ** 2)


@dataclass
class NormSum:
    blocks: dict
    truncated: Fraction
    tail_bound: Fraction


def norm_sum(ctx: BesselContext, Lmax: int, Mmax: int, depths=(1, 2)) -> NormSum:
    """Truncated ``sum |B(s)|^2 rho_s`` over frames with ``l <= Lmax`` and ``m <= Mmax``.

    The tail bound extends the last computed block row and column geometrically
    with the observed decay ratios, which must be below 1.
    """
    fd = ctx.fd
    if fd.split and not ctx.lambda_one_varpi().is_constant():
        raise VerificationError("the norm needs a numeric Lambda")
    shares: dict = {}
    blocks: dict = {}
    for addr in addresses(fd, range(-1, Lmax + 1), range(0, Mmax + 1)):
        value = b_table(ctx, addr)
        key = (addr.l, addr.m)
        blocks.setdefault(key, Fraction(0))
        if value.is_zero():
            continue
        tag = (addr.m, addr.wtag, addr.stag)
        if tag not in shares:
            # the torus stabilizer does not depend on l
            base = frame_matrix(fd, CosetAddress(0, addr.m, addr.wtag, addr.stag))
            counts = {torus_fraction(fd, base, addr.m, d) for d in depths}
            if len(counts) != 1:
                raise VerificationError(f"torus volume did not stabilize at {addr.to_text()}")
            shares[tag] = counts.pop() / unit_index(fd, addr.m)
        uvol = Fraction(fd.p) ** (-fval(unipotent_lattice(fd, frame_matrix(fd, addr)).det(), fd.p))
        blocks[key] += norm_squared(value) / (shares[tag] * uvol)
    truncated = sum(blocks.values(), Fraction(0))
    tail = _geometric_tail(blocks, Lmax, Mmax)
    return NormSum(blocks, truncated, tail)


def _ratio(a: Fraction, b: Fraction) -> Fraction:
    if b == 0:
        return Fraction(0)
    return a / b


def _geometric_tail(blocks: dict, Lmax: int, Mmax: int) -> Fraction:
    if Lmax < 2 or Mmax < 2:
        raise VerificationError("the tail estimate needs Lmax, Mmax >= 2")
    col = lambda m: [blocks[(l, m)] for l in range(-1, Lmax + 1)]
    rl = max(_ratio(blocks[(Lmax, m)], blocks[(Lmax - 1, m)]) for m in range(Mmax + 1))
    if rl >= 1:
        raise VerificationError("blocks do not decay in l")
    l_tail = sum(blocks[(Lmax, m)] for m in range(Mmax + 1)) * rl / (1 - rl)
    row = lambda m: sum(col(m)) + blocks[(Lmax, m)] * rl / (1 - rl)
    rm = _ratio(row(Mmax), row(Mmax - 1))
    if rm >= 1:
        raise VerificationError("blocks do not decay in m")
    return l_tail + row(Mmax) * rm / (1 - rm)


def norm_check(ctx: BesselContext, Lmax: int = 12, Mmax: int = 12, depths=(1, 2)) -> VerificationReport:
    closed = norm_closed_form(ctx)
    ns = norm_sum(ctx, Lmax, Mmax, depths)
    params = {"case": ctx.fd.case, "q": ctx.fd.q, "m0": ctx.m0, "Lmax": Lmax, "Mmax": Mmax}
    gap = closed - ns.truncated
    ok = (closed == 0 and ns.truncated == 0) or abs(gap) <= ns.tail_bound
    witness = {"tail_bound": str(ns.tail_bound), "gap": str(gap)}
    return VerificationReport("norm", params, "pass" if ok else "fail", str(ns.truncated), str(closed), witness)
