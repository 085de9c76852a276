import random
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from gsp4bessel.besselcore import (
    BesselError,
    CosetAddress,
    Factorization,
    LamCondition,
    ReductionError,
    addresses,
    b_eval,
    b_table,
    dim_and_testvector,
    make_context,
    psi,
    reduce,
    theta_eval,
)
from gsp4bessel.cli import parse_address
from gsp4bessel.grp import Matrix, T_zeta, U_X, center, eta0, h_lm, sample_iwahori, weyl
from gsp4bessel.padicbase import build_field_data
from gsp4bessel.scalars import UnitRootExp, root_of_unity, var

from .conftest import INERT, RAMIFIED, SPLIT


def random_unit_free_element(fd, rng):
    while True:
        z = fd.from_basis(
            Fraction(rng.randrange(-30, 31), rng.choice([1, fd.p, fd.p**2, 2])),
            Fraction(rng.randrange(-30, 31), rng.choice([1, fd.p, 3])),
        )
        if z.norm():
            return z


def random_factorization(fd, rng, addrs):
    zeta = random_unit_free_element(fd, rng)
    X = tuple(Fraction(rng.randrange(-25, 26), rng.choice([1, fd.p, fd.p**2])) for _ in range(3))
    z = Fraction(fd.p) ** rng.randrange(-2, 3)
    return Factorization(X, zeta, z, rng.choice(addrs), sample_iwahori(fd.p, rng))


# ------------------------------------------------------------ characters


def test_psi_on_integers_is_one():
    assert psi(7, 5) == 1


def test_theta_examples(split):
    assert theta_eval(split, (1, 2, 3)) == 1
    assert theta_eval(split, (Fraction(1, 5), 0, 0)) == 1
    assert theta_eval(split, (0, 0, Fraction(1, 5))) == root_of_unity(UnitRootExp(1, 5))


def test_theta_rejects_asymmetric(split):
    with pytest.raises(BesselError):
        theta_eval(split, Matrix([[0, 1], [0, 0]]))


@pytest.mark.parametrize("abc,kw", [(INERT, {"m0": 1}), (RAMIFIED, {"m0": 1}), (SPLIT, {"m0": 1, "lam": 3})])
def test_lambda_trivial_on_base_field(abc, kw):
    fd = build_field_data(*abc)
    ctx = make_context(fd, **kw)
    for x in (2, Fraction(1, 7), fd.p, -fd.p**3):
        assert ctx.lambda_eval(fd.embed(x)) == 1


def test_inert_order_four_character(inert):
    g = inert.alpha + 1
    ctx = make_context(inert, 1, 1, generator=g)
    assert ctx.lam.quotient.order == 4
    assert ctx.lambda_eval(g) == root_of_unity(UnitRootExp(1, 4))
    # alpha squares into F, so it has order 2 in the quotient
    assert ctx.lambda_eval(inert.alpha) == -1


def test_inert_alpha_is_not_a_generator(inert):
    with pytest.raises(BesselError):
        make_context(inert, 1, 1, generator=inert.alpha)


def test_split_lambda_on_one_varpi(split):
    ctx = make_context(split, 0)
    assert ctx.lambda_eval(split.elem(1, 5)) == 1 / var("lam")


def test_wrong_conductor_rejected(inert):
    with pytest.raises(BesselError):
        make_context(inert, 1, 4)


def test_lam_rejected_for_fields(inert):
    with pytest.raises(BesselError):
        make_context(inert, 0, lam=2)


# ---------------------------------------------------------- dimension


def test_dim_inert_m0_zero(inert):
    assert dim_and_testvector(make_context(inert, 0)) == (0, False)


def test_dim_inert_m0_one(inert):
    assert dim_and_testvector(make_context(inert, 1)) == (1, True)


def test_dim_split_excluded_lam(split):
    assert dim_and_testvector(make_context(split, 0, Omega=1, lam=1)) == (1, False)
    assert dim_and_testvector(make_context(split, 0, Omega=-1, lam=1)) == (1, True)


def test_dim_split_symbolic(split):
    dim, tv = dim_and_testvector(make_context(split, 0, Omega=1))
    assert dim == 1 and isinstance(tv, LamCondition)
    assert tv.evaluate(2) and not tv.evaluate(1)
    with pytest.raises(TypeError):
        bool(tv)


def test_dim_deep_conductor(ramified):
    assert dim_and_testvector(make_context(ramified, 2)) == (1, False)


# -------------------------------------------------------------- table


def test_table_l_one(ramified):
    ctx = make_context(ramified, 0, Omega=1, sign=-1)
    assert b_table(ctx, CosetAddress(1, 0)) == Fraction(1, 125)


def test_table_s2_row(ramified):
    ctx = make_context(ramified, 0, Omega=1, sign=-1)
    assert b_table(ctx, CosetAddress(0, 0, "none", "s2")) == Fraction(-1, 5)


@pytest.mark.parametrize("Omega", [1, -1])
def test_table_l_minus_one_row(ramified, Omega):
    ctx = make_context(ramified, 0, Omega=Omega, sign=-Omega)
    assert b_table(ctx, CosetAddress(-1, 1, "none", "s1s2")) == Fraction(-ctx.omega, 5)


@pytest.mark.parametrize("Omega", [1, -1])
def test_split_w_rows(split, Omega):
    ctx = make_context(split, 0, Omega=Omega)
    y = ctx.omega / var("lam")
    displayed = -(split.q - 1) / (1 + y)
    assert b_table(ctx, CosetAddress(0, 0, "wminus", "1")) == displayed
    assert b_table(ctx, CosetAddress(0, 0, "wplus", "1")) == displayed * y


def test_split_degenerate_w_rows_agree(split):
    ctx = make_context(split, 0, Omega=1, lam=1)
    assert ctx.split_degenerate()
    for l in range(3):
        for s in ("1", "s2"):
            wp = b_table(ctx, CosetAddress(l, 0, "wplus", s))
            wm = b_table(ctx, CosetAddress(l, 0, "wminus", s))
            assert wp == -wm


def test_vanishing_contexts(inert, ramified):
    for ctx in (make_context(inert, 0), make_context(ramified, 0, Omega=1, sign=1)):
        assert ctx.c_vanishes()
        assert all(b_table(ctx, a).is_zero() for a in addresses(ctx.fd))


def test_w_address_needs_matching_case(inert):
    with pytest.raises(BesselError):
        b_table(make_context(inert, 1), CosetAddress(0, 0, "w0", "1"))


def test_address_validation():
    with pytest.raises(BesselError):
        CosetAddress(0, 1, "w0", "1")
    with pytest.raises(BesselError):
        CosetAddress(0, 0, "none", "s1")
    with pytest.raises(BesselError):
        CosetAddress(0, -1)


# ----------------------------------------------------------- evaluation


def test_b_eval_normalization(ramified):
    ctx = make_context(ramified, 0, Omega=1, sign=-1)
    assert b_eval(ctx, Matrix.identity()) == 1
    assert b_eval(ctx, eta0(5)) == ctx.omega
    assert b_eval(ctx, center(7) @ h_lm(5, 1, 0)) == b_table(ctx, CosetAddress(1, 0))


def test_reduce_frame(ramified):
    red = reduce(make_context(ramified, 1), h_lm(5, 2, 1))
    assert red.rvalue == 1 and red.addr == CosetAddress(2, 1)


def test_reduce_integral_unipotent(ramified):
    red = reduce(make_context(ramified, 1), U_X(1, 0, 1))
    assert red.rvalue == 1 and red.addr == CosetAddress(0, 0)


def test_reduce_rejects_non_similitude(inert):
    with pytest.raises(ReductionError):
        reduce(make_context(inert, 1), Matrix.diag(1, 2, 3, 4))


def test_reduce_rejects_bad_witness(inert):
    ctx = make_context(inert, 1)
    fac = Factorization((0, 0, 0), inert.embed(1), Fraction(1), CosetAddress(0, 0), weyl("s1"))
    with pytest.raises(ReductionError):
        reduce(ctx, fac)


# ------------------------------------------------------------ properties

CASES = [(INERT, {"m0": 1}), (RAMIFIED, {"m0": 1, "sign": -1}), (SPLIT, {"m0": 1, "lam": 2}), (SPLIT, {"m0": 0})]


@settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(st.sampled_from(CASES), st.integers(0, 2**32))
def test_reduce_round_trip(case, seed):
    abc, kw = case
    fd = build_field_data(*abc)
    ctx = make_context(fd, **kw)
    rng = random.Random(seed)
    fac = random_factorization(fd, rng, addresses(fd))
    red = reduce(ctx, fac.matrix(fd))
    assert red.addr == fac.addr
    expected = ctx.lambda_eval(fac.zeta) * theta_eval(fd, fac.X)
    if not b_table(ctx, fac.addr).is_zero():
        assert red.rvalue == expected


@settings(max_examples=30, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(st.sampled_from(CASES), st.integers(0, 2**32))
def test_equivariance(case, seed):
    abc, kw = case
    fd = build_field_data(*abc)
    ctx = make_context(fd, **kw)
    rng = random.Random(seed)
    h = random_factorization(fd, rng, addresses(fd)).matrix(fd)
    t = random_unit_free_element(fd, rng)
    X = tuple(Fraction(rng.randrange(-9, 10), rng.choice([1, fd.p])) for _ in range(3))
    k = sample_iwahori(fd.p, rng)
    moved = U_X(*X) @ T_zeta(fd, t) @ center(fd.p) @ h @ k
    assert b_eval(ctx, moved) == ctx.lambda_eval(t) * theta_eval(fd, X) * b_eval(ctx, h)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([INERT, RAMIFIED, SPLIT]), st.data())
def test_address_text_round_trip(abc, data):
    fd = build_field_data(*abc)
    addr = data.draw(st.sampled_from(addresses(fd)))
    assert parse_address(addr.to_text()) == addr
