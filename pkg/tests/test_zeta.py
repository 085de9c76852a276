from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gsp4bessel.besselcore import make_context
from gsp4bessel.grp import WEYL_WORDS
from gsp4bessel.padicbase import build_field_data
from gsp4bessel.scalars import RationalFunction, Scalar, UnitRootExp, q_power, root_of_unity, var
from gsp4bessel.zeta import (
    SERIES_DEGREE,
    TAU_CLASSES,
    DegenerateParameterError,
    TauSpec,
    ZetaError,
    l_factor,
    make_zeta_context,
    verify_integral_theorem,
    volume_V,
    whittaker_newform,
    wsharp_at_frame,
    wsharp_guard_check,
    wsharp_support,
    y_prime,
    zeta_closed,
    zeta_truncated,
)

from .conftest import INERT, RAMIFIED, SPLIT

X3 = var("X") ** 3


def split_context(Omega=1):
    return make_context(build_field_data(*SPLIT), 0, Omega=Omega)


def zctx(cls, Omega=1, **params):
    return make_zeta_context(split_context(Omega), cls, **params)


# ---------------------------------------------------------- Whittaker


@pytest.mark.parametrize("cls", TAU_CLASSES)
def test_whittaker_normalization(cls):
    assert whittaker_newform(TauSpec(cls), 5, 0) == 1


def test_whittaker_steinberg():
    assert whittaker_newform(TauSpec("unramSt"), 5, 2) == var("omg") ** 2 / 25


def test_whittaker_unramified():
    expected = q_power(5, -1) * (var("aT") + var("bT"))
    assert whittaker_newform(TauSpec("unram_ps"), 5, 1) == expected


def test_whittaker_equal_parameters():
    tau = TauSpec("unram_ps", a=2, b=2)
    assert whittaker_newform(tau, 3, 2) == q_power(3, -2) * 3 * 4


def test_whittaker_rejects_negative_l():
    with pytest.raises(ZetaError):
        whittaker_newform(TauSpec("unramSt"), 5, -1)


# -------------------------------------------------------------- support


def test_support_examples():
    assert wsharp_support(0, "1")
    assert not wsharp_support(1, "1")
    assert not wsharp_support(0, "s2")


def test_support_only_at_origin():
    hits = [(m, t) for m in range(4) for t in WEYL_WORDS if wsharp_support(m, t)]
    assert hits == [(0, "1")]


# ------------------------------------------------------------ frames


def test_wsharp_at_frame_zero():
    assert wsharp_at_frame(zctx("unram_ps"), 0) == (Scalar.of(1), 0)


def test_wsharp_at_frame_unramified():
    coef, k = wsharp_at_frame(zctx("unram_ps"), 1)
    assert k == 3
    assert coef == Fraction(1, 25) * (1 / var("aT") + 1 / var("bT"))


def test_wsharp_at_frame_steinberg():
    coef, k = wsharp_at_frame(zctx("unramSt"), 1)
    assert (coef, k) == (q_power(5, -5) / var("omg"), 3)


def test_volume_examples():
    z = zctx("unram_ps")
    assert volume_V(z, 0) == Fraction(4, 936)
    assert volume_V(z, 1) == z.C * 125
    for l in range(5):
        assert volume_V(z, l + 1) / volume_V(z, l) == 125


# ---------------------------------------------------------- closed forms


def test_zeta_closed_constant_classes():
    for cls in ("supercuspidal_or_ramSt", "ram_ram_ps"):
        z = zctx(cls)
        assert zeta_closed(z) == RationalFunction(z.C)
        assert l_factor(z) == RationalFunction(1)


@pytest.mark.parametrize("Omega", [1, -1])
def test_zeta_closed_steinberg(Omega):
    z = zctx("unramSt", Omega)
    om = z.omega
    expected = RationalFunction(z.C / (1 + om / var("omg") * q_power(5, -5) * X3))
    assert zeta_closed(z) == expected


@pytest.mark.parametrize("Omega", [1, -1])
def test_zeta_closed_unramified(Omega):
    z = zctx("unram_ps", Omega)
    om = z.omega
    den = (1 + om / var("aT") * Fraction(1, 25) * X3) * (1 + om / var("bT") * Fraction(1, 25) * X3)
    assert zeta_closed(z) == RationalFunction(z.C / den)


def test_l_factor_unramified():
    z = zctx("unram_ps", 1)
    den = (1 - 1 / var("aT") * Fraction(1, 25) * X3) * (1 - 1 / var("bT") * Fraction(1, 25) * X3)
    assert l_factor(z) == RationalFunction(1 / den)


def test_y_prime_steinberg():
    z = zctx("unramSt", -1)
    assert y_prime(z) == RationalFunction(z.C * (1 + z.omega / var("omg") * q_power(5, -3) * X3))


def test_degenerate_partial_fractions():
    with pytest.raises(DegenerateParameterError):
        zeta_closed(zctx("unram_ps", a=2, b=2))


def test_irregular_parameters_rejected():
    with pytest.raises(ZetaError):
        zctx("unram_ps", a=5, b=1)


def test_context_needs_test_vector():
    inert = build_field_data(*INERT)
    with pytest.raises(ZetaError):
        make_zeta_context(make_context(inert, 0), "unramSt")
    with pytest.raises(ZetaError):
        make_zeta_context(make_context(build_field_data(*RAMIFIED), 2), "unramSt")


def test_tau_conductor_rules():
    with pytest.raises(ZetaError):
        TauSpec("unramSt", conductor=2)
    with pytest.raises(ZetaError):
        TauSpec("ram_ram_ps", conductor=0)
    with pytest.raises(ZetaError):
        TauSpec("nonsense")


# -------------------------------------------------------------- theorem


@pytest.mark.parametrize("cls", TAU_CLASSES)
@pytest.mark.parametrize("Omega", [1, -1])
def test_theorem_symbolic(cls, Omega):
    check = verify_integral_theorem(zctx(cls, Omega))
    assert check.passed and check.difference == "0"


def test_truncation_matches_series_through_last_computed_degree():
    z = zctx("unram_ps", -1)
    series = zeta_closed(z).series(SERIES_DEGREE)
    direct = zeta_truncated(z)
    assert series[:SERIES_DEGREE] == direct[:SERIES_DEGREE]
    # the 13th summand is not part of the truncation
    assert series[SERIES_DEGREE] != 0 and direct[SERIES_DEGREE] == 0


def test_guard_check_passes():
    for cls in ("unram_ps", "ram_ram_ps", "unramSt"):
        report = wsharp_guard_check(zctx(cls), samples=20)
        assert report.passed and report.samples == 20


@pytest.mark.parametrize("abc,kw", [(INERT, {"m0": 1}), (RAMIFIED, {"m0": 0, "sign": -1})])
def test_guard_check_field_cases(abc, kw):
    bctx = make_context(build_field_data(*abc), Omega=1, **kw)
    assert wsharp_guard_check(make_zeta_context(bctx, "supercuspidal_or_ramSt"), samples=15).passed


# ------------------------------------------------------------ properties

roots = st.builds(lambda n, d: root_of_unity(UnitRootExp(n, d)), st.integers(0, 11), st.sampled_from((1, 2, 3, 4, 6)))


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(TAU_CLASSES), st.sampled_from((1, -1)), roots, roots, roots)
def test_theorem_numeric_unitary(cls, Omega, a, b, omg):
    if cls == "unram_ps" and a == b:
        return
    check = verify_integral_theorem(zctx(cls, Omega, a=a, b=b, omg=omg))
    assert check.passed


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(TAU_CLASSES), st.integers(0, 8))
def test_half_power_pattern(cls, l):
    # W# coefficients at frame l carry q^(-2l) for principal series and q^(-5l/2) for Steinberg
    z = zctx(cls)
    coef, k = wsharp_at_frame(z, l)
    assert k == 3 * l
    if cls == "unram_ps" and l > 0:
        assert coef.subs({"aT": 2, "bT": 1}) == q_power(5, -4 * l) * Fraction(2 ** (l + 1) - 1, 2**l)
    elif cls == "unram_ram_ps":
        assert coef.subs({"aT": 1}) == q_power(5, -4 * l)
    elif cls == "unramSt":
        assert coef.subs({"omg": 1}) == q_power(5, -5 * l)
    elif l > 0:
        assert coef == 0
