import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gsp4bessel.grp import (
    J,
    WEYL_WORDS,
    Matrix,
    NamedTag,
    ParameterError,
    S1,
    S2,
    T_zeta,
    eta0,
    h_inverse,
    h_lm,
    in_iwahori,
    lift_to_L,
    matrix_identity_suite,
    named,
    sample_iwahori,
    similitude,
    subgroup_test,
    torus_block,
    torus_element,
    weyl,
)
from gsp4bessel.padicbase import build_field_data

from .conftest import INERT, INERT_P2, RAMIFIED, SPLIT


def test_similitude_of_J():
    assert similitude(J) == 1


@pytest.mark.parametrize("l,m", [(0, 0), (2, 1), (-1, 3)])
def test_similitude_of_frame(l, m):
    assert similitude(h_lm(5, l, m)) == Fraction(5) ** (2 * m + l)


def test_similitude_of_torus_is_norm(split):
    z = split.elem(2, 7)
    assert similitude(T_zeta(split, z)) == torus_block(split, z).det() == z.norm()


def test_subgroup_examples(inert):
    assert subgroup_test(inert, Matrix.identity(), "I")
    assert not subgroup_test(inert, S1, "I")
    assert not subgroup_test(inert, eta0(3), "KH")
    assert subgroup_test(inert, S2, "KH")


def test_named_elements(inert):
    assert named(inert, NamedTag("h_lm", l=0, m=0)) == Matrix.identity()
    for m in range(3):
        eta = named(inert, NamedTag("eta"))
        etam = named(inert, NamedTag("eta_m", m=m))
        hl = lift_to_L(inert, h_lm(3, 1, m))
        assert eta @ hl == hl @ etam
    with pytest.raises(ParameterError):
        named(inert, NamedTag("T_zeta"))


@pytest.mark.parametrize("abc", [INERT, RAMIFIED, SPLIT])
def test_torus_block_shape(abc):
    fd = build_field_data(*abc)
    x, y = Fraction(3), Fraction(2)
    block = torus_block(fd, fd.from_xy(x, y))
    assert block == Matrix([[x + fd.b * y / 2, fd.c * y], [-fd.a * y, x - fd.b * y / 2]])


def test_weyl_words_are_distinct_mod_sign():
    seen = set()
    for w in WEYL_WORDS:
        m = weyl(w)
        perm = tuple(tuple(abs(e) for e in row) for row in m.rows)
        seen.add(perm)
    assert len(seen) == 8


def test_unknown_weyl_word():
    with pytest.raises(ParameterError):
        weyl("s3")


@pytest.mark.parametrize("abc", [INERT_P2, INERT, RAMIFIED, SPLIT], ids=["p2", "inert", "ramified", "split"])
def test_identity_suite(abc):
    fd = build_field_data(*abc)
    bad = [r for r in matrix_identity_suite(fd) if not r.ok]
    assert not bad, bad[:5]


# ------------------------------------------------------------- properties


@settings(max_examples=40, deadline=None)
@given(st.sampled_from((2, 3, 5)), st.integers(0, 2**32))
def test_iwahori_is_a_group(p, seed):
    rng = random.Random(seed)
    a, b = sample_iwahori(p, rng), sample_iwahori(p, rng)
    assert in_iwahori(a, p) and in_iwahori(b, p)
    assert in_iwahori(a @ b, p)
    assert in_iwahori(h_inverse(a), p)
    assert similitude(a) is not None


@settings(max_examples=40, deadline=None)
@given(st.sampled_from((3, 5)), st.integers(-3, 3), st.integers(0, 3), st.integers(-3, 3), st.integers(0, 3))
def test_frames_multiply(p, l1, m1, l2, m2):
    assert h_lm(p, l1, m1) @ h_lm(p, l2, m2) == h_lm(p, l1 + l2, m1 + m2)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from((INERT, RAMIFIED, SPLIT)), st.integers(-9, 9), st.integers(-9, 9))
def test_torus_round_trip(abc, u, v):
    fd = build_field_data(*abc)
    z = fd.from_basis(u, v)
    if z.norm() == 0:
        return
    assert torus_element(fd, torus_block(fd, z)) == z
    w = fd.from_basis(v + 1, u)
    if w.norm():
        assert torus_block(fd, z * w) == torus_block(fd, z) @ torus_block(fd, w)


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(WEYL_WORDS), st.sampled_from(WEYL_WORDS))
def test_weyl_elements_are_symplectic(u, v):
    g = weyl(u) @ weyl(v)
    assert similitude(g) == 1
    assert h_inverse(g) @ g == Matrix.identity()


def test_reflections_square_to_sign():
    for s in (S1, S2):
        sq = s @ s
        assert all(abs(sq[i, i]) == 1 for i in range(4))
