"""Multiplication rules of the folded one-parameter families, checked both
abstractly and against the fixed-point matrix realizations."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from liecover.chevgrp import build_group, twisted_param_group
from liecover.gf import BudgetExceeded, make_field

SU32 = build_group("2A", 2, make_field(2, 2))
SU33 = build_group("2A", 2, make_field(3, 2))


def _doubled_params(ctx, mat, negative=False):
    """Read (t, u) back off a fixed-point matrix of the doubled class."""
    if negative:
        return mat[1][0], ctx.phi_scalar(mat[2][0])
    return mat[0][1], ctx.phi_scalar(mat[0][2])


# -- doubled class: matrices against the abstract rule


@pytest.mark.parametrize("ctx", [SU32, SU33])
def test_doubled_rule_matches_matrices(ctx):
    field = ctx.field
    (omega,) = ctx.classes
    tpg = twisted_param_group("A2", field, ctx.f0)
    pts = ctx.a2_variety()
    assert sorted(pts) == sorted(tpg.elements())
    for t, u in pts:
        for t2, u2 in pts:
            prod = ctx.y_element(omega, t, u) * ctx.y_element(omega, t2, u2)
            got = _doubled_params(ctx, prod.mat)
            want = (
                field.add(t, t2),
                field.add(field.add(u, u2), field.mul(ctx.phi_scalar(t), t2)),
            )
            assert got == want
            assert got == tpg.mul((t, u), (t2, u2))
            assert ctx.contains_mat(prod.mat)
            assert tpg.contains(got)


@pytest.mark.parametrize("ctx", [SU32, SU33])
def test_doubled_rule_negative_mirror(ctx):
    # below the diagonal the cross term attaches to the other leg
    field = ctx.field
    (omega,) = ctx.classes
    pts = ctx.a2_variety()
    for t, u in pts:
        for t2, u2 in pts:
            prod = ctx.y_element(omega, t, u, negative=True) * ctx.y_element(
                omega, t2, u2, negative=True
            )
            got = _doubled_params(ctx, prod.mat, negative=True)
            want = (
                field.add(t, t2),
                field.add(field.add(u, u2), field.mul(t, ctx.phi_scalar(t2))),
            )
            assert got == want
            assert ctx.contains_mat(prod.mat)


@pytest.mark.parametrize("ctx", [SU32, SU33])
def test_doubled_inverse(ctx):
    field = ctx.field
    (omega,) = ctx.classes
    tpg = twisted_param_group("A2", field, ctx.f0)
    for t, u in ctx.a2_variety():
        x = ctx.y_element(omega, t, u)
        assert x.inverse() == ctx.y_element(omega, field.neg(t), ctx.phi_scalar(u))
        assert tpg.inv((t, u)) == (field.neg(t), ctx.phi_scalar(u))


@pytest.mark.parametrize("ctx", [SU32, SU33])
def test_doubled_zero_slice_is_additive_line(ctx):
    # t = 0 cuts out the trace-zero line, an additive subgroup
    field = ctx.field
    (omega,) = ctx.classes
    line = ctx.trace_zero_line()
    assert len(line) == ctx.q0
    for u in line:
        for u2 in line:
            prod = ctx.y_element(omega, 0, u) * ctx.y_element(omega, 0, u2)
            assert _doubled_params(ctx, prod.mat) == (0, field.add(u, u2))


def test_doubled_variety_size():
    # q choices of t, then q0 translates of one particular u
    assert len(SU32.a2_variety()) == 8
    assert len(SU33.a2_variety()) == 27


# -- singleton and orbit classes against the rank-one abstract family


def test_singleton_class_is_fixed_field_line():
    su4 = build_group("2A", 3, make_field(2, 2))
    field = su4.field
    tpg = twisted_param_group("A1d", field, su4.f0, d=1, field0=su4.field0)
    for omega in su4.classes:
        if omega.class_type != "A1":
            continue
        line = su4.singleton_params(omega)
        assert line == [t for t in range(field.q) if su4.phi_scalar(t) == t]
        assert [(t,) for t in line] == tpg.elements()
        for a in line:
            for b in line:
                prod = su4.y_element(omega, a) * su4.y_element(omega, b)
                assert prod == su4.y_element(omega, field.add(a, b))
                assert tpg.mul((a,), (b,)) == (field.add(a, b),)


def test_orbit_class_is_big_field_line():
    su4 = build_group("2A", 3, make_field(2, 2))
    field = su4.field
    tpg = twisted_param_group("A1d", field, su4.f0, d=2)
    assert len(tpg.elements()) == field.q
    for omega in su4.classes:
        if omega.class_type != "A1xA1":
            continue
        for a in range(field.q):
            for b in range(field.q):
                prod = su4.y_element(omega, a) * su4.y_element(omega, b)
                assert prod == su4.y_element(omega, field.add(a, b))
                assert tpg.mul((a,), (b,)) == (field.add(a, b),)


# -- abstract families: exhaustive axioms on the smallest legal fields


def test_a1d_axioms():
    field = make_field(3, 2)
    assert twisted_param_group("A1d", field, 1, d=1, field0=make_field(3, 1)).check_group()
    assert twisted_param_group("A1d", field, 1, d=2).check_group()


def test_doubled_axioms():
    assert twisted_param_group("A2", make_field(2, 2), 1).check_group()
    assert twisted_param_group("A2", make_field(3, 2), 1).check_group()


def test_char2_folded_axioms():
    assert twisted_param_group("B2", make_field(2, 1), 0).check_group()
    assert twisted_param_group("B2", make_field(2, 3), 1).check_group()


def test_char3_folded_axioms():
    assert twisted_param_group("G2", make_field(3, 1), 0).check_group()


def test_char3_folded_budget():
    tpg = twisted_param_group("G2", make_field(3, 3), 1)
    assert len(tpg.elements()) == 27**3
    with pytest.raises(BudgetExceeded):
        tpg.check_group()


G2_BIG = twisted_param_group("G2", make_field(3, 3), 1)


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 27**3 - 1), st.integers(0, 27**3 - 1), st.integers(0, 27**3 - 1))
def test_char3_folded_sampled_associativity(i, j, k):
    elems = G2_BIG.elements()
    a, b, c = elems[i], elems[j], elems[k]
    assert G2_BIG.mul(G2_BIG.mul(a, b), c) == G2_BIG.mul(a, G2_BIG.mul(b, c))


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 27**3 - 1))
def test_char3_folded_sampled_inverses(i):
    a = G2_BIG.elements()[i]
    ia = G2_BIG.inv(a)
    assert G2_BIG.mul(a, ia) == G2_BIG.identity()
    assert G2_BIG.mul(ia, a) == G2_BIG.identity()


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 63), st.integers(0, 63), st.integers(0, 63))
def test_char2_folded_sampled_associativity_big(i, j, k):
    tpg = twisted_param_group("B2", make_field(2, 3), 1)
    elems = tpg.elements()
    a, b, c = elems[i], elems[j], elems[k]
    assert tpg.mul(tpg.mul(a, b), c) == tpg.mul(a, tpg.mul(b, c))


# -- legality of the folded cases


def test_folded_legality():
    with pytest.raises(ValueError):
        twisted_param_group("A2", make_field(2, 1), 0)  # no involution
    with pytest.raises(ValueError):
        twisted_param_group("A2", make_field(2, 2), 0)  # wrong twist power
    with pytest.raises(ValueError):
        twisted_param_group("B2", make_field(2, 2), 1)  # 2e+1 never 0 mod 2
    with pytest.raises(ValueError):
        twisted_param_group("B2", make_field(3, 1), 0)  # wrong characteristic
    with pytest.raises(ValueError):
        twisted_param_group("G2", make_field(3, 2), 1)
    with pytest.raises(ValueError):
        twisted_param_group("G2", make_field(2, 1), 0)
    with pytest.raises(ValueError):
        twisted_param_group("X9", make_field(2, 1), 0)


def test_arities_and_identities():
    assert twisted_param_group("A2", make_field(2, 2), 1).identity() == (0, 0)
    assert twisted_param_group("B2", make_field(2, 1), 0).identity() == (0, 0)
    assert twisted_param_group("G2", make_field(3, 1), 0).identity() == (0, 0, 0)
    a1 = twisted_param_group("A1d", make_field(2, 2), 1, d=1, field0=make_field(2, 1))
    assert a1.identity() == (0,)
    assert len(a1.elements()) == 2
    assert not a1.contains((3,))  # outside the fixed subfield domain
