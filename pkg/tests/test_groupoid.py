import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from partiso.errors import DimensionMismatch, NotComposable, NotPartialIsometry
from partiso.grassmann import Polarization
from partiso.groupoid import (
    PartialIsometry,
    commutator_defect,
    compose,
    composable,
    identity_arrow,
    invert,
    random_arrow,
    source,
    target,
)
from partiso.harness.sampling import random_subspace
from partiso.matcore import dagger, opnorm, random_unitary

seeds = st.integers(min_value=0, max_value=2**32 - 1)

E12 = np.array([[0, 0], [1, 0]], dtype=complex)  # e1 -> e2
E21 = np.array([[0, 1], [0, 0]], dtype=complex)  # e2 -> e1
POL = Polarization(1, 1)


def arrows_chain(seed, n=6, k=3, length=3):
    rng = np.random.default_rng(seed)
    subs = [random_subspace(n, k, rng) for _ in range(length + 1)]
    return [random_arrow(subs[i + 1], subs[i], rng) for i in range(length)], subs


def test_rejects_non_partial_isometry():
    with pytest.raises(NotPartialIsometry):
        PartialIsometry(1.01 * E12)
    with pytest.raises(DimensionMismatch):
        PartialIsometry(np.ones((2, 3)))
    broken = PartialIsometry(1.01 * E12, check=False)
    assert broken.op[1, 0] == 1.01


def test_source_examples():
    np.testing.assert_allclose(source(PartialIsometry(POL.p_plus)).projector, POL.p_plus)
    np.testing.assert_allclose(source(PartialIsometry(E12)).projector, np.diag([1, 0]))
    u = random_unitary(3, 0)
    assert source(PartialIsometry(u)).dim == 3


def test_target_examples():
    np.testing.assert_allclose(target(PartialIsometry(E12)).projector, np.diag([0, 1]))
    np.testing.assert_allclose(target(PartialIsometry(POL.p_plus)).projector, POL.p_plus)
    assert target(PartialIsometry(random_unitary(3, 1))).dim == 3


def test_compose_examples():
    p = PartialIsometry(POL.p_plus)
    np.testing.assert_allclose(compose(p, p).op, POL.p_plus)
    u = PartialIsometry(E12)
    np.testing.assert_allclose(compose(invert(u), u).op, u.source_proj)
    pair = composable(PartialIsometry(E12), PartialIsometry(E21))
    assert pair.mismatch == 0.0
    np.testing.assert_allclose(compose(PartialIsometry(E12), PartialIsometry(E21)).op, np.diag([0, 1]))


def test_compose_refuses_mismatch():
    with pytest.raises(NotComposable) as info:
        compose(PartialIsometry(E12), PartialIsometry(E12))
    # s(E12) = diag(1,0), t(E12) = diag(0,1)
    assert info.value.mismatch == pytest.approx(1.0)
    with pytest.raises(DimensionMismatch):
        compose(PartialIsometry(E12), PartialIsometry(np.eye(3)))


def test_invert_examples():
    p = PartialIsometry(POL.p_plus)
    np.testing.assert_allclose(invert(p).op, p.op)
    np.testing.assert_allclose(invert(PartialIsometry(E12)).op, E21)
    u = PartialIsometry(random_unitary(4, 2) @ np.diag([1, 1, 0, 0]))
    np.testing.assert_array_equal(invert(invert(u)).op, u.op)


def test_identity_arrow_examples():
    np.testing.assert_allclose(identity_arrow(POL.plus_space()).op, POL.p_plus)
    np.testing.assert_allclose(identity_arrow(POL.full_space()).op, np.eye(2))
    (u,), _ = arrows_chain(3, length=1)
    assert opnorm(compose(identity_arrow(target(u)), u).op - u.op) <= 1e-12


@pytest.mark.parametrize(
    "op, expected",
    [
        (np.diag([1j, -1.0]), 0.0),
        (E12, 1.0),
        (np.array([[0, 1], [1, 0]]), np.sqrt(2)),
    ],
)
def test_commutator_defect_examples(op, expected):
    assert commutator_defect(POL, PartialIsometry(op), 2) == pytest.approx(expected, abs=1e-15)


def test_random_arrow_examples():
    pol = Polarization(3, 3)
    u = random_arrow(pol.plus_space(), pol.plus_space(), 4)
    assert opnorm(u.op - pol.p_plus @ u.op @ pol.p_plus) == 0.0
    u = random_arrow(pol.plus_space(), pol.minus_space(), 4)
    pp, _, _, mm = pol.blocks(u.op)
    assert opnorm(pp) == 0.0 and opnorm(mm) == 0.0
    np.testing.assert_array_equal(random_arrow(pol.plus_space(), pol.minus_space(), 4).op, u.op)
    with pytest.raises(DimensionMismatch):
        random_arrow(pol.plus_space(), pol.full_space(), 0)


@settings(max_examples=40, deadline=None)
@given(seed=seeds, n=st.integers(2, 8), data=st.data())
def test_groupoid_laws(seed, n, data):
    k = data.draw(st.integers(1, n))
    (g, h, kk), subs = arrows_chain(seed, n, k, 3)
    for u in (g, h, kk):
        assert opnorm(u.op @ dagger(u.op) @ u.op - u.op) <= 1e-9
        assert opnorm(dagger(u.op) @ u.op @ dagger(u.op) - dagger(u.op)) <= 1e-9
        assert np.trace(u.source_proj).real == pytest.approx(np.trace(u.target_proj).real, abs=1e-9)
    # transitivity: the arrow joins the prescribed subspaces
    assert opnorm(g.source_proj - subs[1].projector) <= 1e-9
    assert opnorm(g.target_proj - subs[0].projector) <= 1e-9
    # units
    assert opnorm(compose(g, identity_arrow(source(g))).op - g.op) <= 1e-9
    assert opnorm(compose(identity_arrow(target(g)), g).op - g.op) <= 1e-9
    # inverses
    assert opnorm(compose(g, invert(g)).op - identity_arrow(target(g)).op) <= 1e-9
    assert opnorm(compose(invert(g), g).op - identity_arrow(source(g)).op) <= 1e-9
    # associativity, both sides defined
    gh = compose(g, h)
    assert opnorm(compose(gh, kk).op - compose(g, compose(h, kk)).op) <= 1e-9
    assert opnorm(gh.source_proj - h.source_proj) <= 1e-9
    assert opnorm(gh.target_proj - g.target_proj) <= 1e-9
    # anti-homomorphism
    assert opnorm(invert(gh).op - compose(invert(h), invert(g)).op) <= 1e-9


@settings(max_examples=40, deadline=None)
@given(seed=seeds, n_plus=st.integers(1, 5), n_minus=st.integers(1, 5), data=st.data())
def test_commutator_block_identity(seed, n_plus, n_minus, data):
    pol = Polarization(n_plus, n_minus)
    k = data.draw(st.integers(1, pol.n))
    rng = np.random.default_rng(seed)
    u = random_arrow(random_subspace(pol.n, k, rng), random_subspace(pol.n, k, rng), rng)
    _, pm, mp, _ = pol.blocks(u.op)
    lhs = commutator_defect(pol, u, 2) ** 2
    rhs = np.sum(np.abs(pm) ** 2) + np.sum(np.abs(mp) ** 2)
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-14)
