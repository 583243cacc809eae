"""Tower models: Galois action, beta, traces, norms, unit groups and psi."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tamelocal.galoisgrp import InvalidParams
from tamelocal.tamefield import (
    PrecisionTooSmall,
    TowerParams,
    UnknownSubfield,
    realize_tower,
    trace_norm,
    unit_group_quotient,
)
from tamelocal.tamefield import filtration_generators, norm_one_generators

from conftest import bundle


def random_units(t, rng, count):
    x = t.random_elements(rng, count)
    x[:, 0, :] = np.where(x[:, 0, :] % t.p == 0, x[:, 0, :] + 1, x[:, 0, :])
    # make the residue a nonzero element: bump the constant term if everything vanished mod p
    zero = (x[:, 0, :] % t.p == 0).all(axis=1)
    x[zero, 0, 0] += 1
    return x % t.P


@pytest.mark.parametrize("name", ["A", "B", "C", "D"])
def test_automorphism_group_and_beta(name):
    t = bundle(name).t
    t.verify_group()
    assert len(t.all_automorphisms()) == t.gamma.order
    b = t.beta
    assert ((t.apply(t.tau, b) + b) % t.P == 0).all()
    assert t.gamma.is_central(t.tau)


@pytest.mark.parametrize("name", ["A", "B", "C"])
def test_action_is_a_ring_homomorphism(name):
    t = bundle(name).t
    rng = np.random.default_rng(1)
    x, y = t.random_elements(rng, 20), t.random_elements(rng, 20)
    for g in range(t.gamma.order):
        assert (t.apply(g, t.mul(x, y)) == t.mul(t.apply(g, x), t.apply(g, y))).all()
        assert (t.apply(g, (x + y) % t.P) == (t.apply(g, x) + t.apply(g, y)) % t.P).all()
    # x^(gh) = (x^g)^h
    G = t.gamma
    for g in range(G.order):
        for h in range(G.order):
            assert (t.apply(G.mul(g, h), x) == t.apply(h, t.apply(g, x))).all()


@pytest.mark.parametrize("name", ["A", "B", "C"])
def test_unit_group_logarithm(name):
    t = bundle(name).t
    K = t.field("K")
    U = K.unit_group(t.e * 4)
    assert U.group.order == (K.q_L - 1) * K.q_L ** (U.N - 1)
    rng = np.random.default_rng(2)
    x, y = random_units(t, rng, 30), random_units(t, rng, 30)
    cx, cy, cxy = U.coords(x), U.coords(y), U.coords(t.mul(x, y))
    inv = np.array(U.group.invariants)
    assert ((cx + cy - cxy) % inv == 0).all()
    back = np.stack([U.element_of_coords(c) for c in cx])
    assert (U.truncate(back) == U.truncate(x)).all()


def test_norms_and_traces_land_in_subfields(C):
    t = C.t
    rng = np.random.default_rng(3)
    x = random_units(t, rng, 10)
    for name in t.lattice:
        n = trace_norm(t, name, x, "norm")
        tr = trace_norm(t, name, x, "trace")
        assert t.field(name).contains(n).all()
        assert t.field(name).contains(tr).all()
    K, F = t.field("K"), t.field("F")
    y = random_units(t, rng, 10)
    assert (K.norm_to(F, t.mul(x, y)) == t.mul(K.norm_to(F, x), K.norm_to(F, y))).all()


@pytest.mark.parametrize("name", ["A", "B", "C", "D"])
def test_norm_of_uniformizer(name):
    t = bundle(name).t
    K = t.field("K")
    for L in t.lattice.values():
        f, A = K.norm_of_varpi(L)
        direct = K.norm_to(L, t.varpi[None])[0]
        expected = t.mul(L.monomial(0, f), t.teich(A))
        assert (direct == expected).all()
        # ord_L N(varpi_K) = f(K/L)
        assert f == len(L.S) // len(L.S & t.gamma.inertia)


@pytest.mark.parametrize("name", ["A", "B", "C"])
def test_additive_character_level(name):
    """psi_L = psi_Qp o Tr is trivial on p_L^-d(L) and not on p_L^-(d(L)+1)."""
    t = bundle(name).t
    for L in t.lattice.values():
        d = L.different_exponent
        z = L.elements(2, units=False)
        num, den = L.psi_angle(d, z)
        assert (num % den == 0).all()
        num, den = L.psi_angle(d + 1, z)
        assert (num % den != 0).any()


@given(st.integers(0, 10_000))
def test_additive_character_is_additive(seed):
    t = bundle("A").t
    K = t.field("K")
    rng = np.random.default_rng(seed)
    x, y = t.random_elements(rng, 5), t.random_elements(rng, 5)
    a, den = K.psi_angle(3, x)
    b, _ = K.psi_angle(3, y)
    c, _ = K.psi_angle(3, (x + y) % t.P)
    assert ((a + b - c) % den == 0).all()


def test_trace_to_qp_is_additive(B):
    t = B.t
    K = t.field("K")
    rng = np.random.default_rng(4)
    x, y = t.random_elements(rng, 8), t.random_elements(rng, 8)
    assert ((K.trace_to_Qp(x) + K.trace_to_Qp(y) - K.trace_to_Qp((x + y) % t.P)) % t.P == 0).all()


def test_filtration_and_norm_one(A):
    t = A.t
    K = t.field("K")
    info = unit_group_quotient(t, 2, 8)
    U = info["group"]
    sub = U.group.subgroup(info["filtration"])
    assert sub.order == K.q_L ** (8 - 2)
    gens = norm_one_generators(t, 8)
    S = U.group.subgroup(gens)
    # [U_K : U_{K/K_+}] = |N(U_K)| and for K/K_+ ramified the norm image of units has index 2
    Kp = t.field("K+")
    Up = Kp.unit_group(4)
    assert S.order * Up.group.order // 2 == U.group.order
    assert filtration_generators(U, 0)


def test_unit_group_quotient_bounds(A):
    with pytest.raises(PrecisionTooSmall):
        unit_group_quotient(A.t, 5, 5)


def test_realization_with_nonzero_m():
    t = realize_tower(TowerParams(3, 1, 2, 1, 1, 4))
    t.verify_group()
    G = t.gamma
    assert G.rho == G.delta


def test_cyclic_group_of_order_four_has_no_unramified_tau():
    # e=2, f=2, m=1: rho^2 = delta, so delta is the only involution
    with pytest.raises(InvalidParams):
        realize_tower(TowerParams(3, 1, 2, 2, 1, 4))


def test_precision_floor():
    with pytest.raises(PrecisionTooSmall):
        realize_tower(TowerParams(3, 1, 2, 1, 0, 4), precision=8)


@pytest.mark.parametrize(
    "params",
    [
        TowerParams(3, 1, 4, 1, 0, 4),  # e does not divide q - 1
        TowerParams(4, 1, 2, 1, 0, 4),  # p not prime
        TowerParams(3, 1, 1, 1, 0, 4),  # e f odd
        TowerParams(3, 1, 2, 1, 0, 1),  # r too small
        TowerParams(3, 1, 2, 2, 0, 4, "ramified"),  # ramified K/K_+ needs f = 1
    ],
)
def test_invalid_towers(params):
    with pytest.raises(InvalidParams):
        params.validate()


def test_unknown_subfield(A):
    with pytest.raises(UnknownSubfield):
        A.t.field("E")


def test_tower_key_is_canonical():
    assert TowerParams(3, 1, 2, 1, 0, 4).key() == TowerParams(3, 1, 2, 1, 0, 4, "ramified").key()
    assert TowerParams(3, 1, 2, 1, 0, 4).key() != TowerParams(3, 1, 2, 1, 0, 6).key()


def test_unramified_extension_of_qp():
    t = realize_tower(TowerParams(3, 2, 2, 1, 0, 4))
    assert t.q == 9
    K = t.field("K")
    assert K.q_L == 9 and K.e_L == 2
    b = t.beta
    assert ((t.apply(t.tau, b) + b) % t.P == 0).all()
