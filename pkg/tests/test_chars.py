"""Characters: admissible theta, theta~, conductors, twist fixers, c and norm residue symbols."""

from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tamelocal.chars import (
    DepthInsufficient,
    FiniteCharacter,
    admissible_thetas,
    chi_data_c,
    conductor,
    galois_twist_fixers,
    norm_residue_symbol,
    psi_p,
    theta_tilde,
    theta_tilde_gamma,
)
from tamelocal.exactnum import Cyclo
from tamelocal.tamefield import TowerParams, realize_tower

from conftest import bundle
from test_tamefield import random_units


# ---------------------------------------------------------------------------
# counting


@pytest.mark.parametrize("name,count", [("A", 18), ("B", 12), ("C", 108), ("D", 1250)])
def test_theta_counts(name, count):
    b = bundle(name)
    assert len(b.thetas) == count
    assert b.thetas.expected_count() == count


def test_theta_count_formula_values():
    # |G_beta(F_q)| q^((l-1) n): ramified 2 q^n, unramified q^n (1 + q^-f_+)
    assert bundle("A").thetas.expected_count() == 2 * 3 * 3
    assert bundle("B").thetas.expected_count() == 4 * 3
    assert bundle("C").thetas.expected_count() == (9 + 3) * 9


# ---------------------------------------------------------------------------
# the pinned values


@pytest.mark.parametrize("name", ["A", "B", "C"])
def test_thetas_reproduce_pinned_values(name):
    """On U cap (1 + p^l O_K), theta(u) = psi(p^-r Tr((u - 1) beta)), on independently built u."""
    b = bundle(name)
    t = b.t
    K = t.field("K")
    pr = t.params
    rng = np.random.default_rng(5)
    lev = t.e * pr.l
    z = random_units(t, rng, 12)
    z = (t.one() + t.mul(K.monomial(0, lev), z)) % t.P  # z in 1 + p^l O_K
    u = t.mul(z, t.inverse(t.apply(t.tau, z)))  # u = z^(1 - tau) has norm one
    for i in range(0, len(b.thetas), max(1, len(b.thetas) // 6)):
        theta = b.thetas[i]
        assert b.thetas.check_pins(theta)
        ang = theta.angles_of(u)
        tr = K.trace_to_Qp(t.mul((u - t.one()) % t.P, t.beta))
        expect = [psi_p(t.p, pr.r, int(x)) for x in tr]
        assert [Fraction(int(a), theta.den) % 1 for a in ang] == [e % 1 for e in expect]


def test_thetas_are_distinct_on_norm_one_units(A):
    keys = set()
    gens = [A.thetas.S.to_ambient(tuple(1 if i == j else 0 for i in range(A.thetas.S.group.rank)))
            for j in range(A.thetas.S.group.rank)]  # fmt: skip
    for i in range(len(A.thetas)):
        keys.add(tuple(A.thetas[i].angle_on_unit_coords(g) for g in gens))
    assert len(keys) == len(A.thetas)


# ---------------------------------------------------------------------------
# multiplicativity and triviality on K_+


@pytest.mark.parametrize("name", ["A", "B", "C"])
def test_characters_are_multiplicative(name):
    b = bundle(name)
    t = b.t
    rng = np.random.default_rng(6)
    x, y = random_units(t, rng, 1000), random_units(t, rng, 1000)
    for chi in (b.thetas[0], b.tt(0), b.cdata.c_tilde):
        lhs = chi.angles_of(t.mul(x, y))
        rhs = chi.angles_of(x) + chi.angles_of(y)
        assert ((lhs - rhs) % chi.den == 0).all()


@pytest.mark.parametrize("name", ["A", "B", "C", "D"])
def test_theta_tilde_trivial_on_k_plus(name):
    b = bundle(name)
    Kp = b.t.field("K+")
    for i in (0, len(b.thetas) - 1):
        assert b.tt(i).restrict(Kp).is_trivial()


# ---------------------------------------------------------------------------
# conductors and twist fixers


def test_conductors_of_theta_tilde(A, B, C, D):
    # ramified: e(r - 1); unramified: e(r - 1) + 1
    assert {A.tt(i).conductor() for i in range(len(A.thetas))} == {6}
    assert {B.tt(i).conductor() for i in range(len(B.thetas))} == {4}
    assert C.tt(0).conductor() == 7
    assert D.tt(0).conductor() == 12


def test_trivial_character_conductor(A):
    K = A.t.field("K")
    assert FiniteCharacter.trivial(K, 4).conductor() == 0
    with pytest.raises(DepthInsufficient):
        conductor(FiniteCharacter.trivial(K, 4), depth=9)


@pytest.mark.parametrize("name", ["A", "B"])
def test_twist_fixers_for_every_theta(name):
    b = bundle(name)
    t = b.t
    G = t.gamma
    E = t.e * (t.params.r - 1)
    for i in range(len(b.thetas)):
        tt = b.tt(i)
        for k in range(2, t.e * t.params.r + 1):
            fix = galois_twist_fixers(tt, k)
            if k > E:
                assert fix == frozenset(range(G.order))
            elif k == E:
                assert fix == G.inertia
            else:
                assert fix == frozenset({0})


def test_twist_fixers_four_involutions(C):
    t = C.t
    G = t.gamma
    E = t.e * (t.params.r - 1)
    for i in (0, 17, 107):
        tt = C.tt(i)
        assert galois_twist_fixers(tt, E - 1) == frozenset({0})
        assert galois_twist_fixers(tt, E) == G.inertia
        assert galois_twist_fixers(tt, E + 1) == frozenset(range(G.order))


@pytest.mark.parametrize(
    "params",
    [TowerParams(3, 1, 1, 4, 0, 4), TowerParams(5, 1, 4, 1, 0, 4), TowerParams(7, 1, 3, 2, 0, 4)],
)
def test_conductor_of_theta_tilde_gamma(params):
    """theta~(x^(1 - gamma)) has conductor e(r-1) for gamma in inertia, e(r-1)+1 otherwise
    (gamma != gamma^-1, K/K_+ unramified); for ramified K/K_+ every such gamma is in inertia.
    theta~(x^(1 - gamma)) = theta~(x^(1 + tau gamma)) since theta~ is trivial on K_+."""
    t = realize_tower(params)
    th = admissible_thetas(t)
    tt = theta_tilde(t, th[0], chi_data_c(t))
    G = t.gamma
    E = t.e * (params.r - 1)
    seen = 0
    for g in range(G.order):
        if G.inv(g) == g:
            continue
        f = theta_tilde_gamma(tt, G.mul(t.tau, g)).conductor()
        assert f == (E if g in G.inertia else E + 1)
        seen += 1
    assert seen >= 2


# ---------------------------------------------------------------------------
# c and c(-1)


@pytest.mark.parametrize("name,value", [("A", -1), ("B", 1), ("C", 1), ("D", 1)])
def test_c_minus_one(name, value):
    assert bundle(name).cdata.c_minus_one == Cyclo.rational(value)


@pytest.mark.parametrize("name", ["A", "B", "C", "D"])
def test_c_trivial_on_norm_one_units_of_depth_two(name):
    b = bundle(name)
    t = b.t
    K = t.field("K")
    rng = np.random.default_rng(7)
    z = random_units(t, rng, 20)
    z = (t.one() + t.mul(K.monomial(0, 2), z)) % t.P
    u = t.mul(z, t.inverse(t.apply(t.tau, z)))
    for x in u:
        assert b.cdata.c_on_norm_one(x) == Cyclo.one()


def test_c_is_trivial_in_unramified_two_involution_case(B):
    assert B.cdata.c_tilde.is_trivial()


def test_vartheta_at_minus_one(abc):
    """theta~(beta) = c(-1) theta(-1) since beta^(1 - tau) = -1."""
    t = abc.t
    for i in range(0, len(abc.thetas), max(1, len(abc.thetas) // 5)):
        lhs = abc.tt(i)(t.beta)
        rhs = abc.cdata.c_minus_one * abc.thetas[i](t.from_int(-1))
        assert lhs == rhs


# ---------------------------------------------------------------------------
# norm residue symbols


def test_unramified_quadratic_symbol(B):
    t = B.t
    K, F = t.field("K"), t.field("F")
    for v in range(3):
        for k in range(2):
            x = t.mul(F.monomial(k, v), t.one())
            assert norm_residue_symbol(K, F, x=x) == (-1) ** v


def test_minus_one_not_a_norm_from_ramified_quadratic_q3(A):
    t = A.t
    assert norm_residue_symbol(t.field("K"), t.field("K+"), x=t.from_int(-1)) == -1


def test_minus_one_is_a_norm_from_ramified_quadratic_q5():
    t = realize_tower(TowerParams(5, 1, 2, 1, 0, 4))
    assert norm_residue_symbol(t.field("K"), t.field("K+"), x=t.from_int(-1)) == 1


@given(st.integers(0, 10_000))
def test_squares_are_norms(seed):
    for name in ("A", "B"):
        t = bundle(name).t
        K, F = t.field("K"), t.field("F")
        rng = np.random.default_rng(seed)
        u = random_units(t, rng, 1)
        uF = K.norm_to(F, u)  # an element of F^x
        sq = t.mul(uF, uF)
        assert norm_residue_symbol(K, F, x=sq[0]) == 1


def test_symbol_is_a_homomorphism(A):
    t = A.t
    K, F = t.field("K"), t.field("F")
    rng = np.random.default_rng(8)
    for _ in range(10):
        a = K.norm_to(F, random_units(t, rng, 1))[0]
        a = t.mul(a, t.from_int(int(rng.integers(1, 3))))
        b = t.mul(F.monomial(int(rng.integers(0, 2)), int(rng.integers(0, 3))), t.one())
        ab = t.mul(a, b)
        assert norm_residue_symbol(K, F, x=ab) == norm_residue_symbol(K, F, x=a) * norm_residue_symbol(K, F, x=b)


def test_serialization_round_trip(A):
    th = A.thetas[3]
    s = th.serialize()
    assert s["field"] == "K" and s["level"] == 8
    nu = tuple(Fraction(k, N) for N, k in s["units"])
    nv = Fraction(s["varpi"][1], s["varpi"][0])
    assert FiniteCharacter(th.field, th.level, nv, nu).key() == th.key()
