"""Metacyclic Galois groups, involutions and the subfield lattice."""

from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from tamelocal.galoisgrp import (
    InvalidParams,
    TauNotInvolution,
    build_gamma,
    centrality_hypothesis,
    expected_involutions,
    involutions,
    subfield_lattice,
    table_hypothesis,
)

QS = [3, 5, 7, 9, 11, 13]


def valid_params(max_order=48, qs=QS):
    out = []
    for q in qs:
        for e in range(1, max_order + 1):
            for f in range(1, max_order // e + 1):
                if (q**f - 1) % e:
                    continue
                for m in range(e):
                    if (m * (q - 1)) % e == 0:
                        out.append((e, f, q, m))
    return out


ALL = valid_params()


class Oracle:
    """delta^a rho^b with rho^f = delta^m, written out directly.

    Products are successive right actions, so rho^b delta^c = delta^(c q^b) rho^b
    (the relation rho^-1 delta rho = delta^q read with left composition).
    """

    def __init__(self, e, f, q, m):
        self.e, self.f, self.q, self.m = e, f, q, m

    def mul(self, x, y):
        (a, b), (c, d) = x, y
        e, f = self.e, self.f
        a2 = (a + c * pow(self.q, b, e)) % e if e > 1 else 0
        b2 = b + d
        if b2 >= f:
            b2 -= f
            a2 = (a2 + self.m) % e if e > 1 else 0
        return (a2, b2)

    def elements(self):
        return [(a, b) for b in range(self.f) for a in range(self.e)]

    def involutions(self):
        return {x for x in self.elements() if self.mul(x, x) == (0, 0)}

    def central(self, x):
        return all(self.mul(x, y) == self.mul(y, x) for y in self.elements())


def to_index(G, x):
    return G.elem(*x)


def test_parameter_space_is_nontrivial():
    assert len(ALL) > 300


@pytest.mark.parametrize("e,f,q,m", [p for p in ALL if p[0] * p[1] <= 16 or (p[1] >= 3 and p[0] * p[1] <= 24)])
def test_group_law_matches_oracle(e, f, q, m):
    G = build_gamma(e, f, q, m)
    O = Oracle(e, f, q, m)
    els = O.elements()
    for x in els:
        for y in els:
            assert G.mul(to_index(G, x), to_index(G, y)) == to_index(G, O.mul(x, y))


def test_defining_relations():
    for e, f, q, m in ALL[::7]:
        G = build_gamma(e, f, q, m)
        d, r = G.delta, G.rho
        assert G.mul(G.mul(r, d), G.inv(r)) == G.power(d, q)
        assert G.power(r, f) == G.power(d, m)
        assert G.power(d, e) == 0
        assert G.elem_order(r) == G.rho_order_formula()


def test_brute_force_involutions_agree_with_enumeration():
    for e, f, q, m in ALL:
        G = build_gamma(e, f, q, m)
        O = Oracle(e, f, q, m)
        H, _ = involutions(G)
        assert H == frozenset(to_index(G, x) for x in O.involutions())


def test_case_table_under_table_hypothesis():
    """Whenever f is odd or e | q^(f/2) - 1 the table lists H exactly."""
    checked = 0
    for e, f, q, m in ALL:
        G = build_gamma(e, f, q, m)
        if not table_hypothesis(G):
            continue
        O = Oracle(e, f, q, m)
        assert expected_involutions(G) == frozenset(to_index(G, x) for x in O.involutions()), (e, f, q, m)
        checked += 1
    assert checked > 200


def test_centrality_under_centrality_hypothesis():
    checked = 0
    for e, f, q, m in ALL:
        G = build_gamma(e, f, q, m)
        if not centrality_hypothesis(G):
            continue
        O = Oracle(e, f, q, m)
        assert all(O.central(x) for x in O.involutions()), (e, f, q, m)
        assert all(G.is_central(h) for h in involutions(G)[0])
        checked += 1
    assert checked > 200


def test_m_zero_always_central_under_table_hypothesis():
    for e, f, q, m in ALL:
        G = build_gamma(e, f, q, m)
        if m == 0 and table_hypothesis(G):
            assert centrality_hypothesis(G)


def test_table_holds_but_involution_not_central():
    # e=4, f=4, q=3, m=2: 4 | 3^2 - 1, H = {1, delta^2, delta rho^2, delta^3 rho^2},
    # but delta rho^2 does not commute with rho since delta^3 != delta
    G = build_gamma(4, 4, 3, 2)
    H, _ = involutions(G)
    assert expected_involutions(G) == H
    assert not G.is_central(G.elem(1, 2))
    assert not centrality_hypothesis(G)


def test_dihedral_counterexample():
    # e=4, f=2, q=3, m=0: rho^-1 delta rho = delta^3 = delta^-1, the dihedral group of order 8
    G = build_gamma(4, 2, 3, 0)
    H, _ = involutions(G)
    assert len(H) == 6  # identity, delta^2 and four reflections
    assert not all(G.is_central(h) for h in H)
    assert expected_involutions(G) != H
    assert not table_hypothesis(G)


def test_quaternion_counterexample():
    # e=4, f=2, q=3, m=2: rho^2 = delta^2, the quaternion group
    G = build_gamma(4, 2, 3, 2)
    H, _ = involutions(G)
    assert len(H) == 2
    assert expected_involutions(G) != H


@pytest.mark.parametrize(
    "e,f,q,m,size,label",
    [
        (2, 1, 3, 0, 2, "f odd or (e even, m odd)"),
        (4, 2, 5, 0, 4, "f, e, m even"),
        (1, 2, 3, 0, 2, "e odd, m even"),
        (3, 2, 7, 1, 2, "e odd, m odd"),
        (3, 1, 7, 0, 1, "ef odd"),
    ],
)
def test_case_labels(e, f, q, m, size, label):
    G = build_gamma(e, f, q, m)
    H, lab = involutions(G)
    assert lab == label
    assert len(H) == size


@pytest.mark.parametrize("e,f,q,m", [(4, 1, 3, 0), (3, 2, 5, 1), (0, 1, 3, 0), (2, 1, 5, 2)])
def test_invalid_params(e, f, q, m):
    with pytest.raises(InvalidParams):
        build_gamma(e, f, q, m)


def test_z4_times_z2():
    G = build_gamma(4, 2, 5, 0)
    assert G.is_abelian() and not G.is_cyclic()
    assert max(G.elem_order(g) for g in range(G.order)) == 4


def test_lattice_for_four_involutions():
    G = build_gamma(2, 2, 3, 0)
    tau = G.rho
    fields = {info.name: info for info in subfield_lattice(G, tau)}
    assert set(fields) == {"K", "K+", "K0", "F", "Kd'", "Kt'", "E", "E0"}
    # K/K_delta' is ramified and K/K_tau' is unramified
    assert fields["Kd'"].ramified_quadratic is True
    assert fields["Kt'"].ramified_quadratic is False
    assert fields["K+"].ramified_quadratic is False
    assert fields["E0"].e_over_F == 1 and fields["E0"].f_over_F == 1
    for info in fields.values():
        assert info.e_over_F * info.f_over_F * len(info.subgroup) == G.order


def test_lattice_rejects_non_involution():
    G = build_gamma(4, 1, 5, 0)
    with pytest.raises(TauNotInvolution):
        subfield_lattice(G, G.delta)


@given(st.sampled_from([p for p in ALL if p[0] * p[1] <= 24]))
def test_ramified_iff_in_inertia(params):
    """K/K_gamma is ramified exactly when gamma lies in <delta>."""
    G = build_gamma(*params)
    H, _ = involutions(G)
    for h in H - {0}:
        assert (h in G.inertia) == (len(frozenset({0, h}) & G.inertia) == 2)
        assert G.elem_order(h) == 2
