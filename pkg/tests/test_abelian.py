"""Finite abelian groups from relations, checked against brute-force enumeration."""

from __future__ import annotations

import itertools
from fractions import Fraction

from hypothesis import given
from hypothesis import strategies as st
from sympy import Matrix

from tamelocal.abelian import FinAb, integer_solve, solve_mod


@st.composite
def relation_sets(draw):
    """Full-rank relation matrices on up to three generators: a triangular
    block with small positive diagonal, plus a few arbitrary extra relations."""
    n = draw(st.integers(1, 3))
    diag = draw(st.lists(st.integers(1, 4), min_size=n, max_size=n))
    rows = []
    for i in range(n):
        above = draw(st.lists(st.integers(-4, 4), min_size=n - i - 1, max_size=n - i - 1))
        rows.append([0] * i + [diag[i]] + above)
    extra = draw(st.lists(st.lists(st.integers(-6, 6), min_size=n, max_size=n), max_size=2))
    order = draw(st.permutations(range(n)))
    rows = [[r[j] for j in order] for r in rows]
    return n, rows + [[r[j] for j in order] for r in extra]


def brute_quotient(n, rows):
    """Cosets of the relation lattice inside a box that surely covers Z^n / L."""
    L = FinAb(n, rows)
    bound = max(L.invariants, default=1)
    seen = {}
    for v in itertools.product(range(bound), repeat=n):
        seen.setdefault(L.coords(list(v)), v)
    return L, seen


@given(relation_sets())
def test_order_is_lattice_index(data):
    n, rows = data
    L = FinAb(n, rows)
    # the index of the lattice is the gcd of the maximal minors
    from math import gcd

    g = 0
    for sub in itertools.combinations(range(len(rows)), n):
        g = gcd(g, int(Matrix([rows[i] for i in sub]).det()))
    assert L.order == abs(g)
    assert all(L.invariants[i + 1] % L.invariants[i] == 0 for i in range(L.rank - 1))


@given(relation_sets(), st.data())
def test_coordinates_are_a_homomorphism_killing_relations(data, draw):
    n, rows = data
    L = FinAb(n, rows)
    for r in rows:
        assert L.coords(r) == L.zero()
    u = draw.draw(st.lists(st.integers(-20, 20), min_size=n, max_size=n))
    v = draw.draw(st.lists(st.integers(-20, 20), min_size=n, max_size=n))
    assert L.coords([a + b for a, b in zip(u, v)]) == L.add(L.coords(u), L.coords(v))
    assert L.coords(L.raw_of(L.coords(u))) == L.coords(u)


@given(relation_sets())
def test_all_coordinates_realized(data):
    n, rows = data
    L, seen = brute_quotient(n, rows)
    assert len(seen) == L.order


@given(relation_sets())
def test_characters_respect_relations(data):
    n, rows = data
    L = FinAb(n, rows)
    chars = list(L.characters())
    assert len(chars) == L.order
    for ch in chars[:20]:
        raw = [L.evaluate(ch, L.coords([1 if i == j else 0 for j in range(n)])) for i in range(n)]
        assert L.respects_relations(raw)
        assert L.character_from_raw(raw) == tuple(Fraction(x) % 1 for x in ch)


def test_subgroup_and_quotient():
    G = FinAb(2, [[12, 0], [0, 18]])
    S = G.subgroup([G.coords([3, 0]), G.coords([0, 9])])
    assert S.order == 4 * 2
    assert len(set(S.elements())) == S.order
    Q = G.quotient_by([G.coords([3, 0]), G.coords([0, 9])])
    assert Q.order * S.order == G.order
    assert S.express(G.coords([6, 9])) is not None
    assert S.express(G.coords([1, 0])) is None


def test_intersection():
    G = FinAb(1, [[24]])
    common = G.intersection([G.coords([4])], [G.coords([6])])
    S = G.subgroup(common)
    assert S.order == 2  # <4> and <6> in Z/24 meet in <12>


def test_integer_and_modular_solvers():
    assert integer_solve([[2, 4]], [6], 2) is not None
    assert integer_solve([[2, 4]], [5], 2) is None
    x = solve_mod([[3]], [6], [9])
    assert x is not None and (3 * x[0] - 6) % 9 == 0
    assert solve_mod([[3]], [1], [9]) is None
