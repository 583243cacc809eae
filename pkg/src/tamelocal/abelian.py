"""Finite abelian groups given by generators and relations.

The group is Z^n / L where L is spanned by integer relation rows.  A Smith
normal form D = U R V puts it in the form (+) Z/d_i: the canonical
coordinates of a raw exponent vector v are (v V)_i mod d_i, and canonical
generator i is row i of V^{-1}.  Characters are recorded by their values
in Q/Z, either on raw or on canonical generators.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

from sympy import Matrix, ZZ
from sympy.matrices.normalforms import smith_normal_decomp

__all__ = ["FinAb", "integer_solve", "left_kernel", "solve_mod"]


def _snf(rows: Sequence[Sequence[int]], ncols: int):
    """Return (diag, U, V) with U * M * V diagonal, entries as Python ints."""
    M = Matrix(len(rows), ncols, [int(x) for r in rows for x in r])
    D, U, V = smith_normal_decomp(M, domain=ZZ)
    m, n = D.shape
    diag = [int(D[i, i]) for i in range(min(m, n))]
    U = [[int(U[i, j]) for j in range(U.shape[1])] for i in range(U.shape[0])]
    V = [[int(V[i, j]) for j in range(V.shape[1])] for i in range(V.shape[0])]
    # normalise signs so that every diagonal entry is non-negative
    for i, d in enumerate(diag):
        if d < 0:
            diag[i] = -d
            U[i] = [-x for x in U[i]]
    return diag, U, V


def _matinv_unimodular(V: list[list[int]]) -> list[list[int]]:
    Mi = Matrix(V).inv()
    return [[int(Mi[i, j]) for j in range(Mi.shape[1])] for i in range(Mi.shape[0])]


def left_kernel(rows: Sequence[Sequence[int]], ncols: int) -> list[list[int]]:
    """Integer basis of {a : a * M = 0} for the matrix M with the given rows."""
    if not rows:
        return []
    diag, U, _ = _snf(rows, ncols)
    rank = sum(1 for d in diag if d != 0)
    return [U[i] for i in range(rank, len(rows))]


def integer_solve(A: Sequence[Sequence[int]], b: Sequence[int], ncols: int) -> list[int] | None:
    """One integer solution z of A z = b, or None."""
    m = len(A)
    if m == 0:
        return [0] * ncols
    diag, U, V = _snf(A, ncols)
    ub = [sum(U[i][j] * b[j] for j in range(m)) for i in range(m)]
    w = [0] * ncols
    for i in range(m):
        d = diag[i] if i < len(diag) else 0
        if d == 0:
            if ub[i] != 0:
                return None
        else:
            if ub[i] % d:
                return None
            w[i] = ub[i] // d
    return [sum(V[i][j] * w[j] for j in range(ncols)) for i in range(ncols)]


def solve_mod(C: Sequence[Sequence[int]], b: Sequence[int], moduli: Sequence[int]) -> list[int] | None:
    """One solution x of C x = b (mod moduli, row by row), or None."""
    m = len(C)
    n = len(C[0]) if m else 0
    A = [list(C[i]) + [moduli[i] if j == i else 0 for j in range(m)] for i in range(m)]
    z = integer_solve(A, b, n + m)
    return None if z is None else z[:n]


@dataclass
class FinAb:
    """Finite abelian group Z^n / <relations> with canonical coordinates."""

    ngens: int
    relations: list[list[int]]
    invariants: tuple[int, ...] = field(init=False)
    _V: list[list[int]] = field(init=False, repr=False)
    _Vinv_rows: list[list[int]] = field(init=False, repr=False)
    _keep: list[int] = field(init=False, repr=False)

    def __post_init__(self):
        n = self.ngens
        rows = [list(map(int, r)) for r in self.relations if any(r)]
        if n == 0:
            self.invariants = ()
            self._V, self._Vinv_rows, self._keep = [], [], []
            return
        if len(rows) < n:
            raise ValueError("relations do not define a finite group")
        diag, _, V = _snf(rows, n)
        if any(d == 0 for d in diag[:n]) or len(diag) < n:
            raise ValueError("relations do not define a finite group")
        Vinv = _matinv_unimodular(V)
        self._keep = [i for i in range(n) if diag[i] != 1]
        self.invariants = tuple(diag[i] for i in self._keep)
        self._V = V
        self._Vinv_rows = [Vinv[i] for i in self._keep]

    # -- basic data ---------------------------------------------------------
    @property
    def order(self) -> int:
        return math.prod(self.invariants)

    @property
    def exponent(self) -> int:
        return math.lcm(*self.invariants) if self.invariants else 1

    @property
    def rank(self) -> int:
        return len(self.invariants)

    def coords(self, raw: Sequence[int]) -> tuple[int, ...]:
        """Canonical coordinates of the raw exponent vector."""
        V = self._V
        return tuple(
            sum(raw[k] * V[k][i] for k in range(self.ngens) if raw[k]) % d
            for i, d in zip(self._keep, self.invariants)
        )

    def raw_of(self, c: Sequence[int]) -> list[int]:
        """A raw exponent vector representing canonical coordinates c."""
        out = [0] * self.ngens
        for ci, row in zip(c, self._Vinv_rows):
            if ci:
                for k in range(self.ngens):
                    out[k] += ci * row[k]
        return out

    def generator_raw(self, i: int) -> list[int]:
        return list(self._Vinv_rows[i])

    def add(self, a, b):
        return tuple((x + y) % d for x, y, d in zip(a, b, self.invariants))

    def neg(self, a):
        return tuple((-x) % d for x, d in zip(a, self.invariants))

    def scale(self, a, k: int):
        return tuple((x * k) % d for x, d in zip(a, self.invariants))

    def zero(self):
        return tuple(0 for _ in self.invariants)

    def elements(self) -> Iterator[tuple[int, ...]]:
        return itertools.product(*[range(d) for d in self.invariants])

    def index(self, c: Sequence[int]) -> int:
        i = 0
        for x, d in zip(c, self.invariants):
            i = i * d + x
        return i

    # -- characters -----------------------------------------------------------
    def character_from_raw(self, raw_values: Sequence[Fraction]) -> tuple[Fraction, ...]:
        """Values on canonical generators of a character given on raw generators."""
        out = []
        for row in self._Vinv_rows:
            out.append(sum((Fraction(v) * r for v, r in zip(raw_values, row)), Fraction(0)) % 1)
        return tuple(out)

    def respects_relations(self, raw_values: Sequence[Fraction]) -> bool:
        return all(
            sum((Fraction(v) * r for v, r in zip(raw_values, rel)), Fraction(0)) % 1 == 0
            for rel in self.relations
        )

    @staticmethod
    def evaluate(char: Sequence[Fraction], c: Sequence[int]) -> Fraction:
        return sum((Fraction(x) * y for x, y in zip(char, c)), Fraction(0)) % 1

    def characters(self) -> Iterator[tuple[Fraction, ...]]:
        """All characters in lexicographic order of numerators."""
        for nums in self.elements():
            yield tuple(Fraction(x, d) for x, d in zip(nums, self.invariants))

    # -- subgroups ------------------------------------------------------------
    def subgroup(self, gens: Sequence[Sequence[int]]) -> "SubGroup":
        return SubGroup(self, [tuple(g) for g in gens])

    def quotient_by(self, gens: Sequence[Sequence[int]]) -> "FinAb":
        """The quotient by the subgroup generated by elements given in coordinates."""
        rows = [[d if i == j else 0 for j in range(self.rank)] for i, d in enumerate(self.invariants)]
        rows += [list(g) for g in gens]
        return FinAb(self.rank, rows)

    def intersection(self, gens_a, gens_b) -> list[tuple[int, ...]]:
        """Generators (in coordinates) of <gens_a> intersected with <gens_b>."""
        r = self.rank
        ka, kb = len(gens_a), len(gens_b)
        rows = [list(g) for g in gens_a] + [[-x for x in g] for g in gens_b]
        rows += [[d if i == j else 0 for j in range(r)] for i, d in enumerate(self.invariants)]
        out = []
        for a in left_kernel(rows, r):
            v = [0] * r
            for i in range(ka):
                if a[i]:
                    for j in range(r):
                        v[j] += a[i] * gens_a[i][j]
            c = tuple(x % d for x, d in zip(v, self.invariants))
            if any(c):
                out.append(c)
        return out


class SubGroup:
    """Subgroup of a FinAb generated by given elements, with its own coordinates."""

    def __init__(self, ambient: FinAb, gens: list[tuple[int, ...]]):
        self.ambient = ambient
        self.gens = gens
        k = len(gens)
        r = ambient.rank
        rows = [list(g) for g in gens] + [
            [d if i == j else 0 for j in range(r)] for i, d in enumerate(ambient.invariants)
        ]
        rels = [a[:k] for a in left_kernel(rows, r)] if rows else []
        rels += [[0] * k] if not rels else []
        if k == 0:
            self.group = FinAb(0, [])
        else:
            # a finite subgroup: every generator has finite order, so rels has full rank
            rels += [[ambient.exponent if i == j else 0 for j in range(k)] for i in range(k)]
            self.group = FinAb(k, rels)

    @property
    def order(self) -> int:
        return self.group.order

    def express(self, c: Sequence[int]) -> tuple[int, ...] | None:
        """Coordinates in the subgroup of the ambient element c, or None."""
        k = len(self.gens)
        if k == 0:
            return () if not any(c) else None
        C = [[self.gens[j][i] for j in range(k)] for i in range(self.ambient.rank)]
        x = solve_mod(C, list(c), list(self.ambient.invariants))
        if x is None:
            return None
        return self.group.coords(x)

    def to_ambient(self, sc: Sequence[int]) -> tuple[int, ...]:
        raw = self.group.raw_of(sc)
        v = [0] * self.ambient.rank
        for a, g in zip(raw, self.gens):
            if a:
                for j in range(self.ambient.rank):
                    v[j] += a * g[j]
        return tuple(x % d for x, d in zip(v, self.ambient.invariants))

    def elements(self) -> Iterator[tuple[int, ...]]:
        for sc in self.group.elements():
            yield self.to_ambient(sc)
