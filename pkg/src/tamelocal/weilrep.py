"""Finite quotients of the relative Weil group and their class functions.

G = Gamma x_alpha A with A = K^x / M and M generated by p^2, 1 + p_K^t
(t = e r) and, when requested, K_+^x.  Elements are pairs (sigma, x)
multiplied by (sigma, x)(tau, y) = (sigma tau, alpha(sigma, tau) x^tau y),
written additively in A.  An element is stored as the integer
sigma * |A| + index(x), so every group operation is a vectorised numpy
computation over the whole group.

Class functions are tables of root-of-unity angles with integer
multiplicities: value(g) = scale * sum_j weight_j zeta_D^angle[g, j], an
angle of -1 marking an absent term.  Equality and inner products reduce
these histograms exactly in Z[zeta_D].
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .abelian import FinAb, SubGroup
from .chars import FiniteCharacter, norm_residue_character, theta_tilde_gamma
from .exactnum import Cyclo, from_histogram, reduce_histograms
from .galoisgrp import MetacyclicGroup
from .tamefield import LocalField, TowerModel

__all__ = [
    "ClassFunction",
    "CocycleInvalid",
    "CocycleProvider",
    "CustomCocycle",
    "CyclicFundamental",
    "FundamentalClassUnsupported",
    "NoForm",
    "RandomValid",
    "TheoremReport",
    "TrivialCocycle",
    "WeilQuotient",
    "build_weil_quotient",
    "chi_gamma_on_subgroup",
    "check_homomorphism",
    "decompose",
    "fs_indicator",
    "gamma_characters",
    "induced_character",
    "induced_from_kx",
    "inner_product",
    "linear_character_of_gamma",
    "module_group",
    "quotient_order",
    "regular_minus_tau",
    "verify_theorem51",
    "wedge_square_character",
]


class CocycleInvalid(ValueError):
    """The proposed table is not a normalized 2-cocycle."""


class FundamentalClassUnsupported(ValueError):
    """The cyclic fundamental-class construction needs a cyclic Gamma."""


class NoForm:
    """Marker: nu * chi != chi, so no nu-invariant bilinear form exists."""

    def __repr__(self):
        return "NoForm"

    def __eq__(self, other):
        return isinstance(other, NoForm)

    def __hash__(self):
        return hash("NoForm")


QUOTIENT_CAP = 200_000


# ---------------------------------------------------------------------------
# the module A = K^x / M


def _raw_of_element(t: TowerModel, level: int, x: np.ndarray) -> list[int]:
    K = t.field("K")
    v, u = K.split(np.asarray(x)[None])
    return [int(v[0])] + [int(c) for c in K.unit_group(level).coords(u)[0]]


def module_group(t: TowerModel, level: int, reduce: bool = False) -> FinAb:
    """K^x / <p^2, 1 + p_K^level [, K_+^x]> on the raw generators (varpi_K, unit generators)."""
    K = t.field("K")
    U = K.unit_group(level)
    ru = U.group.rank
    rows = []
    for i, d in enumerate(U.group.invariants):
        rows.append([0] + [d if j == i else 0 for j in range(ru)])
    rows.append(_raw_of_element(t, level, t.from_int(t.p**2)))
    if reduce:
        Kp = t.field("K+")
        G = t.gamma
        if not G.is_central(t.tau):
            raise ValueError("K_+ is not Galois over F: its units do not form a Gamma-stable subgroup")
        v_row, urows = Kp.embed_pairs(K, level)
        rows.append([int(x) for x in v_row])
        rows += [[int(x) for x in r] for r in urows]
    return FinAb(1 + ru, rows)


def quotient_order(t: TowerModel, reduce: bool = False) -> int:
    """|Gamma| |A| for the module A used by ``build_weil_quotient``."""
    return t.gamma.order * module_group(t, t.e * t.params.r, reduce).order


class KModule:
    """A = K^x / <p^2, 1 + p_K^t [, K_+^x]> with its Gamma action."""

    def __init__(self, t: TowerModel, level: int | None = None, reduce: bool = False):
        self.tower = t
        K = t.field("K")
        self.K = K
        self.level = level if level is not None else t.e * t.params.r
        self.reduce = reduce
        self.U = K.unit_group(self.level)
        self.group = A = module_group(t, self.level, reduce)
        self.order = A.order
        self.invariants = np.array(A.invariants, dtype=np.int64)
        self.rank = A.rank
        strides = [1] * self.rank
        for i in range(self.rank - 2, -1, -1):
            strides[i] = strides[i + 1] * int(self.invariants[i + 1])
        self.strides = np.array(strides, dtype=np.int64)
        idx = np.arange(self.order, dtype=np.int64)
        self.coords = np.stack([(idx // s) % d for s, d in zip(self.strides, self.invariants)], axis=1) if self.rank else np.zeros((self.order, 0), dtype=np.int64)
        self._actions: dict[int, np.ndarray] = {}
        self._neg = self.index(-self.coords)

    # -- conversions ---------------------------------------------------------------
    def raw_of_pair(self, v: int, unit_coords: Sequence[int]) -> list[int]:
        return [int(v)] + [int(c) for c in unit_coords]

    def raw_of_element(self, x: np.ndarray) -> list[int]:
        return _raw_of_element(self.tower, self.level, x)

    def index(self, coords: np.ndarray) -> np.ndarray:
        c = np.asarray(coords, dtype=np.int64) % self.invariants
        return c @ self.strides if self.rank else np.zeros(c.shape[:-1], dtype=np.int64)

    def index_of_raw(self, raw: Sequence[int]) -> int:
        return int(self.index(np.array(self.group.coords(list(raw)), dtype=np.int64)))

    def index_of_element(self, x: np.ndarray) -> int:
        return self.index_of_raw(self.raw_of_element(x))

    def add(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return self.index(self.coords[a] + self.coords[b])

    def neg(self, a: np.ndarray) -> np.ndarray:
        return self._neg[a]

    # -- Gamma action --------------------------------------------------------------
    def action(self, g: int) -> np.ndarray:
        """Permutation array a -> a^g."""
        if g not in self._actions:
            T, w = self.K.galois_coords(g, self.level)
            ru = self.U.group.rank
            R = np.zeros((1 + ru, 1 + ru), dtype=object)
            R[0, 0] = 1
            R[0, 1:] = [int(x) for x in w]
            for j in range(ru):
                R[1 + j, 1:] = [int(x) for x in T[j]]
            A = self.group
            M = np.zeros((self.rank, self.rank), dtype=np.int64)
            for i in range(self.rank):
                raw = np.array(A.generator_raw(i), dtype=object)
                img = raw @ R
                M[i] = A.coords([int(x) for x in img])
            self._actions[g] = self.index(self.coords @ M)
        return self._actions[g]

    # -- characters ----------------------------------------------------------------
    def character_angles(self, chi: FiniteCharacter) -> tuple[np.ndarray, int]:
        """(angle numerators on all of A, denominator) for a character of K^x trivial on M."""
        if chi.field.S != self.K.S:
            raise ValueError("character is not a character of K^x")
        chi = chi.at_level(self.level)
        raw = [chi.nv] + list(chi.nu)
        if not self.group.respects_relations(raw):
            raise ValueError(f"character {chi.name or ''} is not trivial on M")
        vals = self.group.character_from_raw(raw)
        D = math.lcm(1, *[v.denominator for v in vals])
        ints = np.array([int(v * D) for v in vals], dtype=np.int64)
        return (self.coords @ ints) % D if self.rank else np.zeros(self.order, dtype=np.int64), D

    def unit_indices(self, k: int = 0) -> np.ndarray:
        """Indices of the image of 1 + p_K^k (of O_K^x for k = 0) in A."""
        U = self.U
        if k == 0:
            gens = [self.group.coords([0] + [1 if j == i else 0 for j in range(U.group.rank)]) for i in range(U.group.rank)]
        elif k >= self.level:
            return np.zeros(1, dtype=np.int64)
        else:
            from .tamefield import filtration_generators

            gens = [self.group.coords([0] + list(c)) for c in filtration_generators(U, k)]
        return self.span(gens)

    def span(self, gens: Sequence[Sequence[int]]) -> np.ndarray:
        """Indices of the subgroup generated by elements given in canonical coordinates."""
        members = np.zeros(self.order, dtype=bool)
        members[0] = True
        frontier = np.array([0], dtype=np.int64)
        gidx = [int(self.index(np.array(g, dtype=np.int64))) for g in gens]
        while frontier.size:
            new = []
            for g in gidx:
                nb = self.add(frontier, np.full(frontier.shape, g))
                fresh = nb[~members[nb]]
                fresh = np.unique(fresh)
                members[fresh] = True
                new.append(fresh)
            frontier = np.unique(np.concatenate(new)) if new else np.array([], dtype=np.int64)
        return np.nonzero(members)[0]


# ---------------------------------------------------------------------------
# cocycle providers


class CocycleProvider:
    """Produces a normalized 2-cocycle Gamma x Gamma -> A (as A-indices)."""

    label = "abstract"

    def table(self, G: MetacyclicGroup, A: KModule) -> np.ndarray:  # pragma: no cover
        raise NotImplementedError

    def describe(self) -> str:
        return self.label


class TrivialCocycle(CocycleProvider):
    label = "trivial"

    def table(self, G, A):
        return np.zeros((G.order, G.order), dtype=np.int64)


@dataclass
class CustomCocycle(CocycleProvider):
    values: np.ndarray
    label: str = "custom"

    def table(self, G, A):
        return np.asarray(self.values, dtype=np.int64)


def _cyclic_generator(G: MetacyclicGroup) -> int | None:
    for g in range(G.order):
        if G.elem_order(g) == G.order:
            return g
    return None


@dataclass
class CyclicFundamental(CocycleProvider):
    """alpha(s^i, s^j) = a if i + j >= |Gamma| else 1, for a generator s of cyclic Gamma.

    With ``a`` None, a is the first element p^v y_F^k (units first) whose
    norm-residue class generates F^x / N_{K/F}(K^x).
    """

    a: tuple[int, int] | None = None
    label: str = "cyclic"

    def choose_a(self, t: TowerModel) -> tuple[int, int]:
        K, F = t.field("K"), t.field("F")
        chars = norm_residue_character(K, F)
        n = t.gamma.order
        for v in range(n):
            for k in range(F.q_L - 1):
                x = t.mul(t.from_int(t.p**v), F.teich(k))[None]
                order = math.lcm(1, *[Fraction(int(ch.angles_of(x)[0]), ch.den).denominator for ch in chars])
                if order == n:
                    return v, k
        raise FundamentalClassUnsupported("no generator of F^x / N(K^x) found")  # pragma: no cover

    def table(self, G, A):
        s = _cyclic_generator(G)
        if s is None:
            raise FundamentalClassUnsupported("Gamma is not cyclic")
        t = A.tower
        if self.a is None:
            self.a = self.choose_a(t)
        v, k = self.a
        F = t.field("F")
        elem = t.mul(t.from_int(t.p**v), F.teich(k))
        a_idx = A.index_of_element(elem)
        n = G.order
        pows = [G.power(s, i) for i in range(n)]
        out = np.zeros((n, n), dtype=np.int64)
        for i in range(n):
            for j in range(n):
                if i + j >= n:
                    out[pows[i], pows[j]] = a_idx
        return out

    def describe(self):
        return f"cyclic(a=p^{self.a[0]} y_F^{self.a[1]})" if self.a else "cyclic"


@dataclass
class RandomValid(CocycleProvider):
    """base * coboundary(b) for a random unit-valued normalized cochain b."""

    seed: int = 0
    base: CocycleProvider = field(default_factory=TrivialCocycle)
    label: str = "random"

    def table(self, G, A):
        rng = np.random.default_rng(self.seed)
        units = A.unit_indices(0)
        b = units[rng.integers(0, len(units), size=G.order)]
        b[0] = 0
        out = self.base.table(G, A).copy()
        for s in range(G.order):
            for u in range(G.order):
                # (d b)(s, u) = b(s)^u + b(u) - b(s u)
                term = A.add(A.action(u)[b[s]], b[u])
                term = A.add(term, A.neg(b[G.mul(s, u)]))
                out[s, u] = A.add(out[s, u], term)
        return out

    def describe(self):
        return f"random(seed={self.seed}, base={self.base.describe()})"


# ---------------------------------------------------------------------------
# the group


class WeilQuotient:
    """G = Gamma x_alpha A with elements encoded as sigma * |A| + index(x)."""

    def __init__(self, t: TowerModel, provider: CocycleProvider, module: KModule | None = None):
        self.tower = t
        self.gamma: MetacyclicGroup = t.gamma
        self.A = module if module is not None else KModule(t)
        self.provider = provider
        G, A = self.gamma, self.A
        self.alpha = np.asarray(provider.table(G, A), dtype=np.int64)
        self.nA = A.order
        self.order = G.order * A.order
        self.gmul = np.array(G.table, dtype=np.int64)
        self.ginv = np.array([G.inv(g) for g in range(G.order)], dtype=np.int64)
        self.perm = np.stack([A.action(g) for g in range(G.order)])
        self.verify_cocycle()
        self.verify_axioms()

    # -- encoding -----------------------------------------------------------------
    def encode(self, sigma, x) -> np.ndarray:
        return np.asarray(sigma, dtype=np.int64) * self.nA + np.asarray(x, dtype=np.int64)

    def decode(self, g) -> tuple[np.ndarray, np.ndarray]:
        g = np.asarray(g, dtype=np.int64)
        return g // self.nA, g % self.nA

    def all(self) -> np.ndarray:
        return np.arange(self.order, dtype=np.int64)

    # -- group law -------------------------------------------------------------------
    def mul(self, g, h) -> np.ndarray:
        s1, a1 = self.decode(g)
        s2, a2 = self.decode(h)
        s1, s2 = np.broadcast_arrays(s1, s2)
        a1, a2 = np.broadcast_arrays(a1, a2)
        A = self.A
        x = A.add(self.alpha[s1, s2], self.perm[s2, a1])
        x = A.add(x, a2)
        return self.encode(self.gmul[s1, s2], x)

    def inv(self, g) -> np.ndarray:
        s, a = self.decode(g)
        si = self.ginv[s]
        A = self.A
        y = A.neg(A.add(self.alpha[s, si], self.perm[si, a]))
        return self.encode(si, y)

    def conj(self, r, g) -> np.ndarray:
        """r^-1 g r."""
        return self.mul(self.mul(self.inv(r), g), r)

    def square(self, g) -> np.ndarray:
        return self.mul(g, g)

    def power(self, g, k: int) -> np.ndarray:
        out = np.zeros_like(np.asarray(g))
        for _ in range(k):
            out = self.mul(out, g)
        return out

    # -- verification ------------------------------------------------------------------
    def verify_cocycle(self) -> None:
        """alpha(st, u) alpha(s, t)^u = alpha(s, tu) alpha(t, u), normalization, involution fixity."""
        G, A, al = self.gamma, self.A, self.alpha
        n = G.order
        if al[0].any() or al[:, 0].any():
            raise CocycleInvalid("cocycle is not normalized")
        s, t_, u = np.meshgrid(np.arange(n), np.arange(n), np.arange(n), indexing="ij")
        st = self.gmul[s, t_]
        tu = self.gmul[t_, u]
        lhs = A.add(al[st, u], self.perm[u, al[s, t_]])
        rhs = A.add(al[s, tu], al[t_, u])
        if (lhs != rhs).any():
            raise CocycleInvalid("cocycle identity fails")
        for g in range(1, n):
            if G.mul(g, g) == 0 and self.perm[g, al[g, g]] != al[g, g]:
                raise CocycleInvalid("alpha(s, s) is not fixed by the involution s")

    def verify_axioms(self, samples: int = 2000, seed: int = 0) -> None:
        """Associativity and inverses on random triples; conjugation (g,1)^-1 (1,x) (g,1) = (1, x^g)."""
        rng = np.random.default_rng(seed)
        a, b, c = (rng.integers(0, self.order, samples) for _ in range(3))
        if (self.mul(self.mul(a, b), c) != self.mul(a, self.mul(b, c))).any():
            raise CocycleInvalid("multiplication is not associative")
        if (self.mul(a, self.inv(a)) != 0).any() or (self.mul(self.inv(a), a) != 0).any():
            raise CocycleInvalid("inverse map is wrong")
        x = rng.integers(0, self.nA, samples)
        for g in range(self.gamma.order):
            r = self.encode(g, 0)
            if (self.conj(r, self.encode(0, x)) != self.encode(0, self.perm[g, x])).any():
                raise CocycleInvalid("conjugation does not realize the Galois action")

    # -- subgroups -----------------------------------------------------------------------
    def inertia_indices(self) -> np.ndarray:
        """Elements (sigma, u) with sigma in the inertia group and u a unit."""
        units = self.A.unit_indices(0)
        sig = np.array(sorted(self.gamma.inertia), dtype=np.int64)
        out = (sig[:, None] * self.nA + units[None, :]).reshape(-1)
        member = np.zeros(self.order, dtype=bool)
        member[out] = True
        rng = np.random.default_rng(1)
        a = out[rng.integers(0, len(out), 500)]
        b = out[rng.integers(0, len(out), 500)]
        if not member[self.mul(a, b)].all():
            raise CocycleInvalid("the cocycle is not unit-valued on inertia; the inertia image is not a subgroup")
        return out

    def filtration_indices(self, k: int) -> np.ndarray:
        return self.encode(0, self.A.unit_indices(k))

    def generators(self) -> np.ndarray:
        gam = [self.encode(g, 0) for g in (self.gamma.delta, self.gamma.rho)]
        A = self.A
        units = [self.encode(0, int(A.index(np.eye(A.rank, dtype=np.int64)[i]))) for i in range(A.rank)]
        return np.array(gam + units, dtype=np.int64)


def build_weil_quotient(t: TowerModel, provider: CocycleProvider | None = None, reduce: bool | None = None) -> WeilQuotient:
    """The finite quotient of W_{K/F} used for character computations.

    ``reduce`` divides K^x by K_+^x as well; by default this happens only
    when the unreduced quotient would exceed ``QUOTIENT_CAP`` elements and
    K_+/F is Galois.
    """
    if provider is None:
        provider = TrivialCocycle()
    if reduce is None:
        reduce = quotient_order(t) > QUOTIENT_CAP and t.gamma.is_central(t.tau)
    return WeilQuotient(t, provider, KModule(t, reduce=reduce))


# ---------------------------------------------------------------------------
# class functions


@dataclass
class ClassFunction:
    """value(g) = scale * sum_j weights[j] zeta_D^angles[g, j] (angle -1: no term)."""

    G: WeilQuotient
    angles: np.ndarray
    D: int
    weights: np.ndarray
    scale: Fraction = Fraction(1)
    name: str = ""

    def __post_init__(self):
        self.angles = np.asarray(self.angles, dtype=np.int64)
        if self.angles.ndim == 1:
            self.angles = self.angles[:, None]
        self.weights = np.asarray(self.weights, dtype=np.int64)
        self.scale = Fraction(self.scale)

    @property
    def terms(self) -> int:
        return self.angles.shape[1]

    def rebased(self, D: int) -> "ClassFunction":
        if D % self.D:
            raise ValueError("new denominator must be a multiple")
        s = D // self.D
        ang = np.where(self.angles >= 0, self.angles * s, -1)
        return ClassFunction(self.G, ang, D, self.weights, self.scale, self.name)

    def _common(self, other: "ClassFunction") -> tuple["ClassFunction", "ClassFunction", Fraction]:
        D = math.lcm(self.D, other.D)
        a, b = self.rebased(D), other.rebased(D)
        # a common scale c with integer weights for both
        c = Fraction(math.gcd(a.scale.numerator, b.scale.numerator), math.lcm(a.scale.denominator, b.scale.denominator))
        return a, b, c

    def _with_scale(self, c: Fraction) -> np.ndarray:
        f = self.scale / c
        if f.denominator != 1:
            raise ValueError("scale is not a multiple of the common scale")
        return self.weights * int(f)

    def __add__(self, other: "ClassFunction") -> "ClassFunction":
        a, b, c = self._common(other)
        return ClassFunction(
            self.G,
            np.concatenate([a.angles, b.angles], axis=1),
            a.D,
            np.concatenate([a._with_scale(c), b._with_scale(c)]),
            c,
        )

    def __neg__(self) -> "ClassFunction":
        return ClassFunction(self.G, self.angles, self.D, -self.weights, self.scale, self.name)

    def __sub__(self, other: "ClassFunction") -> "ClassFunction":
        return self + (-other)

    def times_angles(self, ang: np.ndarray, D: int) -> "ClassFunction":
        """Pointwise product with a linear character given by angles mod D."""
        D2 = math.lcm(self.D, D)
        a = self.rebased(D2)
        nu = np.asarray(ang, dtype=np.int64) * (D2 // D)
        new = np.where(a.angles >= 0, (a.angles + nu[:, None]) % D2, -1)
        return ClassFunction(self.G, new, D2, a.weights, a.scale)

    def at(self, idx: np.ndarray) -> "ClassFunction":
        """The class function g -> self(idx[g]) as a table over the same group (for g^2 etc)."""
        return ClassFunction(self.G, self.angles[idx], self.D, self.weights, self.scale)

    def histograms(self, rows: np.ndarray) -> np.ndarray:
        ang = self.angles[rows]
        B = ang.shape[0]
        H = np.zeros((B, self.D), dtype=np.int64)
        for j in range(self.terms):
            col = ang[:, j]
            ok = col >= 0
            np.add.at(H, (np.nonzero(ok)[0], col[ok]), self.weights[j])
        return H

    def value(self, g: int) -> Cyclo:
        H = self.histograms(np.array([g]))[0]
        return from_histogram(self.D, H, self.scale)

    def is_zero(self, chunk: int = 4096) -> tuple[bool, list[int]]:
        """Exact vanishing test; returns (all zero, first few offending elements)."""
        bad = []
        for start in range(0, self.G.order, chunk):
            rows = np.arange(start, min(start + chunk, self.G.order))
            red = reduce_histograms(self.D, self.histograms(rows))
            nz = np.nonzero(red.any(axis=1))[0]
            bad += [int(rows[i]) for i in nz[: 10 - len(bad)]] if len(bad) < 10 else []
            if len(bad) >= 10:
                break
        return not bad, bad

    def equals(self, other: "ClassFunction") -> tuple[bool, list[int]]:
        return (self - other).is_zero()

    def sum_over(self, rows: np.ndarray) -> Cyclo:
        """scale * sum over the given elements, exactly."""
        H = np.zeros(self.D, dtype=np.int64)
        ang = self.angles[rows]
        for j in range(self.terms):
            col = ang[:, j]
            col = col[col >= 0]
            H += np.bincount(col, minlength=self.D) * self.weights[j]
        return from_histogram(self.D, H, self.scale)

    def average_over(self, rows: np.ndarray) -> Cyclo:
        return self.sum_over(rows) * Cyclo.rational(Fraction(1, len(rows)))

    def degree(self) -> Cyclo:
        return self.value(0)

    def is_class_function(self) -> bool:
        """Invariance under conjugation by the generators of G."""
        G = self.G
        allg = G.all()
        for r in G.generators():
            c = G.conj(np.int64(r), allg)
            ok, _ = self.equals(self.at(c))
            if not ok:
                return False
        return True

    @staticmethod
    def from_gamma(G: WeilQuotient, values: dict[int, int], name: str = "") -> "ClassFunction":
        """A class function pulled back from integer values on Gamma."""
        sig, _ = G.decode(G.all())
        cols, weights = [], []
        for s, v in values.items():
            if v:
                cols.append(np.where(sig == s, 0, -1))
                weights.append(v)
        if not cols:
            cols, weights = [np.full(G.order, -1)], [0]
        return ClassFunction(G, np.stack(cols, axis=1), 1, np.array(weights), Fraction(1), name)


def induced_character(
    G: WeilQuotient,
    sub_sigmas: Sequence[int],
    chi: Callable[[np.ndarray], np.ndarray],
    D: int,
    name: str = "",
) -> ClassFunction:
    """Character of Ind_H^G chi for H = {(sigma, x) : sigma in sub_sigmas}.

    ``chi`` maps an array of elements of H to angle numerators mod D.  The
    induced character is computed from its definition
    sum over left coset representatives r = (alpha, 1) of chi(r^-1 g r),
    with chi extended by zero off H.
    """
    Gam = G.gamma
    sub = frozenset(sub_sigmas)
    reps, seen = [], set()
    for a in range(Gam.order):
        coset = frozenset(Gam.mul(a, h) for h in sub)
        if coset not in seen:
            seen.add(coset)
            reps.append(a)
    allg = G.all()
    cols = []
    for a in reps:
        c = G.conj(G.encode(a, 0), allg)
        s, _ = G.decode(c)
        inside = np.isin(s, list(sub))
        ang = np.full(G.order, -1, dtype=np.int64)
        if inside.any():
            ang[inside] = chi(c[inside]) % D
        cols.append(ang)
    return ClassFunction(G, np.stack(cols, axis=1), D, np.ones(len(cols), dtype=np.int64), Fraction(1), name)


def _kx_character(G: WeilQuotient, chi: FiniteCharacter) -> tuple[Callable, int]:
    ang, D = G.A.character_angles(chi)

    def f(elems):
        _, x = G.decode(elems)
        return ang[x]

    return f, D


def induced_from_kx(G: WeilQuotient, chi: FiniteCharacter, name: str = "") -> ClassFunction:
    f, D = _kx_character(G, chi)
    return induced_character(G, [0], f, D, name)


def chi_gamma_on_subgroup(G: WeilQuotient, tt: FiniteCharacter, gamma: int) -> tuple[Callable, int]:
    """chi_gamma(sigma, x) = sign(sigma) theta~(alpha(sigma, gamma) x^(1 + gamma)) on W_{K/K_gamma}."""
    ang, D = G.A.character_angles(tt)
    D2 = math.lcm(D, 2)
    ang = ang * (D2 // D)
    A = G.A
    perm = G.perm[gamma]

    def f(elems):
        s, x = G.decode(elems)
        y = A.add(x, perm[x])
        y = A.add(G.alpha[s, gamma], y)
        out = ang[y]
        return np.where(s == gamma, (out + D2 // 2) % D2, out)

    return f, D2


def check_homomorphism(G: WeilQuotient, f: Callable, D: int, sub_sigmas: Sequence[int], samples: int = 3000) -> bool:
    """Sampled check that f is multiplicative on {(sigma, x) : sigma in sub_sigmas}."""
    rng = np.random.default_rng(7)
    sig = np.array(list(sub_sigmas))
    a = G.encode(sig[rng.integers(0, len(sig), samples)], rng.integers(0, G.nA, samples))
    b = G.encode(sig[rng.integers(0, len(sig), samples)], rng.integers(0, G.nA, samples))
    return bool((((f(a) + f(b)) - f(G.mul(a, b))) % D == 0).all())


def wedge_square_character(chi: ClassFunction) -> ClassFunction:
    """(chi(g)^2 - chi(g^2)) / 2."""
    G = chi.G
    T = chi.terms
    A = chi.angles
    D = chi.D
    cols, weights = [], []
    for i in range(T):
        for j in range(T):
            ok = (A[:, i] >= 0) & (A[:, j] >= 0)
            cols.append(np.where(ok, (A[:, i] + A[:, j]) % D, -1))
            weights.append(int(chi.weights[i] * chi.weights[j]))
    sq = chi.at(G.square(G.all()))
    first = ClassFunction(G, np.stack(cols, axis=1), D, np.array(weights), chi.scale * chi.scale)
    out = first - sq
    out.scale = out.scale / 2
    out.name = "wedge2"
    return out


def inner_product(chi1: ClassFunction, chi2: ClassFunction) -> Cyclo:
    """|G|^-1 sum chi1(g) conj(chi2(g)), exactly."""
    G = chi1.G
    D = math.lcm(chi1.D, chi2.D)
    a, b = chi1.rebased(D), chi2.rebased(D)
    H = np.zeros(D, dtype=np.int64)
    for i in range(a.terms):
        ai = a.angles[:, i]
        for j in range(b.terms):
            bj = b.angles[:, j]
            ok = (ai >= 0) & (bj >= 0)
            H += np.bincount((ai[ok] - bj[ok]) % D, minlength=D) * int(a.weights[i] * b.weights[j])
    return from_histogram(D, H, a.scale * b.scale / G.order)


# ---------------------------------------------------------------------------
# linear characters of Gamma and the indicator


def gamma_characters(Gam: MetacyclicGroup) -> list[list[Fraction]]:
    """All linear characters of Gamma as angle tables (found from generator images)."""
    e, f, q, m = Gam.e, Gam.f, Gam.q, Gam.m
    out = []
    for i in range(e):
        a = Fraction(i, e)
        if ((q - 1) * a) % 1:
            continue
        for j in range(f * e):
            b = Fraction(j, f * e)
            if (f * b - m * a) % 1:
                continue
            table = []
            for g in range(Gam.order):
                x, y = Gam.parts(g)
                table.append((x * a + y * b) % 1)
            # confirm multiplicativity
            if all(
                (table[g] + table[h] - table[Gam.mul(g, h)]) % 1 == 0
                for g in range(Gam.order)
                for h in range(Gam.order)
            ):
                out.append(table)
    return out


def linear_character_of_gamma(G: WeilQuotient, table: Sequence[Fraction]) -> tuple[np.ndarray, int]:
    D = math.lcm(1, *[Fraction(v).denominator for v in table])
    s, _ = G.decode(G.all())
    vals = np.array([int(Fraction(v) * D) % D for v in table], dtype=np.int64)
    return vals[s], D


def fs_indicator(G: WeilQuotient, nu: tuple[np.ndarray, int], chi: ClassFunction):
    """|G|^-1 sum nu(g) chi(g^2) when nu chi = chi, else ``NoForm()``."""
    ang, D = nu
    twisted = chi.times_angles(ang, D)
    same, _ = twisted.equals(chi)
    if not same:
        return NoForm()
    sq = chi.at(G.square(G.all())).times_angles(ang, D)
    return sq.sum_over(G.all()) * Cyclo.rational(Fraction(1, G.order))


# ---------------------------------------------------------------------------
# Theorem: decomposition of the exterior square of phi_1


@dataclass
class TheoremReport:
    equal: bool
    mismatches: list[int]
    provider: str
    group_order: int
    pieces: dict[str, int]
    degree_lhs: Cyclo
    degree_rhs: Cyclo

    def to_json(self) -> dict:
        return {
            "equal": self.equal,
            "mismatches": self.mismatches,
            "provider": self.provider,
            "group_order": self.group_order,
            "pieces": self.pieces,
            "degree_lhs": self.degree_lhs.render(),
            "degree_rhs": self.degree_rhs.render(),
        }


@dataclass
class Decomposition:
    """The characters entering the exterior-square identity on one quotient."""

    G: WeilQuotient
    phi1: ClassFunction
    wedge2: ClassFunction
    pi1: ClassFunction
    rho: dict[tuple[int, int], ClassFunction]
    pi: dict[int, ClassFunction]

    def rhs(self) -> ClassFunction:
        out = self.pi1
        for cf in self.rho.values():
            out = out + cf
        for cf in self.pi.values():
            out = out + cf
        return out

    def adjoint(self) -> ClassFunction:
        return self.wedge2 + self.phi1


def regular_minus_tau(G: WeilQuotient) -> ClassFunction:
    """chi_{R_Gamma} - chi_{R_tau}, both induced characters of Gamma computed from coset sums."""
    Gam = G.gamma
    tau = G.tower.tau
    sub = {0, tau}
    vals = {}
    for s in range(Gam.order):
        reg = Gam.order if s == 0 else 0
        # Ind_<tau>^Gamma 1 at s: number of cosets a<tau> with a^-1 s a in <tau>
        rt = sum(1 for a in range(Gam.order) if Gam.mul(Gam.mul(Gam.inv(a), s), a) in sub) // len(sub)
        vals[s] = reg - rt
    return ClassFunction.from_gamma(G, vals, "R_Gamma - R_tau")


def decompose(G: WeilQuotient, tt: FiniteCharacter) -> Decomposition:
    """Build chi_{phi_1}, its exterior square and the right-hand pieces for theta~ = tt."""
    Gam = G.gamma
    tau = G.tower.tau
    phi1 = induced_from_kx(G, tt, "phi1")
    w2 = wedge_square_character(phi1)
    pi1 = regular_minus_tau(G)
    rho = {}
    done = set()
    for g in range(Gam.order):
        gi = Gam.inv(g)
        if Gam.mul(g, g) == 0 or g in done:
            continue
        done |= {g, gi}
        rho[(g, gi)] = induced_from_kx(G, theta_tilde_gamma(tt, g), f"rho_{Gam.label(g)}")
    pi = {}
    for g in range(1, Gam.order):
        if g == tau or Gam.mul(g, g) != 0:
            continue
        f, D = chi_gamma_on_subgroup(G, tt, g)
        pi[g] = induced_character(G, [0, g], f, D, f"pi_{Gam.label(g)}")
    return Decomposition(G, phi1, w2, pi1, rho, pi)


def verify_theorem51(G: WeilQuotient, tt: FiniteCharacter) -> TheoremReport:
    """Pointwise comparison of chi_{wedge^2 phi_1} with the sum of the pieces."""
    dec = decompose(G, tt)
    rhs = dec.rhs()
    ok, bad = dec.wedge2.equals(rhs)
    pieces = {"rho": len(dec.rho), "pi": len(dec.pi)}
    return TheoremReport(ok, bad, G.provider.describe(), G.order, pieces, dec.wedge2.degree(), rhs.degree())
