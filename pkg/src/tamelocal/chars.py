"""Additive and multiplicative characters on finite quotients of local fields.

A multiplicative character of L^x trivial on 1 + p_L^N is stored linearly:
its angle (in Q/Z) on varpi_L and on each canonical generator of
(O_L / p_L^N)^x.  An element of L^x / (1 + p_L^N) is the pair
(ord_L x, canonical coordinates of x / varpi_L^ord), so evaluation is a
dot product and Galois twists, restrictions and norm pullbacks are
integer matrix operations on these angle vectors.

This module also builds the admissible characters theta of U_{K/K_+},
the correction character c attached to the chi-data, the twisted
characters theta~ and theta~_gamma, and norm residue symbols of the
quadratic subextensions of the lattice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterator, Sequence

import numpy as np

from .abelian import FinAb, SubGroup, solve_mod
from .exactnum import Cyclo
from .tamefield import (
    LocalField,
    TowerModel,
    UnitGroup,
    filtration_generators,
    norm_one_generators,
)

__all__ = [
    "AdditiveCharacter",
    "AdmissibleThetas",
    "ChiData",
    "DepthInsufficient",
    "FiniteCharacter",
    "admissible_thetas",
    "chi_data_c",
    "conductor",
    "galois_twist_fixers",
    "norm_residue_character",
    "norm_residue_symbol",
    "psi_p",
    "theta_tilde",
    "theta_tilde_gamma",
]


class DepthInsufficient(ValueError):
    """The character is not tabulated deep enough for the request."""


def _frac_vec(values) -> tuple[Fraction, ...]:
    return tuple(Fraction(v) % 1 for v in values)


def psi_p(p: int, j: int, z: int) -> Fraction:
    """The angle of psi_{Q_p}(z / p^j) = exp(2 pi i z / p^j) for an integer z."""
    return Fraction(int(z) % p**j, p**j)


# ---------------------------------------------------------------------------
# additive characters


class AdditiveCharacter:
    """psi_L = psi_{Q_p} o Tr_{L/Q_p} on varpi_L^-shift O_L.

    With psi_{Q_p}(x) = exp(2 pi i {x}), the conductor exponent of psi_L is
    n(psi_L) = d(L) = e(L/Q_p) - 1, since F/Q_p is unramified.
    """

    def __init__(self, L: LocalField):
        self.L = L

    @property
    def conductor_exponent(self) -> int:
        return self.L.different_exponent

    def angles(self, shift: int, z: np.ndarray) -> tuple[np.ndarray, int]:
        """Numerators mod p^j of psi_L(varpi_L^-shift z) for a batch z of O_L."""
        return self.L.psi_angle(shift, z)

    def value(self, shift: int, z: np.ndarray) -> Cyclo:
        nums, pj = self.angles(shift, np.asarray(z)[None])
        return Cyclo.root(pj, int(nums[0]))

    def is_trivial_on(self, shift: int) -> bool:
        """Whether psi_L(varpi_L^-shift O_L) = 1, by evaluation on an O_L-basis."""
        L = self.L
        basis = np.stack([L.monomial(j, i) for i in range(L.e_L) for j in range(L.d_L)])
        nums, _ = self.angles(shift, basis)
        return not nums.any()


# ---------------------------------------------------------------------------
# multiplicative characters


@dataclass(frozen=True, eq=False)
class FiniteCharacter:
    """A character of L^x trivial on 1 + p_L^level, stored by its angles.

    ``nv`` is the angle on varpi_L; ``nu`` the angles on the canonical
    generators of ``L.unit_group(level)``.
    """

    field: LocalField
    level: int
    nv: Fraction
    nu: tuple[Fraction, ...]
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "nv", Fraction(self.nv) % 1)
        object.__setattr__(self, "nu", _frac_vec(self.nu))
        if len(self.nu) != self.units.group.rank:
            raise ValueError("angle vector does not match the unit group")
        for a, d in zip(self.nu, self.units.group.invariants):
            if (a * d) % 1:
                raise ValueError("angles are not compatible with the generator orders")

    # -- structure -----------------------------------------------------------------
    @property
    def units(self) -> UnitGroup:
        return self.field.unit_group(self.level)

    @cached_property
    def den(self) -> int:
        return math.lcm(self.nv.denominator, *[a.denominator for a in self.nu])

    @cached_property
    def _ints(self) -> tuple[int, np.ndarray]:
        D = self.den
        return int(self.nv * D), np.array([int(a * D) for a in self.nu], dtype=np.int64)

    def key(self) -> tuple:
        return (self.field.name, self.level, self.nv, self.nu)

    def __eq__(self, other):
        if not isinstance(other, FiniteCharacter):
            return NotImplemented
        if other.field.S != self.field.S or other.field.tower is not self.field.tower:
            return False
        lev = max(self.level, other.level)
        a, b = self.at_level(lev), other.at_level(lev)
        return a.nv == b.nv and a.nu == b.nu

    def __hash__(self):
        return hash((self.field.name, self.nv))

    # -- evaluation ----------------------------------------------------------------
    def angles_of_pairs(self, v, c) -> np.ndarray:
        """Numerators mod den of the values on pairs (ord, unit coordinates)."""
        nv, nu = self._ints
        v = np.asarray(v, dtype=np.int64)
        c = np.asarray(c, dtype=np.int64)
        if c.ndim == 1:
            c = c[None]
        acc = (v * nv) % self.den
        for i in range(len(nu)):
            acc = (acc + c[:, i] * nu[i]) % self.den
        return acc

    def pairs_of(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        v, u = self.field.split(np.asarray(x))
        return v, self.units.coords(u)

    def angles_of(self, x: np.ndarray) -> np.ndarray:
        """Numerators mod den of chi on a batch of nonzero elements of L."""
        v, c = self.pairs_of(x)
        return self.angles_of_pairs(v, c)

    def angle(self, x: np.ndarray) -> Fraction:
        return Fraction(int(self.angles_of(np.asarray(x)[None])[0]), self.den)

    def __call__(self, x: np.ndarray) -> Cyclo:
        return Cyclo.from_angle(self.angle(x))

    def angle_on_unit_coords(self, c: Sequence[int]) -> Fraction:
        return sum((a * int(x) for a, x in zip(self.nu, c)), Fraction(0)) % 1

    # -- group operations -----------------------------------------------------------
    def _combine(self, other: "FiniteCharacter", sign: int) -> "FiniteCharacter":
        if other.field.S != self.field.S:
            raise ValueError("characters live on different fields")
        lev = max(self.level, other.level)
        a, b = self.at_level(lev), other.at_level(lev)
        return FiniteCharacter(
            self.field, lev, a.nv + sign * b.nv, tuple(x + sign * y for x, y in zip(a.nu, b.nu))
        )

    def __mul__(self, other: "FiniteCharacter") -> "FiniteCharacter":
        return self._combine(other, 1)

    def __truediv__(self, other: "FiniteCharacter") -> "FiniteCharacter":
        return self._combine(other, -1)

    def inverse(self) -> "FiniteCharacter":
        return FiniteCharacter(self.field, self.level, -self.nv, tuple(-a for a in self.nu))

    def __pow__(self, k: int) -> "FiniteCharacter":
        return FiniteCharacter(self.field, self.level, self.nv * k, tuple(a * k for a in self.nu))

    def is_trivial(self) -> bool:
        return self.nv == 0 and not any(self.nu)

    def is_unramified(self) -> bool:
        return not any(self.nu)

    def named(self, name: str) -> "FiniteCharacter":
        return FiniteCharacter(self.field, self.level, self.nv, self.nu, name)

    # -- change of level, twists, restriction -----------------------------------------
    def at_level(self, N: int) -> "FiniteCharacter":
        """The same character tabulated on (O_L / p_L^N)^x."""
        if N == self.level:
            return self
        if N < self.level and self.conductor() > N:
            raise DepthInsufficient(f"character is not trivial on 1 + p^{N}")
        U2 = self.field.unit_group(N)
        gens = U2.generator_elements()
        if not gens:
            return FiniteCharacter(self.field, N, self.nv, (), self.name)
        coords = self.units.coords(np.stack(gens))
        angles = [self.angle_on_unit_coords(c) for c in coords]
        return FiniteCharacter(self.field, N, self.nv, tuple(angles), self.name)

    def conductor(self) -> int:
        """min k >= 1 with chi trivial on 1 + p_L^k, and 0 if chi is unramified."""
        if self.is_unramified():
            return 0
        for k in range(1, self.level + 1):
            gens = filtration_generators(self.units, k) if k < self.level else []
            if all(self.angle_on_unit_coords(g) == 0 for g in gens):
                return k
        return self.level  # pragma: no cover - 1 + p^level is the kernel of the table

    def galois_twist(self, g: int) -> "FiniteCharacter":
        """x -> chi(x^g), for g normalizing L (used on L = K)."""
        T, w = self.field.galois_coords(g, self.level)
        nv = self.nv + sum((Fraction(int(wi)) * a for wi, a in zip(w, self.nu)), Fraction(0))
        nu = tuple(
            sum((Fraction(int(T[j, i])) * self.nu[i] for i in range(len(self.nu))), Fraction(0))
            for j in range(len(self.nu))
        )
        return FiniteCharacter(self.field, self.level, nv, nu)

    def restrict(self, sub: LocalField) -> "FiniteCharacter":
        """The restriction to the subfield ``sub`` of L."""
        L = self.field
        rel = sub.k // L.k
        N_sub = -(-self.level // rel)
        v_row, rows = sub.embed_pairs(L, self.level)
        vec = (self.nv,) + self.nu
        nv = sum((Fraction(int(x)) * a for x, a in zip(v_row, vec)), Fraction(0))
        nu = tuple(sum((Fraction(int(x)) * a for x, a in zip(r, vec)), Fraction(0)) for r in rows)
        return FiniteCharacter(sub, N_sub, nv, nu)

    def pullback_norm(self, big: LocalField) -> "FiniteCharacter":
        """x -> chi(N_{big/L} x) as a character of big^x."""
        L = self.field
        rel = L.k // big.k  # e(big / L)
        N_big = self.level * rel
        Ub = big.unit_group(N_big)
        fdeg, A = big.norm_of_varpi(L)
        t = L.tower
        yA = self.units.coords(t.teich(A)[None])[0]
        nv = self.nv * fdeg + self.angle_on_unit_coords(yA)
        gens = Ub.generator_elements()
        if gens:
            norms = np.stack([big.norm_to(L, g) for g in gens])
            coords = self.units.coords(norms)
            nu = tuple(self.angle_on_unit_coords(c) for c in coords)
        else:
            nu = ()
        return FiniteCharacter(big, N_big, nv, nu)

    # -- constructors -----------------------------------------------------------------
    @classmethod
    def trivial(cls, L: LocalField, level: int = 1) -> "FiniteCharacter":
        return cls(L, level, Fraction(0), tuple(Fraction(0) for _ in L.unit_group(level).group.invariants))

    @classmethod
    def from_raw(cls, L: LocalField, level: int, nv, raw_values: Sequence) -> "FiniteCharacter":
        """From angles on varpi_L and on the raw generators (y_L, 1 + y_L^j varpi_L^i)."""
        U = L.unit_group(level)
        if not U.group.respects_relations(raw_values):
            raise ValueError("values do not define a character of the unit group")
        return cls(L, level, Fraction(nv), U.group.character_from_raw(raw_values))

    @classmethod
    def residue_character(cls, L: LocalField, level: int, angle_y: Fraction, nv=0) -> "FiniteCharacter":
        """The character y_L -> angle_y trivial on 1 + p_L, with the given value on varpi_L."""
        U = L.unit_group(level)
        raw = [Fraction(angle_y)] + [Fraction(0)] * (U.ngens - 1)
        return cls.from_raw(L, level, nv, raw)

    def serialize(self) -> dict:
        """Domain key and generator images as (N, k) root-of-unity pairs."""
        def pair(a: Fraction):
            return [a.denominator, a.numerator]

        return {
            "field": self.field.name,
            "level": self.level,
            "varpi": pair(self.nv),
            "units": [pair(a) for a in self.nu],
        }


def conductor(chi: FiniteCharacter, depth: int | None = None) -> int:
    """Conductor exponent f(chi); ``depth`` asserts the table reaches that level."""
    if depth is not None and depth > chi.level:
        raise DepthInsufficient(f"character tabulated to level {chi.level} < {depth}")
    return chi.conductor()


# ---------------------------------------------------------------------------
# norm residue symbols


def norm_residue_character(big: LocalField, small: LocalField) -> list[FiniteCharacter]:
    """All characters of small^x trivial on N_{big/small}(big^x), for abelian big/small.

    Tameness puts 1 + p_small inside the norm group, so the quotient is
    read off on Z / [big:small] x F_{q_small}^x generated by the pair
    (ord, residue log).  The norm group is generated by N(varpi_big),
    N(y_big) and varpi_small^[big:small].
    """
    t = big.tower
    if not big.S <= small.S:
        raise ValueError(f"{small.name} is not a subfield of {big.name}")
    deg = len(small.S) // len(big.S)
    qm = small.q_L - 1
    fdeg, A = big.norm_of_varpi(small)
    if A % small.idx:
        raise ArithmeticError("norm of varpi has a residue outside the smaller field")
    # N(y_big) = y^(sum of kappa over coset reps)
    reps = []
    seen = set()
    G = t.gamma
    for g in sorted(small.S):
        coset = frozenset(G.mul(s, g) for s in big.S)
        if coset not in seen:
            seen.add(coset)
            reps.append(g)
    ylog = sum(big.idx * t.auts[g].kappa for g in reps) % (t.Q - 1)
    if ylog % small.idx:
        raise ArithmeticError("norm of y has a residue outside the smaller field")
    gens = [(fdeg, (A // small.idx) % qm), (0, (ylog // small.idx) % qm), (deg, 0)]
    Q = FinAb(2, [[deg, 0], [0, qm]])
    out = []
    for chi in Q.characters():
        if all(FinAb.evaluate(chi, Q.coords(g)) == 0 for g in gens):
            # chi on raw generators (varpi_small, y_small)
            raw_varpi = FinAb.evaluate(chi, Q.coords((1, 0)))
            raw_y = FinAb.evaluate(chi, Q.coords((0, 1)))
            out.append(FiniteCharacter.residue_character(small, 1, raw_y, raw_varpi))
    if len(out) != deg:
        raise ArithmeticError(f"norm index {len(out)} differs from the degree {deg}")
    return out


def norm_residue_symbol(big: LocalField, small: LocalField, x: np.ndarray | None = None, pair=None) -> int:
    """(x, big/small) = +1 iff x is a norm from a quadratic big/small, else -1.

    ``x`` is an element of small^x in the tower model, or ``pair`` gives
    (ord_small, residue log in F_{q_small}^x) directly.
    """
    chars = norm_residue_character(big, small)
    if len(chars) != 2:
        raise ValueError("the extension is not quadratic")
    chi = next(c for c in chars if not c.is_trivial())
    if pair is not None:
        v, k = pair
        c = chi.units.coords(small.teich(int(k))[None])
        ang = chi.angles_of_pairs(np.array([v]), c)[0]
    else:
        ang = chi.angles_of(np.asarray(x)[None])[0]
    return 1 if ang == 0 else -1


# ---------------------------------------------------------------------------
# admissible characters theta of U_{K/K_+}


class AdmissibleThetas:
    """The admissible characters theta of U_{K/K_+} / (1 + p_K^{er}).

    theta is pinned on P = U_{K/K_+} cap (1 + p^l O_K) by
    theta(1 + p^l x) = psi_F(p^-l' Tr_{K/F}(x beta)) and free on U / P.  The
    list is theta_0 times the characters of U / P in lexicographic order
    of their canonical angle numerators.  Each theta is returned as a
    character of (O_K / p_K^{er})^x extending it; only its values on
    U_{K/K_+} carry meaning.
    """

    def __init__(self, t: TowerModel):
        pr = t.params
        self.tower = t
        K = t.field("K")
        self.K = K
        self.level = t.e * pr.r
        self.UK = UK = K.unit_group(self.level)
        U_gens = norm_one_generators(t, self.level)
        self.S = S = SubGroup(UK.group, U_gens)
        pin_level = t.e * pr.l
        filt = filtration_generators(UK, pin_level) if pin_level < self.level else []
        P_gens = UK.group.intersection(U_gens, filt) if filt else []
        self.P_ambient = P_gens
        self.P = [S.express(g) for g in P_gens]
        if any(g is None for g in self.P):  # pragma: no cover - P lies in U by construction
            raise ArithmeticError("pinned subgroup is not inside U_{K/K_+}")
        # u = 1 + p^l x is pinned to psi_F(p^-l' Tr_{K/F}(x beta)), that is
        # exp(2 pi i Tr_{K/Q_p}((u - 1) beta) / p^r) since l + l' = r
        beta = t.beta
        vals = []
        for g in P_gens:
            u = UK.element_of_coords(g)
            tr = int(K.trace_to_Qp(t.mul((u - t.one()) % t.P, beta)[None])[0])
            vals.append(psi_p(t.p, pr.r, tr))
        self.pinned = vals
        self.theta0 = self._solve_pinned()
        self.quotient = S.group.quotient_by(self.P) if self.P else S.group
        # pullback matrix from characters of U/P to characters of S
        ident = [[1 if i == j else 0 for j in range(S.group.rank)] for i in range(S.group.rank)]
        self._pull = [self.quotient.coords(row) for row in ident]
        self._extensions = self._extension_basis()

    # -- linear algebra --------------------------------------------------------------
    def _solve_pinned(self) -> tuple[Fraction, ...]:
        S = self.S
        inv = S.group.invariants
        if not self.P:
            return tuple(Fraction(0) for _ in inv)
        D = math.lcm(*inv, *[v.denominator for v in self.pinned])
        C = [[int(g[i]) * (D // inv[i]) for i in range(len(inv))] for g in self.P]
        b = [int(v * D) for v in self.pinned]
        sol = solve_mod(C, b, [D] * len(b))
        if sol is None:
            raise ArithmeticError("pinned values are not a character of P")
        return tuple(Fraction(int(a) % d, d) for a, d in zip(sol, inv))

    def _extension_basis(self) -> list[tuple[Fraction, ...]]:
        """For each canonical generator s_j of U, a character of U_K with eps_j(s_k) = delta_jk / d_j."""
        S, UK = self.S, self.UK
        inv_S = S.group.invariants
        inv_K = UK.group.invariants
        gens_amb = [S.to_ambient(tuple(1 if i == j else 0 for i in range(len(inv_S)))) for j in range(len(inv_S))]
        D = math.lcm(*inv_K, *inv_S) if inv_S else 1
        C = [[int(g[i]) * (D // inv_K[i]) for i in range(len(inv_K))] for g in gens_amb]
        out = []
        for j, dj in enumerate(inv_S):
            b = [(D // dj) if k == j else 0 for k in range(len(inv_S))]
            sol = solve_mod(C, b, [D] * len(b))
            if sol is None:  # pragma: no cover - characters of subgroups always extend
                raise ArithmeticError("character does not extend")
            out.append(tuple(Fraction(int(a) % d, d) for a, d in zip(sol, inv_K)))
        return out

    # -- enumeration -----------------------------------------------------------------
    def __len__(self) -> int:
        return self.quotient.order

    def on_subgroup(self, index: int) -> tuple[Fraction, ...]:
        """Angles of theta_index on the canonical generators of U_{K/K_+}."""
        if not 0 <= index < len(self):
            raise IndexError(f"theta index {index} out of range [0, {len(self)})")
        Q = self.quotient
        nums = []
        rest = index
        for d in reversed(Q.invariants):
            nums.append(rest % d)
            rest //= d
        nums.reverse()
        chi_Q = [Fraction(x, d) for x, d in zip(nums, Q.invariants)]
        return tuple(
            (a0 + FinAb.evaluate(chi_Q, self._pull[j])) % 1 for j, a0 in enumerate(self.theta0)
        )

    def __getitem__(self, index: int) -> FiniteCharacter:
        angles = self.on_subgroup(index)
        ext = [Fraction(0)] * self.UK.group.rank
        for a, basis, d in zip(angles, self._extensions, self.S.group.invariants):
            k = int(a * d)
            if k:
                ext = [(x + k * y) % 1 for x, y in zip(ext, basis)]
        return FiniteCharacter(self.K, self.level, Fraction(0), tuple(ext), name=f"theta[{index}]")

    def __iter__(self) -> Iterator[FiniteCharacter]:
        for i in range(len(self)):
            yield self[i]

    def check_pins(self, theta: FiniteCharacter) -> bool:
        """theta restricted to P reproduces the pinned additive-character values."""
        return all(theta.angle_on_unit_coords(g) == v for g, v in zip(self.P_ambient, self.pinned))

    def on_norm_one(self, theta: FiniteCharacter, u_coords: Sequence[int]) -> Fraction:
        return theta.angle_on_unit_coords(u_coords)

    def expected_count(self) -> int:
        """|G_beta(F_q)| q^((l-1) n) with |G_beta(F_q)| = q^n (1 + q^(-f_+)) or 2 q^n."""
        pr = self.tower.params
        q, n = pr.q, pr.n
        if pr.ramified:
            base = 2 * q**n
        else:
            base = q**n + q ** (n - pr.f_plus)
        return base * q ** ((pr.l - 1) * n)


def admissible_thetas(t: TowerModel) -> AdmissibleThetas:
    """The admissible characters of U_{K/K_+} in canonical order (see ``AdmissibleThetas``)."""
    return AdmissibleThetas(t)


# ---------------------------------------------------------------------------
# the chi-data correction character c


@dataclass
class ChiData:
    """c~(x) = c(x^(1 - tau)) as a character of K^x, with c(-1) and the case label."""

    tower: TowerModel
    c_tilde: FiniteCharacter
    kind: str
    c_minus_one: Cyclo = field(init=False)

    def __post_init__(self):
        t = self.tower
        # c(-1) = c~(beta) because beta^(1 - tau) = -1
        self.c_minus_one = self.c_tilde(t.beta)

    def c_on_norm_one(self, u: np.ndarray) -> Cyclo:
        """c(u) for u in U_{K/K_+}: c~(x) for any x with x^(1 - tau) = u."""
        t = self.tower
        K = t.field("K")
        N = self.c_tilde.level
        U = K.unit_group(N)
        T, w = K.galois_coords(t.tau, N)
        inv = list(U.group.invariants)
        r = len(inv)
        target = [int(a) for a in U.coords(np.asarray(u)[None])[0]]
        # (v, c) -> c (I - T) - v w
        C = [[-int(w[i])] + [int((1 if i == j else 0) - T[j, i]) for j in range(r)] for i in range(r)]
        sol = solve_mod(C, target, inv)
        if sol is None:
            raise ValueError("u is not of the form x^(1 - tau)")
        v, c = sol[0], [x % d for x, d in zip(sol[1:], inv)]
        ang = self.c_tilde.angles_of_pairs(np.array([v]), np.array([c]))[0]
        return Cyclo.root(self.c_tilde.den, int(ang))


def _one_minus_tau(chi: FiniteCharacter, tau: int) -> FiniteCharacter:
    """x -> chi(x^(1 - tau)) for a character chi of K^x."""
    return chi / chi.galois_twist(tau)


def chi_data_c(t: TowerModel, level: int = 1) -> ChiData:
    """The correction character attached to the minimal chi-data.

    * K/K_+ ramified: c is the quadratic residue character of O_K^x, so
      c~(x) = (x^(1-tau) mod p_K | residue field).
    * K/K_+ unramified, |H| = 2: c is trivial.
    * |H| = 4 (K/K_+ unramified): with L = K_{tau delta'}, v = ord_K x and
      q_E = q^(f_+), c~(x) = (-1)^v (-1)^(v (q_E - 1)/2) times the quadratic
      residue symbol of N_{K/L}(x) varpi_L^(-2v) in F_{q_L}.
    """
    K = t.field("K")
    pr = t.params
    H = t.H
    if pr.ramified:
        leg = FiniteCharacter.residue_character(K, level, Fraction(1, 2))
        return ChiData(t, _one_minus_tau(leg, t.tau).at_level(level), "ramified")
    if len(H) == 2:
        return ChiData(t, FiniteCharacter.trivial(K, level), "unramified")
    L = t.field("Kt'")
    legL = FiniteCharacter.residue_character(L, 1, Fraction(1, 2))
    pulled = legL.pullback_norm(K).at_level(level)
    qE = pr.q**pr.f_plus
    sign = FiniteCharacter(K, level, Fraction(1 + (qE - 1) // 2, 2), tuple(Fraction(0) for _ in pulled.nu))
    return ChiData(t, pulled * sign, "three involutions")


# ---------------------------------------------------------------------------
# theta~ and its twists


def theta_tilde(t: TowerModel, theta: FiniteCharacter, cdata: ChiData | None = None) -> FiniteCharacter:
    """theta~(x) = c~(x) theta(x^(1 - tau)) as a character of K^x / (1 + p_K^{er})."""
    if cdata is None:
        cdata = chi_data_c(t)
    base = _one_minus_tau(theta, t.tau)
    return (base * cdata.c_tilde.at_level(theta.level)).named("theta~")


def theta_tilde_gamma(chi: FiniteCharacter, gamma: int) -> FiniteCharacter:
    """x -> chi(x^(1 + gamma))."""
    return (chi * chi.galois_twist(gamma)).named(f"theta~_{gamma}")


def galois_twist_fixers(chi: FiniteCharacter, k: int) -> frozenset[int]:
    """{sigma in Gamma : chi(x^sigma) = chi(x) for all x in 1 + p_K^k}."""
    if k < 1:
        raise ValueError("k must be positive")
    t = chi.field.tower
    if k >= chi.level:
        return frozenset(range(t.gamma.order))
    gens = filtration_generators(chi.units, k)
    out = set()
    for g in range(t.gamma.order):
        tw = chi.galois_twist(g)
        if all(tw.angle_on_unit_coords(c) == chi.angle_on_unit_coords(c) for c in gens):
            out.add(g)
    return frozenset(out)
