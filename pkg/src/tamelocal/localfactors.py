"""Local constants: Gauss sums, epsilon, lambda, conductors, L- and gamma-factors.

Conventions.  psi_F is psi_{Q_p} o Tr_{F/Q_p} with psi_{Q_p}(x) = exp(2 pi i {x});
F/Q_p is unramified, so n(psi_F) = d(F) = 0 and psi_L = psi_F o Tr_{L/F} has
n(psi_L) = d(L) = e(L/F) - 1.  Epsilon factors use the self-dual measure of
the additive character, so that an abelian character chi of conductor f has

    eps(chi, psi_L) = gauss_sum(chi, varpi_L^-(d + f)) chi(varpi_L)^(d + f) q_L^((d + f)/2)

and an unramified chi has eps(chi, psi_L) = chi(varpi_L)^d q_L^(d/2).  Here

    gauss_sum(chi, c) = q_L^(-f/2) sum_{t in (O_L/p^f)^x} chi^-1(t) psi_L(c t).

Every representation of W_F met here is a signed sum of inductions
Ind_{W_L}^{W_F} chi of characters, so conductors, L-factors and epsilon
factors are assembled from the abelian data and lambda(L/F).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
import sympy

from .chars import FiniteCharacter, norm_residue_character, theta_tilde_gamma
from .exactnum import Cyclo, from_histogram, sqrt_prime_power
from .tamefield import LocalField, TowerModel

__all__ = [
    "FactorReport",
    "Inapplicable",
    "LPolynomial",
    "NonIntegerConductor",
    "Piece",
    "UnsupportedExtension",
    "WrongValuation",
    "abelian_epsilon",
    "adjoint_pieces",
    "artin_conductor",
    "artin_conductor_by_pieces",
    "chi_tilde_gamma",
    "closed_form_w",
    "epsilon_adjoint",
    "frohlich_queyrut_check",
    "gamma_adjoint",
    "gauss_sum",
    "l_factor_adjoint",
    "l_factor_by_pieces",
    "l_factor_on_quotient",
    "epsilon_by_pieces",
    "gamma_closed_form",
    "gamma_from",
    "closed_form_l",
    "unramified_part",
    "lambda_factor",
    "principal_parameter",
    "sym_tensor",
]


class WrongValuation(ValueError):
    """The scaling element has the wrong valuation, or chi is unramified."""


class Inapplicable(ValueError):
    """A check whose hypotheses fail for the given input."""


class NonIntegerConductor(ArithmeticError):
    """A computed Artin conductor is not an integer."""


class UnsupportedExtension(ValueError):
    """No implemented route computes lambda for this extension."""


# ---------------------------------------------------------------------------
# L-polynomials


@dataclass(frozen=True)
class LPolynomial:
    """P(T) with L(s) = 1 / P(q^-s); coefficients are Cyclo values, P(0) = 1."""

    coeffs: tuple[Cyclo, ...]

    def __post_init__(self):
        cs = [Cyclo.coerce(c) for c in self.coeffs] or [Cyclo.one()]
        while len(cs) > 1 and not cs[-1]:
            cs.pop()
        if cs[0] != Cyclo.one():
            raise ValueError("an L-polynomial has constant term 1")
        object.__setattr__(self, "coeffs", tuple(cs))

    @classmethod
    def one(cls) -> "LPolynomial":
        return cls((Cyclo.one(),))

    @classmethod
    def from_rationals(cls, values: Sequence) -> "LPolynomial":
        return cls(tuple(Cyclo.rational(v) for v in values))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __mul__(self, other: "LPolynomial") -> "LPolynomial":
        out = [Cyclo.zero()] * (self.degree + other.degree + 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] = out[i + j] + a * b
        return LPolynomial(tuple(out))

    def divide(self, other: "LPolynomial") -> "LPolynomial":
        """Exact polynomial division; raises if other does not divide self."""
        num = list(self.coeffs)
        den = other.coeffs
        if len(num) < len(den):
            raise ArithmeticError("division leaves a remainder")
        quot = [Cyclo.zero()] * (len(num) - len(den) + 1)
        for i in range(len(quot)):
            c = num[i]
            quot[i] = c
            if c:
                for j, d in enumerate(den):
                    num[i + j] = num[i + j] - c * d
        if any(num):
            raise ArithmeticError("division leaves a remainder")
        return LPolynomial(tuple(quot))

    def __call__(self, T) -> Cyclo:
        T = Cyclo.coerce(T)
        acc = Cyclo.zero()
        for c in reversed(self.coeffs):
            acc = acc * T + c
        return acc

    def is_rational(self) -> bool:
        return all(c.is_rational() for c in self.coeffs)

    def render(self) -> str:
        terms = []
        for k, c in enumerate(self.coeffs):
            if not c:
                continue
            cs = c.render()
            if k == 0:
                terms.append(cs)
            else:
                mon = "T" if k == 1 else f"T^{k}"
                terms.append(mon if cs == "1" else f"-{mon}" if cs == "-1" else f"({cs}){mon}")
        return " + ".join(terms).replace("+ -", "- ")

    def __repr__(self):
        return f"LPolynomial({self.render()})"


def _from_power_sums(power_sums: Sequence[Cyclo]) -> LPolynomial:
    """det(1 - T F) from p_j = tr(F^j), j = 1..dim, by Newton's identities."""
    m = len(power_sums)
    e = [Cyclo.one()]
    for k in range(1, m + 1):
        acc = Cyclo.zero()
        for i in range(1, k + 1):
            term = e[k - i] * power_sums[i - 1]
            acc = acc + term if i % 2 else acc - term
        e.append(acc * Cyclo.rational(Fraction(1, k)))
    return LPolynomial(tuple(e[k] if k % 2 == 0 else -e[k] for k in range(m + 1)))


# ---------------------------------------------------------------------------
# Gauss sums and abelian epsilon factors


def _exact_sum(parts: Sequence[tuple[np.ndarray, int]], scale) -> Cyclo:
    """scale * sum_b prod_i zeta_{D_i}^{a_i[b]} for angle arrays a_i mod D_i."""
    D = math.lcm(*[d for _, d in parts])
    acc = np.zeros_like(np.asarray(parts[0][0]), dtype=np.int64)
    for a, d in parts:
        acc = (acc + np.asarray(a, dtype=np.int64) * (D // d)) % D
    return from_histogram(D, np.bincount(acc, minlength=D), scale)


def _qL_pow(L: LocalField, x) -> Cyclo:
    """q_L^x for a half-integer x."""
    return sqrt_prime_power(L.tower.p, Fraction(x) * L.d_L)


def _check_scalar(chi: FiniteCharacter, c) -> tuple[int, int, np.ndarray]:
    L = chi.field
    t = L.tower
    f = chi.conductor()
    if f == 0:
        raise WrongValuation("chi is unramified; the Gauss sum needs f(chi) > 0")
    v, u = c
    if v != -(L.different_exponent + f):
        raise WrongValuation(f"scaling element has valuation {v}, expected {-(L.different_exponent + f)}")
    u = t.one() if u is None else np.asarray(u)
    return f, -v, u


def gauss_sum(chi: FiniteCharacter, c, method: str = "auto") -> Cyclo:
    """q_L^(-f/2) sum_{t in (O_L / p^f)^x} chi^-1(t) psi_L(c t).

    ``c`` is a pair (ord_L c, unit part) with unit part None for 1.  The
    method is "brute" (the defining sum), "stationary" (the reduction to
    units t = u0 (1 + x) with u0 mod p^ceil(f/2), on which the inner sum
    over x is a character sum on an additive group) or "auto".
    """
    f, shift, u = _check_scalar(chi, c)
    L = chi.field
    size = (L.q_L - 1) * L.q_L ** (f - 1)
    if method == "auto":
        method = "brute" if size <= 20000 or f == 1 else "stationary"
    if method == "brute":
        return _gauss_brute(chi, f, shift, u)
    if method == "stationary":
        return _gauss_stationary(chi, f, shift, u)
    raise ValueError(f"unknown method {method}")


def _gauss_brute(chi: FiniteCharacter, f: int, shift: int, u: np.ndarray) -> Cyclo:
    L = chi.field
    t = L.tower
    T = L.elements(f)
    a = (-chi.angles_of(T)) % chi.den
    z = t.mul(np.broadcast_to(u, T.shape), T)
    nums, pj = L.psi_angle(shift, z)
    return _exact_sum([(a, chi.den), (nums, pj)], 1) * _qL_pow(L, Fraction(-f, 2))


def _gauss_stationary(chi: FiniteCharacter, f: int, shift: int, u: np.ndarray) -> Cyclo:
    L = chi.field
    t = L.tower
    h = -(-f // 2)
    if h >= f:
        return _gauss_brute(chi, f, shift, u)
    U0 = L.elements(h)
    cu0 = t.mul(np.broadcast_to(u, U0.shape), U0)
    # additive generators of p^h / p^f as a Z_p-module
    gens = [L.monomial(j, i) for i in range(h, min(f, h + L.e_L)) for j in range(L.d_L)]
    survive = np.ones(len(U0), dtype=bool)
    for x in gens:
        chi_ang = Fraction(int(chi.angles_of((t.one() + x)[None] % t.P)[0]), chi.den)
        nums, pj = L.psi_angle(shift, t.mul(cu0, np.broadcast_to(x, cu0.shape)))
        D = math.lcm(pj, chi_ang.denominator)
        tot = (nums * (D // pj) - chi_ang.numerator * (D // chi_ang.denominator)) % D
        survive &= tot == 0
    if not survive.any():
        return Cyclo.zero()
    U0, cu0 = U0[survive], cu0[survive]
    a = (-chi.angles_of(U0)) % chi.den
    nums, pj = L.psi_angle(shift, cu0)
    return _exact_sum([(a, chi.den), (nums, pj)], 1) * _qL_pow(L, Fraction(f, 2) - h)


def abelian_epsilon(chi: FiniteCharacter, a=None, measure_scale=1) -> Cyclo:
    """eps(chi, psi_a, dx) for psi_a(x) = psi_L(a x).

    ``a`` is None (a = 1) or a pair (ord_L a, unit part).  The measure is
    ``measure_scale`` times the self-dual measure of psi_a.
    """
    L = chi.field
    n = L.different_exponent
    v_a, u_a = (0, None) if a is None else a
    n_a = n + v_a
    f = chi.conductor()
    scale = Cyclo.coerce(Fraction(measure_scale)) if not isinstance(measure_scale, Cyclo) else measure_scale
    if f == 0:
        return Cyclo.from_angle(chi.nv * n_a) * _qL_pow(L, Fraction(n_a, 2)) * scale
    G = gauss_sum(chi, (-(n + f), u_a))
    return G * Cyclo.from_angle(chi.nv * (n_a + f)) * _qL_pow(L, Fraction(n_a + f, 2)) * scale


@dataclass(frozen=True)
class FQResult:
    holds: bool
    lhs: Cyclo
    rhs: Cyclo

    def __bool__(self):
        return self.holds


def frohlich_queyrut_check(tt: FiniteCharacter, beta: np.ndarray | None = None) -> FQResult:
    """gauss_sum(tt, varpi_K^-(d + f)) tt(varpi_K)^(d + f) = tt(beta) for tt trivial on K_+^x."""
    K = tt.field
    t = K.tower
    Kp = t.field("K+")
    if not tt.restrict(Kp).is_trivial():
        raise Inapplicable("the character is not trivial on K_+^x")
    beta = t.beta if beta is None else beta
    if not ((t.apply(t.tau, beta) + beta) % t.P == 0).all():
        raise Inapplicable("beta is not negated by tau")
    f = tt.conductor()
    d = K.different_exponent
    lhs = gauss_sum(tt, (-(d + f), None)) * Cyclo.from_angle(tt.nv * (d + f))
    rhs = tt(beta)
    return FQResult(lhs == rhs, lhs, rhs)


# ---------------------------------------------------------------------------
# lambda factors


def _field(t: TowerModel, L) -> LocalField:
    return t.field(L) if isinstance(L, str) else L


def _is_normal(t: TowerModel, S: frozenset[int], ambient: frozenset[int]) -> bool:
    G = t.gamma
    return all(G.mul(G.mul(G.inv(g), s), g) in S for g in ambient for s in S)


def _is_abelian_quotient(t: TowerModel, S: frozenset[int], ambient: frozenset[int]) -> bool:
    G = t.gamma
    return all(G.mul(G.mul(G.mul(G.inv(a), G.inv(b)), a), b) in S for a in ambient for b in ambient)


def unramified_part(t: TowerModel, L: LocalField, base: LocalField) -> LocalField:
    """The maximal subextension of L/base unramified over base."""
    G = t.gamma
    inert = base.S & G.inertia
    S = frozenset(G.mul(s, i) for s in L.S for i in inert)
    return t.subfield(S, f"{L.name}_0/{base.name}")


def _lambda_inductive(t: TowerModel, L: LocalField, base: LocalField) -> Cyclo:
    if not (L.S <= base.S and _is_normal(t, L.S, base.S) and _is_abelian_quotient(t, L.S, base.S)):
        raise UnsupportedExtension(f"{L.name}/{base.name} is not abelian")
    prod = Cyclo.one()
    for chi in norm_residue_character(L, base):
        prod = prod * abelian_epsilon(chi)
    return prod / _qL_pow(L, Fraction(L.different_exponent, 2))


def lambda_factor(t: TowerModel, L, mode: str = "ByInductivity", base="F") -> Cyclo:
    """lambda(L/base, psi_base).

    Modes: "ByInductivity" (product of abelian epsilon factors over the
    characters of base^x / N L^x), "Chain" (through the maximal unramified
    subextension L_0: lambda(L/base) = lambda(L/L_0) lambda(L_0/base)^[L:L_0]),
    "ClosedForm" (the formula for tame Galois L/F in terms of e, f and a
    quadratic Gauss sum over L_0) and "ClosedFormUnramifiedQuadratic"
    (valid when L/E is unramified quadratic for some intermediate E).
    """
    L = _field(t, L)
    base = _field(t, base)
    if mode == "ByInductivity":
        return _lambda_inductive(t, L, base)
    if mode == "Chain":
        L0 = unramified_part(t, L, base)
        deg = len(L0.S) // len(L.S)
        return _lambda_inductive(t, L, L0) * _lambda_inductive(t, L0, base) ** deg
    F = t.field("F")
    if base.S != F.S:
        raise UnsupportedExtension("closed forms are stated over F")
    if not _is_normal(t, L.S, F.S):
        raise UnsupportedExtension(f"{L.name}/F is not Galois")
    e, f, q = L.e_L, L.f_L, t.q
    if mode == "ClosedForm":
        if e % 2:
            return Cyclo.one()  # (-1)^((f - 1) d(F)) with d(F) = 0
        sign = (-1) ** (((q**f - 1) // e) * (e * (e + 2) // 8) % 2) if (e * (e + 2)) % 8 == 0 else None
        if sign is None:
            raise UnsupportedExtension("e(e+2)/8 is not an integer")
        L0 = unramified_part(t, L, F)
        fdeg, A = L.norm_of_varpi(L0)
        if fdeg != 1:
            raise ArithmeticError("L/L_0 is not totally ramified")
        leg = FiniteCharacter.residue_character(L0, 1, Fraction(1, 2))
        # c = -varpi_0^-1 with varpi_0 = N(varpi_L) = varpi_{L_0} y^A
        c_unit = t.mul(t.from_int(-1), t.teich(-A))
        return gauss_sum(leg, (-1, c_unit)) * sign
    if mode == "ClosedFormUnramifiedQuadratic":
        G = t.gamma
        has = False
        for g in range(G.order):
            if g in L.S:
                continue
            E = G.generated(list(L.S) + [g])
            if len(E) == 2 * len(L.S) and len(E & G.inertia) == len(L.S & G.inertia):
                has = True
                break
        if not has:
            raise Inapplicable(f"{L.name} has no unramified quadratic subextension L/E")
        if e % 2:
            return Cyclo.one()  # (-1)^d(F)
        f_plus = f // 2
        return Cyclo.rational(-((-1) ** ((q**f_plus - 1) // 2)))
    raise ValueError(f"unknown mode {mode}")


# ---------------------------------------------------------------------------
# the adjoint representation as a signed sum of inductions


@dataclass
class Piece:
    """sign * Ind_{W_L}^{W_F} chi."""

    sign: int
    field: LocalField
    chi: FiniteCharacter
    label: str
    group: str

    def conductor(self) -> int:
        L = self.field
        return L.f_L * (L.e_L - 1) + L.f_L * self.chi.conductor()

    def l_polynomial(self) -> LPolynomial:
        if self.chi.conductor():
            return LPolynomial.one()
        L = self.field
        coeffs = [Cyclo.zero()] * (L.f_L + 1)
        coeffs[0] = Cyclo.one()
        coeffs[L.f_L] = -Cyclo.from_angle(self.chi.nv)
        return LPolynomial(tuple(coeffs))

    def epsilon(self, t: TowerModel, lam_cache: dict) -> Cyclo:
        key = self.field.S
        if key not in lam_cache:
            try:
                lam_cache[key] = lambda_factor(t, self.field, "ByInductivity")
            except UnsupportedExtension:
                lam_cache[key] = lambda_factor(t, self.field, "Chain")
        return lam_cache[key] * abelian_epsilon(self.chi)


def chi_tilde_gamma(tt: FiniteCharacter, gamma: int) -> FiniteCharacter:
    """The character of K_gamma^x matching chi_gamma: (x, K/K_gamma) tt(x)."""
    K = tt.field
    t = K.tower
    Kg = t.subfield(frozenset({0, gamma}), f"K_{t.gamma.label(gamma)}")
    chars = norm_residue_character(K, Kg)
    eta = next(c for c in chars if not c.is_trivial())
    res = tt.restrict(Kg)
    return (res * eta.at_level(max(res.level, eta.level))).named(f"chi~_{t.gamma.label(gamma)}")


def adjoint_pieces(t: TowerModel, tt: FiniteCharacter) -> list[Piece]:
    """Ad o phi = Pi_1 + Pi_2 + Pi_3 + phi_1 as signed inductions of characters."""
    G = t.gamma
    K, Kp = t.field("K"), t.field("K+")
    out = [
        Piece(1, K, FiniteCharacter.trivial(K), "Ind_K 1", "Pi1"),
        Piece(-1, Kp, FiniteCharacter.trivial(Kp), "Ind_K+ 1", "Pi1"),
    ]
    done = set()
    for g in range(G.order):
        gi = G.inv(g)
        if G.mul(g, g) == 0 or g in done:
            continue
        done |= {g, gi}
        out.append(Piece(1, K, theta_tilde_gamma(tt, g), f"rho_{G.label(g)}", "Pi2"))
    for g in range(1, G.order):
        if g != t.tau and G.mul(g, g) == 0:
            ct = chi_tilde_gamma(tt, g)
            out.append(Piece(1, ct.field, ct, f"pi_{G.label(g)}", "Pi3"))
    out.append(Piece(1, K, tt, "phi_1", "phi1"))
    return out


def artin_conductor_by_pieces(pieces: Sequence[Piece]) -> int:
    return sum(p.sign * p.conductor() for p in pieces)


def l_factor_by_pieces(pieces: Sequence[Piece]) -> LPolynomial:
    num, den = LPolynomial.one(), LPolynomial.one()
    for p in pieces:
        if p.sign > 0:
            num = num * p.l_polynomial()
        else:
            den = den * p.l_polynomial()
    return num.divide(den)


def epsilon_by_pieces(t: TowerModel, pieces: Sequence[Piece]) -> tuple[Cyclo, dict[str, Cyclo]]:
    lam: dict = {}
    total = Cyclo.one()
    groups: dict[str, Cyclo] = {}
    for p in pieces:
        e = p.epsilon(t, lam)
        e = e if p.sign > 0 else e.inverse()
        total = total * e
        groups[p.group] = groups.get(p.group, Cyclo.one()) * e
    return total, groups


# ---------------------------------------------------------------------------
# conductor and L-factor on a Weil quotient (the filtration route)


def _dim_fixed(chi, rows: np.ndarray) -> Fraction:
    v = chi.average_over(rows)
    if not v.is_rational():
        raise ArithmeticError("averaged character is not rational")
    return v.to_rational()


def artin_conductor(G, chi) -> int:
    """a = codim V^I + (1/e) sum_{k >= 1} codim V^(1 + p_K^k) by character averaging.

    The upper ramification subgroups of the tame quotient are the images of
    1 + p_K^k, reached at upper index k/e, so each contributes with weight 1/e.
    """
    dim = _dim_fixed(chi, np.array([0]))
    e = G.tower.e
    total = dim - _dim_fixed(chi, G.inertia_indices())
    for k in range(1, G.A.level):
        total += (dim - _dim_fixed(chi, G.filtration_indices(k))) / e
    if Fraction(total).denominator != 1:
        raise NonIntegerConductor(f"conductor {total} is not an integer")
    return int(total)


def l_factor_on_quotient(G, chi) -> LPolynomial:
    """det(1 - T Fr | V^I) from tr(Fr^j | V^I) = mean over I of chi(Fr^j h)."""
    I = G.inertia_indices()
    m = _dim_fixed(chi, I)
    if m.denominator != 1:
        raise ArithmeticError("fixed space has non-integer dimension")
    fr = G.encode(G.gamma.rho, 0)
    sums = []
    g = np.int64(0)
    for _ in range(int(m)):
        g = G.mul(g, fr)
        rows = G.mul(np.full(len(I), g), I)
        sums.append(chi.average_over(rows))
    return _from_power_sums(sums)


# ---------------------------------------------------------------------------
# the adjoint: closed forms, assembly, gamma


def closed_form_w(t: TowerModel, theta_minus_one: Cyclo) -> tuple[Cyclo, str]:
    """The root number of Ad o phi by the closed form in e, f, q and |H|."""
    pr = t.params
    n, q = pr.n, pr.q
    if pr.ramified:
        if pr.f != 1 or (q - 1) % (2 * n):
            raise UnsupportedExtension("K/K_+ ramified needs K/F totally ramified")
        s = (-1) ** ((((q - 1) // (2 * n)) * (n * (n + 1) // 2)) % 2)
        return theta_minus_one * s, "ramified"
    if len(t.H) == 2:
        return theta_minus_one, "unramified, |H|=2"
    s = -((-1) ** (((q**pr.f_plus - 1) // 2) % 2))
    return theta_minus_one * s, "unramified, |H|=4"


def closed_form_l(t: TowerModel) -> LPolynomial:
    pr = t.params
    if pr.ramified:
        return LPolynomial.one()
    c = [0] * (pr.f_plus + 1)
    c[0], c[-1] = 1, 1
    return LPolynomial.from_rationals(c)


@dataclass
class FactorReport:
    a: int
    eps: Cyclo
    w: Cyclo
    L: LPolynomial
    Ldual: LPolynomial
    gamma_at_0: Cyclo
    closed_form_match: dict[str, bool] = field(default_factory=dict)
    parts: dict[str, Cyclo] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "a": self.a,
            "eps": self.eps.render(),
            "w": self.w.render(),
            "L": self.L.render(),
            "Ldual": self.Ldual.render(),
            "gamma_at_0": self.gamma_at_0.render(),
            "closed_form_match": dict(self.closed_form_match),
            "parts": {k: v.render() for k, v in self.parts.items()},
        }


def l_factor_adjoint(t: TowerModel, tt: FiniteCharacter, G=None, chi_ad=None) -> LPolynomial:
    """P(T) for Ad o phi; with a Weil quotient the Frobenius route is used, else the pieces."""
    if G is not None:
        return l_factor_on_quotient(G, chi_ad)
    return l_factor_by_pieces(adjoint_pieces(t, tt))


def gamma_from(eps: Cyclo, P: LPolynomial, q: int) -> Cyclo:
    """eps L(1) / L(0) for a self-dual L = 1 / P(q^-s)."""
    return eps * P(Cyclo.one()) / P(Cyclo.rational(Fraction(1, q)))


def epsilon_adjoint(t: TowerModel, tt: FiniteCharacter) -> FactorReport:
    """Assemble eps(Ad o phi) from the pieces and compare with the closed forms."""
    pieces = adjoint_pieces(t, tt)
    a = artin_conductor_by_pieces(pieces)
    eps, parts = epsilon_by_pieces(t, pieces)
    q = t.q
    w = eps / sqrt_prime_power(t.p, Fraction(a * t.params.f0, 2))
    P = l_factor_by_pieces(pieces)
    gam = gamma_from(eps, P, q)
    pr = t.params
    theta_m1 = tt(t.beta)
    w_closed, label = closed_form_w(t, theta_m1)
    matches = {
        f"w = closed form ({label})": w == w_closed,
        "a = 2 n^2 r": a == 2 * pr.n**2 * pr.r,
        "L = closed form": P == closed_form_l(t),
        "|w|^2 = 1": w * w.conj() == Cyclo.one(),
    }
    return FactorReport(a, eps, w, P, P, gam, matches, parts)


def gamma_adjoint(t: TowerModel, tt: FiniteCharacter, report: FactorReport | None = None) -> Cyclo:
    report = report or epsilon_adjoint(t, tt)
    return report.gamma_at_0


def gamma_closed_form(t: TowerModel, w: Cyclo) -> Cyclo:
    """w q^(n^2 r) times 1 (ramified) or 2 / (1 + q^-f_+)."""
    pr = t.params
    base = w * Cyclo.rational(Fraction(pr.q) ** (pr.n**2 * pr.r))
    if pr.ramified:
        return base
    return base * Cyclo.rational(Fraction(2) / (1 + Fraction(1, pr.q**pr.f_plus)))


# ---------------------------------------------------------------------------
# the principal parameter


def sym_tensor(n: int) -> dict:
    """Sym^n of the standard representation of SL_2 with its invariant form.

    Basis v_k = x^(n-k) y^k (k = 0..n); g = [[a, b], [c, d]] sends x to
    a x + c y and y to b x + d y.  The form <v_k, v_l> = (-1)^k / binom(n, k)
    when k + l = n (zero otherwise) is invariant and has symmetry (-1)^n.
    """
    x, y = sympy.symbols("x y")

    def rep(g):
        a, b, c, d = [sympy.Rational(v) for v in (g[0][0], g[0][1], g[1][0], g[1][1])]
        M = sympy.zeros(n + 1, n + 1)
        for k in range(n + 1):
            img = sympy.Poly(sympy.expand((a * x + c * y) ** (n - k) * (b * x + d * y) ** k), x, y)
            for j in range(n + 1):
                M[j, k] = img.coeff_monomial(x ** (n - j) * y**j)
        return M

    B = sympy.zeros(n + 1, n + 1)
    for k in range(n + 1):
        B[k, n - k] = sympy.Rational((-1) ** k, math.comb(n, k))
    return {"rep": rep, "form": B, "symmetry": (-1) ** n}


def _principal_frobenius_weights(n: int) -> list[int]:
    """Weights of ad(H_0) on ker ad(N_0) inside the Lie algebra of SO_{2n+1}.

    The principal SL_2 acts on the (2n+1)-dimensional space by Sym^{2n};
    the Lie algebra is {X : X^T B + B X = 0} for the invariant form B.
    """
    st = sym_tensor(2 * n)
    B = st["form"]
    m = 2 * n + 1
    # derivative of Sym^{2n} at [[0,1],[0,0]] and diag(1,-1)
    N0 = sympy.zeros(m, m)
    H0 = sympy.zeros(m, m)
    for k in range(m):
        # E acts as the derivation y -> x: v_k -> k v_{k-1}
        if k > 0:
            N0[k - 1, k] = k
        H0[k, k] = (2 * n - k) - k
    syms = sympy.symbols(f"a0:{m * m}")
    X = sympy.Matrix(m, m, syms)
    cond = list(X.T * B + B * X) + list(N0 * X - X * N0)
    sol = sympy.linsolve(cond, syms)
    (vec,) = sol
    free = sorted({s for v in vec for s in v.free_symbols}, key=str)
    weights = []
    for s in free:
        basis = sympy.Matrix(m, m, [v.subs({u: (1 if u == s else 0) for u in free}) for v in vec])
        comm = H0 * basis - basis * H0
        # basis vectors of the kernel are ad(H_0)-eigenvectors up to recombination
        ratio = None
        for i in range(m):
            for j in range(m):
                if basis[i, j] != 0:
                    ratio = comm[i, j] / basis[i, j]
                    break
            if ratio is not None:
                break
        weights.append(int(ratio))
    return sorted(weights)


@dataclass
class PrincipalFactors:
    L: LPolynomial
    eps: Fraction
    gamma0: Fraction
    weights: list[int]
    imported: tuple[str, ...] = ("eps = q^(n^2)",)


def principal_parameter(n: int, q: int) -> PrincipalFactors:
    """L, eps and gamma(0) for Ad of the principal parameter of SO_{2n+1}.

    On ker ad(N_0) the Frobenius acts on a vector of ad(H_0)-weight 2j by
    q^-j, so L(s) = prod_k (1 - q^-(s + 2k - 1))^-1.  eps = q^(n^2) is the
    imported value for this parameter.
    """
    if n < 1:
        raise ValueError("n must be positive")
    weights = _principal_frobenius_weights(n)
    P = LPolynomial.one()
    for w in weights:
        P = P * LPolynomial.from_rationals([1, -Fraction(1, q ** (w // 2))])
    eps = Fraction(q) ** (n * n)
    gamma0 = gamma_from(Cyclo.rational(eps), P, q).to_rational()
    return PrincipalFactors(P, eps, gamma0, weights)
