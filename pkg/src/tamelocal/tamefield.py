"""Finite-precision models of tame towers Q_p <= F <= K_0 <= K.

F is the unramified extension of Q_p of degree f0 (residue field F_q,
q = p^f0), K_0/F is unramified of degree f and K = K_0(varpi) with
varpi^e = p * omega for a Teichmuller unit omega.  The ring O_K / p^M is
stored as integer arrays of shape (..., e, d), d = f0 * f: entry [i, j]
is the coefficient of y^j varpi^i, where y is the Teichmuller lift of a
generator of the multiplicative group of the residue field of K.
Coefficients live in Z / p^M, so the model keeps e * M powers of varpi.

Galois automorphisms over F are pairs (kappa, c) acting by
y -> y^kappa and varpi -> y^c varpi.  Composition is read left to right
(x^(gh) = (x^g)^h), matching the multiplication of ``MetacyclicGroup``.

Every subfield L = K^S for a subgroup S of Gal(K/F) is handled by
``LocalField``: uniformizer, Teichmuller generator, traces, norms and a
discrete logarithm on (O_L / p_L^N)^x.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
from sympy import factorint, isprime

from .abelian import FinAb, left_kernel
from .galoisgrp import (
    InvalidParams,
    MetacyclicGroup,
    build_gamma,
    check_params,
    involutions,
    subfield_lattice,
)

__all__ = [
    "LocalField",
    "NoSuchGenerator",
    "PrecisionTooSmall",
    "RAMIFIED",
    "TowerModel",
    "TowerParams",
    "UNRAMIFIED",
    "UnknownSubfield",
    "Unrealizable",
    "find_beta",
    "galois_apply",
    "realize_tower",
    "trace_norm",
    "unit_group_quotient",
]

RAMIFIED = "ramified"
UNRAMIFIED = "unramified"


class Unrealizable(ValueError):
    """No Teichmuller class omega realizes the requested value of m."""


class PrecisionTooSmall(ValueError):
    """The requested depth exceeds the precision of the model."""


class NoSuchGenerator(ValueError):
    """No symplectic generator beta exists for this kind of tau."""


class UnknownSubfield(KeyError):
    """The subfield tag is not part of the lattice of this instance."""


# ---------------------------------------------------------------------------
# parameters


@dataclass(frozen=True)
class TowerParams:
    """Discrete data of a tame tower together with the choice of tau."""

    p: int
    f0: int = 1
    e: int = 2
    f: int = 1
    m: int = 0
    r: int = 4
    tau_kind: str | None = None

    def __post_init__(self):
        if self.tau_kind is None:
            object.__setattr__(self, "tau_kind", RAMIFIED if self.f == 1 else UNRAMIFIED)

    @property
    def q(self) -> int:
        return self.p**self.f0

    @property
    def n(self) -> int:
        return self.e * self.f // 2

    @property
    def ramified(self) -> bool:
        return self.tau_kind == RAMIFIED

    @property
    def e_plus(self) -> int:
        return self.e // 2 if self.ramified else self.e

    @property
    def f_plus(self) -> int:
        return self.f if self.ramified else self.f // 2

    @property
    def l(self) -> int:
        return self.r - self.r // 2

    @property
    def l_prime(self) -> int:
        return self.r // 2

    def validate(self) -> None:
        if self.p < 3 or not isprime(self.p):
            raise InvalidParams(f"p must be an odd prime (got {self.p})")
        if self.f0 < 1:
            raise InvalidParams("f0 must be positive")
        if (self.e * self.f) % 2:
            raise InvalidParams(f"e*f = {self.e * self.f} must be even")
        if self.r < 2:
            raise InvalidParams("r must be at least 2")
        check_params(self.e, self.f, self.q, self.m)
        if self.tau_kind not in (RAMIFIED, UNRAMIFIED):
            raise InvalidParams(f"unknown tau kind {self.tau_kind!r}")
        if self.ramified and self.f != 1:
            raise InvalidParams("a ramified K/K_+ needs K/F totally ramified (f = 1)")
        if not self.ramified and self.f % 2:
            raise InvalidParams("an unramified K/K_+ needs f even")

    def supercuspidal_range_ok(self) -> bool:
        """floor(r/2) >= max(2, 2(e-1)), the range where pi_{beta,theta} is proven supercuspidal."""
        return self.r // 2 >= max(2, 2 * (self.e - 1))

    def key(self) -> str:
        return "\n".join(
            f"{k}={v}"
            for k, v in (
                ("p", self.p),
                ("f0", self.f0),
                ("e", self.e),
                ("f", self.f),
                ("m", self.m),
                ("r", self.r),
                ("tau", self.tau_kind),
            )
        )


# ---------------------------------------------------------------------------
# polynomial helpers over Z/N (coefficient lists, lowest degree first)


def _polymulmod(a: list[int], b: list[int], g: list[int], N: int) -> list[int]:
    """a*b mod (g, N) for monic g."""
    d = len(g) - 1
    prod = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                prod[i + j] = (prod[i + j] + x * y) % N
    for k in range(len(prod) - 1, d - 1, -1):
        c = prod[k]
        if c:
            for j in range(d + 1):
                prod[k - d + j] = (prod[k - d + j] - c * g[j]) % N
    out = prod[:d] + [0] * max(0, d - len(prod))
    return out


def _polypowmod(a: list[int], k: int, g: list[int], N: int) -> list[int]:
    d = len(g) - 1
    result = [1] + [0] * (d - 1)
    base = a[:d] + [0] * max(0, d - len(a))
    while k:
        if k & 1:
            result = _polymulmod(result, base, g, N)
        base = _polymulmod(base, base, g, N)
        k >>= 1
    return result


def _primitive_polynomial(p: int, d: int) -> list[int]:
    """The first monic g of degree d over F_p (lexicographic) with X primitive mod g."""
    Q = p**d
    primes = list(factorint(Q - 1))
    one = [1] + [0] * (d - 1)
    X = ([0, 1] + [0] * d)[:d] if d > 1 else None
    for tail in itertools.product(range(p), repeat=d):
        if tail[0] == 0:
            continue
        g = list(tail) + [1]
        x = X if d > 1 else [(-g[0]) % p]
        if _polypowmod(x, Q - 1, g, p) != one:
            continue
        if all(_polypowmod(x, (Q - 1) // l, g, p) != one for l in primes):
            return g
    raise RuntimeError("no primitive polynomial found")  # pragma: no cover


def _solve_unit_matrix(C: list[list[int]], b: list[int], p: int, N: int) -> list[int]:
    """Solve C x = b over Z/N (N a power of p) for C invertible mod p."""
    n = len(C)
    A = [list(row) + [b[i]] for i, row in enumerate(C)]
    for col in range(n):
        piv = next(r for r in range(col, n) if A[r][col] % p)
        A[col], A[piv] = A[piv], A[col]
        inv = pow(A[col][col], -1, N)
        A[col] = [(x * inv) % N for x in A[col]]
        for r in range(n):
            if r != col and A[r][col]:
                c = A[r][col]
                A[r] = [(x - c * y) % N for x, y in zip(A[r], A[col])]
    return [A[i][n] for i in range(n)]


def _rank_mod_p(rows: np.ndarray, p: int) -> int:
    A = [list(map(int, r)) for r in np.asarray(rows) % p]
    if not A:
        return 0
    ncol = len(A[0])
    rank = 0
    for col in range(ncol):
        piv = next((r for r in range(rank, len(A)) if A[r][col] % p), None)
        if piv is None:
            continue
        A[rank], A[piv] = A[piv], A[rank]
        inv = pow(A[rank][col], -1, p)
        A[rank] = [(x * inv) % p for x in A[rank]]
        for r in range(len(A)):
            if r != rank and A[r][col]:
                c = A[r][col]
                A[r] = [(x - c * y) % p for x, y in zip(A[r], A[rank])]
        rank += 1
    return rank


# ---------------------------------------------------------------------------
# the Galois ring O_{K_0} / p^M in the Teichmuller power basis


class GaloisRing:
    """Z/p^M [y] with y the Teichmuller lift of a primitive element of F_{p^d}."""

    def __init__(self, p: int, d: int, M: int):
        self.p, self.d, self.M = p, d, M
        self.P = p**M
        self.Q = p**d
        g = _primitive_polynomial(p, d)
        P, Q = self.P, self.Q
        if d == 1:
            # F_p itself: y is the Teichmuller lift of the primitive root -g[0]
            root = (-g[0]) % p
            y = pow(root, Q ** (M + 1), P)
            self.minpoly_tail = [y]
        else:
            X = [0, 1] + [0] * (d - 2)
            y = _polypowmod(X, Q ** (M + 1), g, P)
            powers = [[1] + [0] * (d - 1)]
            for _ in range(d):
                powers.append(_polymulmod(powers[-1], y, g, P))
            C = [[powers[j][i] for j in range(d)] for i in range(d)]
            self.minpoly_tail = _solve_unit_matrix(C, powers[d], p, P)
        # y^d = sum_j tail[j] y^j; structure tensor T[i, j] = coords of y^(i+j)
        self.T = np.zeros((d, d, d), dtype=np.int64)
        pw = self._power_coords(2 * d)
        for i in range(d):
            for j in range(d):
                self.T[i, j] = pw[i + j]
        # Teichmuller table: coords of y^k for k in [0, Q-1)
        Y = np.zeros((d, d), dtype=np.int64)  # multiplication by y
        for j in range(d):
            Y[:, j] = pw[j + 1]
        self.mul_y = Y
        teich = np.zeros((Q - 1, d), dtype=np.int64)
        v = np.zeros(d, dtype=np.int64)
        v[0] = 1
        for k in range(Q - 1):
            teich[k] = v
            v = (Y @ v) % P
        if not (v[0] == 1 and not v[1:].any()):
            raise RuntimeError("Teichmuller generator has the wrong order")
        self.teich = teich
        # discrete log on the residue field
        keys = (teich % p) @ (p ** np.arange(d, dtype=np.int64))
        self.res_log = np.full(Q, -1, dtype=np.int64)
        self.res_log[keys] = np.arange(Q - 1)
        self.res_pows = p ** np.arange(d, dtype=np.int64)

    def _power_coords(self, count: int) -> list[np.ndarray]:
        d, P = self.d, self.P
        out = []
        v = np.zeros(d, dtype=np.int64)
        v[0] = 1
        tail = np.array(self.minpoly_tail, dtype=np.int64)
        for _ in range(count):
            out.append(v.copy())
            top = v[-1]
            v = np.concatenate([[0], v[:-1]])
            v = (v + top * tail) % P
        return out

    # ring operations on arrays (..., d)
    def mul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        P = self.P
        outer = (a[..., :, None] * b[..., None, :]) % P
        return np.tensordot(outer, self.T, axes=([-2, -1], [0, 1])) % P

    def teich_coords(self, k) -> np.ndarray:
        return self.teich[np.asarray(k) % (self.Q - 1)]

    def mul_matrix(self, k: int) -> np.ndarray:
        """Matrix of multiplication by y^k."""
        d = self.d
        M = np.zeros((d, d), dtype=np.int64)
        for j in range(d):
            M[:, j] = self.teich_coords(k + j)
        return M

    def frob_matrix(self, kappa: int) -> np.ndarray:
        """Matrix of the automorphism y -> y^kappa."""
        d = self.d
        M = np.zeros((d, d), dtype=np.int64)
        for j in range(d):
            M[:, j] = self.teich_coords(kappa * j)
        return M

    def residue_log(self, v: np.ndarray) -> np.ndarray:
        """log_y of the residues of coordinate vectors (-1 for zero residues)."""
        keys = (np.asarray(v) % self.p) @ self.res_pows
        return self.res_log[keys]


# ---------------------------------------------------------------------------
# tower model


@dataclass(frozen=True)
class Automorphism:
    kappa: int
    c: int


class TowerModel:
    """O_K / p^M for a tame Galois K/F together with its Galois action."""

    def __init__(self, params: TowerParams, M: int, w: int, c_rho: int, tau: int):
        self.params = params
        p, e, f, f0 = params.p, params.e, params.f, params.f0
        self.p, self.e, self.f, self.f0 = p, e, f, f0
        self.q = params.q
        self.d = f0 * f
        self.M = M
        self.N = e * M
        self.R = GaloisRing(p, self.d, M)
        self.P = self.R.P
        self.Q = self.R.Q
        self.w = w
        self.gamma: MetacyclicGroup = build_gamma(e, f, self.q, params.m)
        self.tau = tau
        Qm = self.Q - 1
        self.delta_aut = Automorphism(1, (Qm // e) % Qm)
        self.rho_aut = Automorphism(pow(self.q, f - 1, Qm) if Qm > 1 else 0, c_rho % Qm if Qm else 0)
        # omega as a ring coefficient and p * omega for the varpi^e fold
        self._omega = self.R.teich_coords(w)
        G = self.gamma
        self.auts: list[Automorphism] = []
        for g in range(G.order):
            a, b = G.parts(g)
            x = self.compose(self.aut_power(self.delta_aut, a), self.aut_power(self.rho_aut, b))
            self.auts.append(x)
        self._matrices: dict[int, np.ndarray] = {}

    # -- automorphisms as pairs ------------------------------------------------
    def compose(self, s: Automorphism, t: Automorphism) -> Automorphism:
        Qm = self.Q - 1
        return Automorphism((s.kappa * t.kappa) % Qm, (s.c * t.kappa + t.c) % Qm)

    def aut_power(self, s: Automorphism, k: int) -> Automorphism:
        out = Automorphism(1 % (self.Q - 1) if self.Q > 2 else 1, 0)
        for _ in range(k):
            out = self.compose(out, s)
        return out

    def all_automorphisms(self) -> list[Automorphism]:
        """Every (kappa, c) fixing F and preserving varpi^e = p*omega."""
        Qm = self.Q - 1
        out = []
        for i in range(self.f):
            kappa = pow(self.q, i, Qm) if Qm > 1 else 1
            for c in range(Qm):
                if (c * self.e - self.w * (kappa - 1)) % Qm == 0:
                    out.append(Automorphism(kappa % Qm if Qm > 1 else 1, c))
        return out

    def verify_group(self) -> None:
        """The automorphism group is Gamma(e, f, q, m) via delta^a rho^b."""
        G = self.gamma
        norm = lambda s: (s.kappa % (self.Q - 1) if self.Q > 2 else 0, s.c)
        images = [norm(s) for s in self.auts]
        if len(set(images)) != G.order:
            raise Unrealizable("delta^a rho^b do not give distinct automorphisms")
        if set(images) != {norm(s) for s in self.all_automorphisms()}:
            raise Unrealizable("automorphism group has the wrong size")
        for g in range(G.order):
            for h in range(G.order):
                if norm(self.compose(self.auts[g], self.auts[h])) != images[G.mul(g, h)]:
                    raise Unrealizable("group law does not match composition")

    # -- ring elements -----------------------------------------------------------
    def zeros(self, shape=()) -> np.ndarray:
        return np.zeros(tuple(shape) + (self.e, self.d), dtype=np.int64)

    def one(self, shape=()) -> np.ndarray:
        x = self.zeros(shape)
        x[..., 0, 0] = 1
        return x

    def teich(self, k) -> np.ndarray:
        k = np.asarray(k)
        x = self.zeros(k.shape)
        x[..., 0, :] = self.R.teich_coords(k)
        return x

    def monomial(self, k: int, i: int) -> np.ndarray:
        """y^k varpi^i, using varpi^e = p*omega for i >= e."""
        qq, s = divmod(i, self.e)
        x = self.zeros()
        if qq >= self.M:
            return x
        x[s] = (self.R.teich_coords(k + qq * self.w) * self.p**qq) % self.P
        return x

    def from_int(self, a: int) -> np.ndarray:
        x = self.zeros()
        x[0, 0] = a % self.P
        return x

    def add(self, a, b):
        return (a + b) % self.P

    def sub(self, a, b):
        return (a - b) % self.P

    def neg(self, a):
        return (-a) % self.P

    def scalar_mul(self, a: np.ndarray, coeff: np.ndarray) -> np.ndarray:
        """Multiply every varpi-row of a by the ring coefficient coeff (..., d)."""
        return self.R.mul(a, coeff[..., None, :])

    def mul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        e, P, R = self.e, self.P, self.R
        a, b = np.broadcast_arrays(a, b)
        shape = a.shape[:-2]
        acc = np.zeros(shape + (2 * e - 1, self.d), dtype=np.int64)
        for i in range(e):
            ai = a[..., i, :]
            if not ai.any():
                continue
            for k in range(e):
                acc[..., i + k, :] += R.mul(ai, b[..., k, :])
            acc %= P
        out = acc[..., :e, :].copy()
        if e > 1:
            hi = acc[..., e:, :]
            folded = R.mul(hi, np.broadcast_to(self._omega, hi.shape)) * self.p
            out[..., : e - 1, :] += folded
        out %= P
        return out

    def power(self, a: np.ndarray, k: int) -> np.ndarray:
        result = self.one(a.shape[:-2])
        base = a.copy()
        while k:
            if k & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            k >>= 1
        return result

    @cached_property
    def unit_order(self) -> int:
        return (self.Q - 1) * self.Q ** (self.N - 1)

    def inverse(self, a: np.ndarray) -> np.ndarray:
        """Inverse of a unit (raises if some entry is not a unit)."""
        if (self.R.residue_log(a[..., 0, :]) < 0).any():
            raise ZeroDivisionError("not a unit")
        return self.power(a, self.unit_order - 1)

    def valuation(self, a: np.ndarray) -> np.ndarray:
        """varpi-adic valuation, N for zero."""
        a = np.asarray(a)
        shape = a.shape[:-2]
        out = np.full(shape, self.N, dtype=np.int64)
        for s in range(self.e):
            row = a[..., s, :]
            # p-adic valuation of the row
            v = np.full(shape, self.M, dtype=np.int64)
            for j in range(self.M - 1, -1, -1):
                nz = (row % self.p ** (j + 1) != 0).any(axis=-1)
                v = np.where(nz, j, v)
            lev = np.where(v < self.M, v * self.e + s, self.N)
            out = np.minimum(out, lev)
        return out

    def leading_log(self, a: np.ndarray, level) -> np.ndarray:
        """log_y of the residue c in a = c * varpi^level + ... (-1 if zero).

        Uses the representation varpi^(qe+s) = p^q omega^q varpi^s, so the
        stored digit is c * omega^q and omega^q is divided out here.
        """
        level = np.asarray(level)
        qq, s = np.divmod(level, self.e)
        a = np.asarray(a)
        idx = np.broadcast_to(s, a.shape[:-2])
        row = np.take_along_axis(a, idx[..., None, None].astype(np.int64), axis=-2)[..., 0, :]
        digit = (row // (self.p ** np.broadcast_to(qq, a.shape[:-2]))[..., None]) % self.p
        lg = self.R.residue_log(digit)
        return np.where(lg >= 0, (lg - np.broadcast_to(qq, lg.shape) * self.w) % (self.Q - 1), -1)

    def divide_varpi(self, a: np.ndarray, k: int) -> np.ndarray:
        """a / varpi^k for a divisible by varpi^k (the top k digits become unreliable)."""
        e, p = self.e, self.p
        out = np.asarray(a).copy()
        inv_omega = self.R.teich_coords(-self.w)
        for _ in range(k):
            row0 = out[..., 0, :]
            if (row0 % p).any():
                raise ArithmeticError("element is not divisible by varpi")
            # c0 = p c0' and p = varpi^e / omega, so c0 / varpi = c0' omega^-1 varpi^(e-1)
            top = self.R.mul(row0 // p, np.broadcast_to(inv_omega, row0.shape))
            shifted = np.zeros_like(out)
            shifted[..., : e - 1, :] = out[..., 1:, :]
            shifted[..., e - 1, :] = top
            out = shifted % self.P
        return out

    # -- Galois action -------------------------------------------------------------
    def action_matrices(self, g: int) -> np.ndarray:
        if g not in self._matrices:
            s = self.auts[g]
            F = self.R.frob_matrix(s.kappa)
            mats = np.stack([(self.R.mul_matrix(s.c * i) @ F) % self.P for i in range(self.e)])
            self._matrices[g] = mats
        return self._matrices[g]

    def apply(self, g: int, x: np.ndarray) -> np.ndarray:
        """x^g for the group element g (index in Gamma)."""
        A = self.action_matrices(g)
        out = np.einsum("ijk,...ik->...ij", A, x) % self.P
        return out

    def apply_aut(self, s: Automorphism, x: np.ndarray) -> np.ndarray:
        F = self.R.frob_matrix(s.kappa)
        A = np.stack([(self.R.mul_matrix(s.c * i) @ F) % self.P for i in range(self.e)])
        return np.einsum("ijk,...ik->...ij", A, x) % self.P

    # -- misc --------------------------------------------------------------------------
    @property
    def varpi(self) -> np.ndarray:
        return self.monomial(0, 1)

    def key(self) -> str:
        return self.params.key() + f"\nomega=y^{self.w}\nprecision={self.N}"

    @cached_property
    def H(self) -> frozenset[int]:
        return involutions(self.gamma)[0]

    @cached_property
    def lattice(self) -> dict[str, "LocalField"]:
        infos = subfield_lattice(self.gamma, self.tau)
        return {info.name: LocalField(self, info.subgroup, info.name) for info in infos}

    def field(self, tag: str) -> "LocalField":
        try:
            return self.lattice[tag]
        except KeyError:
            raise UnknownSubfield(tag) from None

    def subfield(self, S: Iterable[int], name: str = "L") -> "LocalField":
        return LocalField(self, frozenset(S), name)

    @cached_property
    def K(self) -> "LocalField":
        return self.field("K")

    @cached_property
    def beta(self) -> np.ndarray:
        return find_beta(self)

    def random_elements(self, rng: np.random.Generator, count: int) -> np.ndarray:
        return rng.integers(0, self.P, size=(count, self.e, self.d), dtype=np.int64)


def realize_tower(params: TowerParams, precision: int | None = None) -> TowerModel:
    """Build a model of the tower with Galois group Gamma(e, f, q, m).

    ``precision`` is the number of retained varpi-digits; it defaults to
    e(r+2) and must be at least e*r + e.
    """
    params.validate()
    e, f, q, m = params.e, params.f, params.q, params.m
    floor = e * params.r + e
    if precision is None:
        precision = e * (params.r + 2)
    if precision < floor:
        raise PrecisionTooSmall(f"precision {precision} < e*r + e = {floor}")
    M = -(-precision // e)
    Q = q**f
    Qm = Q - 1
    kappa = pow(q, f - 1, Qm)
    target = (m * (Qm // e)) % Qm
    found = None
    # omega = y^w modulo e-th powers: w in [0, e) covers every class
    for w in range(Qm):
        for c in range(Qm):
            if (c * e - w * (kappa - 1)) % Qm:
                continue
            s = sum(pow(kappa, i, Qm) for i in range(f)) % Qm
            if (c * s) % Qm == target:
                found = (w, c)
                break
        if found:
            break
    if found is None:
        raise Unrealizable(f"no Teichmuller class omega realizes m = {m}")
    w, c = found
    G = build_gamma(e, f, q, m)
    tau = _choose_tau(G, params)
    model = TowerModel(params, M, w, c, tau)
    model.verify_group()
    return model


def _choose_tau(G: MetacyclicGroup, params: TowerParams) -> int:
    H = sorted(involutions(G)[0], key=lambda g: (g // G.e, g % G.e))
    if params.ramified:
        t = G.elem(G.e // 2, 0)
        if t not in H or t == 0:
            raise InvalidParams("delta^(e/2) is not an involution")
        return t
    cands = [h for h in H if h not in G.inertia]
    if not cands:
        raise InvalidParams("no involution outside the inertia subgroup: K/K_+ cannot be unramified")
    return cands[0]


def galois_apply(t: TowerModel, gamma, x: np.ndarray) -> np.ndarray:
    """Apply a group element (index, or word like [('d', 1), ('r', -1)]) to x."""
    if not isinstance(gamma, (int, np.integer)):
        gamma = t.gamma.word(*gamma)
    return t.apply(int(gamma), x)


# ---------------------------------------------------------------------------
# subfields


class LocalField:
    """The fixed field L = K^S of a subgroup S of Gamma, inside the model of K."""

    def __init__(self, tower: TowerModel, S: frozenset[int], name: str = "L"):
        self.tower = t = tower
        G = t.gamma
        self.name = name
        self.S = frozenset(S)
        if G.generated(self.S) != self.S:
            raise ValueError("S is not a subgroup")
        self.k = len(self.S & G.inertia)  # e(K/L)
        self.fK = len(self.S) // self.k  # f(K/L)
        self.e_L = t.e // self.k  # e(L/F)
        self.f_L = t.f // self.fK  # f(L/F)
        self.q_L = t.q**self.f_L
        self.d_L = t.f0 * self.f_L
        self.degree = self.e_L * self.f_L  # [L:F]
        Qm = t.Q - 1
        self.idx = Qm // (self.q_L - 1)  # y_L = y^idx
        # uniformizer y^a varpi^k fixed by S
        auts = [t.auts[s] for s in self.S]
        a = next(
            (a for a in range(Qm) if all((a * s.kappa + s.c * self.k - a) % Qm == 0 for s in auts)),
            None,
        )
        if a is None:  # pragma: no cover - a monomial uniformizer always exists
            raise RuntimeError("no monomial uniformizer")
        self.a = a
        self.varpi = t.monomial(a, self.k)
        # varpi_L^{e_L} = p * y^{a e_L + w}
        self.omega_exp = (a * self.e_L + t.w) % Qm
        self.y_exp = self.idx
        # coset representatives of S \ Gamma (right cosets S g)
        reps, seen = [], set()
        for g in range(G.order):
            coset = frozenset(G.mul(s, g) for s in self.S)
            if coset not in seen:
                seen.add(coset)
                reps.append(g)
        self.coset_reps = reps
        self._unit_cache: dict[int, "UnitGroup"] = {}

    def __repr__(self):
        return f"LocalField({self.name}, e={self.e_L}, f={self.f_L}, q={self.q_L})"

    @property
    def different_exponent(self) -> int:
        """d(L) for L/Q_p (F/Q_p is unramified)."""
        return self.e_L - 1

    @property
    def is_galois(self) -> bool:
        G = self.tower.gamma
        return all(G.mul(G.mul(G.inv(g), s), g) in self.S for g in range(G.order) for s in self.S)

    def contains(self, x: np.ndarray) -> np.ndarray:
        t = self.tower
        ok = np.ones(x.shape[:-2], dtype=bool)
        for s in self.S:
            ok &= (t.apply(s, x) == x).all(axis=(-2, -1))
        return ok

    # -- elements --------------------------------------------------------------------
    def teich(self, k) -> np.ndarray:
        return self.tower.teich(np.asarray(k) * self.idx)

    def monomial(self, k: int, i: int) -> np.ndarray:
        """y_L^k varpi_L^i."""
        t = self.tower
        return t.monomial(k * self.idx + self.a * i, self.k * i)

    @cached_property
    def basis_residue_table(self) -> np.ndarray:
        """L-coordinates (in the basis ybar_L^j) of residues y^k, -1 rows off F_{q_L}."""
        t = self.tower
        p = t.p
        Qm = t.Q - 1
        table = np.full((Qm, self.d_L), -1, dtype=np.int64)
        basis = np.stack([t.R.teich_coords(j * self.idx) % p for j in range(self.d_L)])
        for b in itertools.product(range(p), repeat=self.d_L):
            if not any(b):
                continue
            v = (np.array(b) @ basis) % p
            lg = int(t.R.residue_log(v))
            table[lg] = b
        return table

    def elements(self, level: int, units: bool = True) -> np.ndarray:
        """A residue system of (O_L / p_L^level)^x (or of O_L / p_L^level)."""
        t = self.tower
        p = t.p
        digits = np.array(list(itertools.product(range(p), repeat=self.d_L)), dtype=np.int64)
        parts = [self.monomial(j, i) for i in range(level) for j in range(self.d_L)]
        if not parts:
            return t.one((1,))
        basis = np.stack(parts).reshape(level, self.d_L, t.e, t.d)
        out = t.zeros((1,))
        for i in range(level):
            ds = digits[1:] if (units and i == 0) else digits
            layer = np.einsum("bj,jxy->bxy", ds, basis[i]) % t.P
            out = (out[:, None] + layer[None]).reshape(-1, t.e, t.d) % t.P
        return out

    # -- trace, norm, additive character --------------------------------------------------
    def trace_to_F(self, x: np.ndarray) -> np.ndarray:
        t = self.tower
        acc = np.zeros_like(x)
        for g in self.coset_reps:
            acc = (acc + t.apply(g, x)) % t.P
        return acc

    def trace_to_Qp(self, x: np.ndarray) -> np.ndarray:
        """Tr_{L/Q_p} of elements of O_L, as integers mod p^M."""
        t = self.tower
        y = self.trace_to_F(x)
        acc = np.zeros_like(y)
        kappa = 1
        for _ in range(t.f0):
            acc = (acc + t.apply_aut(Automorphism(kappa % (t.Q - 1) if t.Q > 2 else 1, 0), y)) % t.P
            kappa *= t.p
        if acc[..., 1:, :].any() or acc[..., 0, 1:].any():
            raise ArithmeticError("trace did not land in Z_p")
        return acc[..., 0, 0]

    def norm_to(self, other: "LocalField", x: np.ndarray) -> np.ndarray:
        """N_{L/L'} for a subfield L' of L (S subset of S')."""
        t = self.tower
        G = t.gamma
        if not self.S <= other.S:
            raise ValueError(f"{other.name} is not a subfield of {self.name}")
        reps, seen = [], set()
        for g in sorted(other.S):
            coset = frozenset(G.mul(s, g) for s in self.S)
            if coset not in seen:
                seen.add(coset)
                reps.append(g)
        out = None
        for g in reps:
            y = t.apply(g, x)
            out = y if out is None else t.mul(out, y)
        return out

    def psi_angle(self, shift: int, z: np.ndarray) -> tuple[np.ndarray, int]:
        """psi_L(varpi_L^-shift * z) for z in O_L, as numerators mod p^j.

        psi_L = psi_{Q_p} o Tr_{L/Q_p}, psi_{Q_p}(x) = exp(2 pi i {x}).
        Returns (numerators, p^j) with the angle numerators / p^j.
        """
        t = self.tower
        if shift <= 0:
            return np.zeros(z.shape[:-2], dtype=np.int64), 1
        j = -(-shift // self.e_L)
        if j > t.M:
            raise PrecisionTooSmall("additive character needs more p-adic digits")
        # varpi_L^-shift = varpi_L^(e_L j - shift) * omega_L^-j / p^j
        mult = t.mul(self.monomial(0, self.e_L * j - shift), t.teich(-j * self.omega_exp))
        w = t.mul(np.broadcast_to(mult, z.shape), z)
        tr = self.trace_to_Qp(w)
        pj = t.p**j
        return tr % pj, pj

    # -- multiplicative structure ---------------------------------------------------------
    def unit_group(self, level: int) -> "UnitGroup":
        """(O_L / p_L^level)^x with discrete logarithms."""
        if level not in self._unit_cache:
            self._unit_cache[level] = UnitGroup(self, level)
        return self._unit_cache[level]

    def varpi_conjugate_exponent(self, g: int) -> int:
        """k with varpi_L^g = y^k varpi_L, for g normalizing L (any g when L = K)."""
        t = self.tower
        s = t.auts[g]
        Qm = t.Q - 1
        return (self.a * s.kappa + s.c * self.k - self.a) % Qm

    def galois_coords(self, g: int, N: int) -> tuple[np.ndarray, np.ndarray]:
        """(T, w) with (v, c)^g = (v, c T + v w) on L^x / (1 + p_L^N) in (ord, unit coords)."""
        t = self.tower
        U = self.unit_group(N)
        gens = U.generator_elements()
        if gens:
            T = U.coords(np.stack([t.apply(g, x) for x in gens]))
        else:
            T = np.zeros((0, 0), dtype=np.int64)
        w = U.coords(t.teich(self.varpi_conjugate_exponent(g))[None])[0]
        return T, w

    def norm_of_varpi(self, other: "LocalField") -> tuple[int, int]:
        """(f, A) with N_{L/L'}(varpi_L) = varpi_{L'}^f * y^A, exactly."""
        t = self.tower
        G = t.gamma
        if not self.S <= other.S:
            raise ValueError(f"{other.name} is not a subfield of {self.name}")
        Qm = t.Q - 1
        reps, seen = [], set()
        for g in sorted(other.S):
            coset = frozenset(G.mul(s, g) for s in self.S)
            if coset not in seen:
                seen.add(coset)
                reps.append(g)
        A = 0
        for g in reps:
            s = t.auts[g]
            A += self.a * s.kappa + s.c * self.k
        total_k = self.k * len(reps)
        if total_k % other.k:
            raise ArithmeticError("norm of a uniformizer has the wrong valuation")
        f = total_k // other.k
        return f, (A - other.a * f) % Qm

    def embed_pairs(self, other: "LocalField", N_big: int) -> tuple[np.ndarray, np.ndarray]:
        """Coordinates in (ord_L', U_L'(N_big)) of varpi_L and of the unit generators of L.

        ``other`` must contain L (other.S is a subset of self.S).  Returns
        (row for varpi_L, rows for the canonical unit generators of
        U_L(N_small)) where N_small = ceil(N_big / e(L'/L)).
        """
        t = self.tower
        if not other.S <= self.S:
            raise ValueError(f"{self.name} is not a subfield of {other.name}")
        rel = self.k // other.k
        U_big = other.unit_group(N_big)
        U_small = self.unit_group(-(-N_big // rel))
        # varpi_L = y^a varpi^k = varpi_L'^rel * y^(a - a' rel)
        v_row = np.concatenate([[rel], U_big.coords(t.teich(self.a - other.a * rel)[None])[0]])
        gens = U_small.generator_elements()
        rows = U_big.coords(np.stack(gens)) if gens else np.zeros((0, U_big.group.rank), dtype=np.int64)
        rows = np.concatenate([np.zeros((rows.shape[0], 1), dtype=np.int64), rows], axis=1)
        return v_row, rows

    def split(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """(ord_L x, x / varpi_L^ord) for nonzero x in L (batch (B, e, d))."""
        t = self.tower
        x = np.asarray(x)
        v = t.valuation(x)
        if (v >= t.N).any():
            raise ZeroDivisionError("zero has no valuation")
        if (v % self.k).any():
            raise ValueError("element is not in L")
        vL = v // self.k
        out = np.empty_like(x)
        for val in np.unique(vL):
            sel = vL == val
            u = t.divide_varpi(x[sel], int(val) * self.k)
            out[sel] = t.mul(u, t.teich(-int(val) * self.a))
        return vL, out

    def leading_unit_log(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """(ord_L x, k) with x = y_L^k varpi_L^ord (1 + p_L)."""
        t = self.tower
        v = t.valuation(x)
        if (v % self.k).any():
            raise ValueError("element is not in L")
        vL = v // self.k
        lg = t.leading_log(x, v)
        lg = (lg - vL * self.a) % (t.Q - 1)
        if (lg % self.idx).any():
            raise ValueError("residue is not in the residue field of L")
        return vL, lg // self.idx


class UnitGroup:
    """(O_L / p_L^N)^x presented on y_L and the 1 + y_L^j varpi_L^i."""

    def __init__(self, L: LocalField, N: int):
        t = L.tower
        if N < 1:
            raise ValueError("level must be positive")
        if N * L.k > t.N - L.k:
            raise PrecisionTooSmall(f"level {N} of {L.name} exceeds the model precision")
        self.L, self.N = L, N
        p = t.p
        self.ngens = 1 + (N - 1) * L.d_L
        # g_ij and the powers g_ij^-b for b in [0, p)
        self.gens = [(i, j) for i in range(1, N) for j in range(L.d_L)]
        one = t.one()
        self._ginv_pows = {}
        self._gen_elems = []
        for i, j in self.gens:
            g = (one + L.monomial(j, i)) % t.P
            self._gen_elems.append(g)
            ginv = t.inverse(g)
            pw = [one]
            for _ in range(p - 1):
                pw.append(t.mul(pw[-1], ginv))
            self._ginv_pows[(i, j)] = np.stack(pw)
        self._lead = {i: int(t.leading_log(L.monomial(0, i), L.k * i)) for i in range(1, N)}
        rels = [[L.q_L - 1] + [0] * (self.ngens - 1)]
        if self.gens:
            gp = np.stack([t.power(g, p) for g in self._gen_elems])
            raw = self.raw_log(gp)
            for r_idx, row in enumerate(raw):
                rel = [-int(x) for x in row]
                rel[1 + r_idx] += p
                rels.append(rel)
        self.group = FinAb(self.ngens, rels)
        if self.group.order != (L.q_L - 1) * L.q_L ** (N - 1):
            raise ArithmeticError("unit group has the wrong order")
        self._Vmod = None

    def truncate(self, x: np.ndarray) -> np.ndarray:
        """Reduce modulo p_L^N (zero the K-digits at levels >= N*k)."""
        t = self.L.tower
        lev = self.N * self.L.k
        out = x.copy()
        for s in range(t.e):
            qq = -(-(lev - s) // t.e)  # smallest digit with level qq*e + s >= lev
            out[..., s, :] %= t.p**qq if qq < t.M else t.P
        return out

    def raw_log(self, x: np.ndarray) -> np.ndarray:
        """Exponents on (y_L, g_ij) of units x of O_L (batch (B, e, d))."""
        L = self.L
        t = L.tower
        x = np.asarray(x)
        B = x.shape[0]
        raw = np.zeros((B, self.ngens), dtype=np.int64)
        lg = t.R.residue_log(x[:, 0, :])
        if (lg < 0).any():
            raise ValueError("not a unit")
        if (lg % L.idx).any():
            raise ValueError("residue not in L")
        raw[:, 0] = (lg // L.idx) % (L.q_L - 1)
        u = t.mul(x, t.teich(-lg))
        table = L.basis_residue_table
        col = 1
        for i in range(1, self.N):
            lev = L.k * i
            ll = t.leading_log(u, np.full(B, lev))
            nz = ll >= 0
            ratio = (ll - self._lead[i]) % (t.Q - 1)
            b = np.where(nz[:, None], table[ratio], 0)
            if (b < 0).any():
                raise ValueError("digit not in the residue field of L")
            for j in range(L.d_L):
                u = t.mul(u, self._ginv_pows[(i, j)][b[:, j]])
            raw[:, col : col + L.d_L] = b
            col += L.d_L
        return raw

    def coords(self, x: np.ndarray) -> np.ndarray:
        """Canonical coordinates (B, rank) of units x."""
        raw = self.raw_log(x)
        return self.coords_of_raw(raw)

    def coords_of_raw(self, raw: np.ndarray) -> np.ndarray:
        G = self.group
        if self._Vmod is None:
            cols = []
            for i, d in zip(G._keep, G.invariants):
                cols.append([G._V[k][i] % d for k in range(G.ngens)])
            self._Vmod = np.array(cols, dtype=object).T if cols else np.zeros((G.ngens, 0), dtype=object)
        inv = np.array(G.invariants, dtype=np.int64)
        if not G.invariants:
            return np.zeros((raw.shape[0], 0), dtype=np.int64)
        Vm = self._Vmod.astype(np.int64)
        out = np.zeros((raw.shape[0], len(inv)), dtype=np.int64)
        for k in range(G.ngens):
            out = (out + raw[:, k : k + 1] * Vm[k][None, :]) % inv
        return out

    def element_of_coords(self, c: Sequence[int]) -> np.ndarray:
        """A unit with the given canonical coordinates."""
        L = self.L
        t = L.tower
        raw = self.group.raw_of(c)
        x = L.teich(raw[0] % (L.q_L - 1))
        for a, g in zip(raw[1:], self._gen_elems):
            if a:
                x = t.mul(x, t.power(g, a % self.group.exponent))
        return x

    def generator_elements(self) -> list[np.ndarray]:
        """Elements realizing the canonical generators (cached)."""
        if not hasattr(self, "_gen_cache"):
            self._gen_cache = [
                self.element_of_coords([1 if k == i else 0 for k in range(self.group.rank)])
                for i in range(self.group.rank)
            ]
        return self._gen_cache

    @property
    def invariants(self) -> np.ndarray:
        return np.array(self.group.invariants, dtype=np.int64)

    def teich_coords(self, k) -> np.ndarray:
        """Canonical coordinates of y_L^k (vectorized over k)."""
        k = np.atleast_1d(np.asarray(k, dtype=np.int64)) % (self.L.q_L - 1)
        raw = np.zeros((k.shape[0], self.ngens), dtype=np.int64)
        raw[:, 0] = k
        return self.coords_of_raw(raw)


# ---------------------------------------------------------------------------
# module-level operations


def trace_norm(t: TowerModel, sub: str, x: np.ndarray, kind: str = "trace") -> np.ndarray:
    """Tr_{K/L} or N_{K/L} for a subfield tag of the lattice."""
    L = t.field(sub)
    K = t.field("K")
    if kind == "trace":
        acc = np.zeros_like(x)
        for g in sorted(L.S):
            acc = (acc + t.apply(g, x)) % t.P
        out = acc
    elif kind == "norm":
        out = K.norm_to(L, x)
    else:
        raise ValueError("kind must be 'trace' or 'norm'")
    if not L.contains(out).all():
        raise ArithmeticError(f"image does not lie in {sub}")
    return out


def _generates_OK(t: TowerModel, beta: np.ndarray) -> bool:
    """O_K = O_F[beta]: the O_F-span of beta^k (k < [K:F]) has full rank mod p."""
    F = t.field("F")
    powers = [t.one()]
    for _ in range(t.e * t.f - 1):
        powers.append(t.mul(powers[-1], beta))
    rows = []
    for j in range(F.d_L):
        yj = F.teich(j)
        for b in powers:
            rows.append(t.mul(yj, b).reshape(-1))
    return _rank_mod_p(np.array(rows), t.p) == t.e * t.d


def find_beta(t: TowerModel) -> np.ndarray:
    """A generator beta of O_K over O_F with beta^tau = -beta."""
    tau = t.tau
    Qm = t.Q - 1
    if t.params.ramified:
        if t.f != 1:
            raise NoSuchGenerator("ramified K/K_+ requires K/F totally ramified")
        beta = t.varpi
        cands = [beta]
    else:
        Kp = t.field("K+")
        if Kp.k != 1:
            raise NoSuchGenerator("K/K_+ is not unramified")
        s = t.auts[tau]
        # Teichmuller a with a^tau = -a:  a = y^k, k*kappa = k + Qm/2
        ks = [k for k in range(Qm) if (k * s.kappa - k - Qm // 2) % Qm == 0]
        if not ks:
            raise NoSuchGenerator("no Teichmuller unit anti-invariant under tau")
        cands = []
        for k in ks:
            a = t.teich(k)
            if t.e == 1:
                cands.append(a)
            else:
                cands.append(t.mul(a, (t.one() + Kp.varpi) % t.P))
    for beta in cands:
        if not ((t.apply(tau, beta) + beta) % t.P == 0).all():
            continue
        if _generates_OK(t, beta):
            return beta
    raise NoSuchGenerator("no candidate generates O_K over O_F")


def unit_group_quotient(t: TowerModel, k: int, N: int, sub: str = "K") -> dict:
    """(O_L/p_L^N)^x, its filtration subgroup 1 + p_L^k and, for L = K, U_{K/K_+}.

    Returns a dict with the ``UnitGroup``, the subgroup generators of
    (1 + p^k) in canonical coordinates and, for K, the kernel of the norm
    to K_+ as a list of canonical coordinate tuples of generators.
    """
    if not 0 <= k < N:
        raise PrecisionTooSmall("need 0 <= k < N")
    L = t.field(sub)
    U = L.unit_group(N)
    filt = filtration_generators(U, k)
    out = {"group": U, "filtration": filt, "order": U.group.order}
    if sub == "K":
        out["norm_one"] = norm_one_generators(t, N)
    return out


def filtration_generators(U: UnitGroup, k: int) -> list[tuple[int, ...]]:
    """Canonical coordinates of generators of the image of 1 + p_L^k."""
    if k == 0:
        return [tuple(int(x) for x in row) for row in np.eye(U.group.rank, dtype=np.int64)]
    L = U.L
    t = L.tower
    gens = [(t.one() + L.monomial(j, i)) % t.P for i in range(k, U.N) for j in range(L.d_L)]
    if not gens:
        return []
    return [tuple(int(x) for x in row) for row in U.coords(np.stack(gens))]


def norm_one_generators(t: TowerModel, N: int) -> list[tuple[int, ...]]:
    """Generators of U_{K/K_+} modulo 1 + p_K^N, in canonical coordinates.

    Computed as the kernel of N_{K/K_+} from (O_K/p_K^N)^x to
    (O_{K_+}/p_{K_+}^N')^x with N' = ceil(N / e(K/K_+)); tameness gives
    N(1 + p_K^N) = 1 + p_{K_+}^N', so the kernel is exactly the image of U_{K/K_+}.
    """
    K, Kp = t.field("K"), t.field("K+")
    UK = K.unit_group(N)
    UP = Kp.unit_group(-(-N // Kp.k))
    rank = UK.group.rank
    gens = UK.generator_elements()
    imgs = UP.coords(np.stack([K.norm_to(Kp, g) for g in gens]))
    inv = list(UP.group.invariants)
    rows = [list(map(int, imgs[i])) for i in range(rank)]
    rows += [[d if jj == j else 0 for jj in range(len(inv))] for j, d in enumerate(inv)]
    if inv:
        ker = [a[:rank] for a in left_kernel(rows, len(inv))]
    else:
        ker = [[1 if i == j else 0 for j in range(rank)] for i in range(rank)]
    out = []
    for a in ker:
        c = tuple(int(x) % d for x, d in zip(a, UK.group.invariants))
        if any(c):
            out.append(c)
    return out
