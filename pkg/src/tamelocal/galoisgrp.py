"""Metacyclic Galois groups of tame extensions and their involutions.

Gamma(e, f, q, m) is generated by delta (inertia, order e) and rho (a lift
of Frobenius) with rho^f = delta^m.  Elements are normal forms
delta^a rho^b with 0 <= a < e and 0 <= b < f, multiplied by

    delta^a rho^b * delta^c rho^d = delta^(a + c q^b) rho^(b + d),

where an exponent b + d >= f is folded back using the central element
rho^f = delta^m.  Products are read left to right as successive actions
(x^(gh) = (x^g)^h), so the conjugation relation appears as
rho delta rho^-1 = delta^q.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Iterable

__all__ = [
    "InvalidParams",
    "MetacyclicGroup",
    "SubfieldInfo",
    "TauNotInvolution",
    "build_gamma",
    "centrality_hypothesis",
    "expected_involutions",
    "involutions",
    "subfield_lattice",
    "table_hypothesis",
]


class InvalidParams(ValueError):
    """The parameters (e, f, q, m) do not describe a tame Galois group."""


class TauNotInvolution(ValueError):
    """The chosen tau is not an element of order two."""


def check_params(e: int, f: int, q: int, m: int) -> None:
    if e < 1 or f < 1 or q < 2:
        raise InvalidParams(f"need e, f >= 1 and q >= 2 (got e={e}, f={f}, q={q})")
    if not 0 <= m < e:
        raise InvalidParams(f"need 0 <= m < e (got m={m}, e={e})")
    if (q**f - 1) % e:
        raise InvalidParams(f"e={e} does not divide q^f - 1 = {q**f - 1}")
    if (m * (q - 1)) % e:
        raise InvalidParams(f"m(q-1) = {m * (q - 1)} is not divisible by e={e}")


@dataclass(frozen=True)
class MetacyclicGroup:
    e: int
    f: int
    q: int
    m: int

    # -- elements are integers a + e*b ---------------------------------------
    @property
    def order(self) -> int:
        return self.e * self.f

    def elem(self, a: int, b: int = 0) -> int:
        """Index of delta^a rho^b for arbitrary integers a, b."""
        e, f, m = self.e, self.f, self.m
        # rho^(b) with b outside [0, f): rho^f = delta^m is central
        k, b = divmod(b, f)
        a = a + k * m
        return (a % e) + e * b

    def parts(self, g: int) -> tuple[int, int]:
        return g % self.e, g // self.e

    @cached_property
    def _qpow(self) -> list[int]:
        return [pow(self.q, b, self.e) for b in range(self.f)]

    def mul(self, g: int, h: int) -> int:
        a, b = g % self.e, g // self.e
        c, d = h % self.e, h // self.e
        return self.elem(a + c * self._qpow[b], b + d)

    @cached_property
    def table(self) -> list[list[int]]:
        n = self.order
        return [[self.mul(g, h) for h in range(n)] for g in range(n)]

    @property
    def identity(self) -> int:
        return 0

    @property
    def delta(self) -> int:
        return self.elem(1, 0) if self.e > 1 else 0

    @property
    def rho(self) -> int:
        return self.elem(0, 1)

    @cached_property
    def inverses(self) -> list[int]:
        t = self.table
        return [next(h for h in range(self.order) if t[g][h] == 0) for g in range(self.order)]

    def inv(self, g: int) -> int:
        return self.inverses[g]

    def power(self, g: int, k: int) -> int:
        if k < 0:
            g, k = self.inv(g), -k
        r = 0
        for _ in range(k):
            r = self.mul(r, g)
        return r

    def word(self, *factors: tuple[str, int]) -> int:
        """Evaluate a product of powers of 'd' (delta) and 'r' (rho)."""
        g = 0
        for name, k in factors:
            base = {"d": self.elem(1, 0), "r": self.elem(0, 1)}[name]
            g = self.mul(g, self.power(base, k))
        return g

    def elem_order(self, g: int) -> int:
        k, h = 1, g
        while h != 0:
            h = self.mul(h, g)
            k += 1
        return k

    def is_central(self, g: int) -> bool:
        return all(self.mul(g, h) == self.mul(h, g) for h in range(self.order))

    def is_abelian(self) -> bool:
        return all(self.is_central(g) for g in (self.delta, self.rho))

    def is_cyclic(self) -> bool:
        return any(self.elem_order(g) == self.order for g in range(self.order))

    @cached_property
    def inertia(self) -> frozenset[int]:
        """Gal(K/K_0), the subgroup generated by delta."""
        return frozenset(self.elem(a, 0) for a in range(self.e))

    def generated(self, gens: Iterable[int]) -> frozenset[int]:
        S = {0}
        frontier = [0]
        gens = list(gens)
        while frontier:
            x = frontier.pop()
            for g in gens:
                y = self.mul(x, g)
                if y not in S:
                    S.add(y)
                    frontier.append(y)
        return frozenset(S)

    def label(self, g: int) -> str:
        a, b = self.parts(g)
        if g == 0:
            return "1"
        s = []
        if a:
            s.append("d" if a == 1 else f"d^{a}")
        if b:
            s.append("r" if b == 1 else f"r^{b}")
        return "".join(s)

    def rho_order_formula(self) -> int:
        return self.f * self.e // math.gcd(self.e, self.m)

    def verify_axioms(self, associativity: bool = True) -> None:
        n = self.order
        t = self.table
        for g in range(n if associativity else 0):
            for h in range(n):
                for k in range(n):
                    if t[t[g][h]][k] != t[g][t[h][k]]:
                        raise InvalidParams("multiplication is not associative")
        d, r = self.elem(1, 0), self.elem(0, 1)
        if self.power(d, self.e) != 0:
            raise InvalidParams("delta^e != 1")
        if self.power(r, self.f) != self.power(d, self.m):
            raise InvalidParams("rho^f != delta^m")
        if self.mul(self.mul(r, d), self.inv(r)) != self.power(d, self.q):
            raise InvalidParams("conjugation relation fails")


@lru_cache(maxsize=512)
def build_gamma(e: int, f: int, q: int, m: int) -> MetacyclicGroup:
    """The group for valid (e, f, q, m); small groups get an associativity audit."""
    check_params(e, f, q, m)
    G = MetacyclicGroup(e, f, q, m)
    G.verify_axioms(associativity=G.order <= 16)
    return G


def involutions(G: MetacyclicGroup) -> tuple[frozenset[int], str]:
    """Return H = {g : g^2 = 1} (by enumeration) and the case label."""
    H = frozenset(g for g in range(G.order) if G.mul(g, g) == 0)
    return H, _case_label(G)


def _case_label(G: MetacyclicGroup) -> str:
    e, f, m = G.e, G.f, G.m
    if (e * f) % 2:
        return "ef odd"
    if f % 2 or (e % 2 == 0 and m % 2):
        return "f odd or (e even, m odd)"
    if e % 2 and m % 2 == 0:
        return "e odd, m even"
    if e % 2 and m % 2:
        return "e odd, m odd"
    return "f, e, m even"


def table_hypothesis(G: MetacyclicGroup) -> bool:
    """True when f is odd or e divides q^(f/2) - 1."""
    return G.f % 2 == 1 or (G.q ** (G.f // 2) - 1) % G.e == 0


def centrality_hypothesis(G: MetacyclicGroup) -> bool:
    """True when the table holds and every involution is central.

    For f even the involutions off <delta> are delta^a rho^(f/2) with
    2a = -m (mod e); such an element commutes with rho only when
    a(q - 1) = 0 (mod e).  With m = 0 this is automatic.
    """
    if G.f % 2 == 1:
        return True
    if not table_hypothesis(G):
        return False
    e = G.e
    return all((a * (G.q - 1)) % e == 0 for a in range(e) if (2 * a + G.m) % e == 0)


def expected_involutions(G: MetacyclicGroup) -> frozenset[int]:
    """The case table for H, evaluated as words in the group.

    The table is only reliable when f is odd or e | q^(f/2) - 1.  Without
    that divisibility the group may have non-central involutions (the
    dihedral group e=4, f=2, q=3, m=0) or fewer of them (the quaternion
    group e=4, f=2, q=3, m=2); see ``table_hypothesis``.
    """
    e, f, m = G.e, G.f, G.m
    label = _case_label(G)
    one = 0
    if label == "ef odd":
        return frozenset({one})
    dd = G.power(G.elem(1, 0), e // 2) if e % 2 == 0 else None
    if label.startswith("f odd"):
        return frozenset({one, dd})
    r_half = G.power(G.elem(0, 1), f // 2)
    t1 = G.mul(r_half, G.power(G.elem(1, 0), -(m // 2)))
    if label == "e odd, m even":
        return frozenset({one, t1})
    t2 = G.mul(r_half, G.power(G.elem(1, 0), (e - m) // 2))
    if label == "e odd, m odd":
        return frozenset({one, t2})
    return frozenset({one, dd, t1, t2})


@dataclass(frozen=True)
class SubfieldInfo:
    """The fixed field of a subgroup S of Gamma."""

    name: str
    subgroup: frozenset[int]
    e_over_F: int
    f_over_F: int
    e_K_over: int
    f_K_over: int
    ramified_quadratic: bool | None

    @property
    def degree(self) -> int:
        return self.e_over_F * self.f_over_F


def subfield_info(G: MetacyclicGroup, name: str, S: frozenset[int]) -> SubfieldInfo:
    eK = len(S & G.inertia)
    fK = len(S) // eK
    ram = None
    if len(S) == 2:
        ram = eK == 2
    return SubfieldInfo(name, S, G.e // eK, G.f // fK, eK, fK, ram)


def subfield_lattice(G: MetacyclicGroup, tau: int) -> list[SubfieldInfo]:
    """The fields used by the decomposition: K, K_+, K_0, F and, when |H| = 4,
    K_delta', K_tau', E = K_+ cap K_tau' and E_0 = E cap K_0."""
    if tau == 0 or G.mul(tau, tau) != 0:
        raise TauNotInvolution(f"{G.label(tau)} is not of order two")
    H, _ = involutions(G)
    out = [
        subfield_info(G, "K", frozenset({0})),
        subfield_info(G, "K+", frozenset({0, tau})),
        subfield_info(G, "K0", G.inertia),
        subfield_info(G, "F", frozenset(range(G.order))),
    ]
    if len(H) == 4:
        dprime = G.power(G.elem(1, 0), G.e // 2)
        tprime = G.mul(dprime, tau)
        E = G.generated([tau, dprime])
        out += [
            subfield_info(G, "Kd'", frozenset({0, dprime})),
            subfield_info(G, "Kt'", frozenset({0, tprime})),
            subfield_info(G, "E", E),
            subfield_info(G, "E0", G.generated(list(E) + [G.elem(1, 0)])),
        ]
    return out
