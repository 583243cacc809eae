"""Exact arithmetic in cyclotomic fields Q(zeta_N).

An element is stored as a map from exponents k (mod N) to rational
coefficients, always reduced to a canonical basis.  For N = prod p^a the
basis is the tensor product of the power bases of the prime-power factors:
zeta_N^k lies in the basis exactly when every CRT component c_p of k
(defined by zeta_N^k = prod zeta_{p^a}^{c_p}) satisfies c_p < phi(p^a).
A non-basis component is rewritten with 1 + zeta_p + ... + zeta_p^{p-1} = 0.

After every operation the conductor is shrunk to the smallest N whose
field contains the value, so equality is a plain comparison of
(N, coefficients).
"""

from __future__ import annotations

import cmath
import math
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping

import numpy as np
from sympy import factorint

__all__ = [
    "Cyclo",
    "NonDivisibleConductor",
    "Rational",
    "abs_square",
    "as_float",
    "from_histogram",
    "rebase",
    "reduce_histograms",
    "root_of_unity",
    "sqrt_prime_power",
]

Rational = Fraction


class NonDivisibleConductor(ValueError):
    """Raised when rebasing to a conductor that the current one does not divide."""


# ---------------------------------------------------------------------------
# per-conductor data


@lru_cache(maxsize=None)
def _factors(N: int) -> tuple[tuple[int, int, int, int], ...]:
    """Return (p, a, P = p^a, inverse of N/P mod P) for each prime power of N."""
    out = []
    for p, a in sorted(factorint(N).items()):
        P = p**a
        out.append((p, a, P, pow(N // P, -1, P) if P > 1 else 0))
    return tuple(out)


@lru_cache(maxsize=None)
def _phi(N: int) -> int:
    r = 1
    for p, a, P, _ in _factors(N):
        r *= P - P // p
    return r


@lru_cache(maxsize=1 << 16)
def _expand(N: int, k: int) -> tuple[tuple[int, int], ...]:
    """Write zeta_N^k in the canonical basis as ((k', sign), ...)."""
    k %= N
    terms = [(k, 1)]
    for p, a, P, inv in _factors(N):
        step = (N // P) * (P // p)  # exponent of zeta_p inside zeta_N
        bound = P - P // p
        new = []
        for kk, s in terms:
            c = (kk * inv) % P
            if c < bound:
                new.append((kk, s))
            else:
                # zeta_p^{p-1} = -(1 + zeta_p + ... + zeta_p^{p-2})
                for j in range(1, p):
                    new.append(((kk - j * step) % N, -s))
        terms = new
    return tuple(terms)


def _component_divisible(N: int, k: int, p: int, P: int, inv: int, a: int) -> bool:
    c = (k * inv) % P
    if a == 1:
        return c == 0
    return c % p == 0


# ---------------------------------------------------------------------------


class Cyclo:
    """Immutable element of Q(zeta_N) in canonical form."""

    __slots__ = ("N", "coeffs", "_hash")

    def __init__(self, N: int, coeffs: Mapping[int, Fraction], *, _canonical: bool = False):
        if N < 1:
            raise ValueError("conductor must be positive")
        if not _canonical:
            acc: dict[int, Fraction] = {}
            for k, c in coeffs.items():
                if c == 0:
                    continue
                c = Fraction(c)
                for kk, s in _expand(N, k):
                    acc[kk] = acc.get(kk, 0) + s * c
            coeffs = {k: c for k, c in acc.items() if c != 0}
            N, coeffs = _minimize(N, coeffs)
        self.N = N
        self.coeffs = coeffs
        self._hash = None

    # -- constructors -----------------------------------------------------
    @classmethod
    def rational(cls, x) -> "Cyclo":
        x = Fraction(x)
        return cls(1, {0: x} if x else {}, _canonical=True)

    @classmethod
    def zero(cls) -> "Cyclo":
        return cls(1, {}, _canonical=True)

    @classmethod
    def one(cls) -> "Cyclo":
        return cls.rational(1)

    @classmethod
    def root(cls, N: int, k: int = 1) -> "Cyclo":
        """zeta_N^k with zeta_N = exp(2 pi i / N)."""
        return cls(N, {k % N: Fraction(1)})

    @classmethod
    def from_angle(cls, angle: Fraction) -> "Cyclo":
        """exp(2 pi i * angle) for a rational angle."""
        angle = Fraction(angle) % 1
        return cls.root(angle.denominator, angle.numerator)

    # -- coercion -----------------------------------------------------------
    @staticmethod
    def coerce(x) -> "Cyclo":
        if isinstance(x, Cyclo):
            return x
        if isinstance(x, (int, Fraction)):
            return Cyclo.rational(x)
        raise TypeError(f"cannot coerce {type(x).__name__} to Cyclo")

    def rebase(self, M: int) -> dict[int, Fraction]:
        """Canonical coefficients of self viewed in Q(zeta_M); requires N | M."""
        if M % self.N:
            raise NonDivisibleConductor(f"{self.N} does not divide {M}")
        s = M // self.N
        acc: dict[int, Fraction] = {}
        for k, c in self.coeffs.items():
            for kk, sg in _expand(M, k * s):
                acc[kk] = acc.get(kk, 0) + sg * c
        return {k: c for k, c in acc.items() if c != 0}

    # -- arithmetic -----------------------------------------------------------
    def __add__(self, other):
        try:
            other = Cyclo.coerce(other)
        except TypeError:
            return NotImplemented
        M = math.lcm(self.N, other.N)
        a = self.rebase(M)
        for k, c in other.rebase(M).items():
            a[k] = a.get(k, 0) + c
        a = {k: c for k, c in a.items() if c != 0}
        N, a = _minimize(M, a)
        return Cyclo(N, a, _canonical=True)

    __radd__ = __add__

    def __neg__(self):
        return Cyclo(self.N, {k: -c for k, c in self.coeffs.items()}, _canonical=True)

    def __sub__(self, other):
        try:
            other = Cyclo.coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return Cyclo.coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                return Cyclo.zero()
            return Cyclo(self.N, {k: c * other for k, c in self.coeffs.items()}, _canonical=True)
        try:
            other = Cyclo.coerce(other)
        except TypeError:
            return NotImplemented
        if other.N == 1:
            return self * other.coeffs.get(0, Fraction(0))
        if self.N == 1:
            return other * self.coeffs.get(0, Fraction(0))
        M = math.lcm(self.N, other.N)
        sa, sb = M // self.N, M // other.N
        acc: dict[int, Fraction] = {}
        for k1, c1 in self.coeffs.items():
            for k2, c2 in other.coeffs.items():
                c = c1 * c2
                for kk, sg in _expand(M, k1 * sa + k2 * sb):
                    acc[kk] = acc.get(kk, 0) + sg * c
        acc = {k: c for k, c in acc.items() if c != 0}
        N, acc = _minimize(M, acc)
        return Cyclo(N, acc, _canonical=True)

    __rmul__ = __mul__

    def conj(self) -> "Cyclo":
        return self.galois(-1)

    def galois(self, j: int) -> "Cyclo":
        """Image under zeta_N -> zeta_N^j (j prime to N)."""
        if math.gcd(j, self.N) != 1:
            raise ValueError("Galois exponent must be prime to the conductor")
        return Cyclo(self.N, {(k * j) % self.N: c for k, c in self.coeffs.items()})

    def is_rational(self) -> bool:
        return self.N == 1

    def to_rational(self) -> Fraction:
        if self.N != 1:
            raise ValueError(f"{self!r} is not rational")
        return self.coeffs.get(0, Fraction(0))

    def inverse(self) -> "Cyclo":
        if not self.coeffs:
            raise ZeroDivisionError("inverse of zero")
        if self.N == 1:
            return Cyclo.rational(1 / self.coeffs[0])
        if len(self.coeffs) == 1:
            (k, c), = self.coeffs.items()
            if len(_expand(self.N, k)) == 1:
                return Cyclo(self.N, {(-k) % self.N: 1 / c})
        a2 = self * self.conj()
        if a2.is_rational():
            return self.conj() * (1 / a2.to_rational())
        others = Cyclo.one()
        for j in range(2, self.N):
            if math.gcd(j, self.N) == 1:
                others = others * self.galois(j)
        norm = (self * others).to_rational()
        return others * (1 / norm)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * (1 / Fraction(other))
        return self * Cyclo.coerce(other).inverse()

    def __rtruediv__(self, other):
        return Cyclo.coerce(other) * self.inverse()

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        result = Cyclo.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    # -- comparison ---------------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Cyclo.rational(other)
        if not isinstance(other, Cyclo):
            return NotImplemented
        return self.N == other.N and self.coeffs == other.coeffs

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.N, frozenset(self.coeffs.items())))
        return self._hash

    def __bool__(self):
        return bool(self.coeffs)

    # -- rendering ----------------------------------------------------------
    def __complex__(self):
        return as_float(self)

    def __repr__(self):
        if self.N == 1:
            return f"Cyclo({self.to_rational()})"
        terms = " + ".join(f"{c}*z{self.N}^{k}" for k, c in sorted(self.coeffs.items()))
        return f"Cyclo({terms})"

    def render(self, digits: int = 12) -> str:
        """Exact fraction for rationals, otherwise decimal with the given significant digits."""
        if self.N == 1:
            return str(self.to_rational())
        z = as_float(self)
        re, im = z.real, z.imag
        if abs(im) < 1e-13 * max(1.0, abs(re)):
            return f"{re:.{digits}g}"
        if abs(re) < 1e-13 * max(1.0, abs(im)):
            return f"{im:.{digits}g}i"
        return f"{re:.{digits}g}{im:+.{digits}g}i"

    def as_root_of_unity(self) -> Fraction | None:
        """Return the angle a with self = exp(2 pi i a), or None."""
        M = 2 * self.N if self.N % 2 else self.N
        for k in range(M):
            if Cyclo.root(M, k) == self:
                return Fraction(k, M)
        return None


def _minimize(N: int, coeffs: dict[int, Fraction]) -> tuple[int, dict[int, Fraction]]:
    if not coeffs:
        return 1, {}
    changed = True
    while changed and N > 1:
        changed = False
        for p, a, P, inv in _factors(N):
            if all(_component_divisible(N, k, p, P, inv, a) for k in coeffs):
                N2 = N // p
                coeffs = {(k // p) % N2 if N2 > 1 else 0: c for k, c in coeffs.items()}
                N = N2
                changed = True
                break
    return N, coeffs


# ---------------------------------------------------------------------------
# module level operations named in the interface


def rebase(z: Cyclo, M: int) -> Cyclo:
    """Return z written with conductor M (N | M); the value is unchanged.

    Arithmetic results are stored with minimal conductor, so the returned
    object keeps the requested M only as its representation.
    """
    coeffs = z.rebase(M)
    return Cyclo(M, coeffs, _canonical=True)


def abs_square(z: Cyclo) -> Cyclo:
    return z * z.conj()


def as_float(z: Cyclo) -> complex:
    total = 0j
    for k, c in z.coeffs.items():
        total += float(c) * cmath.exp(2j * math.pi * k / z.N)
    return total


def root_of_unity(N: int, k: int = 1) -> Cyclo:
    return Cyclo.root(N, k)


@lru_cache(maxsize=None)
def _sqrt_prime(p: int) -> Cyclo:
    """Positive square root of an odd prime via the quadratic Gauss sum."""
    g = Cyclo(p, {a: Fraction(_legendre(a, p)) for a in range(1, p)})
    if p % 4 == 3:
        g = g * Cyclo.root(4, 3)  # g = i sqrt(p)
    return g


def _legendre(a: int, p: int) -> int:
    a %= p
    if a == 0:
        return 0
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1


def sqrt_prime_power(p: int, exponent) -> Cyclo:
    """Return p^exponent for a half-integer exponent (positive real root)."""
    exponent = Fraction(exponent)
    twice = exponent * 2
    if twice.denominator != 1:
        raise ValueError("exponent must be a half-integer")
    t = int(twice)
    whole, half = divmod(t, 2)
    val = Cyclo.rational(Fraction(p) ** whole)
    if half:
        if p == 2:
            val = val * (Cyclo.root(8) + Cyclo.root(8, 7))
        else:
            val = val * _sqrt_prime(p)
    return val


# ---------------------------------------------------------------------------
# vectorised reduction of root-of-unity histograms


@lru_cache(maxsize=64)
def _tensor_layout(N: int):
    """Index array mapping CRT component tuples to exponents, and kept positions."""
    facs = _factors(N)
    if N == 1:
        return np.zeros((1,), dtype=np.int64), (1,), [(0,)]
    grids = np.meshgrid(*[np.arange(P) for _, _, P, _ in facs], indexing="ij")
    k = np.zeros(grids[0].shape, dtype=np.int64)
    for (p, a, P, inv), g in zip(facs, grids):
        k = (k + g * (N // P)) % N
    return k, tuple(P for _, _, P, _ in facs), None


def reduce_histograms(N: int, H: np.ndarray) -> np.ndarray:
    """Canonical coordinates of rows of H, where H[b, k] counts zeta_N^k.

    Returns an integer array of shape (B, phi(N)); a row is zero exactly
    when the corresponding element of Z[zeta_N] vanishes.
    """
    H = np.asarray(H)
    B = H.shape[0]
    if N == 1:
        return H.reshape(B, 1).copy()
    kidx, shape, _ = _tensor_layout(N)
    T = H[:, kidx]  # (B, P1, P2, ...)
    for ax, (p, a, P, _) in enumerate(_factors(N)):
        axis = ax + 1
        lo = P // p
        new_shape = T.shape[:axis] + (p, lo) + T.shape[axis + 1:]
        T = T.reshape(new_shape)
        top = np.take(T, [p - 1], axis=axis)
        T = np.take(T, list(range(p - 1)), axis=axis) - top
        T = T.reshape(T.shape[:axis] + ((p - 1) * lo,) + T.shape[axis + 2:])
    return T.reshape(B, -1)


def _kept_exponents(N: int) -> np.ndarray:
    if N == 1:
        return np.zeros(1, dtype=np.int64)
    kidx, _, _ = _tensor_layout(N)
    T = kidx[None]
    for ax, (p, a, P, _) in enumerate(_factors(N)):
        axis = ax + 1
        lo = P // p
        T = T.reshape(T.shape[:axis] + (p, lo) + T.shape[axis + 1:])
        T = np.take(T, list(range(p - 1)), axis=axis)
        T = T.reshape(T.shape[:axis] + ((p - 1) * lo,) + T.shape[axis + 2:])
    return T.reshape(-1)


def from_histogram(N: int, hist: Iterable[int], scale=1) -> Cyclo:
    """Build scale * sum_k hist[k] zeta_N^k as a Cyclo."""
    h = np.asarray(hist, dtype=np.int64).reshape(1, -1)
    if h.shape[1] != N:
        raise ValueError("histogram length must equal the conductor")
    red = reduce_histograms(N, h)[0]
    ks = _kept_exponents(N)
    scale = Fraction(scale)
    coeffs = {int(k): Fraction(int(c)) * scale for k, c in zip(ks, red) if c}
    N2, coeffs = _minimize(N, coeffs)
    return Cyclo(N2, coeffs, _canonical=True)
