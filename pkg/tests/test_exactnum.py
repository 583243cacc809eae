"""Exact cyclotomic arithmetic: ring axioms, canonical forms, square roots."""

from __future__ import annotations

import cmath
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tamelocal.exactnum import Cyclo, abs_square, as_float, from_histogram, reduce_histograms, sqrt_prime_power

CONDUCTORS = [1, 2, 3, 4, 5, 6, 8, 9, 12, 15, 18, 20, 24, 27, 36]


@st.composite
def cyclos(draw, conductors=CONDUCTORS):
    N = draw(st.sampled_from(conductors))
    terms = draw(st.lists(st.tuples(st.integers(0, N - 1), st.fractions(-5, 5, max_denominator=7)), max_size=4))
    return Cyclo(N, {k: c for k, c in terms})


def close(z: Cyclo, w: complex) -> bool:
    return abs(as_float(z) - w) < 1e-9


@given(cyclos(), cyclos())
def test_addition_and_multiplication_match_complex_values(x, y):
    assert close(x + y, as_float(x) + as_float(y))
    assert close(x * y, as_float(x) * as_float(y))
    assert close(x - y, as_float(x) - as_float(y))


@given(cyclos(), cyclos(), cyclos())
def test_ring_axioms(x, y, z):
    assert (x + y) + z == x + (y + z)
    assert (x * y) * z == x * (y * z)
    assert x * (y + z) == x * y + x * z
    assert x * y == y * x


@given(cyclos())
def test_inverse(x):
    if x == Cyclo.zero():
        with pytest.raises(ZeroDivisionError):
            x.inverse()
    else:
        assert x * x.inverse() == Cyclo.one()


@given(cyclos())
def test_conjugation_and_abs_square(x):
    assert close(x.conj(), as_float(x).conjugate())
    a = abs_square(x)
    assert a.is_rational() or abs(as_float(a).imag) < 1e-9
    assert a == a.conj()


@given(st.sampled_from(CONDUCTORS), st.integers(0, 200), st.integers(1, 4))
def test_canonical_form_ignores_presentation(N, k, s):
    # zeta_N^k written in Q(zeta_{sN}) must be the same object
    assert Cyclo.root(N, k) == Cyclo.root(s * N, s * k)
    assert hash(Cyclo.root(N, k)) == hash(Cyclo.root(s * N, s * k))


def test_sum_of_all_roots_vanishes():
    for N in range(2, 40):
        assert sum((Cyclo.root(N, k) for k in range(N)), Cyclo.zero()) == Cyclo.zero()


def test_root_of_unity_angles():
    assert Cyclo.from_angle(Fraction(1, 4)) == Cyclo.root(4)
    assert Cyclo.from_angle(Fraction(-1, 2)) == Cyclo.rational(-1)
    assert Cyclo.root(12, 5).as_root_of_unity() == Fraction(5, 12)
    assert (Cyclo.root(3) + 1).as_root_of_unity() == Fraction(1, 6)
    assert Cyclo.rational(2).as_root_of_unity() is None


@pytest.mark.parametrize("p", [3, 5, 7, 11, 13])
@pytest.mark.parametrize("exp", [Fraction(1, 2), Fraction(3, 2), Fraction(-1, 2), 2, Fraction(-5, 2)])
def test_sqrt_prime_power(p, exp):
    z = sqrt_prime_power(p, exp)
    assert z * z == Cyclo.rational(Fraction(p) ** int(2 * exp))
    assert close(z, p ** float(exp))


def test_sqrt_prime_power_rejects_quarter():
    with pytest.raises(ValueError):
        sqrt_prime_power(3, Fraction(1, 4))


@given(st.sampled_from([4, 6, 9, 12, 18, 20]), st.data())
def test_histogram_reduction(N, data):
    hist = data.draw(st.lists(st.integers(0, 6), min_size=N, max_size=N))
    z = from_histogram(N, hist, Fraction(1, 3))
    direct = sum((Cyclo.root(N, k) * c for k, c in enumerate(hist)), Cyclo.zero()) * Fraction(1, 3)
    assert z == direct
    rows = reduce_histograms(N, np.array([hist, [1] * N]))
    assert not rows[1].any()  # sum of all N-th roots is zero
    assert rows[0].any() == (direct != Cyclo.zero())


def test_render():
    assert Cyclo.rational(Fraction(-9, 4)).render() == "-9/4"
    assert Cyclo.root(4).render() in ("i", "1i", "1.0i", "1.00000000000i")
    assert cmath.isclose(as_float(Cyclo.root(8)), cmath.exp(2j * cmath.pi / 8))
