"""Shared towers, characters and Weil quotients for the test suite.

Instances used throughout:
    A: n=1, q=3, K/F ramified quadratic (e=2, f=1), r=4
    B: n=1, q=3, K/F unramified quadratic (e=1, f=2), r=4
    C: n=2, q=3, e=2, f=2, |H|=4, r=4
    D: n=2, q=5, K/F totally ramified (e=4, f=1), r=4; the root-number identity fails here
"""

from __future__ import annotations

import pytest
from hypothesis import HealthCheck, settings

from tamelocal.chars import admissible_thetas, chi_data_c, theta_tilde
from tamelocal.tamefield import TowerParams, realize_tower
from tamelocal.weilrep import TrivialCocycle, build_weil_quotient

settings.register_profile("default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

PARAMS = {
    "A": TowerParams(3, 1, 2, 1, 0, 4),
    "B": TowerParams(3, 1, 1, 2, 0, 4),
    "C": TowerParams(3, 1, 2, 2, 0, 4),
    "D": TowerParams(5, 1, 4, 1, 0, 4),
}


class TowerBundle:
    """A realized tower with its admissible thetas and chi-data, built once."""

    def __init__(self, params: TowerParams):
        self.params = params
        self.t = realize_tower(params)
        self.thetas = admissible_thetas(self.t)
        self.cdata = chi_data_c(self.t)
        self._tt = {}

    def tt(self, i: int = 0):
        if i not in self._tt:
            self._tt[i] = theta_tilde(self.t, self.thetas[i], self.cdata)
        return self._tt[i]


_BUNDLES: dict[str, TowerBundle] = {}
_QUOTIENTS: dict[tuple, object] = {}


def bundle(name: str) -> TowerBundle:
    if name not in _BUNDLES:
        _BUNDLES[name] = TowerBundle(PARAMS[name])
    return _BUNDLES[name]


def quotient(name: str, provider=None, key: str = "trivial"):
    """Weil quotient of instance ``name``; cached under ``key`` for the provider."""
    k = (name, key)
    if k not in _QUOTIENTS:
        _QUOTIENTS[k] = build_weil_quotient(bundle(name).t, provider or TrivialCocycle())
    return _QUOTIENTS[k]


@pytest.fixture(scope="session")
def A():
    return bundle("A")


@pytest.fixture(scope="session")
def B():
    return bundle("B")


@pytest.fixture(scope="session")
def C():
    return bundle("C")


@pytest.fixture(scope="session")
def D():
    return bundle("D")


@pytest.fixture(scope="session", params=["A", "B", "C"])
def abc(request):
    return bundle(request.param)


@pytest.fixture(scope="session", params=["A", "B"])
def ab(request):
    return bundle(request.param)
