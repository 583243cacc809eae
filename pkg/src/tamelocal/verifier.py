"""End-to-end checks of the formal-degree and root-number identities.

An ``Instance`` fixes a tower, an admissible theta (by index in the
canonical enumeration) and a cocycle choice.  Reports compare a computed
left-hand side with a computed right-hand side exactly; the root-number
check also records whether equality is expected.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from .chars import AdmissibleThetas, ChiData, FiniteCharacter, admissible_thetas, chi_data_c, theta_tilde
from .exactnum import Cyclo
from .galoisgrp import InvalidParams
from .localfactors import (
    FactorReport,
    adjoint_pieces,
    artin_conductor,
    artin_conductor_by_pieces,
    closed_form_w,
    epsilon_adjoint,
    gamma_closed_form,
    l_factor_by_pieces,
    l_factor_on_quotient,
    principal_parameter,
)
from .tamefield import TowerModel, TowerParams, Unrealizable, realize_tower
from .weilrep import (
    CyclicFundamental,
    RandomValid,
    TrivialCocycle,
    WeilQuotient,
    build_weil_quotient,
    decompose,
    QUOTIENT_CAP,
    inner_product,
    quotient_order,
)

__all__ = [
    "Check",
    "Instance",
    "TowerCache",
    "VerdictReport",
    "formal_degree_lhs",
    "dim_delta",
    "euler_poincare_constant",
    "symplectic_group_order",
    "grid",
    "root_number_expected",
    "run_instance",
    "sweep",
    "verify_decomposition",
    "verify_formal_degree",
    "verify_root_number",
]

# ---------------------------------------------------------------------------
# instances and caching


@dataclass(frozen=True)
class Instance:
    params: TowerParams
    theta_index: int = 0
    cocycle: str = "trivial"
    seed: int = 0

    @property
    def n(self) -> int:
        return self.params.n

    @property
    def dim_group(self) -> int:
        return self.n * (2 * self.n + 1)

    @property
    def rank(self) -> int:
        return self.n

    def describe(self) -> dict:
        p = self.params
        return {"p": p.p, "f0": p.f0, "e": p.e, "f": p.f, "m": p.m, "r": p.r, "theta_index": self.theta_index}


@dataclass
class TowerData:
    tower: TowerModel
    thetas: AdmissibleThetas
    cdata: ChiData

    def theta(self, index: int) -> FiniteCharacter:
        if not 0 <= index < len(self.thetas):
            raise IndexError(f"theta index {index} out of range (0..{len(self.thetas) - 1})")
        return self.thetas[index]

    def theta_tilde(self, index: int) -> FiniteCharacter:
        return theta_tilde(self.tower, self.theta(index), self.cdata)


class TowerCache:
    """Realized towers keyed by their canonical descriptor."""

    def __init__(self):
        self._data: dict[str, TowerData] = {}

    def get(self, params: TowerParams) -> TowerData:
        key = params.key()
        if key not in self._data:
            t = realize_tower(params)
            self._data[key] = TowerData(t, admissible_thetas(t), chi_data_c(t))
        return self._data[key]


_DEFAULT_CACHE = TowerCache()


def _provider(inst: Instance, t: TowerModel):
    if inst.cocycle == "trivial":
        return TrivialCocycle()
    if inst.cocycle == "cyclic":
        return CyclicFundamental()
    if inst.cocycle == "random":
        base = CyclicFundamental() if t.gamma.is_cyclic() else TrivialCocycle()
        return RandomValid(inst.seed, base)
    raise ValueError(f"unknown cocycle provider {inst.cocycle!r}")


# ---------------------------------------------------------------------------
# reports


def _render(x) -> str:
    if isinstance(x, Cyclo):
        return x.render()
    return str(x)


@dataclass
class Check:
    name: str
    lhs: object
    rhs: object
    equal: bool
    expected: bool = True
    route: str = ""

    @property
    def as_expected(self) -> bool:
        return self.equal == self.expected

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "lhs": _render(self.lhs),
            "rhs": _render(self.rhs),
            "equal": bool(self.equal),
            "expected": bool(self.expected),
            "route": self.route,
        }


@dataclass
class VerdictReport:
    instance: Instance
    checks: list[Check] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)
    error: str | None = None

    @property
    def status(self) -> str:
        if self.error:
            return "error"
        return "ok" if all(c.as_expected for c in self.checks) else "mismatch"

    def to_json(self) -> dict:
        out = {
            "instance": self.instance.describe(),
            "checks": [c.to_json() for c in self.checks],
            "status": self.status,
        }
        if self.notes:
            out["notes"] = list(self.notes)
        if self.error:
            out["error"] = self.error
        return out


# ---------------------------------------------------------------------------
# formal degree


def symplectic_group_order(n: int, q: int) -> int:
    """|Sp_2n(F_q)| = q^(n^2) prod_{k=1}^{n} (q^2k - 1)."""
    val = q ** (n * n)
    for k in range(1, n + 1):
        val *= q ** (2 * k) - 1
    return val


def dim_delta(params: TowerParams) -> Fraction:
    """q^(n^2 r) prod (1 - q^-2k) times 1/2 (K/K_+ ramified) or 1/(1 + q^-f_+).

    The product is |Sp_2n(F_q)| q^-(2n^2 + n).
    """
    q, n, r = params.q, params.n, params.r
    val = symplectic_group_order(n, q) * Fraction(q) ** (n * n * r - n * (2 * n + 1))
    if params.ramified:
        return val / 2
    return val / (1 + Fraction(1, q**params.f_plus))


def euler_poincare_constant(n: int, q: int) -> Fraction:
    """|mu_EP / d_G| = q^(n^2) prod (1 - q^-(2k-1))."""
    val = Fraction(q) ** (n * n)
    for k in range(1, n + 1):
        val *= 1 - Fraction(1, q ** (2 * k - 1))
    return val


def formal_degree_lhs(inst: Instance | TowerParams) -> Fraction:
    params = inst.params if isinstance(inst, Instance) else inst
    return dim_delta(params) / euler_poincare_constant(params.n, params.q)


def _abs_rational(z: Cyclo) -> Fraction:
    if not z.is_rational():
        raise ArithmeticError(f"{z!r} is not rational")
    return abs(z.to_rational())


def verify_formal_degree(inst: Instance, cache: TowerCache | None = None, report: FactorReport | None = None) -> VerdictReport:
    """dim-based formal degree against (1/2) |gamma(phi, Ad, 0) / gamma(phi_0, Ad, 0)|."""
    cache = cache or _DEFAULT_CACHE
    data = cache.get(inst.params)
    t = data.tower
    tt = data.theta_tilde(inst.theta_index)
    report = report or epsilon_adjoint(t, tt)
    pr = inst.params
    g0 = principal_parameter(pr.n, pr.q).gamma0
    lhs = formal_degree_lhs(inst)
    rhs = Fraction(1, 2) * _abs_rational(report.gamma_at_0) / g0
    w_closed, _ = closed_form_w(t, tt(t.beta))
    rhs_closed = Fraction(1, 2) * _abs_rational(gamma_closed_form(t, w_closed)) / g0
    out = VerdictReport(inst)
    out.checks.append(Check("formal degree", lhs, rhs, lhs == rhs, True, "epsilon assembly"))
    out.checks.append(Check("formal degree", lhs, rhs_closed, lhs == rhs_closed, True, "closed form"))
    out.checks.append(Check("gamma(phi0, Ad, 0)", g0, _principal_closed(pr.n, pr.q), g0 == _principal_closed(pr.n, pr.q), True, "kernel weights"))
    return out


def _principal_closed(n: int, q: int) -> Fraction:
    val = Fraction(q) ** (n * n)
    for k in range(1, n + 1):
        val *= (1 - Fraction(1, q ** (2 * k - 1))) / (1 - Fraction(1, q ** (2 * k)))
    return val


# ---------------------------------------------------------------------------
# root number


def root_number_expected(params: TowerParams) -> bool:
    """Equality w = theta(-1) is predicted unless K/F is totally ramified with (q-1)(n-1)/2 != 0 mod 4."""
    if params.f != 1:
        return True
    return ((params.q - 1) // 2 * (params.n - 1)) % 4 == 0


def verify_root_number(inst: Instance, cache: TowerCache | None = None, report: FactorReport | None = None) -> VerdictReport:
    """w(Ad o phi) against pi_{beta,theta}(epsilon) = theta(-1)."""
    cache = cache or _DEFAULT_CACHE
    data = cache.get(inst.params)
    t = data.tower
    theta = data.theta(inst.theta_index)
    tt = data.theta_tilde(inst.theta_index)
    report = report or epsilon_adjoint(t, tt)
    theta_m1 = theta(t.from_int(-1))
    vartheta_m1 = tt(t.beta)
    c_m1 = data.cdata.c_minus_one
    w_closed, label = closed_form_w(t, vartheta_m1)
    expected = root_number_expected(inst.params)
    out = VerdictReport(inst)
    out.checks.append(Check("root number", report.w, theta_m1, report.w == theta_m1, expected, "epsilon assembly"))
    out.checks.append(Check("root number", w_closed, theta_m1, w_closed == theta_m1, expected, f"closed form ({label})"))
    out.checks.append(Check("w assembly = w closed form", report.w, w_closed, report.w == w_closed, True, "three-way"))
    out.checks.append(Check("vartheta(-1) = c(-1) theta(-1)", vartheta_m1, c_m1 * theta_m1, vartheta_m1 == c_m1 * theta_m1, True, "chi-data"))
    ratio = report.w / theta_m1
    verdict = "identity holds" if report.w == theta_m1 else f"identity fails (ratio {ratio.render()})"
    verdict += ", as predicted" if (report.w == theta_m1) == expected else ", contrary to prediction"
    out.notes.append(verdict)
    return out


# ---------------------------------------------------------------------------
# Weil-quotient checks


def weil_quotient_size(t: TowerModel) -> int:
    """|G| of the quotient ``build_weil_quotient`` would construct."""
    size = quotient_order(t)
    if size > QUOTIENT_CAP and t.gamma.is_central(t.tau):
        size = quotient_order(t, reduce=True)
    return size


def verify_decomposition(inst: Instance, cache: TowerCache | None = None, G: WeilQuotient | None = None) -> VerdictReport:
    """Exterior-square identity, irreducibility, and the two routes for a and L on a Weil quotient."""
    cache = cache or _DEFAULT_CACHE
    data = cache.get(inst.params)
    t = data.tower
    tt = data.theta_tilde(inst.theta_index)
    if G is None:
        G = build_weil_quotient(t, _provider(inst, t))
    dec = decompose(G, tt)
    out = VerdictReport(inst)
    out.notes.append(f"|G| = {G.order}, cocycle {G.provider.describe()}")
    ok, bad = dec.wedge2.equals(dec.rhs())
    out.checks.append(Check("wedge^2 phi_1 decomposition", "pointwise", f"{len(bad)} mismatches", ok, True, "Weil quotient"))
    ip = inner_product(dec.phi1, dec.phi1)
    out.checks.append(Check("<Ind theta~, Ind theta~>", ip, 1, ip == Cyclo.one(), True, "Weil quotient"))
    ad = dec.adjoint()
    pieces = adjoint_pieces(t, tt)
    a1 = artin_conductor(G, ad)
    a2 = artin_conductor_by_pieces(pieces)
    n, r = inst.params.n, inst.params.r
    out.checks.append(Check("a(Ad) filtration = pieces", a1, a2, a1 == a2, True, "two routes"))
    out.checks.append(Check("a(Ad) = 2 n^2 r", a1, 2 * n * n * r, a1 == 2 * n * n * r, True, "filtration"))
    P1 = l_factor_on_quotient(G, ad)
    P2 = l_factor_by_pieces(pieces)
    out.checks.append(Check("L(Ad) Frobenius = pieces", P1.render(), P2.render(), P1 == P2, True, "two routes"))
    return out


# ---------------------------------------------------------------------------
# whole-instance runs and sweeps


def run_instance(inst: Instance, cache: TowerCache | None = None, weil: bool | None = None) -> VerdictReport:
    """All verifications for one instance; errors are recorded, not raised."""
    cache = cache or _DEFAULT_CACHE
    out = VerdictReport(inst)
    try:
        data = cache.get(inst.params)
        t = data.tower
        tt = data.theta_tilde(inst.theta_index)
        report = epsilon_adjoint(t, tt)
        for name, ok in report.closed_form_match.items():
            out.checks.append(Check(name, "", "", ok, True, "epsilon assembly"))
        out.checks += verify_formal_degree(inst, cache, report).checks
        rn = verify_root_number(inst, cache, report)
        out.checks += rn.checks
        out.notes += rn.notes
        if weil is None:
            weil = weil_quotient_size(t) <= QUOTIENT_CAP
        if weil:
            dc = verify_decomposition(inst, cache)
            out.checks += dc.checks
            out.notes += dc.notes
    except (InvalidParams, Unrealizable, IndexError, ValueError, ArithmeticError) as exc:
        out.error = f"{type(exc).__name__}: {exc}"
    return out


def grid(qs: Iterable[int] = (3, 5), ns: Iterable[int] = (1, 2), r: int = 4) -> list[TowerParams]:
    """Realizable (e, f) with e f = 2n, m = 0 and e | q^f - 1 for prime q."""
    out = []
    for q in qs:
        for n in ns:
            for e in range(1, 2 * n + 1):
                if (2 * n) % e:
                    continue
                f = 2 * n // e
                if (q**f - 1) % e:
                    continue
                if f > 1 and f % 2:
                    continue  # neither tau kind is available
                out.append(TowerParams(q, 1, e, f, 0, r))
    return out


def _run_params(args) -> dict:
    params, theta_index, cocycle, seed = args
    return run_instance(Instance(params, theta_index, cocycle, seed), TowerCache()).to_json()


def sweep(params_list: Iterable[TowerParams], theta_index: int = 0, cocycle: str = "trivial", seed: int = 0, jobs: int = 1) -> dict:
    """Run every instance; the aggregate status is ok iff every verdict matches expectation."""
    params_list = list(params_list)
    args = [(p, theta_index, cocycle, seed) for p in params_list]
    if jobs > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            reports = list(ex.map(_run_params, args))
    else:
        cache = TowerCache()
        reports = [run_instance(Instance(p, theta_index, cocycle, seed), cache).to_json() for p in params_list]
    bad = [r for r in reports if r["status"] != "ok"]
    return {"instances": reports, "status": "ok" if not bad else "mismatch", "count": len(reports)}
