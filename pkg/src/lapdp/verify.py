"""Oracle-backed self checks behind `lapdp verify`."""

from __future__ import annotations

import dataclasses
import math
from typing import Callable, List

import numpy as np

from lapdp import composition, core, laplace, mechanisms, oracle, subsampling


@dataclasses.dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


@dataclasses.dataclass(frozen=True)
class Sizes:
    pairs: int
    dominance_pairs: int
    subsample_pairs: int
    eps_points: int
    bromwich: bool


LEVELS = {
    "quick": Sizes(pairs=50, dominance_pairs=200, subsample_pairs=20, eps_points=41, bromwich=False),
    "full": Sizes(pairs=200, dominance_pairs=1000, subsample_pairs=100, eps_points=100, bromwich=True),
}


def _err(x: float) -> str:
    return f"max error {x:.2e}"


def check_pld_profile(rng, n, eps):
    worst = 0.0
    for _ in range(n):
        pr = oracle.random_pair(rng)
        a = np.asarray(core.profile_from_pld(pr.pld(), eps))
        b = np.asarray(core.profile_from_discrete(pr, eps))
        worst = max(worst, float(np.max(np.abs(a - b))))
    return CheckResult("pld profile = hockey-stick sum", worst <= 1e-12, _err(worst))


def check_reversals(rng, n, eps):
    worst = 0.0
    ok = True
    qs = np.array([-1.5, -0.5, 0.5, 2.5])
    beta = np.linspace(0.0, 1.0, 11)
    for _ in range(n):
        pr = oracle.random_pair(rng)
        sw = pr.swapped()
        rev = core.reverse_profile(core.PrivacyProfile.from_pair(pr))
        worst = max(worst, float(np.max(np.abs(np.asarray(rev(eps)) - np.asarray(core.profile_from_discrete(sw, eps))))))
        pld_r = core.reverse_pld(pr.pld())
        pld_s = sw.pld()
        worst = max(worst, float(np.max(np.abs(np.asarray(core.profile_from_pld(pld_r, eps))
                                               - np.asarray(core.profile_from_pld(pld_s, eps))))))
        c, cs = core.RenyiCurve.from_pld(pr.pld()), core.RenyiCurve.from_pld(pld_s)
        for q in qs:
            if c.contains(q) and cs.contains(1.0 - q):
                b = cs.E(1.0 - q)
                worst = max(worst, abs(c.E(q) - b) / max(1.0, abs(b)))
        ok &= core.check_tradeoff_reversal(pr, beta)
    return CheckResult("reversal identities", ok and worst <= 1e-9, _err(worst))


def check_subsampling(rng, n, eps):
    worst = 0.0
    for _ in range(n):
        base = oracle.random_pair(rng)
        prof = core.PrivacyProfile.from_pair(base)
        for lam in (0.1, 0.3, 0.5, 0.9):
            mix = core.DiscretePair(lam * base.p + (1.0 - lam) * base.q, base.q)
            got = np.asarray(subsampling.poisson_subsample_profile(prof, lam)(eps))
            want = np.asarray(core.profile_from_discrete(mix, eps))
            worst = max(worst, float(np.max(np.abs(got - want))))
    return CheckResult("subsampling = mixture oracle", worst <= 1e-12, _err(worst))


def check_composition(rng, eps):
    worst = 0.0
    params = [(math.log(2.0), 0.0), (1.0, 0.1)]
    for k in (1, 2, 3):
        for combo in np.ndindex(*([2] * k)):
            gs = [params[i] for i in combo]
            prod = oracle.product_pair([mechanisms.rr_pair(*g) for g in gs])
            want = np.asarray(core.profile_from_discrete(prod, eps))
            got = np.asarray(composition.compose_point_guarantees(gs, eps))
            worst = max(worst, float(np.max(np.abs(got - want))))
    return CheckResult("composition = product brute force", worst <= 1e-12, _err(worst))


def check_closed_form(rng):
    t = rng.uniform(-5.0, 15.0, 50)
    worst = 0.0
    for k in (1, 5, 20, 100):
        a = composition.compose_point_guarantees([(0.1, 1e-8)] * k, t)
        b = composition.compose_homogeneous(0.1, 1e-8, k, t)
        worst = max(worst, float(np.max(np.abs(a - b))))
    return CheckResult("recursion = closed form", worst <= 1e-12, _err(worst))


def check_gaussian_renyi(rng):
    worst = 0.0
    for kappa in (0.125, 0.5, 2.0):
        prof = mechanisms.gaussian_curve(kappa)
        for q in (1.5, 2.0, 5.0):
            rho = core.rho_from_moment(laplace.renyi_from_profile(prof, q), q)
            worst = max(worst, abs(rho - kappa * q))
    return CheckResult("gaussian rényi linearity", worst <= 1e-6, _err(worst))


def check_dominance(rng, n):
    grid = np.linspace(-8.0, 8.0, 161)
    qs = [1.1, 2.0, 5.0, 10.0]
    hits = 0
    bad = 0
    for _ in range(n):
        a, b = oracle.random_pair(rng, 3), oracle.random_pair(rng, 3)
        res = oracle.check_dominance(core.PrivacyProfile.from_pair(a), core.PrivacyProfile.from_pair(b), grid)
        if res.ordering is oracle.Ordering.DOMINATES:
            hits += 1
            if not oracle.check_renyi_dominance(core.RenyiCurve.from_pld(b.pld()),
                                                core.RenyiCurve.from_pld(a.pld()), qs):
                bad += 1
    return CheckResult("profile dominance implies rényi dominance", bad == 0,
                       f"{hits} dominating pairs, {bad} violations")


def check_bromwich(rng):
    curve = mechanisms.gaussian_renyi_curve(0.5)
    eps = np.array([-1.0, 0.0, 1.0, 3.0, 6.0])
    got = laplace.profile_from_renyi(curve, eps, laplace.BromwichConfig(gamma=-1.0, omega_max=40.0))
    worst = float(np.max(np.abs(got - mechanisms.gaussian_profile(0.5, eps))))
    return CheckResult("bromwich inversion of gaussian", worst <= 1e-6, _err(worst))


def check_grid_accountant(rng):
    eps = np.linspace(-2.0, 8.0, 101)
    worst = 0.0
    for k in (2, 10):
        res = oracle.grid_accountant(oracle.gaussian_grid_pld(0.5, 1e-3), k, eps)
        worst = max(worst, float(np.max(np.abs(res.deltas - mechanisms.gaussian_profile(0.5 * k, eps)))))
    return CheckResult("grid accountant vs gaussian", worst <= 1e-4, _err(worst))


def run(seed: int = 0, level: str = "quick") -> List[CheckResult]:
    if level not in LEVELS:
        raise ValueError(f"unknown level {level!r}")
    sz = LEVELS[level]
    rng = np.random.default_rng(seed)
    eps = np.linspace(-4.0, 4.0, sz.eps_points)
    checks: List[Callable[[], CheckResult]] = [
        lambda: check_pld_profile(rng, sz.pairs, eps),
        lambda: check_reversals(rng, sz.pairs, eps),
        lambda: check_subsampling(rng, sz.subsample_pairs, eps),
        lambda: check_composition(rng, np.linspace(-4.0, 4.0, 25)),
        lambda: check_closed_form(rng),
        lambda: check_gaussian_renyi(rng),
        lambda: check_dominance(rng, sz.dominance_pairs),
        lambda: check_grid_accountant(rng),
    ]
    if sz.bromwich:
        checks.append(lambda: check_bromwich(rng))
    return [c() for c in checks]


def format_report(results: List[CheckResult]) -> str:
    width = max(len(r.name) for r in results)
    lines = [f"{'check':<{width}}  result  detail"]
    for r in results:
        lines.append(f"{r.name:<{width}}  {'PASS' if r.passed else 'FAIL':<6}  {r.detail}")
    n_fail = sum(not r.passed for r in results)
    lines.append(f"{len(results) - n_fail}/{len(results)} checks passed")
    return "\n".join(lines) + "\n"
