import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from lapdp import errors
from lapdp.composition import compose_point_guarantees
from lapdp.core import (
    PLD,
    DiscretePair,
    GridPart,
    PrivacyProfile,
    RenyiCurve,
    floor_profile,
    profile_from_discrete,
    profile_from_pld,
)
from lapdp.mechanisms import gaussian_curve, gaussian_profile, gaussian_renyi_curve, rr_curve, rr_pair, rr_renyi_curve
from lapdp.oracle import (
    Ordering,
    check_dominance,
    check_renyi_dominance,
    compose_pld,
    convolve_plds,
    discretize,
    gaussian_grid_pld,
    grid_accountant,
    product_pair,
    random_pair,
)

LN2 = math.log(2.0)
FLOOR = PrivacyProfile(func=floor_profile, kind="floor", label="floor")


class TestProductPair:
    def test_single(self):
        pr = rr_pair(LN2, 0.0)
        out = product_pair([pr])
        assert_allclose(out.p, pr.p)
        assert_allclose(out.q, pr.q)

    def test_two_rr(self):
        out = product_pair([rr_pair(LN2, 0.0)] * 2)
        assert_allclose(out.p, [4 / 9, 2 / 9, 2 / 9, 1 / 9], atol=1e-15)

    def test_three_rr(self):
        out = product_pair([rr_pair(LN2, 0.0)] * 3)
        assert out.size == 8
        assert out.p.sum() == pytest.approx(1.0, abs=1e-15)
        assert out.q.sum() == pytest.approx(1.0, abs=1e-15)

    def test_cap(self):
        with pytest.raises(errors.SupportOverflowError):
            product_pair([rr_pair(1.0, 0.1)] * 5, cap=1000)

    def test_empty(self):
        with pytest.raises(ValueError):
            product_pair([])


class TestConvolve:
    def test_identity(self, rng):
        unit = PLD.from_atoms([0.0], [1.0])
        pld = random_pair(rng).pld()
        out = convolve_plds(unit, pld)
        assert_allclose(out.z, pld.z, atol=1e-15)
        assert_allclose(out.mass, pld.mass, atol=1e-15)
        assert out.mass_pos_inf == pytest.approx(pld.mass_pos_inf, abs=1e-15)

    def test_rr_square(self):
        pld = rr_pair(LN2, 0.0).pld()
        out = convolve_plds(pld, pld)
        assert_allclose(out.z, [-2 * LN2, 0.0, 2 * LN2], atol=1e-12)
        assert_allclose(out.mass, [1 / 9, 4 / 9, 4 / 9], atol=1e-15)

    def test_infinite_mass_combines(self):
        a = rr_pair(1.0, 0.1).pld()
        out = convolve_plds(a, a)
        assert out.mass_pos_inf == pytest.approx(1 - 0.9 ** 2, abs=1e-15)

    def test_matches_product_pair(self, rng):
        eps = np.linspace(-3.0, 3.0, 31)
        for _ in range(20):
            a, b = random_pair(rng), random_pair(rng)
            got = profile_from_pld(convolve_plds(a.pld(), b.pld()), eps)
            want = profile_from_discrete(product_pair([a, b]), eps)
            assert_allclose(got, want, atol=1e-12)

    @pytest.mark.parametrize("kappa", [0.1, 0.5, 2.0])
    def test_gaussian_sum(self, kappa):
        g = gaussian_grid_pld(kappa, 1e-3)
        out = convolve_plds(g, g)
        pts, m = out.grid.points, out.grid.masses
        mean = float(np.sum(pts * m))
        var = float(np.sum((pts - mean) ** 2 * m))
        assert mean == pytest.approx(2 * kappa, abs=1e-6)
        assert var == pytest.approx(4 * kappa, rel=1e-5)
        eps = np.linspace(-2.0, 6.0, 33)
        assert_allclose(profile_from_pld(out, eps), gaussian_profile(2 * kappa, eps), atol=1e-4)

    def test_step_mismatch(self):
        with pytest.raises(errors.GridMismatchError):
            convolve_plds(gaussian_grid_pld(0.5, 1e-3), gaussian_grid_pld(0.5, 2e-3))

    def test_mixed_inputs(self):
        with pytest.raises(errors.GridMismatchError):
            convolve_plds(gaussian_grid_pld(0.5, 1e-3), rr_pair(LN2, 0.0).pld())

    def test_off_lattice_origin(self):
        g = gaussian_grid_pld(0.5, 1e-2)
        shifted = PLD(np.empty(0), np.empty(0), GridPart(g.grid.z_min + 0.003, 1e-2, g.grid.masses),
                      g.mass_pos_inf)
        with pytest.raises(errors.GridMismatchError):
            convolve_plds(g, shifted)

    def test_cap_on_atoms(self):
        pld = random_pair(np.random.default_rng(0), 5).pld()
        with pytest.raises(errors.SupportOverflowError):
            convolve_plds(pld, pld, cap=4)


class TestDiscretize:
    def test_upper_bounds_profile(self, rng):
        eps = np.linspace(-3.0, 3.0, 61)
        for _ in range(20):
            pld = random_pair(rng).pld()
            assert np.all(np.asarray(profile_from_pld(discretize(pld, 0.05), eps))
                          >= np.asarray(profile_from_pld(pld, eps)) - 1e-15)

    def test_lattice_points_stay(self):
        pld = PLD.from_atoms([-0.5, 0.25], [0.4, 0.6])
        g = discretize(pld, 0.25)
        assert_allclose(g.grid.points[g.grid.masses > 0], [-0.5, 0.25], atol=1e-15)

    def test_bad_step(self):
        with pytest.raises(ValueError):
            discretize(PLD.from_atoms([0.0], [1.0]), 0.0)


class TestGridAccountant:
    def test_k1_is_direct(self, rng):
        pld = random_pair(rng).pld()
        eps = np.linspace(-2.0, 2.0, 9)
        res = grid_accountant(pld, 1, eps)
        assert_allclose(res.deltas, profile_from_pld(pld, eps), atol=0)
        assert res.error_bound == 0.0

    def test_rr_k2_at_zero(self):
        res = grid_accountant(rr_pair(LN2, 0.0).pld(), 2, [0.0])
        assert res.deltas[0] == pytest.approx(1 / 3, abs=1e-15)

    @pytest.mark.parametrize("k", [1, 2, 7, 20])
    def test_atom_kernel_is_exact(self, k):
        eps = np.linspace(-3.0, 3.0, 41)
        res = grid_accountant(rr_pair(0.1, 1e-8).pld(), k, eps)
        assert_allclose(res.deltas, compose_point_guarantees([(0.1, 1e-8)] * k, eps), rtol=0, atol=1e-12)

    def test_unattainable_budget(self):
        # The +∞ atom alone already exceeds the budget.
        res = grid_accountant(rr_pair(0.1, 1e-8).pld(), 100, [50.0])
        assert res.deltas[0] > 1e-8
        assert res.deltas[0] == pytest.approx(-math.expm1(100 * math.log1p(-1e-8)), rel=1e-9)

    @pytest.mark.parametrize("k", [2, 10])
    def test_gaussian(self, k):
        eps = np.linspace(-4.0, 10.0, 141)
        res = grid_accountant(gaussian_grid_pld(0.5, 1e-3), k, eps)
        assert np.max(np.abs(res.deltas - gaussian_profile(0.5 * k, eps))) <= 1e-4
        assert res.error_bound == pytest.approx(k * 1e-3)

    def test_step_argument_discretizes(self):
        res = grid_accountant(rr_pair(0.1, 1e-8).pld(), 10, [0.5], step=1e-4)
        exact = compose_point_guarantees([(0.1, 1e-8)] * 10, [0.5])
        assert res.pld.grid is not None
        assert res.deltas[0] >= exact[0] - 1e-15
        assert res.deltas[0] == pytest.approx(exact[0], abs=1e-3)

    def test_bad_k(self):
        with pytest.raises(ValueError):
            compose_pld(rr_pair(0.1, 0.0).pld(), 0)


class TestDominance:
    def test_self(self):
        prof = gaussian_curve(0.5)
        assert check_dominance(prof, prof, np.linspace(-4, 4, 81)).ordering is Ordering.DOMINATES

    @pytest.mark.parametrize("prof", [gaussian_curve(0.5), rr_curve(1.0, 0.05), rr_curve(LN2, 0.0)])
    def test_floor_is_dominated(self, prof):
        res = check_dominance(FLOOR, prof, np.linspace(-6, 6, 121))
        assert res.ordering is Ordering.DOMINATED

    def test_rr_vs_gaussian_crossing(self):
        res = check_dominance(rr_curve(3.0, 0.0), gaussian_curve(4.5), np.linspace(-6.0, 6.0, 1201))
        assert res.ordering is Ordering.CROSSING
        assert -6.0 <= res.witness <= 6.0
        assert "crossing" in str(res)

    def test_knots_are_checked(self):
        # Two RR profiles that differ only near the knot of the first one.
        a, b = rr_curve(1.0, 0.0), rr_curve(1.0001, 0.0)
        res = check_dominance(a, b, np.array([-5.0, 5.0]))
        assert res.ordering is Ordering.DOMINATED


class TestRenyiDominance:
    def test_self(self):
        c = gaussian_renyi_curve(0.5)
        assert check_renyi_dominance(c, c, [1.1, 2.0, 5.0])

    def test_rr_under_gaussian(self):
        assert check_renyi_dominance(rr_renyi_curve(3.0), gaussian_renyi_curve(4.5), [1.1, 2.0, 5.0, 10.0, 50.0])

    def test_gaussian_order(self):
        assert not check_renyi_dominance(gaussian_renyi_curve(1.0), gaussian_renyi_curve(0.5), [1.5, 2.0])

    def test_infinite_orders(self):
        inf = RenyiCurve.from_pld(DiscretePair(np.array([0.5, 0.5]), np.array([1.0, 0.0])).pld())
        fin = rr_renyi_curve(1.0)
        assert not check_renyi_dominance(inf, fin, [2.0])
        assert check_renyi_dominance(fin, inf, [2.0])
        assert check_renyi_dominance(inf, inf, [2.0])

    def test_one_way(self, rng):
        qs = [1.1, 2.0, 5.0, 10.0]
        grid = np.linspace(-8.0, 8.0, 161)
        hits = 0
        for _ in range(300):
            a, b = random_pair(rng, 3), random_pair(rng, 3)
            res = check_dominance(PrivacyProfile.from_pair(a), PrivacyProfile.from_pair(b), grid)
            if res.ordering is Ordering.DOMINATES:
                hits += 1
                assert check_renyi_dominance(RenyiCurve.from_pld(b.pld()), RenyiCurve.from_pld(a.pld()), qs)
        assert hits > 10


class TestRandomPair:
    def test_shape_and_normalization(self, rng):
        for _ in range(50):
            pr = random_pair(rng)
            # Outcomes with p = q = 0 are dropped by DiscretePair.
            assert 1 <= pr.size <= 5
            assert pr.p.sum() == pytest.approx(1.0)
            assert pr.q.sum() == pytest.approx(1.0)

    def test_fixed_size(self, rng):
        assert random_pair(rng, 3).size == 3

    def test_one_sided_continuity_occurs(self, rng):
        pairs = [random_pair(rng) for _ in range(200)]
        assert any(np.any((pr.p > 0) & (pr.q == 0)) for pr in pairs)
        assert any(np.any((pr.q > 0) & (pr.p == 0)) for pr in pairs)

    def test_seeded(self):
        a = random_pair(np.random.default_rng(7))
        b = random_pair(np.random.default_rng(7))
        assert_allclose(a.p, b.p)
        assert_allclose(a.q, b.q)
