import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from conftest import discrete_pairs
from lapdp import errors
from lapdp.core import (
    FLOOR,
    PLD,
    DiscretePair,
    EpsDelta,
    PrivacyProfile,
    RenyiCurve,
    check_tradeoff_reversal,
    floor_profile,
    profile_from_discrete,
    profile_from_pld,
    profile_from_pld_tails,
    renyi_from_pld,
    reverse_pld,
    reverse_profile,
    rho_from_moment,
    tradeoff_from_discrete,
    tradeoff_inverse,
)
from lapdp.mechanisms import rr_pair

LN2 = math.log(2.0)
EPS = np.linspace(-4.0, 4.0, 101)


class TestTypes:
    def test_eps_delta_rejects_bad_delta(self):
        with pytest.raises(ValueError):
            EpsDelta(0.1, 1.5)

    def test_eps_delta_rejects_infinite_epsilon(self):
        with pytest.raises(ValueError):
            EpsDelta(math.inf, 0.1)

    def test_pair_drops_shared_zeros(self):
        pr = DiscretePair([0.5, 0.0, 0.5], [0.5, 0.0, 0.5])
        assert pr.size == 2

    @pytest.mark.parametrize("p, q", [([0.5, 0.6], [0.5, 0.5]), ([-0.1, 1.1], [0.5, 0.5]), ([1.0], [0.5, 0.5])])
    def test_pair_validation(self, p, q):
        with pytest.raises(ValueError):
            DiscretePair(p, q)

    def test_pld_mass_checked(self):
        with pytest.raises(errors.InvalidPLDError):
            PLD(np.array([0.0]), np.array([0.9]))

    def test_pld_merges_close_atoms(self):
        pld = PLD.from_atoms([0.0, 1e-14, 1.0], [0.25, 0.25, 0.5])
        assert_allclose(pld.z, [0.0, 1.0])
        assert_allclose(pld.mass, [0.5, 0.5])


class TestProfiles:
    def test_rr_pld_value_at_zero(self):
        assert profile_from_pld(rr_pair(LN2, 0.0).pld(), 0.0) == pytest.approx(1 / 3, abs=1e-15)

    def test_rr_with_failure_just_above_knot(self):
        assert profile_from_discrete(rr_pair(LN2, 0.1), LN2 + 1e-9) == pytest.approx(0.1, abs=1e-9)

    def test_floor_is_minimal(self):
        assert_allclose(FLOOR(EPS), np.maximum(0.0, 1 - np.exp(EPS)))
        assert floor_profile(0.0) == 0.0

    @given(discrete_pairs())
    @settings(max_examples=60, deadline=None)
    def test_pld_matches_hockey_stick(self, pair):
        assert_allclose(profile_from_pld(pair.pld(), EPS), profile_from_discrete(pair, EPS), atol=1e-12)

    @given(discrete_pairs())
    @settings(max_examples=60, deadline=None)
    def test_reversal_matches_swapped_pair(self, pair):
        rev = reverse_profile(PrivacyProfile.from_pair(pair))
        assert_allclose(rev(EPS), profile_from_discrete(pair.swapped(), EPS), atol=1e-12)

    def test_reversal_example(self):
        pair = DiscretePair([0.9, 0.1], [0.5, 0.5])
        eps = np.array([-1.0, 0.0, 1.0])
        rev = reverse_profile(PrivacyProfile.from_pair(pair))
        assert_allclose(rev(eps), profile_from_discrete(pair.swapped(), eps), atol=1e-12)

    @given(discrete_pairs(allow_zeros=False))
    @settings(max_examples=40, deadline=None)
    def test_pld_reversal_is_involution(self, pair):
        pld = pair.pld()
        back = reverse_pld(reverse_pld(pld))
        assert_allclose(back.z, pld.z, atol=1e-12)
        assert_allclose(back.mass, pld.mass, atol=1e-12)

    def test_pld_reversal_example(self):
        a = reverse_pld(DiscretePair([0.9, 0.1], [0.5, 0.5]).pld())
        b = DiscretePair([0.5, 0.5], [0.9, 0.1]).pld()
        assert_allclose(a.z, b.z, atol=1e-12)
        assert_allclose(a.mass, b.mass, atol=1e-12)
        assert a.mass_pos_inf == pytest.approx(b.mass_pos_inf, abs=1e-12)

    @given(discrete_pairs())
    @settings(max_examples=40, deadline=None)
    def test_tail_form_matches_expectation_form(self, pair):
        knots = pair.knots()
        eps = EPS[np.min(np.abs(EPS[:, None] - knots[None, :]), axis=1) > 1e-6] if knots.size else EPS
        assert_allclose(profile_from_pld_tails(pair.pld(), eps), profile_from_pld(pair.pld(), eps), atol=1e-12)

    @given(discrete_pairs())
    @settings(max_examples=40, deadline=None)
    def test_monotone_and_above_floor(self, pair):
        grid = np.linspace(-6.0, 6.0, 1000)
        d = PrivacyProfile.from_pair(pair)(grid)
        assert np.all(np.diff(d) <= 1e-15)
        assert np.all(d >= floor_profile(grid) - 1e-15)

    def test_tabulated_profile_interpolates_and_extrapolates(self):
        eps = np.array([-1.0, 0.0, 1.0])
        delta = np.array([0.7, 0.4, 0.1])
        prof = PrivacyProfile.tabulated(eps, delta)
        assert prof(0.5) == pytest.approx(0.25)
        assert prof(5.0) <= 0.1
        assert prof(-10.0) >= floor_profile(-10.0)


class TestRenyi:
    def test_point_mass_at_zero(self):
        pld = PLD(np.array([0.0]), np.array([1.0]))
        assert renyi_from_pld(pld, 2.0) == pytest.approx(1.0)

    def test_rr_order_two(self):
        e2 = renyi_from_pld(rr_pair(LN2, 0.0).pld(), 2.0)
        assert e2.real == pytest.approx(1.5, abs=1e-14)
        assert rho_from_moment(e2, 2.0) == pytest.approx(math.log(1.5), abs=1e-14)

    def test_complex_order_bounded_and_conjugate(self):
        pld = rr_pair(LN2, 0.0).pld()
        v = renyi_from_pld(pld, 2.0 + 1.0j)
        assert abs(v) <= 1.5 + 1e-14
        assert renyi_from_pld(pld, 2.0 - 1.0j) == pytest.approx(np.conj(v), abs=1e-12)

    def test_divergent_with_mass_at_infinity(self):
        with pytest.raises(errors.DivergenceError):
            renyi_from_pld(rr_pair(1.0, 0.1).pld(), 2.0)

    def test_singular_orders(self):
        for q in (0.0, 1.0):
            with pytest.raises(errors.SingularOrderError):
                rho_from_moment(1.0, q)

    def test_curve_rho_infinite_outside_strip(self):
        curve = RenyiCurve.from_pld(rr_pair(1.0, 0.1).pld())
        assert curve.rho(2.0) == math.inf

    @given(discrete_pairs(), st.floats(-3.0, 3.0), st.floats(-3.0, 3.0))
    @settings(max_examples=40, deadline=None)
    def test_conjugate_symmetry(self, pair, re, im):
        pld = pair.pld()
        curve = RenyiCurve.from_pld(pld)
        if not curve.contains(re):
            return
        q = complex(re, im)
        assert_allclose(curve.E(np.conj(q)), np.conj(curve.E(q)), rtol=1e-12, atol=1e-12)


class TestTradeoff:
    def test_identical_distributions(self):
        pair = DiscretePair([0.3, 0.7], [0.3, 0.7])
        alpha = np.linspace(0.0, 1.0, 11)
        assert_allclose(tradeoff_from_discrete(pair, alpha), 1.0 - alpha, atol=1e-15)

    def test_perfectly_distinguishable(self):
        assert tradeoff_from_discrete(DiscretePair([1.0, 0.0], [0.0, 1.0]), 0.0) == 0.0

    def test_rr_symmetric_point(self):
        assert tradeoff_from_discrete(rr_pair(LN2, 0.0), 1 / 3) == pytest.approx(1 / 3, abs=1e-15)

    def test_alpha_out_of_range(self):
        with pytest.raises(ValueError):
            tradeoff_from_discrete(rr_pair(LN2, 0.0), 1.5)

    @pytest.mark.parametrize("pair", [
        DiscretePair([0.3, 0.7], [0.3, 0.7]),
        rr_pair(LN2, 0.0),
        DiscretePair([0.9, 0.1], [0.5, 0.5]),
    ])
    def test_reversal_examples(self, pair):
        assert check_tradeoff_reversal(pair, np.linspace(0.0, 1.0, 11))

    @given(discrete_pairs())
    @settings(max_examples=80, deadline=None)
    def test_reversal_property(self, pair):
        assert check_tradeoff_reversal(pair, np.linspace(0.0, 1.0, 21))

    @given(discrete_pairs())
    @settings(max_examples=40, deadline=None)
    def test_inverse_is_left_inverse(self, pair):
        beta = np.linspace(0.0, 1.0, 21)
        alpha = tradeoff_inverse(pair, beta)
        assert np.all(tradeoff_from_discrete(pair, alpha) <= beta + 1e-12)


def test_tradeoff_inverse_stays_in_unit_interval():
    pair = DiscretePair(np.array([0.8, 0.2]), np.array([0.2, 0.8]))
    alpha = tradeoff_inverse(pair, np.linspace(0.0, 1.0, 21))
    assert alpha.min() >= 0.0 and alpha.max() <= 1.0
