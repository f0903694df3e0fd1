import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spacct import (
    DomainError,
    binomial,
    d_hat,
    eval_curve,
    hockey_stick,
    hockey_stick_threshold,
    point,
    property_query_answer_law,
    shift,
)
from spacct.curve import CurvePoint, PrivacyCurve

from rational_ref import total_variation


def _as_dict(d):
    return dict(d.items())


class TestHockeyStick:
    def test_identical_laws(self):
        d = binomial(6, 0.3)
        for eps in (0.0, 0.1, 2.0):
            assert hockey_stick(d, d, eps) == 0.0

    def test_disjoint_supports(self):
        assert hockey_stick(point(1), point(0), 5.0) == 1.0

    def test_shifted_bernoulli_pair(self):
        p = shift(binomial(1, 0.5), 1)
        q = binomial(1, 0.5)
        assert hockey_stick(p, q, 0.1) == pytest.approx(0.5, abs=1e-15)

    def test_epsilon_zero_is_total_variation(self):
        rng = np.random.default_rng(5)
        for _ in range(25):
            t = int(rng.integers(1, 40))
            p, q = rng.uniform(0.05, 0.95, size=2)
            a, b = binomial(t, p), shift(binomial(t, q), int(rng.integers(0, 2)))
            tv = total_variation(_as_dict(a), _as_dict(b))
            assert hockey_stick(a, b, 0.0) == pytest.approx(tv, abs=1e-12)

    def test_rejects_negative_epsilon(self):
        with pytest.raises(DomainError):
            hockey_stick(point(0), point(0), -0.1)

    @given(st.integers(1, 60), st.floats(0.05, 0.95), st.floats(0.0, 3.0))
    @settings(max_examples=60, deadline=None)
    def test_bounds_and_monotonicity(self, t, p, eps):
        a = shift(binomial(t, p), 1)
        b = binomial(t, p)
        lo = hockey_stick(a, b, eps)
        hi = hockey_stick(a, b, eps + 0.25)
        assert 0.0 <= hi <= lo <= 1.0

    def test_convex_in_exp_epsilon(self):
        a = shift(binomial(30, 0.4), 1)
        b = binomial(30, 0.4)
        lam = np.linspace(1.0, 3.0, 41)
        vals = [hockey_stick(a, b, math.log(x)) for x in lam]
        second = np.diff(vals, 2)
        assert np.all(second >= -1e-12)

    def test_symmetry_at_half(self):
        p1 = property_query_answer_law(64, 0.5, 1)
        p0 = property_query_answer_law(64, 0.5, 0)
        for eps in (0.0, 0.05, 0.4):
            assert hockey_stick(p1, p0, eps) == pytest.approx(
                hockey_stick(p0, p1, eps), abs=1e-12
            )


class TestThresholdForm:
    def test_agrees_with_direct_sum_on_random_binomials(self):
        rng = np.random.default_rng(17)
        for _ in range(100):
            t = int(rng.integers(1, 200))
            p = float(rng.uniform(0.02, 0.98))
            eps = float(rng.uniform(0.0, 1.5))
            a = shift(binomial(t, p), 1)
            b = binomial(t, p)
            direct = hockey_stick(a, b, eps)
            thresh = hockey_stick_threshold(a, b, eps)
            assert thresh == pytest.approx(direct, abs=1e-12)

    def test_tie_at_threshold(self):
        # e^0 * q == p everywhere for identical laws; optimal set is empty
        d = binomial(4, 0.5)
        assert hockey_stick_threshold(d, d, 0.0) == 0.0


class TestDhat:
    def test_identical_laws(self):
        d = binomial(8, 0.3)
        assert d_hat({0: d, 1: d}, 0.2) == 0.0

    def test_needs_two_values(self):
        with pytest.raises(DomainError):
            d_hat({0: point(0)}, 0.1)

    def test_table1_row32_cell(self):
        laws = {c: property_query_answer_law(1024, 0.5, c) for c in (0, 1)}
        assert d_hat(laws, 0.005) == pytest.approx(0.0225, abs=5e-4)

    def test_table1_row64_cell(self):
        laws = {c: property_query_answer_law(512, 0.5, c) for c in (0, 1)}
        assert d_hat(laws, 0.005) == pytest.approx(0.0329, abs=5e-4)

    def test_asymmetric_pair_takes_max(self):
        a, b = binomial(3, 0.2), binomial(3, 0.7)
        expected = max(hockey_stick(a, b, 0.1), hockey_stick(b, a, 0.1))
        assert d_hat({0: a, 1: b}, 0.1) == expected


class TestPropertyQueryAnswerLaw:
    def test_single_entry(self):
        law = property_query_answer_law(1, 0.7, 1)
        assert law.mass(1) == 1.0

    def test_two_entries_half(self):
        law = property_query_answer_law(2, 0.5, 0)
        np.testing.assert_allclose(law.masses, [0.5, 0.5])

    def test_hand_expansion(self):
        law = property_query_answer_law(4, 0.5, 1)
        assert law.mass(2) == pytest.approx(0.375, abs=1e-15)

    def test_rejects_empty_database(self):
        with pytest.raises(DomainError):
            property_query_answer_law(0, 0.5, 1)


class TestEvalCurve:
    def test_single_point(self):
        laws = {c: property_query_answer_law(16, 0.5, c) for c in (0, 1)}
        curve = eval_curve(laws, [0.3])
        assert curve.points[0].delta == d_hat(laws, 0.3)

    def test_table1_row32_grid(self):
        laws = {c: property_query_answer_law(1024, 0.5, c) for c in (0, 1)}
        curve = eval_curve(laws, [0.005, 0.01, 0.02])
        for got, expected in zip(curve.deltas(), (0.0225, 0.0203, 0.0163)):
            assert got == pytest.approx(expected, abs=5e-4)

    def test_monotone_deltas(self):
        laws = {c: property_query_answer_law(32, 0.3, c) for c in (0, 1)}
        curve = eval_curve(laws, [0.0, 0.5, 10.0])
        assert curve.deltas()[-1] <= curve.deltas()[0]

    def test_rejects_unsorted_grid(self):
        laws = {c: property_query_answer_law(8, 0.5, c) for c in (0, 1)}
        with pytest.raises(DomainError):
            eval_curve(laws, [0.2, 0.1])


class TestCurveTypes:
    def test_point_validation(self):
        with pytest.raises(DomainError):
            CurvePoint(-1.0, 0.5)
        with pytest.raises(DomainError):
            CurvePoint(0.0, 1.5)

    def test_curve_validation(self):
        with pytest.raises(DomainError):
            PrivacyCurve((CurvePoint(0.0, 0.2), CurvePoint(1.0, 0.5)))
        with pytest.raises(DomainError):
            PrivacyCurve((CurvePoint(1.0, 0.2), CurvePoint(1.0, 0.1)))

    def test_delta_at(self):
        curve = PrivacyCurve((CurvePoint(0.0, 0.5), CurvePoint(1.0, 0.1)))
        assert curve.delta_at(0.5) == 0.5
        assert curve.delta_at(1.5) == 0.1
