import math

import numpy as np
import pytest

from kohnlab.basis import (
    BasisSpec,
    eval_C,
    eval_S,
    eval_chi,
    eval_chi0,
    rotate_pair,
)


@pytest.fixture
def spec():
    return BasisSpec()


class TestOpenChannel:
    def test_S_at_origin(self, spec):
        assert eval_S(spec, 0.5, 0.0) == 0.0

    def test_S_quarter_period(self, spec):
        assert eval_S(spec, 0.5, math.pi) == pytest.approx(1.0, rel=1e-15)

    def test_S_scaled(self):
        spec = BasisSpec(norm=2.0)
        assert eval_S(spec, 0.2, 5.0) == pytest.approx(2.0 * math.sin(1.0), rel=1e-15)

    def test_C_at_origin(self, spec):
        assert eval_C(spec, 0.2, 0.0) == 0.0

    def test_C_analytic_point(self, spec):
        expected = math.cos(0.4) * (1.0 - math.exp(-1.5))
        assert eval_C(spec, 0.2, 2.0) == pytest.approx(expected, rel=1e-15)

    def test_C_asymptotics(self, spec):
        r = np.linspace(0.0, 40.0, 400)
        c = eval_C(spec, 0.3, r)
        bound = spec.norm * np.exp(-spec.gamma * r)
        assert np.all(np.abs(c - spec.norm * np.cos(0.3 * r)) <= bound + 1e-300)

    def test_chi0_endpoints(self, spec):
        assert eval_chi0(spec, 0.2, 0.0) == 0.0
        assert abs(eval_chi0(spec, 0.2, 60.0)) < 1e-12

    def test_chi0_analytic_point(self, spec):
        expected = math.cos(0.4) * (1.0 - math.exp(-1.5)) * math.exp(-1.5)
        assert eval_chi0(spec, 0.2, 2.0) == pytest.approx(expected, rel=1e-15)


class TestCorrelation:
    def test_vanishes_at_origin(self, spec):
        for i in range(1, spec.m + 1):
            assert eval_chi(spec, i, 0.0) == 0.0

    def test_alpha_family_value(self):
        spec = BasisSpec(alpha=0.6, m1=4, m2=4)
        assert eval_chi(spec, 2, 1.0) == pytest.approx(math.exp(-0.6), rel=1e-15)

    def test_beta_family_value(self):
        spec = BasisSpec(beta=1.0, m1=4, m2=4)
        assert eval_chi(spec, 5, 2.0) == pytest.approx(2.0 * math.exp(-2.0), rel=1e-15)

    def test_index_bounds(self, spec):
        with pytest.raises(IndexError):
            eval_chi(spec, 0, 1.0)
        with pytest.raises(IndexError):
            eval_chi(spec, spec.m + 1, 1.0)

    def test_square_integrable_decay(self, spec):
        assert abs(eval_chi(spec, spec.m, 80.0)) < 1e-12


class TestRotation:
    def test_identity(self):
        assert rotate_pair(0.7, -0.2, 0.0) == pytest.approx((0.7, -0.2))

    def test_quarter_turn(self):
        sbar, cbar = rotate_pair(1.0, 0.0, math.pi / 2)
        assert sbar == pytest.approx(0.0, abs=1e-16)
        assert cbar == pytest.approx(-1.0, rel=1e-15)

    def test_direct_formula(self):
        sbar, cbar = rotate_pair(0.6, 0.8, 0.3)
        assert sbar == pytest.approx(0.6 * math.cos(0.3) + 0.8 * math.sin(0.3))
        assert cbar == pytest.approx(-0.6 * math.sin(0.3) + 0.8 * math.cos(0.3))

    def test_norm_preserved_random(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            s, c, tau = rng.standard_normal(2).tolist() + [rng.uniform(0, math.pi)]
            sbar, cbar = rotate_pair(s, c, tau)
            assert sbar**2 + cbar**2 == pytest.approx(s**2 + c**2, rel=1e-13)

    def test_vectorized_over_r(self):
        spec = BasisSpec()
        r = np.linspace(0.0, 10.0, 50)
        s, c = eval_S(spec, 0.4, r), eval_C(spec, 0.4, r)
        sbar, cbar = rotate_pair(s, c, 1.1)
        np.testing.assert_allclose(sbar**2 + cbar**2, s**2 + c**2, rtol=1e-12)


class TestSpecValidation:
    def test_defaults(self):
        spec = BasisSpec()
        assert (spec.gamma, spec.alpha, spec.beta) == (0.75, 0.6, 1.0)
        assert spec.m == 12

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"gamma": 0.0},
            {"alpha": -1.0},
            {"beta": 0.0},
            {"m1": 0, "m2": 0},
            {"m1": -1, "m2": 3},
        ],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            BasisSpec(**kwargs)
