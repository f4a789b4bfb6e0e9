"""Tests for the variance-gamma distribution module."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.models.params import VGParams
from src.modules import vg_dist
from src.modules.vg_dist import SingularAtMu, Unbounded, VGDistributionError


class TestDensity:
    """Density evaluation across shape regimes."""

    @pytest.mark.unit
    @pytest.mark.parametrize("x", [-5.0, -1.0, -1e-6, 0.0, 1e-6, 0.3, 2.0, 20.0])
    def test_laplace_density(self, laplace, x):
        """VG(2, 0, 1, 0) has density e^{-|x|}/2."""
        assert vg_dist.pdf(laplace, x) == pytest.approx(math.exp(-abs(x)) / 2.0, rel=1e-12)

    @pytest.mark.unit
    def test_array_input_keeps_shape(self, laplace):
        """Arrays go in and come out with the same shape."""
        xs = np.array([[-1.0, 0.0], [1.0, 2.0]])
        values = vg_dist.pdf(laplace, xs)
        assert values.shape == (2, 2)
        assert values[1, 1] == pytest.approx(math.exp(-2.0) / 2.0, rel=1e-12)

    @pytest.mark.unit
    def test_singular_at_mu(self, heavy_peak):
        """Laws with r ≤ 1 have no finite density at μ."""
        with pytest.raises(SingularAtMu):
            vg_dist.pdf(heavy_peak, heavy_peak.mu)

    @pytest.mark.unit
    def test_near_mu_asymptote_r_below_one(self, heavy_peak):
        """For r < 1 the density behaves like a power of |x-μ| near μ."""
        x = heavy_peak.mu + 1e-8
        ratio = vg_dist.pdf(heavy_peak, x) / vg_dist.near_mu_asymptote(heavy_peak, x)
        assert ratio == pytest.approx(1.0, rel=1e-3)

    @pytest.mark.unit
    def test_near_mu_asymptote_r_one(self):
        """For r = 1 the leading term is -log|x-μ|/(πσ)."""
        p = VGParams(r=1.0, theta=0.0, sigma=2.0)
        assert vg_dist.near_mu_asymptote(p, 1e-3) == pytest.approx(-math.log(1e-3) / (2.0 * math.pi))

    @pytest.mark.unit
    def test_tail_asymptote_exact_for_laplace(self, laplace):
        """The tail equivalent is exact for the Laplace law."""
        assert vg_dist.tail_asymptote(laplace, 5.0) == pytest.approx(math.exp(-5.0) / 2.0, rel=1e-12)
        with pytest.raises(VGDistributionError):
            vg_dist.tail_asymptote(laplace, 0.0)

    @pytest.mark.unit
    def test_tail_asymptote_ratio(self, skewed):
        """Far from μ the density approaches its tail equivalent."""
        x = 400.0
        ratio = vg_dist.pdf(skewed, x) / vg_dist.tail_asymptote(skewed, x)
        assert ratio == pytest.approx(1.0, rel=1e-2)


class TestDistributionFunction:
    """CDF values, monotonicity and total mass."""

    @pytest.mark.unit
    @pytest.mark.parametrize("z", [0.1, 1.0, 4.0])
    def test_laplace_cdf(self, laplace, z):
        """F(z) = 1 - e^{-z}/2 and F(-z) = e^{-z}/2 for the Laplace law."""
        assert vg_dist.cdf(laplace, z) == pytest.approx(1.0 - math.exp(-z) / 2.0, abs=1e-9)
        assert vg_dist.cdf(laplace, -z) == pytest.approx(math.exp(-z) / 2.0, abs=1e-9)

    @pytest.mark.unit
    def test_symmetric_cdf_at_mu(self):
        """Symmetric laws put mass 1/2 on each side of μ."""
        p = VGParams(r=0.7, theta=0.0, sigma=1.3, mu=0.4)
        assert vg_dist.cdf(p, 0.4) == pytest.approx(0.5, abs=1e-10)

    @pytest.mark.unit
    def test_cdf_grid_monotone(self, heavy_peak):
        """Grid CDF is nondecreasing and within [0, 1]."""
        zs = np.linspace(-6.0, 6.0, 121)
        values = vg_dist.cdf_grid(heavy_peak, zs)
        assert np.all(np.diff(values) >= 0.0)
        assert values[0] >= 0.0 and values[-1] <= 1.0

    @pytest.mark.unit
    def test_cdf_grid_requires_sorted(self, laplace):
        """Unsorted grids are rejected."""
        with pytest.raises(VGDistributionError):
            vg_dist.cdf_grid(laplace, np.array([1.0, 0.0]))

    @pytest.mark.unit
    def test_unsorted_array_cdf(self, laplace):
        """``cdf`` accepts arrays in any order."""
        values = vg_dist.cdf(laplace, np.array([1.0, -1.0]))
        assert values[0] == pytest.approx(1.0 - math.exp(-1.0) / 2.0, abs=1e-9)
        assert values[1] == pytest.approx(math.exp(-1.0) / 2.0, abs=1e-9)

    @pytest.mark.unit
    def test_total_mass(self, parameter_points):
        """Every law integrates to one."""
        for p in parameter_points:
            assert vg_dist.total_mass(p).value == pytest.approx(1.0, abs=1e-8), p.label()

    @pytest.mark.unit
    def test_interval_mass(self, laplace):
        """P(-1 < Z ≤ 1) = 1 - e^{-1} for the Laplace law."""
        assert vg_dist.interval_mass(laplace, -1.0, 1.0).value == pytest.approx(1.0 - math.exp(-1.0), abs=1e-10)
        assert vg_dist.interval_mass(laplace, 1.0, -1.0).value == 0.0


class TestMode:
    """Mode location."""

    @pytest.mark.unit
    def test_closed_form_mode(self, skewed):
        """VG(4, 1, 1, 0) has its mode at (2+√2)/2."""
        assert vg_dist.mode(skewed) == pytest.approx((2.0 + math.sqrt(2.0)) / 2.0, abs=1e-8)

    @pytest.mark.unit
    def test_mode_at_mu(self, laplace):
        """Laws with r ≤ 2 or θ = 0 peak at μ."""
        assert vg_dist.mode(laplace) == laplace.mu
        assert vg_dist.mode(VGParams(r=1.5, theta=2.0, sigma=1.0, mu=3.0)) == 3.0

    @pytest.mark.property
    @settings(max_examples=40, deadline=None)
    @given(r=st.floats(min_value=3.5, max_value=8.0),
           theta=st.floats(min_value=0.2, max_value=2.0),
           negative=st.booleans())
    def test_mode_bracket(self, r, theta, negative):
        """|θ|(r-3) < |mode - μ| < |θ|(r-2), on the side of sign θ."""
        t = -theta if negative else theta
        m = vg_dist.mode(VGParams(r=r, theta=t, sigma=1.0))
        assert math.copysign(1.0, m) == math.copysign(1.0, t)
        assert theta * (r - 3.0) < abs(m) < theta * (r - 2.0)


class TestDensityBounds:
    """Supremum bounds on the density."""

    @pytest.mark.unit
    def test_unbounded_for_small_r(self, heavy_peak):
        """r ≤ 1 has no finite supremum."""
        with pytest.raises(Unbounded):
            vg_dist.density_sup_bound(heavy_peak)

    @pytest.mark.unit
    def test_exact_for_laplace(self, laplace):
        """For 1 < r ≤ 2 the bound is the value at μ."""
        assert vg_dist.density_sup_bound(laplace) == pytest.approx(0.5, rel=1e-12)

    @pytest.mark.unit
    def test_bound_dominates_mode_value(self, skewed):
        """The bound is at least the density at the mode."""
        assert vg_dist.density_sup_bound(skewed) >= vg_dist.pdf(skewed, vg_dist.mode(skewed))


class TestMomentsAndCumulants:
    """Moments, cumulants and the characteristic function."""

    @pytest.mark.unit
    def test_centered_cumulants(self, centered_target):
        """VG_c(2, 1, 1) has κ2..κ6 = 6, 28, 204, 1968, 23760."""
        kappa = vg_dist.cumulants_centered(centered_target)
        assert kappa.as_list() == pytest.approx([0.0, 6.0, 28.0, 204.0, 1968.0, 23760.0])

    @pytest.mark.unit
    def test_first_cumulant_is_mean(self, skewed):
        """κ1 of VG(r, θ, σ, μ) is μ + rθ."""
        assert vg_dist.cumulants(skewed).kappa1 == pytest.approx(4.0)

    @pytest.mark.unit
    def test_mean_variance_by_quadrature(self, skewed):
        """Closed-form mean and variance agree with quadrature."""
        mean, var = vg_dist.mean_variance(skewed)
        assert vg_dist.expect(skewed, lambda x: x, growth=1.0).value == pytest.approx(mean, rel=1e-8)
        second = vg_dist.expect(skewed, lambda x: (x - mean) ** 2, growth=2.0).value
        assert second == pytest.approx(var, rel=1e-8)

    @pytest.mark.unit
    def test_abs_moment_bound(self, skewed):
        """E|Z - μ| is below the stated bound."""
        first_abs = vg_dist.expect(skewed, lambda x: abs(x - skewed.mu), growth=1.0).value
        assert first_abs <= vg_dist.abs_moment_bound(skewed)

    @pytest.mark.unit
    def test_char_function(self, laplace):
        """Laplace characteristic function is 1/(1+u²)."""
        assert vg_dist.char_function(laplace, 0.0) == pytest.approx(1.0)
        assert vg_dist.char_function(laplace, 2.0) == pytest.approx(0.2)


class TestSampling:
    """Seeded sampling."""

    @pytest.mark.unit
    def test_same_seed_same_draws(self, skewed):
        """Draws are a function of the seed."""
        assert np.array_equal(vg_dist.sample(skewed, 50, seed=3), vg_dist.sample(skewed, 50, seed=3))
        assert not np.array_equal(vg_dist.sample(skewed, 50, seed=3), vg_dist.sample(skewed, 50, seed=4))

    @pytest.mark.unit
    @pytest.mark.parametrize("n", [-1, 0])
    def test_size_below_one(self, skewed, n):
        """At least one draw must be requested."""
        with pytest.raises(ValueError):
            vg_dist.sample(skewed, n, seed=0)

    @pytest.mark.unit
    def test_single_draw(self, skewed):
        """One draw gives a one-element array."""
        assert vg_dist.sample(skewed, 1, seed=0).shape == (1,)

    @pytest.mark.slow
    def test_sample_moments(self, centered_target):
        """Sample mean and variance of 10^5 draws lie within five standard errors."""
        draws = vg_dist.sample(centered_target, 100_000, seed=11)
        assert abs(draws.mean()) < 5.0 * math.sqrt(6.0 / draws.size)
        assert draws.var() == pytest.approx(6.0, abs=5.0 * math.sqrt(312.0 / draws.size))
