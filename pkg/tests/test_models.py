"""Tests for all Pydantic model validation and functionality."""

import math

import numpy as np
import pytest
from pydantic import ValidationError

from src.models.config import SUITES, CertifyConfig, CliConfig
from src.models.params import CumulantVector, ReparamVG, VGParams
from src.models.report import BoundReport, GridSpec, ReportBundle, refinement_change
from src.models.stein import TestFunction
from src.models.stein import TestFunctionKind as Kind


class TestVGParams:
    """Test VGParams validation and helpers."""

    @pytest.mark.models
    def test_valid_params(self, skewed):
        """A valid law keeps its fields as floats."""
        assert skewed.as_tuple() == (4.0, 1.0, 1.0, 0.0)
        assert skewed.label() == "VG(4,1,1,0)"

    @pytest.mark.models
    @pytest.mark.parametrize("fields", [
        {"r": 0.0, "sigma": 1.0},
        {"r": -1.0, "sigma": 1.0},
        {"r": 2.0, "sigma": 0.0},
        {"r": 2.0, "sigma": 1.0, "theta": math.nan},
        {"r": 2.0, "sigma": 1.0, "mu": math.inf},
    ])
    def test_invalid_params(self, fields):
        """Non-positive r or σ and non-finite values are rejected."""
        with pytest.raises(ValidationError):
            VGParams(**fields)

    @pytest.mark.models
    def test_frozen_and_hashable(self, laplace):
        """Parameters are immutable and usable as dictionary keys."""
        with pytest.raises(ValidationError):
            laplace.r = 3.0
        assert {laplace: 1}[VGParams(r=2.0, theta=0.0, sigma=1.0)] == 1

    @pytest.mark.models
    def test_from_string(self):
        """Three or four comma-separated numbers."""
        assert VGParams.from_string("2, 0.5, 1").as_tuple() == (2.0, 0.5, 1.0, 0.0)
        assert VGParams.from_string("2,0.5,1,3").mu == 3.0
        with pytest.raises(ValueError):
            VGParams.from_string("2,1")
        with pytest.raises(ValueError):
            VGParams.from_string("2,x,1")

    @pytest.mark.models
    def test_centered(self):
        """VG_c(r, θ, σ) sits at μ = -rθ."""
        assert VGParams.centered(3.0, 0.5, 1.0).mu == -1.5

    @pytest.mark.models
    def test_shifted_shape(self, skewed):
        """Only r changes."""
        shifted = skewed.shifted_shape(1.0)
        assert shifted.as_tuple() == (5.0, 1.0, 1.0, 0.0)
        assert skewed.r == 4.0

    @pytest.mark.models
    def test_reparam(self):
        """ν = (r-1)/2, α = √(θ²+σ²)/σ², β = θ/σ², γ = β/α."""
        rep = VGParams(r=2.0, theta=1.0, sigma=1.0).reparam()
        assert rep.nu == 0.5
        assert rep.alpha == pytest.approx(math.sqrt(2.0))
        assert rep.beta == 1.0
        assert rep.gamma == pytest.approx(1.0 / math.sqrt(2.0))

    @pytest.mark.models
    def test_skew_ratio(self):
        """θ²/σ²."""
        assert VGParams(r=1.0, theta=1.0, sigma=2.0).skew_ratio == 0.25


class TestReparamVG:
    """Test the Bessel-side parametrization."""

    @pytest.mark.models
    def test_decay_required(self):
        """α must strictly exceed |β|."""
        with pytest.raises(ValidationError):
            ReparamVG(nu=0.0, alpha=1.0, beta=-1.0, gamma=-0.5)

    @pytest.mark.models
    def test_order_lower_limit(self):
        """ν > -1/2, i.e. r > 0."""
        with pytest.raises(ValidationError):
            ReparamVG(nu=-0.5, alpha=1.0, beta=0.0, gamma=0.0)


class TestCumulantVector:
    """Test cumulant containers."""

    @pytest.mark.models
    def test_one_based_indexing(self):
        """kappa[k] is κ_k."""
        kappa = CumulantVector(kappa1=1.0, kappa2=2.0, kappa3=3.0, kappa4=4.0, kappa5=5.0, kappa6=6.0)
        assert [kappa[k] for k in range(1, 7)] == [1.0, 2.0, 3.0, 4.0, 5.0, 6.0]
        with pytest.raises(IndexError):
            kappa[0]
        with pytest.raises(IndexError):
            kappa[7]

    @pytest.mark.models
    def test_negative_variance(self):
        """κ2 < 0 is not a variance."""
        with pytest.raises(ValidationError):
            CumulantVector(kappa2=-1.0)

    @pytest.mark.models
    def test_minus(self):
        """Differences are taken order by order."""
        a = CumulantVector(kappa2=3.0, kappa4=1.0)
        b = CumulantVector(kappa2=1.0)
        assert a.minus(b) == [0.0, 2.0, 0.0, 1.0, 0.0, 0.0]


class TestTestFunction:
    """Test function families and descriptors."""

    @pytest.mark.models
    @pytest.mark.parametrize("text,kind", [
        ("indicator:0.5", Kind.INDICATOR),
        ("sine:2", Kind.SCALED_SINE),
        ("identity", Kind.IDENTITY),
        (" Square ", Kind.SQUARE),
    ])
    def test_from_descriptor(self, text, kind):
        """Descriptors parse to the right family."""
        assert TestFunction.from_descriptor(text).kind == kind

    @pytest.mark.models
    @pytest.mark.parametrize("text", ["cosine:1", "identity:3", "sine:abc", "indicator:", "sine:0"])
    def test_bad_descriptor(self, text):
        """Unknown families, stray arguments and invalid numbers are rejected."""
        with pytest.raises(ValueError):
            TestFunction.from_descriptor(text)

    @pytest.mark.models
    def test_descriptor_round_trip(self):
        """descriptor gives text from_descriptor accepts."""
        for tf in (TestFunction.indicator(-1.25), TestFunction.scaled_sine(3.0), TestFunction.square()):
            assert TestFunction.from_descriptor(tf.descriptor) == tf

    @pytest.mark.models
    def test_required_fields(self):
        """Each family needs its own parameter."""
        with pytest.raises(ValidationError):
            TestFunction(kind=Kind.INDICATOR)
        with pytest.raises(ValidationError):
            TestFunction.indicator(math.inf)
        with pytest.raises(ValidationError):
            TestFunction(kind=Kind.SCALED_SINE)
        with pytest.raises(ValidationError):
            TestFunction(kind=Kind.CUSTOM)

    @pytest.mark.models
    def test_evaluation(self):
        """Values and derivatives of the built-in families."""
        indicator = TestFunction.indicator(0.0)
        assert indicator(0.0) == 1.0
        assert indicator(1e-12) == 0.0
        assert indicator.derivative(5.0) == 0.0
        sine = TestFunction.scaled_sine(2.0)
        assert sine(0.3) == pytest.approx(math.sin(0.6) / 2.0)
        assert sine.derivative(0.3) == pytest.approx(math.cos(0.6))
        assert TestFunction.square().derivative(1.5) == 3.0

    @pytest.mark.models
    def test_custom_without_derivative(self):
        """A bare callable has no derivative."""
        tf = TestFunction.custom(math.tanh, name="tanh")
        assert tf.descriptor == "custom:tanh"
        assert not tf.has_derivative
        with pytest.raises(ValueError):
            tf.derivative(0.0)

    @pytest.mark.models
    def test_plus(self):
        """Sums evaluate and differentiate pointwise."""
        total = TestFunction.scaled_sine(1.0).plus(TestFunction.identity())
        assert total.kind == Kind.CUSTOM
        assert total(0.5) == pytest.approx(math.sin(0.5) + 0.5)
        assert total.derivative(0.5) == pytest.approx(math.cos(0.5) + 1.0)

    @pytest.mark.models
    def test_metadata(self):
        """Kinks, growth orders and known derivative norms."""
        assert TestFunction.indicator(1.0).kinks == (1.0,)
        assert TestFunction.scaled_sine(1.0).kinks == ()
        assert TestFunction.square().growth_order == 2
        assert TestFunction.identity().growth_order == 1
        assert TestFunction.scaled_sine(4.0).sup_h2 == 4.0
        assert TestFunction.indicator(0.0).sup_h1 is None


class TestGridSpec:
    """Stein-factor grids."""

    @pytest.mark.models
    def test_offsets_symmetric_and_sorted(self, small_grid, skewed):
        """Offsets come in ± pairs, sorted, outside the singular band."""
        offsets = small_grid.x_offsets(skewed)
        np.testing.assert_allclose(offsets, -offsets[::-1])
        assert np.all(np.diff(offsets) > 0.0)
        scale = skewed.sigma ** 2 / math.hypot(skewed.theta, skewed.sigma)
        assert np.min(np.abs(offsets)) >= 1e-6 * scale

    @pytest.mark.models
    def test_offsets_span(self, small_grid, laplace):
        """Four decades at four points each, both signs."""
        offsets = small_grid.x_offsets(laplace)
        assert offsets.size == 2 * 17
        assert offsets[-1] == pytest.approx(10.0)
        assert offsets[len(offsets) // 2] == pytest.approx(1e-3)

    @pytest.mark.models
    def test_near_band_points(self, laplace):
        """Near-band points add magnitudes just outside the band."""
        grid = GridSpec(x_min=1e-3, x_max=1.0, points_per_decade=2, near_band_points=4)
        plain = GridSpec(x_min=1e-3, x_max=1.0, points_per_decade=2, near_band_points=0)
        assert grid.x_offsets(laplace).size == plain.x_offsets(laplace).size + 4

    @pytest.mark.models
    def test_params_product(self):
        """The parameter grid is the full product."""
        grid = GridSpec(r_values=[1.0, 2.0], theta_values=[0.0, 1.0, -1.0], sigma_values=[1.0])
        assert len(grid.params()) == 6

    @pytest.mark.models
    def test_invalid_grid(self):
        """Shapes must be positive and unknown keys are forbidden."""
        with pytest.raises(ValidationError):
            GridSpec(r_values=[0.0])
        with pytest.raises(ValidationError):
            GridSpec(sigma_values=[])
        with pytest.raises(ValidationError):
            GridSpec(spacing="log")


class TestCertifyConfig:
    """Certification configs."""

    @pytest.mark.models
    def test_all_expands(self):
        """'all' stands for every suite."""
        assert CertifyConfig().suites == list(SUITES)

    @pytest.mark.models
    def test_duplicates_removed(self):
        """Suites keep their first position."""
        assert CertifyConfig(suites=["appA", "all"]).suites == [
            "appA", "dist", "thm31", "appB", "jump", "blowup", "prop35"]

    @pytest.mark.models
    def test_unknown_suite(self):
        """Unknown suite names are rejected."""
        with pytest.raises(ValidationError):
            CertifyConfig(suites=["appC"])

    @pytest.mark.models
    def test_extra_keys_forbidden(self):
        """Typos in config files surface as errors."""
        with pytest.raises(ValidationError):
            CertifyConfig(thread=4)

    @pytest.mark.models
    def test_nested_params(self):
        """Jump points may be given as mappings."""
        config = CertifyConfig(jump_params=[{"r": 2.0, "sigma": 1.0}])
        assert config.jump_params == [VGParams(r=2.0, sigma=1.0)]

    @pytest.mark.models
    def test_cli_config_format(self):
        """Only json and csv outputs exist."""
        assert CliConfig(subcommand="pdf").output_format == "json"
        with pytest.raises(ValidationError):
            CliConfig(subcommand="pdf", output_format="xml")


class TestBoundReport:
    """Margin and pass logic."""

    @pytest.mark.models
    def test_margin_and_alias(self):
        """margin = rhs - lhs_sup and pass is serialised under its alias."""
        report = BoundReport.build(suite="thm31", bound_id="T31_F", lhs_sup=1.0, rhs=3.0)
        assert report.margin == 2.0
        dumped = report.model_dump(by_alias=True)
        assert dumped["pass"] is True
        assert "passed" not in dumped

    @pytest.mark.models
    def test_relative_tolerance(self):
        """Overshoots within tol_rel·rhs still pass."""
        assert BoundReport.build(suite="s", bound_id="b", lhs_sup=1.0 + 1e-9, rhs=1.0).passed
        assert not BoundReport.build(suite="s", bound_id="b", lhs_sup=1.0 + 1e-7, rhs=1.0).passed

    @pytest.mark.models
    def test_strict(self):
        """Strict checks fail on equality."""
        assert BoundReport.build(suite="s", bound_id="b", lhs_sup=1.0, rhs=1.0).passed
        assert not BoundReport.build(suite="s", bound_id="b", lhs_sup=1.0, rhs=1.0, strict=True).passed

    @pytest.mark.models
    def test_non_finite(self):
        """NaN or infinite sides fail."""
        assert not BoundReport.build(suite="s", bound_id="b", lhs_sup=math.nan, rhs=1.0).passed
        assert not BoundReport.build(suite="s", bound_id="b", lhs_sup=0.0, rhs=math.inf).passed

    @pytest.mark.models
    @pytest.mark.parametrize("fine, coarse, expected", [
        (4.0, 2.0, 0.5),
        (2.0, 2.0, 0.0),
        (0.0, 0.0, 0.0),
        (-1.0, -2.0, 0.5),
    ])
    def test_refinement_change(self, fine, coarse, expected):
        """Relative rise of the supremum from the coarse grid to the full grid."""
        report = BoundReport.build(suite="s", bound_id="b", lhs_sup=fine, rhs=10.0, lhs_sup_coarse=coarse)
        assert report.refinement_change == pytest.approx(expected)

    @pytest.mark.models
    def test_refinement_change_absent_or_undefined(self):
        """No coarse supremum, no change; a non-finite coarse supremum gives NaN."""
        assert BoundReport.build(suite="s", bound_id="b", lhs_sup=1.0, rhs=2.0).refinement_change is None
        assert math.isnan(refinement_change(1.0, math.inf))

    @pytest.mark.models
    def test_bundle_failures(self):
        """Only explicit pass = false records count as failures."""
        bundle = ReportBundle(version="1.0.0", records=[{"pass": False}, {"pass": True}, {"name": "x"}])
        assert bundle.failures == 1
