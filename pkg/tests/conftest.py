"""Test configuration with pytest fixtures for vg-stein testing."""

import json
import math
import tempfile
from pathlib import Path
from typing import List

import numpy as np
import pytest
from click.testing import CliRunner

from src.models.config import CertifyConfig
from src.models.params import CumulantVector, VGParams
from src.models.report import GridSpec
from src.models.stein import TestFunction
from src.modules import vg_dist


# ================================
# Parameter Fixtures
# ================================

@pytest.fixture
def laplace():
    """VG(2, 0, 1, 0), the standard Laplace law with density e^{-|x|}/2."""
    return VGParams(r=2.0, theta=0.0, sigma=1.0, mu=0.0)


@pytest.fixture
def skewed():
    """A skewed law with r > 2 so the mode sits away from μ."""
    return VGParams(r=4.0, theta=1.0, sigma=1.0, mu=0.0)


@pytest.fixture
def heavy_peak():
    """A law with r < 1, whose density is infinite at μ."""
    return VGParams(r=0.5, theta=0.3, sigma=1.0, mu=0.2)


@pytest.fixture
def centered_target():
    """VG_c(2, 1, 1) with cumulants κ2..κ4 = 6, 28, 204."""
    return VGParams.centered(2.0, 1.0, 1.0)


@pytest.fixture
def parameter_points() -> List[VGParams]:
    """Ten laws spanning the three shape regimes and both skew signs."""
    return [
        VGParams(r=0.5, theta=0.0, sigma=1.0),
        VGParams(r=0.8, theta=-0.5, sigma=1.5),
        VGParams(r=1.0, theta=0.0, sigma=1.0),
        VGParams(r=1.0, theta=0.7, sigma=0.8),
        VGParams(r=1.5, theta=0.3, sigma=1.0, mu=0.5),
        VGParams(r=2.0, theta=0.0, sigma=1.0),
        VGParams(r=2.0, theta=1.0, sigma=1.0),
        VGParams(r=3.0, theta=-1.0, sigma=0.5),
        VGParams(r=5.0, theta=0.5, sigma=2.0, mu=-1.0),
        VGParams(r=7.0, theta=-0.3, sigma=1.0),
    ]


# ================================
# Test Function Fixtures
# ================================

@pytest.fixture
def sine():
    """h(x) = sin(x)."""
    return TestFunction.scaled_sine(1.0)


@pytest.fixture
def indicator_at_zero():
    """h(x) = 1(x <= 0)."""
    return TestFunction.indicator(0.0)


@pytest.fixture
def smooth_custom():
    """tanh with its derivative and norm metadata, integrated by quadrature."""
    return TestFunction.custom(math.tanh, derivative=lambda x: 1.0 - math.tanh(x) ** 2,
                               sup_h=1.0, lip_h=1.0, name="tanh")


# ================================
# Grid and Config Fixtures
# ================================

@pytest.fixture
def small_grid():
    """A coarse Stein-factor grid for fast certification tests."""
    return GridSpec(
        r_values=[2.0],
        theta_values=[0.0],
        sigma_values=[1.0],
        x_min=1e-3,
        x_max=10.0,
        points_per_decade=4,
        near_band_points=0,
        test_functions=["sine:1"],
    )


@pytest.fixture
def small_certify_config(small_grid):
    """A certification config small enough for the unit test suite."""
    return CertifyConfig(
        suites=["appA"],
        grid=small_grid,
        appendix_nu=[0.5, 1.0],
        appendix_gamma=[0.0, 0.5],
        appendix_x_min=1e-3,
        appendix_x_max=20.0,
        appendix_points_per_decade=2,
        prop35_pairs=2,
        prop35_r1_pairs=1,
    )


# ================================
# File Fixtures
# ================================

@pytest.fixture
def temp_directory():
    """Temporary directory for testing."""
    with tempfile.TemporaryDirectory() as temp_dir:
        yield Path(temp_dir)


@pytest.fixture
def laplace_sample(laplace):
    """2000 seeded Laplace draws."""
    return vg_dist.sample(laplace, 2000, seed=7)


@pytest.fixture
def sample_csv(temp_directory, laplace_sample):
    """Laplace sample written one value per line with a header."""
    path = temp_directory / "sample.csv"
    lines = ["value"] + [repr(float(v)) for v in laplace_sample]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


@pytest.fixture
def exact_cumulant_file(temp_directory, centered_target):
    """Cumulant file holding the exact cumulants of the target itself."""
    kappa = vg_dist.cumulants_centered(centered_target)
    path = temp_directory / "cumulants.json"
    path.write_text(json.dumps({
        "target": {"r": 2.0, "theta": 1.0, "sigma": 1.0},
        "kappa": kappa.as_list(),
        "note": "exact",
    }), encoding="utf-8")
    return path


@pytest.fixture
def perturbed_kappa(centered_target) -> CumulantVector:
    """Cumulants of the target with small perturbations in every order."""
    exact = vg_dist.cumulants_centered(centered_target)
    return CumulantVector(kappa1=0.0, kappa2=exact.kappa2 * 1.01, kappa3=exact.kappa3 - 0.2,
                          kappa4=exact.kappa4 + 1.0, kappa5=exact.kappa5 * 0.99,
                          kappa6=exact.kappa6 + 5.0)


@pytest.fixture
def rng():
    """Seeded generator for randomized checks."""
    return np.random.default_rng(12345)


@pytest.fixture
def runner():
    """Click test runner."""
    return CliRunner()
