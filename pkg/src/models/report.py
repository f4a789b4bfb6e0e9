"""Report models emitted by the certification harness and the CLI."""

import math
from enum import Enum
from typing import Any, Dict, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from .params import VGParams

DEFAULT_TOL_CERT = 1e-8
REFINEMENT_TOL = 0.01


def refinement_change(fine: float, coarse: float) -> float:
    """(fine - coarse) / max(|fine|, |coarse|); zero when both suprema vanish, NaN when either is non-finite."""
    if not (math.isfinite(fine) and math.isfinite(coarse)):
        return math.nan
    scale = max(abs(fine), abs(coarse))
    return (fine - coarse) / scale if scale > 0.0 else 0.0


class BoundReport(BaseModel):
    """One certified inequality at one parameter point.

    ``lhs_sup`` is a grid supremum, so a passing report means no violation was
    found on the grid, not that the inequality is proven.
    """

    model_config = ConfigDict(populate_by_name=True)

    suite: str = Field(..., description="Suite that produced the report")
    bound_id: str = Field(..., description="Stable bound identifier")
    label: str = Field(default="", description="Human-readable statement of the bound")
    params: Dict[str, float] = Field(default_factory=dict, description="Parameter point")
    test_function: Optional[str] = Field(None, description="Test function descriptor")
    lhs_sup: float = Field(..., description="Grid supremum of the left-hand side")
    lhs_sup_coarse: Optional[float] = Field(
        None, description="Supremum over every other point of the same grid, so never above lhs_sup"
    )
    refinement_change: Optional[float] = Field(
        None, description="Relative rise of the supremum when the grid density doubles"
    )
    argmax: Optional[float] = Field(None, description="Grid point attaining lhs_sup")
    rhs: float = Field(..., description="Analytic right-hand side")
    margin: float = Field(..., description="rhs - lhs_sup")
    grid_spec: str = Field(default="", description="Grid description")
    passed: bool = Field(..., alias="pass")
    note: Optional[str] = None

    @classmethod
    def build(cls, *, suite: str, bound_id: str, lhs_sup: float, rhs: float,
              tol_rel: float = DEFAULT_TOL_CERT, strict: bool = False, **kwargs: Any) -> "BoundReport":
        """Compute margin and pass flag (pass ⇔ margin ≥ -tol_rel·rhs, or > 0 when strict)."""
        margin = rhs - lhs_sup
        if not (math.isfinite(lhs_sup) and math.isfinite(rhs)):
            passed = False
        elif strict:
            passed = margin > 0.0
        else:
            passed = margin >= -tol_rel * abs(rhs)
        coarse = kwargs.get("lhs_sup_coarse")
        if coarse is not None and "refinement_change" not in kwargs:
            kwargs["refinement_change"] = refinement_change(lhs_sup, coarse)
        return cls(suite=suite, bound_id=bound_id, lhs_sup=lhs_sup, rhs=rhs,
                   margin=margin, passed=passed, **kwargs)

    @property
    def sort_key(self) -> tuple:
        return (self.suite, self.bound_id, tuple(sorted(self.params.items())), self.test_function or "")


class GridSpec(BaseModel):
    """Parameter and argument grids for the Stein-factor certification."""

    model_config = ConfigDict(extra="forbid")

    r_values: List[float] = Field(default_factory=lambda: [0.5, 1.0, 2.0, 3.0, 5.0])
    theta_values: List[float] = Field(default_factory=lambda: [-1.0, 0.0, 0.5])
    sigma_values: List[float] = Field(default_factory=lambda: [0.5, 1.0])
    mu: float = 0.0
    x_min: float = Field(default=1e-6, gt=0.0, description="Smallest |x-μ| in units of σ²/√(θ²+σ²)")
    x_max: float = Field(default=50.0, gt=0.0, description="Largest |x-μ| in the same units")
    points_per_decade: int = Field(default=64, ge=2)
    near_band_points: int = Field(default=16, ge=0, description="Extra points hugging the singular band")
    test_functions: List[str] = Field(
        default_factory=lambda: ["indicator:0", "indicator:1", "sine:1"],
        description="Test function descriptors"
    )

    @field_validator("r_values", "sigma_values")
    @classmethod
    def validate_positive(cls, v: List[float]) -> List[float]:
        """Shape and scale values must be positive."""
        if not v or any(not x > 0.0 for x in v):
            raise ValueError("r and sigma grids must be non-empty and positive")
        return v

    def params(self) -> List[VGParams]:
        return [VGParams(r=r, theta=t, sigma=s, mu=self.mu)
                for r in self.r_values for t in self.theta_values for s in self.sigma_values]

    def x_offsets(self, p: VGParams) -> np.ndarray:
        """Signed offsets x - μ, sorted, excluding the singular band."""
        scale = p.sigma ** 2 / math.hypot(p.theta, p.sigma)
        decades = math.log10(self.x_max / self.x_min)
        n = int(math.ceil(decades * self.points_per_decade)) + 1
        mags = scale * np.logspace(math.log10(self.x_min), math.log10(self.x_max), n)
        band = 1e-6 * scale
        if self.near_band_points:
            k = self.near_band_points // 2
            hug = band * 10.0 ** (np.arange(1, k + 1) / (4.0 * k))
            mags = np.concatenate([mags, hug])
        mags = np.unique(mags[mags >= band])
        return np.concatenate([-mags[::-1], mags])

    def describe(self) -> str:
        return (f"|x-mu| in [{self.x_min:g}, {self.x_max:g}]*sigma^2/sqrt(theta^2+sigma^2), "
                f"{self.points_per_decade}/decade, both signs, +{self.near_band_points} near-band")


class DistanceMethod(str, Enum):
    """How a distance was computed."""
    QUADRATURE = "quadrature"
    EMPIRICAL = "empirical"


class DistanceResult(BaseModel):
    """A Kolmogorov or Wasserstein distance with its error estimate."""

    value: float = Field(..., ge=0.0)
    method: DistanceMethod
    err_est: float = Field(default=0.0, ge=0.0)
    argmax: Optional[float] = Field(None, description="Where the Kolmogorov gap is attained")


class JumpReport(BaseModel):
    """One-sided limits of f' at μ for the indicator at μ."""

    model_config = ConfigDict(populate_by_name=True)

    params: Dict[str, float]
    samples: List[List[float]] = Field(default_factory=list, description="[h, f'(μ-h) - f'(μ+h)] rows")
    jump_numeric: float
    jump_analytic: float
    rel_gap: float
    passed: bool = Field(..., alias="pass")


class BlowupReport(BaseModel):
    """Growth of f''' near μ for scaled sines of increasing frequency."""

    model_config = ConfigDict(populate_by_name=True)

    params: Dict[str, float]
    rows: List[Dict[str, float]] = Field(default_factory=list, description="a, x, f3, ratio per frequency")
    window: List[Dict[str, float]] = Field(default_factory=list, description="f3 over x at the largest a")
    ratio: float
    passed: bool = Field(..., alias="pass")


class BoundDecomposition(BaseModel):
    """Term-by-term Wasserstein bound from cumulants."""

    form: str
    c1: float
    c2: float
    terms: Dict[str, float] = Field(default_factory=dict)
    value: float = Field(..., ge=0.0)
    negative_tilde: List[str] = Field(default_factory=list, description="Tilde terms that were negative")


class ReportBundle(BaseModel):
    """Top-level output document: version, config echo and typed records."""

    version: str
    config: Dict[str, Any] = Field(default_factory=dict)
    records: List[Dict[str, Any]] = Field(default_factory=list)
    summary: Dict[str, Any] = Field(default_factory=dict)

    @property
    def failures(self) -> int:
        return sum(1 for rec in self.records if rec.get("pass") is False)
