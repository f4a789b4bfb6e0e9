"""Configuration models for certification runs and CLI invocations."""

from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator

from .params import VGParams
from .report import GridSpec

SUITES = ("dist", "thm31", "appA", "appB", "jump", "blowup", "prop35")


def _laplace() -> VGParams:
    return VGParams(r=2.0, theta=0.0, sigma=1.0, mu=0.0)


def _jump_points() -> List[VGParams]:
    return [
        VGParams(r=1.0, theta=0.0, sigma=1.0),
        VGParams(r=2.0, theta=0.0, sigma=1.0),
        VGParams(r=2.0, theta=1.0, sigma=1.0),
        VGParams(r=3.0, theta=-0.5, sigma=2.0),
        VGParams(r=5.0, theta=0.3, sigma=0.7),
    ]


class CertifyConfig(BaseModel):
    """Grids, tolerances and parallelism for a certification run."""

    model_config = ConfigDict(extra="forbid")

    suites: List[str] = Field(default_factory=lambda: ["all"], description="Suites to run")
    grid: GridSpec = Field(default_factory=GridSpec, description="Stein-factor grid")
    bound_ids: Optional[List[str]] = Field(None, description="Restrict thm31 to these bound ids")

    # Appendix grids
    appendix_nu: List[float] = Field(default_factory=lambda: [-0.49, -0.25, 0.0, 0.5, 1.0, 2.0, 5.0])
    appendix_gamma: List[float] = Field(default_factory=lambda: [-0.9, -0.5, 0.0, 0.5, 0.9])
    appendix_x_min: float = Field(default=1e-6, gt=0.0)
    appendix_x_max: float = Field(default=50.0, gt=0.0)
    appendix_points_per_decade: int = Field(default=8, ge=1)

    # Distribution checks
    dist_r_values: List[float] = Field(default_factory=lambda: [0.5, 1.0, 2.0, 3.0, 4.0, 7.0])
    dist_theta_values: List[float] = Field(default_factory=lambda: [-2.0, 0.0, 1.0])
    dist_sigma_values: List[float] = Field(default_factory=lambda: [0.5, 1.0, 2.0])

    # Jump and blow-up
    jump_params: List[VGParams] = Field(default_factory=_jump_points)
    blowup_params: VGParams = Field(default_factory=_laplace)
    blowup_frequencies: List[float] = Field(default_factory=lambda: [1e2, 1e3, 1e4])

    # Metric conversion
    prop35_pairs: int = Field(default=50, ge=0)
    prop35_r1_pairs: int = Field(default=10, ge=0)

    # Tolerances and execution
    tol_cert_rel: float = Field(default=1e-8, ge=0.0)
    threads: int = Field(default=1, ge=1)
    seed: int = Field(default=20240601)

    @field_validator("suites")
    @classmethod
    def validate_suites(cls, v: List[str]) -> List[str]:
        """Expand 'all' and reject unknown suite names."""
        expanded: List[str] = []
        for name in v:
            if name == "all":
                expanded.extend(SUITES)
            elif name in SUITES:
                expanded.append(name)
            else:
                raise ValueError(f"Unknown suite '{name}' (choose from all, {', '.join(SUITES)})")
        return list(dict.fromkeys(expanded))


class CliConfig(BaseModel):
    """Fully-resolved CLI invocation echoed into every output header."""

    subcommand: str
    options: Dict[str, Any] = Field(default_factory=dict)
    output_format: str = Field(default="json", pattern="^(json|csv)$")
    seed: Optional[int] = None
