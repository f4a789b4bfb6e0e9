"""Parameter models for variance-gamma laws and their cumulants."""

import math
from typing import Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class VGParams(BaseModel):
    """The four-parameter variance-gamma law VG(r, θ, σ, μ).

    Immutable and hashable so it can key caches and parallel task tables.
    """

    model_config = ConfigDict(frozen=True)

    r: float = Field(..., gt=0.0, description="Shape parameter (dimensionless)")
    theta: float = Field(default=0.0, description="Skewness parameter (units of x)")
    sigma: float = Field(..., gt=0.0, description="Scale parameter (units of x)")
    mu: float = Field(default=0.0, description="Location parameter (units of x)")

    @field_validator("r", "theta", "sigma", "mu")
    @classmethod
    def validate_finite(cls, v: float) -> float:
        """Reject NaN and infinite parameters."""
        if not math.isfinite(v):
            raise ValueError("VG parameters must be finite")
        return float(v)

    @classmethod
    def centered(cls, r: float, theta: float, sigma: float) -> "VGParams":
        """The centered law VG_c(r, θ, σ) = VG(r, θ, σ, -rθ) with mean zero."""
        return cls(r=r, theta=theta, sigma=sigma, mu=-r * theta)

    @classmethod
    def from_string(cls, text: str) -> "VGParams":
        """Parse ``"r,theta,sigma[,mu]"``."""
        parts = [p.strip() for p in text.split(",") if p.strip()]
        if len(parts) not in (3, 4):
            raise ValueError(f"Expected 'r,theta,sigma[,mu]', got '{text}'")
        values = [float(p) for p in parts]
        return cls(r=values[0], theta=values[1], sigma=values[2],
                   mu=values[3] if len(values) == 4 else 0.0)

    def reparam(self) -> "ReparamVG":
        """Return the (ν, α, β, γ) parametrization used by the Bessel-integral code."""
        root = math.hypot(self.theta, self.sigma)
        alpha = root / self.sigma ** 2
        beta = self.theta / self.sigma ** 2
        return ReparamVG(nu=(self.r - 1.0) / 2.0, alpha=alpha, beta=beta, gamma=beta / alpha)

    def shifted_shape(self, k: float) -> "VGParams":
        """Same law with shape r + k (A_{r+1}, C_{r+1}, ...)."""
        return self.model_copy(update={"r": self.r + k})

    @property
    def skew_ratio(self) -> float:
        """θ²/σ², the quantity every Stein-factor constant depends on."""
        return (self.theta / self.sigma) ** 2

    def as_tuple(self) -> Tuple[float, float, float, float]:
        return (self.r, self.theta, self.sigma, self.mu)

    def label(self) -> str:
        return f"VG({self.r:g},{self.theta:g},{self.sigma:g},{self.mu:g})"


class ReparamVG(BaseModel):
    """Bessel-side parametrization ν=(r-1)/2, α=√(θ²+σ²)/σ², β=θ/σ², γ=β/α."""

    model_config = ConfigDict(frozen=True)

    nu: float = Field(..., gt=-0.5)
    alpha: float = Field(..., gt=0.0)
    beta: float
    gamma: float = Field(..., gt=-1.0, lt=1.0)

    @model_validator(mode="after")
    def validate_decay(self) -> "ReparamVG":
        """Ensure α > |β| so both exponential kernels decay."""
        if not self.alpha > abs(self.beta):
            raise ValueError("alpha must exceed |beta|")
        return self


class CumulantVector(BaseModel):
    """Cumulants κ1..κ6 of a real random variable."""

    model_config = ConfigDict(frozen=True)

    kappa1: float = 0.0
    kappa2: float = Field(..., description="Variance; zero only for a degenerate law")
    kappa3: float = 0.0
    kappa4: float = 0.0
    kappa5: float = 0.0
    kappa6: float = 0.0

    @field_validator("kappa2")
    @classmethod
    def validate_variance(cls, v: float) -> float:
        """Variances are non-negative; bounds additionally require κ2 > 0."""
        if not v >= 0.0:
            raise ValueError("kappa2 must be non-negative")
        return v

    def as_list(self) -> list:
        return [self.kappa1, self.kappa2, self.kappa3, self.kappa4, self.kappa5, self.kappa6]

    def __getitem__(self, k: int) -> float:
        """1-based access, ``kappa[3]`` is κ3."""
        if not 1 <= k <= 6:
            raise IndexError(f"cumulant order must be in 1..6, got {k}")
        return self.as_list()[k - 1]

    def minus(self, other: "CumulantVector") -> list:
        """Differences κ_k - κ_k(other) for k = 1..6 (unvalidated list)."""
        return [a - b for a, b in zip(self.as_list(), other.as_list())]


class SixMomentInput(BaseModel):
    """Target VG_c law and the cumulants of the approximating variable F."""

    target: VGParams
    kappa: CumulantVector
    note: Optional[str] = Field(None, description="Free-form provenance of the cumulants")

    @field_validator("target")
    @classmethod
    def center_target(cls, v: VGParams) -> VGParams:
        """Force μ = -rθ so the target is VG_c(r, θ, σ)."""
        return VGParams.centered(v.r, v.theta, v.sigma)

    @field_validator("kappa")
    @classmethod
    def validate_mean_zero(cls, v: CumulantVector) -> CumulantVector:
        """The six-moment bound requires E F = 0."""
        if abs(v.kappa1) > 1e-12:
            raise ValueError("kappa1 must be 0 (E F = 0)")
        return v
