"""Closed-form Stein factors for the variance-gamma Stein equation.

Constants A, B, C (in the (r, θ, σ) parametrization), M, N (in the Bessel
parametrization), the density constant D, the right-hand sides of every
uniform bound on the solution and its derivatives, and the conversion of a
Wasserstein bound into a Kolmogorov bound.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from scipy.special import gamma as gamma_fn
from scipy.special import gammaln

from ..models.params import VGParams
from ..models.stein import HNorms, SteinEval, TestFunctionKind
from . import vg_dist

logger = logging.getLogger(__name__)

R1_CONDITION = 0.755


class SteinFactorError(Exception):
    """Custom exception for Stein factor operations."""
    pass


class MissingNorm(SteinFactorError):
    """A bound needs a test-function norm that was not supplied."""
    pass


class ConditionViolated(SteinFactorError):
    """The side condition of a conversion bound does not hold."""
    pass


class RegistryError(SteinFactorError, KeyError):
    """Unknown bound identifier."""
    pass


# ================================
# Constants
# ================================

def const_A(p: VGParams) -> float:
    """A = 2√π/√(2r-1)·(1+θ²/σ²)^{r/2} for r ≥ 2, 12Γ(r/2)(1+θ²/σ²) for 0 < r < 2."""
    s = 1.0 + p.skew_ratio
    if p.r >= 2.0:
        return 2.0 * math.sqrt(math.pi) / math.sqrt(2.0 * p.r - 1.0) * s ** (p.r / 2.0)
    return 12.0 * float(gamma_fn(p.r / 2.0)) * s


def const_B(p: VGParams) -> float:
    """B = √(π(r-1)/2)·(1+θ²/σ²)^{r/2-1} for r ≥ 2, and 2 for 0 < r < 2."""
    if p.r >= 2.0:
        return math.sqrt(math.pi * (p.r - 1.0) / 2.0) * (1.0 + p.skew_ratio) ** (p.r / 2.0 - 1.0)
    return 2.0


def _skew_term(p: VGParams) -> float:
    """√(2π(r+1))·|θ|/σ·(1+θ²/σ²)^{(r-1)/2}."""
    return (math.sqrt(2.0 * math.pi * (p.r + 1.0)) * abs(p.theta) / p.sigma
            * (1.0 + p.skew_ratio) ** ((p.r - 1.0) / 2.0))


def const_C(p: VGParams) -> float:
    """C = 6 + 2√2/√r + 2√(2π(r+1))|θ|/σ(1+θ²/σ²)^{(r-1)/2} + 2(√(2r)+r)A."""
    return (6.0 + 2.0 * math.sqrt(2.0) / math.sqrt(p.r) + 2.0 * _skew_term(p)
            + 2.0 * (math.sqrt(2.0 * p.r) + p.r) * const_A(p))


def const_M_N(nu: float, gamma: float) -> Tuple[float, float]:
    """Bessel-integral constants (M_{ν,γ}, N_{ν,γ}) for ν > -1/2, |γ| < 1."""
    if not nu > -0.5 or not abs(gamma) < 1.0:
        raise SteinFactorError(f"M and N need nu > -1/2 and |gamma| < 1, got nu={nu}, gamma={gamma}")
    if nu >= 0.5:
        log_common = (0.5 * math.log(math.pi) + gammaln(nu + 0.5)
                      - (nu + 0.5) * math.log1p(-gamma * gamma))
        return (math.exp(log_common - gammaln(nu + 1.0)),
                math.exp(log_common - gammaln(nu)))
    return (6.0 * float(gamma_fn(nu + 0.5)) / (1.0 - abs(gamma)),
            1.0 / (1.0 - abs(gamma)))


def const_D(p: VGParams, exact: bool = False) -> float:
    """D = sup √(2p(x)); the density sup bound, or the value at the mode when ``exact``.

    Raises:
        Unbounded: For r ≤ 1
    """
    if exact:
        if p.r <= 1.0:
            raise vg_dist.Unbounded(f"Density of {p.label()} is unbounded (r <= 1)")
        return math.sqrt(2.0 * float(vg_dist.pdf(p, vg_dist.mode(p))))
    return math.sqrt(2.0 * vg_dist.density_sup_bound(p))


def gamma_ratio_bounds(r: float) -> Tuple[float, float, float]:
    """(√(2/r), Γ(r/2)/Γ((r+1)/2), √(2/(r-1/2))) for r > 1; the middle lies strictly between."""
    if not r > 1.0:
        raise SteinFactorError(f"gamma ratio bounds need r > 1, got {r}")
    ratio = math.exp(gammaln(r / 2.0) - gammaln((r + 1.0) / 2.0))
    return math.sqrt(2.0 / r), ratio, math.sqrt(2.0 / (r - 0.5))


# ================================
# Bound registry
# ================================

@dataclass(frozen=True)
class BoundSpec:
    """One uniform bound: what it controls and which norms it needs."""
    bound_id: str
    label: str
    norms: Tuple[str, ...]
    order: int
    weighted: bool
    families: Tuple[TestFunctionKind, ...] = field(default=())

    def lhs(self, ev: SteinEval, mu: float) -> Optional[float]:
        """|f^{(k)}(x)|, or |(x-μ)f^{(k)}(x)| for weighted bounds; None if not computed."""
        value = (ev.f, ev.f1, ev.f2, ev.f3)[self.order]
        if value is None:
            return None
        return abs((ev.x - mu) * value) if self.weighted else abs(value)

    def as_dict(self) -> Dict[str, object]:
        return {"bound_id": self.bound_id, "label": self.label, "norms": list(self.norms),
                "order": self.order, "weighted": self.weighted,
                "families": [k.value for k in self.families]}


_BOUNDED = (TestFunctionKind.INDICATOR, TestFunctionKind.SCALED_SINE)
_LIPSCHITZ = (TestFunctionKind.SCALED_SINE, TestFunctionKind.IDENTITY)

BOUND_REGISTRY: Dict[str, BoundSpec] = {
    spec.bound_id: spec for spec in (
        BoundSpec("DGV_F", "||f|| <= ||h~||(2/r + A)/sqrt(theta^2+sigma^2)",
                  ("h_tilde",), 0, False, _BOUNDED),
        BoundSpec("DGV_F1", "||f'|| <= ||h~||(2/r + A)/sigma^2",
                  ("h_tilde",), 1, False, _BOUNDED),
        BoundSpec("T31_XF", "||(x-mu)f|| <= (1 + 6/r + B)||h~||",
                  ("h_tilde",), 0, True, _BOUNDED),
        BoundSpec("T31_XF1_K", "||(x-mu)f'|| <= 2 sqrt(theta^2+sigma^2)/sigma^2 (1 + 6/r + B)||h~||",
                  ("h_tilde",), 1, True, _BOUNDED),
        BoundSpec("T31_XF2_K", "||(x-mu)f''|| <= {5 + 2rA + (5 + 4theta^2/sigma^2)(1 + 6/r + B)}||h~||/sigma^2",
                  ("h_tilde",), 2, True, _BOUNDED),
        BoundSpec("T31_F", "||f|| <= {4 + 2sqrt2/sqrt r + sqrt(2pi(r+1))|theta|/sigma(1+theta^2/sigma^2)^((r-1)/2)"
                           " + (sqrt(2r) + r)A}||h'||",
                  ("h1",), 0, False, _LIPSCHITZ),
        BoundSpec("T31_F1", "||f'|| <= sqrt(theta^2+sigma^2)/sigma^2 C ||h'||",
                  ("h1",), 1, False, _LIPSCHITZ),
        BoundSpec("T31_F2", "||f''|| <= (2/(r+1) + A_{r+1})(1 + (2 + theta^2/sigma^2)C)||h'||/sigma^2",
                  ("h1",), 2, False, _LIPSCHITZ),
        BoundSpec("T31_XF1_W", "||(x-mu)f'|| <= (1 + 6/(r+1) + B_{r+1})(1 + (2 + theta^2/sigma^2)C)||h'||",
                  ("h1",), 1, True, _LIPSCHITZ),
        BoundSpec("T31_XF2_W", "||(x-mu)f''|| <= 2 sqrt(theta^2+sigma^2)/sigma^2 (1 + 6/(r+1) + B_{r+1})"
                               "(1 + (2 + theta^2/sigma^2)C)||h'||",
                  ("h1",), 2, True, _LIPSCHITZ),
        BoundSpec("T31_XF3_W", "||(x-mu)f'''|| <= {5 + 2(r+1)A_{r+1} + (5 + 4theta^2/sigma^2)(1 + 6/(r+1) + B_{r+1})}"
                               "(1 + (2 + theta^2/sigma^2)C)||h'||/sigma^2",
                  ("h1",), 3, True, _LIPSCHITZ),
        BoundSpec("C32_F3", "||f'''|| <= (2/(r+2) + A_{r+2})(1 + (2 + theta^2/sigma^2)C_{r+1})"
                            "{||h''|| + [sqrt(theta^2+sigma^2)C + |theta|(2/(r+1) + A_{r+1})"
                            "(1 + (2 + theta^2/sigma^2)C)]||h'||}/sigma^4",
                  ("h2", "h1"), 3, False, (TestFunctionKind.SCALED_SINE,)),
    )
}


def get_bound(bound_id: str) -> BoundSpec:
    """Look up a registered bound.

    Raises:
        RegistryError: For unknown identifiers
    """
    try:
        return BOUND_REGISTRY[bound_id]
    except KeyError:
        raise RegistryError(f"Unknown bound id '{bound_id}' (known: {', '.join(BOUND_REGISTRY)})") from None


def registry_table() -> List[Dict[str, object]]:
    """The registry as plain records for reports."""
    return [spec.as_dict() for spec in BOUND_REGISTRY.values()]


def _norm(norms: HNorms, name: str, bound_id: str) -> float:
    value = getattr(norms, name)
    if value is None:
        raise MissingNorm(f"Bound {bound_id} needs {name}, which was not supplied")
    return value


def _iterated(p: VGParams) -> float:
    """1 + (2 + θ²/σ²)C_{r,θ,σ}, the factor carried by every Lipschitz-derivative bound."""
    return 1.0 + (2.0 + p.skew_ratio) * const_C(p)


def bound_rhs(bound_id: str, p: VGParams, norms: HNorms) -> float:
    """Right-hand side of a registered bound at p for the supplied norms.

    Raises:
        RegistryError: For unknown identifiers
        MissingNorm: If a required norm is None
    """
    spec = get_bound(bound_id)
    values = {name: _norm(norms, name, bound_id) for name in spec.norms}
    s2 = p.sigma ** 2
    root = math.hypot(p.theta, p.sigma)
    r = p.r
    p1 = p.shifted_shape(1.0)

    if bound_id in ("DGV_F", "DGV_F1", "T31_XF", "T31_XF1_K", "T31_XF2_K"):
        h = values["h_tilde"]
        base = 2.0 / r + const_A(p)
        weighted = 1.0 + 6.0 / r + const_B(p)
        factors = {
            "DGV_F": base / root,
            "DGV_F1": base / s2,
            "T31_XF": weighted,
            "T31_XF1_K": 2.0 * root / s2 * weighted,
            "T31_XF2_K": (5.0 + 2.0 * r * const_A(p) + (5.0 + 4.0 * p.skew_ratio) * weighted) / s2,
        }
        return factors[bound_id] * h

    h1 = values["h1"]
    if bound_id == "T31_F":
        return (4.0 + 2.0 * math.sqrt(2.0) / math.sqrt(r) + _skew_term(p)
                + (math.sqrt(2.0 * r) + r) * const_A(p)) * h1
    if bound_id == "T31_F1":
        return root / s2 * const_C(p) * h1

    weighted1 = 1.0 + 6.0 / (r + 1.0) + const_B(p1)
    f2_factor = (2.0 / (r + 1.0) + const_A(p1)) * _iterated(p)
    if bound_id == "T31_F2":
        return f2_factor / s2 * h1
    if bound_id == "T31_XF1_W":
        return weighted1 * _iterated(p) * h1
    if bound_id == "T31_XF2_W":
        return 2.0 * root / s2 * weighted1 * _iterated(p) * h1
    if bound_id == "T31_XF3_W":
        return ((5.0 + 2.0 * (r + 1.0) * const_A(p1) + (5.0 + 4.0 * p.skew_ratio) * weighted1)
                * _iterated(p) / s2 * h1)

    # C32_F3
    p2 = p.shifted_shape(2.0)
    outer = (2.0 / (r + 2.0) + const_A(p2)) * _iterated(p1) / s2 ** 2
    inner = values["h2"] + (root * const_C(p) + abs(p.theta) * f2_factor) * h1
    return outer * inner


# ================================
# Wasserstein to Kolmogorov
# ================================

def r1_condition(p: VGParams, dw: float) -> float:
    """(θ²+σ²)σ^{-3}·d_W, which must stay below 0.755 for the r = 1 conversion."""
    return (p.theta ** 2 + p.sigma ** 2) / p.sigma ** 3 * dw


def dk_from_dw(p: VGParams, dw: float) -> float:
    """Kolmogorov bound implied by a Wasserstein distance dw.

    D√dw for r > 1, the logarithmically corrected form for r = 1 and
    2(Γ((1-r)/2)/(√π 2^{r-1}Γ(r/2)))^{1/(r+1)}(dw/σ)^{r/(r+1)} for 0 < r < 1.

    Raises:
        ValueError: For negative dw
        ConditionViolated: For r = 1 when (θ²+σ²)σ^{-3}dw ≥ 0.755
    """
    if dw < 0.0 or not math.isfinite(dw):
        raise ValueError(f"dw must be a finite non-negative number, got {dw}")
    if p.r > 1.0:
        return const_D(p) * math.sqrt(dw)
    if p.r == 1.0:
        c = r1_condition(p, dw)
        if not c < R1_CONDITION:
            raise ConditionViolated(
                f"r=1 conversion needs (theta^2+sigma^2)sigma^-3 dw < {R1_CONDITION}, got {c:.6g}"
            )
        if dw == 0.0:
            return 0.0
        return ((5.0 + math.log(6.0 / math.pi) - math.log(c))
                * math.sqrt(dw / (6.0 * math.pi * p.sigma)))
    constant = math.exp(gammaln((1.0 - p.r) / 2.0) - 0.5 * math.log(math.pi)
                        - (p.r - 1.0) * math.log(2.0) - gammaln(p.r / 2.0))
    return 2.0 * constant ** (1.0 / (p.r + 1.0)) * (dw / p.sigma) ** (p.r / (p.r + 1.0))
