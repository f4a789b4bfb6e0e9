"""Six-moment bounds for variance-gamma approximation.

Given the first six cumulants of a centered variable F, bound the Wasserstein
and Kolmogorov distances between F and VG_c(r, θ, σ). The bound is driven by
a degree-six cumulant polynomial G that vanishes on the target law itself;
its tilde form writes G in terms of the differences κ̃_k = κ_k(F) - κ_k(Z).
"""

import logging
import math
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np
from scipy import stats

from ..models.params import CumulantVector, SixMomentInput, VGParams
from ..models.report import BoundDecomposition
from . import stein_factors, vg_dist
from .vg_dist import EmptySampleError

logger = logging.getLogger(__name__)

SNAP_REL = 1e-12
AGREEMENT_REL = 1e-10
FORMS = ("raw", "tilde")

LAPLACE_C1_STATED = 134.978
NORMAL_LIMIT_C1_STATED = 26.0
NORMAL_LIMIT_C_STATED = 6.0


class MomentBoundError(Exception):
    """Custom exception for six-moment bound operations."""
    pass


class NegativeVariance(MomentBoundError):
    """G is negative beyond rounding, so the cumulants are inconsistent."""
    pass


class InvalidCumulants(MomentBoundError, ValueError):
    """Cumulants that no bound can be computed from (κ2 ≤ 0, NaN, ...)."""
    pass


class CumulantIdentityError(MomentBoundError):
    """The raw and tilde evaluations of G disagree."""
    pass


# ================================
# Constants
# ================================

def c1_c2(p: VGParams) -> Tuple[float, float]:
    """Return (C1, C2) for the target VG_c(r, θ, σ).

    C1 = σ^{-2}(2/(r+1) + A_{r+1})(1 + (2 + θ²/σ²)C_r) and
    C2 = √(θ²+σ²)σ^{-2}·C_r.
    """
    s2 = p.sigma ** 2
    c = stein_factors.const_C(p)
    a_next = stein_factors.const_A(p.shifted_shape(1.0))
    c1 = (2.0 / (p.r + 1.0) + a_next) * (1.0 + (2.0 + p.skew_ratio) * c) / s2
    c2 = math.hypot(p.theta, p.sigma) / s2 * c
    return c1, c2


# ================================
# Cumulant polynomial
# ================================

def _check_kappa(kappa: CumulantVector) -> None:
    values = kappa.as_list()
    if not all(math.isfinite(v) for v in values):
        raise InvalidCumulants(f"Cumulants must be finite, got {values}")
    if not kappa.kappa2 > 0.0:
        raise InvalidCumulants(f"kappa2 must be positive, got {kappa.kappa2}")


def _raw_terms(p: VGParams, kappa: CumulantVector) -> List[float]:
    r, t, s2 = p.r, p.theta, p.sigma ** 2
    k2, k3, k4, k5, k6 = (kappa[k] for k in range(2, 7))
    return [
        k6 / 120.0,
        -t * k5 / 6.0,
        (2.0 * t * t - s2) * k4 / 3.0,
        (2.0 - r) * t * s2 * k3,
        k3 * k3 / 4.0,
        -2.0 * t * k2 * k3,
        (s2 * s2 + 4.0 * r * t * t * s2) * k2,
        4.0 * t * t * k2 * k2,
        (r * t * s2) ** 2,
    ]


def g_raw(p: VGParams, kappa: CumulantVector) -> Tuple[float, float]:
    """G from the cumulants of F directly, with the sum of absolute terms as its scale."""
    terms = _raw_terms(p, kappa)
    return math.fsum(terms), math.fsum(abs(x) for x in terms)


def _tilde_terms(p: VGParams, kappa: CumulantVector) -> Dict[str, Tuple[float, float]]:
    """Tilde-form terms as name -> (coefficient, tilde quantity); G = Σ coef·quantity.

    κ2(Z), κ3(Z) always come from the closed-form cumulants of the target.
    """
    target = vg_dist.cumulants_centered(p)
    r, t, s2 = p.r, p.theta, p.sigma ** 2
    d = dict(zip(range(1, 7), kappa.minus(target)))
    cross = kappa.kappa2 * kappa.kappa3 - target.kappa2 * target.kappa3
    return {
        "kappa6": (1.0 / 120.0, d[6]),
        "kappa5": (-t / 6.0, d[5]),
        "kappa4": ((2.0 * t * t - s2) / 3.0, d[4]),
        "kappa3": ((2.0 - r) * t * s2 + target.kappa3 / 2.0, d[3]),
        "kappa3_sq": (0.25, d[3] * d[3]),
        "kappa2_kappa3": (-2.0 * t, cross),
        "kappa2": (s2 * s2 + 4.0 * r * t * t * s2 + 8.0 * t * t * target.kappa2, d[2]),
        "kappa2_sq": (4.0 * t * t, d[2] * d[2]),
    }


def g_tilde(p: VGParams, kappa: CumulantVector) -> float:
    """G evaluated through the differences κ̃_k; vanishes identically at κ = κ(Z)."""
    return math.fsum(coef * q for coef, q in _tilde_terms(p, kappa).values())


def cumulant_identity_G(p: VGParams, kappa: CumulantVector) -> float:
    """Evaluate G for target VG_c(r, θ, σ) and cumulants of F.

    Both the raw polynomial and its tilde form are computed; they must agree to
    1e-10 relative to the size of the raw terms. Tiny values within rounding
    of zero are returned as 0.

    Raises:
        CumulantIdentityError: If the two evaluations disagree
    """
    raw, scale = g_raw(p, kappa)
    tilde = g_tilde(p, kappa)
    if abs(raw - tilde) > AGREEMENT_REL * max(scale, 1e-300):
        raise CumulantIdentityError(
            f"G identity mismatch for {p.label()}: raw={raw:.16g}, tilde={tilde:.16g}, scale={scale:.6g}"
        )
    if abs(raw) <= SNAP_REL * scale:
        return 0.0
    return raw


# ================================
# Bounds
# ================================

def bound_decomposition(data: SixMomentInput, form: str = "raw") -> BoundDecomposition:
    """Term-by-term Wasserstein bound for F against the target VG_c law.

    ``raw`` gives C1·√G + C2|κ̃2|. ``tilde`` splits √G into one square root per
    tilde term, taking absolute values under each root; terms whose tilde
    quantity was negative are listed in ``negative_tilde``.

    Raises:
        InvalidCumulants: For κ2 ≤ 0 or non-finite cumulants
        NegativeVariance: If the raw G is negative beyond rounding
        ValueError: For an unknown form
    """
    if form not in FORMS:
        raise ValueError(f"Unknown bound form '{form}' (choose from {', '.join(FORMS)})")
    _check_kappa(data.kappa)
    p = data.target
    c1, c2 = c1_c2(p)
    kappa2_term = c2 * abs(data.kappa.kappa2 - vg_dist.cumulants_centered(p).kappa2)

    if form == "raw":
        _, scale = g_raw(p, data.kappa)
        g = cumulant_identity_G(p, data.kappa)
        if g < -SNAP_REL * max(1.0, scale):
            raise NegativeVariance(f"G = {g:.6g} < 0 for {p.label()}; cumulants are inconsistent")
        root = c1 * math.sqrt(max(g, 0.0))
        return BoundDecomposition(form=form, c1=c1, c2=c2,
                                  terms={"c1_sqrt_G": root, "c2_kappa2": kappa2_term},
                                  value=root + kappa2_term)

    terms: Dict[str, float] = {}
    negative: List[str] = []
    for name, (coef, q) in _tilde_terms(p, data.kappa).items():
        if q < 0.0 and name not in ("kappa3_sq", "kappa2_sq"):
            negative.append(name)
        terms[name] = c1 * math.sqrt(abs(coef)) * math.sqrt(abs(q))
    if negative:
        logger.warning(f"Negative tilde quantities for {p.label()}: {', '.join(negative)}")
    terms["c2_kappa2"] = kappa2_term
    return BoundDecomposition(form=form, c1=c1, c2=c2, terms=terms,
                              value=math.fsum(terms.values()), negative_tilde=negative)


def wasserstein_bound(data: SixMomentInput, form: str = "raw") -> float:
    """Upper bound on d_W(F, VG_c(r, θ, σ)) from six cumulants."""
    return bound_decomposition(data, form).value


def kolmogorov_bound(data: SixMomentInput, form: str = "raw") -> float:
    """Kolmogorov bound obtained by converting the Wasserstein bound.

    Raises:
        ConditionViolated: For r = 1 when the Wasserstein bound is too large
    """
    return stein_factors.dk_from_dw(data.target, wasserstein_bound(data, form))


# ================================
# Estimation
# ================================

def estimate_cumulants(sample: Sequence[float]) -> CumulantVector:
    """Estimate κ1..κ6 from a sample with unbiased k-statistics.

    κ2..κ4 come from ``scipy.stats.kstat``. κ5 and κ6 are Fisher's k5 and k6
    written in the sample central moments m_j = S_j / n of the centered data:

        k5 = n³[(n+5)m5 - 10(n-1)m2m3] / ((n-1)(n-2)(n-3)(n-4))
        k6 = n²[(n+1)(n²+15n-4)m6 - 15(n-1)²(n+4)m2m4 - 10(n-1)(n²-n+4)m3²
                + 30n(n-1)(n-2)m2³] / ((n-1)(n-2)(n-3)(n-4)(n-5))

    Each estimate is unbiased for its cumulant; the products of estimates that
    enter the six-moment bound are not.

    Raises:
        EmptySampleError: For an empty sample
        InvalidCumulants: For fewer than six observations or non-finite values
    """
    x = np.asarray(sample, dtype=float).ravel()
    if x.size == 0:
        raise EmptySampleError("Cannot estimate cumulants from an empty sample")
    if x.size < 6:
        raise InvalidCumulants(f"Need at least 6 observations, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise InvalidCumulants("Sample contains non-finite values")

    mean = float(np.mean(x))
    if np.ptp(x) == 0.0:
        return CumulantVector(kappa1=mean, kappa2=0.0)

    centered = x - mean
    k2, k3, k4 = (float(stats.kstat(centered, n)) for n in (2, 3, 4))
    m2, m3, m4, m5, m6 = (float(np.mean(centered ** k)) for k in range(2, 7))
    n = float(x.size)
    k5 = (n ** 3 * ((n + 5.0) * m5 - 10.0 * (n - 1.0) * m2 * m3)
          / ((n - 1.0) * (n - 2.0) * (n - 3.0) * (n - 4.0)))
    k6 = (n ** 2 * ((n + 1.0) * (n * n + 15.0 * n - 4.0) * m6
                    - 15.0 * (n - 1.0) ** 2 * (n + 4.0) * m2 * m4
                    - 10.0 * (n - 1.0) * (n * n - n + 4.0) * m3 * m3
                    + 30.0 * n * (n - 1.0) * (n - 2.0) * m2 ** 3)
          / ((n - 1.0) * (n - 2.0) * (n - 3.0) * (n - 4.0) * (n - 5.0)))
    logger.debug(f"Estimated cumulants from n={x.size}: k2={k2:.6g}, k3={k3:.6g}, k4={k4:.6g}, "
                 f"k5={k5:.6g}, k6={k6:.6g}")
    return CumulantVector(kappa1=mean, kappa2=k2, kappa3=k3, kappa4=k4, kappa5=k5, kappa6=k6)


def six_moment_input(target: VGParams, kappa: CumulantVector) -> SixMomentInput:
    """Pair cumulants of F with the centered target, recentering κ1 to zero."""
    return SixMomentInput(target=target, kappa=kappa.model_copy(update={"kappa1": 0.0}))


# ================================
# Published constants
# ================================

def stated_constant_checks(r_values: Sequence[float] = (10.0, 100.0, 1000.0, 10000.0)) -> List[Dict[str, Any]]:
    """Compare published values of C1 and C with the displayed formulas.

    The Laplace case VG_c(2, 0, 1) is stated as C1 = 134.978; the formula gives
    about 112.03. The normal limit is stated as C_{r,0,1/√r} → 6 and C1 = 26,
    while the formula grows with r. Both sides are reported for the record.
    """
    laplace = VGParams.centered(2.0, 0.0, 1.0)
    c1_laplace, _ = c1_c2(laplace)
    records: List[Dict[str, Any]] = [{
        "name": "laplace_c1",
        "params": laplace.model_dump(),
        "computed": c1_laplace,
        "stated": LAPLACE_C1_STATED,
        "rel_gap": abs(c1_laplace - LAPLACE_C1_STATED) / LAPLACE_C1_STATED,
    }]
    for r in r_values:
        p = VGParams.centered(r, 0.0, 1.0 / math.sqrt(r))
        c = stein_factors.const_C(p)
        c1 = c1_c2(p)[0] * p.sigma ** 2
        records.append({
            "name": "normal_limit",
            "params": p.model_dump(),
            "computed_c": c,
            "stated_c_limit": NORMAL_LIMIT_C_STATED,
            "computed_c1_sigma2": c1,
            "stated_c1": NORMAL_LIMIT_C1_STATED,
        })
    return records
