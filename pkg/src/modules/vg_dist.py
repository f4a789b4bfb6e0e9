"""The variance-gamma distribution VG(r, θ, σ, μ).

Density, distribution function, mode, moments and cumulants, density bounds
and sampling. With ν = (r-1)/2, α = √(θ²+σ²)/σ² and β = θ/σ² the density is

    p(x) = e^{β(x-μ)} (|x-μ| / (2√(θ²+σ²)))^ν K_ν(α|x-μ|) / (σ√π Γ(r/2)),

which is evaluated in log space from scaled Bessel values.
"""

import logging
import math
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import brentq
from scipy.special import gammaln, kve

from ..models.params import CumulantVector, VGParams
from ..utils.quadrature import (
    QuadResult, geometric_edges, integrate, merge_edges, truncation_point,
)
from .bessel import ConvergenceError

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

TAIL_TOL = 1e-14


class VGDistributionError(Exception):
    """Custom exception for variance-gamma distribution operations."""
    pass


class SingularAtMu(VGDistributionError):
    """The density is infinite at μ when r ≤ 1."""
    pass


class Unbounded(VGDistributionError):
    """The density has no finite supremum when r ≤ 1."""
    pass


class EmptySampleError(VGDistributionError, ValueError):
    """An operation that needs data received none."""
    pass


def _log_norm(p: VGParams) -> float:
    root = math.hypot(p.theta, p.sigma)
    nu = (p.r - 1.0) / 2.0
    return (-math.log(p.sigma * math.sqrt(math.pi)) - gammaln(p.r / 2.0)
            - nu * math.log(2.0 * root))


def _log_k_small(nu: float, y: np.ndarray) -> np.ndarray:
    """Leading small-argument log K_ν(y), used only where kve overflows."""
    a = abs(nu)
    if a == 0.0:
        return np.log(-np.log(y))
    return (a - 1.0) * math.log(2.0) + gammaln(a) - a * np.log(y)


def density_at_mu(p: VGParams) -> float:
    """Limit of the density at μ for r > 1.

    Raises:
        SingularAtMu: For r ≤ 1
    """
    if p.r <= 1.0:
        raise SingularAtMu(f"Density of {p.label()} is infinite at mu (r <= 1)")
    return math.exp(gammaln((p.r - 1.0) / 2.0) - gammaln(p.r / 2.0)
                    - math.log(2.0 * p.sigma * math.sqrt(math.pi))
                    - (p.r - 1.0) / 2.0 * math.log1p(p.skew_ratio))


def log_pdf(p: VGParams, x: ArrayLike) -> ArrayLike:
    """Log density; accepts scalars or arrays.

    Raises:
        SingularAtMu: If x = μ and r ≤ 1
    """
    rp = p.reparam()
    xa = np.asarray(x, dtype=float)
    d = np.atleast_1d(xa - p.mu)
    out = np.empty_like(d)

    at_mu = d == 0.0
    if np.any(at_mu):
        out[at_mu] = math.log(density_at_mu(p))

    nz = ~at_mu
    if np.any(nz):
        s = np.abs(d[nz])
        y = rp.alpha * s
        with np.errstate(divide="ignore", over="ignore"):
            log_k = np.log(kve(abs(rp.nu), y)) - y
        bad = ~np.isfinite(log_k)
        if np.any(bad):
            log_k[bad] = _log_k_small(rp.nu, y[bad])
        out[nz] = _log_norm(p) + rp.beta * d[nz] + rp.nu * np.log(s) + log_k

    return float(out[0]) if xa.ndim == 0 else out.reshape(xa.shape)


def pdf(p: VGParams, x: ArrayLike) -> ArrayLike:
    """Density p(x); see ``log_pdf`` for errors."""
    return np.exp(log_pdf(p, x)) if np.ndim(x) else math.exp(log_pdf(p, x))


def near_mu_asymptote(p: VGParams, x: float) -> float:
    """Leading term of the density as x → μ, for every shape regime."""
    s = abs(x - p.mu)
    if p.r > 1.0:
        return density_at_mu(p)
    if s == 0.0:
        raise SingularAtMu(f"Density of {p.label()} is infinite at mu (r <= 1)")
    if p.r == 1.0:
        return -math.log(s) / (math.pi * p.sigma)
    return math.exp(gammaln((1.0 - p.r) / 2.0) - p.r * math.log(2.0 * p.sigma)
                    - 0.5 * math.log(math.pi) - gammaln(p.r / 2.0)
                    + (p.r - 1.0) * math.log(s))


def tail_asymptote(p: VGParams, x: float) -> float:
    """Large-|x-μ| equivalent of the density.

    |x-μ|^{r/2-1} exp(θ(x-μ)/σ² - √(θ²+σ²)|x-μ|/σ²) / (2^{r/2}(θ²+σ²)^{r/4}Γ(r/2))
    """
    d = x - p.mu
    if d == 0.0:
        raise VGDistributionError("Tail asymptote is undefined at mu")
    root2 = p.theta ** 2 + p.sigma ** 2
    log_val = ((p.r / 2.0 - 1.0) * math.log(abs(d))
               + (p.theta * d - math.sqrt(root2) * abs(d)) / p.sigma ** 2
               - p.r / 2.0 * math.log(2.0) - p.r / 4.0 * math.log(root2) - gammaln(p.r / 2.0))
    return math.exp(log_val)


# ================================
# Distribution function
# ================================

def _side_density(p: VGParams, side: float):
    """s ↦ p(μ + side·s) for s > 0 as a fast scalar function."""
    rp = p.reparam()
    log_norm = _log_norm(p)
    beta = side * rp.beta
    nu = rp.nu
    order = abs(nu)
    alpha = rp.alpha

    def dens(s: float) -> float:
        if s <= 0.0:
            return 0.0
        y = alpha * s
        k = float(kve(order, y))
        if not math.isfinite(k) or k <= 0.0:
            log_k = float(_log_k_small(nu, np.array([y]))[0]) + y
        else:
            log_k = math.log(k)
        return math.exp(log_norm + beta * s + nu * math.log(s) + log_k - y)

    return dens


def _side_mass(p: VGParams, side: float, lo: float, hi: float,
               weight: Optional[Callable[[float], float]] = None,
               growth: float = 0.0,
               breaks: Sequence[float] = (),
               epsabs: float = 1e-15) -> QuadResult:
    """∫_lo^hi p(μ + side·s)·weight(s) ds for 0 ≤ lo < hi ≤ ∞.

    ``growth`` is the polynomial order of |weight| at infinity and sizes the
    tail cut; ``breaks`` are s-values where the weight is discontinuous.
    """
    rp = p.reparam()
    rate = rp.alpha - side * rp.beta
    if math.isinf(hi):
        hi = max(truncation_point(lo, rate, p.r / 2.0 - 1.0 + growth, tol=TAIL_TOL), lo)
    if not hi > lo:
        return QuadResult(0.0, 0.0, 0)

    base = _side_density(p, side)
    if weight is None:
        dens = base
    else:
        def dens(s: float) -> float:
            return base(s) * weight(s)

    scale = 1.0 / rp.alpha
    result = QuadResult(0.0, 0.0, 0)

    start = lo
    if p.r <= 1.0 and lo < scale:
        # u = s^r makes the r < 1 singularity at μ bounded
        cut = min(hi, scale)
        inv_r = 1.0 / p.r

        def transformed(u: float) -> float:
            if u <= 0.0:
                return 0.0
            s = u ** inv_r
            return dens(s) * inv_r * u ** (inv_r - 1.0)

        inner = merge_edges([b ** p.r for b in breaks if b > 0.0], lo=lo ** p.r, hi=cut ** p.r)
        result = result + integrate(transformed, inner, epsabs=epsabs)
        start = cut

    if hi > start:
        if hi - start > 4.0 / rate:
            edges = geometric_edges(start, hi, 1.0 / rate)
        else:
            edges = [start, hi]
        edges = merge_edges(edges, breaks, lo=start, hi=hi)
        result = result + integrate(dens, edges, epsabs=epsabs)
    return result


def expect(p: VGParams, func: Callable[[float], float], growth: float = 0.0,
           breaks: Sequence[float] = ()) -> QuadResult:
    """E func(Z) by quadrature split at μ and at the given break points.

    Args:
        p: Distribution parameters
        func: Integrand as a function of x
        growth: Polynomial order of |func| at infinity
        breaks: x-values where func is discontinuous

    Returns:
        QuadResult for ∫ func·p
    """
    right = [b - p.mu for b in breaks if b > p.mu]
    left = [p.mu - b for b in breaks if b < p.mu]
    return (_side_mass(p, -1.0, 0.0, math.inf, weight=lambda s: func(p.mu - s),
                       growth=growth, breaks=left, epsabs=1e-13)
            + _side_mass(p, 1.0, 0.0, math.inf, weight=lambda s: func(p.mu + s),
                         growth=growth, breaks=right, epsabs=1e-13))


def interval_mass(p: VGParams, a: float, b: float) -> QuadResult:
    """P(a < Z ≤ b) by quadrature split at μ."""
    if not b > a:
        return QuadResult(0.0, 0.0, 0)
    if b <= p.mu:
        return _side_mass(p, -1.0, p.mu - b, p.mu - a)
    if a >= p.mu:
        return _side_mass(p, 1.0, a - p.mu, b - p.mu)
    return _side_mass(p, -1.0, 0.0, p.mu - a) + _side_mass(p, 1.0, 0.0, b - p.mu)


def total_mass(p: VGParams) -> QuadResult:
    """∫ p over the real line (should be 1)."""
    return _side_mass(p, -1.0, 0.0, math.inf) + _side_mass(p, 1.0, 0.0, math.inf)


def _cdf_scalar(p: VGParams, z: float) -> float:
    d = z - p.mu
    if d <= 0.0:
        value = _side_mass(p, -1.0, -d, math.inf).value
    else:
        value = 1.0 - _side_mass(p, 1.0, d, math.inf).value
    return min(1.0, max(0.0, value))


def cdf_grid(p: VGParams, zs: np.ndarray) -> np.ndarray:
    """CDF on a sorted grid by cumulative cell quadrature.

    Monotone nondecreasing by construction.
    """
    zs = np.asarray(zs, dtype=float)
    if zs.size == 0:
        return zs.copy()
    if np.any(np.diff(zs) < 0.0):
        raise VGDistributionError("cdf_grid requires a sorted grid")
    out = np.empty_like(zs)
    current = _cdf_scalar(p, float(zs[0]))
    out[0] = current
    for i in range(1, zs.size):
        if zs[i] > zs[i - 1]:
            current += max(interval_mass(p, float(zs[i - 1]), float(zs[i])).value, 0.0)
        out[i] = min(current, 1.0)
    return out


def cdf(p: VGParams, z: ArrayLike) -> ArrayLike:
    """Distribution function F(z) = P(Z ≤ z); arrays go through ``cdf_grid``."""
    za = np.asarray(z, dtype=float)
    if za.ndim == 0:
        return _cdf_scalar(p, float(za))
    flat = za.ravel()
    order = np.argsort(flat, kind="mergesort")
    values = np.empty_like(flat)
    values[order] = cdf_grid(p, flat[order])
    return values.reshape(za.shape)


# ================================
# Mode and density bounds
# ================================

def mode(p: VGParams) -> float:
    """The unique mode.

    Equal to μ when r ≤ 2 or θ = 0; otherwise μ + sign(θ)·s where
    K_{ν-1}(αs) = |γ|·K_ν(αs), bracketed by |θ|(r-3)₊ < s < |θ|(r-2).

    Raises:
        ConvergenceError: If the bracketed search fails
    """
    if p.r <= 2.0 or p.theta == 0.0:
        return p.mu
    rp = p.reparam()
    target = abs(rp.gamma)
    lower_order = abs(rp.nu - 1.0)

    def g(s: float) -> float:
        y = rp.alpha * s
        return float(kve(lower_order, y) / kve(rp.nu, y)) - target

    hi = abs(p.theta) * (p.r - 2.0)
    lo = abs(p.theta) * max(p.r - 3.0, 0.0)
    if lo == 0.0:
        lo = 1e-9 * hi
        while g(lo) >= 0.0 and lo > 1e-300:
            lo *= 1e-10
        if g(lo) >= 0.0:
            logger.debug(f"Mode of {p.label()} indistinguishable from mu")
            return p.mu + math.copysign(lo, p.theta)
    try:
        s, info = brentq(g, lo, hi, xtol=1e-15, rtol=8.9e-16, maxiter=200, full_output=True)
    except (ValueError, RuntimeError) as e:
        raise ConvergenceError(f"Failed to locate mode of {p.label()}: {e}") from e
    if not info.converged:
        raise ConvergenceError(f"Mode search for {p.label()} did not converge: {info.flag}")
    return p.mu + math.copysign(s, p.theta)


def density_sup_bound(p: VGParams) -> float:
    """Upper bound on sup p.

    Exact value at μ for 1 < r ≤ 2; for r > 2 the bound
    Γ((r-1)/2)/(2σ√πΓ(r/2))·(σ²/(θ²+σ²))^{(r-1)/2}·e^{θ²(r-2)/σ²},
    replaced by the sharper Bessel-form bound when it is smaller (r > 3, θ ≠ 0).

    Raises:
        Unbounded: For r ≤ 1
    """
    if p.r <= 1.0:
        raise Unbounded(f"Density of {p.label()} is unbounded (r <= 1)")
    if p.r <= 2.0:
        return density_at_mu(p)

    s2 = p.theta ** 2 + p.sigma ** 2
    growth = p.theta ** 2 * (p.r - 2.0) / p.sigma ** 2
    log_basic = (gammaln((p.r - 1.0) / 2.0) - gammaln(p.r / 2.0)
                 - math.log(2.0 * p.sigma * math.sqrt(math.pi))
                 + (p.r - 1.0) / 2.0 * math.log(p.sigma ** 2 / s2) + growth)
    if p.r <= 3.0 or p.theta == 0.0:
        return math.exp(log_basic)

    nu = (p.r - 1.0) / 2.0
    root = math.sqrt(s2)
    arg = abs(p.theta) * root * (p.r - 3.0) / p.sigma ** 2
    log_sharp = (-math.log(p.sigma * math.sqrt(math.pi)) - gammaln(p.r / 2.0) + growth
                 + nu * math.log(abs(p.theta) * (p.r - 3.0) / (2.0 * root))
                 + math.log(kve(nu, arg)) - arg)
    return math.exp(min(log_basic, log_sharp))


# ================================
# Moments, cumulants, sampling
# ================================

def mean_variance(p: VGParams) -> Tuple[float, float]:
    """Mean μ + rθ and variance r(σ² + 2θ²)."""
    return p.mu + p.r * p.theta, p.r * (p.sigma ** 2 + 2.0 * p.theta ** 2)


def cumulants_centered(p: VGParams) -> CumulantVector:
    """Cumulants κ2..κ6 (κ1 = 0) of the centered law VG_c(r, θ, σ)."""
    r, t, s2 = p.r, p.theta, p.sigma ** 2
    t2 = t * t
    return CumulantVector(
        kappa1=0.0,
        kappa2=r * (s2 + 2.0 * t2),
        kappa3=2.0 * r * t * (3.0 * s2 + 4.0 * t2),
        kappa4=6.0 * r * (s2 * s2 + 8.0 * s2 * t2 + 8.0 * t2 * t2),
        kappa5=24.0 * r * t * (5.0 * s2 * s2 + 20.0 * s2 * t2 + 16.0 * t2 * t2),
        kappa6=120.0 * r * (s2 + 2.0 * t2) * (s2 * s2 + 16.0 * s2 * t2 + 16.0 * t2 * t2),
    )


def cumulants(p: VGParams) -> CumulantVector:
    """Cumulants of VG(r, θ, σ, μ); only κ1 differs from the centered law."""
    return cumulants_centered(p).model_copy(update={"kappa1": mean_variance(p)[0]})


def abs_moment_bound(p: VGParams) -> float:
    """Upper bound √(r(σ²+2θ²) + r²θ²) on E|Z - μ|."""
    return math.sqrt(p.r * (p.sigma ** 2 + 2.0 * p.theta ** 2) + (p.r * p.theta) ** 2)


def char_function(p: VGParams, u: ArrayLike) -> ArrayLike:
    """E e^{iuZ} = e^{iuμ}(1 - 2iθu + σ²u²)^{-r/2}."""
    ua = np.asarray(u, dtype=float)
    value = np.exp(1j * ua * p.mu) * (1.0 - 2j * p.theta * ua + (p.sigma * ua) ** 2) ** (-p.r / 2.0)
    return complex(value) if ua.ndim == 0 else value


def sample(p: VGParams, n: int, seed: int) -> np.ndarray:
    """Draw n variates as μ + θV + σ√V·N with V ~ χ²_r (Gamma(r/2, scale 2)).

    Raises:
        ValueError: For n < 1
    """
    if n < 1:
        raise ValueError(f"Sample size must be at least 1, got {n}")
    rng = np.random.default_rng(seed)
    v = rng.gamma(shape=p.r / 2.0, scale=2.0, size=n)
    normals = rng.standard_normal(n)
    return p.mu + p.theta * v + p.sigma * np.sqrt(v) * normals
