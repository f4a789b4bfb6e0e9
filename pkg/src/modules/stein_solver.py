"""Numerical solution of the variance-gamma Stein equation.

For Z ~ VG(r, θ, σ, μ) and a test function h with h̃ = h - E h(Z), the
bounded solution f of

    σ²(x-μ)f''(x) + (σ²r + 2θ(x-μ))f'(x) + (rθ - (x-μ))f(x) = h̃(x)

is, for D = x - μ > 0 and the Bessel parameters ν, α, β,

    f(x) = -(1/σ²)[e^{αD}K_ν(αD)·P(D) + e^{-αD}I_ν(αD)·Q(D)],
    P(D) = ∫_0^D (t/D)^ν e^{-αt}I_ν(αt) e^{-(α+β)(D-t)} h̃(μ+t) dt,
    Q(D) = ∫_D^∞ (t/D)^ν e^{αt}K_ν(αt) e^{-(α-β)(t-D)} h̃(μ+t) dt.

Every factor is a scaled Bessel value or a decaying exponential, so nothing
overflows. Points left of μ use the mirrored problem (θ → -θ,
h̃(μ+t) → h̃(μ-t)). Derivatives differentiate the prefactors only, so one
pair of kernel integrals (P, Q) serves f, f', f'' and f'''.
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, List, Optional, Sequence, Tuple

from scipy.special import gammaln, ive, kve

from ..models.params import ReparamVG, VGParams
from ..models.stein import HNorms, SteinEval, TestFunction, TestFunctionKind
from ..utils.quadrature import (
    QuadResult, ZERO, geometric_edges, integrate, merge_edges, truncation_point,
)
from . import vg_dist
from .bessel import besseli_power_scaled, besselk_power_scaled

logger = logging.getLogger(__name__)

_Head = Tuple[Callable[[float], float], float]

BAND_SCALE = 1e-6
TAIL_TOL = 1e-14
DIRECT_SWITCH = 1e-2
LOWER_CUT = 45.0
METHODS = ("rearranged", "direct", "auto")


class SteinSolverError(Exception):
    """Custom exception for Stein equation solver operations."""
    pass


class TooCloseToSingularity(SteinSolverError):
    """Second and third derivatives are refused inside the band around μ."""
    pass


class NotDifferentiable(SteinSolverError):
    """The test function has no derivative where one is required."""
    pass


def singular_band(p: VGParams) -> float:
    """Half-width δ = 1e-6·σ²/√(θ²+σ²) of the exclusion band around μ."""
    return BAND_SCALE * p.sigma ** 2 / math.hypot(p.theta, p.sigma)


# ================================
# Expectations and norms
# ================================

@lru_cache(maxsize=4096)
def _expectation_cached(p: VGParams, descriptor: str) -> float:
    return _expectation_closed(p, TestFunction.from_descriptor(descriptor))


def _expectation_closed(p: VGParams, tf: TestFunction) -> float:
    if tf.kind == TestFunctionKind.INDICATOR:
        return float(vg_dist.cdf(p, tf.z))
    if tf.kind == TestFunctionKind.SCALED_SINE:
        return vg_dist.char_function(p, tf.a).imag / tf.a
    mean, variance = vg_dist.mean_variance(p)
    if tf.kind == TestFunctionKind.IDENTITY:
        return mean
    return variance + mean * mean


def expectation(p: VGParams, tf: TestFunction) -> float:
    """E h(Z).

    Indicators use the CDF, scaled sines the characteristic function and the
    polynomial oracles the moments; custom functions are integrated against
    the density.
    """
    if tf.kind != TestFunctionKind.CUSTOM:
        return _expectation_cached(p, tf.descriptor)
    result = vg_dist.expect(p, tf, growth=float(tf.growth_order), breaks=tf.kinks)
    logger.debug(f"E h(Z) for {tf.descriptor} under {p.label()}: {result.value:.12g} "
                 f"(abserr {result.abserr:.2g}, {result.panels} panels)")
    return result.value


def h_norms(p: VGParams, tf: TestFunction) -> HNorms:
    """Norms ‖h̃‖, ‖h'‖, ‖h''‖ that are finite and known for ``tf``."""
    if tf.kind == TestFunctionKind.INDICATOR:
        F = expectation(p, tf)
        return HNorms(h_tilde=max(F, 1.0 - F))
    if tf.kind == TestFunctionKind.SCALED_SINE:
        return HNorms(h_tilde=1.0 / tf.a + abs(expectation(p, tf)), h1=1.0, h2=tf.a)
    if tf.kind == TestFunctionKind.IDENTITY:
        return HNorms(h1=1.0, h2=0.0)
    if tf.kind == TestFunctionKind.SQUARE:
        return HNorms()
    h_tilde = tf.sup_h + abs(expectation(p, tf)) if tf.sup_h is not None else None
    return HNorms(h_tilde=h_tilde, h1=tf.lip_h)


# ================================
# Kernel integrals
# ================================

@dataclass(frozen=True)
class _Ray:
    """h̃ along the ray μ + side·t."""
    tf: TestFunction
    mu: float
    side: float
    mean: float

    def value(self, t: float) -> float:
        return self.tf(self.mu + self.side * t) - self.mean

    def derivative(self, t: float) -> float:
        x = self.mu + self.side * t
        if not self.tf.has_derivative:
            raise NotDifferentiable(f"{self.tf.descriptor} has no derivative")
        if x in self.tf.kinks:
            raise NotDifferentiable(f"{self.tf.descriptor} is not differentiable at {x!r}")
        return self.side * self.tf.derivative(x)

    @property
    def breaks(self) -> Tuple[float, ...]:
        return tuple(self.side * (k - self.mu) for k in self.tf.kinks)

    @property
    def growth(self) -> float:
        return float(self.tf.growth_order)

    @property
    def oscillation(self) -> Optional[Tuple[float, float, float]]:
        """(a, A, B) with h(μ + side·t) = A·sin(at) + B·cos(at) for sines."""
        if self.tf.kind != TestFunctionKind.SCALED_SINE:
            return None
        a = self.tf.a
        return a, self.side * math.cos(a * self.mu) / a, math.sin(a * self.mu) / a


def _weighted(kernel: Callable[[float], float], ray: _Ray, edges: Sequence[float],
              head: Optional[_Head] = None) -> QuadResult:
    """∫ kernel(t)·h̃(μ + side·t) dt over the panels, split at the ray's breaks.

    ``head = (regular, power)`` declares kernel(t) = t^power·regular(t) near
    t = 0 with -1 < power < 0; the panel touching 0 then uses the algebraic
    weight rule instead of sampling the singular kernel.
    """
    edges = merge_edges(edges, ray.breaks, lo=edges[0], hi=edges[-1])
    osc = ray.oscillation
    total = ZERO

    if head is not None and edges[0] == 0.0 and len(edges) > 1:
        regular, power = head
        end = edges[1] if osc is None else min(edges[1], 2.0 * math.pi / osc[0])
        inner = math.nextafter(end, 0.0)

        def head_product(t: float) -> float:
            return regular(t) * ray.value(min(t, inner))

        total = integrate(head_product, [0.0, end], weight="alg", wvar=(power, 0.0))
        edges = [end] + [e for e in edges if e > end]

    def product(t: float) -> float:
        return kernel(t) * ray.value(t)

    if osc is None:
        return total + integrate(product, edges)

    a, A, B = osc
    period = 2.0 * math.pi / a
    for lo, hi in zip(edges[:-1], edges[1:]):
        if not hi > lo:
            continue
        if hi - lo <= period:
            total = total + integrate(product, [lo, hi])
            continue
        if lo <= 0.0:
            # weighted rules sample the endpoints
            total = total + integrate(product, [lo, lo + period])
            lo = lo + period
        sin_part = integrate(kernel, [lo, hi], weight="sin", wvar=a)
        cos_part = integrate(kernel, [lo, hi], weight="cos", wvar=a)
        total = total + sin_part.scaled(A) + cos_part.scaled(B)
        if ray.mean != 0.0:
            total = total + integrate(kernel, [lo, hi]).scaled(-ray.mean)
    return total


def _side_params(rp: ReparamVG, side: float) -> Tuple[float, float, float]:
    return rp.nu, rp.alpha, side * rp.beta


def _i_head(nu: float, alpha: float, rate: float, D: float) -> Optional[_Head]:
    """(t/D)^ν e^{-αt}I_ν(αt)e^{-rate(D-t)} = t^{2ν}·regular(t), for ν < 0."""
    if nu >= 0.0:
        return None
    scale = D ** -nu * alpha ** nu

    def regular(t: float) -> float:
        return scale * besseli_power_scaled(nu, alpha * t) * math.exp(-rate * (D - t))

    return regular, 2.0 * nu


def _k_head(nu: float, alpha: float, slope: float, shift: float, factor: float) -> Optional[_Head]:
    """factor·t^ν e^{αt}K_ν(αt)e^{slope(t-shift)} = t^{2ν}·regular(t), for ν < 0."""
    if nu >= 0.0:
        return None
    scale = factor * alpha ** nu

    def regular(t: float) -> float:
        return scale * besselk_power_scaled(nu, alpha * t) * math.exp(slope * (t - shift))

    return regular, 2.0 * nu


def _p_integral(rp: ReparamVG, side: float, D: float, ray: _Ray) -> QuadResult:
    nu, alpha, beta = _side_params(rp, side)
    rate = alpha + beta

    def kernel(t: float) -> float:
        if t <= 0.0:
            return 0.0
        return (t / D) ** nu * float(ive(nu, alpha * t)) * math.exp(-rate * (D - t))

    lo = max(0.0, D - LOWER_CUT / rate)
    edges = geometric_edges(D, lo, min(D, 1.0 / rate))
    return _weighted(kernel, ray, edges, head=_i_head(nu, alpha, rate, D))


def _q_integral(rp: ReparamVG, side: float, D: float, ray: _Ray) -> QuadResult:
    nu, alpha, beta = _side_params(rp, side)
    rate = alpha - beta
    order = abs(nu)

    def kernel(t: float) -> float:
        return (t / D) ** nu * float(kve(order, alpha * t)) * math.exp(-rate * (t - D))

    T = truncation_point(D, rate, nu - 0.5 + ray.growth, tol=TAIL_TOL)
    edges = geometric_edges(D, T, min(D, 1.0 / rate))
    return _weighted(kernel, ray, edges)


@dataclass
class _Kernel:
    side: float
    D: float
    rp: ReparamVG
    ray: _Ray
    P: QuadResult
    Q: QuadResult


def _kernel(p: VGParams, tf: TestFunction, d: float, mean: Optional[float] = None) -> _Kernel:
    side = 1.0 if d > 0.0 else -1.0
    D = abs(d)
    rp = p.reparam()
    ray = _Ray(tf=tf, mu=p.mu, side=side, mean=expectation(p, tf) if mean is None else mean)
    P = _p_integral(rp, side, D, ray)
    Q = _q_integral(rp, side, D, ray)
    logger.debug(f"Kernel at d={d:.6g}: P={P.value:.6g} ({P.panels} panels), "
                 f"Q={Q.value:.6g} ({Q.panels} panels)")
    return _Kernel(side=side, D=D, rp=rp, ray=ray, P=P, Q=Q)


_POWERS = {
    0: TestFunction.custom(lambda t: 1.0, derivative=lambda t: 0.0, sup_h=1.0, name="one"),
    1: TestFunction.identity(),
}


def bessel_kernel_integrals(rp: ReparamVG, x: float, power: int) -> Tuple[float, float]:
    """The scaled kernel integrals of t^k for k = ``power`` in {0, 1}.

    P_k(x) = ∫_0^x (t/x)^ν t^k e^{-αt}I_ν(αt) e^{-(α+β)(x-t)} dt and
    Q_k(x) = ∫_x^∞ (t/x)^ν t^k e^{αt}K_ν(αt) e^{-(α-β)(t-x)} dt, so that
    e^{-βx}K_ν(αx)x^{-ν}∫_0^x e^{βt}t^{ν+k}I_ν(αt) dt = e^{αx}K_ν(αx)·P_k(x)
    and likewise for the I-side integral over (x, ∞).

    Raises:
        SteinSolverError: For x <= 0 or an unsupported power
    """
    if not x > 0.0:
        raise SteinSolverError(f"Kernel integrals need x > 0, got {x}")
    if power not in _POWERS:
        raise SteinSolverError(f"Kernel integrals are available for t^0 and t^1, got power {power}")
    ray = _Ray(tf=_POWERS[power], mu=0.0, side=1.0, mean=0.0)
    P = _p_integral(rp, 1.0, x, ray)
    Q = _q_integral(rp, 1.0, x, ray)
    return P.value, Q.value


def prefactor_coefficients(k: int, alpha: float, beta: float, nu: float, D: float) -> Tuple[float, float, float, float]:
    """k-th derivative of the K and I prefactors as (a, b, c, e).

    d^k/dD^k [e^{-βD}D^{-ν}K_ν(αD)] = e^{-βD}D^{-ν}[a·K_ν + b·K_{ν+1}] and
    d^k/dD^k [e^{-βD}D^{-ν}I_ν(αD)] = e^{-βD}D^{-ν}[c·I_ν + e·I_{ν+1}].
    """
    if k == 0:
        return 1.0, 0.0, 1.0, 0.0
    if k == 1:
        return -beta, -alpha, -beta, alpha
    m = 2.0 * nu + 1.0
    if k == 2:
        a = alpha ** 2 + beta ** 2
        b = 2.0 * alpha * beta + alpha * m / D
        return a, b, a, -b
    if k == 3:
        a = -(3.0 * alpha ** 2 * beta + beta ** 3 + alpha ** 2 * m / D)
        b = -(alpha ** 3 + 3.0 * alpha * beta ** 2 + 3.0 * alpha * beta * m / D
              + alpha * m * (m + 1.0) / D ** 2)
        return a, b, a, -b
    raise ValueError(f"Prefactor derivatives are available up to order 3, got {k}")


def _combination(kern: _Kernel, k: int, sigma2: float) -> Tuple[float, float]:
    """T_k = (K-prefactor)^{(k)}·P + (I-prefactor)^{(k)}·Q in scaled form, and its error."""
    nu, alpha, beta = _side_params(kern.rp, kern.side)
    y = alpha * kern.D
    a, b, c, e = prefactor_coefficients(k, alpha, beta, nu, kern.D)
    k_part = a * float(kve(abs(nu), y)) + b * float(kve(nu + 1.0, y))
    i_part = c * float(ive(nu, y)) + e * float(ive(nu + 1.0, y))
    value = k_part * kern.P.value + i_part * kern.Q.value
    err = abs(k_part) * kern.P.abserr + abs(i_part) * kern.Q.abserr
    return value, err / sigma2


def _mirrored(kern: _Kernel, k: int, value: float) -> float:
    """Map a derivative of the mirrored solution back: f^{(k)} = side^{k+1}·Φ^{(k)}."""
    return value * kern.side ** (k + 1)


def _phi(kern: _Kernel, k: int, sigma2: float) -> Tuple[float, float]:
    """Φ^{(k)}(D) for k = 0, 1 by the prefactor representation."""
    t, err = _combination(kern, k, sigma2)
    return _mirrored(kern, k, -t / sigma2), err


def _phi2_direct(kern: _Kernel, sigma2: float) -> Tuple[float, float]:
    t2, err = _combination(kern, 2, sigma2)
    g = kern.ray.value(kern.D)
    return _mirrored(kern, 2, (g / kern.D - t2) / sigma2), err


def _phi3_direct(kern: _Kernel, sigma2: float) -> Tuple[float, float]:
    nu, _, beta = _side_params(kern.rp, kern.side)
    t3, err = _combination(kern, 3, sigma2)
    D = kern.D
    g = kern.ray.value(D)
    g1 = kern.ray.derivative(D)
    value = (g1 / D - (2.0 * beta / D + (2.0 * nu + 2.0) / D ** 2) * g - t3) / sigma2
    return _mirrored(kern, 3, value), err


# ================================
# Public solver
# ================================

def _check_method(method: str) -> None:
    if method not in METHODS:
        raise ValueError(f"Unknown derivative method '{method}' (choose from {', '.join(METHODS)})")


def _rearranged_second(p: VGParams, h_tilde: float, d: float, f: float, f1: float) -> float:
    return (h_tilde - (p.sigma ** 2 * p.r + 2.0 * p.theta * d) * f1
            - (p.r * p.theta - d) * f) / (p.sigma ** 2 * d)


def _rearranged_third(p: VGParams, h1: float, d: float, f: float, f1: float, f2: float) -> float:
    return (h1 + f + p.theta * f1
            - (p.sigma ** 2 * (p.r + 1.0) + 2.0 * p.theta * d) * f2
            - ((p.r + 1.0) * p.theta - d) * f1) / (p.sigma ** 2 * d)


def evaluate(p: VGParams, tf: TestFunction, x: float, order: int = 1,
             method: str = "rearranged", mean: Optional[float] = None) -> SteinEval:
    """Solution and derivatives up to ``order`` at x from one pair of kernel integrals.

    Args:
        p: Target law
        tf: Test function
        x: Evaluation point
        order: Highest derivative wanted (0..3)
        method: 'rearranged', 'direct' or 'auto' for f'' and f'''
        mean: Precomputed E h(Z), if already known

    Returns:
        SteinEval with f1..f3 filled up to ``order``

    Raises:
        TooCloseToSingularity: For order ≥ 2 inside the band, or order 1 at μ
        NotDifferentiable: For order 3 when h' is unavailable at x
    """
    _check_method(method)
    if not 0 <= order <= 3:
        raise ValueError(f"order must be in 0..3, got {order}")

    d = x - p.mu
    band = singular_band(p)
    if abs(d) < band:
        if order >= 2 or (order == 1 and d == 0.0):
            raise TooCloseToSingularity(
                f"|x-mu|={abs(d):.3g} is inside the band {band:.3g} for {p.label()}"
            )
        if order == 0:
            return SteinEval(x=x, f=solve_at_mu(p, tf, mean=mean), method="limit")

    sigma2 = p.sigma ** 2
    kern = _kernel(p, tf, d, mean=mean)
    f, err = _phi(kern, 0, sigma2)
    result = dict(x=x, f=f, err_est=err, method="kernel")
    if order == 0:
        return SteinEval(**result)

    f1, err1 = _phi(kern, 1, sigma2)
    result.update(f1=f1, err_est=max(err, err1))
    if order == 1:
        return SteinEval(**result)

    use_direct = method == "direct" or (method == "auto" and kern.rp.alpha * abs(d) < DIRECT_SWITCH)
    h_tilde = kern.ray.value(kern.D)
    if use_direct:
        f2, err2 = _phi2_direct(kern, sigma2)
    else:
        f2 = _rearranged_second(p, h_tilde, d, f, f1)
        err2 = (abs(p.sigma ** 2 * p.r + 2.0 * p.theta * d) * err1
                + abs(p.r * p.theta - d) * err) / (sigma2 * abs(d))
    result.update(f2=f2, err_est=max(result["err_est"], err2),
                  method="direct" if use_direct else "rearranged")
    if order == 2:
        return SteinEval(**result)

    if use_direct:
        f3, err3 = _phi3_direct(kern, sigma2)
    else:
        h1 = kern.side * kern.ray.derivative(kern.D)
        f3 = _rearranged_third(p, h1, d, f, f1, f2)
        err3 = (err + abs(p.theta) * err1
                + abs(sigma2 * (p.r + 1.0) + 2.0 * p.theta * d) * err2
                + abs((p.r + 1.0) * p.theta - d) * err1) / (sigma2 * abs(d))
    result.update(f3=f3, err_est=max(result["err_est"], err3))
    return SteinEval(**result)


def solve(p: VGParams, tf: TestFunction, x: float) -> SteinEval:
    """f(x); inside the singular band the limiting value at μ is returned."""
    return evaluate(p, tf, x, order=0)


def solve_derivative(p: VGParams, tf: TestFunction, x: float) -> SteinEval:
    """f(x) and f'(x) by the differentiated-prefactor representation."""
    return evaluate(p, tf, x, order=1)


def solve_second(p: VGParams, tf: TestFunction, x: float, method: str = "rearranged") -> SteinEval:
    """f, f', f'' at x; f'' by rearranging the Stein equation unless ``method`` says otherwise."""
    return evaluate(p, tf, x, order=2, method=method)


def solve_third(p: VGParams, tf: TestFunction, x: float, method: str = "rearranged") -> SteinEval:
    """f, f', f'', f''' at x; f''' from the differentiated Stein equation by default."""
    return evaluate(p, tf, x, order=3, method=method)


def second_derivative_direct(p: VGParams, tf: TestFunction, x: float) -> float:
    """f''(x) = (1/σ²)[h̃(x)/(x-μ) - T₂] with T₂ from twice-differentiated prefactors."""
    return evaluate(p, tf, x, order=2, method="direct").f2


def third_derivative_direct(p: VGParams, tf: TestFunction, x: float) -> float:
    """f'''(x) from thrice-differentiated prefactors plus the boundary terms in h̃ and h'."""
    return evaluate(p, tf, x, order=3, method="direct").f3


def solve_at_mu(p: VGParams, tf: TestFunction, mean: Optional[float] = None) -> float:
    """f(μ) = -(1/σ²)(α/2)^ν/Γ(ν+1)·∫_0^∞ t^ν e^{αt}K_ν(αt) e^{-(α-β)t} h̃(μ+t) dt."""
    rp = p.reparam()
    nu, alpha, beta = rp.nu, rp.alpha, rp.beta
    rate = alpha - beta
    order = abs(nu)
    ray = _Ray(tf=tf, mu=p.mu, side=1.0, mean=expectation(p, tf) if mean is None else mean)

    def kernel(t: float) -> float:
        if t <= 0.0:
            return 0.0
        return t ** nu * float(kve(order, alpha * t)) * math.exp(-rate * t)

    T = truncation_point(0.0, rate, nu - 0.5 + ray.growth, tol=TAIL_TOL)
    edges = geometric_edges(0.0, T, 1e-2 / rate)
    integral = _weighted(kernel, ray, edges, head=_k_head(nu, alpha, -rate, 0.0, 1.0))
    prefactor = math.exp(nu * math.log(alpha / 2.0) - gammaln(nu + 1.0))
    return -prefactor * integral.value / p.sigma ** 2


def solve_alternate(p: VGParams, tf: TestFunction, x: float) -> SteinEval:
    """f(x) from the representation integrating over the far side of μ.

    For x > μ the tail integral over (x, ∞) is replaced by minus the integral
    over (-∞, x), which is equal because h̃ has mean zero; x < μ is mirrored.
    Only used within a few 1/α of μ, where both forms are well conditioned.
    """
    d = x - p.mu
    if d == 0.0:
        raise TooCloseToSingularity("The alternate representation is undefined at mu")
    side = 1.0 if d > 0.0 else -1.0
    D = abs(d)
    rp = p.reparam()
    nu, alpha, beta = _side_params(rp, side)
    order = abs(nu)
    ray = _Ray(tf=tf, mu=p.mu, side=side, mean=expectation(p, tf))
    mirror = _Ray(tf=tf, mu=p.mu, side=-side, mean=ray.mean)

    # (-∞, 0] in the mirrored variable u = -t
    far_rate = alpha + beta
    growth_factor = math.exp((alpha - beta) * D)

    def far_kernel(u: float) -> float:
        if u <= 0.0:
            return 0.0
        return (u / D) ** nu * float(kve(order, alpha * u)) * math.exp(-far_rate * u) * growth_factor

    T = truncation_point(0.0, far_rate, nu - 0.5 + ray.growth, tol=TAIL_TOL)
    far_edges = geometric_edges(0.0, T, min(D, 1.0 / far_rate))
    far = _weighted(far_kernel, mirror, far_edges,
                    head=_k_head(nu, alpha, -far_rate, 0.0, growth_factor * D ** -nu))

    near_rate = alpha - beta

    def near_kernel(t: float) -> float:
        if t <= 0.0:
            return 0.0
        return (t / D) ** nu * float(kve(order, alpha * t)) * math.exp(near_rate * (D - t))

    near = _weighted(near_kernel, ray, geometric_edges(0.0, D, 1e-3 * D),
                     head=_k_head(nu, alpha, -near_rate, D, D ** -nu))
    R = far + near
    P = _p_integral(rp, side, D, ray)

    y = alpha * D
    sigma2 = p.sigma ** 2
    phi = -(float(kve(order, y)) * P.value - float(ive(nu, y)) * R.value) / sigma2
    err = (float(kve(order, y)) * P.abserr + float(ive(nu, y)) * R.abserr) / sigma2
    return SteinEval(x=x, f=side * phi, err_est=err, method="alternate")


def residual(p: VGParams, tf: TestFunction, x: float) -> float:
    """L f(x) - h̃(x) with f, f', f'' all taken from kernel quadrature."""
    mean = expectation(p, tf)
    ev = evaluate(p, tf, x, order=2, method="direct", mean=mean)
    d = x - p.mu
    lhs = (p.sigma ** 2 * d * ev.f2 + (p.sigma ** 2 * p.r + 2.0 * p.theta * d) * ev.f1
           + (p.r * p.theta - d) * ev.f)
    return lhs - (tf(x) - mean)


def evaluate_grid(p: VGParams, tf: TestFunction, xs: Sequence[float], order: int,
                  method: str = "auto") -> List[SteinEval]:
    """``evaluate`` over many points sharing one E h(Z)."""
    mean = expectation(p, tf)
    return [evaluate(p, tf, float(x), order=order, method=method, mean=mean) for x in xs]
