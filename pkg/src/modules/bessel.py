"""Scaled modified Bessel functions of real order.

Every public evaluator returns the exponentially scaled value
(e^{-x}·I_ν(x), e^{x}·K_ν(x)) so that integrands built from them can be
combined in log space without overflow. Evaluation is delegated to the
Cephes/AMOS routines in ``scipy.special``.
"""

import logging
import math

from scipy.optimize import brentq
from scipy.special import gamma, gammaln, ive, kve

logger = logging.getLogger(__name__)

MIN_ORDER = -0.5
SMALLX_SCALE = 1e-4


class BesselError(Exception):
    """Custom exception for Bessel function evaluation."""
    pass


class DomainError(BesselError, ValueError):
    """Argument or order outside the supported domain."""
    pass


class DivergesAtZero(BesselError):
    """Scaled I_ν(0) is infinite for negative order."""
    pass


class ConvergenceError(BesselError):
    """A bracketed root search did not converge."""
    pass


def _check_order(nu: float) -> None:
    if not math.isfinite(nu) or nu < MIN_ORDER:
        raise DomainError(f"Bessel order must be >= {MIN_ORDER}, got {nu}")


def besseli_scaled(nu: float, x: float) -> float:
    """Return e^{-x}·I_ν(x).

    Args:
        nu: Order, ν ≥ -1/2
        x: Argument, x ≥ 0

    Returns:
        Scaled modified Bessel function of the first kind

    Raises:
        DomainError: For x < 0 or ν < -1/2
        DivergesAtZero: For x = 0 and ν < 0
    """
    _check_order(nu)
    if not x >= 0.0:
        raise DomainError(f"besseli_scaled requires x >= 0, got {x}")
    if x == 0.0:
        if nu > 0.0:
            return 0.0
        if nu == 0.0:
            return 1.0
        raise DivergesAtZero(f"I_{nu}(x) diverges as x -> 0")
    return float(ive(nu, x))


def besselk_scaled(nu: float, x: float) -> float:
    """Return e^{x}·K_ν(x); parity K_{-ν} = K_ν is applied first.

    Raises:
        DomainError: For x <= 0
    """
    if not x > 0.0:
        raise DomainError(f"besselk_scaled requires x > 0, got {x}")
    return float(kve(abs(nu), x))


def log_besseli(nu: float, x: float) -> float:
    """Return log I_ν(x) for x > 0."""
    return math.log(besseli_scaled(nu, x)) + x


def log_besselk(nu: float, x: float) -> float:
    """Return log K_ν(x) for x > 0."""
    return math.log(besselk_scaled(nu, x)) - x


def smallx_window(nu: float) -> float:
    """Upper end of the window where the leading small-x terms are accurate."""
    return SMALLX_SCALE / (1.0 + abs(nu))


def besseli_smallx(nu: float, x: float) -> float:
    """Leading small-argument term (x/2)^ν/Γ(ν+1) of I_ν(x).

    Raises:
        DomainError: Outside [0, smallx_window(ν)]
        DivergesAtZero: For x = 0 and ν < 0
    """
    _check_order(nu)
    if not 0.0 <= x <= smallx_window(nu):
        raise DomainError(f"x={x} outside small-x window [0, {smallx_window(nu):.3g}]")
    if x == 0.0:
        if nu > 0.0:
            return 0.0
        if nu == 0.0:
            return 1.0
        raise DivergesAtZero(f"I_{nu}(x) diverges as x -> 0")
    return math.exp(nu * math.log(x / 2.0) - gammaln(nu + 1.0))


def besselk_smallx(nu: float, x: float) -> float:
    """Leading small-argument term of K_ν(x).

    2^{|ν|-1}Γ(|ν|)x^{-|ν|} for ν ≠ 0 and -log x for ν = 0.

    Raises:
        DomainError: Outside (0, smallx_window(ν)]
    """
    if not 0.0 < x <= smallx_window(nu):
        raise DomainError(f"x={x} outside small-x window (0, {smallx_window(nu):.3g}]")
    a = abs(nu)
    if a == 0.0:
        return -math.log(x)
    return math.exp((a - 1.0) * math.log(2.0) + gammaln(a) - a * math.log(x))


def besseli_power_scaled(nu: float, x: float) -> float:
    """Return e^{-x}·I_ν(x)/x^ν, finite at x = 0 where it equals 1/(2^ν Γ(ν+1))."""
    _check_order(nu)
    if not x >= 0.0:
        raise DomainError(f"besseli_power_scaled requires x >= 0, got {x}")
    lead = math.exp(-nu * math.log(2.0) - gammaln(nu + 1.0))
    if x < smallx_window(nu):
        return lead * math.exp(-x) * (1.0 + x * x / (4.0 * (nu + 1.0)))
    return float(ive(nu, x)) / x ** nu


def besselk_power_scaled(nu: float, x: float) -> float:
    """Return x^{|ν|}·e^{x}·K_ν(x), finite at x = 0 (2^{|ν|-1}Γ(|ν|)) for ν ≠ 0.

    Raises:
        DivergesAtZero: For x = 0 and ν = 0
    """
    if not x >= 0.0:
        raise DomainError(f"besselk_power_scaled requires x >= 0, got {x}")
    a = abs(nu)
    if x == 0.0:
        if a == 0.0:
            raise DivergesAtZero("K_0(x) diverges as x -> 0")
        return math.exp((a - 1.0) * math.log(2.0) + gammaln(a))
    return float(kve(a, x)) * x ** a


def bessel_exp_power_bound(nu: float) -> float:
    """Constant 2^{ν-1}Γ(ν) bounding e^{x}x^{ν}K_ν(x) for 0 < ν ≤ 1/2."""
    if not 0.0 < nu <= 0.5:
        raise DomainError(f"bound holds for 0 < nu <= 1/2, got {nu}")
    return 2.0 ** (nu - 1.0) * float(gamma(nu))


def find_bessel_log_root(c: float, xtol: float = 1e-15) -> float:
    """Unique root in (0, 1) of e^{x}K_0(x) = -c·log x for c ≥ 2.

    Near zero e^{x}K_0(x) ≈ -log x, so g(x) = e^{x}K_0(x) + c·log x behaves
    like (c-1)·log x < 0, while g(1) = e·K_0(1) > 0.

    Raises:
        DomainError: For c < 2
        ConvergenceError: If the bracketed solver fails
    """
    if not c >= 2.0:
        raise DomainError(f"find_bessel_log_root requires c >= 2, got {c}")

    def g(x: float) -> float:
        return float(kve(0.0, x)) + c * math.log(x)

    lo, hi = 1e-12, 1.0
    try:
        root, info = brentq(g, lo, hi, xtol=xtol, rtol=4.0 * 2.0 ** -52,
                            maxiter=200, full_output=True)
    except (ValueError, RuntimeError) as e:
        raise ConvergenceError(f"Failed to bracket log root for c={c}: {e}") from e

    if not info.converged:
        raise ConvergenceError(f"Log root for c={c} did not converge: {info.flag}")

    residual = abs(g(root))
    logger.debug(f"Log root c={c}: x={root:.15g}, iterations={info.iterations}, residual={residual:.3g}")
    if residual >= 1e-12:
        raise ConvergenceError(f"Log root residual {residual:.3g} too large for c={c}")
    return float(root)
