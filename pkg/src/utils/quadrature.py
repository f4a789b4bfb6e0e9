"""Adaptive quadrature helpers shared by the distribution and Stein modules.

All integrals are evaluated as sums of adaptive Gauss-Kronrod panels
(``scipy.integrate.quad``). Panels are laid out by the caller so that no
panel straddles a kink or a singular point, and semi-infinite ranges are cut
at a truncation point derived from an exponential envelope.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Iterable, List, Optional, Sequence, Tuple, Union

from scipy.integrate import quad

from ..settings import get_settings

logger = logging.getLogger(__name__)


class QuadratureError(Exception):
    """Custom exception for numerical integration failures."""
    pass


class DivergentTail(QuadratureError):
    """Raised when a semi-infinite integral has no usable truncation point."""
    pass


@dataclass
class QuadResult:
    """Value and error estimate of a panelled integral."""
    value: float
    abserr: float
    panels: int = 0

    def __add__(self, other: "QuadResult") -> "QuadResult":
        return QuadResult(self.value + other.value, self.abserr + other.abserr,
                          self.panels + other.panels)

    def scaled(self, factor: float) -> "QuadResult":
        """Return the result multiplied by a constant."""
        return QuadResult(self.value * factor, self.abserr * abs(factor), self.panels)


ZERO = QuadResult(0.0, 0.0, 0)


def integrate(func: Callable[[float], float],
              edges: Sequence[float],
              *,
              weight: Optional[str] = None,
              wvar: Optional[Union[float, Tuple[float, float]]] = None,
              epsabs: float = 0.0,
              epsrel: Optional[float] = None,
              limit: Optional[int] = None,
              fail_abs: float = 1e-7,
              fail_rel: float = 1e-6) -> QuadResult:
    """Integrate ``func`` over consecutive panels ``edges[i]..edges[i+1]``.

    Args:
        func: Scalar integrand
        edges: Increasing panel boundaries (duplicates are skipped)
        weight: Optional QUADPACK weight ('sin', 'cos' or 'alg')
        wvar: Angular frequency, or the (a, b) exponents of an 'alg' weight
        epsabs: Absolute tolerance per panel
        epsrel: Relative tolerance per panel (defaults to settings)
        limit: Subdivision budget per panel (defaults to settings)
        fail_abs: Absolute error above which a flagged panel is fatal
        fail_rel: Relative error above which a flagged panel is fatal

    Returns:
        QuadResult with summed value and error estimate

    Raises:
        QuadratureError: If a panel reports trouble and its error estimate
            exceeds the failure thresholds
    """
    settings = get_settings()
    epsrel = settings.quad_epsrel if epsrel is None else epsrel
    limit = settings.quad_limit if limit is None else limit

    total = 0.0
    total_err = 0.0
    panels = 0
    for lo, hi in zip(edges[:-1], edges[1:]):
        if not hi > lo:
            continue
        kwargs = dict(epsabs=epsabs, epsrel=epsrel, limit=limit, full_output=1)
        if weight is not None:
            kwargs.update(weight=weight, wvar=wvar)
        try:
            result = quad(func, lo, hi, **kwargs)
        except (ValueError, ZeroDivisionError, OverflowError) as e:
            raise QuadratureError(f"Failed to integrate panel [{lo:.6g}, {hi:.6g}]: {e}") from e

        value, abserr = float(result[0]), float(result[1])
        if not math.isfinite(value):
            raise QuadratureError(f"Non-finite integral on panel [{lo:.6g}, {hi:.6g}]")

        if len(result) > 3:
            message = result[3]
            if abserr > max(fail_abs, fail_rel * abs(value)):
                raise QuadratureError(
                    f"Panel [{lo:.6g}, {hi:.6g}] did not converge "
                    f"(abserr={abserr:.3g}): {message}"
                )
            logger.debug(f"Accepted flagged panel [{lo:.6g}, {hi:.6g}] abserr={abserr:.3g}: {message}")

        total += value
        total_err += abserr
        panels += 1

    return QuadResult(total, total_err, panels)


def truncation_point(start: float, rate: float, power: float, tol: float = 1e-14,
                     max_scales: float = 4000.0) -> float:
    """Find T past which the envelope t^power·e^{-rate·t} carries relative mass below tol.

    The reference level is the envelope maximum on [start, ∞); T is solved by
    Newton steps on the log-envelope and then nudged until the condition holds.

    Args:
        start: Left end of the semi-infinite range (≥ 0)
        rate: Exponential decay rate (> 0)
        power: Algebraic exponent of the envelope
        tol: Relative tail mass target
        max_scales: Give up beyond start + max_scales/rate

    Returns:
        Truncation point T > start

    Raises:
        DivergentTail: If the rate is not positive or T cannot be reached
    """
    if not rate > 0.0 or not math.isfinite(rate):
        raise DivergentTail(f"Envelope does not decay (rate={rate})")

    t_ref = max(start, power / rate) if power > 0 else max(start, 1.0 / rate)
    log_ref = power * math.log(t_ref) - rate * t_ref
    target = math.log(tol) + math.log(rate) + log_ref

    def phi(t: float) -> float:
        return power * math.log(t) - rate * t - target

    t = t_ref + max(-math.log(tol), 1.0) / rate
    for _ in range(30):
        slope = power / t - rate
        if slope >= 0.0:
            t += 1.0 / rate
            continue
        step = phi(t) / slope
        t_new = max(t - step, t_ref + 1.0 / rate)
        if abs(t_new - t) <= 1e-12 * t:
            t = t_new
            break
        t = t_new

    limit = start + max_scales / rate
    while phi(t) > 0.0:
        t += 2.0 / rate
        if t > limit:
            raise DivergentTail(f"Truncation point exceeds {limit:.6g} (rate={rate}, power={power})")

    logger.debug(f"Truncation point {t:.6g} for start={start:.6g}, rate={rate:.6g}, power={power:.3g}")
    return max(t, start + 1.0 / rate)


def geometric_edges(anchor: float, end: float, scale: float) -> List[float]:
    """Panel boundaries from ``anchor`` towards ``end`` at anchor ± scale·2^k.

    The returned list is increasing and includes both endpoints.
    """
    if end == anchor:
        return [anchor]
    sign = 1.0 if end > anchor else -1.0
    points = [anchor]
    step = scale
    while True:
        p = anchor + sign * step
        if sign * (end - p) <= 0.25 * step:
            break
        points.append(p)
        step *= 2.0
    points.append(end)
    return sorted(points)


def merge_edges(*groups: Iterable[float], lo: float, hi: float) -> List[float]:
    """Merge panel boundaries, keep those inside [lo, hi] and add the endpoints."""
    merged = {lo, hi}
    for group in groups:
        merged.update(p for p in group if lo < p < hi)
    return sorted(merged)
