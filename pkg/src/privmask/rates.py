"""Closed-form privacy-loss and control-cost rates, plus finite-horizon sums.

Per step, the uplink information flow costs ``0.5*log(1 + sigma/n)`` nats
and the downlink flow ``0.5*log(1 + k^2 n/(m+w))`` nats, where ``sigma`` is
the steady prediction variance from :mod:`privmask.riccati`.  Their sum,
the total privacy-loss rate, depends on the masks only through the
noise-to-noise ratio ``alpha = n/(m+w)``.

Divergent regimes (a missing mask) are reported in-band as IEEE infinities
with a ``divergent`` flag, never as exceptions, so parameter sweeps that
touch boundary points complete without aborting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateMasks, HorizonTooShort, NonPositiveAlpha, UnstableClosedLoop
from .params import MaskParams, SystemParams, closed_loop_stable
from .riccati import prediction_covariances, solve_are


@dataclass(frozen=True)
class PrivacyRates:
    """Per-step information flows in nats: uplink, downlink and their sum."""

    uplink: float
    downlink: float
    total: float
    divergent: bool


@dataclass(frozen=True)
class CostRate:
    """Per-step quadratic control cost (q*X^2 + r*U^2 in expectation)."""

    cost: float


@dataclass(frozen=True)
class FiniteHorizonInfo:
    """Exact information sums over t = 1..horizon (nats, not per step).

    ``forward_terms[t-1]`` is the uplink contribution of step t,
    ``0.5*log(1 + S_t/n)``; the backward flow contributes a constant
    ``0.5*log(1 + k^2 n/(m+w))`` per step.
    """

    horizon: int
    forward_sum: float
    backward_sum: float
    total: float
    forward_terms: np.ndarray


def uplink_rate(sys: SystemParams, masks: MaskParams) -> float:
    """Steady uplink flow 0.5*log(1 + sigma/n) in nats/step.

    Returns ``inf`` when n = 0 while m + w > 0 (no uplink mask: unbounded
    leak) and 0.0 when every noise source is zero (all signals vanish).
    """
    p = masks.m + sys.w
    if masks.n == 0:
        return math.inf if p > 0 else 0.0
    sigma = solve_are(sys.a, p, masks.n)
    return 0.5 * math.log1p(sigma / masks.n)


def downlink_rate(sys: SystemParams, masks: MaskParams) -> float:
    """Steady downlink flow 0.5*log(1 + k^2 n/(m+w)) in nats/step.

    Returns ``inf`` when m + w = 0 while n > 0 (the cloud can replay its
    own commands through noiseless dynamics) and 0.0 when n = 0.
    """
    p = masks.m + sys.w
    if p == 0:
        return math.inf if masks.n > 0 else 0.0
    return 0.5 * math.log1p(sys.k * sys.k * masks.n / p)


def mi_rate(sys: SystemParams, masks: MaskParams) -> PrivacyRates:
    """Total privacy-loss rate: uplink + downlink flows, in nats/step."""
    up = uplink_rate(sys, masks)
    down = downlink_rate(sys, masks)
    return PrivacyRates(
        uplink=up,
        downlink=down,
        total=up + down,
        divergent=math.isinf(up) or math.isinf(down),
    )


def nnr_prediction_ratio(a: float, alpha: float) -> float:
    """Positive root s(alpha) of s^2 - (a^2 - 1 + 1/alpha)*s - 1/alpha = 0.

    This is sigma/n for any mask pair on the line n = alpha*(m+w); the
    uplink rate is 0.5*log(1 + s(alpha)).
    """
    if alpha <= 0:
        raise NonPositiveAlpha(f"alpha must be > 0, got {alpha}")
    return solve_are(a, 1.0 / alpha, 1.0)


def mi_rate_from_nnr(sys: SystemParams, alpha: float) -> PrivacyRates:
    """Privacy-loss rate as a function of the noise-to-noise ratio alone.

    Identical to ``mi_rate`` for every mask pair with n = alpha*(m+w).
    """
    s = nnr_prediction_ratio(sys.a, alpha)
    up = 0.5 * math.log1p(s)
    down = 0.5 * math.log1p(sys.k * sys.k * alpha)
    return PrivacyRates(uplink=up, downlink=down, total=up + down, divergent=False)


def mi_rate_from_nnr_derivative(sys: SystemParams, alpha: float) -> float:
    """Exact d/d(alpha) of the total rate from ``mi_rate_from_nnr``.

    Differentiates the root s(alpha) implicitly through its quadratic; the
    denominator 2s - b equals the discriminant square root, which is
    strictly positive for alpha > 0.
    """
    if alpha <= 0:
        raise NonPositiveAlpha(f"alpha must be > 0, got {alpha}")
    b = sys.a * sys.a - 1.0 + 1.0 / alpha
    disc = math.sqrt(b * b + 4.0 / alpha)
    s = 0.5 * (b + disc)
    ds = -(s + 1.0) / (alpha * alpha * disc)
    k2 = sys.k * sys.k
    return ds / (2.0 * (1.0 + s)) + k2 / (2.0 * (1.0 + k2 * alpha))


def mi_rate_from_nnr_alt(sys: SystemParams, alpha: float) -> float:
    """Variant total rate with the uplink term taken as 0.5*log(s(alpha)).

    Both conventions for the uplink term appear in the literature; this one
    drops the +1 inside the logarithm.  The gap 0.5*log((1+s)/s) varies
    with alpha, so this curve sits lower *and has a different minimizer*
    than ``mi_rate_from_nnr``.  Emitted by the CLI sweeps for comparison
    only; all design routines optimize ``mi_rate_from_nnr``, whose uplink
    term is the one the finite-horizon sums and the exact oracle confirm.
    """
    s = nnr_prediction_ratio(sys.a, alpha)
    return 0.5 * math.log(s) + 0.5 * math.log1p(sys.k * sys.k * alpha)


def control_cost_rate(sys: SystemParams, masks: MaskParams) -> CostRate:
    """Steady cost rate (q + r k^2)(m + k^2 n + w)/(1-(a+k)^2) + r k^2 n."""
    stable, margin = closed_loop_stable(sys)
    if not stable:
        raise UnstableClosedLoop(f"|a+k| = {abs(sys.a + sys.k)} >= 1")
    k2 = sys.k * sys.k
    p_ss = (masks.m + k2 * masks.n + sys.w) / margin
    return CostRate(cost=(sys.q + sys.r * k2) * p_ss + sys.r * k2 * masks.n)


def control_cost_rate_from_nnr(sys: SystemParams, alpha: float) -> float:
    """Cost rate along the m = 0 line, n = alpha*w, as a function of alpha.

    This is the cost that remains after the downlink mask has been removed
    (its contribution to the cost is pure overhead for a fixed ratio).
    """
    if alpha <= 0:
        raise NonPositiveAlpha(f"alpha must be > 0, got {alpha}")
    stable, margin = closed_loop_stable(sys)
    if not stable:
        raise UnstableClosedLoop(f"|a+k| = {abs(sys.a + sys.k)} >= 1")
    k2 = sys.k * sys.k
    return (sys.q + sys.r * k2) * sys.w * (1.0 + k2 * alpha) / margin + sys.r * k2 * alpha * sys.w


def control_cost_rate_from_nnr_derivative(sys: SystemParams) -> float:
    """Exact d/d(alpha) of ``control_cost_rate_from_nnr`` (affine in alpha)."""
    stable, margin = closed_loop_stable(sys)
    if not stable:
        raise UnstableClosedLoop(f"|a+k| = {abs(sys.a + sys.k)} >= 1")
    k2 = sys.k * sys.k
    return (sys.q + sys.r * k2) * sys.w * k2 / margin + sys.r * k2 * sys.w


def finite_horizon_info(sys: SystemParams, masks: MaskParams, horizon: int) -> FiniteHorizonInfo:
    """Exact information sums over a finite horizon.

    Requires n > 0 and m + w > 0 (otherwise the sums are unbounded or the
    per-step terms degenerate).  ``forward_sum/horizon`` converges to
    ``uplink_rate`` as the horizon grows.
    """
    if horizon < 1:
        raise HorizonTooShort(f"horizon must be >= 1, got {horizon}")
    p = masks.m + sys.w
    if masks.n == 0 or p == 0:
        raise DegenerateMasks(f"finite sums need n > 0 and m + w > 0, got n={masks.n}, m+w={p}")
    s_pred = prediction_covariances(sys.a, p, masks.n, horizon)
    forward_terms = 0.5 * np.log1p(s_pred / masks.n)
    forward = float(forward_terms.sum())
    backward = horizon * 0.5 * math.log1p(sys.k * sys.k * masks.n / p)
    return FiniteHorizonInfo(
        horizon=horizon,
        forward_sum=forward,
        backward_sum=backward,
        total=forward + backward,
        forward_terms=forward_terms,
    )
