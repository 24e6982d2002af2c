"""Validated parameter containers and the noise-to-noise reparameterization.

Conventions used throughout the package:

* every noise parameter (``w``, ``m``, ``n``) is a *variance*, never a
  standard deviation;
* all information quantities are reported in nats (natural logarithm).

The containers are frozen dataclasses: immutable value types that can be
shared freely between threads or tasks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from .errors import (
    IllDefinedNnr,
    NegativeVariance,
    NegativeWeight,
    NonPositiveAlpha,
    PrivmaskError,
    ZeroGain,
    ZeroUplink,
)


def _require_finite(name: str, value: float) -> None:
    if not math.isfinite(value):
        raise PrivmaskError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class SystemParams:
    """Plant, controller and cost constants.

    Attributes
    ----------
    a : state coefficient of the scalar plant (dimensionless)
    k : feedback gain applied by the cloud, must be nonzero
    w : process-noise variance (state units squared), >= 0
    q : state cost weight, >= 0
    r : input cost weight, >= 0

    ``q = r = 0`` is allowed: the cost is then identically zero while the
    privacy analysis is unaffected.
    """

    a: float
    k: float
    w: float
    q: float = 0.0
    r: float = 0.0

    def __post_init__(self) -> None:
        for name in ("a", "k", "w", "q", "r"):
            _require_finite(name, getattr(self, name))
        if self.k == 0:
            raise ZeroGain("feedback gain k must be nonzero")
        if self.w < 0:
            raise NegativeVariance(f"process-noise variance w={self.w} < 0")
        if self.q < 0 or self.r < 0:
            raise NegativeWeight(f"cost weights must be >= 0, got q={self.q}, r={self.r}")


@dataclass(frozen=True)
class MaskParams:
    """Privacy-mask noise variances.

    Attributes
    ----------
    m : downlink mask variance (input units squared), >= 0
    n : uplink mask variance (state units squared), >= 0
    """

    m: float
    n: float

    def __post_init__(self) -> None:
        _require_finite("m", self.m)
        _require_finite("n", self.n)
        if self.m < 0 or self.n < 0:
            raise NegativeVariance(f"mask variances must be >= 0, got m={self.m}, n={self.n}")


@dataclass(frozen=True)
class Nnr:
    """Noise-to-noise ratio alpha = n/(m+w) together with p = m+w.

    ``p`` is the combined variance the cloud cannot predict one step ahead
    (downlink mask plus process noise).  An ``Nnr`` only exists for
    ``alpha > 0`` and ``p > 0``.
    """

    alpha: float
    p: float

    def __post_init__(self) -> None:
        _require_finite("alpha", self.alpha)
        _require_finite("p", self.p)
        if self.alpha <= 0:
            raise NonPositiveAlpha(f"alpha must be > 0, got {self.alpha}")
        if self.p <= 0:
            raise IllDefinedNnr(f"p = m + w must be > 0, got {self.p}")


class StabilityCheck(NamedTuple):
    stable: bool
    margin: float


def nnr_of(masks: MaskParams, w: float) -> Nnr:
    """Noise-to-noise ratio of a mask pair under process-noise variance w.

    Raises ``IllDefinedNnr`` when m + w = 0 and ``ZeroUplink`` when n = 0;
    in both regimes the ratio does not characterize the privacy loss (it is
    unbounded, see ``design.boundary_diagnostics``).
    """
    _require_finite("w", w)
    if w < 0:
        raise NegativeVariance(f"process-noise variance w={w} < 0")
    p = masks.m + w
    if p == 0:
        raise IllDefinedNnr("m + w = 0: noise-to-noise ratio is undefined")
    if masks.n == 0:
        raise ZeroUplink("n = 0: noise-to-noise ratio degenerates to 0")
    return Nnr(alpha=masks.n / p, p=p)


def closed_loop_stable(sys: SystemParams) -> StabilityCheck:
    """Whether |a+k| < 1, together with the margin 1 - (a+k)^2."""
    s = sys.a + sys.k
    return StabilityCheck(stable=abs(s) < 1.0, margin=1.0 - s * s)
