"""Steady-state estimation covariance and second moments of the closed loop.

The cloud's one-step prediction error variance ``sigma`` is the unique
nonnegative root of

    sigma**2 - ((a**2 - 1)*n + p) * sigma - p*n = 0,      p = m + w,

which is the algebraic Riccati equation of the scalar filtering recursion
cleared of its denominator.  ``solve_are`` evaluates the root in closed
form; ``iterate_prediction_covariance`` reproduces it by running the
filtering recursion itself, providing an independent numerical route.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateAll,
    NegativeInput,
    NoConvergence,
    UnstableClosedLoop,
)
from .params import MaskParams, SystemParams, closed_loop_stable

DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITER = 10**6


@dataclass(frozen=True)
class RiccatiSolution:
    """Result of iterating the prediction-covariance recursion.

    Attributes
    ----------
    sigma : steady one-step prediction error variance
    gain : steady filter gain sigma/(sigma+n)
    transient : S_t for t = 1..T_conv (monotone, converging to sigma)
    iterations : number of recursion steps taken
    """

    sigma: float
    gain: float
    transient: np.ndarray
    iterations: int


@dataclass(frozen=True)
class SecondMoment:
    """Steady second moment P of the closed-loop state."""

    p_ss: float


def solve_are(a: float, p: float, n: float) -> float:
    """Closed-form nonnegative root of the prediction-covariance equation.

    Parameters are the state coefficient ``a``, the unpredicted input
    variance ``p = m + w`` and the uplink mask variance ``n``.

    ``n = 0`` is accepted and returns ``p`` (the noiseless-uplink limit).
    ``p = n = 0`` returns 0 for a stable plant and raises ``DegenerateAll``
    otherwise (an unobserved unstable plant has no steady covariance).
    """
    if p < 0 or n < 0:
        raise NegativeInput(f"p and n must be >= 0, got p={p}, n={n}")
    if p == 0 and n == 0:
        if abs(a) < 1:
            return 0.0
        raise DegenerateAll(f"p = n = 0 with |a| = {abs(a)} >= 1: no steady covariance")
    b = (a * a - 1.0) * n + p
    # hypot form avoids overflow of b*b and p*n for extreme magnitudes
    disc = math.hypot(b, 2.0 * math.sqrt(p) * math.sqrt(n))
    if b >= 0:
        return 0.5 * (b + disc)
    # b < 0: the direct formula cancels; recover the positive root from the
    # product of roots (-p*n) via the stable negative root.
    r_neg = 0.5 * (b - disc)
    return 0.0 if p * n == 0 else (-p * n) / r_neg


def kalman_gain(s_pred: float, n: float) -> float:
    """Filter gain l = s_pred/(s_pred + n) in [0, 1]."""
    if s_pred < 0 or n < 0:
        raise NegativeInput(f"s_pred and n must be >= 0, got {s_pred}, {n}")
    if s_pred + n == 0:
        raise DegenerateAll("s_pred = n = 0: gain undefined")
    return s_pred / (s_pred + n)


def prediction_covariances(a: float, p: float, n: float, horizon: int) -> np.ndarray:
    """Prediction variances S_t for t = 1..horizon from S_1 = p.

    Runs the exact filtering recursion (prediction, gain, measurement
    update) started from a known initial state, so S_1 = p.
    """
    if p < 0 or n < 0:
        raise NegativeInput(f"p and n must be >= 0, got p={p}, n={n}")
    out = np.empty(horizon)
    post = 0.0
    for t in range(horizon):
        s = a * a * post + p
        out[t] = s
        l = s / (s + n) if s + n > 0 else 0.0
        post = (1.0 - l) ** 2 * s + l * l * n
    return out


def iterate_prediction_covariance(
    a: float,
    p: float,
    n: float,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> RiccatiSolution:
    """Fixed-point iteration of the prediction-covariance recursion.

    Iterates S_{t+1} = a^2 * ((1-l_t)^2 S_t + l_t^2 n) + p with
    l_t = S_t/(S_t + n) from S_1 = p until successive values differ by at
    most ``tol``.  The final value agrees with ``solve_are`` within 10*tol.

    The noiseless-uplink case ``n = 0`` with ``|a| >= 1`` is refused with
    ``NoConvergence``: the gain is pinned at 1 and the recursion degenerates
    rather than tracking an attracting fixed point; ``solve_are`` still
    returns the limiting root ``p`` for that regime.
    """
    if tol <= 0:
        raise NegativeInput(f"tol must be > 0, got {tol}")
    if p < 0 or n < 0:
        raise NegativeInput(f"p and n must be >= 0, got p={p}, n={n}")
    if p == 0 and n == 0 and abs(a) >= 1:
        raise DegenerateAll(f"p = n = 0 with |a| = {abs(a)} >= 1: no steady covariance")
    if n == 0 and p > 0 and abs(a) >= 1:
        raise NoConvergence(
            f"n = 0 with |a| = {abs(a)} >= 1: covariance iteration not supported "
            "(solve_are returns the limiting root p)"
        )
    transient = [p]
    s = p
    for it in range(1, max_iter + 1):
        l = s / (s + n) if s + n > 0 else 0.0
        s_next = a * a * ((1.0 - l) ** 2 * s + l * l * n) + p
        transient.append(s_next)
        if abs(s_next - s) <= tol:
            s = s_next
            gain = s / (s + n) if s + n > 0 else 0.0
            return RiccatiSolution(
                sigma=s, gain=gain, transient=np.array(transient), iterations=it
            )
        s = s_next
    raise NoConvergence(f"no convergence within {max_iter} iterations (a={a}, p={p}, n={n})")


def steady_state_second_moment(sys: SystemParams, masks: MaskParams) -> SecondMoment:
    """Steady state second moment P = (m + k^2 n + w) / (1 - (a+k)^2).

    Equals the limit of P_t = (a+k)^2 P_{t-1} + m + k^2 n + w from P_0 = 0;
    requires a stable closed loop.
    """
    stable, margin = closed_loop_stable(sys)
    if not stable:
        raise UnstableClosedLoop(f"|a+k| = {abs(sys.a + sys.k)} >= 1")
    return SecondMoment(p_ss=(masks.m + sys.k * sys.k * masks.n + sys.w) / margin)
