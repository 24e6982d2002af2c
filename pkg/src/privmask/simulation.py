"""Monte Carlo closed-loop simulation of plant, masks and cloud filter.

Noise generation is counter-based: every draw is a pure function of
``(seed, trajectory index, time index, channel)``, realized as one Philox
stream per trajectory read in a fixed layout and mapped through the inverse
normal CDF.  Batches are therefore bit-reproducible for a given
``(seed, horizon, n_trajectories)`` no matter how trajectories are chunked
across workers.
"""

from __future__ import annotations

import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numpy.random import Philox
from scipy.special import ndtri

from .errors import HorizonTooShort, UnstableClosedLoop
from .params import MaskParams, SystemParams, closed_loop_stable
from .riccati import prediction_covariances

DEFAULT_BURN_IN = 1000

# fixed channel layout inside each trajectory's raw stream: slot 3*t + channel
_CH_W, _CH_N, _CH_M = 0, 1, 2

CSV_HEADER = "traj,t,x,n,y,u,m,v,w,xhat_pred,xhat,s_pred,gain"


@dataclass(frozen=True)
class TrajectoryBatch:
    """Closed-loop sample paths with the filter's internals.

    Signal arrays have shape ``(n_trajectories, horizon+1)`` indexed by
    time ``t = 0..horizon``; ``s_pred`` and ``gain`` are shared by all
    trajectories (the covariance recursion is deterministic).  Time-0
    entries of ``w``, ``xhat_pred``, ``s_pred`` and ``gain`` are zero by
    convention (the state starts known at zero and the first update happens
    at t = 1).
    """

    sys: SystemParams
    masks: MaskParams
    horizon: int
    n_trajectories: int
    seed: int
    x: np.ndarray
    n: np.ndarray
    y: np.ndarray
    u: np.ndarray
    m: np.ndarray
    v: np.ndarray
    w: np.ndarray
    xhat_pred: np.ndarray
    xhat: np.ndarray
    s_pred: np.ndarray
    gain: np.ndarray


def _draw_noise(seed: int, traj_indices: np.ndarray, horizon: int) -> tuple:
    """Per-trajectory (W, N, M) standard-normal tables, counter-derived."""
    cols = 3 * (horizon + 1)
    raw = np.empty((len(traj_indices), cols), dtype=np.uint64)
    for row, traj in enumerate(traj_indices):
        key = np.array([np.uint64(seed), np.uint64(traj)], dtype=np.uint64)
        raw[row] = Philox(key=key).random_raw(cols)
    # top 53 bits -> uniform strictly inside (0, 1), then inverse normal CDF
    z = ndtri(((raw >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53)
    return z[:, _CH_W::3], z[:, _CH_N::3], z[:, _CH_M::3]


def _run_chunk(sys: SystemParams, masks: MaskParams, horizon: int, seed: int,
               traj_indices: np.ndarray, s_pred: np.ndarray, gain: np.ndarray) -> dict:
    zw, zn, zm = _draw_noise(seed, traj_indices, horizon)
    W = np.sqrt(sys.w) * zw
    N = np.sqrt(masks.n) * zn
    M = np.sqrt(masks.m) * zm
    W[:, 0] = 0.0  # no process noise acts before t = 1

    shape = (len(traj_indices), horizon + 1)
    X = np.zeros(shape)
    Y = np.zeros(shape)
    U = np.zeros(shape)
    V = np.zeros(shape)
    XhP = np.zeros(shape)
    Xh = np.zeros(shape)
    Y[:, 0] = N[:, 0]  # X_0 = 0
    U[:, 0] = sys.k * Y[:, 0]
    V[:, 0] = U[:, 0] + M[:, 0]
    for t in range(1, horizon + 1):
        xt = sys.a * X[:, t - 1] + V[:, t - 1] + W[:, t]
        X[:, t] = xt
        yt = xt + N[:, t]
        Y[:, t] = yt
        U[:, t] = sys.k * yt
        V[:, t] = U[:, t] + M[:, t]
        pred = sys.a * Xh[:, t - 1] + U[:, t - 1]
        XhP[:, t] = pred
        Xh[:, t] = pred + gain[t] * (yt - pred)
    return {"x": X, "n": N, "y": Y, "u": U, "m": M, "v": V, "w": W,
            "xhat_pred": XhP, "xhat": Xh}


def simulate(sys: SystemParams, masks: MaskParams, horizon: int,
             n_trajectories: int, seed: int, workers: int = 1) -> TrajectoryBatch:
    """Simulate the closed loop and the cloud's filter along with it.

    The result is bit-identical for a fixed ``(seed, horizon,
    n_trajectories)`` regardless of ``workers``: each trajectory owns an
    independent noise stream and the recursion never couples trajectories.
    """
    if horizon < 1:
        raise HorizonTooShort(f"horizon must be >= 1, got {horizon}")
    if n_trajectories < 1:
        raise ValueError(f"n_trajectories must be >= 1, got {n_trajectories}")

    s_seq = prediction_covariances(sys.a, masks.m + sys.w, masks.n, horizon)
    s_pred = np.concatenate([[0.0], s_seq])
    with np.errstate(invalid="ignore"):
        gain = np.where(s_pred + masks.n > 0, s_pred / (s_pred + masks.n), 0.0)
    gain[0] = 0.0

    all_idx = np.arange(n_trajectories)
    chunks = np.array_split(all_idx, max(1, min(workers, n_trajectories)))
    if len(chunks) == 1:
        results = [_run_chunk(sys, masks, horizon, seed, chunks[0], s_pred, gain)]
    else:
        with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
            results = list(pool.map(
                lambda idx: _run_chunk(sys, masks, horizon, seed, idx, s_pred, gain), chunks))

    merged = {key: np.concatenate([r[key] for r in results], axis=0) for key in results[0]}
    return TrajectoryBatch(
        sys=sys, masks=masks, horizon=horizon, n_trajectories=n_trajectories,
        seed=seed, s_pred=s_pred, gain=gain, **merged,
    )


def _check_moment_preconditions(batch: TrajectoryBatch, burn_in: int) -> None:
    if batch.horizon <= burn_in:
        raise HorizonTooShort(
            f"horizon {batch.horizon} must exceed the burn-in of {burn_in} steps")
    if not closed_loop_stable(batch.sys).stable:
        raise UnstableClosedLoop(
            "moment estimators refuse unstable closed loops "
            f"(|a+k| = {abs(batch.sys.a + batch.sys.k)})")


def empirical_cost(batch: TrajectoryBatch, q: float, r: float,
                   burn_in: int = DEFAULT_BURN_IN) -> tuple:
    """Mean and standard error of the per-step cost q*X^2 + r*U^2.

    Averages over t > burn_in within each trajectory first; the standard
    error is taken across trajectory means, which sidesteps the
    within-trajectory autocorrelation.
    """
    _check_moment_preconditions(batch, burn_in)
    sl = slice(burn_in + 1, None)
    per_traj = (q * batch.x[:, sl] ** 2 + r * batch.u[:, sl] ** 2).mean(axis=1)
    return _mean_stderr(per_traj)


def empirical_prediction_error(batch: TrajectoryBatch,
                               burn_in: int = DEFAULT_BURN_IN) -> tuple:
    """Mean and standard error of the squared one-step prediction error.

    The estimate converges to the steady prediction variance from
    ``riccati.solve_are`` (the error has zero mean, so the raw second
    moment is the variance estimator).
    """
    _check_moment_preconditions(batch, burn_in)
    sl = slice(burn_in + 1, None)
    per_traj = ((batch.x[:, sl] - batch.xhat_pred[:, sl]) ** 2).mean(axis=1)
    return _mean_stderr(per_traj)


def _mean_stderr(per_traj: np.ndarray) -> tuple:
    mean = float(per_traj.mean())
    if len(per_traj) > 1:
        stderr = float(per_traj.std(ddof=1) / np.sqrt(len(per_traj)))
    else:
        stderr = 0.0
    return mean, stderr


def write_trajectories_csv(batch: TrajectoryBatch, fileobj: io.TextIOBase) -> None:
    """Dump every signal of every trajectory as CSV rows."""
    fileobj.write(CSV_HEADER + "\n")
    for i in range(batch.n_trajectories):
        for t in range(batch.horizon + 1):
            vals = (batch.x[i, t], batch.n[i, t], batch.y[i, t], batch.u[i, t],
                    batch.m[i, t], batch.v[i, t], batch.w[i, t],
                    batch.xhat_pred[i, t], batch.xhat[i, t],
                    batch.s_pred[t], batch.gain[t])
            fileobj.write(f"{i},{t}," + ",".join(repr(float(v)) for v in vals) + "\n")
