"""Privacy-mask analysis and design for cloud-controlled scalar plants.

A client runs a linear plant X_{t+1} = a*X_t + V_t + W_t and outsources
control to a cloud that sees only a masked state Y_t = X_t + N_t and
returns a command U_t = k*Y_t, of which a masked version V_t = U_t + M_t is
applied.  This package computes the information the cloud gains about the
state path (the privacy loss, in nats per step), the quadratic control
cost, and the mask variances (m, n) that trade the two off, together with
an exact Gaussian oracle and a Monte Carlo simulator that verify every
closed form.
"""

from .design import (
    DesignReport,
    MaskDiagnosis,
    RobustnessGrid,
    TradeoffPoint,
    boundary_diagnostics,
    masks_from_nnr,
    min_privacy_rate,
    optimal_nnr,
    quartic_coefficients,
    robustness_sweep,
    tradeoff_curve,
    tradeoff_point,
)
from .errors import (
    DegenerateAll,
    DegenerateMasks,
    EmptyInput,
    HorizonTooLarge,
    HorizonTooShort,
    IllDefinedNnr,
    NegativeInput,
    NegativeVariance,
    NegativeWeight,
    NoConvergence,
    NonPositiveAlpha,
    PrivmaskError,
    SingularBlock,
    UnstableClosedLoop,
    ZeroGain,
    ZeroProcessNoise,
    ZeroUplink,
)
from .oracle import (
    ConsistencyCheck,
    DirectedInformation,
    JointCovariance,
    consistency_report,
    exact_directed_info,
    exact_mi,
    joint_covariance,
)
from .params import (
    MaskParams,
    Nnr,
    StabilityCheck,
    SystemParams,
    closed_loop_stable,
    nnr_of,
)
from .rates import (
    CostRate,
    FiniteHorizonInfo,
    PrivacyRates,
    control_cost_rate,
    control_cost_rate_from_nnr,
    control_cost_rate_from_nnr_derivative,
    downlink_rate,
    finite_horizon_info,
    mi_rate,
    mi_rate_from_nnr,
    mi_rate_from_nnr_alt,
    mi_rate_from_nnr_derivative,
    nnr_prediction_ratio,
    uplink_rate,
)
from .riccati import (
    RiccatiSolution,
    SecondMoment,
    iterate_prediction_covariance,
    kalman_gain,
    prediction_covariances,
    solve_are,
    steady_state_second_moment,
)
from .simulation import (
    TrajectoryBatch,
    empirical_cost,
    empirical_prediction_error,
    simulate,
    write_trajectories_csv,
)

__version__ = "0.1.0"

__all__ = [
    "SystemParams", "MaskParams", "Nnr", "StabilityCheck", "nnr_of",
    "closed_loop_stable",
    "RiccatiSolution", "SecondMoment", "solve_are", "kalman_gain",
    "prediction_covariances", "iterate_prediction_covariance",
    "steady_state_second_moment",
    "PrivacyRates", "CostRate", "FiniteHorizonInfo", "uplink_rate",
    "downlink_rate", "mi_rate", "mi_rate_from_nnr", "mi_rate_from_nnr_alt",
    "mi_rate_from_nnr_derivative", "nnr_prediction_ratio", "control_cost_rate",
    "control_cost_rate_from_nnr", "control_cost_rate_from_nnr_derivative",
    "finite_horizon_info",
    "JointCovariance", "DirectedInformation", "ConsistencyCheck",
    "joint_covariance", "exact_mi", "exact_directed_info", "consistency_report",
    "TrajectoryBatch", "simulate", "empirical_cost",
    "empirical_prediction_error", "write_trajectories_csv",
    "DesignReport", "TradeoffPoint", "RobustnessGrid", "MaskDiagnosis",
    "quartic_coefficients", "optimal_nnr", "min_privacy_rate", "masks_from_nnr",
    "tradeoff_point", "tradeoff_curve", "boundary_diagnostics", "robustness_sweep",
    "PrivmaskError", "ZeroGain", "NegativeVariance", "NegativeWeight",
    "IllDefinedNnr", "ZeroUplink", "NegativeInput", "DegenerateAll",
    "NoConvergence", "UnstableClosedLoop", "DegenerateMasks", "HorizonTooLarge",
    "HorizonTooShort", "SingularBlock", "NonPositiveAlpha", "ZeroProcessNoise",
    "EmptyInput",
]
