"""Instantaneous 3D ego-velocity estimation from automotive radar scans."""

from .errors import (
    ConfigError,
    DegenerateSample,
    InvalidLossSpec,
    MissingColumn,
    NoPairs,
    NoValidHypothesis,
    NonFiniteObjective,
    NonMonotonicScanId,
    NonMonotonicTimestamp,
    NotEnoughDetections,
    OutOfSpan,
    ParseError,
    RadarError,
    RankDeficient,
    ZeroRangeDetection,
)
from .evaluation import ErrorReport, ExtrinsicSpec, GroundTruth, GroundTruthSample, interpolate_gt, score, transfer_velocity
from .gating import (
    Combination,
    Decision,
    FilterConfig,
    FilterState,
    ZeroVelocityConfig,
    detect_zero_velocity,
    filter_step,
)
from .losses import LossKind, LossSpec, evaluate, evaluate_grad, snr_weights, weight_of
from .optimize import SolveResult, SolverConfig, objective_and_gradient, solve_linear_ls, solve_robust
from .pipeline import DopplerSign, EgoVelocityEstimator, EstimatorConfig, process_scan, process_sequence
from .rejection import (
    InlierReport,
    RejectionMethod,
    RejectorConfig,
    run_gnc,
    run_mlesac,
    run_ransac,
    run_rejector,
    solve_three_point,
)
from .synth import SceneSpec, generate_scan, generate_trajectory_stream
from .types import (
    Detection,
    EstimateStatus,
    RadarScan,
    VelocityEstimate,
    direction_of,
    predict_doppler,
    residual,
    scan_residuals,
)

__version__ = "0.1.0"

__all__ = [
    "Combination",
    "ConfigError",
    "Decision",
    "DegenerateSample",
    "Detection",
    "DopplerSign",
    "EgoVelocityEstimator",
    "ErrorReport",
    "EstimateStatus",
    "EstimatorConfig",
    "ExtrinsicSpec",
    "FilterConfig",
    "FilterState",
    "GroundTruth",
    "GroundTruthSample",
    "InlierReport",
    "InvalidLossSpec",
    "LossKind",
    "LossSpec",
    "MissingColumn",
    "NoPairs",
    "NoValidHypothesis",
    "NonFiniteObjective",
    "NonMonotonicScanId",
    "NonMonotonicTimestamp",
    "NotEnoughDetections",
    "OutOfSpan",
    "ParseError",
    "RadarError",
    "RadarScan",
    "RankDeficient",
    "RejectionMethod",
    "RejectorConfig",
    "SceneSpec",
    "SolveResult",
    "SolverConfig",
    "VelocityEstimate",
    "ZeroRangeDetection",
    "ZeroVelocityConfig",
    "detect_zero_velocity",
    "direction_of",
    "evaluate",
    "evaluate_grad",
    "filter_step",
    "generate_scan",
    "generate_trajectory_stream",
    "interpolate_gt",
    "objective_and_gradient",
    "predict_doppler",
    "process_scan",
    "process_sequence",
    "residual",
    "run_gnc",
    "run_mlesac",
    "run_ransac",
    "run_rejector",
    "scan_residuals",
    "score",
    "snr_weights",
    "solve_linear_ls",
    "solve_robust",
    "solve_three_point",
    "transfer_velocity",
    "weight_of",
]
