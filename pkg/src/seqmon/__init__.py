"""Closed-end sequential change point monitoring.

Detector statistics over plug-in functionals of the empirical distribution
(mean, vech-variance, quantile, correlation), with long-run variance or
self-normalized scaling, Monte-Carlo calibrated threshold constants, seeded
simulation models and a study harness.
"""

from .calibration import (
    CalibrationEntry,
    CalibrationTable,
    LimitGrid,
    ThresholdFamily,
    calibrate,
    calibrate_grid,
    default_table,
    load_table,
    save_table,
    simulate_limit_path,
)
from .datagen import ModelSpec, generate
from .detectors import (
    DetectorKind,
    DetectorUndefinedError,
    SnNormalizer,
    cusum_u,
    detector_value,
    sn_update,
    trajectories,
    u_tilde,
)
from .functionals import (
    DegenerateWindowError,
    FunctionalKind,
    PrefixCache,
    ReferenceParams,
    build_prefix_cache,
    estimate,
    influence,
    vech,
)
from .harness import StudySpec, run_data_workflow, run_study
from .lrv import (
    LrvEstimate,
    NonInvertibleError,
    default_bandwidth,
    lrv_for_functional,
    qs_kernel,
    qs_lrv,
)
from .monitor import MonitorConfig, MonitorReport, MonitorState, StepStatus, locate, run

__version__ = "0.1.0"

__all__ = [
    "CalibrationEntry",
    "CalibrationTable",
    "DegenerateWindowError",
    "DetectorKind",
    "DetectorUndefinedError",
    "FunctionalKind",
    "LimitGrid",
    "LrvEstimate",
    "ModelSpec",
    "MonitorConfig",
    "MonitorReport",
    "MonitorState",
    "NonInvertibleError",
    "PrefixCache",
    "ReferenceParams",
    "SnNormalizer",
    "StepStatus",
    "StudySpec",
    "ThresholdFamily",
    "build_prefix_cache",
    "calibrate",
    "calibrate_grid",
    "cusum_u",
    "default_bandwidth",
    "default_table",
    "detector_value",
    "estimate",
    "generate",
    "influence",
    "load_table",
    "locate",
    "lrv_for_functional",
    "qs_kernel",
    "qs_lrv",
    "run",
    "run_data_workflow",
    "run_study",
    "save_table",
    "simulate_limit_path",
    "sn_update",
    "trajectories",
    "u_tilde",
    "vech",
]
