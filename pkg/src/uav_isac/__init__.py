"""Tracking-platform simulation toolkit.

An aerial platform flies at fixed altitude above a line, keeps a
Kalman track on a moving object from angle/delay/Doppler returns,
and replans its own position every slot to trade estimation accuracy
against the communication rate it must sustain.
"""

from .errors import (
    BracketError,
    ConfigError,
    InfeasibleIntervalError,
    InfeasibleQosError,
    NotPositiveDefiniteError,
    SingularMatrixError,
    UavIsacError,
    VelocityBoundError,
)
from .params import SystemParams
from .sensing import Measurement, RelativeState, achievable_rate, sample_measurement
from .ekf import FilterState, PcrbPair, Prediction, crb_measurement, predict, predicted_pcrb, update
from .optimize import (
    P1Instance,
    ScaResult,
    Sp1Result,
    design_trajectory,
    qos_radius,
    solve_p1_sca,
    solve_sp1,
    sweep_angle,
    tradeoff_frontier,
)
from .simulate import MonteCarloStats, ScenarioConfig, SlotRecord, WorldState, run_monte_carlo, run_scenario
from .validate import CheckResult, run_all

__version__ = "0.1.0"

__all__ = [
    "BracketError",
    "CheckResult",
    "ConfigError",
    "FilterState",
    "InfeasibleIntervalError",
    "InfeasibleQosError",
    "Measurement",
    "MonteCarloStats",
    "NotPositiveDefiniteError",
    "P1Instance",
    "PcrbPair",
    "Prediction",
    "RelativeState",
    "ScaResult",
    "ScenarioConfig",
    "SingularMatrixError",
    "SlotRecord",
    "Sp1Result",
    "SystemParams",
    "UavIsacError",
    "VelocityBoundError",
    "WorldState",
    "achievable_rate",
    "crb_measurement",
    "design_trajectory",
    "predict",
    "predicted_pcrb",
    "qos_radius",
    "run_all",
    "run_monte_carlo",
    "run_scenario",
    "sample_measurement",
    "solve_p1_sca",
    "solve_sp1",
    "sweep_angle",
    "tradeoff_frontier",
    "update",
    "__version__",
]
