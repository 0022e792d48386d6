"""Finite-time Carnot cycle of a qubit quantum information engine.

Measurement-plus-feedback replaces the cold bath; the package builds the
reversible measurement channel, integrates the hot-isotherm dynamics and
computes or optimizes work, efficiency and power.
"""
from .cycle import CycleConfig, CycleResult, derive_cycle, run_cycle, run_cycle_analytic, run_cycle_numeric
from .errors import (
    BracketError,
    EngineError,
    InfeasibleDurationError,
    InvalidParameterError,
    InvalidStateError,
    NumericFailureError,
    ProtocolMismatchError,
    ReversibilityViolationError,
)
from .isotherm import (
    BathCoupling,
    IsothermSpec,
    Trajectory,
    beta_prime_for_duration,
    entropy_change_highT,
    frequency_schedule,
    isotherm_duration_highT,
    polarization_rate,
    relax_constant_omega,
    sigma_coefficient,
    simulate_isotherm,
)
from .measurement import (
    GeneralizedMeasurement,
    MeasurementRecord,
    FeedbackReport,
    apply_feedback,
    apply_measurement,
    build_measurement,
    completeness_defect,
    measurement_statistics,
)
from .optimize import (
    CycleFamily,
    OptimizationReport,
    brute_force_max_power,
    dissipation_time,
    eta_star,
    eta_star_microscopic,
    optimal_hot_time,
    p_star,
    sweep,
)
from .states import (
    DensityMatrix,
    PolarizationSpectrum,
    ScaledHamiltonian,
    effective_beta,
    energy,
    entropy,
    entropy_highT,
    polarization_of,
    thermal_state,
)

__version__ = "0.1.0"
