"""Decoherence of two coupled spin-1/2 nuclei under correlated dephasing and
independent amplitude damping: channel generators, propagation, simulated
tomography, and noise-rate estimation from decay curves.
"""

from .channels import (
    NoiseParams,
    TemperatureParams,
    apply_kraus,
    choi_matrix,
    correlated_dephasing_generator,
    correlated_mixture,
    full_generator,
    gad_apply,
    gad_generator,
    gad_generator_single,
    lindblad_generator,
    nbar_from_temperature,
    phase_damping_apply,
    phase_damping_generator,
)
from .estimation import (
    ConvergenceError,
    DataError,
    DecayCurve,
    FitReport,
    RateEstimate,
    fit_exponential,
    fit_noise_model,
    gamma3_difference,
    load_curve,
    save_curve,
    save_report,
    signal_model,
    synthetic_curve,
)
from .evolution import (
    AnalyticDecayState,
    Propagator,
    analytic_dq_state,
    analytic_zq_state,
    coherence_decay_rate,
    default_time_grid,
    matrix_exp,
    propagate,
    propagator,
)
from .presets import PRESETS, MeasuredRates, Preset, get_preset
from .spinops import SpinSystem, angular_momentum, free_evolution, hamiltonian, pauli, pulse
from .states import (
    coherence_spectrum,
    coherence_state,
    prepare_target,
    prepare_via_sequence,
    pseudopure_00,
    sq_preparation,
    thermal_state,
    validate_density_matrix,
)
from .tomography import TomographyRecord, fidelity, reconstruct, simulate_readout

__version__ = "0.1.0"

__all__ = [
    "AnalyticDecayState",
    "ConvergenceError",
    "DataError",
    "DecayCurve",
    "FitReport",
    "MeasuredRates",
    "NoiseParams",
    "PRESETS",
    "Preset",
    "Propagator",
    "RateEstimate",
    "SpinSystem",
    "TemperatureParams",
    "TomographyRecord",
    "analytic_dq_state",
    "analytic_zq_state",
    "angular_momentum",
    "apply_kraus",
    "choi_matrix",
    "coherence_decay_rate",
    "coherence_spectrum",
    "coherence_state",
    "correlated_dephasing_generator",
    "correlated_mixture",
    "default_time_grid",
    "fidelity",
    "fit_exponential",
    "fit_noise_model",
    "free_evolution",
    "full_generator",
    "gad_apply",
    "gad_generator",
    "gad_generator_single",
    "gamma3_difference",
    "get_preset",
    "hamiltonian",
    "lindblad_generator",
    "load_curve",
    "matrix_exp",
    "nbar_from_temperature",
    "pauli",
    "phase_damping_apply",
    "phase_damping_generator",
    "prepare_target",
    "prepare_via_sequence",
    "propagate",
    "propagator",
    "pseudopure_00",
    "pulse",
    "reconstruct",
    "save_curve",
    "save_report",
    "signal_model",
    "simulate_readout",
    "sq_preparation",
    "synthetic_curve",
    "thermal_state",
    "validate_density_matrix",
]
