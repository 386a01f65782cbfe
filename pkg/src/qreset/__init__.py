"""First-detection statistics of a monitored tight-binding chain under sharp restart.

A particle hops on an open 1-D chain and a detector site is probed
projectively every ``tau``.  The package computes the first-detection
PMF three ways (projective dynamics, and two dissipative surrogates
that replace the measurement backaction with complex generators),
layers a sharp-restart protocol on top, and extracts the derived
quantities those descriptions are judged by: window decay weights,
survival timescales, optimal restart times, and per-window accuracy
gaps.  The ``qreset`` CLI drives the standard experiments into CSV.
"""

from .analysis import (
    AlphaResult,
    ComparisonReport,
    FitResult,
    OptimalTr,
    alpha,
    delta_p_r,
    fit_exponential,
    optimal_tr_exact,
    optimal_tr_nh,
    survival_prediction,
)
from .cli import CsvArtifact, RunConfig, main, parse_config, parse_values, run_experiment, sweep
from .dynamics import (
    DetectionSeries,
    RenewalSeries,
    measured_evolution,
    nh_survival_series,
    renewal_amplitudes,
)
from .errors import (
    BoundaryContaminationError,
    ConfigError,
    ExpmScalingError,
    InstantAbsorptionError,
    NeverDetectedError,
    QresetError,
)
from .lattice import (
    EvolutionOperator,
    LatticeSpec,
    ModelKind,
    build_hamiltonian,
    build_model1_heff,
    build_model2_heff,
    build_tb_hamiltonian,
    initial_state,
    propagator,
    step_propagator,
)
from .restart import (
    RestartResult,
    RestartSpec,
    build_reset_heff,
    mfdt,
    mfdt_direct,
    reset_pdet,
    reset_survival,
    restart_pmf,
    run_restart,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # lattice
    "ModelKind",
    "LatticeSpec",
    "EvolutionOperator",
    "build_tb_hamiltonian",
    "build_model1_heff",
    "build_model2_heff",
    "build_hamiltonian",
    "propagator",
    "step_propagator",
    "initial_state",
    # dynamics
    "DetectionSeries",
    "RenewalSeries",
    "measured_evolution",
    "renewal_amplitudes",
    "nh_survival_series",
    # restart
    "RestartSpec",
    "RestartResult",
    "restart_pmf",
    "mfdt",
    "mfdt_direct",
    "reset_survival",
    "reset_pdet",
    "build_reset_heff",
    "run_restart",
    # analysis
    "AlphaResult",
    "ComparisonReport",
    "OptimalTr",
    "FitResult",
    "alpha",
    "survival_prediction",
    "optimal_tr_nh",
    "optimal_tr_exact",
    "delta_p_r",
    "fit_exponential",
    # cli
    "RunConfig",
    "CsvArtifact",
    "parse_config",
    "parse_values",
    "run_experiment",
    "sweep",
    "main",
    # errors
    "QresetError",
    "ConfigError",
    "BoundaryContaminationError",
    "NeverDetectedError",
    "InstantAbsorptionError",
    "ExpmScalingError",
]
