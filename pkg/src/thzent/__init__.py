"""Steady-state entanglement of two optically dressed emitters via a lossy THz mode.

Submodules
----------
qcore
    Operators, Lindblad superoperators, steady states and periodic propagation.
models
    Dressed frames and the full, GRWA, adiabatic and doubly-dressed models.
observables
    Concurrence, fidelity, g2, emission spectra, dark state and Liouvillian gap.
conditions
    Stabilisation conditions, parameter reduction and the tuning strategy.
optimize
    Concurrence maximisation, (chi, kappa) maps, drive planes, full-model checks.
tomography
    Pauli tomography with ring-down readout and detector mitigation.
cli
    The ``thzent`` command-line entry point.
"""
from .conditions import (
    InfeasiblePoint,
    condition_residuals,
    reduce_parameters,
    strategy_trace,
)
from .models import (
    SystemParams,
    ValidityWarning,
    build_adiabatic_model,
    build_doubly_dressed_model,
    build_full_model,
    build_grwa_model,
    doubly_dressed_frame,
    dressed_frame,
)
from .observables import (
    concurrence,
    dark_state,
    emission_spectrum,
    fidelity,
    g2_cross,
    gap_analytic,
    gap_numeric,
    steady_report,
)
from .optimize import Axis, Cavity, drive_plane, maximize_concurrence, sweep_map, validate_full
from .qcore import LindbladModel, QMatrix, SolverError, liouvillian, steady_state
from .tomography import DetectorModel, fidelity_study, run_tomography

__version__ = "0.1.0"

__all__ = [
    "Axis", "Cavity", "DetectorModel", "InfeasiblePoint", "LindbladModel", "QMatrix",
    "SolverError", "SystemParams", "ValidityWarning", "build_adiabatic_model",
    "build_doubly_dressed_model", "build_full_model", "build_grwa_model", "concurrence",
    "condition_residuals", "dark_state", "doubly_dressed_frame", "dressed_frame", "drive_plane",
    "emission_spectrum", "fidelity", "fidelity_study", "g2_cross", "gap_analytic", "gap_numeric",
    "liouvillian", "maximize_concurrence", "reduce_parameters", "run_tomography", "steady_report",
    "steady_state", "strategy_trace", "sweep_map", "validate_full",
]
