"""Participation-factor toolkit for small nonlinear dynamical systems.

Computes linear, nonlinear (2nd-order normal form), extended and
time-variant participation factors, including resonance-mode
contributions aggregated by Gaussian convolution of the participation
spectrum, with an independent simulation oracle for validating the modal
reconstruction.
"""

from . import _threads

_threads.apply()

from .errors import (
    ConvergenceError,
    DefectiveMatrixError,
    DivergenceError,
    EquilibriumError,
    IntegrationAccuracyWarning,
    NfpfError,
    NotAtEquilibriumError,
    ResonanceWarning,
    SchemaError,
)
from .modal import ModalBasis, contribution_factors, decompose, linear_pf
from .normalform import (
    SecondOrderNF,
    h2_coefficients,
    invert_initial_condition,
    reconstruct_response,
    second_order_coeffs,
)
from .participation import (
    BandMode,
    ParticipationSet,
    PFSpectrum,
    SpectrumPoint,
    TNPFConfig,
    convolve_at,
    extended_pf,
    mode_pairs,
    nonlinear_modes,
    nonlinear_pf,
    pf_spectrum,
    rank_states,
    tnpf_terms,
)
from .simkit import Trajectory, dominant_frequencies, integrate, reconstruction_error
from .sysmodel import (
    QuadraticModel,
    SwingParams,
    build_swing_model,
    electrical_power,
    load_model,
    model_from_dict,
    quadratize_finite_diff,
    save_model,
    solve_equilibrium,
    swing_deviation_field,
    swing_vector_field,
)

__version__ = "0.1.0"

__all__ = [
    "BandMode",
    "ConvergenceError",
    "DefectiveMatrixError",
    "DivergenceError",
    "EquilibriumError",
    "IntegrationAccuracyWarning",
    "ModalBasis",
    "NfpfError",
    "NotAtEquilibriumError",
    "ParticipationSet",
    "PFSpectrum",
    "QuadraticModel",
    "ResonanceWarning",
    "SchemaError",
    "SecondOrderNF",
    "SpectrumPoint",
    "SwingParams",
    "TNPFConfig",
    "Trajectory",
    "build_swing_model",
    "contribution_factors",
    "convolve_at",
    "decompose",
    "dominant_frequencies",
    "electrical_power",
    "extended_pf",
    "h2_coefficients",
    "integrate",
    "invert_initial_condition",
    "linear_pf",
    "load_model",
    "mode_pairs",
    "model_from_dict",
    "nonlinear_modes",
    "nonlinear_pf",
    "pf_spectrum",
    "quadratize_finite_diff",
    "rank_states",
    "reconstruct_response",
    "reconstruction_error",
    "save_model",
    "second_order_coeffs",
    "solve_equilibrium",
    "swing_deviation_field",
    "swing_vector_field",
    "tnpf_terms",
]
