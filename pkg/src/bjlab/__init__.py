"""Numerical laboratory for tau-Wigner and Born-Jordan phase-space distributions."""

__version__ = "0.1.0"

from .bornjordan import (EndpointDivergenceError, TauQuadratureSpec, annulus_truncation_delta,
                         bj_field, bj_incomplete_point, bj_point)
from .bounds import (BoundReport, cos_factor, lb_bj, lb_corollary, lb_F_alpha_bj, lb_wtau_x0,
                     subcritical_envelope)
from .concentration import (ConcentrationReport, OmegaSet, PhaseField, PhaseGrid, blowup_scan,
                            concentration_ratio, delta_scan, density_point, lp_norm_on_omega,
                            translation_vanishing)
from .families import (PhaseSpacePoint, RadialProfile, SampledSignal, critical_exponent,
                       l2_norm_squared, make_annular_superposition, make_F_alpha, make_f_R,
                       make_f_rR, sample, time_frequency_shift, unit_sphere_area)
from .opbj import SymbolField, opbj_norm_probe, opbj_pairing
from .optimizer import DictionaryCoefficients, maximize_concentration, objective_gradient_check
from .tauwigner import WignerSlice, wtau_fR_origin, wtau_point, wtau_slice
from .wavepackets import WavepacketSum

__all__ = [
    "EndpointDivergenceError", "TauQuadratureSpec", "annulus_truncation_delta", "bj_field",
    "bj_incomplete_point", "bj_point", "BoundReport", "cos_factor", "lb_bj", "lb_corollary",
    "lb_F_alpha_bj", "lb_wtau_x0", "subcritical_envelope", "ConcentrationReport", "OmegaSet",
    "PhaseField", "PhaseGrid", "blowup_scan", "concentration_ratio", "delta_scan",
    "density_point", "lp_norm_on_omega", "translation_vanishing", "PhaseSpacePoint",
    "RadialProfile", "SampledSignal", "critical_exponent", "l2_norm_squared",
    "make_annular_superposition", "make_F_alpha", "make_f_R", "make_f_rR", "sample",
    "time_frequency_shift", "unit_sphere_area", "SymbolField", "opbj_norm_probe",
    "opbj_pairing", "DictionaryCoefficients", "maximize_concentration",
    "objective_gradient_check", "WignerSlice", "wtau_fR_origin", "wtau_point", "wtau_slice",
    "WavepacketSum",
]
