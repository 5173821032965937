"""Resonant truncation on a generation set, its Galerkin extension and norms."""
from .approximation import (ApproxResult, approximation_experiment, default_seed, envelope,
                            fit_envelope, sweep)
from .flows import (LiftReport, ModeTrajectory, RescaleParams, gauge_frequency, integrate_modes,
                    lift_and_compare, lifted_toy, rescale, time_factor)
from .galerkin import GalerkinBox, build_galerkin_box, galerkin_field
from .index import (MonomialTable, ResonantIndex, build_resonant_index, cached_index,
                    generation_spread, hres_E, hres_field, lift, load_index, save_index, set_hash)
from .norms import ModeState, ell1, generation_weights, sobolev_norm, sobolev_norm_root

__all__ = [
    "ApproxResult", "GalerkinBox", "LiftReport", "ModeState", "ModeTrajectory", "MonomialTable",
    "RescaleParams", "ResonantIndex", "approximation_experiment", "build_galerkin_box",
    "build_resonant_index", "cached_index", "default_seed", "ell1", "envelope", "fit_envelope",
    "galerkin_field", "gauge_frequency", "generation_spread", "generation_weights", "hres_E",
    "hres_field", "integrate_modes", "lift", "lift_and_compare", "lifted_toy", "load_index",
    "rescale", "save_index", "set_hash", "sobolev_norm", "sobolev_norm_root", "sweep",
    "time_factor",
]
