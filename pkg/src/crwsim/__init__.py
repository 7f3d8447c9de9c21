"""Semiclassical simulation of controlled collective emission in a
coupled-resonator waveguide.

A target ensemble of two-level atoms radiates into a 1D tight-binding
photonic lattice; a second, control ensemble coupled at one or two sites
reshapes that emission (scaling, trapping, chirality).  The package
provides the stochastic trajectory engine, the analytic two-amplitude
model, an exact single-excitation oracle, observable extraction, scaling
fits and a CLI for the standard experiments.
"""

from .config import (ControlClass, GeometryInfo, SpecError, SystemSpec,
                     classify_control, default_window, derive_geometry,
                     group_velocity, tight_window, validate_spec, with_window)
from .dtwa import (EngineError, EnsembleRecord, IntegratorSettings,
                   TrajectorySeries, TrajectoryState, run_ensemble,
                   run_trajectory, trajectory_seeds)
from .exact import OracleError, bic_profile, build_generator, propagate
from .fits import FitError, PowerLawFit, dicke_ratio, power_law_fit, saturation_curve
from .minimal import (CouplingMatrix, MinimalModelError, chirality_formulas,
                      closed_form_amplitudes, coupling_matrix, eigen_and_bic,
                      integrate_delay_equations, photon_amplitude)
from .observables import (ObservableError, chirality, collective_inversion,
                          compute_observables, half_decay_time,
                          integrated_chirality, intensity_map,
                          pair_correlation, photon_number, radiance,
                          radiance_strength)
from .presets import Preset, PresetError, get_preset, preset_names

__version__ = "0.1.0"

__all__ = [
    "ControlClass", "GeometryInfo", "SpecError", "SystemSpec",
    "classify_control", "default_window", "derive_geometry", "group_velocity",
    "tight_window", "validate_spec", "with_window",
    "EngineError", "EnsembleRecord", "IntegratorSettings", "TrajectorySeries",
    "TrajectoryState", "run_ensemble", "run_trajectory", "trajectory_seeds",
    "OracleError", "bic_profile", "build_generator", "propagate",
    "FitError", "PowerLawFit", "dicke_ratio", "power_law_fit",
    "saturation_curve",
    "CouplingMatrix", "MinimalModelError", "chirality_formulas",
    "closed_form_amplitudes", "coupling_matrix", "eigen_and_bic",
    "integrate_delay_equations", "photon_amplitude",
    "ObservableError", "chirality", "collective_inversion",
    "compute_observables", "half_decay_time", "integrated_chirality",
    "intensity_map",
    "pair_correlation", "photon_number", "radiance", "radiance_strength",
    "Preset", "PresetError", "get_preset", "preset_names",
]
