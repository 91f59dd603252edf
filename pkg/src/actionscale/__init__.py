"""Characteristic actions of decoherence by a chaotic environment.

Spectral wave-function lattice, overlaps ``<psi|D|psi>`` and their threshold
actions, Wigner/Husimi representations, split-operator propagation under a
driven oscillator, and microcanonical closed forms.
"""
from .berry_voros import (BVModel, FDisplacement, bv_eigen_char, bv_overlap,
                          mc_microcanonical_oracle, poisson_weights)
from .checkpoint import load_state, save_state
from .config import ExperimentConfig, parse_config
from .grid import Grid, GridFitError, NumericalGuardError, make_grid
from .overlap import (Displacement, apply_displacement, gaussian_overlap_closed_form,
                      overlap_c, overlap_scan, threshold_search)
from .phasespace import husimi, moyal_overlap, overlap_from_distribution, wigner
from .propagator import DriveParams, observables_vs_T, prepare
from .states import (GaussianSpec, WaveFunction, coherent_state, delta_s, delta_z,
                     gaussian_state, moments, patch_action)

__version__ = "0.1.0"

__all__ = [
    "BVModel", "FDisplacement", "bv_eigen_char", "bv_overlap", "mc_microcanonical_oracle",
    "poisson_weights", "load_state", "save_state", "ExperimentConfig", "parse_config",
    "Grid", "GridFitError", "NumericalGuardError", "make_grid", "Displacement",
    "apply_displacement", "gaussian_overlap_closed_form", "overlap_c", "overlap_scan",
    "threshold_search", "husimi", "moyal_overlap", "overlap_from_distribution", "wigner",
    "DriveParams", "observables_vs_T", "prepare", "GaussianSpec", "WaveFunction",
    "coherent_state", "delta_s", "delta_z", "gaussian_state", "moments", "patch_action",
]
