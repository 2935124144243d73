"""Monte-Carlo ghost diffraction of pure-phase objects with pseudothermal light."""
from .archive import ArchiveHeader, read_archive, write_archive
from .config import ExperimentConfig, load_config, parse_config
from .correlator import (CorrelationAccumulator, CorrelationProfile, PairingMode, accumulate,
                         estimate_statistical_error, finalize, jackknife)
from .errors import ArchiveError, GhostDiffError, NumericalGuardError, ValidationError
from .grid import ComplexField, IntensityFrame, SampleGrid, intensity_of, make_grid
from .kernels import BACKEND
from .optics import (ArmGeometry, ObjectSpec, fraunhofer_2f_reference, fresnel_kernel_apply,
                     propagate_arm1, propagate_arm2, transmittance)
from .oracle import (analytic_fraunhofer_profile, analytic_ghost_profile, analytic_hbt_profile,
                     quadrature_delta_I, quadrature_ghost_slice)
from .runner import replay_archive, run_experiment
from .source import RandomStream, SourceSpec, ensemble_statistics, generate_realization

__version__ = "0.1.0"

__all__ = [
    "ArchiveError", "ArchiveHeader", "ArmGeometry", "BACKEND", "ComplexField", "CorrelationAccumulator",
    "CorrelationProfile", "ExperimentConfig", "GhostDiffError", "IntensityFrame", "NumericalGuardError",
    "ObjectSpec", "PairingMode", "RandomStream", "SampleGrid", "SourceSpec", "ValidationError",
    "accumulate", "analytic_fraunhofer_profile", "analytic_ghost_profile", "analytic_hbt_profile",
    "ensemble_statistics", "estimate_statistical_error", "finalize", "fraunhofer_2f_reference",
    "fresnel_kernel_apply", "generate_realization", "intensity_of", "jackknife", "load_config",
    "make_grid", "parse_config", "propagate_arm1", "propagate_arm2", "quadrature_delta_I",
    "quadrature_ghost_slice", "read_archive", "replay_archive", "run_experiment", "transmittance",
    "write_archive",
]
