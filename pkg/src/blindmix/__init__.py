"""Blind demixing of s rank-one signal/channel pairs from one Fourier-domain
observation, solved by Riemannian optimization on a product of quotient
manifolds ``C_*^{N+K} / SU(1)``.
"""

from .cost import CostContext
from .errors import (
    BlindMixError,
    DegeneratePointError,
    DivergenceError,
    InitializationError,
    InvalidSymbolError,
    ModelDecreaseError,
    ShapeError,
    StalledStepError,
    UnsupportedSizeError,
)
from .experiments import (
    ExperimentConfig,
    default_config,
    make_instance,
    run_cond_sweep,
    run_convergence,
    run_noise_sweep,
    run_phase_transition,
    run_trial,
)
from .measurement import (
    MeasurementEnsemble,
    build_ensemble,
    build_gaussian_encoding,
    build_hadamard_encoding,
    build_partial_dft,
    hadamard_matrix,
    synthesize_observation,
)
from .metrics import (
    GroundTruth,
    aligned_distance,
    condition_number,
    draw_ground_truth,
    incoherence_mu,
    relative_error,
)
from .records import TrialRecord, read_records, write_records
from .solvers import (
    RgdConfig,
    TrustRegionConfig,
    fiht_run,
    rgd_run,
    rtr_run,
    spectral_init,
)

__version__ = "0.1.0"

__all__ = [
    "CostContext",
    "TrialRecord",
    "read_records",
    "write_records",
    "BlindMixError",
    "DegeneratePointError",
    "DivergenceError",
    "ExperimentConfig",
    "GroundTruth",
    "InitializationError",
    "InvalidSymbolError",
    "MeasurementEnsemble",
    "ModelDecreaseError",
    "RgdConfig",
    "ShapeError",
    "StalledStepError",
    "TrustRegionConfig",
    "UnsupportedSizeError",
    "aligned_distance",
    "build_ensemble",
    "build_gaussian_encoding",
    "build_hadamard_encoding",
    "build_partial_dft",
    "condition_number",
    "default_config",
    "draw_ground_truth",
    "fiht_run",
    "hadamard_matrix",
    "incoherence_mu",
    "make_instance",
    "relative_error",
    "rgd_run",
    "rtr_run",
    "run_cond_sweep",
    "run_convergence",
    "run_noise_sweep",
    "run_phase_transition",
    "run_trial",
    "spectral_init",
    "synthesize_observation",
]
