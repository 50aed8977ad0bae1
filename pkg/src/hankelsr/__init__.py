"""Spectral super-resolution by low-rank Hankel matrix recovery."""

from .hankel_ops import (
    FullMaskError,
    HankelShape,
    antidiagonal_weights,
    build_hankel,
    hankel_adjoint,
    numerical_rank,
    w_min,
)
from .recovery_solvers import (
    RecoveryResult,
    SolverOptions,
    recover_anm,
    recover_hankel_nnm,
    recover_hankel_nnm_noisy,
    relative_error,
    svt,
)
from .signal_model import (
    MeasurementSet,
    Mode,
    SampleMask,
    SpectralSignal,
    add_noise,
    random_instance,
    sample_entries,
    sample_gaussian,
    synthesize,
)

__version__ = "0.1.0"

__all__ = [
    "FullMaskError",
    "HankelShape",
    "MeasurementSet",
    "Mode",
    "RecoveryResult",
    "SampleMask",
    "SolverOptions",
    "SpectralSignal",
    "add_noise",
    "antidiagonal_weights",
    "build_hankel",
    "hankel_adjoint",
    "numerical_rank",
    "random_instance",
    "recover_anm",
    "recover_hankel_nnm",
    "recover_hankel_nnm_noisy",
    "relative_error",
    "sample_entries",
    "sample_gaussian",
    "svt",
    "synthesize",
    "w_min",
]
