"""Total-variation denoising and the phase-congruency-modulated MPC-TV variant."""

__version__ = "0.1.0"

from ._backend import backend_name, use_numba
from .image_core import DerivativeSet, derivatives, edge_second_derivative, gradient_magnitude, median3x3
from .metrics import evaluate, mssim, snr, ssim_diff, ssim_map
from .noise import NoiseSpec, add_gaussian, add_noise, add_salt_pepper, add_speckle
from .phase_congruency import (
    PCParams,
    PCResult,
    adjust_factor,
    max_moment,
    moment_fields,
    normalize_moment,
    oriented_pc,
    phase_congruency,
)
from .solver import (
    Method,
    SolverConfig,
    SolveTrace,
    denoise,
    fusion_median,
    mpc_step,
    mpc_tv_denoise,
    tv_denoise,
    tv_energy,
    tv_step,
)

__all__ = [
    "DerivativeSet",
    "Method",
    "NoiseSpec",
    "PCParams",
    "PCResult",
    "SolveTrace",
    "SolverConfig",
    "add_gaussian",
    "add_noise",
    "add_salt_pepper",
    "add_speckle",
    "adjust_factor",
    "backend_name",
    "denoise",
    "derivatives",
    "edge_second_derivative",
    "evaluate",
    "fusion_median",
    "gradient_magnitude",
    "max_moment",
    "median3x3",
    "moment_fields",
    "mpc_step",
    "mpc_tv_denoise",
    "mssim",
    "normalize_moment",
    "oriented_pc",
    "phase_congruency",
    "snr",
    "ssim_diff",
    "ssim_map",
    "tv_denoise",
    "tv_energy",
    "tv_step",
    "use_numba",
]
