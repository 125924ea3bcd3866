"""Spectral solver for u_t + g(x) u_x + u_xxx = 0 with discrete transparent boundary conditions."""

from .config import RunConfig
from .orthopoly import SpectralRule, build_rule, discrete_inner_product
from .reference import airy_exact, error_norms, fourier_constant_g, fourier_semidiscrete
from .solver import Coefficient, ProblemSpec, gaussian, run
from .tbc import TbcKernels, build_kernels, characteristic_roots

__all__ = [
    "Coefficient",
    "ProblemSpec",
    "RunConfig",
    "SpectralRule",
    "TbcKernels",
    "airy_exact",
    "build_kernels",
    "build_rule",
    "characteristic_roots",
    "discrete_inner_product",
    "error_norms",
    "fourier_constant_g",
    "fourier_semidiscrete",
    "gaussian",
    "run",
]
