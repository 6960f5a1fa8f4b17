"""Photoacoustic tomography in attenuating media.

Forward simulation of integrated pressure data on planar and spherical
observation surfaces under a weak attenuation law, and the two exact inverse
pipelines: a planar Fourier-domain remap through the inverse attenuation
coefficient, and a spherical filtered backprojection with a Neumann-series
attenuation correction.
"""

from .attenuation import (
    AttenuationModel,
    KappaStarRational,
    KappaStarZero,
    RjKernel,
    compute_rj,
    eval_kappa,
    eval_kappa_continued,
    eval_kappa_inverse,
    herglotz_check,
    no_attenuation,
    rj_boundedness_report,
)
from .phantom import GaussianBlob, Phantom, VolumeGrid, rasterize, single_blob, spherical_mean_oracle
from .transforms import (
    SpectralField,
    UniformGrid1D,
    dft_forward,
    dft_inverse,
    fourier_laplace_eval,
    hankel_radial_check,
    interp_trace,
)

__all__ = [
    "AttenuationModel",
    "KappaStarRational",
    "KappaStarZero",
    "RjKernel",
    "compute_rj",
    "eval_kappa",
    "eval_kappa_continued",
    "eval_kappa_inverse",
    "herglotz_check",
    "no_attenuation",
    "rj_boundedness_report",
    "GaussianBlob",
    "Phantom",
    "VolumeGrid",
    "rasterize",
    "single_blob",
    "spherical_mean_oracle",
    "SpectralField",
    "UniformGrid1D",
    "dft_forward",
    "dft_inverse",
    "fourier_laplace_eval",
    "hankel_radial_check",
    "interp_trace",
]

__version__ = "0.1.0"
