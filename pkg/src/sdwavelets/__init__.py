"""Directional scale-discretised wavelets on the sphere."""

from .sht import HarmonicCoeffs, SphereGrid, SphereMap, forward_sht, inverse_sht
from .so3 import SO3Grid, SO3Map, WignerCoeffs
from .tiling import KernelSet, TilingConfig, build_kernels
from .directionality import DirectionalityComponent, build_directionality
from .transform import WaveletCoefficients, WaveletFamily, analyze, build_family, synthesize

__version__ = "0.1.0"

__all__ = [
    "HarmonicCoeffs", "SphereGrid", "SphereMap", "forward_sht", "inverse_sht",
    "SO3Grid", "SO3Map", "WignerCoeffs",
    "KernelSet", "TilingConfig", "build_kernels",
    "DirectionalityComponent", "build_directionality",
    "WaveletCoefficients", "WaveletFamily", "analyze", "build_family", "synthesize",
]
