"""Wavelet assembly, analysis and synthesis.

Harmonic space is the ground truth; spatial forms are renderings through the
sphere and SO(3) transforms.

Analysis::

    W^(j)_{lmn} = f_lm conj(psi^(j)_ln)
    a^Phi_lm    = sqrt(4 pi/(2l+1)) f_lm Phi_l0

Synthesis::

    f_lm = sqrt(4 pi/(2l+1)) a^Phi_lm Phi_l0
           + sum_j (8 pi^2/(2l+1)) sum_n W^(j)_{lmn} psi^(j)_ln

The ``8 pi^2/(2l+1)`` factor comes from integrating ``W(rho) (R_rho psi)(omega)``
over SO(3) with the Wigner orthogonality relation; without it the
reconstruction is not the identity.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import sht, so3
from .directionality import DirectionalityComponent, build_directionality
from .sht import BandLimitError, HarmonicCoeffs, SphereGrid, SphereMap
from .so3 import SO3Grid, SO3Map, WignerCoeffs
from .tiling import KernelSet, TilingConfig, build_kernels


@dataclass(frozen=True)
class WaveletFamily:
    kernels: KernelSet
    dir: DirectionalityComponent
    spin: int
    psi: np.ndarray = field(repr=False)  # (n_scales, L, 2N-1): psi^(j)_{l n}
    phi: np.ndarray = field(repr=False)  # (L,): Phi_l0

    @classmethod
    def from_parts(cls, kernels: KernelSet, dir: DirectionalityComponent, spin: int = 0):
        L = kernels.config.L
        if dir.L != L:
            raise BandLimitError(f"directionality L={dir.L} does not match kernels L={L}")
        ell = np.arange(L)
        norm = np.sqrt((2 * ell + 1) / (8.0 * np.pi**2))
        psi = norm[None, :, None] * kernels.kappa[:, :, None] * dir.values[None, :, :]
        phi = np.sqrt((2 * ell + 1) / (4.0 * np.pi)) * kernels.scaling
        psi.setflags(write=False)
        phi.setflags(write=False)
        return cls(kernels, dir, spin, psi, phi)

    @property
    def L(self) -> int:
        return self.kernels.config.L

    @property
    def N(self) -> int:
        return self.dir.N

    @property
    def scales(self) -> range:
        return self.kernels.config.scales

    def psi_index(self, j: int) -> int:
        return j - self.kernels.config.J0

    def wavelet_coeffs(self, j: int) -> HarmonicCoeffs:
        """``psi^(j)`` as a full harmonic coefficient set (for rendering)."""
        L, N = self.L, self.N
        vals = np.zeros((L, 2 * L - 1), dtype=complex)
        vals[:, L - N:L + N - 1] = self.psi[self.psi_index(j)]
        return HarmonicCoeffs(L, self.spin, vals)

    def scaling_coeffs(self) -> HarmonicCoeffs:
        L = self.L
        vals = np.zeros((L, 2 * L - 1), dtype=complex)
        vals[:, L - 1] = self.phi
        return HarmonicCoeffs(L, self.spin, vals)


def build_family(config: TilingConfig, N: int, spin: int = 0) -> WaveletFamily:
    return WaveletFamily.from_parts(build_kernels(config), build_directionality(config.L, N), spin)


@dataclass(frozen=True)
class WaveletCoefficients:
    """Per-scale Wigner coefficients ``(n_scales, L, 2L-1, 2N-1)`` and scaling ``(L, 2L-1)``."""

    L: int
    N: int
    J0: int
    wavelet: np.ndarray = field(repr=False)
    scaling: np.ndarray = field(repr=False)

    def scale(self, j: int) -> WignerCoeffs:
        return WignerCoeffs(self.L, self.N, self.wavelet[j - self.J0])

    def scaling_coeffs(self) -> HarmonicCoeffs:
        return HarmonicCoeffs(self.L, 0, self.scaling)


def _check_input(f: HarmonicCoeffs, family: WaveletFamily):
    if f.L != family.L:
        raise BandLimitError(f"signal L={f.L} does not match family L={family.L}")
    if f.spin != family.spin:
        raise BandLimitError(f"signal spin {f.spin} does not match family spin {family.spin}")


def analyze_array(f: np.ndarray, family: WaveletFamily) -> tuple[np.ndarray, np.ndarray]:
    """Array form of :func:`analyze`; ``f`` may carry leading batch axes."""
    L = family.L
    ell = np.arange(L)
    f = np.asarray(f, dtype=complex)
    wav = f[..., None, :, :, None] * np.conj(family.psi)[:, :, None, :]
    scal = f * (np.sqrt(4.0 * np.pi / (2 * ell + 1)) * family.phi)[:, None]
    return wav, scal


def synthesize_array(wav: np.ndarray, scal: np.ndarray, family: WaveletFamily) -> np.ndarray:
    L = family.L
    ell = np.arange(L)
    out = scal * (np.sqrt(4.0 * np.pi / (2 * ell + 1)) * family.phi)[:, None]
    w = (8.0 * np.pi**2 / (2 * ell + 1))[:, None]
    for i in range(family.psi.shape[0]):
        out = out + w * np.sum(wav[..., i, :, :, :] * family.psi[i][:, None, :], axis=-1)
    return out


def analyze(f: HarmonicCoeffs, family: WaveletFamily) -> WaveletCoefficients:
    _check_input(f, family)
    wav, scal = analyze_array(f.values, family)
    return WaveletCoefficients(family.L, family.N, family.kernels.config.J0, wav, scal)


def synthesize(coeffs: WaveletCoefficients, family: WaveletFamily) -> HarmonicCoeffs:
    if coeffs.L != family.L or coeffs.N != family.N or coeffs.wavelet.shape[0] != family.psi.shape[0]:
        raise BandLimitError("wavelet coefficients do not match the family")
    out = synthesize_array(coeffs.wavelet, coeffs.scaling, family)
    out[..., : abs(family.spin), :] = 0.0
    return HarmonicCoeffs(family.L, family.spin, out)


def analyze_spatial(smap: SphereMap, family: WaveletFamily) -> tuple[list[SO3Map], SphereMap]:
    """Wavelet coefficients rendered on SO(3) per scale, scaling coefficients on S^2."""
    f = sht.forward_sht(smap)
    coeffs = analyze(f, family)
    grid = SO3Grid(family.L, family.N)
    maps = [SO3Map(grid, so3.inverse_array(coeffs.wavelet[i], family.L, family.N))
            for i in range(coeffs.wavelet.shape[0])]
    scal = sht.inverse_sht(coeffs.scaling_coeffs(), SphereGrid(family.L))
    return maps, scal


def synthesize_spatial(maps: list[SO3Map], scaling: SphereMap, family: WaveletFamily) -> SphereMap:
    wav = np.stack([so3.forward_array(m.values, family.L, family.N) for m in maps])
    scal = sht.forward_array(scaling.values, family.L, 0)
    coeffs = WaveletCoefficients(family.L, family.N, family.kernels.config.J0, wav, scal)
    return sht.inverse_sht(synthesize(coeffs, family), SphereGrid(family.L))


def frame_energy(f: HarmonicCoeffs, family: WaveletFamily) -> tuple[float, float]:
    """(wavelet + scaling energy, ``||f||^2``) from harmonic coefficients."""
    ell = np.arange(family.L)
    wav, scal = analyze_array(f.values, family)
    e_w = float(np.sum((8.0 * np.pi**2 / (2 * ell + 1))[:, None, None] * np.abs(wav) ** 2))
    e_s = float(np.sum(np.abs(scal) ** 2))
    return e_w + e_s, float(np.sum(np.abs(f.values) ** 2))


def north_pole_delta(L: int) -> HarmonicCoeffs:
    """Band-limited Dirac delta at the North pole: ``f_lm = conj(Y_lm(0, .))``."""
    vals = np.zeros((L, 2 * L - 1), dtype=complex)
    vals[:, L - 1] = np.sqrt((2 * np.arange(L) + 1) / (4.0 * np.pi))
    return HarmonicCoeffs(L, 0, vals)
