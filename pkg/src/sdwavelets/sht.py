"""Spin spherical harmonic transforms on a Gauss-Legendre x equiangular grid.

Coefficients are stored densely as ``values[..., ell, m + L - 1]`` with zeros
for ``|m| > ell``; leading axes are batch axes. Maps are ``values[..., k, p]``
at colatitude ``theta_k`` (ascending) and longitude ``phi_p = 2 pi p / (2L-1)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import roots_legendre

from .special_functions import sph_legendre_normalized, wigner_d_recursion

# Per-(L, spin) synthesis tables above this many bytes are streamed from the
# recursion instead of cached.
_TABLE_CACHE_BYTES = 96 * 2**20


class BandLimitError(ValueError):
    pass


@lru_cache(maxsize=None)
def _gl_nodes(L: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre colatitudes (ascending) and weights.

    scipy's weights lose ~1e-11 relative accuracy near the poles by L = 128,
    which breaks 1e-12 round trips. The nodes are polished by one Newton step
    in theta and the weights recomputed as ``2 / P_L^1(cos theta)^2`` from the
    normalised recursion, which is accurate to rounding.
    """
    x, _ = roots_legendre(L)
    theta = np.sort(np.arccos(x))
    if L > 1:
        c0 = np.sqrt(4.0 * np.pi / (2 * L + 1))
        c1 = c0 * np.sqrt(L * (L + 1.0))
        p = sph_legendre_normalized(L + 1, 0, theta)[L] * c0
        dp = -sph_legendre_normalized(L + 1, 1, theta)[L] * c1
        theta = theta - p / dp
        w = 2.0 / (sph_legendre_normalized(L + 1, 1, theta)[L] * c1) ** 2
    else:
        w = np.array([2.0])
    theta.setflags(write=False)
    w.setflags(write=False)
    return theta, w


@dataclass(frozen=True)
class SphereGrid:
    L: int
    theta: np.ndarray = field(init=False, repr=False)
    weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.L < 1:
            raise BandLimitError(f"band-limit must be >= 1, got {self.L}")
        theta, w = _gl_nodes(self.L)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "weights", w)

    @property
    def n_phi(self) -> int:
        return 2 * self.L - 1

    @property
    def phi(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.n_phi) / self.n_phi

    @property
    def shape(self) -> tuple[int, int]:
        return (self.L, self.n_phi)

    def area_weights(self) -> np.ndarray:
        """Quadrature weights for integrals over the sphere, shape ``(L, 2L-1)``."""
        return np.repeat(self.weights[:, None] * (2.0 * np.pi / self.n_phi),
                         self.n_phi, axis=1)


@dataclass(frozen=True)
class HarmonicCoeffs:
    L: int
    spin: int
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape[-2:] != (self.L, 2 * self.L - 1):
            raise BandLimitError(
                f"coefficient array shape {self.values.shape} does not match L={self.L}")

    @classmethod
    def zeros(cls, L: int, spin: int = 0) -> "HarmonicCoeffs":
        return cls(L, spin, np.zeros((L, 2 * L - 1), dtype=complex))

    def get(self, ell: int, m: int) -> complex:
        return complex(self.values[..., ell, m + self.L - 1])

    def to_flat(self) -> np.ndarray:
        """ell-major, m-ascending vector of length ``L^2``."""
        return self.values[..., valid_mask(self.L)]

    @classmethod
    def from_flat(cls, L: int, spin: int, flat: np.ndarray) -> "HarmonicCoeffs":
        flat = np.asarray(flat, dtype=complex)
        if flat.shape[-1] != L * L:
            raise BandLimitError(f"expected {L * L} coefficients, got {flat.shape[-1]}")
        out = np.zeros(flat.shape[:-1] + (L, 2 * L - 1), dtype=complex)
        out[..., valid_mask(L)] = flat
        return cls(L, spin, out)


@dataclass(frozen=True)
class SphereMap:
    grid: SphereGrid
    spin: int
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape[-2:] != self.grid.shape:
            raise BandLimitError(
                f"map shape {self.values.shape} does not match grid {self.grid.shape}")


@lru_cache(maxsize=None)
def valid_mask(L: int) -> np.ndarray:
    """Boolean ``(L, 2L-1)`` mask of the entries with ``|m| <= ell``."""
    ell = np.arange(L)[:, None]
    m = np.arange(-(L - 1), L)[None, :]
    mask = np.abs(m) <= ell
    mask.setflags(write=False)
    return mask


def _ylm_rows(L: int, spin: int, thetas: np.ndarray):
    """Yield ``(ell, T)`` with ``T[m + L - 1, k] = (-1)^s sqrt((2l+1)/4pi) d^l_{m,-s}(theta_k)``."""
    ms = np.arange(-(L - 1), L)
    sign = -1.0 if spin % 2 else 1.0
    for ell, d in wigner_d_recursion(L, ms, [-spin], thetas):
        yield ell, sign * np.sqrt((2 * ell + 1) / (4.0 * np.pi)) * d[:, :, 0]


@lru_cache(maxsize=8)
def _ylm_table(L: int, spin: int) -> np.ndarray:
    theta, _ = _gl_nodes(L)
    table = np.empty((L, 2 * L - 1, L))
    for ell, rows in _ylm_rows(L, spin, theta):
        table[ell] = rows
    table.setflags(write=False)
    return table


def _table_iter(L: int, spin: int):
    if L * (2 * L - 1) * L * 8 <= _TABLE_CACHE_BYTES:
        table = _ylm_table(L, spin)
        return ((ell, table[ell]) for ell in range(L))
    return _ylm_rows(L, spin, _gl_nodes(L)[0])


def inverse_array(values: np.ndarray, L: int, spin: int = 0) -> np.ndarray:
    """Synthesise maps from dense coefficient arrays with optional batch axes."""
    values = np.asarray(values, dtype=complex)
    batch = values.shape[:-2]
    acc = np.zeros(batch + (2 * L - 1, L), dtype=complex)
    for ell, rows in _table_iter(L, spin):
        if ell < abs(spin):
            continue
        acc += values[..., ell, :, None] * rows
    # acc[..., m, k] -> (..., k, m), then sum_m acc e^{i m phi}
    acc = np.swapaxes(acc, -1, -2)
    n_phi = 2 * L - 1
    return n_phi * np.fft.ifft(np.fft.ifftshift(acc, axes=-1), axis=-1)


def forward_array(values: np.ndarray, L: int, spin: int = 0) -> np.ndarray:
    """Analyse maps ``(..., L, 2L-1)`` into dense coefficient arrays."""
    values = np.asarray(values, dtype=complex)
    n_phi = 2 * L - 1
    _, w = _gl_nodes(L)
    fm = (2.0 * np.pi / n_phi) * np.fft.fftshift(np.fft.fft(values, axis=-1), axes=-1)
    fm = np.swapaxes(fm * w[:, None], -1, -2)  # (..., m, k)
    out = np.zeros(values.shape[:-2] + (L, n_phi), dtype=complex)
    for ell, rows in _table_iter(L, spin):
        if ell < abs(spin):
            continue
        out[..., ell, :] = np.sum(fm * rows, axis=-1)
    out[..., ~valid_mask(L)] = 0.0
    return out


def inverse_sht(coeffs: HarmonicCoeffs, grid: SphereGrid | None = None) -> SphereMap:
    grid = grid or SphereGrid(coeffs.L)
    if coeffs.L > grid.L:
        raise BandLimitError(f"coefficients with L={coeffs.L} exceed grid L={grid.L}")
    values = coeffs.values
    if coeffs.L < grid.L:
        values = pad_coeffs(values, coeffs.L, grid.L)
    return SphereMap(grid, coeffs.spin, inverse_array(values, grid.L, coeffs.spin))


def forward_sht(smap: SphereMap) -> HarmonicCoeffs:
    L = smap.grid.L
    return HarmonicCoeffs(L, smap.spin, forward_array(smap.values, L, smap.spin))


def pad_coeffs(values: np.ndarray, L_from: int, L_to: int) -> np.ndarray:
    out = np.zeros(values.shape[:-2] + (L_to, 2 * L_to - 1), dtype=complex)
    off = L_to - L_from
    out[..., :L_from, off:off + 2 * L_from - 1] = values
    return out


def evaluate(coeffs: HarmonicCoeffs, theta, phi) -> np.ndarray:
    """Direct synthesis at arbitrary points (no grid, no FFT)."""
    theta = np.asarray(theta, dtype=float)
    phi = np.broadcast_to(np.asarray(phi, dtype=float), theta.shape)
    L, s = coeffs.L, coeffs.spin
    vals = coeffs.values
    ms = np.arange(-(L - 1), L)
    used = ms[np.any(vals != 0, axis=0)]
    flat_t = theta.reshape(-1)
    if used.size == 0:
        return np.zeros(theta.shape, dtype=complex)
    acc = np.zeros((used.size, flat_t.size), dtype=complex)
    sign = -1.0 if s % 2 else 1.0
    cols = used + L - 1
    for ell, d in wigner_d_recursion(L, used, [-s], flat_t):
        if ell < abs(s):
            continue
        a = vals[ell, cols]
        if not np.any(a):
            continue
        acc += (sign * np.sqrt((2 * ell + 1) / (4.0 * np.pi)) * a)[:, None] * d[:, :, 0]
    phase = np.exp(1j * used[:, None] * phi.reshape(1, -1))
    return np.sum(acc * phase, axis=0).reshape(theta.shape)


def parseval_energy(smap: SphereMap) -> float:
    """Quadrature-weighted ``sum |f|^2`` over the grid."""
    return float(np.sum(smap.grid.area_weights() * np.abs(smap.values) ** 2))


def random_coeffs(L: int, spin: int, rng: np.random.Generator, real: bool = False) -> HarmonicCoeffs:
    """Unit-variance complex Gaussian coefficients (zero below ``|spin|``)."""
    v = rng.standard_normal((L, 2 * L - 1)) + 1j * rng.standard_normal((L, 2 * L - 1))
    v[~valid_mask(L)] = 0.0
    v[:abs(spin)] = 0.0
    if real:
        v = _make_real(v, L)
    return HarmonicCoeffs(L, spin, v)


def _make_real(v: np.ndarray, L: int) -> np.ndarray:
    v = v.copy()
    c = L - 1
    v[..., :, c] = v[..., :, c].real
    m = np.arange(1, L)
    v[..., :, c - m] = ((-1.0) ** m) * np.conj(v[..., :, c + m])
    v[..., ~valid_mask(L)] = 0.0
    return v
