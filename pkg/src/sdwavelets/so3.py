"""Wigner transforms between coefficients ``W_{lmn}`` and samples on SO(3).

Maps are sampled on ``alpha_a = 2 pi a / (2L-1)``, Gauss-Legendre ``beta_k``
and ``gamma_c = 2 pi c / (2N-1)`` and stored ``values[..., a, k, c]``.
Coefficients are dense ``values[..., l, m + L - 1, n + N - 1]``; entries with
``|m| > l`` or ``|n| > min(l, N-1)`` are zero.

    f(rho) = sum_{lmn} W_{lmn} conj(D^l_{mn}(rho))
    W_{lmn} = (2l+1)/(8 pi^2) <f, conj(D^l_{mn})>
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .sht import BandLimitError, _gl_nodes
from .special_functions import wigner_d_recursion

_TABLE_CACHE_BYTES = 96 * 2**20


@dataclass(frozen=True)
class SO3Grid:
    L: int
    N: int

    def __post_init__(self):
        if self.L < 1 or self.N < 1:
            raise BandLimitError(f"need L, N >= 1 (got L={self.L}, N={self.N})")
        if self.N > self.L:
            raise BandLimitError(f"azimuthal limit N={self.N} exceeds L={self.L}")

    @property
    def alpha(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(2 * self.L - 1) / (2 * self.L - 1)

    @property
    def beta(self) -> np.ndarray:
        return _gl_nodes(self.L)[0]

    @property
    def beta_weights(self) -> np.ndarray:
        return _gl_nodes(self.L)[1]

    @property
    def gamma(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(2 * self.N - 1) / (2 * self.N - 1)

    @property
    def shape(self) -> tuple[int, int, int]:
        return (2 * self.L - 1, self.L, 2 * self.N - 1)

    def volume_weights(self) -> np.ndarray:
        """Quadrature weights for integrals over SO(3); they sum to ``8 pi^2``."""
        wa = 2.0 * np.pi / (2 * self.L - 1)
        wg = 2.0 * np.pi / (2 * self.N - 1)
        return np.broadcast_to((wa * wg * self.beta_weights)[None, :, None], self.shape)


@dataclass(frozen=True)
class WignerCoeffs:
    L: int
    N: int
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape[-3:] != coeff_shape(self.L, self.N):
            raise BandLimitError(
                f"Wigner coefficient shape {self.values.shape} does not match L={self.L}, N={self.N}")

    @classmethod
    def zeros(cls, L: int, N: int) -> "WignerCoeffs":
        return cls(L, N, np.zeros(coeff_shape(L, N), dtype=complex))

    def to_flat(self) -> np.ndarray:
        """ell-major, m-ascending, n-ascending vector of the admissible entries."""
        return self.values[..., valid_mask(self.L, self.N)]

    @classmethod
    def from_flat(cls, L: int, N: int, flat: np.ndarray) -> "WignerCoeffs":
        mask = valid_mask(L, N)
        flat = np.asarray(flat, dtype=complex)
        if flat.shape[-1] != int(mask.sum()):
            raise BandLimitError(f"expected {int(mask.sum())} coefficients, got {flat.shape[-1]}")
        out = np.zeros(flat.shape[:-1] + coeff_shape(L, N), dtype=complex)
        out[..., mask] = flat
        return cls(L, N, out)


@dataclass(frozen=True)
class SO3Map:
    grid: SO3Grid
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape[-3:] != self.grid.shape:
            raise BandLimitError(f"map shape {self.values.shape} does not match grid {self.grid.shape}")


def coeff_shape(L: int, N: int) -> tuple[int, int, int]:
    return (L, 2 * L - 1, 2 * N - 1)


@lru_cache(maxsize=None)
def valid_mask(L: int, N: int) -> np.ndarray:
    ell = np.arange(L)[:, None, None]
    m = np.arange(-(L - 1), L)[None, :, None]
    n = np.arange(-(N - 1), N)[None, None, :]
    mask = (np.abs(m) <= ell) & (np.abs(n) <= ell)
    mask.setflags(write=False)
    return mask


def _d_rows(L: int, N: int):
    """Yield ``(l, d[m, k, n])`` over the SO(3) grid's beta nodes."""
    return wigner_d_recursion(L, np.arange(-(L - 1), L), np.arange(-(N - 1), N), _gl_nodes(L)[0])


@lru_cache(maxsize=4)
def _d_table(L: int, N: int) -> np.ndarray:
    table = np.empty((L, 2 * L - 1, L, 2 * N - 1))
    for ell, d in _d_rows(L, N):
        table[ell] = d
    table.setflags(write=False)
    return table


def _table_iter(L: int, N: int):
    if L * (2 * L - 1) * L * (2 * N - 1) * 8 <= _TABLE_CACHE_BYTES:
        table = _d_table(L, N)
        return ((ell, table[ell]) for ell in range(L))
    return _d_rows(L, N)


def inverse_array(values: np.ndarray, L: int, N: int) -> np.ndarray:
    """Coefficients ``(..., L, 2L-1, 2N-1)`` to samples ``(..., 2L-1, L, 2N-1)``."""
    values = np.asarray(values, dtype=complex)
    active = np.any(values != 0, axis=tuple(range(values.ndim - 3)) + (-2, -1))
    acc = np.zeros(values.shape[:-3] + (2 * L - 1, L, 2 * N - 1), dtype=complex)
    for ell, d in _table_iter(L, N):
        if not active[ell]:
            continue
        acc += values[..., ell, :, None, :] * d
    # sum_{m,n} acc e^{i m alpha} e^{i n gamma}
    acc = np.fft.ifftshift(acc, axes=(-3, -1))
    return (2 * L - 1) * (2 * N - 1) * np.fft.ifft2(acc, axes=(-3, -1))


def forward_array(values: np.ndarray, L: int, N: int) -> np.ndarray:
    """Samples ``(..., 2L-1, L, 2N-1)`` to coefficients ``(..., L, 2L-1, 2N-1)``."""
    values = np.asarray(values, dtype=complex)
    na, ng = 2 * L - 1, 2 * N - 1
    _, w = _gl_nodes(L)
    fmn = np.fft.fftshift(np.fft.fft2(values, axes=(-3, -1)), axes=(-3, -1))
    fmn = fmn * ((2.0 * np.pi / na) * (2.0 * np.pi / ng) * w)[:, None]
    out = np.zeros(values.shape[:-3] + coeff_shape(L, N), dtype=complex)
    for ell, d in _table_iter(L, N):
        out[..., ell, :, :] = (2 * ell + 1) / (8.0 * np.pi**2) * np.sum(fmn * d, axis=-2)
    out[..., ~valid_mask(L, N)] = 0.0
    return out


def inverse_so3(w: WignerCoeffs) -> SO3Map:
    return SO3Map(SO3Grid(w.L, w.N), inverse_array(w.values, w.L, w.N))


def forward_so3(smap: SO3Map) -> WignerCoeffs:
    g = smap.grid
    return WignerCoeffs(g.L, g.N, forward_array(smap.values, g.L, g.N))


def so3_evaluate(w: WignerCoeffs, alpha, beta, gamma) -> np.ndarray:
    """Direct evaluation at arbitrary Euler angles (broadcast together)."""
    alpha, beta, gamma = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (alpha, beta, gamma)))
    L, N = w.L, w.N
    ms = np.arange(-(L - 1), L)
    ns = np.arange(-(N - 1), N)
    flat_b = beta.reshape(-1)
    acc = np.zeros((ms.size, flat_b.size, ns.size), dtype=complex)
    for ell, d in wigner_d_recursion(L, ms, ns, flat_b):
        if np.any(w.values[ell]):
            acc += w.values[ell][:, None, :] * d
    pa = np.exp(1j * ms[:, None] * alpha.reshape(1, -1))
    pg = np.exp(1j * ns[:, None] * gamma.reshape(1, -1))
    return np.sum(acc * pa[:, :, None] * pg.T[None, :, :], axis=(0, 2)).reshape(beta.shape)


def inner_product(f: SO3Map, g: SO3Map) -> complex:
    """Quadrature ``<f, g> = int f conj(g) d rho``."""
    return complex(np.sum(f.grid.volume_weights() * f.values * np.conj(g.values)))


def parseval_energy(w: WignerCoeffs) -> float:
    ell = np.arange(w.L)[:, None, None]
    return float(np.sum(8.0 * np.pi**2 / (2 * ell + 1) * np.abs(w.values) ** 2))


def random_coeffs(L: int, N: int, rng: np.random.Generator) -> WignerCoeffs:
    shape = coeff_shape(L, N)
    v = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    v[~valid_mask(L, N)] = 0.0
    return WignerCoeffs(L, N, v)
