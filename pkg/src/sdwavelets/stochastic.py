"""Gaussian random fields, masks, wavelet covariance and the localisation statistic.

Monte Carlo work is split into fixed-size chunks of realisations. Each
realisation draws from its own counter-based stream (``seed``, realisation
index), chunk sums are formed in realisation order and chunk results are
combined by a fixed pairwise tree, so results do not depend on ``jobs``.
"""

from __future__ import annotations

import os
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import sht, so3
from .io import read_map
from .sht import HarmonicCoeffs, SphereGrid, valid_mask
from .so3 import SO3Grid, SO3Map
from .transform import WaveletFamily
from .special_functions import wigner_d_recursion

CHUNK = 8
DELTA_GUARD = 1e-12


class DataError(ValueError):
    pass


@dataclass(frozen=True)
class PowerSpectrum:
    values: np.ndarray
    model: str = "file"

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1:
            raise DataError("power spectrum must be one-dimensional")
        if np.any(v < 0) or not np.all(np.isfinite(v)):
            raise DataError("power spectrum values must be finite and non-negative")
        object.__setattr__(self, "values", v)

    @property
    def L(self) -> int:
        return self.values.size

    def truncate(self, L: int) -> "PowerSpectrum":
        if self.values.size < L:
            raise DataError(f"spectrum has {self.values.size} entries, need at least L={L}")
        return PowerSpectrum(self.values[:L], self.model)


def power_law(L: int, g1: float = 1.0, alpha_spec: float = 2.0) -> PowerSpectrum:
    """``C_l = g1 l^-alpha_spec`` for ``l >= 1`` and ``C_0 = 0``."""
    ell = np.arange(L, dtype=float)
    c = np.zeros(L)
    c[1:] = g1 * ell[1:] ** (-alpha_spec)
    return PowerSpectrum(c, f"power-law(g1={g1}, alpha_spec={alpha_spec})")


_NUM = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$")


def load_spectrum(path, L: int | None = None) -> PowerSpectrum:
    """Two-column ASCII ``ell C_ell``; ``#`` starts a comment."""
    found: dict[int, float] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.replace(",", " ").split()
        if len(parts) != 2:
            raise DataError(f"{path}:{lineno}: expected two columns 'ell C_ell', got {len(parts)}")
        try:
            ell_f = float(parts[0])
            c = float(parts[1])
        except ValueError:
            raise DataError(f"{path}:{lineno}: cannot parse numbers from {raw.strip()!r}") from None
        if ell_f != int(ell_f) or ell_f < 0:
            raise DataError(f"{path}:{lineno}: degree must be a non-negative integer, got {parts[0]}")
        if not np.isfinite(c) or c < 0:
            raise DataError(f"{path}:{lineno}: C_ell must be finite and non-negative, got {parts[1]}")
        ell = int(ell_f)
        if ell in found:
            raise DataError(f"{path}:{lineno}: duplicate entry for ell={ell}")
        found[ell] = c
    n = (max(found) + 1) if found else 0
    need = n if L is None else L
    missing = [ell for ell in range(need) if ell not in found]
    if missing:
        raise DataError(f"{path}: missing C_ell for ell={missing[:5]}{'...' if len(missing) > 5 else ''}"
                        f" (need every ell < {need})")
    vals = np.array([found[ell] for ell in range(need)])
    return PowerSpectrum(vals, "file")


@dataclass(frozen=True)
class SkyMask:
    grid: SphereGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != self.grid.shape:
            raise DataError(f"mask shape {v.shape} does not match grid {self.grid.shape}")
        if not np.all((v == 0.0) | (v == 1.0)):
            raise DataError("mask values must be exactly 0 or 1")
        object.__setattr__(self, "values", v)

    @property
    def sky_fraction(self) -> float:
        return float(np.sum(self.grid.area_weights() * self.values) / (4.0 * np.pi))


def load_mask(path, strict: bool = False) -> SkyMask:
    smap = read_map(path)
    v = smap.values
    if np.any(v.imag != 0.0):
        raise DataError(f"{path}: mask has non-zero imaginary parts")
    re_ = v.real
    if strict and not np.all((re_ == 0.0) | (re_ == 1.0)):
        bad = re_[(re_ != 0.0) & (re_ != 1.0)][0]
        raise DataError(f"{path}: non-binary mask value {bad!r} (strict mode)")
    return SkyMask(smap.grid, (re_ >= 0.5).astype(float))


def full_mask(L: int) -> SkyMask:
    g = SphereGrid(L)
    return SkyMask(g, np.ones(g.shape))


def empty_mask(L: int) -> SkyMask:
    g = SphereGrid(L)
    return SkyMask(g, np.zeros(g.shape))


def band_mask(L: int, half_width_deg: float) -> SkyMask:
    """Zero within ``half_width_deg`` of the equator (a galactic-plane cut)."""
    g = SphereGrid(L)
    lat = np.abs(g.theta - np.pi / 2)
    row = (lat >= np.deg2rad(half_width_deg)).astype(float)
    return SkyMask(g, np.repeat(row[:, None], g.n_phi, axis=1))


# -- simulation ---------------------------------------------------------------

def realisation_rng(seed: int, r: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(r,))))


def simulate_grf_array(C: np.ndarray, seed: int, r: int = 0, spin: int = 0) -> np.ndarray:
    L = C.size
    rng = realisation_rng(seed, r)
    x = rng.standard_normal((L, L))
    y = rng.standard_normal((L, L))
    sd = np.sqrt(C)[:, None]
    pos = (x + 1j * y) * sd / np.sqrt(2.0)
    pos[:, 0] = x[:, 0] * sd[:, 0]
    out = np.zeros((L, 2 * L - 1), dtype=complex)
    c = L - 1
    out[:, c:] = pos
    m = np.arange(1, L)
    out[:, c - m] = ((-1.0) ** m) * np.conj(pos[:, m])
    out[~valid_mask(L)] = 0.0
    out[:abs(spin)] = 0.0
    return out


def simulate_grf(spectrum: PowerSpectrum, seed: int, realisation: int = 0,
                 spin: int = 0) -> HarmonicCoeffs:
    """One realisation with ``E[a_lm conj(a_l'm')] = C_l`` and the reality condition."""
    C = spectrum.values
    return HarmonicCoeffs(C.size, spin, simulate_grf_array(C, seed, realisation, spin))


def apply_mask(f: np.ndarray, mask: SkyMask, spin: int = 0) -> np.ndarray:
    """Multiply in pixel space and re-analyse at the same band-limit."""
    L = mask.grid.L
    return sht.forward_array(sht.inverse_array(f, L, spin) * mask.values, L, spin)


# -- deterministic parallel reduction ----------------------------------------

def default_jobs() -> int:
    return os.cpu_count() or 1


def pairwise_sum(items: list):
    items = list(items)
    if not items:
        raise ValueError("nothing to reduce")
    while len(items) > 1:
        nxt = [items[i] + items[i + 1] for i in range(0, len(items) - 1, 2)]
        if len(items) % 2:
            nxt.append(items[-1])
        items = nxt
    return items[0]


def _chunks(n: int) -> list[range]:
    return [range(s, min(s + CHUNK, n)) for s in range(0, n, CHUNK)]


def _run_chunks(fn, n: int, jobs: int | None):
    chunks = _chunks(n)
    jobs = jobs or default_jobs()
    if jobs <= 1 or len(chunks) <= 1:
        results = [fn(c) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(fn, chunks))
    return pairwise_sum(results)


# -- covariance ---------------------------------------------------------------

def _scale_products(family: WaveletFamily) -> np.ndarray:
    """``K[l, j, j'] = sum_n conj(psi^j_ln) psi^j'_ln``."""
    psi = family.psi
    return np.einsum("jln,kln->ljk", np.conj(psi), psi)


def analytic_covariance_matrix(family: WaveletFamily, spectrum: PowerSpectrum) -> np.ndarray:
    """Coincident-point covariance ``xi^(jj')`` for all scale pairs."""
    C = spectrum.truncate(family.L).values
    K = _scale_products(family)
    return np.sum(C[:, None, None] * K, axis=0)


def analytic_covariance(family: WaveletFamily, spectrum: PowerSpectrum, j: int, j2: int) -> complex:
    i, k = family.psi_index(j), family.psi_index(j2)
    return complex(analytic_covariance_matrix(family, spectrum)[i, k])


def covariance_profile(family: WaveletFamily, spectrum: PowerSpectrum, j: int, j2: int,
                       alpha, beta, gamma) -> np.ndarray:
    """``xi^(jj')(rho) = sum_l C_l sum_{nn'} conj(psi^j_ln) psi^j'_ln' D^l_{nn'}(rho)``.

    ``rho = rho_1^{-1} rho_2`` is the relative rotation; angles broadcast together.
    """
    alpha, beta, gamma = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (alpha, beta, gamma)))
    C = spectrum.truncate(family.L).values
    N = family.N
    ns = np.arange(-(N - 1), N)
    a = np.conj(family.psi[family.psi_index(j)])
    b = family.psi[family.psi_index(j2)]
    flat_b = beta.reshape(-1)
    acc = np.zeros((ns.size, flat_b.size, ns.size), dtype=complex)
    for ell, d in wigner_d_recursion(family.L, ns, ns, flat_b):
        coef = C[ell] * a[ell][:, None] * b[ell][None, :]
        if np.any(coef):
            acc += coef[:, None, :] * d
    pa = np.exp(-1j * ns[:, None] * alpha.reshape(1, -1))
    pg = np.exp(-1j * ns[:, None] * gamma.reshape(1, -1))
    return np.sum(acc * pa[:, :, None] * pg.T[None, :, :], axis=(0, 2)).reshape(beta.shape)


def correlation_from_covariance(cov: np.ndarray) -> np.ndarray:
    d = np.real(np.diag(cov))
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.real(cov) / np.sqrt(d[:, None] * d[None, :])
    return out


def analytic_correlation(family: WaveletFamily, spectrum: PowerSpectrum) -> np.ndarray:
    return correlation_from_covariance(analytic_covariance_matrix(family, spectrum))


def empirical_covariance(family: WaveletFamily, spectrum: PowerSpectrum, n_sims: int, seed: int,
                         mask: SkyMask | None = None, jobs: int | None = None) -> np.ndarray:
    """Monte Carlo ``E[W^j conj(W^j')]`` averaged over SO(3).

    The SO(3) average of ``W^j conj(W^j')`` under the exact quadrature equals,
    by the Wigner Parseval relation,
    ``sum_l P_l/(2l+1) sum_n conj(psi^j_ln) psi^j'_ln`` with
    ``P_l = sum_m |f_lm|^2``; that form is used instead of rendering maps.
    """
    if n_sims < 2:
        raise ValueError("need at least two realisations")
    L = family.L
    C = spectrum.truncate(L).values
    K = _scale_products(family)
    ell = np.arange(L)

    def chunk(rs: range) -> np.ndarray:
        f = np.stack([simulate_grf_array(C, seed, r, family.spin) for r in rs])
        if mask is not None:
            f = apply_mask(f, mask, family.spin)
        acc = np.zeros(K.shape[1:], dtype=complex)
        for b in range(f.shape[0]):
            P = np.sum(np.abs(f[b]) ** 2, axis=-1) / (2 * ell + 1)
            acc = acc + np.sum(P[:, None, None] * K, axis=0)
        return acc

    return _run_chunks(chunk, n_sims, jobs) / n_sims


def empirical_correlation(family: WaveletFamily, spectrum: PowerSpectrum, n_sims: int, seed: int,
                          mask: SkyMask | None = None, jobs: int | None = None) -> np.ndarray:
    return correlation_from_covariance(empirical_covariance(family, spectrum, n_sims, seed, mask, jobs))


def so3_average_covariance(family: WaveletFamily, f: HarmonicCoeffs) -> np.ndarray:
    """Same quantity for one signal by explicit quadrature over the SO(3) grid (reference path)."""
    from .transform import analyze_array
    L, N = family.L, family.N
    wav, _ = analyze_array(f.values, family)
    maps = so3.inverse_array(wav, L, N)
    w = SO3Grid(L, N).volume_weights()
    n = maps.shape[0]
    out = np.zeros((n, n), dtype=complex)
    for a in range(n):
        for b in range(n):
            out[a, b] = np.sum(w * maps[a] * np.conj(maps[b])) / (8.0 * np.pi**2)
    return out


# -- localisation statistic ---------------------------------------------------

@dataclass(frozen=True)
class LocalisationResult:
    delta: SO3Map          # NaN where the denominator is guarded
    numerator: np.ndarray  # mean |W_masked - W|^2
    denominator: np.ndarray  # mean |W|^2
    n_sims: int


def localisation_statistic(family: WaveletFamily, spectrum: PowerSpectrum, mask: SkyMask, j: int,
                           n_sims: int, seed: int, jobs: int | None = None) -> LocalisationResult:
    """``Delta^(j)(rho) = E|W_masked - W|^2 / E|W|^2`` on the SO(3) grid."""
    L, N = family.L, family.N
    if mask.grid.L != L:
        raise DataError(f"mask band-limit {mask.grid.L} does not match family L={L}")
    C = spectrum.truncate(L).values
    psi_c = np.conj(family.psi[family.psi_index(j)])

    def chunk(rs: range) -> np.ndarray:
        f = np.stack([simulate_grf_array(C, seed, r, family.spin) for r in rs])
        diff = apply_mask(f, mask, family.spin) - f
        both = np.concatenate([diff, f])[:, :, :, None] * psi_c[None, :, None, :]
        maps = so3.inverse_array(both, L, N)
        k = len(rs)
        num = np.sum(np.abs(maps[:k]) ** 2, axis=0)
        den = np.sum(np.abs(maps[k:]) ** 2, axis=0)
        return np.stack([num, den])

    tot = _run_chunks(chunk, n_sims, jobs) / n_sims
    num, den = tot[0], tot[1]
    guard = den < DELTA_GUARD * float(np.mean(den))
    with np.errstate(invalid="ignore", divide="ignore"):
        delta = np.where(guard, np.nan, num / np.where(guard, 1.0, den))
    return LocalisationResult(SO3Map(SO3Grid(L, N), delta.astype(complex)), num, den, n_sims)
