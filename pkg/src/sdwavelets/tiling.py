"""Harmonic tiling: Schwartz window, k_lambda, kappa_lambda and per-scale kernels.

The dilation factor is ``lam`` everywhere (lambda in formulas).
"""

from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

N_PANELS = 1000
_NODES_PER_PANEL = 16


class ConfigError(ValueError):
    pass


def schwartz_s(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    inside = np.abs(t) < 1.0
    ti = t[inside]
    out[inside] = np.exp(-1.0 / (1.0 - ti * ti))
    return out if out.ndim else float(out)


def s_lambda(t, lam: float):
    t = np.asarray(t, dtype=float)
    return schwartz_s(2.0 * lam / (lam - 1.0) * (t - 1.0 / lam) - 1.0)


def _integrand(t, lam):
    return s_lambda(t, lam) ** 2 / t


@dataclass(frozen=True)
class _Quadrature:
    lam: float
    edges: np.ndarray   # panel edges on [1/lam, 1]
    tails: np.ndarray   # tails[i] = int_{edges[i]}^1
    total: float


def _gauss(n: int = _NODES_PER_PANEL):
    return np.polynomial.legendre.leggauss(n)


def _cache_path(lam: float) -> Path | None:
    root = os.environ.get("SDW_CACHE_DIR")
    if not root:
        return None
    return Path(root) / f"klambda_{float(lam).hex()}_{N_PANELS}.npz"


@lru_cache(maxsize=32)
def _quadrature(lam: float) -> _Quadrature:
    if not lam > 1.0:
        raise ConfigError(f"dilation must exceed 1, got {lam}")
    path = _cache_path(lam)
    if path is not None and path.exists():
        with np.load(path) as z:
            return _Quadrature(lam, z["edges"], z["tails"], float(z["total"]))
    x, w = _gauss()
    edges = np.linspace(1.0 / lam, 1.0, N_PANELS + 1)
    lo, hi = edges[:-1, None], edges[1:, None]
    nodes = 0.5 * (hi - lo) * x[None, :] + 0.5 * (hi + lo)
    panel = 0.5 * (hi[:, 0] - lo[:, 0]) * np.sum(w[None, :] * _integrand(nodes, lam), axis=1)
    tails = np.zeros(N_PANELS + 1)
    tails[:-1] = np.cumsum(panel[::-1])[::-1]
    q = _Quadrature(lam, edges, tails, float(tails[0]))
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(f".{os.getpid()}.tmp.npz")
        np.savez(tmp, edges=edges, tails=tails, total=q.total)
        os.replace(tmp, path)
    return q


def k_lambda(t, lam: float):
    """Smooth step: 1 for ``t <= 1/lam``, 0 for ``t >= 1``, decreasing between."""
    q = _quadrature(float(lam))
    t = np.asarray(t, dtype=float)
    out = np.where(t <= 1.0 / lam, 1.0, 0.0)
    mid = (t > 1.0 / lam) & (t < 1.0)
    if np.any(mid):
        tm = t[mid]
        i = np.clip(np.searchsorted(q.edges, tm, side="right") - 1, 0, N_PANELS - 1)
        hi = q.edges[i + 1]
        x, w = _gauss()
        nodes = 0.5 * (hi - tm)[:, None] * x[None, :] + 0.5 * (hi + tm)[:, None]
        part = 0.5 * (hi - tm) * np.sum(w[None, :] * _integrand(nodes, lam), axis=1)
        out[mid] = (part + q.tails[i + 1]) / q.total
    return out if out.ndim else float(out)


def kappa_lambda(t, lam: float):
    """``sqrt(k(t/lam) - k(t))``; support ``[1/lam, lam]``, peak 1 at ``t = 1``."""
    t = np.asarray(t, dtype=float)
    val = np.sqrt(np.maximum(np.asarray(k_lambda(t / lam, lam)) - np.asarray(k_lambda(t, lam)), 0.0))
    return val if val.ndim else float(val)


def j_max(L: int, lam: float) -> int:
    """Smallest integer ``j`` with ``lam^j >= L``, i.e. ``ceil(log_lam L)`` without rounding trouble."""
    j = 0
    while lam**j < L:
        j += 1
    return j


@dataclass(frozen=True)
class TilingConfig:
    L: int
    lam: float = 2.0
    J0: int = 0
    J: int | None = None

    def __post_init__(self):
        if self.L < 1:
            raise ConfigError(f"band-limit must be >= 1, got {self.L}")
        if not self.lam > 1.0:
            raise ConfigError(f"dilation lambda must exceed 1, got {self.lam}")
        jm = j_max(self.L, self.lam)
        if self.J is None:
            object.__setattr__(self, "J", jm)
        if not 0 <= self.J0 <= self.J:
            raise ConfigError(f"need 0 <= J0 <= J (J0={self.J0}, J={self.J})")
        if self.J > jm:
            raise ConfigError(f"J={self.J} exceeds J_max={jm} for L={self.L}, lambda={self.lam}")

    @property
    def J_max(self) -> int:
        return j_max(self.L, self.lam)

    @property
    def scales(self) -> range:
        return range(self.J0, self.J + 1)

    def support(self, j: int) -> tuple[int, int]:
        """Declared support ``[floor(lam^-(1+j) L), ceil(lam^(1-j) L)]`` of kappa^(j)."""
        return (int(np.floor(self.lam ** (-(1 + j)) * self.L)),
                int(np.ceil(self.lam ** (1 - j) * self.L)))


@dataclass(frozen=True)
class KernelSet:
    config: TilingConfig
    kappa: np.ndarray = field(repr=False)    # (J - J0 + 1, L)
    scaling: np.ndarray = field(repr=False)  # (L,)  sqrt(k(lam^J l / L))

    def kernel(self, j: int) -> np.ndarray:
        return self.kappa[j - self.config.J0]


def build_kernels(config: TilingConfig) -> KernelSet:
    L, lam = config.L, config.lam
    ell = np.arange(L, dtype=float)
    kappa = np.stack([kappa_lambda(lam**j * ell / L, lam) for j in config.scales])
    kappa[:, 0] = 0.0
    scaling = np.sqrt(np.asarray(k_lambda(lam**config.J * ell / L, lam)))
    kappa.setflags(write=False)
    scaling.setflags(write=False)
    return KernelSet(config, kappa, scaling)


def hard_bandpass_kernels(config: TilingConfig) -> KernelSet:
    """Indicator kernels on ``[lam^-(1+j) L, lam^(-j) L)`` (a sharp partition).

    Still admissible, but with discontinuous kernels; used as a negative
    control for localisation.
    """
    L, lam = config.L, config.lam
    ell = np.arange(L, dtype=float)
    rows = []
    for j in config.scales:
        t = lam**j * ell / L
        rows.append(((t >= 1.0 / lam) & (t < 1.0)).astype(float))
    kappa = np.stack(rows)
    kappa[:, 0] = 0.0
    scaling = (lam**config.J * ell / L < 1.0 / lam).astype(float)
    return KernelSet(config, kappa, scaling)


def tiling_sum(kernels: KernelSet) -> np.ndarray:
    """``scaling^2 + sum_j kappa^2`` per degree."""
    return kernels.scaling**2 + np.sum(kernels.kappa**2, axis=0)


def check_admissibility(kernels: KernelSet, dir=None) -> np.ndarray:
    """Per-degree residual ``|LHS(l) - 1|`` of the resolution of the identity.

    With a directionality component the assembled wavelets are used:
    ``(4 pi/(2l+1)) |Phi_l0|^2 + (8 pi^2/(2l+1)) sum_j sum_m |psi^(j)_lm|^2``.
    """
    if dir is None:
        return np.abs(tiling_sum(kernels) - 1.0)
    from .transform import WaveletFamily
    fam = WaveletFamily.from_parts(kernels, dir, spin=0)
    L = kernels.config.L
    ell = np.arange(L)
    lhs = (4.0 * np.pi / (2 * ell + 1)) * fam.phi**2
    lhs = lhs + (8.0 * np.pi**2 / (2 * ell + 1)) * np.sum(np.abs(fam.psi) ** 2, axis=(0, 2))
    return np.abs(lhs - 1.0)


def tiling_csv(kernels: KernelSet) -> str:
    """CSV with columns ell, scaling^2, kappa^(j)^2 for each scale, sum."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["ell", "scaling2"] + [f"kappa{j}_2" for j in kernels.config.scales] + ["sum"])
    total = tiling_sum(kernels)
    for ell in range(kernels.config.L):
        row = [ell, repr(float(kernels.scaling[ell] ** 2))]
        row += [repr(float(v)) for v in kernels.kappa[:, ell] ** 2]
        row.append(repr(float(total[ell])))
        w.writerow(row)
    return buf.getvalue()
