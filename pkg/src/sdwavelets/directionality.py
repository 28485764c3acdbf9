"""Directionality component zeta_lm, directional auto-correlation and steering."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .tiling import ConfigError, KernelSet


@dataclass(frozen=True)
class DirectionalityComponent:
    """``values[l, m + N - 1] = zeta_lm`` for ``|m| < N``."""

    L: int
    N: int
    values: np.ndarray = field(repr=False)

    @property
    def orders(self) -> np.ndarray:
        return np.arange(-(self.N - 1), self.N)


def directionality_power(L: int, N: int) -> np.ndarray:
    """Exponent ``p(l) = min(N-1, l - [1 + (-1)^(N+l)]/2)`` for each degree."""
    ell = np.arange(L)
    return np.minimum(N - 1, ell - (1 + (-1) ** (N + ell)) // 2)


def build_directionality(L: int, N: int) -> DirectionalityComponent:
    if not 1 <= N <= L:
        raise ConfigError(f"azimuthal band-limit must satisfy 1 <= N <= L (N={N}, L={L})")
    p = directionality_power(L, N)[:, None]
    m = np.arange(-(N - 1), N)[None, :]
    eta = 1.0 if (N - 1) % 2 == 0 else 1j
    upsilon = ((N + m) % 2 == 1)
    k2 = p - m  # 2 * binomial lower index
    ok = upsilon & (np.abs(m) <= p) & (p >= 0) & (k2 % 2 == 0)
    with np.errstate(invalid="ignore"):
        log_b = np.where(ok, gammaln(p + 1) - gammaln(k2 // 2 + 1) - gammaln(p - k2 // 2 + 1), -np.inf)
        mag = np.where(ok, np.exp(0.5 * (log_b - p * np.log(2.0))), 0.0)
    values = eta * mag
    values = np.asarray(values, dtype=complex)
    values.setflags(write=False)
    return DirectionalityComponent(L, N, values)


def directional_autocorrelation(kernels: KernelSet, dir: DirectionalityComponent, j: int,
                                dgamma) -> np.ndarray:
    """``Gamma^(j)(dg) = sum_l kappa^2 sum_m |zeta_lm|^2 e^{i m dg}`` (real part).

    Raises if the imaginary part is not negligible.
    """
    dgamma = np.asarray(dgamma, dtype=float)
    k2 = kernels.kernel(j) ** 2
    z2 = np.abs(dir.values) ** 2
    weights = np.sum(k2[:, None] * z2, axis=0)  # per m
    val = np.sum(weights[:, None] * np.exp(1j * dir.orders[:, None] * dgamma.reshape(1, -1)), axis=0)
    if np.max(np.abs(val.imag), initial=0.0) > 1e-12 * max(1.0, np.max(np.abs(val.real), initial=0.0)):
        raise ArithmeticError("directional auto-correlation has a non-negligible imaginary part")
    return val.real.reshape(dgamma.shape)


def scale_limit_for_constant_p(L: int, lam: float, N: int) -> int:
    """``J_N = floor(log_lam(L/N) - 1)``: scales whose support lies in ``l >= N``."""
    return int(np.floor(np.log(L / N) / np.log(lam) - 1.0 + 1e-12))


def autocorrelation_csv(kernels: KernelSet, dir: DirectionalityComponent, j: int,
                        n_points: int = 361) -> str:
    dg = np.linspace(-np.pi, np.pi, n_points)
    gam = directional_autocorrelation(kernels, dir, j, dg)
    norm = directional_autocorrelation(kernels, dir, j, np.array([0.0]))[0]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["dgamma", "gamma_normalised", "cos_p_reference"])
    for x, g in zip(dg, gam / norm):
        w.writerow([repr(float(x)), repr(float(g)), repr(float(np.cos(x) ** (dir.N - 1)))])
    return buf.getvalue()


# -- steering ----------------------------------------------------------------

def steering_angles(N: int) -> np.ndarray:
    """Basis orientations ``gamma_g = g pi / M`` with ``M = N``."""
    return np.pi * np.arange(N) / N


def interpolating_function(x, N: int):
    """``z(x) = (1/N) sum_m e^{i m x}`` over ``|m| <= N-1``, ``m = N-1 (mod 2)``.

    The sum collapses to ``sin(N x) / (N sin x)``, with the limit
    ``(-1)^((N-1) k)`` at ``x = k pi``.
    """
    x = np.asarray(x, dtype=float)
    s = np.sin(x)
    k = np.rint(x / np.pi)
    near = np.abs(x - k * np.pi) < 1e-7
    with np.errstate(divide="ignore", invalid="ignore"):
        val = np.sin(N * x) / (N * s)
    # second-order expansion around k pi, exact to rounding within the window
    eps = x - k * np.pi
    limit = np.where(((N - 1) * k) % 2 == 0, 1.0, -1.0) * (1.0 - (N * N - 1) * eps * eps / 6.0)
    val = np.where(near, limit, val)
    return val if val.ndim else float(val)


def steering_weights(N: int, gamma: float) -> np.ndarray:
    return np.asarray(interpolating_function(gamma - steering_angles(N), N), dtype=float)


def steer(coeffs: np.ndarray, gamma: float, N: int) -> np.ndarray:
    """Steered coefficients ``sum_g z(gamma - gamma_g) R_(0,0,gamma_g) f``.

    ``coeffs`` has a last axis of centred orders ``m``.
    """
    coeffs = np.asarray(coeffs)
    K = (coeffs.shape[-1] - 1) // 2
    m = np.arange(-K, K + 1)
    out = np.zeros(coeffs.shape, dtype=complex)
    for z, gg in zip(steering_weights(N, gamma), steering_angles(N)):
        out += z * np.exp(-1j * m * gg) * coeffs
    return out


def rotate_gamma(coeffs: np.ndarray, gamma: float) -> np.ndarray:
    """Exact rotation ``R_(0,0,gamma)``: multiply by ``e^{-i m gamma}``."""
    K = (coeffs.shape[-1] - 1) // 2
    return np.exp(-1j * np.arange(-K, K + 1) * gamma) * coeffs


def steer_check(coeffs: np.ndarray, gamma: float, N: int) -> float:
    return float(np.max(np.abs(steer(coeffs, gamma, N) - rotate_gamma(coeffs, gamma)), initial=0.0))
