"""Legendre, associated Legendre, Wigner d/D and spin spherical harmonics.

Conventions: ``D^l_{mn}(a, b, g) = exp(-i m a) d^l_{mn}(b) exp(-i n g)`` with
rotations composed as ``Rz(a) Ry(b) Rz(g)``; spherical harmonics carry the
Condon-Shortley phase; spin harmonics follow
``sY_lm(theta, phi) = (-1)^s sqrt((2l+1)/4pi) conj(D^l_{m,-s}(phi, theta, 0))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator

import numpy as np
from scipy.special import gammaln

# Mantissas are renormalised past this magnitude; the base-2 exponent is
# carried separately so that seeds far below the float64 range still recurse.
_RESCALE = 2.0**300


def legendre_poly(ell: int, x):
    """Legendre polynomial ``P_ell(x)`` by the three-term recurrence."""
    if ell < 0:
        raise ValueError(f"degree must be non-negative, got {ell}")
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > 1.0):
        raise ValueError("legendre_poly requires |x| <= 1")
    p_prev = np.ones_like(x)
    if ell == 0:
        return p_prev if p_prev.ndim else float(p_prev)
    p = x.copy()
    for k in range(2, ell + 1):
        p_prev, p = p, ((2 * k - 1) * x * p - (k - 1) * p_prev) / k
    return p if p.ndim else float(p)


def sph_legendre_normalized(L: int, m: int, theta) -> np.ndarray:
    """Normalised associated Legendre functions for all degrees ``m <= l < L``.

    Returns ``out[l, ...] = sqrt((2l+1)/(4pi) (l-m)!/(l+m)!) P_l^m(cos theta)``
    without the Condon-Shortley phase, i.e. ``|Y_lm(theta, 0)|`` up to sign.
    The factorial ratio is never formed: the prefactor is carried through the
    recursion, which keeps it finite for large ``l``.
    """
    if m < 0:
        raise ValueError("order must be non-negative")
    theta = np.asarray(theta, dtype=float)
    x = np.cos(theta)
    y = np.sin(theta)
    out = np.zeros((L,) + theta.shape)
    if m >= L:
        return out
    pmm = np.full(theta.shape, 1.0 / np.sqrt(4.0 * np.pi))
    for k in range(1, m + 1):
        pmm = np.sqrt((2.0 * k + 1.0) / (2.0 * k)) * y * pmm
    out[m] = pmm
    if m + 1 < L:
        out[m + 1] = np.sqrt(2.0 * m + 3.0) * x * pmm
    for ell in range(m + 2, L):
        a = np.sqrt((4.0 * ell * ell - 1.0) / (ell * ell - m * m))
        b = np.sqrt(((ell - 1.0) ** 2 - m * m) / (4.0 * (ell - 1.0) ** 2 - 1.0))
        out[ell] = a * (x * out[ell - 1] - b * out[ell - 2])
    return out


def assoc_legendre(ell: int, m: int, theta):
    """``P_ell^m(cos theta) = sin^m(theta) d^m/d(cos theta)^m P_ell(cos theta)``.

    No Condon-Shortley phase. Computed from the normalised recursion and
    denormalised with log-gamma factors, so it is exact up to rounding until
    the value itself leaves the float64 range.
    """
    if m < 0 or m > ell:
        raise ValueError(f"need 0 <= m <= ell, got ell={ell}, m={m}")
    theta = np.asarray(theta, dtype=float)
    norm = sph_legendre_normalized(ell + 1, m, theta)[ell]
    log_scale = 0.5 * (np.log(4.0 * np.pi / (2 * ell + 1))
                       + gammaln(ell + m + 1) - gammaln(ell - m + 1))
    val = norm * np.exp(log_scale)
    return val if val.ndim else float(val)


@lru_cache(maxsize=65536)
def _sqrt_binom(n: int, k: int) -> tuple[float, int]:
    """``sqrt(C(n, k))`` as ``(mantissa, exponent)`` from the exact integer."""
    c = math.comb(n, k)
    shift = max(c.bit_length() - 60, 0)
    shift += shift % 2
    mant = math.sqrt(float(c >> shift))
    mant, e = math.frexp(mant)
    return mant, e + shift // 2


def _pow2(base: np.ndarray, power: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``base**power`` as mantissa and integer base-2 exponent (no underflow)."""
    res = np.ones(np.broadcast(base, power).shape)
    res_e = np.zeros(res.shape, dtype=np.int64)
    b, b_e = np.frexp(np.broadcast_to(base, res.shape))
    b_e = b_e.astype(np.int64)
    p = np.broadcast_to(power, res.shape).astype(np.int64).copy()
    while np.any(p > 0):
        odd = (p & 1) == 1
        res = np.where(odd, res * b, res)
        res_e = np.where(odd, res_e + b_e, res_e)
        res, e = np.frexp(res)
        res_e += e
        b, e = np.frexp(b * b)
        b_e = 2 * b_e + e
        p >>= 1
    return res, res_e


def _seed(ell0: np.ndarray, a: np.ndarray, b: np.ndarray,
          c: np.ndarray, s: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Mantissa and base-2 exponent of ``d^{ell0}_{ab}`` where ``|a| = ell0``."""
    # a = +ell0: (-1)^(l-b) sqrt(C(2l, l+b)) c^(l+b) s^(l-b)
    # a = -ell0:            sqrt(C(2l, l+b)) c^(l-b) s^(l+b)
    pos = a >= 0
    pc = np.where(pos, ell0 + b, ell0 - b)
    ps = np.where(pos, ell0 - b, ell0 + b)
    shape = np.broadcast(ell0, b).shape
    bm = np.empty(shape)
    be = np.empty(shape, dtype=np.int64)
    e0 = np.broadcast_to(ell0, shape)
    bb = np.broadcast_to(b, shape)
    for idx in np.ndindex(shape):
        bm[idx], be[idx] = _sqrt_binom(2 * int(e0[idx]), int(e0[idx] - abs(bb[idx])))
    cm, ce = _pow2(c, pc)
    sm, se = _pow2(s, ps)
    sign = np.where(pos & ((ell0 - b) % 2 == 1), -1.0, 1.0)
    mant, e = np.frexp(sign * bm * cm * sm)
    return mant, be + ce + se + e


def wigner_d_recursion(L: int, ms, ns, betas) -> Iterator[tuple[int, np.ndarray]]:
    """Yield ``(l, d)`` for ``l = 0..L-1`` with ``d[i, k, q] = d^l_{ms[i], ns[q]}(betas[k])``.

    Upward recursion in degree for fixed orders, seeded at ``l = max(|m|, |n|)``
    with half-angle closed forms. Each entry carries a mantissa and an integer
    base-2 exponent, so seeds far below the float64 range (high degree, near
    the poles) still recurse, and rescaling is exact. Entries with
    ``l < max(|m|, |n|)`` are zero.
    """
    ms = np.asarray(ms, dtype=np.int64).reshape(-1, 1, 1)
    ns = np.asarray(ns, dtype=np.int64).reshape(1, 1, -1)
    betas = np.asarray(betas, dtype=float).reshape(1, -1, 1)
    shape = (ms.shape[0], betas.shape[1], ns.shape[2])

    swap = np.abs(ns) > np.abs(ms)
    a = np.where(swap, ns, ms)
    b = np.where(swap, ms, ns)
    ell0 = np.abs(a)
    seed_mant, seed_exp = _seed(ell0, a, b, np.cos(betas / 2.0), np.sin(betas / 2.0))
    # d_mn = (-1)^(m-n) d_nm
    flip = np.where(swap & ((ms - ns) % 2 == 1), -1.0, 1.0)
    seed_mant = np.broadcast_to(seed_mant * flip, shape)
    seed_exp = np.broadcast_to(seed_exp, shape)
    ell0 = np.broadcast_to(ell0, shape)

    cos_b = np.cos(betas)
    mm = (ms * ms).astype(float)
    nn = (ns * ns).astype(float)
    mn = (ms * ns).astype(float)

    prev = np.zeros(shape)
    cur = np.zeros(shape)
    exps = np.zeros(shape, dtype=np.int64)
    for ell in range(L):
        if ell > 0:
            with np.errstate(divide="ignore", invalid="ignore"):
                a_coef = ell * (2.0 * ell - 1.0) / np.sqrt((ell * ell - mm) * (ell * ell - nn))
                b_coef = cos_b - (mn / (ell * (ell - 1.0)) if ell > 1 else 0.0)
                c_coef = (np.sqrt(((ell - 1.0) ** 2 - mm) * ((ell - 1.0) ** 2 - nn))
                          / ((ell - 1.0) * (2.0 * ell - 1.0))) if ell > 1 else 0.0
                nxt = a_coef * (b_coef * cur - c_coef * prev)
            nxt = np.where(ell0 < ell, nxt, 0.0)
            prev, cur = cur, nxt
        seeding = ell0 == ell
        if np.any(seeding):
            cur = np.where(seeding, seed_mant, cur)
            prev = np.where(seeding, 0.0, prev)
            exps = np.where(seeding, seed_exp, exps)
        big = np.abs(cur) > _RESCALE
        if np.any(big):
            _, e = np.frexp(cur)
            e = np.where(big, e, 0)
            cur = np.ldexp(cur, -e)
            prev = np.ldexp(prev, -e)
            exps = exps + e
        yield ell, np.ldexp(cur, np.clip(exps, -2**30, 2**30).astype(np.int32))


@dataclass(frozen=True)
class WignerDSlice:
    """Table of ``d^ell_{mn}(beta)`` stored in wrapped order.

    ``values[m, n] = d^ell_{mn}(beta)`` for ``|m|, |n| <= ell``; negative
    orders index from the end, as for FFT frequencies.
    """

    ell: int
    beta: float
    values: np.ndarray

    def centred(self) -> np.ndarray:
        """Same table with ``[m + ell, n + ell]`` indexing."""
        return np.fft.fftshift(self.values)


def wigner_d_slice(ell: int, beta: float) -> WignerDSlice:
    if ell < 0:
        raise ValueError("degree must be non-negative")
    orders = np.arange(-ell, ell + 1)
    d = None
    for _, d in wigner_d_recursion(ell + 1, orders, orders, [beta]):
        pass
    return WignerDSlice(ell, float(beta), np.fft.ifftshift(d[:, 0, :]))


def wigner_D_matrix(ell: int, alpha: float, beta: float, gamma: float) -> np.ndarray:
    """``D^ell_{mn}(alpha, beta, gamma)`` as a ``(2l+1, 2l+1)`` array, ``[m + l, n + l]``."""
    orders = np.arange(-ell, ell + 1)
    d = wigner_d_slice(ell, beta).centred()
    return np.exp(-1j * orders * alpha)[:, None] * d * np.exp(-1j * orders * gamma)[None, :]


def spin_sph_harm(ell: int, m: int, s: int, theta, phi):
    """Spin-weighted spherical harmonic ``sY_{ell m}(theta, phi)``."""
    if abs(m) > ell or abs(s) > ell:
        raise ValueError(f"need |m|, |s| <= ell (ell={ell}, m={m}, s={s})")
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    flat = theta.reshape(-1)
    d = None
    for _, d in wigner_d_recursion(ell + 1, [m], [-s], flat):
        pass
    d = d[0, :, 0].reshape(theta.shape)
    val = ((-1) ** s * np.sqrt((2 * ell + 1) / (4.0 * np.pi))
           * d * np.exp(1j * m * phi))
    return val if val.ndim else complex(val)


# -- rotations ---------------------------------------------------------------

def rotation_matrix(alpha: float, beta: float, gamma: float) -> np.ndarray:
    """3x3 matrix of the zyz rotation ``Rz(alpha) Ry(beta) Rz(gamma)``."""
    def rz(t):
        c, s = np.cos(t), np.sin(t)
        return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])

    c, s = np.cos(beta), np.sin(beta)
    ry = np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])
    return rz(alpha) @ ry @ rz(gamma)


def euler_angles(rot: np.ndarray) -> tuple[float, float, float]:
    """zyz Euler angles of a rotation matrix, ``beta`` in ``[0, pi]``."""
    beta = float(np.arccos(np.clip(rot[2, 2], -1.0, 1.0)))
    if np.sin(beta) < 1e-12:
        # gimbal lock: only alpha +/- gamma is defined
        alpha = float(np.arctan2(rot[1, 0], rot[0, 0]))
        return alpha % (2 * np.pi), beta, 0.0
    alpha = float(np.arctan2(rot[1, 2], rot[0, 2]))
    gamma = float(np.arctan2(rot[2, 1], -rot[2, 0]))
    return alpha % (2 * np.pi), beta, gamma % (2 * np.pi)


# -- Mehler-Dirichlet ----------------------------------------------------------

def adaptive_simpson(f, a: float, b: float, tol: float = 1e-8, max_depth: int = 50) -> float:
    """Adaptive Simpson quadrature with Richardson correction (explicit stack)."""
    def simpson(fa, fm, fb, h):
        return h / 6.0 * (fa + 4.0 * fm + fb)

    fa, fb, fm = f(a), f(b), f(0.5 * (a + b))
    total = 0.0
    stack = [(a, b, fa, fm, fb, simpson(fa, fm, fb, b - a), tol, 0)]
    while stack:
        lo, hi, flo, fmid, fhi, whole, eps, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        lm, rm = 0.5 * (lo + mid), 0.5 * (mid + hi)
        flm, frm = f(lm), f(rm)
        left = simpson(flo, flm, fmid, mid - lo)
        right = simpson(fmid, frm, fhi, hi - mid)
        delta = left + right - whole
        if depth >= max_depth or abs(delta) <= 15.0 * eps:
            total += left + right + delta / 15.0
        else:
            stack.append((mid, hi, fmid, frm, fhi, right, eps / 2.0, depth + 1))
            stack.append((lo, mid, flo, flm, fmid, left, eps / 2.0, depth + 1))
    return total


def mehler_dirichlet(ell: int, theta: float, kernel: str = "classical", tol: float = 1e-8) -> float:
    """``(sqrt 2/pi) int_theta^pi k(phi) / sqrt(cos theta - cos phi) dphi``.

    ``kernel="classical"`` uses ``sin((l + 1/2) phi)``; ``kernel="printed"``
    uses ``sin(l (phi + 1/2))``. The inverse square-root singularity at
    ``phi = theta`` is removed by ``cos phi = cos theta - u^2`` on the first
    half of the interval; the second half is regular and integrated directly.
    """
    if kernel == "classical":
        def k(phi):
            return math.sin((ell + 0.5) * phi)
    elif kernel == "printed":
        def k(phi):
            return math.sin(ell * (phi + 0.5))
    else:
        raise ValueError(f"unknown kernel {kernel!r}")
    if not 0.0 < theta < math.pi:
        raise ValueError("theta must lie strictly inside (0, pi)")
    ct = math.cos(theta)
    mid = 0.5 * (theta + math.pi)
    u_max = math.sqrt(ct - math.cos(mid))

    def near(u):
        phi = math.acos(max(-1.0, ct - u * u))
        return 2.0 * k(phi) / math.sin(phi)

    def far(phi):
        return k(phi) / math.sqrt(ct - math.cos(phi))

    total = adaptive_simpson(near, 0.0, u_max, tol) + adaptive_simpson(far, mid, math.pi, tol)
    return math.sqrt(2.0) / math.pi * total
