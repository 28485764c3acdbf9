"""Numerical checks of the frame, localisation and decorrelation properties.

Every check returns a :class:`CheckResult` with a measured margin; the
thresholds on fitted decay exponents are desk-scale empirical gates, not
constants from any bound.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from . import sht
from .directionality import (build_directionality, directional_autocorrelation,
                             scale_limit_for_constant_p, steer_check)
from .special_functions import legendre_poly, mehler_dirichlet
from .stochastic import (analytic_covariance_matrix, covariance_profile, power_law)
from .tiling import (KernelSet, TilingConfig, build_kernels, check_admissibility,
                     hard_bandpass_kernels)
from .transform import WaveletFamily, build_family, frame_energy

GATE_LOCALISATION_XI = 3.0
GATE_TAIL_RATIO = 1e-3
TAIL_RADIUS = 10.0
GATE_CORRELATION_XI = 2.0


@dataclass
class CheckResult:
    name: str
    params: dict
    margin: float
    passed: bool
    details: dict = field(default_factory=dict)

    def to_json(self) -> str:
        rec = {"name": self.name, "params": self.params, "margin": self.margin, "pass": self.passed}
        if self.details:
            rec["details"] = self.details
        return json.dumps(rec, sort_keys=True)


class DegenerateProfile(ValueError):
    pass


# -- localisation ----------------------------------------------------------------

def localisation_profile(family: WaveletFamily, j: int, theta) -> np.ndarray:
    """``|psi^(j)(theta, phi=0)|`` by direct synthesis along the meridian."""
    theta = np.asarray(theta, dtype=float)
    return np.abs(sht.evaluate(family.wavelet_coeffs(j), theta, np.zeros_like(theta)))


def meridian(L: int, oversample: int = 4) -> np.ndarray:
    return np.linspace(0.0, np.pi, oversample * L)


def envelope(theta: np.ndarray, profile: np.ndarray, floor: float = 1e-12):
    """Global maximum plus local maxima of the profile above ``floor * peak``."""
    p = np.asarray(profile)
    if not np.any(p > 0):
        raise DegenerateProfile("profile is identically zero")
    idx = np.where((p[1:-1] >= p[:-2]) & (p[1:-1] >= p[2:]))[0] + 1
    idx = np.unique(np.concatenate([[int(np.argmax(p))], idx]))
    idx = idx[p[idx] > floor * p.max()]
    return theta[idx], p[idx]


def decay_exponent_fit(theta, profile, eps: float) -> tuple[float, float]:
    """Fit ``env <= C / (1 + theta/eps)^xi`` by least squares in log-log; returns ``(C, xi)``."""
    t, e = envelope(np.asarray(theta, dtype=float), np.asarray(profile, dtype=float))
    if t.size < 2:
        raise DegenerateProfile("fewer than two envelope points")
    x = np.log1p(t / eps)
    A = np.vstack([np.ones_like(x), -x]).T
    (logc, xi), *_ = np.linalg.lstsq(A, np.log(e), rcond=None)
    return float(np.exp(logc)), float(xi)


def tail_ratio(theta, profile, theta0: float) -> float:
    p = np.asarray(profile)
    tail = p[np.asarray(theta) > theta0]
    return float(tail.max() / p.max()) if tail.size else 0.0


def tail_energy_fraction(family: WaveletFamily, j: int, theta0: float) -> float:
    """Fraction of ``int |psi|^2`` beyond colatitude ``theta0`` (quadrature on the grid)."""
    L = family.L
    m = sht.inverse_sht(family.wavelet_coeffs(j))
    w = m.grid.area_weights()
    e = w * np.abs(m.values) ** 2
    return float(np.sum(e[m.grid.theta > theta0]) / np.sum(e))


def localisation_check(family: WaveletFamily, j: int, name: str = "localisation",
                       expect_pass: bool = True) -> CheckResult:
    L, lam = family.L, family.kernels.config.lam
    th = meridian(L)
    prof = localisation_profile(family, j, th)
    eps = lam**j / L
    _, xi = decay_exponent_fit(th, prof, eps)
    ratio = tail_ratio(th, prof, TAIL_RADIUS * eps)
    ok = xi >= GATE_LOCALISATION_XI and ratio < GATE_TAIL_RATIO
    margin = min(xi - GATE_LOCALISATION_XI, np.log10(GATE_TAIL_RATIO) - np.log10(max(ratio, 1e-300)))
    return CheckResult(name, {"L": L, "lambda": lam, "N": family.N, "j": j, "spin": family.spin},
                       float(margin), bool(ok) if expect_pass else not ok,
                       {"xi": xi, "tail_ratio": ratio, "peak_theta": float(th[np.argmax(prof)]),
                        "gate_xi": GATE_LOCALISATION_XI, "gate_tail": GATE_TAIL_RATIO,
                        "expect_pass": expect_pass})


def hard_bandpass_family(config: TilingConfig, N: int, spin: int = 0) -> WaveletFamily:
    return WaveletFamily.from_parts(hard_bandpass_kernels(config), build_directionality(config.L, N), spin)


def localisation_scales(config: TilingConfig) -> list[int]:
    """Mid-range scales ``J_max-5 .. J_max-3`` (clipped); ``{3, 4, 5}`` at L = 256, lambda = 2."""
    jm = config.J_max
    return [j for j in range(jm - 5, jm - 2) if config.J0 <= j <= config.J]


# -- appendix identities -----------------------------------------------------------

def factorial_bound_margins(L_max: int) -> np.ndarray:
    """``-m ln l - (1/2)[ln (l-m)! - ln (l+m)!]`` for ``1 <= m <= l <= L_max`` (NaN elsewhere)."""
    ell = np.arange(L_max + 1, dtype=float)[:, None]
    m = np.arange(L_max + 1, dtype=float)[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        out = -m * np.log(ell) - 0.5 * (gammaln(ell - m + 1) - gammaln(ell + m + 1))
    out[(m > ell) | (ell < 1)] = np.nan
    return out


def factorial_bound_check(L_max: int, m_max: int | None = None) -> CheckResult:
    marg = factorial_bound_margins(L_max)
    if m_max is not None:
        marg = marg[:, : m_max + 1]
    core = marg[:, 1:]
    worst = float(np.nanmin(core)) if np.any(np.isfinite(core)) else 0.0
    # rounding in lgamma differences is ~1e-13 at l = 500; equality holds only at m = 0
    return CheckResult("factorial_bound", {"L_max": L_max, "m_max": m_max}, worst, worst >= -1e-12)


def mehler_dirichlet_check(ell_max: int = 50, thetas=None, tol: float = 1e-4) -> CheckResult:
    thetas = np.linspace(0.1, 3.0, 12) if thetas is None else np.asarray(thetas)
    err = {"classical": 0.0, "printed": 0.0}
    for ell in range(ell_max + 1):
        for th in thetas:
            ref = float(legendre_poly(ell, np.cos(th)))
            for k in err:
                err[k] = max(err[k], abs(mehler_dirichlet(ell, float(th), k) - ref))
    return CheckResult("mehler_dirichlet", {"ell_max": ell_max, "n_theta": int(len(thetas))},
                       tol - err["classical"], err["classical"] < tol,
                       {"max_err_classical": err["classical"], "max_err_printed": err["printed"],
                        "printed_matches": err["printed"] < tol})


# -- frame, admissibility, steering -----------------------------------------------------

def frame_energy_check(family: WaveletFamily, n_signals: int, seed: int, tol: float = 1e-10) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_signals):
        f = sht.random_coeffs(family.L, family.spin, rng)
        e, n = frame_energy(f, family)
        worst = max(worst, abs(e - n) / n)
    return CheckResult("frame_energy", {"L": family.L, "N": family.N, "spin": family.spin,
                                        "n_signals": n_signals, "seed": seed},
                       tol - worst, worst < tol, {"max_rel_dev": worst})


def admissibility_check(kernels: KernelSet, N: int, tol: float = 1e-10, name: str = "admissibility",
                        expect_pass: bool = True) -> CheckResult:
    res = check_admissibility(kernels, build_directionality(kernels.config.L, N))[1:]
    worst = float(res.max(initial=0.0))
    ok = worst < tol
    cfg = kernels.config
    return CheckResult(name, {"L": cfg.L, "lambda": cfg.lam, "N": N, "J0": cfg.J0, "J": cfg.J},
                       tol - worst, ok if expect_pass else not ok,
                       {"max_residual": worst, "expect_pass": expect_pass})


def drop_scale(kernels: KernelSet, j: int) -> KernelSet:
    kappa = kernels.kappa.copy()
    kappa[j - kernels.config.J0] = 0.0
    return KernelSet(kernels.config, kappa, kernels.scaling)


def autocorrelation_check(L: int, lam: float, N: int, tol: float = 1e-10) -> CheckResult:
    cfg = TilingConfig(L, lam)
    kernels = build_kernels(cfg)
    d = build_directionality(L, N)
    dg = np.linspace(-np.pi, np.pi, 721)
    worst = 0.0
    jn = scale_limit_for_constant_p(L, lam, N)
    for j in range(0, min(jn, cfg.J) + 1):
        g = directional_autocorrelation(kernels, d, j, dg)
        g0 = directional_autocorrelation(kernels, d, j, np.array([0.0]))[0]
        worst = max(worst, float(np.max(np.abs(g / g0 - np.cos(dg) ** (N - 1)))))
    return CheckResult("autocorrelation", {"L": L, "lambda": lam, "N": N, "J_N": jn},
                       tol - worst, worst < tol, {"max_err": worst})


def steering_check(family: WaveletFamily, j: int, gamma: float, n_points: int = 64,
                   seed: int = 0, tol: float = 1e-10) -> CheckResult:
    """Harmonic steering error plus a spatial spot check at random points."""
    from .directionality import rotate_gamma, steer
    L, N = family.L, family.N
    psi = family.wavelet_coeffs(j)
    harm = steer_check(psi.values, gamma, N)
    rng = np.random.default_rng(seed)
    th = np.arccos(rng.uniform(-1, 1, n_points))
    ph = rng.uniform(0, 2 * np.pi, n_points)
    lo, hi = L - N, L + N - 1
    steered = psi.values.copy()
    exact = psi.values.copy()
    steered[:, lo:hi] = steer(psi.values[:, lo:hi], gamma, N)
    exact[:, lo:hi] = rotate_gamma(psi.values[:, lo:hi], gamma)
    a = sht.evaluate(sht.HarmonicCoeffs(L, family.spin, steered), th, ph)
    b = sht.evaluate(sht.HarmonicCoeffs(L, family.spin, exact), th, ph)
    spatial = float(np.max(np.abs(a - b)))
    worst = max(harm, spatial)
    return CheckResult("steerability", {"L": L, "N": N, "j": j, "gamma": gamma},
                       tol - worst, worst < tol, {"harmonic_err": harm, "spatial_err": spatial})


# -- correlation ---------------------------------------------------------------------

def correlation_decay_check(family: WaveletFamily, spectrum, j: int, beta=None) -> CheckResult:
    L, lam = family.L, family.kernels.config.lam
    beta = meridian(L) if beta is None else np.asarray(beta, dtype=float)
    z = np.zeros_like(beta)
    xi = covariance_profile(family, spectrum, j, j, z, beta, z)
    prof = np.abs(xi) / abs(xi[0])
    _, fit = decay_exponent_fit(beta, prof, lam**j / L)
    return CheckResult("correlation_decay", {"L": L, "lambda": lam, "N": family.N, "j": j,
                                             "spectrum": spectrum.model},
                       fit - GATE_CORRELATION_XI, fit >= GATE_CORRELATION_XI,
                       {"xi": fit, "Xi_at_0": float(prof[0]), "gate_xi": GATE_CORRELATION_XI})


def decorrelation_check(family: WaveletFamily, spectrum, tol: float = 1e-14) -> CheckResult:
    cov = analytic_covariance_matrix(family, spectrum)
    d = np.sqrt(np.abs(np.real(np.diag(cov))))
    n = cov.shape[0]
    worst = 0.0
    for a in range(n):
        for b in range(n):
            if abs(a - b) >= 2 and d[a] > 0 and d[b] > 0:
                worst = max(worst, abs(cov[a, b]) / (d[a] * d[b]))
    return CheckResult("decorrelation", {"L": family.L, "N": family.N, "spectrum": spectrum.model},
                       tol - worst, worst < tol, {"max_offband": worst})


# -- suites --------------------------------------------------------------------------------

SUITES = ("all", "frame", "admissibility", "localisation", "correlation", "appendix", "steer",
          "controls")


def run_suite(suite: str = "all", L: int = 64, lam: float = 2.0, N: int = 3, seed: int = 0):
    """Yield :class:`CheckResult` records for the requested suite."""
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")
    want = (lambda s: suite in ("all", s))
    cfg = TilingConfig(L, lam)
    if want("admissibility"):
        for n in sorted({1, N}):
            yield admissibility_check(build_kernels(cfg), n)
    if want("frame"):
        for spin in (0, 2):
            yield frame_energy_check(build_family(cfg, N, spin), 10, seed)
    if want("steer"):
        jm = cfg.J_max
        yield steering_check(build_family(cfg, N), max(0, jm - 3), np.pi / 6)
        for n in range(2, min(5, L) + 1):
            yield autocorrelation_check(L, lam, n)
    if want("localisation"):
        for spin in (0, 2):
            fam = build_family(cfg, N, spin)
            for j in localisation_scales(cfg):
                yield localisation_check(fam, j)
    if want("correlation"):
        fam = build_family(cfg, N)
        sp = power_law(L, 1.0, 2.0)
        yield decorrelation_check(fam, sp)
        for j in localisation_scales(cfg):
            yield correlation_decay_check(fam, sp, j)
    if want("appendix"):
        # the bound is only invoked for |m| <= N-1; over all m <= l it fails from l = m = 3
        yield factorial_bound_check(500, m_max=N - 1)
        yield mehler_dirichlet_check()
    if want("controls"):
        ks = build_kernels(cfg)
        jd = max(0, cfg.J_max - 3)
        yield admissibility_check(drop_scale(ks, jd), N, name="control_dropped_scale", expect_pass=False)
        hard = hard_bandpass_family(cfg, N)
        for j in localisation_scales(cfg):
            yield localisation_check(hard, j, name="control_hard_bandpass", expect_pass=False)


def report_lines(results) -> list[str]:
    return [r.to_json() for r in results]

