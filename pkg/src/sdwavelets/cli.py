"""``sdw`` command line: figure-data exports and reproducible experiments."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import io as sio
from . import sht, stochastic, verify
from .directionality import autocorrelation_csv, build_directionality, steer, rotate_gamma, steering_weights
from .sht import BandLimitError, HarmonicCoeffs, SphereGrid
from .so3 import SO3Grid, SO3Map, WignerCoeffs
from .tiling import ConfigError, TilingConfig, build_kernels, tiling_csv
from .transform import WaveletCoefficients, analyze, build_family, synthesize

EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_CHECK = 4


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    subcommand: str
    L: int
    lam: float = 2.0
    N: int = 1
    J0: int = 0
    J: int | None = None
    spin: int = 0
    seed: int = 0
    n_sims: int = 0
    jobs: int | None = None
    paths: dict = field(default_factory=dict)
    spectrum: str | None = None
    g1: float = 1.0
    alpha_spec: float = 2.0
    mask: str | None = None
    strict_mask: bool = False

    def tiling(self) -> TilingConfig:
        return TilingConfig(self.L, self.lam, self.J0, self.J)

    def validate(self):
        cfg = self.tiling()
        if not 1 <= self.N <= self.L:
            raise ConfigError(f"need 1 <= N <= L (N={self.N}, L={self.L})")
        if abs(self.spin) >= self.L:
            raise ConfigError(f"|spin| must be below L (spin={self.spin}, L={self.L})")
        if self.jobs is not None and self.jobs < 1:
            raise UsageError("--jobs must be positive")
        return cfg


def _config(args, name: str) -> RunConfig:
    keys = ("L", "N", "J0", "J", "spin", "seed", "n_sims", "jobs", "spectrum", "g1", "alpha_spec",
            "mask", "strict_mask")
    kw = {k: getattr(args, k) for k in keys if getattr(args, k, None) is not None}
    if getattr(args, "lam", None) is not None:
        kw["lam"] = args.lam
    rc = RunConfig(name, **kw)
    rc.validate()
    return rc


def _emit(path: str | None, text: str):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _spectrum(rc: RunConfig) -> stochastic.PowerSpectrum:
    if rc.spectrum:
        return stochastic.load_spectrum(rc.spectrum, rc.L)
    return stochastic.power_law(rc.L, rc.g1, rc.alpha_spec)


def _mask(rc: RunConfig, band_deg: float | None, required: bool) -> stochastic.SkyMask | None:
    if rc.mask and band_deg is not None:
        raise UsageError("give either --mask or --band-deg, not both")
    if rc.mask:
        m = stochastic.load_mask(rc.mask, rc.strict_mask)
        if m.grid.L != rc.L:
            raise stochastic.DataError(f"{rc.mask}: mask band-limit {m.grid.L} does not match --L {rc.L}")
        return m
    if band_deg is not None:
        return stochastic.band_mask(rc.L, band_deg)
    if required:
        raise UsageError("a mask is required (--mask FILE or --band-deg DEG)")
    return None


# -- subcommands ------------------------------------------------------------------

def cmd_tile(args) -> int:
    rc = _config(args, "tile")
    _emit(args.out, tiling_csv(build_kernels(rc.tiling())))
    return 0


def cmd_wavelet(args) -> int:
    rc = _config(args, "wavelet")
    fam = build_family(rc.tiling(), rc.N, rc.spin)
    j = args.j
    if j not in fam.scales:
        raise ConfigError(f"scale j={j} outside [{fam.scales.start}, {fam.scales.stop - 1}]")
    psi = fam.wavelet_coeffs(j)
    if args.out_alm:
        sio.write_alm(args.out_alm, psi)
    if args.out_map:
        sio.write_map(args.out_map, sht.inverse_sht(psi))
    if args.csv:
        _emit(args.csv, sio.map_csv(sht.inverse_sht(psi)))
    if args.profile:
        th = verify.meridian(rc.L)
        prof = verify.localisation_profile(fam, j, th)
        lines = ["theta,abs_psi"] + [f"{t!r},{p!r}" for t, p in zip(th.tolist(), prof.tolist())]
        _emit(args.profile, "\n".join(lines) + "\n")
    if args.autocorr:
        _emit(args.autocorr, autocorrelation_csv(fam.kernels, fam.dir, j))
    return 0


def cmd_analyze(args) -> int:
    smap = sio.read_map(args.input)
    args.L = smap.grid.L
    args.spin = smap.spin
    rc = _config(args, "analyze")
    fam = build_family(rc.tiling(), rc.N, rc.spin)
    coeffs = analyze(sht.forward_sht(smap), fam)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for j in fam.scales:
        sio.write_wigner(out / f"wavelet_j{j}.sdw", coeffs.scale(j))
    sio.write_alm(out / "scaling.sdw", coeffs.scaling_coeffs())
    meta = {"L": rc.L, "lambda": rc.lam, "N": rc.N, "J0": rc.tiling().J0, "J": rc.tiling().J,
            "spin": rc.spin}
    (out / "family.json").write_text(json.dumps(meta, sort_keys=True) + "\n")
    return 0


def cmd_synthesize(args) -> int:
    src = Path(args.in_dir)
    try:
        meta = json.loads((src / "family.json").read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise stochastic.DataError(f"{src}: cannot read family.json ({exc})") from None
    cfg = TilingConfig(meta["L"], meta["lambda"], meta["J0"], meta["J"])
    fam = build_family(cfg, meta["N"], meta["spin"])
    wav = []
    for j in fam.scales:
        w = sio.read_wigner(src / f"wavelet_j{j}.sdw")
        if (w.L, w.N) != (fam.L, fam.N):
            raise stochastic.DataError(f"wavelet_j{j}.sdw: band-limits ({w.L}, {w.N}) do not match family")
        wav.append(w.values)
    scal = sio.read_alm(src / "scaling.sdw")
    coeffs = WaveletCoefficients(fam.L, fam.N, cfg.J0, np.stack(wav), scal.values)
    f = synthesize(coeffs, fam)
    sio.write_map(args.out, sht.inverse_sht(f, SphereGrid(fam.L)))
    return 0


def cmd_steer(args) -> int:
    rc = _config(args, "steer")
    fam = build_family(rc.tiling(), rc.N, rc.spin)
    if args.j not in fam.scales:
        raise ConfigError(f"scale j={args.j} outside the family scales")
    g = np.deg2rad(args.gamma_deg)
    psi = fam.wavelet_coeffs(args.j)
    lo, hi = rc.L - rc.N, rc.L + rc.N - 1
    steered = psi.values.copy()
    steered[:, lo:hi] = steer(psi.values[:, lo:hi], g, rc.N)
    exact = psi.values.copy()
    exact[:, lo:hi] = rotate_gamma(psi.values[:, lo:hi], g)
    err = float(np.max(np.abs(steered - exact)))
    if args.out_alm:
        sio.write_alm(args.out_alm, HarmonicCoeffs(rc.L, rc.spin, steered))
    if args.csv:
        _emit(args.csv, sio.map_csv(sht.inverse_sht(HarmonicCoeffs(rc.L, rc.spin, steered))))
    w = steering_weights(rc.N, g)
    rec = {"gamma": g, "weights": [float(x) for x in w], "max_abs_err": err}
    _emit(args.report, json.dumps(rec, sort_keys=True) + "\n")
    return 0


def cmd_simulate(args) -> int:
    rc = _config(args, "simulate")
    sp = _spectrum(rc)
    f = stochastic.simulate_grf(sp, rc.seed, args.realisation, rc.spin)
    mask = _mask(rc, args.band_deg, required=False)
    vals = f.values if mask is None else stochastic.apply_mask(f.values, mask, rc.spin)
    coeffs = HarmonicCoeffs(rc.L, rc.spin, vals)
    if args.out_alm:
        sio.write_alm(args.out_alm, coeffs)
    if args.out:
        sio.write_map(args.out, sht.inverse_sht(coeffs))
    if not (args.out or args.out_alm):
        raise UsageError("nothing to write: give --out and/or --out-alm")
    return 0


def cmd_localisation(args) -> int:
    rc = _config(args, "localisation")
    if rc.n_sims < 1:
        raise UsageError("--n-sims must be positive")
    fam = build_family(rc.tiling(), rc.N, rc.spin)
    if args.j not in fam.scales:
        raise ConfigError(f"scale j={args.j} outside the family scales")
    mask = _mask(rc, args.band_deg, required=True)
    res = stochastic.localisation_statistic(fam, _spectrum(rc), mask, args.j, rc.n_sims, rc.seed, rc.jobs)
    sio.write_so3_map(args.out, res.delta)
    if args.csv_dir:
        d = Path(args.csv_dir)
        d.mkdir(parents=True, exist_ok=True)
        for c in range(res.delta.grid.shape[2]):
            (d / f"delta_gamma{c}.csv").write_text(sio.so3_slice_csv(res.delta, c))
    return 0


def cmd_correlation(args) -> int:
    rc = _config(args, "correlation")
    fam = build_family(rc.tiling(), rc.N, rc.spin)
    sp = _spectrum(rc)
    labels = list(fam.scales)
    if args.analytic:
        _emit(args.analytic, sio.matrix_csv(stochastic.analytic_correlation(fam, sp), labels))
    if args.empirical:
        if rc.n_sims < 2:
            raise UsageError("--n-sims must be at least 2 for the empirical estimate")
        mask = _mask(rc, args.band_deg, required=False)
        emp = stochastic.empirical_correlation(fam, sp, rc.n_sims, rc.seed, mask, rc.jobs)
        _emit(args.empirical, sio.matrix_csv(emp, labels))
    if not (args.analytic or args.empirical):
        raise UsageError("nothing to write: give --analytic and/or --empirical")
    return 0


def cmd_verify(args) -> int:
    rc = _config(args, "verify")
    results = list(verify.run_suite(args.suite, rc.L, rc.lam, rc.N, rc.seed))
    _emit(args.out, "".join(r.to_json() + "\n" for r in results))
    failed = [r.name for r in results if not r.passed]
    if failed:
        print(json.dumps({"error": "check_failed", "failed": failed}), file=sys.stderr)
        return EXIT_CHECK
    return 0


# -- parser -----------------------------------------------------------------------

def _common(p, N_default=1):
    p.add_argument("--L", type=int, required=True, help="band-limit")
    p.add_argument("--lambda", dest="lam", type=float, default=2.0, help="dilation parameter")
    p.add_argument("--N", type=int, default=N_default, help="azimuthal band-limit")
    p.add_argument("--J0", type=int, default=0)
    p.add_argument("--J", type=int, default=None, help="largest scale (default J_max)")
    p.add_argument("--spin", type=int, default=0)


def _stoch(p):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--spectrum", help="two-column 'ell C_ell' file (default: power law)")
    p.add_argument("--g1", type=float, default=1.0)
    p.add_argument("--alpha-spec", dest="alpha_spec", type=float, default=2.0, help="spectral index")
    p.add_argument("--mask", help="SDWMAP1 mask file")
    p.add_argument("--strict-mask", dest="strict_mask", action="store_true")
    p.add_argument("--band-deg", dest="band_deg", type=float, help="synthetic equatorial band mask")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sdw", description="Directional scale-discretised wavelets on the sphere")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("tile", help="harmonic tiling CSV")
    _common(p)
    p.add_argument("--out", default="-")
    p.set_defaults(fn=cmd_tile)

    p = sub.add_parser("wavelet", help="one wavelet: coefficients, map, profile, auto-correlation")
    _common(p)
    p.add_argument("--j", type=int, required=True)
    p.add_argument("--out-alm")
    p.add_argument("--out-map")
    p.add_argument("--csv")
    p.add_argument("--profile", help="meridian profile CSV")
    p.add_argument("--autocorr", help="directional auto-correlation CSV")
    p.set_defaults(fn=cmd_wavelet)

    p = sub.add_parser("analyze", help="map -> wavelet and scaling coefficients")
    p.add_argument("--input", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--lambda", dest="lam", type=float, default=2.0)
    p.add_argument("--N", type=int, default=1)
    p.add_argument("--J0", type=int, default=0)
    p.add_argument("--J", type=int, default=None)
    p.set_defaults(fn=cmd_analyze)

    p = sub.add_parser("synthesize", help="coefficients directory -> map")
    p.add_argument("--in-dir", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_synthesize)

    p = sub.add_parser("steer", help="steer a wavelet from N basis orientations")
    _common(p, N_default=3)
    p.add_argument("--j", type=int, required=True)
    p.add_argument("--gamma-deg", type=float, default=30.0)
    p.add_argument("--out-alm")
    p.add_argument("--csv")
    p.add_argument("--report", default="-")
    p.set_defaults(fn=cmd_steer)

    p = sub.add_parser("simulate", help="Gaussian random field realisation")
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--spin", type=int, default=0)
    _stoch(p)
    p.add_argument("--realisation", type=int, default=0)
    p.add_argument("--out")
    p.add_argument("--out-alm")
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("localisation", help="Monte Carlo mask-leakage statistic Delta")
    _common(p, N_default=3)
    _stoch(p)
    p.add_argument("--j", type=int, required=True)
    p.add_argument("--n-sims", dest="n_sims", type=int, default=30)
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--csv-dir")
    p.set_defaults(fn=cmd_localisation)

    p = sub.add_parser("correlation", help="analytic and empirical scale correlation matrices")
    _common(p, N_default=3)
    _stoch(p)
    p.add_argument("--n-sims", dest="n_sims", type=int, default=100)
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--analytic")
    p.add_argument("--empirical")
    p.set_defaults(fn=cmd_correlation)

    p = sub.add_parser("verify", help="run the numerical verification suite")
    p.add_argument("--suite", choices=verify.SUITES, default="all")
    p.add_argument("--L", type=int, default=64)
    p.add_argument("--lambda", dest="lam", type=float, default=2.0)
    p.add_argument("--N", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="-", help="JSON-lines report")
    p.set_defaults(fn=cmd_verify)
    return ap


def _fail(kind: str, exc: BaseException, code: int) -> int:
    print(json.dumps({"error": kind, "message": str(exc)}), file=sys.stderr)
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (UsageError, ConfigError, BandLimitError) as exc:
        return _fail("usage", exc, EXIT_USAGE)
    except (stochastic.DataError, sio.FormatError, OSError) as exc:
        return _fail("data", exc, EXIT_DATA)


if __name__ == "__main__":
    sys.exit(main())
