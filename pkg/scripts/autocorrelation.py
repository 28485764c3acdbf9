"""Directional auto-correlation for N = 2..5 against cos^(N-1)."""

import argparse
from pathlib import Path

from sdwavelets.directionality import autocorrelation_csv, build_directionality, scale_limit_for_constant_p
from sdwavelets.tiling import TilingConfig, build_kernels

ap = argparse.ArgumentParser()
ap.add_argument("--L", type=int, default=128)
ap.add_argument("--out-dir", default="out/autocorrelation")
args = ap.parse_args()

out = Path(args.out_dir)
out.mkdir(parents=True, exist_ok=True)
ks = build_kernels(TilingConfig(args.L))
for N in (2, 3, 4, 5):
    j = scale_limit_for_constant_p(args.L, 2.0, N)
    (out / f"autocorr_N{N}_j{j}.csv").write_text(autocorrelation_csv(ks, build_directionality(args.L, N), j))
print(f"wrote {out}")
