"""Harmonic tiling of the kernels (L=128, lambda=2, J=5) as CSV."""

import argparse
from pathlib import Path

from sdwavelets.tiling import TilingConfig, build_kernels, tiling_csv

ap = argparse.ArgumentParser()
ap.add_argument("--out", default="out/tiling.csv")
args = ap.parse_args()

out = Path(args.out)
out.parent.mkdir(parents=True, exist_ok=True)
out.write_text(tiling_csv(build_kernels(TilingConfig(128, 2.0, J=5))))
print(f"wrote {out}")
