"""Binary file formats and CSV helpers.

All integers are little-endian 32-bit; data are complex128 pairs (re, im).

=========  =====================================================================
SDWMAP1    magic, L, spin (i32), grid kind (1 = Gauss-Legendre), L*(2L-1) samples
SDWALM1    magic, L, spin (i32), L^2 coefficients, ell-major then m ascending
SDWSO31    magic, L, N, Wigner coefficients ell/m/n ascending, |n| <= min(l, N-1)
SDWSO3M    magic, L, N, (2L-1)*L*(2N-1) SO(3) samples, alpha-major then beta, gamma
=========  =====================================================================
"""

from __future__ import annotations

import csv
import io
import struct
from pathlib import Path

import numpy as np

from .sht import HarmonicCoeffs, SphereGrid, SphereMap
from .so3 import SO3Grid, SO3Map, WignerCoeffs

MAP_MAGIC = b"SDWMAP1"
ALM_MAGIC = b"SDWALM1"
SO3_MAGIC = b"SDWSO31"
SO3MAP_MAGIC = b"SDWSO3M"
GRID_GL = 1


class FormatError(ValueError):
    pass


def _write(path, magic: bytes, header: bytes, data: np.ndarray):
    payload = np.ascontiguousarray(data, dtype="<c16").tobytes()
    Path(path).write_bytes(magic + header + payload)


def _read(path, magic: bytes, header_fmt: str):
    raw = Path(path).read_bytes()
    if not raw.startswith(magic):
        raise FormatError(f"{path}: bad magic, expected {magic.decode()}")
    n = struct.calcsize(header_fmt)
    if len(raw) < len(magic) + n:
        raise FormatError(f"{path}: truncated header")
    header = struct.unpack(header_fmt, raw[len(magic):len(magic) + n])
    body = raw[len(magic) + n:]
    if len(body) % 16:
        raise FormatError(f"{path}: payload is not a whole number of complex128 values")
    return header, np.frombuffer(body, dtype="<c16").astype(complex)


def write_map(path, smap: SphereMap):
    _write(path, MAP_MAGIC, struct.pack("<IiI", smap.grid.L, smap.spin, GRID_GL), smap.values)


def read_map(path) -> SphereMap:
    (L, spin, kind), data = _read(path, MAP_MAGIC, "<IiI")
    if kind != GRID_GL:
        raise FormatError(f"{path}: unsupported grid kind {kind}")
    if L < 1 or data.size != L * (2 * L - 1):
        raise FormatError(f"{path}: expected {L * (2 * L - 1)} samples for L={L}, found {data.size}")
    return SphereMap(SphereGrid(L), spin, data.reshape(L, 2 * L - 1))


def write_alm(path, coeffs: HarmonicCoeffs):
    _write(path, ALM_MAGIC, struct.pack("<Ii", coeffs.L, coeffs.spin), coeffs.to_flat())


def read_alm(path) -> HarmonicCoeffs:
    (L, spin), data = _read(path, ALM_MAGIC, "<Ii")
    if L < 1 or data.size != L * L:
        raise FormatError(f"{path}: expected {L * L} coefficients for L={L}, found {data.size}")
    return HarmonicCoeffs.from_flat(L, spin, data)


def write_wigner(path, w: WignerCoeffs):
    _write(path, SO3_MAGIC, struct.pack("<II", w.L, w.N), w.to_flat())


def read_wigner(path) -> WignerCoeffs:
    (L, N), data = _read(path, SO3_MAGIC, "<II")
    if L < 1 or N < 1 or N > L:
        raise FormatError(f"{path}: invalid band-limits L={L}, N={N}")
    try:
        return WignerCoeffs.from_flat(L, N, data)
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from None


def write_so3_map(path, smap: SO3Map):
    _write(path, SO3MAP_MAGIC, struct.pack("<II", smap.grid.L, smap.grid.N), smap.values)


def read_so3_map(path) -> SO3Map:
    (L, N), data = _read(path, SO3MAP_MAGIC, "<II")
    grid = SO3Grid(L, N)
    if data.size != int(np.prod(grid.shape)):
        raise FormatError(f"{path}: expected {int(np.prod(grid.shape))} samples, found {data.size}")
    return SO3Map(grid, data.reshape(grid.shape))


def map_csv(smap: SphereMap) -> str:
    """Long-format CSV (theta, phi, re, im) of a sphere map."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["theta", "phi", "re", "im"])
    g = smap.grid
    for k, th in enumerate(g.theta):
        for p, ph in enumerate(g.phi):
            v = smap.values[k, p]
            w.writerow([repr(float(th)), repr(float(ph)), repr(float(v.real)), repr(float(v.imag))])
    return buf.getvalue()


def so3_slice_csv(smap: SO3Map, c: int) -> str:
    """CSV (theta=beta, phi=alpha, re, im) of the orientation slice ``gamma_c``."""
    g = smap.grid
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["theta", "phi", "re", "im"])
    for k, b in enumerate(g.beta):
        for a, al in enumerate(g.alpha):
            v = smap.values[a, k, c]
            w.writerow([repr(float(b)), repr(float(al)), repr(float(v.real)), repr(float(v.imag))])
    return buf.getvalue()


def matrix_csv(matrix: np.ndarray, labels) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["j"] + [str(j) for j in labels])
    for j, row in zip(labels, matrix):
        w.writerow([str(j)] + [repr(float(v)) for v in row])
    return buf.getvalue()
