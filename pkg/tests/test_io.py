import numpy as np
import pytest

from sdwavelets import io as sio
from sdwavelets import sht, so3
from sdwavelets.sht import SphereGrid, SphereMap
from sdwavelets.so3 import SO3Grid, SO3Map


def test_map_round_trip(tmp_path, rng):
    m = sht.inverse_sht(sht.random_coeffs(9, -1, rng))
    sio.write_map(tmp_path / "a", m)
    back = sio.read_map(tmp_path / "a")
    assert back.spin == -1 and back.grid.L == 9
    np.testing.assert_array_equal(back.values, m.values)


def test_map_header_layout(tmp_path):
    m = SphereMap(SphereGrid(2), 3, np.arange(6, dtype=complex).reshape(2, 3))
    sio.write_map(tmp_path / "a", m)
    raw = (tmp_path / "a").read_bytes()
    assert raw[:7] == b"SDWMAP1"
    assert raw[7:19] == (2).to_bytes(4, "little") + (3).to_bytes(4, "little") + (1).to_bytes(4, "little")
    assert len(raw) == 19 + 6 * 16


def test_alm_and_wigner_round_trip(tmp_path, rng):
    f = sht.random_coeffs(7, 2, rng)
    sio.write_alm(tmp_path / "f", f)
    g = sio.read_alm(tmp_path / "f")
    assert g.spin == 2
    np.testing.assert_array_equal(g.values, f.values)
    w = so3.random_coeffs(6, 3, rng)
    sio.write_wigner(tmp_path / "w", w)
    np.testing.assert_array_equal(sio.read_wigner(tmp_path / "w").values, w.values)


def test_so3_map_round_trip(tmp_path, rng):
    m = so3.inverse_so3(so3.random_coeffs(5, 2, rng))
    sio.write_so3_map(tmp_path / "s", m)
    np.testing.assert_array_equal(sio.read_so3_map(tmp_path / "s").values, m.values)


def test_format_errors(tmp_path):
    p = tmp_path / "x"
    p.write_bytes(b"NOTMAGIC")
    with pytest.raises(sio.FormatError, match="magic"):
        sio.read_map(p)
    p.write_bytes(b"SDWALM1" + (3).to_bytes(4, "little") + (0).to_bytes(4, "little") + bytes(16 * 4))
    with pytest.raises(sio.FormatError, match="expected 9"):
        sio.read_alm(p)
    p.write_bytes(b"SDWMAP1" + bytes(5))
    with pytest.raises(sio.FormatError, match="truncated"):
        sio.read_map(p)
    p.write_bytes(b"SDWSO31" + (2).to_bytes(4, "little") + (3).to_bytes(4, "little"))
    with pytest.raises(sio.FormatError, match="band-limits"):
        sio.read_wigner(p)


def test_csv_exports():
    m = SphereMap(SphereGrid(2), 0, np.ones((2, 3), dtype=complex))
    rows = sio.map_csv(m).strip().splitlines()
    assert rows[0] == "theta,phi,re,im" and len(rows) == 7
    s = SO3Map(SO3Grid(2, 2), np.zeros((3, 2, 3), dtype=complex))
    assert len(sio.so3_slice_csv(s, 1).strip().splitlines()) == 7
    txt = sio.matrix_csv(np.eye(2), [0, 1])
    assert txt.splitlines()[0] == "j,0,1"
