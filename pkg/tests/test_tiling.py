import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sdwavelets.directionality import build_directionality
from sdwavelets.tiling import (ConfigError, KernelSet, TilingConfig, build_kernels,
                               check_admissibility, hard_bandpass_kernels, j_max, k_lambda,
                               kappa_lambda, schwartz_s, tiling_csv, tiling_sum)

lams = st.sampled_from([1.5, 2.0, 3.0])


def test_schwartz_values():
    assert schwartz_s(0.0) == pytest.approx(np.exp(-1), abs=1e-15)
    assert schwartz_s(1.0) == 0.0 and schwartz_s(-1.0) == 0.0
    assert schwartz_s(2.0) == 0.0


@given(lams)
def test_k_lambda_edges(lam):
    assert k_lambda(1.0 / lam, lam) == pytest.approx(1.0, abs=1e-14)
    assert k_lambda(1.0, lam) == pytest.approx(0.0, abs=1e-14)
    assert k_lambda(0.0, lam) == 1.0
    assert k_lambda(1.7, lam) == 0.0


def test_k_lambda_monotone():
    t = np.linspace(0.5, 1.0, 100)
    k = np.asarray(k_lambda(t, 2.0))
    assert np.all(np.diff(k) <= 0)
    assert np.all(np.diff(k[1:-1]) < 0)


def test_kappa_peak_and_edges():
    assert kappa_lambda(1.0, 2.0) == pytest.approx(1.0, abs=1e-14)
    assert kappa_lambda(0.5, 2.0) == pytest.approx(0.0, abs=1e-7)
    assert kappa_lambda(2.0, 2.0) == pytest.approx(0.0, abs=1e-7)


@given(st.floats(0.0, 3.5), lams)
def test_partition_identity(t, lam):
    lhs = k_lambda(t / lam, lam)
    rhs = k_lambda(t, lam) + kappa_lambda(t, lam) ** 2
    assert lhs == pytest.approx(rhs, abs=1e-10)


def test_j_max():
    assert j_max(128, 2.0) == 7
    assert j_max(129, 2.0) == 8
    assert j_max(1, 2.0) == 0
    assert TilingConfig(128).J_max == 7


def test_support_of_kappa5():
    cfg = TilingConfig(128, 2.0)
    ks = build_kernels(cfg)
    lo, hi = cfg.support(5)
    assert (lo, hi) == (2, 8)
    nz = np.nonzero(ks.kernel(5) > 1e-15)[0]
    assert nz.min() >= lo and nz.max() <= hi


def test_reference_config_accepted():
    cfg = TilingConfig(128, 2.0, J=5)
    assert list(cfg.scales) == [0, 1, 2, 3, 4, 5]


@pytest.mark.parametrize("kw", [dict(L=0), dict(L=8, lam=1.0), dict(L=8, J0=4, J=3),
                                dict(L=8, J=9), dict(L=8, J0=-1)])
def test_invalid_configs(kw):
    with pytest.raises(ConfigError):
        TilingConfig(**kw)


@given(st.integers(2, 200), lams)
def test_admissibility_full_range(L, lam):
    res = check_admissibility(build_kernels(TilingConfig(L, lam)))
    assert np.max(res[1:]) < 1e-10


@given(st.integers(16, 200), st.integers(0, 3))
def test_admissibility_truncated_J(L, drop):
    cfg = TilingConfig(L, 2.0)
    cfg = TilingConfig(L, 2.0, J=max(0, cfg.J_max - drop))
    assert np.max(check_admissibility(build_kernels(cfg))[1:]) < 1e-10


def test_admissibility_with_directionality():
    ks = build_kernels(TilingConfig(64))
    for N in (1, 2, 3, 6):
        assert np.max(check_admissibility(ks, build_directionality(64, N))[1:]) < 1e-10


def test_dropped_scale_breaks_unity():
    cfg = TilingConfig(64)
    ks = build_kernels(cfg)
    kap = ks.kappa.copy()
    kap[2] = 0.0
    res = check_admissibility(KernelSet(cfg, kap, ks.scaling))
    np.testing.assert_allclose(res, ks.kernel(2) ** 2, atol=1e-12)
    assert res.max() > 0.5


def test_hard_bandpass_is_admissible_but_sharp():
    ks = hard_bandpass_kernels(TilingConfig(64))
    assert np.max(check_admissibility(ks)[1:]) < 1e-14
    assert set(np.unique(ks.kappa)) <= {0.0, 1.0}


def test_tiling_csv_columns():
    txt = tiling_csv(build_kernels(TilingConfig(16, J=3)))
    rows = [r.split(",") for r in txt.strip().splitlines()]
    assert rows[0] == ["ell", "scaling2", "kappa0_2", "kappa1_2", "kappa2_2", "kappa3_2", "sum"]
    assert len(rows) == 17
    assert all(abs(float(r[-1]) - 1.0) < 1e-10 for r in rows[1:])


def test_tiling_sum_matches_csv():
    ks = build_kernels(TilingConfig(32))
    np.testing.assert_allclose(tiling_sum(ks)[1:], 1.0, atol=1e-12)


def test_quadrature_cache_round_trip(tmp_path, monkeypatch):
    from sdwavelets import tiling
    monkeypatch.setenv("SDW_CACHE_DIR", str(tmp_path))
    tiling._quadrature.cache_clear()
    a = np.asarray(k_lambda(np.linspace(0, 1, 11), 2.5))
    assert list(tmp_path.glob("klambda_*.npz"))
    tiling._quadrature.cache_clear()
    b = np.asarray(k_lambda(np.linspace(0, 1, 11), 2.5))
    np.testing.assert_array_equal(a, b)
