import numpy as np
import pytest
from numpy.testing import assert_allclose

from factorbreaks.errors import BandwidthError
from factorbreaks.hac import HACConfig, bartlett_lrv, bartlett_weights, default_bandwidth


def test_default_bandwidth_rule():
    assert default_bandwidth(250) == 6
    assert default_bandwidth(100) == 4
    assert default_bandwidth(1000) == 10
    assert default_bandwidth(100, scale=2.0) == 9


def test_bartlett_weights_b2():
    assert_allclose(bartlett_weights(2), [2.0 / 3.0, 1.0 / 3.0])


def test_bandwidth_zero_is_sample_second_moment(rng):
    u = rng.standard_normal((50, 3))
    lrv = bartlett_lrv(u, HACConfig(bandwidth=0))
    assert_allclose(lrv, u.T @ u / 50, atol=1e-13)


def test_known_small_series():
    # hand-computed: u = [1, 2], b = 1, no demeaning
    # G0 = (1 + 4)/2 = 2.5; G1 = (2*1)/2 = 1; weight 1/2 -> 2.5 + 2*0.5*1 = 3.5
    u = np.array([[1.0], [2.0]])
    lrv = bartlett_lrv(u, HACConfig(bandwidth=1))
    assert_allclose(lrv, [[3.5]])


def test_ar1_long_run_variance_oracle():
    # AR(1) with coefficient phi and unit innovations has long-run variance
    # 1 / (1 - phi)^2
    phi = 0.5
    T = 100_000
    rng = np.random.default_rng(7)
    u = np.empty(T)
    prev = rng.standard_normal() / np.sqrt(1 - phi**2)
    innov = rng.standard_normal(T)
    for t in range(T):
        prev = phi * prev + innov[t]
        u[t] = prev
    lrv = bartlett_lrv(u, HACConfig(bandwidth=default_bandwidth(T)))
    assert abs(lrv[0, 0] - 4.0) < 0.4


def test_white_noise_consistency(rng):
    # at any bandwidth the estimate approaches the innovation covariance;
    # the entrywise noise scales like sqrt((b+1)/T)
    T = 20_000
    u = rng.standard_normal((T, 2))
    for b in (0, 5, default_bandwidth(T)):
        lrv = bartlett_lrv(u, HACConfig(bandwidth=b))
        assert np.abs(lrv - np.eye(2)).max() < 4.0 * np.sqrt((b + 1) / T)


def test_symmetry_and_psd(rng):
    u = rng.standard_normal((200, 4)) @ rng.standard_normal((4, 4))
    lrv = bartlett_lrv(u, HACConfig(bandwidth=5))
    assert np.abs(lrv - lrv.T).max() < 1e-12
    assert np.linalg.eigvalsh(lrv).min() >= -1e-12


def test_equivariance(rng):
    u = rng.standard_normal((150, 3))
    A = rng.standard_normal((3, 3))
    cfg = HACConfig(bandwidth=4)
    left = bartlett_lrv(u @ A.T, cfg)
    right = A @ bartlett_lrv(u, cfg) @ A.T
    assert_allclose(left, right, atol=1e-10)


def test_demean_flag(rng):
    u = rng.standard_normal((100, 2)) + 5.0
    raw = bartlett_lrv(u, HACConfig(bandwidth=3, demean=False))
    centered = bartlett_lrv(u, HACConfig(bandwidth=3, demean=True))
    manual = bartlett_lrv(u - u.mean(axis=0), HACConfig(bandwidth=3))
    assert_allclose(centered, manual, atol=1e-12)
    assert np.trace(raw) > np.trace(centered)


def test_bandwidth_too_large(rng):
    with pytest.raises(BandwidthError):
        bartlett_lrv(rng.standard_normal((10, 2)), HACConfig(bandwidth=10))


def test_clipped_mass_reporting(rng):
    u = rng.standard_normal((30, 3))
    lrv, clipped = bartlett_lrv(u, HACConfig(bandwidth=2), return_clipped=True)
    assert clipped >= 0.0
    assert np.linalg.eigvalsh(lrv).min() >= -1e-12


def test_config_validation():
    with pytest.raises(ValueError):
        HACConfig(bandwidth=-1)
    with pytest.raises(ValueError):
        HACConfig(kernel="parzen")
    assert HACConfig().resolve_bandwidth(125) == 5
    assert HACConfig(bandwidth=3).resolve_bandwidth(125) == 3
