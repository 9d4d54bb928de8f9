import math

import numpy as np
import pytest

from manifold_scope.id_estimators import (
    lpca_estimate,
    pareto_cdf,
    twonn_estimate,
    twonn_ratios,
)
from manifold_scope.synthetic import SynthSpec, sample
from manifold_scope.tensor_io import PointCloud

# Hand-derived oracle for the 4-point line {0, 1, 3, 7}:
# neighbor pairs (r1, r2) are (1,3), (1,2), (2,3), (4,6), ratios sorted are
# [1.5, 1.5, 2, 3] with empirical cdf [1/4, 2/4, 3/4, 1]; the final ratio is
# dropped and the through-origin slope of -log(1-F) on log(mu) is
# (log1.5*log(4/3) + log1.5*log2 + log2*log4) / (2*log1.5^2 + log2^2).
_L15 = math.log(1.5)
_L2 = math.log(2.0)
LINE4_D_HAT = (_L15 * (-math.log(0.75)) + _L15 * _L2 + _L2 * math.log(4.0)) / (
    2.0 * _L15 * _L15 + _L2 * _L2
)


def test_line4_micro_oracle():
    cloud = PointCloud(np.array([[0.0], [1.0], [3.0], [7.0]]))
    est = twonn_estimate(cloud, discard_fraction=0.0)
    assert est.d_hat == pytest.approx(LINE4_D_HAT, abs=1e-12)
    assert est.d_hat == pytest.approx(1.6788216825910451, abs=1e-12)
    assert est.n_used == 3
    assert est.n_discarded == 1
    assert est.method == "twonn"
    assert est.fit_rmse >= 0.0


def test_ratios_drop_duplicates():
    base = np.array([[0.0], [1.0], [3.0], [7.0]])
    with_twin = PointCloud(np.vstack([base, base[2]]))
    mu, n_dropped = twonn_ratios(with_twin)
    assert n_dropped == 2
    assert mu.size == 3
    assert np.all(mu >= 1.0)


def test_isolated_twin_pair_does_not_move_the_estimate():
    rng = np.random.default_rng(11)
    base = rng.random((400, 3))
    est_clean = twonn_estimate(PointCloud(base))
    # a twin pair far from everything else: both members report r1 == 0 and
    # drop out, nobody else's neighbors change, so the ratio set is identical
    twin = np.array([[1000.0, 1000.0, 1000.0]])
    dup = np.vstack([base, twin, twin])
    est_dup = twonn_estimate(PointCloud(dup))
    assert est_dup.d_hat == pytest.approx(est_clean.d_hat, abs=1e-12)
    assert est_dup.n_discarded == est_clean.n_discarded + 2


def test_discard_always_drops_the_last_ratio():
    cloud = PointCloud(np.array([[0.0], [1.0], [3.0], [7.0]]))
    est = twonn_estimate(cloud, discard_fraction=0.0)
    # without the mandatory drop the final point has F_emp = 1 and the fit
    # target -log(1-F) diverges
    assert est.n_used == 3


def test_discard_fraction_bounds():
    cloud = PointCloud(np.arange(12, dtype=float).reshape(-1, 1))
    with pytest.raises(ValueError, match="discard_fraction"):
        twonn_estimate(cloud, discard_fraction=0.5)
    with pytest.raises(ValueError, match="discard_fraction"):
        twonn_estimate(cloud, discard_fraction=-0.1)


def test_degenerate_ratios_rejected():
    # unit-square corners: both nearest neighbors of every corner sit at
    # distance exactly 1, so every mu equals 1 bit for bit
    cloud = PointCloud(np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]))
    with pytest.raises(ValueError, match="degenerate"):
        twonn_estimate(cloud, discard_fraction=0.0)


def test_subsample_is_seeded_and_bounded():
    rng = np.random.default_rng(12)
    cloud = PointCloud(rng.random((500, 2)))
    a = twonn_estimate(cloud, subsample=200, seed=3)
    b = twonn_estimate(cloud, subsample=200, seed=3)
    c = twonn_estimate(cloud, subsample=200, seed=4)
    assert a.d_hat == b.d_hat
    assert a.d_hat != c.d_hat
    with pytest.raises(ValueError, match="exceeds cloud size"):
        twonn_estimate(cloud, subsample=501)
    full = twonn_estimate(cloud, subsample=500)
    assert full.d_hat == twonn_estimate(cloud).d_hat


def test_estimate_counts_add_up():
    rng = np.random.default_rng(13)
    cloud = PointCloud(rng.random((300, 2)))
    est = twonn_estimate(cloud, discard_fraction=0.1)
    assert est.n_used == 300 - int(np.ceil(0.1 * 300))
    assert est.n_used + est.n_discarded == 300
    assert est.d_hat > 0


def test_rigid_motion_invariance():
    rng = np.random.default_rng(14)
    base = rng.random((800, 2))
    lifted = np.hstack([base, np.zeros((800, 3))])
    q, r = np.linalg.qr(rng.standard_normal((5, 5)))
    q = q * np.sign(np.diag(r))
    moved = lifted @ q + rng.standard_normal(5)
    e1 = twonn_estimate(PointCloud(lifted))
    e2 = twonn_estimate(PointCloud(moved))
    assert e2.d_hat == pytest.approx(e1.d_hat, rel=1e-9)


def test_pareto_cdf_contract():
    mu = np.array([1.0, 2.0, 4.0])
    out = pareto_cdf(mu, 1.0)
    assert np.allclose(out, [0.0, 0.5, 0.75])
    assert np.all(np.diff(pareto_cdf(np.linspace(1, 50, 100), 2.3)) > 0)
    with pytest.raises(ValueError, match=">= 1"):
        pareto_cdf(np.array([0.5]), 1.0)
    with pytest.raises(ValueError, match="positive"):
        pareto_cdf(mu, 0.0)


def test_lpca_exact_on_plane():
    rng = np.random.default_rng(15)
    base = rng.standard_normal((500, 3))
    lifted = np.hstack([base, np.zeros((500, 4))])
    est = lpca_estimate(PointCloud(lifted))
    assert est.d_hat == 3.0
    assert est.method == "lpca"
    assert est.fit_rmse == pytest.approx(0.0, abs=1e-12)


def test_lpca_cutoff_controls_the_estimate():
    rng = np.random.default_rng(16)
    strong = rng.standard_normal((2000, 2)) * 10.0
    weak = rng.standard_normal((2000, 1)) * 0.1
    cloud = PointCloud(np.hstack([strong, weak]))
    loose = lpca_estimate(cloud, variance_cutoff=0.01)
    tight = lpca_estimate(cloud, variance_cutoff=0.3)
    assert loose.d_hat >= tight.d_hat
    with pytest.raises(ValueError, match="variance_cutoff"):
        lpca_estimate(cloud, variance_cutoff=0.0)


def test_lpca_zero_variance_rejected():
    cloud = PointCloud(np.ones((5, 3)) * 2.0)
    with pytest.raises(ValueError, match="zero total variance"):
        lpca_estimate(cloud)


def test_cube_recovery_small():
    cloud = sample(SynthSpec(kind="hypercube", intrinsic_dim=2, ambient_dim=10, n_points=4000, seed=7))
    est = twonn_estimate(cloud)
    assert abs(est.d_hat - 2.0) <= 0.3
