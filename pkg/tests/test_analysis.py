import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from manifold_scope.analysis import (
    IdParams,
    MapcParams,
    aggregate_runs,
    assemble_profile,
    curvature_histogram,
    mapc_mse_correlation,
    pearson,
    profile_from_doc,
    profile_to_doc,
)
from manifold_scope.synthetic import SynthSpec, layer_stack
from manifold_scope.tensor_io import load_manifest


def _toy_run(tmp_path, name="run", seeds=(1, 2, 3), test_mse=None, dataset="ds", horizon=24):
    specs = [
        SynthSpec(kind="plane", intrinsic_dim=2, ambient_dim=6, n_points=400, seed=seeds[0]),
        SynthSpec(kind="sphere", intrinsic_dim=2, ambient_dim=6, n_points=400, seed=seeds[1], radius=1.0),
        SynthSpec(kind="sphere", intrinsic_dim=2, ambient_dim=6, n_points=400, seed=seeds[2], radius=0.5),
    ]
    _, manifest, path = layer_stack(
        specs, tmp_path / name, model=name, dataset=dataset, horizon=horizon, seed=seeds[0]
    )
    if test_mse is not None:
        manifest.test_mse = test_mse
        from manifold_scope.tensor_io import save_manifest

        save_manifest(manifest, path)
    return path


def test_assemble_profile_covers_each_layer(tmp_path):
    manifest = load_manifest(_toy_run(tmp_path))
    profile = assemble_profile(manifest)
    assert [layer.index for layer in profile.layers] == [1, 2, 3]
    for layer in profile.layers:
        assert layer.ok
        assert layer.id_estimate is not None
        assert layer.mapc_estimate is not None
    mapcs = [layer.mapc_estimate.mapc for layer in profile.layers]
    assert mapcs[0] < mapcs[1] < mapcs[2]


def test_assemble_profile_records_layer_failures(tmp_path):
    path = _toy_run(tmp_path)
    manifest = load_manifest(path)
    # corrupt the middle layer after manifest validation
    with open(manifest.layers[1].file, "r+b") as fh:
        fh.write(b"XXXX")
    profile = assemble_profile(manifest)
    assert profile.layers[0].ok
    assert not profile.layers[1].ok
    assert "magic" in profile.layers[1].error
    assert profile.layers[2].ok


def test_assemble_profile_with_no_usable_layers_raises(tmp_path):
    path = _toy_run(tmp_path)
    manifest = load_manifest(path)
    for layer in manifest.layers:
        with open(layer.file, "r+b") as fh:
            fh.write(b"XXXX")
    with pytest.raises(ValueError, match="zero layers loadable"):
        assemble_profile(manifest)


def test_assemble_profile_clamps_oversized_subsample(tmp_path):
    manifest = load_manifest(_toy_run(tmp_path))
    profile = assemble_profile(
        manifest,
        IdParams(subsample=10**9),
        MapcParams(subsample=10**9, intrinsic_dim=2),
    )
    assert all(layer.ok for layer in profile.layers)


def test_profile_doc_round_trip(tmp_path):
    manifest = load_manifest(_toy_run(tmp_path, test_mse=0.5))
    profile = assemble_profile(manifest)
    doc = profile_to_doc(profile)
    back = profile_from_doc(doc)
    assert back.run.dataset == "ds"
    assert back.run.test_mse == 0.5
    for a, b in zip(profile.layers, back.layers):
        assert a.index == b.index
        assert a.id_estimate.d_hat == b.id_estimate.d_hat
        assert a.mapc_estimate.mapc == b.mapc_estimate.mapc


def test_aggregate_runs_means_and_population_std(tmp_path):
    p1 = assemble_profile(load_manifest(_toy_run(tmp_path, "r1", seeds=(1, 2, 3))))
    p2 = assemble_profile(load_manifest(_toy_run(tmp_path, "r2", seeds=(4, 5, 6))))
    agg = aggregate_runs([p1, p2])
    assert agg.n_runs == 2
    assert len(agg.per_layer) == 3
    for pos, st_ in enumerate(agg.per_layer):
        vals = [p.layers[pos].mapc_estimate.mapc for p in (p1, p2)]
        assert st_.mapc_mean == pytest.approx(np.mean(vals), abs=1e-15)
        assert st_.mapc_std == pytest.approx(np.std(vals), abs=1e-15)
        assert st_.n_runs == 2


def test_aggregate_single_run_has_zero_spread(tmp_path):
    p1 = assemble_profile(load_manifest(_toy_run(tmp_path, "r1")))
    agg = aggregate_runs([p1])
    for st_ in agg.per_layer:
        assert st_.id_std == 0.0
        assert st_.mapc_std == 0.0


def test_aggregate_rejects_mismatched_layer_sets(tmp_path):
    p1 = assemble_profile(load_manifest(_toy_run(tmp_path, "r1")))
    p2 = assemble_profile(load_manifest(_toy_run(tmp_path, "r2")))
    p2.layers = p2.layers[:2]
    with pytest.raises(ValueError, match="mismatched layer sets"):
        aggregate_runs([p1, p2])
    with pytest.raises(ValueError, match="at least one"):
        aggregate_runs([])


def test_pearson_micro_oracle():
    # hand-derived: centered x = (-1, 0, 1), centered y = (-4/3, -1/3, 5/3),
    # r = 3 / sqrt(2 * 14/3)
    r = pearson([1.0, 2.0, 3.0], [2.0, 3.0, 5.0])
    assert r == pytest.approx(3.0 / np.sqrt(2.0 * 14.0 / 3.0), abs=1e-12)
    assert r == pytest.approx(0.9819805060619659, abs=1e-12)


def test_pearson_limits_and_errors():
    assert pearson([1, 2, 3], [2, 4, 6]) == pytest.approx(1.0, abs=1e-12)
    assert pearson([1, 2, 3], [5, 3, 1]) == pytest.approx(-1.0, abs=1e-12)
    with pytest.raises(ValueError, match="zero variance"):
        pearson([1, 1, 1], [1, 2, 3])
    with pytest.raises(ValueError, match="at least 2"):
        pearson([1.0], [2.0])
    with pytest.raises(ValueError, match="equally long"):
        pearson([1.0, 2.0], [1.0, 2.0, 3.0])


@settings(max_examples=30, deadline=None)
@given(
    a=st.floats(min_value=0.01, max_value=100.0),
    b=st.floats(min_value=-50.0, max_value=50.0),
    seed=st.integers(min_value=0, max_value=2**31 - 1),
)
def test_pearson_affine_invariance(a, b, seed):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(20)
    y = rng.standard_normal(20) + 0.5 * x
    base = pearson(x, y)
    assert pearson(a * x + b, y) == pytest.approx(base, abs=1e-12)


def _planted_profile(dataset, mapc_final, test_mse, model="m"):
    doc = {
        "run": {
            "model": model,
            "dataset": dataset,
            "lookback": 96,
            "horizon": 24,
            "seed": 0,
            "test_mse": test_mse,
        },
        "layers": [
            {
                "index": 1,
                "name": "head",
                "id": {"d_hat": 3.0, "n_used": 10, "n_discarded": 1, "fit_rmse": 0.0, "method": "twonn"},
                "mapc": {"mapc": 0.1, "n_points_used": 10, "n_points_skipped": 0},
                "error": None,
            },
            {
                "index": 2,
                "name": "tail",
                "id": {"d_hat": 3.0, "n_used": 10, "n_discarded": 1, "fit_rmse": 0.0, "method": "twonn"},
                "mapc": {"mapc": mapc_final, "n_points_used": 10, "n_points_skipped": 0},
                "error": None,
            },
        ],
    }
    return profile_from_doc(doc)


def test_correlation_on_planted_linear_relation():
    profiles = [
        _planted_profile("ds_a", m, 2.0 * m + 1.0, model="m%d" % i)
        for i, m in enumerate([0.2, 0.4, 0.9, 1.3])
    ]
    profiles += [
        _planted_profile("ds_b", m, -0.5 * m + 3.0, model="n%d" % i)
        for i, m in enumerate([0.1, 0.7, 1.1])
    ]
    results = mapc_mse_correlation(profiles)
    assert [res.dataset for res in results] == ["ds_a", "ds_b"]
    res_a, res_b = results
    assert res_a.n_runs == 4
    assert res_a.r == pytest.approx(1.0, abs=1e-12)
    assert res_a.slope == pytest.approx(2.0, abs=1e-12)
    assert res_a.intercept == pytest.approx(1.0, abs=1e-12)
    assert res_b.r == pytest.approx(-1.0, abs=1e-12)
    assert res_b.slope == pytest.approx(-0.5, abs=1e-12)


def test_correlation_requires_mse_and_group_size():
    with pytest.raises(ValueError, match="missing test_mse"):
        mapc_mse_correlation([_planted_profile("ds", 0.5, None)])
    with pytest.raises(ValueError, match="fewer than 2"):
        mapc_mse_correlation([_planted_profile("ds", 0.5, 1.0)])


def test_correlation_rejects_failed_final_layer():
    profile = _planted_profile("ds", 0.5, 1.0)
    profile.layers[-1].error = "boom"
    profile.layers[-1].mapc_estimate = None
    with pytest.raises(ValueError, match="final layer"):
        mapc_mse_correlation([profile, _planted_profile("ds", 0.7, 1.2)])


def test_histogram_micro_oracle():
    hist = curvature_histogram(np.array([-1.0, 0.0, 1.0]), 2, value_range=(-1.0, 1.0))
    assert np.array_equal(hist.counts, [2, 1])
    assert np.allclose(hist.bin_edges, [-1.0, 0.0, 1.0])
    assert hist.total == 3


def test_histogram_bins_are_right_closed():
    # values exactly on an inner edge belong to the bin on the left
    hist = curvature_histogram(np.array([0.5, 0.5, 0.75]), 2, value_range=(0.0, 1.0))
    assert np.array_equal(hist.counts, [2, 1])


def test_histogram_clamps_out_of_range_into_end_bins():
    hist = curvature_histogram(np.array([-5.0, 0.1, 0.9, 7.0]), 2, value_range=(0.0, 1.0))
    assert np.array_equal(hist.counts, [2, 2])
    assert hist.total == 4


def test_histogram_widens_degenerate_range():
    hist = curvature_histogram(np.full(9, 3.25), 4)
    assert hist.counts.sum() == 9
    assert np.count_nonzero(hist.counts) == 1
    assert hist.bin_edges[0] < 3.25 <= hist.bin_edges[-1]


def test_histogram_validation():
    with pytest.raises(ValueError, match="empty"):
        curvature_histogram(np.empty(0), 4)
    with pytest.raises(ValueError, match="n_bins"):
        curvature_histogram(np.ones(3), 0)
    with pytest.raises(ValueError, match="range"):
        curvature_histogram(np.ones(3), 2, value_range=(1.0, 0.0))


@settings(max_examples=25, deadline=None)
@given(
    seed=st.integers(min_value=0, max_value=2**31 - 1),
    n_bins=st.integers(min_value=1, max_value=40),
)
def test_histogram_conserves_count(seed, n_bins):
    rng = np.random.default_rng(seed)
    values = rng.standard_normal(rng.integers(1, 200))
    hist = curvature_histogram(values, n_bins)
    assert int(hist.counts.sum()) == values.size == hist.total
