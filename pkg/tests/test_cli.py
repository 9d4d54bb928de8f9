import json
import subprocess
import sys

import numpy as np
import pytest

from manifold_scope.cli import run_cli
from manifold_scope.synthetic import SynthSpec, layer_stack, sample
from manifold_scope.tensor_io import PointCloud, load_pointcloud, save_pointcloud


@pytest.fixture
def cube_file(tmp_path):
    cloud = sample(SynthSpec(kind="hypercube", intrinsic_dim=2, ambient_dim=8, n_points=500, seed=3))
    path = tmp_path / "cube.gatm"
    save_pointcloud(cloud, path)
    return path


@pytest.fixture
def sphere_file(tmp_path):
    cloud = sample(SynthSpec(kind="sphere", intrinsic_dim=2, ambient_dim=8, n_points=500, seed=4))
    path = tmp_path / "sphere.gatm"
    save_pointcloud(cloud, path)
    return path


@pytest.fixture
def run_dir(tmp_path):
    specs = [
        SynthSpec(kind="plane", intrinsic_dim=2, ambient_dim=6, n_points=400, seed=1),
        SynthSpec(kind="sphere", intrinsic_dim=2, ambient_dim=6, n_points=400, seed=2),
    ]
    _, _, manifest_path = layer_stack(specs, tmp_path / "run", horizon=24)
    return manifest_path


def test_id_json_output(cube_file, tmp_path, capsys):
    out = tmp_path / "id.json"
    assert run_cli(["id", "--input", str(cube_file), "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert 1.5 < doc["d_hat"] < 2.5
    assert doc["method"] == "twonn"
    assert set(doc) == {"d_hat", "n_used", "n_discarded", "fit_rmse", "method"}


def test_id_csv_output(cube_file, capsys):
    assert run_cli(["id", "--input", str(cube_file), "--format", "csv"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "d_hat,n_used,n_discarded,fit_rmse,method"
    assert lines[1].endswith(",twonn")


def test_id_lpca_method(cube_file, capsys):
    assert run_cli(["id", "--input", str(cube_file), "--method", "lpca"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["method"] == "lpca"
    assert doc["d_hat"] == 2.0


def test_mapc_with_spectrum_export(sphere_file, tmp_path, capsys):
    spec_out = tmp_path / "spec.gatm"
    code = run_cli(
        ["mapc", "--input", str(sphere_file), "--d", "2", "--spectrum-out", str(spec_out)]
    )
    assert code == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["mapc"] == pytest.approx(1.0, rel=0.1)
    spectrum = load_pointcloud(spec_out)
    assert spectrum.data.shape == (doc["n_points_used"], 2 * (8 - 2))


def test_profile_json_and_chart(run_dir, tmp_path, capsys):
    chart = tmp_path / "prof.svg"
    assert run_cli(["profile", "--manifest", str(run_dir), "--chart", str(chart)]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["run"]["horizon"] == 24
    assert [layer["index"] for layer in doc["layers"]] == [1, 2]
    assert doc["layers"][0]["mapc"]["mapc"] < doc["layers"][1]["mapc"]["mapc"]
    text = chart.read_text()
    assert text.startswith("<svg")
    assert "polyline" in text


def test_profile_csv(run_dir, capsys):
    assert run_cli(["profile", "--manifest", str(run_dir), "--format", "csv"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0].startswith("index,name,d_hat")
    assert len(lines) == 3


def test_aggregate_over_saved_profiles(run_dir, tmp_path, capsys):
    p1 = tmp_path / "p1.json"
    p2 = tmp_path / "p2.json"
    assert run_cli(["profile", "--manifest", str(run_dir), "--out", str(p1)]) == 0
    assert run_cli(["profile", "--manifest", str(run_dir), "--seed", "5", "--out", str(p2)]) == 0
    chart = tmp_path / "agg.svg"
    assert run_cli(["aggregate", "--profiles", str(p1), str(p2), "--chart", str(chart)]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["n_runs"] == 2
    assert len(doc["per_layer"]) == 2
    assert chart.exists()


def test_correlate_from_profile_docs(tmp_path, capsys):
    docs = []
    for i, (mapc, mse) in enumerate([(0.2, 1.4), (0.5, 2.0), (0.9, 2.8)]):
        doc = {
            "run": {
                "model": "m%d" % i,
                "dataset": "ds",
                "lookback": 96,
                "horizon": 24,
                "seed": i,
                "test_mse": mse,
            },
            "layers": [
                {
                    "index": 1,
                    "name": "out",
                    "id": {"d_hat": 2.0, "n_used": 9, "n_discarded": 1, "fit_rmse": 0.0, "method": "twonn"},
                    "mapc": {"mapc": mapc, "n_points_used": 9, "n_points_skipped": 0},
                    "error": None,
                }
            ],
        }
        path = tmp_path / ("p%d.json" % i)
        path.write_text(json.dumps(doc))
        docs.append(str(path))
    assert run_cli(["correlate", "--profiles", *docs, "--format", "csv"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "dataset,n_runs,r,slope,intercept"
    cells = lines[1].split(",")
    assert cells[0] == "ds"
    assert cells[1] == "3"
    assert float(cells[2]) == pytest.approx(1.0, abs=2e-3)


def test_hist_csv_and_chart(tmp_path, capsys):
    save_pointcloud(PointCloud(np.array([[-1.0], [0.0], [1.0]])), tmp_path / "v.gatm")
    chart = tmp_path / "h.svg"
    code = run_cli(
        [
            "hist",
            "--input",
            str(tmp_path / "v.gatm"),
            "--bins",
            "2",
            "--range",
            "-1",
            "1",
            "--format",
            "csv",
            "--chart",
            str(chart),
        ]
    )
    assert code == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "bin_lo,bin_hi,count"
    assert [line.split(",")[2] for line in lines[1:]] == ["2", "1"]
    assert chart.read_text().startswith("<svg")


def test_synth_single_cloud_deterministic(tmp_path):
    out1 = tmp_path / "a.gatm"
    out2 = tmp_path / "b.gatm"
    argv = ["synth", "--kind", "sphere", "--d", "2", "--ambient", "5", "--n", "50", "--seed", "9"]
    assert run_cli(argv + ["--out", str(out1)]) == 0
    assert run_cli(argv + ["--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_synth_stack_builds_manifest(tmp_path, capsys):
    stack = {
        "model": "demo",
        "dataset": "ds",
        "horizon": 24,
        "layers": [
            {"kind": "plane", "intrinsic_dim": 2, "ambient_dim": 5, "n_points": 60, "seed": 1},
            {"kind": "sphere", "intrinsic_dim": 2, "ambient_dim": 5, "n_points": 60, "seed": 2},
        ],
    }
    spec_path = tmp_path / "stack.json"
    spec_path.write_text(json.dumps(stack))
    out_dir = tmp_path / "out"
    assert run_cli(["synth", "--stack", str(spec_path), "--out-dir", str(out_dir)]) == 0
    manifest_path = capsys.readouterr().out.strip()
    assert manifest_path.endswith("manifest.json")
    from manifold_scope.tensor_io import load_manifest

    manifest = load_manifest(manifest_path)
    assert len(manifest.layers) == 2
    assert manifest.model == "demo"


def test_usage_errors_exit_1(capsys):
    assert run_cli(["id"]) == 1
    assert run_cli(["bogus"]) == 1
    assert run_cli([]) == 1
    assert run_cli(["mapc", "--input", "x.gatm"]) == 1
    err = capsys.readouterr().err
    assert "usage error" in err


def test_data_errors_exit_2(tmp_path, capsys, sphere_file):
    assert run_cli(["id", "--input", str(tmp_path / "missing.gatm")]) == 2
    bad = tmp_path / "bad.gatm"
    bad.write_bytes(b"JUNKJUNKJUNKJUNKJUNKJUNKJUNK")
    assert run_cli(["id", "--input", str(bad)]) == 2
    assert run_cli(["mapc", "--input", str(sphere_file), "--d", "8"]) == 2
    err = capsys.readouterr().err
    assert "error:" in err


def test_help_exits_0(capsys):
    assert run_cli(["--help"]) == 0
    assert run_cli(["id", "--help"]) == 0


def test_oversized_subsample_is_clamped(cube_file, capsys):
    assert run_cli(["id", "--input", str(cube_file), "--subsample", "999999999"]) == 0
    capsys.readouterr()


def test_threads_flag_and_env(sphere_file, tmp_path, monkeypatch, capsys):
    assert run_cli(["mapc", "--input", str(sphere_file), "--d", "2", "--threads", "8"]) == 0
    monkeypatch.setenv("MANIFOLD_SCOPE_THREADS", "3")
    assert run_cli(["mapc", "--input", str(sphere_file), "--d", "2"]) == 0
    monkeypatch.setenv("MANIFOLD_SCOPE_THREADS", "zebra")
    assert run_cli(["mapc", "--input", str(sphere_file), "--d", "2"]) == 2
    capsys.readouterr()


def test_console_script_entry_point(cube_file):
    proc = subprocess.run(
        ["manifold-scope", "id", "--input", str(cube_file), "--format", "csv"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert proc.stdout.startswith("d_hat,")


def test_numpy_backend_subprocess(cube_file):
    import os

    env = dict(os.environ, MANIFOLD_SCOPE_BACKEND="numpy")
    proc = subprocess.run(
        [sys.executable, "-c",
         "from manifold_scope.cli import run_cli; import sys; "
         "sys.exit(run_cli(['id', '--input', %r]))" % str(cube_file)],
        capture_output=True,
        text=True,
        env=env,
    )
    assert proc.returncode == 0
    assert "d_hat" in proc.stdout
