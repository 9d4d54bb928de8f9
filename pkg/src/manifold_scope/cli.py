"""Command-line interface.

Subcommands: id, mapc, profile, aggregate, correlate, hist, synth. Exit
codes: 0 on success, 1 on usage errors, 2 on data or computation errors.
All numeric output goes through the deterministic serializers, so repeated
runs on identical inputs produce identical bytes.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import analysis, serialize, svg, synthetic
from ._backend import set_threads, threads_from_env
from .curvature import manifold_mapc
from .id_estimators import lpca_estimate, twonn_estimate
from .tensor_io import (
    FormatError,
    PointCloud,
    load_manifest,
    load_pointcloud,
    save_pointcloud,
)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _write_output(text, out_path):
    if out_path:
        Path(out_path).write_text(text)
    else:
        sys.stdout.write(text)


def _emit(doc, header, rows, args):
    if args.format == "csv":
        _write_output(serialize.format_csv(header, rows), args.out)
    else:
        _write_output(serialize.dumps_json(doc), args.out)


def _clamped(requested, n):
    if requested is None:
        return None
    return min(int(requested), n)


def _cmd_id(args):
    cloud = load_pointcloud(args.input)
    if args.method == "lpca":
        est = lpca_estimate(cloud, variance_cutoff=args.variance_cutoff)
    else:
        est = twonn_estimate(
            cloud,
            discard_fraction=args.discard_fraction,
            subsample=_clamped(args.subsample, cloud.n_points),
            seed=args.seed,
        )
    doc = est.to_dict()
    header = ["d_hat", "n_used", "n_discarded", "fit_rmse", "method"]
    rows = [[doc[k] for k in header]]
    _emit(doc, header, rows, args)
    return 0


def _cmd_mapc(args):
    cloud = load_pointcloud(args.input)
    est, spectrum = manifold_mapc(
        cloud,
        args.d,
        k_neighbors=args.k,
        subsample=_clamped(args.subsample, cloud.n_points),
        seed=args.seed,
    )
    if args.spectrum_out:
        save_pointcloud(PointCloud(spectrum.per_point), args.spectrum_out)
    doc = est.to_dict()
    header = ["mapc", "n_points_used", "n_points_skipped"]
    rows = [[doc[k] for k in header]]
    _emit(doc, header, rows, args)
    return 0


def _profile_params(args):
    id_params = analysis.IdParams(
        discard_fraction=args.discard_fraction,
        subsample=args.id_subsample,
        seed=args.seed,
    )
    mapc_params = analysis.MapcParams(
        k_neighbors=args.k,
        subsample=args.mapc_subsample,
        seed=args.seed,
        intrinsic_dim=args.d,
    )
    return id_params, mapc_params


def _profile_rows(profile):
    rows = []
    for layer in profile.layers:
        ide = layer.id_estimate
        est = layer.mapc_estimate
        rows.append(
            [
                layer.index,
                layer.name,
                ide.d_hat if ide else None,
                ide.fit_rmse if ide else None,
                est.mapc if est else None,
                est.n_points_used if est else None,
                est.n_points_skipped if est else None,
                layer.error,
            ]
        )
    return rows


def _cmd_profile(args):
    manifest = load_manifest(args.manifest)
    id_params, mapc_params = _profile_params(args)
    profile = analysis.assemble_profile(manifest, id_params, mapc_params)
    doc = analysis.profile_to_doc(profile)
    header = [
        "index",
        "name",
        "d_hat",
        "fit_rmse",
        "mapc",
        "mapc_points_used",
        "mapc_points_skipped",
        "error",
    ]
    if args.chart:
        label = "h=%d" % manifest.horizon
        ok_layers = [layer for layer in profile.layers if layer.ok]
        xs = [layer.index for layer in ok_layers]
        chart = svg.two_panel_chart(
            [(label, xs, [layer.id_estimate.d_hat for layer in ok_layers])],
            [(label, xs, [layer.mapc_estimate.mapc for layer in ok_layers])],
            top_title="intrinsic dimension by layer",
            bottom_title="mean absolute principal curvature by layer",
            x_label="layer index",
            top_y_label="d_hat",
            bottom_y_label="mapc",
        )
        Path(args.chart).write_text(chart)
    _emit(doc, header, _profile_rows(profile), args)
    return 0


def _load_profiles(paths):
    profiles = []
    for path in paths:
        try:
            raw = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise FormatError("invalid profile JSON in %s: %s" % (path, exc))
        try:
            profiles.append(analysis.profile_from_doc(raw))
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError("bad profile document %s: %s" % (path, exc))
    return profiles


def _cmd_aggregate(args):
    profiles = _load_profiles(args.profiles)
    agg = analysis.aggregate_runs(profiles)
    per_layer = [
        {
            "index": st.index,
            "name": st.name,
            "n_runs": st.n_runs,
            "id_mean": st.id_mean,
            "id_std": st.id_std,
            "mapc_mean": st.mapc_mean,
            "mapc_std": st.mapc_std,
        }
        for st in agg.per_layer
    ]
    doc = {"n_runs": agg.n_runs, "per_layer": per_layer}
    header = ["index", "name", "n_runs", "id_mean", "id_std", "mapc_mean", "mapc_std"]
    rows = [[entry[k] for k in header] for entry in per_layer]
    if args.chart:
        label = "mean over %d runs" % agg.n_runs
        xs = [st.index for st in agg.per_layer]
        chart = svg.two_panel_chart(
            [(label, xs, [st.id_mean for st in agg.per_layer])],
            [(label, xs, [st.mapc_mean for st in agg.per_layer])],
            top_title="intrinsic dimension by layer",
            bottom_title="mean absolute principal curvature by layer",
            x_label="layer index",
            top_y_label="d_hat",
            bottom_y_label="mapc",
        )
        Path(args.chart).write_text(chart)
    _emit(doc, header, rows, args)
    return 0


def _cmd_correlate(args):
    if args.profiles:
        profiles = _load_profiles(args.profiles)
    else:
        id_params, mapc_params = _profile_params(args)
        profiles = [
            analysis.assemble_profile(load_manifest(path), id_params, mapc_params)
            for path in args.manifests
        ]
    results = analysis.mapc_mse_correlation(profiles)
    per_dataset = [
        {
            "dataset": res.dataset,
            "n_runs": res.n_runs,
            "r": res.r,
            "slope": res.slope,
            "intercept": res.intercept,
        }
        for res in results
    ]
    doc = {"per_dataset": per_dataset}
    header = ["dataset", "n_runs", "r", "slope", "intercept"]
    rows = [[entry[k] for k in header] for entry in per_dataset]
    _emit(doc, header, rows, args)
    return 0


def _cmd_hist(args):
    cloud = load_pointcloud(args.input)
    value_range = tuple(args.range) if args.range else None
    hist = analysis.curvature_histogram(cloud.data, n_bins=args.bins, value_range=value_range)
    doc = {
        "bin_edges": [float(e) for e in hist.bin_edges],
        "counts": [int(c) for c in hist.counts],
        "total": hist.total,
    }
    header = ["bin_lo", "bin_hi", "count"]
    rows = [
        [float(hist.bin_edges[i]), float(hist.bin_edges[i + 1]), int(hist.counts[i])]
        for i in range(hist.counts.size)
    ]
    if args.chart:
        chart = svg.bar_chart(
            hist.bin_edges,
            hist.counts,
            title="curvature histogram",
            x_label="principal curvature",
            y_label="count",
        )
        Path(args.chart).write_text(chart)
    _emit(doc, header, rows, args)
    return 0


def _parse_hessian(text):
    if not text:
        return ()
    try:
        return tuple(float(part) for part in text.split(","))
    except ValueError:
        raise _UsageError("--hessian needs a comma-separated list of numbers")


def _cmd_synth(args):
    if args.stack:
        raw = json.loads(Path(args.stack).read_text())
        if not isinstance(raw, dict) or "layers" not in raw:
            raise FormatError("stack description needs a 'layers' list")
        specs = []
        for entry in raw["layers"]:
            specs.append(
                synthetic.SynthSpec(
                    kind=entry["kind"],
                    intrinsic_dim=int(entry["intrinsic_dim"]),
                    ambient_dim=int(entry["ambient_dim"]),
                    n_points=int(entry["n_points"]),
                    seed=int(entry.get("seed", 0)),
                    radius=float(entry.get("radius", 1.0)),
                    hessian_diag=tuple(entry.get("hessian_diag", ())),
                    patch_radius=float(entry.get("patch_radius", 0.05)),
                )
            )
        out_dir = args.out_dir or "."
        _, _, manifest_path = synthetic.layer_stack(
            specs,
            out_dir,
            model=str(raw.get("model", "synthetic")),
            dataset=str(raw.get("dataset", "synthetic")),
            lookback=int(raw.get("lookback", 0)),
            horizon=int(raw.get("horizon", 0)),
            seed=int(raw.get("seed", 0)),
            dtype=args.dtype,
        )
        sys.stdout.write(str(manifest_path) + "\n")
        return 0
    if not args.kind:
        raise _UsageError("synth needs either --stack or --kind")
    if not args.out:
        raise _UsageError("synth --kind needs --out")
    spec = synthetic.SynthSpec(
        kind=args.kind,
        intrinsic_dim=args.d,
        ambient_dim=args.ambient,
        n_points=args.n,
        seed=args.seed,
        radius=args.radius,
        hessian_diag=_parse_hessian(args.hessian),
        patch_radius=args.patch_radius,
    )
    cloud = synthetic.sample(spec)
    save_pointcloud(cloud, args.out, dtype=args.dtype)
    return 0


def _add_format_args(sub):
    sub.add_argument("--format", choices=("json", "csv"), default="json")
    sub.add_argument("--out", default=None, help="output file (default stdout)")
    # accepted on the subcommand as well, so the flag can go anywhere
    sub.add_argument("--threads", type=int, default=argparse.SUPPRESS, help="JIT thread cap")


def _add_estimator_args(sub):
    sub.add_argument("--discard-fraction", type=float, default=0.1)
    sub.add_argument("--id-subsample", type=int, default=None)
    sub.add_argument("--mapc-subsample", type=int, default=None)
    sub.add_argument("--k", type=int, default=None, help="neighbors per curvature fit")
    sub.add_argument("--d", type=int, default=None, help="fixed intrinsic dimension override")
    sub.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="manifold-scope", description=__doc__)
    parser.add_argument("--threads", type=int, default=None, help="JIT thread cap")
    sub = parser.add_subparsers(dest="command")

    p_id = sub.add_parser("id", help="intrinsic dimension of one matrix file")
    p_id.add_argument("--input", required=True)
    p_id.add_argument("--method", choices=("twonn", "lpca"), default="twonn")
    p_id.add_argument("--discard-fraction", type=float, default=0.1)
    p_id.add_argument("--variance-cutoff", type=float, default=0.05)
    p_id.add_argument("--subsample", type=int, default=None)
    p_id.add_argument("--seed", type=int, default=0)
    _add_format_args(p_id)
    p_id.set_defaults(func=_cmd_id)

    p_mapc = sub.add_parser("mapc", help="mean absolute principal curvature")
    p_mapc.add_argument("--input", required=True)
    p_mapc.add_argument("--d", type=int, required=True, help="intrinsic dimension")
    p_mapc.add_argument("--k", type=int, default=None)
    p_mapc.add_argument("--subsample", type=int, default=None)
    p_mapc.add_argument("--seed", type=int, default=0)
    p_mapc.add_argument("--spectrum-out", default=None, help="write per-point curvatures here")
    _add_format_args(p_mapc)
    p_mapc.set_defaults(func=_cmd_mapc)

    p_prof = sub.add_parser("profile", help="per-layer geometry of one run")
    p_prof.add_argument("--manifest", required=True)
    _add_estimator_args(p_prof)
    p_prof.add_argument("--chart", default=None, help="write an SVG chart here")
    _add_format_args(p_prof)
    p_prof.set_defaults(func=_cmd_profile)

    p_agg = sub.add_parser("aggregate", help="combine profile JSONs across runs")
    p_agg.add_argument("--profiles", nargs="+", required=True)
    p_agg.add_argument("--chart", default=None, help="write an SVG chart here")
    _add_format_args(p_agg)
    p_agg.set_defaults(func=_cmd_aggregate)

    p_corr = sub.add_parser("correlate", help="final-layer curvature vs test error")
    group = p_corr.add_mutually_exclusive_group(required=True)
    group.add_argument("--profiles", nargs="+")
    group.add_argument("--manifests", nargs="+")
    _add_estimator_args(p_corr)
    _add_format_args(p_corr)
    p_corr.set_defaults(func=_cmd_correlate)

    p_hist = sub.add_parser("hist", help="histogram of matrix values")
    p_hist.add_argument("--input", required=True)
    p_hist.add_argument("--bins", type=int, default=analysis.DEFAULT_HIST_BINS)
    p_hist.add_argument("--range", type=float, nargs=2, default=None, metavar=("LO", "HI"))
    p_hist.add_argument("--chart", default=None, help="write an SVG chart here")
    _add_format_args(p_hist)
    p_hist.set_defaults(func=_cmd_hist)

    p_synth = sub.add_parser("synth", help="generate synthetic clouds")
    p_synth.add_argument("--kind", choices=synthetic.KINDS, default=None)
    p_synth.add_argument("--d", type=int, default=1)
    p_synth.add_argument("--ambient", type=int, default=3)
    p_synth.add_argument("--n", type=int, default=1000)
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.add_argument("--radius", type=float, default=1.0)
    p_synth.add_argument("--hessian", default="", help="comma-separated diagonal")
    p_synth.add_argument("--patch-radius", type=float, default=0.05)
    p_synth.add_argument("--dtype", choices=("f32", "f64"), default="f64")
    p_synth.add_argument("--out", default=None)
    p_synth.add_argument("--stack", default=None, help="JSON stack description")
    p_synth.add_argument("--out-dir", default=None)
    p_synth.add_argument("--threads", type=int, default=argparse.SUPPRESS, help="JIT thread cap")
    p_synth.set_defaults(func=_cmd_synth)

    return parser


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        sys.stderr.write("usage error: %s\n" % exc)
        return 1
    except SystemExit as exc:  # --help paths
        return int(exc.code or 0)
    if args.command is None:
        sys.stderr.write("usage error: no command given, try --help\n")
        return 1
    try:
        threads = getattr(args, "threads", None)
        if threads is None:
            threads = threads_from_env()
        if threads is not None:
            set_threads(threads)
        return args.func(args)
    except _UsageError as exc:
        sys.stderr.write("usage error: %s\n" % exc)
        return 1
    except (ValueError, OSError, KeyError, RuntimeError, json.JSONDecodeError) as exc:
        sys.stderr.write("error: %s\n" % exc)
        return 2


def main():
    sys.exit(run_cli())
