"""Layer-wise geometry profiles and cross-run summaries.

A profile walks the layers of one run manifest and records intrinsic
dimension and mean absolute principal curvature per layer. Profiles from
repeated runs can be aggregated into per-layer means and spreads, and the
final-layer curvature can be correlated against each run's test error.
"""

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .curvature import CurvatureSpectrum, MapcEstimate, manifold_mapc
from .id_estimators import IdEstimate, twonn_estimate
from .tensor_io import LayerRef, PointCloud, RunManifest, load_pointcloud

DEFAULT_HIST_BINS = 60


@dataclass
class IdParams:
    """Settings forwarded to the intrinsic-dimension estimator."""

    discard_fraction: float = 0.1
    subsample: int | None = None
    seed: int = 0


@dataclass
class MapcParams:
    """Settings forwarded to the curvature estimator.

    intrinsic_dim overrides the per-layer dimension; when None each layer
    uses its own rounded intrinsic-dimension estimate.
    """

    k_neighbors: int | None = None
    subsample: int | None = None
    seed: int = 0
    intrinsic_dim: int | None = None


@dataclass
class LayerResult:
    """Geometry summary of one layer, or the error that prevented one."""

    index: int
    name: str
    id_estimate: IdEstimate | None = None
    mapc_estimate: MapcEstimate | None = None
    spectrum: CurvatureSpectrum | None = None
    error: str | None = None

    @property
    def ok(self):
        return self.error is None


@dataclass
class LayerProfile:
    """Per-layer geometry of one run."""

    run: RunManifest
    layers: list = field(default_factory=list)


@dataclass
class LayerStats:
    """Cross-run summary of one layer position."""

    index: int
    name: str
    n_runs: int
    id_mean: float
    id_std: float
    mapc_mean: float
    mapc_std: float


@dataclass
class AggregateProfile:
    """Per-layer means and population spreads over repeated runs."""

    per_layer: list
    n_runs: int


@dataclass
class CorrelationResult:
    """Linear relation between final-layer curvature and test error."""

    dataset: str
    n_runs: int
    r: float
    slope: float
    intercept: float


@dataclass
class Histogram:
    """Fixed-width value histogram; counts[i] covers (edges[i], edges[i+1]]
    with the first bin closed on both ends."""

    bin_edges: np.ndarray
    counts: np.ndarray
    total: int


def _clamp_subsample(requested, n):
    if requested is None:
        return None
    return min(int(requested), n)


def _layer_intrinsic_dim(id_estimate, ambient_dim, override):
    if override is not None:
        return int(override)
    d = int(np.floor(id_estimate.d_hat + 0.5))
    return max(1, min(d, ambient_dim - 1))


def assemble_profile(
    manifest: RunManifest,
    id_params: IdParams | None = None,
    mapc_params: MapcParams | None = None,
    keep_spectra: bool = False,
) -> LayerProfile:
    """Estimate intrinsic dimension and curvature for every layer of a run.

    Layer failures are recorded on the layer result instead of aborting the
    whole profile; only a run with zero usable layers raises. Subsample
    settings larger than a layer's point count fall back to the full layer.
    """
    id_params = id_params or IdParams()
    mapc_params = mapc_params or MapcParams()
    results = []
    n_ok = 0
    for layer in manifest.layers:
        result = LayerResult(index=layer.index, name=layer.name)
        try:
            cloud = load_pointcloud(layer.file)
            cloud.label = layer.name
            ide = twonn_estimate(
                cloud,
                discard_fraction=id_params.discard_fraction,
                subsample=_clamp_subsample(id_params.subsample, cloud.n_points),
                seed=id_params.seed,
            )
            result.id_estimate = ide
            d = _layer_intrinsic_dim(ide, cloud.extrinsic_dim, mapc_params.intrinsic_dim)
            est, spectrum = manifold_mapc(
                cloud,
                d,
                k_neighbors=mapc_params.k_neighbors,
                subsample=_clamp_subsample(mapc_params.subsample, cloud.n_points),
                seed=mapc_params.seed,
            )
            result.mapc_estimate = est
            if keep_spectra:
                result.spectrum = spectrum
            n_ok += 1
        except Exception as exc:  # noqa: BLE001 - per-layer fault isolation
            result.error = str(exc)
        results.append(result)
    if n_ok == 0:
        raise ValueError("zero layers loadable: every layer of the run failed")
    return LayerProfile(run=manifest, layers=results)


def aggregate_runs(profiles) -> AggregateProfile:
    """Combine repeated-run profiles into per-layer means and spreads.

    All profiles must cover the same layer index set. Spreads are population
    standard deviations. A layer that failed in some runs aggregates over
    the runs where it succeeded; a layer with no successes raises.
    """
    profiles = list(profiles)
    if not profiles:
        raise ValueError("need at least one profile")
    key = [(layer.index, layer.name) for layer in profiles[0].layers]
    for profile in profiles[1:]:
        if [(layer.index, layer.name) for layer in profile.layers] != key:
            raise ValueError("mismatched layer sets across runs")
    stats = []
    for pos, (index, name) in enumerate(key):
        ids = []
        mapcs = []
        for profile in profiles:
            layer = profile.layers[pos]
            if layer.ok:
                ids.append(layer.id_estimate.d_hat)
                mapcs.append(layer.mapc_estimate.mapc)
        if not ids:
            raise ValueError("layer %d failed in every run" % index)
        ids = np.asarray(ids)
        mapcs = np.asarray(mapcs)
        stats.append(
            LayerStats(
                index=index,
                name=name,
                n_runs=ids.size,
                id_mean=float(ids.mean()),
                id_std=float(ids.std()),
                mapc_mean=float(mapcs.mean()),
                mapc_std=float(mapcs.std()),
            )
        )
    return AggregateProfile(per_layer=stats, n_runs=len(profiles))


def pearson(x, y) -> float:
    """Pearson correlation of two equal-length samples."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 1 or y.ndim != 1 or x.size != y.size:
        raise ValueError("inputs must be 1-D and equally long")
    if x.size < 2:
        raise ValueError("need at least 2 samples")
    xc = x - x.mean()
    yc = y - y.mean()
    sx = float(xc @ xc)
    sy = float(yc @ yc)
    if sx <= 0.0 or sy <= 0.0:
        raise ValueError("zero variance input")
    r = float(xc @ yc) / np.sqrt(sx * sy)
    return float(min(1.0, max(-1.0, r)))


def mapc_mse_correlation(profiles) -> list:
    """Correlate final-layer curvature with test error, per dataset.

    Each profile contributes its highest-index layer's mapc and its
    manifest's test_mse. Profiles group by dataset name; every group needs
    at least 2 runs. Also fits the least-squares line
    mse = slope * mapc + intercept as a descriptive summary.
    """
    groups = {}
    for profile in profiles:
        run = profile.run
        if run.test_mse is None:
            raise ValueError("missing test_mse for run %r" % run.model)
        final = max(profile.layers, key=lambda layer: layer.index)
        if not final.ok:
            raise ValueError(
                "final layer %d failed for run %r: %s" % (final.index, run.model, final.error)
            )
        groups.setdefault(run.dataset, []).append(
            (final.mapc_estimate.mapc, float(run.test_mse))
        )
    out = []
    for dataset in sorted(groups):
        pairs = groups[dataset]
        if len(pairs) < 2:
            raise ValueError("dataset %r has fewer than 2 runs" % dataset)
        mapc = np.asarray([p[0] for p in pairs])
        mse = np.asarray([p[1] for p in pairs])
        r = pearson(mapc, mse)
        mc = mapc - mapc.mean()
        slope = float(mc @ (mse - mse.mean())) / float(mc @ mc)
        intercept = float(mse.mean() - slope * mapc.mean())
        out.append(
            CorrelationResult(
                dataset=dataset, n_runs=len(pairs), r=r, slope=slope, intercept=intercept
            )
        )
    return out


def curvature_histogram(spectrum, n_bins: int = DEFAULT_HIST_BINS, value_range=None) -> Histogram:
    """Histogram of curvature values with right-closed fixed-width bins.

    A value lands in bin i when edges[i] < v <= edges[i+1]; the lowest bin
    also takes v == edges[0]. With an explicit (lo, hi) range, values
    outside it are clamped into the end bins. Without one the observed
    min/max is used, widened symmetrically by max(1e-9, 1e-9*|v|) when all
    values coincide.
    """
    if isinstance(spectrum, CurvatureSpectrum):
        values = np.asarray(spectrum.per_point, dtype=np.float64).ravel()
    else:
        values = np.asarray(spectrum, dtype=np.float64).ravel()
    if values.size == 0:
        raise ValueError("empty spectrum")
    if not np.isfinite(values).all():
        raise ValueError("non-finite values in spectrum")
    n_bins = int(n_bins)
    if n_bins < 1:
        raise ValueError("n_bins must be >= 1")
    if value_range is not None:
        lo, hi = float(value_range[0]), float(value_range[1])
        if not np.isfinite(lo) or not np.isfinite(hi) or lo > hi:
            raise ValueError("invalid value range")
    else:
        lo = float(values.min())
        hi = float(values.max())
    if lo == hi:
        pad = max(1e-9, 1e-9 * abs(lo))
        lo -= pad
        hi += pad
    edges = np.linspace(lo, hi, n_bins + 1)
    which = np.searchsorted(edges, values, side="left") - 1
    np.clip(which, 0, n_bins - 1, out=which)
    counts = np.bincount(which, minlength=n_bins).astype(np.int64)
    return Histogram(bin_edges=edges, counts=counts, total=int(values.size))


def profile_to_doc(profile: LayerProfile) -> dict:
    """Plain-dict form of a profile, stable key order, JSON-ready."""
    run = profile.run
    run_doc = {
        "model": run.model,
        "dataset": run.dataset,
        "lookback": int(run.lookback),
        "horizon": int(run.horizon),
        "seed": int(run.seed),
    }
    if run.epoch is not None:
        run_doc["epoch"] = int(run.epoch)
    if run.test_mse is not None:
        run_doc["test_mse"] = float(run.test_mse)
    layers = []
    for layer in profile.layers:
        doc = {"index": int(layer.index), "name": layer.name}
        doc["id"] = layer.id_estimate.to_dict() if layer.id_estimate else None
        doc["mapc"] = layer.mapc_estimate.to_dict() if layer.mapc_estimate else None
        doc["error"] = layer.error
        layers.append(doc)
    return {"run": run_doc, "layers": layers}


def profile_from_doc(doc: dict) -> LayerProfile:
    """Rebuild a profile from its dict form (layer matrices stay detached)."""
    if not isinstance(doc, dict) or "run" not in doc or "layers" not in doc:
        raise ValueError("profile document needs 'run' and 'layers' keys")
    run_doc = doc["run"]
    layers_meta = []
    results = []
    for entry in doc["layers"]:
        layers_meta.append(
            LayerRef(index=int(entry["index"]), name=str(entry["name"]), file="")
        )
        result = LayerResult(index=int(entry["index"]), name=str(entry["name"]))
        if entry.get("id") is not None:
            result.id_estimate = IdEstimate(
                d_hat=float(entry["id"]["d_hat"]),
                n_used=int(entry["id"]["n_used"]),
                n_discarded=int(entry["id"]["n_discarded"]),
                fit_rmse=float(entry["id"]["fit_rmse"]),
                method=str(entry["id"]["method"]),
            )
        if entry.get("mapc") is not None:
            result.mapc_estimate = MapcEstimate(
                mapc=float(entry["mapc"]["mapc"]),
                per_point_mapc=np.empty(0),
                n_points_used=int(entry["mapc"]["n_points_used"]),
                n_points_skipped=int(entry["mapc"]["n_points_skipped"]),
            )
        if entry.get("error") is not None:
            result.error = str(entry["error"])
        results.append(result)
    run = RunManifest(
        model=str(run_doc["model"]),
        dataset=str(run_doc["dataset"]),
        lookback=int(run_doc["lookback"]),
        horizon=int(run_doc["horizon"]),
        seed=int(run_doc["seed"]),
        layers=layers_meta,
        epoch=run_doc.get("epoch"),
        test_mse=run_doc.get("test_mse"),
    )
    return LayerProfile(run=run, layers=results)
