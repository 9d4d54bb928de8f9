"""Geometry of high-dimensional point clouds.

Estimates intrinsic dimension from two-neighbor distance ratios, principal
curvatures from local quadratic fits, and assembles both into per-layer
profiles of trained-model activations. Heavy loops run through JIT-compiled
kernels with a pure numpy fallback (see MANIFOLD_SCOPE_BACKEND).
"""

from ._backend import active_backend, set_threads
from .analysis import (
    AggregateProfile,
    CorrelationResult,
    Histogram,
    IdParams,
    LayerProfile,
    LayerResult,
    MapcParams,
    aggregate_runs,
    assemble_profile,
    curvature_histogram,
    mapc_mse_correlation,
    pearson,
)
from .curvature import (
    CurvatureSpectrum,
    HessianSet,
    IllConditionedError,
    MapcEstimate,
    RankError,
    TangentFrame,
    build_local_frame,
    default_neighbor_count,
    design_dim,
    design_matrix,
    design_row,
    estimate_hessians,
    manifold_mapc,
    principal_curvatures,
)
from .id_estimators import (
    IdEstimate,
    lpca_estimate,
    pareto_cdf,
    twonn_estimate,
    twonn_ratios,
)
from .neighbors import NeighborResult, knn, knn_batch, two_nearest_all
from .neighborhood_synthesis import (
    SeriesSample,
    generate_sv_neighborhood,
    mode_cutoff,
)
from .synthetic import KINDS, SynthSpec, layer_stack, sample
from .tensor_io import (
    FormatError,
    LayerRef,
    PointCloud,
    RunManifest,
    load_manifest,
    load_pointcloud,
    save_manifest,
    save_pointcloud,
)

__version__ = "0.1.0"

__all__ = [
    "AggregateProfile",
    "CorrelationResult",
    "CurvatureSpectrum",
    "FormatError",
    "HessianSet",
    "Histogram",
    "IdEstimate",
    "IdParams",
    "IllConditionedError",
    "KINDS",
    "LayerProfile",
    "LayerRef",
    "LayerResult",
    "MapcEstimate",
    "MapcParams",
    "NeighborResult",
    "PointCloud",
    "RankError",
    "RunManifest",
    "SeriesSample",
    "SynthSpec",
    "TangentFrame",
    "active_backend",
    "aggregate_runs",
    "assemble_profile",
    "build_local_frame",
    "curvature_histogram",
    "default_neighbor_count",
    "design_dim",
    "design_matrix",
    "design_row",
    "estimate_hessians",
    "generate_sv_neighborhood",
    "knn",
    "knn_batch",
    "layer_stack",
    "load_manifest",
    "load_pointcloud",
    "lpca_estimate",
    "manifold_mapc",
    "mapc_mse_correlation",
    "mode_cutoff",
    "pareto_cdf",
    "pearson",
    "principal_curvatures",
    "sample",
    "save_manifest",
    "save_pointcloud",
    "set_threads",
    "twonn_estimate",
    "twonn_ratios",
    "two_nearest_all",
]
