"""Seeded samplers for manifolds with known dimension and curvature.

Every generator draws points on a low-dimensional template, applies a random
orthonormal embedding into the requested ambient space and adds a random
shift. Distances and curvatures are invariant under that rigid embedding, so
the template's ground truth carries over exactly.
"""

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .tensor_io import LayerRef, PointCloud, RunManifest, save_manifest, save_pointcloud

KIND_HYPERCUBE = "hypercube"
KIND_SPHERE = "sphere"
KIND_PLANE = "plane"
KIND_QUADRATIC = "quadratic_graph"

KINDS = (KIND_HYPERCUBE, KIND_SPHERE, KIND_PLANE, KIND_QUADRATIC)


@dataclass
class SynthSpec:
    """Recipe for one synthetic cloud.

    kind: one of hypercube, plane, sphere, quadratic_graph.
    radius applies to spheres. hessian_diag (length d) plants the principal
    curvatures of a quadratic graph patch sampled from a tangent disc of
    radius patch_radius.
    """

    kind: str
    intrinsic_dim: int
    ambient_dim: int
    n_points: int
    seed: int = 0
    radius: float = 1.0
    hessian_diag: tuple = ()
    patch_radius: float = 0.05

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError("unknown kind %r, expected one of %s" % (self.kind, ", ".join(KINDS)))
        if self.intrinsic_dim < 1:
            raise ValueError("intrinsic_dim must be >= 1")
        if self.n_points < 1:
            raise ValueError("n_points must be >= 1")
        lift = self._lift_dim()
        if self.ambient_dim < lift:
            raise ValueError(
                "ambient_dim %d too small for kind %r with intrinsic_dim %d"
                % (self.ambient_dim, self.kind, self.intrinsic_dim)
            )
        if self.kind == KIND_SPHERE and self.radius <= 0:
            raise ValueError("sphere radius must be positive")
        if self.kind == KIND_QUADRATIC:
            if len(self.hessian_diag) != self.intrinsic_dim:
                raise ValueError("hessian_diag must have length intrinsic_dim")
            if self.patch_radius <= 0:
                raise ValueError("patch_radius must be positive")

    def _lift_dim(self):
        if self.kind in (KIND_SPHERE, KIND_QUADRATIC):
            return self.intrinsic_dim + 1
        return self.intrinsic_dim


def _orthonormal_embedding(rng, lift_dim, ambient_dim):
    # QR of a Gaussian matrix; fixing signs with the R diagonal makes the
    # frame a deterministic function of the draw across platforms
    a = rng.standard_normal((ambient_dim, ambient_dim))
    qm, rm = np.linalg.qr(a)
    signs = np.sign(np.diag(rm))
    signs[signs == 0] = 1.0
    qm = qm * signs
    return qm[:, :lift_dim].T


def _uniform_ball(rng, n, d, radius):
    g = rng.standard_normal((n, d))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    r = radius * rng.random(n) ** (1.0 / d)
    return g * r[:, None]


def sample(spec: SynthSpec) -> PointCloud:
    """Draw spec.n_points points as described by the spec, deterministically."""
    rng = np.random.default_rng(spec.seed)
    d = spec.intrinsic_dim
    n = spec.n_points
    if spec.kind in (KIND_HYPERCUBE, KIND_PLANE):
        lift = rng.random((n, d))
    elif spec.kind == KIND_SPHERE:
        g = rng.standard_normal((n, d + 1))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        lift = spec.radius * g
    else:
        u = _uniform_ball(rng, n, d, spec.patch_radius)
        kappa = np.asarray(spec.hessian_diag, dtype=np.float64)
        z = 0.5 * (u * u) @ kappa
        lift = np.hstack([u, z[:, None]])
    basis = _orthonormal_embedding(rng, lift.shape[1], spec.ambient_dim)
    shift = rng.standard_normal(spec.ambient_dim)
    data = lift @ basis + shift
    label = "%s_d%d_D%d" % (spec.kind, d, spec.ambient_dim)
    return PointCloud(data, label=label)


def layer_stack(
    specs,
    out_dir,
    model: str = "synthetic",
    dataset: str = "synthetic",
    lookback: int = 0,
    horizon: int = 0,
    seed: int = 0,
    dtype: str = "f64",
):
    """Write one cloud per spec plus a run manifest tying them together.

    Returns (clouds, manifest, manifest_path). Layer indices follow spec
    order starting at 1 and files land inside out_dir.
    """
    specs = list(specs)
    if not specs:
        raise ValueError("need at least one spec")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    clouds = []
    layers = []
    for pos, spec in enumerate(specs, start=1):
        cloud = sample(spec)
        fname = "layer_%02d_%s.gatm" % (pos, spec.kind)
        save_pointcloud(cloud, out_dir / fname, dtype=dtype)
        clouds.append(cloud)
        layers.append(LayerRef(index=pos, name=cloud.label, file=fname))
    manifest = RunManifest(
        model=model,
        dataset=dataset,
        lookback=lookback,
        horizon=horizon,
        seed=seed,
        layers=layers,
    )
    manifest_path = out_dir / "manifest.json"
    save_manifest(manifest, manifest_path)
    return clouds, manifest, manifest_path
