"""Principal curvatures of a sampled manifold via local quadratic fits.

Around each sampled point: take its k nearest neighbors, split the ambient
space into tangent and normal parts with an SVD of the centered neighborhood,
regress every normal coordinate on linear plus quadratic monomials of the
tangent coordinates, then read principal curvatures off the eigenvalues of
the fitted Hessians. The linear (gradient) coefficients are estimated only
to keep the quadratic terms unbiased and are then discarded.

The headline summary is the mean absolute principal curvature: per point the
mean runs over the normal directions the neighborhood actually supports
(numerical rank minus d of them), so an exactly flat patch reports 0 and a
hypersurface patch uses all of its curvatures. Neighborhoods whose rank
falls below the tangent dimension are skipped and counted, never imputed.
"""

from dataclasses import dataclass

import numpy as np

from ._backend import active_backend, get_kernels
from .neighbors import knn_batch
from .tensor_io import PointCloud

# relative singular-value thresholds: numerical rank of a neighborhood and
# pseudoinverse truncation of the design matrix
RANK_REL_CUTOFF = 1e-10
PINV_REL_CUTOFF = 1e-10


class RankError(RuntimeError):
    """Neighborhood rank is below the tangent dimension."""


class IllConditionedError(RuntimeError):
    """Design matrix has no usable singular values."""


def design_dim(d: int) -> int:
    """Quadratic design size q = d + d*(d+1)/2."""
    if d < 1:
        raise ValueError("d must be >= 1")
    return d + d * (d + 1) // 2


def default_neighbor_count(d: int) -> int:
    """Default k: twice the design size, at least ten rows of slack."""
    q = design_dim(d)
    return max(2 * q, q + 10)


def design_matrix(u) -> np.ndarray:
    """Monomial design rows for tangent coordinates u of shape (K, d).

    Column order: linear terms u_1..u_d, squares u_1^2..u_d^2, then cross
    products u_a*u_b for a < b in lexicographic order.
    """
    u = np.asarray(u, dtype=np.float64)
    if u.ndim != 2:
        raise ValueError("u must be 2-D")
    d = u.shape[1]
    cols = [u, u * u]
    for a in range(d):
        for b in range(a + 1, d):
            cols.append((u[:, a] * u[:, b])[:, None])
    return np.hstack(cols)


def design_row(u) -> np.ndarray:
    """Single design row for one tangent coordinate vector."""
    u = np.asarray(u, dtype=np.float64)
    if u.ndim != 1:
        raise ValueError("u must be 1-D")
    return design_matrix(u[None, :])[0]


@dataclass(eq=False)
class TangentFrame:
    """Local tangent/normal split at one point.

    tangent_basis is (d, D), normal_basis is (D - d, D), both with rows of
    unit length, orthonormal together. rank is the numerical rank of the
    centered neighborhood that produced the frame.
    """

    origin: np.ndarray
    tangent_basis: np.ndarray
    normal_basis: np.ndarray
    singular_values: np.ndarray
    rank: int

    @property
    def intrinsic_dim(self):
        return self.tangent_basis.shape[0]

    @property
    def ambient_dim(self):
        return self.origin.shape[0]

    @property
    def n_supported_normals(self):
        return max(self.rank - self.intrinsic_dim, 0)


@dataclass(eq=False)
class HessianSet:
    """Fitted quadratic forms, one (d, d) symmetric matrix per normal direction."""

    hessians: np.ndarray
    gradients_discarded: bool = True


@dataclass(eq=False)
class CurvatureSpectrum:
    """Per-point principal curvatures, d*(D-d) values per used point.

    Within each normal direction the eigenvalues are sorted descending;
    directions outside the neighborhood span contribute zeros.
    """

    per_point: np.ndarray
    intrinsic_dim: int
    ambient_dim: int

    @property
    def values_per_point(self):
        return self.intrinsic_dim * (self.ambient_dim - self.intrinsic_dim)


@dataclass(eq=False)
class MapcEstimate:
    """Mean absolute principal curvature with usage counts."""

    mapc: float
    per_point_mapc: np.ndarray
    n_points_used: int
    n_points_skipped: int

    def to_dict(self):
        return {
            "mapc": float(self.mapc),
            "n_points_used": int(self.n_points_used),
            "n_points_skipped": int(self.n_points_skipped),
        }


def _fix_signs(vt):
    # make each basis row's largest-magnitude component positive so frames
    # do not flip between LAPACK builds
    big = np.argmax(np.abs(vt), axis=1)
    flip = vt[np.arange(vt.shape[0]), big] < 0.0
    vt[flip] *= -1.0
    return vt


def build_local_frame(cloud: PointCloud, center_index: int, neighbor_indices, d: int) -> TangentFrame:
    """Split the ambient space at one point from its neighborhood SVD.

    The neighborhood is centered at the query point itself, not at its mean,
    so the fitted surface passes through the query point. Raises RankError
    when the numerical rank of the centered neighborhood is below d; a rank
    of exactly d is fine and yields an exactly flat local model.
    """
    data = cloud.data
    n, dim = data.shape
    if not 1 <= d < dim:
        raise ValueError("d must satisfy 1 <= d < ambient dim")
    if not 0 <= center_index < n:
        raise ValueError("center_index out of range")
    nb = np.asarray(neighbor_indices, dtype=np.int64)
    if nb.ndim != 1 or nb.size < d + 1:
        raise ValueError("need at least d + 1 neighbors, got %d" % nb.size)
    if nb.min() < 0 or nb.max() >= n:
        raise ValueError("neighbor index out of range")
    delta = data[nb] - data[center_index]
    _, s, vt = np.linalg.svd(delta, full_matrices=True)
    rank = int(np.count_nonzero(s > RANK_REL_CUTOFF * s[0])) if s[0] > 0 else 0
    if rank < d:
        raise RankError(
            "skipped: neighborhood rank %d below tangent dimension %d" % (rank, d)
        )
    vt = _fix_signs(vt)
    return TangentFrame(
        origin=data[center_index].copy(),
        tangent_basis=vt[:d].copy(),
        normal_basis=vt[d:].copy(),
        singular_values=s,
        rank=rank,
    )


def estimate_hessians(frame: TangentFrame, cloud: PointCloud, neighbor_indices) -> HessianSet:
    """Least-squares quadratic fit of each normal coordinate.

    Solves Psi @ beta = f per normal direction through a truncated-SVD
    pseudoinverse (singular values below PINV_REL_CUTOFF of the largest are
    dropped). Needs at least q = d + d*(d+1)/2 neighbors.
    """
    d = frame.intrinsic_dim
    q = design_dim(d)
    nb = np.asarray(neighbor_indices, dtype=np.int64)
    if nb.size < q:
        raise ValueError("need at least q = %d neighbors for the fit, got %d" % (q, nb.size))
    delta = cloud.data[nb] - frame.origin
    u = delta @ frame.tangent_basis.T
    f = delta @ frame.normal_basis.T
    psi = design_matrix(u)
    um, s, vtm = np.linalg.svd(psi, full_matrices=False)
    if s[0] <= 0.0:
        raise IllConditionedError("ill-conditioned design matrix: all singular values zero")
    keep = s > PINV_REL_CUTOFF * s[0]
    if not keep.any():
        raise IllConditionedError("ill-conditioned design matrix")
    proj = (um.T[keep] @ f) / s[keep, None]
    coef = vtm[keep].T @ proj
    n_normal = frame.normal_basis.shape[0]
    hessians = np.empty((n_normal, d, d))
    for alpha in range(n_normal):
        h = np.empty((d, d))
        col = d
        for a in range(d):
            h[a, a] = 2.0 * coef[col, alpha]
            col += 1
        for a in range(d):
            for b in range(a + 1, d):
                h[a, b] = coef[col, alpha]
                h[b, a] = coef[col, alpha]
                col += 1
        hessians[alpha] = h
    return HessianSet(hessians=hessians)


def principal_curvatures(hessian_set: HessianSet) -> np.ndarray:
    """Eigenvalues of every fitted Hessian, sorted descending per direction,
    concatenated in normal-direction order."""
    ev = np.linalg.eigvalsh(hessian_set.hessians)
    return ev[:, ::-1].reshape(-1)


def manifold_mapc(
    cloud: PointCloud,
    d: int,
    k_neighbors=None,
    subsample=None,
    seed: int = 0,
):
    """Mean absolute principal curvature of a sampled manifold.

    Returns (MapcEstimate, CurvatureSpectrum). Each sampled point gets its k
    nearest neighbors, a tangent frame, fitted Hessians per normal direction
    and d*(D-d) principal curvatures. Points are skipped (and counted) when
    the neighborhood rank drops below d or the fit is unusable. The summary
    mapc is the mean of the per-point means.
    """
    n, dim = cloud.data.shape
    d = int(d)
    if not 1 <= d < dim:
        raise ValueError("d must satisfy 1 <= d < ambient dim %d" % dim)
    q = design_dim(d)
    k = default_neighbor_count(d) if k_neighbors is None else int(k_neighbors)
    if k < q:
        raise ValueError("k_neighbors must be at least q = %d, got %d" % (q, k))
    if k > n - 1:
        raise ValueError("k_neighbors %d exceeds available points %d" % (k, n - 1))
    if subsample is not None:
        subsample = int(subsample)
        if subsample < 1:
            raise ValueError("subsample must be at least 1")
        if subsample > n:
            raise ValueError("subsample %d exceeds cloud size %d" % (subsample, n))
        if subsample < n:
            rng = np.random.default_rng(seed)
            centers = np.sort(rng.choice(n, size=subsample, replace=False))
        else:
            centers = np.arange(n, dtype=np.int64)
    else:
        centers = np.arange(n, dtype=np.int64)
    centers = np.ascontiguousarray(centers, dtype=np.int64)

    if active_backend() == "numba":
        spectra, pmapc, status = get_kernels().mapc_batch(
            cloud.data, centers, k, d, RANK_REL_CUTOFF, PINV_REL_CUTOFF
        )
    else:
        spectra, pmapc, status = _mapc_loop(cloud, centers, k, d)

    used = status == 0
    n_used = int(np.count_nonzero(used))
    if n_used == 0:
        raise ValueError("no usable neighborhoods: every sampled point was skipped")
    estimate = MapcEstimate(
        mapc=float(np.mean(pmapc[used])),
        per_point_mapc=pmapc[used],
        n_points_used=n_used,
        n_points_skipped=int(centers.size - n_used),
    )
    spectrum = CurvatureSpectrum(
        per_point=spectra[used], intrinsic_dim=d, ambient_dim=dim
    )
    return estimate, spectrum


def _mapc_loop(cloud, centers, k, d):
    # fallback path: same pipeline through the public per-point operations
    dim = cloud.extrinsic_dim
    m = centers.size
    idx, _ = knn_batch(cloud, centers, k)
    spectra = np.zeros((m, d * (dim - d)))
    pmapc = np.zeros(m)
    status = np.zeros(m, dtype=np.uint8)
    for c in range(m):
        try:
            frame = build_local_frame(cloud, int(centers[c]), idx[c], d)
        except RankError:
            status[c] = 1
            continue
        try:
            hset = estimate_hessians(frame, cloud, idx[c])
        except IllConditionedError:
            status[c] = 2
            continue
        kappa = principal_curvatures(hset)
        spectra[c] = kappa
        n_sup = frame.n_supported_normals
        if n_sup > 0:
            pmapc[c] = float(np.mean(np.abs(kappa[: n_sup * d])))
    return spectra, pmapc, status
