"""Global intrinsic-dimension estimators.

The primary estimator fits the distribution of the ratio between second and
first nearest-neighbor distances: for locally uniform samples of a
d-dimensional manifold the ratio mu = r2/r1 is Pareto with cdf
F(mu) = 1 - mu**(-d), so d is the through-origin slope of
-log(1 - F_emp) against log(mu). A covariance-spectrum baseline is included
for comparison.
"""

from dataclasses import dataclass

import numpy as np

from .neighbors import two_nearest_all
from .tensor_io import PointCloud

METHOD_TWONN = "twonn"
METHOD_LPCA = "lpca"

DEFAULT_DISCARD_FRACTION = 0.1
DEFAULT_VARIANCE_CUTOFF = 0.05


@dataclass
class IdEstimate:
    """One intrinsic-dimension estimate with fit diagnostics."""

    d_hat: float
    n_used: int
    n_discarded: int
    fit_rmse: float
    method: str

    def to_dict(self):
        return {
            "d_hat": float(self.d_hat),
            "n_used": int(self.n_used),
            "n_discarded": int(self.n_discarded),
            "fit_rmse": float(self.fit_rmse),
            "method": self.method,
        }


def pareto_cdf(mu, d: float):
    """Model cdf 1 - mu**(-d) for ratio values mu >= 1."""
    if d <= 0:
        raise ValueError("d must be positive")
    mu = np.asarray(mu, dtype=np.float64)
    if np.any(mu < 1.0):
        raise ValueError("ratio values must be >= 1")
    return 1.0 - mu ** (-d)


def twonn_ratios(cloud: PointCloud):
    """Neighbor-distance ratios r2/r1 per point, duplicates dropped.

    Points whose nearest neighbor sits at distance exactly zero (bitwise
    duplicates) are removed before forming ratios. Returns (ratios,
    n_dropped).
    """
    rr = two_nearest_all(cloud)
    keep = rr[:, 0] > 0.0
    n_dropped = int(np.count_nonzero(~keep))
    if np.count_nonzero(keep) < 3:
        raise ValueError("fewer than 3 points survive deduplication")
    mu = rr[keep, 1] / rr[keep, 0]
    return mu, n_dropped


def twonn_estimate(
    cloud: PointCloud,
    discard_fraction: float = DEFAULT_DISCARD_FRACTION,
    subsample=None,
    seed: int = 0,
) -> IdEstimate:
    """Estimate intrinsic dimension from two-neighbor distance ratios.

    The sorted ratios get empirical cdf values i/N', the top
    ceil(discard_fraction * N') ratios are dropped (always at least the
    largest one, whose empirical cdf is 1), and d_hat is the slope of the
    through-origin least-squares fit of -log(1 - F_emp) on log(mu).

    ``subsample`` caps the number of points considered, drawn uniformly
    without replacement with a generator seeded by ``seed``.
    """
    if not 0.0 <= discard_fraction < 0.5:
        raise ValueError("discard_fraction must be in [0, 0.5)")
    if subsample is not None:
        subsample = int(subsample)
        if subsample < 3:
            raise ValueError("subsample must be at least 3")
        if subsample > cloud.n_points:
            raise ValueError(
                "subsample %d exceeds cloud size %d" % (subsample, cloud.n_points)
            )
        if subsample < cloud.n_points:
            rng = np.random.default_rng(seed)
            pick = np.sort(rng.choice(cloud.n_points, size=subsample, replace=False))
            cloud = PointCloud(cloud.data[pick], label=cloud.label)
    mu, n_dup = twonn_ratios(cloud)
    n_prime = mu.size
    mu = np.sort(mu)
    n_drop = max(int(np.ceil(discard_fraction * n_prime)), 1)
    n_fit = n_prime - n_drop
    if n_fit < 1:
        raise ValueError("no ratios left to fit after discarding the tail")
    xs = np.log(mu[:n_fit])
    f_emp = np.arange(1, n_fit + 1, dtype=np.float64) / n_prime
    ys = -np.log1p(-f_emp)
    sxx = float(xs @ xs)
    if sxx <= 0.0:
        raise ValueError("degenerate ratios: all neighbor ratios equal 1")
    d_hat = float(xs @ ys) / sxx
    resid = ys - d_hat * xs
    fit_rmse = float(np.sqrt(np.mean(resid * resid)))
    return IdEstimate(
        d_hat=d_hat,
        n_used=n_fit,
        n_discarded=n_dup + n_drop,
        fit_rmse=fit_rmse,
        method=METHOD_TWONN,
    )


def lpca_estimate(
    cloud: PointCloud, variance_cutoff: float = DEFAULT_VARIANCE_CUTOFF
) -> IdEstimate:
    """Covariance-spectrum baseline estimate of intrinsic dimension.

    d_hat is the smallest number of leading eigenvalues of the global
    covariance whose cumulative explained variance reaches
    1 - variance_cutoff. fit_rmse reports the residual variance fraction at
    that count.
    """
    if not 0.0 < variance_cutoff < 1.0:
        raise ValueError("variance_cutoff must be in (0, 1)")
    centered = cloud.data - cloud.data.mean(axis=0)
    cov = (centered.T @ centered) / cloud.n_points
    eig = np.linalg.eigvalsh(cov)[::-1]
    eig = np.maximum(eig, 0.0)
    total = float(eig.sum())
    if total <= 0.0:
        raise ValueError("zero total variance")
    cum = np.cumsum(eig) / total
    k = int(np.searchsorted(cum, 1.0 - variance_cutoff) + 1)
    k = min(k, eig.size)
    residual = max(0.0, 1.0 - float(cum[k - 1]))
    return IdEstimate(
        d_hat=float(k),
        n_used=cloud.n_points,
        n_discarded=0,
        fit_rmse=residual,
        method=METHOD_LPCA,
    )
