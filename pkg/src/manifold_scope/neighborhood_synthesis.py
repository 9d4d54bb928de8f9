"""Synthetic neighborhoods of a multivariate series window.

A window is decomposed with an SVD and its weak modes (explained variance at
or below a threshold) are damped by independent uniform draws in [0, 1).
Each damped reconstruction is one synthetic neighbor of the original window;
strong modes pass through untouched, so the copies stay close to the input.
"""

from dataclasses import dataclass

import numpy as np

DEFAULT_EV_THRESHOLD = 1e-3
DEFAULT_N_COPIES = 64


@dataclass(eq=False)
class SeriesSample:
    """One window of a multivariate series: (t_len, n_features) float64."""

    values: np.ndarray

    def __post_init__(self):
        self.values = np.ascontiguousarray(self.values, dtype=np.float64)
        if self.values.ndim != 2:
            raise ValueError("series window must be a 2-D array")
        if self.values.shape[0] < 2:
            raise ValueError("series window needs at least 2 time steps")
        if self.values.shape[1] < 1:
            raise ValueError("series window needs at least 1 feature")
        if not np.isfinite(self.values).all():
            raise ValueError("non-finite values in series window")

    @property
    def t_len(self):
        return self.values.shape[0]

    @property
    def n_features(self):
        return self.values.shape[1]


def _cutoff_from_singular(s, ev_threshold):
    total = float((s * s).sum())
    if total <= 0.0:
        raise ValueError("all-zero series window")
    ev = (s * s) / total
    below = np.flatnonzero(ev <= ev_threshold)
    if below.size == 0:
        return s.size + 1
    return int(below[0]) + 1


def mode_cutoff(series: SeriesSample, ev_threshold: float = DEFAULT_EV_THRESHOLD) -> int:
    """Index (1-based) of the first SVD mode weak enough to damp.

    A mode is weak when its explained variance sigma_m^2 / sum(sigma^2) is at
    or below ``ev_threshold``. When every mode is strong the cutoff is one
    past the last mode and damping is a no-op.
    """
    if not 0.0 < ev_threshold < 1.0:
        raise ValueError("ev_threshold must be in (0, 1)")
    s = np.linalg.svd(series.values, compute_uv=False)
    return _cutoff_from_singular(s, ev_threshold)


def generate_sv_neighborhood(
    series: SeriesSample,
    n_copies: int = DEFAULT_N_COPIES,
    ev_threshold: float = DEFAULT_EV_THRESHOLD,
    seed: int = 0,
) -> list:
    """Damped-mode synthetic copies of one series window.

    Every copy multiplies the singular values from the cutoff mode onward by
    independent uniform draws in [0, 1) and reconstructs. Copy i uses its own
    generator substream seeded by (seed, i), so any copy can be reproduced
    without generating the others.
    """
    if not 0.0 < ev_threshold < 1.0:
        raise ValueError("ev_threshold must be in (0, 1)")
    n_copies = int(n_copies)
    if n_copies < 1:
        raise ValueError("n_copies must be at least 1")
    u_mat, s, vt = np.linalg.svd(series.values, full_matrices=False)
    cut = _cutoff_from_singular(s, ev_threshold)
    copies = []
    for i in range(n_copies):
        if cut > s.size:
            copies.append(SeriesSample(series.values.copy()))
            continue
        rng = np.random.default_rng((seed, i))
        scale = np.ones_like(s)
        scale[cut - 1 :] = rng.random(s.size - cut + 1)
        copies.append(SeriesSample((u_mat * (s * scale)) @ vt))
    return copies
