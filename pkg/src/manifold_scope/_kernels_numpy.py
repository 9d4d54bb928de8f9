"""Pure numpy fallback kernels, result-compatible with the JIT versions.

Distance matrices are built in bounded chunks so memory stays flat on large
clouds. The fallback is slower on big inputs but has no compilation step.
"""

import numpy as np

# rough element budget per temporary distance block
_CHUNK_ELEMENTS = 8_000_000


def two_nearest_all(x):
    """Distances to the two nearest other points, for every point.

    Uses the expanded form |a|^2 + |b|^2 - 2 a.b on a centered copy of the
    cloud, then recomputes rows that contain bitwise duplicates directly so
    that a duplicated point reports r1 == 0.0 exactly.
    """
    n = x.shape[0]
    xc = x - x.mean(axis=0)
    sq = np.einsum("ij,ij->i", xc, xc)
    r1 = np.empty(n)
    r2 = np.empty(n)
    chunk = max(1, _CHUNK_ELEMENTS // max(n, 1))
    for a in range(0, n, chunk):
        b = min(a + chunk, n)
        d2 = sq[a:b, None] + sq[None, :] - 2.0 * (xc[a:b] @ xc.T)
        np.maximum(d2, 0.0, out=d2)
        d2[np.arange(b - a), np.arange(a, b)] = np.inf
        two = np.partition(d2, 1, axis=1)[:, :2]
        r1[a:b] = np.sqrt(two[:, 0])
        r2[a:b] = np.sqrt(two[:, 1])
    # the expanded form cannot certify exact zeros
    _, inverse, counts = np.unique(x, axis=0, return_inverse=True, return_counts=True)
    for i in np.flatnonzero(counts[np.ravel(inverse)] > 1):
        d2 = np.einsum("ij,ij->i", x - x[i], x - x[i])
        d2[i] = np.inf
        two = np.partition(d2, 1)[:2]
        r1[i] = np.sqrt(two[0])
        r2[i] = np.sqrt(two[1])
    return r1, r2


def _smallest_k(d2, k):
    # k smallest positions ordered by (value, index); argpartition gives the
    # candidate set, the boundary value is then resolved by index
    cand = np.argpartition(d2, k - 1)[:k]
    border = d2[cand].max()
    strict = cand[d2[cand] < border]
    strict = strict[np.lexsort((strict, d2[strict]))]
    need = k - strict.size
    tied = np.flatnonzero(d2 == border)[:need]
    return np.concatenate([strict, tied])


def knn_batch(x, centers, k):
    """k nearest neighbors for each center index, self excluded.

    Neighbors come back sorted by (distance, index) ascending, matching the
    JIT kernel bit for bit on exact ties.
    """
    n, dim = x.shape
    m = centers.shape[0]
    idx = np.empty((m, k), dtype=np.int64)
    dist = np.empty((m, k))
    chunk = max(1, _CHUNK_ELEMENTS // max(n * dim, 1))
    for a in range(0, m, chunk):
        rows = centers[a : a + chunk]
        diff = x[rows][:, None, :] - x[None, :, :]
        d2 = np.einsum("cnd,cnd->cn", diff, diff)
        d2[np.arange(rows.size), rows] = np.inf
        for r in range(rows.size):
            sel = _smallest_k(d2[r], k)
            idx[a + r] = sel
            dist[a + r] = np.sqrt(d2[r][sel])
    return idx, dist
