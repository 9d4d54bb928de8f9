"""JIT-compiled kernels: exact neighbor search and batched curvature fits.

Every parallel loop writes to preallocated per-point slots and all reductions
happen serially in the callers, so results are identical for any thread
count. Inputs must be C-contiguous float64 arrays.
"""

import numpy as np
from numba import njit, prange


@njit(cache=True, parallel=True, fastmath=True)
def two_nearest_all(x):
    """Distances to the two nearest other points, for every point.

    Returns (r1, r2) with r1 <= r2. A bitwise duplicate of point i yields
    r1[i] == 0.0 exactly.
    """
    n, dim = x.shape
    r1 = np.empty(n)
    r2 = np.empty(n)
    for i in prange(n):
        b1 = np.inf
        b2 = np.inf
        for j in range(n):
            if j == i:
                continue
            s = 0.0
            for t in range(dim):
                diff = x[i, t] - x[j, t]
                s += diff * diff
            if s < b1:
                b2 = b1
                b1 = s
            elif s < b2:
                b2 = s
        r1[i] = np.sqrt(b1)
        r2[i] = np.sqrt(b2)
    return r1, r2


@njit(cache=True)
def _knn_into(x, i, k, bd, bj):
    # insertion into a sorted buffer of (squared distance, index) pairs,
    # ordered ascending with index as the tie key
    n, dim = x.shape
    for t in range(k):
        bd[t] = np.inf
        bj[t] = -1
    for j in range(n):
        if j == i:
            continue
        s = 0.0
        for t in range(dim):
            diff = x[i, t] - x[j, t]
            s += diff * diff
        if s > bd[k - 1]:
            continue
        if s == bd[k - 1] and bj[k - 1] != -1 and j > bj[k - 1]:
            continue
        pos = k - 1
        while pos > 0 and (s < bd[pos - 1] or (s == bd[pos - 1] and j < bj[pos - 1])):
            bd[pos] = bd[pos - 1]
            bj[pos] = bj[pos - 1]
            pos -= 1
        bd[pos] = s
        bj[pos] = j


@njit(cache=True, parallel=True)
def knn_batch(x, centers, k):
    """k nearest neighbors for each center index, self excluded.

    Neighbors come back sorted by (distance, index) ascending.
    """
    m = centers.shape[0]
    idx = np.empty((m, k), dtype=np.int64)
    dist = np.empty((m, k))
    for c in prange(m):
        bd = np.empty(k)
        bj = np.empty(k, dtype=np.int64)
        _knn_into(x, centers[c], k, bd, bj)
        for t in range(k):
            idx[c, t] = bj[t]
            dist[c, t] = np.sqrt(bd[t])
    return idx, dist


@njit(cache=True, parallel=True)
def mapc_batch(x, centers, k, d, rank_cut, pinv_cut):
    """Quadratic-fit principal curvatures around each center point.

    Per center: take the k nearest neighbors, split the ambient space with an
    SVD of the centered neighborhood (first d right singular vectors span the
    tangent), regress each normal coordinate on the quadratic monomials of
    the tangent coordinates, collect the eigenvalues of the fitted Hessians.

    Requires k >= d + d*(d+1)/2 and d < x.shape[1]. Returns
    (spectra, pmapc, status):

    - spectra[c]: d*(D-d) curvatures, eigenvalues sorted descending within
      each normal direction, zeros for directions outside the neighborhood
      span.
    - pmapc[c]: mean absolute curvature over the data-supported normal
      directions (numerical rank minus d of them), 0.0 when the
      neighborhood is exactly flat.
    - status[c]: 0 used, 1 rank below d, 2 ill-conditioned fit.
    """
    m = centers.shape[0]
    n, dim = x.shape
    q = d + d * (d + 1) // 2
    n_normal = dim - d
    spectra = np.zeros((m, d * n_normal))
    pmapc = np.zeros(m)
    status = np.zeros(m, dtype=np.uint8)
    for c in prange(m):
        bd = np.empty(k)
        bj = np.empty(k, dtype=np.int64)
        _knn_into(x, centers[c], k, bd, bj)
        delta = np.empty((k, dim))
        for a in range(k):
            for t in range(dim):
                delta[a, t] = x[bj[a], t] - x[centers[c], t]
        u_, s_, vt = np.linalg.svd(delta, full_matrices=False)
        nsv = s_.shape[0]
        rank = 0
        for a in range(nsv):
            if s_[a] > rank_cut * s_[0]:
                rank += 1
        if rank < d:
            status[c] = 1
            continue
        # fix basis signs: largest-magnitude component of each row positive
        for a in range(nsv):
            big = 0
            av = 0.0
            for t in range(dim):
                if abs(vt[a, t]) > av:
                    av = abs(vt[a, t])
                    big = t
            if vt[a, big] < 0.0:
                for t in range(dim):
                    vt[a, t] = -vt[a, t]
        nf = nsv - d
        uu = np.empty((k, d))
        ff = np.empty((k, nf))
        for a in range(k):
            for t in range(d):
                acc = 0.0
                for col in range(dim):
                    acc += delta[a, col] * vt[t, col]
                uu[a, t] = acc
            for t in range(nf):
                acc = 0.0
                for col in range(dim):
                    acc += delta[a, col] * vt[d + t, col]
                ff[a, t] = acc
        psi = np.empty((k, q))
        for a in range(k):
            col = 0
            for t in range(d):
                psi[a, col] = uu[a, t]
                col += 1
            for t in range(d):
                psi[a, col] = uu[a, t] * uu[a, t]
                col += 1
            for t in range(d):
                for t2 in range(t + 1, d):
                    psi[a, col] = uu[a, t] * uu[a, t2]
                    col += 1
        up, sp, vpt = np.linalg.svd(psi, full_matrices=False)
        if sp[0] <= 0.0:
            status[c] = 2
            continue
        nkeep = 0
        for a in range(sp.shape[0]):
            if sp[a] > pinv_cut * sp[0]:
                nkeep += 1
        if nkeep == 0:
            status[c] = 2
            continue
        # pseudoinverse solve: coef = V diag(1/sp) U^T ff, truncated at nkeep
        proj = np.empty((nkeep, nf))
        for a in range(nkeep):
            for t in range(nf):
                acc = 0.0
                for row in range(k):
                    acc += up[row, a] * ff[row, t]
                proj[a, t] = acc / sp[a]
        coef = np.empty((q, nf))
        for a in range(q):
            for t in range(nf):
                acc = 0.0
                for row in range(nkeep):
                    acc += vpt[row, a] * proj[row, t]
                coef[a, t] = acc
        hmat = np.empty((d, d))
        for alpha in range(nf):
            col = d
            for t in range(d):
                hmat[t, t] = 2.0 * coef[col, alpha]
                col += 1
            for t in range(d):
                for t2 in range(t + 1, d):
                    hmat[t, t2] = coef[col, alpha]
                    hmat[t2, t] = coef[col, alpha]
                    col += 1
            ev = np.linalg.eigvalsh(hmat)
            for t in range(d):
                spectra[c, alpha * d + t] = ev[d - 1 - t]
        supported = rank - d
        if supported > 0:
            acc = 0.0
            for t in range(supported * d):
                acc += abs(spectra[c, t])
            pmapc[c] = acc / (supported * d)
    return spectra, pmapc, status
