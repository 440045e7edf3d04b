"""Covariance of the relative-effect estimator.

The asymptotic covariance is built from cluster-level summaries

    Y[k, l, b] = mean of F_b over the period-``l`` observations of cluster k,

where ``F_b`` is the normalized ECDF of cell ``b``.  Within-group covariances
of these summaries over complete clusters (``tau``) and over incomplete
clusters of one cell (``eta``) are combined by explicit case rules into
``sigma[jl, rs, pq, p'q'] = Cov(Z[pq, jl], Z[p'q', rs])``, where ``Z[b, a]``
is the linearization of the pairwise effect of reference cell ``b`` against
target cell ``a``.

Groups, periods and cells are 0-based in arrays; the scalar accessors
:func:`tau_hat` and :func:`eta_hat` take 1-based labels.
"""
from dataclasses import dataclass, field

import numpy as np

from .data import cell_index
from .errors import NotEstimable
from .ranks import ecdf_sorted, pairwise_w

NEG_EIG_RTOL = 1e-10


@dataclass(frozen=True)
class ClusterSummaries:
    """Per-cluster ECDF means against every reference cell.

    ``Y`` has shape ``(n_clusters, 2, 2T)`` and is NaN for a period the
    cluster was not observed in.  ``m`` holds the matching observation
    counts (0 when absent).
    """

    T: int
    Y: np.ndarray
    m: np.ndarray
    group: np.ndarray
    complete: np.ndarray
    W: np.ndarray
    N_cell: np.ndarray

    @property
    def K(self):
        return 2 * self.T

    def complete_in(self, r):
        return np.flatnonzero(self.complete & (self.group == r))

    def incomplete_in(self, r, s):
        return np.flatnonzero(~self.complete & (self.group == r) & (self.m[:, s] > 0))


def cluster_summaries(data, W=None):
    """Summaries computed with the normalized ECDFs of every design cell."""
    if W is None:
        W = pairwise_w(data).W
    K = data.n_cells
    values = data.values
    F = np.empty((values.size, K))
    for b, sv in enumerate(data.sorted_cell_values):
        F[:, b] = ecdf_sorted(sv, values)
    n = len(data.clusters)
    slot = data.obs_cluster * 2 + data.obs_cell % 2
    sums = np.zeros((2 * n, K))
    np.add.at(sums, slot, F)
    m = data.cluster_sizes
    with np.errstate(invalid="ignore", divide="ignore"):
        Y = sums.reshape(n, 2, K) / m[:, :, None]
    Y[m == 0] = np.nan
    return ClusterSummaries(
        T=data.T,
        Y=Y,
        m=m,
        group=data.cluster_group,
        complete=data.cluster_complete,
        W=W,
        N_cell=data.N_cell.astype(float),
    )


def _centered(S, idx, r):
    """``m * (Y - w)`` for clusters ``idx`` of group ``r``, shape ``(n, 2, K)``."""
    target = np.array([cell_index(r + 1, 1), cell_index(r + 1, 2)])
    # centre of Y[k, l, b] is W[b, cell(r, l)]
    centre = S.W[:, target].T
    return S.m[idx, :, None] * (S.Y[idx] - centre[None, :, :])


def tau_tensor(S):
    """All ``tau`` estimates as ``tau[r, s, l, pq, p'q']`` plus warnings."""
    K = S.K
    tau = np.zeros((S.T, 2, 2, K, K))
    notes = []
    for r in range(S.T):
        idx = S.complete_in(r)
        n = idx.size
        if n <= 1:
            notes.append(f"tau not estimable for group {r + 1}")
            continue
        D = _centered(S, idx, r)
        Nr = S.N_cell[2 * r : 2 * r + 2]
        scale = n / (n - 1) / np.outer(Nr, Nr)
        tau[r] = np.einsum("ksb,klc->slbc", D, D) * scale[:, :, None, None]
    return tau, notes


def eta_tensor(S):
    """All ``eta`` estimates as ``eta[r, s, pq, p'q']`` plus warnings.

    Incomplete clusters of different periods are independent, so only the
    same-period blocks are stored.
    """
    K = S.K
    eta = np.zeros((S.T, 2, K, K))
    notes = []
    for r in range(S.T):
        for s in range(2):
            idx = S.incomplete_in(r, s)
            n = idx.size
            if n <= 1:
                notes.append(f"eta({r + 1},{s + 1}) contribution set to zero")
                continue
            D = _centered(S, idx, r)[:, s, :]
            eta[r, s] = D.T @ D * (n / (n - 1) / S.N_cell[2 * r + s] ** 2)
    return eta, notes


def tau_hat(S, r, s, l, p, q, p2, q2):
    """Scalar ``tau_r^{(s,l)}(p, q, p2, q2)`` with 1-based labels.

    Raises :class:`NotEstimable` when group ``r`` has fewer than two complete
    clusters.
    """
    idx = S.complete_in(r - 1)
    n = idx.size
    if n <= 1:
        raise NotEstimable(f"group {r} has {n} complete clusters")
    a, b = cell_index(p, q), cell_index(p2, q2)
    rs, rl = cell_index(r, s), cell_index(r, l)
    x = S.m[idx, s - 1] * (S.Y[idx, s - 1, a] - S.W[a, rs])
    y = S.m[idx, l - 1] * (S.Y[idx, l - 1, b] - S.W[b, rl])
    return float(n / (n - 1) * np.sum(x * y) / (S.N_cell[rs] * S.N_cell[rl]))


def eta_hat(S, r, s, p, q, p2, q2, l=None):
    """Scalar ``eta_r^{(s,l)}(p, q, p2, q2)`` with 1-based labels.

    Zero when ``l`` differs from ``s``.  Raises :class:`NotEstimable` when
    cell ``(r, s)`` has fewer than two incomplete clusters.
    """
    if l is not None and l != s:
        return 0.0
    idx = S.incomplete_in(r - 1, s - 1)
    n = idx.size
    if n <= 1:
        raise NotEstimable(f"cell ({r},{s}) has {n} incomplete clusters")
    a, b = cell_index(p, q), cell_index(p2, q2)
    rs = cell_index(r, s)
    x = S.m[idx, s - 1] * (S.Y[idx, s - 1, a] - S.W[a, rs])
    y = S.m[idx, s - 1] * (S.Y[idx, s - 1, b] - S.W[b, rs])
    return float(n / (n - 1) * np.sum(x * y) / S.N_cell[rs] ** 2)


def _index_grid(T):
    """Broadcastable 0-based ``j, l, r, s, p, q, p2, q2`` over all sigma entries."""
    return np.ix_(*([np.arange(T), np.arange(2)] * 4))


def zero_masks(T):
    """Where each nonzero term of the covariance decomposition vanishes.

    Returns a dict keyed by term name with boolean arrays over the
    ``(j, l, r, s, p, q, p2, q2)`` grid.  Apart from the structural
    conditions (different groups, or different periods for incomplete
    clusters) a term also vanishes when ``Z[pq, jl]`` or ``Z[p2q2, rs]``
    compares a cell with itself.
    """
    j, l, r, s, p, q, p2, q2 = _index_grid(T)
    self_left = (p == j) & (q == l)
    self_right = (p2 == r) & (q2 == s)
    return {
        "C1": (p != p2) | ((p == p2) & (p == j) & (l == q)) | ((p == p2) & (p == r) & (s == q2)),
        "C2": (p != r) | ((p == r) & (r == j) & (l == q)) | ((p == p2) & (p2 == r) & (q2 == s)),
        "C5": (j != p2) | ((p == p2) & (p2 == j) & (q == l)) | ((j == r) & (r == p2) & (s == q2)),
        "C6": (j != r) | ((p == r) & (r == j) & (q == l)) | ((j == r) & (r == p2) & (q2 == s)),
        "C11": (p != p2) | (q != q2) | self_left & (p2 == j) & (q2 == l) | (p == p2) & (p == r) & (q == q2) & (q == s),
        "C12": (p != r) | (q != s) | (p == r) & (r == j) & (q == s) & (s == l) | (p == p2) & (p2 == r) & (q == q2) & (q2 == s),
        "C15": (j != p2) | (l != q2) | self_left & (p == p2) & (q == q2) | (j == r) & (r == p2) & (l == s) & (s == q2),
        "C16": (j != r) | (l != s) | (p == r) & (r == j) & (l == s) & (s == q) | self_right & (j == r) & (l == s),
    }


def sigma_terms(S, tau=None, eta=None):
    """The eight potentially nonzero terms, each shaped ``(T,2)*4``, zeroed per case rules."""
    if tau is None:
        tau, _ = tau_tensor(S)
    if eta is None:
        eta, _ = eta_tensor(S)
    j, l, r, s, p, q, p2, q2 = _index_grid(S.T)
    jl, rs, pq, pq2 = 2 * j + l, 2 * r + s, 2 * p + q, 2 * p2 + q2
    raw = {
        "C1": tau[p, q, q2, jl, rs],
        "C2": tau[p, q, s, jl, pq2],
        "C5": tau[j, l, q2, pq, rs],
        "C6": tau[j, l, s, pq, pq2],
        "C11": eta[p, q, jl, rs],
        "C12": eta[p, q, jl, pq2],
        "C15": eta[j, l, pq, rs],
        "C16": eta[j, l, pq, pq2],
    }
    masks = zero_masks(S.T)
    return {name: np.where(masks[name], 0.0, val) for name, val in raw.items()}


@dataclass(frozen=True)
class CovEstimate:
    """``sigma[jl, rs, pq, p'q']`` and the ``2T x 2T`` covariance ``V``."""

    sigma: np.ndarray
    V: np.ndarray
    warnings: list = field(default_factory=list)


def assemble_sigma(S):
    """Blocked estimate of ``Cov(Z)`` with shape ``(2T, 2T, 2T, 2T)`` plus warnings."""
    tau, tau_notes = tau_tensor(S)
    eta, eta_notes = eta_tensor(S)
    t = sigma_terms(S, tau, eta)
    sig = t["C1"] - t["C2"] - t["C5"] + t["C6"] + t["C11"] - t["C12"] - t["C15"] + t["C16"]
    K = S.K
    # (j,l,r,s,p,q,p2,q2) -> (jl, rs, pq, p2q2)
    sig = sig.reshape(K, K, K, K)
    return sig, tau_notes + eta_notes


def v_hat(sigma, N, T):
    """``N E sigma E'``: entry ``(jl, rs)`` is ``N / (2T)^2`` times the block sum."""
    K = 2 * T
    return N * sigma.sum(axis=(2, 3)) / K**2


def floor_psd(V, rtol=NEG_EIG_RTOL):
    """Clip eigenvalues below ``-rtol * trace(V)`` to zero.

    Returns the (possibly unchanged) matrix and whether flooring happened.
    """
    V = 0.5 * (V + V.T)
    evals, evecs = np.linalg.eigh(V)
    if evals.size == 0 or evals[0] >= -rtol * max(np.trace(V), 0.0):
        return V, False
    evals = np.clip(evals, 0.0, None)
    return (evecs * evals) @ evecs.T, True


def estimate_covariance(data, W=None):
    """Full covariance pipeline: summaries, case-rule assembly, ``V``."""
    S = cluster_summaries(data, W)
    sigma, notes = assemble_sigma(S)
    V, floored = floor_psd(v_hat(sigma, data.N, data.T))
    if floored:
        notes = notes + ["covariance estimate had negative eigenvalues; floored at zero"]
    return CovEstimate(sigma, V, notes)
