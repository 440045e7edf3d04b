"""Slow reference implementations used to cross-check the fast estimators.

Nothing here reuses the rank, ECDF or case-rule code; each quantity is
recomputed from its definition with explicit loops over observations.
"""
import numpy as np


def _c(u):
    return 0.0 if u < 0 else (0.5 if u == 0 else 1.0)


def midranks_bruteforce(values):
    """``R_i = 1/2 + sum_j c(x_i - x_j)`` by double loop."""
    x = [float(v) for v in values]
    return np.array([0.5 + sum(_c(xi - xj) for xj in x) for xi in x])


def _cells(data):
    cells = [[] for _ in range(2 * data.T)]
    for c in data.clusters:
        base = 2 * (c.group - 1)
        cells[base].extend(c.pre)
        cells[base + 1].extend(c.post)
    return cells


def pairwise_w_bruteforce(data):
    """``W[a, b] = (1 / (N_a N_b)) sum_x sum_y c(y - x)``, x in cell a, y in cell b."""
    cells = _cells(data)
    K = len(cells)
    W = np.empty((K, K))
    for a in range(K):
        for b in range(K):
            tot = sum(_c(y - x) for x in cells[a] for y in cells[b])
            W[a, b] = tot / (len(cells[a]) * len(cells[b]))
    return W


def _ecdf(sample, x):
    return sum(_c(x - v) for v in sample) / len(sample)


def covariance_by_influence(data):
    """``(sigma, V)`` from per-cluster centred contributions to ``Z``.

    Each cluster contributes to ``Z[b, a]`` (reference cell ``b``, target
    cell ``a``) through its observations in ``a`` (positively) and in ``b``
    (negatively).  Contributions are centred at the pairwise estimates, outer
    products are summed within strata of exchangeable clusters (the complete
    clusters of a group; the incomplete clusters of a cell), and each stratum
    gets the ``n / (n - 1)`` small-sample factor (zero when ``n < 2``).
    """
    cells = _cells(data)
    K = len(cells)
    N_cell = [len(c) for c in cells]
    W = pairwise_w_bruteforce(data)
    strata = {}
    for c in data.clusters:
        base = 2 * (c.group - 1)
        own = {base + l: obs for l, obs in enumerate((c.pre, c.post)) if obs}
        contrib = np.zeros((K, K))  # contrib[b, a] for Z[b, a]
        for a_own, obs in own.items():
            m = len(obs)
            for b in range(K):
                ybar = sum(_ecdf(cells[b], x) for x in obs) / m
                # observations in the target cell a_own of Z[b, a_own]
                contrib[b, a_own] += m / N_cell[a_own] * (ybar - W[b, a_own])
        for a_own, obs in own.items():
            m = len(obs)
            for a in range(K):
                # observations in the reference cell a_own of Z[a_own, a]
                ybar = sum(_ecdf(cells[a], x) for x in obs) / m
                contrib[a_own, a] -= m / N_cell[a_own] * (ybar - W[a, a_own])
        key = ("c", c.group) if c.is_complete else ("i", c.group, 1 if c.pre else 2)
        strata.setdefault(key, []).append(contrib)
    sigma = np.zeros((K, K, K, K))
    for members in strata.values():
        n = len(members)
        if n < 2:
            continue
        acc = np.zeros((K, K, K, K))
        for C in members:
            # sigma[a, c, b, d] = sum C[b, a] C[d, c]
            acc += np.einsum("ba,dc->acbd", C, C)
        sigma += acc * n / (n - 1)
    V = data.N * sigma.sum(axis=(2, 3)) / K**2
    return sigma, V


def random_study(rng, T=3, max_clusters=6, max_size=4, levels=5):
    """Small random design with ties and a mix of complete and incomplete clusters.

    Every cell is guaranteed at least one observation.  Values are drawn
    from ``levels`` integer levels so ties are common.
    """
    from .data import ClusterRecord, StudyData

    clusters = []
    for g in range(1, T + 1):
        n = int(rng.integers(2, max_clusters + 1))
        kinds = rng.integers(0, 3, size=n)
        # 0 complete, 1 pre only, 2 post only; force both periods to appear
        kinds[0] = 0 if rng.random() < 0.7 else 1
        if kinds[0] == 1:
            kinds[1] = 2
        for k, kind in enumerate(kinds):
            pre = rng.integers(0, levels, size=int(rng.integers(1, max_size + 1))) if kind != 2 else ()
            post = rng.integers(0, levels, size=int(rng.integers(1, max_size + 1))) if kind != 1 else ()
            clusters.append(ClusterRecord(g, f"g{g}k{k}", pre, post))
    return StudyData(T, tuple(clusters))
