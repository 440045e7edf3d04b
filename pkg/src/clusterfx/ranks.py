"""Mid-ranks, normalized empirical distribution functions and pairwise effects.

Ties are defined by exact equality of the stored floats.  Every quantity in
this module depends on the observations only through their order and ties, so
results are unchanged by any strictly increasing transformation of the data.
"""
from dataclasses import dataclass

import numpy as np

from .data import cell_index
from .errors import EmptyCell


def count(u):
    """Normalized count function: 0 for ``u < 0``, 1/2 at 0, 1 for ``u > 0``."""
    return 0.5 * (np.sign(u) + 1.0) if np.ndim(u) else (0.0 if u < 0 else 0.5 if u == 0 else 1.0)


def midranks(values):
    """Ranks ``1..n`` with tied values sharing the average of their positions.

    Examples
    --------
    >>> midranks([1, 2, 2, 3]).tolist()
    [1.0, 2.5, 2.5, 4.0]
    """
    x = np.asarray(values, dtype=float).ravel()
    n = x.size
    order = np.argsort(x, kind="mergesort")
    xs = x[order]
    # boundaries of runs of equal values in sorted order
    new_run = np.empty(n, dtype=bool)
    new_run[:1] = True
    np.not_equal(xs[1:], xs[:-1], out=new_run[1:])
    starts = np.flatnonzero(new_run)
    ends = np.append(starts[1:], n)
    run_rank = (starts + 1 + ends) / 2.0
    ranks = np.empty(n, dtype=float)
    ranks[order] = np.repeat(run_rank, ends - starts)
    return ranks


def ecdf_sorted(sorted_values, x):
    """Normalized ECDF of a pre-sorted sample evaluated at ``x`` (array-like)."""
    lo = np.searchsorted(sorted_values, x, side="left")
    hi = np.searchsorted(sorted_values, x, side="right")
    return (lo + hi) / (2.0 * sorted_values.size)


def ecdf_eval(data, j, l, x):
    """Normalized ECDF of design cell ``(j, l)`` at ``x``.

    Every observation of the cell counts once, whether it comes from a
    complete or an incomplete cluster, and an observation equal to ``x``
    contributes one half.
    """
    if not (1 <= j <= data.T and l in (1, 2)):
        raise EmptyCell(j, l)
    sv = data.sorted_cell_values[cell_index(j, l)]
    if sv.size == 0:
        raise EmptyCell(j, l)
    out = ecdf_sorted(sv, x)
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class PairwiseEffects:
    """Matrix of pairwise effects between design cells.

    ``W[a, b]`` estimates ``P(X_a < X_b) + P(X_a = X_b) / 2`` for cells ``a``
    and ``b`` in lexicographic order.  The diagonal is exactly 1/2 and
    ``W + W.T`` is a matrix of ones.
    """

    W: np.ndarray

    @property
    def n_cells(self):
        return self.W.shape[0]


def pairwise_w(data):
    """Pairwise effects from pooled two-sample mid-ranks."""
    cells = data.cell_values
    K = len(cells)
    W = np.full((K, K), 0.5)
    for a in range(K):
        na = cells[a].size
        for b in range(a + 1, K):
            nb = cells[b].size
            r = midranks(np.concatenate((cells[a], cells[b])))
            w = (r[na:].mean() - r[:na].mean()) / (na + nb) + 0.5
            W[a, b] = w
            W[b, a] = 1.0 - w
    return PairwiseEffects(W)
