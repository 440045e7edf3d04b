"""Relative effects of the design cells and their additive decomposition."""
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch
from .ranks import PairwiseEffects, pairwise_w


def averaging_matrix(K):
    """``(1/K) 1' (x) I_K``: maps ``vec(W)`` onto the relative effects."""
    return np.kron(np.ones((1, K)), np.eye(K)) / K


@dataclass(frozen=True)
class EffectEstimate:
    """Estimated relative effects, one per cell in lexicographic order.

    ``p_hat[b]`` compares cell ``b`` with the unweighted mean of all cell
    distributions; values above 1/2 mean cell ``b`` tends to larger values.
    """

    p_hat: np.ndarray
    N: int
    W_hat: PairwiseEffects

    @property
    def T(self):
        return self.p_hat.size // 2


def estimate_p(data):
    W = pairwise_w(data)
    # averaging_matrix(K) @ vec(W) is the column mean of W; summing the
    # column directly avoids rounding from the 1/K scaled Kronecker product
    p_hat = W.W.mean(axis=0)
    return EffectEstimate(p_hat, data.N, W)


@dataclass(frozen=True)
class EffectDecomposition:
    """``p_jl = 1/2 + alpha_j + beta_l + alphabeta_jl`` with zero-sum side conditions."""

    alpha: np.ndarray
    beta: np.ndarray
    alphabeta: np.ndarray

    def reconstruct(self):
        return 0.5 + self.alpha[:, None] + self.beta[None, :] + self.alphabeta


def decompose(p_hat, T):
    p = np.asarray(p_hat, dtype=float)
    if p.shape != (2 * T,):
        raise DimensionMismatch(f"expected {2 * T} relative effects for T={T}, got shape {p.shape}")
    grid = p.reshape(T, 2)
    grand = grid.mean()
    rows = grid.mean(axis=1)
    cols = grid.mean(axis=0)
    alpha = rows - grand
    beta = cols - grand
    alphabeta = grid - rows[:, None] - cols[None, :] + grand
    return EffectDecomposition(alpha, beta, alphabeta)
