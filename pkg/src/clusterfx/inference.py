"""Hypothesis tests and confidence intervals for relative effects."""
import enum
import math
import sys
from dataclasses import dataclass, field
from statistics import NormalDist

import numpy as np

from .data import cell_label
from .errors import BadDimension, BoundaryEffect, DegenerateVariance

DEGENERATE_TRACE = 1e-14
_TINY = math.nextafter(0.0, 1.0)
_BELOW_ONE = math.nextafter(1.0, 0.0)


class ContrastKind(enum.Enum):
    INTERVENTION = "intervention"
    TIME = "time"
    INTERACTION = "interaction"
    CUSTOM = "custom"


STANDARD_CONTRASTS = (ContrastKind.INTERVENTION, ContrastKind.TIME, ContrastKind.INTERACTION)


def centering(a):
    """``I_a - J_a / a``."""
    if a < 1:
        raise BadDimension(f"centering matrix needs a >= 1, got {a}")
    return np.eye(a) - np.full((a, a), 1.0 / a)


def pinv(M, tol=1e-12):
    """Moore-Penrose inverse.

    Symmetric input goes through an eigendecomposition, anything else
    through the SVD.  Singular values below ``tol`` times the largest are
    treated as zero.
    """
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        return M.T.copy()
    if M.ndim == 2 and M.shape[0] == M.shape[1] and np.array_equal(M, M.T):
        evals, evecs = np.linalg.eigh(M)
        cutoff = tol * np.abs(evals).max()
        keep = np.abs(evals) > cutoff
        inv = np.zeros_like(evals)
        inv[keep] = 1.0 / evals[keep]
        return (evecs * inv) @ evecs.T
    u, sv, vt = np.linalg.svd(M, full_matrices=False)
    cutoff = tol * (sv.max() if sv.size else 0.0)
    inv = np.zeros_like(sv)
    keep = sv > cutoff
    inv[keep] = 1.0 / sv[keep]
    return (vt.T * inv) @ u.T


def projection(C, tol=1e-12):
    """``C' (C C')^+ C``, the orthogonal projector onto the row space of ``C``."""
    C = np.atleast_2d(np.asarray(C, dtype=float))
    return C.T @ pinv(C @ C.T, tol) @ C


@dataclass(frozen=True)
class ContrastSpec:
    kind: ContrastKind
    T_proj: np.ndarray
    C: np.ndarray = None

    @property
    def name(self):
        return self.kind.value


def build_contrast(kind, T, C=None):
    """Projection matrix for a main effect, the interaction, or a custom ``C``.

    ``kind`` may be a :class:`ContrastKind` or its string value.
    """
    kind = ContrastKind(kind)
    if T < 1:
        raise BadDimension(f"need T >= 1, got {T}")
    if kind in (ContrastKind.INTERVENTION, ContrastKind.INTERACTION) and T < 2:
        raise BadDimension(f"{kind.value} contrast needs T >= 2, got {T}")
    if kind is ContrastKind.INTERVENTION:
        P = np.kron(centering(T), np.full((2, 2), 0.5))
    elif kind is ContrastKind.TIME:
        P = np.kron(np.full((T, T), 1.0 / T), centering(2))
    elif kind is ContrastKind.INTERACTION:
        P = np.kron(centering(T), centering(2))
    else:
        if C is None:
            raise BadDimension("custom contrast needs a matrix C")
        C = np.atleast_2d(np.asarray(C, dtype=float))
        if C.shape[1] != 2 * T:
            raise BadDimension(f"C must have {2 * T} columns, got {C.shape[1]}")
        P = projection(C)
    return ContrastSpec(kind, P, C)


def chi2_tail(x, f):
    """Upper tail ``P(chi2_f > x)`` for real ``f > 0``.

    Evaluated as the regularized upper incomplete gamma function
    ``Q(f/2, x/2)``: power series below ``a + 1``, Lentz continued fraction
    above.
    """
    x = float(x)
    a = 0.5 * float(f)
    if a <= 0:
        raise ValueError(f"degrees of freedom must be positive, got {f}")
    if x < 0:
        raise ValueError(f"x must be non-negative, got {x}")
    z = 0.5 * x
    if z == 0.0:
        return 1.0
    if math.isinf(z):
        return 0.0
    log_pref = -z + a * math.log(z) - math.lgamma(a)
    if z < a + 1.0:
        term = total = 1.0 / a
        ap = a
        for _ in range(10000):
            ap += 1.0
            term *= z / ap
            total += term
            if abs(term) < abs(total) * 1e-17:
                break
        return max(0.0, 1.0 - total * math.exp(log_pref))
    tiny = sys.float_info.min / sys.float_info.epsilon
    b = z + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 10000):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return math.exp(log_pref) * h


@dataclass(frozen=True)
class HypothesisTest:
    """ANOVA-type test: ``f_hat * Q_N`` is referred to ``chi2(f_hat)``."""

    name: str
    statistic: float
    f_hat: float
    p_value: float

    def reject_at(self, alpha):
        return self.p_value < alpha


def anova_type_test(est, V_hat, spec, alpha=None):
    """ANOVA-type statistic with the Box degrees-of-freedom approximation.

    ``alpha`` is accepted for call-site symmetry only; use
    :meth:`HypothesisTest.reject_at` for decisions.
    """
    P = spec.T_proj
    TV = P @ V_hat
    tr = float(np.trace(TV))
    if tr <= DEGENERATE_TRACE:
        raise DegenerateVariance(f"trace(T V) = {tr:.3g} for the {spec.name} hypothesis")
    p = est.p_hat
    if np.abs(P.sum(axis=1)).max() <= 1e-12:
        # P kills constants, so centring first only removes rounding noise
        p = p - p.mean()
    Q = est.N / tr * float(p @ P @ p)
    f_hat = tr**2 / float(np.trace(TV @ TV))
    return HypothesisTest(spec.name, Q, f_hat, chi2_tail(f_hat * Q, f_hat))


@dataclass(frozen=True)
class WaldTest:
    """Wald-type test; liberal in small samples, kept for comparison."""

    statistic: float
    df: int
    p_value: float
    liberal: bool = True

    def reject_at(self, alpha):
        return self.p_value < alpha


def wald_type_test(est, V_hat, C, N=None, tol=1e-12):
    C = np.atleast_2d(np.asarray(C, dtype=float))
    N = est.N if N is None else N
    CVC = C @ V_hat @ C.T
    CVC = 0.5 * (CVC + CVC.T)
    inv = pinv(CVC, tol)
    df = int(np.linalg.matrix_rank(CVC, tol=tol * max(np.abs(CVC).max(), 0.0)) if CVC.any() else 0)
    if df == 0:
        raise DegenerateVariance("C V C' is zero")
    Cp = C @ est.p_hat
    W = N * float(Cp @ inv @ Cp)
    return WaldTest(W, df, chi2_tail(max(W, 0.0), df))


def normal_quantile(prob):
    return NormalDist().inv_cdf(prob)


@dataclass(frozen=True)
class EffectCI:
    """Per-cell confidence intervals; NaN bounds where a cell hit the boundary."""

    point: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    transform: str
    alpha: float
    warnings: list = field(default_factory=list)


def _logit_interval(p, half_width_link):
    if p <= 0.0 or p >= 1.0:
        raise BoundaryEffect(f"relative effect {p} on the boundary")
    centre = math.log(p / (1.0 - p))
    lo, hi = centre - half_width_link, centre + half_width_link
    lower, upper = 1.0 / (1.0 + math.exp(-lo)), 1.0 / (1.0 + math.exp(-hi))
    # the round trip through logit can move the bounds by an ulp past p, and
    # very wide intervals saturate at 0 or 1; keep them strictly inside (0, 1)
    lower = max(min(lower, p), _TINY)
    upper = min(max(upper, p), _BELOW_ONE)
    return lower, upper


def effect_ci(est, V_hat, alpha=0.05, transform="logit", N=None):
    """Delta-method intervals for each relative effect.

    With ``transform="logit"`` the interval is built on the logit scale,
    centred at ``logit(p_hat)``, and mapped back, so it stays inside (0, 1).
    """
    if transform not in ("identity", "logit"):
        raise ValueError(f"unknown transform {transform!r}")
    N = est.N if N is None else N
    z = normal_quantile(1.0 - alpha / 2.0)
    p = est.p_hat
    se = np.sqrt(np.clip(np.diag(V_hat), 0.0, None) / N)
    if transform == "identity":
        return EffectCI(p.copy(), p - z * se, p + z * se, transform, alpha)
    lower = np.full_like(p, np.nan)
    upper = np.full_like(p, np.nan)
    notes = []
    for b, pb in enumerate(p):
        try:
            half = z * se[b] / (pb * (1.0 - pb)) if 0.0 < pb < 1.0 else 0.0
            lower[b], upper[b] = _logit_interval(float(pb), half)
        except BoundaryEffect as exc:
            j, l = cell_label(b)
            notes.append(f"cell ({j},{l}): {exc}")
    return EffectCI(p.copy(), lower, upper, transform, alpha, notes)
