"""End-to-end analysis of one dataset and its report."""
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .covariance import estimate_covariance
from .data import cell_index, validate
from .effects import decompose, estimate_p
from .errors import DegenerateVariance
from .inference import (
    STANDARD_CONTRASTS,
    ContrastKind,
    anova_type_test,
    build_contrast,
    effect_ci,
)


def _num(x):
    """JSON-safe float; NaN becomes ``None``."""
    x = float(x)
    return None if math.isnan(x) else x


def _fmt(x):
    # repr gives the shortest string that round-trips to the same double
    return "NA" if x is None else repr(float(x))


@dataclass
class AnalysisReport:
    """Everything :func:`analyze` computes, in plain Python containers."""

    T: int
    N: int
    alpha: float
    transform: str
    clusters: list
    effects: list
    decomposition: dict
    tests: list
    prepost: list
    warnings: list = field(default_factory=list)

    def to_dict(self):
        return {
            "T": self.T,
            "N": self.N,
            "alpha": self.alpha,
            "transform": self.transform,
            "clusters": self.clusters,
            "effects": self.effects,
            "decomposition": self.decomposition,
            "tests": self.tests,
            "prepost": self.prepost,
            "warnings": self.warnings,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)

    def to_text(self):
        lines = [f"Relative effects (T={self.T}, N={self.N}, {self.transform} intervals at level {1 - self.alpha:g})"]
        lines.append("group  period  p_hat  lower  upper")
        for e in self.effects:
            lines.append(f"{e['group']}  {e['period']}  {_fmt(e['p_hat'])}  {_fmt(e['lower'])}  {_fmt(e['upper'])}")
        lines.append("")
        lines.append("Tests  statistic  f_hat  p_value")
        for t in self.tests:
            lines.append(f"{t['effect']}  {_fmt(t['statistic'])}  {_fmt(t['f_hat'])}  {_fmt(t['p_value'])}")
        lines.append("")
        lines.append("Pre-post by group: pre (sd)  post (sd)  diff (sd)  p_value")
        for r in self.prepost:
            lines.append(
                f"{r['group']}  {_fmt(r['pre'])} ({_fmt(r['pre_sd'])})  {_fmt(r['post'])} ({_fmt(r['post_sd'])})"
                f"  {_fmt(r['diff'])} ({_fmt(r['diff_sd'])})  {_fmt(r['p_value'])}"
            )
        if self.warnings:
            lines.append("")
            lines.append("Warnings")
            lines.extend(f"- {w}" for w in self.warnings)
        return "\n".join(lines) + "\n"


def _test_row(name, est, V, spec):
    try:
        t = anova_type_test(est, V, spec)
        return {"effect": name, "statistic": t.statistic, "f_hat": t.f_hat, "p_value": t.p_value}, None
    except DegenerateVariance as exc:
        return {"effect": name, "statistic": None, "f_hat": None, "p_value": None}, f"{name}: {exc}"


def analyze(data, alpha=0.05, transform="logit"):
    """Estimate effects, intervals, the three standard tests and per-group pre-post tests."""
    est = estimate_p(data)
    cov = estimate_covariance(data, est.W_hat.W)
    notes = list(cov.warnings)
    notes += [w for w in validate(data) if w not in notes]
    V = cov.V
    ci = effect_ci(est, V, alpha=alpha, transform=transform)
    notes += ci.warnings
    T = data.T

    effects = []
    for j in range(1, T + 1):
        for l in (1, 2):
            b = cell_index(j, l)
            effects.append(
                {
                    "group": j,
                    "period": l,
                    "p_hat": _num(est.p_hat[b]),
                    "lower": _num(ci.lower[b]),
                    "upper": _num(ci.upper[b]),
                }
            )

    dec = decompose(est.p_hat, T)
    decomposition = {
        "alpha": [float(x) for x in dec.alpha],
        "beta": [float(x) for x in dec.beta],
        "alphabeta": [[float(x) for x in row] for row in dec.alphabeta],
    }

    tests = []
    for kind in STANDARD_CONTRASTS:
        if T < 2 and kind is not ContrastKind.TIME:
            continue
        row, note = _test_row(kind.value, est, V, build_contrast(kind, T))
        tests.append(row)
        if note:
            notes.append(note)

    # one-row custom contrasts: pre minus post within each group
    prepost = []
    N = est.N
    for j in range(1, T + 1):
        a, b = cell_index(j, 1), cell_index(j, 2)
        C = np.zeros(2 * T)
        C[a], C[b] = 1.0, -1.0
        row, note = _test_row(f"prepost group {j}", est, V, build_contrast(ContrastKind.CUSTOM, T, C))
        if note:
            notes.append(note)
        prepost.append(
            {
                "group": j,
                "pre": float(est.p_hat[a]),
                "post": float(est.p_hat[b]),
                "diff": float(est.p_hat[a] - est.p_hat[b]),
                "pre_sd": float(math.sqrt(max(V[a, a], 0.0))),
                "post_sd": float(math.sqrt(max(V[b, b], 0.0))),
                "diff_sd": float(math.sqrt(max(float(C @ V @ C), 0.0))),
                "statistic": row["statistic"],
                "f_hat": row["f_hat"],
                "p_value": row["p_value"],
            }
        )

    clusters = [
        {
            "group": j,
            "complete": int(data.n_complete[j - 1]),
            "pre_only": int(data.n_incomplete[j - 1, 0]),
            "post_only": int(data.n_incomplete[j - 1, 1]),
        }
        for j in range(1, T + 1)
    ]
    return AnalysisReport(T, int(N), float(alpha), transform, clusters, effects, decomposition, tests, prepost, notes)
