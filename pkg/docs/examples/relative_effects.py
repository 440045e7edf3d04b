"""Relative effects for a small hand-built pre-post study.

Two intervention groups of households, scored 1-5 before and after.  Some
households were only reached in one period.  The relative effect of a cell
is the probability that a draw from the average of all cell distributions
falls below a draw from that cell (ties count half), so 0.5 means "typical".
"""
from clusterfx import ClusterRecord, StudyData, decompose, effect_ci, estimate_covariance, estimate_p

households = [
    # group, id, pre scores, post scores
    (1, "a", (2, 3), (3, 4)),
    (1, "b", (1,), (3,)),
    (1, "c", (3, 3, 2), (4,)),
    (1, "d", (2,), ()),
    (1, "e", (), (5, 4)),
    (2, "f", (3,), (3, 3)),
    (2, "g", (4, 3), (4,)),
    (2, "h", (2,), (2,)),
    (2, "i", (3,), ()),
    (2, "j", (), (3,)),
]
data = StudyData(2, tuple(ClusterRecord(*h) for h in households))
print(f"{data.N} observations in {len(data.clusters)} households")

est = estimate_p(data)
cov = estimate_covariance(data, est.W_hat.W)
ci = effect_ci(est, cov.V, alpha=0.05, transform="logit")

print("\ngroup period  p_hat   95% interval")
for b, p in enumerate(est.p_hat):
    print(f"  {b // 2 + 1}     {b % 2 + 1}    {p:.3f}   [{ci.lower[b]:.3f}, {ci.upper[b]:.3f}]")

# The effects split additively like a two-way ANOVA table.
d = decompose(est.p_hat, data.T)
print("\ngroup effects  ", d.alpha.round(3))
print("period effects ", d.beta.round(3))
print("interaction    ", d.alphabeta.round(3).tolist())

for w in cov.warnings:
    print("note:", w)
