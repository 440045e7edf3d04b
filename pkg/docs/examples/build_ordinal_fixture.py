"""Rebuild the bundled ordinal quality-of-life fixture.

Three intervention groups of households, each visited up to three times per
period, scored on a 7-point scale.  Most households are seen in both periods;
a few only before or only after the intervention.  Post-period scores are
shifted up slightly so the time effect is visible.

Run from the repository root:

    python docs/examples/build_ordinal_fixture.py
"""
from pathlib import Path

import numpy as np

from clusterfx.data import ClusterRecord, StudyData, dump_csv
from clusterfx.sim import block_cov, gen_cluster_sizes, psd_factor

N_COMPLETE = (37, 13, 35)
N_PRE_ONLY = (3, 2, 7)
N_POST_ONLY = (0, 1, 0)
POST_SHIFT = 0.5
OUT = Path(__file__).resolve().parents[2] / "src" / "clusterfx" / "fixtures" / "ordinal_prepost.csv"


def household(rng, group, cid, keep_pre=True, keep_post=True):
    m1, m2 = (int(x) for x in gen_cluster_sizes(3, rng, size=2))
    L = psd_factor(block_cov(m1, m2, (0.6, 0.6, 0.4), (1.0, 1.0)))
    z = L @ rng.standard_normal(m1 + m2)
    latent = 4.5 + 1.2 * z
    latent[m1:] += POST_SHIFT
    scores = np.clip(np.rint(latent), 1, 7)
    pre = scores[:m1] if keep_pre else ()
    post = scores[m1:] if keep_post else ()
    return ClusterRecord(group, cid, pre, post)


def main():
    rng = np.random.default_rng(20240117)
    clusters = []
    for g in range(3):
        for k in range(N_COMPLETE[g]):
            clusters.append(household(rng, g + 1, f"h{g + 1}-{k:02d}"))
        for k in range(N_PRE_ONLY[g]):
            clusters.append(household(rng, g + 1, f"h{g + 1}-pre{k}", keep_post=False))
        for k in range(N_POST_ONLY[g]):
            clusters.append(household(rng, g + 1, f"h{g + 1}-post{k}", keep_pre=False))
    dump_csv(StudyData(3, tuple(clusters)), OUT)
    print(f"wrote {OUT}")


if __name__ == "__main__":
    main()
