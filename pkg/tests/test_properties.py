"""Property-based checks over randomly generated designs."""
import numpy as np
from hypothesis import given, settings, strategies as st

from clusterfx.covariance import estimate_covariance
from clusterfx.data import ClusterRecord, StudyData
from clusterfx.effects import decompose, estimate_p
from clusterfx.oracles import pairwise_w_bruteforce
from clusterfx.ranks import midranks, pairwise_w

values = st.lists(st.integers(-3, 3), min_size=1, max_size=4)


@st.composite
def studies(draw):
    T = draw(st.integers(1, 3))
    clusters = []
    for g in range(1, T + 1):
        # one complete cluster guarantees both cells are non-empty
        clusters.append(ClusterRecord(g, "c0", draw(values), draw(values)))
        n_more = draw(st.integers(0, 4))
        for k in range(n_more):
            kind = draw(st.sampled_from(["c", "pre", "post"]))
            pre = draw(values) if kind != "post" else ()
            post = draw(values) if kind != "pre" else ()
            clusters.append(ClusterRecord(g, f"{kind}{k + 1}", pre, post))
    return StudyData(T, tuple(clusters))


@given(st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=1, max_size=30))
def test_midrank_sum(xs):
    r = midranks(xs)
    assert r.sum() == len(xs) * (len(xs) + 1) / 2


@settings(max_examples=60, deadline=None)
@given(studies())
def test_w_antisymmetric_and_matches_oracle(data):
    W = pairwise_w(data).W
    assert np.abs(W + W.T - 1).max() <= 1e-15
    assert np.abs(W - pairwise_w_bruteforce(data)).max() <= 1e-12


@settings(max_examples=60, deadline=None)
@given(studies())
def test_effects_mean_half_and_decomposition(data):
    est = estimate_p(data)
    assert abs(est.p_hat.mean() - 0.5) <= 1e-12
    assert ((est.p_hat >= 0) & (est.p_hat <= 1)).all()
    d = decompose(est.p_hat, data.T)
    assert np.abs(d.reconstruct().ravel() - est.p_hat).max() <= 1e-14


@settings(max_examples=40, deadline=None)
@given(studies())
def test_covariance_symmetric_psd(data):
    V = estimate_covariance(data).V
    assert np.abs(V - V.T).max() <= 1e-12
    assert np.linalg.eigvalsh(V).min() >= -1e-10 * max(np.trace(V), 1e-300)


@settings(max_examples=40, deadline=None)
@given(studies(), st.randoms(use_true_random=False))
def test_visit_order_irrelevant(data, rnd):
    shuffled = []
    for c in data.clusters:
        pre, post = list(c.pre), list(c.post)
        rnd.shuffle(pre)
        rnd.shuffle(post)
        shuffled.append(ClusterRecord(c.group, c.cluster_id, pre, post))
    other = StudyData(data.T, tuple(shuffled))
    np.testing.assert_array_equal(estimate_p(data).p_hat, estimate_p(other).p_hat)
    np.testing.assert_allclose(estimate_covariance(data).V, estimate_covariance(other).V, atol=1e-14)
