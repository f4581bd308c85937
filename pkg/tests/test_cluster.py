import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import linear_sum_assignment

from conftest import path, star
from nbclust.cluster import (
    Labeling,
    VertexEmbedding,
    confusion,
    embed,
    kmeans,
    kmeans_fit,
    overlap,
    sign_labels,
)
from nbclust.eigen import EigenResult, SolverOpts, is_real, topk_eigs
from nbclust.graph import SbmParams, sbm_sample
from nbclust.operators import build_b, build_b_prime
from nbclust.pipeline import ALGORITHMS, ClusterConfig, spectral_cluster


def labelings(q_max=6, n_max=40):
    return st.integers(2, q_max).flatmap(
        lambda q: st.lists(st.integers(0, q - 1), min_size=1, max_size=n_max).map(
            lambda xs: Labeling(np.array(xs), q)
        )
    )


# --- embeddings ------------------------------------------------------------------


def test_embedding_validation():
    with pytest.raises(ValueError):
        VertexEmbedding(np.zeros((3, 0)))
    with pytest.raises(ValueError):
        VertexEmbedding(np.array([1.0, np.nan]))
    assert VertexEmbedding(np.arange(4.0)).dim == 1


def test_uniform_edge_vector_embeds_to_degrees():
    g = star(4)
    eig = EigenResult(values=np.array([1.0]), vectors=np.ones((g.n_directed, 1)), transposed=True)
    emb = embed(eig, "edge_space", [0], graph=g)
    d = g.degrees.astype(float)
    assert np.allclose(emb.points[:, 0], d / np.linalg.norm(d))


def test_vertex_space_reads_first_half():
    z = np.concatenate([[3.0, 4.0], [-6.0, -8.0]])[:, None]
    emb = embed(EigenResult(values=np.array([2.0]), vectors=z), "vertex_space", 0)
    assert np.allclose(emb.points[:, 0], [0.6, 0.8])


def test_complex_vectors_are_rejected():
    z = np.array([[1.0 + 1.0j], [1.0 - 1.0j]])
    with pytest.raises(ValueError, match=r"eigenvalue 1\+2j"):
        embed(EigenResult(values=np.array([1 + 2j]), vectors=z), "vertex_space", 0)


def test_embed_argument_errors():
    eig = EigenResult(values=np.array([1.0]), vectors=np.ones((4, 1)))
    with pytest.raises(ValueError):
        embed(eig, "nowhere", 0)
    with pytest.raises(ValueError):
        embed(eig, "edge_space", 0)  # no graph
    with pytest.raises(ValueError):
        embed(eig, "edge_space", 0, graph=path(4))
    with pytest.raises(ValueError):
        embed(EigenResult(values=np.array([1.0])), "vertex_space", 0)


def _second_real(res):
    idx = [i for i in range(1, len(res.values)) if is_real(res.values[i])]
    return idx[0] if idx else None


def test_edge_and_vertex_embeddings_are_parallel():
    for seed in range(10):
        g = sbm_sample(SbmParams.planted(5000, 2, 5, 1), 100 + seed).graph
        left_edges = topk_eigs(build_b(g).T, SolverOpts(k=3, seed=seed))
        left_pairs = topk_eigs(build_b_prime(g).T, SolverOpts(k=3, seed=seed))
        i, j = _second_real(left_edges), _second_real(left_pairs)
        assert i is not None and j is not None
        assert left_edges.values[i] == pytest.approx(left_pairs.values[j], abs=1e-6)
        a = embed(left_edges, "edge_space", i, graph=g).points[:, 0]
        b = embed(left_pairs, "vertex_space", j).points[:, 0]
        assert abs(a @ b) > 0.99


def test_planted_vector_keeps_its_sign_pattern_through_one_step():
    # the incoming-message vector carrying each sender's spin, moved one
    # step forward, re-embeds with the same signs where both are defined
    for seed in range(5):
        lg = sbm_sample(SbmParams.planted(10_000, 2, 5, 1), seed)
        g = lg.graph
        msg = lg.spins[g.src].astype(float)
        before = g.incidence_in() @ msg
        after = g.incidence_in() @ build_b(g).apply_transpose(msg)
        both = (before != 0) & (after != 0)
        assert np.mean(np.sign(before[both]) == np.sign(after[both])) > 0.9


# --- sign split ------------------------------------------------------------------------


def test_sign_labels_examples():
    sigma = np.array([1, -1, -1, 1, 1, -1], dtype=float)
    truth = Labeling((sigma < 0).astype(int), 2)
    assert overlap(truth, sign_labels(VertexEmbedding(sigma))) == 1
    assert overlap(truth, sign_labels(VertexEmbedding(-sigma))) == 1
    zero = sign_labels(VertexEmbedding(np.zeros(6)))
    assert not zero.labels.any()
    assert overlap(truth, zero) == 0


def test_sign_labels_needs_one_column():
    with pytest.raises(ValueError):
        sign_labels(VertexEmbedding(np.ones((3, 2))))


@given(st.lists(st.floats(-1e6, 1e6).filter(lambda x: x != 0), min_size=1, max_size=50))
def test_sign_split_is_invariant_under_global_flip(xs):
    emb = VertexEmbedding(np.array(xs))
    a, b = sign_labels(emb), sign_labels(-emb)
    assert overlap(a, b) == 1
    assert np.array_equal(a.labels, 1 - b.labels)


# --- k-means ---------------------------------------------------------------------------


def test_kmeans_perfect_split():
    x = np.concatenate([-np.ones(10), np.ones(10)])
    lab = kmeans(VertexEmbedding(x), 2, seed=0)
    assert overlap(Labeling((x > 0).astype(int), 2), lab) == 1


def test_kmeans_identical_points_error():
    with pytest.raises(ValueError, match="distinct"):
        kmeans(VertexEmbedding(np.ones(10)), 2)
    with pytest.raises(ValueError):
        kmeans(VertexEmbedding(np.arange(3.0)), 1)
    with pytest.raises(ValueError):
        kmeans(VertexEmbedding(np.arange(2.0)), 3)


def test_kmeans_recovers_separated_blobs_and_is_deterministic():
    rng = np.random.default_rng(0)
    centres = np.array([[0, 0], [5, 0], [0, 5]])
    truth = np.repeat(np.arange(3), 100)
    pts = centres[truth] + 0.5 * rng.standard_normal((300, 2))
    a = kmeans(VertexEmbedding(pts), 3, seed=4)
    b = kmeans(VertexEmbedding(pts), 3, seed=4)
    assert np.array_equal(a.labels, b.labels)
    assert overlap(Labeling(truth, 3), a) == 1


@given(st.integers(0, 2**31), st.integers(2, 5))
@settings(max_examples=30, deadline=None)
def test_kmeans_objective_never_increases(seed, q):
    pts = np.random.default_rng(seed).standard_normal((120, 2))
    fit = kmeans_fit(VertexEmbedding(pts), q, seed=seed, restarts=1)
    assert np.all(np.diff(fit.history) <= 1e-9 * fit.history[0])
    assert fit.objective <= fit.history[-1] + 1e-9


# --- overlap -----------------------------------------------------------------------------


def test_overlap_examples():
    truth = Labeling(np.array([0, 0, 1, 1]), 2)
    assert overlap(truth, truth) == 1
    assert overlap(truth, Labeling(np.zeros(4, dtype=int), 2)) == 0
    with pytest.raises(ValueError):
        overlap(truth, Labeling(np.zeros(3, dtype=int), 2))


@given(labelings(), st.data())
@settings(max_examples=60, deadline=None)
def test_overlap_is_permutation_invariant_and_non_negative(truth, data):
    pred = Labeling(np.array(data.draw(st.lists(st.integers(0, truth.q - 1), min_size=truth.n, max_size=truth.n))), truth.q)
    perm_t = np.array(data.draw(st.permutations(range(truth.q))))
    perm_p = np.array(data.draw(st.permutations(range(truth.q))))
    base = overlap(truth, pred)
    assert base >= 0
    assert overlap(Labeling(perm_t[truth.labels], truth.q), Labeling(perm_p[pred.labels], pred.q)) == pytest.approx(base)


@given(labelings(q_max=7), st.data())
@settings(max_examples=40, deadline=None)
def test_overlap_brute_force_matches_assignment(truth, data):
    pred = Labeling(np.array(data.draw(st.lists(st.integers(0, truth.q - 1), min_size=truth.n, max_size=truth.n))), truth.q)
    mat = confusion(truth, pred)
    r, c = linear_sum_assignment(-mat)
    q = truth.q
    expected = (mat[r, c].sum() / truth.n - 1 / q) / (1 - 1 / q)
    assert overlap(truth, pred) == pytest.approx(expected)


def test_overlap_many_groups_uses_assignment():
    rng = np.random.default_rng(1)
    truth = Labeling(rng.integers(0, 10, 500), 10)
    perm = rng.permutation(10)
    assert overlap(truth, Labeling(perm[truth.labels], 10)) == pytest.approx(1)


def test_overlap_exhaustive_small_case_by_hand():
    truth = Labeling(np.array([0, 0, 1, 1, 2, 2]), 3)
    pred = Labeling(np.array([1, 1, 2, 0, 0, 0]), 3)
    best = max(sum(p[b] == a for a, b in zip(truth.labels, pred.labels)) for p in itertools.permutations(range(3)))
    assert best == 5
    assert overlap(truth, pred) == pytest.approx((5 / 6 - 1 / 3) / (2 / 3))


# --- the clustering pipeline ----------------------------------------------------------


@pytest.fixture(scope="module")
def planted():
    return sbm_sample(SbmParams.planted(5000, 2, 6, 1), 7)


def test_pipeline_runs_every_algorithm(planted):
    for kind in ALGORITHMS:
        res = spectral_cluster(planted.graph, 2, kind, seed=0)
        assert res.labeling.n == planted.graph.n
        assert res.meta["algorithm"] == kind
        assert 0 <= overlap(Labeling(planted.labels, planted.q), res.labeling) <= 1


def test_pipeline_nb_recovers_structure(planted):
    res = spectral_cluster(planted.graph, 2, "nb", seed=0)
    assert res.meta["labelling"] == "sign" and not res.meta["fallback"]
    assert overlap(Labeling(planted.labels, planted.q), res.labeling) > 0.4
    edge = spectral_cluster(planted.graph, 2, "nb", seed=0, config=ClusterConfig(source="edge_space"))
    assert overlap(Labeling(planted.labels, planted.q), edge.labeling) > 0.4


def test_pipeline_is_deterministic(planted):
    a = spectral_cluster(planted.graph, 3, "nb", seed=5)
    b = spectral_cluster(planted.graph, 3, "nb", seed=5)
    assert np.array_equal(a.labeling.labels, b.labeling.labels)
    assert a.meta["labelling"] == "kmeans"


def test_pipeline_errors():
    with pytest.raises(ValueError):
        spectral_cluster(path(5), 1)
    g = sbm_sample(SbmParams.planted(10, 1, 0, 0), 0).graph
    with pytest.raises(ValueError):
        spectral_cluster(g, 2)
