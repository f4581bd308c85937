import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import cycle, erdos_renyi, match_multisets, random_regular, random_tree, star
from nbclust.eigen import (
    EigenResult,
    SolverOpts,
    dense_spectrum,
    dense_symmetric_spectrum,
    eigvals,
    real_eigs_outside_bulk,
    topk_eigs,
)
from nbclust.graph import SbmParams, sbm_sample
from nbclust.operators import build_b, build_b_prime, sparse_b

# --- dense non-symmetric solver --------------------------------------------------


def test_rotation_matrix():
    vals = dense_spectrum([[0.0, 1.0], [-1.0, 0.0]]).values
    assert match_multisets(vals, [1j, -1j]) < 1e-14


def test_cycle_b_is_two_directed_cycles():
    vals = dense_spectrum(build_b(cycle(4))).values
    assert match_multisets(vals, [1, 1j, -1, -1j] * 2) < 1e-12


def test_tree_b_is_nilpotent():
    rng = np.random.default_rng(2)
    for n in (2, 10, 60):
        assert np.abs(dense_spectrum(build_b(random_tree(n, rng))).values).max() < 1e-10


@given(st.integers(1, 40), st.integers(0, 2**31))
@settings(max_examples=40, deadline=None)
def test_dense_matches_lapack_on_random_matrices(n, seed):
    a = np.random.default_rng(seed).standard_normal((n, n))
    ours = eigvals(a)
    scale = max(1.0, np.abs(np.linalg.eigvals(a)).max())
    assert match_multisets(ours, np.linalg.eigvals(a)) < 1e-8 * scale


def test_dense_values_sorted_by_modulus_with_vectors():
    a = np.random.default_rng(4).standard_normal((30, 30))
    res = dense_spectrum(a, vectors=True)
    mods = np.abs(res.values)
    assert np.all(np.diff(mods) <= 1e-12)
    assert np.all(res.residuals < 1e-9)
    assert np.allclose(np.linalg.norm(res.vectors, axis=0), 1)


def test_dense_rejects_non_square():
    with pytest.raises(ValueError):
        dense_spectrum(np.ones((2, 3)))


# --- Jacobi --------------------------------------------------------------------


def test_jacobi_examples():
    assert np.allclose(dense_symmetric_spectrum(np.eye(3)), [1, 1, 1])
    assert np.allclose(dense_symmetric_spectrum(np.diag([4.0, 1.0])), [4, 1])
    b = sparse_b(star(3)).toarray()
    sv = np.sqrt(np.clip(dense_symmetric_spectrum(b @ b.T), 0, None))
    assert np.allclose(sv, [2, 1, 1, 0, 0, 0], atol=1e-12)


def test_jacobi_rejects_asymmetric():
    with pytest.raises(ValueError, match="symmetric"):
        dense_symmetric_spectrum([[1.0, 2.0], [0.0, 1.0]])


@given(st.integers(1, 30), st.integers(0, 2**31))
@settings(max_examples=40, deadline=None)
def test_jacobi_matches_lapack(n, seed):
    x = np.random.default_rng(seed).standard_normal((n, n))
    a = x + x.T
    w, v = dense_symmetric_spectrum(a, vectors=True)
    assert np.allclose(w, np.linalg.eigvalsh(a)[::-1], atol=1e-10 * max(1, np.abs(w).max()))
    assert np.allclose(v.T @ v, np.eye(n), atol=1e-10)
    assert np.allclose(a @ v, v * w, atol=1e-9 * max(1, np.abs(w).max()))


# --- Arnoldi -------------------------------------------------------------------


def test_solver_opts_validation():
    with pytest.raises(ValueError):
        SolverOpts(k=5, ncv=8).subspace(100)
    with pytest.raises(ValueError):
        topk_eigs(build_b(cycle(3)), SolverOpts(k=6))
    with pytest.raises(ValueError):
        topk_eigs(build_b(cycle(3)), SolverOpts(k=0))


def test_topk_matches_dense_on_corpus(corpus):
    # Ties in modulus are common (conjugate pairs), so compare the leading
    # moduli and check every Ritz value against the full spectrum.  Graphs
    # whose leading values sit on the unit circle (cycles, unicyclic parts)
    # are covered separately: there +-1 form Jordan blocks.
    checked = 0
    for g in corpus:
        op = build_b_prime(g)
        if op.dim < 12:
            continue
        full = dense_spectrum(op).values
        if np.abs(full[3]) <= 1 + 1e-6:
            continue
        res = topk_eigs(op, SolverOpts(k=4, seed=checked))
        assert res.all_converged
        mods = np.sort(np.abs(res.values))[::-1][:4]
        assert np.abs(mods - np.abs(full[:4])).max() < 1e-6
        for mu in res.values:
            assert np.abs(full - mu).min() < 1e-6
        checked += 1
    assert checked >= 60


def test_topk_on_defective_unit_values():
    # on a cycle, mu = +-1 of the vertex-pair reduction is a 2x2 Jordan
    # block: a backward-stable residual only pins the value to ~sqrt(eps)
    for n in (12, 31, 48):
        res = topk_eigs(build_b_prime(cycle(n)), SolverOpts(k=4))
        assert np.allclose(np.abs(res.values), 1, atol=1e-4)
        assert np.all(res.residuals < 1e-7)


def test_topk_residual_contract():
    g = sbm_sample(SbmParams.planted(2000, 2, 5, 1), 3).graph
    op = build_b_prime(g).T
    res = topk_eigs(op, SolverOpts(k=3, seed=1))
    for mu, x, r, ok in zip(res.values, res.vectors.T, res.residuals, res.converged):
        actual = np.linalg.norm(op @ x.real - (mu * x).real + 1j * (op @ x.imag - (mu * x).imag))
        actual /= np.linalg.norm(x)
        assert actual == pytest.approx(r, rel=1e-6, abs=1e-13)
        if ok:
            assert r <= 1e-8


def test_topk_on_planted_partition():
    g = sbm_sample(SbmParams.planted(10_000, 2, 5, 1), 0).graph
    res = topk_eigs(build_b_prime(g), SolverOpts(k=3, seed=0))
    assert res.all_converged
    assert abs(res.values[0].real - 3) <= 0.05 * 3
    assert abs(res.values[1].real - 2) <= 0.10 * 2
    assert abs(res.values[1].imag) < 1e-8


def test_topk_regular_graph_leading_value():
    g = random_regular(200, 3, np.random.default_rng(1))
    res = topk_eigs(build_b(g), SolverOpts(k=1))
    assert abs(res.values[0] - 2) < 1e-8


def test_topk_cycle_ritz_moduli():
    op = build_b_prime(cycle(5))
    oracle = np.abs(dense_spectrum(op).values)
    assert np.allclose(oracle, 1, atol=1e-10)
    res = topk_eigs(op, SolverOpts(k=4))
    assert np.allclose(np.abs(res.values), 1, atol=1e-6)


def test_topk_is_deterministic():
    g = sbm_sample(SbmParams.planted(1000, 2, 5, 1), 5).graph
    a = topk_eigs(build_b_prime(g).T, SolverOpts(k=3, seed=9))
    b = topk_eigs(build_b_prime(g).T, SolverOpts(k=3, seed=9))
    assert a.values.tobytes() == b.values.tobytes()
    assert a.vectors.tobytes() == b.vectors.tobytes()


def test_topk_real_part_orderings():
    g = sbm_sample(SbmParams.planted(500, 2, 5, 1), 6).graph
    lap = np.diag(g.degrees.astype(float)) - g.adjacency().toarray()
    oracle = np.linalg.eigvalsh(lap)
    from nbclust.operators import classical_operator

    res = topk_eigs(classical_operator(g, "laplacian"), SolverOpts(k=2, which="LR"))
    assert np.allclose(np.sort(res.values.real)[::-1], oracle[::-1][:2], atol=1e-7)


# --- bulk heuristic -------------------------------------------------------------


def test_bulk_heuristic_on_synthetic_values():
    res = EigenResult(values=np.array([4.0, -2.5, 2.05, 1.0 + 1.5j, 1.0 - 1.5j]))
    outside, q = real_eigs_outside_bulk(res)
    assert q == 3 and np.allclose(outside, [4.0, -2.5, 2.05])
    # the 2% margin excludes values just above the radius
    assert real_eigs_outside_bulk(res, delta=0.05)[1] == 2


def test_bulk_heuristic_rejects_degenerate_leading_values():
    with pytest.raises(ValueError):
        real_eigs_outside_bulk(EigenResult(values=np.array([2j, -2j])))
    with pytest.raises(ValueError):
        real_eigs_outside_bulk(EigenResult(values=np.array([], dtype=complex)))
    # a tree is nilpotent: no positive leading eigenvalue
    vals = dense_spectrum(build_b(random_tree(20, np.random.default_rng(0)))).values
    with pytest.raises(ValueError):
        real_eigs_outside_bulk(EigenResult(values=vals))


def test_bulk_heuristic_without_structure():
    for seed in range(3):
        g = erdos_renyi(5000, 3.0, np.random.default_rng(seed))
        res = topk_eigs(build_b_prime(g), SolverOpts(k=6, seed=seed))
        assert real_eigs_outside_bulk(res)[1] == 1


def test_bulk_heuristic_finds_three_groups():
    lg = sbm_sample(SbmParams.from_ratio(30_000, 3, 3.0, 0.1), 0)
    res = topk_eigs(build_b_prime(lg.graph), SolverOpts(k=6, seed=0))
    assert real_eigs_outside_bulk(res)[1] == 3


@pytest.mark.slow
def test_bulk_confinement_statistics():
    # dense spectra at n = 1000 over 20 planted samples with c = 3
    radius = np.sqrt(3) * 1.05
    outside = total = 0
    for seed in range(20):
        g = sbm_sample(SbmParams.planted(1000, 2, 5, 1), 1000 + seed).graph
        vals = dense_spectrum(build_b_prime(g)).values
        beyond = np.sort(np.abs(vals[np.abs(vals) > radius]))[::-1]
        outside += max(beyond.size - 2, 0)
        total += vals.size
    assert outside / total <= 0.01, (outside, total)
