import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from solvflow import group_atlas as G

MODELS = [
    G.s3_lambda(1.0), G.s3_lambda(0.0), G.s3_lambda1_lambda2(1.0, 2.0), G.s3_lambda1_lambda2(1.5, 0.0),
    G.s3_lambda1_lambda2(0.8, 0.8), G.s3p_lambda(0.5), G.g4_model(),
]
ids = [m.spec for m in MODELS]


@pytest.mark.parametrize("m", MODELS, ids=ids)
def test_group_axioms(m):
    rng = np.random.default_rng(0)
    p, q, r = G.random_points(rng, m, 3)
    e = m.identity()
    assert np.allclose(G.multiply(m, p, e), p) and np.allclose(G.multiply(m, e, p), p)
    assert np.allclose(G.multiply(m, p, G.inverse(m, p)), e, atol=1e-14)
    assert np.allclose(G.multiply(m, G.multiply(m, p, q), r), G.multiply(m, p, G.multiply(m, q, r)))


@pytest.mark.parametrize("m", MODELS, ids=ids)
def test_frame_is_left_invariant(m):
    rng = np.random.default_rng(1)
    P, Q = G.random_points(rng, m, 2), G.random_points(rng, m, 2)
    for p, q in zip(P, Q):
        dL = G.left_differential(m, p, q)
        assert np.allclose(dL @ G.frame(m, q), G.frame(m, G.multiply(m, p, q)), atol=1e-8)


@pytest.mark.parametrize("m", MODELS, ids=ids)
def test_frame_brackets_match_algebra(m):
    """Coordinate Lie brackets of the frame fields reproduce the structure constants."""
    rng = np.random.default_rng(2)
    h = 1e-5
    A = m.algebra
    for p in G.random_points(rng, m, 3):
        F = G.frame(m, p)
        dF = []
        for k in range(m.dim):
            e = np.zeros(m.dim)
            e[k] = h
            dF.append((G.frame(m, p + e) - G.frame(m, p - e)) / (2 * h))
        dF = np.array(dF)  # dF[k, :, i] = d_k E_i
        for i in range(m.dim):
            for j in range(m.dim):
                lie = np.einsum("k,kq->q", F[:, i], dF[:, :, j]) - np.einsum("k,kq->q", F[:, j], dF[:, :, i])
                coeff = G.coframe(m, p) @ lie
                assert np.allclose(coeff, A.structure[i, j], atol=1e-7)


@pytest.mark.parametrize("m", MODELS[:-1], ids=ids[:-1])
def test_metric_closed_form(m):
    rng = np.random.default_rng(3)
    P = G.random_points(rng, m, 20)
    assert np.allclose(G.metric_at(m, P), G.metric_closed_form(m, P))


def test_heisenberg_metric_entries():
    m = G.s3_lambda(0.0)
    g = G.metric_at(m, np.array([0.3, -0.2, 0.5]))
    assert np.allclose(g, [[1, -0.5, 0], [-0.5, 1.25, 0], [0, 0, 1]])


def test_coframe_derivative_matches_finite_differences():
    m = G.g4_model()
    p = np.array([0.2, -0.4, 0.7, 0.1])
    h = 1e-6
    D = G.coframe_derivative(m, p)
    for k in range(4):
        e = np.zeros(4)
        e[k] = h
        fd = (G.coframe(m, p + e) - G.coframe(m, p - e)) / (2 * h)
        assert np.allclose(D[k], fd, atol=1e-8)


def test_parse_model():
    assert G.parse_model("s3ll:l1=1,l2=2") == G.s3_lambda1_lambda2(1, 2)
    assert G.parse_model("h3") == G.s3_lambda(0.0)
    assert G.parse_model("g4").dim == 4
    assert G.parse_model("s3p:λ=0.5") == G.s3p_lambda(0.5)
    for bad in ("s5", "s3l", "s3ll:l1=1", "s3l:mu=1", "s3ll:l1=0,l2=1"):
        with pytest.raises(ValueError):
            G.parse_model(bad)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-2, 2, allow_nan=False), min_size=3, max_size=3),
       st.lists(st.floats(-2, 2, allow_nan=False), min_size=3, max_size=3))
def test_matrix_rep_is_homomorphism(p, q):
    m = G.s3p_lambda(0.4)
    p, q = np.array(p), np.array(q)
    lhs = G.matrix_rep(m, G.multiply(m, p, q))
    rhs = G.matrix_rep(m, p) @ G.matrix_rep(m, q)
    assert np.allclose(lhs, rhs, atol=1e-9 * max(1.0, np.abs(rhs).max()))
