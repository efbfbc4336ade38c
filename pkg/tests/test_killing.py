import numpy as np
import pytest

from solvflow import group_atlas as G
from solvflow import killing as K

MODELS = [
    G.s3_lambda(1.0), G.s3_lambda(0.0), G.s3_lambda1_lambda2(1.0, 2.0), G.s3_lambda1_lambda2(1.5, 0.0),
    G.s3_lambda1_lambda2(0.7, 0.7), G.s3p_lambda(0.5), G.g4_model(),
]
ids = [m.spec for m in MODELS]


def sample(m, n=50, seed=0):
    return np.random.default_rng(seed).uniform(-1, 1, size=(n, m.dim))


@pytest.mark.parametrize("m, count", [
    (G.s3_lambda(1.0), 3), (G.s3_lambda1_lambda2(1, 2), 3), (G.s3_lambda1_lambda2(1, 0), 4),
    (G.s3_lambda1_lambda2(2, 2), 6), (G.s3p_lambda(0.3), 4), (G.g4_model(), 4),
])
def test_regime_sizes(m, count):
    assert len(K.killing_basis(m)) == count


@pytest.mark.parametrize("m", MODELS, ids=ids)
def test_generators_are_killing(m):
    P = sample(m)
    for V in K.killing_basis(m):
        assert K.killing_residual(m, V, P) < 1e-6, V.name


@pytest.mark.parametrize("m", MODELS, ids=ids)
def test_right_invariant_fields_match_catalogue(m):
    rng = np.random.default_rng(2)
    gens = K.generators(m)
    for _ in range(100):
        p = rng.uniform(-1, 1, m.dim)
        W = rng.standard_normal(m.dim)
        catalogue = sum(W[i] * gens[i].field(p) for i in range(m.dim))
        assert np.abs(K.right_invariant_field(m, W, p) - catalogue).max() < 1e-6


@pytest.mark.parametrize("m", MODELS, ids=ids)
def test_right_and_left_agree_at_identity(m):
    e = m.identity()
    F = G.frame(m, e)
    for i, g in enumerate(K.generators(m)[: m.dim]):
        assert np.allclose(g.field(e), F[:, i])
    W = np.arange(1.0, m.dim + 1)
    assert np.allclose(K.adjoint_inverse(m, e, W), W, atol=1e-9)


def test_s3l_e3_closed_form():
    m = G.s3_lambda(1.3)
    p = np.array([0.4, -0.7, 0.2])
    x, y, z = p
    lam = 1.3
    # e^{-lam z}(lam x - lam y z + y) E1 + lam y e^{-lam z} E2 + E3
    coeffs = np.array([np.exp(-lam * z) * (lam * x - lam * y * z + y), lam * y * np.exp(-lam * z), 1.0])
    assert np.allclose(G.frame(m, p) @ coeffs, K.generators(m)[2].field(p))


def test_linearity_and_random_combination():
    m = G.s3_lambda1_lambda2(0.9, 0.9)
    rng = np.random.default_rng(4)
    c = rng.standard_normal(6)
    V = K.combination(m, c)
    P = sample(m)
    basis = K.killing_basis(m)
    total = sum((ci * B for ci, B in zip(c[1:], basis[1:])), c[0] * basis[0])
    assert np.allclose(V.evaluate(P), total.evaluate(P))
    assert K.killing_residual(m, V, P) < 1e-5


def test_zero_field_and_negative_control():
    m = G.s3_lambda1_lambda2(1.0, 2.0)
    P = sample(m)
    zero = K.combination(m, np.zeros(3))
    assert K.killing_residual(m, zero, P) == 0.0
    control = K.vector_field(m, lambda p: np.stack([p[..., 2], 0 * p[..., 0], 0 * p[..., 0]], -1), "z d_x")
    assert K.killing_residual(m, control, P) > 1e-2
    with pytest.raises(ValueError):
        K.killing_residual(m, zero, np.empty((0, 3)))


@pytest.mark.parametrize("m, name", [(G.s3_lambda1_lambda2(1.5, 0.0), "T~"), (G.s3_lambda1_lambda2(0.7, 0.7), "T2~"),
                                     (G.s3_lambda1_lambda2(0.7, 0.7), "T3~")])
def test_printed_rotational_generators_fail(m, name):
    V = next(v for v in K.killing_basis(m, literal=True) if v.name == name)
    assert K.killing_residual(m, V, sample(m)) > 1e-2


def test_report_rows():
    m = G.s3p_lambda(0.2)
    rows = K.residual_report(m, sample(m, 10))
    assert [r["generator_name"] for r in rows] == ["E1~", "E2~", "E3~", "T~"]
    assert all(r["sample_size"] == 10 for r in rows)
