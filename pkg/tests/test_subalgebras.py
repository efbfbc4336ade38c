import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import least_squares

from solvflow import group_atlas as G
from solvflow import lie_core as L
from solvflow import subalgebras as S

param = st.floats(-3, 3, allow_nan=False).filter(lambda x: abs(x) > 1e-3)


def test_closure_defect_values():
    e1, e2, e3 = np.eye(3)
    assert S.closure_defect(L.sl2(), e2, e3) == pytest.approx(1.0)
    assert S.closure_defect(L.r3_lambda(1.0), e1, e2) == 0.0
    with pytest.raises(ValueError):
        S.closure_defect(L.sl2(), e1, 2 * e1)


def test_non_subalgebra_rejected():
    e1, e2, e3 = np.eye(3)
    with pytest.raises(ValueError):
        S.Subalgebra(L.su2(), [e1, e2])


@pytest.mark.parametrize("A", [
    L.r3_lambda(0.7), L.heisenberg(), L.r3_lambda1_lambda2(1.0, 2.0), L.r3_lambda1_lambda2(1.0, 0.0),
    L.r3_lambda1_lambda2(0.6, 0.6), L.r3p_lambda(0.3), L.sl2(), L.g4(),
], ids=lambda A: f"{A.name}{A.params}")
def test_catalogue_members_close(A):
    rng = np.random.default_rng(0)
    for fam in S.catalogue_subalgebras(A):
        for _ in range(10):
            params = [rng.uniform(0.2, 2) * rng.choice([-1, 1]) for _ in range(fam.nparams)]
            K = fam.instantiate(params)
            assert K.closure_defect() < 1e-12


def test_su2_has_no_catalogue():
    assert S.catalogue_subalgebras(L.su2()) == []


def test_abelian_and_nilpotent_labels():
    A = L.r3_lambda1_lambda2(1.0, 2.0)
    assert S.is_abelian(S.subalgebra(A, "K0"))
    assert not S.is_abelian(S.subalgebra(A, "K1_b", (0.5,)))
    B = L.r3_lambda1_lambda2(1.0, 0.0)
    assert S.is_abelian(S.subalgebra(B, "K2_a", (1.3,)))
    H3 = S.subalgebra(L.g4(), "G4_H3")
    assert not S.is_abelian(H3) and S.is_nilpotent_2step(H3)
    assert not S.is_nilpotent_2step(S.subalgebra(A, "K1_b", (0.5,)))


def test_rref_canonical():
    A = L.r3_lambda1_lambda2(1.0, 2.0)
    K = S.subalgebra(A, "K1_b", (2.0,))
    M = np.array([[1.0, 2.0], [-0.5, 3.0]])
    assert np.allclose(S.rref(M @ K.basis), K.canonical_basis())


def test_plucker_sign_invariant():
    B = np.array([[1.0, 0.5, 0.0], [0.0, 1.0, 2.0]])
    assert np.allclose(S.plucker(B), S.plucker(B[::-1]))


@settings(max_examples=30, deadline=None)
@given(param, param)
def test_family_fit_recovers_parameters(c, d):
    A = L.r3_lambda1_lambda2(0.9, 0.9)
    fam = S.family(A, "K3_cd")
    n = np.cross(*fam.basis((c, d)))
    t, dist = fam.fit(n[None])
    assert dist[0] < 1e-9
    assert np.allclose(t[0], (c, d), atol=1e-7 * max(1, abs(c), abs(d)))


@pytest.mark.parametrize("A", [L.r3_lambda(1.0), L.r3_lambda1_lambda2(1.0, 2.0), L.sl2(), L.r3_lambda1_lambda2(1.0, 1.0)],
                         ids=lambda A: f"{A.name}{A.params}")
def test_random_search_small(A):
    rep = S.random_search_verify(A, trials=5000, seed=4)
    assert rep.ok and rep.found > 0


def test_random_search_su2_empty():
    rep = S.random_search_verify(L.su2(), trials=5000)
    assert rep.found == 0 and rep.ok


@pytest.mark.parametrize("m, tag, params", [
    (G.s3_lambda(0.8), "K_a", (1.5,)), (G.s3_lambda1_lambda2(1.0, 2.0), "K1_b", (0.7,)),
    (G.s3_lambda1_lambda2(1.0, 0.0), "K2_a", (-1.2,)), (G.s3_lambda1_lambda2(0.5, 0.5), "K3_cd", (0.3, 1.1)),
    (G.s3_lambda1_lambda2(0.5, 0.5), "K4_ef", (-0.4, 0.9)), (G.s3p_lambda(0.3), "K0", ()),
    (G.g4_model(), "G4_H3", ()),
])
def test_subgroup_embedding_is_subgroup(m, tag, params):
    """Products of embedded points stay on the embedded surface, and tangents span K."""
    K = S.subalgebra(m.algebra, tag, params)
    emb = S.subgroup_embedding(m, K)
    rng = np.random.default_rng(5)
    a, b = rng.uniform(-1, 1, size=(2, K.dim))
    p, q = emb(*a), emb(*b)
    r = G.multiply(m, p, q)
    # tangent directions at p are left translates of K
    h = 1e-6
    for i in range(K.dim):
        e = np.zeros(K.dim)
        e[i] = h
        tangent = (emb(*(a + e)) - emb(*(a - e))) / (2 * h)
        coeffs = G.coframe(m, p) @ tangent
        resid = coeffs - K.basis.T @ np.linalg.lstsq(K.basis.T, coeffs, rcond=None)[0]
        assert np.abs(resid).max() < 1e-8
    # closed under products: r is the image of some parameters
    sol = least_squares(lambda x: emb(*x) - r, np.zeros(K.dim), xtol=1e-14, ftol=1e-14, gtol=1e-14)
    assert np.abs(sol.fun).max() < 1e-9


def test_to_json_roundtrip():
    K = S.subalgebra(L.r3_lambda(1.0), "K_a", (2.0,))
    doc = json.loads(S.to_json([K]))
    assert doc[0]["family_tag"] == "K_a" and doc[0]["params"] == [2.0]
