"""Extrinsic geometry of codimension-one subalgebras.

The shape operator is ``A_nu X = nabla_X nu`` and ``H = trace A_nu``; for a
subgroup this equals ``-trace ad(nu)``, which gives two independent routes
to the same number.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass

import numpy as np

from . import lie_core
from .lie_core import LieAlgebra, ad_matrix, nabla
from .subalgebras import Subalgebra, _gram_schmidt, catalogue_subalgebras, is_abelian

H_TOL = 1e-10
MINIMAL_TOL = 1e-12


def _annihilator(basis: np.ndarray) -> np.ndarray:
    """Covector killing the rows of ``basis`` (k = n - 1), via cofactor expansion."""
    k, n = basis.shape
    out = np.empty(n)
    for a in range(n):
        M = np.vstack([np.eye(n)[a], basis])
        out[a] = np.linalg.det(M)
    return out


def orient(nu: np.ndarray, hint=None, metric=None) -> np.ndarray:
    """Fix the sign of ``nu``: positive pairing with ``hint`` if given, else last nonzero coefficient positive."""
    if hint is not None:
        G = np.eye(len(nu)) if metric is None else metric
        s = float(nu @ G @ np.asarray(hint, dtype=float))
        if abs(s) > 1e-12:
            return nu if s > 0 else -nu
    nz = np.flatnonzero(np.abs(nu) > 1e-12)
    return nu if nu[nz[-1]] > 0 else -nu


def unit_normal(A: LieAlgebra, K: Subalgebra) -> np.ndarray:
    if K.parent is not A and K.parent.dim != A.dim:
        raise lie_core.DimensionError("subalgebra belongs to an algebra of another dimension")
    if K.codim != 1:
        raise ValueError(f"unit normal needs codimension one, got {K.codim}")
    n = _annihilator(K.basis)
    nu = np.linalg.solve(A.metric, n)
    nu /= A.norm(nu)
    return orient(nu, K.orientation, A.metric)


def mean_curvature_trace(A: LieAlgebra, K: Subalgebra) -> float:
    return float(-np.trace(ad_matrix(A, unit_normal(A, K))))


def mean_curvature_direct(A: LieAlgebra, K: Subalgebra) -> float:
    nu = unit_normal(A, K)
    X = _gram_schmidt(A, K.basis)
    return float(-sum(A.inner(nu, nabla(A, x, x)) for x in X))


def shape_operator(A: LieAlgebra, K: Subalgebra) -> np.ndarray:
    """Matrix ``S[i, j] = g(nabla_{X_i} nu, X_j)`` in a Gram-Schmidt basis of K."""
    nu = unit_normal(A, K)
    X = _gram_schmidt(A, K.basis)
    return np.array([[A.inner(nabla(A, xi, nu), xj) for xj in X] for xi in X])


@dataclass(frozen=True)
class ExtrinsicData:
    normal: np.ndarray
    shape: np.ndarray
    H: float
    basis_used: np.ndarray


def extrinsic_data(A: LieAlgebra, K: Subalgebra) -> ExtrinsicData:
    S = shape_operator(A, K)
    return ExtrinsicData(unit_normal(A, K), S, float(np.trace(S)), _gram_schmidt(A, K.basis))


# ---------------------------------------------------------------------------
# closed forms
# ---------------------------------------------------------------------------

def closed_form_H(A: LieAlgebra, tag: str, params=()) -> float:
    """Tabulated mean curvature of a catalogued family, oriented by the family's reference normal."""
    P = tuple(params)
    name = A.name
    if name in ("h3", "sl2", "su2"):
        return 0.0
    if name == "g4":
        return -2.0
    if name == "r3p[λ]":
        return -2 * A.params[0]
    if name == "r3[λ]":
        lam = A.params[0]
        if tag == "K0":
            return -2 * lam
        (a,) = P
        return -2 * a * lam / np.sqrt(1 + a * a)
    if name == "r3[λ1,λ2]":
        l1, l2 = A.params
        s = l1 + l2
        if tag == "K0":
            return -s
        if tag in ("K1_b", "K2_a"):
            (b,) = P
            return -s * b / np.sqrt(1 + b * b)
        if tag == "K3_cd":
            c, d = P
            return -2 * l1 * d / np.sqrt(1 + c * c + d * d)
        if tag == "K4_ef":
            e, f = P
            return -2 * l1 * f / np.sqrt(1 + e * e + f * f)
    raise KeyError(f"no closed form for {tag} in {name}")


def _uniform(rng, lo=-2.0, hi=2.0):
    return float(rng.uniform(lo, hi))


def _nonzero(rng, lo=-2.0, hi=2.0):
    while True:
        x = float(rng.uniform(lo, hi))
        if abs(x) > 0.1:
            return x


# label, algebra sampler, family tag, family-parameter count
REGIMES = [
    ("S3_lambda K0", lambda r: lie_core.r3_lambda(_uniform(r)), "K0"),
    ("S3_lambda K_a", lambda r: lie_core.r3_lambda(_uniform(r)), "K_a"),
    ("S3_lambda1_lambda2 K0", lambda r: lie_core.r3_lambda1_lambda2(_nonzero(r), _uniform(r)), "K0"),
    ("S3_lambda1_lambda2 K1_b", lambda r: lie_core.r3_lambda1_lambda2(_nonzero(r), _nonzero(r)), "K1_b"),
    ("S3_lambda1_lambda2 K2_a", lambda r: lie_core.r3_lambda1_lambda2(_nonzero(r), _nonzero(r)), "K2_a"),
    ("S3_lambda1_0 K0", lambda r: lie_core.r3_lambda1_lambda2(_nonzero(r), 0.0), "K0"),
    ("S3_lambda1_0 K1_b", lambda r: lie_core.r3_lambda1_lambda2(_nonzero(r), 0.0), "K1_b"),
    ("S3_lambda1_0 K2_a", lambda r: lie_core.r3_lambda1_lambda2(_nonzero(r), 0.0), "K2_a"),
    ("S3_lambda_lambda K3_cd", lambda r: (lambda l: lie_core.r3_lambda1_lambda2(l, l))(_nonzero(r)), "K3_cd"),
    ("S3_lambda_lambda K4_ef", lambda r: (lambda l: lie_core.r3_lambda1_lambda2(l, l))(_nonzero(r)), "K4_ef"),
    ("S3p_lambda K0", lambda r: lie_core.r3p_lambda(_uniform(r)), "K0"),
    ("h3 K_a", lambda r: lie_core.heisenberg(), "K_a"),
    ("sl2 K3_rho", lambda r: lie_core.sl2(), "SL2_K3_rho"),
    ("sl2 K1", lambda r: lie_core.sl2(), "SL2_K1"),
    ("g4 H3", lambda r: lie_core.g4(), "G4_H3"),
]


def _family(A, tag):
    for f in catalogue_subalgebras(A):
        if f.tag == tag:
            return f
    raise KeyError(tag)


def sample_instance(rng: np.random.Generator, regime=None):
    """Random ``(label, algebra, subalgebra)`` drawn from the catalogue regimes."""
    label, make, tag = REGIMES[rng.integers(len(REGIMES))] if regime is None else regime
    A = make(rng)
    fam = _family(A, tag)
    params = [_nonzero(rng, -3, 3) for _ in range(fam.nparams)]
    return label, A, fam.instantiate(params)


@dataclass(frozen=True)
class CurvatureRow:
    regime: str
    algebra: str
    params: tuple
    family_tag: str
    family_params: tuple
    H_numeric: float
    H_closed_form: float
    abelian: bool
    minimal: bool

    @property
    def error(self) -> float:
        return abs(self.H_numeric - self.H_closed_form)

    def to_dict(self) -> dict:
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        d["params"], d["family_params"] = list(self.params), list(self.family_params)
        return d


def curvature_row(label: str, A: LieAlgebra, K: Subalgebra) -> CurvatureRow:
    H = mean_curvature_trace(A, K)
    return CurvatureRow(
        label, A.name, A.params, K.family_tag, K.params, H,
        closed_form_H(A, K.family_tag, K.params), is_abelian(K), abs(H) < MINIMAL_TOL,
    )


def mean_curvature_table(catalogue=None, draws: int = 5, seed: int = 0, tol: float = H_TOL) -> list[CurvatureRow]:
    """H for every regime (``draws`` random parameter sets each), checked against the closed forms.

    ``catalogue`` may be a list of ``(label, algebra, subalgebra)`` triples;
    by default all of :data:`REGIMES` are sampled. Raises ``ArithmeticError``
    when a numeric value misses its closed form by more than ``tol``.
    """
    if catalogue is None:
        rng = np.random.default_rng(seed)
        catalogue = [sample_instance(rng, reg) for reg in REGIMES for _ in range(draws)]
    rows = [curvature_row(*item) for item in catalogue]
    bad = [r for r in rows if r.error > tol]
    if bad:
        raise ArithmeticError(f"{len(bad)} rows disagree with closed forms, first: {bad[0]}")
    return rows


def table_to_csv(rows) -> str:
    buf = io.StringIO()
    fields = list(CurvatureRow.__dataclass_fields__)
    w = csv.DictWriter(buf, fieldnames=fields)
    w.writeheader()
    for r in rows:
        d = r.to_dict()
        d["params"] = ";".join(map(repr, r.params))
        d["family_params"] = ";".join(map(repr, r.family_params))
        w.writerow(d)
    return buf.getvalue()


def table_to_json(rows) -> str:
    return json.dumps([r.to_dict() for r in rows], indent=2)
