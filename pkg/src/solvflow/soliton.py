"""Translating solutions generated by Killing fields.

A subgroup K moves by isometries along the flow of a Killing field V
exactly when ``g(V, nu) = -H`` holds on all of K. With V written over the
generator basis this is linear in the coefficients; solving it by least
squares over points of K separates translators from the rest.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .curvature import mean_curvature_trace, unit_normal
from .group_atlas import GroupModel, coframe, g4_model, s3_lambda, s3_lambda1_lambda2, s3p_lambda
from .killing import generators
from .subalgebras import Subalgebra, is_abelian, rref, subalgebra, subgroup_embedding

MINIMAL_TOL = 1e-10
TRANSLATOR_TOL = 1e-8
TANGENTIAL_TOL = 1e-10
SAMPLE_BOX = 2.0
FRESH_POINTS = 200


@dataclass
class TranslatorReport:
    model: str
    family_tag: str
    family_params: tuple
    H: float
    status: str
    direction: dict = field(default_factory=dict)
    residual: float = 0.0
    fresh_residual: float = 0.0
    tangential: list = field(default_factory=list)
    abelian: bool = False

    def coefficient(self, name: str) -> float:
        return self.direction.get(name, 0.0)

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["family_params"] = list(self.family_params)
        return d


def sample_subgroup(m: GroupModel, K: Subalgebra, n: int, rng: np.random.Generator) -> np.ndarray:
    """Points of the subgroup of K with parametrisation coordinates uniform in the sample box."""
    emb = subgroup_embedding(m, K)
    args = rng.uniform(-SAMPLE_BOX, SAMPLE_BOX, size=(K.dim, n))
    return emb(*args)


def normal_pairings(m: GroupModel, K: Subalgebra, points, literal: bool = False):
    """Matrix ``a[i, j] = g(V_j(p_i), nu(p_i))`` and generator names.

    Along a subgroup the unit normal is the left translate of the algebra normal,
    so ``g(V, nu) = (coframe(p) V) . nu``.
    """
    nu = unit_normal(m.algebra, K)
    gens = generators(m, literal)
    Finv = coframe(m, points)
    cols = [np.einsum("nij,nj->ni", Finv, g.field(points)) @ nu for g in gens]
    return np.stack(cols, -1), [g.name for g in gens]


def _canonical_solution(x: np.ndarray, null: np.ndarray) -> np.ndarray:
    """Shift x along the null space so the highest-index null pivots vanish."""
    if null.shape[0] == 0:
        return x
    R = rref(null[:, ::-1])[:, ::-1]
    for row in R:
        nz = np.flatnonzero(np.abs(row) > 1e-9)
        if nz.size:
            piv = nz[-1]
            x = x - x[piv] / row[piv] * row
    return x


def translator_solve(m: GroupModel, K: Subalgebra, sample=None, seed: int = 0, literal: bool = False) -> TranslatorReport:
    rng = np.random.default_rng(seed)
    gens = generators(m, literal)
    if K.parent.name != m.algebra.name or K.parent.params != m.algebra.params:
        raise ValueError(f"{K.family_tag} does not belong to the algebra of {m}")
    if sample is None:
        sample = sample_subgroup(m, K, 20 * len(gens) + 40, rng)
    sample = np.asarray(sample, dtype=float)
    if len(sample) < 20 * len(gens):
        raise ValueError(f"need at least {20 * len(gens)} sample points, got {len(sample)}")

    H = mean_curvature_trace(m.algebra, K)
    A, names = normal_pairings(m, K, sample, literal)
    tangential = np.max(np.abs(A), axis=0) < TANGENTIAL_TOL
    active = np.flatnonzero(~tangential)
    rhs = np.full(len(sample), -H)

    x = np.zeros(len(gens))
    if active.size:
        Aa = A[:, active]
        xa, *_ = np.linalg.lstsq(Aa, rhs, rcond=None)
        _, s, vt = np.linalg.svd(Aa, full_matrices=False)
        rank = int(np.sum(s > 1e-9 * max(s[0], 1.0)))
        xa = _canonical_solution(xa, vt[rank:])
        x[active] = xa
    residual = float(np.max(np.abs(A @ x - rhs)))

    fresh = sample_subgroup(m, K, FRESH_POINTS, rng)
    Af, _ = normal_pairings(m, K, fresh, literal)
    fresh_residual = float(np.max(np.abs(Af @ x + H)))

    if abs(H) < MINIMAL_TOL:
        status, direction = "minimal", {}
    elif max(residual, fresh_residual) < TRANSLATOR_TOL:
        status = "translator"
        direction = {n: float(c) for n, c in zip(names, x) if abs(c) > 1e-12}
    else:
        status, direction = "none", {}
    return TranslatorReport(
        m.spec, K.family_tag, K.params, H, status, direction, residual, fresh_residual,
        [n for n, t in zip(names, tangential) if t], is_abelian(K),
    )


@dataclass(frozen=True)
class Cell:
    model: GroupModel
    tag: str
    params: tuple
    status: str
    direction: dict


def theorem_cells() -> list[Cell]:
    """Representative cells of the classification with the expected outcome."""
    cells = []
    for lam in (1.0, -0.5):
        m = s3_lambda(lam)
        cells += [Cell(m, "K0", (), "translator", {"E3~": 2 * lam}),
                  Cell(m, "K_a", (0.0,), "minimal", {}),
                  Cell(m, "K_a", (1.0,), "none", {})]
    m = s3_lambda(0.0)
    cells += [Cell(m, "K0", (), "minimal", {}), Cell(m, "K_a", (1.0,), "minimal", {})]
    for l1, l2 in ((1.0, 2.0), (2.0, -0.5)):
        m = s3_lambda1_lambda2(l1, l2)
        cells += [Cell(m, "K0", (), "translator", {"E3~": l1 + l2}),
                  Cell(m, "K1_b", (0.0,), "minimal", {}),
                  Cell(m, "K1_b", (1.0,), "none", {}),
                  Cell(m, "K2_a", (0.0,), "minimal", {}),
                  Cell(m, "K2_a", (1.0,), "none", {})]
    m = s3_lambda1_lambda2(1.0, -1.0)
    cells += [Cell(m, "K0", (), "minimal", {}), Cell(m, "K1_b", (2.0,), "minimal", {})]
    for l1 in (1.0, -2.0):
        m = s3_lambda1_lambda2(l1, 0.0)
        cells += [Cell(m, "K0", (), "translator", {"E3~": l1}),
                  Cell(m, "K1_b", (0.0,), "minimal", {}),
                  Cell(m, "K1_b", (3.0,), "translator", {"E2~": -l1 * 3.0}),
                  Cell(m, "K2_a", (0.0,), "minimal", {}),
                  Cell(m, "K2_a", (1.0,), "none", {})]
    for lam in (1.0, -0.7):
        m = s3_lambda1_lambda2(lam, lam)
        cells += [Cell(m, "K0", (), "translator", {"E3~": 2 * lam}),
                  Cell(m, "K3_cd", (1.5, 0.0), "minimal", {}),
                  Cell(m, "K3_cd", (1.0, 1.0), "none", {}),
                  Cell(m, "K4_ef", (-1.0, 0.0), "minimal", {}),
                  Cell(m, "K4_ef", (1.0, 1.0), "none", {})]
    for lam in (1.0, 0.4):
        cells.append(Cell(s3p_lambda(lam), "K0", (), "translator", {"E3~": 2 * lam}))
    cells.append(Cell(s3p_lambda(0.0), "K0", (), "minimal", {}))
    cells.append(Cell(g4_model(), "G4_H3", (), "translator", {"E0~": 2.0}))
    return cells


def cell_matches(cell: Cell, report: TranslatorReport, tol: float = TRANSLATOR_TOL) -> bool:
    if report.status != cell.status:
        return False
    keys = set(cell.direction) | set(report.direction)
    return all(abs(report.coefficient(k) - cell.direction.get(k, 0.0)) < tol for k in keys)


def theorem_table(seed: int = 0) -> list[tuple[Cell, TranslatorReport, bool]]:
    out = []
    for cell in theorem_cells():
        K = subalgebra(cell.model.algebra, cell.tag, cell.params)
        rep = translator_solve(cell.model, K, seed=seed)
        out.append((cell, rep, cell_matches(cell, rep)))
    return out


@dataclass
class EquivalenceCheck:
    holds_3d: bool
    exceptions: list

    def to_dict(self) -> dict:
        return {"holds_3d": self.holds_3d, "exceptions": self.exceptions}


def abelian_iff_translator_check(seed: int = 0) -> EquivalenceCheck:
    """Test ``status in {translator, minimal}  <=>  abelian or H = 0`` over the classification cells.

    Every cell where the equivalence fails is listed; the G4 cell is the
    expected four-dimensional exception. ``holds_3d`` is True when no
    three-dimensional cell fails.
    """
    exceptions = []
    for cell, rep, _ in theorem_table(seed):
        lhs = rep.status in ("translator", "minimal")
        rhs = rep.abelian or abs(rep.H) < MINIMAL_TOL
        if lhs != rhs:
            exceptions.append({
                "model": rep.model, "family_tag": rep.family_tag, "family_params": list(rep.family_params),
                "status": rep.status, "abelian": rep.abelian, "H": rep.H,
                "dimension": cell.model.dim,
            })
    holds = not any(e["dimension"] == 3 for e in exceptions)
    return EquivalenceCheck(holds, exceptions)


def reports_to_json(reports) -> str:
    return json.dumps([r.to_dict() for r in reports], indent=2)
