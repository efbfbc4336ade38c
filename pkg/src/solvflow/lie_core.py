"""Structure-constant Lie algebras with a left-invariant inner product.

A :class:`LieAlgebra` stores ``C[i, j, k]`` with ``[E_i, E_j] = sum_k C[i, j, k] E_k``
and a Gram matrix ``metric`` for the frame ``{E_i}``. Vectors are plain
numpy arrays of frame coefficients.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property

import numpy as np

JACOBI_TOL = 1e-12
UNIMODULAR_TOL = 1e-12
RANK_RTOL = 1e-9


class DimensionError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class LieAlgebra:
    structure: np.ndarray
    metric: np.ndarray = None
    name: str = ""
    params: tuple = ()

    def __post_init__(self):
        C = np.array(self.structure, dtype=float)
        n = C.shape[0]
        if C.shape != (n, n, n):
            raise DimensionError(f"structure must be n x n x n, got {C.shape}")
        G = np.eye(n) if self.metric is None else np.array(self.metric, dtype=float)
        if G.shape != (n, n):
            raise DimensionError(f"metric must be {n} x {n}")
        C.setflags(write=False)
        G.setflags(write=False)
        object.__setattr__(self, "structure", C)
        object.__setattr__(self, "metric", G)
        if np.max(np.abs(C + C.transpose(1, 0, 2)), initial=0.0) > JACOBI_TOL:
            raise ValueError("structure constants are not antisymmetric")
        if np.max(np.abs(G - G.T)) > 1e-14 or np.linalg.eigvalsh(G).min() <= 0:
            raise ValueError("metric must be symmetric positive definite")
        if jacobi_residual(self) > JACOBI_TOL * max(1.0, np.abs(C).max(initial=0.0) ** 2):
            raise ValueError("structure constants violate the Jacobi identity")

    @property
    def dim(self) -> int:
        return self.structure.shape[0]

    def basis(self, i: int) -> np.ndarray:
        e = np.zeros(self.dim)
        e[i] = 1.0
        return e

    def inner(self, u, v) -> float:
        return float(np.asarray(u) @ self.metric @ np.asarray(v))

    def norm(self, u) -> float:
        return float(np.sqrt(self.inner(u, u)))

    @cached_property
    def christoffel(self) -> np.ndarray:
        """``Gamma[a, b] = nabla_{E_a} E_b`` as frame coefficients, shape (n, n, n)."""
        n = self.dim
        out = np.empty((n, n, n))
        for a in range(n):
            for b in range(n):
                out[a, b] = nabla(self, self.basis(a), self.basis(b))
        out.setflags(write=False)
        return out


def _check(A: LieAlgebra, *vectors):
    out = []
    for v in vectors:
        v = np.asarray(v, dtype=float)
        if v.shape[-1:] != (A.dim,):
            raise DimensionError(f"expected vector of length {A.dim}, got shape {v.shape}")
        out.append(v)
    return out


def bracket(A: LieAlgebra, u, v) -> np.ndarray:
    u, v = _check(A, u, v)
    return np.einsum("...i,...j,ijk->...k", u, v, A.structure)


def ad_matrix(A: LieAlgebra, u) -> np.ndarray:
    """Matrix of ``ad(u)``; column ``j`` is ``[u, E_j]``."""
    (u,) = _check(A, u)
    return np.einsum("i,ijk->kj", u, A.structure)


def ad_transpose(A: LieAlgebra, u) -> np.ndarray:
    """Adjoint of ``ad(u)`` with respect to ``A.metric``: ``G^-1 ad(u)^T G``."""
    G = A.metric
    return np.linalg.solve(G, ad_matrix(A, u).T @ G)


def nabla(A: LieAlgebra, u, v) -> np.ndarray:
    """Levi-Civita covariant derivative of left-invariant fields (Koszul formula)."""
    u, v = _check(A, u, v)
    return 0.5 * (bracket(A, u, v) - ad_transpose(A, u) @ v - ad_transpose(A, v) @ u)


def jacobi_residual(A: LieAlgebra) -> float:
    C = A.structure
    # [[E_i,E_j],E_k] coefficients: C[i,j,m] C[m,k,l]
    J = np.einsum("ijm,mkl->ijkl", C, C)
    cyc = J + J.transpose(1, 2, 0, 3) + J.transpose(2, 0, 1, 3)
    return float(np.abs(cyc).max(initial=0.0))


def is_unimodular(A: LieAlgebra, tol: float = UNIMODULAR_TOL) -> bool:
    traces = np.einsum("ijj->i", A.structure)
    return bool(np.all(np.abs(traces) < tol))


def span_basis(vectors, rtol: float = RANK_RTOL) -> np.ndarray:
    """Orthonormal (Euclidean) basis of the span of the rows of ``vectors``."""
    V = np.atleast_2d(np.asarray(vectors, dtype=float))
    if V.size == 0:
        return np.zeros((0, V.shape[-1]))
    _, s, vt = np.linalg.svd(V, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((0, V.shape[1]))
    rank = int(np.sum(s > rtol * s[0]))
    return vt[:rank]


def derived_series(A: LieAlgebra, max_steps: int = 10) -> list[int]:
    """Dimensions of ``D^0 ⊇ D^1 ⊇ ...``, stopping at 0 or when the series stabilises."""
    current = np.eye(A.dim)
    dims = [A.dim]
    for _ in range(max_steps):
        brackets = [bracket(A, x, y) for i, x in enumerate(current) for y in current[i + 1:]]
        current = span_basis(brackets) if brackets else np.zeros((0, A.dim))
        dims.append(current.shape[0])
        if dims[-1] == 0 or dims[-1] == dims[-2]:
            break
    return dims


def is_solvable(A: LieAlgebra) -> bool:
    return derived_series(A)[-1] == 0


# ---------------------------------------------------------------------------
# catalogue
# ---------------------------------------------------------------------------

def _from_brackets(n: int, brackets: dict, name: str, params=()) -> LieAlgebra:
    """Build from ``{(i, j): {k: c}}`` (0-based indices)."""
    C = np.zeros((n, n, n))
    for (i, j), out in brackets.items():
        for k, c in out.items():
            C[i, j, k] += c
            C[j, i, k] -= c
    return LieAlgebra(C, name=name, params=tuple(float(p) for p in params))


def r3_lambda(lam: float) -> LieAlgebra:
    # [E3,E1] = lam E1, [E3,E2] = E1 + lam E2
    return _from_brackets(3, {(2, 0): {0: lam}, (2, 1): {0: 1.0, 1: lam}}, "r3[λ]", (lam,))


def r3_lambda1_lambda2(lam1: float, lam2: float) -> LieAlgebra:
    if lam1 == 0:
        raise ValueError("r3[λ1,λ2] requires λ1 != 0")
    return _from_brackets(3, {(2, 0): {0: lam1}, (2, 1): {1: lam2}}, "r3[λ1,λ2]", (lam1, lam2))


def r3p_lambda(lam: float) -> LieAlgebra:
    # [E3,E1] = lam E1 - E2, [E3,E2] = E1 + lam E2
    return _from_brackets(3, {(2, 0): {0: lam, 1: -1.0}, (2, 1): {0: 1.0, 1: lam}}, "r3p[λ]", (lam,))


def heisenberg() -> LieAlgebra:
    A = r3_lambda(0.0)
    return LieAlgebra(A.structure, name="h3")


def sl2() -> LieAlgebra:
    # [E3,E2] = E1, [E1,E3] = 2 E3, [E1,E2] = -2 E2
    return _from_brackets(3, {(2, 1): {0: 1.0}, (0, 2): {2: 2.0}, (0, 1): {1: -2.0}}, "sl2")


def su2() -> LieAlgebra:
    # [E3,E2] = -E1, [E1,E2] = E3, [E1,E3] = -E2
    return _from_brackets(3, {(2, 1): {0: -1.0}, (0, 1): {2: 1.0}, (0, 2): {1: -1.0}}, "su2")


def g4() -> LieAlgebra:
    """R ⋉ H3 with basis E0..E3: [E0,E1]=E1/2, [E0,E2]=E2/2, [E0,E3]=E3, [E1,E2]=E3."""
    return _from_brackets(
        4, {(0, 1): {1: 0.5}, (0, 2): {2: 0.5}, (0, 3): {3: 1.0}, (1, 2): {3: 1.0}}, "g4"
    )


def abelian(n: int = 3) -> LieAlgebra:
    return LieAlgebra(np.zeros((n, n, n)), name=f"R{n}")


_KEYS = {
    "r3[λ]": (r3_lambda, 1),
    "r3[λ1,λ2]": (r3_lambda1_lambda2, 2),
    "r3p[λ]": (r3p_lambda, 1),
    "h3": (heisenberg, 0),
    "sl2": (sl2, 0),
    "su2": (su2, 0),
    "g4": (g4, 0),
}
_ALIASES = {"l": "λ", "lambda": "λ", "l1": "λ1", "l2": "λ2", "lambda1": "λ1", "lambda2": "λ2"}


def canonical_key(key: str) -> str:
    key = key.replace(" ", "")
    m = re.fullmatch(r"(r3p?)\[(.*)\]", key)
    if m:
        slots = [_ALIASES.get(s, s) for s in m.group(2).split(",")]
        key = f"{m.group(1)}[{','.join(slots)}]"
    if key not in _KEYS:
        raise KeyError(f"unknown algebra key {key!r}; known: {sorted(_KEYS)}")
    return key


def algebra(key: str, params=()) -> LieAlgebra:
    """Look up a catalogued algebra, e.g. ``algebra("r3[λ1,λ2]", (1, 2))``."""
    key = canonical_key(key)
    ctor, nparams = _KEYS[key]
    params = tuple(params)
    if len(params) != nparams:
        raise ValueError(f"{key} takes {nparams} parameter(s), got {len(params)}")
    return ctor(*params)


def catalogue_keys() -> list[str]:
    return list(_KEYS)
