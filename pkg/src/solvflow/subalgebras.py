"""Two-dimensional subalgebras of the three-dimensional algebras and the H3 ideal of g4.

Families are stored as ordered bases depending on real parameters, together
with a reference normal direction used to orient the unit normal the same
way for every parameter value. :func:`random_search_verify` checks the
catalogue against an independent search over pencils of planes.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import lie_core
from .group_atlas import Family, GroupModel
from .lie_core import LieAlgebra, bracket

INDEPENDENCE_TOL = 1e-9
CLOSURE_TOL = 1e-10
MATCH_TOL = 1e-6
# closure is quadratic in the plane, so a defect eps allows a plane error ~ sqrt(eps)
SEARCH_CLOSURE_TOL = 1e-13


def _gram_schmidt(A: LieAlgebra, vectors) -> np.ndarray:
    out = []
    for v in np.asarray(vectors, dtype=float):
        w = v - sum(A.inner(v, e) * e for e in out)
        out.append(w / A.norm(w))
    return np.array(out)


def _independent(vectors) -> bool:
    s = np.linalg.svd(np.atleast_2d(vectors), compute_uv=False)
    return bool(s[-1] > INDEPENDENCE_TOL * max(1.0, s[0]))


def closure_defect(A: LieAlgebra, *vectors) -> float:
    """Largest metric norm of a pairwise bracket after projecting off the span.

    Zero exactly when the vectors span a subalgebra.
    """
    V = np.array([np.asarray(v, dtype=float) for v in vectors])
    lie_core._check(A, *V)
    if len(V) < 2 or not _independent(V):
        raise ValueError("closure_defect needs at least two linearly independent vectors")
    Q = _gram_schmidt(A, V)
    worst = 0.0
    for i in range(len(V)):
        for j in range(i + 1, len(V)):
            w = bracket(A, V[i], V[j])
            w = w - sum(A.inner(w, q) * q for q in Q)
            worst = max(worst, A.norm(w))
    return worst


def rref(basis, tol: float = INDEPENDENCE_TOL) -> np.ndarray:
    """Reduced row echelon form of the rows of ``basis``; a canonical basis of the span."""
    M = np.array(basis, dtype=float)
    rows, cols = M.shape
    r = 0
    for c in range(cols):
        if r == rows:
            break
        piv = r + int(np.argmax(np.abs(M[r:, c])))
        if abs(M[piv, c]) <= tol:
            continue
        M[[r, piv]] = M[[piv, r]]
        M[r] /= M[r, c]
        for i in range(rows):
            if i != r:
                M[i] -= M[i, c] * M[r]
        r += 1
    return M


def plucker(basis) -> np.ndarray:
    """Normalised Plücker coordinates of a 2-plane (rows of ``basis``), sign-canonical.

    Works on stacks of planes, shape (..., 2, n).
    """
    B = np.asarray(basis, dtype=float)
    n = B.shape[-1]
    iu, ju = np.triu_indices(n, 1)
    X, Y = B[..., 0, :], B[..., 1, :]
    P = X[..., iu] * Y[..., ju] - X[..., ju] * Y[..., iu]
    P = P / np.linalg.norm(P, axis=-1, keepdims=True)
    lead = np.take_along_axis(P, np.argmax(np.abs(P) > 1e-12, axis=-1)[..., None], -1)
    return P * np.sign(lead)


def plucker_distance(P, Q) -> np.ndarray:
    return np.minimum(np.linalg.norm(P - Q, axis=-1), np.linalg.norm(P + Q, axis=-1))


@dataclass(frozen=True, eq=False)
class Subalgebra:
    parent: LieAlgebra
    basis: np.ndarray
    family_tag: str = ""
    params: tuple = ()
    orientation: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        B = np.atleast_2d(np.array(self.basis, dtype=float))
        lie_core._check(self.parent, *B)
        if not _independent(B):
            raise ValueError(f"{self.family_tag}: basis is not linearly independent")
        defect = closure_defect(self.parent, *B)
        if defect > CLOSURE_TOL * max(1.0, np.abs(B).max() ** 2):
            raise ValueError(f"{self.family_tag}{self.params}: span is not a subalgebra (defect {defect:.3g})")
        B.setflags(write=False)
        object.__setattr__(self, "basis", B)
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def codim(self) -> int:
        return self.parent.dim - self.dim

    def closure_defect(self) -> float:
        return closure_defect(self.parent, *self.basis)

    def canonical_basis(self) -> np.ndarray:
        return rref(self.basis)

    def to_dict(self) -> dict:
        return {
            "algebra": self.parent.name,
            "algebra_params": list(self.parent.params),
            "family_tag": self.family_tag,
            "basis": self.basis.tolist(),
            "params": list(self.params),
            "abelian": is_abelian(self),
            "closure_defect": self.closure_defect(),
        }


def is_abelian(K: Subalgebra, tol: float = 1e-12) -> bool:
    B = K.basis
    scale = max(1.0, np.abs(B).max() ** 2)
    return all(
        np.abs(bracket(K.parent, B[i], B[j])).max() < tol * scale
        for i in range(len(B)) for j in range(i + 1, len(B))
    )


def is_nilpotent_2step(K: Subalgebra, tol: float = 1e-12) -> bool:
    """True when every double bracket ``[X, [Y, Z]]`` of basis vectors vanishes (step <= 2)."""
    A, B = K.parent, K.basis
    scale = max(1.0, np.abs(B).max() ** 3)
    for X in B:
        for Y in B:
            for Z in B:
                if np.abs(bracket(A, X, bracket(A, Y, Z))).max() > tol * scale:
                    return False
    return True


# ---------------------------------------------------------------------------
# families
# ---------------------------------------------------------------------------

def _phi(lam, z):
    """``(e^{lam z} - 1)/lam`` with its limit ``z`` at ``lam = 0``."""
    z = np.asarray(z, dtype=float)
    if lam == 0:
        return z
    return np.expm1(lam * z) / lam


@dataclass(frozen=True, eq=False)
class SubalgebraFamily:
    """Basis ``B0 + sum_k params[k] * Bk[k]`` with a reference normal ``N0 + sum_k params[k] * Nk[k]``."""

    tag: str
    parent: LieAlgebra
    param_names: tuple
    B0: np.ndarray
    Bk: np.ndarray
    N0: np.ndarray | None = None
    Nk: np.ndarray | None = None
    abelian_label: bool | None = None

    @property
    def nparams(self) -> int:
        return len(self.param_names)

    def basis(self, params=()) -> np.ndarray:
        if not self.nparams:
            return self.B0.copy()
        t = np.asarray(params, dtype=float)
        return self.B0 + np.tensordot(t, self.Bk, axes=([-1], [0]))

    def normal_hint(self, params=()) -> np.ndarray | None:
        if self.N0 is None:
            return None
        t = np.asarray(params, dtype=float)
        return self.N0 + (t @ self.Nk if self.nparams else 0.0)

    def instantiate(self, params=()) -> Subalgebra:
        params = tuple(float(p) for p in params)
        if len(params) != self.nparams:
            raise ValueError(f"{self.tag} takes parameters {self.param_names}")
        return Subalgebra(self.parent, self.basis(params), self.tag, params, self.normal_hint(params))

    def fit(self, normals: np.ndarray):
        """Best parameters for planes given by Euclidean annihilators ``normals`` (N, n).

        Returns ``(params, distance)`` where distance is between Plücker coordinates.
        """
        N = np.asarray(normals, dtype=float)
        if self.nparams:
            # n . (B0 + t Bk) = 0 for both basis rows: linear in t
            M = np.einsum("ni,pki->nkp", N, self.Bk)
            r = -np.einsum("ni,ki->nk", N, self.B0)
            t = np.einsum("npk,nk->np", np.linalg.pinv(M), r)
        else:
            t = np.zeros((len(N), 0))
        dist = self._distance(N, t)
        return t, dist

    def _distance(self, N, t):
        B = self.B0 + np.einsum("np,pki->nki", t, self.Bk) if self.nparams else np.broadcast_to(self.B0, (len(N),) + self.B0.shape)
        plane = _planes_from_normals(N)
        return plucker_distance(plucker(plane), plucker(B))


class _RhoFamily(SubalgebraFamily):
    """The sl2 family ``{rho E2 + E3/rho, E1 + rho E2 - E3/rho}``, rho != 0."""

    def basis(self, params=()) -> np.ndarray:
        (rho,) = np.asarray(params, dtype=float)
        return np.array([[0.0, rho, 1 / rho], [1.0, rho, -1 / rho]])

    def instantiate(self, params=()) -> Subalgebra:
        (rho,) = params
        if rho == 0:
            raise ValueError("SL2_K3_rho needs rho != 0")
        return Subalgebra(self.parent, self.basis(params), self.tag, (rho,), None)

    def fit(self, normals):
        N = np.asarray(normals, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            # affine in (p, q) = (rho, 1/rho): p n2 + q n3 = 0, n1 + p n2 - q n3 = 0
            p = -N[:, 0] / (2 * N[:, 1])
            q = N[:, 0] / (2 * N[:, 2])
            cands = np.stack([p, 1 / q], -1)
        best_t = np.full(len(N), np.nan)
        best_d = np.full(len(N), np.inf)
        plane = plucker(_planes_from_normals(N))
        for j in range(2):
            rho = cands[:, j]
            ok = np.isfinite(rho) & (rho != 0)
            if not ok.any():
                continue
            r = rho[ok]
            B = np.stack([
                np.stack([0 * r, r, 1 / r], -1),
                np.stack([np.ones_like(r), r, -1 / r], -1),
            ], -2)
            d = np.full(len(N), np.inf)
            d[ok] = plucker_distance(plane[ok], plucker(B))
            better = d < best_d
            best_d[better] = d[better]
            best_t[better] = rho[better]
        return best_t[:, None], best_d


def _planes_from_normals(N: np.ndarray) -> np.ndarray:
    """Orthonormal bases (N, 2, 3) of the Euclidean complements of 3-vectors."""
    N = N / np.linalg.norm(N, axis=-1, keepdims=True)
    trial = np.where(np.abs(N[:, :1]) < 0.9, np.array([1.0, 0, 0]), np.array([0, 1.0, 0]))
    a = np.cross(N, trial)
    a /= np.linalg.norm(a, axis=-1, keepdims=True)
    b = np.cross(N, a)
    return np.stack([a, b], -2)


def _e(n, *pairs):
    v = np.zeros(n)
    for i, c in pairs:
        v[i] += c
    return v


def _affine(tag, A, names, B0, Bk=(), N0=None, Nk=(), abelian=None):
    n = A.dim
    B0 = np.array(B0, dtype=float)
    Bk = np.array(Bk, dtype=float).reshape(len(names), *B0.shape)
    N0 = None if N0 is None else np.array(N0, dtype=float)
    Nk = None if N0 is None else np.array(Nk, dtype=float).reshape(len(names), n)
    return SubalgebraFamily(tag, A, tuple(names), B0, Bk, N0, Nk, abelian)


def catalogue_subalgebras(A: LieAlgebra) -> list[SubalgebraFamily]:
    """Closed-form families of 2D subalgebras (codimension one for g4), keyed by ``A.name``."""
    E = lambda *pairs: _e(A.dim, *pairs)  # noqa: E731
    e1, e2, e3 = E((0, 1)), E((1, 1)), E((2, 1 if A.dim == 3 else 0))
    z = np.zeros(A.dim)
    name = A.name
    if name in ("r3[λ]", "h3"):
        lam = A.params[0] if A.params else 0.0
        return [
            _affine("K0", A, (), [e1, e2], N0=e3, abelian=True),
            # {E3 + a E2, E1}; normal a E3 - E2
            _affine("K_a", A, ("a",), [e3, e1], [[e2, z]], N0=-e2, Nk=[e3], abelian=(lam == 0)),
        ]
    if name == "r3[λ1,λ2]":
        l1, l2 = A.params
        fams = [_affine("K0", A, (), [e1, e2], N0=e3, abelian=True)]
        if l1 != l2:
            fams += [
                _affine("K1_b", A, ("b",), [e1, e3], [[z, e2]], N0=-e2, Nk=[e3], abelian=False),
                _affine("K2_a", A, ("a",), [e3, e2], [[e1, z]], N0=-e1, Nk=[e3], abelian=(l2 == 0)),
            ]
        else:
            fams += [
                _affine("K3_cd", A, ("c", "d"), [e1, e3], [[e2, z], [z, e2]], N0=-e2, Nk=[e1, e3], abelian=False),
                _affine("K4_ef", A, ("e", "f"), [e2, e3], [[e1, z], [z, e1]], N0=-e1, Nk=[e2, e3], abelian=False),
            ]
        return fams
    if name == "r3p[λ]":
        return [_affine("K0", A, (), [e1, e2], N0=e3, abelian=True)]
    if name == "sl2":
        rho = _RhoFamily("SL2_K3_rho", A, ("rho",), np.zeros((2, 3)), np.zeros((1, 2, 3)), abelian_label=False)
        return [
            _affine("SL2_K1", A, (), [e1, e3], abelian=False),
            _affine("SL2_K2", A, (), [e1, e2], abelian=False),
            rho,
        ]
    if name == "su2":
        return []
    if name == "g4":
        return [_affine("G4_H3", A, (), [E((1, 1)), E((2, 1)), E((3, 1))], N0=E((0, 1)), abelian=False)]
    raise KeyError(f"no subalgebra catalogue for algebra {name!r}")


def family(A: LieAlgebra, tag: str) -> SubalgebraFamily:
    for f in catalogue_subalgebras(A):
        if f.tag == tag:
            return f
    raise KeyError(f"{A.name}{A.params} has no family {tag!r}")


def subalgebra(A: LieAlgebra, tag: str, params=()) -> Subalgebra:
    return family(A, tag).instantiate(params)


def to_json(subs) -> str:
    return json.dumps([K.to_dict() for K in subs], indent=2)


# ---------------------------------------------------------------------------
# subgroups in coordinates
# ---------------------------------------------------------------------------

def subgroup_embedding(model: GroupModel, K: Subalgebra):
    """Coordinate parametrisation ``(u, v[, w]) -> point`` of the connected subgroup of K."""
    tag, P = K.family_tag, K.params
    fam = model.family
    if fam is Family.G4:
        if tag != "G4_H3":
            raise ValueError(f"no embedding for {tag} in G4")
        return lambda u, v, w: np.stack(np.broadcast_arrays(0.0 * u, u, v, w), -1)
    if tag == "K0":
        return lambda u, v: np.stack(np.broadcast_arrays(u, v, 0.0 * u), -1)
    if fam is Family.S3_lambda and tag == "K_a":
        (lam,), (a,) = model.params, P
        return lambda u, v: np.stack(np.broadcast_arrays(u, a * _phi(lam, v), v), -1)
    if fam is Family.S3_lambda1_lambda2:
        l1, l2 = model.params
        if tag == "K1_b":
            (b,) = P
            return lambda u, v: np.stack(np.broadcast_arrays(u, b * _phi(l2, v), v), -1)
        if tag == "K2_a":
            (a,) = P
            return lambda u, v: np.stack(np.broadcast_arrays(a * _phi(l1, v), u, v), -1)
        if tag == "K3_cd":
            c, d = P
            return lambda u, v: np.stack(np.broadcast_arrays(u, c * u + d * _phi(l1, v), v), -1)
        if tag == "K4_ef":
            e, f = P
            return lambda u, v: np.stack(np.broadcast_arrays(e * u + f * _phi(l1, v), u, v), -1)
    raise ValueError(f"no coordinate embedding for {tag} in {model}")


# ---------------------------------------------------------------------------
# independent search
# ---------------------------------------------------------------------------

def _bracket_form(A: LieAlgebra) -> np.ndarray:
    """Matrix B with ``[X, Y] = B (X x Y)``; the plane with annihilator n closes iff n.B n = 0."""
    C = A.structure
    B = np.stack([C[1, 2], C[2, 0], C[0, 1]], -1)
    return 0.5 * (B + B.T)


@dataclass
class SearchReport:
    algebra: str
    params: tuple
    trials: int
    random_planes_closed: int
    found: int
    degenerate_pencils: int
    matched: dict
    unmatched: list

    @property
    def ok(self) -> bool:
        return not self.unmatched

    def to_dict(self) -> dict:
        return {
            "algebra": self.algebra, "params": list(self.params), "trials": self.trials,
            "random_planes_closed": self.random_planes_closed, "found": self.found,
            "degenerate_pencils": self.degenerate_pencils, "matched": self.matched,
            "unmatched": [list(map(float, n)) for n in self.unmatched[:20]],
            "n_unmatched": len(self.unmatched),
        }


def random_search_verify(A: LieAlgebra, trials: int = 100_000, seed: int = 0, families=None) -> SearchReport:
    """Search for 2D subalgebras independently of the catalogue and match them to it.

    Two samplers run ``trials`` times each. Uniformly random planes are tested
    directly (these close only in degenerate algebras). For a random vector u,
    the pencil of planes through u is solved exactly for closing members:
    with annihilators ``n(phi) = cos(phi) a + sin(phi) b`` the closure
    condition is a trigonometric quadratic in phi. Every closing plane must lie
    within ``MATCH_TOL`` (Plücker distance) of a catalogued family.
    """
    if A.dim != 3:
        raise ValueError("random_search_verify covers three-dimensional algebras")
    if families is None:
        families = catalogue_subalgebras(A)
    rng = np.random.default_rng(seed)
    Q = _bracket_form(A)
    scale = max(1.0, np.abs(Q).max())

    # uniformly random planes
    N_rand = rng.standard_normal((trials, 3))
    N_rand /= np.linalg.norm(N_rand, axis=1, keepdims=True)
    q_rand = np.abs(np.einsum("ni,ij,nj->n", N_rand, Q, N_rand))
    rand_closed = q_rand < SEARCH_CLOSURE_TOL * scale
    candidates = [N_rand[rand_closed]]

    # pencils through random vectors
    U = rng.standard_normal((trials, 3))
    ab = _planes_from_normals(U)  # orthonormal basis of u-perp: annihilators of planes containing u
    a, b = ab[:, 0], ab[:, 1]
    qaa = np.einsum("ni,ij,nj->n", a, Q, a)
    qbb = np.einsum("ni,ij,nj->n", b, Q, b)
    qab = np.einsum("ni,ij,nj->n", a, Q, b)
    mean = 0.5 * (qaa + qbb)
    amp = np.hypot(0.5 * (qaa - qbb), qab)
    delta = np.arctan2(qab, 0.5 * (qaa - qbb))
    degenerate = amp + np.abs(mean) < 1e-12 * scale
    ratio = np.where(amp > 0, -mean / np.where(amp > 0, amp, 1.0), np.inf)
    near = np.abs(np.abs(ratio) - 1.0) < SEARCH_CLOSURE_TOL
    ratio = np.where(near, np.sign(ratio), ratio)
    solvable = ~degenerate & (np.abs(ratio) <= 1.0)
    base = np.arccos(np.clip(ratio[solvable], -1, 1))
    phis = [(delta[solvable] + base) / 2, (delta[solvable] - base) / 2]
    for phi in phis:
        n = np.cos(phi)[:, None] * a[solvable] + np.sin(phi)[:, None] * b[solvable]
        candidates.append(n)
    phi_deg = rng.uniform(0, np.pi, degenerate.sum())
    candidates.append(np.cos(phi_deg)[:, None] * a[degenerate] + np.sin(phi_deg)[:, None] * b[degenerate])

    N = np.concatenate(candidates)
    N /= np.linalg.norm(N, axis=1, keepdims=True)
    # confirm closure through the bracket directly (defect equals |n.Q n| for unit n)
    defect = np.abs(np.einsum("ni,ij,nj->n", N, Q, N))
    N = N[defect < SEARCH_CLOSURE_TOL]

    best = np.full(len(N), np.inf)
    which = np.full(len(N), -1)
    for k, fam in enumerate(families):
        _, d = fam.fit(N)
        better = d < best
        best[better] = d[better]
        which[better] = k
    ok = best < MATCH_TOL
    matched = {fam.tag: int(np.sum(ok & (which == k))) for k, fam in enumerate(families)}
    return SearchReport(
        algebra=A.name,
        params=A.params,
        trials=trials,
        random_planes_closed=int(rand_closed.sum()),
        found=int(len(N)),
        degenerate_pencils=int(degenerate.sum()),
        matched=matched,
        unmatched=list(N[~ok]),
    )
