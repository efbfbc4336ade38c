"""Mean curvature flow of subgroups: closed-form evolutions, a pointwise verifier and an explicit integrator.

Surfaces are coordinate patches ``phi(u, v[, w])`` in a group model. Tangent
vectors are converted to frame coefficients ``c = F^-1 tau``, so covariant
derivatives only need the coframe derivative and the algebra connection:

    nabla_{tau_i} tau_j = (d_i c_j)^a E_a + c_i^b c_j^a nabla_{E_b} E_a.

Mean curvature uses the inverse first fundamental form,
``H = -g^{ij} g(nabla_{tau_i} tau_j, nu)``, so it equals ``-trace ad(nu)`` on a subgroup.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import sympy as sp

from .curvature import mean_curvature_trace, orient
from .group_atlas import Family, GroupModel, coframe, coframe_derivative, frame
from .killing import REGIME_TOL
from .subalgebras import Subalgebra, subalgebra

FLOW_TOL = 1e-6
IMMERSION_TOL = 1e-12
DIFFUSION_LIMIT = 0.5


# ---------------------------------------------------------------------------
# patch geometry
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PatchGeometry:
    """Pointwise extrinsic data; leading axes are the node axes."""

    first: np.ndarray      # (..., k, k)
    second: np.ndarray     # (..., k, k), g(nabla_{tau_i} tau_j, nu)
    normal: np.ndarray     # (..., n) frame coefficients of the unit normal
    H: np.ndarray          # (...,)

    @property
    def det_first(self) -> np.ndarray:
        return np.linalg.det(self.first)


def _annihilators(C: np.ndarray) -> np.ndarray:
    """Cofactor normals of k = n-1 row vectors, vectorised: C has shape (..., k, n)."""
    n = C.shape[-1]
    out = np.empty(C.shape[:-2] + (n,))
    for a in range(n):
        e = np.zeros(C.shape[:-2] + (1, n))
        e[..., 0, a] = 1.0
        out[..., a] = np.linalg.det(np.concatenate([e, C], axis=-2))
    return out


def patch_geometry(m: GroupModel, points, tau, tau2, hint=None) -> PatchGeometry:
    """Fundamental forms, normal and H from coordinate derivatives of a patch.

    ``tau[..., i, :]`` is ``d_i phi`` and ``tau2[..., i, j, :]`` is ``d_i d_j phi``.
    """
    A = m.algebra
    Gm = A.metric
    Finv = coframe(m, points)
    dFinv = coframe_derivative(m, points)                      # (..., k_coord, n, n)
    c = np.einsum("...ab,...ib->...ia", Finv, tau)             # (..., k, n)
    # derivative of the coframe along tau_i: sum_q tau_i^q d_q Finv
    dF_along = np.einsum("...iq,...qab->...iab", tau, dFinv)   # (..., k, n, n)
    dc = np.einsum("...iab,...jb->...ija", dF_along, tau) + np.einsum("...ab,...ijb->...ija", Finv, tau2)
    conn = np.einsum("...ib,...ja,bak->...ijk", c, c, A.christoffel)
    cov = dc + conn                                            # (..., k, k, n)

    first = np.einsum("...ia,ab,...jb->...ij", c, Gm, c)
    n_cov = _annihilators(c)
    nu = np.einsum("ab,...b->...a", np.linalg.inv(Gm), n_cov)
    nu = nu / np.sqrt(np.einsum("...a,ab,...b->...", nu, Gm, nu))[..., None]
    if hint is not None:
        s = np.sign(np.einsum("...a,ab,b->...", nu, Gm, np.asarray(hint, dtype=float)))
        s = np.where(s == 0, 1.0, s)
        nu = nu * s[..., None]
    else:
        flat = nu.reshape(-1, nu.shape[-1])
        nu = np.array([orient(v) for v in flat]).reshape(nu.shape)
    second = np.einsum("...ija,ab,...b->...ij", cov, Gm, nu)
    H = -np.einsum("...ij,...ij->...", np.linalg.inv(first), second)
    return PatchGeometry(first, second, nu, H)


def normal_velocity(m: GroupModel, points, velocity, normal) -> np.ndarray:
    """``g(dphi/dt, nu)`` with nu given by frame coefficients."""
    Finv = coframe(m, points)
    w = np.einsum("...ab,...b->...a", Finv, velocity)
    return np.einsum("...a,ab,...b->...", w, m.algebra.metric, normal)


@dataclass
class SurfacePatch:
    """A grid-sampled patch. ``tau``/``tau2`` hold analytic derivatives when available."""

    model: GroupModel
    axes: tuple
    points: np.ndarray
    hint: np.ndarray | None = None
    tau: np.ndarray | None = None
    tau2: np.ndarray | None = None

    @property
    def shape(self) -> tuple:
        return self.points.shape[:-1]

    @property
    def spacing(self) -> tuple:
        return tuple(float(a[1] - a[0]) for a in self.axes)

    def interior(self) -> tuple:
        return tuple(slice(1, -1) for _ in self.axes)


def grid_derivatives(points: np.ndarray, spacing) -> tuple[np.ndarray, np.ndarray]:
    """Central-difference first and second derivatives at interior nodes."""
    k = len(spacing)
    inner = tuple(slice(1, -1) for _ in range(k))

    def shifted(offsets):
        return points[tuple(slice(1 + o, points.shape[i] - 1 + o) for i, o in enumerate(offsets))]

    center = points[inner]
    tau = np.empty(center.shape[:-1] + (k, points.shape[-1]))
    tau2 = np.empty(center.shape[:-1] + (k, k, points.shape[-1]))
    for i in range(k):
        e = [0] * k
        e[i] = 1
        plus, minus = shifted(e), shifted([-x for x in e])
        tau[..., i, :] = (plus - minus) / (2 * spacing[i])
        tau2[..., i, i, :] = (plus - 2 * center + minus) / spacing[i] ** 2
        for j in range(i + 1, k):
            def off(a, b):
                o = [0] * k
                o[i], o[j] = a, b
                return shifted(o)
            mixed = (off(1, 1) - off(1, -1) - off(-1, 1) + off(-1, -1)) / (4 * spacing[i] * spacing[j])
            tau2[..., i, j, :] = tau2[..., j, i, :] = mixed
    return tau, tau2


def _node_data(m: GroupModel, patch: SurfacePatch, node):
    node = tuple(node)
    if patch.tau is not None:
        return patch.points[node], patch.tau[node], patch.tau2[node]
    if any(i <= 0 or i >= s - 1 for i, s in zip(node, patch.shape)):
        raise ValueError(f"node {node} is on the boundary; one-sided differences are not supported")
    tau, tau2 = grid_derivatives(patch.points, patch.spacing)
    inner = tuple(i - 1 for i in node)
    return patch.points[node], tau[inner], tau2[inner]


@dataclass(frozen=True)
class FundamentalForms:
    first: np.ndarray
    normal: np.ndarray
    second: np.ndarray

    @property
    def EFG(self) -> tuple:
        I = self.first
        return float(I[0, 0]), float(I[0, 1]), float(I[1, 1])

    @property
    def LMN(self) -> tuple:
        II = self.second
        return float(II[0, 0]), float(II[0, 1]), float(II[1, 1])


def fundamental_forms(m: GroupModel, patch: SurfacePatch, node) -> FundamentalForms:
    p, tau, tau2 = _node_data(m, patch, node)
    geo = patch_geometry(m, p, tau, tau2, patch.hint)
    return FundamentalForms(geo.first, geo.normal, geo.second)


def patch_mean_curvature(m: GroupModel, patch: SurfacePatch, node) -> float:
    p, tau, tau2 = _node_data(m, patch, node)
    return float(patch_geometry(m, p, tau, tau2, patch.hint).H)


# ---------------------------------------------------------------------------
# closed-form evolutions
# ---------------------------------------------------------------------------
#
# Each evolution is phi(args; s) with a scalar s(t): s = exp(kappa t) for the
# non-self-similar families (s(0) = 1 gives the subgroup) and s = t for
# translators.

_u, _v, _w, _s = sp.symbols("u v w s", real=True)
_lam, _l1, _l2, _a, _b, _c, _d = sp.symbols("lam l1 l2 a b c d", real=True)


def _growth(lam, coef):
    return coef * (_s * sp.exp(lam * _v) - 1) / lam


_FORMS = {
    # key: (args, params, expression)
    "s3l/K0": ((_u, _v), (_lam,), (_u, _v, 2 * _lam * _s)),
    "s3l/K0/literal": ((_u, _v), (_lam,), (sp.exp(2 * _lam**2 * _s) * _u, sp.exp(2 * _lam**2 * _s) * _v, 2 * _lam * _s)),
    "s3l/K_a": ((_u, _v), (_lam, _a), (_u, _growth(_lam, _a), _v)),
    "static/K_a0": ((_u, _v), (_a,), (_u, _a * _v, _v)),
    "s3ll/K0": ((_u, _v), (_l1, _l2), (_u, _v, (_l1 + _l2) * _s)),
    "s3ll/K1_b": ((_u, _v), (_l1, _l2, _b), (_u, _growth(_l2, _b), _v)),
    "s3ll0/K1_b": ((_u, _v), (_l1, _b), (_u, _b * _v - _b * _l1 * _s, _v)),
    "s3ll0/K1_b/literal": ((_u, _v), (_l1, _b), (_u, _b * (_v + _l1 * _s), _v)),
    "s3ll/K2_a": ((_u, _v), (_l1, _l2, _a), (_growth(_l1, _a), _u, _v)),
    "s3ll/K3_cd": ((_u, _v), (_l1, _c, _d), (_u, _c * _u + _growth(_l1, _d), _v)),
    "s3ll/K4_ef": ((_u, _v), (_l1, _c, _d), (_c * _u + _growth(_l1, _d), _u, _v)),
    "s3p/K0": ((_u, _v), (_lam,), (_u, _v, 2 * _lam * _s)),
    "g4/G4_H3": ((_u, _v, _w), (), (2 * _s, _u, _v, _w)),
}


@lru_cache(maxsize=None)
def _compiled(key: str):
    args, params, expr = _FORMS[key]
    phi = sp.Matrix(expr)
    k, n = len(args), len(expr)
    jac = [[sp.diff(phi[q], a) for q in range(n)] for a in args]
    hess = [[[sp.diff(phi[q], a, b) for q in range(n)] for b in args] for a in args]
    ds = [sp.diff(phi[q], _s) for q in range(n)]
    sig = args + (_s,) + params

    def vec(exprs):
        fns = [sp.lambdify(sig, e, "numpy") for e in exprs]

        def f(*vals):
            shape = np.broadcast(*vals).shape
            return np.stack([np.broadcast_to(np.asarray(g(*vals), dtype=float), shape) for g in fns], -1)

        return f

    return {
        "k": k,
        "phi": vec(list(phi)),
        "jac": [vec(row) for row in jac],
        "hess": [[vec(row) for row in rows] for rows in hess],
        "ds": vec(ds),
    }


@dataclass(frozen=True, eq=False)
class FlowSolution:
    """An evolving patch ``phi(args, t)`` with analytic space and time derivatives."""

    model: GroupModel
    family_tag: str
    params: tuple
    variant: str
    form: str
    form_params: tuple
    kappa: float | None = None    # s = exp(kappa t) when set, otherwise s = t
    initial: Subalgebra | None = field(default=None, repr=False)

    @property
    def k(self) -> int:
        return _compiled(self.form)["k"]

    def _s(self, t):
        if self.kappa is None:
            return t, 1.0
        e = np.exp(self.kappa * t)
        return e, self.kappa * e

    def _call(self, what, args, t):
        s, _ = self._s(t)
        C = _compiled(self.form)
        vals = tuple(np.asarray(a, dtype=float) for a in args) + (s,) + self.form_params
        if what == "phi":
            return C["phi"](*vals)
        if what == "tau":
            return np.stack([f(*vals) for f in C["jac"]], -2)
        if what == "tau2":
            return np.stack([np.stack([f(*vals) for f in row], -2) for row in C["hess"]], -3)
        if what == "ds":
            return C["ds"](*vals)
        raise KeyError(what)

    def phi(self, *args, t=0.0):
        return self._call("phi", args, t)

    def tangents(self, *args, t=0.0):
        return self._call("tau", args, t)

    def second_derivatives(self, *args, t=0.0):
        return self._call("tau2", args, t)

    def velocity(self, *args, t=0.0):
        _, ds_dt = self._s(t)
        return ds_dt * self._call("ds", args, t)

    @property
    def hint(self):
        return None if self.initial is None else self.initial.orientation

    def patch(self, t: float = 0.0, grid=(41, 41), box: float = 1.0) -> SurfacePatch:
        grid = tuple(grid) + (grid[-1],) * (self.k - len(grid))
        axes = tuple(np.linspace(-box, box, g) for g in grid[: self.k])
        mesh = np.meshgrid(*axes, indexing="ij")
        return SurfacePatch(
            self.model, axes, self.phi(*mesh, t=t), self.hint,
            self.tangents(*mesh, t=t), self.second_derivatives(*mesh, t=t),
        )

    def geometry(self, *args, t=0.0) -> PatchGeometry:
        return patch_geometry(
            self.model, self.phi(*args, t=t), self.tangents(*args, t=t),
            self.second_derivatives(*args, t=t), self.hint,
        )

    def label(self) -> str:
        return f"{self.family_tag}{list(self.params)} in {self.model.spec} ({self.variant})"


def _regime(m: GroupModel) -> str:
    if m.family is Family.S3_lambda1_lambda2:
        l1, l2 = m.params
        if abs(l2) < REGIME_TOL:
            return "s3ll0"
        if abs(l1 - l2) < REGIME_TOL:
            return "s3lleq"
        return "s3ll"
    return m.family.value


# exponent rates of the non-self-similar families: (satisfies the flow, as printed)
def _rates(m: GroupModel, tag: str):
    if m.family is Family.S3_lambda:
        (lam,) = m.params
        return -2 * lam**2, lam**2
    l1, l2 = m.params
    if tag == "K1_b":
        return -(l1 + l2) * l2, (l1 + l2) * l2
    if tag == "K2_a":
        return -(l1 + l2) * l1, (l1 + l2) * l1
    if tag == "K3_cd":
        return -2 * l1**2, 2 * l1**2
    if tag == "K4_ef":
        return -2 * l1**2, l1**2
    raise KeyError(tag)


FLOW_FAMILIES = {
    "s3l": ("K0", "K_a"),
    "s3ll": ("K0", "K1_b", "K2_a"),
    "s3ll0": ("K0", "K1_b", "K2_a"),
    "s3lleq": ("K0", "K3_cd", "K4_ef"),
    "s3p": ("K0",),
    "g4": ("G4_H3",),
}


def closed_form_solution(m: GroupModel, family_tag: str, params=(), variant: str = "corrected") -> FlowSolution:
    """Evolution of the catalogued subgroup ``family_tag`` under the flow.

    ``variant="literal"`` returns the time dependence exactly as printed in the
    source formulas, which for several families moves in the opposite
    direction; ``"corrected"`` returns the evolution satisfying
    ``g(dphi/dt, nu) = -H``.
    """
    if variant not in ("corrected", "literal"):
        raise ValueError("variant must be 'corrected' or 'literal'")
    params = tuple(float(p) for p in params)
    K = subalgebra(m.algebra, family_tag, params)
    regime = _regime(m)
    if family_tag not in FLOW_FAMILIES[regime]:
        raise ValueError(f"no closed-form evolution for {family_tag} in {m}")
    lit = variant == "literal"
    mp = m.params

    def make(form, fparams, kappa=None):
        return FlowSolution(m, family_tag, params, variant, form, tuple(fparams), kappa, K)

    if family_tag == "G4_H3":
        return make("g4/G4_H3", ())
    if family_tag == "K0":
        if regime == "s3l":
            return make("s3l/K0/literal" if lit else "s3l/K0", mp)
        if regime == "s3p":
            return make("s3p/K0", mp)
        return make("s3ll/K0", mp)
    if regime == "s3l":
        (lam,) = mp
        if lam == 0:
            return make("static/K_a0", params)
        good, printed = _rates(m, family_tag)
        return make("s3l/K_a", mp + params, printed if lit else good)
    if regime == "s3ll0" and family_tag == "K1_b":
        return make("s3ll0/K1_b/literal" if lit else "s3ll0/K1_b", (mp[0],) + params)
    good, printed = _rates(m, family_tag)
    kappa = printed if lit else good
    if family_tag in ("K3_cd", "K4_ef"):
        return make(f"s3ll/{family_tag}", (mp[0],) + params, kappa)
    return make(f"s3ll/{family_tag}", mp + params, kappa)


# ---------------------------------------------------------------------------
# verification
# ---------------------------------------------------------------------------

@dataclass
class FlowReport:
    family: str
    model: str
    params: list
    variant: str
    times: list
    sup_residual: float
    residual_by_time: list
    tol: float
    passed: bool
    min_det_first: float

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["pass"] = d.pop("passed")
        return d


def _mesh(k: int, grid, box: float):
    grid = tuple(grid) + (grid[-1],) * (k - len(grid))
    axes = [np.linspace(-box, box, g) for g in grid[:k]]
    return np.meshgrid(*axes, indexing="ij")


def flow_residual(sol: FlowSolution, t: float, grid=(41, 41), box: float = 1.0):
    """``|g(dphi/dt, nu) + H|`` on the grid, with the immersion determinant."""
    mesh = _mesh(sol.k, grid, box)
    geo = sol.geometry(*mesh, t=t)
    vel = normal_velocity(sol.model, sol.phi(*mesh, t=t), sol.velocity(*mesh, t=t), geo.normal)
    return np.abs(vel + geo.H), geo.det_first


def verify_flow(m: GroupModel, sol: FlowSolution, times=(0.0, 0.1, 0.5), tol: float = FLOW_TOL,
                grid=(41, 41), box: float = 1.0) -> FlowReport:
    if sol.model != m:
        raise ValueError("solution belongs to another model")
    sups, dets = [], []
    for t in times:
        res, det = flow_residual(sol, t, grid, box)
        if det.min() <= IMMERSION_TOL:
            raise ArithmeticError(f"{sol.label()} is not immersed at t={t}")
        sups.append(float(res.max()))
        dets.append(float(det.min()))
    sup = max(sups)
    return FlowReport(sol.family_tag, m.spec, list(sol.params), sol.variant, list(map(float, times)),
                      sup, sups, tol, bool(sup < tol), min(dets))


def worked_case_H(l1: float, l2: float, b: float, t: float, kappa: float | None = None) -> float:
    """Displayed mean curvature of the evolving K_{1,b}; ``kappa`` defaults to the printed rate."""
    if kappa is None:
        kappa = (l1 + l2) * l2
    beta = np.exp(kappa * t)
    return float(-b * (l1 + l2) * beta / np.sqrt(1 + b * b * beta * beta))


def initial_consistency(sol: FlowSolution, grid=(41, 41), box: float = 1.0) -> float:
    """Sup over the grid of |patch H at t=0 - algebra-level H of the initial subgroup|."""
    mesh = _mesh(sol.k, grid, box)
    H0 = mean_curvature_trace(sol.model.algebra, sol.initial)
    return float(np.max(np.abs(sol.geometry(*mesh, t=0.0).H - H0)))


@dataclass
class AnsatzReport:
    family: str
    model: str
    params: list
    kappa_fit: float
    kappa_spread: float
    kappa_printed: float
    consistent: bool
    matches_printed: bool

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def ansatz_ode_check(m: GroupModel, family_tag: str, params=(), nodes: int = 25, seed: int = 0) -> AnsatzReport:
    """Fit ``c'/c`` for the ansatz factor ``c`` multiplying ``e^{lam z}``.

    At fixed c the ansatz surface has H(c); the flow equation at a node gives
    ``c' = -H / g(d phi/dc, nu)``. The ratio ``c'/c`` must be one constant
    kappa for ``c = e^{kappa t}`` to solve the flow.
    """
    sol = closed_form_solution(m, family_tag, params)
    if sol.kappa is None:
        raise ValueError(f"{family_tag} in {m} is not an exponential-ansatz family")
    _, printed = _rates(m, family_tag)
    rng = np.random.default_rng(seed)
    args = rng.uniform(-1, 1, size=(sol.k, nodes))
    C = _compiled(sol.form)
    ratios = []
    for c in (0.5, 1.0, 2.0):
        vals = tuple(args) + (c,) + sol.form_params
        pts = C["phi"](*vals)
        tau = np.stack([f(*vals) for f in C["jac"]], -2)
        tau2 = np.stack([np.stack([f(*vals) for f in row], -2) for row in C["hess"]], -3)
        geo = patch_geometry(m, pts, tau, tau2, sol.hint)
        dn = normal_velocity(m, pts, C["ds"](*vals), geo.normal)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratios.append(np.where(np.abs(dn) > 1e-14, -geo.H / dn / c, 0.0))
    ratios = np.concatenate(ratios)
    fit = float(np.mean(ratios))
    spread = float(np.ptp(ratios))
    return AnsatzReport(family_tag, m.spec, list(map(float, params)), fit, spread, float(printed),
                        spread < 1e-8, abs(fit - printed) < 1e-8)


# ---------------------------------------------------------------------------
# explicit integrator
# ---------------------------------------------------------------------------

def closest_parameters(sol: FlowSolution, points: np.ndarray, t: float, guess: np.ndarray,
                       iterations: int = 30) -> np.ndarray:
    """Gauss-Newton foot points: parameters minimising the coordinate distance to ``points``."""
    x = np.array(guess, dtype=float)
    for _ in range(iterations):
        args = tuple(np.moveaxis(x, -1, 0))
        r = sol.phi(*args, t=t) - points
        J = sol.tangents(*args, t=t)                        # (..., k, n)
        JJ = np.einsum("...in,...jn->...ij", J, J)
        step = np.linalg.solve(JJ, -np.einsum("...in,...n->...i", J, r)[..., None])[..., 0]
        x = x + step
        if np.abs(step).max() < 1e-14:
            break
    return x


def normal_foot(sol: FlowSolution, points: np.ndarray, foot: np.ndarray, t0: float, t1: float,
                iterations: int = 30) -> np.ndarray:
    """Parameters where the metric normal line through ``points`` meets the surface at ``t1``.

    ``foot`` are the parameters of ``points`` on the surface at ``t0``; the
    normal there is used as the direction, so boundary nodes move the same
    way interior nodes do under a normal-velocity update.
    """
    m = sol.model
    args = tuple(np.moveaxis(foot, -1, 0))
    n = np.einsum("...ab,...b->...a", frame(m, points), sol.geometry(*args, t=t0).normal)
    x = np.concatenate([foot, np.zeros(foot.shape[:-1] + (1,))], -1)
    for _ in range(iterations):
        args = tuple(np.moveaxis(x[..., :-1], -1, 0))
        r = sol.phi(*args, t=t1) - points - x[..., -1:] * n
        J = np.concatenate([np.swapaxes(sol.tangents(*args, t=t1), -1, -2), -n[..., None]], -1)
        step = np.linalg.solve(J, -r[..., None])[..., 0]
        x = x + step
        if np.abs(step).max() < 1e-14:
            break
    return x[..., :-1]


def distance_to_solution(sol: FlowSolution, points: np.ndarray, t: float, guess: np.ndarray) -> np.ndarray:
    x = closest_parameters(sol, points, t, guess)
    return np.linalg.norm(sol.phi(*np.moveaxis(x, -1, 0), t=t) - points, axis=-1)


def diffusion_number(m: GroupModel, patch: SurfacePatch, dt: float) -> float:
    """``dt * sum_i max(g^{ii}) / h_i^2`` over interior nodes; explicit stepping needs <= 1/2."""
    tau, tau2 = grid_derivatives(patch.points, patch.spacing)
    inner = patch.points[patch.interior()]
    geo = patch_geometry(m, inner, tau, tau2, patch.hint)
    ginv = np.linalg.inv(geo.first)
    diag = np.diagonal(ginv, axis1=-2, axis2=-1)
    return float(dt * sum(diag[..., i].max() / h**2 for i, h in enumerate(patch.spacing)))


@dataclass
class Trajectory:
    times: list
    patches: list
    H: list
    diffusion: float

    @property
    def final(self) -> SurfacePatch:
        return self.patches[-1]


def integrate_mcf(m: GroupModel, initial: SurfacePatch, dt: float, steps: int, boundary="frozen",
                  record_every: int = 0) -> Trajectory:
    """Explicit Euler for ``dp/dt = -H nu`` on interior nodes of a grid patch.

    ``boundary`` is ``"frozen"`` or a :class:`FlowSolution`; in the latter case
    boundary nodes slide along the metric normal of the closed-form surface
    until they meet its slice at the new time.
    """
    if initial.points.ndim != 3:
        raise ValueError("integrate_mcf handles two-parameter patches")
    D = diffusion_number(m, initial, dt)
    if D > DIFFUSION_LIMIT:
        raise ValueError(f"time step too large: diffusion number {D:.3g} > {DIFFUSION_LIMIT}")
    pts = initial.points.copy()
    inner = initial.interior()
    mask = np.ones(pts.shape[:-1], dtype=bool)
    mask[inner] = False
    pinned = boundary if isinstance(boundary, FlowSolution) else None
    if pinned is None and boundary != "frozen":
        raise ValueError("boundary must be 'frozen' or a FlowSolution")
    if pinned is not None:
        U, V = np.meshgrid(*initial.axes, indexing="ij")
        foot = np.stack([U[mask], V[mask]], -1)

    times, patches, Hs = [0.0], [initial], []
    t = 0.0
    for step in range(1, steps + 1):
        tau, tau2 = grid_derivatives(pts, initial.spacing)
        centre = pts[inner]
        geo = patch_geometry(m, centre, tau, tau2, initial.hint)
        if geo.det_first.min() <= IMMERSION_TOL:
            raise ArithmeticError(f"patch degenerated at step {step}")
        nu_coord = np.einsum("...ab,...b->...a", frame(m, centre), geo.normal)
        pts[inner] = centre - dt * geo.H[..., None] * nu_coord
        t = step * dt
        if pinned is not None:
            foot = normal_foot(pinned, pts[mask], foot, t - dt, t)
            pts[mask] = pinned.phi(foot[:, 0], foot[:, 1], t=t)
        if record_every and step % record_every == 0:
            times.append(t)
            patches.append(SurfacePatch(m, initial.axes, pts.copy(), initial.hint))
            Hs.append(geo.H)
    if not record_every or steps % record_every:
        times.append(t)
        patches.append(SurfacePatch(m, initial.axes, pts.copy(), initial.hint))
    return Trajectory(times, patches, Hs, D)


@dataclass
class IntegrationReport:
    family: str
    model: str
    params: list
    grid: list
    dt: float
    steps: int
    t_final: float
    sup_distance: float
    diffusion_number: float
    tol: float
    passed: bool

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["pass"] = d.pop("passed")
        return d


def integrate_against(sol: FlowSolution, grid=(41, 41), dt: float = 1e-4, steps: int = 1000,
                      box: float = 1.0, tol: float = 5e-3) -> tuple[IntegrationReport, Trajectory]:
    """Integrate from the t=0 slice of ``sol`` with pinned boundary and measure the distance at the end."""
    m = sol.model
    init = sol.patch(0.0, grid, box)
    init = SurfacePatch(m, init.axes, init.points, init.hint)
    traj = integrate_mcf(m, init, dt, steps, boundary=sol)
    U, V = np.meshgrid(*init.axes, indexing="ij")
    inner = init.interior()
    guess = np.stack([U[inner], V[inner]], -1)
    t = traj.times[-1]
    dist = distance_to_solution(sol, traj.final.points[inner], t, guess)
    sup = float(dist.max())
    rep = IntegrationReport(sol.family_tag, m.spec, list(sol.params), list(grid), dt, steps, t, sup,
                            traj.diffusion, tol, bool(sup < tol))
    return rep, traj


def trajectory_csv(traj: Trajectory) -> str:
    """Rows ``t, u, v, coords..., H`` for every recorded slice (H empty where not evaluated)."""
    lines = []
    first = traj.patches[0]
    n = first.points.shape[-1]
    lines.append(",".join(["t", "u", "v"] + [f"x{i}" for i in range(n)] + ["H"]))
    U, V = np.meshgrid(*first.axes, indexing="ij")
    for idx, (t, patch) in enumerate(zip(traj.times, traj.patches)):
        H = np.full(U.shape, np.nan)
        if 0 < idx <= len(traj.H):
            H[patch.interior()] = traj.H[idx - 1]
        for i in range(U.shape[0]):
            for j in range(U.shape[1]):
                row = [t, U[i, j], V[i, j], *patch.points[i, j], H[i, j]]
                lines.append(",".join("" if isinstance(x, float) and np.isnan(x) else repr(float(x)) for x in row))
    return "\n".join(lines) + "\n"


def report_json(obj) -> str:
    return json.dumps(obj.to_dict(), indent=2)
