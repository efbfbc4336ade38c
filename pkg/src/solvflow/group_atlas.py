"""Coordinate models of the solvable groups and of R ⋉ H3.

Points are numpy arrays whose last axis holds the coordinates ``(x, y, z)``
(or ``(s, x, y, z)`` for ``G4``); every evaluator broadcasts over leading axes.
The identity is the zero tuple in every model.
"""
from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np
import sympy as sp

from . import lie_core

FD_STEP = 1e-5


class Family(enum.Enum):
    S3_lambda = "s3l"
    S3_lambda1_lambda2 = "s3ll"
    S3p_lambda = "s3p"
    G4 = "g4"


_PARAM_NAMES = {
    Family.S3_lambda: ("lambda",),
    Family.S3_lambda1_lambda2: ("l1", "l2"),
    Family.S3p_lambda: ("lambda",),
    Family.G4: (),
}


@dataclass(frozen=True)
class GroupModel:
    family: Family
    params: tuple = ()

    def __post_init__(self):
        params = tuple(float(p) for p in self.params)
        object.__setattr__(self, "params", params)
        if len(params) != len(_PARAM_NAMES[self.family]):
            raise ValueError(f"{self.family.name} takes parameters {_PARAM_NAMES[self.family]}")
        if self.family is Family.S3_lambda1_lambda2 and params[0] == 0:
            raise ValueError("S3_lambda1_lambda2 requires λ1 != 0")

    @property
    def dim(self) -> int:
        return 4 if self.family is Family.G4 else 3

    @property
    def param_dict(self) -> dict:
        return dict(zip(_PARAM_NAMES[self.family], self.params))

    @property
    def spec(self) -> str:
        if not self.params:
            return self.family.value
        body = ",".join(f"{k}={v:g}" for k, v in self.param_dict.items())
        return f"{self.family.value}:{body}"

    @cached_property
    def algebra(self) -> lie_core.LieAlgebra:
        f = self.family
        if f is Family.S3_lambda:
            return lie_core.r3_lambda(*self.params)
        if f is Family.S3_lambda1_lambda2:
            return lie_core.r3_lambda1_lambda2(*self.params)
        if f is Family.S3p_lambda:
            return lie_core.r3p_lambda(*self.params)
        return lie_core.g4()

    @property
    def algebra_key(self) -> str:
        return {
            Family.S3_lambda: "r3[λ]",
            Family.S3_lambda1_lambda2: "r3[λ1,λ2]",
            Family.S3p_lambda: "r3p[λ]",
            Family.G4: "g4",
        }[self.family]

    def identity(self) -> np.ndarray:
        return np.zeros(self.dim)

    def __str__(self):
        return self.spec


def s3_lambda(lam) -> GroupModel:
    return GroupModel(Family.S3_lambda, (lam,))


def s3_lambda1_lambda2(lam1, lam2) -> GroupModel:
    return GroupModel(Family.S3_lambda1_lambda2, (lam1, lam2))


def s3p_lambda(lam) -> GroupModel:
    return GroupModel(Family.S3p_lambda, (lam,))


def g4_model() -> GroupModel:
    return GroupModel(Family.G4, ())


_SPEC_ALIASES = {"lambda": "lambda", "l": "lambda", "λ": "lambda", "l1": "l1", "λ1": "l1",
                 "lambda1": "l1", "l2": "l2", "λ2": "l2", "lambda2": "l2"}


def parse_model(spec: str) -> GroupModel:
    """Parse ``s3l:lambda=1.5``, ``s3ll:l1=1,l2=0``, ``s3p:lambda=0.7``, ``g4`` or ``h3``."""
    spec = spec.strip().replace(" ", "")
    name, _, body = spec.partition(":")
    name = name.lower()
    if name == "h3":
        return s3_lambda(0.0)
    try:
        family = Family(name)
    except ValueError:
        raise ValueError(f"unknown model {name!r} in {spec!r}") from None
    values = {}
    if body:
        for item in body.split(","):
            m = re.fullmatch(r"([^=]+)=(.+)", item)
            if not m or m.group(1) not in _SPEC_ALIASES:
                raise ValueError(f"bad model parameter {item!r} in {spec!r}")
            values[_SPEC_ALIASES[m.group(1)]] = float(m.group(2))
    names = _PARAM_NAMES[family]
    if set(values) != set(names):
        raise ValueError(f"model {name} needs parameters {names}, got {sorted(values)}")
    return GroupModel(family, tuple(values[k] for k in names))


def _as_points(m: GroupModel, *points):
    out = []
    for p in points:
        p = np.asarray(p, dtype=float)
        if p.shape[-1:] != (m.dim,):
            raise lie_core.DimensionError(f"{m.family.name} points have {m.dim} coordinates, got {p.shape}")
        out.append(p)
    return out


def _linear_part(m: GroupModel, z):
    """The 2x2 block acting on (x, y) in the 3D semidirect products."""
    z = np.asarray(z, dtype=float)
    if m.family is Family.S3_lambda:
        (lam,) = m.params
        e = np.exp(lam * z)
        return np.stack([np.stack([e, z * e], -1), np.stack([0 * e, e], -1)], -2)
    if m.family is Family.S3_lambda1_lambda2:
        l1, l2 = m.params
        e1, e2 = np.exp(l1 * z), np.exp(l2 * z)
        return np.stack([np.stack([e1, 0 * z], -1), np.stack([0 * z, e2], -1)], -2)
    (lam,) = m.params
    e = np.exp(lam * z)
    c, s = np.cos(z), np.sin(z)
    return np.stack([np.stack([e * c, e * s], -1), np.stack([-e * s, e * c], -1)], -2)


def multiply(m: GroupModel, p, q) -> np.ndarray:
    p, q = _as_points(m, p, q)
    p, q = np.broadcast_arrays(p, q)
    if m.family is Family.G4:
        s1, x1, y1, z1 = np.moveaxis(p, -1, 0)
        s2, x2, y2, z2 = np.moveaxis(q, -1, 0)
        h = np.exp(s1 / 2)
        return np.stack([
            s1 + s2,
            x1 + h * x2,
            y1 + h * y2,
            z1 + np.exp(s1) * z2 + h * (x1 * y2 - x2 * y1) / 2,
        ], -1)
    M = _linear_part(m, p[..., 2])
    v = p[..., :2] + np.einsum("...ij,...j->...i", M, q[..., :2])
    return np.concatenate([v, p[..., 2:] + q[..., 2:]], -1)


def inverse(m: GroupModel, p) -> np.ndarray:
    (p,) = _as_points(m, p)
    if m.family is Family.G4:
        s, x, y, z = np.moveaxis(p, -1, 0)
        h = np.exp(-s / 2)
        # x1 y2 - x2 y1 vanishes for q = (-s, -h x, -h y, .), so only z needs solving
        return np.stack([-s, -h * x, -h * y, -np.exp(-s) * z], -1)
    Minv = _linear_part(m, -p[..., 2])
    v = -np.einsum("...ij,...j->...i", Minv, p[..., :2])
    return np.concatenate([v, -p[..., 2:]], -1)


def matrix_rep(m: GroupModel, p) -> np.ndarray:
    """3x3 affine matrix ``A_(x,y,z)`` of the 3D models."""
    if m.family is Family.G4:
        raise ValueError("no matrix model is provided for G4")
    (p,) = _as_points(m, p)
    out = np.zeros(p.shape[:-1] + (3, 3))
    out[..., :2, :2] = _linear_part(m, p[..., 2])
    out[..., :2, 2] = p[..., :2]
    out[..., 2, 2] = 1.0
    return out


# ---------------------------------------------------------------------------
# frames
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _symbolic_frame(family: Family):
    """Left-invariant frame as a sympy matrix (columns are E_i), with symbols."""
    if family is Family.G4:
        s, x, y, z = sp.symbols("s x y z", real=True)
        coords = (s, x, y, z)
        h = sp.exp(s / 2)
        F = sp.Matrix([
            [1, 0, 0, 0],
            [0, h, 0, 0],
            [0, 0, h, 0],
            [0, -y / 2 * h, x / 2 * h, sp.exp(s)],
        ])
        return coords, (), F
    x, y, z = sp.symbols("x y z", real=True)
    coords = (x, y, z)
    if family is Family.S3_lambda:
        lam = sp.Symbol("lam", real=True)
        e = sp.exp(lam * z)
        F = sp.Matrix([[e, z * e, 0], [0, e, 0], [0, 0, 1]])
        return coords, (lam,), F
    if family is Family.S3_lambda1_lambda2:
        l1, l2 = sp.symbols("l1 l2", real=True)
        F = sp.diag(sp.exp(l1 * z), sp.exp(l2 * z), 1)
        return coords, (l1, l2), F
    lam = sp.Symbol("lam", real=True)
    e = sp.exp(lam * z)
    F = sp.Matrix([[e * sp.cos(z), e * sp.sin(z), 0], [-e * sp.sin(z), e * sp.cos(z), 0], [0, 0, 1]])
    return coords, (lam,), F


def _matrix_function(M: sp.Matrix, args):
    """Vectorised evaluator for a sympy matrix; returns shape (..., rows, cols)."""
    entries = [[sp.lambdify(args, M[i, j], "numpy") for j in range(M.cols)] for i in range(M.rows)]

    def f(*vals):
        shape = np.broadcast(*vals).shape
        out = np.empty(shape + (M.rows, M.cols))
        for i, row in enumerate(entries):
            for j, e in enumerate(row):
                out[..., i, j] = e(*vals)
        return out

    return f


@lru_cache(maxsize=None)
def _frame_functions(family: Family):
    coords, params, F = _symbolic_frame(family)
    Finv = sp.simplify(F.inv())
    args = coords + params
    dFinv = [Finv.diff(c) for c in coords]
    return (
        _matrix_function(F, args),
        _matrix_function(Finv, args),
        [_matrix_function(D, args) for D in dFinv],
    )


def _eval(m: GroupModel, which: int, p):
    (p,) = _as_points(m, p)
    fns = _frame_functions(m.family)[which]
    vals = tuple(np.moveaxis(p, -1, 0)) + tuple(np.broadcast_to(v, p.shape[:-1]) for v in m.params)
    if which == 2:
        return np.stack([f(*vals) for f in fns], -3)
    return fns(*vals)


def frame(m: GroupModel, p) -> np.ndarray:
    """Columns are the coordinate components of the left-invariant fields E_i at p."""
    return _eval(m, 0, p)


def coframe(m: GroupModel, p) -> np.ndarray:
    """Inverse of :func:`frame`; maps coordinate vectors to frame coefficients."""
    return _eval(m, 1, p)


def coframe_derivative(m: GroupModel, p) -> np.ndarray:
    """``out[..., k, :, :]`` is the partial derivative of the coframe in coordinate k."""
    return _eval(m, 2, p)


def metric_at(m: GroupModel, p) -> np.ndarray:
    """Coordinate metric tensor making the left-invariant frame orthonormal."""
    Finv = coframe(m, p)
    return np.swapaxes(Finv, -1, -2) @ Finv


def metric_closed_form(m: GroupModel, p) -> np.ndarray:
    """The coordinate metric written out term by term (3D models only)."""
    (p,) = _as_points(m, p)
    x, y, z = np.moveaxis(p, -1, 0)
    out = np.zeros(p.shape[:-1] + (3, 3))
    if m.family is Family.S3_lambda:
        (lam,) = m.params
        e = np.exp(-2 * lam * z)
        out[..., 0, 0] = e
        out[..., 1, 1] = (1 + z**2) * e
        out[..., 0, 1] = out[..., 1, 0] = -z * e
    elif m.family is Family.S3_lambda1_lambda2:
        l1, l2 = m.params
        out[..., 0, 0] = np.exp(-2 * l1 * z)
        out[..., 1, 1] = np.exp(-2 * l2 * z)
    elif m.family is Family.S3p_lambda:
        (lam,) = m.params
        out[..., 0, 0] = out[..., 1, 1] = np.exp(-2 * lam * z)
    else:
        raise ValueError("closed-form metric provided for the 3D models only")
    out[..., 2, 2] = 1.0
    return out


def left_differential(m: GroupModel, p, q, h: float = FD_STEP) -> np.ndarray:
    """Jacobian of ``q -> p q`` at q by central differences, shape (..., n, n)."""
    p, q = _as_points(m, p, q)
    cols = []
    for i in range(m.dim):
        e = np.zeros(m.dim)
        e[i] = h
        cols.append((multiply(m, p, q + e) - multiply(m, p, q - e)) / (2 * h))
    return np.stack(cols, -1)


def random_points(rng: np.random.Generator, m: GroupModel, n: int, scale: float = 1.0) -> np.ndarray:
    return rng.uniform(-scale, scale, size=(n, m.dim))
