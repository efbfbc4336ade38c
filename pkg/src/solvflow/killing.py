"""Killing fields of the group models.

Generators are coordinate vector fields ``p -> V(p)`` (vectorised over
leading axes). The right-invariant ones come from left translations
``t -> exp(tW) p``; the extra rotational generators exist only in the
regimes where the isometry group is larger.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .group_atlas import FD_STEP, Family, GroupModel, coframe, frame, inverse, metric_at, multiply

REGIME_TOL = 1e-12
KILLING_TOL = 1e-6


@dataclass(frozen=True)
class Generator:
    name: str
    field: Callable[[np.ndarray], np.ndarray]


def _vec(*components):
    comps = np.broadcast_arrays(*components)
    return np.stack(comps, -1)


def _right_invariant(m: GroupModel) -> list[Generator]:
    if m.family is Family.G4:
        def e0(p):
            s, x, y, z = np.moveaxis(p, -1, 0)
            return _vec(1.0 + 0 * s, x / 2, y / 2, z)

        def e1(p):
            s, x, y, z = np.moveaxis(p, -1, 0)
            return _vec(0 * s, 1.0, 0.0, y / 2)

        def e2(p):
            s, x, y, z = np.moveaxis(p, -1, 0)
            return _vec(0 * s, 0.0, 1.0, -x / 2)

        def e3(p):
            return _vec(0 * p[..., 0], 0.0, 0.0, 1.0)

        return [Generator("E0~", e0), Generator("E1~", e1), Generator("E2~", e2), Generator("E3~", e3)]

    def d_x(p):
        return _vec(1.0 + 0 * p[..., 0], 0.0, 0.0)

    def d_y(p):
        return _vec(0 * p[..., 0], 1.0, 0.0)

    if m.family is Family.S3_lambda:
        (lam,) = m.params

        def e3(p):
            x, y, z = np.moveaxis(p, -1, 0)
            return _vec(lam * x + y, lam * y, 1.0 + 0 * z)
    elif m.family is Family.S3_lambda1_lambda2:
        l1, l2 = m.params

        def e3(p):
            x, y, z = np.moveaxis(p, -1, 0)
            return _vec(l1 * x, l2 * y, 1.0 + 0 * z)
    else:
        (lam,) = m.params

        def e3(p):
            x, y, z = np.moveaxis(p, -1, 0)
            return _vec(lam * x + y, -x + lam * y, 1.0 + 0 * z)

    return [Generator("E1~", d_x), Generator("E2~", d_y), Generator("E3~", e3)]


def _extra(m: GroupModel, literal: bool) -> list[Generator]:
    if m.family is Family.S3p_lambda:
        def t(p):
            x, y, z = np.moveaxis(p, -1, 0)
            return _vec(y, -x, 0 * z)

        return [Generator("T~", t)]
    if m.family is not Family.S3_lambda1_lambda2:
        return []
    l1, l2 = m.params
    if abs(l2) < REGIME_TOL:
        if literal:
            def t(p):
                x, y, z = np.moveaxis(p, -1, 0)
                return _vec(0 * x, -z, y)
        else:
            # isometries of the hyperbolic factor dx^2 e^{-2 l1 z} + dz^2
            def t(p):
                x, y, z = np.moveaxis(p, -1, 0)
                return _vec(l1 * x**2 - np.exp(2 * l1 * z) / l1, 0 * y, 2 * x)

        return [Generator("T~", t)]
    if abs(l1 - l2) < REGIME_TOL:
        lam = l1

        def t1(p):
            x, y, z = np.moveaxis(p, -1, 0)
            return _vec(-y, x, 0 * z)

        if literal:
            def t2(p):
                x, y, z = np.moveaxis(p, -1, 0)
                ez = np.exp(lam * z)
                return _vec(2 * x * ez, 0 * y, -lam * x**2 * ez)

            def t3(p):
                x, y, z = np.moveaxis(p, -1, 0)
                ez = np.exp(lam * z)
                return _vec(0 * x, 2 * y * ez, -lam * y**2 * ez)
        else:
            # conformal inversions of the upper half-space model of H^3
            def t2(p):
                x, y, z = np.moveaxis(p, -1, 0)
                return _vec(lam * (x**2 - y**2) - np.exp(2 * lam * z) / lam, 2 * lam * x * y, 2 * x)

            def t3(p):
                x, y, z = np.moveaxis(p, -1, 0)
                return _vec(2 * lam * x * y, lam * (y**2 - x**2) - np.exp(2 * lam * z) / lam, 2 * y)

        return [Generator("T1~", t1), Generator("T2~", t2), Generator("T3~", t3)]
    return []


def generators(m: GroupModel, literal: bool = False) -> list[Generator]:
    """Killing generators of ``m`` in the regime fixed by its parameters.

    ``literal=True`` substitutes the alternative rotational generators for
    ``lambda2 = 0`` and ``lambda1 = lambda2`` that do not satisfy the Killing
    equation; they are kept as negative controls.
    """
    return _right_invariant(m) + _extra(m, literal)


@dataclass(frozen=True, eq=False)
class KillingField:
    """Linear combination of the generators of a model."""

    model: GroupModel
    basis: tuple
    coefficients: np.ndarray
    name: str = ""

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=float)
        if c.shape != (len(self.basis),):
            raise ValueError("one coefficient per generator required")
        object.__setattr__(self, "coefficients", c)

    @property
    def names(self) -> list[str]:
        return [g.name for g in self.basis]

    def evaluate(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        out = np.zeros(p.shape)
        for c, g in zip(self.coefficients, self.basis):
            if c != 0:
                out = out + c * g.field(p)
        return out

    __call__ = evaluate

    def __add__(self, other: "KillingField") -> "KillingField":
        if other.basis is not self.basis:
            raise ValueError("fields use different generator bases")
        return KillingField(self.model, self.basis, self.coefficients + other.coefficients)

    def __rmul__(self, s: float) -> "KillingField":
        return KillingField(self.model, self.basis, s * self.coefficients)

    def label(self) -> str:
        if self.name:
            return self.name
        terms = [f"{c:+.6g}*{n}" for c, n in zip(self.coefficients, self.names) if abs(c) > 0]
        return " ".join(terms) or "0"


def killing_basis(m: GroupModel, literal: bool = False) -> list[KillingField]:
    gens = tuple(generators(m, literal))
    return [KillingField(m, gens, np.eye(len(gens))[i], g.name) for i, g in enumerate(gens)]


def combination(m: GroupModel, coefficients, literal: bool = False) -> KillingField:
    gens = tuple(generators(m, literal))
    return KillingField(m, gens, coefficients)


def vector_field(m: GroupModel, func: Callable, name: str = "V") -> KillingField:
    """Wrap an arbitrary coordinate field (e.g. a non-Killing control) as a one-term field."""
    return KillingField(m, (Generator(name, func),), np.ones(1), name)


def adjoint_inverse(m: GroupModel, p, W, h: float = FD_STEP) -> np.ndarray:
    """``Ad(p^-1) W`` by central differences of ``t -> p^-1 c(t) p`` with ``c'(0) = W``."""
    p = np.asarray(p, dtype=float)
    e = np.zeros(m.dim)
    w = frame(m, e) @ np.asarray(W, dtype=float)
    pinv = inverse(m, p)
    plus = multiply(m, multiply(m, pinv, e + h * w), p)
    minus = multiply(m, multiply(m, pinv, e - h * w), p)
    return coframe(m, e) @ ((plus - minus) / (2 * h))


def right_invariant_field(m: GroupModel, W, p, h: float = FD_STEP) -> np.ndarray:
    """Coordinate vector at p of the right-invariant field equal to W at the identity."""
    return frame(m, p) @ adjoint_inverse(m, p, W, h)


def lie_derivative_metric(m: GroupModel, V: KillingField, p, h: float = FD_STEP) -> np.ndarray:
    """``L_V g`` at a single point: ``V^k d_k g + g DV + DV^T g`` with central differences."""
    p = np.asarray(p, dtype=float)
    n = m.dim
    v = V.evaluate(p)
    g = metric_at(m, p)
    dV = np.empty((n, n))
    dg = np.zeros((n, n))
    for k in range(n):
        e = np.zeros(n)
        e[k] = h
        dV[:, k] = (V.evaluate(p + e) - V.evaluate(p - e)) / (2 * h)
        dg += v[k] * (metric_at(m, p + e) - metric_at(m, p - e)) / (2 * h)
    return dg + g @ dV + dV.T @ g


def killing_residual(m: GroupModel, V: KillingField, sample, h: float = FD_STEP) -> float:
    """Sup over ``sample`` of the Frobenius norm of ``L_V g``."""
    sample = np.atleast_2d(np.asarray(sample, dtype=float))
    if sample.size == 0:
        raise ValueError("killing_residual needs a nonempty sample")
    return float(max(np.linalg.norm(lie_derivative_metric(m, V, p, h)) for p in sample))


def residual_report(m: GroupModel, sample, literal: bool = False) -> list[dict]:
    return [
        {"model": m.spec, "generator_name": V.name, "residual_sup": killing_residual(m, V, sample),
         "sample_size": len(sample)}
        for V in killing_basis(m, literal)
    ]


def report_to_json(rows) -> str:
    return json.dumps(rows, indent=2)
