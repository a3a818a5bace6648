"""Lifts of base vector fields to the total space.

Three lifts are provided: the complete (Hamiltonian) lift, the Killing lift
for the Einstein family (complete lift plus the trace one-form rho over lam
in the fibre directions), and the conformal lift for the Walker family
(complete lift plus f xi_i d/dxi_i when rho = df).  The trace one-form is
always machine-extracted from L_K Gamma, never user-supplied.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import dsl
from .dsl import Expr, ZERO, as_expr, const, var
from .lift import fiber_coords
from .projective import (
    ConnectionN,
    VectorField,
    curvature_exprs,
    default_coords,
    lie_derivative_exprs,
)
from .sampling import sample_points


class NotProjectiveError(ValueError):
    """The base field fails the projective condition beyond tolerance."""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


@dataclass(frozen=True)
class LiftedField:
    """Vector field on the total space, components over (x, xi)."""

    coords: tuple[str, ...]
    components: tuple[Expr, ...]
    base: VectorField
    rho: Optional[tuple[Expr, ...]] = None
    kind: str = "complete"

    @property
    def n(self) -> int:
        return len(self.coords) // 2

    def evaluate(self, point: Sequence[float]) -> np.ndarray:
        binding = dict(zip(self.coords, map(float, point)))
        return np.array([c.eval(binding) for c in self.components])


def _as_field(field) -> VectorField:
    return field if isinstance(field, VectorField) else VectorField(tuple(field))


def complete_lift(field, coords: Optional[Sequence[str]] = None) -> LiftedField:
    """K^i d/dx^i - xi_j (dK^j/dx^i) d/dxi_i, the Hamiltonian lift of K^i xi_i."""
    field = _as_field(field)
    n = len(field.components)
    base = tuple(coords) if coords is not None else default_coords(n)
    fibers = fiber_coords(base)
    xi = [var(name) for name in fibers]
    fiber_parts = []
    for i in range(n):
        e = ZERO
        for j in range(n):
            e = dsl.sub(e, dsl.mul(xi[j], field.components[j].diff(base[i])))
        fiber_parts.append(e)
    return LiftedField(
        coords=base + fibers,
        components=field.components + tuple(fiber_parts),
        base=field,
        kind="complete",
    )


def _projective_residual(conn: ConnectionN, field: VectorField, points: np.ndarray) -> float:
    lkg, rho = lie_derivative_exprs(conn, field)
    n = conn.n
    worst = 0.0
    for p in points:
        binding = conn.binding(p)
        rho_vals = [r.eval(binding) for r in rho]
        for k in range(n):
            for i in range(n):
                for j in range(n):
                    expected = (rho_vals[j] if k == i else 0.0) + (rho_vals[i] if k == j else 0.0)
                    worst = max(worst, abs(lkg[k][i][j].eval(binding) - expected))
    return worst


_VALIDATION_SEED = 1013


def killing_lift(field, conn: ConnectionN, lam: float, tol: float = 1e-9) -> LiftedField:
    """Complete lift plus rho_i/lam in the fibre directions; Killing for the
    Einstein family and symplectic for the charged form."""
    if lam == 0.0:
        raise ValueError("the Killing lift needs lam != 0")
    field = _as_field(field)
    points = sample_points(conn.n, 5, _VALIDATION_SEED)
    residual = _projective_residual(conn, field, points)
    if residual > tol:
        raise NotProjectiveError("base field is not projective for this connection", residual)
    _, rho = lie_derivative_exprs(conn, field)
    lifted = complete_lift(field, conn.coords)
    comps = list(lifted.components)
    for i in range(conn.n):
        comps[conn.n + i] = dsl.add(comps[conn.n + i], dsl.mul(const(1.0 / lam), rho[i]))
    return LiftedField(
        coords=lifted.coords,
        components=tuple(comps),
        base=field,
        rho=rho,
        kind="killing",
    )


def conformal_walker_lift(field, conn: ConnectionN, f: Expr, tol: float = 1e-9) -> LiftedField:
    """Complete lift plus f xi_i d/dxi_i; conformal Killing for the Walker
    lift, with factor f, when the field is projective and df = 2 rho.

    The factor 2 linking f to the trace one-form matches the finite form of
    the statement (fibre rescaling by e^{2f} realizes the projective change
    by df): the infinitesimal fibre correction for trace one-form rho is
    2 f xi d/dxi with rho = df, equivalently f xi d/dxi with df = 2 rho.
    """
    field = _as_field(field)
    f = as_expr(f)
    points = sample_points(conn.n, 5, _VALIDATION_SEED)
    residual = _projective_residual(conn, field, points)
    if residual > tol:
        raise NotProjectiveError("base field is not projective for this connection", residual)
    _, rho = lie_derivative_exprs(conn, field)
    worst = 0.0
    for p in points:
        binding = conn.binding(p)
        for i in range(conn.n):
            worst = max(
                worst, abs(2.0 * rho[i].eval(binding) - f.diff(conn.coords[i]).eval(binding))
            )
    if worst > tol:
        raise NotProjectiveError(
            "supplied function does not satisfy df = 2 rho for this field", worst
        )
    lifted = complete_lift(field, conn.coords)
    xi = [var(name) for name in lifted.coords[conn.n:]]
    comps = list(lifted.components)
    for i in range(conn.n):
        comps[conn.n + i] = dsl.add(comps[conn.n + i], dsl.mul(f, xi[i]))
    return LiftedField(
        coords=lifted.coords,
        components=tuple(comps),
        base=field,
        rho=rho,
        kind="conformal_walker",
    )


def vector_bracket(coords: Sequence[str], v: Sequence[Expr], w: Sequence[Expr]) -> tuple[Expr, ...]:
    """[v, w]^a = v^b d_b w^a - w^b d_b v^a, componentwise."""
    out = []
    for a in range(len(coords)):
        e = ZERO
        for b, name in enumerate(coords):
            e = dsl.add(e, dsl.mul(v[b], w[a].diff(name)))
            e = dsl.sub(e, dsl.mul(w[b], v[a].diff(name)))
        out.append(e)
    return tuple(out)


def integrability_residual(conn: ConnectionN, field, point: Sequence[float]) -> float:
    """max |L_K P_ij + D_i rho_j|, the first-order compatibility condition a
    projective field must satisfy."""
    field = _as_field(field)
    n, x = conn.n, conn.coords
    p = curvature_exprs(conn).schouten
    _, rho = lie_derivative_exprs(conn, field)
    binding = conn.binding(point)
    worst = 0.0
    for i in range(n):
        for j in range(n):
            lie = ZERO
            for m in range(n):
                lie = dsl.add(lie, dsl.mul(field.components[m], p[i][j].diff(x[m])))
                lie = dsl.add(lie, dsl.mul(p[m][j], field.components[m].diff(x[i])))
                lie = dsl.add(lie, dsl.mul(p[i][m], field.components[m].diff(x[j])))
            nabla = rho[j].diff(x[i])
            for m in range(n):
                nabla = dsl.sub(nabla, dsl.mul(conn.gamma[m][i][j], rho[m]))
            worst = max(worst, abs(lie.eval(binding) + nabla.eval(binding)))
    return worst
