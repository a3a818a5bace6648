"""Metric families on the rank-2 fibre extension of the base surface.

Every family is assembled from a table Theta_ij(x, xi) through

    g = kappa * Sym[(d xi_i - Theta_ij dx^j) (x) dx^i]

so that g(d/dx^i, d/dxi_j) = kappa d_ij, the fibre distribution is totally
null, and g_xx = -kappa (Theta_ij + Theta_ji).  The normalization kappa and
the Schouten sign branch are supplied by :mod:`projlift.conventions`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Optional, Sequence

import numpy as np

from . import dsl
from .dsl import Expr, ZERO, as_expr, const, var
from .projective import (
    ConnectionN,
    OneForm,
    curvature_exprs,
    projective_change,
    wong_connection,
    zero_connection,
)


class ParaStructureError(RuntimeError):
    """Neither sign choice produced an involutive endomorphism."""


def fiber_coords(base: Sequence[str]) -> tuple[str, ...]:
    names = tuple(f"xi{i+1}" for i in range(len(base)))
    if set(names) & set(base):
        raise ValueError("base coordinate names collide with fibre names xi1..xin")
    return names


@dataclass(eq=False)
class MetricFamily:
    """2n-dimensional metric, polynomial of degree <= 2 in the fibre coordinates."""

    n: int
    family: str
    lam: float
    coords: tuple[str, ...]  # x^1..x^n, xi_1..xi_n
    comp: tuple  # [a][b] Expr, symmetric
    kappa: float
    connection: Optional[ConnectionN] = None
    m_table: Optional[tuple] = None
    notes: str = ""
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def dim(self) -> int:
        return 2 * self.n

    @property
    def base_coords(self) -> tuple[str, ...]:
        return self.coords[: self.n]

    @property
    def fiber_names(self) -> tuple[str, ...]:
        return self.coords[self.n:]

    def component(self, a: int, b: int) -> Expr:
        return self.comp[a][b]

    def binding(self, point: Sequence[float]) -> dict[str, float]:
        return dict(zip(self.coords, map(float, point)))

    def evaluate(self, point: Sequence[float]) -> np.ndarray:
        binding = self.binding(point)
        d = self.dim
        out = np.empty((d, d))
        for a in range(d):
            for b in range(a, d):
                out[a, b] = out[b, a] = self.comp[a][b].eval(binding)
        return out


@dataclass(eq=False)
class SympForm:
    """Charged symplectic form; antisymmetric Expr component table."""

    n: int
    lam: float
    coords: tuple[str, ...]
    comp: tuple
    kappa: float
    connection: Optional[ConnectionN] = None

    @property
    def dim(self) -> int:
        return 2 * self.n

    def binding(self, point: Sequence[float]) -> dict[str, float]:
        return dict(zip(self.coords, map(float, point)))

    def evaluate(self, point: Sequence[float]) -> np.ndarray:
        binding = self.binding(point)
        d = self.dim
        out = np.empty((d, d))
        for a in range(d):
            for b in range(d):
                out[a, b] = self.comp[a][b].eval(binding)
        return out


@dataclass(frozen=True)
class ParaStructure:
    """Para-complex endomorphism with its eigenbundle bases at a point."""

    endo: np.ndarray
    basis_plus: np.ndarray  # columns span the +1 eigenbundle
    basis_minus: np.ndarray
    sign: int


def _active_conventions(conv):
    if conv is not None:
        return conv
    from . import conventions

    return conventions.active()


def assemble_metric(
    conn: ConnectionN,
    theta,
    family: str,
    lam: float,
    conv=None,
    m_table=None,
    notes: str = "",
) -> MetricFamily:
    """Build the metric table from Theta_ij (Expr entries over x and xi)."""
    conv = _active_conventions(conv)
    n = conn.n
    coords = conn.coords + fiber_coords(conn.coords)
    kappa = conv.kappa
    d = 2 * n
    comp = [[ZERO for _ in range(d)] for _ in range(d)]
    for i, j in product(range(n), repeat=2):
        comp[i][j] = dsl.mul(const(-kappa), dsl.add(theta[i][j], theta[j][i]))
    for i in range(n):
        comp[i][n + i] = const(kappa)
        comp[n + i][i] = const(kappa)
    table = tuple(tuple(row) for row in comp)
    return MetricFamily(
        n=n,
        family=family,
        lam=float(lam),
        coords=coords,
        comp=table,
        kappa=kappa,
        connection=conn,
        m_table=m_table,
        notes=notes,
    )


def _gamma_xi(conn: ConnectionN, xi: Sequence[Expr], i: int, j: int) -> Expr:
    e = ZERO
    for k in range(conn.n):
        e = dsl.add(e, dsl.mul(conn.gamma[k][i][j], xi[k]))
    return e


def einstein_lift(conn: ConnectionN, lam: float, conv=None) -> MetricFamily:
    """Theta_ij = Gamma^k_ij xi_k - lam xi_i xi_j - P_ji / lam.

    The transposed Schouten index order is deliberate; only its symmetric
    part survives the symmetrized product.
    """
    if lam == 0.0:
        raise ValueError(
            "the Einstein family needs lam != 0; the Ricci-flat limit exists only "
            "for skew Schouten tensors (use skew_ricci_flat)"
        )
    conv = _active_conventions(conv)
    n = conn.n
    xi = [var(name) for name in fiber_coords(conn.coords)]
    p = curvature_exprs(conn).schouten
    sigma = conv.schouten_sign
    theta = [
        [
            dsl.sub(
                dsl.sub(_gamma_xi(conn, xi, i, j), dsl.mul(const(lam), dsl.mul(xi[i], xi[j]))),
                dsl.mul(const(sigma / lam), p[j][i]),
            )
            for j in range(n)
        ]
        for i in range(n)
    ]
    return assemble_metric(conn, theta, "einstein", lam, conv)


def walker_lift(conn: ConnectionN, conv=None) -> MetricFamily:
    """Riemannian extension g = Sym[(d xi_i - Gamma^k_ij xi_k dx^j)(x)dx^i]."""
    if conn.n != 2:
        raise ValueError("the Walker lift is implemented for n = 2")
    xi = [var(name) for name in fiber_coords(conn.coords)]
    theta = [[_gamma_xi(conn, xi, i, j) for j in range(2)] for i in range(2)]
    return assemble_metric(conn, theta, "walker", 0.0, conv)


def modified_walker(conn: ConnectionN, m_entries, conv=None) -> MetricFamily:
    """Theta_ij = Gamma^k_ij xi_k - xi_i xi_j - M_ij (unit scalar normalization).

    Anti-self-dual for every (Gamma, M); Einstein precisely when M equals the
    symmetrized Schouten tensor of Gamma.
    """
    if conn.n != 2:
        raise ValueError("the modified Walker family is implemented for n = 2")
    m = tuple(tuple(as_expr(m_entries[i][j]) for j in range(2)) for i in range(2))
    xi = [var(name) for name in fiber_coords(conn.coords)]
    theta = [
        [
            dsl.sub(
                dsl.sub(_gamma_xi(conn, xi, i, j), dsl.mul(xi[i], xi[j])),
                m[i][j],
            )
            for j in range(2)
        ]
        for i in range(2)
    ]
    return assemble_metric(conn, theta, "modified_walker", 1.0, conv, m_table=m)


def skew_ricci_flat(f: Expr, lam: float, coords: Optional[Sequence[str]] = None, conv=None) -> MetricFamily:
    """Family over the skew-Schouten coordinates of f; lam = 0 is admitted
    (Ricci-flat limit) because the symmetrized Schouten term vanishes."""
    conn = wong_connection(f, coords)
    xi = [var(name) for name in fiber_coords(conn.coords)]
    theta = [
        [
            dsl.sub(_gamma_xi(conn, xi, i, j), dsl.mul(const(lam), dsl.mul(xi[i], xi[j])))
            for j in range(2)
        ]
        for i in range(2)
    ]
    return assemble_metric(conn, theta, "skew", lam, conv)


def symplectic_form(conn: ConnectionN, lam: float, conv=None) -> SympForm:
    """Omega = kappa (d xi_i ^ dx^i + P_ij dx^i ^ dx^j / lam), wedge = (x) - (x)^T.

    The kappa factor matches the metric normalization so that the pair
    (g, Omega) satisfies g(v, w) = Omega(v, I w) with I^2 = Id.
    """
    if conn.n != 2:
        raise ValueError("the charged symplectic form is implemented for n = 2")
    if lam == 0.0:
        raise ValueError("the charged symplectic form needs lam != 0")
    conv = _active_conventions(conv)
    kappa = conv.kappa
    p = curvature_exprs(conn).schouten
    coords = conn.coords + fiber_coords(conn.coords)
    n = conn.n
    d = 2 * n
    comp = [[ZERO for _ in range(d)] for _ in range(d)]
    for i in range(n):
        comp[n + i][i] = const(kappa)
        comp[i][n + i] = const(-kappa)
    for i, j in product(range(n), repeat=2):
        comp[i][j] = dsl.mul(const(conv.schouten_sign * kappa / lam), dsl.sub(p[i][j], p[j][i]))
    return SympForm(
        n=n, lam=float(lam), coords=coords, comp=tuple(tuple(r) for r in comp),
        kappa=kappa, connection=conn,
    )


def canonical_symplectic(n: int = 2, coords: Optional[Sequence[str]] = None, conv=None) -> SympForm:
    return symplectic_form(zero_connection(n, coords), 1.0, conv)


def exterior_derivative_residual(omega: SympForm, point: Sequence[float]) -> float:
    """max |(dOmega)_abc| at the point, from exact derivatives of the components."""
    binding = omega.binding(point)
    d = omega.dim
    worst = 0.0
    for a in range(d):
        for b in range(a + 1, d):
            for c in range(b + 1, d):
                value = (
                    omega.comp[b][c].diff(omega.coords[a]).eval(binding)
                    - omega.comp[a][c].diff(omega.coords[b]).eval(binding)
                    + omega.comp[a][b].diff(omega.coords[c]).eval(binding)
                )
                worst = max(worst, abs(value))
    return worst


def para_structure(
    metric: MetricFamily, omega: SympForm, point: Sequence[float], tol: float = 1e-9
) -> ParaStructure:
    """I = s g^{-1} Omega with the sign fixed by I(d/dxi) = -d/dxi."""
    if metric.lam != omega.lam:
        raise ValueError("metric and symplectic form carry different lam values")
    g = metric.evaluate(point)
    om = omega.evaluate(point)
    d = metric.dim
    n = metric.n
    base = np.linalg.solve(g, om)
    for sign in (1, -1):
        endo = sign * base
        if np.max(np.abs(endo @ endo - np.eye(d))) > tol:
            continue
        fiber_ok = all(
            np.max(np.abs(endo[:, n + i] + np.eye(d)[:, n + i])) < tol for i in range(n)
        )
        if not fiber_ok:
            continue
        basis_minus = np.eye(d)[:, n:]
        plus_proj = 0.5 * (endo + np.eye(d))
        u, s, _ = np.linalg.svd(plus_proj)
        basis_plus = u[:, : int(np.sum(s > 1e-8))]
        return ParaStructure(endo=endo, basis_plus=basis_plus, basis_minus=basis_minus, sign=sign)
    raise ParaStructureError(
        "no sign of g^{-1} Omega squares to the identity with the fibre as -1 eigenbundle"
    )


def gauge_shift(metric: MetricFamily, upsilon: OneForm | Sequence[Expr], lam: Optional[float] = None) -> MetricFamily:
    """Rewrite the Einstein-family metric in fibre coordinates translated by
    Y_i / lam, i.e. substitute xi_i -> xi_i - Y_i / lam and transform.

    The result has the same components as the lift of the projectively
    changed connection, which is the invariance statement being exercised.
    """
    if metric.family != "einstein":
        raise ValueError("gauge_shift applies to the Einstein family")
    if lam is None:
        lam = metric.lam
    if lam != metric.lam:
        raise ValueError("lam does not match the metric family parameter")
    ups = upsilon.components if isinstance(upsilon, OneForm) else tuple(as_expr(u) for u in upsilon)
    n = metric.n
    if len(ups) != n:
        raise ValueError("one-form length does not match dimension")
    d = metric.dim
    shift = [dsl.mul(const(-1.0 / lam), ups[i]) for i in range(n)]
    mapping = {
        metric.fiber_names[i]: dsl.add(var(metric.fiber_names[i]), shift[i]) for i in range(n)
    }
    # Jacobian of the shift map: identity plus the d(shift)/dx block.
    jac = [[ZERO for _ in range(d)] for _ in range(d)]
    for a in range(d):
        jac[a][a] = dsl.const(1.0)
    for i in range(n):
        for j in range(n):
            jac[n + j][i] = shift[j].diff(metric.base_coords[i])
    pulled = [[ZERO for _ in range(d)] for _ in range(d)]
    moved = [[metric.comp[c][e].subs(mapping) for e in range(d)] for c in range(d)]
    for a in range(d):
        for b in range(a, d):
            e_ab = ZERO
            for c in range(d):
                for e in range(d):
                    term = dsl.mul(jac[c][a], dsl.mul(jac[e][b], moved[c][e]))
                    e_ab = dsl.add(e_ab, term)
            pulled[a][b] = e_ab
            pulled[b][a] = e_ab
    return MetricFamily(
        n=n,
        family="einstein",
        lam=metric.lam,
        coords=metric.coords,
        comp=tuple(tuple(r) for r in pulled),
        kappa=metric.kappa,
        connection=None,
        notes="gauge-shifted",
    )
