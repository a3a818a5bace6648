"""Calculus of torsion-free connections on the 2- or 3-dimensional base.

Curvature convention, from ``[D_i, D_j] X^k = R_ij^k_l X^l``::

    R_ij^k_l = d_i G^k_jl - d_j G^k_il + G^k_im G^m_jl - G^k_jm G^m_il
    Ric_jl   = R_ij^i_l            (contraction on the first and third slot)
    P_ij     = Ric_(ij)/(n-1) + Ric_[ij]/(n+1)

For n = 2 the curvature decomposes as
``R_ij^k_l = d_i^k P_jl - d_j^k P_il - 2 P_[ij] d_l^k`` with no remainder;
for n = 3 the trace-free remainder is the projective Weyl tensor.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from typing import Optional, Sequence

import numpy as np

from . import dsl
from .dsl import Expr, ZERO, as_expr, const

ExprTable = tuple  # nested tuples of Expr


@dataclass(frozen=True)
class VectorField:
    """Vector field on the base, one Expr component per coordinate."""

    components: tuple[Expr, ...]

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(as_expr(c) for c in self.components))


@dataclass(frozen=True)
class OneForm:
    components: tuple[Expr, ...]

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(as_expr(c) for c in self.components))


@dataclass(frozen=True)
class TensorValue:
    """Dense numeric tensor at a point, tagged with index valence.

    ``valence`` holds one of ``"up"``/``"down"`` per slot, in index order.
    """

    values: np.ndarray
    valence: tuple[str, ...]

    def __post_init__(self):
        if self.values.ndim != len(self.valence):
            raise ValueError("valence length must match tensor rank")

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0


@dataclass(frozen=True)
class SchoutenValue:
    """Schouten tensor at a point with its symmetric/antisymmetric split."""

    full: np.ndarray
    sym: np.ndarray
    skew: np.ndarray


@dataclass(frozen=True)
class ConnectionN:
    """Symmetric Christoffel symbols Gamma^k_ij with Expr entries."""

    n: int
    coords: tuple[str, ...]
    gamma: ExprTable  # [k][i][j]

    def __post_init__(self):
        if self.n not in (2, 3):
            raise ValueError("base dimension must be 2 or 3")
        if len(self.coords) != self.n:
            raise ValueError("coordinate list does not match dimension")
        gamma = tuple(
            tuple(tuple(as_expr(self.gamma[k][i][j]) for j in range(self.n)) for i in range(self.n))
            for k in range(self.n)
        )
        object.__setattr__(self, "coords", tuple(self.coords))
        object.__setattr__(self, "gamma", gamma)
        undeclared = self.free_symbols() - set(self.coords)
        if undeclared:
            raise ValueError(f"connection entries use undeclared symbols {sorted(undeclared)}")
        self._check_symmetry()

    def _check_symmetry(self):
        probes = [
            {name: 0.31 + 0.17 * i + 0.05 * p for i, name in enumerate(self.coords)}
            for p in range(3)
        ]
        for k, i, j in product(range(self.n), repeat=3):
            if j <= i:
                continue
            for binding in probes:
                a = self.gamma[k][i][j].eval(binding)
                b = self.gamma[k][j][i].eval(binding)
                if abs(a - b) > 1e-12 * (1.0 + abs(a)):
                    raise ValueError(f"Gamma^{k+1}_{i+1}{j+1} is not symmetric in its lower indices")

    def free_symbols(self) -> set:
        out: set = set()
        for k, i, j in product(range(self.n), repeat=3):
            out |= self.gamma[k][i][j].free_symbols()
        return out

    def entry(self, k: int, i: int, j: int) -> Expr:
        return self.gamma[k][i][j]

    def binding(self, point: Sequence[float]) -> dict[str, float]:
        return dict(zip(self.coords, map(float, point)))

    def evaluate(self, point: Sequence[float]) -> np.ndarray:
        binding = self.binding(point)
        return _eval_table(self.gamma, binding, (self.n,) * 3)


def default_coords(n: int) -> tuple[str, ...]:
    return tuple(f"x{i+1}" for i in range(n))


def zero_connection(n: int = 2, coords: Optional[Sequence[str]] = None) -> ConnectionN:
    coords = tuple(coords) if coords is not None else default_coords(n)
    zero = tuple(tuple(tuple(ZERO for _ in range(n)) for _ in range(n)) for _ in range(n))
    return ConnectionN(n, coords, zero)


def connection_from_entries(
    n: int, entries: dict[tuple[int, int, int], Expr], coords: Optional[Sequence[str]] = None
) -> ConnectionN:
    """Build a connection from 1-based ``(k, i, j)`` entries, mirroring (i, j)."""
    coords = tuple(coords) if coords is not None else default_coords(n)
    table = [[[ZERO for _ in range(n)] for _ in range(n)] for _ in range(n)]
    for (k, i, j), e in entries.items():
        table[k - 1][i - 1][j - 1] = as_expr(e)
        table[k - 1][j - 1][i - 1] = as_expr(e)
    gamma = tuple(tuple(tuple(row) for row in plane) for plane in table)
    return ConnectionN(n, coords, gamma)


def wong_connection(f: Expr, coords: Optional[Sequence[str]] = None) -> ConnectionN:
    """Coordinates adapted to a totally skew Schouten tensor:
    Gamma^1_11 = -df/dx1, Gamma^2_22 = +df/dx2, all other entries zero."""
    coords = tuple(coords) if coords is not None else default_coords(2)
    f = as_expr(f)
    return connection_from_entries(
        2,
        {(1, 1, 1): dsl.neg(f.diff(coords[0])), (2, 2, 2): f.diff(coords[1])},
        coords,
    )


def _eval_table(table, binding, shape) -> np.ndarray:
    out = np.empty(shape)
    for idx in np.ndindex(*shape):
        node = table
        for i in idx:
            node = node[i]
        out[idx] = node.eval(binding)
    return out


@dataclass(frozen=True)
class CurvatureExprs:
    """Symbolic curvature data of a connection (cached per connection)."""

    riemann: ExprTable  # [i][j][k][l] for R_ij^k_l
    ricci: ExprTable  # [j][l]
    schouten: ExprTable  # [i][j]
    weyl: Optional[ExprTable]  # n >= 3 only


@lru_cache(maxsize=None)
def curvature_exprs(conn: ConnectionN) -> CurvatureExprs:
    n, x, g = conn.n, conn.coords, conn.gamma
    riemann = [[[[ZERO for _ in range(n)] for _ in range(n)] for _ in range(n)] for _ in range(n)]
    for i, j, k, l in product(range(n), repeat=4):
        if i == j:
            continue
        e = dsl.sub(g[k][j][l].diff(x[i]), g[k][i][l].diff(x[j]))
        for m in range(n):
            e = dsl.add(e, dsl.sub(dsl.mul(g[k][i][m], g[m][j][l]), dsl.mul(g[k][j][m], g[m][i][l])))
        riemann[i][j][k][l] = e
    ricci = [[ZERO for _ in range(n)] for _ in range(n)]
    for j, l in product(range(n), repeat=2):
        e = ZERO
        for i in range(n):
            e = dsl.add(e, riemann[i][j][i][l])
        ricci[j][l] = e
    schouten = [[ZERO for _ in range(n)] for _ in range(n)]
    for i, j in product(range(n), repeat=2):
        sym = dsl.mul(const(0.5 / (n - 1)), dsl.add(ricci[i][j], ricci[j][i]))
        skew = dsl.mul(const(0.5 / (n + 1)), dsl.sub(ricci[i][j], ricci[j][i]))
        schouten[i][j] = dsl.add(sym, skew)
    weyl = None
    if n >= 3:
        weyl = [[[[ZERO for _ in range(n)] for _ in range(n)] for _ in range(n)] for _ in range(n)]
        for i, j, k, l in product(range(n), repeat=4):
            e = riemann[i][j][k][l]
            if k == i:
                e = dsl.sub(e, schouten[j][l])
            if k == j:
                e = dsl.add(e, schouten[i][l])
            if k == l:
                skew_ij = dsl.mul(const(0.5), dsl.sub(schouten[i][j], schouten[j][i]))
                e = dsl.add(e, dsl.mul(const(2.0), skew_ij))
            weyl[i][j][k][l] = e
    freeze = lambda t: tuple(tuple(tuple(tuple(r) for r in p) for p in q) for q in t)  # noqa: E731
    return CurvatureExprs(
        riemann=freeze(riemann),
        ricci=tuple(tuple(row) for row in ricci),
        schouten=tuple(tuple(row) for row in schouten),
        weyl=freeze(weyl) if weyl is not None else None,
    )


def connection_curvature(conn: ConnectionN, point: Sequence[float]):
    """Evaluate (Riemann, Ricci, Schouten, projective Weyl) at a point."""
    sym = curvature_exprs(conn)
    binding = conn.binding(point)
    n = conn.n
    riem = TensorValue(_eval_table(sym.riemann, binding, (n,) * 4), ("down", "down", "up", "down"))
    ric = _eval_table(sym.ricci, binding, (n, n))
    p = _eval_table(sym.schouten, binding, (n, n))
    schouten = SchoutenValue(full=p, sym=0.5 * (p + p.T), skew=0.5 * (p - p.T))
    weyl = None
    if sym.weyl is not None:
        weyl = TensorValue(_eval_table(sym.weyl, binding, (n,) * 4), ("down", "down", "up", "down"))
    return riem, ric, schouten, weyl


def schouten_to_riemann(p: np.ndarray) -> np.ndarray:
    """Rebuild R_ij^k_l from the Schouten tensor (n = 2, no remainder)."""
    n = p.shape[0]
    skew = 0.5 * (p - p.T)
    riem = np.zeros((n, n, n, n))
    for i, j, k, l in product(range(n), repeat=4):
        value = 0.0
        if k == i:
            value += p[j, l]
        if k == j:
            value -= p[i, l]
        if k == l:
            value -= 2.0 * skew[i, j]
        riem[i, j, k, l] = value
    return riem


def projective_change(conn: ConnectionN, upsilon: OneForm | Sequence[Expr]) -> ConnectionN:
    """Same unparametrised geodesics: Gamma^i_jk + d^i_j Y_k + d^i_k Y_j."""
    ups = upsilon.components if isinstance(upsilon, OneForm) else tuple(as_expr(u) for u in upsilon)
    n = conn.n
    if len(ups) != n:
        raise ValueError("one-form length does not match dimension")
    gamma = [
        [
            [
                dsl.add(
                    conn.gamma[k][i][j],
                    dsl.add(
                        ups[j] if k == i else ZERO,
                        ups[i] if k == j else ZERO,
                    ),
                )
                for j in range(n)
            ]
            for i in range(n)
        ]
        for k in range(n)
    ]
    return ConnectionN(n, conn.coords, tuple(tuple(tuple(r) for r in p) for p in gamma))


@lru_cache(maxsize=None)
def lie_derivative_exprs(conn: ConnectionN, field: VectorField):
    """(L_K Gamma)^k_ij and the trace one-form rho_j = (L_K Gamma)^k_kj / (n+1)."""
    n, x, g = conn.n, conn.coords, conn.gamma
    k_comp = field.components
    if len(k_comp) != n:
        raise ValueError("vector field length does not match dimension")
    lkg = [[[ZERO for _ in range(n)] for _ in range(n)] for _ in range(n)]
    for k, i, j in product(range(n), repeat=3):
        e = k_comp[k].diff(x[i]).diff(x[j])
        for m in range(n):
            e = dsl.add(e, dsl.mul(k_comp[m], g[k][i][j].diff(x[m])))
            e = dsl.sub(e, dsl.mul(g[m][i][j], k_comp[k].diff(x[m])))
            e = dsl.add(e, dsl.mul(g[k][i][m], k_comp[m].diff(x[j])))
            e = dsl.add(e, dsl.mul(g[k][j][m], k_comp[m].diff(x[i])))
        lkg[k][i][j] = e
    rho = []
    for j in range(n):
        e = ZERO
        for k in range(n):
            e = dsl.add(e, lkg[k][k][j])
        rho.append(dsl.mul(const(1.0 / (n + 1)), e))
    return tuple(tuple(tuple(r) for r in p) for p in lkg), tuple(rho)


def lie_derivative_connection(conn: ConnectionN, field: VectorField, point: Sequence[float]):
    """Evaluate (L_K Gamma, rho, projective residual) at a point.

    A zero residual certifies that K is projective there; rho == 0 in
    addition certifies that it is affine.
    """
    lkg_sym, rho_sym = lie_derivative_exprs(conn, field)
    binding = conn.binding(point)
    n = conn.n
    lkg = _eval_table(lkg_sym, binding, (n,) * 3)
    rho = np.array([r.eval(binding) for r in rho_sym])
    residual = 0.0
    for k, i, j in product(range(n), repeat=3):
        expected = (rho[j] if k == i else 0.0) + (rho[i] if k == j else 0.0)
        residual = max(residual, abs(lkg[k, i, j] - expected))
    return TensorValue(lkg, ("up", "down", "down")), rho, residual


@lru_cache(maxsize=None)
def _schouten_gradient_exprs(conn: ConnectionN):
    """Covariant derivative D_b P_ca of the Schouten tensor, symbolically."""
    n, x, g = conn.n, conn.coords, conn.gamma
    p = curvature_exprs(conn).schouten
    grad = [[[ZERO for _ in range(n)] for _ in range(n)] for _ in range(n)]
    for b, c, a in product(range(n), repeat=3):
        e = p[c][a].diff(x[b])
        for m in range(n):
            e = dsl.sub(e, dsl.mul(g[m][b][c], p[m][a]))
            e = dsl.sub(e, dsl.mul(g[m][b][a], p[c][m]))
        grad[b][c][a] = e
    return tuple(tuple(tuple(r) for r in p_) for p_ in grad)


def liouville(conn: ConnectionN, point: Sequence[float]) -> np.ndarray:
    """l_a = eps^{bc} D_b P_ca with eps^{12} = 1; vanishes iff projectively flat."""
    if conn.n != 2:
        raise ValueError("Liouville tensor is defined for n = 2")
    grad = _schouten_gradient_exprs(conn)
    binding = conn.binding(point)
    values = _eval_table(grad, binding, (2, 2, 2))
    return np.array([values[0, 1, a] - values[1, 0, a] for a in range(2)])


def special_residual(conn: ConnectionN, h: Expr, point: Sequence[float]) -> float:
    """Deviation of the connection from preserving the volume form e^h dx^1^...^dx^n.

    Reduces to max_i |Gamma^m_im - d_i h| at the point.
    """
    h = as_expr(h)
    binding = conn.binding(point)
    worst = 0.0
    for i in range(conn.n):
        trace = sum(conn.gamma[m][i][m].eval(binding) for m in range(conn.n))
        worst = max(worst, abs(trace - h.diff(conn.coords[i]).eval(binding)))
    return worst


def ode_coefficients(conn: ConnectionN) -> tuple[Expr, Expr, Expr, Expr]:
    """Coefficients (A3, A2, A1, A0) of the geodesic ODE
    y'' = A3 y'^3 + A2 y'^2 + A1 y' + A0."""
    if conn.n != 2:
        raise ValueError("the scalar geodesic ODE is defined for n = 2")
    g = conn.gamma
    a3 = g[0][1][1]
    a2 = dsl.sub(dsl.mul(const(2.0), g[0][0][1]), g[1][1][1])
    a1 = dsl.sub(g[0][0][0], dsl.mul(const(2.0), g[1][0][1]))
    a0 = dsl.neg(g[1][0][0])
    return a3, a2, a1, a0


def thomas_symbols(conn: ConnectionN) -> ConnectionN:
    """Trace-free part Pi^k_ij = Gamma^k_ij - (d^k_j T_i + d^k_i T_j)/(n+1),
    with T_i = Gamma^l_il."""
    n = conn.n
    traces = []
    for i in range(n):
        e = ZERO
        for l in range(n):
            e = dsl.add(e, conn.gamma[l][i][l])
        traces.append(dsl.mul(const(1.0 / (n + 1)), e))
    gamma = [
        [
            [
                dsl.sub(
                    conn.gamma[k][i][j],
                    dsl.add(traces[i] if k == j else ZERO, traces[j] if k == i else ZERO),
                )
                for j in range(n)
            ]
            for i in range(n)
        ]
        for k in range(n)
    ]
    return ConnectionN(n, conn.coords, tuple(tuple(tuple(r) for r in p) for p in gamma))
