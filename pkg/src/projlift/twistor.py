"""Charged geodesic spray, Higgs pair, and gauge-theoretic residual checks.

The geometric side lives on the 6-dimensional space (x, xi, pi): the spray
plus a fibre-valued gauge term spans, together with the Higgs vector field,
a rank-2 distribution whose Frobenius integrability certifies that the
corresponding metric family is anti-self-dual.  The matrix side implements
the projectively invariant pair equation D_(i phi_j) = 0, its null-ASDYM
form, and the once-prolonged closed system with its integrability condition.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from typing import Optional, Sequence

import numpy as np

from . import dsl
from .dsl import Expr, ZERO, as_expr, const, var
from .lift import MetricFamily, fiber_coords
from .projective import ConnectionN, curvature_exprs, special_residual


class DegenerateSpanError(RuntimeError):
    """The spray and Higgs field are (numerically) parallel at this point."""


class NonSpecialConnectionError(ValueError):
    def __init__(self, residual: float):
        super().__init__(
            f"connection does not preserve dx^1^dx^2 (volume residual {residual:.3e}); "
            "the prolongation needs a special connection"
        )
        self.residual = residual


EPS2 = ((0.0, 1.0), (-1.0, 0.0))  # eps_12 = 1 = -eps_21


def pi_coords(n: int = 2) -> tuple[str, ...]:
    return tuple(f"pi{i+1}" for i in range(n))


@dataclass(frozen=True)
class SprayField:
    """Vector field pi^i d_i - Gamma^k_ij pi^i pi^j d_{pi^k} + pi^i A_i."""

    coords: tuple[str, ...]
    components: tuple[Expr, ...]
    mode: str
    connection: ConnectionN

    def evaluate(self, point: Sequence[float]) -> np.ndarray:
        binding = dict(zip(self.coords, map(float, point)))
        return np.array([c.eval(binding) for c in self.components])


@dataclass(frozen=True)
class HiggsPair:
    """Fibre vector field pi^i phi_i, with phi_i = (weight) eps_ij d/dxi_j."""

    coords: tuple[str, ...]
    components: tuple[Expr, ...]
    mode: str

    def evaluate(self, point: Sequence[float]) -> np.ndarray:
        binding = dict(zip(self.coords, map(float, point)))
        return np.array([c.eval(binding) for c in self.components])


def _theta_from_mode(conn: ConnectionN, m_entries, mode: str, lam: float, conv):
    n = conn.n
    xi = [var(name) for name in fiber_coords(conn.coords)]
    theta = [[ZERO for _ in range(n)] for _ in range(n)]
    for i, j in product(range(n), repeat=2):
        e = ZERO
        for k in range(n):
            e = dsl.add(e, dsl.mul(conn.gamma[k][i][j], xi[k]))
        if mode in ("einstein", "modified"):
            e = dsl.sub(e, dsl.mul(const(lam), dsl.mul(xi[i], xi[j])))
            e = dsl.sub(e, m_entries[i][j])
        theta[i][j] = e
    return theta


def spray_field(
    conn: ConnectionN,
    m_entries=None,
    mode: str = "einstein",
    lam: float = 1.0,
    conv=None,
) -> SprayField:
    """Build the charged spray for one of the three gauge choices.

    einstein: A_i = (P_ij + lam xi_i xi_j - Gamma^k_ij xi_k) d/dxi_j
    modified: same with a general matrix M in place of the Schouten tensor
    walker:   A_i = -Gamma^k_ij xi_k d/dxi_j (no quadratic term)
    """
    if conn.n != 2:
        raise ValueError("the twistor distribution is implemented for n = 2")
    if mode not in ("einstein", "modified", "walker"):
        raise ValueError(f"unknown spray mode {mode!r}")
    if mode == "einstein":
        if conv is None:
            from . import conventions

            conv = conventions.active()
        p = curvature_exprs(conn).schouten
        sigma = conv.schouten_sign
        m_entries = tuple(
            tuple(dsl.mul(const(sigma / lam), p[j][i]) for j in range(2)) for i in range(2)
        )
    elif mode == "modified":
        if m_entries is None:
            raise ValueError("modified mode needs the matrix M")
        m_entries = tuple(tuple(as_expr(m_entries[i][j]) for j in range(2)) for i in range(2))
        lam = 1.0
    theta = _theta_from_mode(conn, m_entries, mode, lam, conv)
    coords = conn.coords + fiber_coords(conn.coords) + pi_coords(2)
    pi = [var(name) for name in pi_coords(2)]
    comps = []
    for i in range(2):
        comps.append(pi[i])
    for j in range(2):
        e = ZERO
        for i in range(2):
            e = dsl.add(e, dsl.mul(pi[i], theta[i][j]))
        comps.append(e)
    for k in range(2):
        e = ZERO
        for i, j in product(range(2), repeat=2):
            e = dsl.sub(e, dsl.mul(conn.gamma[k][i][j], dsl.mul(pi[i], pi[j])))
        comps.append(e)
    return SprayField(coords=coords, components=tuple(comps), mode=mode, connection=conn)


def spray_for_metric(metric: MetricFamily, conv=None) -> SprayField:
    """Spray whose distribution certifies anti-self-duality of the given
    family, reading Theta off the metric components (symmetric part)."""
    if metric.connection is None:
        raise ValueError("metric does not carry its source connection")
    if metric.n != 2:
        raise ValueError("the twistor distribution is implemented for n = 2")
    conn = metric.connection
    coords = metric.coords + pi_coords(2)
    pi = [var(name) for name in pi_coords(2)]
    scale = const(-1.0 / (2.0 * metric.kappa))
    comps = [pi[0], pi[1]]
    for j in range(2):
        e = ZERO
        for i in range(2):
            e = dsl.add(e, dsl.mul(pi[i], dsl.mul(scale, metric.comp[i][j])))
        comps.append(e)
    for k in range(2):
        e = ZERO
        for i, j in product(range(2), repeat=2):
            e = dsl.sub(e, dsl.mul(conn.gamma[k][i][j], dsl.mul(pi[i], pi[j])))
        comps.append(e)
    return SprayField(coords=coords, components=tuple(comps), mode="metric", connection=conn)


def higgs_field(conn: ConnectionN, mode: str = "einstein", b: Optional[Sequence[float]] = None) -> HiggsPair:
    """pi^i eps_ij d/dxi_j, weighted by b^k xi_k in Walker mode."""
    coords = conn.coords + fiber_coords(conn.coords) + pi_coords(2)
    pi = [var(name) for name in pi_coords(2)]
    xi = [var(name) for name in fiber_coords(conn.coords)]
    weight = const(1.0)
    if mode == "walker":
        if b is None:
            b = (1.0, 1.0)
        weight = dsl.add(dsl.mul(const(b[0]), xi[0]), dsl.mul(const(b[1]), xi[1]))
    comps = [ZERO, ZERO]
    for j in range(2):
        e = ZERO
        for i in range(2):
            e = dsl.add(e, dsl.mul(const(EPS2[i][j]), pi[i]))
        comps.append(dsl.mul(weight, e))
    comps.extend([ZERO, ZERO])
    return HiggsPair(coords=coords, components=tuple(comps), mode=mode)


@lru_cache(maxsize=None)
def _bracket_exprs(coords: tuple[str, ...], v: tuple[Expr, ...], w: tuple[Expr, ...]):
    out = []
    for a in range(len(coords)):
        e = ZERO
        for b in range(len(coords)):
            e = dsl.add(e, dsl.mul(v[b], w[a].diff(coords[b])))
            e = dsl.sub(e, dsl.mul(w[b], v[a].diff(coords[b])))
        out.append(e)
    return tuple(out)


@dataclass(frozen=True)
class SpanResult:
    residual: float
    alpha: float
    beta: float
    bracket: np.ndarray


def bracket_span_residual(theta: SprayField, phi: HiggsPair, point: Sequence[float]) -> SpanResult:
    """Least-squares decomposition [Theta, phi] = alpha Theta + beta phi.

    The residual is scaled by 1/(|[Theta, phi]| + 1); a small value certifies
    Frobenius integrability of the distribution at the point.
    """
    if theta.coords != phi.coords:
        raise ValueError("spray and Higgs field live on different coordinate charts")
    br_exprs = _bracket_exprs(theta.coords, theta.components, phi.components)
    binding = dict(zip(theta.coords, map(float, point)))
    br = np.array([c.eval(binding) for c in br_exprs])
    t_vals = np.array([c.eval(binding) for c in theta.components])
    p_vals = np.array([c.eval(binding) for c in phi.components])
    basis = np.column_stack([t_vals, p_vals])
    svals = np.linalg.svd(basis, compute_uv=False)
    if svals[-1] < 1e-8 * max(svals[0], 1.0):
        raise DegenerateSpanError("spray and Higgs field nearly parallel; resample the point")
    coef, *_ = np.linalg.lstsq(basis, br, rcond=None)
    residual = float(np.max(np.abs(br - basis @ coef))) / (float(np.max(np.abs(br))) + 1.0)
    return SpanResult(residual=residual, alpha=float(coef[0]), beta=float(coef[1]), bracket=br)


def expected_bracket_coefficient(conn: ConnectionN, point: Sequence[float], lam: float = 1.0) -> float:
    """-pi^j Gamma^k_jk + lam pi^j xi_j, the coefficient in the integrability proof."""
    binding = dict(zip(conn.coords + fiber_coords(conn.coords) + pi_coords(2), map(float, point)))
    value = 0.0
    for j in range(2):
        pi_j = binding[f"pi{j+1}"]
        trace = sum(conn.gamma[k][j][k].eval(binding) for k in range(2))
        value += -pi_j * trace + lam * pi_j * binding[f"xi{j+1}"]
    return value


# ---------------------------------------------------------------------------
# Matrix (gauge algebra) mode
# ---------------------------------------------------------------------------

Matrix = tuple  # tuple of tuples of Expr


def as_matrix(entries) -> Matrix:
    return tuple(tuple(as_expr(e) for e in row) for row in entries)


def _mat_add(a: Matrix, b: Matrix) -> Matrix:
    return tuple(tuple(dsl.add(x, y) for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def _mat_sub(a: Matrix, b: Matrix) -> Matrix:
    return tuple(tuple(dsl.sub(x, y) for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def _mat_scale(c, a: Matrix) -> Matrix:
    ce = as_expr(c)
    return tuple(tuple(dsl.mul(ce, x) for x in row) for row in a)


def _mat_mul(a: Matrix, b: Matrix) -> Matrix:
    m = len(a)
    out = []
    for i in range(m):
        row = []
        for j in range(m):
            e = ZERO
            for k in range(m):
                e = dsl.add(e, dsl.mul(a[i][k], b[k][j]))
            row.append(e)
        out.append(tuple(row))
    return tuple(out)


def _mat_comm(a: Matrix, b: Matrix) -> Matrix:
    return _mat_sub(_mat_mul(a, b), _mat_mul(b, a))


def _mat_diff(a: Matrix, name: str) -> Matrix:
    return tuple(tuple(x.diff(name) for x in row) for row in a)


def _mat_zero(m: int) -> Matrix:
    return tuple(tuple(ZERO for _ in range(m)) for _ in range(m))


def _mat_eval(a: Matrix, binding) -> np.ndarray:
    return np.array([[x.eval(binding) for x in row] for row in a])


def _covariant_matrix_derivative(a_mats, phi, conn: ConnectionN):
    """D_i phi_j = d_i phi_j - Gamma^k_ij phi_k - [A_i, phi_j]."""
    n, x = conn.n, conn.coords
    out = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            d = _mat_diff(phi[j], x[i])
            for k in range(n):
                d = _mat_sub(d, _mat_scale(conn.gamma[k][i][j], phi[k]))
            d = _mat_sub(d, _mat_comm(a_mats[i], phi[j]))
            out[i][j] = d
    return out


def calderbank_residual(a_mats, phi_mats, conn: ConnectionN, point: Sequence[float]) -> float:
    """max-norm of the symmetrized pair equation D_(i phi_j) at the point."""
    a_mats = tuple(as_matrix(a) for a in a_mats)
    phi_mats = tuple(as_matrix(p) for p in phi_mats)
    if len(a_mats) != conn.n or len(phi_mats) != conn.n:
        raise ValueError("need one connection and one Higgs matrix per base direction")
    m = len(phi_mats[0])
    for mat in (*a_mats, *phi_mats):
        if any(len(row) != m for row in mat) or len(mat) != m:
            raise ValueError("gauge matrices must be square and of equal size")
    dphi = _covariant_matrix_derivative(a_mats, phi_mats, conn)
    binding = conn.binding(point)
    worst = 0.0
    for i in range(conn.n):
        for j in range(i, conn.n):
            sym = _mat_scale(const(0.5), _mat_add(dphi[i][j], dphi[j][i]))
            worst = max(worst, float(np.max(np.abs(_mat_eval(sym, binding)))))
    return worst


def asdym_equations(a_mats, phi_mats, conn: ConnectionN, point: Sequence[float]):
    """Residuals of the three null-reduced ASDYM equations
    (D_1 phi_1, D_2 phi_2, D_1 phi_2 + D_2 phi_1)."""
    a_mats = tuple(as_matrix(a) for a in a_mats)
    phi_mats = tuple(as_matrix(p) for p in phi_mats)
    dphi = _covariant_matrix_derivative(a_mats, phi_mats, conn)
    binding = conn.binding(point)
    r11 = float(np.max(np.abs(_mat_eval(dphi[0][0], binding))))
    r22 = float(np.max(np.abs(_mat_eval(dphi[1][1], binding))))
    r12 = float(np.max(np.abs(_mat_eval(_mat_add(dphi[0][1], dphi[1][0]), binding))))
    return r11, r22, r12


@dataclass(frozen=True)
class ProlongationResult:
    mu: np.ndarray
    closure_residual: float
    integrability_residual: float


def prolongation_check(a_mats, phi_mats, conn: ConnectionN, point: Sequence[float]) -> ProlongationResult:
    """Once-prolonged pair system with mu := eps^{ij} D_i phi_j.

    closure_residual:       |D_i phi_j - mu eps_ij / 2| (zero iff the pair
                            equation holds);
    integrability_residual: |[F, mu] - (D_1 G_2 - D_2 G_1)| where
                            G_i = 2 [phi_i, F] - 2 eps^{kl} P_ki phi_l
                            and F is the gauge curvature with the sign fixed
                            by [D_1, D_2] = ad(F) on adjoint sections.

    The Schouten correction in G vanishes for a flat projective structure,
    recovering the null-ASDYM form of the condition.
    """
    special = special_residual(conn, ZERO, point)
    if special > 1e-10:
        raise NonSpecialConnectionError(special)
    a_mats = tuple(as_matrix(a) for a in a_mats)
    phi_mats = tuple(as_matrix(p) for p in phi_mats)
    x = conn.coords
    dphi = _covariant_matrix_derivative(a_mats, phi_mats, conn)
    mu = _mat_sub(dphi[0][1], dphi[1][0])  # eps^{ij} D_i phi_j with eps^{12} = 1
    binding = conn.binding(point)
    closure = 0.0
    eps = EPS2
    for i in range(2):
        for j in range(2):
            gap = _mat_sub(dphi[i][j], _mat_scale(const(0.5 * eps[i][j]), mu))
            closure = max(closure, float(np.max(np.abs(_mat_eval(gap, binding)))))
    # F with [D_1, D_2] = ad(F) for D = d - ad(A):
    f_mat = _mat_add(
        _mat_sub(_mat_diff(a_mats[0], x[1]), _mat_diff(a_mats[1], x[0])),
        _mat_comm(a_mats[0], a_mats[1]),
    )
    p_exprs = curvature_exprs(conn).schouten
    g_vecs = []
    for i in range(2):
        g_i = _mat_scale(const(2.0), _mat_comm(phi_mats[i], f_mat))
        # - 2 eps^{kl} P_ki phi_l = -2 (P_1i phi_2 - P_2i phi_1)
        g_i = _mat_sub(g_i, _mat_scale(dsl.mul(const(2.0), p_exprs[0][i]), phi_mats[1]))
        g_i = _mat_add(g_i, _mat_scale(dsl.mul(const(2.0), p_exprs[1][i]), phi_mats[0]))
        g_vecs.append(g_i)

    def cov_g(i: int, j: int) -> Matrix:
        d = _mat_diff(g_vecs[j], x[i])
        for k in range(2):
            d = _mat_sub(d, _mat_scale(conn.gamma[k][i][j], g_vecs[k]))
        return _mat_sub(d, _mat_comm(a_mats[i], g_vecs[j]))

    lhs = _mat_comm(f_mat, mu)
    rhs = _mat_sub(cov_g(0, 1), cov_g(1, 0))
    integrability = float(np.max(np.abs(_mat_eval(_mat_sub(lhs, rhs), binding))))
    return ProlongationResult(
        mu=_mat_eval(mu, binding),
        closure_residual=closure,
        integrability_residual=integrability,
    )
