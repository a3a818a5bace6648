"""Pointwise curvature engine for metric families, over exact symbolic jets.

Everything is evaluated numerically at sample points, but every derivative
entering a formula is an exact symbolic derivative of the metric components;
no finite differencing is used outside of tests.  The Levi-Civita curvature
uses the same index layout as :mod:`projlift.projective`, with a global sign
branch fixed by calibration so that the flat-model lift has scalar curvature
-24 lam (see :mod:`projlift.conventions`).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, product
from typing import Optional, Sequence

import numpy as np

from .dsl import Expr
from .lift import MetricFamily, SympForm


def _conv(conv):
    if conv is not None:
        return conv
    from . import conventions

    return conventions.active()


class MetricJet:
    """Exact value/first/second derivative tables of the metric components."""

    def __init__(self, metric: MetricFamily):
        self.metric = metric
        d = metric.dim
        coords = metric.coords
        comp = metric.comp
        self.d1 = [
            [[comp[a][b].diff(coords[c]) for b in range(d)] for a in range(d)] for c in range(d)
        ]
        self.d2 = [
            [
                [[self.d1[c][a][b].diff(coords[e]) for b in range(d)] for a in range(d)]
                for c in range(d)
            ]
            for e in range(d)
        ]

    def evaluate(self, point: Sequence[float]):
        metric = self.metric
        d = metric.dim
        binding = metric.binding(point)
        g = np.empty((d, d))
        dg = np.empty((d, d, d))
        d2g = np.empty((d, d, d, d))
        for a in range(d):
            for b in range(a, d):
                g[a, b] = g[b, a] = metric.comp[a][b].eval(binding)
                for c in range(d):
                    dg[c, a, b] = dg[c, b, a] = self.d1[c][a][b].eval(binding)
                    for e in range(c, d):
                        value = self.d2[e][c][a][b].eval(binding)
                        d2g[e, c, a, b] = d2g[c, e, a, b] = value
                        d2g[e, c, b, a] = d2g[c, e, b, a] = value
        return g, dg, d2g


def jet(metric: MetricFamily) -> MetricJet:
    cached = metric._cache.get("jet")
    if cached is None:
        cached = MetricJet(metric)
        metric._cache["jet"] = cached
    return cached


@dataclass(frozen=True)
class CurvatureSuite:
    """Levi-Civita data at a point: connection, curvature, traces, Weyl."""

    point: tuple[float, ...]
    g: np.ndarray
    ginv: np.ndarray
    gamma: np.ndarray  # gamma[a, b, c] = LC^a_bc
    dgamma: np.ndarray  # dgamma[e, a, b, c] = d_e LC^a_bc
    riem: np.ndarray  # riem[a, b, c, d] = R_ab^c_d (sign branch applied)
    riem_low: np.ndarray  # g_ce R_ab^e_d
    ric: np.ndarray
    scalar: float
    weyl_low: np.ndarray
    det: float
    signature: tuple[int, int]


def curvature_suite(metric: MetricFamily, point: Sequence[float], conv=None) -> CurvatureSuite:
    conv = _conv(conv)
    g, dg, d2g = jet(metric).evaluate(point)
    ginv = np.linalg.inv(g)
    # T[d, b, c] = d_b g_dc + d_c g_bd - d_d g_bc
    t = np.einsum("bdc->dbc", dg) + np.einsum("cbd->dbc", dg) - dg
    gamma = 0.5 * np.einsum("ad,dbc->abc", ginv, t)
    dginv = -np.einsum("am,emn,nd->ead", ginv, dg, ginv)
    dt = np.einsum("ebdc->edbc", d2g) + np.einsum("ecbd->edbc", d2g) - d2g
    dgamma = 0.5 * (np.einsum("ead,dbc->eabc", dginv, t) + np.einsum("ad,edbc->eabc", ginv, dt))
    riem = (
        np.einsum("acbd->abcd", dgamma)
        - np.einsum("bcad->abcd", dgamma)
        + np.einsum("cae,ebd->abcd", gamma, gamma)
        - np.einsum("cbe,ead->abcd", gamma, gamma)
    )
    riem = conv.curvature_sign * riem
    ric = np.einsum("abad->bd", riem)
    scalar = float(np.einsum("bd,bd->", ginv, ric))
    riem_low = np.einsum("ce,abed->abcd", g, riem)
    d = metric.dim
    ricci_part = (
        np.einsum("ac,db->abcd", g, ric)
        - np.einsum("ad,cb->abcd", g, ric)
        - np.einsum("bc,da->abcd", g, ric)
        + np.einsum("bd,ca->abcd", g, ric)
    ) / (d - 2)
    scalar_part = (
        scalar
        / ((d - 1) * (d - 2))
        * (np.einsum("ac,db->abcd", g, g) - np.einsum("ad,cb->abcd", g, g))
    )
    weyl_low = riem_low - ricci_part + scalar_part
    eigs = np.linalg.eigvalsh(g)
    signature = (int(np.sum(eigs > 0)), int(np.sum(eigs < 0)))
    return CurvatureSuite(
        point=tuple(map(float, point)),
        g=g,
        ginv=ginv,
        gamma=gamma,
        dgamma=dgamma,
        riem=riem,
        riem_low=riem_low,
        ric=ric,
        scalar=scalar,
        weyl_low=weyl_low,
        det=float(np.linalg.det(g)),
        signature=signature,
    )


def first_bianchi_residual(suite: CurvatureSuite) -> float:
    cyc = (
        suite.riem
        + np.einsum("bdca->abcd", suite.riem)
        + np.einsum("dacb->abcd", suite.riem)
    )
    return float(np.max(np.abs(cyc)))


def weyl_trace_residual(suite: CurvatureSuite) -> float:
    """Largest trace of the Weyl tensor over every contraction pair."""
    c, ginv = suite.weyl_low, suite.ginv
    traces = [
        np.einsum("ab,abcd->cd", ginv, c),
        np.einsum("ac,abcd->bd", ginv, c),
        np.einsum("ad,abcd->bc", ginv, c),
        np.einsum("bc,abcd->ad", ginv, c),
        np.einsum("bd,abcd->ac", ginv, c),
        np.einsum("cd,abcd->ab", ginv, c),
    ]
    return max(float(np.max(np.abs(t))) for t in traces)


# ---------------------------------------------------------------------------
# Hodge star and the curvature operator on two-forms (n = 2 only)
# ---------------------------------------------------------------------------

PAIRS = tuple(combinations(range(4), 2))


@lru_cache(maxsize=None)
def _epsilon4() -> np.ndarray:
    eps = np.zeros((4, 4, 4, 4))
    from itertools import permutations

    for perm in permutations(range(4)):
        sign = 1.0
        perm_list = list(perm)
        for i in range(4):
            for j in range(i + 1, 4):
                if perm_list[i] > perm_list[j]:
                    sign = -sign
        eps[perm] = sign
    return eps


def star_matrix(g: np.ndarray, conv=None) -> np.ndarray:
    """Hodge star on two-forms in the basis dx^a ^ dx^b, a < b (PAIRS order)."""
    conv = _conv(conv)
    if g.shape != (4, 4):
        raise ValueError("the Hodge star on two-forms is implemented in dimension 4")
    ginv = np.linalg.inv(g)
    root = np.sqrt(abs(np.linalg.det(g)))
    eps = _epsilon4()
    raised = np.einsum("abef,ec,fd->abcd", eps, ginv, ginv)
    s = np.empty((6, 6))
    for i_idx, (a, b) in enumerate(PAIRS):
        for j_idx, (c, d) in enumerate(PAIRS):
            s[i_idx, j_idx] = conv.star_sign * root * raised[a, b, c, d]
    return s


def gram_2forms(g: np.ndarray) -> np.ndarray:
    """Inner product <e_I, e_J> induced by g on the two-form basis."""
    ginv = np.linalg.inv(g)
    gram = np.empty((6, 6))
    for i_idx, (a, b) in enumerate(PAIRS):
        for j_idx, (c, d) in enumerate(PAIRS):
            gram[i_idx, j_idx] = ginv[a, c] * ginv[b, d] - ginv[a, d] * ginv[b, c]
    return gram


def _operator_matrix(tensor_low: np.ndarray, ginv: np.ndarray) -> np.ndarray:
    raised = np.einsum("abef,ec,fd->abcd", tensor_low, ginv, ginv)
    m = np.empty((6, 6))
    for i_idx, (a, b) in enumerate(PAIRS):
        for j_idx, (c, d) in enumerate(PAIRS):
            m[i_idx, j_idx] = raised[a, b, c, d]
    return m


@dataclass(frozen=True)
class CurvatureOperator:
    """Curvature as an operator on two-forms, split by the Hodge star."""

    star: np.ndarray
    r_matrix: np.ndarray
    c_matrix: np.ndarray
    p_plus: np.ndarray
    p_minus: np.ndarray
    scalar: float
    weyl_norm_sq: float

    def c_plus_norm(self) -> float:
        return float(np.max(np.abs(self.p_plus @ self.c_matrix @ self.p_plus)))

    def c_minus_norm(self) -> float:
        return float(np.max(np.abs(self.p_minus @ self.c_matrix @ self.p_minus)))

    def mixed_norm(self) -> float:
        return float(np.max(np.abs(self.p_plus @ self.r_matrix @ self.p_minus)))

    def scalar_block_residual(self, lam: float) -> float:
        block = self.p_plus @ self.r_matrix @ self.p_plus + 2.0 * lam * self.p_plus
        return float(np.max(np.abs(block)))


def weyl_blocks(
    metric: MetricFamily,
    point: Sequence[float],
    conv=None,
    suite: Optional[CurvatureSuite] = None,
) -> CurvatureOperator:
    conv = _conv(conv)
    if metric.n != 2:
        raise ValueError("the two-form decomposition needs a 4-dimensional total space")
    if suite is None:
        suite = curvature_suite(metric, point, conv)
    star = star_matrix(suite.g, conv)
    r_matrix = _operator_matrix(suite.riem_low, suite.ginv)
    c_matrix = _operator_matrix(suite.weyl_low, suite.ginv)
    ident = np.eye(6)
    weyl_up = np.einsum(
        "abcd,ae,bf,cg,dh->efgh", suite.weyl_low, suite.ginv, suite.ginv, suite.ginv, suite.ginv
    )
    weyl_norm_sq = float(np.einsum("abcd,abcd->", suite.weyl_low, weyl_up))
    return CurvatureOperator(
        star=star,
        r_matrix=r_matrix,
        c_matrix=c_matrix,
        p_plus=0.5 * (ident + star),
        p_minus=0.5 * (ident - star),
        scalar=suite.scalar,
        weyl_norm_sq=weyl_norm_sq,
    )


# ---------------------------------------------------------------------------
# Residual checks
# ---------------------------------------------------------------------------


def einstein_residual(
    metric: MetricFamily,
    point: Sequence[float],
    lam: Optional[float] = None,
    conv=None,
    suite: Optional[CurvatureSuite] = None,
) -> float:
    """max |Ric + 6 lam g|; lam is inferred from scalar/-24 when omitted."""
    if suite is None:
        suite = curvature_suite(metric, point, conv)
    if metric.n != 2:
        raise ValueError("einstein_residual is normalized for the 4-dimensional case")
    if lam is None:
        lam = suite.scalar / -24.0
    return float(np.max(np.abs(suite.ric + 6.0 * lam * suite.g)))


def tracefree_ricci_residual(
    metric: MetricFamily,
    point: Sequence[float],
    conv=None,
    suite: Optional[CurvatureSuite] = None,
) -> tuple[float, float]:
    """Dimension-generic Einstein check: (max |Ric - (scal/dim) g|, scal)."""
    if suite is None:
        suite = curvature_suite(metric, point, conv)
    d = metric.dim
    residual = float(np.max(np.abs(suite.ric - (suite.scalar / d) * suite.g)))
    return residual, suite.scalar


def parallel_distribution_residual(
    metric: MetricFamily,
    point: Sequence[float],
    conv=None,
    suite: Optional[CurvatureSuite] = None,
) -> float:
    """Non-fibre components of LC-derivatives of fibre directions."""
    if suite is None:
        suite = curvature_suite(metric, point, conv)
    n = metric.n
    block = suite.gamma[:n, n:, n:]
    return float(np.max(np.abs(block))) if block.size else 0.0


@lru_cache(maxsize=None)
def _field_jacobian(coords: tuple[str, ...], comps: tuple[Expr, ...]):
    return tuple(tuple(comps[b].diff(coords[a]) for b in range(len(comps))) for a in range(len(coords)))


def _field_values(metric_coords, comps, binding):
    d = len(metric_coords)
    v = np.array([c.eval(binding) for c in comps])
    jac_exprs = _field_jacobian(tuple(metric_coords), tuple(comps))
    dv = np.array([[jac_exprs[a][b].eval(binding) for b in range(d)] for a in range(d)])
    return v, dv


def killing_residual(
    metric: MetricFamily,
    field,
    point: Sequence[float],
    conformal: bool = False,
    conv=None,
):
    """(max |L_V g|, None) in plain mode; least-squares factor in conformal mode."""
    comps = tuple(getattr(field, "components", field))
    if len(comps) != metric.dim:
        raise ValueError("vector field does not match the total-space dimension")
    g, dg, _ = jet(metric).evaluate(point)
    binding = metric.binding(point)
    v, dv = _field_values(metric.coords, comps, binding)
    # L_V g_ab = V^c d_c g_ab + g_cb d_a V^c + g_ac d_b V^c
    lie = (
        np.einsum("c,cab->ab", v, dg)
        + np.einsum("ac,cb->ab", dv, g)
        + np.einsum("bc,ac->ab", dv, g)
    )
    if not conformal:
        return float(np.max(np.abs(lie))), None
    iu = np.triu_indices(metric.dim)
    numer = float(np.sum(lie[iu] * g[iu]))
    denom = float(np.sum(g[iu] * g[iu]))
    factor = numer / denom
    return float(np.max(np.abs(lie - factor * g))), factor


@dataclass(frozen=True)
class FormDerivatives:
    lie_norm: Optional[float]
    nabla: np.ndarray
    nabla_norm: float


def form_derivatives(
    metric: MetricFamily,
    omega: SympForm,
    field,
    point: Sequence[float],
    conv=None,
) -> FormDerivatives:
    """Lie derivative of Omega along the field (if given) and LC-covariant
    derivative of Omega, all evaluated exactly at the point."""
    suite = curvature_suite(metric, point, conv)
    d = metric.dim
    binding = metric.binding(point)
    om = omega.evaluate(point)
    dom = np.empty((d, d, d))
    for c in range(d):
        for a in range(d):
            for b in range(d):
                dom[c, a, b] = omega.comp[a][b].diff(omega.coords[c]).eval(binding)
    # nabla_a Omega_bc = d_a Omega_bc - LC^d_ab Omega_dc - LC^d_ac Omega_bd
    nabla = (
        dom
        - np.einsum("dab,dc->abc", suite.gamma, om)
        - np.einsum("dac,bd->abc", suite.gamma, om)
    )
    lie_norm = None
    if field is not None:
        comps = tuple(getattr(field, "components", field))
        v, dv = _field_values(metric.coords, comps, binding)
        lie = (
            np.einsum("c,cab->ab", v, dom)
            + np.einsum("ac,cb->ab", dv, om)
            + np.einsum("bc,ac->ab", dv, om)
        )
        lie_norm = float(np.max(np.abs(lie)))
    return FormDerivatives(lie_norm=lie_norm, nabla=nabla, nabla_norm=float(np.max(np.abs(nabla))))
