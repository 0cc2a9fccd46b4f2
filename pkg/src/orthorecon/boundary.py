"""The boundary triple on a concrete polygon and its enrichment.

Boundary functions are stored edgewise as power-basis coefficients in the
edge parameter ``t`` (the weight's reference interval), so traces, products
and moments are exact polynomial operations up to quadrature.  The edge
basis ``b_{mu,nu}`` is the orthonormal polynomial of degree ``nu`` on edge
``mu`` and zero elsewhere; functional ``L_j`` with ``j = mu * m + nu``
takes the weighted moment against it.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional, Union

import numpy as np
from numpy.polynomial import polynomial as P

from .orthopoly import RecurrenceCoeffs, WeightSpec, build_recurrence, evaluate, monomial_coeffs
from .quadrature import gauss
from .unisolvence import UnisolvenceQuery, Verdict, check_general

__all__ = [
    "RANK_TOL",
    "StateNotDegenerate",
    "EnrichmentError",
    "Polygon",
    "EdgeParam",
    "BoundaryFunction",
    "BoundarySpace",
    "GramReport",
    "BoundaryTriple",
    "EnrichedTriple",
    "boundary_triple",
    "moment_functional",
    "gram",
    "enrichment_F",
    "annihilator",
    "enrich",
    "enriched_gram",
    "planar_trace",
]

#: singular values below RANK_TOL * sigma_max count as zero
RANK_TOL = 1e-10


class StateNotDegenerate(ValueError):
    """Enrichment requested for a triple whose Gram matrix has full rank."""


class EnrichmentError(RuntimeError):
    """The enriched system is still rank deficient."""


def _signed_area(v: np.ndarray) -> float:
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def _segments_cross(p1, p2, p3, p4) -> bool:
    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    d1, d2 = orient(p3, p4, p1), orient(p3, p4, p2)
    d3, d4 = orient(p1, p2, p3), orient(p1, p2, p4)
    return (d1 * d2 < 0) and (d3 * d4 < 0)


@dataclass(frozen=True)
class Polygon:
    """Simple polygon with counter-clockwise vertices."""

    vertices: np.ndarray

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3:
            raise ValueError("need at least three 2D vertices")
        if _signed_area(v) <= 0:
            raise ValueError("vertices must be counter-clockwise with positive area")
        n = len(v)
        for i in range(n):
            for j in range(i + 2, n):
                if i == 0 and j == n - 1:
                    continue
                if _segments_cross(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n]):
                    raise ValueError("polygon is self-intersecting")
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)

    @property
    def N(self) -> int:
        return len(self.vertices)

    @property
    def area(self) -> float:
        return _signed_area(self.vertices)

    def edge(self, i: int, interval: tuple[float, float] = (-1.0, 1.0)) -> "EdgeParam":
        return EdgeParam(self, i, interval)

    @classmethod
    def regular(cls, N: int, radius: float = 1.0) -> "Polygon":
        ang = 2 * np.pi * np.arange(N) / N
        return cls(radius * np.column_stack([np.cos(ang), np.sin(ang)]))


@dataclass(frozen=True)
class EdgeParam:
    """Affine map from [a, b] onto edge i, sending a to v_i and b to v_{i+1}."""

    polygon: Polygon
    i: int
    interval: tuple[float, float] = (-1.0, 1.0)

    def __call__(self, x) -> np.ndarray:
        a, b = self.interval
        v = self.polygon.vertices
        p, q = v[self.i], v[(self.i + 1) % len(v)]
        x = np.asarray(x, dtype=float)[..., None]
        return ((b - x) * p + (x - a) * q) / (b - a)


def planar_trace(g: Callable, polygon: Polygon, interval=(-1.0, 1.0)) -> Callable:
    """Turn ``g(x, y)`` into an edgewise function ``f(i, t) = g(psi_i(t))``."""

    def f(i, t):
        pts = polygon.edge(i, interval)(t)
        return g(pts[..., 0], pts[..., 1])

    return f


@dataclass(frozen=True)
class BoundaryFunction:
    """Edgewise polynomial: ``coeffs[i]`` are power coefficients in t on edge i."""

    coeffs: np.ndarray

    def __call__(self, i, t):
        return P.polyval(np.asarray(t, dtype=float), self.coeffs[i])

    @property
    def N(self) -> int:
        return self.coeffs.shape[0]

    def __add__(self, other: "BoundaryFunction") -> "BoundaryFunction":
        n = max(self.coeffs.shape[1], other.coeffs.shape[1])
        return BoundaryFunction(_pad(self.coeffs, n) + _pad(other.coeffs, n))

    def __mul__(self, s: float) -> "BoundaryFunction":
        return BoundaryFunction(self.coeffs * s)

    __rmul__ = __mul__

    def continuity_defect(self, interval=(-1.0, 1.0)) -> float:
        a, b = interval
        ends = np.array([self(i, b) for i in range(self.N)])
        starts = np.array([self(i, a) for i in range(self.N)])
        return float(np.max(np.abs(ends - np.roll(starts, -1))))


def _pad(c: np.ndarray, n: int) -> np.ndarray:
    out = np.zeros((c.shape[0], n))
    out[:, : c.shape[1]] = c
    return out


EdgeFunction = Union[BoundaryFunction, Callable]


@dataclass(frozen=True)
class BoundarySpace:
    """S_m^0 on an N-gon together with the orthonormal edge basis of S_{m-1}.

    The continuous basis is N vertex hats followed by ``m - 1`` edge bubbles
    per edge, ``(t-a)(b-t) s^r`` with ``s`` the edge coordinate on [-1, 1].
    """

    weight: WeightSpec
    m: int
    N: int
    rc: RecurrenceCoeffs = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.m < 1 or self.N < 3:
            raise ValueError("need m >= 1 and N >= 3")
        object.__setattr__(self, "rc", build_recurrence(self.weight, self.m))

    @property
    def interval(self) -> tuple[float, float]:
        return tuple(self.weight.interval)

    @property
    def dim(self) -> int:
        return self.m * self.N

    def edge_basis(self, j: int) -> BoundaryFunction:
        """b_j = b_{mu,nu} with j = mu * m + nu."""
        mu, nu = divmod(j, self.m)
        c = np.zeros((self.N, self.m))
        c[mu, : nu + 1] = monomial_coeffs(self.rc, nu, "orthonormal")
        return BoundaryFunction(c)

    @cached_property
    def continuous_basis(self) -> list[BoundaryFunction]:
        a, b = self.interval
        N, m = self.N, self.m
        hat_end = np.array([-a, 1.0]) / (b - a)
        hat_start = np.array([b, -1.0]) / (b - a)
        out = []
        for v in range(N):
            c = np.zeros((N, m + 1))
            c[v, :2] = hat_start
            c[(v - 1) % N, :2] = hat_end
            out.append(BoundaryFunction(c))
        bump = np.array([-a * b, a + b, -1.0])
        s = np.array([-(a + b) / (b - a), 2.0 / (b - a)])
        for i in range(N):
            poly = bump
            for _ in range(m - 1):
                c = np.zeros((N, m + 1))
                c[i, : len(poly)] = poly
                out.append(BoundaryFunction(c))
                poly = P.polymul(poly, s)
        return out

    def combine(self, coeffs: np.ndarray) -> BoundaryFunction:
        """Member of S_m^0 with the given coordinates in the continuous basis."""
        c = np.zeros((self.N, self.m + 1))
        for ci, q in zip(coeffs, self.continuous_basis):
            c += ci * _pad(q.coeffs, self.m + 1)
        return BoundaryFunction(c)

    def _rule(self, quad_order: int):
        return gauss(self.weight, max(int(quad_order), self.m + 2))

    def moments(self, f: EdgeFunction, quad_order: int = 0) -> np.ndarray:
        """All mN weighted moments L_j(f)."""
        rule = self._rule(quad_order)
        basis = np.array([evaluate(self.rc, nu, 0, rule.nodes, "orthonormal") for nu in range(self.m)])
        out = np.empty(self.dim)
        for mu in range(self.N):
            vals = np.asarray(f(mu, rule.nodes), dtype=float)
            out[mu * self.m:(mu + 1) * self.m] = basis @ (rule.weights * vals)
        return out

    def inner(self, f: EdgeFunction, g: EdgeFunction, quad_order: int = 0) -> float:
        rule = self._rule(quad_order)
        return float(sum(np.dot(rule.weights, f(i, rule.nodes) * g(i, rule.nodes))
                          for i in range(self.N)))


def moment_functional(space: BoundarySpace, j: int, f: EdgeFunction, quad_order: int = 0) -> float:
    """L_j(f); only the edge carrying b_j contributes."""
    mu, nu = divmod(j, space.m)
    rule = space._rule(quad_order)
    vals = np.asarray(f(mu, rule.nodes), dtype=float)
    return float(np.dot(rule.weights, vals * evaluate(space.rc, nu, 0, rule.nodes, "orthonormal")))


@dataclass(frozen=True)
class GramReport:
    matrix: np.ndarray
    singular_values: np.ndarray
    rank: int
    nullspace: np.ndarray
    left_nullspace: np.ndarray

    @property
    def nullity(self) -> int:
        return self.matrix.shape[1] - self.rank

    @property
    def full_rank(self) -> bool:
        return self.rank == min(self.matrix.shape)


def _rank_report(A: np.ndarray) -> GramReport:
    U, s, Vt = np.linalg.svd(A)
    rank = int(np.sum(s > RANK_TOL * s[0])) if s.size and s[0] > 0 else 0
    return GramReport(A, s, rank, Vt[rank:].T.copy(), U[:, rank:].copy())


def gram(space: BoundarySpace, quad_order: int = 0) -> GramReport:
    """A[j, l] = <q_l, b_j> over the boundary, with SVD rank."""
    A = np.column_stack([space.moments(q, quad_order) for q in space.continuous_basis])
    return _rank_report(A)


@dataclass(frozen=True)
class BoundaryTriple:
    polygon: Polygon
    space: BoundarySpace
    gram: GramReport
    verdict: Verdict

    @property
    def degenerate(self) -> bool:
        return not self.gram.full_rank

    def kernel_function(self) -> BoundaryFunction:
        """Nonzero member of S_m^0 annihilated by every L_j (degenerate triples only)."""
        if not self.degenerate:
            raise StateNotDegenerate("trivial kernel")
        return self.space.combine(self.gram.nullspace[:, 0])

    def interpolate(self, dofs: np.ndarray) -> BoundaryFunction:
        """Unique member of S_m^0 with the given moments (unisolvent triples only)."""
        if self.degenerate:
            raise StateNotDegenerate("triple is degenerate; enrich it first") from None
        return self.space.combine(np.linalg.solve(self.gram.matrix, dofs))


def boundary_triple(polygon: Polygon, weight: WeightSpec, m: int, quad_order: int = 0) -> BoundaryTriple:
    space = BoundarySpace(weight, m, polygon.N)
    report = gram(space, quad_order)
    verdict = check_general(UnisolvenceQuery(weight, m, polygon.N))
    return BoundaryTriple(polygon, space, report, verdict)


def _ratio(space: BoundarySpace) -> float:
    a, b = space.interval
    rc = space.rc
    return float(evaluate(rc, space.m, 0, b, "standard") / evaluate(rc, space.m, 0, a, "standard"))


def enrichment_F(triple: BoundaryTriple, f: EdgeFunction, quad_order: int = 0) -> float:
    """sum_i r^(i-1) int f_i p_m w, with r = p_m(b)/p_m(a) and p_m in standard form."""
    space = triple.space
    rule = space._rule(quad_order)
    pm = evaluate(space.rc, space.m, 0, rule.nodes, "standard")
    r = _ratio(space)
    return float(sum(r**i * np.dot(rule.weights, np.asarray(f(i, rule.nodes)) * pm)
                     for i in range(space.N)))


def annihilator(triple: BoundaryTriple) -> tuple[np.ndarray, int]:
    """Kernel vector d of A^T scaled so its largest entry is 1, and that entry's index."""
    report = triple.gram
    if report.full_rank:
        raise StateNotDegenerate("Gram matrix has full rank; nothing to annihilate")
    d = report.left_nullspace[:, 0]
    big = np.max(np.abs(d))
    pivot = int(np.flatnonzero(np.abs(d) >= big * (1 - 1e-12))[0])
    return d / d[pivot], pivot


@dataclass(frozen=True)
class EnrichedTriple:
    base: BoundaryTriple
    d: np.ndarray
    pivot: int
    f_tilde: BoundaryFunction
    ratios: np.ndarray

    def G(self, f: EdgeFunction, quad_order: int = 0) -> float:
        return float(np.dot(self.d, self.base.space.moments(f, quad_order)))

    def F(self, f: EdgeFunction, quad_order: int = 0) -> float:
        return enrichment_F(self.base, f, quad_order)

    def functionals(self, f: EdgeFunction, quad_order: int = 0) -> np.ndarray:
        """(L_1(f), ..., L_mN(f), F(f))."""
        return np.append(self.base.space.moments(f, quad_order), self.F(f, quad_order))

    def interpolate(self, dofs: np.ndarray) -> tuple[BoundaryFunction, float]:
        """Element of S_m^0 + span(f_tilde) matching all mN+1 functionals.

        Returns the S_m^0 part and the coefficient of f_tilde.
        """
        report = enriched_gram(self)
        c = np.linalg.solve(report.matrix, dofs)
        return self.base.space.combine(c[:-1]), float(c[-1])


def enrich(triple: BoundaryTriple) -> EnrichedTriple:
    d, pivot = annihilator(triple)
    space = triple.space
    r = _ratio(space)
    return EnrichedTriple(triple, d, pivot, space.edge_basis(pivot), r ** np.arange(space.N))


def enriched_gram(et: EnrichedTriple, quad_order: int = 0) -> GramReport:
    """(mN+1)-square system: rows L_j and F, columns the S_m^0 basis and f_tilde."""
    space = et.base.space
    cols = list(space.continuous_basis) + [et.f_tilde]
    M = np.column_stack([et.functionals(q, quad_order) for q in cols])
    report = _rank_report(M)
    if not report.full_rank:
        raise EnrichmentError(
            f"enriched system has rank {report.rank} < {space.dim + 1}")
    return report
