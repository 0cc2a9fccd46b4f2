"""Gauss rules from recurrence data and the Gegenbauer-Lobatto rule."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .orthopoly import (
    RecurrenceCoeffs,
    WeightError,
    WeightSpec,
    build_recurrence,
    evaluate,
)

__all__ = [
    "QuadRule",
    "gauss",
    "gauss_legendre",
    "gegenbauer_lobatto",
    "lobatto_endpoint_weight",
    "lobatto_weights_by_exactness",
]


@dataclass(frozen=True)
class QuadRule:
    nodes: np.ndarray
    weights: np.ndarray
    exact_degree: int
    weight_spec: WeightSpec
    interval: tuple[float, float]

    def __call__(self, f) -> float:
        return float(np.dot(self.weights, f(self.nodes)))

    def __len__(self) -> int:
        return len(self.nodes)


def _frozen(*arrays):
    for a in arrays:
        a.setflags(write=False)
    return arrays


def _gauss_from_rc(rc: RecurrenceCoeffs, n: int) -> tuple[np.ndarray, np.ndarray]:
    if n == 1:
        return np.array([rc.c[0]]), np.array([rc.mu0])
    nodes, vecs = eigh_tridiagonal(rc.c[:n], np.sqrt(rc.d[1:n]))
    return nodes, rc.mu0 * vecs[0] ** 2


@lru_cache(maxsize=256)
def gauss(w: WeightSpec, n: int) -> QuadRule:
    """n-point Gauss rule for ``w`` on its reference interval (Golub-Welsch)."""
    if n < 1:
        raise ValueError("number of points must be >= 1")
    rc = build_recurrence(w, n)
    nodes, weights = _gauss_from_rc(rc, n)
    return QuadRule(*_frozen(nodes, weights), 2 * n - 1, w, tuple(w.interval))


@lru_cache(maxsize=256)
def gauss_legendre(n: int, a: float = -1.0, b: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Unweighted Gauss-Legendre nodes and weights on [a, b]."""
    t, wt = np.polynomial.legendre.leggauss(n)
    x = 0.5 * (b - a) * t + 0.5 * (a + b)
    return _frozen(x, 0.5 * (b - a) * wt)


def _check(lam: float, m: int, a: float, b: float) -> None:
    if not lam > -0.5:
        raise WeightError(f"Gegenbauer parameter must exceed -1/2, got {lam}")
    if m < 0:
        raise ValueError("m must be >= 0")
    if not a < b:
        raise ValueError(f"interval must satisfy a < b, got ({a}, {b})")


def lobatto_endpoint_weight(lam: float, m: int, a: float = -1.0, b: float = 1.0) -> float:
    """Common endpoint weight of the (m+2)-point Gegenbauer-Lobatto rule on [a, b].

    ``(b-a) / (4 C(1)^2) * int_{-1}^{1} C(t)^2 (1-t^2)^{lam-1/2} dt`` with
    ``C = C_m^{(lam+1)}``; the ratio does not depend on how C is normalized.
    """
    _check(lam, m, a, b)
    if m == 0:
        return 0.25 * (b - a) * build_recurrence(WeightSpec.gegenbauer(lam), 1).mu0
    inner = build_recurrence(WeightSpec.gegenbauer(lam + 1.0), m)
    g = gauss(WeightSpec.gegenbauer(lam), m + 1)
    vals = evaluate(inner, m, 0, g.nodes, "monic")
    at1 = evaluate(inner, m, 0, 1.0, "monic")
    return (b - a) / (4.0 * at1**2) * float(np.dot(g.weights, vals**2))


def _interior_nodes(lam: float, m: int) -> np.ndarray:
    # zeros of C_m^{(lam+1)} on [-1, 1]
    return gauss(WeightSpec.gegenbauer(lam + 1.0), m).nodes


def _to_interval(t, a, b):
    return 0.5 * (b - a) * t + 0.5 * (a + b)


def gegenbauer_lobatto(lam: float, m: int, a: float = -1.0, b: float = 1.0) -> QuadRule:
    """Gegenbauer-Lobatto rule for ``int_a^b f(x) w(phi(x)) dx`` with m interior nodes.

    Endpoint weights come from :func:`lobatto_endpoint_weight`; interior weights
    solve the moment conditions for the orthonormal Gegenbauer basis of
    degree < m, which is square and well conditioned.
    """
    _check(lam, m, a, b)
    w_end = lobatto_endpoint_weight(lam, m, a, b)
    base = WeightSpec.gegenbauer(lam)
    if m == 0:
        nodes = np.array([a, b], dtype=float)
        weights = np.array([w_end, w_end])
        return QuadRule(*_frozen(nodes, weights), 1, base, (a, b))
    t = _interior_nodes(lam, m)
    rc = build_recurrence(base, max(m, 1))
    half = 0.5 * (b - a)
    rows = np.array([evaluate(rc, j, 0, t, "orthonormal") for j in range(m)])
    rhs = np.array([
        (half * np.sqrt(rc.mu0) if j == 0 else 0.0)
        - w_end * (evaluate(rc, j, 0, -1.0, "orthonormal") + evaluate(rc, j, 0, 1.0, "orthonormal"))
        for j in range(m)
    ])
    try:
        inner = np.linalg.solve(rows, rhs)
    except np.linalg.LinAlgError as exc:
        raise RuntimeError("singular Lobatto moment system") from exc
    nodes = np.concatenate([[a], _to_interval(t, a, b), [b]])
    weights = np.concatenate([[w_end], inner, [w_end]])
    return QuadRule(*_frozen(nodes, weights), 2 * m + 1, base, (a, b))


def lobatto_weights_by_exactness(lam: float, m: int, a: float = -1.0, b: float = 1.0) -> np.ndarray:
    """All m+2 Lobatto weights from the full exactness system (no endpoint formula)."""
    _check(lam, m, a, b)
    base = WeightSpec.gegenbauer(lam)
    rc = build_recurrence(base, m + 1)
    t = np.concatenate([[-1.0], _interior_nodes(lam, m) if m else [], [1.0]])
    rows = np.array([evaluate(rc, j, 0, t, "orthonormal") for j in range(m + 2)])
    rhs = np.zeros(m + 2)
    rhs[0] = 0.5 * (b - a) * np.sqrt(rc.mu0)
    return np.linalg.solve(rows, rhs)
