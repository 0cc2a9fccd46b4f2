"""Unisolvence of the edge-moment boundary triple.

The boundary triple of degree m on an N-gon is unisolvent exactly when
``(p_m(b) / p_m(a)) ** N != 1``.  Besides that test, :func:`predicate_bundle`
evaluates every equivalent reformulation (endpoint parity tests, integrals,
monomial coefficient sums, root and recurrence sums) so that they can be
compared against each other and against the Gram-rank ground truth in
:mod:`orthorecon.boundary`.
"""
from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .orthopoly import (
    WeightSpec,
    build_recurrence,
    endpoint_values,
    evaluate,
    monomial_coeffs,
    rescaled_eval,
    roots,
)
from .quadrature import gauss_legendre, gegenbauer_lobatto

__all__ = [
    "TOL",
    "Reason",
    "UnisolvenceQuery",
    "PredicateBundle",
    "Verdict",
    "check_general",
    "check_even_weight",
    "check_jacobi",
    "predicate_bundle",
    "example_jacobi_fundamental",
    "equivalence_groups",
    "discrepancies",
]

#: relative threshold below which a quantity counts as zero
TOL = 1e-9


def _nonzero(value: float, scale: float) -> bool:
    return abs(value) > TOL * scale


class Reason(str, enum.Enum):
    ODD_PARITY = "OddParity"
    RATIO_CRITERION = "RatioCriterion"
    ENDPOINT_MISMATCH = "EndpointMismatch"
    DEGENERATE = "Degenerate"


@dataclass(frozen=True)
class UnisolvenceQuery:
    weight: WeightSpec
    m: int
    N: int
    edge_interval: Optional[tuple[float, float]] = None

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if self.N < 3:
            raise ValueError("a polygon needs N >= 3 edges")
        if self.edge_interval is None:
            object.__setattr__(self, "edge_interval", tuple(self.weight.interval))

    @property
    def n_functionals(self) -> int:
        return self.m * self.N


@dataclass(frozen=True)
class PredicateBundle:
    """Raw quantities and their nonzero tests, all at tolerance :data:`TOL`.

    Fields prefixed ``k_`` belong to the derivative order ``k``; the
    ``order_m1_`` block is the ``k = m - 1`` specialization on [-1, 1].
    """

    m: int
    N: int
    k: int
    lobatto_lambda: float
    # (p_m(b)/p_m(a))^N in log-absolute form
    ratio_log_abs: float
    ratio_sign: int
    ratio_criterion: bool
    parity_mN: bool
    endpoint_a: float
    endpoint_b: float
    abs_endpoint_gap: float
    abs_endpoint: bool
    # 2 int_a^b p_m p_m' dx
    const_orthogonality_value: float
    const_orthogonality: bool
    # degree-parity corollaries (k = 0)
    parity_endpoint_value: float
    parity_endpoint: bool
    parity_integral_value: float
    parity_integral: bool
    coeff_sum_odd_value: float
    coeff_sum_odd: bool
    coeff_sum_even_value: float
    coeff_sum_even: bool
    # Jacobi weights: int p_m t C_m^{(lam+1)} w^{(lam)} dt
    lobatto_integral_0_value: float
    lobatto_integral_0: bool
    # order-k statements
    k_endpoint_value: float
    k_endpoint: bool
    k_lobatto_value: float
    k_lobatto: bool
    k_coeff_sum_value: float
    k_coeff_sum: bool
    k_derivative_integral_value: float
    k_derivative_integral: bool
    # k = m - 1 statements
    order_m1_endpoint_value: float
    order_m1_endpoint: bool
    order_m1_lobatto_value: float
    order_m1_lobatto: bool
    gamma_m_minus_1_value: float
    gamma_m_minus_1: bool
    root_sum_value: float
    root_sum: bool
    recurrence_sum_value: float
    recurrence_sum: bool

    def as_dict(self) -> dict:
        return asdict(self)

    @property
    def coeff_sum(self) -> bool:
        """The coefficient-sum test matching the parity of m."""
        return self.coeff_sum_odd if self.m % 2 == 0 else self.coeff_sum_even


@dataclass(frozen=True)
class Verdict:
    unisolvent: bool
    reason: Reason
    quantities: Optional[PredicateBundle] = None


def _ratio_power(pa: float, pb: float, N: int) -> tuple[float, int, bool]:
    log_abs = N * (math.log(abs(pb)) - math.log(abs(pa)))
    sign = 1 if (pb * pa > 0 or N % 2 == 0) else -1
    if sign < 0 or abs(log_abs) > 1.0:
        return log_abs, sign, True
    return log_abs, sign, abs(math.expm1(log_abs)) > TOL


def _lobatto_integral(rc, m, k, a, b, lam) -> tuple[float, float]:
    """int_a^b p^{(k)}_{m,a,b} phi^{k+1} C_{m,a,b}^{(lam+1)} w^{(lam)}(phi) dx and its scale."""
    rule = gegenbauer_lobatto(lam, m, a, b)
    geg = build_recurrence(WeightSpec.gegenbauer(lam + 1.0), m)
    x = rule.nodes
    phi = (2.0 * x - a - b) / (b - a)
    vals = (rescaled_eval(rc, m, k, a, b, x, "standard") * phi ** (k + 1)
            * evaluate(geg, m, 0, phi, "monic"))
    terms = rule.weights * vals
    return float(terms.sum()), float(np.abs(terms).sum())


def _order_k_sum(gamma: np.ndarray, m: int, k: int, parity: int) -> tuple[float, float]:
    total = 0.0
    scale = 0.0
    for nu in range(k, m + 1):
        term = math.perm(nu, k) * gamma[nu]
        scale += abs(term)
        if nu % 2 == parity:
            total += term
    return total, scale


def predicate_bundle(q: UnisolvenceQuery, k: int = 0, lobatto_lambda: float = 0.5) -> PredicateBundle:
    """Evaluate every unisolvence criterion for ``q`` (derivative order k)."""
    m, N = q.m, q.N
    if not 0 <= k <= m:
        raise ValueError(f"derivative order {k} outside 0..{m}")
    a, b = q.edge_interval
    rc = build_recurrence(q.weight, m)
    std = "standard"

    pa = float(rescaled_eval(rc, m, 0, a, b, a, std))
    pb = float(rescaled_eval(rc, m, 0, a, b, b, std))
    log_abs, sign, ratio_ok = _ratio_power(pa, pb, N)
    end_scale = abs(pa) + abs(pb)

    gx, gw = gauss_legendre(m + 1, a, b)
    pp = rescaled_eval(rc, m, 0, a, b, gx, std) * rescaled_eval(rc, m, 1, a, b, gx, std)
    const_val = 2.0 * float(np.dot(gw, pp))
    const_scale = pa**2 + pb**2

    gamma = monomial_coeffs(rc, m, std)
    odd_val, coeff_scale = _order_k_sum(gamma, m, 0, 1)
    even_val, _ = _order_k_sum(gamma, m, 0, 0)

    phi = (2.0 * gx - a - b) / (b - a)
    d1 = rescaled_eval(rc, m, 1, a, b, gx, std)
    if m % 2 == 0:
        par_end = pb - pa
        integrand = d1
    else:
        par_end = pb + pa
        integrand = phi * d1 - 2.0 / (a - b) * rescaled_eval(rc, m, 0, a, b, gx, std)
    par_terms = gw * integrand
    par_int = float(par_terms.sum())
    par_scale = max(float(np.abs(par_terms).sum()), end_scale)

    lob0, lob0_scale = _lobatto_integral(rc, m, 0, a, b, lobatto_lambda)

    # order-k statements
    pka = float(rescaled_eval(rc, m, k, a, b, a, std))
    pkb = float(rescaled_eval(rc, m, k, a, b, b, std))
    k_end = pkb + (-1) ** (m + k + 1) * pka
    k_end_scale = abs(pka) + abs(pkb)
    k_lob, k_lob_scale = _lobatto_integral(rc, m, k, a, b, lobatto_lambda)
    k_sum, k_sum_scale = _order_k_sum(gamma, m, k, (m + 1) % 2)
    # the degree-parity checks integrate a polynomial against the unit weight
    gkx, gkw = gauss_legendre(m + 2, a, b)
    phk = (2.0 * gkx - a - b) / (b - a)
    dk = rescaled_eval(rc, m, k, a, b, gkx, std)
    dk1 = rescaled_eval(rc, m, k + 1, a, b, gkx, std) if k < m else np.zeros_like(gkx)
    if m % 2 == 0:
        deriv = phk**k * dk1 - (2.0 * k / (a - b)) * (phk ** (k - 1) * dk if k > 0 else 0.0)
    else:
        deriv = phk**k * (phk * dk1 - 2.0 * (k + 1) / (a - b) * dk)
    deriv_terms = gkw * deriv
    k_deriv = float(deriv_terms.sum())
    k_deriv_scale = max(float(np.abs(deriv_terms).sum()), k_end_scale)

    # k = m - 1 on the reference interval
    r0, r1 = rc.weight.interval
    qm1 = evaluate(rc, m, m - 1, r1, std) + evaluate(rc, m, m - 1, r0, std)
    qm1_scale = abs(evaluate(rc, m, m - 1, r1, std)) + abs(evaluate(rc, m, m - 1, r0, std))
    lob_m1, lob_m1_scale = _lobatto_integral(rc, m, m - 1, r0, r1, lobatto_lambda)
    g_m1 = float(gamma[m - 1])
    xi = roots(rc, m)
    root_sum = float(xi.sum())
    rec_sum = float(np.sum(rc.c[:m]))
    ref_scale = m * max(abs(r0), abs(r1), 1.0)

    return PredicateBundle(
        m=m, N=N, k=k, lobatto_lambda=lobatto_lambda,
        ratio_log_abs=log_abs, ratio_sign=sign, ratio_criterion=ratio_ok,
        parity_mN=(m * N) % 2 == 1,
        endpoint_a=pa, endpoint_b=pb,
        abs_endpoint_gap=abs(pb) - abs(pa),
        abs_endpoint=_nonzero(abs(pb) - abs(pa), end_scale),
        const_orthogonality_value=const_val,
        const_orthogonality=_nonzero(const_val, const_scale),
        parity_endpoint_value=par_end, parity_endpoint=_nonzero(par_end, end_scale),
        parity_integral_value=par_int, parity_integral=_nonzero(par_int, par_scale),
        coeff_sum_odd_value=odd_val, coeff_sum_odd=_nonzero(odd_val, coeff_scale),
        coeff_sum_even_value=even_val, coeff_sum_even=_nonzero(even_val, coeff_scale),
        lobatto_integral_0_value=lob0, lobatto_integral_0=_nonzero(lob0, lob0_scale),
        k_endpoint_value=k_end, k_endpoint=_nonzero(k_end, k_end_scale),
        k_lobatto_value=k_lob, k_lobatto=_nonzero(k_lob, k_lob_scale),
        k_coeff_sum_value=k_sum, k_coeff_sum=_nonzero(k_sum, k_sum_scale),
        k_derivative_integral_value=k_deriv, k_derivative_integral=_nonzero(k_deriv, k_deriv_scale),
        order_m1_endpoint_value=float(qm1), order_m1_endpoint=_nonzero(qm1, qm1_scale),
        order_m1_lobatto_value=lob_m1, order_m1_lobatto=_nonzero(lob_m1, lob_m1_scale),
        gamma_m_minus_1_value=g_m1,
        gamma_m_minus_1=_nonzero(g_m1, float(np.abs(gamma).sum())),
        root_sum_value=root_sum, root_sum=_nonzero(root_sum, ref_scale),
        recurrence_sum_value=rec_sum, recurrence_sum=_nonzero(rec_sum, ref_scale),
    )


def check_general(q: UnisolvenceQuery) -> Verdict:
    """Decide unisolvence from the endpoint ratio of p_m."""
    bundle = predicate_bundle(q)
    if bundle.parity_mN:
        return Verdict(True, Reason.ODD_PARITY, bundle)
    if bundle.ratio_criterion:
        return Verdict(True, Reason.RATIO_CRITERION, bundle)
    return Verdict(False, Reason.DEGENERATE, bundle)


def check_even_weight(m: int, N: int, weight: Optional[WeightSpec] = None) -> Verdict:
    """Even weights on a symmetric interval: unisolvent iff mN is odd."""
    if weight is not None and not weight.is_even:
        raise ValueError(f"{weight} is not an even weight")
    bundle = predicate_bundle(UnisolvenceQuery(weight, m, N)) if weight is not None else None
    if (m * N) % 2 == 1:
        return Verdict(True, Reason.ODD_PARITY, bundle)
    return Verdict(False, Reason.DEGENERATE, bundle)


def check_jacobi(alpha: float, beta: float, m: int, N: int) -> Verdict:
    """Jacobi weights: unisolvent iff alpha != beta or mN is odd."""
    w = WeightSpec.jacobi(alpha, beta)
    bundle = predicate_bundle(UnisolvenceQuery(w, m, N))
    if (m * N) % 2 == 1:
        return Verdict(True, Reason.ODD_PARITY, bundle)
    if abs(alpha - beta) < TOL:
        return Verdict(False, Reason.DEGENERATE, bundle)
    return Verdict(True, Reason.ENDPOINT_MISMATCH, bundle)


def example_jacobi_fundamental(alpha: float, beta: float, m: int) -> float:
    """``P_m(1) - P_m(-1)`` for even m; positive iff alpha > beta."""
    if m % 2:
        raise ValueError("m must be even")
    at_m1, at_1 = endpoint_values(alpha, beta, m)
    return at_1 - at_m1


def equivalence_groups(b: PredicateBundle, weight: Optional[WeightSpec] = None) -> dict[str, dict[str, bool]]:
    """Predicates that must agree, grouped by the result that ties them together.

    Groups whose hypotheses fail for this bundle are omitted.  With a Jacobi
    ``weight`` the group ``jacobi`` also carries the reference boolean
    ``alpha != beta`` under the key ``alpha_ne_beta``.
    """
    groups: dict[str, dict[str, bool]] = {}
    if (b.m * b.N) % 2 == 0:
        groups["endpoint_ratio"] = {
            "ratio_criterion": b.ratio_criterion,
            "abs_endpoint": b.abs_endpoint,
            "const_orthogonality": b.const_orthogonality,
        }
    groups["order_k"] = {
        "k_endpoint": b.k_endpoint,
        "k_lobatto": b.k_lobatto,
        "k_coeff_sum": b.k_coeff_sum,
        "k_derivative_integral": b.k_derivative_integral,
    }
    groups["degree_parity"] = {
        "parity_endpoint": b.parity_endpoint,
        "parity_integral": b.parity_integral,
        "coeff_sum": b.coeff_sum,
        "lobatto_integral_0": b.lobatto_integral_0,
    }
    groups["order_m_minus_1"] = {
        "order_m1_endpoint": b.order_m1_endpoint,
        "order_m1_lobatto": b.order_m1_lobatto,
        "gamma_m_minus_1": b.gamma_m_minus_1,
        "root_sum": b.root_sum,
        "recurrence_sum": b.recurrence_sum,
    }
    jp = weight.jacobi_params if weight is not None else None
    if jp is not None and tuple(weight.interval) == (-1.0, 1.0):
        alpha, beta = jp
        jac = {"alpha_ne_beta": abs(alpha - beta) >= TOL}
        jac.update(groups["degree_parity"])
        jac.update(groups["order_m_minus_1"])
        if b.m % 2 == 0:
            jac.update({
                "ratio_criterion": b.ratio_criterion,
                "abs_endpoint": b.abs_endpoint,
                "const_orthogonality": b.const_orthogonality,
                "coeff_sum_odd": b.coeff_sum_odd,
            })
        else:
            jac["coeff_sum_even"] = b.coeff_sum_even
        if b.k < b.m:
            jac["k_endpoint"] = b.k_endpoint
        groups["jacobi"] = jac
    return groups


def discrepancies(b: PredicateBundle, weight: Optional[WeightSpec] = None) -> list[str]:
    """Names of groups from :func:`equivalence_groups` whose booleans disagree."""
    return [name for name, g in equivalence_groups(b, weight).items() if len(set(g.values())) > 1]
