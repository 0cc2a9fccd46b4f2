import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from orthorecon.orthopoly import WeightSpec
from orthorecon.unisolvence import (
    TOL,
    Reason,
    UnisolvenceQuery,
    check_even_weight,
    check_general,
    check_jacobi,
    discrepancies,
    equivalence_groups,
    example_jacobi_fundamental,
    predicate_bundle,
)

GRID = [-0.5, 0.0, 0.5, 1.0, 2.0, 3.0]


def q(w, m, N):
    return UnisolvenceQuery(w, m, N)


def test_general_examples():
    v = check_general(q(WeightSpec.legendre(), 2, 3))
    assert not v.unisolvent and v.reason is Reason.DEGENERATE
    v = check_general(q(WeightSpec.jacobi(3, 2), 2, 3))
    assert v.unisolvent and v.reason is Reason.RATIO_CRITERION
    v = check_general(q(WeightSpec.legendre(), 1, 3))
    assert v.unisolvent and v.reason is Reason.ODD_PARITY
    assert v.quantities.ratio_sign == -1


def test_even_weight_examples():
    assert check_even_weight(1, 3).unisolvent
    assert not any(check_even_weight(2, N).unisolvent for N in range(3, 9))
    assert not check_even_weight(1, 4).unisolvent
    with pytest.raises(ValueError):
        check_even_weight(1, 4, WeightSpec.jacobi(1, 2))


def test_jacobi_examples():
    assert all(check_jacobi(3, 2, m, N).unisolvent for m in range(1, 7) for N in range(3, 8))
    lam = 1.5
    assert not check_jacobi(lam - 0.5, lam - 0.5, 2, 4).unisolvent
    v = check_jacobi(0, 2, 1, 4)
    assert v.unisolvent and v.reason is Reason.ENDPOINT_MISMATCH


def test_near_degenerate_is_degenerate():
    assert check_jacobi(1.0, 1.0 + 1e-12, 2, 4).reason is Reason.DEGENERATE
    assert not check_general(q(WeightSpec.jacobi(1.0, 1.0 + 1e-13), 2, 4)).unisolvent


def test_query_validation():
    with pytest.raises(ValueError):
        q(WeightSpec.legendre(), 0, 3)
    with pytest.raises(ValueError):
        q(WeightSpec.legendre(), 1, 2)
    assert q(WeightSpec.legendre(), 3, 5).n_functionals == 15


def test_bundle_examples():
    b = predicate_bundle(q(WeightSpec.legendre(), 2, 4))
    assert b.coeff_sum_odd_value == 0.0 and not b.coeff_sum_odd
    b = predicate_bundle(q(WeightSpec.jacobi(3, 2), 2, 4))
    assert b.gamma_m_minus_1
    assert b.recurrence_sum_value == pytest.approx(-2 / 9, abs=1e-15)
    with pytest.raises(ValueError):
        predicate_bundle(q(WeightSpec.legendre(), 2, 4), k=3)


@given(st.floats(-0.9, 5), st.floats(-0.9, 5))
@settings(max_examples=40, deadline=None)
def test_recurrence_sum_closed_form(alpha, beta):
    # sum of c_1 + c_2 telescopes to 2 (beta - alpha) / (4 + alpha + beta)
    b = predicate_bundle(q(WeightSpec.jacobi(alpha, beta), 2, 3))
    assert b.recurrence_sum_value == pytest.approx(2 * (beta - alpha) / (4 + alpha + beta), abs=1e-13)


def test_fundamental_example_signs():
    assert example_jacobi_fundamental(3, 2, 2) == pytest.approx(4.0)
    assert example_jacobi_fundamental(2, 3, 2) == pytest.approx(-4.0)
    assert example_jacobi_fundamental(1.5, 1.5, 2) == 0.0
    with pytest.raises(ValueError):
        example_jacobi_fundamental(1, 2, 3)


@pytest.mark.parametrize("m", [2, 4, 6])
def test_fundamental_example_matches_derivative_integral(m):
    for a, b in itertools.product(GRID, repeat=2):
        val = example_jacobi_fundamental(a, b, m)
        bundle = predicate_bundle(q(WeightSpec.jacobi(a, b), m, 3))
        assert val == pytest.approx(bundle.parity_integral_value, rel=1e-10, abs=1e-12)
        assert np.sign(val) == np.sign(a - b)


def test_large_N_no_overflow():
    b = predicate_bundle(q(WeightSpec.jacobi(3, 0), 6, 10_000))
    assert math.isfinite(b.ratio_log_abs) and b.ratio_criterion


@given(st.floats(-0.95, 6), st.floats(-0.95, 6), st.integers(0, 3), st.integers(1, 4))
@settings(max_examples=200, deadline=None)
def test_odd_mN_always_unisolvent(alpha, beta, i, j):
    m, N = 2 * i + 1, 2 * j + 1
    assert check_general(q(WeightSpec.jacobi(alpha, beta), m, N)).unisolvent


@pytest.mark.parametrize("m", [2, 4])
def test_endpoint_ratio_sweep(m):
    for (a, b), N in itertools.product(itertools.product(GRID, repeat=2), range(3, 7)):
        bundle = predicate_bundle(q(WeightSpec.jacobi(a, b), m, N))
        g = equivalence_groups(bundle)["endpoint_ratio"]
        assert len(set(g.values())) == 1, (a, b, N, g)


def test_jacobi_even_m_reduces_to_parameter_test():
    for (a, b), m in itertools.product(itertools.product(GRID, repeat=2), (2, 4, 6)):
        w = WeightSpec.jacobi(a, b)
        g = equivalence_groups(predicate_bundle(q(w, m, 4)), w)["jacobi"]
        assert len(g) >= 11
        assert set(g.values()) == {a != b}


def test_verdict_agrees_with_jacobi_rule():
    for (a, b), m, N in itertools.product(itertools.product(GRID, repeat=2), range(1, 7), range(3, 7)):
        general = check_general(q(WeightSpec.jacobi(a, b), m, N)).unisolvent
        assert general == check_jacobi(a, b, m, N).unisolvent == ((a != b) or (m * N) % 2 == 1)


@pytest.mark.parametrize("lam", [0.5, 1.0])
def test_derivative_order_sweep(lam):
    for (a, b), m in itertools.product(itertools.product(GRID, repeat=2), range(1, 7)):
        w = WeightSpec.jacobi(a, b)
        for k in range(m + 1):
            bundle = predicate_bundle(q(w, m, 3), k=k, lobatto_lambda=lam)
            assert not discrepancies(bundle, w), (a, b, m, k, equivalence_groups(bundle, w))


def test_order_m_is_always_false():
    b = predicate_bundle(q(WeightSpec.jacobi(3, 2), 3, 4), k=3)
    assert not (b.k_endpoint or b.k_lobatto or b.k_coeff_sum or b.k_derivative_integral)


def test_general_interval_matches_reference():
    w = WeightSpec.jacobi(2.0, 0.5)
    ref = predicate_bundle(q(w, 3, 4), k=1)
    shifted = predicate_bundle(UnisolvenceQuery(w, 3, 4, (0.0, 5.0)), k=1)
    assert shifted.ratio_criterion == ref.ratio_criterion
    assert shifted.ratio_log_abs == pytest.approx(ref.ratio_log_abs, rel=1e-12)
    assert not discrepancies(shifted)


def test_custom_even_weight_is_degenerate_for_even_mN():
    w = WeightSpec.from_density(lambda t: np.cosh(t), even=True)
    assert not check_general(q(w, 2, 3)).unisolvent
    assert check_general(q(w, 1, 3)).unisolvent
    w2 = WeightSpec.from_density(lambda t: np.exp(t))
    assert check_general(q(w2, 2, 4)).unisolvent


def test_single_tolerance():
    b = predicate_bundle(q(WeightSpec.legendre(), 2, 4))
    assert abs(b.abs_endpoint_gap) <= TOL * (abs(b.endpoint_a) + abs(b.endpoint_b))
