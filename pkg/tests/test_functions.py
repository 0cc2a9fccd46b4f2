import numpy as np
import pytest

from orthorecon.functions import TEST_FUNCTIONS, by_name, franke, poly


def test_values_at_known_points():
    assert TEST_FUNCTIONS["f1"](3.0, 4.0) == pytest.approx(5.0)
    assert TEST_FUNCTIONS["f2"](0.0, 0.0) == 0.0
    assert TEST_FUNCTIONS["f3"](0.25, 0.25) == pytest.approx(1.0)
    assert TEST_FUNCTIONS["f4"](0.125, 0.0) == pytest.approx(1.0)
    assert TEST_FUNCTIONS["f5"](0.0, 0.0) == 1.0 and TEST_FUNCTIONS["f5"](0.2, 0.0) == pytest.approx(0.5)


def test_franke_matches_unit_square_form():
    # classical form on [0, 1]^2, evaluated at (x+1)/2
    def classic(u, v):
        return (0.75 * np.exp(-((9 * u - 2) ** 2) / 4 - ((9 * v - 2) ** 2) / 4)
                + 0.75 * np.exp(-((9 * u + 1) ** 2) / 49 - (9 * v + 1) / 10)
                + 0.5 * np.exp(-((9 * u - 7) ** 2) / 4 - ((9 * v - 3) ** 2) / 4)
                - 0.2 * np.exp(-((9 * u - 4) ** 2) - (9 * v - 7) ** 2))

    x, y = np.random.default_rng(1).uniform(-1, 1, size=(2, 50))
    np.testing.assert_allclose(franke(x, y), classic((x + 1) / 2, (y + 1) / 2), rtol=1e-14)


def test_poly_spaces():
    p = poly(2)
    assert p(0.0, 0.0) == 1.0
    # 1 + x/2 + x^2/3 + y/3 + xy/4 + y^2/5 at (1, 1)
    assert p(1.0, 1.0) == pytest.approx(1 + 1 / 2 + 1 / 3 + 1 / 3 + 1 / 4 + 1 / 5)
    assert poly(1, tensor=True)(1.0, 1.0) == pytest.approx(1 + 1 / 2 + 1 / 3 + 1 / 4)
    with pytest.raises(ValueError):
        poly(-1)


def test_by_name():
    assert by_name("f6") is franke
    assert by_name("poly:3")(2.0, 0.0) == pytest.approx(poly(3)(2.0, 0.0))
    assert by_name("tpoly:1")(1.0, 1.0) == pytest.approx(poly(1, tensor=True)(1.0, 1.0))
    for bad in ("f7", "poly:", "poly:x"):
        with pytest.raises(ValueError):
            by_name(bad)
