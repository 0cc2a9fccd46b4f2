"""Benchmark targets on [-1, 1]^2 and a polynomial generator for reproduction checks."""
from __future__ import annotations

from typing import Callable

import numpy as np

__all__ = ["TEST_FUNCTIONS", "franke", "poly", "by_name"]


def _f1(x, y):
    return np.sqrt(x**2 + y**2)


def _f2(x, y):
    return np.exp(-4 * (x**2 + y**2)) * np.sin(np.pi * (x + y))


def _f3(x, y):
    return np.sin(2 * np.pi * x) * np.sin(2 * np.pi * y)


def _f4(x, y):
    return np.sin(4 * np.pi * (x + y))


def _f5(x, y):
    return 1.0 / (25 * (x**2 + y**2) + 1)


def franke(x, y):
    """Four-term Franke function, rescaled from [0, 9]^2 onto [-1, 1]^2."""
    X = 4.5 * (x + 1)
    Y = 4.5 * (y + 1)
    return (0.75 * np.exp(-((X - 2) ** 2) / 4 - ((Y - 2) ** 2) / 4)
            + 0.75 * np.exp(-((X + 1) ** 2) / 49 - (Y + 1) / 10)
            + 0.5 * np.exp(-((X - 7) ** 2) / 4 - ((Y - 3) ** 2) / 4)
            - 0.2 * np.exp(-((X - 4) ** 2) - (Y - 7) ** 2))


TEST_FUNCTIONS: dict[str, Callable] = {
    "f1": _f1, "f2": _f2, "f3": _f3, "f4": _f4, "f5": _f5, "f6": franke,
}


def poly(d: int, tensor: bool = False) -> Callable:
    """Dense polynomial with distinct coefficients 1/(1+i+2j).

    Total degree <= d by default; tensor degree <= d with ``tensor=True``.
    """
    if d < 0:
        raise ValueError("degree must be >= 0")
    terms = [(i, j) for i in range(d + 1) for j in range(d + 1) if tensor or i + j <= d]

    def p(x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return sum(x**i * y**j / (1.0 + i + 2 * j) for i, j in terms)

    p.__name__ = f"poly{d}{'t' if tensor else ''}"
    return p


def by_name(name: str) -> Callable:
    """``f1``..``f6``, ``poly:d`` (total degree) or ``tpoly:d`` (tensor degree)."""
    if name in TEST_FUNCTIONS:
        return TEST_FUNCTIONS[name]
    head, _, deg = name.partition(":")
    if head in ("poly", "tpoly") and deg.isdigit():
        return poly(int(deg), tensor=head == "tpoly")
    raise ValueError(f"unknown function {name!r}; use f1..f6 or poly:<degree>")
