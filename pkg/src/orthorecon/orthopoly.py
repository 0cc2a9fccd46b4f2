"""Orthogonal polynomial sequences on a reference interval.

Every family is reduced to the monic three-term recurrence

    p_n(t) = (t - c_n) p_{n-1}(t) - d_n p_{n-2}(t),   p_{-1} = 0, p_0 = 1,

with the convention ``d_1 = mu_0`` (total mass).  Jacobi and Gegenbauer
coefficients are closed form; custom weights go through the modified
Chebyshev algorithm.  Three normalizations are available everywhere:
``"monic"``, ``"standard"`` (textbook Jacobi / Gegenbauer) and
``"orthonormal"``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.linalg import eigh_tridiagonal

__all__ = [
    "WeightError",
    "WeightSpec",
    "RecurrenceCoeffs",
    "build_recurrence",
    "evaluate",
    "endpoint_values",
    "monomial_coeffs",
    "rescaled_eval",
    "roots",
    "jacobi_shift_derivative",
    "NORMALIZATIONS",
]

NORMALIZATIONS = ("monic", "standard", "orthonormal")


class WeightError(ValueError):
    """Invalid weight parameters or a breakdown of the moment procedure."""


def _rising(x: float, n: int) -> float:
    """Pochhammer symbol (x)_n as a finite product."""
    out = 1.0
    for j in range(n):
        out *= x + j
    return out


@dataclass(frozen=True)
class WeightSpec:
    """A weight function on a reference interval.

    Use the constructors :meth:`jacobi`, :meth:`legendre`, :meth:`gegenbauer`
    and :meth:`custom` rather than the raw initializer.
    """

    family: str
    params: tuple = ()
    interval: tuple[float, float] = (-1.0, 1.0)
    moments: Optional[Callable[[int], float]] = field(default=None, compare=False)
    auxiliary: Optional[tuple] = field(default=None, compare=False)
    density_fn: Optional[Callable] = field(default=None, compare=False)
    even: bool = False
    label: str = ""

    @classmethod
    def jacobi(cls, alpha: float, beta: float) -> "WeightSpec":
        alpha, beta = float(alpha), float(beta)
        if not (alpha > -1 and beta > -1):
            raise WeightError(f"Jacobi parameters must exceed -1, got ({alpha}, {beta})")
        return cls("jacobi", (alpha, beta), even=(alpha == beta),
                   label=f"jacobi:{alpha:g},{beta:g}")

    @classmethod
    def legendre(cls) -> "WeightSpec":
        return cls("jacobi", (0.0, 0.0), even=True, label="legendre")

    @classmethod
    def gegenbauer(cls, lam: float) -> "WeightSpec":
        lam = float(lam)
        if not lam > -0.5:
            raise WeightError(f"Gegenbauer parameter must exceed -1/2, got {lam}")
        return cls("gegenbauer", (lam,), even=True, label=f"gegenbauer:{lam:g}")

    @classmethod
    def custom(
        cls,
        moments: Callable[[int], float] | Sequence[float],
        interval: tuple[float, float] = (-1.0, 1.0),
        auxiliary: Optional[tuple[Sequence[float], Sequence[float]]] = None,
        density: Optional[Callable] = None,
        even: bool = False,
        label: str = "custom",
    ) -> "WeightSpec":
        """Weight given by modified moments ``m_k = int p_k(t) w(t) dt``.

        ``p_k`` are the monic polynomials of ``auxiliary = (a, b)``, i.e.
        ``p_{k+1} = (t - a_k) p_k - b_k p_{k-1}``.  The default auxiliary
        family is monic Legendre mapped to ``interval`` (well conditioned on
        bounded intervals).  ``a`` and ``b`` must be long enough for the
        requested degree (``2 m_max + 2`` entries).
        """
        a, b = float(interval[0]), float(interval[1])
        if not a < b:
            raise WeightError(f"interval must satisfy a < b, got {interval}")
        if not callable(moments):
            seq = tuple(float(v) for v in moments)

            def moments(k, _seq=seq):
                if k >= len(_seq):
                    raise WeightError(f"only {len(_seq)} modified moments supplied")
                return _seq[k]

        return cls("custom", (id(moments),), (a, b), moments=moments,
                   auxiliary=None if auxiliary is None else (tuple(auxiliary[0]), tuple(auxiliary[1])),
                   density_fn=density, even=even, label=label)

    @classmethod
    def from_density(
        cls,
        density: Callable,
        interval: tuple[float, float] = (-1.0, 1.0),
        even: bool = False,
        n_moments: int = 64,
        label: str = "custom",
    ) -> "WeightSpec":
        """Custom weight whose Legendre-modified moments come from adaptive quadrature."""
        import warnings

        from scipy.integrate import IntegrationWarning, quad

        lo, hi = float(interval[0]), float(interval[1])
        a, b = _legendre_monic_aux(n_moments, lo, hi)
        mass, _ = quad(density, lo, hi, limit=400)
        if not (math.isfinite(mass) and mass > 0):
            raise WeightError("density must have finite positive mass")
        mom = []
        for k in range(n_moments):
            def integrand(t, k=k):
                return _monic_eval(a, b, k, t) * density(t)
            # most modified moments are near zero; an absolute floor tied to the mass
            # is what matters, so roundoff warnings below it are expected
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", IntegrationWarning)
                val, _ = quad(integrand, lo, hi, limit=400, epsabs=1e-15 * mass, epsrel=1e-13)
            if not math.isfinite(val):
                raise WeightError(f"moment {k} diverges")
            mom.append(val)
        return cls.custom(mom, (lo, hi), (a, b), density=density, even=even, label=label)

    @property
    def is_even(self) -> bool:
        """True when the weight is symmetric about the interval midpoint."""
        return self.even

    @property
    def jacobi_params(self) -> Optional[tuple[float, float]]:
        """(alpha, beta) for Jacobi-type weights (Gegenbauer included), else None."""
        if self.family == "jacobi":
            return self.params
        if self.family == "gegenbauer":
            a = self.params[0] - 0.5
            return (a, a)
        return None

    def density(self, t):
        """Evaluate the weight function itself."""
        t = np.asarray(t, dtype=float)
        jp = self.jacobi_params
        if jp is not None:
            alpha, beta = jp
            return (1.0 - t) ** alpha * (1.0 + t) ** beta
        if self.density_fn is None:
            raise WeightError("custom weight was built without a density")
        return np.asarray(self.density_fn(t), dtype=float)

    def __str__(self) -> str:
        return self.label or self.family


def _legendre_monic_aux(n: int, lo: float, hi: float) -> tuple[tuple, tuple]:
    half, mid = 0.5 * (hi - lo), 0.5 * (hi + lo)
    a = tuple(mid for _ in range(n))
    b = tuple([2.0 * half] + [half**2 * k * k / (4.0 * k * k - 1.0) for k in range(1, n)])
    return a, b


def _monic_eval(a, b, k, t):
    p_prev, p = 0.0, 1.0
    for j in range(k):
        p_prev, p = p, (t - a[j]) * p - (b[j] * p_prev if j > 0 else 0.0)
    return p


@dataclass(frozen=True)
class RecurrenceCoeffs:
    """Monic recurrence data for degrees ``0..m_max``.

    ``c[k-1]`` and ``d[k-1]`` hold c_k and d_k for ``k = 1..m_max+1``; the
    extra entry gives the norm of the degree ``m_max`` polynomial and the
    ``m_max + 1`` point Gauss rule.
    """

    weight: WeightSpec
    m_max: int
    c: np.ndarray
    d: np.ndarray
    leading: np.ndarray
    norms: np.ndarray

    def scale(self, n: int, normalization: str) -> float:
        """Factor turning the monic polynomial of degree n into ``normalization``."""
        if normalization == "monic":
            return 1.0
        if normalization == "standard":
            return float(self.leading[n])
        if normalization == "orthonormal":
            return 1.0 / math.sqrt(self.norms[n])
        raise ValueError(f"unknown normalization {normalization!r}")

    def norm_sq(self, n: int, normalization: str = "monic") -> float:
        return float(self.norms[n]) * self.scale(n, normalization) ** 2

    @property
    def mu0(self) -> float:
        return float(self.d[0])


def _jacobi_cd(alpha: float, beta: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    s = alpha + beta
    c = np.empty(n)
    d = np.empty(n)
    for k in range(1, n + 1):
        if k == 1:
            c[0] = (beta - alpha) / (s + 2.0)
        else:
            c[k - 1] = (beta - alpha) * (beta + alpha) / ((2 * k + s - 2) * (2 * k + s))
        if k == 1:
            # mu_0 = 2^{s+1} B(alpha+1, beta+1); lgamma keeps it finite for large params
            d[0] = math.exp((s + 1) * math.log(2.0) + math.lgamma(alpha + 1)
                            + math.lgamma(beta + 1) - math.lgamma(s + 2))
        elif k == 2:
            d[1] = 4.0 * (alpha + 1) * (beta + 1) / ((s + 2) ** 2 * (s + 3))
        else:
            j = k - 1
            d[k - 1] = (4.0 * j * (j + alpha) * (j + beta) * (j + s)
                        / ((2 * j + s) ** 2 * (2 * j + s + 1) * (2 * j + s - 1)))
    return c, d


def _modified_chebyshev(w: WeightSpec, n: int) -> tuple[np.ndarray, np.ndarray]:
    lo, hi = w.interval
    if w.auxiliary is None:
        a, b = _legendre_monic_aux(2 * n, lo, hi)
    else:
        a, b = w.auxiliary
        if len(a) < 2 * n or len(b) < 2 * n:
            raise WeightError(f"auxiliary recurrence needs {2 * n} coefficients")
    mom = np.array([float(w.moments(k)) for k in range(2 * n)])
    if not np.all(np.isfinite(mom)):
        raise WeightError("modified moments are not finite")
    if mom[0] <= 0:
        raise WeightError("total mass must be positive")
    alpha = np.zeros(n)
    beta = np.zeros(n)
    sig_prev = np.zeros(2 * n)
    sig = mom.copy()
    alpha[0] = a[0] + mom[1] / mom[0]
    beta[0] = mom[0]
    for k in range(1, n):
        new = np.zeros(2 * n)
        for l in range(k, 2 * n - k):
            new[l] = (sig[l + 1] - (alpha[k - 1] - a[l]) * sig[l]
                      - beta[k - 1] * sig_prev[l] + b[l] * sig[l - 1])
        alpha[k] = a[k] + new[k + 1] / new[k] - sig[k] / sig[k - 1]
        beta[k] = new[k] / sig[k - 1]
        if not (beta[k] > 0 and math.isfinite(beta[k])):
            raise WeightError(f"moment functional not positive definite at degree {k}")
        sig_prev, sig = sig, new
    return alpha, beta


def _standard_leading(w: WeightSpec, n: int) -> float:
    if w.family == "jacobi":
        alpha, beta = w.params
        out = 1.0
        for j in range(1, n + 1):
            out *= (n + alpha + beta + j) / (2.0 * j)
        return out
    if w.family == "gegenbauer":
        lam = w.params[0]
        if lam == 0.0:
            # Chebyshev T_n convention for the lambda -> 0 limit
            return 1.0 if n == 0 else 2.0 ** (n - 1)
        out = 1.0
        for j in range(1, n + 1):
            out *= 2.0 * (lam + j - 1) / j
        return out
    return 1.0


def build_recurrence(w: WeightSpec, m_max: int) -> RecurrenceCoeffs:
    """Recurrence coefficients for degrees up to ``m_max``."""
    if m_max < 1:
        raise ValueError("m_max must be >= 1")
    n = m_max + 1
    jp = w.jacobi_params
    if jp is not None:
        c, d = _jacobi_cd(jp[0], jp[1], n)
    elif w.family == "custom":
        c, d = _modified_chebyshev(w, n)
    else:
        raise WeightError(f"unknown weight family {w.family!r}")
    if w.even:
        # symmetric about the midpoint
        c = np.full_like(c, 0.5 * (w.interval[0] + w.interval[1]))
    norms = np.cumprod(d)
    leading = np.array([_standard_leading(w, k) for k in range(n)])
    for arr in (c, d, leading, norms):
        arr.setflags(write=False)
    return RecurrenceCoeffs(w, m_max, c, d, leading, norms)


def evaluate(rc: RecurrenceCoeffs, n: int, k: int, t, normalization: str = "monic"):
    """k-th derivative of the degree-n polynomial at t (scalar or array)."""
    if not 0 <= n <= rc.m_max:
        raise ValueError(f"degree {n} outside 0..{rc.m_max}")
    if not 0 <= k <= n:
        raise ValueError(f"derivative order {k} outside 0..{n}")
    t = np.asarray(t, dtype=float)
    # cur[j] = j-th derivative of p_i, prev[j] of p_{i-1}
    prev = [np.zeros_like(t) for _ in range(k + 1)]
    cur = [np.zeros_like(t) for _ in range(k + 1)]
    cur[0] = np.ones_like(t)
    for i in range(1, n + 1):
        ci, di = rc.c[i - 1], (rc.d[i - 1] if i > 1 else 0.0)
        nxt = [(t - ci) * cur[0] - di * prev[0]]
        for j in range(1, k + 1):
            nxt.append((t - ci) * cur[j] + j * cur[j - 1] - di * prev[j])
        prev, cur = cur, nxt
    return (cur[k] * rc.scale(n, normalization))[()]


def endpoint_values(alpha: float, beta: float, m: int) -> tuple[float, float]:
    """Standard Jacobi values ``(P_m(-1), P_m(1))`` from rising products."""
    if not (alpha > -1 and beta > -1):
        raise WeightError(f"Jacobi parameters must exceed -1, got ({alpha}, {beta})")
    if m < 0:
        raise ValueError("degree must be >= 0")
    at1 = 1.0
    atm1 = 1.0
    for j in range(1, m + 1):
        at1 *= (alpha + j) / j
        atm1 *= (beta + j) / j
    return ((-1) ** m * atm1, at1)


def monomial_coeffs(rc: RecurrenceCoeffs, n: int, normalization: str = "monic") -> np.ndarray:
    """Ascending monomial coefficients of the degree-n polynomial."""
    if not 0 <= n <= rc.m_max:
        raise ValueError(f"degree {n} outside 0..{rc.m_max}")
    prev = np.zeros(1)
    cur = np.ones(1)
    for i in range(1, n + 1):
        ci, di = rc.c[i - 1], (rc.d[i - 1] if i > 1 else 0.0)
        nxt = P.polysub(P.polymulx(cur), ci * cur)
        if i > 1:
            nxt = P.polysub(nxt, di * prev)
        prev, cur = cur, nxt
    out = np.zeros(n + 1)
    out[: len(cur)] = cur
    return out * rc.scale(n, normalization)


def _affine(rc: RecurrenceCoeffs, a: float, b: float):
    if not a < b:
        raise ValueError(f"edge interval must satisfy a < b, got ({a}, {b})")
    r0, r1 = rc.weight.interval
    slope = (r1 - r0) / (b - a)
    return slope, lambda x: r0 + (np.asarray(x, dtype=float) - a) * slope


def rescaled_eval(rc: RecurrenceCoeffs, n: int, k: int, a: float, b: float, x,
                  normalization: str = "monic"):
    """k-th derivative of ``x -> p_n(phi(x))`` where phi maps [a, b] onto the reference interval."""
    slope, phi = _affine(rc, a, b)
    return evaluate(rc, n, k, phi(x), normalization) * slope**k


def roots(rc: RecurrenceCoeffs, m: int) -> np.ndarray:
    """Zeros of the degree-m polynomial (eigenvalues of the Jacobi matrix), ascending."""
    if not 1 <= m <= rc.m_max:
        raise ValueError(f"degree {m} outside 1..{rc.m_max}")
    if m == 1:
        return np.array([rc.c[0]])
    try:
        return eigh_tridiagonal(rc.c[:m], np.sqrt(rc.d[1:m]), eigvals_only=True)
    except np.linalg.LinAlgError as exc:
        raise RuntimeError(f"Jacobi-matrix eigensolver failed for degree {m}") from exc


def jacobi_shift_derivative(alpha: float, beta: float, m: int, k: int, t) -> np.ndarray:
    """k-th derivative of the standard Jacobi polynomial via the parameter shift

        d^k/dt^k P_m^{(a,b)} = 2^{-k} (m+a+b+1)_k P_{m-k}^{(a+k, b+k)}.
    """
    t = np.asarray(t, dtype=float)
    if k > m:
        return np.zeros_like(t)
    factor = _rising(m + alpha + beta + 1.0, k) / 2.0**k
    shifted = build_recurrence(WeightSpec.jacobi(alpha + k, beta + k), max(m - k, 1))
    return factor * evaluate(shifted, m - k, 0, t, "standard")
