"""
Numerical building blocks: upper incomplete gamma, adaptive quadrature,
finite-difference derivatives and a thin minimizer contract.
"""
from __future__ import annotations

import heapq
import math
import sys
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import optimize

__all__ = [
    "DomainError",
    "ConvergenceError",
    "QuadratureResult",
    "OptimResult",
    "MinimizeConfig",
    "upper_incomplete_gamma",
    "integrate",
    "gradient_fd",
    "hessian_fd",
    "minimize",
]

EPS = sys.float_info.epsilon
_TINY = 1e-300


class DomainError(ValueError):
    """Argument outside the mathematical domain of an operation."""


class ConvergenceError(ArithmeticError):
    """An iterative procedure exhausted its budget without meeting tolerance."""


# ---------------------------------------------------------------------------
# incomplete gamma
# ---------------------------------------------------------------------------

def _gamma_series(s, x, max_iter, tol):
    # lower gamma(s, x) = e^{-x} x^s sum_n x^n / (s (s+1) ... (s+n))
    term = 1.0 / s
    total = term
    ap = s
    for _ in range(max_iter):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * tol:
            return total * math.exp(-x + s * math.log(x))
    raise ConvergenceError(f"incomplete gamma series did not converge (s={s}, x={x})")


def _gamma_contfrac(s, x, max_iter, tol):
    # modified Lentz on the Legendre continued fraction for Gamma(s, x)
    fpmin = 1e-300
    b = x + 1.0 - s
    c = 1.0 / fpmin
    d = 1.0 / b
    h = d
    for i in range(1, max_iter + 1):
        an = -i * (i - s)
        b += 2.0
        d = an * d + b
        if abs(d) < fpmin:
            d = fpmin
        c = b + an / c
        if abs(c) < fpmin:
            c = fpmin
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < tol:
            log_pref = -x + s * math.log(x)
            if log_pref < -745.0:
                return 0.0
            return math.exp(log_pref) * h
    raise ConvergenceError(f"incomplete gamma continued fraction did not converge (s={s}, x={x})")


def _gamma_complete(s):
    try:
        return math.gamma(s)
    except OverflowError:
        return math.inf


def upper_incomplete_gamma(s: float, x: float, *, max_iter: int = 10_000,
                           tol: float = 1e-16) -> float:
    """Upper incomplete gamma function ``Gamma(s, x)`` (not regularized).

    Uses the power series of the lower function when ``x < s + 1`` and the
    Legendre continued fraction otherwise.

    Parameters
    ----------
    s : float
        Shape, strictly positive.
    x : float
        Lower integration limit, non-negative.

    Returns
    -------
    float
        ``int_x^inf u^(s-1) e^(-u) du``
    """
    s = float(s)
    x = float(x)
    if not (math.isfinite(s) and math.isfinite(x)):
        raise DomainError(f"non-finite argument: s={s}, x={x}")
    if s <= 0.0:
        raise DomainError(f"shape must be positive, got s={s}")
    if x < 0.0:
        raise DomainError(f"x must be non-negative, got x={x}")
    if x == 0.0:
        return _gamma_complete(s)
    if x < s + 1.0:
        return _gamma_complete(s) - _gamma_series(s, x, max_iter, tol)
    return _gamma_contfrac(s, x, max_iter, tol)


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadratureResult:
    value: float
    abs_error_estimate: float
    evaluations: int


# Gauss-Kronrod 7/15 abscissae and weights on [-1, 1]
_XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
])
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_KWEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
_GWEIGHTS = np.zeros(15)
_GWEIGHTS[[1, 3, 5, 9, 11, 13]] = np.concatenate([_WG[:-1], _WG[:-1][::-1]])
_GWEIGHTS[7] = _WG[-1]


def _gk15(g, lo, hi):
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    fx = np.asarray(g(mid + half * _NODES), dtype=float)
    if not np.all(np.isfinite(fx)):
        bad = (mid + half * _NODES)[~np.isfinite(fx)][0]
        raise DomainError(f"integrand is not finite at t={bad!r}")
    kron = half * np.dot(_KWEIGHTS, fx)
    gauss = half * np.dot(_GWEIGHTS, fx)
    # QUADPACK error heuristic
    resabs = abs(half) * np.dot(_KWEIGHTS, np.abs(fx))
    mean = kron / (2.0 * half) if half else 0.0
    resasc = abs(half) * np.dot(_KWEIGHTS, np.abs(fx - mean))
    err = abs(kron - gauss)
    if resasc != 0.0 and err != 0.0:
        err = resasc * min(1.0, (200.0 * err / resasc) ** 1.5)
    if resabs > np.finfo(float).tiny / (50.0 * EPS):
        err = max(err, 50.0 * EPS * resabs)
    return kron, err


def integrate(f: Callable, a: float, b: float = math.inf, rel_tol: float = 1e-10,
              *, abs_floor: float = _TINY, max_intervals: int = 4000) -> QuadratureResult:
    """Globally adaptive Gauss-Kronrod (7/15) quadrature of ``f`` over ``(a, b)``.

    ``f`` is called with a 1-d array of abscissae and must return an array
    of the same shape. An infinite upper limit is handled by the change of
    variables ``x = a + t/(1 - t)`` on ``t in [0, 1)``.

    Raises
    ------
    ConvergenceError
        When the subdivision budget is exhausted before the error estimate
        drops below ``max(rel_tol * |value|, abs_floor)``.
    """
    a = float(a)
    b = float(b)
    if not math.isfinite(a) or math.isnan(b) or b == -math.inf:
        raise DomainError("integration requires a finite lower limit")
    if not a < b:
        raise DomainError(f"need a < b, got a={a}, b={b}")

    if math.isinf(b):
        def g(t):
            one_minus = 1.0 - t
            return f(a + t / one_minus) / (one_minus * one_minus)
        lo, hi = 0.0, 1.0
    else:
        g = f
        lo, hi = a, b

    value, err = _gk15(g, lo, hi)
    evaluations = 15
    heap = [(-err, lo, hi, value)]
    total, total_err = value, err
    while total_err > max(rel_tol * abs(total), abs_floor):
        if len(heap) >= max_intervals:
            raise ConvergenceError(
                f"quadrature budget of {max_intervals} intervals exhausted "
                f"(value={total!r}, error estimate={total_err!r})")
        neg_err, l, h, v = heapq.heappop(heap)
        m = 0.5 * (l + h)
        if not (l < m < h):
            raise ConvergenceError(f"interval [{l!r}, {h!r}] cannot be bisected further")
        v1, e1 = _gk15(g, l, m)
        v2, e2 = _gk15(g, m, h)
        evaluations += 30
        heapq.heappush(heap, (-e1, l, m, v1))
        heapq.heappush(heap, (-e2, m, h, v2))
        total += v1 + v2 - v
        total_err += e1 + e2 + neg_err
    # re-sum to shed accumulated rounding from the running totals
    total = math.fsum(item[3] for item in heap)
    total_err = math.fsum(-item[0] for item in heap)
    return QuadratureResult(total, total_err, evaluations)


# ---------------------------------------------------------------------------
# finite differences
# ---------------------------------------------------------------------------

def _checked(f, x, index):
    val = float(f(x))
    if not math.isfinite(val):
        raise DomainError(f"function is not finite while differencing component {index} "
                          f"at x={x.tolist()!r}")
    return val


def gradient_fd(f: Callable[[np.ndarray], float], x, step: Optional[np.ndarray] = None) -> np.ndarray:
    """Central-difference gradient with step ``cbrt(eps) * max(1, |x_i|)``."""
    x = np.asarray(x, dtype=float)
    h = np.cbrt(EPS) * np.maximum(1.0, np.abs(x)) if step is None else np.broadcast_to(step, x.shape)
    grad = np.empty_like(x)
    for i in range(x.size):
        xp = x.copy()
        xm = x.copy()
        xp[i] += h[i]
        xm[i] -= h[i]
        grad[i] = (_checked(f, xp, i) - _checked(f, xm, i)) / (xp[i] - xm[i])
    return grad


def hessian_fd(f: Callable[[np.ndarray], float], x) -> np.ndarray:
    """Central-difference Hessian, symmetrized, step ``eps**0.25 * max(1, |x_i|)``."""
    x = np.asarray(x, dtype=float)
    n = x.size
    h = EPS ** 0.25 * np.maximum(1.0, np.abs(x))
    f0 = _checked(f, x, "centre")
    hess = np.empty((n, n))
    for i in range(n):
        ei = np.zeros(n)
        ei[i] = h[i]
        fp = _checked(f, x + ei, i)
        fm = _checked(f, x - ei, i)
        hess[i, i] = (fp - 2.0 * f0 + fm) / (h[i] * h[i])
        for j in range(i):
            ej = np.zeros(n)
            ej[j] = h[j]
            fpp = _checked(f, x + ei + ej, (i, j))
            fpm = _checked(f, x + ei - ej, (i, j))
            fmp = _checked(f, x - ei + ej, (i, j))
            fmm = _checked(f, x - ei - ej, (i, j))
            hess[i, j] = (fpp - fpm - fmp + fmm) / (4.0 * h[i] * h[j])
    # only the lower triangle was filled; mirror it
    lower = np.tril(hess, -1)
    return lower + lower.T + np.diag(np.diag(hess))


# ---------------------------------------------------------------------------
# minimization
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MinimizeConfig:
    gtol: float = 1e-6
    max_iter: int = 5000
    xatol: float = 1e-10
    fatol: float = 1e-12


@dataclass(frozen=True)
class OptimResult:
    argmin: np.ndarray
    fmin: float
    converged: bool
    iterations: int
    gradient_norm: float
    evaluations: int = field(default=0)


def minimize(f: Callable[[np.ndarray], float], x0, grad: Optional[Callable] = None,
             config: MinimizeConfig = MinimizeConfig()) -> OptimResult:
    """Local minimization of ``f`` starting from ``x0``.

    BFGS is used when an analytic ``grad`` is supplied, Nelder-Mead
    otherwise. Convergence is judged by the infinity norm of the gradient
    at the returned point (finite differences when ``grad`` is absent).
    An exhausted iteration budget yields ``converged=False`` rather than an
    exception.
    """
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    f0 = float(f(x0))
    if not math.isfinite(f0):
        raise DomainError(f"objective is not finite at the starting point {x0.tolist()!r}")

    if grad is not None:
        res = optimize.minimize(f, x0, jac=grad, method="BFGS",
                                options={"gtol": config.gtol, "maxiter": config.max_iter})
    else:
        res = optimize.minimize(f, x0, method="Nelder-Mead",
                                options={"xatol": config.xatol, "fatol": config.fatol,
                                         "maxiter": config.max_iter,
                                         "maxfev": 4 * config.max_iter})
    x = np.atleast_1d(res.x)
    fmin = float(res.fun)
    try:
        g = np.asarray(grad(x), dtype=float) if grad is not None else gradient_fd(f, x)
        gnorm = float(np.max(np.abs(g))) if g.size else 0.0
    except DomainError:
        gnorm = math.inf
    if not math.isfinite(gnorm):
        gnorm = math.inf
    return OptimResult(argmin=x, fmin=fmin, converged=gnorm <= config.gtol,
                       iterations=int(res.get("nit", 0)), gradient_norm=gnorm,
                       evaluations=int(res.get("nfev", 0)))
