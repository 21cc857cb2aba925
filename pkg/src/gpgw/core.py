"""
The generalized power generalized Weibull (GPGW) distribution.

With ``z = lam * x**alpha`` the survival function is
``exp(b * (1 - (1 + z)**theta))``. All functions accept scalars or numpy
arrays for ``x``; tail quantities are evaluated in log space so that a
survival probability far below machine epsilon keeps its relative accuracy.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .numerics import DomainError

__all__ = [
    "GpgwParams",
    "Shape",
    "HazardShape",
    "pdf",
    "log_pdf",
    "cdf",
    "log_cdf",
    "survival",
    "log_survival",
    "quantile",
    "median",
    "sample",
    "hazard",
    "cumulative_hazard",
    "reversed_hazard",
    "classify_hazard_shape",
]


@dataclass(frozen=True)
class GpgwParams:
    """Parameter vector: shapes ``alpha`` and ``theta``, scales ``lam`` and ``b``."""

    alpha: float
    lam: float
    theta: float
    b: float

    def __post_init__(self):
        for name in ("alpha", "lam", "theta", "b"):
            value = getattr(self, name)
            try:
                value = float(value)
            except (TypeError, ValueError):
                raise DomainError(f"{name} must be a real number, got {value!r}") from None
            if not (math.isfinite(value) and value > 0.0):
                raise DomainError(f"{name} must be positive and finite, got {value!r}")
            object.__setattr__(self, name, value)

    def astuple(self):
        return (self.alpha, self.lam, self.theta, self.b)


class Shape(enum.Enum):
    INCREASING = "increasing"
    DECREASING = "decreasing"
    BATHTUB = "bathtub"
    UNIMODAL = "unimodal"
    CONSTANT = "constant"


@dataclass(frozen=True)
class HazardShape:
    shape: Shape
    constant_level: Optional[float] = None

    def __post_init__(self):
        if (self.shape is Shape.CONSTANT) != (self.constant_level is not None):
            raise ValueError("constant_level is required for, and only for, a constant hazard")


def _log1p_z(p: GpgwParams, x):
    """``log(1 + lam * x**alpha)`` for x > 0, safe for huge and tiny z."""
    with np.errstate(divide="ignore"):
        log_z = math.log(p.lam) + p.alpha * np.log(x)
    return np.logaddexp(0.0, log_z)


def _excess(p: GpgwParams, x):
    """``(1 + lam * x**alpha)**theta - 1``; the cumulative hazard is ``b`` times this."""
    with np.errstate(over="ignore"):
        return np.expm1(p.theta * _log1p_z(p, x))


def _as_array(x):
    arr = np.asarray(x, dtype=float)
    if np.any(np.isnan(arr)):
        raise DomainError("x contains NaN")
    return arr


def _out(arr):
    return float(arr) if np.ndim(arr) == 0 else arr


def _require_positive(x, what="x"):
    if np.any(x <= 0.0):
        raise DomainError(f"{what} must be strictly positive")


def log_pdf(p: GpgwParams, x):
    """Log density for ``x > 0``."""
    x = _as_array(x)
    _require_positive(x)
    log_x = np.log(x)
    log_z = math.log(p.lam) + p.alpha * log_x
    l1 = np.logaddexp(0.0, log_z)
    # (alpha-1) log x + (theta-1) log(1+z) rewritten so that huge alpha with
    # tiny theta does not cancel catastrophically; lam drops out exactly
    with np.errstate(over="ignore", invalid="ignore"):
        excess = np.expm1(p.theta * l1)
        out = (math.log(p.alpha) + math.log(p.theta) + math.log(p.b) - log_x
               - np.logaddexp(0.0, -log_z) + p.theta * l1 - p.b * excess)
    return _out(np.where(np.isnan(out), -np.inf, out))


def pdf(p: GpgwParams, x):
    """Density; zero for ``x < 0``.

    At ``x == 0`` the density is ``+inf`` when ``alpha < 1``, ``alpha*lam*theta*b``
    when ``alpha == 1`` and zero otherwise. Prefer :func:`log_pdf` for
    likelihood work.
    """
    x = _as_array(x)
    out = np.zeros(np.shape(x))
    pos = x > 0.0
    if np.any(pos):
        out[pos] = np.exp(log_pdf(p, x[pos]))
    at_zero = x == 0.0
    if np.any(at_zero):
        if p.alpha < 1.0:
            out[at_zero] = np.inf
        elif p.alpha == 1.0:
            out[at_zero] = p.lam * p.theta * p.b
    return _out(out)


def log_survival(p: GpgwParams, x):
    x = _as_array(x)
    out = np.zeros(np.shape(x))
    pos = x > 0.0
    if np.any(pos):
        out[pos] = -p.b * _excess(p, x[pos])
    return _out(out)


def survival(p: GpgwParams, x):
    """``exp(b * (1 - (1 + lam x^alpha)^theta))``; one for ``x <= 0``."""
    return _out(np.exp(log_survival(p, x)))


def cdf(p: GpgwParams, x):
    """``1 - survival``, via ``expm1`` so small probabilities stay accurate."""
    return _out(-np.expm1(log_survival(p, x)))


def log_cdf(p: GpgwParams, x):
    """Log of the cdf, accurate at both ends (``-inf`` for ``x <= 0``)."""
    h = -np.asarray(log_survival(p, x))
    out = np.full(np.shape(h), -np.inf)
    with np.errstate(divide="ignore"):
        small = h <= math.log(2.0)
        out[small] = np.log(-np.expm1(-h[small]))
        out[~small] = np.log1p(-np.exp(-h[~small]))
    return _out(out)


def quantile(p: GpgwParams, q):
    """Inverse of the cdf for ``0 <= q < 1``."""
    q = _as_array(q)
    if np.any((q < 0.0) | (q >= 1.0)):
        raise DomainError("quantile level must lie in [0, 1)")
    w = -np.log1p(-q) / p.b
    inner = np.expm1(np.log1p(w) / p.theta)
    with np.errstate(divide="ignore"):
        out = np.exp((np.log(inner) - math.log(p.lam)) / p.alpha)
    return _out(out)


def median(p: GpgwParams) -> float:
    return quantile(p, 0.5)


def sample(p: GpgwParams, n: int, rng: np.random.Generator) -> np.ndarray:
    """Inverse-transform draws ``quantile(p, u)`` with ``u ~ U(0, 1)`` from ``rng``."""
    if n < 0:
        raise DomainError(f"sample size must be non-negative, got {n}")
    u = rng.random(n)
    # u == 0 would map to x == 0
    u[u == 0.0] = np.nextafter(0.0, 1.0)
    return np.atleast_1d(quantile(p, u))


def hazard(p: GpgwParams, t):
    """``alpha lam theta b t^(alpha-1) (1 + lam t^alpha)^(theta-1)`` for ``t > 0``."""
    t = _as_array(t)
    _require_positive(t, "t")
    log_t = np.log(t)
    log_z = math.log(p.lam) + p.alpha * log_t
    log_h = (math.log(p.alpha) + math.log(p.theta) + math.log(p.b) - log_t
             - np.logaddexp(0.0, -log_z) + p.theta * np.logaddexp(0.0, log_z))
    return _out(np.exp(log_h))


def cumulative_hazard(p: GpgwParams, t):
    """``-log survival = b ((1 + lam t^alpha)^theta - 1)``."""
    t = _as_array(t)
    _require_positive(t, "t")
    return _out(p.b * _excess(p, t))


def reversed_hazard(p: GpgwParams, t):
    """``pdf / cdf``; raises where the cdf underflows to zero."""
    t = _as_array(t)
    _require_positive(t, "t")
    lc = np.asarray(log_cdf(p, t))
    if np.any(np.isneginf(lc)):
        raise DomainError("cdf underflows to zero; reversed hazard is not representable")
    return _out(np.exp(np.asarray(log_pdf(p, t)) - lc))


def classify_hazard_shape(p: GpgwParams) -> HazardShape:
    """Hazard shape from the signs of ``alpha - 1`` and ``alpha*theta - 1``.

    ``t d log h / dt`` moves monotonically from ``alpha - 1`` (t -> 0) to
    ``alpha*theta - 1`` (t -> inf), so the two end signs decide the shape.
    """
    a = p.alpha
    c = p.alpha * p.theta
    if a == 1.0 and c == 1.0:
        return HazardShape(Shape.CONSTANT, p.b * p.lam)
    if a >= 1.0 and c >= 1.0:
        return HazardShape(Shape.INCREASING)
    if a <= 1.0 and c <= 1.0:
        return HazardShape(Shape.DECREASING)
    if a < 1.0:
        return HazardShape(Shape.BATHTUB)
    return HazardShape(Shape.UNIMODAL)
