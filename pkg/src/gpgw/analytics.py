"""
Moments, generating function, incomplete moments, inequality curves,
quantile shape measures and order-statistic densities of the GPGW law.

Closed forms exist whenever ``r / alpha`` is a whole number: substituting
``u = (1 + lam x^alpha)^theta`` and expanding ``(u^(1/theta) - 1)^(r/alpha)``
binomially turns every moment integral into a finite sum of upper
incomplete gamma functions. Everything else goes through quadrature.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy import special

from . import core
from .core import GpgwParams
from .numerics import ConvergenceError, DomainError, integrate, upper_incomplete_gamma

__all__ = [
    "Method",
    "MomentReport",
    "CurvePoint",
    "DivergenceError",
    "integer_ratio",
    "raw_moment",
    "moment_report",
    "mgf",
    "mgf_series",
    "upper_incomplete_moment",
    "lower_incomplete_moment",
    "mean_deviations",
    "bonferroni_lorenz",
    "order_stat_pdf",
    "order_stat_cdf",
    "bowley_moors",
]

INTEGER_TOL = 1e-9
# alternating sums whose largest term dwarfs the result lose this many digits;
# beyond it the quadrature path is more accurate
_MAX_CANCELLATION = 1e6
_QUAD_TOL = 1e-11


class Method(enum.Enum):
    CLOSED_FORM = "closed_form"
    QUADRATURE = "quadrature"


class DivergenceError(ConvergenceError):
    """The requested integral does not exist or failed to converge."""


@dataclass(frozen=True)
class MomentReport:
    raw_moments: Tuple[float, float, float, float]
    variance: float
    central_moments: Tuple[float, float, float]  # mu_2, mu_3, mu_4
    cumulants: Tuple[float, float, float]        # k_2, k_3, k_4
    skewness: float
    excess_kurtosis: float
    methods: Tuple[Method, Method, Method, Method]


@dataclass(frozen=True)
class CurvePoint:
    p: float
    bonferroni: float
    lorenz: float


def integer_ratio(r, alpha):
    """``round(r/alpha)`` when ``r/alpha`` is within 1e-9 of a non-negative integer, else None."""
    ratio = r / alpha
    m = round(ratio)
    if abs(ratio - m) <= INTEGER_TOL * max(1.0, abs(ratio)) and m >= 0:
        return int(m)
    return None


def _closed_tail(p: GpgwParams, r: int, m: int, s: float):
    """``int_s^inf x^r f(x) dx`` by the binomial/incomplete-gamma sum, or None if ill-conditioned."""
    lower = p.b if s == 0.0 else p.b * math.exp(p.theta * math.log1p(p.lam * s ** p.alpha))
    terms = []
    for j in range(m + 1):
        a = j / p.theta + 1.0
        log_mag = math.log(math.comb(m, j)) + p.b - a * math.log(p.b)
        g = upper_incomplete_gamma(a, lower)
        if g == 0.0:
            terms.append(0.0)
            continue
        terms.append((-1.0) ** (j + m) * math.exp(log_mag + math.log(g)))
    total = math.fsum(terms)
    biggest = max(abs(t) for t in terms)
    if biggest == 0.0:
        return 0.0
    if total == 0.0 or biggest / abs(total) > _MAX_CANCELLATION or not math.isfinite(total):
        return None
    return p.b * p.lam ** (-r / p.alpha) * total


def _quad_tail(p: GpgwParams, r: float, s: float):
    def integrand(x):
        out = np.zeros_like(x)
        pos = x > 0.0
        out[pos] = np.exp(r * np.log(x[pos]) + core.log_pdf(p, x[pos]))
        return out
    try:
        return integrate(integrand, s, math.inf, rel_tol=_QUAD_TOL).value
    except ConvergenceError as exc:
        raise DivergenceError(f"moment integral of order {r} failed to converge: {exc}") from exc


def _tail_moment(p, r, s):
    m = integer_ratio(r, p.alpha)
    if m is not None:
        val = _closed_tail(p, r, m, s)
        if val is not None:
            return val, Method.CLOSED_FORM
    return _quad_tail(p, r, s), Method.QUADRATURE


def raw_moment(p: GpgwParams, r: int, *, return_method: bool = False):
    """``E[X^r]``: incomplete-gamma closed form when ``r/alpha`` is whole, quadrature otherwise."""
    if r < 1 or int(r) != r:
        raise DomainError(f"moment order must be a positive integer, got {r!r}")
    val, method = _tail_moment(p, int(r), 0.0)
    return (val, method) if return_method else val


def moment_report(p: GpgwParams) -> MomentReport:
    raws, methods = zip(*(raw_moment(p, r, return_method=True) for r in range(1, 5)))
    mu = (1.0,) + tuple(raws)
    m1 = mu[1]
    central = tuple(
        math.fsum(math.comb(r, k) * (-m1) ** k * mu[r - k] for k in range(r + 1))
        for r in (2, 3, 4)
    )
    # k_r = mu'_r - sum_{k=1}^{r-1} C(r-1, k-1) k_k mu'_{r-k}
    kappa = [0.0, m1]
    for r in range(2, 5):
        kappa.append(mu[r] - math.fsum(math.comb(r - 1, k - 1) * kappa[k] * mu[r - k]
                                       for k in range(1, r)))
    k2, k3, k4 = kappa[2:]
    return MomentReport(
        raw_moments=tuple(raws),
        variance=mu[2] - m1 * m1,
        central_moments=central,
        cumulants=(k2, k3, k4),
        skewness=k3 / k2 ** 1.5,
        excess_kurtosis=k4 / k2 ** 2,
        methods=tuple(methods),
    )


def _mgf_exists(p: GpgwParams, t: float) -> bool:
    # the log survival behaves like -b lam^theta x^(alpha theta) far out
    if t <= 0.0:
        return True
    tail_shape = p.alpha * p.theta
    if tail_shape > 1.0:
        return True
    if tail_shape == 1.0:
        return t < p.b * p.lam ** p.theta
    return False


def mgf(p: GpgwParams, t: float) -> float:
    """``E[exp(tX)]`` by quadrature; raises :class:`DivergenceError` where it does not exist."""
    t = float(t)
    if t == 0.0:
        return 1.0
    if not _mgf_exists(p, t):
        raise DivergenceError(f"moment generating function diverges at t={t}")

    def integrand(x):
        out = np.zeros_like(x)
        pos = x > 0.0
        with np.errstate(over="ignore"):
            out[pos] = np.exp(t * x[pos] + core.log_pdf(p, x[pos]))
        return out
    try:
        return integrate(integrand, 0.0, math.inf, rel_tol=_QUAD_TOL).value
    except (ConvergenceError, DomainError) as exc:
        raise DivergenceError(f"moment generating function failed at t={t}: {exc}") from exc


def mgf_series(p: GpgwParams, t: float, *, rel_tol: float = 1e-12, max_terms: int = 200) -> float:
    """Power series ``sum_r t^r mu'_r / r!`` with closed-form moments (needs ``1/alpha`` whole)."""
    if integer_ratio(1, p.alpha) is None:
        raise DomainError("series form requires 1/alpha to be an integer")
    total = 1.0
    for r in range(1, max_terms + 1):
        term = math.exp(r * math.log(abs(t)) - math.lgamma(r + 1)) * raw_moment(p, r) if t else 0.0
        term *= 1.0 if t >= 0 or r % 2 == 0 else -1.0
        total += term
        if abs(term) <= rel_tol * abs(total):
            return total
    raise DivergenceError(f"moment generating series did not converge in {max_terms} terms")


def upper_incomplete_moment(p: GpgwParams, r: int, s: float, *, return_method: bool = False):
    """Unconditional tail moment ``int_s^inf x^r f(x) dx``."""
    if r < 1 or int(r) != r:
        raise DomainError(f"moment order must be a positive integer, got {r!r}")
    if not s >= 0.0:
        raise DomainError(f"s must be non-negative, got {s!r}")
    if math.isinf(s):
        val, method = 0.0, Method.CLOSED_FORM
    else:
        val, method = _tail_moment(p, int(r), float(s))
    return (val, method) if return_method else val


def lower_incomplete_moment(p: GpgwParams, s: float, r: int = 1) -> float:
    """``int_0^s x^r f(x) dx``, as the full moment minus the tail."""
    if not s >= 0.0:
        raise DomainError(f"s must be non-negative, got {s!r}")
    if s == 0.0:
        return 0.0
    return raw_moment(p, r) - upper_incomplete_moment(p, r, s)


def mean_deviations(p: GpgwParams) -> Tuple[float, float]:
    """Mean absolute deviations about the mean and about the median."""
    mu = raw_moment(p, 1)
    med = core.median(p)
    delta_mean = 2.0 * mu * core.cdf(p, mu) - 2.0 * lower_incomplete_moment(p, mu)
    delta_median = mu - 2.0 * lower_incomplete_moment(p, med)
    return delta_mean, delta_median


def _partial_mean(d, upper):
    """``int_0^upper x f(x) dx`` by quadrature for any catalog member."""
    def integrand(x):
        out = np.zeros_like(x)
        pos = x > 0.0
        out[pos] = x[pos] * np.asarray(d.pdf(x[pos]))
        return out
    try:
        return integrate(integrand, 0.0, upper, rel_tol=_QUAD_TOL).value
    except ConvergenceError as exc:
        raise DivergenceError(f"partial mean of {d} failed to converge: {exc}") from exc


def bonferroni_lorenz(p, prob: float) -> CurvePoint:
    """Lorenz ``L(p) = H_1(Q(p)) / mu'_1`` and Bonferroni ``L(p) / p``.

    ``p`` is a :class:`GpgwParams` or a catalog distribution; exponentiated
    members go through quadrature.
    """
    if not 0.0 < prob <= 1.0:
        raise DomainError(f"probability must lie in (0, 1], got {prob!r}")
    if prob == 1.0:
        return CurvePoint(1.0, 1.0, 1.0)
    if not isinstance(p, GpgwParams):
        if not p.spec.exponentiated:
            p = p.base
        else:
            lorenz = _partial_mean(p, float(p.quantile(prob))) / _partial_mean(p, math.inf)
            return CurvePoint(prob, lorenz / prob, lorenz)
    mu = raw_moment(p, 1)
    lorenz = lower_incomplete_moment(p, core.quantile(p, prob)) / mu
    return CurvePoint(prob, lorenz / prob, lorenz)


def _check_order(n, k):
    if not (int(n) == n and int(k) == k and 1 <= k <= n):
        raise DomainError(f"need integers 1 <= k <= n, got n={n!r}, k={k!r}")


def order_stat_pdf(p: GpgwParams, n: int, k: int, x):
    """Density of the k-th smallest of ``n`` independent GPGW draws."""
    _check_order(n, k)
    x = np.asarray(x, dtype=float)
    if n <= 20:
        log_c = math.log(math.factorial(n) // (math.factorial(k - 1) * math.factorial(n - k)))
    else:
        log_c = math.lgamma(n + 1) - math.lgamma(k) - math.lgamma(n - k + 1)
    out = np.zeros(np.shape(x))
    pos = x > 0.0
    if np.any(pos):
        xp = x[pos]
        with np.errstate(invalid="ignore"):
            lf = (log_c + core.log_pdf(p, xp) + (k - 1) * np.asarray(core.log_cdf(p, xp))
                  + (n - k) * np.asarray(core.log_survival(p, xp)))
        out[pos] = np.exp(np.where(np.isnan(lf), -np.inf, lf))
    return float(out) if out.ndim == 0 else out


def order_stat_cdf(p: GpgwParams, n: int, k: int, x):
    """``P(X_(k) <= x)``, the regularized incomplete beta ``I_F(x)(k, n-k+1)``."""
    _check_order(n, k)
    return special.betainc(k, n - k + 1, core.cdf(p, x))


def bowley_moors(p: GpgwParams) -> Tuple[float, float]:
    """Bowley (quartile) skewness and Moors (octile) kurtosis."""
    q = core.quantile(p, np.arange(1, 8) / 8.0)
    q1, q2, q3, q4, q5, q6, q7 = q
    sk = (q6 - 2.0 * q4 + q2) / (q6 - q2)
    ku = (q7 - q5 + q3 - q1) / (q6 - q2)
    return float(sk), float(ku)
