"""
Maximum-likelihood fitting, goodness-of-fit statistics, the total time on
test transform and multi-model comparison for complete lifetime samples.
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, Optional, Sequence

import numpy as np
from scipy import optimize, special

from .core import GpgwParams
from .family import Distribution, FamilyError, Kind, ModelSpec, make, spec_for
from .numerics import DomainError, MinimizeConfig, hessian_fd, minimize

__all__ = [
    "Dataset",
    "FitConfig",
    "FitResult",
    "GofReport",
    "TttCurve",
    "Comparison",
    "LikelihoodError",
    "DEFAULT_BATTERY",
    "log_likelihood",
    "score",
    "fit",
    "gof",
    "kolmogorov_sf",
    "ttt",
    "compare",
]

DEFAULT_BATTERY = ("GPGW", "EPGW", "PGW", "EW", "ENH", "NH", "EE", "W", "E")


class LikelihoodError(DomainError):
    pass


@dataclass(frozen=True)
class Dataset:
    """A complete sample of strictly positive lifetimes."""

    name: str
    values: np.ndarray

    def __post_init__(self):
        arr = np.array(self.values, dtype=float).ravel()
        bad = np.flatnonzero(~(np.isfinite(arr) & (arr > 0.0)))
        if bad.size:
            i = int(bad[0])
            raise DomainError(f"{self.name}: observation {i} ({arr[i]!r}) is not a positive finite number")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def n(self) -> int:
        return int(self.values.size)

    def __len__(self):
        return self.n


def _as_dataset(data) -> Dataset:
    return data if isinstance(data, Dataset) else Dataset("sample", data)


# ---------------------------------------------------------------------------
# likelihood
# ---------------------------------------------------------------------------

def log_likelihood(d: Distribution, data) -> float:
    """Sum of log densities; raises naming the first observation with a non-finite term."""
    data = _as_dataset(data)
    terms = np.atleast_1d(d.logpdf(data.values))
    bad = np.flatnonzero(~np.isfinite(terms))
    if bad.size:
        i = int(bad[0])
        raise LikelihoodError(f"log density of {d} is not finite at observation {i} "
                              f"(x={data.values[i]!r})")
    return math.fsum(terms)


def _loglik_grad(full: Mapping[str, float], exponentiated: bool, x, logx, need_grad=True):
    """Log-likelihood and its gradient w.r.t. (alpha, lambda, theta, b, beta)."""
    a, lam, th, b = full["alpha"], full["lambda"], full["theta"], full["b"]
    n = x.size
    log_z = math.log(lam) + a * logx
    log1pz = np.logaddexp(0.0, log_z)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        excess = np.expm1(th * log1pz)          # (1+z)^theta - 1
        power = excess + 1.0                     # (1+z)^theta
        # same rearrangement as core.log_pdf: stable for huge alpha, tiny theta
        ll = (n * (math.log(a) + math.log(th) + math.log(b)) - logx.sum()
              - np.logaddexp(0.0, -log_z).sum() + th * log1pz.sum() - b * excess.sum())
        if exponentiated:
            beta = full["beta"]
            cumhaz = b * excess
            log_cdf = np.where(cumhaz <= math.log(2.0),
                               np.log(-np.expm1(-np.minimum(cumhaz, math.log(2.0)))),
                               np.log1p(-np.exp(-np.maximum(cumhaz, math.log(2.0)))))
            ll += n * math.log(beta) + (beta - 1.0) * log_cdf.sum()
    if not need_grad:
        return ll, None
    if not math.isfinite(ll):
        return ll, np.full(5, np.nan)
    ratio = special.expit(log_z)                 # z / (1+z)
    co_ratio = special.expit(-log_z)             # 1 / (1+z)
    with np.errstate(over="ignore", invalid="ignore"):
        # 1 + (theta-1) z/(1+z) - theta b P z/(1+z), without cancellation
        common = co_ratio + th * ratio * (1.0 - b * power)
        g = np.array([
            n / a + (logx * common).sum(),
            common.sum() / lam,
            n / th + (log1pz * (1.0 - b * power)).sum(),
            n / b - excess.sum(),
            0.0,
        ])
        if exponentiated:
            # d log F = dH / expm1(H), H the base cumulative hazard
            w = (beta - 1.0) / np.expm1(cumhaz)
            bp = b * th * power * ratio
            g[0] += (w * bp * logx).sum()
            g[1] += (w * bp).sum() / lam
            g[2] += (w * b * power * log1pz).sum()
            g[3] += (w * excess).sum()
            g[4] = n / beta + log_cdf.sum()
    return ll, g


def score(p: GpgwParams, data) -> np.ndarray:
    """Analytic gradient of the GPGW log-likelihood, ordered (alpha, lambda, theta, b)."""
    data = _as_dataset(data)
    full = {"alpha": p.alpha, "lambda": p.lam, "theta": p.theta, "b": p.b}
    _, g = _loglik_grad(full, False, data.values, np.log(data.values))
    return g[:4]


class _Objective:
    """Negative log-likelihood over log-transformed free parameters."""

    _INDEX = {"alpha": 0, "lambda": 1, "theta": 2, "b": 3, "beta": 4}

    def __init__(self, spec: ModelSpec, data: Dataset):
        self.spec = spec
        self.x = data.values
        self.logx = np.log(self.x)
        self.idx = [self._INDEX[name] for name in spec.free_params]

    def full(self, z):
        params = dict(self.spec.fixed_params)
        params.update(zip(self.spec.free_params, np.exp(z)))
        return params

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        if not np.all(np.isfinite(z)) or np.any(np.abs(z) > 700.0):
            return math.inf
        ll, _ = _loglik_grad(self.full(z), self.spec.exponentiated, self.x, self.logx, False)
        return -ll if math.isfinite(ll) else math.inf

    def grad(self, z):
        z = np.asarray(z, dtype=float)
        _, g = _loglik_grad(self.full(z), self.spec.exponentiated, self.x, self.logx)
        # chain rule for the log transform
        return -g[self.idx] * np.exp(z)


# ---------------------------------------------------------------------------
# fitting
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FitConfig:
    """Multistart settings.

    Every free parameter starts at ``anchor * f`` for each ``f`` in
    ``start_factors`` (Cartesian product). The likelihood is also screened
    on a log grid spanning ``anchor * 10**k`` for ``|k| <= screen_decades``
    and the ``n_screened`` best grid points join the starts. A simplex
    search runs from each start and a BFGS polish with the analytic score
    follows. A fit counts
    as converged when the infinity norm of the log-scale gradient is at
    most ``gtol``.
    """

    start_factors: Sequence[float] = (0.5, 2.0)
    screen_decades: int = 4
    n_screened: int = 8
    gtol: float = 1e-4
    simplex: MinimizeConfig = MinimizeConfig(max_iter=3000, xatol=1e-9, fatol=1e-11)
    polish: MinimizeConfig = MinimizeConfig(gtol=1e-6, max_iter=3000)


@dataclass(frozen=True)
class FitResult:
    spec: ModelSpec
    estimates: Dict[str, float]
    std_errors: Dict[str, float]
    log_lik: float
    converged: bool
    n_starts_used: int
    gradient_norm: float
    std_errors_available: bool = True
    n: int = 0

    @property
    def kind(self) -> Kind:
        return self.spec.kind

    def distribution(self) -> Distribution:
        return make(self.spec.kind, self.estimates)


def _weibull_anchor(x: np.ndarray):
    """Method-of-moments Weibull shape and rate (``lam`` in ``exp(-lam x^alpha)``)."""
    mean = float(x.mean())
    cv2 = float(x.var(ddof=1)) / mean ** 2 if x.size > 1 else 1.0

    def gap(k):
        return math.exp(math.lgamma(1 + 2 / k) - 2 * math.lgamma(1 + 1 / k)) - 1.0 - cv2
    try:
        shape = optimize.brentq(gap, 0.05, 50.0)
    except ValueError:
        shape = 1.0
    return shape, (math.gamma(1 + 1 / shape) / mean) ** shape


def _anchors(spec: ModelSpec, x: np.ndarray) -> Dict[str, float]:
    alpha = spec.fixed_params.get("alpha")
    if alpha is None:
        alpha, lam = _weibull_anchor(x)
    else:
        lam = (math.gamma(1 + 1 / alpha) / float(x.mean())) ** alpha
    base = {"alpha": alpha, "lambda": lam, "theta": 1.0, "b": 1.0, "beta": 1.0}
    return {name: base[name] for name in spec.free_params}


def _starts(spec, anchors, factors):
    grids = [np.log(anchors[name]) + np.log(factors) for name in spec.free_params]
    mesh = np.meshgrid(*grids, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def _screen(obj: _Objective, anchors, decades, keep):
    if keep <= 0:
        return np.empty((0, len(anchors)))
    steps = np.arange(-decades, decades + 1) * math.log(10.0)
    grid = _starts(obj.spec, anchors, np.exp(steps))
    values = np.array([obj(z) for z in grid])
    order = np.argsort(values, kind="stable")
    order = order[np.isfinite(values[order])]
    return grid[order[:keep]]


def _local_fit(obj: _Objective, z0, config: FitConfig):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        coarse = minimize(obj, z0, None, config.simplex)
        best = coarse
        try:
            fine = minimize(obj, coarse.argmin, obj.grad, config.polish)
            if fine.fmin <= coarse.fmin:
                best = fine
        except DomainError:
            pass
    return best.argmin, best.fmin


def _std_errors(obj: _Objective, z):
    names = obj.spec.free_params
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            info = hessian_fd(obj, z)
        np.linalg.cholesky(info)  # positive definiteness check
        cov = np.linalg.inv(info)
    except (DomainError, np.linalg.LinAlgError):
        return {n: math.nan for n in names}, False
    var = np.diag(cov)
    if np.any(~np.isfinite(var)) or np.any(var <= 0.0):
        return {n: math.nan for n in names}, False
    # delta method: se(p) = p * se(log p)
    se = np.exp(z) * np.sqrt(var)
    return dict(zip(names, map(float, se))), True


def fit(kind, data, config: FitConfig = FitConfig(), *, start: Optional[Mapping[str, float]] = None) -> FitResult:
    """Maximum-likelihood fit of a catalog member to a complete sample.

    Parameters
    ----------
    kind : Kind, str or ModelSpec
        Model to fit.
    data : Dataset or array_like
        Positive observations.
    config : FitConfig
        Multistart and optimizer settings.
    start : mapping, optional
        Use this single starting point instead of the multistart grid.

    Returns
    -------
    FitResult
        The best converged optimum over all starts (or the best point found,
        flagged ``converged=False``, when no start converged). Standard
        errors come from the inverse observed information on the log scale,
        mapped back by the delta method; they are NaN and flagged when the
        information matrix is not positive definite.
    """
    spec = spec_for(kind)
    data = _as_dataset(data)
    if data.n < spec.n_free + 1:
        raise DomainError(f"{spec.kind.value} needs at least {spec.n_free + 1} observations, got {data.n}")
    obj = _Objective(spec, data)
    if start is not None:
        d0 = make(spec.kind, start)
        starts = np.log([[d0.values[n] for n in spec.free_params]])
    else:
        anchors = _anchors(spec, data.values)
        starts = np.vstack([
            _starts(spec, anchors, np.asarray(config.start_factors, dtype=float)),
            _screen(obj, anchors, config.screen_decades, config.n_screened),
        ])

    candidates = []
    for z0 in starts:
        if not math.isfinite(obj(z0)):
            continue
        z, fval = _local_fit(obj, z0, config)
        gnorm = float(np.max(np.abs(obj.grad(z))))
        if not math.isfinite(gnorm):
            gnorm = math.inf
        candidates.append((fval, gnorm, z))
    if not candidates:
        raise LikelihoodError(f"{spec.kind.value}: likelihood is not finite at any starting point")

    converged = [c for c in candidates if c[1] <= config.gtol]
    pool = converged or candidates
    fval, gnorm, z = min(pool, key=lambda c: (c[0], c[1]))
    se, se_ok = _std_errors(obj, z)
    estimates = dict(zip(spec.free_params, map(float, np.exp(z))))
    return FitResult(spec=spec, estimates=estimates, std_errors=se, log_lik=-float(fval),
                     converged=bool(converged), n_starts_used=len(starts), gradient_norm=gnorm,
                     std_errors_available=se_ok, n=data.n)


# ---------------------------------------------------------------------------
# goodness of fit
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GofReport:
    ks: float
    ks_pvalue: float
    w_star: float
    a_star: float
    neg_log_lik: float
    aic: float
    caic: float
    k: int
    n: int


def kolmogorov_sf(t: float, tol: float = 1e-10) -> float:
    """Asymptotic Kolmogorov tail ``P(sqrt(n) D > t)``."""
    if t <= 0.0:
        return 1.0
    if t < 1.0:
        # Jacobi-transformed series converges fast for small t
        c = math.pi ** 2 / (8.0 * t * t)
        total = 0.0
        j = 1
        while True:
            term = math.exp(-(2 * j - 1) ** 2 * c)
            total += term
            if term < tol:
                break
            j += 1
        return min(1.0, max(0.0, 1.0 - math.sqrt(2.0 * math.pi) / t * total))
    total = 0.0
    j = 1
    while True:
        term = math.exp(-2.0 * j * j * t * t)
        total += term if j % 2 else -term
        if term < tol:
            break
        j += 1
    return min(1.0, max(0.0, 2.0 * total))


_CLAMP = 1e-15


def _edf_statistics(z):
    z = np.sort(z)
    n = z.size
    i = np.arange(1, n + 1)
    w2 = float(np.sum((z - (2 * i - 1) / (2.0 * n)) ** 2) + 1.0 / (12.0 * n))
    a2 = float(-n - np.mean((2 * i - 1) * (np.log(z) + np.log1p(-z[::-1]))))
    return w2, a2


def gof(d: Distribution, data, fitted_log_lik: Optional[float] = None, *,
        transform: str = "normal") -> GofReport:
    """Goodness-of-fit battery for a fitted distribution.

    ``transform="normal"`` computes W* and A* after the Chen-Balakrishnan
    normal transformation (probability integral transform, normal scores,
    standardization with the sample mean and standard deviation), which
    is the usual convention for estimated parameters. ``transform="none"``
    applies the same small-sample modifiers to the raw probability integral
    transform.
    """
    data = _as_dataset(data)
    if transform not in ("normal", "none"):
        raise ValueError(f"transform must be 'normal' or 'none', got {transform!r}")
    n = data.n
    k = d.spec.n_free
    z = np.asarray(d.cdf(np.sort(data.values)), dtype=float)
    if np.any(np.isnan(z)):
        raise DomainError(f"cdf of {d} is undefined at some observation")
    z = np.clip(z, _CLAMP, 1.0 - _CLAMP)

    i = np.arange(1, n + 1)
    ks = float(max(np.max(i / n - z), np.max(z - (i - 1) / n)))
    if transform == "normal":
        y = special.ndtri(z)
        sd = float(np.std(y, ddof=1))
        u = special.ndtr((y - y.mean()) / sd) if sd > 0 else z
        u = np.clip(u, _CLAMP, 1.0 - _CLAMP)
    else:
        u = z
    w2, a2 = _edf_statistics(u)

    ll = log_likelihood(d, data) if fitted_log_lik is None else float(fitted_log_lik)
    aic = 2.0 * k - 2.0 * ll
    return GofReport(
        ks=ks,
        ks_pvalue=kolmogorov_sf(math.sqrt(n) * ks),
        w_star=w2 * (1.0 + 0.5 / n),
        a_star=a2 * (1.0 + 0.75 / n + 2.25 / n ** 2),
        neg_log_lik=-ll,
        aic=aic,
        caic=aic + 2.0 * k * (k + 1) / (n - k - 1),
        k=k,
        n=n,
    )


# ---------------------------------------------------------------------------
# total time on test
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TttCurve:
    r_over_n: np.ndarray
    g: np.ndarray

    @property
    def points(self) -> np.ndarray:
        return np.column_stack([self.r_over_n, self.g])


def ttt(data) -> TttCurve:
    """Scaled total time on test ``(sum_{i<=r} x_(i) + (n-r) x_(r)) / sum x``."""
    data = _as_dataset(data)
    if data.n < 2:
        raise DomainError("the TTT transform needs at least two observations")
    x = np.sort(data.values)
    n = x.size
    r = np.arange(1, n + 1)
    g = (np.cumsum(x) + (n - r) * x) / x.sum()
    g[-1] = 1.0
    return TttCurve(r / n, g)


# ---------------------------------------------------------------------------
# comparison
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Comparison:
    kind: Kind
    fit: Optional[FitResult] = None
    gof: Optional[GofReport] = None
    error: Optional[str] = None


def _fit_and_score(kind, data, config):
    try:
        res = fit(kind, data, config)
        report = gof(res.distribution(), data, res.log_lik)
        return Comparison(res.kind, res, report)
    except (DomainError, ArithmeticError, np.linalg.LinAlgError) as exc:
        return Comparison(spec_for(kind).kind, error=str(exc))


def compare(kinds: Iterable = DEFAULT_BATTERY, data=None, config: FitConfig = FitConfig(),
            *, max_workers: Optional[int] = None) -> List[Comparison]:
    """Fit every model and rank by AIC (ties: KS, then name); failures go last."""
    data = _as_dataset(data)
    kinds = [spec_for(k).kind for k in kinds]
    if not kinds:
        raise FamilyError("at least one model is required")
    if max_workers and max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            rows = list(pool.map(lambda k: _fit_and_score(k, data, config), kinds))
    else:
        rows = [_fit_and_score(k, data, config) for k in kinds]
    ok = sorted((r for r in rows if r.gof is not None),
                key=lambda r: (r.gof.aic, r.gof.ks, r.kind.value))
    failed = sorted((r for r in rows if r.gof is None), key=lambda r: r.kind.value)
    return ok + failed
