"""
Catalog of GPGW sub-models and their exponentiated (cdf to the power beta)
counterparts used as competitors when fitting lifetime data.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping, Optional, Tuple

import numpy as np

from . import core
from .core import GpgwParams
from .numerics import DomainError

__all__ = ["Kind", "ModelSpec", "Distribution", "CATALOG", "FamilyError", "make", "param_count",
           "spec_for", "PARAM_NAMES"]

# canonical parameter order everywhere in the package
PARAM_NAMES = ("alpha", "lambda", "theta", "b", "beta")


class FamilyError(DomainError):
    """Bad model name or parameter map."""


class Kind(str, enum.Enum):
    GPGW = "GPGW"
    PGW = "PGW"
    NH = "NH"
    GNH = "GNH"
    W = "W"
    R = "R"
    E = "E"
    EPGW = "EPGW"
    EW = "EW"
    ENH = "ENH"
    EE = "EE"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class ModelSpec:
    kind: Kind
    free_params: Tuple[str, ...]
    fixed_params: Mapping[str, float] = field(default_factory=dict)
    exponentiated: bool = False

    def __post_init__(self):
        object.__setattr__(self, "fixed_params", MappingProxyType(dict(self.fixed_params)))
        required = set(PARAM_NAMES[:4]) | ({"beta"} if self.exponentiated else set())
        covered = set(self.free_params) | set(self.fixed_params)
        if covered != required or set(self.free_params) & set(self.fixed_params):
            raise FamilyError(f"{self.kind}: free/fixed parameters do not partition {sorted(required)}")

    @property
    def n_free(self) -> int:
        return len(self.free_params)


def _spec(kind, fixed, exponentiated=False):
    names = PARAM_NAMES if exponentiated else PARAM_NAMES[:4]
    free = tuple(n for n in names if n not in fixed)
    return ModelSpec(kind, free, fixed, exponentiated)


CATALOG: Mapping[Kind, ModelSpec] = MappingProxyType({
    Kind.GPGW: _spec(Kind.GPGW, {}),
    Kind.PGW: _spec(Kind.PGW, {"b": 1.0}),
    Kind.NH: _spec(Kind.NH, {"alpha": 1.0, "b": 1.0}),
    Kind.GNH: _spec(Kind.GNH, {"alpha": 1.0}),
    Kind.W: _spec(Kind.W, {"theta": 1.0, "b": 1.0}),
    Kind.R: _spec(Kind.R, {"alpha": 2.0, "theta": 1.0, "b": 1.0}),
    Kind.E: _spec(Kind.E, {"alpha": 1.0, "theta": 1.0, "b": 1.0}),
    Kind.EPGW: _spec(Kind.EPGW, {"b": 1.0}, exponentiated=True),
    Kind.EW: _spec(Kind.EW, {"theta": 1.0, "b": 1.0}, exponentiated=True),
    Kind.ENH: _spec(Kind.ENH, {"alpha": 1.0, "b": 1.0}, exponentiated=True),
    Kind.EE: _spec(Kind.EE, {"alpha": 1.0, "theta": 1.0, "b": 1.0}, exponentiated=True),
})


def spec_for(kind) -> ModelSpec:
    """Look up a catalog entry by :class:`Kind` or by its (case-insensitive) name."""
    if isinstance(kind, ModelSpec):
        return kind
    try:
        return CATALOG[Kind(str(kind).upper())]
    except ValueError:
        valid = ", ".join(k.value for k in Kind)
        raise FamilyError(f"unknown model {kind!r}; valid models: {valid}") from None


@dataclass(frozen=True)
class Distribution:
    """A catalog member with concrete values for its free parameters."""

    spec: ModelSpec
    values: Mapping[str, float]

    def __post_init__(self):
        object.__setattr__(self, "values", MappingProxyType(dict(self.values)))

    @property
    def kind(self) -> Kind:
        return self.spec.kind

    @property
    def base(self) -> GpgwParams:
        full = {**self.spec.fixed_params, **self.values}
        return GpgwParams(full["alpha"], full["lambda"], full["theta"], full["b"])

    @property
    def beta(self) -> Optional[float]:
        return self.values["beta"] if self.spec.exponentiated else None

    # -- distribution functions -------------------------------------------

    def logpdf(self, x):
        lp = core.log_pdf(self.base, x)
        if not self.spec.exponentiated:
            return lp
        beta = self.beta
        return math.log(beta) + lp + (beta - 1.0) * np.asarray(core.log_cdf(self.base, x))

    def pdf(self, x):
        if not self.spec.exponentiated:
            return core.pdf(self.base, x)
        x = np.asarray(x, dtype=float)
        out = np.zeros(np.shape(x))
        pos = x > 0.0
        if np.any(pos):
            out[pos] = np.exp(self.logpdf(x[pos]))
        return float(out) if out.ndim == 0 else out

    def log_cdf(self, x):
        lc = core.log_cdf(self.base, x)
        return lc if not self.spec.exponentiated else self.beta * np.asarray(lc)

    def cdf(self, x):
        if not self.spec.exponentiated:
            return core.cdf(self.base, x)
        out = np.exp(self.log_cdf(x))
        return float(out) if np.ndim(out) == 0 else out

    def sf(self, x):
        if not self.spec.exponentiated:
            return core.survival(self.base, x)
        out = -np.expm1(self.log_cdf(x))
        return float(out) if np.ndim(out) == 0 else out

    def quantile(self, q):
        if not self.spec.exponentiated:
            return core.quantile(self.base, q)
        q = np.asarray(q, dtype=float)
        if np.any((q < 0.0) | (q >= 1.0)):
            raise DomainError("quantile level must lie in [0, 1)")
        return core.quantile(self.base, q ** (1.0 / self.beta))

    def hazard(self, x):
        if not self.spec.exponentiated:
            return core.hazard(self.base, x)
        x = np.asarray(x, dtype=float)
        out = np.exp(np.asarray(self.logpdf(x)) - np.log(np.asarray(self.sf(x))))
        return float(out) if out.ndim == 0 else out

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        u = rng.random(n)
        u[u == 0.0] = np.nextafter(0.0, 1.0)
        return np.atleast_1d(self.quantile(u))

    def __str__(self):
        inner = ", ".join(f"{k}={v:g}" for k, v in self.values.items())
        return f"{self.kind.value}({inner})"


def make(kind, params: Mapping[str, float]) -> Distribution:
    """Build a catalog member from exactly its free parameters.

    ``lam`` is accepted as an alias for ``lambda``.
    """
    spec = spec_for(kind)
    given = {("lambda" if k == "lam" else k): v for k, v in params.items()}
    missing = [n for n in spec.free_params if n not in given]
    extra = [n for n in given if n not in spec.free_params]
    if missing:
        raise FamilyError(f"{spec.kind.value}: missing parameter(s) {', '.join(missing)}")
    if extra:
        raise FamilyError(f"{spec.kind.value}: unexpected parameter(s) {', '.join(extra)}; "
                          f"free parameters are {', '.join(spec.free_params)}")
    values = {}
    for name in spec.free_params:
        try:
            v = float(given[name])
        except (TypeError, ValueError):
            raise FamilyError(f"{spec.kind.value}: {name} must be a number, got {given[name]!r}") from None
        if not (math.isfinite(v) and v > 0.0):
            raise FamilyError(f"{spec.kind.value}: {name} must be positive and finite, got {v!r}")
        values[name] = v
    return Distribution(spec, values)


def param_count(d) -> int:
    """Number of free parameters of a distribution, spec or model name."""
    if isinstance(d, Distribution):
        return d.spec.n_free
    return spec_for(d).n_free
