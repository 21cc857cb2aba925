"""
Generalized power generalized Weibull (GPGW) lifetime distribution.

Distribution functions, sampling and hazard shapes live in :mod:`gpgw.core`;
sub-models and exponentiated competitors in :mod:`gpgw.family`; moments and
related integrals in :mod:`gpgw.analytics`; maximum likelihood, goodness of
fit and model comparison in :mod:`gpgw.inference`.
"""
from .core import GpgwParams, HazardShape, Shape
from .datasets import BUILTINS, DEVICE_FAILURES, LEUKAEMIA_SURVIVAL
from .family import CATALOG, Distribution, Kind, ModelSpec, make, param_count
from .inference import (DEFAULT_BATTERY, Dataset, FitConfig, FitResult, GofReport, compare, fit, gof,
                        log_likelihood, ttt)
from .numerics import ConvergenceError, DomainError

__version__ = "0.1.0"

__all__ = [
    "GpgwParams", "HazardShape", "Shape",
    "BUILTINS", "DEVICE_FAILURES", "LEUKAEMIA_SURVIVAL",
    "CATALOG", "Distribution", "Kind", "ModelSpec", "make", "param_count",
    "DEFAULT_BATTERY", "Dataset", "FitConfig", "FitResult", "GofReport", "compare", "fit", "gof",
    "log_likelihood", "ttt",
    "ConvergenceError", "DomainError",
]
