"""Built-in samples: device failure times (n=50) and leukaemia survival weeks (n=33)."""
from __future__ import annotations

from .inference import Dataset

__all__ = ["DEVICE_FAILURES", "LEUKAEMIA_SURVIVAL", "BUILTINS", "builtin"]

# failure times of 50 devices put on life test (bathtub-shaped hazard)
DEVICE_FAILURES = Dataset("builtin-I", [
    0.1, 0.2, 1.0, 1.0, 1.0, 1.0, 1.0, 2.0, 3.0, 6.0, 7.0, 11.0, 12.0, 18.0, 18.0, 18.0, 18.0,
    18.0, 21.0, 32.0, 36.0, 40.0, 45.0, 45.0, 47.0, 50.0, 55.0, 60.0, 63.0, 63.0, 67.0, 67.0,
    67.0, 67.0, 72.0, 75.0, 79.0, 82.0, 82.0, 83.0, 84.0, 84.0, 84.0, 85.0, 85.0, 85.0, 85.0,
    85.0, 86.0, 86.0,
])

# survival in weeks of 33 acute myelogenous leukaemia patients
LEUKAEMIA_SURVIVAL = Dataset("builtin-II", [
    65, 156, 100, 134, 16, 108, 121, 4, 39, 143, 56, 26, 22, 1, 1, 5, 65, 56, 65, 17, 7, 16,
    22, 3, 4, 2, 3, 8, 4, 3, 30, 4, 43,
])

BUILTINS = {
    "builtin-I": DEVICE_FAILURES,
    "builtin-II": LEUKAEMIA_SURVIVAL,
}


def builtin(name: str) -> Dataset:
    try:
        return BUILTINS[name]
    except KeyError:
        raise KeyError(f"unknown built-in dataset {name!r}; choose from {', '.join(BUILTINS)}") from None
