from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np


def is_real(mu, rel: float = 1e-6) -> np.ndarray:
    mu = np.asarray(mu)
    return np.abs(mu.imag) <= rel * np.maximum(1.0, np.abs(mu))


def order_by(values: np.ndarray, which: str) -> np.ndarray:
    """Stable ordering: by key, then positive imaginary part first."""
    values = np.asarray(values, dtype=complex)
    if which == "LM":
        key = -np.abs(values)
    elif which == "LR":
        key = -values.real
    elif which == "SR":
        key = values.real
    else:
        raise ValueError(f"unknown ordering {which!r}")
    # round the key so conjugate partners compare equal and tie-break on imag
    key = np.round(key, 12)
    return np.lexsort((-values.imag, key))


@dataclass
class EigenResult:
    """Eigenpairs sorted by the solver's selection rule (modulus by default).

    ``vectors[:, i]`` belongs to ``values[i]``; ``residuals[i]`` is
    ``||Op v - mu v|| / ||v||``.  ``transposed`` marks eigenvectors of the
    transposed operator, i.e. left eigenvectors of ``kind``.
    """

    values: np.ndarray
    vectors: Optional[np.ndarray] = None
    residuals: Optional[np.ndarray] = None
    converged: Optional[np.ndarray] = None
    iterations: int = 0
    matvecs: int = 0
    kind: str = "matrix"
    transposed: bool = False
    which: str = "LM"
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.values)

    @property
    def all_converged(self) -> bool:
        return self.converged is None or bool(np.all(self.converged))
