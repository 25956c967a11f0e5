"""Container for estimated spectral densities."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["DensityEstimate"]


@dataclass(eq=False)
class DensityEstimate:
    """Density values on an energy grid.

    ``stderr`` is zero for deterministic estimators.  ``meta`` carries method
    specific diagnostics (truncation monitors, certified flags, window
    integrals) and is what ends up in experiment sidecars.
    """

    energies: np.ndarray
    values: np.ndarray
    stderr: np.ndarray
    method: str
    samples: int = 0
    truncation: int | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.energies = np.atleast_1d(np.asarray(self.energies, dtype=float))
        self.values = np.atleast_1d(np.asarray(self.values, dtype=float))
        self.stderr = np.broadcast_to(
            np.asarray(self.stderr, dtype=float), self.values.shape).copy()
        if self.energies.shape != self.values.shape:
            raise ValueError("energies and values must have the same shape")
        if self.energies.size > 1 and np.any(np.diff(self.energies) <= 0):
            raise ValueError("energy grid must be strictly increasing")
        if np.any(self.values < 0) or np.any(self.stderr < 0):
            raise ValueError("densities and standard errors must be non-negative")

    def __len__(self):
        return self.values.size

    def rows(self):
        """Iterate ``(energy, value, stderr, method)`` tuples."""
        for e, v, s in zip(self.energies, self.values, self.stderr):
            yield float(e), float(v), float(s), self.method
