"""Carmona's estimator on the free Laplacian.

The half-line free Laplacian has spectral density sqrt(4 - E^2) / (2 pi) at
the first site.  Pointwise the estimator cos^2(alpha)/(pi R_N^2) keeps
oscillating as N grows, but its integrals over energy windows converge.
"""
import numpy as np

from jacobi_averaging import JacobiSpec, carmona_density, carmona_window_integrals

spec = JacobiSpec.free(1)

print("pointwise values at E = 0.5 for growing N")
for N in (28, 56, 112, 224):
    print(N, carmona_density(spec, [0.5], N, monitor=False).values[0])
print("exact", np.sqrt(4 - 0.25) / (2 * np.pi))

centers = np.linspace(-1.5, 1.5, 7)
windows = np.stack([centers - 0.1, centers + 0.1], axis=1)
exact = np.sqrt(4 - centers**2) / (2 * np.pi) * 0.2
for N in (250, 1000, 2000):
    got = carmona_window_integrals(spec, windows, N)
    print(f"N={N:5d} max window error {np.max(np.abs(got - exact)):.2e}")
