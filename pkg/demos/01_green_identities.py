"""Green's functions of a small Jacobi matrix from its transfer matrix.

Builds a random 6-site matrix, compares resolvent entries obtained from a
linear solve with those read off the transfer matrix, and shows the
beta-averaged density next to the eigenvalues of the Dirichlet block.
"""
import numpy as np

from jacobi_averaging import (
    JacobiSpec,
    beta_average_quadrature,
    beta_averaged_density,
    beta_averaged_green,
    eigenvalues,
    green_direct,
    green_from_transfer,
)

rng = np.random.default_rng(1)
spec = JacobiSpec(rng.uniform(-1, 1, 6), rng.uniform(0.6, 1.5, 5))
z = 0.25 + 0.1j

# corner entries of the resolvent, two ways
g1N, g11, gNN = green_from_transfer(spec, z)
print("G(1,N)", g1N, green_direct(spec, z, 1, 6))
print("G(1,1)", g11, green_direct(spec, z, 1, 1))
print("G(N,N)", gNN, green_direct(spec, z, 6, 6))

# averaging the right boundary angle over [0, pi]
closed = beta_averaged_green(spec, z)
numeric = beta_average_quadrature(spec, z)
print("beta-averaged G(1,1): closed form", closed, "quadrature", numeric)

# the averaged measure is absolutely continuous; its density peaks near the
# Dirichlet eigenvalues but stays finite everywhere
E = np.linspace(-3, 3, 13)
for e, rho in zip(E, beta_averaged_density(spec, E)):
    print(f"{e:+.2f}  {rho:.4f}")
print("Dirichlet eigenvalues", np.round(eigenvalues(spec), 3))
