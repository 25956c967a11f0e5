"""Spectral averaging for one-dimensional Jacobi operators.

Transfer matrices, Green's functions, Prüfer phases and the Carmona density
estimator for finite and truncated half-line Jacobi matrices, together with
one-parameter spectral averaging and a Monte-Carlo check of the Wegner
estimate for a random local perturbation of the free Laplacian.
"""
from .core import *  # noqa: F401,F403
from .estimates import DensityEstimate  # noqa: F401
from .green import *  # noqa: F401,F403
from .pruefer import *  # noqa: F401,F403
from .averaging import *  # noqa: F401,F403
from .wegner import *  # noqa: F401,F403
from .checks import identity_battery  # noqa: F401

__version__ = "0.1.0"
