"""Finite-volume Green's functions and their transfer-matrix expressions."""
from __future__ import annotations

import numpy as np
from scipy import integrate
from scipy.linalg import solve_banded

from .core import (
    POLE_GUARD,
    JacobiError,
    JacobiSpec,
    SingularEnergyError,
    _boundary_diagonal,
    _check_poles,
    eigenvalues,
    transfer_entries,
)

__all__ = [
    "DegenerateBoundaryError",
    "green_direct",
    "green_from_transfer",
    "green_boundary",
    "beta_averaged_green",
    "beta_averaged_density",
    "beta_average_quadrature",
]


class DegenerateBoundaryError(JacobiError):
    """Vanishing denominator in a transfer-matrix Green's function formula."""


def _conj_symmetric(func):
    # G(conj z) = conj G(z) for a real symmetric matrix
    def wrapper(spec, z, *args, **kwargs):
        z = complex(z)
        if z.imag < 0:
            return np.conj(func(spec, z.conjugate(), *args, **kwargs))
        return func(spec, z, *args, **kwargs)

    wrapper.__name__ = func.__name__
    wrapper.__doc__ = func.__doc__
    return wrapper


@_conj_symmetric
def green_direct(spec: JacobiSpec, z, n=1, m=1):
    """Resolvent entry ``<n|(H - z)^{-1}|m>`` from a banded linear solve.

    ``H`` includes the boundary angles of ``spec``.  Sites are 1-based.
    """
    N = spec.size
    if not (1 <= n <= N and 1 <= m <= N):
        raise JacobiError(f"sites ({n}, {m}) outside 1..{N}")
    diag = _boundary_diagonal(spec)
    if z.imag == 0:
        ev = eigenvalues(spec)
        scale = max(1.0, np.max(np.abs(ev)))
        if np.min(np.abs(ev - z.real)) <= 1e-12 * scale:
            raise SingularEnergyError(f"z={z!r} is an eigenvalue of the finite matrix")
    ab = np.zeros((3, N), dtype=complex)
    ab[0, 1:] = spec.hoppings
    ab[1] = diag - z
    ab[2, :-1] = spec.hoppings
    rhs = np.zeros(N, dtype=complex)
    rhs[m - 1] = 1.0
    return complex(solve_banded((1, 1), ab, rhs)[n - 1])


def _require_dirichlet(spec, tol=1e-14):
    if abs(spec.alpha) > tol or abs(spec.beta - np.pi / 2) > tol:
        raise JacobiError("identity needs Dirichlet boundary conditions (alpha=0, beta=pi/2)")


@_conj_symmetric
def green_from_transfer(spec: JacobiSpec, z):
    """``(G(z,1,N), G(z,1,1), G(z,N,N))`` from the entries of ``T(N, 0)``.

    Uses ``1/a = -G(1,N)``, ``b/a = G(1,1)`` and ``c/a = -G(N,N)``.
    """
    _require_dirichlet(spec)
    a, b, c, _ = (complex(x) for x in transfer_entries(spec, z))
    if abs(a) < 1e-300:
        raise DegenerateBoundaryError("upper-left transfer entry vanishes")
    return -1.0 / a, b / a, -c / a


@_conj_symmetric
def green_boundary(spec: JacobiSpec, z, guard=POLE_GUARD):
    """``G_{alpha,beta}(z,1,1)`` from the Dirichlet transfer matrix.

    ``(b - d cot(beta)) / (a + b tan(alpha) - c cot(beta) - d tan(alpha) cot(beta))``.
    """
    _check_poles(spec.alpha, spec.beta, guard)
    a, b, c, d = (complex(x) for x in transfer_entries(spec, z))
    ta, cb = np.tan(spec.alpha), 1.0 / np.tan(spec.beta)
    den = a + b * ta - c * cb - d * ta * cb
    if den == 0:
        raise DegenerateBoundaryError("boundary formula has a vanishing denominator")
    return (b - d * cb) / den


@_conj_symmetric
def beta_averaged_green(spec: JacobiSpec, z, alpha=None, guard=POLE_GUARD):
    """Closed form of ``(1/pi) int_0^pi G_{alpha,beta}(z) dbeta`` for ``Im z > 0``."""
    alpha = spec.alpha if alpha is None else float(alpha)
    _check_poles(alpha, np.pi / 2, guard)
    a, b, c, d = (complex(x) for x in transfer_entries(spec, z))
    ta = np.tan(alpha)
    return (b + 1j * d) / ((a + b * ta) + 1j * (c + d * ta))


def beta_averaged_density(spec: JacobiSpec, energies, alpha=None, guard=POLE_GUARD):
    """Density of the beta-averaged spectral measure at real energies.

    ``1 / (pi (|a + b tan(alpha)|^2 + |c + d tan(alpha)|^2))``.  The factor
    ``1/pi`` turns the boundary value of ``Im G`` into a probability density.
    """
    alpha = spec.alpha if alpha is None else float(alpha)
    _check_poles(alpha, np.pi / 2, guard)
    a, b, c, d = transfer_entries(spec, np.asarray(energies, dtype=float))
    ta = np.tan(alpha)
    return 1.0 / (np.pi * ((a + b * ta) ** 2 + (c + d * ta) ** 2))


def beta_average_quadrature(spec: JacobiSpec, z, alpha=None, tol=1e-12):
    """Adaptive quadrature of ``(1/pi) int_0^pi G_{alpha,beta}(z) dbeta``.

    Integrates the boundary formula multiplied through by ``sin(beta)`` so the
    endpoints carry no pole; interval split at ``pi/2``.
    """
    alpha = spec.alpha if alpha is None else float(alpha)
    z = complex(z)
    a, b, c, d = (complex(x) for x in transfer_entries(spec, z))
    ta = np.tan(alpha)

    def g(beta):
        s, co = np.sin(beta), np.cos(beta)
        return (b * s - d * co) / ((a + b * ta) * s - (c + d * ta) * co)

    total = 0j
    for lo, hi in ((0.0, np.pi / 2), (np.pi / 2, np.pi)):
        re, _ = integrate.quad(lambda x: g(x).real, lo, hi, epsabs=tol, epsrel=tol, limit=400)
        im, _ = integrate.quad(lambda x: g(x).imag, lo, hi, epsabs=tol, epsrel=tol, limit=400)
        total += re + 1j * im
    return total / np.pi
