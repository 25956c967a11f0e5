"""Randomized residual battery for the transfer-matrix identities."""
from __future__ import annotations

from dataclasses import dataclass

import mpmath
import numpy as np

from .core import JacobiSpec, solve_schrodinger, transfer_entries
from .green import (
    beta_average_quadrature,
    beta_averaged_green,
    green_boundary,
    green_direct,
    green_from_transfer,
)
from .pruefer import alpha_average_inverse_R2, phase_derivative

__all__ = ["CheckResult", "random_spec", "fd_phase_derivative", "identity_battery"]


@dataclass(frozen=True)
class CheckResult:
    name: str
    max_residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.max_residual <= self.tolerance)


def random_spec(rng, n_max=12, t_range=(0.5, 2.0), v_range=(-2.0, 2.0)) -> JacobiSpec:
    n = int(rng.integers(1, n_max + 1))
    return JacobiSpec(rng.uniform(*v_range, n), rng.uniform(*t_range, n - 1))


def _rel(x, y):
    return abs(x - y) / max(abs(y), 1e-300)


def fd_phase_derivative(spec: JacobiSpec, E, wrt="energy", alpha=None, h=1e-6, dps=40):
    """Central difference of ``theta_N`` with step ``h``, evaluated in extended precision.

    The two phases differ by less than ``pi``, so their difference is the
    angle between the final solution pairs.  Working at ``dps`` digits keeps
    rounding far below the truncation error even when the derivative is tiny.
    """
    alpha = spec.alpha if alpha is None else float(alpha)
    t, v = spec.coefficients(spec.size)
    with mpmath.workdps(dps):
        def final(e, shift):
            x, y = mpmath.cos(mpmath.mpf(alpha)), mpmath.sin(mpmath.mpf(alpha))
            for j in range(spec.size):
                tj = mpmath.mpf(float(t[j]))
                vj = mpmath.mpf(float(v[j])) + (shift if wrt != "energy" and j == wrt - 1 else 0)
                x, y = (e - vj) / tj * x - tj * y, x / tj
            return x, y

        E, h = mpmath.mpf(E), mpmath.mpf(h)
        if wrt == "energy":
            (x0, y0), (x1, y1) = final(E - h, 0), final(E + h, 0)
        else:
            (x0, y0), (x1, y1) = final(E, -h), final(E, h)
        return float(mpmath.atan2(x0 * y1 - y0 * x1, x0 * x1 + y0 * y1) / (2 * h))


def identity_battery(seed=0, cases=100, energies_per_case=10):
    """Maximum residuals of the identities over random specs and energies."""
    rng = np.random.default_rng(seed)
    worst = dict.fromkeys(["wronskian", "green_transfer", "green_boundary",
                           "beta_average", "alpha_average", "phase_derivative"], 0.0)
    for _ in range(cases):
        spec = random_spec(rng)
        N = spec.size
        for _ in range(energies_per_case):
            z = complex(rng.uniform(-3, 3), rng.uniform(0.1, 1.0))
            a, _, c, _ = (complex(x) for x in transfer_entries(spec, z))
            phi = solve_schrodinger(spec, z, alpha=0.0).phi
            lhs = a * np.conj(c) - np.conj(a) * c
            rhs = (z - np.conj(z)) * np.sum(np.abs(phi[1:N + 1]) ** 2)
            worst["wronskian"] = max(worst["wronskian"], _rel(lhs, rhs))
            g = green_from_transfer(spec, z)
            ref = (green_direct(spec, z, 1, N), green_direct(spec, z, 1, 1),
                   green_direct(spec, z, N, N))
            worst["green_transfer"] = max(worst["green_transfer"],
                                          *(_rel(x, y) for x, y in zip(g, ref)))
        al, be = rng.uniform(-1.2, 1.2), rng.uniform(0.3, np.pi - 0.3)
        bspec = spec.with_boundary(al, be)
        z = complex(rng.uniform(-3, 3), rng.uniform(0.1, 1.0))
        worst["green_boundary"] = max(worst["green_boundary"],
                                      _rel(green_boundary(bspec, z), green_direct(bspec, z)))
        worst["beta_average"] = max(worst["beta_average"],
                                    abs(beta_averaged_green(spec, z, al)
                                        - beta_average_quadrature(spec, z, al)))
        E = rng.uniform(-3, 3)
        worst["alpha_average"] = max(worst["alpha_average"],
                                     abs(alpha_average_inverse_R2(spec, E) - 1.0))
        al = rng.uniform(-1.2, 1.2)
        site = int(rng.integers(1, N + 1))
        for wrt in ("energy", site):
            exact = phase_derivative(spec, E, N, wrt, alpha=al)
            fd = fd_phase_derivative(spec, E, wrt, alpha=al)
            worst["phase_derivative"] = max(worst["phase_derivative"],
                                            abs(exact - fd) / max(abs(exact), 1e-12))
    tol = {"wronskian": 1e-10, "green_transfer": 1e-10, "green_boundary": 1e-10,
           "beta_average": 1e-8, "alpha_average": 1e-8, "phase_derivative": 1e-6}
    return [CheckResult(k, float(v), tol[k]) for k, v in worst.items()]
