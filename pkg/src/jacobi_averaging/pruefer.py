"""Prüfer phases and radii, their E-modified version, and Carmona's estimator."""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import integrate

from .core import JacobiError, JacobiSpec, solve_schrodinger, transfer_entries
from .estimates import DensityEstimate

__all__ = [
    "PrecisionWarning",
    "PrueferState",
    "PrueferFlow",
    "ModifiedMap",
    "ModifiedPrueferState",
    "ModifiedPrueferFlow",
    "propagate",
    "pruefer_flow",
    "pruefer_phase",
    "sturm_count",
    "alpha_average_inverse_R2",
    "phase_derivative",
    "modified_map",
    "modified_pruefer_flow",
    "carmona_density",
    "carmona_window_integrals",
]


class PrecisionWarning(UserWarning):
    """A quadrature or flow result may have lost accuracy."""


def propagate(t, v, energies, alpha=0.0, keep=False, phase=True):
    """Lift the Prüfer phase through the single-site maps.

    Parameters
    ----------
    t, v : ndarray, shape (L,) or (L, ...)
        Hoppings ``t_1..t_L`` and potentials ``v_1..v_L``; trailing axes
        broadcast against ``energies``.
    energies : float or ndarray
        Real energies.
    alpha : float or ndarray
        Seed angle, ``theta_0``.
    keep : bool
        Return every site instead of only the last one.
    phase : bool
        Track the phase; when false only the radius is propagated and the
        returned phase is ``None``.

    Returns
    -------
    theta, log_radius : ndarray
        Shape ``(L + 1, *batch)`` when ``keep`` else ``batch``.

    Each step increment is taken in the window ``(-pi/2, 3pi/2)``, which
    makes the lift continuous in every parameter.  The radius is
    renormalised after every site so long chains off the spectrum do not
    overflow.
    """
    t = np.asarray(t, dtype=float)
    v = np.asarray(v, dtype=float)
    E = np.asarray(energies, dtype=float)
    L = t.shape[0]
    shape = np.broadcast_shapes(t.shape[1:], v.shape[1:], E.shape, np.shape(alpha))
    theta = np.broadcast_to(np.asarray(alpha, dtype=float), shape).copy()
    x = np.cos(theta)
    y = np.sin(theta)
    logr = np.zeros(shape)
    if keep:
        thetas = np.empty((L + 1,) + shape)
        logrs = np.empty((L + 1,) + shape)
        thetas[0] = theta
        logrs[0] = 0.0
    for j in range(L):
        tj, vj = t[j], v[j]
        xn = (E - vj) / tj * x - tj * y
        yn = x / tj
        if phase:
            inc = np.arctan2(x * yn - y * xn, x * xn + y * yn)
            inc = np.where(inc <= -np.pi / 2, inc + 2 * np.pi, inc)
            theta = theta + inc
        r = np.sqrt(xn * xn + yn * yn)
        logr = logr + np.log(r)
        x = xn / r
        y = yn / r
        if keep:
            thetas[j + 1] = theta
            logrs[j + 1] = logr
    if keep:
        return (thetas if phase else None), logrs
    return (theta if phase else None), logr


@dataclass(frozen=True)
class PrueferState:
    site: int
    theta: float
    radius: float
    alpha: float


@dataclass(frozen=True, eq=False)
class PrueferFlow:
    """Phases ``theta_0..theta_n`` and log-radii of a Prüfer flow at one energy."""

    energy: float
    alpha: float
    theta: np.ndarray
    log_radius: np.ndarray

    def __len__(self):
        return self.theta.size

    def __getitem__(self, n) -> PrueferState:
        return PrueferState(int(n), float(self.theta[n]),
                            float(np.exp(self.log_radius[n])), self.alpha)

    @property
    def radius(self):
        return np.exp(self.log_radius)


def pruefer_flow(spec: JacobiSpec, E, alpha=None, up_to=None) -> PrueferFlow:
    """Prüfer phases and radii at sites ``0..up_to`` (default ``spec.size``)."""
    alpha = spec.alpha if alpha is None else float(alpha)
    n = spec.size if up_to is None else int(up_to)
    t, v = spec.coefficients(n)
    theta, logr = propagate(t, v, float(E), alpha, keep=True)
    return PrueferFlow(float(E), alpha, theta, logr)


def pruefer_phase(spec: JacobiSpec, energies, n=None, alpha=None):
    """Final ``(theta_n, log R_n)`` for an array of energies."""
    alpha = spec.alpha if alpha is None else alpha
    n = spec.size if n is None else int(n)
    t, v = spec.coefficients(n)
    return propagate(t, v, energies, alpha)


def sturm_count(spec: JacobiSpec, E):
    """Number of eigenvalues of the Dirichlet block ``spec`` below ``E``.

    Read off from the phase winding: the Dirichlet eigenvalue condition is
    ``theta_N = pi/2 mod pi`` and the phase decreases from ``N pi`` at
    ``E = -inf`` to ``0`` at ``E = +inf``.
    """
    theta, _ = pruefer_phase(spec, E, alpha=0.0)
    return spec.size - np.floor((theta + np.pi / 2) / np.pi).astype(int)


def alpha_average_inverse_R2(spec: JacobiSpec, E, n=None, tol=1e-11):
    """Quadrature of ``(1/pi) * int_0^pi dalpha / R_n(alpha)^2``; equals one exactly.

    The integrand peaks in the least expanded direction of ``T(n, 0)``; the
    interval is centred there and cut at geometrically growing distances.
    """
    n = spec.size if n is None else int(n)
    if n == 0:
        return 1.0
    a, b, c, d = (float(x) for x in transfer_entries(spec, float(E), n))
    T = np.array([[a, b], [c, d]])
    s0 = np.linalg.norm(T, 2)
    if s0 * s0 > 1e12:
        warnings.warn(f"transfer matrix condition number {s0 * s0:.3g} exceeds 1e12; "
                      "alpha quadrature may be inaccurate", PrecisionWarning, stacklevel=2)
    # in the singular basis R^2 = s0^2 sin^2 u + s1^2 cos^2 u, u measured from
    # the least expanded direction; this avoids cancellation near the peak.
    # det T = 1, so the small singular value is 1/s0 (an SVD would lose it)
    s1 = 1.0 / s0

    def f(u):
        return 1.0 / ((s0 * np.sin(u)) ** 2 + (s1 * np.cos(u)) ** 2)

    # the peak has width ~ s1/s0; geometric breakpoints resolve it
    width = s1 / s0
    cuts = [0.0]
    while cuts[-1] < np.pi / 2:
        cuts.append(min(np.pi / 2, width * 2.0 ** len(cuts)))
    total = 0.0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        val, _ = integrate.quad(f, lo, hi, epsabs=tol * width, epsrel=tol, limit=200)
        total += 2.0 * val  # f is even in u
    return total / np.pi


def phase_derivative(spec: JacobiSpec, E, n=None, wrt="energy", alpha=None):
    """Analytic derivative of ``theta_n`` w.r.t. the energy or a potential value.

    ``wrt`` is ``"energy"`` or a 1-based site index ``m <= n``.  Uses
    ``R_n^2 d theta_n/dE = -sum_{j<=n} phi_j^2`` and
    ``R_n^2 d theta_n/dv_m = phi_m^2``.
    """
    n = spec.size if n is None else int(n)
    wf = solve_schrodinger(spec, float(E), up_to=n, alpha=alpha)
    phi = wf.phi.real
    last = wf.pairs()[n].real
    r2 = last @ last
    if isinstance(wrt, str):
        if wrt != "energy":
            raise JacobiError(f"unknown derivative variable {wrt!r}")
        return -np.sum(phi[1:n + 1] ** 2) / r2
    m = int(wrt)
    if not 1 <= m <= n:
        raise JacobiError(f"site {m} outside 1..{n}")
    return phi[m] ** 2 / r2


# ---------------------------------------------------------------------------
# modified Prüfer variables


@dataclass(frozen=True, eq=False)
class ModifiedMap:
    r"""Conjugation by ``M^E`` which turns the free dynamics into a rotation by ``k``.

    ``M^E = sin(k)^{-1/2} ((sin k, 0), (-cos k, 1))`` with ``k = arccos(E/2)``.
    Calling the object evaluates the phase map ``m^E``, the continuous lift of
    ``theta -> angle(M^E e_theta)`` with ``m^E(theta + pi) = m^E(theta) + pi``.
    """

    energy: float

    def __post_init__(self):
        if not abs(self.energy) < 2:
            raise JacobiError(f"modified Prüfer variables need |E| < 2, got {self.energy!r}")

    @property
    def k(self):
        return float(np.arccos(self.energy / 2))

    @property
    def matrix(self):
        s, c = np.sin(self.k), np.cos(self.k)
        return np.array([[s, 0.0], [-c, 1.0]]) / np.sqrt(s)

    def __call__(self, theta):
        theta = np.asarray(theta, dtype=float)
        s, c = np.sin(self.k), np.cos(self.k)
        j = np.round(theta / np.pi)
        r = theta - j * np.pi
        # cos(r) >= 0 keeps the image in the half plane x >= 0
        return j * np.pi + np.arctan2(np.sin(r) - c * np.cos(r), s * np.cos(r))

    def inverse(self, theta_hat):
        theta_hat = np.asarray(theta_hat, dtype=float)
        s, c = np.sin(self.k), np.cos(self.k)
        j = np.round(theta_hat / np.pi)
        r = theta_hat - j * np.pi
        return j * np.pi + np.arctan2(c * np.cos(r) + s * np.sin(r), np.cos(r))

    def radius(self, theta):
        """``|M^E e_theta|``."""
        theta = np.asarray(theta, dtype=float)
        s, c = np.sin(self.k), np.cos(self.k)
        return np.hypot(s * np.cos(theta), np.sin(theta) - c * np.cos(theta)) / np.sqrt(s)

    def derivative(self, theta):
        """``(m^E)'(theta) = 1 / |M^E e_theta|^2`` since ``det M^E = 1``."""
        return 1.0 / self.radius(theta) ** 2

    @cached_property
    def bounds(self):
        """Numerical ``(C_1, C_2)`` with ``C_1 <= (m^E)' <= C_2`` on a fine grid."""
        grid = np.linspace(0.0, np.pi, 10001)
        dm = self.derivative(grid)
        return float(dm.min()), float(dm.max())


def modified_map(E) -> ModifiedMap:
    return ModifiedMap(float(E))


@dataclass(frozen=True)
class ModifiedPrueferState:
    site: int
    theta_hat: float
    radius_hat: float
    energy: float
    k: float


@dataclass(frozen=True, eq=False)
class ModifiedPrueferFlow:
    """Modified phases ``m^E(theta_n)`` and radii ``|M^E T(n,0) e_alpha|``."""

    energy: float
    k: float
    theta: np.ndarray
    theta_hat: np.ndarray
    log_radius_hat: np.ndarray

    def __len__(self):
        return self.theta_hat.shape[0]

    def __getitem__(self, n) -> ModifiedPrueferState:
        return ModifiedPrueferState(int(n), float(self.theta_hat[n]),
                                    float(np.exp(self.log_radius_hat[n])), self.energy, self.k)


def modified_pruefer_flow(spec: JacobiSpec, E, up_to=None, alpha=None) -> ModifiedPrueferFlow:
    """E-modified Prüfer flow of ``spec`` at sites ``0..up_to``.

    The modified vector at site ``n`` is ``M^E`` applied to
    ``T(n, 0) e_alpha = R_n e_{theta_n}``, so ``theta_hat_n = m^E(theta_n)``
    and ``R_hat_n = R_n |M^E e_{theta_n}|``.
    """
    mp = modified_map(E)
    flow = pruefer_flow(spec, E, alpha=alpha, up_to=up_to)
    return ModifiedPrueferFlow(float(E), mp.k, flow.theta, mp(flow.theta),
                               flow.log_radius + np.log(mp.radius(flow.theta)))


# ---------------------------------------------------------------------------
# Carmona's estimator


def _carmona_integrand(spec, energies, n, alpha):
    t, v = spec.coefficients(n)
    _, logr = propagate(t, v, energies, alpha, phase=False)
    return np.cos(alpha) ** 2 / np.pi * np.exp(-2.0 * logr)


def carmona_window_integrals(spec: JacobiSpec, windows, n, alpha=None, panels_per_unit=None):
    """Integrals of ``cos^2(alpha) / (pi R_n^2)`` over energy windows.

    The integrand oscillates in energy on a scale ``~1/n``; each window is
    split into Gauss-Legendre panels (8 nodes) whose number grows with ``n``.
    """
    alpha = spec.alpha if alpha is None else float(alpha)
    windows = np.atleast_2d(np.asarray(windows, dtype=float))
    per_unit = 1.0 * n if panels_per_unit is None else panels_per_unit
    x, w = leggauss(8)
    nodes, weights, owner = [], [], []
    for i, (e0, e1) in enumerate(windows):
        p = max(4, int(np.ceil((e1 - e0) * per_unit)))
        edges = np.linspace(e0, e1, p + 1)
        half = 0.5 * np.diff(edges)
        mid = 0.5 * (edges[1:] + edges[:-1])
        nodes.append((mid[:, None] + half[:, None] * x).ravel())
        weights.append((half[:, None] * w).ravel())
        owner.append(np.full(p * 8, i))
    nodes = np.concatenate(nodes)
    vals = _carmona_integrand(spec, nodes, n, alpha) * np.concatenate(weights)
    return np.bincount(np.concatenate(owner), weights=vals, minlength=len(windows))


def carmona_density(spec: JacobiSpec, energies, n, alpha=None, windows=None,
                    monitor=True, stability_tol=5e-3) -> DensityEstimate:
    """Carmona density ``cos^2(alpha) / (pi R_n(alpha)^2)`` on an energy grid.

    With ``windows`` the window integrals at truncation ``n`` (and, when
    ``monitor`` is set, ``2n``) are stored in ``meta``; the largest absolute
    change between the two truncations is reported as the convergence
    indicator.  Pointwise values do not converge in ``n``, only window
    integrals do.
    """
    alpha = spec.alpha if alpha is None else float(alpha)
    energies = np.asarray(energies, dtype=float)
    values = _carmona_integrand(spec, energies, n, alpha)
    meta = {"alpha": alpha}
    if windows is not None:
        windows = np.atleast_2d(np.asarray(windows, dtype=float))
        w1 = carmona_window_integrals(spec, windows, n, alpha)
        meta["windows"] = windows.tolist()
        meta["window_integrals"] = w1.tolist()
        if monitor:
            w2 = carmona_window_integrals(spec, windows, 2 * n, alpha)
            change = float(np.max(np.abs(w2 - w1)))
            meta["window_integrals_2n"] = w2.tolist()
            meta["max_change_n_2n"] = change
            meta["stable"] = change <= stability_tol
    return DensityEstimate(energies, values, 0.0, "carmona", truncation=n, meta=meta)
