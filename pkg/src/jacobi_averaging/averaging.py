"""Averaging over one coupling constant of a positive local perturbation.

The family is ``H(mu) = H(0) + mu W`` with ``W = diag(w_1..w_N)`` supported on
the first ``N`` sites.  ``E`` is an eigenvalue of the Dirichlet block
``H^N(mu)`` exactly when ``1/mu`` is an eigenvalue of the Birman-Schwinger
matrix ``K_E = W^{1/2} (E - H^N(0))^{-1} W^{1/2}``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.optimize import brentq

from .core import JacobiError, JacobiSpec, build_finite_operator, eigenvalues
from .estimates import DensityEstimate
from .pruefer import propagate, pruefer_phase

__all__ = [
    "ResonanceError",
    "PerturbationW",
    "BirmanSchwingerReport",
    "perturbed",
    "birman_schwinger",
    "crossing_mus",
    "eigenvalue_crossings",
    "phase_crossing_count",
    "certify_theorem_conditions",
    "one_parameter_averaged_density",
]


class ResonanceError(JacobiError):
    """The energy sits on the spectrum of the unperturbed block."""


@dataclass(frozen=True, eq=False)
class PerturbationW:
    """Non-negative diagonal perturbation on the first ``N`` sites."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.atleast_1d(np.asarray(self.weights, dtype=float))
        if w.ndim != 1 or w.size < 1:
            raise JacobiError("need at least one weight")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise JacobiError("weights must be finite and non-negative")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def size(self):
        return self.weights.size

    @property
    def strictly_positive(self) -> bool:
        return bool(np.all(self.weights > 0))

    @property
    def adjacent_pair(self):
        """First 1-based ``m`` with ``w_m, w_{m+1} > 0``, else ``None``."""
        pos = self.weights > 0
        hits = np.flatnonzero(pos[:-1] & pos[1:])
        return int(hits[0]) + 1 if hits.size else None


def _as_w(W):
    return W if isinstance(W, PerturbationW) else PerturbationW(W)


def perturbed(base: JacobiSpec, W, mu) -> JacobiSpec:
    """``H(0) + mu W`` as a spec; the block keeps the size of ``base``."""
    W = _as_w(W)
    if W.size > base.size:
        raise JacobiError("perturbation longer than the base block")
    v = np.array(base.potentials)
    v[:W.size] += mu * W.weights
    return base.with_potentials(v)


def _dirichlet_block(base, N):
    return base.resized(N).with_boundary(alpha=base.alpha, beta=np.pi / 2)


def birman_schwinger(base: JacobiSpec, W, E, resonance_tol=1e-9):
    """Return ``(K_E, eigenvalues)`` with the eigenvalues sorted ascending."""
    W = _as_w(W)
    H0 = build_finite_operator(_dirichlet_block(base, W.size))
    ev = np.linalg.eigvalsh(H0)
    scale = max(1.0, np.max(np.abs(ev)))
    if np.min(np.abs(ev - E)) < resonance_tol * scale:
        raise ResonanceError(f"E={E!r} is within {resonance_tol:g} of the spectrum of H^N(0)")
    sq = np.sqrt(W.weights)
    R = np.linalg.inv(E * np.eye(W.size) - H0)
    K = sq[:, None] * R * sq[None, :]
    K = 0.5 * (K + K.T)
    return K, np.linalg.eigvalsh(K)


def crossing_mus(base: JacobiSpec, W, E, zero_tol=1e-13):
    """Couplings ``mu' = 1/lambda`` at which ``E`` is an eigenvalue of ``H^N(mu')``."""
    W = _as_w(W)
    if not W.strictly_positive:
        raise JacobiError("duality needs a strictly positive perturbation")
    _, lam = birman_schwinger(base, W, E)
    cut = zero_tol * max(1.0, np.max(np.abs(lam)))
    nz = lam[np.abs(lam) > cut]
    if nz.size == 0:
        warnings.warn("all Birman-Schwinger eigenvalues vanish; no crossings", stacklevel=2)
    return np.sort(1.0 / nz)


def _block_eigs(base, W, mu):
    return eigenvalues(_dirichlet_block(perturbed(base, W, mu), W.size))


def eigenvalue_crossings(base: JacobiSpec, W, E, mu0, mu1, nodes=512, xtol=1e-10):
    """Locate all ``(branch, mu)`` with ``E_branch(mu) = E`` on ``[mu0, mu1]``.

    Branches are the sorted eigenvalues of the Dirichlet block; simple
    spectrum makes the sorted index a continuous label.  Sign changes on a
    uniform grid are refined by Brent's method.  ``branch`` is 1-based.
    """
    W = _as_w(W)
    grid = np.linspace(mu0, mu1, nodes)
    ev = np.array([_block_eigs(base, W, mu) for mu in grid]) - E
    out = []
    for j in range(W.size):
        f = ev[:, j]
        for i in np.flatnonzero(np.sign(f[:-1]) * np.sign(f[1:]) < 0):
            root = brentq(lambda mu: _block_eigs(base, W, mu)[j] - E,
                          grid[i], grid[i + 1], xtol=xtol)
            out.append((j + 1, root))
        for i in np.flatnonzero(f == 0):
            out.append((j + 1, grid[i]))
    return sorted(out, key=lambda p: p[1])


def phase_crossing_count(theta0, theta1):
    """Number of points ``pi/2 + j pi`` strictly between two phases."""
    lo, hi = min(theta0, theta1), max(theta0, theta1)
    return int(np.ceil((hi - np.pi / 2) / np.pi) - np.floor((lo - np.pi / 2) / np.pi) - 1)


@dataclass(eq=False)
class BirmanSchwingerReport:
    """Outcome of checking the one-parameter averaging conditions at one energy.

    ``condition_b`` is ``None`` when it cannot be evaluated (resonant energy
    or a perturbation that is not strictly positive).
    """

    energy: float
    interval: tuple
    k_eigenvalues: np.ndarray | None
    crossings: np.ndarray
    adjacent_pair: int | None
    condition_a: bool
    condition_a_witness: tuple | None
    condition_b: bool | None
    rotation: float
    rotation_exceeds_pi: bool
    branch_crossings: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    @property
    def monotone(self) -> bool:
        return self.adjacent_pair is not None

    @property
    def certified(self) -> bool:
        return self.monotone and (self.condition_a or bool(self.condition_b))


def certify_theorem_conditions(base: JacobiSpec, W, E, mu0, mu1, nodes=512):
    """Check adjacency, condition (a), condition (b) and the phase rotation."""
    if not mu0 < mu1:
        raise JacobiError("need mu0 < mu1")
    W = _as_w(W)
    notes = []
    lam, crossings, cond_b = None, np.empty(0), None
    if W.strictly_positive:
        try:
            _, lam = birman_schwinger(base, W, E)
            crossings = crossing_mus(base, W, E)
            inside = crossings[(crossings > mu0) & (crossings < mu1)]
            cond_b = inside.size >= 2
        except ResonanceError as exc:
            notes.append(f"condition (b) not evaluable: {exc}")
    else:
        notes.append("condition (b) needs a strictly positive perturbation")

    found = eigenvalue_crossings(base, W, E, mu0, mu1, nodes=nodes)
    found_inside = [(n, mu) for n, mu in found if mu0 < mu < mu1]
    witness = None
    for n, ma in found_inside:
        for m, mb in found_inside:
            if m == n - 1 and ma < mb:
                witness = (n, ma, mb)
                break
        if witness:
            break

    th0, _ = pruefer_phase(_dirichlet_block(perturbed(base, W, mu0), W.size), float(E))
    th1, _ = pruefer_phase(_dirichlet_block(perturbed(base, W, mu1), W.size), float(E))
    rot = float(th1 - th0)
    return BirmanSchwingerReport(
        energy=float(E), interval=(float(mu0), float(mu1)), k_eigenvalues=lam,
        crossings=crossings, adjacent_pair=W.adjacent_pair,
        condition_a=witness is not None, condition_a_witness=witness,
        condition_b=cond_b, rotation=rot, rotation_exceeds_pi=abs(rot) > np.pi,
        branch_crossings=found, notes=notes)


def _averaged_values(base, W, mu0, mu1, energies, length, nodes, panels):
    if mu1 == mu0:
        return np.zeros(energies.shape)
    x, w = leggauss(nodes)
    edges = np.linspace(mu0, mu1, panels + 1)
    half = 0.5 * np.diff(edges)
    mus = ((0.5 * (edges[1:] + edges[:-1]))[:, None] + half[:, None] * x).ravel()
    wts = (half[:, None] * w).ravel()
    t, v = base.resized(max(length, base.size)).coefficients(length)
    vv = v[:, None] + np.outer(np.pad(W.weights, (0, length - W.size)), mus)
    _, logr = propagate(t, vv[:, :, None], energies[None, :], base.alpha, phase=False)
    # fixed order: nodes sum with a dot product over a fixed axis
    return wts @ (np.exp(-2.0 * logr) / np.pi)


def one_parameter_averaged_density(base: JacobiSpec, W, mu0, mu1, energies, length,
                                   nodes=64, panels=1, monitor=True, certify=True):
    """Density of ``int_{mu0}^{mu1} rho_mu dmu`` from Carmona integrands at truncation ``length``.

    Composite Gauss-Legendre over ``mu`` (``nodes`` per panel).  With
    ``monitor`` the estimate at ``2 * length`` is stored in ``meta`` with the
    worst ratio between the two.  With ``certify`` the averaging conditions
    are evaluated at every grid energy.
    """
    W = _as_w(W)
    if length <= W.size:
        raise JacobiError("truncation length must exceed the perturbation size")
    energies = np.atleast_1d(np.asarray(energies, dtype=float))
    vals = _averaged_values(base, W, mu0, mu1, energies, length, nodes, panels)
    meta = {"mu0": float(mu0), "mu1": float(mu1), "weights": W.weights.tolist(),
            "nodes": nodes, "panels": panels}
    if monitor:
        v2 = _averaged_values(base, W, mu0, mu1, energies, 2 * length, nodes, panels)
        meta["values_2L"] = v2.tolist()
        # ratios of values at the scale of round-off (outside the spectrum) mean nothing
        top = max(float(np.max(vals, initial=0.0)), float(np.max(v2, initial=0.0)))
        keep = np.maximum(vals, v2) > 1e-8 * top
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where((vals > 0) & (v2 > 0), np.maximum(vals / v2, v2 / vals), np.inf)
        meta["max_ratio_L_2L"] = float(np.max(ratio[keep], initial=1.0))
    if certify and mu1 > mu0:
        flags = []
        for E in energies:
            rep = certify_theorem_conditions(base, W, E, mu0, mu1, nodes=128)
            flags.append(bool(rep.certified))
        meta["certified"] = flags
    return DensityEstimate(energies, vals, 0.0, "one-parameter-average",
                           truncation=length, meta=meta)
