"""Finite Jacobi matrices, transfer matrices and the three-term recurrence.

Site indices are 1-based throughout, matching the usual Jacobi-matrix
notation: a spec of size ``N`` carries potentials ``v_1..v_N`` and hoppings
``t_2..t_N``.  The hoppings ``t_1`` and ``t_{N+1}`` are fixed to one inside the
finite matrix; sites beyond ``N`` are supplied by a tail descriptor when a
longer truncation is requested.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.linalg import eigh_tridiagonal

__all__ = [
    "JacobiError",
    "PoleGuardError",
    "SingularEnergyError",
    "POLE_GUARD",
    "FreeTail",
    "PeriodicTail",
    "CallbackTail",
    "JacobiSpec",
    "TransferMatrix",
    "Wavefunction",
    "build_finite_operator",
    "transfer_matrix",
    "transfer_product",
    "solve_schrodinger",
    "eigenvalues",
    "transfer_entries",
]

POLE_GUARD = 1e-6


class JacobiError(ValueError):
    """Base class for rejected inputs and degenerate numerical situations."""


class PoleGuardError(JacobiError):
    """A boundary angle sits too close to a pole of tan(alpha) or cot(beta)."""


class SingularEnergyError(JacobiError):
    """The energy coincides with an eigenvalue, so the resolvent does not exist."""


# ---------------------------------------------------------------------------
# tails


@dataclass(frozen=True)
class FreeTail:
    """Continue with the free Laplacian: ``t_n = 1``, ``v_n = 0``."""

    def __call__(self, sites):
        sites = np.asarray(sites)
        return np.ones(sites.shape), np.zeros(sites.shape)

    def to_dict(self):
        return {"kind": "free"}


@dataclass(frozen=True)
class PeriodicTail:
    """Periodic continuation.

    Site ``n`` of the tail takes entry ``(n - offset) mod p`` of the given
    period, where ``offset`` is the last site of the finite block.
    """

    hoppings: tuple
    potentials: tuple
    offset: int = 0

    def __post_init__(self):
        if len(self.hoppings) != len(self.potentials) or not self.hoppings:
            raise JacobiError("periodic tail needs equal, non-empty periods")
        if min(self.hoppings) <= 0:
            raise JacobiError("tail hoppings must be positive")
        object.__setattr__(self, "hoppings", tuple(float(x) for x in self.hoppings))
        object.__setattr__(self, "potentials", tuple(float(x) for x in self.potentials))

    def __call__(self, sites):
        idx = (np.asarray(sites) - self.offset - 1) % len(self.hoppings)
        return np.asarray(self.hoppings)[idx], np.asarray(self.potentials)[idx]

    def to_dict(self):
        return {"kind": "periodic", "hoppings": list(self.hoppings),
                "potentials": list(self.potentials), "offset": self.offset}


@dataclass(frozen=True)
class CallbackTail:
    """User supplied rule ``site -> (t_n, v_n)``, evaluated site by site."""

    func: Callable

    def __call__(self, sites):
        sites = np.atleast_1d(np.asarray(sites))
        pairs = [self.func(int(n)) for n in sites]
        t = np.array([p[0] for p in pairs], dtype=float)
        v = np.array([p[1] for p in pairs], dtype=float)
        if np.any(t <= 0):
            raise JacobiError("tail hoppings must be positive")
        return t, v

    def to_dict(self):
        raise JacobiError("callback tails cannot be serialized")


@dataclass(frozen=True)
class _BlockTail:
    """Finite stretch of coefficients followed by another tail."""

    hoppings: tuple
    potentials: tuple
    start: int
    rest: Callable

    def __call__(self, sites):
        sites = np.asarray(sites)
        k = sites - self.start - 1
        inside = k < len(self.hoppings)
        rt, rv = self.rest(np.where(inside, self.start + len(self.hoppings) + 1, sites))
        idx = np.clip(k, 0, len(self.hoppings) - 1)
        return (np.where(inside, np.asarray(self.hoppings)[idx], rt),
                np.where(inside, np.asarray(self.potentials)[idx], rv))


def tail_from_dict(data) -> FreeTail | PeriodicTail:
    kind = data.get("kind", "free")
    if kind == "free":
        return FreeTail()
    if kind == "periodic":
        return PeriodicTail(tuple(data["hoppings"]), tuple(data["potentials"]),
                            int(data.get("offset", 0)))
    raise JacobiError(f"unknown tail kind {kind!r}")


# ---------------------------------------------------------------------------
# specs


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class JacobiSpec:
    """Data of a finite Jacobi matrix with boundary angles.

    Parameters
    ----------
    potentials : array_like, shape (N,)
        Diagonal entries ``v_1..v_N``.
    hoppings : array_like, shape (N-1,), optional
        Off-diagonal entries ``t_2..t_N``; defaults to all ones.
    alpha : float
        Left boundary angle; enters as ``v_1 + tan(alpha)``.
    beta : float
        Right boundary angle; enters as ``v_N + cot(beta)``.
    tail : callable
        Rule ``sites -> (t, v)`` for sites beyond ``N``.
    """

    potentials: np.ndarray
    hoppings: np.ndarray | None = None
    alpha: float = 0.0
    beta: float = np.pi / 2
    tail: Callable = field(default_factory=FreeTail)

    def __post_init__(self):
        v = np.atleast_1d(np.asarray(self.potentials, dtype=float))
        if v.ndim != 1 or v.size < 1:
            raise JacobiError("need at least one site")
        t = np.ones(v.size - 1) if self.hoppings is None else np.atleast_1d(
            np.asarray(self.hoppings, dtype=float))
        if t.shape != (v.size - 1,):
            raise JacobiError(f"expected {v.size - 1} hoppings, got {t.size}")
        if np.any(t <= 0) or not np.all(np.isfinite(t)):
            raise JacobiError("hoppings must be positive and finite")
        if not np.all(np.isfinite(v)):
            raise JacobiError("potentials must be finite")
        object.__setattr__(self, "potentials", _frozen(v))
        object.__setattr__(self, "hoppings", _frozen(t))
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "beta", float(self.beta))

    @classmethod
    def free(cls, n, **kwargs):
        """Free Laplacian block of ``n`` sites."""
        return cls(np.zeros(n), **kwargs)

    @property
    def size(self) -> int:
        return self.potentials.size

    def coefficients(self, length=None):
        """Return ``(t_1..t_L, v_1..v_L)`` with ``t_1 = 1`` and tail sites appended.

        ``length`` may be shorter than ``size``, in which case the block is cut.
        """
        L = self.size if length is None else int(length)
        if L < 0:
            raise JacobiError("length must be non-negative")
        t = np.concatenate([[1.0], self.hoppings])
        v = np.asarray(self.potentials)
        if L > self.size:
            tt, tv = self.tail(np.arange(self.size + 1, L + 1))
            t = np.concatenate([t, np.broadcast_to(tt, (L - self.size,))])
            v = np.concatenate([v, np.broadcast_to(tv, (L - self.size,))])
        return t[:L].copy(), v[:L].copy()

    def resized(self, length) -> "JacobiSpec":
        """Same operator cut or extended (through the tail) to ``length`` sites."""
        if length < 1:
            raise JacobiError("length must be positive")
        t, v = self.coefficients(length)
        tail = self.tail
        if length < self.size:
            full_t, full_v = self.coefficients(self.size)
            tail = _BlockTail(tuple(full_t[length:]), tuple(full_v[length:]),
                              length, self.tail)
        return JacobiSpec(v, t[1:], self.alpha, self.beta, tail)

    def with_boundary(self, alpha=None, beta=None) -> "JacobiSpec":
        return JacobiSpec(self.potentials, self.hoppings,
                          self.alpha if alpha is None else alpha,
                          self.beta if beta is None else beta, self.tail)

    def with_potentials(self, potentials) -> "JacobiSpec":
        return JacobiSpec(potentials, self.hoppings, self.alpha, self.beta, self.tail)


def _check_poles(alpha, beta, guard=POLE_GUARD):
    # distance of alpha to pi/2 + j*pi and of beta to j*pi
    ra = (alpha - np.pi / 2) % np.pi
    da = min(ra, np.pi - ra)
    db = min(beta % np.pi, np.pi - beta % np.pi)
    if da < guard:
        raise PoleGuardError(f"alpha={alpha!r} is within {guard:g} of a pole of tan")
    if db < guard:
        raise PoleGuardError(f"beta={beta!r} is within {guard:g} of a pole of cot")


def build_finite_operator(spec: JacobiSpec, guard=POLE_GUARD) -> np.ndarray:
    """Dense symmetric tridiagonal matrix with the boundary angles folded in."""
    _check_poles(spec.alpha, spec.beta, guard)
    d = np.array(spec.potentials)
    d[0] += np.tan(spec.alpha)
    d[-1] += 1.0 / np.tan(spec.beta)
    return np.diag(d) + np.diag(spec.hoppings, 1) + np.diag(spec.hoppings, -1)


def _boundary_diagonal(spec, guard=POLE_GUARD):
    _check_poles(spec.alpha, spec.beta, guard)
    d = np.array(spec.potentials)
    d[0] += np.tan(spec.alpha)
    d[-1] += 1.0 / np.tan(spec.beta)
    return d


# ---------------------------------------------------------------------------
# transfer matrices


@dataclass(frozen=True)
class TransferMatrix:
    """2x2 transfer matrix ``((a, b), (c, d))``."""

    a: complex
    b: complex
    c: complex
    d: complex

    @classmethod
    def identity(cls):
        return cls(1.0, 0.0, 0.0, 1.0)

    @classmethod
    def from_array(cls, m):
        return cls(m[0, 0], m[0, 1], m[1, 0], m[1, 1])

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    @property
    def det(self):
        return self.a * self.d - self.b * self.c

    def __matmul__(self, other):
        if isinstance(other, TransferMatrix):
            return TransferMatrix.from_array(self.matrix @ other.matrix)
        return self.matrix @ np.asarray(other)


def transfer_matrix(t, v, z) -> TransferMatrix:
    """Single-site transfer matrix ``(((z - v)/t, -t), (1/t, 0))``."""
    if not t > 0:
        raise JacobiError(f"hopping must be positive, got {t!r}")
    return TransferMatrix((z - v) / t, -t, 1.0 / t, 0.0)


def transfer_product(spec: JacobiSpec, z, n, m=0) -> TransferMatrix:
    """Ordered product ``T_n ... T_{m+1}``; identity when ``n == m``.

    Sites beyond ``spec.size`` are taken from the tail.
    """
    if n < m or m < 0:
        raise JacobiError(f"need n >= m >= 0, got n={n}, m={m}")
    t, v = spec.coefficients(n)
    out = np.eye(2, dtype=complex)
    for j in range(m, n):
        step = np.array([[(z - v[j]) / t[j], -t[j]], [1.0 / t[j], 0.0]])
        out = step @ out
    return TransferMatrix.from_array(out)


@dataclass(frozen=True, eq=False)
class Wavefunction:
    """Solution ``phi_0..phi_{n+1}`` of the recurrence seeded by the left boundary.

    ``hoppings[j]`` is ``t_j`` for ``j = 0..n+1``; entry 0 is a placeholder so
    that indices line up with ``phi``.
    """

    phi: np.ndarray
    z: complex
    alpha: float
    hoppings: np.ndarray

    @property
    def up_to(self) -> int:
        return self.phi.size - 2

    def pairs(self) -> np.ndarray:
        """Rows ``(t_{n+1} phi_{n+1}, phi_n)`` for ``n = 0..up_to``."""
        return np.stack([self.hoppings[1:] * self.phi[1:], self.phi[:-1]], axis=1)


def solve_schrodinger(spec: JacobiSpec, z, up_to=None, alpha=None) -> Wavefunction:
    """Run the three-term recurrence from the seed ``(cos alpha, sin alpha)``.

    Returns ``phi_0..phi_{up_to+1}``; hoppings past ``spec.size`` come from the
    tail, so ``t_{N+1} = 1`` for the default free tail.
    """
    n = spec.size if up_to is None else int(up_to)
    alpha = spec.alpha if alpha is None else alpha
    t, v = spec.coefficients(n + 1)
    phi = np.empty(n + 2, dtype=complex)
    phi[0] = np.sin(alpha)
    phi[1] = np.cos(alpha) / t[0]
    for j in range(1, n + 1):
        # t_{j+1} phi_{j+1} = (z - v_j) phi_j - t_j phi_{j-1}
        phi[j + 1] = ((z - v[j - 1]) * phi[j] - t[j - 1] * phi[j - 1]) / t[j]
    return Wavefunction(phi, z, float(alpha), np.concatenate([[np.nan], t]))


def eigenvalues(spec: JacobiSpec, guard=POLE_GUARD) -> np.ndarray:
    """Sorted eigenvalues of the finite matrix (LAPACK tridiagonal solver)."""
    d = _boundary_diagonal(spec, guard)
    if spec.size == 1:
        return d.copy()
    return eigh_tridiagonal(d, np.asarray(spec.hoppings), eigvals_only=True)


def transfer_entries(spec: JacobiSpec, z, n=None):
    """Entries ``(a, b, c, d)`` of ``T(n, 0)``, vectorized over the energies ``z``."""
    n = spec.size if n is None else int(n)
    t, v = spec.coefficients(n)
    z = np.asarray(z)
    dtype = complex if np.iscomplexobj(z) else float
    a = np.ones(z.shape, dtype)
    b = np.zeros(z.shape, dtype)
    c = np.zeros(z.shape, dtype)
    d = np.ones(z.shape, dtype)
    for j in range(n):
        # left-multiply by (((z - v)/t, -t), (1/t, 0))
        a, b, c, d = ((z - v[j]) / t[j] * a - t[j] * c,
                      (z - v[j]) / t[j] * b - t[j] * d,
                      a / t[j], b / t[j])
    return a, b, c, d
