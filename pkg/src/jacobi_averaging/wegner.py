"""Random local perturbation of the free Laplacian and disorder-averaged densities.

The model is the half-line operator with ``t_n = 1`` and potential
``lam * v_n`` on sites ``1..N`` (``v_n`` i.i.d. uniform on ``[-1/2, 1/2]``),
continued by a deterministic tail and truncated at ``L`` sites.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core import FreeTail, JacobiError, JacobiSpec
from .estimates import DensityEstimate
from .pruefer import modified_map, propagate

__all__ = [
    "RandomModelSpec",
    "PotentialSample",
    "PhaseHistogram",
    "sample_potential",
    "sample_potentials",
    "phase_spread",
    "choose_N",
    "averaged_density_mc",
    "modified_phases",
    "expansion_residual",
    "phase_pushforward_histogram",
]


@dataclass(frozen=True)
class RandomModelSpec:
    """Coupling, random window, tail and truncation of the random model."""

    coupling: float
    n_sites: int
    length: int
    tail: Callable = field(default_factory=FreeTail)
    interval: tuple | None = None

    def __post_init__(self):
        if not 0 <= self.coupling < 4:
            raise JacobiError(f"coupling must lie in [0, 4), got {self.coupling!r}")
        if self.n_sites < 1:
            raise JacobiError("need at least one random site")
        if self.length <= self.n_sites:
            raise JacobiError("truncation length must exceed the random window")
        if self.interval is not None:
            e0, e1 = self.interval
            edge = 2 - self.coupling / 2
            if not (-edge < e0 <= e1 < edge):
                raise JacobiError(f"interval {self.interval} not inside (-{edge}, {edge})")

    def operator(self, v) -> JacobiSpec:
        """Half-line block ``1..N`` for one disorder configuration."""
        v = np.asarray(v, dtype=float)
        if v.shape != (self.n_sites,):
            raise JacobiError(f"expected {self.n_sites} potential values")
        return JacobiSpec(self.coupling * v, tail=self.tail)

    def coefficients(self, length=None):
        """``(t, v_tail)`` over ``1..L``; random sites carry zero potential here."""
        return JacobiSpec.free(self.n_sites, tail=self.tail).coefficients(
            self.length if length is None else length)


@dataclass(frozen=True, eq=False)
class PotentialSample:
    values: np.ndarray
    seed: int
    index: int


def _stream(seed, index):
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(index),)))


def sample_potential(seed, n, index=0) -> PotentialSample:
    """One configuration; sample ``index`` of ``seed`` has its own derived stream."""
    if n < 1:
        raise JacobiError("need at least one site")
    return PotentialSample(_stream(seed, index).uniform(-0.5, 0.5, n), int(seed), int(index))


def sample_potentials(seed, n, count, start=0):
    """Array ``(count, n)`` of configurations ``start..start+count-1``.

    Each row depends only on ``(seed, index)``, so any split of the indices
    over workers reproduces the same rows.
    """
    return np.array([_stream(seed, i).uniform(-0.5, 0.5, n)
                     for i in range(start, start + count)]).reshape(count, n)


def modified_phases(lam, v, E, keep=False):
    """Modified phases ``theta_hat_N`` for potentials ``v`` of shape ``(..., N)``.

    Returns ``(theta_hat, k)``; with ``keep`` the phase at every site
    ``0..N`` is returned along the first axis.
    """
    mp = modified_map(E)
    v = np.asarray(v, dtype=float)
    vv = np.moveaxis(lam * v, -1, 0)
    t = np.ones(vv.shape[:1])
    theta, _ = propagate(t, vv, float(E), 0.0, keep=keep)
    return mp(theta), mp.k


def phase_spread(lam, N, E, tail=None):
    """``theta_hat_N(v = +1/2) - theta_hat_N(v = -1/2)`` at each energy in ``E``.

    The tail is irrelevant: only sites ``1..N`` enter ``theta_hat_N``.
    """
    E = np.atleast_1d(np.asarray(E, dtype=float))
    if np.any(np.abs(E) >= 2 - lam / 2):
        raise JacobiError(f"energies must satisfy |E| < 2 - lam/2 = {2 - lam / 2}")
    out = []
    for e in E:
        vs = np.array([[0.5] * N, [-0.5] * N])
        th, _ = modified_phases(lam, vs, e)
        out.append(th[0] - th[1])
    out = np.array(out)
    return out if out.size > 1 else float(out[0])


def choose_N(lam, interval, grid=21, margin=0.2, cap=10**6):
    """Smallest ``N`` with ``min_E phase_spread(lam, N, E) > pi + margin`` on a grid of the interval.

    The spread is tracked site by site in blocks of doubling length, so the
    first ``N`` meeting the bound is found exactly even where the spread is
    not monotone in ``N``.
    """
    if not 0 < lam < 4:
        raise JacobiError("coupling must lie in (0, 4)")
    e0, e1 = interval
    RandomModelSpec(lam, 1, 2, interval=(e0, e1))
    energies = np.linspace(e0, e1, grid)
    mps = [modified_map(e) for e in energies]
    target = np.pi + margin
    # state: unit vectors and lifted phases for v = +1/2 and v = -1/2
    pot = np.array([0.5, -0.5])[:, None] * lam
    theta = np.zeros((2, grid))
    x, y = np.ones((2, grid)), np.zeros((2, grid))
    n, block = 0, 8
    while n < cap:
        steps = min(block, cap - n)
        for _ in range(steps):
            xn = (energies - pot) * x - y
            yn = x
            inc = np.arctan2(x * yn - y * xn, x * xn + y * yn)
            theta = theta + np.where(inc <= -np.pi / 2, inc + 2 * np.pi, inc)
            r = np.hypot(xn, yn)
            x, y = xn / r, yn / r
            n += 1
            spread = np.array([mp(theta[0, i]) - mp(theta[1, i]) for i, mp in enumerate(mps)])
            if spread.min() > target:
                return n
        block *= 2
    raise JacobiError(f"no N <= {cap} reaches a phase spread of pi + {margin}")


def _mc_chunk(t, v_tail, lam, vs, energies, alpha):
    N = vs.shape[1]
    L = t.size
    pot = np.broadcast_to(v_tail[:, None], (L, vs.shape[0])).copy()
    pot[:N] += lam * vs.T
    _, logr = propagate(t, pot[:, :, None], energies[None, :], alpha, phase=False)
    return np.exp(-2.0 * logr) / np.pi


def averaged_density_mc(model: RandomModelSpec, energies, samples, seed, threads=1,
                        length=None, alpha=0.0, rel_stderr_flag=0.25) -> DensityEstimate:
    """Monte-Carlo mean of the Carmona integrand ``1/(pi R_L^2)`` over disorder.

    Samples are drawn from per-index streams and energies are split across
    ``threads``; the sample mean is taken along a fixed axis, so the result
    does not depend on the number of threads.
    """
    if samples < 2:
        raise JacobiError("need at least two samples")
    L = model.length if length is None else int(length)
    if L <= model.n_sites:
        raise JacobiError("truncation length must exceed the random window")
    energies = np.atleast_1d(np.asarray(energies, dtype=float))
    t, v_tail = model.coefficients(L)
    vs = sample_potentials(seed, model.n_sites, samples)
    chunks = np.array_split(np.arange(energies.size), max(1, min(threads, energies.size)))
    work = lambda idx: _mc_chunk(t, v_tail, model.coupling, vs, energies[idx], alpha)
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(work, chunks))
    else:
        parts = [work(idx) for idx in chunks]
    vals = np.concatenate(parts, axis=1)
    mean = vals.mean(axis=0)
    se = vals.std(axis=0, ddof=1) / np.sqrt(samples)
    with np.errstate(divide="ignore", invalid="ignore"):
        noisy = np.where(mean > 0, se / mean > rel_stderr_flag, True)
    meta = {"coupling": model.coupling, "n_sites": model.n_sites, "seed": int(seed),
            "alpha": float(alpha), "large_stderr": noisy.tolist()}
    return DensityEstimate(energies, mean, se, "wegner-mc", samples=samples, truncation=L,
                           meta=meta)


def expansion_residual(lam, v, E):
    """Remainder of the first-order expansion of the modified phase.

    ``theta_hat_N - [theta_hat_0 + N k + lam/(2 sin k) sum_n v_n (1 + cos 2 theta_hat_{n-1})]``
    for ``v`` of shape ``(N,)`` or ``(S, N)``; the remainder is ``O(N lam^2)``.
    """
    v = np.asarray(v, dtype=float)
    N = v.shape[-1]
    th, k = modified_phases(lam, v, E, keep=True)
    th = np.moveaxis(th, 0, -1)  # (..., N + 1)
    first = lam / (2 * np.sin(k)) * np.sum(v * (1 + np.cos(2 * th[..., :-1])), axis=-1)
    return th[..., -1] - (th[..., 0] + N * k + first)


@dataclass(eq=False)
class PhaseHistogram:
    """Histogram of ``theta_hat_N - (theta_hat_0 + N k)`` over the disorder."""

    counts: np.ndarray
    edges: np.ndarray
    mean: float
    std: float
    stderr: float
    samples: int
    center: float
    oscillating_std: float


def phase_pushforward_histogram(lam, N, E, samples, bins=50, seed=0) -> PhaseHistogram:
    """Distribution of the modified phase under the uniform disorder.

    ``oscillating_std`` is the sample spread of
    ``lam/(2 sin k) sum v_n cos(2 theta_hat_{n-1})``, reported as a diagnostic.
    """
    vs = sample_potentials(seed, N, samples)
    th, k = modified_phases(lam, vs, E, keep=True)
    th = th.T  # (S, N + 1)
    center = th[0, 0] + N * k
    dev = th[:, -1] - center
    osc = lam / (2 * np.sin(k)) * np.sum(vs * np.cos(2 * th[:, :-1]), axis=1)
    if np.ptp(dev) == 0:
        counts, edges = np.histogram(dev, bins=bins, range=(dev[0] - 0.5, dev[0] + 0.5))
    else:
        counts, edges = np.histogram(dev, bins=bins)
    std = float(dev.std(ddof=1)) if samples > 1 else 0.0
    return PhaseHistogram(counts, edges, float(dev.mean()), std, std / np.sqrt(samples),
                          samples, float(center), float(osc.std(ddof=1)))
