"""Brute-force and Monte-Carlo twins of the analytic detector model.

Random numbers come from numpy's ``PCG64`` bit generator seeded through
``numpy.random.SeedSequence``; survival uses ``Generator.random`` and bin
choice ``Generator.integers``, drawn in fixed-size chunks so a given seed
always yields the same counts.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import kernels
from .core_math import DomainError
from .model import ClickDistribution

ENUMERATION_LIMIT = 10 ** 8
_ENUM_CHUNK = 1 << 20
MC_CHUNK = 1 << 16


def enumerate_click_counts(n_photons, n_bins):
    """Histogram of occupied-bin counts over all n_bins**n_photons assignments."""
    if n_photons < 0 or n_bins < 1:
        raise DomainError("need n_photons >= 0 and n_bins >= 1")
    total = n_bins ** n_photons
    if total > ENUMERATION_LIMIT:
        raise DomainError(f"{n_bins}**{n_photons} assignments exceed {ENUMERATION_LIMIT}")
    counts = np.zeros(min(n_photons, n_bins) + 1, dtype=np.int64)
    if n_photons == 0:
        counts[0] = 1
        return counts
    powers = n_bins ** np.arange(n_photons, dtype=np.int64)
    everyone = np.ones((1, n_photons), dtype=bool)
    for start in range(0, total, _ENUM_CHUNK):
        idx = np.arange(start, min(start + _ENUM_CHUNK, total), dtype=np.int64)
        digits = (idx[:, None] // powers) % n_bins
        occupied = kernels.count_occupied_numpy(digits, np.broadcast_to(everyone, digits.shape))
        counts += np.bincount(occupied, minlength=counts.size)
    return counts


def enumerate_click_fractions(n_photons, n_bins):
    counts = enumerate_click_counts(n_photons, n_bins)
    total = n_bins ** n_photons
    return [Fraction(int(c), total) for c in counts]


def enumerate_click_distribution(n_photons, n_bins):
    """Exact click distribution by exhaustive enumeration of bin assignments."""
    exact = enumerate_click_fractions(n_photons, n_bins)
    return ClickDistribution(np.array([float(f) for f in exact]), n_bins)


@dataclass(frozen=True)
class McConfig:
    samples: int
    seed: int
    n_photons: int
    n_bins: int
    eta: float
    workers: int = 1

    def __post_init__(self):
        if self.samples < 1:
            raise DomainError("samples must be >= 1")
        if self.n_photons < 0 or self.n_bins < 1:
            raise DomainError("need n_photons >= 0 and n_bins >= 1")
        if not 0.0 <= self.eta <= 1.0:
            raise DomainError("eta must lie in [0, 1]")
        if self.workers < 1:
            raise DomainError("workers must be >= 1")


def _simulate(samples, seed, n_photons, n_bins, eta):
    rng = np.random.Generator(np.random.PCG64(seed))
    counts = np.zeros(min(n_photons, n_bins) + 1, dtype=np.int64)
    done = 0
    while done < samples:
        m = min(MC_CHUNK, samples - done)
        survived = rng.random((m, n_photons)) < eta
        bins = rng.integers(0, n_bins, size=(m, n_photons), dtype=np.int64)
        counts += np.bincount(kernels.count_occupied(bins, survived), minlength=counts.size)
        done += m
    return counts


def mc_click_counts(config):
    """Occupied-bin histogram over ``config.samples`` simulated shots.

    With several workers, worker i simulates its share with seed ``seed + i``.
    """
    c = config
    if c.workers == 1:
        return _simulate(c.samples, c.seed, c.n_photons, c.n_bins, c.eta)
    share, extra = divmod(c.samples, c.workers)
    sizes = [share + (i < extra) for i in range(c.workers)]
    with ThreadPoolExecutor(max_workers=c.workers) as pool:
        parts = pool.map(lambda i: _simulate(sizes[i], c.seed + i, c.n_photons, c.n_bins, c.eta),
                         range(c.workers))
        return np.sum(list(parts), axis=0)


def mc_click_distribution(config):
    counts = mc_click_counts(config)
    return ClickDistribution(counts / counts.sum(), config.n_bins)


def total_variation(p, q):
    """Half the L1 distance between two (zero-padded) distributions."""
    a = p.probabilities if isinstance(p, ClickDistribution) else np.asarray(p, dtype=float)
    b = q.probabilities if isinstance(q, ClickDistribution) else np.asarray(q, dtype=float)
    size = max(a.size, b.size)
    return 0.5 * float(np.abs(np.pad(a, (0, size - a.size)) - np.pad(b, (0, size - b.size))).sum())
