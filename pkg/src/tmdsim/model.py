"""Forward model of a time-multiplexed detector.

A photon-number distribution first passes a binomial loss channel whose
efficiency combines the external setup efficiency with the network's own
splitter and delay-fiber losses; survivors are then spread uniformly over
N = 2**stages time bins and each occupied bin registers one click.
"""
from dataclasses import dataclass, replace
from functools import lru_cache
import math

import numpy as np

from .core_math import DomainError, convolution_matrix, flush_tiny, log_binomial

NORM_TOL = 1e-9
MAX_STAGES = 20


def _as_probabilities(values, what):
    p = np.array(values, dtype=np.float64).ravel()
    if p.size == 0:
        raise DomainError(f"{what} must have at least one entry")
    if not np.all(np.isfinite(p)) or np.any(p < 0):
        raise DomainError(f"{what} entries must be finite and non-negative")
    total = math.fsum(p)
    if abs(total - 1.0) > NORM_TOL:
        raise DomainError(f"{what} must sum to 1, got {total!r}")
    p.setflags(write=False)
    return p


@dataclass(frozen=True, eq=False)
class PhotonStatistics:
    """Input photon-number distribution, index = photon number."""

    probabilities: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "probabilities",
                           _as_probabilities(self.probabilities, "photon statistics"))

    @classmethod
    def fock(cls, n):
        if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 0:
            raise DomainError(f"Fock index must be a non-negative integer, got {n!r}")
        p = np.zeros(int(n) + 1)
        p[-1] = 1.0
        return cls(p)

    @property
    def n_max(self):
        return self.probabilities.size - 1


@dataclass(frozen=True, eq=False)
class ClickDistribution:
    """Probability of k clicks, k = 0..len-1, for a detector with ``n_bins`` bins."""

    probabilities: np.ndarray
    n_bins: int

    def __post_init__(self):
        object.__setattr__(self, "probabilities",
                           _as_probabilities(self.probabilities, "click distribution"))
        if self.n_bins < 1:
            raise DomainError("n_bins must be at least 1")
        if self.probabilities.size - 1 > self.n_bins:
            raise DomainError("more click outcomes than bins")

    def __len__(self):
        return self.probabilities.size

    def mean(self):
        return float(np.dot(np.arange(len(self)), self.probabilities))


@dataclass(frozen=True)
class TmdConfig:
    """Network geometry and loss figures.

    Bins are spaced by one detector dead time, so the longest delay line
    holds (2**stages - 1) dead times of fiber.
    """

    stages: int = 8
    dead_time: float = 10e-9        # s
    splitter_loss: float = 0.05     # dB per beam splitter
    fiber_loss: float = 0.2         # dB/km
    fiber_speed: float = 2.0e8      # m/s
    eta_ex: float = 1.0

    def __post_init__(self):
        if isinstance(self.stages, bool) or not isinstance(self.stages, (int, np.integer)):
            raise DomainError(f"stages must be an integer, got {self.stages!r}")
        if not 0 <= self.stages <= MAX_STAGES:
            raise DomainError(f"stages must lie in [0, {MAX_STAGES}], got {self.stages}")
        for name in ("dead_time", "splitter_loss", "fiber_loss"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise DomainError(f"{name} must be finite and >= 0, got {value!r}")
        if not (math.isfinite(self.fiber_speed) and self.fiber_speed > 0):
            raise DomainError(f"fiber_speed must be positive, got {self.fiber_speed!r}")
        _check_eta(self.eta_ex, "eta_ex")

    @property
    def n_bins(self):
        return 2 ** self.stages

    def with_stages(self, stages):
        return replace(self, stages=stages)

    def ideal(self):
        """Same configuration with splitter and fiber losses zeroed."""
        return replace(self, splitter_loss=0.0, fiber_loss=0.0)

    @property
    def delay_length_km(self):
        return self.fiber_speed * (self.n_bins - 1) * self.dead_time / 1e3

    @property
    def loss_db(self):
        return self.stages * self.splitter_loss + self.delay_length_km * self.fiber_loss


def _check_eta(eta, name="eta"):
    if not (isinstance(eta, (int, float, np.floating, np.integer)) and 0.0 <= eta <= 1.0):
        raise DomainError(f"{name} must lie in [0, 1], got {eta!r}")
    return float(eta)


@lru_cache(maxsize=256)
def _loss_matrix(eta, n_max):
    out = np.zeros((n_max + 1, n_max + 1))
    if eta == 1.0:
        np.fill_diagonal(out, 1.0)
    elif eta == 0.0:
        out[:, 0] = 1.0
    else:
        log_keep, log_drop = math.log(eta), math.log1p(-eta)
        for n in range(n_max + 1):
            for kept in range(n + 1):
                out[n, kept] = math.exp(log_binomial(n, kept) + kept * log_keep
                                        + (n - kept) * log_drop)
        out = flush_tiny(out)
    out.setflags(write=False)
    return out


def loss_matrix(eta, n_max):
    """Binomial loss channel: entry (n, n') = C(n, n') eta^n' (1-eta)^(n-n')."""
    eta = _check_eta(eta)
    if isinstance(n_max, bool) or not isinstance(n_max, (int, np.integer)) or n_max < 0:
        raise DomainError(f"n_max must be a non-negative integer, got {n_max!r}")
    return _loss_matrix(eta, int(n_max))


def tmd_efficiency(config):
    """Transmission of the network alone (splitters plus longest delay line)."""
    return 10.0 ** (-config.loss_db / 10.0)


def total_efficiency(config):
    return config.eta_ex * tmd_efficiency(config)


def _as_statistics(rho_in):
    if isinstance(rho_in, PhotonStatistics):
        return rho_in
    return PhotonStatistics(rho_in)


def surviving_statistics(rho_in, eta):
    """Photon-number distribution after the loss channel alone."""
    rho = _as_statistics(rho_in)
    out = rho.probabilities @ loss_matrix(eta, rho.n_max)
    return flush_tiny(out)


def click_statistics(rho_in, config):
    """Click distribution of ``rho_in`` after the full detector."""
    rho = _as_statistics(rho_in)
    survived = surviving_statistics(rho, total_efficiency(config))
    clicks = survived @ convolution_matrix(rho.n_max, config.n_bins)
    return ClickDistribution(flush_tiny(clicks), config.n_bins)


def fock_click_statistics(n, config):
    return click_statistics(PhotonStatistics.fock(n), config)
