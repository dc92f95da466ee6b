"""Combinatorial kernels: log-factorials, log-binomials and occupancy rows."""
import math
from functools import lru_cache

import numpy as np

from . import kernels

#: Probabilities smaller than this are flushed to exact zero.
FLUSH_BELOW = 1e-300

_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)

# Regime in which the literal alternating sum is evaluated.
REFERENCE_MAX_PHOTONS = 30
REFERENCE_MAX_BINS = 1024


class DomainError(ValueError):
    """An argument lies outside the domain of an operation."""


def _check_count(name, value):
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        raise DomainError(f"{name} must be an integer, got {value!r}")
    if value < 0:
        raise DomainError(f"{name} must be non-negative, got {value}")
    return int(value)


def log_factorial(n):
    """Natural log of n!."""
    n = _check_count("n", n)
    if n < 2:
        return 0.0
    return math.lgamma(n + 1)


def log_binomial(n, k):
    """Natural log of the binomial coefficient C(n, k); requires 0 <= k <= n."""
    n = _check_count("n", n)
    k = _check_count("k", k)
    if k > n:
        raise DomainError(f"log_binomial needs k <= n, got n={n}, k={k}")
    k = min(k, n - k)
    if k == 0:
        return 0.0
    # Stirling form with the large terms cancelled analytically; lgamma
    # differences lose ~lgamma(n) * eps absolute when n >> k.
    rest = n - k
    return (k * math.log(n / k) - 0.5 * math.log(k) - (rest + 0.5) * math.log1p(-k / n)
            - _HALF_LOG_2PI + _stirling_remainder(n) - _stirling_remainder(k)
            - _stirling_remainder(rest))


def _stirling_remainder(m):
    # ln m! - [(m + 1/2) ln m - m + ln(2 pi)/2]
    if m < 16:
        return math.lgamma(m + 1) - (m + 0.5) * math.log(m) + m - _HALF_LOG_2PI
    inv = 1.0 / m
    inv2 = inv * inv
    return inv * (1 / 12 - inv2 * (1 / 360 - inv2 * (1 / 1260 - inv2 / 1680)))


def flush_tiny(p):
    p = np.asarray(p, dtype=np.float64)
    return np.where(p < FLUSH_BELOW, 0.0, p)


@lru_cache(maxsize=512)
def _cached_table(n_max, n_bins):
    table = flush_tiny(kernels.occupancy_table(n_max, n_bins))
    table.setflags(write=False)
    return table


def convolution_matrix(n_max, n_bins):
    """Click probabilities for every photon number up to ``n_max``.

    Row ``n'`` holds P(k clicks | n' photons) for k = 0..min(n_max, n_bins).
    The returned array is shared and read-only.
    """
    n_max = _check_count("n_max", n_max)
    n_bins = _check_count("n_bins", n_bins)
    if n_bins == 0:
        raise DomainError("n_bins must be at least 1")
    return _cached_table(n_max, n_bins)


def occupancy_row(n_photons, n_bins):
    """Click distribution of ``n_photons`` spread uniformly over ``n_bins`` bins.

    Returns a ClickDistribution over k = 0..min(n_photons, n_bins).
    """
    from .model import ClickDistribution

    table = convolution_matrix(n_photons, n_bins)
    return ClickDistribution(np.array(table[n_photons]), int(n_bins))


def _alternating_sum(n_photons, k):
    # sum_j (-1)^j C(k, j) (k - j)^n' == k! * S(n', k); accumulated exactly
    return sum((-1) ** j * math.comb(k, j) * (k - j) ** n_photons
               for j in range(k + 1))


def occupancy_row_reference(n_photons, n_bins):
    """Literal alternating-sum form of the click distribution.

    The signed sum is accumulated exactly over the integers; the prefactor
    C(N, k) / N^n' is applied in log space. Only defined for
    ``n_photons <= 30`` and ``n_bins <= 1024``; use :func:`occupancy_row`
    elsewhere.
    """
    from .model import ClickDistribution

    n_photons = _check_count("n_photons", n_photons)
    n_bins = _check_count("n_bins", n_bins)
    if n_bins == 0:
        raise DomainError("n_bins must be at least 1")
    if n_photons > REFERENCE_MAX_PHOTONS or n_bins > REFERENCE_MAX_BINS:
        raise DomainError(
            f"reference formula restricted to n_photons <= {REFERENCE_MAX_PHOTONS} "
            f"and n_bins <= {REFERENCE_MAX_BINS}; use occupancy_row")
    k_max = min(n_photons, n_bins)
    probs = np.zeros(k_max + 1)
    log_scale = n_photons * math.log(n_bins)
    for k in range(k_max + 1):
        signed = _alternating_sum(n_photons, k)
        if signed <= 0:
            continue
        probs[k] = math.exp(log_binomial(n_bins, k) + math.log(signed) - log_scale)
    return ClickDistribution(flush_tiny(probs), n_bins)
