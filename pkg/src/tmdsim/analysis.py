"""Distinguishability of Fock states behind a time-multiplexed detector."""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import NamedTuple
import os

import numpy as np

from .core_math import DomainError
from .model import (ClickDistribution, PhotonStatistics, TmdConfig, click_statistics,
                    surviving_statistics, tmd_efficiency)

MODES = ("convolution_only", "loss_only", "combined")
DEFAULT_B_MAX = 14


def worker_count():
    """Sweep worker count, capped by ``TMD_SIM_THREADS`` (0 or unset means auto)."""
    raw = os.environ.get("TMD_SIM_THREADS", "").strip()
    auto = os.cpu_count() or 1
    if not raw:
        return auto
    try:
        cap = int(raw)
    except ValueError:
        raise DomainError(f"TMD_SIM_THREADS must be an integer, got {raw!r}") from None
    if cap < 0:
        raise DomainError("TMD_SIM_THREADS must be >= 0")
    return auto if cap == 0 else min(cap, auto)


def _ordered_map(fn, items):
    items = list(items)
    workers = min(worker_count(), len(items))
    if workers <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _probabilities(dist):
    if isinstance(dist, ClickDistribution):
        return dist.probabilities
    return np.asarray(dist, dtype=np.float64)


def overlap(p, q):
    """Bhattacharyya coefficient sum_k sqrt(p_k q_k) of two distributions.

    Shorter vectors are zero-padded. Two ClickDistributions must share
    ``n_bins``; plain arrays are compared as-is.
    """
    if isinstance(p, ClickDistribution) and isinstance(q, ClickDistribution):
        if p.n_bins != q.n_bins:
            raise DomainError(f"cannot compare {p.n_bins}-bin and {q.n_bins}-bin statistics")
    a, b = _probabilities(p), _probabilities(q)
    size = max(a.size, b.size)
    a = np.pad(a, (0, size - a.size))
    b = np.pad(b, (0, size - b.size))
    if np.array_equal(a, b):
        return 1.0
    return float(min(np.sum(np.sqrt(a * b)), 1.0))


@dataclass(frozen=True, eq=False)
class OverlapCurve:
    abscissa: np.ndarray
    values: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        x = np.asarray(self.abscissa)
        v = np.asarray(self.values, dtype=np.float64)
        if x.shape != v.shape or x.ndim != 1:
            raise DomainError("abscissa and values must be 1-d and of equal length")
        if x.size > 1 and np.any(np.diff(x) <= 0):
            raise DomainError("abscissa must be strictly increasing")
        if np.any((v < 0) | (v > 1)):
            raise DomainError("overlap values must lie in [0, 1]")
        object.__setattr__(self, "abscissa", x)
        object.__setattr__(self, "values", v)

    def __len__(self):
        return self.values.size

    def at(self, x):
        idx = np.flatnonzero(self.abscissa == x)
        if idx.size == 0:
            raise KeyError(x)
        return float(self.values[idx[0]])


class OptimalPoint(NamedTuple):
    best_bins: int
    best_overlap: float

    @property
    def best_stages(self):
        return self.best_bins.bit_length() - 1


class SweepRow(NamedTuple):
    n: int
    best_bins: int
    best_overlap: float


class CurveWidth(NamedTuple):
    width: float
    truncated: bool


def _check_mode(mode):
    if mode not in MODES:
        raise DomainError(f"mode must be one of {MODES}, got {mode!r}")


def _check_fock(n, name):
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 0:
        raise DomainError(f"{name} must be a non-negative integer, got {n!r}")
    return int(n)


def pair_overlap(n1, n2, config, mode="combined"):
    """Overlap of the detected statistics of |n1> and |n2> for one configuration."""
    _check_mode(mode)
    s1, s2 = PhotonStatistics.fock(n1), PhotonStatistics.fock(n2)
    if mode == "loss_only":
        eta = config.eta_ex * tmd_efficiency(config)
        return overlap(surviving_statistics(s1, eta), surviving_statistics(s2, eta))
    if mode == "convolution_only":
        config = replace(config, eta_ex=1.0).ideal()
    return overlap(click_statistics(s1, config), click_statistics(s2, config))


def overlap_vs_bins(n1, n2, eta_ex=1.0, b_range=range(1, DEFAULT_B_MAX + 1),
                    mode="combined", config=None):
    """Overlap of |n1> and |n2> as a function of the stage count b.

    ``convolution_only`` drops every loss, ``loss_only`` keeps the loss
    channel of each b but counts surviving photons instead of clicks,
    ``combined`` runs the full detector model.
    """
    n1, n2 = _check_fock(n1, "n1"), _check_fock(n2, "n2")
    if n1 == n2:
        raise DomainError("n1 and n2 must differ")
    _check_mode(mode)
    stages = [int(b) for b in b_range]
    if not stages:
        raise DomainError("b_range is empty")
    base = replace(config or TmdConfig(), eta_ex=eta_ex)
    values = _ordered_map(
        lambda b: pair_overlap(n1, n2, base.with_stages(b), mode), stages)
    meta = {"n1": n1, "n2": n2, "eta_ex": float(eta_ex), "mode": mode}
    return OverlapCurve(np.array(stages), np.array(values), meta)


def optimal_bins(n1, n2, eta_ex=1.0, b_max=DEFAULT_B_MAX, config=None):
    """Bin count 2**b, b in 1..b_max, minimising the combined overlap.

    Exact ties go to the smaller b.
    """
    if not 1 <= b_max <= 20:
        raise DomainError(f"b_max must lie in [1, 20], got {b_max}")
    curve = overlap_vs_bins(n1, n2, eta_ex, range(1, b_max + 1), "combined", config)
    best = int(np.argmin(curve.values))
    return OptimalPoint(2 ** int(curve.abscissa[best]), float(curve.values[best]))


def optimal_bins_sweep(separation, n_max, eta_ex=1.0, config=None, b_max=DEFAULT_B_MAX):
    """Optimal bins for every pair (n, n + separation) with n + separation <= n_max."""
    if separation not in (1, 2, 4):
        raise DomainError(f"separation must be 1, 2 or 4, got {separation!r}")
    if n_max < separation:
        raise DomainError("n_max must be at least the separation")
    rows = []
    for n in range(n_max - separation + 1):
        point = optimal_bins(n, n + separation, eta_ex, b_max, config)
        rows.append(SweepRow(n, point.best_bins, point.best_overlap))
    return rows


def reconstruction_scan(n_center, b, delta_range=range(-10, 11), eta_ex=1.0, config=None):
    """Overlap of |n_center> with its neighbours |n_center + delta> at 2**b bins."""
    n_center = _check_fock(n_center, "n_center")
    deltas = np.array(sorted({int(d) for d in delta_range}))
    if deltas.size == 0:
        raise DomainError("delta_range is empty")
    if n_center + deltas[0] < 0:
        raise DomainError(
            f"scan reaches Fock index {n_center + deltas[0]}; narrow delta_range")
    cfg = replace(config or TmdConfig(), eta_ex=eta_ex).with_stages(b)
    centre = click_statistics(PhotonStatistics.fock(n_center), cfg)
    values = _ordered_map(
        lambda d: 1.0 if d == 0 else overlap(
            centre, click_statistics(PhotonStatistics.fock(n_center + int(d)), cfg)),
        deltas)
    meta = {"n_center": n_center, "stages": int(b), "eta_ex": float(eta_ex),
            "mode": "reconstruction"}
    return OverlapCurve(deltas, np.array(values), meta)


def asymmetry(curve):
    """max |v(d) - v(-d)| over offsets present on both sides of zero."""
    xs = set(curve.abscissa.tolist())
    diffs = [abs(curve.at(d) - curve.at(-d)) for d in xs if d > 0 and -d in xs]
    if not diffs:
        raise DomainError("curve has no mirrored offsets")
    return max(diffs)


def _crossing(x, v, peak, step, threshold):
    # walk from the peak until a sample drops below threshold; None if never
    j = peak + step
    while 0 <= j < v.size:
        if v[j] < threshold:
            inner = j - step
            frac = (v[inner] - threshold) / (v[inner] - v[j])
            return abs(x[inner] + frac * (x[j] - x[inner]) - x[peak])
        j += step
    return None


def curve_width(curve, level=0.5):
    """Width of a single-peaked curve at ``level`` times its maximum.

    Crossings are linearly interpolated between samples. If one side never
    drops below the level inside the scan, the other side's half-width is
    doubled; if neither does, the full scan extent is returned as a lower
    bound. Both cases set ``truncated``.
    """
    if not 0.0 < level < 1.0:
        raise DomainError(f"level must lie in (0, 1), got {level!r}")
    x = curve.abscissa.astype(np.float64)
    v = curve.values
    if v.size < 2:
        raise DomainError("need at least two samples")
    peak = int(np.argmax(v))
    if np.count_nonzero(v == v[peak]) > 1:
        raise DomainError("curve maximum is not unique")
    if np.any(np.diff(v[:peak + 1]) < 0) or np.any(np.diff(v[peak:]) > 0):
        raise DomainError("curve is not unimodal")
    threshold = level * v[peak]
    left = _crossing(x, v, peak, -1, threshold)
    right = _crossing(x, v, peak, +1, threshold)
    if left is not None and right is not None:
        return CurveWidth(left + right, False)
    if left is None and right is None:
        return CurveWidth(float(x[-1] - x[0]), True)
    return CurveWidth(2.0 * (left if right is None else right), True)
