"""Hot inner loops, each with a numba and a pure-numpy implementation.

The backend is picked once at import time from ``TMD_SIM_BACKEND``
(``numba`` or ``numpy``). When unset, numba is used if it imports.
Both implementations of a kernel return bit-identical results for the
same inputs; the test suite checks that.
"""
import os

import numpy as np

try:
    import numba
    HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None
    HAS_NUMBA = False


def _resolve_backend():
    requested = os.environ.get("TMD_SIM_BACKEND", "").strip().lower()
    if requested in ("", "auto"):
        return "numba" if HAS_NUMBA else "numpy"
    if requested not in ("numba", "numpy"):
        raise ValueError(
            f"TMD_SIM_BACKEND must be 'numba' or 'numpy', got {requested!r}")
    if requested == "numba" and not HAS_NUMBA:
        raise ImportError("TMD_SIM_BACKEND=numba but numba is not installed")
    return requested


BACKEND = _resolve_backend()


# --- occupancy table -------------------------------------------------------

def occupancy_table_numpy(n_max, n_bins):
    """Rows n' = 0..n_max of the click distribution for ``n_bins`` bins.

    Adds one photon at a time: it lands in an occupied bin with
    probability k/N, or in a fresh one with probability (N-k+1)/N.
    """
    k_max = min(n_max, n_bins)
    table = np.zeros((n_max + 1, k_max + 1))
    table[0, 0] = 1.0
    k = np.arange(k_max + 1, dtype=np.float64)
    stay = k / n_bins
    fresh = (n_bins - k + 1.0) / n_bins
    for n in range(n_max):
        prev = table[n]
        row = stay * prev
        row[1:] += fresh[1:] * prev[:-1]
        table[n + 1] = row
    return table


def _occupancy_table_py(n_max, n_bins):
    k_max = min(n_max, n_bins)
    table = np.zeros((n_max + 1, k_max + 1))
    table[0, 0] = 1.0
    for n in range(n_max):
        top = min(n + 1, k_max)
        for k in range(top + 1):
            val = (k / n_bins) * table[n, k]
            if k > 0:
                val += ((n_bins - k + 1.0) / n_bins) * table[n, k - 1]
            table[n + 1, k] = val
    return table


# --- occupied-bin counting for Monte-Carlo draws ----------------------------

def count_occupied_numpy(bins, survived):
    """Number of distinct bins hit by surviving photons, one value per row."""
    if bins.shape[1] == 0:
        return np.zeros(bins.shape[0], dtype=np.int64)
    masked = np.where(survived, bins, -1)
    masked.sort(axis=1)
    fresh = np.ones(masked.shape, dtype=bool)
    fresh[:, 1:] = masked[:, 1:] != masked[:, :-1]
    return np.count_nonzero(fresh & (masked >= 0), axis=1).astype(np.int64)


def _count_occupied_py(bins, survived):
    n_rows, n_photons = bins.shape
    out = np.zeros(n_rows, dtype=np.int64)
    if n_rows == 0 or n_photons == 0:
        return out
    # stamp[b] == i + 1 marks bin b as hit in row i; avoids clearing per row
    stamp = np.zeros(bins.max() + 1, dtype=np.int64)
    for i in range(n_rows):
        hits = 0
        for j in range(n_photons):
            if survived[i, j]:
                b = bins[i, j]
                if stamp[b] != i + 1:
                    stamp[b] = i + 1
                    hits += 1
        out[i] = hits
    return out


if HAS_NUMBA:
    occupancy_table_numba = numba.njit(cache=True)(_occupancy_table_py)
    count_occupied_numba = numba.njit(cache=True)(_count_occupied_py)
else:  # pragma: no cover
    occupancy_table_numba = None
    count_occupied_numba = None


def occupancy_table(n_max, n_bins):
    if BACKEND == "numba":
        return occupancy_table_numba(int(n_max), int(n_bins))
    return occupancy_table_numpy(int(n_max), int(n_bins))


def count_occupied(bins, survived):
    if BACKEND == "numba":
        return count_occupied_numba(np.ascontiguousarray(bins, dtype=np.int64),
                                    np.ascontiguousarray(survived, dtype=np.bool_))
    return count_occupied_numpy(bins, survived)
