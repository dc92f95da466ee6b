import numpy as np
import pytest

from tmdsim import kernels

needs_numba = pytest.mark.skipif(not kernels.HAS_NUMBA, reason="numba not installed")


@needs_numba
@pytest.mark.parametrize("n_max,n_bins", [(0, 1), (1, 1), (5, 2), (30, 7), (64, 1024), (200, 16)])
def test_occupancy_backends_bit_identical(n_max, n_bins):
    a = kernels.occupancy_table_numpy(n_max, n_bins)
    b = kernels.occupancy_table_numba(n_max, n_bins)
    np.testing.assert_array_equal(a, b)


@needs_numba
def test_count_occupied_backends_bit_identical():
    rng = np.random.default_rng(7)
    for n_photons, n_bins in [(0, 4), (1, 1), (5, 3), (12, 16), (20, 1024)]:
        bins = rng.integers(0, n_bins, size=(5000, n_photons))
        survived = rng.random((5000, n_photons)) < 0.6
        np.testing.assert_array_equal(kernels.count_occupied_numpy(bins, survived),
                                      kernels.count_occupied_numba(bins, survived))


def test_count_occupied_by_hand():
    bins = np.array([[0, 0, 1], [2, 2, 2], [0, 1, 2], [3, 1, 3]])
    survived = np.array([[True, True, True], [False, False, False],
                         [True, False, True], [True, True, False]])
    np.testing.assert_array_equal(kernels.count_occupied_numpy(bins, survived), [2, 0, 2, 2])
    np.testing.assert_array_equal(kernels.count_occupied(bins, survived), [2, 0, 2, 2])


def test_backend_env_flag(monkeypatch):
    monkeypatch.setenv("TMD_SIM_BACKEND", "numpy")
    assert kernels._resolve_backend() == "numpy"
    monkeypatch.setenv("TMD_SIM_BACKEND", "fortran")
    with pytest.raises(ValueError):
        kernels._resolve_backend()
    monkeypatch.delenv("TMD_SIM_BACKEND")
    assert kernels._resolve_backend() == ("numba" if kernels.HAS_NUMBA else "numpy")
