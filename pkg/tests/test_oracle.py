from fractions import Fraction

import numpy as np
import pytest

from tmdsim.core_math import DomainError
from tmdsim.model import TmdConfig, fock_click_statistics
from tmdsim.oracle import (McConfig, enumerate_click_counts, enumerate_click_distribution,
                           enumerate_click_fractions, mc_click_counts, mc_click_distribution,
                           total_variation)


def test_enumeration_examples():
    assert enumerate_click_fractions(2, 2) == [0, Fraction(1, 2), Fraction(1, 2)]
    assert enumerate_click_fractions(0, 5) == [1]
    # 3 + 3 (2^4 - 2) + 36 = 81
    assert enumerate_click_fractions(4, 3) == [0, Fraction(3, 81), Fraction(42, 81),
                                              Fraction(36, 81)]
    np.testing.assert_array_equal(enumerate_click_distribution(2, 2).probabilities, [0, 0.5, 0.5])


def test_enumeration_counts_sum_to_all_assignments():
    for n, n_bins in [(5, 4), (3, 10), (6, 2)]:
        assert enumerate_click_counts(n, n_bins).sum() == n_bins ** n


def test_enumeration_guard():
    with pytest.raises(DomainError):
        enumerate_click_counts(9, 8)
    enumerate_click_counts(1, 10 ** 8)


def test_mc_examples():
    dark = mc_click_distribution(McConfig(1000, 3, 7, 8, 0.0)).probabilities
    assert dark[0] == 1.0 and not dark[1:].any()
    p1 = mc_click_distribution(McConfig(10 ** 6, 11, 1, 4, 0.5)).probabilities[1]
    assert abs(p1 - 0.5) <= 0.002


def test_mc_matches_analytic_n10_n16():
    cfg = TmdConfig(stages=4, eta_ex=0.85).ideal()
    mc = mc_click_distribution(McConfig(10 ** 6, 2024, 10, 16, 0.85))
    assert total_variation(mc, fock_click_statistics(10, cfg)) <= 0.005


def test_mc_seed_determinism():
    cfg = McConfig(50_000, 99, 6, 8, 0.7)
    np.testing.assert_array_equal(mc_click_counts(cfg), mc_click_counts(cfg))
    other = McConfig(50_000, 100, 6, 8, 0.7)
    assert not np.array_equal(mc_click_counts(cfg), mc_click_counts(other))


def test_mc_workers_deterministic_and_complete():
    cfg = McConfig(100_001, 5, 4, 4, 0.9, workers=3)
    counts = mc_click_counts(cfg)
    assert counts.sum() == 100_001
    np.testing.assert_array_equal(counts, mc_click_counts(cfg))


def test_mc_error_shrinks_like_inverse_sqrt():
    exact = fock_click_statistics(8, TmdConfig(stages=3, eta_ex=0.85).ideal())
    small = [total_variation(mc_click_distribution(McConfig(10 ** 4, s, 8, 8, 0.85)), exact)
             for s in range(5)]
    large = [total_variation(mc_click_distribution(McConfig(10 ** 6, s, 8, 8, 0.85)), exact)
             for s in range(5)]
    ratio = np.mean(small) / np.mean(large)
    # ideal ratio 10 for O(1/sqrt(samples))
    assert 4 < ratio < 25


def test_mc_config_validation():
    with pytest.raises(DomainError):
        McConfig(0, 1, 1, 1, 0.5)
    with pytest.raises(DomainError):
        McConfig(10, 1, 1, 1, 1.5)


def test_total_variation():
    assert total_variation([1.0], [0.0, 1.0]) == 1.0
    assert total_variation([0.5, 0.5], [0.5, 0.5]) == 0.0
