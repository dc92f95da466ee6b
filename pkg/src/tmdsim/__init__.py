"""Click statistics and design limits of time-multiplexed photon-counting detectors."""

__version__ = "0.1.0"

from .core_math import DomainError, log_binomial, log_factorial, occupancy_row, occupancy_row_reference
from .model import (ClickDistribution, PhotonStatistics, TmdConfig, click_statistics,
                    fock_click_statistics, loss_matrix, tmd_efficiency)
from .dispersion import DispersionParams, dispersed_width, dispersion_map, max_bins
from .analysis import (OverlapCurve, OptimalPoint, curve_width, optimal_bins, optimal_bins_sweep,
                       overlap, overlap_vs_bins, reconstruction_scan)
from .oracle import McConfig, enumerate_click_distribution, mc_click_distribution

__all__ = [
    "DomainError", "log_binomial", "log_factorial", "occupancy_row", "occupancy_row_reference",
    "ClickDistribution", "PhotonStatistics", "TmdConfig", "click_statistics",
    "fock_click_statistics", "loss_matrix", "tmd_efficiency",
    "DispersionParams", "dispersed_width", "dispersion_map", "max_bins",
    "OverlapCurve", "OptimalPoint", "curve_width", "optimal_bins", "optimal_bins_sweep",
    "overlap", "overlap_vs_bins", "reconstruction_scan",
    "McConfig", "enumerate_click_distribution", "mc_click_distribution",
]
