"""Dispersion-limited bin count of a fiber time-multiplexed detector.

A transform-limited Gaussian pulse travelling through the fiber that spans
one repetition period broadens by group-velocity dispersion; the number of
bins is how many broadened pulses fit into the period, halved so that
neighbouring bins stay resolvable.

Public parameters use the customary lab units (ps, nm, ps/(nm km), Hz);
everything is converted to SI before evaluation.
"""
from dataclasses import dataclass
import math

import numpy as np

from .core_math import DomainError

C_VACUUM = 299_792_458.0  # m/s

PS = 1e-12
NM = 1e-9
# ps / (nm km) -> s / m^2
DISPERSION_UNIT = PS / (NM * 1e3)

# Relative slack when flooring the bin count, absorbs round-off at exact boundaries.
_FLOOR_SLACK = 1e-9

DEFAULT_REP_RATES = np.logspace(3, 6, 61)      # Hz
DEFAULT_PULSE_WIDTHS = np.linspace(0.1, 10.0, 100)  # ps


@dataclass(frozen=True)
class DispersionParams:
    """Pulse and fiber parameters.

    ``fiber_speed`` sets the fiber length of one period, L = fiber_speed / rep_rate.
    ``chirp_speed`` is the light speed in the lambda^2 / (2 pi c) conversion from
    the dispersion coefficient to the group-delay dispersion; it defaults to
    ``fiber_speed``. Pass :data:`C_VACUUM` for the textbook vacuum value.
    """

    tau_in: float                   # ps, FWHM
    rep_rate: float                 # Hz
    wavelength: float = 1550.0      # nm
    dispersion_coeff: float = 18.0  # ps / (nm km)
    fiber_speed: float = 2.0e8      # m/s
    chirp_speed: float | None = None

    def __post_init__(self):
        if not (math.isfinite(self.tau_in) and self.tau_in > 0):
            raise DomainError(f"tau_in must be positive, got {self.tau_in!r}")
        if not (self.rep_rate > 0):
            raise DomainError(f"rep_rate must be positive, got {self.rep_rate!r}")
        if not (self.dispersion_coeff >= 0):
            raise DomainError("dispersion_coeff must be non-negative")
        if not (self.wavelength > 0 and self.fiber_speed > 0):
            raise DomainError("wavelength and fiber_speed must be positive")
        if self.chirp_speed is not None and not self.chirp_speed > 0:
            raise DomainError("chirp_speed must be positive")

    @property
    def fiber_length(self):
        """Fiber length of one repetition period, in m."""
        return self.fiber_speed / self.rep_rate


def _width_si(tau_in, rep_rate, wavelength, dispersion_coeff, fiber_speed, chirp_speed):
    # all arguments SI; broadcasts over arrays
    length = fiber_speed / rep_rate
    gdd = wavelength ** 2 / (2.0 * np.pi * chirp_speed) * dispersion_coeff * length
    chirp = 4.0 * np.log(2.0) / tau_in ** 2 * gdd
    return tau_in * np.sqrt(1.0 + chirp ** 2)


def _si_args(params, tau_in=None, rep_rate=None):
    tau = params.tau_in if tau_in is None else tau_in
    rate = params.rep_rate if rep_rate is None else rep_rate
    chirp_speed = params.fiber_speed if params.chirp_speed is None else params.chirp_speed
    return (np.asarray(tau, dtype=float) * PS, np.asarray(rate, dtype=float),
            params.wavelength * NM, params.dispersion_coeff * DISPERSION_UNIT,
            params.fiber_speed, chirp_speed)


def dispersed_width(params):
    """FWHM of the pulse after one period of fiber, in ps."""
    return float(_width_si(*_si_args(params)) / PS)


def _bins_from_width(rep_rate, width_s):
    ratio = 1.0 / (rep_rate * width_s) / 2.0
    return np.floor(ratio * (1.0 + _FLOOR_SLACK)).astype(np.int64)


def max_bins(params):
    """Number of resolvable time bins; 0 if the period is shorter than two widths."""
    width = _width_si(*_si_args(params))
    return int(_bins_from_width(params.rep_rate, width))


def dispersion_map(rep_rates=None, pulse_widths=None, params=None):
    """Bin limit over a (rep_rate, tau_in) grid.

    Returns a structured array with fields ``rep_rate_hz``, ``tau_in_ps`` and
    ``n_max_bins``, row-major over rep_rate (outer) and tau_in (inner).
    ``params`` supplies the fiber and wavelength settings; its own tau_in and
    rep_rate are ignored.
    """
    rates = np.asarray(DEFAULT_REP_RATES if rep_rates is None else rep_rates, dtype=float).ravel()
    taus = np.asarray(DEFAULT_PULSE_WIDTHS if pulse_widths is None else pulse_widths,
                      dtype=float).ravel()
    if rates.size == 0 or taus.size == 0:
        raise DomainError("dispersion_map needs non-empty grids")
    if np.any(rates <= 0) or np.any(taus <= 0):
        raise DomainError("grid values must be positive")
    if params is None:
        params = DispersionParams(tau_in=1.0, rep_rate=1.0)
    rate_grid, tau_grid = np.meshgrid(rates, taus, indexing="ij")
    width = _width_si(*_si_args(params, tau_grid, rate_grid))
    bins = _bins_from_width(rate_grid, width)
    table = np.empty(rates.size * taus.size,
                     dtype=[("rep_rate_hz", "f8"), ("tau_in_ps", "f8"), ("n_max_bins", "i8")])
    table["rep_rate_hz"] = rate_grid.ravel()
    table["tau_in_ps"] = tau_grid.ravel()
    table["n_max_bins"] = bins.ravel()
    return table

