"""Pump-leakage arithmetic: photon numbers, SPM photons inside a filter band,
the 1e-10 rejection criterion and minimum-detuning solvers."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from .optics import (
    HBAR,
    BandFilter,
    DomainError,
    FiberSpec,
    PumpPulse,
    SpectralField,
    pump_sigma,
)
from .propagation import (
    PropagationConfig,
    broadening_factor,
    input_spectrum,
    spm_spectrum,
    split_step_propagate,
)

REJECTION_THRESHOLD = 1e-10
# sqrt(10 ln 10): exp(-x^2) = 1e-10 at x = sqrt(ln 1e10)
DETUNING_PREFACTOR = math.sqrt(10.0 * math.log(10.0))
DEFAULT_BRACKET = (0.5e-9, 20e-9)  # m
DEFAULT_TOL = 1e-12  # m


class BracketError(RuntimeError):
    def __init__(self, bracket, ratios):
        self.bracket = bracket
        self.ratios = ratios
        super().__init__(
            f"no threshold crossing in [{bracket[0] * 1e9:g}, {bracket[1] * 1e9:g}] nm: "
            f"ratios at endpoints {ratios[0]:.3e}, {ratios[1]:.3e}"
        )


@dataclass(frozen=True)
class LeakageReport:
    n_pump_photons: float
    n_spm_band: float
    rejection_ratio: float
    passes_1e_minus_10: bool


def pump_photon_number(field: SpectralField) -> float:
    """Photons per pulse in ``field``, energy / (hbar omega_p0)."""
    if field.omega_grid.size == 0:
        raise DomainError("empty grid")
    energy = np.trapezoid(np.abs(field.amplitude) ** 2, field.omega_grid) / (2.0 * math.pi)
    return float(energy / (HBAR * field.center_omega))


def spm_band_photons(field: SpectralField, band: BandFilter) -> float:
    """Photons per pulse transmitted by ``band``, counted at the filter center frequency."""
    w = field.omega_grid
    w0 = band.center_omega
    if not w[0] <= w0 <= w[-1]:
        raise DomainError(
            f"filter center {band.center_wavelength * 1e9:.4f} nm lies outside the grid"
        )
    integrand = np.abs(field.amplitude) ** 2 * band.transmission(w)
    energy = np.trapezoid(integrand, w) / (2.0 * math.pi)
    return float(energy / (HBAR * w0))


def check_rejection(
    input_field: SpectralField, output_field: SpectralField, band: BandFilter
) -> LeakageReport:
    n_p = pump_photon_number(input_field)
    n_s = spm_band_photons(output_field, band)
    ratio = n_s / n_p if n_p > 0 else 0.0
    return LeakageReport(n_p, n_s, ratio, ratio < REJECTION_THRESHOLD)


def min_detuning_closed_form(pulse: PumpPulse, fiber: FiberSpec, sigma_filter: float) -> float:
    """Gaussian-approximation minimum detuning (m),
    sqrt(10 ln 10) * sqrt(sigma_p^2 B^2 + sigma_f^2) with B the broadening factor."""
    if not sigma_filter > 0:
        raise DomainError("sigma_filter must be > 0")
    sp = pump_sigma(pulse)
    b = broadening_factor(pulse, fiber)
    return DETUNING_PREFACTOR * math.sqrt(sp * sp * b * b + sigma_filter * sigma_filter)


def output_spectrum(
    pulse: PumpPulse,
    fiber: FiberSpec,
    cfg: PropagationConfig | None = None,
    split_step: bool = False,
) -> SpectralField:
    propagate = split_step_propagate if split_step else spm_spectrum
    return propagate(pulse, fiber, cfg)


def _probe(pulse: PumpPulse, fiber: FiberSpec):
    # The leakage ratio depends on power only through gamma*P_p*L. At zero
    # power use a unit-power probe with no nonlinearity (the P_p -> 0 limit).
    if pulse.peak_power > 0:
        return pulse, fiber
    return pulse.with_peak_power(1.0), dataclasses.replace(fiber, gamma=0.0)


class _RatioCurve:
    """Leakage ratio N_S/N_p as a function of detuning for one output spectrum."""

    def __init__(self, pulse, fiber, cfg, split_step, side, peak_transmission, sigma):
        pulse, fiber = _probe(pulse, fiber)
        self.pulse = pulse
        self.side = 1.0 if side >= 0 else -1.0
        self.sigma = sigma
        self.peak_transmission = peak_transmission
        cfg = cfg or PropagationConfig()
        self.n_pump = pump_photon_number(input_spectrum(pulse, cfg))
        self.out = output_spectrum(pulse, fiber, cfg, split_step)

    def band(self, detuning: float) -> BandFilter:
        center = self.pulse.center_wavelength + self.side * detuning
        return BandFilter(center, self.sigma, self.peak_transmission)

    def __call__(self, detuning: float) -> float:
        return spm_band_photons(self.out, self.band(detuning)) / self.n_pump


def leakage_ratio(
    pulse: PumpPulse,
    fiber: FiberSpec,
    band: BandFilter,
    cfg: PropagationConfig | None = None,
    split_step: bool = False,
) -> float:
    """N_S / N_p for one filter; at zero pump power the linear limit is returned."""
    pulse, fiber = _probe(pulse, fiber)
    n_p = pump_photon_number(input_spectrum(pulse, cfg))
    return spm_band_photons(output_spectrum(pulse, fiber, cfg, split_step), band) / n_p


def min_detuning_numeric(
    pulse: PumpPulse,
    fiber: FiberSpec,
    filter_sigma: float,
    cfg: PropagationConfig | None = None,
    split_step: bool = False,
    side: int = 1,
    peak_transmission: float = 1.0,
    bracket: tuple[float, float] = DEFAULT_BRACKET,
    tol: float = DEFAULT_TOL,
) -> float:
    """Smallest detuning (m) whose band leakage ratio drops below 1e-10.

    Bisection on the quadrature of the propagated spectrum through a
    Gaussian filter. ``side=+1`` places the band on the long-wavelength
    (idler) side of the pump, ``-1`` on the short-wavelength side.
    """
    curve = _RatioCurve(pulse, fiber, cfg, split_step, side, peak_transmission, filter_sigma)
    lo, hi = bracket
    r_lo, r_hi = curve(lo), curve(hi)
    if not (r_lo >= REJECTION_THRESHOLD and r_hi < REJECTION_THRESHOLD):
        raise BracketError(bracket, (r_lo, r_hi))
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if curve(mid) < REJECTION_THRESHOLD:
            hi = mid
        else:
            lo = mid
    return hi
