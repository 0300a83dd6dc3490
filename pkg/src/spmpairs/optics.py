"""Shared domain types, physical constants and unit conversions.

Everything inside the package is SI (m, s, W, rad/s). Conversions from the
laboratory units used on the command line (nm, ps, mW, THz) happen at the
boundary, see :mod:`spmpairs.config`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

# CODATA 2018 (exact in the 2019 SI for c, h; hbar derived from exact h).
SPEED_OF_LIGHT = 299_792_458.0  # m/s
PLANCK = 6.626_070_15e-34  # J s
HBAR = PLANCK / (2.0 * math.pi)  # 1.054571817...e-34 J s

CONSTANTS = {
    "speed_of_light_m_per_s": SPEED_OF_LIGHT,
    "planck_J_s": PLANCK,
    "hbar_J_s": HBAR,
}

# Ratio between power-spectrum FWHM and its 1/e half-width for a Gaussian.
FWHM_PER_SIGMA = 2.0 * math.sqrt(math.log(2.0))


class DomainError(ValueError):
    """An argument lies outside the domain of a physical conversion."""


def _require_positive(name, value):
    if not value > 0:
        raise DomainError(f"{name} must be > 0, got {value!r}")


@dataclass(frozen=True)
class PumpPulse:
    """Transform-limited Gaussian pump, field ~ exp(-T^2 / 2 t0^2)."""

    peak_power: float  # W
    t0: float  # s, 1/e half-width of the field envelope
    center_wavelength: float  # m

    def __post_init__(self):
        if not self.peak_power >= 0:
            raise DomainError(f"peak_power must be >= 0, got {self.peak_power!r}")
        _require_positive("t0", self.t0)
        if not 1.2e-6 < self.center_wavelength < 1.7e-6:
            raise DomainError(
                f"center_wavelength {self.center_wavelength!r} m outside (1.2e-6, 1.7e-6)"
            )

    @property
    def center_omega(self) -> float:
        return wavelength_to_angular_frequency(self.center_wavelength)

    @property
    def energy(self) -> float:
        """Pulse energy in J (integral of P_p exp(-T^2/t0^2))."""
        return self.peak_power * self.t0 * math.sqrt(math.pi)

    def with_peak_power(self, peak_power: float) -> "PumpPulse":
        return PumpPulse(peak_power, self.t0, self.center_wavelength)


@dataclass(frozen=True)
class FiberSpec:
    length: float  # m
    gamma: float  # 1/(W m)
    zero_dispersion_wavelength: float = 1537e-9  # m
    beta2: float = 0.0  # s^2/m at the pump wavelength

    def __post_init__(self):
        _require_positive("length", self.length)
        if not self.gamma >= 0:
            raise DomainError(f"gamma must be >= 0, got {self.gamma!r}")

    def nonlinear_phase(self, peak_power: float) -> float:
        """Peak SPM phase gamma * P_p * L in rad."""
        return self.gamma * peak_power * self.length


@dataclass(frozen=True)
class BandFilter:
    """Gaussian band-pass filter, power transmission
    ``peak_transmission * exp(-(lambda - center)^2 / sigma^2)``."""

    center_wavelength: float  # m
    sigma: float  # m, 1/e half-width of the power transmission
    peak_transmission: float = 1.0

    def __post_init__(self):
        _require_positive("center_wavelength", self.center_wavelength)
        _require_positive("sigma", self.sigma)
        if not 0 < self.peak_transmission <= 1:
            raise DomainError(
                f"peak_transmission must be in (0, 1], got {self.peak_transmission!r}"
            )

    @property
    def center_omega(self) -> float:
        return wavelength_to_angular_frequency(self.center_wavelength)

    @property
    def sigma_omega(self) -> float:
        """1/e half-width in angular frequency, linearized about the center."""
        return bandwidth_to_angular(self.sigma, self.center_wavelength)

    def transmission(self, omega):
        """Power transmission sampled at angular frequencies ``omega``.

        The wavelength offset is mapped to frequency with the local
        derivative d(lambda) = -lambda^2/(2 pi c) d(omega) about the center.
        """
        omega = np.asarray(omega, dtype=float)
        x = (omega - self.center_omega) / self.sigma_omega
        return self.peak_transmission * np.exp(-(x * x))


@dataclass(frozen=True)
class PulseTrain:
    repetition_rate: float  # Hz
    average_power: float  # W

    def __post_init__(self):
        _require_positive("repetition_rate", self.repetition_rate)
        if not self.average_power >= 0:
            raise DomainError(f"average_power must be >= 0, got {self.average_power!r}")

    @property
    def pulse_energy(self) -> float:
        return self.average_power / self.repetition_rate


@dataclass
class SpectralField:
    """Complex spectral amplitude on a uniform angular-frequency grid.

    ``amplitude`` is in sqrt(J s) and normalized so that
    ``(1/2pi) * integral |E|^2 d(omega)`` is the pulse energy.
    """

    omega_grid: np.ndarray
    amplitude: np.ndarray
    center_omega: float
    time_grid: np.ndarray | None = field(default=None, repr=False)
    time_field: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.omega_grid = np.asarray(self.omega_grid, dtype=float)
        self.amplitude = np.asarray(self.amplitude, dtype=complex)
        n = self.omega_grid.size
        if n == 0:
            raise DomainError("empty frequency grid")
        if self.amplitude.shape != self.omega_grid.shape:
            raise DomainError("amplitude and omega_grid differ in shape")
        if n % 2:
            raise DomainError("frequency grid must have even length")
        if n > 1:
            step = np.diff(self.omega_grid)
            if np.any(step <= 0) or np.ptp(step) > 1e-9 * abs(step[0]):
                raise DomainError("frequency grid must be uniform and increasing")

    @property
    def d_omega(self) -> float:
        return float(self.omega_grid[1] - self.omega_grid[0])

    @property
    def wavelength_grid(self) -> np.ndarray:
        return angular_frequency_to_wavelength(self.omega_grid)

    @property
    def power_spectral_density(self) -> np.ndarray:
        """Energy per unit angular frequency, J/(rad/s)."""
        return np.abs(self.amplitude) ** 2 / (2.0 * math.pi)

    def energy(self) -> float:
        return float(np.trapezoid(self.power_spectral_density, self.omega_grid))

    def time_energy(self) -> float:
        if self.time_field is None:
            raise DomainError("no time-domain counterpart stored")
        return float(np.trapezoid(np.abs(self.time_field) ** 2, self.time_grid))


def wavelength_to_angular_frequency(wavelength):
    """2 pi c / lambda. Accepts scalars or arrays (all entries must be > 0)."""
    arr = np.asarray(wavelength, dtype=float)
    if not np.all(arr > 0):
        raise DomainError("wavelength must be > 0")
    out = 2.0 * math.pi * SPEED_OF_LIGHT / arr
    return float(out) if out.ndim == 0 else out


def angular_frequency_to_wavelength(omega):
    arr = np.asarray(omega, dtype=float)
    if not np.all(arr > 0):
        raise DomainError("angular frequency must be > 0")
    out = 2.0 * math.pi * SPEED_OF_LIGHT / arr
    return float(out) if out.ndim == 0 else out


def wavelength_offset_to_frequency(delta_lambda: float, center_wavelength: float) -> float:
    """Small wavelength offset to ordinary frequency offset, c * dl / l^2 (Hz)."""
    _require_positive("center_wavelength", center_wavelength)
    return SPEED_OF_LIGHT * delta_lambda / center_wavelength**2


def frequency_offset_to_wavelength(delta_nu: float, center_wavelength: float) -> float:
    _require_positive("center_wavelength", center_wavelength)
    return delta_nu * center_wavelength**2 / SPEED_OF_LIGHT


def bandwidth_to_angular(delta_lambda: float, center_wavelength: float) -> float:
    """Wavelength width to angular-frequency width, 2 pi c dl / l^2."""
    return 2.0 * math.pi * wavelength_offset_to_frequency(delta_lambda, center_wavelength)


def fwhm_to_sigma(fwhm: float) -> float:
    """Power-spectrum FWHM to 1/e half-width (any length unit)."""
    _require_positive("fwhm", fwhm)
    return fwhm / FWHM_PER_SIGMA


def sigma_to_fwhm(sigma: float) -> float:
    _require_positive("sigma", sigma)
    return sigma * FWHM_PER_SIGMA


def pump_sigma(pulse: PumpPulse) -> float:
    """1/e half-width (m) of the pump power spectrum: lambda^2 / (2 pi c t0)."""
    return pulse.center_wavelength**2 / (2.0 * math.pi * SPEED_OF_LIGHT * pulse.t0)


def t0_from_sigma(sigma: float, center_wavelength: float) -> float:
    """Inverse of :func:`pump_sigma`: field half-width t0 for a spectral 1/e half-width."""
    _require_positive("sigma", sigma)
    _require_positive("center_wavelength", center_wavelength)
    return center_wavelength**2 / (2.0 * math.pi * SPEED_OF_LIGHT * sigma)


def t0_from_fwhm(fwhm: float, center_wavelength: float) -> float:
    return t0_from_sigma(fwhm_to_sigma(fwhm), center_wavelength)


def peak_power_from_average(train: PulseTrain, t0: float) -> float:
    """Peak power of a Gaussian power profile P_p exp(-T^2/t0^2) carrying
    the train's pulse energy."""
    _require_positive("t0", t0)
    return train.pulse_energy / (t0 * math.sqrt(math.pi))


def average_power_from_peak(peak_power: float, repetition_rate: float, t0: float) -> float:
    _require_positive("repetition_rate", repetition_rate)
    _require_positive("t0", t0)
    return peak_power * t0 * math.sqrt(math.pi) * repetition_rate


def photon_energy(wavelength: float) -> float:
    return HBAR * wavelength_to_angular_frequency(wavelength)


def photons_per_pulse(train: PulseTrain, wavelength: float) -> float:
    return train.pulse_energy / photon_energy(wavelength)


def beta2_from_dispersion_slope(
    slope_ps_per_nm2_km: float, pump_wavelength: float, zero_dispersion_wavelength: float
) -> float:
    """GVD coefficient (s^2/m) at the pump from a linear dispersion slope about
    the zero-dispersion wavelength. Pump above lambda_0 gives beta2 < 0."""
    # D in ps/(nm km) == 1e-6 s/m^2
    d_ps_nm_km = slope_ps_per_nm2_km * (pump_wavelength - zero_dispersion_wavelength) * 1e9
    d_si = d_ps_nm_km * 1e-6
    return -d_si * pump_wavelength**2 / (2.0 * math.pi * SPEED_OF_LIGHT)
