"""Pump propagation through the fiber.

Two routes to the output spectrum are provided:

* :func:`spm_spectrum` applies the closed-form SPM phase
  ``gamma * P_p * L * exp(-T^2/t0^2)`` to the input envelope and Fourier
  transforms it (no dispersion).
* :func:`split_step_propagate` integrates the NLSE with GVD by the
  symmetric split-step Fourier method.

Fourier convention: ``E(omega) = integral a(T) exp(+i (omega - omega_p0) T) dT``
so that ``(1/2pi) integral |E|^2 d(omega) = integral |a|^2 dT``. The NLSE is
``dA/dz = -i (beta2/2) d2A/dT2 + i gamma |A|^2 A``, which is the sign pairing
that reproduces the exp(+i gamma P z) SPM phase of the closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .optics import DomainError, FiberSpec, PumpPulse, SpectralField

MAX_STEP_PHASE = 0.05  # rad, hard upper bound on per-step nonlinear phase
EDGE_FRACTION = 0.05
EDGE_ENERGY_TOL = 1e-8


class GridError(RuntimeError):
    """The sampling grid cannot represent the field (aliasing / truncation)."""


class ConfigurationError(ValueError):
    """Propagation settings violate a precondition."""


@dataclass(frozen=True)
class PropagationConfig:
    n_points: int = 2**14
    time_window: float = 0.0  # s, total span; 0 means window_t0 * t0 of the pulse
    n_steps: int = 0  # 0 means choose from the nonlinear phase
    window_t0: float = 64.0

    def __post_init__(self):
        n = self.n_points
        if n < 2**12 or n & (n - 1):
            raise ConfigurationError(f"n_points must be a power of two >= 4096, got {n}")
        if self.time_window < 0:
            raise ConfigurationError("time_window must be >= 0")
        if self.n_steps < 0:
            raise ConfigurationError("n_steps must be >= 0")
        if not self.window_t0 > 0:
            raise ConfigurationError("window_t0 must be > 0")

    def window_for(self, pulse: PumpPulse) -> float:
        return self.time_window if self.time_window > 0 else self.window_t0 * pulse.t0

    def steps_for(self, pulse: PumpPulse, fiber: FiberSpec, step_phase: float = 0.01) -> int:
        if self.n_steps:
            return self.n_steps
        phi = fiber.nonlinear_phase(pulse.peak_power)
        return max(1, math.ceil(phi / step_phase))

    def validate(self, pulse: PumpPulse, fiber: FiberSpec | None = None) -> None:
        window = self.window_for(pulse)
        if window < 16.0 * pulse.t0:
            raise ConfigurationError(
                f"time_window {window:.3e} s shorter than 16 t0 ({16 * pulse.t0:.3e} s)"
            )
        half_span = math.pi * self.n_points / window
        factor = broadening_factor(pulse, fiber) if fiber is not None else 1.0
        if half_span < 4.0 * factor / pulse.t0:
            raise ConfigurationError(
                "frequency grid half-span below 4x the broadened spectral half-width"
            )


def time_grid(n_points: int, window: float) -> np.ndarray:
    dt = window / n_points
    return (np.arange(n_points) - n_points // 2) * dt


def _offsets(t: np.ndarray) -> np.ndarray:
    """Angular-frequency offsets in FFT order for the time grid ``t``."""
    dt = t[1] - t[0]
    return 2.0 * math.pi * np.fft.fftfreq(t.size, dt)


def to_spectrum(a: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Continuous-FT approximation of ``a(t)``; result in FFT order."""
    dt = t[1] - t[0]
    dw = _offsets(t)
    return t.size * dt * np.exp(1j * dw * t[0]) * np.fft.ifft(a)


def to_time(spec: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Inverse of :func:`to_spectrum`."""
    dt = t[1] - t[0]
    dw = _offsets(t)
    return np.fft.fft(spec * np.exp(-1j * dw * t[0])) / (t.size * dt)


def input_envelope(pulse: PumpPulse, t: np.ndarray) -> np.ndarray:
    """sqrt(P_p) exp(-T^2 / 2 t0^2), in sqrt(W)."""
    return math.sqrt(pulse.peak_power) * np.exp(-(t * t) / (2.0 * pulse.t0**2))


def _field_from_time(a: np.ndarray, t: np.ndarray, center_omega: float) -> SpectralField:
    spec = np.fft.fftshift(to_spectrum(a, t))
    omega = center_omega + np.fft.fftshift(_offsets(t))
    return SpectralField(omega, spec, center_omega, time_grid=t, time_field=a)


def _check_edges(field: SpectralField) -> None:
    psd = np.abs(field.amplitude) ** 2
    total = psd.sum()
    if total == 0:
        return
    m = max(1, int(EDGE_FRACTION * psd.size))
    edge = psd[:m].sum() + psd[-m:].sum()
    if edge > EDGE_ENERGY_TOL * total:
        raise GridError(
            f"{edge / total:.2e} of spectral energy in the outer grid; increase n_points"
        )
    a2 = np.abs(field.time_field) ** 2
    edge_t = a2[:m].sum() + a2[-m:].sum()
    if edge_t > EDGE_ENERGY_TOL * a2.sum():
        raise GridError(
            f"{edge_t / a2.sum():.2e} of pulse energy at the time-window edges; widen time_window"
        )


def input_spectrum(pulse: PumpPulse, cfg: PropagationConfig | None = None) -> SpectralField:
    """Spectrum of the launched (transform-limited) pump, E(0, omega)."""
    cfg = cfg or PropagationConfig()
    cfg.validate(pulse)
    t = time_grid(cfg.n_points, cfg.window_for(pulse))
    field = _field_from_time(input_envelope(pulse, t), t, pulse.center_omega)
    _check_edges(field)
    return field


def spm_spectrum(
    pulse: PumpPulse, fiber: FiberSpec, cfg: PropagationConfig | None = None
) -> SpectralField:
    """Output spectrum E(L, omega) under SPM alone (``fiber.beta2`` is ignored)."""
    cfg = cfg or PropagationConfig()
    cfg.validate(pulse, fiber)
    t = time_grid(cfg.n_points, cfg.window_for(pulse))
    a0 = input_envelope(pulse, t)
    phi = fiber.nonlinear_phase(pulse.peak_power)
    a = a0 * np.exp(1j * phi * np.exp(-(t * t) / pulse.t0**2))
    field = _field_from_time(a, t, pulse.center_omega)
    _check_edges(field)
    return field


def split_step_propagate(
    pulse: PumpPulse, fiber: FiberSpec, cfg: PropagationConfig | None = None
) -> SpectralField:
    """Symmetric split-step integration of the NLSE over the fiber length."""
    cfg = cfg or PropagationConfig()
    cfg.validate(pulse, fiber)
    n_steps = cfg.steps_for(pulse, fiber)
    h = fiber.length / n_steps
    if fiber.gamma * pulse.peak_power * h >= MAX_STEP_PHASE:
        raise ConfigurationError(
            f"nonlinear phase per step {fiber.gamma * pulse.peak_power * h:.3g} rad "
            f">= {MAX_STEP_PHASE}; use more steps"
        )
    t = time_grid(cfg.n_points, cfg.window_for(pulse))
    dw = _offsets(t)
    half = np.exp(0.25j * fiber.beta2 * dw * dw * h)
    full = half * half
    a = input_envelope(pulse, t).astype(complex)

    linear = fiber.beta2 != 0.0
    if linear:
        a = np.fft.fft(np.fft.ifft(a) * half)
    for step in range(n_steps):
        a *= np.exp(1j * fiber.gamma * h * (a.real**2 + a.imag**2))
        if linear:
            op = half if step == n_steps - 1 else full
            a = np.fft.fft(np.fft.ifft(a) * op)

    field = _field_from_time(a, t, pulse.center_omega)
    _check_edges(field)
    return field


def broadening_factor(pulse: PumpPulse, fiber: FiberSpec) -> float:
    """Approximate SPM spectral broadening of a Gaussian without GVD,
    sqrt(1 + (0.88 gamma P_p L)^2)."""
    x = 0.88 * fiber.nonlinear_phase(pulse.peak_power)
    return math.sqrt(1.0 + x * x)


def rms_spectral_width(field: SpectralField) -> float:
    """Second-moment (rms) angular-frequency width of |E|^2."""
    w = field.power_spectral_density
    norm = np.trapezoid(w, field.omega_grid)
    if not norm > 0:
        raise DomainError("field carries no energy")
    dw = field.omega_grid - field.center_omega
    mean = np.trapezoid(w * dw, field.omega_grid) / norm
    var = np.trapezoid(w * (dw - mean) ** 2, field.omega_grid) / norm
    return math.sqrt(var)


def spectral_half_width(field: SpectralField) -> float:
    """1/e half-width of the power spectrum of a Gaussian with the same rms width."""
    return math.sqrt(2.0) * rms_spectral_width(field)
