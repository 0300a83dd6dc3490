import math

import numpy as np
import pytest
import scipy.constants as sc
from hypothesis import given, strategies as st

from spmpairs.optics import (
    HBAR,
    PLANCK,
    SPEED_OF_LIGHT,
    BandFilter,
    DomainError,
    FiberSpec,
    PulseTrain,
    PumpPulse,
    SpectralField,
    angular_frequency_to_wavelength,
    average_power_from_peak,
    bandwidth_to_angular,
    beta2_from_dispersion_slope,
    frequency_offset_to_wavelength,
    fwhm_to_sigma,
    peak_power_from_average,
    photons_per_pulse,
    pump_sigma,
    sigma_to_fwhm,
    t0_from_fwhm,
    t0_from_sigma,
    wavelength_offset_to_frequency,
    wavelength_to_angular_frequency,
)


def test_constants_match_codata():
    assert SPEED_OF_LIGHT == sc.c
    assert PLANCK == sc.h
    assert HBAR == pytest.approx(sc.hbar, rel=1e-15)


def test_pump_angular_frequency():
    # 2 pi c / 1538 nm, evaluated independently
    assert wavelength_to_angular_frequency(1538e-9) == pytest.approx(1.2247409410330645e15, rel=1e-14)


def test_detuning_to_frequency():
    assert wavelength_offset_to_frequency(3.2e-9, 1538e-9) == pytest.approx(4.055627043379594e11, rel=1e-12)


@given(st.floats(1.0e-6, 2.0e-6))
def test_wavelength_round_trip(lam):
    back = angular_frequency_to_wavelength(wavelength_to_angular_frequency(lam))
    assert back == pytest.approx(lam, rel=1e-14)


@given(st.floats(-20e-9, 20e-9), st.floats(1.3e-6, 1.6e-6))
def test_offset_round_trip(dl, lam):
    nu = wavelength_offset_to_frequency(dl, lam)
    assert frequency_offset_to_wavelength(nu, lam) == pytest.approx(dl, rel=1e-13, abs=1e-30)


def test_array_conversion():
    lam = np.array([1.5e-6, 1.55e-6])
    w = wavelength_to_angular_frequency(lam)
    assert w.shape == (2,)
    np.testing.assert_allclose(angular_frequency_to_wavelength(w), lam, rtol=1e-15)


@pytest.mark.parametrize("bad", [0.0, -1e-6])
def test_nonpositive_wavelength_rejected(bad):
    with pytest.raises(DomainError):
        wavelength_to_angular_frequency(bad)


def test_fwhm_sigma():
    assert fwhm_to_sigma(0.95) == pytest.approx(0.5705331441735637, rel=1e-14)
    assert fwhm_to_sigma(0.65) == pytest.approx(0.3903647828555962, rel=1e-14)
    assert sigma_to_fwhm(fwhm_to_sigma(0.8)) == pytest.approx(0.8, rel=1e-15)
    with pytest.raises(DomainError):
        fwhm_to_sigma(0.0)


def test_pump_sigma_from_t0():
    pulse = PumpPulse(1.0, 2.2e-12, 1538e-9)
    assert pump_sigma(pulse) == pytest.approx(5.708071688215375e-10, rel=1e-12)


def test_t0_inverse():
    t0 = t0_from_fwhm(0.95e-9, 1538e-9)
    assert t0 == pytest.approx(2.20106e-12, rel=1e-5)
    pulse = PumpPulse(1.0, t0, 1538e-9)
    assert pump_sigma(pulse) == pytest.approx(fwhm_to_sigma(0.95e-9), rel=1e-14)
    assert t0_from_sigma(pump_sigma(pulse), 1538e-9) == pytest.approx(t0, rel=1e-14)


def test_peak_power_from_average():
    train = PulseTrain(41e6, 190e-6)
    assert peak_power_from_average(train, 2.2e-12) == pytest.approx(1.1884259520407285, rel=1e-12)


@given(st.floats(1e-6, 1e-2), st.floats(1e-12, 1e-11))
def test_peak_average_round_trip(p_ave, t0):
    p_pk = peak_power_from_average(PulseTrain(41e6, p_ave), t0)
    assert average_power_from_peak(p_pk, 41e6, t0) == pytest.approx(p_ave, rel=1e-13)


def test_pulse_energy_consistency():
    pulse = PumpPulse(1.1884259520407285, 2.2e-12, 1538e-9)
    assert pulse.energy == pytest.approx(190e-6 / 41e6, rel=1e-12)


def test_photons_per_pulse():
    assert photons_per_pulse(PulseTrain(41e6, 0.1e-3), 1538e-9) == pytest.approx(1.8884076294830944e7, rel=1e-12)
    # about 1.9e7 photons in a 2.44 pJ pulse
    n = 2.44e-12 / (HBAR * wavelength_to_angular_frequency(1538e-9))
    assert n == pytest.approx(1.889e7, rel=1e-3)


def test_pump_wavelength_domain():
    with pytest.raises(DomainError):
        PumpPulse(1.0, 2e-12, 1.0e-6)
    with pytest.raises(DomainError):
        PumpPulse(-1.0, 2e-12, 1538e-9)
    with pytest.raises(DomainError):
        PumpPulse(1.0, 0.0, 1538e-9)


def test_fiber_nonlinear_phase():
    f = FiberSpec(300.0, 2e-3)
    assert f.nonlinear_phase(1.19) == pytest.approx(0.714, rel=1e-12)
    with pytest.raises(DomainError):
        FiberSpec(-1.0, 2e-3)


def test_filter_transmission():
    band = BandFilter(1542.4e-9, fwhm_to_sigma(0.65e-9), 0.8)
    w0 = band.center_omega
    assert band.transmission(w0) == pytest.approx(0.8)
    assert band.sigma_omega == pytest.approx(bandwidth_to_angular(band.sigma, 1542.4e-9))
    assert band.transmission(w0 + band.sigma_omega) == pytest.approx(0.8 / math.e)
    # half maximum at half the FWHM in angular units
    half = 0.5 * bandwidth_to_angular(0.65e-9, 1542.4e-9)
    assert band.transmission(w0 - half) == pytest.approx(0.4, rel=1e-12)
    with pytest.raises(DomainError):
        BandFilter(1542.4e-9, 1e-9, 1.5)


def test_beta2_from_slope():
    # D = 0.07 ps/(nm^2 km) * 1 nm = 0.07 ps/(nm km); beta2 = -D lambda^2 / (2 pi c)
    expected = -0.07e-6 * 1538e-9**2 / (2 * math.pi * sc.c)
    assert beta2_from_dispersion_slope(0.07, 1538e-9, 1537e-9) == pytest.approx(expected, rel=1e-12)
    assert beta2_from_dispersion_slope(0.07, 1536e-9, 1537e-9) > 0


def test_spectral_field_validation():
    w = np.linspace(1.0, 2.0, 8)
    SpectralField(w, np.zeros(8, complex), 1.5)
    with pytest.raises(DomainError):
        SpectralField(np.linspace(1.0, 2.0, 7), np.zeros(7, complex), 1.5)
    with pytest.raises(DomainError):
        SpectralField(w[::-1].copy(), np.zeros(8, complex), 1.5)
    with pytest.raises(DomainError):
        SpectralField(np.array([]), np.array([], complex), 1.5)
