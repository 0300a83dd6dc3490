import math

import numpy as np
import pytest

from spmpairs.counting import (
    Calibration,
    DetectorSpec,
    GateLedger,
    RateBreakdown,
    apply_dead_time,
    coincidences,
    draw_pulse_photons,
    g2,
    rates_from_physics,
    signal_band,
    simulate_gates,
)
from spmpairs.optics import DomainError, FiberSpec, PulseTrain, t0_from_fwhm, wavelength_to_angular_frequency

IDEAL = DetectorSpec(1.0, 0.0, dead_time=0.0)


def rng(seed=0):
    return np.random.default_rng(seed)


def batch_ratio(x, n_batches=100):
    """var/mean and its standard error from independent batches."""
    parts = np.array_split(x, n_batches)
    r = np.array([p.var(ddof=1) / p.mean() for p in parts])
    return x.var(ddof=1) / x.mean(), r.std(ddof=1) / math.sqrt(n_batches)


def test_zero_rates_give_no_photons():
    assert draw_pulse_photons(RateBreakdown(), rng()) == (0, 0)
    s, i = draw_pulse_photons(RateBreakdown(), rng(), 1000)
    assert not s.any() and not i.any()


def test_pairs_are_identical_in_both_bands():
    s, i = draw_pulse_photons(RateBreakdown(mu_pair=0.1), rng(1), 10**6)
    assert np.array_equal(s, i)
    se = math.sqrt(0.1 * 1.1 / s.size)
    assert abs(s.mean() - 0.1) < 3 * se


def test_spm_is_poissonian():
    s, _ = draw_pulse_photons(RateBreakdown(mu_spm_s=0.2), rng(2), 10**6)
    ratio, se = batch_ratio(s)
    assert abs(ratio - 1.0) < 3 * se


def test_raman_is_thermal():
    mu = 0.2
    _, i = draw_pulse_photons(RateBreakdown(mu_raman_i=mu), rng(3), 10**6)
    ratio, se = batch_ratio(i)
    assert abs(ratio - (1 + mu)) < 3 * se


def test_bands_independent_without_pairs():
    s, i = draw_pulse_photons(RateBreakdown(mu_raman_s=0.3, mu_spm_i=0.3), rng(4), 10**6)
    assert abs(np.corrcoef(s, i)[0, 1]) < 5e-3


def test_g2_estimator():
    assert g2(np.array([1, 1, 1, 1])) == 0.0
    assert g2(np.array([0, 0, 0, 2])) == pytest.approx(2.0)
    assert math.isnan(g2(np.zeros(5)))


def test_negative_rates_rejected():
    with pytest.raises(DomainError):
        RateBreakdown(mu_pair=-0.1)


def test_dead_gates_default():
    assert DetectorSpec().dead_gates == 13
    assert DetectorSpec(gate_rate=1e6, dead_time=10e-6).dead_gates == 10
    assert DetectorSpec(dead_time=0.0).dead_gates == 0


def test_apply_dead_time():
    c = np.array([0, 1, 2, 13, 14, 15, 30])
    np.testing.assert_array_equal(apply_dead_time(c, 13), [0, 14, 30])
    np.testing.assert_array_equal(apply_dead_time(c, 0), c)


def test_no_efficiency_no_dark_gives_empty_ledger():
    det = DetectorSpec(0.0, 0.0)
    ledger = simulate_gates(RateBreakdown(mu_pair=0.5, mu_spm_s=1.0), det, det, 10**5, seed=1)
    assert ledger.signal_hits.size == 0 and ledger.idler_hits.size == 0


def test_singles_follow_thinned_thermal():
    mu, eta, n = 0.1, 0.02, 10**7
    det = DetectorSpec(eta, 0.0, dead_time=0.0)
    ledger = simulate_gates(RateBreakdown(mu_pair=mu), det, det, n, seed=7)
    # 1 - E[(1-eta)^n] for Bose-Einstein n
    p = mu * eta / (1 + mu * eta)
    se = math.sqrt(p * (1 - p) / n)
    for hits in (ledger.signal_hits, ledger.idler_hits):
        assert abs(hits.size / n - p) < 3 * se
    assert hits.size / n == pytest.approx(0.002, rel=0.05)


def test_dark_counts_only():
    det = DetectorSpec(1.0, 1e-3, dead_time=0.0)
    ledger = simulate_gates(RateBreakdown(), det, det, 10**6, seed=3)
    se = math.sqrt(1e-3 / 10**6)
    assert abs(ledger.signal_hits.size / 10**6 - 1e-3) < 3 * se


def test_hits_are_sorted_and_in_range():
    ledger = simulate_gates(RateBreakdown(mu_pair=0.05), IDEAL, IDEAL, 3 * 10**5, seed=5, block_size=1 << 16)
    for h in (ledger.signal_hits, ledger.idler_hits):
        assert np.all(np.diff(h) > 0)
        assert h.min() >= 0 and h.max() < ledger.n_gates


def test_determinism_across_workers():
    rates = RateBreakdown(mu_pair=0.05, mu_raman_s=0.01, mu_spm_i=0.02)
    det = DetectorSpec()
    a = simulate_gates(rates, det, det, 5 * 10**5, seed=11, workers=1, block_size=1 << 16)
    b = simulate_gates(rates, det, det, 5 * 10**5, seed=11, workers=3, block_size=1 << 16)
    c = simulate_gates(rates, det, det, 5 * 10**5, seed=12, workers=1, block_size=1 << 16)
    assert np.array_equal(a.signal_hits, b.signal_hits)
    assert np.array_equal(a.idler_hits, b.idler_hits)
    assert not np.array_equal(a.signal_hits, c.signal_hits)


def test_streams_are_independent():
    rates = RateBreakdown(mu_pair=0.05)
    a = simulate_gates(rates, IDEAL, IDEAL, 10**5, seed=1, stream=0)
    b = simulate_gates(rates, IDEAL, IDEAL, 10**5, seed=1, stream=1)
    assert not np.array_equal(a.signal_hits, b.signal_hits)


def test_dead_time_monotone():
    rates = RateBreakdown(mu_pair=0.05, mu_spm_s=0.05)
    singles = []
    for dead in (0.0, 1e-6, 5e-6, 10e-6, 50e-6):
        det = DetectorSpec(0.5, 1e-4, dead_time=dead)
        ledger = simulate_gates(rates, det, det, 10**6, seed=21)
        singles.append(ledger.signal_hits.size)
    assert all(a >= b for a, b in zip(singles, singles[1:]))
    assert singles[-1] < singles[0]


def test_coincidences_every_gate():
    g = np.arange(1000)
    st = coincidences(GateLedger(1000, g, g.copy(), 0))
    assert (st.c_c, st.c_a) == (1000, 999)
    assert st.tar == pytest.approx(1 / 999)


def test_tar_undefined_without_accidentals():
    st = coincidences(GateLedger(10, np.array([2, 5]), np.array([2, 5]), 0))
    assert st.c_c == 2 and st.c_a == 0
    assert st.tar is None and st.tar_stderr is None


def test_coincidences_need_two_gates():
    with pytest.raises(DomainError):
        coincidences(GateLedger(1, np.array([0]), np.array([0]), 0))


def test_adjacent_gate_definition():
    # signal at g, idler at g+1 is accidental; the reverse order is not
    st = coincidences(GateLedger(10, np.array([3, 7]), np.array([4, 6]), 0))
    assert (st.c_c, st.c_a) == (0, 1)


def test_pure_sfwm_tar():
    ledger = simulate_gates(RateBreakdown(mu_pair=0.01), IDEAL, IDEAL, 10**7, seed=99)
    st = coincidences(ledger)
    assert st.tar == pytest.approx(100.0, rel=0.10)


def test_spm_lowers_tar():
    base = coincidences(simulate_gates(RateBreakdown(mu_pair=0.01), IDEAL, IDEAL, 4 * 10**6, seed=5))
    noisy = coincidences(simulate_gates(
        RateBreakdown(mu_pair=0.01, mu_spm_s=0.01, mu_spm_i=0.01), IDEAL, IDEAL, 4 * 10**6, seed=5
    ))
    assert noisy.tar + 3 * noisy.tar_stderr < base.tar - 3 * base.tar_stderr


def test_pulse_index():
    ledger = GateLedger(10, np.array([1]), np.array([2]), 0, gate_decimation=32)
    np.testing.assert_array_equal(ledger.pulse_index([0, 1, 3]), [0, 32, 96])


def test_signal_band_is_energy_conjugate():
    lam_s = signal_band(1538e-9, 1542.4e-9)
    w = wavelength_to_angular_frequency
    assert w(lam_s) + w(1542.4e-9) == pytest.approx(2 * w(1538e-9), rel=1e-15)
    assert lam_s < 1538e-9


def test_calibration():
    cal = Calibration(80.0, 1.6e6, raman_ref_detuning=4.4e-9)
    assert cal.raman_coefficient(4.4e-9) == 80.0
    assert cal.raman_coefficient(5.6e-9) == pytest.approx(80.0 * 5.6 / 4.4)
    with pytest.raises(DomainError):
        Calibration(-1.0, 0.0)


def _rates(p):
    return rates_from_physics(
        PulseTrain(41e6, p), t0_from_fwhm(0.95e-9, 1538e-9), 1538e-9, FiberSpec(300, 0.7e-3),
        0.65e-9 / (2 * math.sqrt(math.log(2))), 4.4e-9, Calibration(80.0, 1.6e6),
    )


def test_rates_from_physics_scaling():
    assert _rates(0.0) == RateBreakdown()
    r1, r2 = _rates(0.1e-3), _rates(0.2e-3)
    assert r2.mu_pair == pytest.approx(4 * r1.mu_pair, rel=1e-14)
    assert r2.mu_raman_i == pytest.approx(2 * r1.mu_raman_i, rel=1e-14)
    assert r2.mu_spm_i > 2 * r1.mu_spm_i
    # 0.1 pairs per pulse near 0.25 mW
    assert _rates(0.25e-3).mu_pair == pytest.approx(0.1)


def test_rates_from_physics_rejects_zero_detuning():
    with pytest.raises(DomainError):
        rates_from_physics(
            PulseTrain(41e6, 1e-4), 2.2e-12, 1538e-9, FiberSpec(300, 2e-3), 2.8e-10, 0.0, Calibration(0, 0)
        )
