"""Monte Carlo of gated photon counting for the pair source.

Each gate sees one pump pulse. Photon numbers per band are drawn with the
statistics of their origin: SFWM pairs are thermal (Bose-Einstein) and land
in both bands at once, Raman photons are thermal and independent per band,
SPM leakage is coherent (Poisson). Detection is threshold (click / no
click) with binomial thinning, dark counts and a gate-counted dead time.

Reproducibility: gates are cut into fixed-size blocks and block ``b`` of
stream ``k`` draws from ``SeedSequence(seed, spawn_key=(k, b))``. Block
boundaries do not depend on the worker count, and dead time is applied
sequentially after the merge, so the ledger is bit-identical for any
number of workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .leakage import output_spectrum, spm_band_photons
from .optics import (
    BandFilter,
    DomainError,
    FiberSpec,
    PulseTrain,
    PumpPulse,
    angular_frequency_to_wavelength,
    peak_power_from_average,
    wavelength_to_angular_frequency,
)
from .propagation import PropagationConfig

BLOCK_SIZE = 1 << 20


@dataclass(frozen=True)
class RateBreakdown:
    """Mean photon numbers per pulse in each band, before detection."""

    mu_pair: float = 0.0
    mu_raman_s: float = 0.0
    mu_raman_i: float = 0.0
    mu_spm_s: float = 0.0
    mu_spm_i: float = 0.0

    def __post_init__(self):
        for name in ("mu_pair", "mu_raman_s", "mu_raman_i", "mu_spm_s", "mu_spm_i"):
            value = getattr(self, name)
            if not (value >= 0 and math.isfinite(value)):
                raise DomainError(f"{name} must be finite and >= 0, got {value!r}")

    @property
    def mean_signal(self) -> float:
        return self.mu_pair + self.mu_raman_s + self.mu_spm_s

    @property
    def mean_idler(self) -> float:
        return self.mu_pair + self.mu_raman_i + self.mu_spm_i


@dataclass(frozen=True)
class DetectorSpec:
    efficiency: float = 0.02
    dark_prob: float = 1e-5  # per gate
    gate_rate: float = 1.29e6  # Hz
    gate_decimation: int = 32  # pump pulses per gate
    dead_time: float = 10e-6  # s

    def __post_init__(self):
        if not 0 <= self.efficiency <= 1:
            raise DomainError(f"efficiency must be in [0, 1], got {self.efficiency!r}")
        if not 0 <= self.dark_prob <= 1:
            raise DomainError(f"dark_prob must be in [0, 1], got {self.dark_prob!r}")
        if not self.gate_rate > 0:
            raise DomainError("gate_rate must be > 0")
        if self.gate_decimation < 1:
            raise DomainError("gate_decimation must be >= 1")
        if not self.dead_time >= 0:
            raise DomainError("dead_time must be >= 0")

    @property
    def dead_gates(self) -> int:
        """Gates skipped after each click."""
        # round before ceil so 10 us * 1.29 MHz = 12.9 stays 13 and exact products stay exact
        return math.ceil(round(self.dead_time * self.gate_rate, 9))


@dataclass
class GateLedger:
    n_gates: int
    signal_hits: np.ndarray
    idler_hits: np.ndarray
    rng_seed: int
    gate_decimation: int = 32

    def pulse_index(self, gate):
        return np.asarray(gate) * self.gate_decimation


@dataclass(frozen=True)
class CoincidenceStats:
    singles_s: int
    singles_i: int
    c_c: int
    c_a: int
    tar: float | None  # None when c_a == 0

    @property
    def true_coincidences(self) -> int:
        return self.c_c - self.c_a

    @property
    def tar_stderr(self) -> float | None:
        """Poisson standard error of the TAR estimate."""
        if not self.c_a or not self.c_c:
            return None
        ratio = self.c_c / self.c_a
        return ratio * math.sqrt(1.0 / self.c_c + 1.0 / self.c_a)


@dataclass(frozen=True)
class Calibration:
    """Source strengths that are not predicted from first principles.

    ``s1``: Raman photons/pulse per W of average power in each band at
    ``raman_ref_detuning``; scaled as ``(detuning/ref)**raman_detuning_exponent``.
    ``s2``: SFWM pairs/pulse per W^2.
    """

    s1: float
    s2: float
    raman_ref_detuning: float = 4.4e-9
    raman_detuning_exponent: float = 1.0

    def __post_init__(self):
        if self.s1 < 0 or self.s2 < 0:
            raise DomainError("calibration coefficients must be >= 0")
        if not self.raman_ref_detuning > 0:
            raise DomainError("raman_ref_detuning must be > 0")

    def raman_coefficient(self, detuning: float) -> float:
        return self.s1 * (detuning / self.raman_ref_detuning) ** self.raman_detuning_exponent


def _thermal(rng, mu, size):
    if mu <= 0:
        return np.zeros(size, dtype=np.int64)
    return rng.geometric(1.0 / (1.0 + mu), size) - 1


def _poisson(rng, mu, size):
    if mu <= 0:
        return np.zeros(size, dtype=np.int64)
    return rng.poisson(mu, size)


def draw_pulse_photons(rates: RateBreakdown, rng: np.random.Generator, size=None):
    """Photon numbers in the signal and idler bands for one pulse (or ``size`` pulses)."""
    n = 1 if size is None else size
    pairs = _thermal(rng, rates.mu_pair, n)
    n_s = pairs + _thermal(rng, rates.mu_raman_s, n) + _poisson(rng, rates.mu_spm_s, n)
    n_i = pairs + _thermal(rng, rates.mu_raman_i, n) + _poisson(rng, rates.mu_spm_i, n)
    if size is None:
        return int(n_s[0]), int(n_i[0])
    return n_s, n_i


def _clicks(rng, photons, det: DetectorSpec):
    if det.efficiency >= 1.0:
        hit = photons > 0
    elif det.efficiency > 0.0:
        hit = rng.binomial(photons, det.efficiency) > 0
    else:
        hit = np.zeros(photons.shape, dtype=bool)
    if det.dark_prob > 0:
        hit |= rng.random(photons.shape) < det.dark_prob
    return hit


def _simulate_block(args):
    rates, det_s, det_i, seed, stream, block, start, size = args
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(stream, block)))
    n_s, n_i = draw_pulse_photons(rates, rng, size)
    hit_s = _clicks(rng, n_s, det_s)
    hit_i = _clicks(rng, n_i, det_i)
    return np.flatnonzero(hit_s) + start, np.flatnonzero(hit_i) + start


def apply_dead_time(candidates: np.ndarray, dead_gates: int) -> np.ndarray:
    """Drop candidate clicks falling within ``dead_gates`` gates after an accepted click."""
    if dead_gates <= 0 or candidates.size == 0:
        return candidates
    keep = np.empty(candidates.size, dtype=bool)
    next_live = -1
    for k, g in enumerate(candidates.tolist()):
        if g >= next_live:
            keep[k] = True
            next_live = g + dead_gates + 1
        else:
            keep[k] = False
    return candidates[keep]


def simulate_gates(
    rates: RateBreakdown,
    det_s: DetectorSpec,
    det_i: DetectorSpec,
    n_gates: int,
    seed: int,
    workers: int = 1,
    stream: int = 0,
    block_size: int = BLOCK_SIZE,
) -> GateLedger:
    """Simulate ``n_gates`` gated detections on both arms.

    ``stream`` separates independent runs sharing one master seed (e.g.
    points of a sweep). The result does not depend on ``workers``.
    """
    if n_gates < 1:
        raise DomainError("n_gates must be >= 1")
    jobs = []
    for b, start in enumerate(range(0, n_gates, block_size)):
        size = min(block_size, n_gates - start)
        jobs.append((rates, det_s, det_i, seed, stream, b, start, size))
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_simulate_block, jobs))
    else:
        parts = [_simulate_block(job) for job in jobs]

    sig = np.concatenate([p[0] for p in parts]) if parts else np.empty(0, np.int64)
    idl = np.concatenate([p[1] for p in parts]) if parts else np.empty(0, np.int64)
    sig = apply_dead_time(sig, det_s.dead_gates)
    idl = apply_dead_time(idl, det_i.dead_gates)
    return GateLedger(n_gates, sig, idl, seed, det_s.gate_decimation)


def coincidences(ledger: GateLedger) -> CoincidenceStats:
    """Same-gate (true + accidental) and adjacent-gate (accidental) coincidences."""
    if ledger.n_gates < 2:
        raise DomainError("need at least two gates")
    s = ledger.signal_hits
    i = ledger.idler_hits
    c_c = int(np.intersect1d(s, i, assume_unique=True).size)
    c_a = int(np.intersect1d(s + 1, i, assume_unique=True).size)
    tar = (c_c - c_a) / c_a if c_a > 0 else None
    return CoincidenceStats(int(s.size), int(i.size), c_c, c_a, tar)


def g2(photons: np.ndarray) -> float:
    """Zero-delay second-order correlation <n(n-1)>/<n>^2 of a photon-number sample."""
    n = np.asarray(photons, dtype=float)
    mean = n.mean()
    if mean == 0:
        return float("nan")
    return float(np.mean(n * (n - 1.0)) / (mean * mean))


def signal_band(pump_wavelength: float, idler_wavelength: float) -> float:
    """Signal wavelength conjugate to the idler under 2 w_p = w_s + w_i."""
    w_p = wavelength_to_angular_frequency(pump_wavelength)
    w_s = 2.0 * w_p - wavelength_to_angular_frequency(idler_wavelength)
    return angular_frequency_to_wavelength(w_s)


def rates_from_physics(
    train: PulseTrain,
    t0: float,
    pump_wavelength: float,
    fiber: FiberSpec,
    filter_sigma: float,
    detuning: float,
    calibration: Calibration,
    peak_transmission: float = 1.0,
    cfg: PropagationConfig | None = None,
    split_step: bool = False,
) -> RateBreakdown:
    """Mean photon numbers per pulse for one pump arm at ``train.average_power``.

    Pairs scale as s2 P^2, Raman as s1 P, and SPM leakage is the quadrature
    of the propagated pump spectrum through each band filter. The idler band
    sits ``detuning`` above the pump wavelength, the signal band at the
    energy-conserving conjugate.
    """
    if not detuning > 0:
        raise DomainError("detuning must be > 0")
    p = train.average_power
    if p == 0:
        return RateBreakdown()
    idler = pump_wavelength + detuning
    signal = signal_band(pump_wavelength, idler)
    pulse = PumpPulse(peak_power_from_average(train, t0), t0, pump_wavelength)
    out = output_spectrum(pulse, fiber, cfg, split_step)
    raman = calibration.raman_coefficient(detuning) * p
    return RateBreakdown(
        mu_pair=calibration.s2 * p * p,
        mu_raman_s=raman,
        mu_raman_i=raman,
        mu_spm_s=spm_band_photons(out, BandFilter(signal, filter_sigma, peak_transmission)),
        mu_spm_i=spm_band_photons(out, BandFilter(idler, filter_sigma, peak_transmission)),
    )
