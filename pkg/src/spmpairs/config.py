"""Run configuration: sectioned key/value text with unit-suffixed keys.

Example::

    [pump]
    wavelength_nm = 1538
    fwhm_nm = 0.95
    avg_power_mW = 0.19

    [fiber]
    gamma_per_W_km = 2.0

Keys are addressed as ``section.key``. Every physical quantity carries its
unit in the key name and is converted to SI here, nowhere else.
"""

from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass
from pathlib import Path

from .analysis import Scenario
from .counting import Calibration, DetectorSpec, RateBreakdown
from .optics import DomainError, FiberSpec, beta2_from_dispersion_slope
from .propagation import ConfigurationError, PropagationConfig


class ConfigError(ValueError):
    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("invalid configuration:\n" + "\n".join(f"  {e}" for e in self.errors))


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _floats(text: str) -> tuple[float, ...]:
    items = [t for t in (s.strip() for s in text.split(",")) if t]
    if not items:
        raise ValueError("empty list")
    return tuple(float(t) for t in items)


def _side(text: str) -> str:
    if text.strip() not in ("idler", "signal"):
        raise ValueError("must be 'idler' or 'signal'")
    return text.strip()


# key -> (parser, default). None default means "unset".
SCHEMA = {
    "pump.wavelength_nm": (float, 1538.0),
    "pump.fwhm_nm": (float, 0.95),
    "pump.repetition_rate_MHz": (float, 41.0),
    "pump.avg_power_mW": (float, 0.19),
    "fiber.length_m": (float, 300.0),
    "fiber.gamma_per_W_km": (float, 2.0),
    "fiber.zero_dispersion_nm": (float, 1537.0),
    "fiber.dispersion_slope_ps_per_nm2_km": (float, 0.07),
    "fiber.beta2_ps2_per_km": (float, None),
    "filter.fwhm_nm": (float, 0.65),
    "filter.peak_transmission": (float, 1.0),
    "filter.detuning_nm": (float, 4.4),
    "filter.side": (_side, "idler"),
    "detector.efficiency": (float, 0.02),
    "detector.dark_prob": (float, 1e-5),
    "detector.gate_rate_MHz": (float, 1.29),
    "detector.gate_decimation": (int, 32),
    "detector.dead_time_us": (float, 10.0),
    "calibration.s1_per_mW": (float, 0.08),
    "calibration.s2_per_mW2": (float, 1.6),
    "calibration.raman_ref_detuning_nm": (float, 4.4),
    "calibration.raman_detuning_exponent": (float, 1.0),
    "propagation.n_points": (int, 2**14),
    "propagation.window_t0": (float, 64.0),
    "propagation.n_steps": (int, 0),
    "propagation.split_step": (_bool, False),
    "sweep.power_min_mW": (float, 0.0),
    "sweep.power_max_mW": (float, 0.35),
    "sweep.n_points": (int, 36),
    "sweep.pump_fwhms_nm": (_floats, (0.95, 0.65)),
    "rates.mu_pair": (float, None),
    "rates.mu_raman_s": (float, None),
    "rates.mu_raman_i": (float, None),
    "rates.mu_spm_s": (float, None),
    "rates.mu_spm_i": (float, None),
    "run.seed": (int, 12345),
    "run.n_gates": (int, 10**7),
    "run.workers": (int, 1),
    "run.powers_mW": (_floats, (0.04, 0.08, 0.12, 0.16, 0.2, 0.24)),
    "run.detunings_nm": (_floats, (4.4, 5.6)),
}


@dataclass(frozen=True)
class RunConfig:
    values: dict  # key path -> typed value (defaults filled in)
    explicit: frozenset  # keys present in the source text

    def __getitem__(self, key):
        return self.values[key]

    def is_set(self, key) -> bool:
        return self.values.get(key) is not None

    def with_overrides(self, **overrides) -> "RunConfig":
        values = dict(self.values)
        for key, value in overrides.items():
            values[key.replace("__", ".")] = value
        return dataclasses.replace(self, values=values)

    # typed views -------------------------------------------------------

    def fiber(self) -> FiberSpec:
        v = self.values
        lp = v["pump.wavelength_nm"] / 1e9
        l0 = v["fiber.zero_dispersion_nm"] / 1e9
        if v["fiber.beta2_ps2_per_km"] is not None:
            beta2 = v["fiber.beta2_ps2_per_km"] * 1e-27
        else:
            beta2 = beta2_from_dispersion_slope(v["fiber.dispersion_slope_ps_per_nm2_km"], lp, l0)
        return FiberSpec(v["fiber.length_m"], v["fiber.gamma_per_W_km"] / 1e3, l0, beta2)

    def detector(self) -> DetectorSpec:
        v = self.values
        return DetectorSpec(
            efficiency=v["detector.efficiency"],
            dark_prob=v["detector.dark_prob"],
            gate_rate=v["detector.gate_rate_MHz"] * 1e6,
            gate_decimation=v["detector.gate_decimation"],
            dead_time=v["detector.dead_time_us"] / 1e6,
        )

    def calibration(self) -> Calibration:
        v = self.values
        return Calibration(
            s1=v["calibration.s1_per_mW"] * 1e3,
            s2=v["calibration.s2_per_mW2"] * 1e6,
            raman_ref_detuning=v["calibration.raman_ref_detuning_nm"] / 1e9,
            raman_detuning_exponent=v["calibration.raman_detuning_exponent"],
        )

    def propagation(self) -> PropagationConfig:
        v = self.values
        return PropagationConfig(
            n_points=v["propagation.n_points"],
            n_steps=v["propagation.n_steps"],
            window_t0=v["propagation.window_t0"],
        )

    def scenario(self) -> Scenario:
        v = self.values
        det = self.detector()
        return Scenario(
            pump_wavelength=v["pump.wavelength_nm"] / 1e9,
            pump_fwhm=v["pump.fwhm_nm"] / 1e9,
            repetition_rate=v["pump.repetition_rate_MHz"] * 1e6,
            fiber=self.fiber(),
            filter_fwhm=v["filter.fwhm_nm"] / 1e9,
            peak_transmission=v["filter.peak_transmission"],
            calibration=self.calibration(),
            detector_s=det,
            detector_i=det,
            propagation=self.propagation(),
            split_step=v["propagation.split_step"],
        )

    def explicit_rates(self) -> RateBreakdown | None:
        keys = [k for k in SCHEMA if k.startswith("rates.")]
        if not any(self.values[k] is not None for k in keys):
            return None
        return RateBreakdown(**{k.split(".", 1)[1]: self.values[k] or 0.0 for k in keys})


def parse_config(text: str, require_nonempty: bool = False) -> RunConfig:
    """Parse and validate configuration text; all problems are reported together."""
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str  # keep unit-suffix case (mW vs MW)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError([f"syntax: {exc}"]) from None

    errors = []
    values = {k: default for k, (_, default) in SCHEMA.items()}
    explicit = set()
    for section in parser.sections():
        for key, raw in parser.items(section):
            path = f"{section}.{key}"
            if path not in SCHEMA:
                errors.append(f"{path}: unknown key")
                continue
            conv = SCHEMA[path][0]
            try:
                values[path] = conv(raw)
            except ValueError as exc:
                errors.append(f"{path}: cannot parse {raw!r} ({exc})")
                continue
            explicit.add(path)
    if require_nonempty and not explicit and not errors:
        errors.append("<root>: configuration is empty")
    errors.extend(_check_ranges(values))
    if errors:
        raise ConfigError(errors)
    cfg = RunConfig(values, frozenset(explicit))
    try:
        cfg.scenario()
        cfg.explicit_rates()
    except (DomainError, ConfigurationError) as exc:
        raise ConfigError([f"<derived>: {exc}"]) from None
    return cfg


def _check_ranges(v) -> list[str]:
    positive = [
        "pump.wavelength_nm", "pump.fwhm_nm", "pump.repetition_rate_MHz", "fiber.length_m",
        "filter.fwhm_nm", "filter.detuning_nm", "detector.gate_rate_MHz",
        "calibration.raman_ref_detuning_nm", "propagation.window_t0",
    ]
    non_negative = [
        "pump.avg_power_mW", "fiber.gamma_per_W_km", "calibration.s1_per_mW",
        "calibration.s2_per_mW2", "detector.dead_time_us", "sweep.power_min_mW",
        "propagation.n_steps",
    ]
    errors = [f"{k}: must be > 0, got {v[k]}" for k in positive if not v[k] > 0]
    errors += [f"{k}: must be >= 0, got {v[k]}" for k in non_negative if not v[k] >= 0]
    for k in ("detector.efficiency", "detector.dark_prob"):
        if not 0 <= v[k] <= 1:
            errors.append(f"{k}: must be in [0, 1], got {v[k]}")
    if not 0 < v["filter.peak_transmission"] <= 1:
        errors.append(f"filter.peak_transmission: must be in (0, 1], got {v['filter.peak_transmission']}")
    if v["sweep.power_max_mW"] < v["sweep.power_min_mW"]:
        errors.append("sweep.power_max_mW: must be >= sweep.power_min_mW")
    if v["sweep.n_points"] < 1:
        errors.append("sweep.n_points: must be >= 1")
    if v["run.n_gates"] < 2:
        errors.append("run.n_gates: must be >= 2")
    if v["run.workers"] < 1:
        errors.append("run.workers: must be >= 1")
    if any(p < 0 for p in v["run.powers_mW"]):
        errors.append("run.powers_mW: entries must be >= 0")
    if any(d <= 0 for d in v["run.detunings_nm"]):
        errors.append("run.detunings_nm: entries must be > 0")
    for k in [k for k in SCHEMA if k.startswith("rates.")]:
        if v[k] is not None and v[k] < 0:
            errors.append(f"{k}: must be >= 0, got {v[k]}")
    return errors


def load_config(path: str | Path | None, require_nonempty: bool = False) -> RunConfig:
    if path is None:
        return parse_config("")
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError([f"<file>: cannot read {path}: {exc.strerror}"]) from None
    return parse_config(text, require_nonempty=require_nonempty)
