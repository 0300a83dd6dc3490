"""Command-line front end.

Exit codes: 0 success, 2 configuration/input error, 3 numerical error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import csvio
from .analysis import (
    FitError,
    FringeScan,
    fit_fringe,
    fit_power_law,
    min_detuning_sweep,
    tar_sweep,
)
from .config import ConfigError, RunConfig, load_config
from .counting import coincidences, signal_band, simulate_gates
from .leakage import BracketError, check_rejection, min_detuning_closed_form, output_spectrum
from .optics import BandFilter, DomainError
from .propagation import ConfigurationError, GridError, broadening_factor, input_spectrum

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def _fwhm_tag(fwhm_nm: float) -> str:
    return f"fwhm{round(fwhm_nm * 100):03d}"


def _seed(args, cfg: RunConfig) -> int:
    return args.seed if args.seed is not None else cfg["run.seed"]


def _workers(args, cfg: RunConfig) -> int:
    return args.workers if args.workers is not None else cfg["run.workers"]


def cmd_propagate(args, cfg: RunConfig, out: Path):
    sc = cfg.scenario()
    pulse = sc.pulse(cfg["pump.avg_power_mW"] / 1e3)
    field = output_spectrum(pulse, sc.fiber, sc.propagation, sc.split_step)
    csvio.write_spectrum(out / "spectrum.csv", field)
    print(
        f"peak power {pulse.peak_power:.6g} W, nonlinear phase "
        f"{sc.fiber.nonlinear_phase(pulse.peak_power):.6g} rad, broadening factor "
        f"{broadening_factor(pulse, sc.fiber):.6g}, energy {field.energy():.6g} J"
    )
    return {"peak_power_W": pulse.peak_power}


def cmd_min_detuning(args, cfg: RunConfig, out: Path):
    sc = cfg.scenario()
    powers_mw = np.linspace(cfg["sweep.power_min_mW"], cfg["sweep.power_max_mW"], cfg["sweep.n_points"])
    fwhms = cfg["sweep.pump_fwhms_nm"]
    table = min_detuning_sweep(powers_mw / 1e3, [f / 1e9 for f in fwhms], sc, numeric=args.numeric)
    header = ["avg_power_mW"] + [f"min_detuning_nm_{_fwhm_tag(f)}" for f in fwhms]
    rows = [[p, *(table[i] * 1e9)] for i, p in enumerate(powers_mw)]
    csvio.write_rows(out / "min_detuning.csv", header, rows)
    return {"method": "numeric" if args.numeric else "closed_form"}


def cmd_check_rejection(args, cfg: RunConfig, out: Path):
    sc = cfg.scenario()
    pulse = sc.pulse(cfg["pump.avg_power_mW"] / 1e3)
    detuning = cfg["filter.detuning_nm"] / 1e9
    idler = sc.pump_wavelength + detuning
    bands = {"idler": idler, "signal": signal_band(sc.pump_wavelength, idler)}
    field_in = input_spectrum(pulse, sc.propagation)
    field_out = output_spectrum(pulse, sc.fiber, sc.propagation, sc.split_step)
    closed = min_detuning_closed_form(pulse, sc.fiber, sc.filter_sigma)
    rows = []
    for name, center in bands.items():
        rep = check_rejection(field_in, field_out, BandFilter(center, sc.filter_sigma, sc.peak_transmission))
        rows.append([
            name, center * 1e9, detuning * 1e9, rep.n_pump_photons, rep.n_spm_band,
            rep.rejection_ratio, rep.passes_1e_minus_10, closed * 1e9,
        ])
        print(f"{name}: ratio {rep.rejection_ratio:.3e} -> {'pass' if rep.passes_1e_minus_10 else 'FAIL'}")
    header = [
        "band", "center_wavelength_nm", "detuning_nm", "n_pump_photons", "n_spm_band",
        "rejection_ratio", "passes_1e_minus_10", "min_detuning_closed_form_nm",
    ]
    csvio.write_rows(out / "rejection.csv", header, rows)
    return None


def cmd_fringe_fit(args, cfg: RunConfig, out: Path):
    cols = csvio.read_columns(args.csv, ("phase_rad", "counts"), ("counts_err",))
    err = cols.get("counts_err")
    if err is not None and np.all(np.isnan(err)):
        err = None
    elif err is not None and np.any(np.isnan(err)):
        raise csvio.InputError("counts_err must be given for every row or for none")
    fit = fit_fringe(FringeScan(cols["phase_rad"], cols["counts"], err))
    header = [
        "baseline", "fringe_amp", "phase_offset", "visibility", "residual_rms",
        "baseline_err", "fringe_amp_err", "clipped",
    ]
    csvio.write_rows(out / "fringe_fit.csv", header, [[
        fit.baseline, fit.fringe_amp, fit.phase_offset, fit.visibility, fit.residual_rms,
        fit.baseline_err, fit.fringe_amp_err, fit.clipped,
    ]])
    if fit.clipped:
        print("warning: negative baseline clipped to zero", file=sys.stderr)
    print(f"N_S = {fit.fringe_amp:.6g}, N_F + N_R = {fit.baseline:.6g}, visibility {fit.visibility:.4f}")
    return None


def cmd_power_fit(args, cfg: RunConfig, out: Path):
    cols = csvio.read_columns(
        args.csv, ("avg_power_mW", "baseline_counts_per_s"), ("baseline_err_counts_per_s",)
    )
    err = cols.get("baseline_err_counts_per_s")
    if err is not None and np.any(np.isnan(err)):
        err = None
    fit = fit_power_law(cols["avg_power_mW"] / 1e3, cols["baseline_counts_per_s"], err)
    header = [
        "s1_counts_per_s_per_W", "s2_counts_per_s_per_W2", "s1_err", "s2_err", "residual_rms",
        "s1_counts_per_s_per_mW", "s2_counts_per_s_per_mW2",
    ]
    csvio.write_rows(out / "power_fit.csv", header, [[
        fit.s1, fit.s2, fit.s1_err, fit.s2_err, fit.residual_rms, fit.s1 / 1e3, fit.s2 / 1e6,
    ]])
    print(f"s1 = {fit.s1 / 1e3:.6g} counts/s/mW, s2 = {fit.s2 / 1e6:.6g} counts/s/mW^2")
    return None


def cmd_simulate(args, cfg: RunConfig, out: Path):
    sc = cfg.scenario()
    rates = cfg.explicit_rates()
    if rates is None:
        rates = sc.rates(cfg["pump.avg_power_mW"] / 1e3, cfg["filter.detuning_nm"] / 1e9)
    seed = _seed(args, cfg)
    n_gates = cfg["run.n_gates"]
    ledger = simulate_gates(rates, sc.detector_s, sc.detector_i, n_gates, seed, workers=_workers(args, cfg))
    stats = coincidences(ledger)
    csvio.write_ledger(out / "ledger.csv", ledger)
    csvio.write_stats(out / "stats.csv", stats, n_gates, seed)
    print(f"singles {stats.singles_s}/{stats.singles_i}, C_c {stats.c_c}, C_a {stats.c_a}, TAR {csvio.fmt(stats.tar)}")
    return {"rates": rates.__dict__}


def cmd_tar(args, cfg: RunConfig, out: Path):
    sc = cfg.scenario()
    seed = _seed(args, cfg)
    points = tar_sweep(
        sc,
        [p / 1e3 for p in cfg["run.powers_mW"]],
        [d / 1e9 for d in cfg["run.detunings_nm"]],
        cfg["run.n_gates"],
        seed,
        workers=_workers(args, cfg),
    )
    header = [
        "detuning_nm", "avg_power_mW", "mu_pair", "mu_raman_s", "mu_raman_i", "mu_spm_s",
        "mu_spm_i", "singles_s", "singles_i", "c_c", "c_a", "true_coincidences", "tar",
        "tar_stderr", "n_gates", "seed",
    ]
    rows = []
    for pt in points:
        r, st = pt.rates, pt.stats
        rows.append([
            pt.detuning * 1e9, pt.average_power * 1e3, r.mu_pair, r.mu_raman_s, r.mu_raman_i,
            r.mu_spm_s, r.mu_spm_i, st.singles_s, st.singles_i, st.c_c, st.c_a,
            st.true_coincidences, st.tar, st.tar_stderr, pt.n_gates, pt.seed,
        ])
    csvio.write_rows(out / "tar.csv", header, rows)
    return None


COMMANDS = {
    "propagate": (cmd_propagate, "propagate the pump and write its output spectrum"),
    "min-detuning": (cmd_min_detuning, "minimum-detuning sweep versus average pump power"),
    "check-rejection": (cmd_check_rejection, "evaluate the 1e-10 leakage criterion in both bands"),
    "fringe-fit": (cmd_fringe_fit, "extract N_S from a phase scan CSV"),
    "power-fit": (cmd_power_fit, "split baseline counts into Raman (P) and SFWM (P^2) parts"),
    "simulate": (cmd_simulate, "Monte Carlo of gated detection at one operating point"),
    "tar": (cmd_tar, "TAR versus power for several detunings"),
}


def _global_flags(p: argparse.ArgumentParser, suppress: bool):
    d = argparse.SUPPRESS if suppress else None
    p.add_argument("--config", default=d, help="configuration file (sectioned key = value)")
    p.add_argument("--seed", type=int, default=d, help="master RNG seed (overrides run.seed)")
    p.add_argument("--out", default=argparse.SUPPRESS if suppress else ".", help="output directory")
    p.add_argument("--numeric", action="store_true", default=argparse.SUPPRESS if suppress else False,
                   help="use the quadrature leakage path instead of the closed form")
    p.add_argument("--workers", type=int, default=d, help="worker processes for Monte Carlo blocks")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spmpairs", description=__doc__.splitlines()[0])
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)
    for name, (_, help_text) in COMMANDS.items():
        sp = sub.add_parser(name, help=help_text)
        _global_flags(sp, suppress=True)
        if name in ("fringe-fit", "power-fit"):
            sp.add_argument("csv", help="input CSV")
        elif name in ("simulate", "tar"):
            sp.add_argument("run_config", metavar="config", help="configuration file")
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    func = COMMANDS[args.command][0]
    try:
        if args.command in ("simulate", "tar"):
            cfg = load_config(args.run_config, require_nonempty=True)
        else:
            cfg = load_config(args.config)
        out = Path(args.out)
        extra = func(args, cfg, out)
        csvio.write_manifest(
            out / "run_manifest.json", args.command, argv, cfg,
            _seed(args, cfg), {"result": extra} if extra else None,
        )
    except ConfigError as exc:
        print(exc, file=sys.stderr)
        return EXIT_CONFIG
    except (FitError, GridError, BracketError, np.linalg.LinAlgError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (csvio.InputError, DomainError, ConfigurationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
