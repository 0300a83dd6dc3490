"""CSV readers/writers. All files: ',' separator, '.' decimal, LF endings, header row."""

from __future__ import annotations

import csv
import json
import math
import platform
from pathlib import Path

import numpy as np

SPECTRUM_HEADER = ("omega_rad_s", "lambda_nm", "power_spectral_density_J_per_rad_s")
LEDGER_HEADER = ("gate_index", "signal_hit", "idler_hit")
STATS_HEADER = ("singles_s", "singles_i", "c_c", "c_a", "tar", "n_gates", "seed")


class InputError(ValueError):
    """An input CSV is missing columns or holds unparsable values."""


def fmt(value) -> str:
    """Round-trip float formatting; integers and strings pass through."""
    if value is None:
        return "undefined"
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        return repr(value)
    return str(value)


def write_rows(path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def write_spectrum(path, field) -> Path:
    lam_nm = field.wavelength_grid * 1e9
    psd = field.power_spectral_density
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SPECTRUM_HEADER)
        for row in zip(field.omega_grid, lam_nm, psd):
            w.writerow(["%.17g" % x for x in row])
    return path


def write_ledger(path, ledger) -> Path:
    """Gates with at least one click, in gate order (silent gates are omitted)."""
    s = ledger.signal_hits
    i = ledger.idler_hits
    gates = np.union1d(s, i)
    sig = np.isin(gates, s)
    idl = np.isin(gates, i)
    return write_rows(path, LEDGER_HEADER, zip(gates.tolist(), sig.astype(int).tolist(), idl.astype(int).tolist()))


def write_stats(path, stats, n_gates: int, seed: int) -> Path:
    row = (stats.singles_s, stats.singles_i, stats.c_c, stats.c_a, stats.tar, n_gates, seed)
    return write_rows(path, STATS_HEADER, [row])


def read_columns(path, required, optional=()) -> dict:
    """Read numeric columns by header name. Blank optional cells become nan."""
    try:
        fh = Path(path).open(newline="")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    with fh:
        reader = csv.DictReader(fh)
        header = [h.strip() for h in (reader.fieldnames or [])]
        reader.fieldnames = header
        missing = [c for c in required if c not in header]
        if missing:
            raise InputError(f"{path}: missing column(s) {', '.join(missing)}")
        cols = {c: [] for c in (*required, *[o for o in optional if o in header])}
        for lineno, rec in enumerate(reader, start=2):
            for c in cols:
                raw = (rec.get(c) or "").strip()
                if raw == "" and c in optional:
                    cols[c].append(math.nan)
                    continue
                try:
                    cols[c].append(float(raw))
                except ValueError:
                    raise InputError(f"{path}:{lineno}: column {c}: cannot parse {raw!r}") from None
    return {c: np.asarray(v, dtype=float) for c, v in cols.items()}


def write_manifest(path, command: str, argv, config, seed, extra=None) -> Path:
    import scipy

    from . import __version__
    from .optics import CONSTANTS

    doc = {
        "command": command,
        "argv": list(argv),
        "seed": seed,
        "config": {k: list(v) if isinstance(v, tuple) else v for k, v in config.values.items()},
        "explicit_keys": sorted(config.explicit),
        "versions": {
            "spmpairs": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
        },
        "constants": CONSTANTS,
    }
    if extra:
        doc.update(extra)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return path
