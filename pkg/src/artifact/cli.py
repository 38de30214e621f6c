"""Command-line front end: ``artifact <subcommand> --config FILE --out DIR [--threads N]``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
import time
from pathlib import Path

from . import __version__
from . import study
from .config import ConfigError, StudyConfig, load
from .heating import RegimeViolation
from .numerics import ConvergenceError, DomainError
from .photonics import NoGuidedRoot

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_CONVERGENCE = 2
EXIT_REGIME = 3

log = logging.getLogger("artifact")


def format_value(value) -> str:
    """Shortest round-trip text for floats; finite values only."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        value = float(value)
        if not math.isfinite(value):
            raise ConvergenceError(f"non-finite value {value!r} reached the output")
        return repr(value)
    if hasattr(value, "item"):
        return format_value(value.item())
    return str(value)


def write_csv(path: Path, rows: list[dict], columns: list[str] | None = None) -> Path:
    columns = columns or (list(rows[0]) if rows else [])
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_value(row[c]) for c in columns])
    return path


def _bands_photon(config: StudyConfig, out: Path, threads: int) -> list[Path]:
    rows = study.photon_band_rows(config)
    return [write_csv(out / "photon_bands.csv", rows, ["k_per_um", "omega_over_2pi_THz", "family", "m", "n"])]


def _bands_phonon(config: StudyConfig, out: Path, threads: int) -> list[Path]:
    rows = study.phonon_band_rows(config)
    return [write_csv(out / "phonon_bands.csv", rows,
                      ["p_per_um", "omega_over_2pi_kHz", "family", "j", "n", "sector"])]


def _trap(config: StudyConfig, out: Path, threads: int) -> list[Path]:
    sites = study.find_sites(config)
    return [write_csv(out / "trap.csv", study.trap_rows(sites, config.fiber))]


def _couplings(config: StudyConfig, out: Path, threads: int) -> list[Path]:
    table = study.coupling_table(config)
    return [write_csv(out / "couplings.csv", study.coupling_rows(table),
                      ["phonon_band", "axis", "g_dp_over_2pi", "g_st_over_2pi", "units"])]


def _heating(config: StudyConfig, out: Path, threads: int) -> list[Path]:
    fields = study.build_fields(config)
    sites = study.find_sites(config, fields)
    report = study.heating_report(config, sites[0][1], fields)
    table = study.coupling_table(config, sites, fields)
    return [
        write_csv(out / "heating.csv", study.heating_rows(report),
                  ["axis", "band_or_mode", "mechanism", "gamma_Hz", "nbar", "g_abs", "dos_or_kappa"]),
        write_csv(out / "heating_table.csv", study.heating_table_rows(report)),
        write_csv(out / "torsional_worst_case.csv", study.worst_case_torsional_rows(config, table, sites[0][1])),
    ]


def _sweep(config: StudyConfig, out: Path, threads: int) -> list[Path]:
    if not config.sweeps:
        raise ConfigError("config has no sweep tables")
    paths = []
    for i, sweep in enumerate(config.sweeps):
        rows = study.sweep_rows(config, i, threads)
        paths.append(write_csv(out / f"sweep_{i}_{sweep['variable']}.csv", rows))
    return paths


def _resonator(config: StudyConfig, out: Path, threads: int) -> list[Path]:
    return [write_csv(out / "resonator.csv", study.resonator_rows(config))]


SUBCOMMANDS = {
    "bands-photon": _bands_photon,
    "bands-phonon": _bands_phonon,
    "trap": _trap,
    "couplings": _couplings,
    "heating": _heating,
    "sweep": _sweep,
    "resonator": _resonator,
}


def run(subcommand: str, config_path, out_dir, threads: int = 1) -> int:
    """Run one subcommand and return its exit status."""
    start = time.perf_counter()
    try:
        config = load(config_path)
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        paths = SUBCOMMANDS[subcommand](config, out, threads)
    except ConfigError as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except RegimeViolation as exc:
        log.error("%s", exc)
        return EXIT_REGIME
    except (ConvergenceError, NoGuidedRoot, DomainError) as exc:
        log.error("solver did not converge: %s", exc)
        return EXIT_CONVERGENCE
    meta = {
        "subcommand": subcommand,
        "config_sha256": config.sha256,
        "tool_version": __version__,
        "wall_time_s": time.perf_counter() - start,
        "threads": threads,
        "outputs": [p.name for p in paths],
    }
    (out / f"run_meta_{subcommand}.json").write_text(json.dumps(meta, indent=2) + "\n")
    return EXIT_OK


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="artifact", description=__doc__.split("\n")[0])
    parser.add_argument("subcommand", choices=sorted(SUBCOMMANDS))
    parser.add_argument("--config", required=True, help="TOML study configuration")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--threads", type=int, default=1, help="worker processes for sweeps")
    parser.add_argument("--verbose", action="store_true")
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.threads < 1:
        parser.error("--threads must be positive")
    return run(args.subcommand, args.config, args.out, args.threads)


if __name__ == "__main__":
    sys.exit(main())
