"""Case-study pipelines: configuration in, table rows out."""

from __future__ import annotations

import math
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .config import SWEEP_VARIABLES, ConfigError, StudyConfig
from .coupling import AXES, coupling_constants, strain_coupling
from .heating import (
    HBAR,
    KB,
    HeatingReport,
    RegimeViolation,
    ThermalContext,
    assemble_report,
    at_temperature,
    case_study_entries,
    continuous_band_rate,
    resonant_band_modes,
    resonant_discrete_rate,
    resonator_heating,
    resonator_limits,
    simplified_flexural_rate,
)
from .photonics import FiberSpec, NoGuidedRoot, make_field, solve_guided_k, solve_guided_omega
from .phononics import band_frequency, classify_sector, fiber_elastic, resonator_mode
from .trap import H_PLANCK, TrapCharacterization, find_trap

_PHOTON_LABEL = re.compile(r"^(HE|EH|TE|TM)(\d)(\d+)$")
_PHONON_LABEL = re.compile(r"^([TLF])(\d)(\d+)$")


def parse_photon_band(label: str) -> tuple[str, int, int]:
    m = _PHOTON_LABEL.match(label)
    if not m:
        raise ConfigError(f"photon band label {label!r} is not like HE11 or TE01")
    return m.group(1), int(m.group(2)), int(m.group(3))


def parse_phonon_band(label: str) -> tuple[str, int, int]:
    m = _PHONON_LABEL.match(label)
    if not m:
        raise ConfigError(f"phonon band label {label!r} is not like T01 or F11")
    return m.group(1), int(m.group(2)), int(m.group(3))


# ---------------------------------------------------------------- physical setup

def build_fields(config: StudyConfig, fiber: FiberSpec | None = None, power_scale: dict | None = None) -> dict:
    """Trapping field of every configured color on ``fiber`` (default: the configured fiber)."""
    fiber = fiber or config.fiber
    fields = {}
    for color, laser in config.lasers.items():
        mode = solve_guided_k(fiber, "HE", 1, 1, laser.omega)
        theta_z = laser.theta_z
        if laser.theta_z_reference == "fiber-center":
            theta_z -= mode.k * fiber.length / 2
        power = laser.power * (power_scale or {}).get(color, 1.0)
        fields[color] = make_field(fiber, mode, laser.case, power, theta=laser.theta,
                                   theta_phi=laser.theta_phi, theta_z=theta_z)
    return fields


def find_sites(config: StudyConfig, fields: dict | None = None, fiber: FiberSpec | None = None,
               seed: tuple | None = None) -> list[tuple[float, TrapCharacterization]]:
    """Trap characterization near every configured axial site."""
    fiber = fiber or config.fiber
    fields = fields if fields is not None else build_fields(config, fiber)
    r, phi = seed or config.trap_seed
    return [(frac, find_trap(fields, config.atom, fiber.radius, (r, phi, frac * fiber.length), config.include_cp))
            for frac in config.site_fractions]


def torsional_modes(config: StudyConfig, fiber: FiberSpec | None = None) -> list:
    fiber = fiber or config.fiber
    return [resonator_mode(fiber, "T", fiber.length, m) for m in range(1, config.torsional_modes + 1)]


# ---------------------------------------------------------------- bands

def photon_band_rows(config: StudyConfig) -> list[dict]:
    b = config.section("bands")
    fiber = config.fiber
    ks = np.linspace(b["photon_k_min_per_um"], b["photon_k_max_per_um"], b["photon_k_points_count"])
    rows = []
    for label in b["photon_bands"]:
        family, m, n = parse_photon_band(label)
        for k in ks:
            try:
                mode = solve_guided_omega(fiber, family, m, n, float(k) * 1e6)
            except NoGuidedRoot:
                continue
            rows.append({"k_per_um": float(k), "omega_over_2pi_THz": mode.omega / (2 * math.pi) / 1e12,
                         "family": family, "m": m, "n": n})
    return rows


def phonon_band_rows(config: StudyConfig) -> list[dict]:
    b = config.section("bands")
    fiber = config.fiber
    ec = fiber_elastic(fiber)
    ps = np.linspace(b["phonon_p_min_per_um"], b["phonon_p_max_per_um"], b["phonon_p_points_count"])
    rows = []
    for label in b["phonon_bands"]:
        family, j, n = parse_phonon_band(label)
        for p in ps:
            omega = band_frequency(fiber, family, j, n, float(p) * 1e6)
            rows.append({"p_per_um": float(p), "omega_over_2pi_kHz": omega / (2 * math.pi) / 1e3,
                         "family": family, "j": j, "n": n, "sector": classify_sector(omega, float(p) * 1e6, ec)})
    return rows


# ---------------------------------------------------------------- trap

def trap_rows(sites, fiber: FiberSpec) -> list[dict]:
    rows = []
    for frac, tr in sites:
        r0, phi0, z0 = tr.x0
        row = {"site_z_over_length": frac, "r0_nm": r0 * 1e9, "phi0_rad": phi0,
               "z0_offset_nm": (z0 - frac * fiber.length) * 1e9, "V0_over_h_MHz": tr.V0 / H_PLANCK / 1e6}
        for i, ax in enumerate(AXES):
            row[f"omega_{ax}_over_2pi_kHz"] = tr.omega[i] / (2 * math.pi) / 1e3
        for i, j in ((0, 1), (0, 2), (1, 2)):
            row[f"omega_{AXES[i]}{AXES[j]}_over_2pi_kHz"] = tr.omega_ij[i, j] / (2 * math.pi) / 1e3
        for i, ax in enumerate(AXES):
            row[f"dx_{ax}_nm"] = tr.dx[i] * 1e9
        row["hessian_step_halving_change"] = tr.step_halving_change
        rows.append(row)
    return rows


# ---------------------------------------------------------------- couplings

@dataclass(frozen=True)
class CouplingRow:
    band: str
    axis: str
    g_dp: complex
    g_st: complex
    units: str
    site: float


def torsional_couplings(config: StudyConfig, sites, fields: dict, mode=None) -> list[CouplingRow]:
    """Per-axis torsional couplings at the site where each magnitude is largest."""
    fiber = config.fiber
    mode = mode or torsional_modes(config, fiber)[0]
    fn = strain_coupling(fiber, fields, config.atom, mode, config.standing_convention)
    best = {}
    for frac, tr in sites:
        for i, c in enumerate(coupling_constants(tr, mode, fn)):
            ax = AXES[i]
            if ax not in best or abs(c.g) > abs(best[ax].g_dp + best[ax].g_st):
                best[ax] = CouplingRow(mode.index.label, ax, c.g_dp, c.g_st, c.units, frac)
    return [best[ax] for ax in AXES]


def band_couplings(config: StudyConfig, trap: TrapCharacterization, fields: dict, family: str,
                   site: float) -> list[CouplingRow]:
    """Couplings of each axis to the band mode resonant with that axis (p > 0, j >= 0)."""
    fiber = config.fiber
    rows = []
    for i, ax in enumerate(AXES):
        mode = resonant_band_modes(fiber, family, float(trap.omega[i]))[0]
        fn = strain_coupling(fiber, fields, config.atom, mode, config.standing_convention)
        c = coupling_constants(trap, mode, fn)[i]
        rows.append(CouplingRow(mode.index.label, ax, c.g_dp, c.g_st, c.units, site))
    return rows


def coupling_table(config: StudyConfig, sites=None, fields=None) -> list[CouplingRow]:
    fields = fields if fields is not None else build_fields(config)
    sites = sites if sites is not None else find_sites(config, fields)
    frac, primary = sites[0]
    return (torsional_couplings(config, sites, fields) + band_couplings(config, primary, fields, "L", frac)
            + band_couplings(config, primary, fields, "F", frac))


def coupling_rows(table: list[CouplingRow]) -> list[dict]:
    return [{"phonon_band": c.band, "axis": c.axis, "g_dp_over_2pi": abs(c.g_dp) / (2 * math.pi),
             "g_st_over_2pi": abs(c.g_st) / (2 * math.pi), "units": c.units} for c in table]


# ---------------------------------------------------------------- heating

def heating_report(config: StudyConfig, trap: TrapCharacterization | None = None, fields=None) -> HeatingReport:
    fiber = config.fiber
    fields = fields if fields is not None else build_fields(config)
    if trap is None:
        trap = find_sites(config, fields)[0][1]
    modes = [(m, config.torsional_kappa, strain_coupling(fiber, fields, config.atom, m, config.standing_convention))
             for m in torsional_modes(config, fiber)]
    entries = case_study_entries(fiber, trap, fields, config.atom, ThermalContext(config.temperature), modes,
                                 config.standing_convention)
    return assemble_report(entries)


def heating_rows(report: HeatingReport) -> list[dict]:
    rows = []
    for e in report.entries:
        dos_or_kappa = e.dos_or_kappa if e.mechanism == "continuous" else e.dos_or_kappa / (2 * math.pi)
        rows.append({"axis": e.axis, "band_or_mode": e.source, "mechanism": e.mechanism, "gamma_Hz": e.gamma,
                     "nbar": e.nbar, "g_abs": e.g_abs, "dos_or_kappa": dos_or_kappa})
    return rows


def heating_table_rows(report: HeatingReport) -> list[dict]:
    """Axis by band summary with negligible entries marked ``<<``."""
    sources = sorted({e.source for e in report.entries}, key=lambda s: "TLF".index(s[0]))
    rows = []
    for ax in AXES:
        row = {"axis": ax}
        for s in sources:
            rate = report.rate(ax, s)
            row[s] = "<<" if rate < 1e-4 else rate
        row["total_Hz"] = report.total(ax)
        rows.append(row)
    return rows


def worst_case_torsional_rows(config: StudyConfig, table: list[CouplingRow], trap: TrapCharacterization) -> list[dict]:
    """Torsional rates if each trap axis were resonant with the torsional mode."""
    thermal = ThermalContext(config.temperature)
    rows = []
    for c in table:
        if c.band[0] != "T":
            continue
        i = AXES.index(c.axis)
        g = c.g_dp + c.g_st
        rows.append({"axis": c.axis, "band_or_mode": c.band, "site_z_over_length": c.site,
                     "gamma_Hz": resonant_discrete_rate(float(trap.omega[i]), config.torsional_kappa, g, thermal),
                     "g_abs": abs(g) / (2 * math.pi), "kappa_over_2pi_Hz": config.torsional_kappa / (2 * math.pi)})
    return rows


# ---------------------------------------------------------------- resonator

def resonator_row(config: StudyConfig, length: float, omega_i: float) -> dict:
    res = config.section("resonator")
    fiber, atom = config.fiber, config.atom
    thermal = ThermalContext(config.temperature)
    kappas = [2 * math.pi * k for k in res["kappa_over_2pi_Hz"]]
    kappa = kappas[0] if len(kappas) == 1 else kappas
    z0 = res["z0_over_length_dimensionless"] * length
    at_site = resonator_heating(fiber, atom.mass, omega_i, length, kappa, z0, thermal)
    env = resonator_heating(fiber, atom.mass, omega_i, length, kappa, z0, thermal, envelope=True)
    require = res.get("require_regime", "none")
    lim = resonator_limits(fiber, atom.mass, omega_i, length, kappas[0], config.temperature, z0,
                           None if require == "none" else require)
    return {"length_um": length * 1e6, "trap_frequency_over_2pi_kHz": omega_i / (2 * math.pi) / 1e3,
            "gamma_Hz": at_site.rate, "gamma_envelope_Hz": env.rate, "gamma_below_Hz": lim.below,
            "gamma_above_bound_Hz": lim.above_bound, "gamma_resonant_Hz": lim.resonant, "regime": lim.regime,
            "m_max": at_site.m_max}


def resonator_rows(config: StudyConfig) -> list[dict]:
    res = config.section("resonator")
    lengths = np.geomspace(res["length_min_um"], res["length_max_um"], res["length_points_count"]) / 1e6
    omega_i = 2 * math.pi * res["trap_frequency_over_2pi_kHz"] * 1e3
    return [resonator_row(config, float(L), omega_i) for L in lengths]


# ---------------------------------------------------------------- sweeps

def sweep_grid(sweep: dict) -> np.ndarray:
    unit = SWEEP_VARIABLES[sweep["variable"]]
    start, stop, n = sweep[f"start_{unit}"], sweep[f"stop_{unit}"], sweep["points_count"]
    if sweep.get("spacing", "linear") == "log":
        if start <= 0 or stop <= 0:
            raise ConfigError("log-spaced sweeps need positive endpoints")
        return np.geomspace(start, stop, n)
    return np.linspace(start, stop, n)


def coupled_temperature(sweep: dict, total_power_mW: float) -> float:
    return (sweep["temperature_m0_K"] + sweep["temperature_m1_K_per_mW"] * total_power_mW
            + sweep["temperature_m2_K_per_mW2"] * total_power_mW**2)


def power_split(config: StudyConfig, sweep: dict, total_power_mW: float) -> dict:
    """Per-beam powers (mW) for a total power at the configured blue to red ratio."""
    lasers = config.lasers
    ratio = sweep["blue_to_red_power_ratio_dimensionless"]
    if "blue" not in lasers:
        raise ConfigError("a power sweep needs lasers named red and blue")
    try:
        red = lasers["red"]
    except KeyError as exc:
        raise ConfigError("a power sweep needs lasers named red and blue") from exc
    blue_mW = total_power_mW / (1 + red.beams / ratio)
    return {"blue": blue_mW, "red": blue_mW / ratio}


def _flexural_rates(config: StudyConfig, fiber: FiberSpec, trap: TrapCharacterization, fields, T: float,
                    include_strain: bool, base: dict | None = None) -> dict:
    """Full and simplified F11 rates on r and phi; ``base`` holds entries to rescale in T."""
    thermal = ThermalContext(T)
    row = {}
    for i, ax in enumerate(AXES[:2]):
        omega_i = float(trap.omega[i])
        if HBAR * omega_i * 10 > KB * T:
            raise RegimeViolation("hbar omega_i << k_B T")
        if base is not None:
            e = at_temperature(base[ax], thermal, omega_i)
        else:
            e = continuous_band_rate(fiber, trap, fields, config.atom, "F", ax, thermal, config.standing_convention,
                                     include_strain)
        row[f"gamma_{ax}_Hz"] = e.gamma
        row[f"gamma_{ax}_simplified_Hz"] = simplified_flexural_rate(fiber.radius, fiber.young_modulus, fiber.density,
                                                                    T, config.atom.mass, omega_i)
    return row


def _trap_columns(trap: TrapCharacterization) -> dict:
    return {f"omega_{ax}_over_2pi_kHz": float(trap.omega[i]) / (2 * math.pi) / 1e3 for i, ax in enumerate(AXES[:2])}


def sweep_point(document: dict, index: int, value: float, trap: TrapCharacterization | None = None,
                base: dict | None = None) -> dict:
    """One sweep row; a pure function of the configuration and the grid value.

    ``trap`` and ``base`` pass precomputed fixed-trap results of the
    configuration itself (trap and F11 entries) to the radius and temperature sweeps.
    """
    config = StudyConfig(document)
    sweep = config.sweeps[index]
    variable = sweep["variable"]
    unit = SWEEP_VARIABLES[variable]
    row = {f"{variable}_{unit}": float(value)}
    if variable in ("radius", "temperature"):
        if trap is None:
            trap = find_sites(config)[0][1]
        fiber = config.fiber
        if variable == "radius":
            fiber = fiber.with_(radius=value / 1e9)
        T = value if variable == "temperature" else config.temperature
        row["temperature_K"] = float(T)
        row.update(_trap_columns(trap))
        if variable == "temperature":
            if base is None:
                base = fixed_trap_entries(config, trap)
            row.update(_flexural_rates(config, fiber, trap, None, T, True, base))
        else:
            # the trap and its fields stay fixed, so only the displacement coupling follows the radius
            row.update(_flexural_rates(config, fiber, trap, None, T, include_strain=False))
        return row
    if variable == "power":
        split = power_split(config, sweep, value)
        scale = {c: split[c] / (laser.power * 1e3) for c, laser in config.lasers.items()}
        fiber = config.fiber
        fields = build_fields(config, fiber, scale)
        seed = config.trap_seed
        frac = config.site_fractions[0]
        trap = find_trap(fields, config.atom, fiber.radius, (seed[0], seed[1], frac * fiber.length), config.include_cp)
        T = coupled_temperature(sweep, value)
        row.update({"power_blue_mW": split["blue"], "power_red_per_beam_mW": split["red"], "temperature_K": T})
        row.update(_trap_columns(trap))
        row.update(_flexural_rates(config, fiber, trap, fields, T, include_strain=True))
        return row
    omega_i = 2 * math.pi * config.section("resonator")["trap_frequency_over_2pi_kHz"] * 1e3
    length = None
    if variable == "trap_frequency":
        omega_i = 2 * math.pi * value * 1e3
        length = sweep["resonator_length_um"] / 1e6
    else:
        length = value / 1e6
    out = resonator_row(config, length, omega_i)
    out.pop("length_um" if variable == "resonator_length" else "trap_frequency_over_2pi_kHz")
    row.update(out)
    return row


def fixed_trap_entries(config: StudyConfig, trap: TrapCharacterization) -> dict:
    fields = build_fields(config)
    thermal = ThermalContext(config.temperature)
    return {ax: continuous_band_rate(config.fiber, trap, fields, config.atom, "F", ax, thermal,
                                     config.standing_convention) for ax in AXES[:2]}


def sweep_rows(config: StudyConfig, index: int, threads: int = 1) -> list[dict]:
    sweep = config.sweeps[index]
    grid = [float(v) for v in sweep_grid(sweep)]
    trap = base = None
    if sweep["variable"] in ("radius", "temperature"):
        trap = find_sites(config)[0][1]
    if sweep["variable"] == "temperature":
        base = fixed_trap_entries(config, trap)
    args = [(config.document, index, v, trap, base) for v in grid]
    if threads <= 1:
        return [sweep_point(*a) for a in args]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(sweep_point, *zip(*args)))

