"""Reference case-study values, one test per acceptance criterion."""

import math
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from artifact import study
from artifact.config import bundled_case_study, bundled_case_study_text
from artifact.heating import (
    ThermalContext,
    detuned_discrete_rate,
    discrete_mode_rates,
    resonant_discrete_rate,
    resonator_heating,
    resonator_limits,
)
from artifact.phononics import fiber_elastic, resonant_propagation_constant, resonator_frequency
from artifact.photonics import C_LIGHT, solve_guided_k
from conftest import record

TESTS = Path(__file__).parent
NEGLIGIBLE = 1e-4


def _close(value, ref, rel):
    return abs(value - ref) <= rel * abs(ref)


def _verdict(number, title, checks):
    """Record one line for the criterion and fail unless every check holds."""
    bad = [f"{name} ({detail})" for name, ok, detail in checks if not ok]
    status = "PASS" if not bad else "FAIL"
    record(f"criterion {number:2d} {status}: {title}" + ("" if not bad else " | failing: " + "; ".join(bad)))
    assert not bad, "; ".join(bad)


def _rel(name, value, ref, rel):
    return name, _close(value, ref, rel), f"{value:.6g} vs {ref:.6g}, tol {rel:g}"


def _below(name, value, bound):
    return name, value <= bound, f"{value:.6g} vs bound {bound:.6g}"


def _slope(xs, ys):
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])


@pytest.fixture(scope="module")
def sweeps(case):
    index = {s["variable"]: i for i, s in enumerate(case.sweeps)}
    return {name: study.sweep_rows(case, i) for name, i in index.items() if name != "trap_frequency"}


def test_criterion_01_photonic_dispersion(fiber):
    start = time.perf_counter()
    k = {lam: solve_guided_k(fiber, "HE", 1, 1, 2 * math.pi * C_LIGHT / lam).k for lam in (1064e-9, 783e-9)}
    elapsed = time.perf_counter() - start
    _verdict(1, "HE11 propagation constants", [
        _rel("k(1064 nm)", k[1064e-9] / 1e6, 6.31, 5e-3),
        _rel("k(783 nm)", k[783e-9] / 1e6, 9.41, 5e-3),
        _below("runtime s", elapsed, 1.0),
    ])


def test_criterion_02_trap():
    start = time.perf_counter()
    config = bundled_case_study()
    tr = study.find_sites(config)[0][1]
    elapsed = time.perf_counter() - start
    w = tr.omega / (2 * math.pi) / 1e3
    _verdict(2, "trap characterization", [
        _rel("r0 nm", tr.x0[0] * 1e9, 553.0, 0.01),
        _rel("phi0 rad", tr.x0[1], -0.0190, 0.10),
        _rel("V0/h MHz", tr.V0 / 6.62607015e-34 / 1e6, -3.21, 0.02),
        _rel("omega_r kHz", w[0], 123.0, 0.02),
        _rel("omega_phi kHz", w[1], 71.8, 0.02),
        _rel("omega_z kHz", w[2], 193.0, 0.02),
        _rel("dx_r nm", tr.dx[0] * 1e9, 17.6, 0.02),
        _rel("dx_phi nm", tr.dx[1] * 1e9, 23.0, 0.02),
        _rel("dx_z nm", tr.dx[2] * 1e9, 14.0, 0.02),
        _below("runtime s", elapsed, 30.0),
    ])


def test_criterion_03_elastic_constants_and_bands(case, fiber, trap):
    ec = fiber_elastic(fiber)
    w_phi = float(trap.omega[1])
    wavelength = {fam: 2 * math.pi / resonant_propagation_constant(fiber, fam, j, 1, w_phi)
                  for fam, j in (("L", 0), ("F", 1))}
    w_t = study.torsional_modes(case)[0].omega
    _verdict(3, "elastic constants and phonon bands", [
        _rel("lambda GPa", ec.lambda_lame / 1e9, 15.2, 5e-3),
        _rel("mu GPa", ec.mu_lame / 1e9, 31.2, 5e-3),
        _rel("c_t km/s", ec.c_t / 1e3, 3.76, 5e-3),
        _rel("c_l km/s", ec.c_l / 1e3, 5.94, 5e-3),
        _rel("c_h km/s", ec.c_h / 1e3, 5.74, 5e-3),
        _rel("L01 wavelength mm", wavelength["L"] * 1e3, 80.0, 0.01),
        _rel("F11 wavelength mm", wavelength["F"] * 1e3, 0.251, 0.01),
        _rel("T01 fundamental kHz", w_t / (2 * math.pi) / 1e3, 258.0, 5e-3),
        _rel("T01 fundamental via spectrum kHz", resonator_frequency(fiber, "T", fiber.length, 1)
             / (2 * math.pi) / 1e3, 258.0, 5e-3),
    ])


# (band, axis): (|g_dp|, |g_st|) / 2 pi of the reference case study
REFERENCE_COUPLINGS = {
    ("T01", "r"): (0.0, 5.47e-8), ("T01", "phi"): (0.0, 7.81e-4), ("T01", "z"): (0.0, 2.19e-12),
    ("L01", "r"): (3.08e-9, 1.56e-8), ("L01", "phi"): (0.0, 7.76e-11), ("L01", "z"): (0.0, 1.05e-4),
    ("F11", "r"): (3.93e-4, 2.18e-8), ("F11", "phi"): (2.28e-4, 2.99e-10), ("F11", "z"): (0.0, 1.13e-10),
}


def _coupling_check(name, value, ref, band_max_dp, strain):
    if ref == 0.0:
        return _below(name, value, 5e-3 * band_max_dp)
    if strain and ref < 1e-9:
        return name, 0.5 <= value / ref <= 2.0, f"{value:.6g} vs {ref:.6g}, factor 2"
    return _rel(name, value, ref, 0.05)


def test_criterion_04_coupling_table(coupling_table):
    got = {(c.band, c.axis): (abs(c.g_dp) / (2 * math.pi), abs(c.g_st) / (2 * math.pi)) for c in coupling_table}
    assert set(got) == set(REFERENCE_COUPLINGS)
    checks = []
    for band in ("T01", "L01", "F11"):
        band_max = max(got[(band, ax)][0] for ax in ("r", "phi", "z"))
        for ax in ("r", "phi", "z"):
            dp, st = got[(band, ax)]
            ref_dp, ref_st = REFERENCE_COUPLINGS[(band, ax)]
            checks.append(_coupling_check(f"{band} {ax} dp", dp, ref_dp, band_max, False))
            checks.append(_coupling_check(f"{band} {ax} st", st, ref_st, band_max, True))
    _verdict(4, "coupling constants, 18 entries", checks)


def test_criterion_05_heating_table(heating_report, tmp_path):
    dominant = {("r", "F11"): 446.0, ("phi", "F11"): 340.0, ("z", "L01"): 8.36e-2}
    checks = []
    for ax in ("r", "phi", "z"):
        for src in ("T01", "L01", "F11"):
            value = heating_report.rate(ax, src)
            ref = dominant.get((ax, src))
            checks.append(_rel(f"{src} {ax}", value, ref, 0.05) if ref else _below(f"{src} {ax}", value, NEGLIGIBLE))
    config = tmp_path / "case.toml"
    config.write_text(bundled_case_study_text())
    start = time.perf_counter()
    proc = subprocess.run([sys.executable, "-m", "artifact.cli", "heating", "--config", str(config),
                           "--out", str(tmp_path / "out")], capture_output=True, text=True)
    elapsed = time.perf_counter() - start
    checks.append(("cli exit status", proc.returncode == 0, proc.stderr.strip()[-200:]))
    checks.append(_below("cold cli runtime s", elapsed, 120.0))
    _verdict(5, "heating rates at 805 K", checks)


def test_criterion_06_simplified_formula(case, trap, sweeps):
    checks = []
    document = case.document
    index = [s["variable"] for s in case.sweeps].index("radius")
    rows = [r for r in sweeps["radius"] if 150.0 <= r["radius_nm"] <= 600.0]
    rows.append(study.sweep_point(document, index, 150.0, trap))
    for row in rows:
        for ax in ("r", "phi"):
            checks.append(_rel(f"R={row['radius_nm']:.4g} nm {ax}", row[f"gamma_{ax}_Hz"],
                               row[f"gamma_{ax}_simplified_Hz"], 0.05))
    for row in sweeps["temperature"]:
        for ax in ("r", "phi"):
            checks.append(_rel(f"T={row['temperature_K']:.4g} K {ax}", row[f"gamma_{ax}_Hz"],
                               row[f"gamma_{ax}_simplified_Hz"], 0.05))
    _verdict(6, "simplified flexural formula vs full rate", checks)


def test_criterion_07_scaling_laws(sweeps):
    rad, temp, power = sweeps["radius"], sweeps["temperature"], sweeps["power"]
    checks = []
    for ax in ("r", "phi"):
        s = _slope([r["radius_nm"] for r in rad], [r[f"gamma_{ax}_Hz"] for r in rad])
        checks.append((f"radius slope {ax}", abs(s + 2.5) <= 5e-3, f"{s:.5f}"))
        s = _slope([r["temperature_K"] for r in temp], [r[f"gamma_{ax}_Hz"] for r in temp])
        checks.append((f"temperature slope {ax}", abs(s - 1.0) <= 5e-3, f"{s:.5f}"))
        rates = [r[f"gamma_{ax}_Hz"] for r in power]
        checks.append((f"power sweep monotone {ax}", bool(np.all(np.diff(rates) > 0)), "rates not increasing"))
    first, last = power[0], power[-1]
    checks += [
        _rel("omega_r at low power kHz", first["omega_r_over_2pi_kHz"], 29.1, 0.05),
        _rel("omega_phi at low power kHz", first["omega_phi_over_2pi_kHz"], 23.9, 0.05),
        _rel("omega_r at high power kHz", last["omega_r_over_2pi_kHz"], 291.0, 0.05),
        _rel("omega_phi at high power kHz", last["omega_phi_over_2pi_kHz"], 168.0, 0.05),
    ]
    _verdict(7, "scaling laws and power sweep", checks)


def test_criterion_08_discrete_mode_limits(case, trap, coupling_table):
    th = ThermalContext(case.temperature)
    kappa = case.torsional_kappa
    w_t = study.torsional_modes(case)[0].omega
    checks = []
    for c in coupling_table:
        if c.band != "T01":
            continue
        g = c.g_dp + c.g_st
        w_i = float(trap.omega[("r", "phi", "z").index(c.axis)])
        _, h = discrete_mode_rates(w_i, w_t, kappa, g, th)
        checks.append(_rel(f"detuned limit {c.axis}", h, detuned_discrete_rate(w_i, w_t, kappa, g, th), 0.01))
        _, h = discrete_mode_rates(w_i, w_i + 1e-3 * kappa, kappa, g, th)
        checks.append(_rel(f"resonant limit {c.axis}", h, resonant_discrete_rate(w_i, kappa, g, th), 0.01))
    worst = {r["axis"]: r["gamma_Hz"] for r in study.worst_case_torsional_rows(case, coupling_table, trap)}
    checks.append(_rel("worst-case azimuthal Hz", worst["phi"], 17.8, 0.10))
    checks.append(_below("worst-case radial Hz", worst["r"], NEGLIGIBLE))
    checks.append(_below("worst-case axial Hz", worst["z"], NEGLIGIBLE))
    _verdict(8, "discrete torsional mode limits", checks)


def test_criterion_09_resonator(case, fiber, atom):
    res = case.section("resonator")
    kappa = 2 * math.pi * res["kappa_over_2pi_Hz"][0]
    T, M = case.temperature, atom.mass
    th = ThermalContext(T)
    w_r = 2 * math.pi * res["trap_frequency_over_2pi_kHz"] * 1e3

    def site_rate(w, L, z0):
        return resonator_heating(fiber, M, w, L, kappa, z0, th).rate

    checks = []
    lim600 = resonator_limits(fiber, M, w_r, 600e-6, kappa, T, 300e-6)
    g600 = site_rate(w_r, 600e-6, 300e-6)
    checks.append(("600 um detuned", lim600.regime == "above" and 0.5 <= g600 <= 2.0, f"{g600:.4g} Hz, {lim600.regime}"))
    checks.append(_below("50 um Hz", site_rate(w_r, 50e-6, 25e-6), 2e-4))
    L = 20e-6
    below = resonator_limits(fiber, M, w_r, L, kappa, T, L / 2, require="below")
    checks.append(_rel("below-fundamental limit, 20 um", below.below, site_rate(w_r, L, L / 2), 0.10))
    L = 3e-3
    above = resonator_limits(fiber, M, w_r, L, kappa, T, L / 2, require="above")
    checks.append(_rel("above-fundamental bound, 3 mm", above.above_bound, site_rate(w_r, L, L / 2), 0.10))
    L, m = 600e-6, 6
    w_m = resonator_frequency(fiber, "F", L, m)
    z0 = L / (2 * m)
    on = resonator_limits(fiber, M, w_m, L, kappa, T, z0, require="resonant")
    checks.append(_rel("resonant limit, 600 um m=6", on.resonant, site_rate(w_m, L, z0), 0.10))
    _verdict(9, "flexural resonator engineering", checks)


PROPERTY_FILES = ["test_numerics.py", "test_photonics.py", "test_phononics.py", "test_trap.py", "test_coupling.py"]
PROPERTY_KEYS = "residual or normalization or continuity or stress or strain or symmetr or asymptot or flip " \
                "or finite_difference or mirror"


def test_criterion_10_property_suites():
    start = time.perf_counter()
    proc = subprocess.run([sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider", "-k", PROPERTY_KEYS,
                           *[str(TESTS / f) for f in PROPERTY_FILES]], capture_output=True, text=True, cwd=TESTS)
    elapsed = time.perf_counter() - start
    summary = proc.stdout.strip().splitlines()[-1] if proc.stdout.strip() else proc.stderr[-200:]
    _verdict(10, "property suites without case-study numbers", [
        ("property subset", proc.returncode == 0, summary),
        _below("property subset runtime s", elapsed, 300.0),
    ])
