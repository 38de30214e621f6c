import dataclasses
import math

import numpy as np
import pytest

from artifact.coupling import resonator_coupling
from artifact.heating import (
    HBAR,
    KB,
    HeatingEntry,
    RegimeViolation,
    ThermalContext,
    above_fundamental_bound,
    assemble_report,
    below_fundamental_rate,
    continuous_band_rate,
    detuned_discrete_rate,
    discrete_mode_rates,
    golden_rule_rate,
    lorentzian_weights,
    resonant_discrete_rate,
    resonant_resonator_rate,
    resonator_heating,
    resonator_limits,
    simplified_flexural_rate,
)
from artifact.phononics import density_of_states, resonator_frequency
from oracles import classical_flexural_rate

W_R = 2 * math.pi * 123e3
KAPPA = 2 * math.pi * 1.2


def _slope(xs, ys):
    return np.polyfit(np.log(xs), np.log(ys), 1)[0]


# ---------------------------------------------------------------- thermal occupation

def test_occupation_series():
    th = ThermalContext(805.0)
    for x in (1e-3, 1e-2):
        omega = x * KB * th.T / HBAR
        assert th.nbar(omega) == pytest.approx(1 / x - 0.5 + x / 12, rel=1e-9)


def test_occupation_classical_limit():
    th = ThermalContext(300.0)
    x = 2e-4
    omega = x * KB * th.T / HBAR
    assert th.nbar(omega) == pytest.approx(KB * th.T / (HBAR * omega), rel=1e-4)
    assert th.nbar(omega) > 0


def test_occupation_at_zero_temperature():
    assert ThermalContext(0.0).nbar(W_R) == 0.0
    with pytest.raises(ValueError):
        ThermalContext(-1.0)


# ---------------------------------------------------------------- simplified formula

def test_simplified_matches_golden_rule_oracle(fiber, atom):
    for R in (150e-9, 250e-9, 600e-9):
        for T in (300.0, 805.0, 2300.0):
            a = simplified_flexural_rate(R, fiber.young_modulus, fiber.density, T, atom.mass, W_R)
            b = classical_flexural_rate(R, fiber.young_modulus, fiber.density, T, atom.mass, W_R)
            assert a == pytest.approx(b, rel=1e-12)


def test_simplified_scaling_slopes(fiber, atom):
    E, rho, M = fiber.young_modulus, fiber.density, atom.mass
    R = np.linspace(100e-9, 600e-9, 11)
    T = np.linspace(300.0, 2300.0, 11)
    w = np.linspace(2 * math.pi * 20e3, 2 * math.pi * 300e3, 11)
    assert _slope(R, [simplified_flexural_rate(r, E, rho, 805.0, M, W_R) for r in R]) == pytest.approx(-2.5, abs=5e-3)
    assert _slope(T, [simplified_flexural_rate(250e-9, E, rho, t, M, W_R) for t in T]) == pytest.approx(1.0, abs=5e-3)
    assert _slope(w, [simplified_flexural_rate(250e-9, E, rho, 805.0, M, x) for x in w]) == pytest.approx(0.5, abs=5e-3)


def test_simplified_doubling_rules(fiber, atom):
    E, rho, M = fiber.young_modulus, fiber.density, atom.mass
    base = simplified_flexural_rate(250e-9, E, rho, 805.0, M, W_R)
    assert simplified_flexural_rate(250e-9, E, rho, 1610.0, M, W_R) == pytest.approx(2 * base, rel=1e-14)
    assert simplified_flexural_rate(500e-9, E, rho, 805.0, M, W_R) == pytest.approx(base * 2**-2.5, rel=1e-14)


def test_flexural_density_of_states_halves_by_root_two(fiber):
    g = [1e-3, 2e-3j, 0.5e-3, 1e-3]
    a = golden_rule_rate(g, density_of_states(fiber, "F", W_R), 10.0)
    b = golden_rule_rate(g, density_of_states(fiber, "F", 2 * W_R), 10.0)
    assert b / a == pytest.approx(2**-0.5, rel=1e-14)


def test_full_rate_matches_simplified(fiber, trap, fields, atom):
    e = continuous_band_rate(fiber, trap, fields, atom, "F", "r", ThermalContext(805.0))
    ref = simplified_flexural_rate(fiber.radius, fiber.young_modulus, fiber.density, 805.0, atom.mass,
                                   float(trap.omega[0]))
    assert e.gamma == pytest.approx(ref, rel=0.05)
    assert e.details["modes"] == 4


# ---------------------------------------------------------------- discrete modes

def test_decay_exceeds_heating():
    th = ThermalContext(805.0)
    for detune in (-3e4, 0.0, 1e3, 5e5):
        d, h = discrete_mode_rates(W_R, W_R + detune, KAPPA, 1e-2, th)
        assert d - h > 0


def test_resonant_ratio_approaches_detailed_balance():
    th = ThermalContext(2e-3)  # occupation of order one
    d, h = discrete_mode_rates(W_R, W_R, KAPPA, 1e-3, th)
    n = th.nbar(W_R)
    assert h / d == pytest.approx(n / (n + 1), rel=1e-9)


def test_detuned_limit():
    th = ThermalContext(805.0)
    for detune in (2 * math.pi * 1e3, 2 * math.pi * 20e3):
        wg = W_R + detune
        _, h = discrete_mode_rates(W_R, wg, KAPPA, 1e-2, th)
        assert h == pytest.approx(detuned_discrete_rate(W_R, wg, KAPPA, 1e-2, th), rel=1e-2)


def test_resonant_limit():
    th = ThermalContext(805.0)
    _, h = discrete_mode_rates(W_R, W_R + 1e-3 * KAPPA, KAPPA, 1e-2, th)
    assert h == pytest.approx(resonant_discrete_rate(W_R, KAPPA, 1e-2, th), rel=1e-2)


def test_zero_temperature_floor():
    g = 1e-2
    d, h = discrete_mode_rates(W_R, 1.3 * W_R, KAPPA, g, ThermalContext(0.0))
    g_minus, g_plus = lorentzian_weights(W_R, 1.3 * W_R, KAPPA)
    assert h == pytest.approx(2 * g**2 * g_plus, rel=1e-14)
    assert d == pytest.approx(2 * g**2 * g_minus, rel=1e-14)


def test_invalid_decay_rate():
    with pytest.raises(ValueError):
        discrete_mode_rates(W_R, W_R, 0.0, 1e-2, ThermalContext(1.0))


# ---------------------------------------------------------------- report

def test_report_totals_are_exact_sums(heating_report):
    for ax in ("r", "phi", "z"):
        entries = heating_report.by_axis(ax)
        assert heating_report.total(ax) == math.fsum(e.gamma for e in entries)
        assert heating_report.total(ax) == pytest.approx(heating_report.continuous(ax)
                                                         + heating_report.discrete(ax), rel=1e-15)
        assert all(e.gamma >= 0 for e in entries)


def test_report_zero_temperature(fiber, trap, fields, atom):
    e = continuous_band_rate(fiber, trap, fields, atom, "L", "z", ThermalContext(0.0))
    assert e.gamma == 0.0 and e.nbar == 0.0


def test_report_ordering_and_flags():
    a = HeatingEntry("z", "L01", "continuous", 1e-5, 1.0, 1.0, 1.0)
    b = HeatingEntry("r", "F11", "continuous", 2.0, 1.0, 1.0, 1.0)
    c = HeatingEntry("r", "T01", "discrete", 3.0, 1.0, 1.0, 1.0)
    rep = assemble_report([a, c, b])
    assert rep.entries == (b, c, a)
    assert a.negligible and not b.negligible
    assert rep.totals == {"r": 5.0, "phi": 0.0, "z": 1e-5}
    with pytest.raises(ValueError):
        HeatingEntry("r", "F11", "continuous", -1.0, 1.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        HeatingEntry("r", "F11", "radiative", 1.0, 1.0, 1.0, 1.0)


# ---------------------------------------------------------------- flexural resonator

def test_resonator_general_sum_formula(fiber, atom):
    th = ThermalContext(805.0)
    L, z0 = 600e-6, 0.37 * 600e-6
    res = resonator_heating(fiber, atom.mass, W_R, L, KAPPA, z0, th, m_max=12)
    total = 0.0
    for m in range(1, 13):
        wm = resonator_frequency(fiber, "F", L, m)
        g = resonator_coupling(fiber, atom.mass, W_R, m, L, z0)
        gm, gp = lorentzian_weights(W_R, wm, KAPPA)
        total += 4 * g**2 * (th.nbar(wm) * gm + (th.nbar(wm) + 1) * gp)
    assert res.rate == pytest.approx(total, rel=1e-12)
    assert res.m_max == 12


@pytest.mark.parametrize("L", [50e-6, 600e-6, 3e-3])
def test_resonator_sum_converges(fiber, atom, L):
    th = ThermalContext(805.0)
    auto = resonator_heating(fiber, atom.mass, W_R, L, KAPPA, L / 2, th)
    doubled = resonator_heating(fiber, atom.mass, W_R, L, KAPPA, L / 2, th, m_max=2 * auto.m_max)
    assert abs(doubled.rate - auto.rate) <= 1e-3 * auto.rate


def test_resonant_term_vanishes_at_node(fiber, atom):
    L, m = 600e-6, 6
    w = resonator_frequency(fiber, "F", L, m)
    th = ThermalContext(805.0)
    at_node = resonator_heating(fiber, atom.mass, w, L, KAPPA, L / m, th)
    term = next(t for t in at_node.terms if t.m == m)
    assert abs(term.rate) <= 1e-20 * at_node.rate
    antinode = resonator_heating(fiber, atom.mass, w, L, KAPPA, L / (2 * m), th)
    assert antinode.rate > 1e3 * at_node.rate


def test_envelope_bounds_site_rate(fiber, atom):
    th = ThermalContext(805.0)
    for z0 in (0.1, 0.37, 0.5):
        site = resonator_heating(fiber, atom.mass, W_R, 600e-6, KAPPA, z0 * 600e-6, th)
        env = resonator_heating(fiber, atom.mass, W_R, 600e-6, KAPPA, z0 * 600e-6, th, envelope=True)
        assert env.rate >= site.rate


def test_per_mode_decay_rates(fiber, atom):
    th = ThermalContext(805.0)
    uniform = resonator_heating(fiber, atom.mass, W_R, 600e-6, KAPPA, 3e-4, th, m_max=10)
    listed = resonator_heating(fiber, atom.mass, W_R, 600e-6, [KAPPA, KAPPA], 3e-4, th, m_max=10)
    assert listed.rate == pytest.approx(uniform.rate, rel=1e-15)
    heavier = resonator_heating(fiber, atom.mass, W_R, 600e-6, [KAPPA] * 5 + [2 * KAPPA], 3e-4, th, m_max=10)
    assert [t.kappa for t in heavier.terms][5:] == [2 * KAPPA] * 5


def test_closed_form_limits(fiber, atom):
    R, E, rho, M, T = fiber.radius, fiber.young_modulus, fiber.density, atom.mass, 805.0
    L = 20e-6
    ref = 16 / math.pi**9 * KB / HBAR * T * M * rho * KAPPA * W_R**3 * L**7 / (E**2 * R**6)
    assert below_fundamental_rate(fiber, M, W_R, L, KAPPA, T, L / 2) == pytest.approx(ref, rel=1e-14)
    # the off-resonant limits grow with kappa, the resonant one falls
    assert below_fundamental_rate(fiber, M, W_R, L, 2 * KAPPA, T) == pytest.approx(
        2 * below_fundamental_rate(fiber, M, W_R, L, KAPPA, T))
    assert above_fundamental_bound(fiber, M, W_R, 3e-3, 2 * KAPPA, T) == pytest.approx(
        2 * above_fundamental_bound(fiber, M, W_R, 3e-3, KAPPA, T))
    assert resonant_resonator_rate(fiber, M, W_R, 600e-6, 2 * KAPPA, T) == pytest.approx(
        0.5 * resonant_resonator_rate(fiber, M, W_R, 600e-6, KAPPA, T))


def test_regime_classification(fiber, atom):
    M = atom.mass
    assert resonator_limits(fiber, M, W_R, 20e-6, KAPPA, 805.0).regime == "below"
    assert resonator_limits(fiber, M, W_R, 3e-3, KAPPA, 805.0).regime == "above"
    w6 = resonator_frequency(fiber, "F", 600e-6, 6)
    assert resonator_limits(fiber, M, w6, 600e-6, KAPPA, 805.0).regime == "resonant"
    with pytest.raises(RegimeViolation, match="omega_i >> omega_1"):
        resonator_limits(fiber, M, W_R, 20e-6, KAPPA, 805.0, require="above")


def test_resonator_rejects_bad_length(fiber, atom):
    with pytest.raises(ValueError):
        resonator_heating(fiber, atom.mass, W_R, 0.0, KAPPA, 0.0, ThermalContext(805.0))


def test_heating_entry_is_frozen():
    e = HeatingEntry("r", "F11", "continuous", 1.0, 1.0, 1.0, 1.0)
    with pytest.raises(dataclasses.FrozenInstanceError):
        e.gamma = 2.0
