"""Heating rates of trapped-atom motion from thermally occupied phonon modes."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import constants

from .coupling import AXES, coupling_constants, resonator_coupling, strain_coupling
from .photonics import FiberSpec
from .phononics import (
    PhononMode,
    band_frequency,
    band_mode,
    resonant_propagation_constant,
    resonator_frequency,
)
from .trap import HBAR, AtomSpec, TrapCharacterization

log = logging.getLogger(__name__)

KB = constants.k
NEGLIGIBLE_RATE = 1e-4  # Hz, entries below are reported as negligible
MECHANISMS = ("continuous", "discrete", "resonator")
REGIME_MARGIN = 10.0  # factor that stands in for "much smaller than"


class RegimeViolation(ValueError):
    """A closed-form limit was requested outside its validity regime."""

    def __init__(self, inequality: str):
        super().__init__(f"regime precondition violated: {inequality}")
        self.inequality = inequality


@dataclass(frozen=True)
class ThermalContext:
    """Bose-Einstein occupation of phonon modes at temperature ``T`` (K)."""

    T: float

    def __post_init__(self):
        if not self.T >= 0:
            raise ValueError("temperature must be non-negative")

    def nbar(self, omega):
        omega = np.asarray(omega, dtype=float)
        if self.T == 0:
            return np.zeros_like(omega)[()]
        return (1.0 / np.expm1(HBAR * omega / (KB * self.T)))[()]


def axis_index(axis: str) -> int:
    if axis not in AXES:
        raise ValueError(f"unknown trap axis {axis!r}")
    return AXES.index(axis)


# ---------------------------------------------------------------- continuous bands

def golden_rule_rate(g_values: Iterable[complex], dos: float, nbar: float) -> float:
    """Golden-rule rate 2 pi nbar sum rho |g|^2 over degenerate resonant modes."""
    return float(2 * math.pi * nbar * dos * sum(abs(g) ** 2 for g in g_values))


def resonant_band_modes(fiber: FiberSpec, family: str, omega: float) -> list[PhononMode]:
    """All modes of a fundamental band with frequency ``omega``: both directions, both windings."""
    if family not in ("L", "F"):
        raise ValueError("continuous heating is modeled for the L01 and F11 bands")
    j = 1 if family == "F" else 0
    p = resonant_propagation_constant(fiber, family, j, 1, omega)
    base = band_mode(fiber, family, j, 1, p)
    j_signs = (1, -1) if family == "F" else (1,)
    return [base.reflected(js, ps) for js in j_signs for ps in (1, -1)]


def exact_density_of_states(fiber: FiberSpec, mode: PhononMode) -> float:
    """Inverse slope of the exact band at the mode's propagation constant."""
    family, j = mode.index.family, abs(mode.index.j)
    p = abs(mode.p)
    h = 1e-4 * p
    slope = (band_frequency(fiber, family, j, 1, p + h) - band_frequency(fiber, family, j, 1, p - h)) / (2 * h)
    return 1.0 / abs(slope)


@dataclass(frozen=True)
class HeatingEntry:
    """One contribution to the heating rate of one trap axis."""

    axis: str
    source: str
    mechanism: str
    gamma: float
    nbar: float
    g_abs: float
    dos_or_kappa: float
    details: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.mechanism not in MECHANISMS:
            raise ValueError(f"unknown heating mechanism {self.mechanism!r}")
        if not self.gamma >= 0:
            raise ValueError("heating rates must be non-negative")

    @property
    def negligible(self) -> bool:
        return self.gamma < NEGLIGIBLE_RATE


def continuous_band_rate(fiber: FiberSpec, trap: TrapCharacterization, fields: dict, atom: AtomSpec,
                         family: str, axis: str, thermal: ThermalContext, convention: str = "physical",
                         include_strain: bool = True) -> HeatingEntry:
    """Golden-rule heating of ``axis`` by the band modes resonant with its trap frequency."""
    i = axis_index(axis)
    omega_i = float(trap.omega[i])
    modes = resonant_band_modes(fiber, family, omega_i)
    g_values = []
    for mode in modes:
        fn = strain_coupling(fiber, fields, atom, mode, convention) if include_strain else None
        g_values.append(coupling_constants(trap, mode, fn)[i].g)
    dos = exact_density_of_states(fiber, modes[0])
    nbar = float(thermal.nbar(omega_i))
    rate = golden_rule_rate(g_values, dos, nbar)
    g_abs = max(abs(g) for g in g_values) / (2 * math.pi)
    return HeatingEntry(axis, modes[0].index.label, "continuous", rate, nbar, g_abs, dos,
                        {"p": abs(modes[0].p), "modes": len(modes), "g_sq_sum": sum(abs(g) ** 2 for g in g_values)})


def at_temperature(entry: HeatingEntry, thermal: ThermalContext, omega_i: float) -> HeatingEntry:
    """A continuous entry re-evaluated at another temperature with the same couplings."""
    nbar = float(thermal.nbar(omega_i))
    rate = float(2 * math.pi * nbar * entry.dos_or_kappa * entry.details["g_sq_sum"])
    return replace(entry, gamma=rate, nbar=nbar)


def simplified_flexural_rate(radius: float, young_modulus: float, density: float, T: float, mass: float,
                             omega_i: float) -> float:
    """Closed-form flexural heating by displacement coupling in the classical limit."""
    return (KB / HBAR * T * mass / (2 * math.sqrt(2) * math.pi)
            * math.sqrt(omega_i / (radius**5 * math.sqrt(young_modulus * density**3))))


# ---------------------------------------------------------------- discrete modes

def lorentzian_weights(omega_i: float, omega_gamma, kappa) -> tuple:
    """(G-, G+) with G+- = 2 kappa / (kappa^2 + 4 (omega_i +- omega_gamma)^2)."""
    g_minus = 2 * kappa / (kappa**2 + 4 * (omega_i - omega_gamma) ** 2)
    g_plus = 2 * kappa / (kappa**2 + 4 * (omega_i + omega_gamma) ** 2)
    return g_minus, g_plus


def discrete_mode_rates(omega_i: float, omega_gamma: float, kappa: float, g: complex,
                        thermal: ThermalContext) -> tuple[float, float]:
    """Phonon-induced (decay, heating) rates of one trap axis coupled to a damped mode."""
    if kappa <= 0:
        raise ValueError("phonon decay rate must be positive")
    g_sq = abs(g) ** 2
    if abs(g) >= min(kappa, omega_gamma, omega_i):
        log.warning("weak-coupling assumption |g| << kappa, omega is not satisfied (|g| = %g rad/s)", abs(g))
    nbar = float(thermal.nbar(omega_gamma))
    g_minus, g_plus = lorentzian_weights(omega_i, omega_gamma, kappa)
    decay = 2 * g_sq * (nbar * g_plus + (nbar + 1) * g_minus)
    heating = 2 * g_sq * (nbar * g_minus + (nbar + 1) * g_plus)
    return float(decay), float(heating)


def detuned_discrete_rate(omega_i: float, omega_gamma: float, kappa: float, g: complex,
                          thermal: ThermalContext) -> float:
    """High-occupation limit of the heating rate far from the mode resonance."""
    nbar = float(thermal.nbar(omega_gamma))
    return float(2 * nbar * kappa * abs(g) ** 2 * (omega_i**2 + omega_gamma**2) / (omega_i**2 - omega_gamma**2) ** 2)


def resonant_discrete_rate(omega_i: float, kappa: float, g: complex, thermal: ThermalContext) -> float:
    """High-occupation limit of the heating rate on resonance with one mode."""
    return float(4 * thermal.nbar(omega_i) * abs(g) ** 2 / kappa)


def discrete_entry(axis: str, source: str, omega_i: float, omega_gamma: float, kappa: float, g: complex,
                   thermal: ThermalContext) -> HeatingEntry:
    decay, heating = discrete_mode_rates(omega_i, omega_gamma, kappa, g, thermal)
    return HeatingEntry(axis, source, "discrete", heating, float(thermal.nbar(omega_gamma)),
                        abs(g) / (2 * math.pi), kappa, {"omega_gamma": omega_gamma, "decay": decay})


# ---------------------------------------------------------------- flexural resonator

@dataclass(frozen=True)
class ResonatorModeTerm:
    m: int
    omega_m: float
    kappa: float
    g: float
    nbar: float
    rate: float


@dataclass(frozen=True)
class ResonatorHeating:
    rate: float
    terms: tuple[ResonatorModeTerm, ...]
    tail_bound: float

    @property
    def m_max(self) -> int:
        return self.terms[-1].m


def _kappa_of(kappa, m: int) -> float:
    if np.ndim(kappa) == 0:
        return float(kappa)
    seq = list(kappa)
    return float(seq[m - 1] if m <= len(seq) else seq[-1])


def default_mode_cutoff(fiber: FiberSpec, length: float, omega_i: float) -> int:
    """Smallest m whose resonator frequency exceeds ten times the trap frequency."""
    omega_1 = resonator_frequency(fiber, "F", length, 1)
    return max(1, math.floor(math.sqrt(10 * omega_i / omega_1)) + 1)


def resonator_heating(fiber: FiberSpec, atom_mass: float, omega_i: float, length: float, kappa,
                      z0: float, thermal: ThermalContext, m_max: int | None = None,
                      envelope: bool = False, tail_tol: float = 1e-3) -> ResonatorHeating:
    """Heating of radial or azimuthal motion by discrete flexural resonator modes.

    ``kappa`` is one decay rate for all modes or a per-mode sequence (the last
    entry repeats). With ``envelope`` the position factor is replaced by one.
    Without an explicit ``m_max`` the sum is extended until the bound on the
    omitted tail falls below ``tail_tol`` of the sum.
    """
    if length <= 0:
        raise ValueError("resonator length must be positive")
    auto = m_max is None
    m_max = default_mode_cutoff(fiber, length, omega_i) if auto else int(m_max)

    def term(m: int) -> ResonatorModeTerm:
        omega_m = resonator_frequency(fiber, "F", length, m)
        k = _kappa_of(kappa, m)
        if envelope:
            g = abs(resonator_coupling(fiber, atom_mass, omega_i, m, length, length / (2 * m)))
        else:
            g = resonator_coupling(fiber, atom_mass, omega_i, m, length, z0)
        nbar = float(thermal.nbar(omega_m))
        g_minus, g_plus = lorentzian_weights(omega_i, omega_m, k)
        return ResonatorModeTerm(m, omega_m, k, g, nbar, 4 * g**2 * (nbar * g_minus + (nbar + 1) * g_plus))

    def envelope_rate(m: int) -> float:
        omega_m = resonator_frequency(fiber, "F", length, m)
        k = _kappa_of(kappa, m)
        g = abs(resonator_coupling(fiber, atom_mass, omega_i, m, length, length / (2 * m)))
        nbar = float(thermal.nbar(omega_m))
        g_minus, g_plus = lorentzian_weights(omega_i, omega_m, k)
        return 4 * g**2 * (nbar + 1) * (g_minus + g_plus)

    terms = [term(m) for m in range(1, m_max + 1)]
    while True:
        total = math.fsum(t.rate for t in terms)
        # past ten times the trap frequency the envelope falls at least as m^-6,
        # so the omitted tail is at most e(M) (1 + M/5) for the first omitted M
        nxt = len(terms) + 1
        tail = envelope_rate(nxt) * (1 + nxt / 5)
        if not auto or tail <= tail_tol * total or total == 0.0:
            break
        terms += [term(m) for m in range(nxt, 2 * len(terms) + 1)]
    return ResonatorHeating(float(total), tuple(terms), float(tail))


@dataclass(frozen=True)
class ResonatorLimits:
    below: float
    above_bound: float
    resonant: float
    regime: str


def _resonator_regime(omega_i: float, omega_1: float, kappa: float, nearest_detuning: float,
                      margin: float) -> str:
    if nearest_detuning * margin <= kappa:
        return "resonant"
    if nearest_detuning < margin * kappa:
        return "intermediate"
    if margin * kappa <= omega_i < omega_1:
        return "below"
    if omega_i >= margin * omega_1:
        return "above"
    return "intermediate"


def below_fundamental_rate(fiber: FiberSpec, atom_mass: float, omega_i: float, length: float,
                           kappa_1: float, T: float, z0: float | None = None) -> float:
    """Off-resonant heating dominated by the fundamental mode when the trap lies below it."""
    R, E, rho = fiber.radius, fiber.young_modulus, fiber.density
    rate = 16 / math.pi**9 * KB / HBAR * T * atom_mass * rho * kappa_1 * omega_i**3 * length**7 / (E**2 * R**6)
    return rate if z0 is None else rate * math.sin(math.pi * z0 / length) ** 2


def above_fundamental_bound(fiber: FiberSpec, atom_mass: float, omega_i: float, length: float,
                            kappa: float, T: float) -> float:
    """Position-independent upper bound when the trap lies far above the fundamental mode."""
    R, E = fiber.radius, fiber.young_modulus
    return 2 / (45 * math.pi) * KB / HBAR * T * atom_mass * kappa * omega_i * length**3 / (E * R**4)


def resonant_resonator_rate(fiber: FiberSpec, atom_mass: float, omega_i: float, length: float,
                            kappa_m: float, T: float, m: int | None = None, z0: float | None = None) -> float:
    """Heating on resonance with one flexural resonator mode."""
    R, rho = fiber.radius, fiber.density
    rate = 2 / math.pi * KB / HBAR * T * atom_mass * omega_i / (length * rho * kappa_m * R**2)
    if z0 is None or m is None:
        return rate
    return rate * math.sin(m * math.pi / length * z0) ** 2


def resonator_limits(fiber: FiberSpec, atom_mass: float, omega_i: float, length: float, kappa: float,
                     T: float, z0: float | None = None, require: str | None = None,
                     margin: float = REGIME_MARGIN) -> ResonatorLimits:
    """The three closed-form resonator limits and the regime the inputs fall into.

    ``require`` names a regime ("below", "above", "resonant"); a mismatch raises
    :class:`RegimeViolation` naming the violated inequality. ``z0 = None``
    evaluates the position factors at an antinode.
    """
    omega_1 = resonator_frequency(fiber, "F", length, 1)
    m_near = max(1, round(math.sqrt(omega_i / omega_1)))
    near = min((abs(omega_i - resonator_frequency(fiber, "F", length, m)), m) for m in (m_near - 1, m_near, m_near + 1)
               if m >= 1)
    regime = _resonator_regime(omega_i, omega_1, kappa, near[0], margin)
    if require is not None and regime != require:
        raise RegimeViolation({
            "below": "kappa_1 << omega_i < omega_1 and |omega_i - omega_1| >> kappa_1",
            "above": "omega_i >> omega_1 and |omega_i - omega_m| >> kappa_m",
            "resonant": "|omega_i - omega_m| << kappa_m",
        }[require])
    return ResonatorLimits(
        below=below_fundamental_rate(fiber, atom_mass, omega_i, length, kappa, T, z0),
        above_bound=above_fundamental_bound(fiber, atom_mass, omega_i, length, kappa, T),
        resonant=resonant_resonator_rate(fiber, atom_mass, omega_i, length, kappa, T, near[1], z0),
        regime=regime,
    )


# ---------------------------------------------------------------- report

@dataclass(frozen=True)
class HeatingReport:
    entries: tuple[HeatingEntry, ...]

    def by_axis(self, axis: str) -> list[HeatingEntry]:
        return [e for e in self.entries if e.axis == axis]

    def continuous(self, axis: str) -> float:
        return math.fsum(e.gamma for e in self.by_axis(axis) if e.mechanism == "continuous")

    def discrete(self, axis: str) -> float:
        return math.fsum(e.gamma for e in self.by_axis(axis) if e.mechanism != "continuous")

    def total(self, axis: str) -> float:
        return math.fsum(e.gamma for e in self.by_axis(axis))

    @property
    def totals(self) -> dict:
        return {axis: self.total(axis) for axis in AXES}

    def rate(self, axis: str, source: str) -> float:
        return math.fsum(e.gamma for e in self.by_axis(axis) if e.source == source)


def assemble_report(entries: Sequence[HeatingEntry]) -> HeatingReport:
    """Collect contributions in a fixed axis, mechanism, source order."""
    order = {a: i for i, a in enumerate(AXES)}
    mech = {m: i for i, m in enumerate(MECHANISMS)}
    return HeatingReport(tuple(sorted(entries, key=lambda e: (order[e.axis], mech[e.mechanism], e.source))))


def case_study_entries(fiber: FiberSpec, trap: TrapCharacterization, fields: dict, atom: AtomSpec,
                       thermal: ThermalContext, discrete_modes: Sequence[tuple[PhononMode, float, Callable]] = (),
                       convention: str = "physical") -> list[HeatingEntry]:
    """Continuous L01 and F11 contributions on every axis plus the given damped modes.

    ``discrete_modes`` holds (mode, kappa, strain coupling function) triples.
    """
    entries = [continuous_band_rate(fiber, trap, fields, atom, fam, ax, thermal, convention)
               for ax in AXES for fam in ("L", "F")]
    for mode, kappa, fn in discrete_modes:
        cc = coupling_constants(trap, mode, fn)
        for i, ax in enumerate(AXES):
            entries.append(discrete_entry(ax, mode.index.label, float(trap.omega[i]), mode.omega, kappa,
                                          cc[i].g, thermal))
    return entries

