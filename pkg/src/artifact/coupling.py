"""Atom-phonon coupling functions and coupling constants.

Displacement coupling treats the trap potential as rigidly shifted with the
fiber surface.  Strain coupling follows the photoelastic change of the
permittivity, which mixes every populated pump mode into guided partner modes
at first order in the strain.  All coupling functions are in joules and all
coupling constants are angular frequencies: rad/s for discrete modes and
rad/s times sqrt(m) for modes on a continuous band.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np

from .photonics import EPS0, FiberSpec, FieldProfile, GuidedMode, NoGuidedRoot, solve_guided_omega
from .phononics import PhononMode, PhononModeIndex, fiber_elastic, resonator_frequency
from .trap import HBAR, AtomSpec, TrapCharacterization, _zb_cyl, tensor_factor, total_potential

log = logging.getLogger(__name__)

AXES = ("r", "phi", "z")
DEGENERACY_GUARD = 1e-6
STANDING_CONVENTIONS = ("physical", "cos-running")
_QUAD_NODES = 64


def photoelastic_contract(S: np.ndarray, p1: float, p2: float) -> np.ndarray:
    """``P:S`` for the isotropic photoelastic tensor with ``P3 = (P1 - P2)/2``.

    ``S`` has shape (3, 3, ...); diagonal entries pick up ``P1`` on their own
    component and ``P2`` on the other two, off-diagonal ones ``2 P3``.
    """
    S = np.asarray(S)
    trace = S[0, 0] + S[1, 1] + S[2, 2]
    out = (p1 - p2) * S
    for k in range(3):
        out[k, k] = p1 * S[k, k] + p2 * (trace - S[k, k])
    return out


@dataclass(frozen=True)
class PermittivityPerturbation:
    """Radial profile of the strain-induced permittivity change at fixed (j, p).

    ``profile(r)`` returns the symmetric (3, 3, ...) array ``-eps^2 P:S(r)``
    with the azimuthal and axial phase factored out.
    """

    profile: Callable
    j: int
    p: float
    source: PhononModeIndex | None = None

    def __call__(self, r) -> np.ndarray:
        return self.profile(r)


def photoelastic_perturbation(fiber: FiberSpec, strain: Callable, j: int, p: float,
                              source: PhononModeIndex | None = None) -> PermittivityPerturbation:
    eps2 = fiber.permittivity**2

    def profile(r):
        return -eps2 * photoelastic_contract(np.array(strain(r), dtype=complex), fiber.p1, fiber.p2)

    return PermittivityPerturbation(profile, int(j), float(p), source)


def partner_bands(m_prime: int) -> tuple[tuple[str, int], ...]:
    """Guided bands populated at azimuthal order ``m_prime``: TE01/TM01 or HE_{|m'|1}."""
    if m_prime == 0:
        return (("TE", 1), ("TM", 1))
    return (("HE", 1),)


@lru_cache(maxsize=4096)
def _partner_mode(fiber: FiberSpec, family: str, m: int, n: int, k: float) -> GuidedMode | None:
    try:
        return solve_guided_omega(fiber, family, m, n, k)
    except NoGuidedRoot:
        return None


def _radial_nodes(radius: float, nodes: int = _QUAD_NODES):
    xg, wg = np.polynomial.legendre.leggauss(nodes)
    r = 0.5 * radius * (xg + 1.0)
    return r, 0.5 * radius * wg


@dataclass(frozen=True)
class MixingTerm:
    """One partner mode populated by one pump component."""

    pump: GuidedMode
    pump_amplitude: complex
    partner: GuidedMode
    coefficient: complex

    @property
    def amplitude(self) -> complex:
        return self.pump_amplitude * self.coefficient


@dataclass(frozen=True)
class ModeMixing:
    terms: tuple[MixingTerm, ...]
    skipped: tuple[str, ...] = ()

    def field_change(self, r, phi, z) -> np.ndarray:
        total = np.zeros(3, dtype=complex)
        for t in self.terms:
            e, _ = t.partner.field(r, phi, z)
            total = total + t.amplitude * e
        return total

    def __add__(self, other: "ModeMixing") -> "ModeMixing":
        return ModeMixing(self.terms + other.terms, self.skipped + other.skipped)


def mixing_coefficient(fiber: FiberSpec, pump: GuidedMode, partner: GuidedMode,
                       perturbation: PermittivityPerturbation, scale: complex) -> complex:
    """``omega0^2/(omega'^2 - omega0^2) scale int_0^R r a'* . de . a dr`` with ``a = -i eps0 e``."""
    r, w = _radial_nodes(fiber.radius)
    e0, _ = pump.radial_fields(r)
    e1, _ = partner.radial_fields(r)
    de = perturbation(r)
    inner = np.einsum("in,ijn,jn->n", np.conj(e1), de, e0)
    overlap = EPS0**2 * np.dot(w, r * inner)
    w0, w1 = pump.omega, partner.omega
    return w0**2 / (w1**2 - w0**2) * scale * overlap


def perturbed_mode_mixing(fiber: FiberSpec, pump: GuidedMode, perturbation: PermittivityPerturbation,
                          scale: complex, pump_amplitude: complex = 1.0) -> ModeMixing:
    """Partner modes at ``m' = m + j``, ``k' = k + p`` and their first-order amplitudes.

    Bands without a guided root at ``k'`` are skipped and logged; partners
    degenerate with the pump are rejected.
    """
    m1 = pump.m + perturbation.j
    k1 = pump.k + perturbation.p
    terms, skipped = [], []
    for family, n in partner_bands(m1):
        partner = _partner_mode(fiber, family, m1, n, float(k1))
        label = f"{family}{abs(m1)}{n} at m'={m1}, k'={k1:.6g}/m"
        if partner is None:
            skipped.append(f"{label}: not guided")
            log.debug("skipping %s: not guided", label)
            continue
        if abs(partner.omega**2 - pump.omega**2) < DEGENERACY_GUARD * pump.omega**2:
            skipped.append(f"{label}: degenerate with the pump")
            log.warning("rejecting %s: degenerate with the pump", label)
            continue
        coef = mixing_coefficient(fiber, pump, partner, perturbation, scale)
        terms.append(MixingTerm(pump, complex(pump_amplitude), partner, complex(coef)))
    return ModeMixing(tuple(terms), tuple(skipped))


def first_order_shift(fiber: FiberSpec, pump: GuidedMode, perturbation: PermittivityPerturbation) -> complex:
    """First-order change of ``omega^2/c^2`` relative to its value; zero unless j = p = 0."""
    if perturbation.j != 0 or perturbation.p != 0:
        return 0.0
    r, w = _radial_nodes(fiber.radius)
    e0, _ = pump.radial_fields(r)
    num = np.dot(w, r * np.einsum("in,ijn,jn->n", np.conj(e0), perturbation(r), e0))
    return complex(-num * EPS0**2)


def _strain_pieces(phonon: PhononMode, convention: str):
    """Partial-wave pieces (strain(r), j, p, weight) of the ``b`` and ``b^dagger`` terms."""
    if convention not in STANDING_CONVENTIONS:
        raise ValueError(f"unknown standing-wave convention {convention!r}")
    j, p = phonon.j, phonon.p
    if not phonon.index.standing:
        scale = phonon.U_gamma / (2 * math.pi)
        b = [(phonon.strain, j, p, 1.0)]
        bdag = [(lambda r: np.conj(phonon.strain(r)), -j, -p, 1.0)]
        return scale, b, bdag
    scale = phonon.U_gamma / math.sqrt(math.pi * phonon.length)
    if convention == "physical":
        back = phonon.reflected(p_sign=-1)
        b = [(phonon.strain, j, p, 1 / 2j), (back.strain, j, -p, -1 / 2j)]
        bdag = [(lambda r: np.conj(phonon.strain(r)), -j, -p, -1 / 2j),
                (lambda r: np.conj(back.strain(r)), -j, p, 1 / 2j)]
    else:
        # running-wave strain profile with an axial cos(pz); b^dagger reuses b
        b = [(phonon.strain, j, p, 0.5), (phonon.strain, j, -p, 0.5)]
        bdag = b
    return scale, b, bdag


def _mixing_for_field(fiber: FiberSpec, field_profile: FieldProfile, pieces, scale, source) -> ModeMixing:
    total = ModeMixing(())
    for strain, j, p, weight in pieces:
        pert = photoelastic_perturbation(fiber, strain, j, p, source)
        for pump, amp in field_profile.components:
            total = total + perturbed_mode_mixing(fiber, pump, pert, scale * weight, amp)
    return total


@dataclass(frozen=True)
class StrainCoupling:
    """Precomputed strain response of every trapping color to one phonon mode."""

    phonon: PhononMode
    atom: AtomSpec
    colors: tuple
    convention: str = "physical"
    skipped: tuple[str, ...] = field(default=(), compare=False)

    def __call__(self, x) -> complex:
        r, phi, z = x
        zb = _zb_cyl(self.atom.phi_B, phi)
        F, M_F = self.atom.F, self.atom.M_F
        total = 0j
        for color, fp, mix_b, mix_bd in self.colors:
            a_s, a_v, a_t = self.atom.hfs(color)
            E0 = fp.E0(r, phi, z)
            db = mix_b.field_change(r, phi, z)
            dbd = np.conj(mix_bd.field_change(r, phi, z))
            total += -a_s * (np.dot(np.conj(E0), db) + np.dot(E0, dbd))
            cross = np.cross(np.conj(E0), db) - np.cross(E0, dbd)
            total += -a_v / 2j * (M_F / F) * np.dot(cross, zb)
            if a_t != 0:
                e0b = np.dot(E0, zb)
                proj = np.conj(e0b) * np.dot(db, zb) + e0b * np.dot(dbd, zb)
                iso = (np.dot(np.conj(E0), db) + np.dot(E0, dbd)) / 3
                total += -3 * a_t * tensor_factor(F, M_F) * (proj - iso)
        return complex(total)


def strain_coupling(fiber: FiberSpec, fields: dict, atom: AtomSpec, phonon: PhononMode,
                    convention: str = "physical") -> StrainCoupling:
    """Strain coupling function of ``phonon`` for the trapping ``fields`` (color -> FieldProfile).

    ``convention`` only affects standing-wave modes: ``physical`` builds them
    from the two counter-propagating running waves so the strain is real up
    to the mode's phase; ``cos-running`` uses the running-wave strain profile
    times ``cos(pz)`` and the real part of the field change.
    """
    scale, b, bdag = _strain_pieces(phonon, convention)
    colors, skipped = [], []
    for color, fp in fields.items():
        mix_b = _mixing_for_field(fiber, fp, b, scale, phonon.index)
        mix_bd = mix_b if bdag is b else _mixing_for_field(fiber, fp, bdag, scale, phonon.index)
        colors.append((color, fp, mix_b, mix_bd))
        skipped.extend(f"{color}: {s}" for s in mix_b.skipped + (() if bdag is b else mix_bd.skipped))
    return StrainCoupling(phonon, atom, tuple(colors), convention, tuple(skipped))


def strain_coupling_fn(fiber: FiberSpec, fields: dict, atom: AtomSpec, phonon: PhononMode, x,
                       convention: str = "physical") -> complex:
    return strain_coupling(fiber, fields, atom, phonon, convention)(x)


def _potential_gradient(potential: Callable, x, step: float = 1e-9) -> tuple[float, float]:
    """(d_r V, d_phi V / r) by Richardson-extrapolated central differences."""
    r, phi, z = x

    def d(fn, h):
        return (fn(h) - fn(-h)) / (2 * h)

    fr = lambda h: potential((r + h, phi, z))  # noqa: E731
    fp = lambda h: potential((r, phi + h / r, z))  # noqa: E731
    dr = (4 * d(fr, step / 2) - d(fr, step)) / 3
    dp = (4 * d(fp, step / 2) - d(fp, step)) / 3
    return dr, dp


def displacement_coupling_fn(potential: Callable, phonon: PhononMode, x) -> complex:
    """``-U [w^r(R) d_r V0 + delta_F w^phi(R) d_phi V0 / r]`` at ``x``.

    ``potential`` maps (r, phi, z) to the unperturbed trap potential in joules.
    """
    if phonon.index.family == "T":
        return 0j
    r, phi, z = x
    w = phonon.displacement_field(phonon.radius, phi, z)
    dr, dp = _potential_gradient(potential, x)
    g = w[0] * dr
    if phonon.index.family == "F":
        g = g + w[1] * dp
    return complex(-phonon.U_gamma * g)


def trap_potential(fields: dict, atom: AtomSpec, radius: float, include_cp: bool = True) -> Callable:
    return lambda x: total_potential(fields, atom, x, radius, include_cp)


def coupling_gradient(trap: TrapCharacterization, fn: Callable, rel_step: float = 1e-2):
    """``(dx_i / hbar) d_i g(x0)`` along (r, r0 phi, z) with a step-halving check.

    Returns the three constants and the largest relative change when the
    step is halved.
    """
    r0, phi0, z0 = trap.x0

    def at(y):
        return fn((y[0], y[1] / r0, y[2]))

    y0 = np.array([r0, r0 * phi0, z0])

    def grad(scale):
        out = np.zeros(3, dtype=complex)
        for i in range(3):
            h = scale * trap.dx[i]
            e = np.zeros(3)
            e[i] = h
            out[i] = (at(y0 + e) - at(y0 - e)) / (2 * h)
        return out

    g1, g2 = grad(rel_step), grad(rel_step / 2)
    ref = max(float(np.max(np.abs(g2))), 1e-300)
    change = float(np.max(np.abs(g2 - g1))) / ref
    return trap.dx / HBAR * g2, change


@dataclass(frozen=True)
class CouplingConstant:
    """Coupling constants of one phonon mode to one trap axis, as angular frequencies."""

    gamma: PhononModeIndex
    axis: str
    g_dp: complex
    g_st: complex
    halving_change: float = 0.0

    @property
    def g(self) -> complex:
        return self.g_dp + self.g_st

    @property
    def units(self) -> str:
        return "Hz" if self.gamma.standing else "Hz*sqrt(m)"

    @property
    def g_dp_over_2pi(self) -> float:
        return abs(self.g_dp) / (2 * math.pi)

    @property
    def g_st_over_2pi(self) -> float:
        return abs(self.g_st) / (2 * math.pi)


def displacement_coupling_constants(trap: TrapCharacterization, phonon: PhononMode) -> np.ndarray:
    """Displacement couplings on (r, phi, z) from the trap Hessian including cross terms."""
    if phonon.index.family == "T":
        return np.zeros(3, dtype=complex)
    r0, phi0, z0 = trap.x0
    w = phonon.displacement_field(phonon.radius, phi0, z0)
    shift = np.array([w[0], w[1] if phonon.index.family == "F" else 0.0, 0.0], dtype=complex)
    return -trap.dx / HBAR * phonon.U_gamma * (trap.hessian @ shift)


def closed_form_displacement(fiber: FiberSpec, atom_mass: float, family: str, omega_i: float,
                             omega_gamma: float) -> float:
    """Magnitude of the displacement coupling without trap cross terms."""
    rho = fiber.density
    if family == "L":
        c_h = fiber_elastic(fiber).c_h
        return fiber.poisson_ratio / (2 * math.pi * c_h) * math.sqrt(atom_mass * omega_i**3 * omega_gamma / (2 * rho))
    if family == "F":
        return math.sqrt(atom_mass * omega_i**3 / (rho * omega_gamma)) / (4 * math.pi * fiber.radius)
    return 0.0


def resonator_coupling(fiber: FiberSpec, atom_mass: float, omega_i: float, m: int, length: float, z: float) -> float:
    """Displacement coupling of a flexural resonator mode to radial or azimuthal motion."""
    omega_m = resonator_frequency(fiber, "F", length, m)
    p_m = m * math.pi / length
    amp = omega_i / (2 * fiber.radius) * math.sqrt(atom_mass * omega_i / (math.pi * length * fiber.density * omega_m))
    return -amp * math.sin(p_m * z)


def coupling_constants(trap: TrapCharacterization, phonon: PhononMode, strain_fn: Callable | None = None,
                       rel_step: float = 1e-2) -> list[CouplingConstant]:
    """Displacement and strain coupling constants of ``phonon`` on all three axes."""
    g_dp = displacement_coupling_constants(trap, phonon)
    if strain_fn is None:
        g_st, change = np.zeros(3, dtype=complex), 0.0
    else:
        g_st, change = coupling_gradient(trap, strain_fn, rel_step)
    return [CouplingConstant(phonon.index, ax, complex(g_dp[i]), complex(g_st[i]), change)
            for i, ax in enumerate(AXES)]

