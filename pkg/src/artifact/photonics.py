"""Guided photonic eigenmodes of a step-index cylinder in vacuum.

Modes are described by the radial partial waves of the electric and magnetic
modal fields, with the dependence ``exp(i(m phi + k z))/(2 pi)`` factored
out.  Inside the fiber the radial dependence is carried by ``J_m`` and
outside by ``K_m``.  The dimensionless radial constants used throughout are

* ``u  = a R``   with ``a  = sqrt(eps w^2/R^2 - k^2)`` (dielectric side)
* ``bt = b~ R``  with ``b~ = sqrt(k^2 - w^2/R^2)``    (vacuum side)

where ``w = omega R / c`` and ``kap = k R``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Iterable

import numpy as np
from scipy import constants, special

from .numerics import Interval, cyl_bessel, cyl_bessel_prime, find_roots, integrate

C_LIGHT = constants.c
EPS0 = constants.epsilon_0
MU0 = constants.mu_0

FAMILIES = ("TE", "TM", "HE", "EH")
CASES = ("circular", "quasilinear-run", "quasilinear-stand")


class NoGuidedRoot(Exception):
    """The requested band has no guided mode at the requested frequency or k."""


@dataclass(frozen=True)
class FiberSpec:
    """Geometry, optical and elastic constants of a nanofiber (SI units)."""

    radius: float
    permittivity: float
    young_modulus: float
    poisson_ratio: float
    density: float
    p1: float
    p2: float
    temperature: float
    length: float

    def __post_init__(self):
        checks = {
            "radius > 0": self.radius > 0,
            "permittivity > 1": self.permittivity > 1,
            "young_modulus > 0": self.young_modulus > 0,
            "0 <= poisson_ratio < 0.5": 0 <= self.poisson_ratio < 0.5,
            "density > 0": self.density > 0,
            "temperature > 0": self.temperature > 0,
            "length > 0": self.length > 0,
        }
        failed = [name for name, ok in checks.items() if not ok]
        if failed:
            raise ValueError("invalid fiber: " + ", ".join(failed))

    def with_(self, **changes) -> "FiberSpec":
        return replace(self, **changes)


def _check_family(family: str, m: int):
    if family not in FAMILIES:
        raise ValueError(f"unknown photonic family {family!r}")
    if (family in ("TE", "TM")) != (m == 0):
        raise ValueError(f"family {family} is incompatible with m={m}")


def _k_ratio(n: int, x):
    """x K_n'(x) / K_n(x), computed from scaled functions to avoid underflow."""
    n = abs(n)
    return -x * special.kve(n + 1, x) / special.kve(n, x) + n


def _residual(family: str, m: int, u, bt, kap, w, eps):
    """Pole-free dimensionless frequency equation; zero on a guided band."""
    V2 = u * u + bt * bt
    if family in ("TE", "TM"):
        j0 = special.j0(u)
        j1 = special.j1(u)
        kr = bt * special.kve(1, bt) / special.kve(0, bt)
        s = 1.0 if family == "TE" else eps
        return (u * j0 * kr + s * bt * bt * j1) / V2
    n = abs(m)
    J = special.jv(n, u)
    jr = u * special.jvp(n, u)
    kr = _k_ratio(n, bt)
    left = (u * u * J * kr + bt * bt * jr) * (u * u * J * kr + eps * bt * bt * jr)
    right = (m * kap * w * (eps - 1.0) * J) ** 2
    return (left - right) / (V2 * V2)


def _root_number(family: str, n: int) -> int:
    if n < 1:
        raise ValueError("band index n starts at 1")
    if family == "HE":
        return 2 * n - 1
    if family == "EH":
        return 2 * n
    return n


def _pick_root(roots: list[float], family: str, n: int, what: str) -> float:
    idx = _root_number(family, n)
    if len(roots) < idx:
        raise NoGuidedRoot(f"{family} band n={n} is not guided at this {what}")
    return roots[idx - 1]


@dataclass(frozen=True)
class GuidedMode:
    """A normalized guided eigenmode with signed azimuthal order and propagation constant."""

    family: str
    m: int
    n: int
    k: float
    omega: float
    radius: float
    permittivity: float
    u: float
    bt: float
    amplitude: float = 1.0

    @property
    def kap(self) -> float:
        return self.k * self.radius

    @property
    def w(self) -> float:
        return self.omega * self.radius / C_LIGHT

    @property
    def a(self) -> float:
        return self.u / self.radius

    @property
    def b_tilde(self) -> float:
        return self.bt / self.radius

    @cached_property
    def gamma(self) -> float:
        if self.family in ("TE", "TM"):
            return 0.0
        m, u, bt, eps = self.m, self.u, self.bt, self.permittivity
        J, Jp = cyl_bessel("J", m, u), cyl_bessel_prime("J", m, u)
        K, Kp = cyl_bessel("K", m, bt), cyl_bessel_prime("K", m, bt)
        return self.kap * self.w * (eps - 1.0) * J * K / (u * bt * (u * J * Kp + bt * Jp * K))

    @cached_property
    def eta(self) -> float:
        order = 0 if self.family in ("TE", "TM") else self.m
        return cyl_bessel("J", order, self.u) / cyl_bessel("K", order, self.bt)

    def residual(self) -> float:
        return float(_residual(self.family, self.m, self.u, self.bt, self.kap, self.w, self.permittivity))

    def reflected(self, m_sign: int = 1, k_sign: int = 1) -> "GuidedMode":
        """Degenerate partner with azimuthal order ``m_sign*m`` and propagation constant ``k_sign*k``."""
        out = replace(self, m=m_sign * self.m, k=k_sign * self.k)
        return out

    def radial_fields(self, r) -> tuple[np.ndarray, np.ndarray]:
        """Radial partial waves (E, B) as complex arrays of shape (3, ...) in (r, phi, z) order."""
        r = np.asarray(r, dtype=float)
        shape = r.shape
        x = np.maximum(np.atleast_1d(r) / self.radius, 1e-300)
        inside = x < 1.0
        E = np.zeros((3,) + x.shape, dtype=complex)
        B = np.zeros((3,) + x.shape, dtype=complex)
        fi = self._inside(x[inside]) if np.any(inside) else None
        fo = self._outside(x[~inside]) if np.any(~inside) else None
        for comp in range(3):
            if fi is not None:
                E[comp][inside] = fi[0][comp]
                B[comp][inside] = fi[1][comp]
            if fo is not None:
                E[comp][~inside] = fo[0][comp]
                B[comp][~inside] = fo[1][comp]
        E = E.reshape((3,) + shape)
        B = B.reshape((3,) + shape)
        return self.amplitude * E, self.amplitude * B

    def _inside(self, x):
        u, kap, w, eps, m = self.u, self.kap, self.w, self.permittivity, self.m
        c = C_LIGHT
        if self.family in ("TE", "TM"):
            j0 = special.j0(u * x)
            j1 = special.j1(u * x)
            z = np.zeros_like(x)
            if self.family == "TE":
                E = (z, -w / u * j1 + 0j, z)
                B = (kap / u * j1 / c + 0j, z + 0j, 1j * j0 / c)
            else:
                E = (-1j * kap / u * j1, z + 0j, j0 + 0j)
                B = (z + 0j, -1j * eps * w / u * j1 / c, z + 0j)
            return E, B
        J, Jp = cyl_bessel("J", m, u * x), cyl_bessel_prime("J", m, u * x)
        g = self.gamma
        Jx = J / x
        E = (
            1j / u**2 * (kap * u * Jp - m * m * w * g * Jx),
            m / u**2 * (w * g * u * Jp - kap * Jx) + 0j,
            J + 0j,
        )
        B = (
            -m / u**2 * (kap * g * u * Jp - eps * w * Jx) / c + 0j,
            1j / u**2 * (eps * w * u * Jp - m * m * kap * g * Jx) / c,
            1j * m * g * J / c,
        )
        return E, B

    def _outside(self, x):
        bt, kap, w, m = self.bt, self.kap, self.w, self.m
        c = C_LIGHT
        eta = self.eta
        if self.family in ("TE", "TM"):
            k0 = special.k0(bt * x)
            k1 = special.k1(bt * x)
            z = np.zeros_like(x)
            if self.family == "TE":
                E = (z + 0j, eta * w / bt * k1 + 0j, z + 0j)
                B = (-eta * kap / bt * k1 / c + 0j, z + 0j, 1j * eta * k0 / c)
            else:
                E = (1j * eta * kap / bt * k1, z + 0j, eta * k0 + 0j)
                B = (z + 0j, 1j * eta * w / bt * k1 / c, z + 0j)
            return E, B
        K = special.kv(abs(m), bt * x)
        Kp = special.kvp(abs(m), bt * x)
        g = self.gamma
        Kx = K / x
        E = (
            -1j * eta / bt**2 * (kap * bt * Kp - m * m * w * g * Kx),
            -m * eta / bt**2 * (w * g * bt * Kp - kap * Kx) + 0j,
            eta * K + 0j,
        )
        B = (
            m * eta / bt**2 * (kap * g * bt * Kp - w * Kx) / c + 0j,
            -1j * eta / bt**2 * (w * bt * Kp - m * m * kap * g * Kx) / c,
            1j * m * eta * g * K / c,
        )
        return E, B

    def field(self, r, phi, z) -> tuple[np.ndarray, np.ndarray]:
        """Modal fields e, b including the azimuthal and axial phase factor."""
        E, B = self.radial_fields(r)
        ph = np.exp(1j * (self.m * np.asarray(phi) + self.k * np.asarray(z))) / (2 * np.pi)
        return E * ph, B * ph

    def power_per_amplitude(self) -> float:
        """Axial power of the field ``2 pi a e`` divided by ``a**2``.

        This is the power of one circular constituent per squared amplitude.
        """
        R = self.radius

        def flux(x):
            E, B = self.radial_fields(x * R)
            return x * np.real(E[0] * np.conj(B[1]) - E[1] * np.conj(B[0]))

        inner = integrate(flux, 0.0, 1.0)
        outer = integrate(flux, 1.0, None, decay=2 * self.bt)
        return float(4 * np.pi / MU0 * R**2 * (inner + outer))

    def norm_integral(self) -> float:
        """The integral of r eps(r) |E(r)|^2 over r >= 0, which equals 1/eps0^2 after normalization."""
        R = self.radius

        def dens(x, eps):
            E, _ = self.radial_fields(x * R)
            return x * eps * np.sum(np.abs(E) ** 2, axis=0)

        inner = integrate(lambda x: dens(x, self.permittivity), 0.0, 1.0)
        outer = integrate(lambda x: dens(x, 1.0), 1.0, None, decay=2 * self.bt)
        return float(R**2 * (inner + outer))


def _normalized(mode: GuidedMode) -> GuidedMode:
    raw = replace(mode, amplitude=1.0)
    return replace(raw, amplitude=1.0 / (EPS0 * math.sqrt(raw.norm_integral())))


def _bessel_root(order: int, n: int) -> float:
    return float(special.jn_zeros(order, n)[-1])


def cutoff_u(fiber: FiberSpec, family: str, m: int, n: int) -> float:
    """Normalized cutoff ``a R`` of a band on the vacuum light line."""
    _check_family(family, m)
    am = abs(m)
    if family in ("TE", "TM"):
        return _bessel_root(0, n)
    if family == "EH":
        return _bessel_root(am, n)
    if am == 1:
        return 0.0 if n == 1 else _bessel_root(1, n - 1)
    eps = fiber.permittivity

    def f(a):
        return (am * (am - 1) - a * a / (eps + 1)) * special.jv(am, a) + (am - 1) * a * special.jvp(am, a)

    upper = 10.0 + 4.0 * n + 2.0 * am
    roots = find_roots(f, Interval(1e-3, upper)).roots
    while len(roots) < n:
        upper *= 2
        roots = find_roots(f, Interval(1e-3, upper)).roots
    return roots[n - 1]


def cutoff_frequency(fiber: FiberSpec, family: str, m: int, n: int) -> float:
    """Angular cutoff frequency of band ``family_{|m| n}``; 0 for the fundamental HE11 band."""
    uc = cutoff_u(fiber, family, m, n)
    return uc * C_LIGHT / (fiber.radius * math.sqrt(fiber.permittivity - 1.0))


def solve_guided_k(fiber: FiberSpec, family: str, m: int, n: int, omega: float,
                   points_per_decade: int = 2000) -> GuidedMode:
    """Guided mode of band ``family_{|m| n}`` at angular frequency ``omega`` (k > 0)."""
    _check_family(family, m)
    if omega <= cutoff_frequency(fiber, family, m, n):
        raise NoGuidedRoot(f"{family}{abs(m)}{n} is below cutoff at omega={omega!r}")
    eps = fiber.permittivity
    w = omega * fiber.radius / C_LIGHT
    V = w * math.sqrt(eps - 1.0)

    def kappa(u):
        return np.sqrt(eps * w * w - u * u)

    def f(u):
        return _residual(family, m, u, np.sqrt(np.maximum(V * V - u * u, 0.0)), kappa(u), w, eps)

    roots = find_roots(f, Interval(1e-4 * V, V * (1 - 1e-10)), points_per_decade=points_per_decade).roots
    u = _pick_root(roots, family, n, "frequency")
    bt = math.sqrt(V * V - u * u)
    k = float(kappa(u)) / fiber.radius
    return _normalized(GuidedMode(family, m, n, k, omega, fiber.radius, eps, u, bt))


def solve_guided_omega(fiber: FiberSpec, family: str, m: int, n: int, k: float,
                       points_per_decade: int = 2000) -> GuidedMode:
    """Guided mode of band ``family_{|m| n}`` at propagation constant ``k`` (sign kept)."""
    _check_family(family, m)
    eps = fiber.permittivity
    kap = abs(k) * fiber.radius

    def parts(w):
        return np.sqrt(np.maximum(eps * w * w - kap * kap, 0.0)), np.sqrt(np.maximum(kap * kap - w * w, 0.0))

    def f(w):
        u, bt = parts(w)
        return _residual(family, m, u, bt, kap, w, eps)

    lo = kap / math.sqrt(eps) * (1 + 1e-10)
    hi = kap * (1 - 1e-10)
    # grid resolves the band spacing: at least 2000 points across the guided window
    grid = np.linspace(lo, hi, max(points_per_decade, 2000))
    roots = find_roots(f, Interval(lo, hi), grid=grid).roots
    w = _pick_root(roots, family, n, "propagation constant")
    u, bt = parts(w)
    omega = w * C_LIGHT / fiber.radius
    return _normalized(GuidedMode(family, m, n, float(k), omega, fiber.radius, eps, float(u), float(bt)))


def band_scan(fiber: FiberSpec, family: str, m: int, n: int, k_grid: Iterable[float]):
    """(k, omega) pairs along a band; ``omega`` is None where the band is not guided."""
    out = []
    for k in k_grid:
        try:
            out.append((float(k), solve_guided_omega(fiber, family, m, n, k).omega))
        except NoGuidedRoot:
            out.append((float(k), None))
    return out


def modal_field(mode: GuidedMode, r):
    """Radial partial waves (E, B) of ``mode`` at radius ``r``."""
    return mode.radial_fields(r)


@dataclass(frozen=True)
class FieldProfile:
    """Monochromatic complex field profile ``E0 = sum_p alpha_p e_p``."""

    components: tuple[tuple[GuidedMode, complex], ...]
    case: str
    alpha: float
    omega: float

    def E0(self, r, phi, z) -> np.ndarray:
        total = 0j
        for mode, amp in self.components:
            e, _ = mode.field(r, phi, z)
            total = total + amp * e
        return total

    def B0(self, r, phi, z) -> np.ndarray:
        total = 0j
        for mode, amp in self.components:
            _, b = mode.field(r, phi, z)
            total = total + amp * b
        return total

    def scaled(self, factor: float) -> "FieldProfile":
        comps = tuple((mode, amp * factor) for mode, amp in self.components)
        return replace(self, components=comps, alpha=self.alpha * factor)


def make_field(fiber: FiberSpec, mode: GuidedMode, case: str, power: float,
               theta: float = 0.0, theta_phi: float = 0.0, theta_z: float = 0.0,
               direction: int = 1, rotation: int = 1) -> FieldProfile:
    """Trapping field built from the four degenerate partners of ``mode``.

    ``power`` is the power carried by one beam: the single circular wave, the
    quasilinear running wave (two circular constituents of ``power/2``
    each), or either direction of the standing wave.  ``mode`` must have
    ``m > 0`` and ``k > 0``.
    """
    if case not in CASES:
        raise ValueError(f"unknown field case {case!r}")
    if power <= 0:
        raise ValueError("power must be positive")
    if mode.m <= 0 or mode.k <= 0:
        raise ValueError("make_field expects the m > 0, k > 0 representative")
    per_constituent = power if case == "circular" else 0.5 * power
    alpha = math.sqrt(per_constituent / mode.power_per_amplitude())
    m = mode.m
    comps = []
    if case == "circular":
        combos = [(rotation, direction)]
    elif case == "quasilinear-run":
        combos = [(1, direction), (-1, direction)]
    else:
        combos = [(sp, sz) for sz in (1, -1) for sp in (1, -1)]
    for sp, sz in combos:
        phase = theta
        if case != "circular":
            # minus sign puts the polarization axis at +theta_phi from x
            phase -= sp * sz * theta_phi
        if case == "quasilinear-stand":
            phase += sz * theta_z
        amp = (sp * sz) ** m * 2 * np.pi * alpha * np.exp(1j * phase)
        comps.append((mode.reflected(sp * sz, sz), amp))
    return FieldProfile(tuple(comps), case, alpha, mode.omega)
