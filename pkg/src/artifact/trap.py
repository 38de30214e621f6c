"""Two-color optical trap potential and its harmonic characterization."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import constants, optimize

from .numerics import ConvergenceError, DomainError, gradient3, hessian3, wigner_6j
from .photonics import FieldProfile

HBAR = constants.hbar
H_PLANCK = constants.h
ATOMIC_POLARIZABILITY = 1.65e-41  # A^2 s^4 / kg


@dataclass(frozen=True)
class Polarizability:
    """Fine-structure polarizabilities of one light color, in A^2 s^4 / kg."""

    scalar: float
    vector: float
    tensor: float = 0.0


@dataclass(frozen=True)
class AtomSpec:
    mass: float
    F: float
    M_F: float
    J: float
    I: float
    polarizabilities: dict
    c_cp: float
    phi_B: float

    def __post_init__(self):
        if self.mass <= 0:
            raise ValueError("atom mass must be positive")
        if abs(self.M_F) > self.F:
            raise ValueError("|M_F| must not exceed F")
        if not abs(self.J - self.I) <= self.F <= self.J + self.I:
            raise ValueError("F, J, I violate the triangle rule")

    @property
    def z_B(self) -> np.ndarray:
        return np.array([math.cos(self.phi_B), math.sin(self.phi_B), 0.0])

    def hfs(self, color: str) -> tuple[float, float, float]:
        pol = self.polarizabilities[color]
        av, at = hfs_polarizabilities(pol.vector, pol.tensor, self.F, self.J, self.I)
        return pol.scalar, av, at


def _zb_cyl(phi_B: float, phi):
    """Quantization axis in the local (r, phi, z) basis at azimuth ``phi``."""
    return np.array([np.cos(phi_B - phi), np.sin(phi_B - phi), np.zeros_like(phi)])


def scalar_shift(E0, alpha_s: float) -> float:
    E0 = np.asarray(E0)
    return float(-alpha_s * np.real(np.vdot(E0, E0)))


def vector_shift(E0, alpha_v: float, F: float, M_F: float, z_B) -> float:
    E0 = np.asarray(E0)
    cross = np.cross(np.conj(E0), E0)
    return float(np.real(-alpha_v / 2j * (M_F / F) * np.dot(cross, z_B)))


def tensor_factor(F: float, M_F: float) -> float:
    return (3 * M_F**2 - F * (F + 1)) / (2 * F * (2 * F - 1))


def tensor_shift(E0, alpha_t: float, F: float, M_F: float, z_B) -> float:
    if F < 1:
        raise ValueError("tensor light shift needs F >= 1")
    if alpha_t == 0:
        return 0.0
    E0 = np.asarray(E0)
    proj = abs(np.dot(E0, z_B)) ** 2
    return float(-3 * alpha_t * tensor_factor(F, M_F) * (proj - np.real(np.vdot(E0, E0)) / 3.0))


def hfs_polarizabilities(alpha_v_fs: float, alpha_t_fs: float, F: float, J: float, I: float):
    """Hyperfine vector and tensor polarizabilities from fine-structure ones."""
    av = (F * (F + 1) + J * (J + 1) - I * (I + 1)) / ((F + 1) * 2 * J) * alpha_v_fs
    if alpha_t_fs == 0 or J < 1 or F < 1:
        # a rank-2 shift of a J = 1/2 or F < 1 level vanishes identically
        return av, 0.0
    sign = (-1) ** round(J + I + F)
    pre = math.sqrt(3 * (J + 1) * (2 * J + 1) * (2 * J + 3) / (2 * J * (2 * J - 1)))
    pre *= math.sqrt(2 * F * (2 * F - 1) * (2 * F + 1) / (3 * (F + 1) * (2 * F + 3)))
    return av, sign * pre * wigner_6j(F, 2, F, J, I, J) * alpha_t_fs


def casimir_polder(r: float, c_cp: float, radius: float) -> float:
    if r <= radius:
        raise DomainError("Casimir-Polder potential needs r > R")
    return -c_cp / (r - radius) ** 3


def optical_potential(field: FieldProfile, atom: AtomSpec, color: str, x) -> float:
    r, phi, z = x
    E0 = field.E0(r, phi, z)
    a_s, a_v, a_t = atom.hfs(color)
    zb = _zb_cyl(atom.phi_B, phi)
    return (scalar_shift(E0, a_s) + vector_shift(E0, a_v, atom.F, atom.M_F, zb)
            + tensor_shift(E0, a_t, atom.F, atom.M_F, zb))


def total_potential(fields: dict, atom: AtomSpec, x, radius: float, include_cp: bool = True) -> float:
    """Sum of the light shifts of every color plus the surface potential, in joules."""
    total = sum(optical_potential(f, atom, color, x) for color, f in fields.items())
    if include_cp:
        total += casimir_polder(x[0], atom.c_cp, radius)
    return total


@dataclass(frozen=True)
class TrapCharacterization:
    x0: tuple[float, float, float]
    V0: float
    omega: np.ndarray
    omega_ij_sq: np.ndarray
    dx: np.ndarray
    hessian: np.ndarray
    gradient: np.ndarray
    step_halving_change: float
    flags: dict = field(default_factory=dict)

    @property
    def omega_ij(self) -> np.ndarray:
        """Signed cross frequencies sign(H_ij) sqrt(|H_ij|/M)."""
        return np.sign(self.omega_ij_sq) * np.sqrt(np.abs(self.omega_ij_sq))

    @property
    def r0(self) -> float:
        return self.x0[0]


def _richardson_gradient(fn, y, h):
    g1 = gradient3(fn, y, h)
    g2 = gradient3(fn, y, h / 2)
    return (4 * g2 - g1) / 3


def find_trap(fields: dict, atom: AtomSpec, radius: float, seed, include_cp: bool = True,
              steps=(1e-9, 1e-9, 1e-9), max_newton: int = 30) -> TrapCharacterization:
    """Locate and characterize the local minimum of the total potential near ``seed``.

    Coordinate descent on (r, phi) at fixed z by bounded Brent searches, then
    Newton iterations on the local coordinates (r, r0 phi, z).
    """
    r, phi, z = (float(v) for v in seed)

    def V(xc):
        return total_potential(fields, atom, xc, radius, include_cp) / H_PLANCK

    for _ in range(40):
        r_old, phi_old = r, phi
        lo_r = radius + 0.05 * radius
        res = optimize.minimize_scalar(lambda rr: V((rr, phi, z)), bounds=(lo_r, max(4 * radius, 2 * r)),
                                       method="bounded", options={"xatol": 1e-13})
        r = float(res.x)
        res = optimize.minimize_scalar(lambda pp: V((r, pp, z)), bounds=(phi - 0.5, phi + 0.5),
                                       method="bounded", options={"xatol": 1e-12})
        phi = float(res.x)
        if abs(r - r_old) < 1e-13 and abs(phi - phi_old) < 1e-12:
            break

    h = np.asarray(steps, dtype=float)
    for _ in range(max_newton):
        r0 = r

        def local(y):
            return V((y[0], y[1] / r0, y[2]))

        y = np.array([r, r0 * phi, z])
        g = _richardson_gradient(local, y, h)
        H = hessian3(local, y, h)
        try:
            dy = np.linalg.solve(H, -g)
        except np.linalg.LinAlgError as exc:
            raise ConvergenceError("no isolated trap minimum: singular Hessian") from exc
        if not np.all(np.isfinite(dy)):
            raise ConvergenceError("no isolated trap minimum: non-finite Newton step")
        r, phi, z = r + dy[0], phi + dy[1] / r0, z + dy[2]
        if np.max(np.abs(dy)) < 1e-15:
            break
    else:
        raise ConvergenceError("Newton polish of the trap minimum did not converge")

    r0 = r

    def local(y):
        return V((y[0], y[1] / r0, y[2]))

    y = np.array([r, r0 * phi, z])
    H = hessian3(local, y, h)
    H2 = hessian3(local, y, h / 2)
    halving = float(np.max(np.abs(H2 - H)) / np.max(np.abs(H2)))
    g = _richardson_gradient(local, y, h)
    eig = np.linalg.eigvalsh(H)
    if np.any(eig <= 0):
        raise ConvergenceError("saddle point: Hessian is not positive definite")
    H_si = H * H_PLANCK
    M = atom.mass
    omega = np.sqrt(np.diag(H_si) / M)
    omega_ij_sq = H_si / M
    dx = np.sqrt(HBAR / (2 * M * omega))
    V0 = V((r, phi, z)) * H_PLANCK
    flags = {
        "radial_far_from_axis": bool(omega[0] > 100 * HBAR / (2 * M * r0**2)),
        "azimuthal_far_from_axis": bool(omega[1] > 100 * HBAR / (4 * math.pi * M * r0**2)),
    }
    return TrapCharacterization(
        x0=(float(r), float(phi), float(z)),
        V0=float(V0),
        omega=omega,
        omega_ij_sq=omega_ij_sq,
        dx=dx,
        hessian=H_si,
        gradient=g * H_PLANCK,
        step_halving_change=halving,
        flags=flags,
    )
