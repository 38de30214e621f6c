"""Elastic eigenmodes of a homogeneous isotropic cylinder.

Radial partial waves are built from the scaled Bessel function
``G_n(t, x) = Z_n(q x) / q**n`` with ``q = sqrt(t)``.  For ``t > 0`` this is
``J_n``, for ``t < 0`` it is ``I_n`` and at ``t = 0`` it reduces to the
polynomial ``x**n / (2**n n!)``.  ``G_n`` is entire in ``t``, so one set of
expressions covers the bulk, mixed and surface sectors as well as the sound
lines, and the frequency equation is free of sector jumps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np
from scipy import constants, special

from .numerics import ConvergenceError, DomainError, find_roots
from .photonics import FiberSpec

HBAR = constants.hbar
SOUND_LINE_GUARD = 1e-9
FAMILIES = ("T", "L", "F")
SECTORS = ("bulk", "mixed", "surface", "on-line")


@dataclass(frozen=True)
class ElasticConstants:
    lambda_lame: float
    mu_lame: float
    c_t: float
    c_l: float
    c_h: float


def elastic_constants(E: float, nu: float, rho: float) -> ElasticConstants:
    """Lame coefficients and the transverse, longitudinal and hybrid sound speeds."""
    if E <= 0 or rho <= 0 or not 0 <= nu < 0.5:
        raise DomainError("need E > 0, rho > 0 and 0 <= nu < 1/2")
    lam = E * nu / ((1 + nu) * (1 - 2 * nu))
    mu = E / (2 * (1 + nu))
    c_t = math.sqrt(E / (2 * rho * (1 + nu)))
    c_l = math.sqrt(E * (nu - 1) / (rho * (nu + 2 * nu**2 - 1)))
    return ElasticConstants(lam, mu, c_t, c_l, math.sqrt(E / rho))


def fiber_elastic(fiber: FiberSpec) -> ElasticConstants:
    return elastic_constants(fiber.young_modulus, fiber.poisson_ratio, fiber.density)


def scaled_bessel(n: int, t, x):
    """``Z_n(sqrt(t) x) / sqrt(t)**n``, continued analytically through ``t = 0``."""
    t, x = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(x, dtype=float))
    out = np.empty(t.shape)
    pos, neg = t > 0, t < 0
    zero = ~(pos | neg)
    if pos.any():
        q = np.sqrt(t[pos])
        out[pos] = special.jv(n, q * x[pos]) / q**n
    if neg.any():
        q = np.sqrt(-t[neg])
        out[neg] = special.iv(n, q * x[neg]) / q**n
    if zero.any():
        out[zero] = x[zero] ** n / (2.0**n * math.factorial(n))
    return out


def divided_bessel(n: int, tl, tt, x, dt=None):
    """First divided difference ``(G_n(tl, x) - G_n(tt, x)) / (tl - tt)``.

    Summed from the power series when the two arguments are close, where the
    direct difference would cancel.
    """
    tl, tt, x = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (tl, tt, x)))
    dt = np.broadcast_to(tl - tt if dt is None else np.asarray(dt, dtype=float), tl.shape)
    out = np.empty(tl.shape)
    big = np.maximum(np.abs(tl), np.abs(tt))
    series = (np.abs(dt) < 0.1) & (big < 50)
    direct = ~series
    if direct.any():
        out[direct] = (scaled_bessel(n, tl[direct], x[direct]) - scaled_bessel(n, tt[direct], x[direct])) / dt[direct]
    if series.any():
        a, b, xs = tl[series], tt[series], x[series]
        h = np.ones_like(a)          # (a^k - b^k) / (a - b) for k = 1
        bpow = np.ones_like(a)       # b^(k-1)
        term_x = xs**n / (2.0**n * math.factorial(n))
        total = np.zeros_like(a)
        for k in range(1, 200):
            term_x = term_x * (-0.25) * xs**2 / (k * (n + k))
            contrib = h * term_x
            total += contrib
            if np.all(np.abs(contrib) <= 1e-17 * np.abs(total)) and k > 2:
                break
            bpow = bpow * b
            h = a * h + bpow
        out[series] = total
    return out


class _Radial:
    """Finite sum of ``c * x**k * G_n(t_tag, x)`` terms with exact differentiation."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = dict(terms or {})

    @classmethod
    def bessel(cls, n: int, tag: str, coef=1.0, k: int = 0) -> "_Radial":
        return cls({(k, n, tag): coef})

    def __add__(self, other: "_Radial") -> "_Radial":
        out = dict(self.terms)
        for key, c in other.terms.items():
            out[key] = out[key] + c if key in out else c
        return _Radial(out)

    def __sub__(self, other: "_Radial") -> "_Radial":
        return self + other.scale(-1.0)

    def scale(self, c) -> "_Radial":
        return _Radial({key: v * c for key, v in self.terms.items()})

    def over_x(self) -> "_Radial":
        return _Radial({(k - 1, n, tag): c for (k, n, tag), c in self.terms.items()})

    def deriv(self, t: dict) -> "_Radial":
        # d/dx [x^k G_n] = (k + n) x^(k-1) G_n - t x^k G_(n+1)
        # d/dx [x^k D_n] = (k + n) x^(k-1) D_n - tl x^k D_(n+1) - x^k G_(n+1)(tt)
        out = _Radial()
        for (k, n, tag), c in self.terms.items():
            if k + n != 0:
                out = out + _Radial({(k - 1, n, tag): c * (k + n)})
            if tag == "d":
                out = out + _Radial({(k, n + 1, "d"): -c * t["l"], (k, n + 1, "t"): -c})
            else:
                out = out + _Radial({(k, n + 1, tag): -c * t[tag]})
        return out

    def __call__(self, t: dict, x):
        x = np.asarray(x, dtype=float)
        total = 0.0
        for (k, n, tag), c in self.terms.items():
            if tag == "d":
                g = divided_bessel(n, t["l"], t["t"], x, t["d"])
            else:
                g = scaled_bessel(n, t[tag], x)
            total = total + c * x**k * g
        return total


_ZERO = _Radial()


def _basis(j: int, varpi: float, t: dict, ec: ElasticConstants | None = None) -> dict:
    """Displacement basis terms in x = r / R for j >= 0.

    a is the dilatational term, b and c the shear terms.  For j = 0 the c term
    is replaced by its torsional limit ``(0, i G_1, 0)``.  With ``ec`` given the
    well-conditioned combination ``e = (a - c - varpi b) / (tl - tt)`` is added;
    it stays finite where a, b and c become degenerate at low frequency.
    """
    Gl = _Radial.bessel(j, "l")
    a = [Gl.deriv(t), Gl.over_x().scale(1j * j), Gl.scale(1j * varpi)]
    Gt1 = _Radial.bessel(j + 1, "t")
    b = [Gt1.scale(varpi), Gt1.scale(-1j * varpi), _Radial.bessel(j, "t", 1j)]
    if j == 0:
        c = [_ZERO, _Radial.bessel(1, "t", 1j), _ZERO]
    else:
        Gt = _Radial.bessel(j, "t")
        c = [Gt.over_x().scale(j), Gt.deriv(t).scale(1j), _ZERO]
    out = {"a": a, "b": b, "c": c}
    if ec is not None:
        kl = ec.c_t**2 / (ec.c_t**2 - ec.c_l**2)
        kt = ec.c_l**2 / (ec.c_t**2 - ec.c_l**2)
        D = _Radial.bessel(j, "d")
        e_r = D.over_x().scale(j) + _Radial.bessel(j + 1, "d", -t["l"]) + _Radial.bessel(j + 1, "t", -kl)
        e_p = D.over_x().scale(1j * j) + _Radial.bessel(j + 1, "t", 1j * kt)
        out["e"] = [e_r, e_p, D.scale(1j * varpi)]
    return out


def _strain_series(W, j: int, varpi: float, t: dict):
    """Strain components (rr, pp, zz, rp, rz, pz) of a displacement series, in units of 1/R."""
    Wr, Wp, Wz = W
    srr = Wr.deriv(t)
    spp = (Wr + Wp.scale(1j * j)).over_x()
    szz = Wz.scale(1j * varpi)
    srp = (Wr.over_x().scale(1j * j) + Wp.deriv(t) - Wp.over_x()).scale(0.5)
    srz = (Wr.scale(1j * varpi) + Wz.deriv(t)).scale(0.5)
    spz = (Wp.scale(1j * varpi) + Wz.over_x().scale(1j * j)).scale(0.5)
    return srr, spp, szz, srp, srz, spz


def _t_values(p_abs: float, omega, radius: float, ec: ElasticConstants, snap: bool = True) -> dict:
    omega = np.asarray(omega, dtype=float)
    tl = (omega**2 / ec.c_l**2 - p_abs**2) * radius**2
    tt = (omega**2 / ec.c_t**2 - p_abs**2) * radius**2
    if snap:
        # inside the guard band the on-line (polynomial) expressions are used
        tl = np.where(np.abs(omega - ec.c_l * p_abs) <= SOUND_LINE_GUARD * ec.c_l * p_abs, 0.0, tl)
        tt = np.where(np.abs(omega - ec.c_t * p_abs) <= SOUND_LINE_GUARD * ec.c_t * p_abs, 0.0, tt)
    dt = omega**2 * radius**2 * (1 / ec.c_l**2 - 1 / ec.c_t**2)
    return {"l": tl, "t": tt, "d": dt}


def classify_sector(omega: float, p: float, ec: ElasticConstants) -> str:
    wt, wl = ec.c_t * abs(p), ec.c_l * abs(p)
    if abs(omega - wt) <= SOUND_LINE_GUARD * wt or abs(omega - wl) <= SOUND_LINE_GUARD * wl:
        return "on-line"
    if omega > wl:
        return "bulk"
    if omega > wt:
        return "mixed"
    return "surface"


def _boundary_rows(W, j, varpi, t, lam_over_2mu):
    """Rows of the surface traction, scaled so that they are real for the basis phases."""
    srr, spp, szz, srp, srz, _ = _strain_series(W, j, varpi, t)
    tr = srr(t, 1.0) + spp(t, 1.0) + szz(t, 1.0)
    row_r = -lam_over_2mu * tr - srr(t, 1.0)
    row_p = -2j * srp(t, 1.0)
    row_z = -2j * srz(t, 1.0)
    return row_r, row_p, row_z


def stress_matrix(fiber: FiberSpec, j: int, p: float, omega, snap: bool = True, columns: str = "abc") -> np.ndarray:
    """Boundary matrix ``M[k, l]`` (k in r, phi, z; l in a, b, c) at the surface.

    The rows are ``-R T^rr / 2 mu``, ``-i R T^phi r / mu`` and ``-i R T^zr / mu``
    evaluated for each basis term; they are real.  Vectorized over ``omega``.
    ``columns="ebc"`` swaps a for the low-frequency-safe combination e.
    """
    ec = fiber_elastic(fiber)
    j = abs(int(j))
    varpi = abs(p) * fiber.radius
    t = _t_values(abs(p), omega, fiber.radius, ec, snap)
    basis = _basis(j, varpi, t, ec)
    ratio = ec.lambda_lame / (2 * ec.mu_lame)
    cols = [_boundary_rows(basis[key], j, varpi, t, ratio) for key in columns]
    shape = np.shape(omega)
    M = np.empty(shape + (3, 3), dtype=complex)
    for l, col in enumerate(cols):
        for k in range(3):
            M[..., k, l] = np.broadcast_to(col[k], shape)
    return M


def frequency_function(fiber: FiberSpec, family: str, j: int, p: float):
    """Real frequency-equation function of omega whose roots are the band frequencies."""
    if family == "T":
        return lambda w: stress_matrix(fiber, 0, p, w)[..., 1, 2].real
    if family == "L":
        def det2(w):
            M = stress_matrix(fiber, 0, p, w, columns="ebc").real
            return M[..., 0, 0] * M[..., 2, 1] - M[..., 0, 1] * M[..., 2, 0]
        return det2
    if family == "F":
        return lambda w: np.linalg.det(stress_matrix(fiber, j, p, w, columns="ebc").real)
    raise ValueError(f"unknown phonon family {family!r}")


@dataclass(frozen=True)
class PhononModeIndex:
    family: str
    j: int
    n: int
    p: float
    standing: bool = False
    m: int | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown phonon family {self.family!r}")
        if (self.family == "F") == (self.j == 0):
            raise ValueError("families T and L need j = 0 and family F needs j != 0")
        if self.n < 1:
            raise ValueError("band index n starts at 1")
        if self.standing and (self.m is None or self.m < 1):
            raise ValueError("standing modes need a mode number m >= 1")

    @property
    def label(self) -> str:
        return f"{self.family}{abs(self.j)}{self.n}"


@dataclass(frozen=True)
class PhononMode:
    """Normalized elastic eigenmode; radial partial waves in SI units (1/m and 1/m^2)."""

    index: PhononModeIndex
    omega: float
    sector: str
    amplitudes: tuple
    radius: float
    elastic: ElasticConstants
    density: float
    length: float | None = None
    residual: float = 0.0
    surface_residual: float = 0.0
    basis_omega: float | None = None
    flags: dict = field(default_factory=dict, compare=False)

    @property
    def j(self) -> int:
        return self.index.j

    @property
    def p(self) -> float:
        return self.index.p

    @property
    def U_gamma(self) -> float:
        return math.sqrt(HBAR / (2 * self.density * self.omega))

    def _t(self) -> dict:
        omega = self.omega if self.basis_omega is None else self.basis_omega
        t = _t_values(abs(self.p), omega, self.radius, self.elastic)
        return {k: float(v) for k, v in t.items()}

    @property
    def abc_amplitudes(self) -> tuple:
        """Amplitudes on the a, b, c basis terms (``a = c + varpi b + (tl - tt) e``)."""
        E, B, C = self.amplitudes
        if E == 0:
            return (0.0, B, C)
        dt = self._t()["d"]
        varpi = abs(self.p) * self.radius
        return (E / dt, B - varpi * E / dt, C - E / dt)

    def _series(self):
        t = self._t()
        j, varpi = abs(self.j), abs(self.p) * self.radius
        basis = _basis(j, varpi, t, self.elastic)
        W = [_ZERO, _ZERO, _ZERO]
        for key, amp in zip("ebc", self.amplitudes):
            if amp != 0:
                W = [Wk + bk.scale(amp) for Wk, bk in zip(W, basis[key])]
        return W, t, j, varpi

    def _signs(self):
        sp = -1.0 if self.j < 0 else 1.0
        sz = -1.0 if self.p < 0 else 1.0
        return sp, sz

    def displacement(self, r) -> np.ndarray:
        """Radial partial wave of the displacement, shape (3,) + shape(r)."""
        W, t, _, _ = self._series()
        x = np.maximum(np.asarray(r, dtype=float) / self.radius, 1e-150)
        sp, sz = self._signs()
        out = np.array([np.broadcast_to(Wk(t, x), x.shape) for Wk in W], dtype=complex)
        out[1] *= sp
        out[2] *= sz
        return out

    def strain(self, r) -> np.ndarray:
        """Radial partial wave of the strain tensor, shape (3, 3) + shape(r)."""
        W, t, j, varpi = self._series()
        x = np.maximum(np.asarray(r, dtype=float) / self.radius, 1e-150)
        vals = [np.broadcast_to(s(t, x), x.shape) / self.radius for s in _strain_series(W, j, varpi, t)]
        srr, spp, szz, srp, srz, spz = vals
        sp, sz = self._signs()
        S = np.array([[srr, sp * srp, sz * srz],
                      [sp * srp, spp, sp * sz * spz],
                      [sz * srz, sp * sz * spz, szz]], dtype=complex)
        return S

    def stress(self, r) -> np.ndarray:
        S = self.strain(r)
        tr = S[0, 0] + S[1, 1] + S[2, 2]
        T = 2 * self.elastic.mu_lame * S
        for k in range(3):
            T[k, k] = T[k, k] + self.elastic.lambda_lame * tr
        return T

    def axial_factor(self, z):
        """Axial dependence of a running mode; standing modes combine two of them."""
        if self.index.standing:
            return np.sin(self.p * np.asarray(z)) / math.sqrt(math.pi * self.length)
        return np.exp(1j * self.p * np.asarray(z)) / (2 * math.pi)

    def _standing_sum(self, partial, z):
        """``(P(+p) e^{ipz} - P(-p) e^{-ipz}) / (2i sqrt(pi L))`` for partial waves P.

        Transverse displacement components carry ``sin(pz)``; the strain
        splits into ``sin(pz)`` and ``cos(pz)`` parts.
        """
        z = np.asarray(z)
        plus = partial(self) * np.exp(1j * self.p * z)
        minus = partial(self.reflected(p_sign=-1)) * np.exp(-1j * self.p * z)
        return (plus - minus) / (2j * math.sqrt(math.pi * self.length))

    def displacement_field(self, r, phi, z) -> np.ndarray:
        ph = np.exp(1j * self.j * np.asarray(phi))
        if self.index.standing:
            return self._standing_sum(lambda m: m.displacement(r), z) * ph
        return self.displacement(r) * ph * self.axial_factor(z)

    def strain_field(self, r, phi, z) -> np.ndarray:
        ph = np.exp(1j * self.j * np.asarray(phi))
        if self.index.standing:
            return self._standing_sum(lambda m: m.strain(r), z) * ph
        return self.strain(r) * ph * self.axial_factor(z)

    def reflected(self, j_sign: int = 1, p_sign: int = 1) -> "PhononMode":
        """Degenerate partner with (j, p) -> (j_sign j, p_sign p)."""
        idx = replace(self.index, j=self.j * j_sign, p=self.p * p_sign)
        return replace(self, index=idx)

    def norm_integral(self) -> float:
        """``int_0^R r |W|^2 dr`` by fixed Gauss-Legendre quadrature.

        The integrand is entire in x; a fixed rule stays robust where the
        basis terms nearly cancel at small p R.
        """
        W, t, _, _ = self._series()
        nodes = 64 + 8 * int(math.sqrt(max(abs(t["l"]), abs(t["t"]))))
        xg, wg = np.polynomial.legendre.leggauss(nodes)
        x = 0.5 * (xg + 1.0)
        vals = x * sum(np.abs(Wk(t, x)) ** 2 for Wk in W)
        return float(self.radius**2 * 0.5 * np.dot(wg, vals))


def _phase_fix(family: str, w_mid: np.ndarray) -> complex:
    """Global phase making the mode real-valued in the standard component convention."""
    if family == "T":
        ref = w_mid[1]
    elif family == "L":
        ref = w_mid[2] / 1j
    else:
        ref = w_mid[0]
    return abs(ref) / ref if ref != 0 else 1.0


def _amplitudes(family: str, M: np.ndarray):
    flags = {}
    if family == "T":
        return (0.0, 0.0, 1.0), flags
    if family == "L":
        # the e and b terms carry an azimuthal shear part that the c term cancels
        if abs(M[0, 1]) >= abs(M[2, 1]):
            B = -M[0, 0] / M[0, 1]
        else:
            B = -M[2, 0] / M[2, 1]
        if abs(M[1, 2]) <= 1e-12 * np.linalg.norm(M):
            flags["torsional_crossing"] = True
            return (1.0, B, 0.0), flags
        return (1.0, B, -(M[1, 0] + M[1, 1] * B) / M[1, 2]), flags
    norm = np.linalg.norm(M)
    for i, k in ((0, 1), (0, 2)):
        den = M[i, 1] * M[k, 2] - M[i, 2] * M[k, 1]
        if abs(den) >= 1e-10 * norm**2:
            B = (M[i, 2] * M[k, 0] - M[i, 0] * M[k, 2]) / den
            C = (M[i, 0] * M[k, 1] - M[i, 1] * M[k, 0]) / den
            return (1.0, B, C), flags
        flags["subdeterminant_rphi_vanishes"] = True
    flags["subdeterminants_vanish"] = True
    raise ConvergenceError("flexural family decomposes here: all amplitude subdeterminants vanish")


def _omega_window(fiber: FiberSpec, family: str, j: int, p_abs: float, ec: ElasticConstants):
    varpi = p_abs * fiber.radius
    scale = ec.c_t / fiber.radius
    lo = 1e-2 * min(varpi**2, varpi) * ec.c_h / (2 * ec.c_t)
    hi = 1.2 * max(ec.c_l / ec.c_t * varpi, 2.0 + j)
    return lo * scale, hi * scale


@lru_cache(maxsize=4096)
def band_frequency(fiber: FiberSpec, family: str, j: int, n: int, p: float) -> float:
    """Angular frequency of band ``family_{|j| n}`` at propagation constant ``p``."""
    if n < 1:
        raise ValueError("band index n starts at 1")
    if p == 0:
        raise DomainError("band frequencies are solved at p != 0")
    ec = fiber_elastic(fiber)
    j, p_abs = abs(int(j)), abs(float(p))
    if family == "T":
        if n == 1:
            return ec.c_t * p_abs
        alpha = special.jn_zeros(2, n - 1)[-1]
        return ec.c_t * math.sqrt(p_abs**2 + (alpha / fiber.radius) ** 2)
    f = frequency_function(fiber, family, j, p_abs)
    lo, hi = _omega_window(fiber, family, j, p_abs, ec)
    for _ in range(12):
        roots = find_roots(f, (lo, hi), max_roots=n, tol=1e-13)
        if len(roots.roots) >= n:
            return float(roots.roots[n - 1])
        hi *= 1.5
    raise ConvergenceError(f"band {family}{j}{n} not found below omega={hi:g} at p={p:g}")


def _build_mode(fiber: FiberSpec, index: PhononModeIndex, omega: float, length=None) -> PhononMode:
    ec = fiber_elastic(fiber)
    p_abs = abs(index.p)
    M = stress_matrix(fiber, abs(index.j), p_abs, omega, columns="ebc")
    amps, flags = _amplitudes(index.family, M)
    canon = PhononMode(replace(index, j=abs(index.j), p=p_abs), omega, classify_sector(omega, p_abs, ec),
                       tuple(complex(a) for a in amps), fiber.radius, ec, fiber.density, length)
    norm = canon.norm_integral()
    scale = 1.0 / math.sqrt(norm)
    mid = np.array([np.asarray(v).item() for v in canon.displacement(0.5 * fiber.radius)])
    scale *= _phase_fix(index.family, mid)
    amps = tuple(complex(a * scale) for a in canon.amplitudes)
    canon = replace(canon, amplitudes=amps)
    f = frequency_function(fiber, index.family, abs(index.j), p_abs)
    if index.family == "T" and index.n == 1:
        resid = 0.0
    else:
        dw = 1e-6 * omega
        slope = abs(float(f(omega + dw)) - float(f(omega - dw))) / (2 * dw)
        resid = abs(float(f(omega))) / (slope * omega) if slope > 0 else abs(float(f(omega)))
    T_surf = canon.stress(fiber.radius)
    T_int = canon.stress(np.linspace(0.02, 1.0, 50) * fiber.radius)
    scale_T = float(np.max(np.abs(T_int)))
    surface = float(np.max(np.abs(T_surf[:, 0]))) / scale_T
    flags["surface_residual_ok"] = surface <= 1e-8
    mode = replace(canon, residual=resid, surface_residual=surface, flags=flags)
    sj = -1 if index.j < 0 else 1
    sp = -1 if index.p < 0 else 1
    return mode.reflected(sj, sp)


def torsional_band(fiber: FiberSpec, n: int, p: float) -> PhononMode:
    return _build_mode(fiber, PhononModeIndex("T", 0, n, p), band_frequency(fiber, "T", 0, n, p))


def longitudinal_band(fiber: FiberSpec, n: int, p: float) -> PhononMode:
    omega = band_frequency(fiber, "L", 0, n, p)
    return _build_mode(fiber, PhononModeIndex("L", 0, n, p), omega)


def flexural_band(fiber: FiberSpec, j: int, n: int, p: float) -> PhononMode:
    if j == 0:
        raise ValueError("flexural modes need j != 0")
    return _build_mode(fiber, PhononModeIndex("F", j, n, p), band_frequency(fiber, "F", j, n, p))


def band_mode(fiber: FiberSpec, family: str, j: int, n: int, p: float) -> PhononMode:
    if family == "T":
        return torsional_band(fiber, n, p)
    if family == "L":
        return longitudinal_band(fiber, n, p)
    return flexural_band(fiber, j, n, p)


def asymptotic_frequency(fiber: FiberSpec, family: str, p: float) -> float:
    """Low-frequency dispersion of the fundamental bands T01, L01 and F11."""
    ec = fiber_elastic(fiber)
    if family == "T":
        return ec.c_t * abs(p)
    if family == "L":
        return ec.c_h * abs(p)
    return ec.c_h * fiber.radius * p**2 / 2


def asymptotic_propagation_constant(fiber: FiberSpec, family: str, omega: float) -> float:
    ec = fiber_elastic(fiber)
    if family == "T":
        return omega / ec.c_t
    if family == "L":
        return omega / ec.c_h
    return math.sqrt(2 * omega / (ec.c_h * fiber.radius))


def resonant_propagation_constant(fiber: FiberSpec, family: str, j: int, n: int, omega: float) -> float:
    """Positive p at which band ``family_{|j| n}`` reaches ``omega``."""
    from scipy.optimize import brentq

    p0 = asymptotic_propagation_constant(fiber, family, omega) if n == 1 else omega / fiber_elastic(fiber).c_l
    g = lambda p: band_frequency(fiber, family, j, n, p) - omega  # noqa: E731
    lo, hi = 0.5 * p0, 2.0 * p0
    for _ in range(40):
        if g(lo) < 0 < g(hi):
            break
        lo, hi = (lo * 0.5, hi) if g(lo) >= 0 else (lo, hi * 2)
    else:
        raise ConvergenceError("could not bracket the resonant propagation constant")
    return brentq(g, lo, hi, xtol=1e-14 * p0, rtol=4 * np.finfo(float).eps)


def density_of_states(fiber: FiberSpec, family: str, omega: float, j: int = 0, n: int = 1,
                      asymptotic: bool = True) -> float:
    """Inverse group velocity |d omega / d p|^-1 of a band at frequency omega, in s/m."""
    ec = fiber_elastic(fiber)
    if asymptotic and n == 1:
        if family == "T":
            return 1.0 / ec.c_t
        if family == "L":
            return 1.0 / ec.c_h
        if family == "F":
            return 1.0 / math.sqrt(2 * omega * ec.c_h * fiber.radius)
    jj = j if family == "F" else 0
    p = resonant_propagation_constant(fiber, family, jj, n, omega)
    h = 1e-4 * p
    slope = (band_frequency(fiber, family, jj, n, p + h) - band_frequency(fiber, family, jj, n, p - h)) / (2 * h)
    return 1.0 / abs(slope)


def band_scan(fiber: FiberSpec, family: str, j: int, n: int, p_values):
    """Band frequencies over a grid of propagation constants (rad/s)."""
    return [band_frequency(fiber, family, j, n, float(p)) for p in p_values]


def resonator_frequency(fiber: FiberSpec, family: str, length: float, m: int) -> float:
    ec = fiber_elastic(fiber)
    if family == "T":
        return m * math.pi * ec.c_t / length
    if family == "F":
        return m**2 * math.pi**2 * fiber.radius * math.sqrt(fiber.young_modulus / fiber.density) / (2 * length**2)
    return m * math.pi * ec.c_h / length


def resonator_mode(fiber: FiberSpec, family: str, length: float, m: int, j: int = 1) -> PhononMode:
    """Standing-wave mode with p_m = m pi / L on a fundamental band.

    The frequency follows the resonator spectrum; the radial partial wave is
    the normalized band eigenmode at p_m.
    """
    if length <= 0:
        raise DomainError("resonator length must be positive")
    if m < 1:
        raise ValueError("resonator mode number starts at 1")
    jj = 0 if family in ("T", "L") else j
    p = m * math.pi / length
    idx = PhononModeIndex(family, jj, 1, p, standing=True, m=m)
    mode = _build_mode(fiber, idx, band_frequency(fiber, family, jj, 1, p), length)
    return replace(mode, omega=resonator_frequency(fiber, family, length, m), basis_omega=mode.omega)


def resonator_modes(fiber: FiberSpec, family: str, length: float, count: int, j: int = 1) -> list[PhononMode]:
    return [resonator_mode(fiber, family, length, m, j) for m in range(1, count + 1)]
