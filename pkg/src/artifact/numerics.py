"""Shared numerical kernels.

Cylinder functions with derivatives, bracketed root finding on a scan grid,
adaptive quadrature with exponential tails, finite-difference Hessians and
the Wigner 6j symbol.  Everything here is a pure function.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate as _quad
from scipy import optimize, special


class DomainError(ValueError):
    """Argument outside the domain of a special function."""


class ConvergenceError(RuntimeError):
    """An iterative or adaptive algorithm failed to converge."""


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ValueError("interval bounds must be finite")
        if not self.lo < self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")


@dataclass(frozen=True)
class RootList:
    """Roots found in a window, with residuals and windows the grid could not resolve."""

    roots: list[float]
    residuals: list[float]
    coarse_windows: list[Interval] = field(default_factory=list)


_KINDS = {
    "J": (special.jv, special.jvp),
    "Y": (special.yv, special.yvp),
    "I": (special.iv, special.ivp),
    "K": (special.kv, special.kvp),
}


def _reflection_sign(kind: str, order: int) -> int:
    # J and Y pick up (-1)^n under n -> -n; I and K are even in the order.
    if kind in "JY" and order < 0 and order % 2:
        return -1
    return 1


def _check(kind: str, x):
    if kind not in _KINDS:
        raise ValueError(f"unknown cylinder function kind {kind!r}")
    if kind in "YK" and np.any(np.asarray(x) <= 0):
        raise DomainError(f"{kind}_n(x) requires x > 0")


def _finish(value):
    if np.any(np.isinf(value)):
        raise OverflowError("cylinder function overflowed")
    if np.ndim(value) == 0:
        return float(value)
    return value


def cyl_bessel(kind: str, order: int, x):
    """Cylinder function ``kind`` in {J, Y, I, K} of integer ``order`` at ``x``.

    Negative orders are mapped onto non-negative ones by the reflection
    identities.  Arrays are accepted and evaluated elementwise.
    """
    _check(kind, x)
    n = int(order)
    fn, _ = _KINDS[kind]
    return _finish(_reflection_sign(kind, n) * fn(abs(n), x))


def cyl_bessel_prime(kind: str, order: int, x):
    """First derivative of :func:`cyl_bessel` with respect to ``x``."""
    _check(kind, x)
    n = int(order)
    _, dfn = _KINDS[kind]
    return _finish(_reflection_sign(kind, n) * dfn(abs(n), x))


def _scan_grid(window: Interval, points_per_decade: int, min_points: int = 64):
    lo, hi = window.lo, window.hi
    if lo > 0:
        n = max(min_points, math.ceil(points_per_decade * math.log10(hi / lo)) + 1)
        return np.geomspace(lo, hi, n)
    n = max(min_points, math.ceil(points_per_decade * max(1.0, math.log10(1.0 + hi - lo))) + 1)
    return np.linspace(lo, hi, n)


def _evaluate(f, xs):
    try:
        ys = np.asarray(f(xs), dtype=float)
        if ys.shape == xs.shape:
            return ys
    except (TypeError, ValueError):
        pass
    return np.array([f(float(x)) for x in xs], dtype=float)


def find_roots(
    f: Callable,
    window: Interval | tuple[float, float],
    max_roots: int | None = None,
    tol: float = 1e-12,
    points_per_decade: int = 2000,
    grid: Sequence[float] | None = None,
) -> RootList:
    """All sign-change roots of ``f`` in ``window``, in increasing order.

    ``f`` is sampled on a scan grid (geometric when the window is positive,
    otherwise linear) and every bracket is polished with Brent's method.
    Sign changes across poles are rejected because ``|f|`` does not shrink
    there.  Windows where two sign changes sit within two grid steps are
    reported in ``coarse_windows`` so the caller can refine.
    """
    if not isinstance(window, Interval):
        window = Interval(*window)
    xs = np.asarray(grid, dtype=float) if grid is not None else _scan_grid(window, points_per_decade)
    ys = _evaluate(f, xs)
    if not np.all(np.isfinite(ys)):
        bad = xs[~np.isfinite(ys)]
        raise DomainError(f"function not finite on the scan grid near x={bad[0]!r}")
    roots: list[float] = []
    residuals: list[float] = []
    changes: list[int] = []
    for i in range(len(xs) - 1):
        a, b, fa, fb = xs[i], xs[i + 1], ys[i], ys[i + 1]
        if fa == 0.0:
            if not roots or roots[-1] != a:
                roots.append(float(a))
                residuals.append(0.0)
                changes.append(i)
            continue
        if fa * fb > 0 or fb == 0.0:
            continue
        x = optimize.brentq(f, a, b, xtol=tol * max(abs(a), abs(b), 1e-300), rtol=4 * np.finfo(float).eps,
                            maxiter=500)
        fx = float(f(x))
        if abs(fx) > max(abs(fa), abs(fb)):
            continue  # pole, not a root
        roots.append(float(x))
        residuals.append(fx)
        changes.append(i)
        if max_roots is not None and len(roots) >= max_roots:
            break
    if ys[-1] == 0.0 and (max_roots is None or len(roots) < max_roots):
        roots.append(float(xs[-1]))
        residuals.append(0.0)
        changes.append(len(xs) - 1)
    coarse = [
        Interval(float(xs[i]), float(xs[min(j + 1, len(xs) - 1)]))
        for i, j in zip(changes, changes[1:])
        if j - i < 2
    ]
    return RootList(roots, residuals, coarse)


def _quad_segment(f, a, b, rel_tol, limit):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", _quad.IntegrationWarning)
        value, err, info = _quad.quad(f, a, b, epsrel=rel_tol, epsabs=0.0, limit=limit, full_output=1)[:3]
    if math.isfinite(value) and err > max(rel_tol * abs(value), 1e-300) * 10:
        # a cancelling integral is judged against the integral of |f|
        scale = _quad.quad(lambda x: abs(f(x)), a, b, epsrel=1e-3, limit=limit, full_output=1)[0]
        if err <= rel_tol * scale * 10:
            return value
    if not math.isfinite(value) or err > max(rel_tol * abs(value), 1e-300) * 10:
        raise ConvergenceError(f"quadrature failed on [{a}, {b}]: estimate {value}, error {err}")
    return value


def integrate(
    f: Callable[[float], float],
    lo: float,
    hi: float | None = None,
    rel_tol: float = 1e-9,
    decay: float | None = None,
    points: Sequence[float] | None = None,
    limit: int = 200,
    max_segments: int = 400,
):
    """Adaptive integral of ``f`` over ``[lo, hi]`` or ``[lo, inf)``.

    For a semi-infinite domain pass ``hi=None`` and the exponential ``decay``
    constant of ``|f|``.  The tail is integrated in slabs of width
    ``1/decay`` until the bound ``|f(X)|/decay`` on the discarded remainder
    falls below ``rel_tol`` times the running total.  Complex-valued
    integrands are split into real and imaginary parts.
    """
    probe = f(lo if hi is None else 0.5 * (lo + hi))
    if np.iscomplexobj(probe):
        re = integrate(lambda x: np.real(f(x)), lo, hi, rel_tol, decay, points, limit, max_segments)
        im = integrate(lambda x: np.imag(f(x)), lo, hi, rel_tol, decay, points, limit, max_segments)
        return complex(re, im)
    if hi is not None:
        if points:
            inner = sorted(p for p in points if lo < p < hi)
            edges = [lo, *inner, hi]
            return sum(_quad_segment(f, a, b, rel_tol, limit) for a, b in zip(edges, edges[1:]))
        return _quad_segment(f, lo, hi, rel_tol, limit)
    if decay is None or decay <= 0:
        raise ValueError("a semi-infinite domain needs a positive decay constant")
    width = 1.0 / decay
    total = 0.0
    a = lo
    for _ in range(max_segments):
        b = a + width
        total += _quad_segment(f, a, b, rel_tol, limit)
        tail_bound = abs(float(f(b))) / decay
        if tail_bound <= 0.1 * rel_tol * abs(total):
            return total
        a = b
    raise ConvergenceError("exponential tail did not decay within the segment budget")


def hessian3(f: Callable[[np.ndarray], float], x0, steps) -> np.ndarray:
    """Symmetrized central-difference Hessian of a function of three variables."""
    x0 = np.asarray(x0, dtype=float)
    h = np.asarray(steps, dtype=float)
    if x0.shape != (3,) or h.shape != (3,) or np.any(h <= 0):
        raise ValueError("hessian3 needs a 3-vector point and three positive steps")
    f0 = f(x0)
    H = np.empty((3, 3))
    e = np.eye(3)
    for i in range(3):
        di = h[i] * e[i]
        H[i, i] = (f(x0 + di) - 2.0 * f0 + f(x0 - di)) / h[i] ** 2
        for j in range(i + 1, 3):
            dj = h[j] * e[j]
            H[i, j] = (f(x0 + di + dj) - f(x0 + di - dj) - f(x0 - di + dj) + f(x0 - di - dj)) / (4 * h[i] * h[j])
            H[j, i] = H[i, j]
    return 0.5 * (H + H.T)


def gradient3(f: Callable[[np.ndarray], complex], x0, steps) -> np.ndarray:
    """Central-difference gradient; works for real or complex valued ``f``."""
    x0 = np.asarray(x0, dtype=float)
    h = np.asarray(steps, dtype=float)
    out = []
    for i in range(len(x0)):
        d = np.zeros_like(x0)
        d[i] = h[i]
        out.append((f(x0 + d) - f(x0 - d)) / (2 * h[i]))
    return np.array(out)


def _twice(j) -> int:
    t = 2 * float(j)
    n = round(t)
    if abs(t - n) > 1e-9:
        raise ValueError(f"{j} is not a half-integer")
    return n


def _log_triangle(a2: int, b2: int, c2: int) -> float | None:
    # log of the Racah triangle coefficient; arguments are doubled angular momenta
    s = [a2 + b2 - c2, a2 - b2 + c2, -a2 + b2 + c2]
    if min(s) < 0 or (a2 + b2 + c2) % 2:
        return None
    tot = (a2 + b2 + c2) // 2
    return sum(math.lgamma(x // 2 + 1) for x in s) - math.lgamma(tot + 2)


def wigner_6j(j1, j2, j3, j4, j5, j6) -> float:
    """Wigner 6j symbol {j1 j2 j3; j4 j5 j6} via the Racah sum in log-factorials.

    Returns 0 when any triad breaks the triangle rule or has a non-integer sum.
    """
    a, b, c, d, e, f = (_twice(j) for j in (j1, j2, j3, j4, j5, j6))
    if min(a, b, c, d, e, f) < 0:
        return 0.0
    triads = [(a, b, c), (a, e, f), (d, b, f), (d, e, c)]
    logs = [_log_triangle(*t) for t in triads]
    if any(x is None for x in logs):
        return 0.0
    pre = 0.5 * sum(logs)
    sums = [sum(t) // 2 for t in triads]
    quads = [(a + b + d + e) // 2, (a + c + d + f) // 2, (b + c + e + f) // 2]
    total = 0.0
    for t in range(max(sums), min(quads) + 1):
        lt = math.lgamma(t + 2) - sum(math.lgamma(t - s + 1) for s in sums) - sum(
            math.lgamma(q - t + 1) for q in quads
        )
        total += (-1) ** t * math.exp(lt + pre)
    return total
