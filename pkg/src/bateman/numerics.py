"""Special functions and integration primitives.

Everything here is a pure function of its arguments. Callbacks handed to the
quadrature routines are called with 1-d ``numpy`` arrays of abscissae and must
return arrays of the same shape.
"""
from __future__ import annotations

import cmath
import heapq
import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import AccuracyWarning, DivergenceError, GammaPoleError

__all__ = [
    "log_gamma",
    "gamma",
    "log_gamma_array",
    "QuadResult",
    "integrate_interval",
    "integrate_semiinfinite",
    "integrate_real_line",
    "ContourSpec",
    "ContourResult",
    "contour_integral",
    "angular_project",
]

# Lanczos approximation, g = 7, nine coefficients.
_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)
POLE_GUARD = 1e-8


def _lanczos_log_gamma(z: complex) -> complex:
    # valid for Re z >= 0.5
    z = z - 1.0
    acc = _LANCZOS_COEF[0]
    for i in range(1, len(_LANCZOS_COEF)):
        acc += _LANCZOS_COEF[i] / (z + i)
    t = z + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (z + 0.5) * cmath.log(t) - t + cmath.log(acc)


def log_gamma(z) -> complex:
    """Log-gamma on the branch continuous away from the negative real axis.

    Agrees with ``scipy.special.loggamma``: the imaginary part is the
    continuous argument of Gamma, not folded into (-pi, pi]. For
    ``Re z < 0.5`` the argument is first lifted with the recurrence
    ``log Gamma(z) = log Gamma(z + n) - sum log(z + k)``.

    Raises GammaPoleError within 1e-8 of a non-positive integer.
    """
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValueError(f"log_gamma: non-finite argument {z!r}")
    if z.real <= 0.5:
        nearest = round(z.real)
        if nearest <= 0 and abs(z - nearest) < POLE_GUARD:
            raise GammaPoleError(z, int(nearest))
    if z.real >= 0.5:
        return _lanczos_log_gamma(z)
    n = int(math.ceil(0.5 - z.real))
    shift = 0j
    for k in range(n):
        shift += cmath.log(z + k)
    return _lanczos_log_gamma(z + n) - shift


def gamma(z) -> complex:
    return cmath.exp(log_gamma(z))


def log_gamma_array(z) -> np.ndarray:
    """Elementwise ``log_gamma`` on an array; same branch and pole guard."""
    z = np.asarray(z, dtype=complex)
    if not np.all(np.isfinite(z)):
        raise ValueError("log_gamma_array: non-finite argument")
    nearest = np.round(z.real)
    bad = (nearest <= 0) & (np.abs(z - nearest) < POLE_GUARD)
    if np.any(bad):
        i = int(np.flatnonzero(bad.ravel())[0])
        raise GammaPoleError(complex(z.ravel()[i]), int(nearest.ravel()[i]))
    shift = np.maximum(np.ceil(0.5 - z.real), 0).astype(int)
    acc_shift = np.zeros_like(z)
    for k in range(int(shift.max(initial=0))):
        m = shift > k
        acc_shift[m] += np.log(z[m] + k)
    w = z + shift - 1.0
    acc = np.full_like(z, _LANCZOS_COEF[0])
    for i in range(1, len(_LANCZOS_COEF)):
        acc = acc + _LANCZOS_COEF[i] / (w + i)
    t = w + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (w + 0.5) * np.log(t) - t + np.log(acc) - acc_shift


# ----------------------------------------------------------------------------
# quadrature

_GL_LO = np.polynomial.legendre.leggauss(7)
_GL_HI = np.polynomial.legendre.leggauss(15)
_NODES = np.concatenate([_GL_LO[0], _GL_HI[0]])


@dataclass(frozen=True)
class QuadResult:
    value: complex
    error: float
    panels: int


def _panel(g, a, b):
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    vals = np.asarray(g(mid + half * _NODES), dtype=complex)
    lo = half * np.dot(_GL_LO[1], vals[:7])
    hi = half * np.dot(_GL_HI[1], vals[7:])
    if not (np.isfinite(hi) and np.isfinite(lo)):
        raise DivergenceError(f"non-finite integrand on panel [{a}, {b}]")
    return complex(hi), float(abs(hi - lo))


def _adaptive(pieces, tol, rel_tol, max_panels):
    """Global adaptive bisection over several (g, a, b) pieces at once."""
    heap = []
    counter = 0
    total = 0j
    total_err = 0.0
    for g, a, b in pieces:
        val, err = _panel(g, a, b)
        heapq.heappush(heap, (-err, counter, g, a, b, val))
        counter += 1
        total += val
        total_err += err
    npan = len(heap)
    while True:
        target = max(tol, rel_tol * abs(total))
        if total_err <= target:
            # running sums can cancel catastrophically; confirm from scratch
            total = complex(math.fsum(h[5].real for h in heap), math.fsum(h[5].imag for h in heap))
            total_err = math.fsum(-h[0] for h in heap)
            target = max(tol, rel_tol * abs(total))
            if total_err <= target:
                return QuadResult(total, total_err, npan)
        if npan >= max_panels:
            raise DivergenceError(
                f"quadrature did not converge after {npan} panels "
                f"(estimate {total!r}, error {total_err:.3g} > {target:.3g})",
                partial=total,
                error=total_err,
            )
        negerr, _, g, a, b, val = heapq.heappop(heap)
        m = 0.5 * (a + b)
        v1, e1 = _panel(g, a, m)
        v2, e2 = _panel(g, m, b)
        heapq.heappush(heap, (-e1, counter, g, a, m, v1))
        heapq.heappush(heap, (-e2, counter + 1, g, m, b, v2))
        counter += 2
        npan += 1
        total += v1 + v2 - val
        total_err += e1 + e2 + negerr
        if total_err < 0:
            total_err = sum(-h[0] for h in heap)


def integrate_interval(f: Callable, a: float, b: float, tol: float = 1e-10,
                       rel_tol: float = 0.0, max_panels: int = 4000) -> QuadResult:
    if tol <= 0 and rel_tol <= 0:
        raise ValueError("tolerance must be positive")
    return _adaptive([(f, float(a), float(b))], tol, rel_tol, max_panels)


def integrate_semiinfinite(f: Callable, tol: float = 1e-10, rel_tol: float = 0.0,
                           split: float = 1.0, scale: float = 1.0,
                           max_panels: int = 4000) -> QuadResult:
    """Integrate ``f`` over [0, inf).

    Adaptive Gauss panels on [0, split]; the tail is mapped onto [0, 1) by
    ``r = split - scale*log(1 - u)``, which turns exponential and Gaussian
    tails into integrands that vanish at u = 1.

    The returned error bound is ``|G15 - G7|`` summed over panels, which
    overestimates the error of the 15-point value. Raises DivergenceError,
    carrying the partial estimate, if ``max_panels`` is exhausted.
    """
    if tol <= 0 and rel_tol <= 0:
        raise ValueError("tolerance must be positive")

    def tail(u):
        one_minus = 1.0 - u
        with np.errstate(divide="ignore", over="ignore", invalid="ignore", under="ignore"):
            r = split - scale * np.log(one_minus)
            out = np.asarray(f(r), dtype=complex) * (scale / one_minus)
        out[~np.isfinite(r)] = 0.0
        return out

    pieces = [(f, 0.0, float(split)), (tail, 0.0, 0.5), (tail, 0.5, 1.0)]
    return _adaptive(pieces, tol, rel_tol, max_panels)


def integrate_real_line(f: Callable, tol: float = 1e-10, rel_tol: float = 0.0,
                        center: float = 0.0, split: float = 1.0, scale: float = 1.0,
                        max_panels: int = 8000) -> QuadResult:
    """Integrate over the whole real line by folding about ``center``."""

    def folded(r):
        return np.asarray(f(center + r), dtype=complex) + np.asarray(f(center - r), dtype=complex)

    return integrate_semiinfinite(folded, tol=tol, rel_tol=rel_tol, split=split,
                                  scale=scale, max_panels=max_panels)


# ----------------------------------------------------------------------------
# contour integration

@dataclass(frozen=True)
class ContourSpec:
    center: complex
    radius: float
    points: int = 64
    orientation: str = "counterclockwise"

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("contour radius must be positive")
        if self.points < 16:
            raise ValueError("contour needs at least 16 points")
        if self.orientation not in ("counterclockwise", "clockwise"):
            raise ValueError(f"unknown orientation {self.orientation!r}")


@dataclass(frozen=True)
class ContourResult:
    value: complex
    tail_ratio: float  # size of the highest Fourier modes relative to the largest
    accurate: bool


TAIL_THRESHOLD = 1e-10


def contour_integral(f: Callable[[complex], complex], c: ContourSpec) -> ContourResult:
    """Trapezoidal rule on the circle ``c``.

    Spectrally accurate for integrands analytic in an annulus around the
    circle. When the discrete Fourier coefficients of the samples have not
    decayed to ``TAIL_THRESHOLD`` of the largest one near the Nyquist band an
    AccuracyWarning is emitted and ``accurate`` is False.
    """
    n = c.points
    theta = 2.0 * np.pi * np.arange(n) / n
    w = np.exp(1j * theta)
    zs = c.center + c.radius * w
    samples = np.array([complex(f(complex(z))) for z in zs])
    if not np.all(np.isfinite(samples)):
        raise DivergenceError("non-finite integrand on contour")
    value = complex(np.sum(samples * 1j * c.radius * w) * (2.0 * np.pi / n))
    if c.orientation == "clockwise":
        value = -value
    coef = np.abs(np.fft.fft(samples)) / n
    peak = coef.max()
    band = coef[n // 2 - n // 8: n // 2 + n // 8 + 1]
    ratio = float(band.max() / peak) if peak > 0 else 0.0
    ok = ratio <= TAIL_THRESHOLD
    if not ok:
        warnings.warn(
            f"contour integrand not resolved with {n} points "
            f"(Nyquist-band ratio {ratio:.2e})",
            AccuracyWarning,
            stacklevel=2,
        )
    return ContourResult(value, ratio, ok)


def angular_project(f: Callable, l: int, r: float, n_points: int | None = None) -> complex:
    """(1/2pi) * integral of exp(i l phi) f(r, phi) over one period.

    Periodic trapezoid with ``N >= 4|l| + 16`` points; exact for harmonic
    content up to |l| <= N/4.
    """
    need = 4 * abs(l) + 16
    if n_points is None:
        n = need
    else:
        n = int(n_points)
        if n < need:
            warnings.warn(f"angular_project: {n} points < {need} recommended for l={l}",
                          AccuracyWarning, stacklevel=2)
    phi = 2.0 * np.pi * np.arange(n) / n
    try:
        vals = np.asarray(f(r, phi), dtype=complex)
        if vals.shape != phi.shape:
            raise ValueError
    except (TypeError, ValueError):
        vals = np.array([complex(f(r, p)) for p in phi])
    return complex(np.mean(np.exp(1j * l * phi) * vals))
