"""Continuum eigenfunctions, Mellin-type spectral coefficients and resonance labels.

Pairing convention, used everywhere in the package: for a test function phi

    M_phi(lam) = <phi|Psi_{l,lam}> = integral_0^inf r**(-1j*lam) * conj(phi_l(r)) dr

where ``phi_l`` is the coefficient of exp(-1j*l*phi) and
``Psi_{l,lam} = exp(-1j*l*phi) * r**(-1j*lam - 1) / (2*pi)``. All antilinearity
sits in the first slot.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import AccuracyWarning, DomainError, NoClosedFormError, SingularEvaluationError
from .funcalg import GphFunction, taylor_coeff
from .numerics import ContourSpec, contour_integral, integrate_real_line, log_gamma_array
from .params import SystemParams

# residue_contour / residue_taylor, measured once (see tests) and pinned here.
RESIDUE_CONVENTION_FACTOR = 1j
DEFAULT_RESIDUE_RADIUS = 0.5


# ----------------------------------------------------------------------------
# labels

@dataclass(frozen=True)
class ResonanceIndex:
    """Resonance label (l, n); the radial order is k = |l| + 2n."""

    l: int
    n: int

    def __post_init__(self):
        if int(self.l) != self.l or int(self.n) != self.n:
            raise DomainError("resonance labels must be integers")
        if self.n < 0:
            raise DomainError(f"n must be >= 0, got {self.n}")
        object.__setattr__(self, "l", int(self.l))
        object.__setattr__(self, "n", int(self.n))

    @property
    def k(self) -> int:
        return abs(self.l) + 2 * self.n

    @property
    def pole(self) -> complex:
        return -1j * (self.k + 1)

    def energy_minus(self, p: SystemParams) -> complex:
        return complex(p.hbar * p.omega * self.l, -p.hbar * p.gamma * (self.k + 1))

    def energy_plus(self, p: SystemParams) -> complex:
        return complex(p.hbar * p.omega * self.l, p.hbar * p.gamma * (self.k + 1))


def resonance_indices(lmax: int, nmax: int) -> list:
    return [ResonanceIndex(l, n) for l in range(-lmax, lmax + 1) for n in range(nmax + 1)]


@dataclass(frozen=True)
class LabelSet:
    l: int
    n: int
    j: float
    m: float
    nA: int
    nB: int
    E_minus: complex
    E_plus: complex

    @property
    def index(self) -> ResonanceIndex:
        return ResonanceIndex(self.l, self.n)


def _as_int(x, what):
    if abs(x - round(x)) > 1e-12:
        raise DomainError(f"{what} must be an integer, got {x}")
    return int(round(x))


def label_map(p: SystemParams, *, l=None, n=None, j=None, m=None, nA=None, nB=None) -> LabelSet:
    """Translate one of (l, n), (j, m) or (nA, nB) into all three label systems.

    Energies are computed both as hbar*omega*l -/+ i*hbar*gamma*(k+1) and as
    2*hbar*omega*j -/+ i*hbar*gamma*(2m+1); a mismatch raises DomainError.
    """
    given = [(l, n), (j, m), (nA, nB)]
    supplied = [g for g in given if g != (None, None)]
    if len(supplied) != 1 or None in supplied[0]:
        raise DomainError("supply exactly one complete label pair: (l,n), (j,m) or (nA,nB)")
    if l is not None:
        l, n = _as_int(l, "l"), _as_int(n, "n")
    elif j is not None:
        l = _as_int(2 * j, "2j")
        if m < abs(j) - 1e-12:
            raise DomainError(f"m={m} < |j|={abs(j)}")
        n = _as_int(m - abs(j), "m - |j|")
    else:
        nA, nB = _as_int(nA, "nA"), _as_int(nB, "nB")
        if nA < 0 or nB < 0:
            raise DomainError("occupation numbers must be nonnegative")
        l, n = nA - nB, min(nA, nB)
    if n < 0:
        raise DomainError(f"n must be >= 0, got {n}")
    idx = ResonanceIndex(l, n)
    j = l / 2
    m = abs(j) + n
    e_minus, e_plus = idx.energy_minus(p), idx.energy_plus(p)
    alt_minus = complex(2 * p.hbar * p.omega * j, -p.hbar * p.gamma * (2 * m + 1))
    alt_plus = complex(2 * p.hbar * p.omega * j, p.hbar * p.gamma * (2 * m + 1))
    if abs(alt_minus - e_minus) > 1e-12 * max(1.0, abs(e_minus)) or abs(alt_plus - e_plus) > 1e-12 * max(1.0, abs(e_plus)):
        raise DomainError("label systems disagree on the energy")
    return LabelSet(l, n, j, m, (abs(l) + l) // 2 + n, (abs(l) - l) // 2 + n, e_minus, e_plus)


# ----------------------------------------------------------------------------
# continuum

def continuum_energy(l: int, lam, p: SystemParams):
    """hbar*(l*omega + lam*gamma); complex ``lam`` gives the continued value."""
    return p.hbar * (l * p.omega + lam * p.gamma)


def eigenfunction_eval(l: int, lam, r, phi):
    """exp(-i l phi) * r**(-(i lam + 1)) / (2 pi)."""
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr <= 0):
        raise SingularEvaluationError("continuum eigenfunctions are singular at r = 0")
    lam = complex(lam)
    val = np.exp(-(1j * lam + 1) * np.log(r_arr)) * np.exp(-1j * l * np.asarray(phi, dtype=float)) / (2 * np.pi)
    return complex(val) if np.ndim(val) == 0 else val


@dataclass(frozen=True)
class GammaTerm:
    """prefactor * scale**(-z) * Gamma(z) with z = z0 + zslope * lam."""

    prefactor: complex
    scale: float
    z0: float
    zslope: complex

    def z(self, lam):
        return self.z0 + self.zslope * lam

    def pole(self, j: int) -> complex:
        """Location in lam of the j-th pole (z = -j)."""
        return complex((-j - self.z0) / self.zslope)

    def residue(self, j: int) -> complex:
        return self.prefactor * self.scale ** j * (-1) ** j / (math.factorial(j) * self.zslope)


class SpectralCoefficient:
    """Meromorphic function of lam stored as a finite sum of gamma terms.

    ``entire_remainder`` is always False for coefficients built from atoms; it
    is kept so the data type can carry a flag for additive entire parts.
    """

    def __init__(self, terms, entire_remainder: bool = False):
        self.terms = tuple(terms)
        self.entire_remainder = entire_remainder

    def __call__(self, lam):
        lam_arr = np.asarray(lam, dtype=complex)
        out = np.zeros(lam_arr.shape, dtype=complex)
        for t in self.terms:
            z = t.z(lam_arr)
            out = out + t.prefactor * np.exp(log_gamma_array(z) - z * math.log(t.scale))
        return complex(out) if out.ndim == 0 else out

    def poles(self, max_j: int = 10) -> list:
        """Sorted distinct pole locations with j <= max_j for each term."""
        out = set()
        for t in self.terms:
            for j in range(max_j + 1):
                pl = t.pole(j)
                out.add((round(pl.real, 12), round(pl.imag, 12)))
        return sorted((complex(a, b) for a, b in out), key=lambda z: (-z.imag, z.real))

    def residue(self, lam0: complex, tol: float = 1e-9) -> complex:
        """Closed-form residue at ``lam0`` (0 if no term has a pole there)."""
        total = 0j
        for t in self.terms:
            jj = -(t.z0 + t.zslope * lam0)
            j = round(jj.real)
            if j >= 0 and abs(jj - j) < tol:
                total += t.residue(j)
        return total


def spectral_coefficient(phi: GphFunction, l: int) -> SpectralCoefficient:
    """Closed-form M_phi(lam) for the angular index ``l``.

    Each sigma=+2 atom c r^a e^{-beta r^2} contributes
    conj(c)/2 * beta^{-z} Gamma(z), z = (a+1-i lam)/2. sigma=-2 atoms are
    handled through r -> 1/r, giving z = (-a-1+i lam)/2.
    """
    terms = []
    for t in phi:
        if t.l != l:
            continue
        if t.beta == 0:
            raise NoClosedFormError(f"atom {t} has no Mellin transform (beta = 0)")
        if t.sigma == 2:
            terms.append(GammaTerm(0.5 * t.coeff.conjugate(), t.beta, 0.5 * (t.a + 1), -0.5j))
        else:
            terms.append(GammaTerm(0.5 * t.coeff.conjugate(), t.beta, -0.5 * (t.a + 1), 0.5j))
    return SpectralCoefficient(terms)


def tilde_coefficient(phi: GphFunction, l: int):
    """lam -> <Psi_{l,lam}|phi> = conj(M_phi(conj(lam))), holomorphic off the upper poles."""
    coef = spectral_coefficient(phi, l)

    def f(lam):
        return np.conj(coef(np.conj(np.asarray(lam, dtype=complex))))

    return f


# ----------------------------------------------------------------------------
# residues

def residue_taylor(phi: GphFunction, idx: ResonanceIndex) -> complex:
    """conj of the k-th Taylor coefficient of phi_l at the origin."""
    return complex(taylor_coeff(phi, idx.l, idx.k)).conjugate()


def laurent_contour(coef, center: complex, radius: float = DEFAULT_RESIDUE_RADIUS, points: int = 64):
    """First two negative Laurent coefficients (c_-1, c_-2) of ``coef`` at ``center``."""
    spec = ContourSpec(center, radius, points)
    c1 = contour_integral(lambda z: coef(z), spec)
    c2 = contour_integral(lambda z: coef(z) * (z - center), spec)
    return c1.value / (2j * math.pi), c2.value / (2j * math.pi), c1.accurate and c2.accurate


def residue_contour(phi: GphFunction, idx: ResonanceIndex, radius: float = DEFAULT_RESIDUE_RADIUS,
                    points: int = 64) -> complex:
    """(1/2 pi i) times the counterclockwise integral of M_phi around the pole of ``idx``."""
    coef = spectral_coefficient(phi, idx.l)
    if not coef.terms:
        return 0j
    res = contour_integral(lambda z: coef(z), ContourSpec(idx.pole, radius, points))
    return res.value / (2j * math.pi)


# ----------------------------------------------------------------------------
# resolution of identity

def resolution_of_identity(psi: GphFunction, phi: GphFunction, tol: float = 1e-10):
    """Sum over l of the real-line integral of M_psi(lam) * conj(M_phi(lam)).

    Returns (value, error_bound). Requires Gaussian-decaying atoms in both
    arguments so that both coefficients exist on the real axis.
    """
    total = 0j
    err = 0.0
    for l in sorted(psi.l_values() & phi.l_values()):
        mp = spectral_coefficient(psi, l)
        mf = spectral_coefficient(phi, l)
        res = integrate_real_line(lambda lam: mp(lam) * np.conj(mf(lam)), tol=tol, split=8.0, scale=4.0)
        total += res.value
        err += res.error
    return total, err


# ----------------------------------------------------------------------------
# parity structure of smooth functions

@dataclass(frozen=True)
class ParityReport:
    coefficients: dict          # (l, k) -> Taylor coefficient of phi_l
    forbidden_max: float        # largest |coefficient| with k < |l| or wrong parity
    scale: float                # sup of |phi| on the sampled circle
    leading_power: dict         # l -> lowest k with non-negligible coefficient
    method: str                 # "contour" or "fit"
    passed: bool


def _cartesian_on_polar(f, r, phi):
    return f(r * np.cos(phi), r * np.sin(phi))


def parity_check(f, lmax: int, kmax: int, radius: float = 0.5, tol: float = 1e-8,
                 n_angle: int | None = None) -> ParityReport:
    """Taylor structure of the angular components of a smooth Cartesian function.

    ``f(x1, x2)`` is sampled on the circle of complex radii
    r = radius*exp(i theta); a double periodic trapezoid in (phi, theta)
    returns the Taylor coefficients t_{l,k} of every phi_l. Smoothness at the
    origin requires t_{l,k} = 0 for k < |l| and for k - |l| odd; the largest
    such coefficient must not exceed ``tol`` times the sup of |f| on the
    circle. If ``f`` does not accept complex input, a least-squares fit in
    real r is used instead. The fit meets the default tolerance only up to
    about kmax = 4, loses accuracy quickly beyond that and warns for kmax > 8.
    """
    n_phi = n_angle or max(4 * lmax + 16, 2 * kmax + 16)
    n_th = n_angle or max(2 * kmax + 32, 64)
    phi = 2 * np.pi * np.arange(n_phi) / n_phi
    th = 2 * np.pi * np.arange(n_th) / n_th
    method = "contour"
    coeffs = {}
    try:
        rr = radius * np.exp(1j * th)[:, None]
        with np.errstate(all="raise"):
            vals = np.asarray(_cartesian_on_polar(f, rr, phi[None, :]), dtype=complex)
        if vals.shape != (n_th, n_phi) or not np.all(np.isfinite(vals)):
            raise TypeError
        scale = float(np.max(np.abs(vals)))
        for l in range(-lmax, lmax + 1):
            comp = np.mean(vals * np.exp(1j * l * phi)[None, :], axis=1)
            for k in range(kmax + 1):
                coeffs[(l, k)] = complex(np.mean(comp * np.exp(-1j * k * th)) / radius ** k)
    except (TypeError, ValueError, FloatingPointError):
        method = "fit"
        if kmax > 8:
            warnings.warn(f"least-squares Taylor fit with kmax={kmax} > 8 is ill-conditioned",
                          AccuracyWarning, stacklevel=2)
        # overfit by a few degrees so truncation does not leak into low orders
        deg = kmax + 12
        npts = 3 * (deg + 1)
        s = 0.5 * (1 + np.cos(np.pi * (np.arange(npts) + 0.5) / npts))
        vals = np.array([[complex(f(r * math.cos(q), r * math.sin(q))) for q in phi] for r in s * radius])
        scale = float(np.max(np.abs(vals)))
        design = s[:, None] ** np.arange(deg + 1)[None, :]
        for l in range(-lmax, lmax + 1):
            comp = np.mean(vals * np.exp(1j * l * phi)[None, :], axis=1)
            sol, *_ = np.linalg.lstsq(design, comp, rcond=None)
            for k in range(kmax + 1):
                coeffs[(l, k)] = complex(sol[k]) / radius ** k
    forbidden = 0.0
    leading = {}
    floor = tol * max(scale, 1e-300)
    for (l, k), c in coeffs.items():
        if k < abs(l) or (k - abs(l)) % 2:
            forbidden = max(forbidden, abs(c))
        elif abs(c) > floor and (l not in leading or k < leading[l]):
            leading[l] = k
    return ParityReport(coeffs, forbidden, scale, dict(sorted(leading.items())), method,
                        forbidden <= floor)


# ----------------------------------------------------------------------------
# Hardy-class diagnostic

@dataclass(frozen=True)
class HardyReport:
    radii: tuple
    maxima: tuple
    shifted: tuple          # radii that were moved off a pole
    classification: str     # "decaying" or "non-decaying"


def hardy_diagnostic(phi: GphFunction, l: int, radii, points: int = 129,
                     decay_ratio: float = 1e-2) -> HardyReport:
    """Growth of <Psi_{l,lam}|phi> on lower half-plane arcs |lam| = R.

    A diagnostic only. Radii that pass within 0.25 of a pole are moved by
    half the pole spacing. The function is classified "decaying" when the arc
    maxima never increase and the last is below ``decay_ratio`` times the first.
    """
    g = tilde_coefficient(phi, l)
    pole_moduli = [abs(p) for p in spectral_coefficient(phi, l).poles(max_j=200)]
    theta = np.linspace(-np.pi, 0.0, points)
    used, maxima, shifted = [], [], []
    for R in radii:
        R = float(R)
        if any(abs(R - pm) < 0.25 for pm in pole_moduli):
            shifted.append(R)
            R += 1.0
        used.append(R)
        if not pole_moduli and not spectral_coefficient(phi, l).terms:
            maxima.append(0.0)
            continue
        maxima.append(float(np.max(np.abs(g(R * np.exp(1j * theta))))))
    maxima_t = tuple(maxima)
    if all(m == 0 for m in maxima_t):
        cls = "decaying"
    else:
        monotone = all(b <= a for a, b in zip(maxima_t, maxima_t[1:]))
        cls = "decaying" if monotone and maxima_t[-1] <= decay_ratio * maxima_t[0] else "non-decaying"
    return HardyReport(tuple(used), maxima_t, tuple(shifted), cls)


def contour_to_taylor_ratio(phi: GphFunction, idx: ResonanceIndex) -> complex:
    """residue_contour / residue_taylor; undefined (DomainError) if the Taylor value vanishes."""
    t = residue_taylor(phi, idx)
    if t == 0:
        raise DomainError(f"Taylor residue vanishes at {idx}")
    return residue_contour(phi, idx) / t
