"""Resonant states, non-Hermitian projectors, decay and the resolvent.

Pairing constants (fixed once, every other identity has no free parameter):

    pair_plus(phi, idx)  = sqrt(2*pi / k!) * moment(phi, l, k)      = <f+|phi>
    pair_minus(psi, idx) = sqrt(2*pi * k!) * taylor_coeff(psi, l, k) = <f-|psi>

so that pair_minus(f_plus(idx2), idx1) is the Kronecker delta and

    <psi|P-_idx phi> = conj(pair_minus(psi)) * pair_plus(phi)
    <psi|P+_idx phi> = conj(pair_plus(psi)) * pair_minus(phi).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np
from scipy.special import gammaln

from .errors import DivergenceError, DomainError, NearPoleError
from .funcalg import (GphFunction, apply_operator, atom, eval_point, evolve, inner_product, moment,
                      taylor_coeff, time_reverse)
from .numerics import ContourSpec, contour_integral, integrate_interval, integrate_real_line, integrate_semiinfinite
from .params import SystemParams
from .spectral import ResonanceIndex, spectral_coefficient

POLE_DISTANCE = 1e-8
RESOLVENT_METHODS = ("spectral_integral", "resonance_sum", "ode_solve")


def _c_plus(k: int) -> float:
    return math.sqrt(2 * math.pi / math.factorial(k))


def _c_minus(k: int) -> float:
    return math.sqrt(2 * math.pi * math.factorial(k))


def _f_plus_coeff(k: int) -> float:
    return 1.0 / _c_minus(k)


# ----------------------------------------------------------------------------
# resonant states and pairings

def f_plus(idx: ResonanceIndex) -> GphFunction:
    """r**k exp(-i l phi) / sqrt(2 pi k!); an eigenfunction of H with eigenvalue E+."""
    return atom(_f_plus_coeff(idx.k), idx.l, idx.k, 0.0)


def pair_plus(phi: GphFunction, idx: ResonanceIndex) -> complex:
    try:
        return _c_plus(idx.k) * moment(phi, idx.l, idx.k)
    except DivergenceError as exc:
        raise DomainError(f"pair_plus undefined at {idx}: {exc}") from exc


def pair_minus(psi: GphFunction, idx: ResonanceIndex) -> complex:
    # dividing by the stored f+ coefficient makes <f-|f+> = 1 bit-exact
    return taylor_coeff(psi, idx.l, idx.k) / _f_plus_coeff(idx.k)


@dataclass(frozen=True)
class ResonancePairing:
    idx: ResonanceIndex
    plus_value: complex
    minus_value: complex
    normalization: tuple  # (c_plus, c_minus)


def pairing(psi: GphFunction, phi: GphFunction, idx: ResonanceIndex) -> ResonancePairing:
    """minus-type value of ``psi`` and plus-type value of ``phi`` at ``idx``."""
    return ResonancePairing(idx, pair_plus(phi, idx), pair_minus(psi, idx),
                            (_c_plus(idx.k), _c_minus(idx.k)))


@dataclass(frozen=True)
class ProjectorElement:
    idx: ResonanceIndex
    bra: GphFunction
    ket: GphFunction
    sign: str
    value: complex


def projector_element(bra: GphFunction, ket: GphFunction, idx: ResonanceIndex, sign: str = "-") -> ProjectorElement:
    """<bra|P^sign_idx ket>."""
    if sign == "-":
        v = pair_minus(bra, idx).conjugate() * pair_plus(ket, idx)
    elif sign == "+":
        v = pair_plus(bra, idx).conjugate() * pair_minus(ket, idx)
    else:
        raise ValueError(f"sign must be '+' or '-', got {sign!r}")
    return ProjectorElement(idx, bra, ket, sign, complex(v))


def biorthogonality_check(idx1: ResonanceIndex, idx2: ResonanceIndex, probes=()) -> dict:
    """Residuals of <f-_idx1|f+_idx2> = delta and of weak idempotency on probe pairs.

    ``probes`` is a sequence of (psi, phi) with psi smooth and phi decaying;
    for each, <psi|P-_1 P-_2 phi> - delta * <psi|P-_1 phi> is reported.
    """
    delta = 1.0 if idx1 == idx2 else 0.0
    overlap = pair_minus(f_plus(idx2), idx1)
    weak = []
    for psi, phi in probes:
        # <psi|f-_1> <f+_1|f-_2> <f+_2|phi>
        lhs = (pair_minus(psi, idx1).conjugate() * pair_minus(f_plus(idx1), idx2).conjugate()
               * pair_plus(phi, idx2))
        rhs = delta * projector_element(psi, phi, idx1).value
        weak.append(abs(lhs - rhs))
    return {"overlap": complex(overlap), "residual": abs(overlap - delta),
            "weak_residual": max(weak) if weak else 0.0}


# ----------------------------------------------------------------------------
# truncated resolutions

def _index_terms(psi: GphFunction, phi: GphFunction, n_terms: int, weight=None) -> np.ndarray:
    """T[n] = sum over l of conj(pair_minus(psi)) * pair_plus(phi) at (l, n), n < n_terms.

    Works per atom pair in log space so that very long (Abel) sums do not
    overflow. ``weight(l, k)`` multiplies each term (vectorized over k).
    """
    out = np.zeros(n_terms, dtype=complex)
    n = np.arange(n_terms)
    for s in psi:
        if s.sigma == -2:
            continue
        if s.a < 0:
            raise DomainError(f"{s} is singular at the origin")
        if not s.is_smooth:
            raise DomainError(f"{s} is outside the smooth family; no resonance expansion")
        for t in phi:
            if t.l != s.l:
                continue
            if t.beta == 0:
                raise DomainError(f"{t} does not decay; pair_plus diverges")
            l = s.l
            k = abs(l) + 2 * n
            j = (k - s.a) // 2
            ok = j >= 0
            if s.beta == 0:
                ok &= j == 0
            jj = np.where(ok, j, 0)
            if t.sigma == 2:
                sarg = 0.5 * (t.a + k + 2)
            else:
                sarg = -0.5 * (t.a + k + 2)
            valid = ok & (sarg > 0)
            if np.any(ok & ~valid):
                raise DomainError(f"moment of {t} diverges")
            sarg = np.where(valid, sarg, 1.0)
            logmag = gammaln(sarg) - sarg * math.log(t.beta) + math.log(0.5)
            sign = np.ones(n_terms)
            if s.beta:
                logmag = logmag + jj * math.log(s.beta) - gammaln(jj + 1)
                sign = np.where(jj % 2 == 1, -1.0, 1.0)
            vals = 2 * math.pi * s.coeff.conjugate() * t.coeff * sign * np.exp(logmag)
            if weight is not None:
                vals = vals * weight(l, k)
            out += np.where(valid, vals, 0)
    return out


@dataclass(frozen=True)
class WeakSumReport:
    terms: tuple
    partial_sums: tuple
    errors: tuple
    target: complex
    abel: dict          # x -> Abel mean, or None where the series does not converge
    abel_errors: dict


def abel_mean(terms_fn, x: float, tail_tol: float = 1e-16, max_terms: int = 5_000_000):
    """sum_n x**n T[n], with enough terms that the geometric tail is below ``tail_tol``."""
    if not 0 < x < 1:
        raise ValueError("Abel parameter must lie in (0, 1)")
    n_terms = int(min(max_terms, math.ceil(math.log(tail_tol) / math.log(x)) + 64))
    T = terms_fn(n_terms)
    w = np.exp(np.arange(n_terms) * math.log(x))
    tail = abs(T[-64:] * w[-64:]).max()
    if not np.isfinite(tail) or tail > 1e-12 * max(1.0, abs(np.sum(T[:64]))):
        return None
    return complex(np.sum(T * w))


def weak_identity_sum(psi: GphFunction, phi: GphFunction, N: int,
                      abel_x=(0.9, 0.99, 0.999, 1 - 1e-4)) -> WeakSumReport:
    """Partial sums over n <= N of the resonance expansion of <psi|phi>."""
    target = inner_product(psi, phi) if _inner_defined(psi, phi) else _taylor_target(psi, phi)
    T = _index_terms(psi, phi, N + 1)
    partial = np.cumsum(T)
    abel = {}
    for x in abel_x:
        abel[x] = abel_mean(lambda m: _index_terms(psi, phi, m), x)
    return WeakSumReport(tuple(complex(v) for v in T), tuple(complex(v) for v in partial), tuple(float(abs(v - target)) for v in partial),
                         complex(target), abel,
                         {x: (None if v is None else abs(v - target)) for x, v in abel.items()})


def _inner_defined(psi, phi) -> bool:
    try:
        inner_product(psi, phi)
        return True
    except (DivergenceError, DomainError):
        return False


def _taylor_target(psi, phi) -> complex:
    """2 pi sum conj(t_{l,k}(psi)) m_{l,k}(phi) for polynomial-type psi."""
    total = 0j
    for s in psi:
        if s.beta != 0:
            raise DomainError("non-polynomial psi with undefined inner product")
        total += 2 * math.pi * s.coeff.conjugate() * moment(phi.component(s.l), s.l, s.a)
    return total


def spectral_sum_H(psi: GphFunction, phi: GphFunction, N: int, p: SystemParams) -> complex:
    """Resonance sum weighted by E-_{nl}, truncated at n <= N."""
    def weight(l, k):
        return p.hbar * p.omega * l - 1j * p.hbar * p.gamma * (k + 1)
    return complex(np.sum(_index_terms(psi, phi, N + 1, weight)))


# ----------------------------------------------------------------------------
# evolution

def coefficient_evolution(phi: GphFunction, idx: ResonanceIndex, t: float, p: SystemParams):
    """(measured, predicted) ratio pair_plus(U(t) phi)/pair_plus(phi)."""
    base = pair_plus(phi, idx)
    if base == 0:
        raise DomainError(f"pair_plus(phi, {idx}) vanishes; ratio undefined")
    measured = pair_plus(evolve(phi, t, p), idx) / base
    predicted = complex(math.cos(-p.omega * idx.l * t), math.sin(-p.omega * idx.l * t)) \
        * math.exp(-p.gamma * (idx.k + 1) * t)
    return complex(measured), predicted


def kernel_propagate(psi: GphFunction, t: float, p: SystemParams):
    """Pointwise action of the factorized radial and azimuthal propagator kernels.

    Integrating the delta kernels gives (r, phi) -> exp(gamma t) psi(r exp(gamma t), phi + omega t).
    """
    def f(r, phi):
        return math.exp(p.gamma * t) * eval_point(psi, np.asarray(r) * math.exp(p.gamma * t),
                                                  np.asarray(phi) + p.omega * t)
    return f


def propagator_consistency(phi: GphFunction, t: float, s: float, p: SystemParams, rng=None) -> dict:
    rng = np.random.default_rng(0) if rng is None else rng
    lhs = evolve(evolve(phi, t, p), s, p)
    rhs = evolve(phi, t + s, p)
    r = rng.uniform(0.2, 2.0, 20)
    ang = rng.uniform(0, 2 * np.pi, 20)
    pw_group = np.abs(eval_point(lhs, r, ang) - eval_point(rhs, r, ang)).max()
    kern = kernel_propagate(phi, t, p)(r, ang)
    ev = eval_point(evolve(phi, t, p), r, ang)
    scale = max(1.0, float(np.abs(ev).max()))
    return {"group_pointwise": float(pw_group) / scale,
            "group_exact": lhs == rhs,
            "kernel_pointwise": float(np.abs(kern - ev).max()) / scale}


def semigroup_membership(phi: GphFunction, tlist, p: SystemParams, lmax: int = 2, nmax: int = 3) -> list:
    """Per-time diagnostic of decay of the plus-type expansion coefficients."""
    rows = []
    idxs = [ResonanceIndex(l, n) for l in range(-lmax, lmax + 1) for n in range(nmax + 1)]
    base = {i: pair_plus(phi, i) for i in idxs}
    idxs = [i for i in idxs if base[i] != 0]
    for t in tlist:
        ev = evolve(phi, t, p)
        ratios = {i: abs(pair_plus(ev, i) / base[i]) for i in idxs}
        betas = tuple(sorted({a.beta for a in ev if a.beta}))
        rows.append({"t": float(t), "ratios": ratios, "betas": betas,
                     "all_decrease": all(v < 1 for v in ratios.values()),
                     "any_growth": any(v > 1 for v in ratios.values())})
    return rows


# ----------------------------------------------------------------------------
# resolvent

def _check_poles(psi: GphFunction, z: complex, p: SystemParams):
    for s in psi:
        if s.beta == 0 and s.sigma == 2 and s.is_smooth:
            idx = ResonanceIndex(s.l, (s.a - abs(s.l)) // 2)
            if abs(z - idx.energy_minus(p)) < POLE_DISTANCE:
                raise NearPoleError(f"z={z!r} is within {POLE_DISTANCE} of E-{(idx.l, idx.n)}", idx)


def _resonance_sum(psi, phi, z, p):
    total = 0j
    for s in psi:
        if s.beta != 0 or s.sigma != 2 or not s.is_smooth:
            raise DomainError("resonance_sum needs a polynomial psi in the smooth family")
        idx = ResonanceIndex(s.l, (s.a - abs(s.l)) // 2)
        total += 2 * math.pi * s.coeff.conjugate() * moment(phi, s.l, s.a) / (idx.energy_minus(p) - z)
    return total


def _gammainc_factory(s, b, upper):
    def one(x):
        with mpmath.workdps(20):
            v = mpmath.gammainc(s, x, mpmath.inf) if upper else mpmath.gammainc(s, 0, x)
            return complex(v)
    return np.frompyfunc(one, 1, 1)


def _ode_pieces(phi_l, mu, p):
    """Lower/upper primitives L(r), U(r) and the total I of r**(mu-1) g(r)."""
    g0 = 1.0 / (1j * p.gamma * p.hbar)
    parts = []
    for t in phi_l:
        if t.sigma != 2 or t.beta == 0:
            raise DomainError(f"ode_solve needs Gaussian-decaying phi atoms, got {t}")
        s = 0.5 * (mu + t.a)
        pref = t.coeff * g0 * 0.5 * t.beta ** (-s)
        parts.append((pref, s, t.beta, _gammainc_factory(s, t.beta, False), _gammainc_factory(s, t.beta, True)))

    def L(r):
        r = np.asarray(r, dtype=float)
        return sum(pf * lo(b * r * r).astype(complex) for pf, s, b, lo, up in parts)

    def U(r):
        r = np.asarray(r, dtype=float)
        return sum(pf * up(b * r * r).astype(complex) for pf, s, b, lo, up in parts)

    total = sum(pf * complex(mpmath.gamma(s)) for pf, s, b, lo, up in parts)
    return L, U, total


def _ode_solve(psi, phi, z, p, tol):
    total = 0j
    for l in sorted(psi.l_values() & phi.l_values()):
        mu = 1 + 1j * (z - p.hbar * p.omega * l) / (p.gamma * p.hbar)
        L, U, I = _ode_pieces(phi.component(l), mu, p)
        for s in psi.component(l):
            if s.sigma != 2:
                raise DomainError("ode_solve does not pair sigma=-2 bras")
            cbar = 2 * math.pi * s.coeff.conjugate()
            if s.beta == 0:
                q = s.a + 1
                inner = integrate_interval(lambda r: r ** (q - mu) * L(r), 0.0, 1.0, tol=tol).value
                outer = integrate_semiinfinite(lambda r: (1 + r) ** (q - mu) * U(1 + r), tol=tol,
                                               split=2.0).value
                total += cbar * (inner - outer + I / (mu - q - 1))
            else:
                if z.imag < 0:
                    def u(r):
                        return np.exp(-mu * np.log(r)) * L(r)
                else:
                    def u(r):
                        return -np.exp(-mu * np.log(r)) * U(r)
                f = lambda r, s=s: r ** (s.a + 1) * np.exp(-s.beta * r * r) * u(r)
                total += cbar * integrate_semiinfinite(f, tol=tol, split=2.0 / math.sqrt(s.beta)).value
    return total


def spectral_integral_resolvent(psi, phi, z, p: SystemParams, tol: float = 1e-10):
    """Route (a): real-line integral of M_psi conj(M_phi)/(E_{l,lam} - z); returns (value, error)."""
    if z.imag == 0:
        raise DomainError("spectral_integral requires z off the real axis")
    total, err = 0j, 0.0
    for l in sorted(psi.l_values() & phi.l_values()):
        mp = spectral_coefficient(psi, l)
        mf = spectral_coefficient(phi, l)
        center = ((z / p.hbar - l * p.omega) / p.gamma).real
        width = abs(z.imag) / (p.hbar * p.gamma)

        def f(lam):
            return mp(lam) * np.conj(mf(lam)) / (p.hbar * (l * p.omega + lam * p.gamma) - z)

        res = integrate_real_line(f, tol=tol, center=center, split=max(8.0, 4 * width),
                                  scale=4.0, max_panels=20000)
        total += res.value
        err += res.error
    return total, err


def resolvent_element(psi: GphFunction, phi: GphFunction, z, p: SystemParams,
                      method: str = "ode_solve", tol: float = 1e-11) -> complex:
    """<psi|(H - z)^-1 phi> by one of three independent routes.

    resonance_sum needs polynomial psi; spectral_integral needs Gaussian psi
    and z off the real axis; ode_solve accepts either.
    """
    z = complex(z)
    if method not in RESOLVENT_METHODS:
        raise ValueError(f"unknown method {method!r}; choose from {RESOLVENT_METHODS}")
    _check_poles(psi, z, p)
    if method == "resonance_sum":
        return complex(_resonance_sum(psi, phi, z, p))
    if method == "ode_solve":
        return complex(_ode_solve(psi, phi, z, p, tol))
    return complex(spectral_integral_resolvent(psi, phi, z, p, tol)[0])


def projector_from_contour(psi: GphFunction, phi: GphFunction, idx: ResonanceIndex, sign: str,
                           p: SystemParams, radius: float | None = None, points: int = 48,
                           method: str = "ode_solve") -> complex:
    """(1/2 pi i) counterclockwise integral of the resolvent around E^sign_idx.

    Equals -<psi|P^sign_idx phi>. For sign '+' the resolvent continued from
    above is used through <psi|R+(z) phi> = conj(<phi|R-(conj z) psi>), so
    psi is the decaying and phi the smooth argument.
    """
    if radius is None:
        radius = 0.5 * min(p.hbar * p.gamma, p.hbar * p.omega)
    if sign == "-":
        center = idx.energy_minus(p)
        f = lambda z: resolvent_element(psi, phi, z, p, method)
    elif sign == "+":
        center = idx.energy_plus(p)
        f = lambda z: resolvent_element(phi, psi, complex(z).conjugate(), p, method).conjugate()
    else:
        raise ValueError(f"sign must be '+' or '-', got {sign!r}")
    res = contour_integral(f, ContourSpec(center, radius, points))
    return res.value / (2j * math.pi)


# ----------------------------------------------------------------------------
# time reversal

def _sample_points(rng, n):
    return rng.uniform(0.3, 2.0, n), rng.uniform(0, 2 * np.pi, n)


def reversed_plus_residue(psi: GphFunction, idx: ResonanceIndex, radius: float = 0.5, points: int = 64) -> complex:
    """Residue at eps = 0 of the continued pairing <T f+_idx | psi> with r**eps regularization.

    Computed numerically by a contour in eps around 0 of the closed-form Mellin data.
    """
    coef = spectral_coefficient(psi, idx.l)
    norm = 2 * math.pi / _c_minus(idx.k)

    def f(eps):
        lam = -1j * (idx.k + 1 - complex(eps).conjugate())
        return norm * complex(coef(lam)).conjugate()

    return contour_integral(f, ContourSpec(0j, radius, points)).value / (2j * math.pi)


def time_reversal_relations(probes, t: float, p: SystemParams, indices=(), rng=None) -> dict:
    """Residuals of the time-reversal identities on a list of GphFunction probes.

    involution: T T psi == psi; conjugation: T U(t) T == U(-t);
    projector: for each index, reversed_plus_residue(psi)/pair_minus(psi), which
    would be a single phase if T mapped f+ onto a multiple of f- (it is 1/k!);
    commutation: max pointwise |J(T psi) - T(J psi)| for J0 and J2.
    """
    rng = np.random.default_rng(1) if rng is None else rng
    inv = 0.0
    conj_res = 0.0
    comm = {"J0": 0.0, "J2": 0.0}
    r, ang = _sample_points(rng, 10)
    for psi in probes:
        inv = max(inv, (time_reverse(time_reverse(psi)) - psi).max_coeff())
        a = time_reverse(evolve(time_reverse(psi), t, p))
        b = evolve(psi, -t, p)
        scale = max(1.0, float(np.abs(eval_point(b, r, ang)).max()))
        conj_res = max(conj_res, float(np.abs(eval_point(a, r, ang) - eval_point(b, r, ang)).max()) / scale)
        for op in comm:
            lhs = eval_point(apply_operator(op, time_reverse(psi), p), r, ang)
            rhs = eval_point(time_reverse(apply_operator(op, psi, p)), r, ang)
            comm[op] = max(comm[op], float(np.abs(lhs - rhs).max()))
    ratios = {}
    for idx in indices:
        for psi in probes:
            pm = pair_minus(psi, idx)
            if abs(pm) > 1e-12:
                ratios.setdefault(idx, []).append(reversed_plus_residue(psi, idx) / pm)
                break
    return {"involution": inv, "conjugation": conj_res, "commutation": comm,
            "projector_ratios": {i: v[0] for i, v in ratios.items()}}
