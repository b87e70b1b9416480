"""Closed algebra of radial-harmonic test functions.

A ``GphFunction`` is a finite sum of atoms

    coeff * r**a * exp(-beta * r**sigma) * exp(-1j * l * phi),   sigma in {+2, -2}

on the plane in polar coordinates. All operators of the polar representation
(H0, HI, p_r, the su(1,1) generators, the unitary evolution and time reversal)
map atoms to finite sums of atoms, so every result below is produced
symbolically; only floating point rounding of the coefficients is involved.
With dyadic data (integer coefficients, beta and parameters that are short
binary fractions) the coefficient arithmetic is exact, which is what the
"exactly zero" identities are checked with.
"""
from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from .errors import DivergenceError, DomainError, SingularEvaluationError
from .params import SystemParams

__all__ = [
    "Atom",
    "GphFunction",
    "atom",
    "OPERATOR_IDS",
    "apply_operator",
    "inner_product",
    "norm_squared",
    "taylor_coeff",
    "moment",
    "evolve",
    "time_reverse",
    "eval_point",
    "commutator",
    "su11_residuals",
    "casimir_residual",
    "finite_difference_apply",
    "random_gph",
    "FunctionSpecError",
]


class FunctionSpecError(DomainError):
    def __init__(self, message, index=None):
        self.index = index
        super().__init__(message if index is None else f"term {index}: {message}")


@dataclass(frozen=True)
class Atom:
    coeff: complex
    l: int
    a: int
    beta: float = 0.0
    sigma: int = 2

    def __post_init__(self):
        object.__setattr__(self, "coeff", complex(self.coeff))
        if self.sigma not in (2, -2):
            raise ValueError(f"sigma must be +2 or -2, got {self.sigma}")
        if not (self.beta >= 0 and math.isfinite(self.beta)):
            raise ValueError(f"beta must be finite and >= 0, got {self.beta}")
        if self.sigma == -2 and self.beta == 0:
            raise ValueError("sigma=-2 requires beta > 0 (use sigma=+2, beta=0 for pure powers)")
        if not (math.isfinite(self.coeff.real) and math.isfinite(self.coeff.imag)):
            raise ValueError("atom coefficient must be finite")

    @property
    def key(self):
        return (self.l, self.a, self.beta, self.sigma)

    @property
    def is_smooth(self) -> bool:
        """Membership in the smooth subfamily: r^|l| parity structure at the origin."""
        return self.sigma == 2 and self.a >= abs(self.l) and (self.a - abs(self.l)) % 2 == 0

    def with_coeff(self, c) -> "Atom":
        return Atom(c, self.l, self.a, self.beta, self.sigma)

    def value(self, r, phi):
        r = np.asarray(r, dtype=float)
        radial = r ** float(self.a)
        if self.beta:
            radial = radial * np.exp(-self.beta * r ** float(self.sigma))
        return self.coeff * radial * np.exp(-1j * self.l * np.asarray(phi, dtype=float))


class GphFunction:
    """Immutable canonical sum of atoms.

    Atoms sharing ``(l, a, beta, sigma)`` are merged and zero coefficients
    dropped; atoms are kept sorted, so two functions are ``==`` iff their
    canonical data agree exactly.
    """

    __slots__ = ("_atoms",)

    def __init__(self, terms: Iterable[Atom] = ()):
        merged: dict = {}
        for t in terms:
            merged[t.key] = merged.get(t.key, 0j) + t.coeff
        atoms = []
        for key in sorted(merged):
            c = merged[key]
            if c != 0:
                atoms.append(Atom(c, *key))
        self._atoms = tuple(atoms)

    @property
    def atoms(self) -> tuple:
        return self._atoms

    def __iter__(self):
        return iter(self._atoms)

    def __len__(self):
        return len(self._atoms)

    def __repr__(self):
        body = ", ".join(
            f"({t.coeff:.6g})r^{t.a}e^(-{t.beta:g}r^{t.sigma})e^(-i{t.l}phi)" for t in self._atoms
        )
        return f"GphFunction([{body}])"

    def __eq__(self, other):
        if not isinstance(other, GphFunction):
            return NotImplemented
        return self._atoms == other._atoms

    def __hash__(self):
        return hash(self._atoms)

    def __add__(self, other):
        if not isinstance(other, GphFunction):
            return NotImplemented
        return GphFunction(self._atoms + other._atoms)

    def __neg__(self):
        return GphFunction(t.with_coeff(-t.coeff) for t in self._atoms)

    def __sub__(self, other):
        if not isinstance(other, GphFunction):
            return NotImplemented
        return self + (-other)

    def __mul__(self, c):
        if isinstance(c, GphFunction):
            return NotImplemented
        c = complex(c)
        return GphFunction(t.with_coeff(c * t.coeff) for t in self._atoms)

    __rmul__ = __mul__

    def is_zero(self, tol: float = 0.0) -> bool:
        return all(abs(t.coeff) <= tol for t in self._atoms)

    def max_coeff(self) -> float:
        return max((abs(t.coeff) for t in self._atoms), default=0.0)

    def isclose(self, other: "GphFunction", rtol: float = 1e-13, atol: float = 0.0) -> bool:
        """Atom-by-atom closeness; beta values are matched with relative ``rtol``."""
        if len(self) != len(other):
            return False
        for s, o in zip(self._atoms, other._atoms):
            if (s.l, s.a, s.sigma) != (o.l, o.a, o.sigma):
                return False
            if abs(s.beta - o.beta) > rtol * max(abs(s.beta), abs(o.beta)):
                return False
            if abs(s.coeff - o.coeff) > atol + rtol * max(abs(s.coeff), abs(o.coeff)):
                return False
        return True

    def l_values(self) -> set:
        return {t.l for t in self._atoms}

    def component(self, l: int) -> "GphFunction":
        return GphFunction(t for t in self._atoms if t.l == l)

    def is_smooth(self) -> bool:
        return all(t.is_smooth for t in self._atoms)

    def __call__(self, r, phi):
        return eval_point(self, r, phi)

    # --- serialization -------------------------------------------------------
    def to_json_obj(self) -> list:
        return [
            {"re": t.coeff.real, "im": t.coeff.imag, "l": t.l, "a": t.a,
             "beta": t.beta, "sigma": t.sigma}
            for t in self._atoms
        ]

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj())

    @classmethod
    def from_json_obj(cls, obj) -> "GphFunction":
        if not isinstance(obj, list):
            raise FunctionSpecError("function spec must be a JSON list of terms")
        atoms = []
        for i, term in enumerate(obj):
            if not isinstance(term, dict):
                raise FunctionSpecError("term is not an object", i)
            unknown = set(term) - {"re", "im", "l", "a", "beta", "sigma"}
            if unknown:
                raise FunctionSpecError(f"unknown keys {sorted(unknown)}", i)
            try:
                l = term["l"]
                a = term["a"]
                if not (isinstance(l, int) and isinstance(a, int)) or isinstance(l, bool) or isinstance(a, bool):
                    raise FunctionSpecError("'l' and 'a' must be integers", i)
                atoms.append(Atom(complex(float(term.get("re", 0.0)), float(term.get("im", 0.0))),
                                  l, a, float(term.get("beta", 0.0)), int(term.get("sigma", 2))))
            except KeyError as exc:
                raise FunctionSpecError(f"missing key {exc}", i) from None
            except (TypeError, ValueError) as exc:
                raise FunctionSpecError(str(exc), i) from None
        return cls(atoms)

    @classmethod
    def from_json(cls, text: str) -> "GphFunction":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise FunctionSpecError(f"invalid JSON: {exc}") from None
        return cls.from_json_obj(obj)


def atom(coeff=1.0, l: int = 0, a: int = 0, beta: float = 0.0, sigma: int = 2) -> GphFunction:
    return GphFunction([Atom(coeff, l, a, beta, sigma)])


ZERO = GphFunction()


# ----------------------------------------------------------------------------
# elementary symbolic maps

def _map(psi: GphFunction, fn) -> GphFunction:
    out = []
    for t in psi:
        out.extend(fn(t))
    return GphFunction(out)


def _d_r(psi):
    def rule(t):
        yield Atom(t.a * t.coeff, t.l, t.a - 1, t.beta, t.sigma)
        if t.beta:
            yield Atom(-t.sigma * t.beta * t.coeff, t.l, t.a + t.sigma - 1, t.beta, t.sigma)
    return _map(psi, rule)


def _r_pow(psi, k):
    return _map(psi, lambda t: [Atom(t.coeff, t.l, t.a + k, t.beta, t.sigma)])


def _d_phi(psi):
    return _map(psi, lambda t: [t.with_coeff(-1j * t.l * t.coeff)])


def _dilation(psi):
    """r d/dr + 1."""
    def rule(t):
        yield t.with_coeff((t.a + 1) * t.coeff)
        if t.beta:
            yield Atom(-t.sigma * t.beta * t.coeff, t.l, t.a + t.sigma, t.beta, t.sigma)
    return _map(psi, rule)


def _laplacian(psi, radial_first_order: bool):
    d1 = _d_r(psi)
    out = _d_r(d1) + _r_pow(_d_phi(_d_phi(psi)), -2)
    if radial_first_order:
        out = out + _r_pow(d1, -1)
    return out


# ----------------------------------------------------------------------------
# operators

def _h0(psi, p):
    hw = p.hbar * p.omega
    return _map(psi, lambda t: [t.with_coeff(hw * t.l * t.coeff)])


def _hi(psi, p):
    return 1j * p.gamma * p.hbar * _dilation(psi)


def _h(psi, p):
    def rule(t):
        yield t.with_coeff(complex(p.hbar * p.omega * t.l, p.hbar * p.gamma * (t.a + 1)) * t.coeff)
        if t.beta:
            yield Atom(complex(0.0, p.hbar * p.gamma) * (-t.sigma * t.beta * t.coeff),
                       t.l, t.a + t.sigma, t.beta, t.sigma)
    return _map(psi, rule)


def _pr(psi, p):
    return -1j * p.hbar * (_d_r(psi) + 0.5 * _r_pow(psi, -1))


def _j0(psi, p):
    return 0.5j * _d_phi(psi)


def _j2(psi, p):
    return 0.5j * _dilation(psi)


def _kinetic(psi, p, corrected):
    return (-p.hbar / 4.0) * _laplacian(psi, corrected)


def _potential(psi, p):
    return (1.0 / (4.0 * p.hbar)) * _r_pow(psi, 2)


def _j1_printed(psi, p):
    return _kinetic(psi, p, False) - _potential(psi, p)


def _j3_printed(psi, p):
    return _potential(psi, p) + _j0(psi, p) + _kinetic(psi, p, False)


def _j1_corrected(psi, p):
    return _kinetic(psi, p, True) - _potential(psi, p)


def _j3_corrected(psi, p):
    # the angular (i/2) d/dphi term is omitted: it is J0, a central element,
    # and keeping it breaks [J1, J2] = i J3 by exactly -i J0
    return _potential(psi, p) + _kinetic(psi, p, True)


_OPERATORS: dict[str, Callable[[GphFunction, SystemParams], GphFunction]] = {
    "H0": _h0,
    "HI": _hi,
    "H": _h,
    "Pr": _pr,
    "J0": _j0,
    "J1_printed": _j1_printed,
    "J2": _j2,
    "J3_printed": _j3_printed,
    "J1_corrected": _j1_corrected,
    "J3_corrected": _j3_corrected,
}
OPERATOR_IDS = tuple(_OPERATORS)


def apply_operator(op_id: str, psi: GphFunction, p: SystemParams) -> GphFunction:
    try:
        op = _OPERATORS[op_id]
    except KeyError:
        raise ValueError(f"unknown operator {op_id!r}; expected one of {OPERATOR_IDS}") from None
    return op(psi, p)


def commutator(op_a: str, op_b: str, psi: GphFunction, p: SystemParams) -> GphFunction:
    a = lambda f: apply_operator(op_a, f, p)  # noqa: E731
    b = lambda f: apply_operator(op_b, f, p)  # noqa: E731
    return a(b(psi)) - b(a(psi))


def su11_residuals(psi: GphFunction, p: SystemParams, variant: str = "corrected") -> dict:
    """Residual functions of [J1,J2]-iJ3, [J3,J2]-iJ1, [J1,J3]-iJ2 applied to ``psi``."""
    j1, j3 = f"J1_{variant}", f"J3_{variant}"
    ap = lambda op, f: apply_operator(op, f, p)  # noqa: E731
    return {
        "J1J2": commutator(j1, "J2", psi, p) - 1j * ap(j3, psi),
        "J3J2": commutator(j3, "J2", psi, p) - 1j * ap(j1, psi),
        "J1J3": commutator(j1, j3, psi, p) - 1j * ap("J2", psi),
    }


def casimir_residual(psi: GphFunction, p: SystemParams, variant: str = "corrected") -> GphFunction:
    """J0^2 - (1/4 + J3^2 - J1^2 - J2^2) applied to ``psi``."""
    ap = lambda op, f: apply_operator(op, f, p)  # noqa: E731
    sq = lambda op: ap(op, ap(op, psi))  # noqa: E731
    j1, j3 = f"J1_{variant}", f"J3_{variant}"
    return sq("J0") - (0.25 * psi + sq(j3) - sq(j1) - sq("J2"))


# ----------------------------------------------------------------------------
# integrals

def _radial_gauss_integral(power: int, beta: float) -> float:
    """Integral over r of r**power * exp(-beta r^2) on (0, inf)."""
    s = 0.5 * (power + 1)
    return 0.5 * math.exp(math.lgamma(s) - s * math.log(beta))


def _pair_integral(s: Atom, t: Atom) -> float:
    """Radial part of <s|t> in the measure r dr, closed form."""
    if s.sigma == 2 and t.sigma == 2:
        power = s.a + t.a + 1
        b = s.beta + t.beta
        if b > 0 and power > -1:
            return _radial_gauss_integral(power, b)
    elif s.sigma == -2 and t.sigma == -2:
        # r -> 1/r maps the pair onto a sigma=+2 integral
        power = -(s.a + t.a) - 3
        b = s.beta + t.beta
        if power > -1:
            return _radial_gauss_integral(power, b)
    else:
        raise DomainError(f"mixed-sigma pair {s} / {t} has no gamma closed form")
    raise DivergenceError(f"non-integrable pair {s} / {t}")


def inner_product(psi: GphFunction, phi: GphFunction) -> complex:
    """<psi|phi> on L^2(R^2), antilinear in ``psi``."""
    total = 0j
    for s in psi:
        for t in phi:
            if s.l != t.l:
                continue
            total += 2.0 * math.pi * s.coeff.conjugate() * t.coeff * _pair_integral(s, t)
    return total


def norm_squared(psi: GphFunction) -> float:
    return inner_product(psi, psi).real


def taylor_coeff(psi: GphFunction, l: int, k: int) -> complex:
    """Coefficient of r**k in the expansion of the angular component psi_l at r = 0.

    sigma=-2 atoms are flat at the origin and contribute nothing. Negative
    powers make psi_l singular at the origin and raise DomainError.
    """
    total = 0j
    for t in psi:
        if t.l != l or t.sigma == -2:
            continue
        if t.a < 0:
            raise DomainError(f"component l={l} is singular at the origin ({t})")
        d = k - t.a
        if d < 0 or d % 2:
            continue
        j = d // 2
        if t.beta == 0:
            if j == 0:
                total += t.coeff
            continue
        total += t.coeff * ((-t.beta) ** j / math.factorial(j))
    return total


def moment(phi: GphFunction, l: int, k) -> complex:
    """Integral of r**(k+1) * phi_l(r) over (0, inf) in closed form.

    ``k`` may be any real number at which the integral converges.
    """
    total = 0j
    for t in phi:
        if t.l != l:
            continue
        if t.beta == 0:
            raise DivergenceError(f"moment of non-decaying atom {t} diverges")
        if t.sigma == 2:
            power = t.a + k + 1
            if power <= -1:
                raise DivergenceError(f"moment k={k} of {t} diverges at the origin")
            total += t.coeff * _radial_gauss_integral(power, t.beta)
        else:
            power = -(t.a + k + 1) - 2
            if power <= -1:
                raise DivergenceError(f"moment k={k} of {t} diverges at infinity")
            total += t.coeff * _radial_gauss_integral(power, t.beta)
    return total


# ----------------------------------------------------------------------------
# evolution and time reversal

def evolve(psi: GphFunction, t: float, p: SystemParams) -> GphFunction:
    """(U(t) psi)(r, phi) = exp(gamma t) psi(exp(gamma t) r, phi + omega t)."""
    g, w = p.gamma, p.omega

    def rule(at):
        factor = cmath.exp(complex(g * (at.a + 1) * t, -at.l * w * t))
        beta = at.beta * math.exp(at.sigma * g * t) if at.beta else 0.0
        return [Atom(at.coeff * factor, at.l, at.a, beta, at.sigma)]

    return _map(psi, rule)


def time_reverse(psi: GphFunction) -> GphFunction:
    """(T psi)(r, phi) = r**-2 * conj(psi)(1/r, -phi): antiunitary and involutive."""
    def rule(t):
        sigma = -t.sigma if t.beta else 2
        return [Atom(t.coeff.conjugate(), t.l, -t.a - 2, t.beta, sigma)]
    return _map(psi, rule)


def eval_point(psi: GphFunction, r, phi):
    """Direct summation of atoms; scalar in, scalar out."""
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr < 0):
        raise SingularEvaluationError("negative radius")
    if np.any(r_arr == 0) and any(t.a < 0 or t.sigma == -2 for t in psi):
        raise SingularEvaluationError("evaluation at r=0 of a function with negative powers")
    out = np.zeros(np.broadcast(r_arr, np.asarray(phi)).shape, dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore"):
        for t in psi:
            out = out + t.value(r_arr, phi)
    if out.ndim == 0:
        return complex(out)
    return out


# ----------------------------------------------------------------------------
# pointwise finite-difference oracle

def _fd1(f, x, h):
    return (f(x - 2 * h) - 8 * f(x - h) + 8 * f(x + h) - f(x + 2 * h)) / (12 * h)


def _fd2(f, x, h):
    return (-f(x - 2 * h) + 16 * f(x - h) - 30 * f(x) + 16 * f(x + h) - f(x + 2 * h)) / (12 * h * h)


def finite_difference_apply(op_id: str, psi: GphFunction, p: SystemParams,
                            r: float, phi: float, h: float = 1e-3) -> complex:
    """Evaluate an operator at one point from five-point stencils on ``psi``.

    Independent of the symbolic rules: only ``eval_point`` is used.
    """
    fr = lambda x: eval_point(psi, x, phi)  # noqa: E731
    fphi = lambda y: eval_point(psi, r, y)  # noqa: E731
    f = eval_point(psi, r, phi)
    dr = _fd1(fr, r, h * r)
    drr = _fd2(fr, r, h * r)
    dphi = _fd1(fphi, phi, h)
    dphiphi = _fd2(fphi, phi, h)
    hb, g, w = p.hbar, p.gamma, p.omega
    kin_printed = -(hb / 4) * (drr + dphiphi / r ** 2)
    kin_corr = -(hb / 4) * (drr + dr / r + dphiphi / r ** 2)
    pot = r * r / (4 * hb)
    j0 = 0.5j * dphi
    j2 = 0.5j * (r * dr + f)
    values = {
        "H0": 1j * w * hb * dphi,
        "HI": 1j * g * hb * (r * dr + f),
        "H": 1j * w * hb * dphi + 1j * g * hb * (r * dr + f),
        "Pr": -1j * hb * (dr + f / (2 * r)),
        "J0": j0,
        "J2": j2,
        "J1_printed": kin_printed - pot * f,
        "J3_printed": pot * f + j0 + kin_printed,
        "J1_corrected": kin_corr - pot * f,
        "J3_corrected": pot * f + kin_corr,
    }
    return complex(values[op_id])


# ----------------------------------------------------------------------------

_DYADIC_BETAS = (0.25, 0.5, 1.0, 1.5, 2.0)


def random_gph(rng: np.random.Generator, n_terms: int = 3, lmax: int = 3, jmax: int = 3,
               smooth: bool = True, gaussian: bool = True) -> GphFunction:
    """Random function with Gaussian-integer coefficients and dyadic decay rates.

    ``smooth`` restricts powers to a = |l| + 2j; ``gaussian`` forces beta > 0.
    """
    atoms = []
    for _ in range(n_terms):
        l = int(rng.integers(-lmax, lmax + 1))
        if smooth:
            a = abs(l) + 2 * int(rng.integers(0, jmax + 1))
        else:
            a = int(rng.integers(0, abs(l) + 2 * jmax + 1))
        beta = float(rng.choice(_DYADIC_BETAS)) if gaussian else 0.0
        c = complex(int(rng.integers(-4, 5)), int(rng.integers(-4, 5)))
        if c == 0:
            c = 1.0
        atoms.append(Atom(c, l, a, beta, 2))
    return GphFunction(atoms)
