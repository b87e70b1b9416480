"""Invariant suites run by ``bateman verify``.

Each suite returns a list of ``Check`` records; a check passes when its
residual is at most its tolerance.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import classical, fock, funcalg, resonance, spectral
from .errors import AccuracyWarning
from .params import SystemParams

SUITES = ("funcalg", "classical", "spectral", "resonance", "fock")


@dataclass(frozen=True)
class Check:
    suite: str
    name: str
    residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.residual <= self.tolerance)

    def as_dict(self) -> dict:
        return {"suite": self.suite, "name": self.name, "residual": self.residual,
                "tolerance": self.tolerance, "passed": self.passed}


def _funcalg(p: SystemParams, rng, tol) -> list:
    probes = [funcalg.random_gph(rng) for _ in range(10)]
    su = max(max(v.max_coeff() for v in funcalg.su11_residuals(f, p).values()) for f in probes)
    cas = max(funcalg.casimir_residual(f, p).max_coeff() for f in probes)
    hsum = max((funcalg.apply_operator("H", f, p) - funcalg.apply_operator("H0", f, p)
                - funcalg.apply_operator("HI", f, p)).max_coeff() for f in probes)
    fd = 0.0
    for f in probes[:3]:
        for op in ("H", "Pr", "J1_corrected", "J3_corrected"):
            sym = funcalg.eval_point(funcalg.apply_operator(op, f, p), 0.8, 0.3)
            num = funcalg.finite_difference_apply(op, f, p, 0.8, 0.3)
            fd = max(fd, abs(sym - num) / max(1.0, abs(sym)))
    uni = 0.0
    for f, g in zip(probes, probes[1:]):
        ref = funcalg.inner_product(f, g)
        for t in (-2.0, 2.0):
            val = funcalg.inner_product(funcalg.evolve(f, t, p), funcalg.evolve(g, t, p))
            uni = max(uni, abs(val - ref) / max(1.0, abs(ref)))
    return [
        Check("funcalg", "su11_corrected_exact", su, 0.0),
        Check("funcalg", "casimir_corrected_exact", cas, 0.0),
        Check("funcalg", "H_equals_H0_plus_HI", hsum, 0.0),
        Check("funcalg", "finite_difference_oracle", fd, tol.get("fd", 1e-7)),
        Check("funcalg", "unitarity", uni, tol.get("unitarity", 1e-12)),
    ]


def _classical(p: SystemParams, rng, tol) -> list:
    hdiff = 0.0
    symp = 0.0
    for _ in range(100):
        s = classical.PhasePoint("bateman", rng.normal(size=4))
        h0 = classical.hamiltonian_value(s, p)
        for ch in ("pontriagin", "polar"):
            q = classical.chart_transform(s, ch, p)
            hdiff = max(hdiff, abs(classical.hamiltonian_value(q, p) - h0))
    for _ in range(10):
        s = classical.PhasePoint("bateman", rng.normal(size=4))
        for ch in ("pontriagin", "polar"):
            symp = max(symp, classical.symplectic_residual(s, ch, p))
    s = classical.PhasePoint("bateman", (0.3, -0.2, 0.7, 0.1))
    slope = classical.rk4_order(s, 2.0, p)
    return [
        Check("classical", "hamiltonian_chart_invariance", hdiff, tol.get("chart", 1e-12)),
        Check("classical", "symplectic_jacobian", symp, tol.get("symplectic", 1e-8)),
        Check("classical", "rk4_order_deviation", abs(slope - 4.0), 0.1),
    ]


def _spectral(p: SystemParams, rng, tol) -> list:
    ratios = []
    for _ in range(5):
        f = funcalg.random_gph(rng)
        for l in f.l_values():
            for n in range(2):
                idx = spectral.ResonanceIndex(l, n)
                if abs(spectral.residue_taylor(f, idx)) > 1e-6:
                    ratios.append(spectral.contour_to_taylor_ratio(f, idx))
    dev = max(abs(r - spectral.RESIDUE_CONVENTION_FACTOR) for r in ratios) if ratios else 0.0
    f = funcalg.random_gph(rng)
    val, err = spectral.resolution_of_identity(f, f)
    ref = funcalg.inner_product(f, f)
    probes = [lambda x, y: x ** 2, lambda x, y: y, lambda x, y: np.exp(-(x * x + y * y)),
              lambda x, y: x * y * np.exp(-(x * x + y * y))]
    parity = max(spectral.parity_check(g, 4, 8).forbidden_max for g in probes)
    return [
        Check("spectral", "residue_ratio_constant", dev, tol.get("residue", 1e-10)),
        Check("spectral", "resolution_of_identity", abs(val - ref) / abs(ref), tol.get("roi", 1e-8)),
        Check("spectral", "parity_forbidden_coefficients", parity, 1e-8),
    ]


def _resonance(p: SystemParams, rng, tol) -> list:
    I = spectral.ResonanceIndex
    eig = max((funcalg.apply_operator("H", resonance.f_plus(i), p)
               - resonance.f_plus(i) * i.energy_plus(p)).max_coeff()
              for i in spectral.resonance_indices(8, 8))
    bio = max(resonance.biorthogonality_check(a, b)["residual"]
              for a in spectral.resonance_indices(2, 2) for b in spectral.resonance_indices(2, 2))
    g = funcalg.atom(1.0, 0, 0, 1.0)
    decay = 0.0
    for i in spectral.resonance_indices(3, 3):
        probe = funcalg.atom(1.0, i.l, abs(i.l), 1.0)
        for t in (-1.0, 1.0):
            m, pr = resonance.coefficient_evolution(probe, i, t, p)
            decay = max(decay, abs(m / pr - 1))
    poly = funcalg.atom(1.0, 0, 2, 0.0)
    res = 0.0
    for z in (1 + 0.1j, -0.5 + 0.7j, 0.3 - 0.8j):
        b = resonance.resolvent_element(poly, g, z, p, "resonance_sum")
        c = resonance.resolvent_element(poly, g, z, p, "ode_solve")
        res = max(res, abs(b - c) / abs(b))
    const = funcalg.atom(1.0, 0, 0, 0.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", AccuracyWarning)
        proj = resonance.projector_from_contour(const, g, I(0, 0), "-", p)
    closed = -resonance.projector_element(const, g, I(0, 0)).value
    return [
        Check("resonance", "strong_eigenvalue", eig, 0.0),
        Check("resonance", "biorthogonality", bio, 0.0),
        Check("resonance", "decay_law", decay, tol.get("decay", 1e-12)),
        Check("resonance", "resolvent_sum_vs_ode", res, tol.get("resolvent", 1e-10)),
        Check("resonance", "contour_projector", abs(proj - closed), tol.get("projector", 1e-8)),
    ]


def _fock(p: SystemParams, rng, tol) -> list:
    rep = fock.report(12, p)
    return [
        Check("fock", "ccr_interior", rep["ccr"], 1e-12),
        Check("fock", "su11_interior", max(rep["su11"]), 1e-12),
        Check("fock", "casimir_interior", rep["casimir"], 1e-12),
        Check("fock", "hamiltonian_equivalence", rep["hamiltonian"], 0.0),
    ]


_RUNNERS = {"funcalg": _funcalg, "classical": _classical, "spectral": _spectral,
            "resonance": _resonance, "fock": _fock}


def run_suite(name: str, p: SystemParams, seed: int = 0, tolerances=None) -> list:
    names = SUITES if name == "all" else (name,)
    checks = []
    for n in names:
        if n not in _RUNNERS:
            raise ValueError(f"unknown suite {n!r}")
        checks.extend(_RUNNERS[n](p, np.random.default_rng(seed), dict(tolerances or {})))
    return checks
