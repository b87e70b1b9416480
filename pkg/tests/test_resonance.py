import math
import warnings

import numpy as np
import pytest
from scipy.integrate import quad

from bateman.errors import AccuracyWarning, DomainError, NearPoleError
from bateman.funcalg import apply_operator, atom, evolve, inner_product, taylor_coeff, time_reverse
from bateman.params import DEFAULT_PARAMS as P
from bateman.resonance import (abel_mean, biorthogonality_check, coefficient_evolution, f_plus, pair_minus,
                               pair_plus, pairing, projector_element, projector_from_contour,
                               propagator_consistency, resolvent_element, reversed_plus_residue,
                               semigroup_membership, spectral_sum_H, time_reversal_relations,
                               weak_identity_sum)
from bateman.spectral import ResonanceIndex as I
from bateman.spectral import resonance_indices

GAUSS = atom(1.0, 0, 0, 1.0)
POLY = atom(1.0, 0, 2, 0.0)


def test_f_plus_is_an_exact_eigenfunction():
    for idx in resonance_indices(4, 4):
        f = f_plus(idx)
        assert apply_operator("H", f, P) == f * idx.energy_plus(P)


def test_pair_plus_against_quadrature():
    phi = atom(1 - 1j, 1, 1, 0.5) + atom(2, 1, 3, 1.0)
    for n in range(3):
        idx = I(1, n)
        re = quad(lambda r: (r ** (idx.k + 1) * phi(r, 0.0)).real, 0, np.inf)[0]
        im = quad(lambda r: (r ** (idx.k + 1) * phi(r, 0.0)).imag, 0, np.inf)[0]
        ref = math.sqrt(2 * math.pi / math.factorial(idx.k)) * complex(re, im)
        assert abs(pair_plus(phi, idx) - ref) < 1e-9


def test_pair_plus_diverges_for_polynomials():
    with pytest.raises(DomainError):
        pair_plus(POLY, I(0, 0))


def test_pair_minus_is_scaled_taylor_coefficient():
    psi = atom(2 + 1j, -1, 1, 1.0)
    for n in range(3):
        idx = I(-1, n)
        ref = math.sqrt(2 * math.pi * math.factorial(idx.k)) * taylor_coeff(psi, -1, idx.k)
        assert abs(pair_minus(psi, idx) - ref) < 1e-12 * max(1, abs(ref))


def test_pairing_record():
    rec = pairing(POLY, GAUSS, I(0, 1))
    assert rec.minus_value == pair_minus(POLY, I(0, 1))
    assert rec.plus_value == pair_plus(GAUSS, I(0, 1))
    assert rec.normalization == (math.sqrt(math.pi), math.sqrt(4 * math.pi))


def test_biorthogonality_is_exact():
    probes = [(POLY, GAUSS), (atom(1, 1, 1, 0.0), atom(1, 1, 1, 0.5))]
    for a in resonance_indices(2, 2):
        for b in resonance_indices(2, 2):
            res = biorthogonality_check(a, b, probes)
            assert res["residual"] == 0.0
            assert res["weak_residual"] < 1e-14


def test_projector_element_signs():
    idx = I(0, 1)
    minus = projector_element(POLY, GAUSS, idx, "-").value
    assert minus == pair_minus(POLY, idx).conjugate() * pair_plus(GAUSS, idx)
    plus = projector_element(GAUSS, POLY, idx, "+").value
    assert abs(plus - minus.conjugate()) < 1e-15
    with pytest.raises(ValueError):
        projector_element(POLY, GAUSS, idx, "x")


def test_weak_identity_terminates_for_polynomial_bra():
    rep = weak_identity_sum(POLY, GAUSS, 6, abel_x=())
    # polynomial bra: only n = 1 contributes and the sum is exact from there on
    assert rep.terms[0] == 0 and rep.terms[2] == 0
    assert max(rep.errors[1:]) < 1e-14
    assert abs(rep.target - 2 * math.pi * 0.5) < 1e-14  # 2 pi * int r^3 e^{-r^2}


def test_weak_identity_gaussian_partial_sums_do_not_converge():
    g2 = atom(1.0, 0, 0, 2.0)
    rep = weak_identity_sum(GAUSS, g2, 30, abel_x=(0.5, 0.9))
    assert abs(rep.target - math.pi / 3) < 1e-14
    assert rep.abel[0.5] is not None
    ratio = [abs(b / a) for a, b in zip(rep.terms, rep.terms[1:])]
    assert abs(ratio[-1] - 0.5) < 1e-12  # geometric with ratio beta_psi/beta_phi
    assert rep.errors[-1] < 1e-8


def test_abel_mean_on_alternating_series():
    fn = lambda n: (-1.0) ** np.arange(n)  # noqa: E731
    for x in (0.5, 0.9, 0.99):
        assert abs(abel_mean(fn, x) - 1 / (1 + x)) < 1e-12
    with pytest.raises(ValueError):
        abel_mean(fn, 1.0)


def test_spectral_sum_H_reproduces_matrix_element():
    h_phi = apply_operator("H", GAUSS, P)
    ref = weak_identity_sum(POLY, h_phi, 4, abel_x=()).target
    assert abs(spectral_sum_H(POLY, GAUSS, 4, P) - ref) < 1e-13
    assert abs(ref - I(0, 1).energy_minus(P) * weak_identity_sum(POLY, GAUSS, 4, abel_x=()).target) < 1e-13


def test_coefficient_evolution_decay_law():
    for idx in resonance_indices(2, 2):
        probe = atom(1.0, idx.l, abs(idx.l), 1.0)
        for t in (-1.0, 0.5, 2.0):
            m, pr = coefficient_evolution(probe, idx, t, P)
            assert abs(m / pr - 1) < 1e-12
            assert abs(abs(pr) - math.exp(-P.gamma * (idx.k + 1) * t)) < 1e-12


def test_propagator_group_law_and_kernel():
    phi = atom(1 + 1j, 1, 1, 0.5) + atom(0.5, -2, 4, 1.0)
    res = propagator_consistency(phi, 0.6, -1.3, P)
    assert res["group_pointwise"] < 1e-13
    assert res["kernel_pointwise"] < 1e-13


def test_semigroup_membership():
    rows = semigroup_membership(GAUSS + atom(1, 1, 1, 1.0), [0.5, -0.5], P)
    assert rows[0]["all_decrease"] and not rows[0]["any_growth"]
    assert rows[1]["any_growth"]
    assert abs(rows[0]["ratios"][I(0, 0)] - math.exp(-0.5 * P.gamma)) < 1e-12


def _laplace_resolvent(psi, phi, z):
    # (H - z)^-1 = (i/hbar) int_0^inf exp(i z t/hbar) U(t) dt for Im z > 0
    def part(t, which):
        v = 1j / P.hbar * np.exp(1j * z * t / P.hbar) * inner_product(psi, evolve(phi, t, P))
        return getattr(v, which)
    # the integrand has decayed below 1e-12 by t = 80
    re = quad(part, 0, 80, args=("real",), limit=400)[0]
    im = quad(part, 0, 80, args=("imag",), limit=400)[0]
    return complex(re, im)


@pytest.mark.parametrize("z", [0.4 + 0.8j, -1.2 + 0.5j, 2.0 + 1.5j])
def test_resolvent_routes_agree_with_laplace_transform(z):
    phi = atom(1.0, 0, 0, 0.5)
    ref = _laplace_resolvent(GAUSS, phi, z)
    a = resolvent_element(GAUSS, phi, z, P, "spectral_integral")
    c = resolvent_element(GAUSS, phi, z, P, "ode_solve")
    assert abs(a - ref) < 1e-7 * abs(ref)
    assert abs(c - ref) < 1e-7 * abs(ref)


@pytest.mark.parametrize("z", [1 + 0.1j, -0.5 + 0.7j, 0.3 - 0.8j, 2.0 - 3.0j])
def test_resolvent_resonance_sum_matches_ode(z):
    psi = POLY + atom(0.5j, 1, 1, 0.0)
    phi = GAUSS + atom(1.0, 1, 3, 0.5)
    b = resolvent_element(psi, phi, z, P, "resonance_sum")
    c = resolvent_element(psi, phi, z, P, "ode_solve")
    assert abs(b - c) < 1e-10 * abs(b)


def test_resolvent_spectral_vs_ode_lower_half_plane():
    z = 0.5 - 0.6j
    a = resolvent_element(GAUSS, atom(1.0, 0, 2, 0.5), z, P, "spectral_integral")
    c = resolvent_element(GAUSS, atom(1.0, 0, 2, 0.5), z, P, "ode_solve")
    assert abs(a - c) < 1e-9 * abs(a)


def test_resolvent_errors():
    with pytest.raises(NearPoleError):
        resolvent_element(POLY, GAUSS, I(0, 1).energy_minus(P), P, "resonance_sum")
    with pytest.raises(ValueError):
        resolvent_element(POLY, GAUSS, 1j, P, "magic")
    with pytest.raises(DomainError):
        resolvent_element(GAUSS, GAUSS, 1j, P, "resonance_sum")
    with pytest.raises(DomainError):
        resolvent_element(GAUSS, GAUSS, 1.0, P, "spectral_integral")


@pytest.mark.parametrize("idx", [I(0, 0), I(0, 1), I(1, 0)])
def test_projectors_from_resolvent_contours(idx):
    psi = atom(1.0, idx.l, idx.k, 0.0)
    phi = atom(1.0, idx.l, abs(idx.l), 1.0)
    minus = projector_from_contour(psi, phi, idx, "-", P)
    assert abs(minus + projector_element(psi, phi, idx, "-").value) < 1e-8
    plus = projector_from_contour(phi, psi, idx, "+", P)
    assert abs(plus + projector_element(phi, psi, idx, "+").value) < 1e-8


def test_projector_contour_warns_when_coarse():
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        # a second pole lies just outside the circle
        psi = atom(1.0, 0, 0, 0.0) + POLY
        projector_from_contour(psi, GAUSS, I(0, 0), "-", P, radius=0.95, points=16)
    assert any(issubclass(x.category, AccuracyWarning) for x in w)


def test_time_reversal_relations():
    probes = [GAUSS, POLY + atom(1j, 1, 1, 0.5), atom(1.0, 2, 2, 1.0)]
    idxs = [I(0, 0), I(1, 0), I(2, 0), I(0, 1)]
    out = time_reversal_relations(probes, 0.7, P, idxs)
    assert out["involution"] == 0
    assert out["conjugation"] < 1e-13
    assert max(out["commutation"].values()) < 1e-13
    for idx, ratio in out["projector_ratios"].items():
        assert abs(ratio - 1 / math.factorial(idx.k)) < 1e-10


def test_reversed_plus_residue_of_gaussian():
    # <T f+|g> for g = e^{-r^2}: residue equals Taylor data divided by k!
    idx = I(0, 1)
    val = reversed_plus_residue(GAUSS, idx)
    assert abs(val - pair_minus(GAUSS, idx) / math.factorial(idx.k)) < 1e-10
    assert time_reverse(time_reverse(GAUSS)) == GAUSS


def test_abel_limit_by_richardson_extrapolation():
    # the Abel mean of the Gaussian self-pairing is smooth in h = 1 - x, so
    # two means at h and h/2 extrapolate to the inner product at h = 0
    h = 1e-3
    rep = weak_identity_sum(GAUSS, GAUSS, 4, abel_x=(1 - h, 1 - h / 2))
    a1, a2 = rep.abel[1 - h], rep.abel[1 - h / 2]
    assert abs(a1 - math.pi / (2 - h)) < 1e-12
    assert abs(2 * a2 - a1 - math.pi / 2) < 1e-6
