"""Two-mode truncated Fock space: ladder operators and the su(1,1) generators.

Basis states |nA, nB> with 0 <= nA, nB <= N are ordered as nA*(N+1) + nB.
Interior states are those with both occupation numbers <= N - 2; on them
every bilinear and every product of two bilinears is free of truncation
effects, so residuals there are zero up to rounding of sqrt(n).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .params import DEFAULT_PARAMS, SystemParams
from .spectral import label_map


@dataclass(frozen=True)
class FockOperators:
    cutoff: int
    A: sp.csr_matrix
    B: sp.csr_matrix
    J0: sp.csr_matrix
    J1: sp.csr_matrix
    J2: sp.csr_matrix
    J3: sp.csr_matrix
    H0: sp.csr_matrix
    HI: sp.csr_matrix

    @property
    def dim(self) -> int:
        return (self.cutoff + 1) ** 2

    def index(self, nA: int, nB: int) -> int:
        return nA * (self.cutoff + 1) + nB

    def basis(self, nA: int, nB: int) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[self.index(nA, nB)] = 1.0
        return v

    def interior(self) -> np.ndarray:
        """Indices of states with both occupation numbers <= N - 2."""
        n = self.cutoff
        return np.array([self.index(a, b) for a in range(n - 1) for b in range(n - 1)])


def _ladder(n: int) -> sp.csr_matrix:
    return sp.diags(np.sqrt(np.arange(1, n + 1, dtype=float)), 1, shape=(n + 1, n + 1),
                    format="csr", dtype=complex)


def build(cutoff: int, p: SystemParams = DEFAULT_PARAMS) -> FockOperators:
    if cutoff < 4:
        raise ValueError(f"cutoff must be >= 4, got {cutoff}")
    a = _ladder(cutoff)
    eye = sp.identity(cutoff + 1, dtype=complex, format="csr")
    A = sp.kron(a, eye, format="csr")
    B = sp.kron(eye, a, format="csr")
    Ad, Bd = A.conj().T.tocsr(), B.conj().T.tocsr()
    J0 = 0.5 * (Ad @ A - Bd @ B)
    J1 = 0.5 * (Ad @ Bd + A @ B)
    J2 = 0.5j * (Ad @ Bd - A @ B)
    J3 = 0.5 * (Ad @ A + B @ Bd)
    H0 = p.hbar * p.omega * (Ad @ A - Bd @ B)
    HI = 1j * p.hbar * p.gamma * (Ad @ Bd - A @ B)
    return FockOperators(cutoff, A, B, *(m.tocsr() for m in (J0, J1, J2, J3, H0, HI)))


def _comm(x, y):
    return x @ y - y @ x


def _column_max(m: sp.spmatrix, cols) -> float:
    sub = m.tocsc()[:, cols]
    return float(np.abs(sub.toarray()).max()) if sub.nnz else 0.0


def ccr_residual(cutoff: int) -> dict:
    """Residuals of [A,A+]-1, [B,B+]-1 on interior and cutoff states, and of [A,B]."""
    ops = build(cutoff)
    one = sp.identity(ops.dim, dtype=complex, format="csr")
    ra = _comm(ops.A, ops.A.conj().T) - one
    rb = _comm(ops.B, ops.B.conj().T) - one
    inner = ops.interior()
    top = [ops.index(cutoff, 0)]
    return {
        "interior_A": _column_max(ra, inner),
        "interior_B": _column_max(rb, inner),
        "boundary_A": complex(ra[top[0], top[0]]),
        "boundary_B": complex(rb[ops.index(0, cutoff), ops.index(0, cutoff)]),
        "AB": float(np.abs(_comm(ops.A, ops.B).toarray()).max()),
        "AB_dagger": float(np.abs(_comm(ops.A, ops.B.conj().T).toarray()).max()),
    }


def _su11_ops(ops):
    return (
        _comm(ops.J1, ops.J2) - 1j * ops.J3,
        _comm(ops.J3, ops.J2) - 1j * ops.J1,
        _comm(ops.J1, ops.J3) - 1j * ops.J2,
    )


def su11_residuals(cutoff: int) -> tuple:
    """Interior residuals of [J1,J2]-iJ3, [J3,J2]-iJ1, [J1,J3]-iJ2."""
    ops = build(cutoff)
    inner = ops.interior()
    return tuple(_column_max(m, inner) for m in _su11_ops(ops))


def su11_shell_residuals(cutoff: int) -> dict:
    """Largest su(1,1) residual over states with max(nA, nB) = s, for each shell s."""
    ops = build(cutoff)
    mats = _su11_ops(ops)
    out = {}
    for s in range(cutoff + 1):
        cols = [ops.index(a, b) for a in range(cutoff + 1) for b in range(cutoff + 1) if max(a, b) == s]
        out[s] = max(_column_max(m, cols) for m in mats)
    return out


def j0_commutators(cutoff: int) -> tuple:
    ops = build(cutoff)
    inner = ops.interior()
    return tuple(_column_max(_comm(ops.J0, j), inner) for j in (ops.J1, ops.J2, ops.J3))


def casimir_operator_residual(ops: FockOperators) -> sp.csr_matrix:
    one = sp.identity(ops.dim, dtype=complex, format="csr")
    return (ops.J0 @ ops.J0 - (0.25 * one + ops.J3 @ ops.J3 - ops.J1 @ ops.J1 - ops.J2 @ ops.J2)).tocsr()


def casimir_residual(cutoff: int) -> float:
    """Interior residual of J0^2 = 1/4 + J3^2 - J1^2 - J2^2."""
    ops = build(cutoff)
    return _column_max(casimir_operator_residual(ops), ops.interior())


def hamiltonian_equivalence(cutoff: int, p: SystemParams = DEFAULT_PARAMS) -> tuple:
    """(max |H0 - 2 hbar omega J0|, max |HI - 2 hbar gamma J2|) over all entries."""
    ops = build(cutoff, p)
    r0 = ops.H0 - 2 * p.hbar * p.omega * ops.J0
    ri = ops.HI - 2 * p.hbar * p.gamma * ops.J2
    return (float(np.abs(r0.toarray()).max()), float(np.abs(ri.toarray()).max()))


def hermiticity_residuals(cutoff: int, p: SystemParams = DEFAULT_PARAMS) -> dict:
    ops = build(cutoff, p)
    out = {}
    for name in ("J0", "J1", "J2", "J3", "H0", "HI"):
        m = getattr(ops, name)
        out[name] = float(np.abs((m - m.conj().T).toarray()).max())
    return out


def label_spectrum(cutoff: int, p: SystemParams = DEFAULT_PARAMS) -> list:
    """(nA, nB, j, m, E-, E+) for every basis state, cross-checked against label_map."""
    rows = []
    for nA in range(cutoff + 1):
        for nB in range(cutoff + 1):
            j = 0.5 * (nA - nB)
            m = 0.5 * (nA + nB)
            e_minus = complex(2 * p.hbar * p.omega * j, -p.hbar * p.gamma * (2 * m + 1))
            e_plus = complex(2 * p.hbar * p.omega * j, p.hbar * p.gamma * (2 * m + 1))
            ref = label_map(p, nA=nA, nB=nB)
            if (ref.j, ref.m, ref.E_minus, ref.E_plus) != (j, m, e_minus, e_plus):
                raise AssertionError(f"label tables disagree at ({nA}, {nB})")
            rows.append((nA, nB, j, m, e_minus, e_plus))
    return rows


def report(cutoff: int, p: SystemParams = DEFAULT_PARAMS) -> dict:
    """Residual report {cutoff, ccr, su11, casimir, hamiltonian}."""
    c = ccr_residual(cutoff)
    return {
        "cutoff": cutoff,
        "ccr": max(c["interior_A"], c["interior_B"]),
        "su11": list(su11_residuals(cutoff)),
        "casimir": casimir_residual(cutoff),
        "hamiltonian": max(hamiltonian_equivalence(cutoff, p)),
    }
