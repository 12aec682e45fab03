"""Statistical-distance metric on quantum states.

Implements the symmetric logarithmic derivative (SLD), the quantum Fisher
information (QFI) of single-parameter families, the variance upper bound and
its equality conditions, N-copy additivity, and the Fubini-Study angle
between pure states.

Conventions: a unitary family is ``rho(X) = e^{-iXh} rho_0 e^{iXh}`` (for
pure fiducials ``|psi_X> = e^{-iXh}|psi_0>``); the QFI is the squared rate
``ds^2/dX^2`` of statistical distance along the path.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple, Union

import numpy as np

from .hilbert import (
    DensityOperator,
    HermitianOperator,
    PureState,
    commutator_path_tangent,
    eig_hermitian,
    variance,
)

__all__ = [
    "StateFamily",
    "SLDResult",
    "sld",
    "qfi_unitary",
    "qfi_upper_gap",
    "additivity_check",
    "fubini_angle",
    "DEFAULT_ZERO_TOL",
]

# Eigenvalue pairs with p_j + p_k at or below this threshold are excluded
# from SLD sums; such pairs carry no statistical weight.
DEFAULT_ZERO_TOL = 1e-12

State = Union[PureState, DensityOperator]


@dataclass(frozen=True)
class StateFamily:
    """A single-parameter unitary family with fixed generator.

    ``fiducial`` is the state at X = 0; ``generator`` is the Hermitian h with
    units inverse to X, so that ``X * h`` is a phase.
    """

    fiducial: State
    generator: HermitianOperator
    kind: str = "unitary"

    def __post_init__(self):
        if self.kind != "unitary":
            raise ValueError(f"unsupported family kind {self.kind!r}")
        if self.fiducial.dim != self.generator.dim:
            raise ValueError(
                f"dimension mismatch: fiducial {self.fiducial.dim}, "
                f"generator {self.generator.dim}"
            )

    @property
    def dim(self):
        return self.fiducial.dim

    @property
    def is_pure(self):
        return isinstance(self.fiducial, PureState)

    @cached_property
    def generator_eig(self):
        return eig_hermitian(self.generator)

    def unitary(self, x):
        """The displacement operator e^{-iXh} as a dense matrix."""
        eig = self.generator_eig
        v = eig.eigenvectors
        return (v * np.exp(-1j * x * eig.eigenvalues)) @ v.conj().T

    def state_at(self, x):
        """State at parameter value X (same kind as the fiducial)."""
        if x == 0.0:
            return self.fiducial
        u = self.unitary(x)
        if self.is_pure:
            return PureState(u @ self.fiducial.amplitudes)
        return DensityOperator(u @ self.fiducial.matrix @ u.conj().T)

    def evolve(self, x):
        """Family re-anchored at parameter value X."""
        if x == 0.0:
            return self
        return StateFamily(self.state_at(x), self.generator, self.kind)

    def tangent(self, x=0.0):
        """Path tangent rho' = -i[h, rho(X)]."""
        rho = self.state_at(x)
        rho = rho.density() if isinstance(rho, PureState) else rho
        return commutator_path_tangent(rho, self.generator)


@dataclass(frozen=True)
class SLDResult:
    """SLD operator, the QFI it induces, and the excluded eigenpair mask."""

    sld: HermitianOperator
    qfi: float
    support_mask: np.ndarray = field(repr=False)


def sld(rho, rho_prime, zero_tol=DEFAULT_ZERO_TOL):
    """Symmetric logarithmic derivative of ``rho`` along tangent ``rho_prime``.

    In the eigenbasis of rho the SLD has entries
    ``L_jk = 2 (rho')_jk / (p_j + p_k)`` over pairs with
    ``p_j + p_k > zero_tol``; excluded pairs are reported in
    ``support_mask`` (True = kept).  The QFI is ``tr(rho' L)`` and is checked
    against the independent second-moment form ``tr(rho L^2)``.

    Raises
    ------
    ValueError
        If ``rho_prime`` is not traceless, or its support lies entirely on
        excluded pairs ("path leaves the support").
    """
    if not isinstance(rho_prime, HermitianOperator):
        rho_prime = HermitianOperator(rho_prime)
    dr = rho_prime.matrix
    if abs(np.trace(dr)) > 1e-10:
        raise ValueError(f"tangent has nonzero trace {np.trace(dr):.3e}")
    eig = eig_hermitian(rho.matrix if isinstance(rho, DensityOperator) else rho)
    p = np.clip(eig.eigenvalues, 0.0, None)
    v = eig.eigenvectors

    o = v.conj().T @ dr @ v
    denom = p[:, None] + p[None, :]
    mask = denom > zero_tol
    scale = np.max(np.abs(o)) if o.size else 0.0
    if scale > 1e-14 and np.max(np.abs(np.where(mask, o, 0.0))) <= 1e-14 * scale:
        raise ValueError("path leaves the support of rho")

    l_eig = np.zeros_like(o)
    np.divide(2.0 * o, denom, out=l_eig, where=mask)
    l_mat = v @ l_eig @ v.conj().T
    l_mat = (l_mat + l_mat.conj().T) / 2.0

    qfi = float(np.trace(dr @ l_mat).real)
    qfi_second = float(np.sum(p[:, None] * np.abs(l_eig) ** 2).real)
    if abs(qfi - qfi_second) > 1e-9 * max(1.0, abs(qfi)):
        raise ValueError(
            f"SLD self-consistency failed: tr(rho' L)={qfi}, <L^2>={qfi_second}"
        )
    return SLDResult(HermitianOperator(l_mat), max(qfi, 0.0), mask)


def _delta_h_offdiag(family):
    """Eigenvalues p, and generator matrix elements in rho's eigenbasis."""
    rho = family.fiducial
    rho = rho.density() if isinstance(rho, PureState) else rho
    eig = eig_hermitian(rho)
    p = np.clip(eig.eigenvalues, 0.0, None)
    v = eig.eigenvectors
    h = v.conj().T @ family.generator.matrix @ v
    return p, h


def qfi_unitary(family, zero_tol=DEFAULT_ZERO_TOL):
    """Quantum Fisher information of a unitary family.

    Pure fiducial: exactly ``4 * variance(h)``.  Mixed fiducial: the
    eigenbasis sum ``2 sum_{jk} (p_j - p_k)^2 / (p_j + p_k) |h_jk|^2`` with
    pairs below ``zero_tol`` dropped (they carry no weight).
    """
    if family.is_pure:
        return 4.0 * variance(family.generator, family.fiducial)
    p, h = _delta_h_offdiag(family)
    num = (p[:, None] - p[None, :]) ** 2
    denom = p[:, None] + p[None, :]
    mask = denom > zero_tol
    terms = np.zeros_like(num)
    np.divide(num, denom, out=terms, where=mask)
    return float(2.0 * np.sum(terms * np.abs(h) ** 2))


class UpperGap(NamedTuple):
    qfi: float
    four_var: float


def qfi_upper_gap(family):
    """Both sides of ``QFI <= 4 var(h)``.

    The gap closes for pure fiducials and is strictly positive for full-rank
    states with nonzero generator fluctuations.
    """
    q = qfi_unitary(family)
    state = family.fiducial
    return UpperGap(q, 4.0 * variance(family.generator, state))


class AdditivityResult(NamedTuple):
    lhs: float
    rhs: float


def additivity_check(family, copies):
    """QFI of an N-copy product family versus N times the single-copy QFI.

    The product family lives on the tensored space with collective generator
    ``sum_i h_i``; the left side is computed from scratch there.
    """
    if copies not in (2, 3):
        raise ValueError("copies must be 2 or 3")
    d = family.dim
    if d**copies > 4096:
        raise ValueError(f"tensored dimension {d**copies} exceeds cap 4096")

    h = family.generator.matrix
    rho1 = family.fiducial
    pure = family.is_pure

    if pure:
        psi = rho1.amplitudes
        big_psi = psi
        for _ in range(copies - 1):
            big_psi = np.kron(big_psi, psi)
        big_state = PureState(big_psi)
    else:
        m = rho1.matrix
        big = m
        for _ in range(copies - 1):
            big = np.kron(big, m)
        big_state = DensityOperator(big)

    big_h = np.zeros((d**copies, d**copies), dtype=complex)
    for i in range(copies):
        factors = [np.eye(d)] * copies
        factors[i] = h
        term = factors[0]
        for f in factors[1:]:
            term = np.kron(term, f)
        big_h += term

    big_family = StateFamily(big_state, HermitianOperator(big_h))
    lhs = qfi_unitary(big_family)
    rhs = copies * qfi_unitary(family)
    return AdditivityResult(lhs, rhs)


def fubini_angle(psi_a, psi_b):
    """Fubini-Study angle arccos|<psi_a|psi_b>| in [0, pi/2]."""
    if psi_a.dim != psi_b.dim:
        raise ValueError(f"dimension mismatch: {psi_a.dim} vs {psi_b.dim}")
    overlap = abs(np.vdot(psi_a.amplitudes, psi_b.amplitudes))
    return float(np.arccos(min(1.0, overlap)))
