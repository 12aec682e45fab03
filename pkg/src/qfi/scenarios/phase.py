"""Phase estimation on a truncated Fock space.

Phase shifts act as ``|psi_Phi> = e^{i Phi n}|psi_0>``, i.e. the shift
generator is minus the number operator.  The canonical covariant
measurement is the Susskind-Glogower phase POVM, realized here on a
uniform grid over one 2*pi period.

A number-state probe carries no phase information at all (uniform outcome
law for every Phi); states whose number populations are symmetric about
the mean are optimal, and broad "semiclassical" states are nearly so.
"""

from __future__ import annotations

from math import lgamma
from typing import NamedTuple

import numpy as np

from ..hilbert import HermitianOperator, PureState
from ..metric import StateFamily
from ..povm import CovariantPOVM, SpectrumModel, build_covariant

__all__ = [
    "PhaseScenario",
    "fock_phase_scenario",
    "number_state",
    "two_level_state",
    "binomial_state",
    "chirped_state",
]

MAX_FOCK_DIM = 256


class PhaseScenario(NamedTuple):
    family: StateFamily
    povm: CovariantPOVM


def fock_phase_scenario(dim, amplitudes, grid_size=None, gauge=None):
    """Bundle a phase-shift family with its covariant phase POVM.

    ``dim`` is the Fock-space truncation (<= 256) and ``amplitudes`` the
    normalized number-state amplitudes of the probe.  ``grid_size`` defaults
    to the resolution minimum ``4 (dim - 1)`` rounded up to a power of two.
    """
    if dim > MAX_FOCK_DIM:
        raise ValueError(f"Fock dimension {dim} exceeds cap {MAX_FOCK_DIM}")
    psi = PureState(amplitudes)
    if psi.dim != dim:
        raise ValueError(f"amplitudes have dim {psi.dim}, expected {dim}")

    n = np.arange(dim, dtype=float)
    generator = HermitianOperator(np.diag(-n))  # phase shifts: h = -n
    spectrum = SpectrumModel(
        eigenvalues=-n[::-1],
        eigenvectors=np.eye(dim, dtype=complex)[:, ::-1],
        period=2.0 * np.pi,
    )
    if grid_size is None:
        grid_size = 1 << int(np.ceil(np.log2(max(4, 4 * (dim - 1)))))
    povm = build_covariant(spectrum, gauge=gauge, grid_size=grid_size)
    return PhaseScenario(StateFamily(psi, generator), povm)


def number_state(dim, n):
    """The Fock state |n>."""
    amp = np.zeros(dim, dtype=complex)
    amp[n] = 1.0
    return PureState(amp)


def two_level_state(dim, n_low, n_high, relative_phase=0.0):
    """(|n_low> + e^{i phase}|n_high>)/sqrt(2)."""
    amp = np.zeros(dim, dtype=complex)
    amp[n_low] = 1.0 / np.sqrt(2.0)
    amp[n_high] = np.exp(1j * relative_phase) / np.sqrt(2.0)
    return PureState(amp)


def binomial_state(dim, modes, success=0.5):
    """Binomial-amplitude state: a discrete Gaussian surrogate.

    Amplitudes ``sqrt(C(modes, k) p^k (1-p)^(modes-k))`` for k <= modes;
    with p = 1/2 the populations are exactly symmetric about modes/2.
    """
    if modes >= dim:
        raise ValueError("binomial support must fit inside the truncation")
    if not 0.0 < success < 1.0:
        raise ValueError("success probability must lie strictly in (0, 1)")
    k = np.arange(dim, dtype=float)
    log_pmf = np.full(dim, -np.inf)
    for i in range(modes + 1):
        log_pmf[i] = (
            lgamma(modes + 1)
            - lgamma(i + 1)
            - lgamma(modes - i + 1)
            + i * np.log(success)
            + (modes - i) * np.log1p(-success)
        )
    amp = np.exp(0.5 * log_pmf)
    amp /= np.linalg.norm(amp)
    return PureState(amp)


def chirped_state(base, chirp_rate):
    """Apply a quadratic phase across the number distribution.

    A nonzero chirp makes the phase of the x-space wavefunction nonlinear,
    which breaks measurement optimality.
    """
    amp = base.amplitudes
    n = np.arange(base.dim, dtype=float)
    nbar = float(np.sum(n * np.abs(amp) ** 2))
    return PureState(amp * np.exp(1j * chirp_rate * (n - nbar) ** 2))
