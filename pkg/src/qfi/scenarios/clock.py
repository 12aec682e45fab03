"""Elapsed-time estimation: moving clocks and two-sector time measurements.

:func:`mandelstam_tamm` converts the spread and drift rate of any clock
observable A into a time uncertainty ``DeltaT = std(A)/|d<A>/dT|`` that
obeys ``DeltaT * std(H) >= 1/2``.

The rest of the module treats a doubly degenerate energy spectrum, realized
on a desk-scale ring model (energies n^2, n = 1..K, one level per sign of
momentum).  Covariant time measurements then carry a two-valued outcome
label alongside the time value, and the measurement frame per energy is a
2x2 unit-determinant unitary plus a gauge phase; the frame can be chosen to
make the measurement optimal exactly when the total energy populations are
symmetric about the mean energy.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from ..hilbert import DensityOperator, HermitianOperator, PureState, expectation, variance
from ..metric import StateFamily
from ..povm import DiscretePOVM

__all__ = [
    "mandelstam_tamm",
    "TwoSectorSpectrum",
    "TwoSectorPOVM",
    "ring_spectrum",
    "two_sector_time_povm",
    "optimal_sector_frame",
    "energy_symmetry_residual",
]


class MandelstamTamm(NamedTuple):
    delta_t: float
    product: float


def mandelstam_tamm(clock, hamiltonian, state):
    """Time resolution of a clock observable and its uncertainty product.

    ``delta_t = std(clock) / |d<clock>/dT|`` with
    ``d<clock>/dT = -i <[clock, hamiltonian]>`` (hbar = 1);
    ``product = delta_t * std(hamiltonian)`` is always >= 1/2.

    Raises
    ------
    ValueError
        If the commutator expectation vanishes: the clock does not move.
    """
    a = clock.matrix
    h = hamiltonian.matrix
    comm = HermitianOperator(-1j * (a @ h - h @ a))
    rate = expectation(comm, state)
    if abs(rate) <= 1e-12:
        raise ValueError("clock does not move: <[A, H]> vanishes")
    delta_t = np.sqrt(variance(clock, state)) / abs(rate)
    product = delta_t * np.sqrt(variance(hamiltonian, state))
    return MandelstamTamm(float(delta_t), float(product))


@dataclass(frozen=True)
class TwoSectorSpectrum:
    """A doubly degenerate spectrum with per-energy measurement frames.

    ``energies`` lists the K distinct level energies, each carried by two
    sector states (sigma = +1, -1).  ``mixing`` holds one 2x2
    unit-determinant unitary per energy and ``gauge`` one phase per energy;
    together they fix the measured frame ``|eps, gamma>``.  The basis
    ordering of the 2K-dimensional space is (eps_1,+), (eps_1,-),
    (eps_2,+), ...

    ``period`` must make every energy an integer multiple of 2*pi/period.
    ``singlet`` optionally appends one non-degenerate level as its own 1x1
    block; its 2-component ``singlet_row`` spreads it across the two
    outcome sectors.
    """

    energies: np.ndarray
    mixing: np.ndarray  # (K, 2, 2)
    gauge: np.ndarray  # (K,)
    period: float = 2.0 * np.pi
    singlet: Optional[float] = None
    singlet_row: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "energies", np.asarray(self.energies, dtype=float))
        object.__setattr__(self, "mixing", np.asarray(self.mixing, dtype=complex))
        object.__setattr__(self, "gauge", np.asarray(self.gauge, dtype=float))
        k = len(self.energies)
        if np.any(self.energies < 0):
            raise ValueError("energies must be non-negative")
        if len(np.unique(self.energies)) != k:
            raise ValueError("sector energy lists must match pairwise; "
                             "each energy appears once per sector")
        if self.mixing.shape != (k, 2, 2):
            raise ValueError("one 2x2 mixing matrix per energy required")
        if self.gauge.shape != (k,):
            raise ValueError("one gauge phase per energy required")
        eye = np.eye(2)
        for i, u in enumerate(self.mixing):
            if np.max(np.abs(u.conj().T @ u - eye)) > 1e-12:
                raise ValueError(f"mixing matrix {i} is not unitary")
            if abs(np.linalg.det(u) - 1.0) > 1e-12:
                raise ValueError(f"mixing matrix {i} does not have unit determinant")
        n = self.energies * self.period / (2.0 * np.pi)
        if np.max(np.abs(n - np.round(n))) > 1e-9:
            raise ValueError("energies are not commensurate with the period")
        if self.singlet is not None:
            row = np.asarray(self.singlet_row, dtype=complex)
            if row.shape != (2,) or abs(np.vdot(row, row).real - 1.0) > 1e-12:
                raise ValueError("singlet level needs a normalized 2-component row")
            object.__setattr__(self, "singlet_row", row)

    @property
    def n_pairs(self):
        return len(self.energies)

    @property
    def dim(self):
        return 2 * self.n_pairs + (1 if self.singlet is not None else 0)

    def hamiltonian(self):
        diag = np.repeat(self.energies, 2)
        if self.singlet is not None:
            diag = np.concatenate([diag, [self.singlet]])
        return HermitianOperator(np.diag(diag).astype(complex))

    def family(self, fiducial):
        return StateFamily(fiducial, self.hamiltonian())

    def with_frame(self, mixing, gauge):
        return TwoSectorSpectrum(
            self.energies, mixing, gauge, self.period, self.singlet, self.singlet_row
        )


def ring_spectrum(levels, mixing=None, gauge=None, include_zero=False):
    """Ring-model spectrum: energies n^2 for n = 1..levels, doubly degenerate.

    The two sectors are the two momentum signs.  The default frame is
    canonical: identity mixing and zero gauge.  ``include_zero`` appends the
    non-degenerate n = 0 level as a singlet block split evenly between the
    outcome sectors.
    """
    energies = np.arange(1, levels + 1, dtype=float) ** 2
    if mixing is None:
        mixing = np.broadcast_to(np.eye(2, dtype=complex), (levels, 2, 2)).copy()
    if gauge is None:
        gauge = np.zeros(levels)
    singlet = 0.0 if include_zero else None
    singlet_row = np.array([1.0, 1.0]) / np.sqrt(2.0) if include_zero else None
    return TwoSectorSpectrum(energies, mixing, gauge, 2.0 * np.pi, singlet, singlet_row)


class TwoSectorPOVM:
    """Covariant time POVM with a two-valued sector label.

    Outcome (t_m, gamma) has the rank-one state
    ``|t_m, gamma> = sum_eps e^{-i t_m eps} |eps, gamma>`` with
    ``|eps, gamma> = sum_sigma |eps, sigma> e^{i f(eps)} U_{sigma gamma}``.
    Grid nodes sit at cell midpoints of one period; C = period.
    """

    def __init__(self, spectrum, grid_size):
        span = spectrum.energies.max() - (spectrum.energies.min() if spectrum.singlet is None else min(spectrum.energies.min(), spectrum.singlet))
        span_units = int(np.round(span * spectrum.period / (2.0 * np.pi)))
        if grid_size <= span_units:
            raise ValueError(
                f"grid_size {grid_size} cannot resolve spectral span {span_units}"
            )
        self.spectrum = spectrum
        self.grid_size = grid_size
        self.period = spectrum.period
        self.grid = -self.period / 2.0 + (np.arange(grid_size) + 0.5) * (
            self.period / grid_size
        )
        self.normalizer = self.period

        k = spectrum.n_pairs
        d = spectrum.dim
        # vectors[(m, gamma)] ordered with gamma fastest: row 2m + gamma_idx
        vectors = np.zeros((2 * grid_size, d), dtype=complex)
        phases = np.exp(-1j * np.outer(self.grid, spectrum.energies))  # (M, K)
        for g in range(2):
            coeff = np.exp(1j * spectrum.gauge)[:, None] * spectrum.mixing[:, :, g]  # (K, 2)
            block = phases[:, :, None] * coeff[None, :, :]  # (M, K, 2)
            vectors[g::2, : 2 * k] = block.reshape(grid_size, 2 * k)
        if spectrum.singlet is not None:
            sphase = np.exp(-1j * self.grid * spectrum.singlet)
            for g in range(2):
                vectors[g::2, -1] = sphase * spectrum.singlet_row[g]
        self.vectors = vectors
        self.sector_labels = np.tile([+1, -1], grid_size)
        self.time_labels = np.repeat(self.grid, 2)

    @property
    def dim(self):
        return self.spectrum.dim

    @property
    def cell(self):
        return self.period / self.grid_size

    def to_discrete(self):
        return DiscretePOVM(
            self.time_labels,
            np.full(2 * self.grid_size, self.cell),
            vectors=self.vectors / np.sqrt(self.normalizer),
        )

    def completeness_residual(self):
        w = self.cell / self.normalizer
        acc = (self.vectors.T * w) @ self.vectors.conj()
        return float(np.max(np.abs(acc - np.eye(self.dim))))

    def displacement_residual(self, steps=1):
        """Covariance check: e^{-iTH}|t, gamma> = |t+T, gamma> for grid T."""
        t_shift = steps * self.cell
        diag = np.repeat(self.spectrum.energies, 2)
        if self.spectrum.singlet is not None:
            diag = np.concatenate([diag, [self.spectrum.singlet]])
        evolved = self.vectors * np.exp(-1j * t_shift * diag)[None, :]
        rolled = np.roll(self.vectors, -2 * steps, axis=0)
        return float(np.max(np.abs(evolved - rolled)))

    def wavefunctions(self, state):
        """Sampled two-component wavefunction psi(t_m, gamma), shape (M, 2)."""
        psi = state.amplitudes if isinstance(state, PureState) else np.asarray(state)
        amp = (self.vectors.conj() @ psi) / np.sqrt(self.normalizer)
        return amp.reshape(self.grid_size, 2)

    def sector_marginal(self, state):
        pov = self.to_discrete()
        p = pov.weights * pov.raw_probabilities(state)
        return np.array([p[0::2].sum(), p[1::2].sum()])


def two_sector_time_povm(spectrum, grid_size):
    """Build the covariant two-label time POVM on a midpoint grid."""
    return TwoSectorPOVM(spectrum, grid_size)


def _sector_amplitudes(spectrum, state):
    psi = state.amplitudes if isinstance(state, PureState) else np.asarray(state)
    return psi[: 2 * spectrum.n_pairs].reshape(spectrum.n_pairs, 2)


def energy_symmetry_residual(spectrum, state):
    """Defect of total-energy-population symmetry about the mean energy.

    Zero exactly when for every u the total population at mean+u equals the
    total population at mean-u (the condition under which some frame makes
    the time measurement optimal).
    """
    amp = _sector_amplitudes(spectrum, state)
    w = np.sum(np.abs(amp) ** 2, axis=1)
    ev = spectrum.energies
    mean = float(np.sum(ev * w))
    gaps = np.diff(np.sort(ev))
    scale = float(gaps.min()) if len(gaps) else 1.0
    residual = 0.0
    for i, e in enumerate(ev):
        mirror = 2.0 * mean - e
        j = int(np.argmin(np.abs(ev - mirror)))
        if abs(ev[j] - mirror) <= 1e-6 * scale:
            residual = max(residual, abs(w[i] - w[j]))
        else:
            residual = max(residual, w[i])
    return residual


def optimal_sector_frame(spectrum, state):
    """Frame (mixing, gauge) that makes the measurement optimal if possible.

    Per energy, rotate the 2-component sector amplitude onto the first
    outcome sector with a real non-negative coefficient; in the rotated
    frame the energy-representation amplitudes are real >= 0, so the
    optimality condition reduces to symmetry of the total populations.
    Energies with no population keep the canonical frame.
    """
    amp = _sector_amplitudes(spectrum, state)
    k = spectrum.n_pairs
    mixing = np.empty((k, 2, 2), dtype=complex)
    gauge = np.zeros(k)
    for i in range(k):
        v = amp[i]
        norm = np.linalg.norm(v)
        if norm < 1e-14:
            mixing[i] = np.eye(2)
            continue
        u1 = v / norm
        u2 = np.array([-np.conj(u1[1]), np.conj(u1[0])])
        u = np.column_stack([u1, u2])
        u = u / np.sqrt(np.linalg.det(u))  # unit determinant
        w = u.conj().T @ v  # = (norm * phase, 0)
        gauge[i] = float(np.angle(w[0]))
        mixing[i] = u
    return spectrum.with_frame(mixing, gauge)
