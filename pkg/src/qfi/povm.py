"""General POVMs, classical Fisher information, and covariant measurements.

A :class:`DiscretePOVM` is a finite outcome set with elements ``E_k``,
outcome labels ``x_k`` and quadrature weights ``w_k`` such that
``sum_k w_k E_k = 1``.  Rank-one POVMs are stored as state vectors so that
large grids stay cheap.

A :class:`CovariantPOVM` is built from the spectrum of a non-degenerate
generator h: outcome states ``|x> = sum_h e^{if(h)} e^{-ixh} |h>`` on a
uniform grid spanning one period (or a supplied window), normalized by
``C``.  The grid is offset by half a cell so wavefunction zeros that sit on
symmetry points of the period do not land on grid nodes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .hilbert import DensityOperator, PureState, eig_hermitian
from .metric import sld

__all__ = [
    "DiscretePOVM",
    "PovmReport",
    "SpectrumModel",
    "CovariantPOVM",
    "OptimalityReport",
    "VarianceSplit",
    "validate_povm",
    "outcome_distribution",
    "classical_fisher",
    "build_covariant",
    "displacement_operator",
    "optimality_test",
    "variance_split",
    "sld_projective_povm",
    "COMPLETENESS_TOL",
    "POSITIVITY_TOL",
    "P_FLOOR",
]

COMPLETENESS_TOL = 1e-8
POSITIVITY_TOL = 1e-10
# Outcomes with probability at or below this floor are dropped from Fisher
# sums; they would otherwise produce 0/0.
P_FLOOR = 1e-14


class DiscretePOVM:
    """A discrete POVM with per-outcome quadrature weights.

    Exactly one of ``elements`` (K, d, d) or ``vectors`` (K, d) must be
    given; with ``vectors`` the elements are the rank-one projectors
    ``|v_k><v_k|`` (positive by construction).
    """

    def __init__(self, outcome_labels, weights, elements=None, vectors=None):
        self.outcome_labels = np.asarray(outcome_labels, dtype=float)
        self.weights = np.asarray(weights, dtype=float)
        if (elements is None) == (vectors is None):
            raise ValueError("provide exactly one of elements or vectors")
        if np.any(self.weights < 0):
            raise ValueError("quadrature weights must be non-negative")
        if elements is not None:
            self.elements = np.asarray(elements, dtype=complex)
            if self.elements.ndim != 3 or self.elements.shape[1] != self.elements.shape[2]:
                raise ValueError(f"elements must be (K, d, d), got {self.elements.shape}")
            self.vectors = None
            k = self.elements.shape[0]
        else:
            self.vectors = np.asarray(vectors, dtype=complex)
            if self.vectors.ndim != 2:
                raise ValueError(f"vectors must be (K, d), got {self.vectors.shape}")
            self.elements = None
            k = self.vectors.shape[0]
        if not (len(self.outcome_labels) == len(self.weights) == k):
            raise ValueError("labels, weights and elements must have equal length")

    @property
    def n_outcomes(self):
        return len(self.weights)

    @property
    def dim(self):
        if self.elements is not None:
            return self.elements.shape[1]
        return self.vectors.shape[1]

    @classmethod
    def projective(cls, basis, labels=None):
        """Projective measurement onto the columns of ``basis``."""
        basis = np.asarray(basis, dtype=complex)
        d = basis.shape[1]
        if labels is None:
            labels = np.arange(d, dtype=float)
        return cls(labels, np.ones(d), vectors=basis.T.copy())

    def element_sum(self):
        """The operator sum_k w_k E_k (identity for a complete POVM)."""
        if self.vectors is not None:
            return (self.vectors.T * self.weights) @ self.vectors.conj()
        return np.tensordot(self.weights, self.elements, axes=(0, 0))

    def completeness_residual(self):
        return float(np.max(np.abs(self.element_sum() - np.eye(self.dim))))

    def min_element_eigenvalue(self):
        if self.vectors is not None:
            return 0.0  # rank-one projectors are positive by construction
        return float(min(np.linalg.eigvalsh(e)[0] for e in self.elements))

    def raw_probabilities(self, state):
        """tr(E_k rho) per outcome, before weights."""
        if isinstance(state, PureState):
            psi = state.amplitudes
            if psi.shape[0] != self.dim:
                raise ValueError(f"dimension mismatch: state {psi.shape[0]}, povm {self.dim}")
            if self.vectors is not None:
                return np.abs(self.vectors.conj() @ psi) ** 2
            return np.einsum("i,kij,j->k", psi.conj(), self.elements, psi).real
        rho = state.matrix if isinstance(state, DensityOperator) else np.asarray(state)
        if rho.shape[0] != self.dim:
            raise ValueError(f"dimension mismatch: state {rho.shape[0]}, povm {self.dim}")
        if self.vectors is not None:
            return np.einsum("ki,ij,kj->k", self.vectors.conj(), rho, self.vectors).real
        return np.einsum("kij,ji->k", self.elements, rho).real


@dataclass(frozen=True)
class PovmReport:
    completeness_residual: float
    min_eigenvalue: float
    complete: bool
    positive: bool

    @property
    def passed(self):
        return self.complete and self.positive


def validate_povm(povm):
    """Check completeness (within 1e-8) and positivity (within -1e-10)."""
    residual = povm.completeness_residual()
    min_eig = povm.min_element_eigenvalue()
    return PovmReport(
        completeness_residual=residual,
        min_eigenvalue=min_eig,
        complete=residual <= COMPLETENESS_TOL,
        positive=min_eig >= -POSITIVITY_TOL,
    )


def outcome_distribution(povm, state):
    """Probability vector ``w_k tr(E_k rho)``, clamped at zero.

    The distribution must sum to 1 within 1e-8 (a completeness failure
    otherwise).
    """
    p = povm.weights * povm.raw_probabilities(state)
    if np.any(p < -POSITIVITY_TOL):
        raise ValueError(f"negative outcome probability {p.min():.3e}")
    p = np.clip(p, 0.0, None)
    total = float(p.sum())
    if abs(total - 1.0) > COMPLETENESS_TOL:
        raise ValueError(f"outcome probabilities sum to {total}, not 1")
    return p


def classical_fisher(povm, family, x0=0.0, step=1e-5, p_floor=P_FLOOR):
    """Classical Fisher information of ``povm`` along ``family`` at ``x0``.

    ``F = sum_k (dp_k/dX)^2 / p_k`` with the derivative taken by central
    differences of the given step.  Outcomes with ``p_k <= p_floor`` are
    dropped from the sum.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    pov = povm.to_discrete() if hasattr(povm, "to_discrete") else povm
    p0 = outcome_distribution(pov, family.state_at(x0))
    keep = p0 > p_floor
    if not np.any(keep):
        raise ValueError("all outcome probabilities are below the floor")
    p_plus = outcome_distribution(pov, family.state_at(x0 + step))
    p_minus = outcome_distribution(pov, family.state_at(x0 - step))
    dp = (p_plus - p_minus) / (2.0 * step)
    return float(np.sum(dp[keep] ** 2 / p0[keep]))


@dataclass(frozen=True)
class SpectrumModel:
    """Spectrum of a generator: eigenvalues, eigenvector columns, period.

    ``period`` is present iff ``e^{-i period h} = 1``, i.e. every eigenvalue
    is ``2 pi n / period`` with integer ``n`` (checked to 1e-9).
    ``degeneracy_labels`` may distinguish levels that share an eigenvalue.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # (d, n) columns
    period: Optional[float] = None
    degeneracy_labels: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "eigenvalues", np.asarray(self.eigenvalues, dtype=float))
        object.__setattr__(self, "eigenvectors", np.asarray(self.eigenvectors, dtype=complex))
        if self.eigenvectors.shape[1] != len(self.eigenvalues):
            raise ValueError("one eigenvector column per eigenvalue required")
        if self.period is not None:
            n = self.eigenvalues * self.period / (2.0 * np.pi)
            if np.max(np.abs(n - np.round(n))) > 1e-9:
                raise ValueError(
                    "period is inconsistent: eigenvalues are not integer multiples "
                    "of 2*pi/period"
                )

    @property
    def dim(self):
        return self.eigenvectors.shape[0]

    @property
    def n_levels(self):
        return len(self.eigenvalues)

    @classmethod
    def from_generator(cls, h, period=None):
        eig = eig_hermitian(h)
        return cls(eig.eigenvalues, eig.eigenvectors, period=period)

    def integer_indices(self):
        if self.period is None:
            raise ValueError("spectrum has no period")
        return np.round(self.eigenvalues * self.period / (2.0 * np.pi)).astype(int)

    def min_gap(self):
        w = np.sort(self.eigenvalues)
        return float(np.min(np.diff(w))) if len(w) > 1 else np.inf


class CovariantPOVM:
    """Covariant rank-one POVM ``E(x) dx = |x><x| dx / C`` on a uniform grid.

    Outcome states satisfy ``<h|x> = e^{if(h)} e^{-ixh}`` exactly by
    construction, which is the displacement property anchored at x = 0.
    """

    def __init__(self, spectrum, gauge_values, grid, normalizer):
        self.spectrum = spectrum
        self.gauge_values = np.asarray(gauge_values, dtype=float)
        self.grid = np.asarray(grid, dtype=float)
        self.normalizer = float(normalizer)
        if len(self.gauge_values) != spectrum.n_levels:
            raise ValueError("one gauge value per spectrum level required")
        # outcome states as rows: |x_m> = sum_h e^{if(h)} e^{-i x_m h} |h>
        phases = np.exp(1j * self.gauge_values)[None, :] * np.exp(
            -1j * np.outer(self.grid, spectrum.eigenvalues)
        )
        self._states = phases @ spectrum.eigenvectors.T  # (M, d)
        self._h_coeff = phases  # amplitudes in the h-eigenbasis

    @property
    def grid_size(self):
        return len(self.grid)

    @property
    def dim(self):
        return self.spectrum.dim

    @property
    def period(self):
        return self.spectrum.period

    @property
    def cell(self):
        return float(self.grid[1] - self.grid[0]) if len(self.grid) > 1 else 0.0

    @property
    def weights(self):
        return np.full(self.grid_size, self.cell)

    @property
    def states(self):
        return self._states

    def to_discrete(self):
        # elements |x><x|/C as scaled rank-one vectors; quadrature weight = cell
        return DiscretePOVM(
            self.grid,
            self.weights,
            vectors=self._states / np.sqrt(self.normalizer),
        )

    def wavefunction(self, state):
        """Sampled wavefunction ``psi(x_m) = <x_m|psi> / sqrt(C)``."""
        psi = state.amplitudes if isinstance(state, PureState) else np.asarray(state)
        return (self._states.conj() @ psi) / np.sqrt(self.normalizer)

    def wavefunction_derivative(self, state):
        """Exact d/dx of the sampled wavefunction (spectral formula)."""
        psi = state.amplitudes if isinstance(state, PureState) else np.asarray(state)
        amps = self.spectrum.eigenvectors.conj().T @ psi  # <h|psi>
        coeff = np.exp(-1j * self.gauge_values) * amps
        # psi(x) = sum_h e^{ixh} e^{-if(h)} <h|psi> / sqrt(C)
        freq = 1j * self.spectrum.eigenvalues
        basis = np.exp(1j * np.outer(self.grid, self.spectrum.eigenvalues))
        return (basis @ (freq * coeff)) / np.sqrt(self.normalizer)

    def generator_mean(self, state):
        psi = state.amplitudes if isinstance(state, PureState) else np.asarray(state)
        amps = self.spectrum.eigenvectors.conj().T @ psi
        return float(np.sum(self.spectrum.eigenvalues * np.abs(amps) ** 2))

    def to_json(self):
        return {
            "spectrum": {
                "eigenvalues": self.spectrum.eigenvalues.tolist(),
                "period": self.spectrum.period,
            },
            "gauge_samples": self.gauge_values.tolist(),
            "grid": self.grid.tolist(),
            "C": self.normalizer,
        }


def _resolve_gauge(gauge, eigenvalues):
    if gauge is None:
        return np.zeros_like(eigenvalues)
    if callable(gauge):
        return np.asarray([float(gauge(h)) for h in eigenvalues])
    g = np.asarray(gauge, dtype=float)
    if g.shape != eigenvalues.shape:
        raise ValueError("gauge samples must match the spectrum size")
    return g


def build_covariant(spectrum, gauge=None, grid_size=64, window=None):
    """Covariant POVM from a non-degenerate spectrum.

    Periodic case (``spectrum.period`` set): the grid spans one period with
    ``C = period`` and cell weight ``period / M``; completeness is then exact
    up to round-off.  Otherwise a ``window = (lo, hi)`` must be supplied and
    ``C = hi - lo``.  Grid nodes sit at cell midpoints.

    ``grid_size`` must be at least four points per cycle of the fastest
    phase oscillation ``e^{-ix(h_max - h_min)}``.
    """
    if spectrum.min_gap() <= 1e-9:
        raise ValueError(
            "covariant construction requires that the spectrum of h has no "
            "degeneracies"
        )
    ev = spectrum.eigenvalues
    if spectrum.period is not None:
        length = spectrum.period
        lo = -length / 2.0
        span_units = int(np.round((ev.max() - ev.min()) * length / (2.0 * np.pi)))
    else:
        if window is None:
            raise ValueError("aperiodic spectrum requires an explicit window")
        lo, hi = window
        length = hi - lo
        if length <= 0:
            raise ValueError("window must have positive length")
        span_units = max(1, int(np.ceil((ev.max() - ev.min()) * length / (2.0 * np.pi))))
    min_m = 4 * max(1, span_units)
    if grid_size < min_m:
        raise ValueError(
            f"grid_size {grid_size} is below the resolution minimum {min_m} "
            f"(4 points per fastest oscillation)"
        )
    grid = lo + (np.arange(grid_size) + 0.5) * (length / grid_size)
    gauge_values = _resolve_gauge(gauge, ev)
    return CovariantPOVM(spectrum, gauge_values, grid, normalizer=length)


def displacement_operator(povm, shift):
    """The ladder operator ``D(H) = sum_m (w_m/C) e^{i x_m H} |x_m><x_m|``.

    Maps ``e^{if(h)}|h>`` to ``e^{if(h+H)}|h+H>`` when ``h + H`` is in the
    spectrum and annihilates components that would leave it; not unitary in
    general.  ``H`` must be zero or a difference of spectrum eigenvalues.
    """
    ev = povm.spectrum.eigenvalues
    if abs(shift) > 1e-9:
        diffs = ev[:, None] - ev[None, :]
        if np.min(np.abs(diffs - shift)) > 1e-9:
            raise ValueError(
                f"shift {shift} is not a difference of spectrum eigenvalues"
            )
    w = povm.cell / povm.normalizer
    phase = np.exp(1j * povm.grid * shift)
    return (povm.states.T * (w * phase)) @ povm.states.conj()


class OptimalityReport(NamedTuple):
    passed: bool
    phase_residual: float
    symmetry_residual: float
    generator_mean: float


def _wrap_pi(x):
    return (x + np.pi) % (2.0 * np.pi) - np.pi


def optimality_test(povm, fiducial, tol=1e-8, p_floor=P_FLOOR):
    """Test whether ``povm`` is an optimal measurement for ``fiducial``.

    Optimal fiducial wavefunctions are a real function times the carrier
    ``e^{i<h>x}``, so the residual ``max_m r^2(x_m) |Theta'(x_m) - <h>|``
    vanishes.  Theta' uses discrete phase differences wrapped to (-pi, pi];
    the derivative is taken along a linear traversal of the grid (the seam
    interval of a periodic grid, where the phase branch resets, is not
    differenced).

    Also reports the h-representation symmetry residual: how far the level
    populations are from symmetric about <h>.
    """
    psi0 = povm.wavefunction(fiducial)
    p = np.abs(psi0) ** 2
    theta = np.angle(psi0)
    mean_h = povm.generator_mean(fiducial)
    dx = povm.cell

    # one-sided wrapped increments averaged into a central estimate
    fwd = _wrap_pi(np.diff(theta)) / dx
    theta_prime = np.full_like(p, np.nan)
    theta_prime[1:-1] = (fwd[:-1] + fwd[1:]) / 2.0
    theta_prime[0] = fwd[0]
    theta_prime[-1] = fwd[-1]
    valid = p > p_floor
    residual = float(np.max(np.where(valid, p * np.abs(theta_prime - mean_h), 0.0)))

    symmetry = _symmetry_residual(povm.spectrum, fiducial, mean_h)
    return OptimalityReport(
        passed=residual <= tol,
        phase_residual=residual,
        symmetry_residual=symmetry,
        generator_mean=mean_h,
    )


def _symmetry_residual(spectrum, fiducial, mean_h):
    """Max defect of |<h_bar + u|psi>|^2 = |<h_bar - u|psi>|^2 over levels."""
    psi = fiducial.amplitudes if isinstance(fiducial, PureState) else np.asarray(fiducial)
    amps = spectrum.eigenvectors.conj().T @ psi
    w = np.abs(amps) ** 2
    ev = spectrum.eigenvalues
    scale = max(spectrum.min_gap(), 1e-9)
    residual = 0.0
    for i, h in enumerate(ev):
        mirror = 2.0 * mean_h - h
        j = np.argmin(np.abs(ev - mirror))
        if abs(ev[j] - mirror) <= 1e-6 * scale:
            residual = max(residual, abs(w[i] - w[j]))
        else:
            # no mirror level exists: any population there breaks symmetry
            residual = max(residual, w[i])
    return float(residual)


class VarianceSplit(NamedTuple):
    fisher_quarter: float
    phase_var: float


def variance_split(povm, fiducial, p_floor=P_FLOOR):
    """Split var(h) into Fisher and phase parts in the x representation.

    ``var(h) = (1/4) int (p')^2/p dx + int p (Theta' - <h>)^2 dx``; the
    first term is one quarter of the covariant measurement's Fisher
    information, the second the variance of the local phase derivative.
    Derivatives are exact (spectral), quadrature is the uniform-grid rule.

    The grid must resolve the wavefunction: the two terms must reproduce
    var(h); callers get a ValueError if the identity fails beyond 1e-6.
    """
    psi0 = povm.wavefunction(fiducial)
    dpsi = povm.wavefunction_derivative(fiducial)
    mean_h = povm.generator_mean(fiducial)
    dx = povm.cell

    p = np.abs(psi0) ** 2
    keep = p > p_floor
    dp = 2.0 * (psi0.conj() * dpsi).real
    theta_prime = np.zeros_like(p)
    theta_prime[keep] = (dpsi[keep] / psi0[keep]).imag

    fisher_quarter = float(0.25 * dx * np.sum(dp[keep] ** 2 / p[keep]))
    phase_var = float(dx * np.sum(p[keep] * (theta_prime[keep] - mean_h) ** 2))

    amps = povm.spectrum.eigenvectors.conj().T @ (
        fiducial.amplitudes if isinstance(fiducial, PureState) else np.asarray(fiducial)
    )
    var_h = float(np.sum((povm.spectrum.eigenvalues - mean_h) ** 2 * np.abs(amps) ** 2))
    if abs(fisher_quarter + phase_var - var_h) > 1e-6 * max(1.0, var_h):
        raise ValueError(
            f"grid does not resolve the wavefunction: split sum "
            f"{fisher_quarter + phase_var} != var(h) {var_h}"
        )
    return VarianceSplit(fisher_quarter, phase_var)


def sld_projective_povm(rho, rho_prime, zero_tol=1e-12):
    """Projective POVM in the eigenbasis of the SLD.

    Measuring it yields classical Fisher information equal to the QFI at the
    construction point.
    """
    result = sld(rho, rho_prime, zero_tol=zero_tol)
    eig = eig_hermitian(result.sld)
    return DiscretePOVM.projective(eig.eigenvectors, labels=eig.eigenvalues)
