"""Worked estimation scenarios: displacement, phase, and elapsed time.

Each scenario bundles a state family, the matching covariant measurement,
and the closed forms needed to check the estimation bounds against theory.
Units: hbar = 1 and the oscillator length scale is 1 throughout.
"""

from .squeezed import (
    SqueezedParams,
    GammaConstant,
    gamma,
    squeezed_covariance,
    squeezed_optimal,
    squeezed_nsr,
    squeezed_mc_scenario,
)
from .phase import (
    PhaseScenario,
    fock_phase_scenario,
    number_state,
    two_level_state,
    binomial_state,
    chirped_state,
)
from .clock import (
    TwoSectorSpectrum,
    TwoSectorPOVM,
    mandelstam_tamm,
    ring_spectrum,
    two_sector_time_povm,
    optimal_sector_frame,
    energy_symmetry_residual,
)

__all__ = [
    "SqueezedParams",
    "GammaConstant",
    "gamma",
    "squeezed_covariance",
    "squeezed_optimal",
    "squeezed_nsr",
    "squeezed_mc_scenario",
    "PhaseScenario",
    "fock_phase_scenario",
    "number_state",
    "two_level_state",
    "binomial_state",
    "chirped_state",
    "TwoSectorSpectrum",
    "TwoSectorPOVM",
    "mandelstam_tamm",
    "ring_spectrum",
    "two_sector_time_povm",
    "optimal_sector_frame",
    "energy_symmetry_residual",
]
