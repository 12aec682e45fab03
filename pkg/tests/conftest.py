import numpy as np
import pytest

from qfi.hilbert import PureState


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)


def real_nonneg_x_state(dim, rng, carrier=None):
    """Probe whose x-space wavefunction is a non-negative function times the
    optimal carrier.

    Built Fejer-Riesz style: the envelope is |q(x)|^2 for a random complex
    trigonometric polynomial q, so it is non-negative by construction (and
    strictly positive for generic q).  The number amplitudes are the
    autocorrelation of q's coefficients, centered on an integer carrier.
    """
    center = dim // 2 if carrier is None else carrier
    reach = min(center, dim - 1 - center)
    degree = max(1, reach // 2)
    c = rng.standard_normal(degree + 1) + 1j * rng.standard_normal(degree + 1)
    amp = np.zeros(dim, dtype=complex)
    for u in range(-degree, degree + 1):
        b = sum(
            c[k] * np.conj(c[k - u])
            for k in range(max(0, u), min(degree + 1, degree + 1 + u))
        )
        amp[center + u] = b
    return PureState(amp / np.linalg.norm(amp))
