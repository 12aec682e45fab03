"""Dense complex linear algebra and quantum-state primitives.

Everything here works on small, dense Hilbert spaces (dimension up to a few
hundred).  Matrices are stored as row-major ``complex128`` ndarrays; all
wrapper types validate their defining invariants at construction and are
immutable afterwards, so instances can be shared freely across threads.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "MAX_DIM",
    "MAX_TENSOR_DIM",
    "HermitianOperator",
    "DensityOperator",
    "PureState",
    "EigenDecomposition",
    "eig_hermitian",
    "expectation",
    "variance",
    "tensor_product",
    "commutator_path_tangent",
    "matrix_to_json",
    "matrix_from_json",
    "random_hermitian",
    "random_density",
    "random_pure",
]

# Single-system dimension cap; 4096 allows up to three tensored copies of the
# largest supported single system while keeping dense O(d^3) eigensolves fast.
MAX_DIM = 256
MAX_TENSOR_DIM = 4096

HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-12
NEG_EIG_TOL = 1e-10
NORM_TOL = 1e-12
IMAG_RESIDUE_TOL = 1e-10
RECONSTRUCTION_TOL = 1e-9
ORTHONORMALITY_TOL = 1e-10


def _as_square_complex(matrix, cap=MAX_TENSOR_DIM):
    m = np.asarray(matrix, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if m.shape[0] < 1:
        raise ValueError("dimension must be positive")
    if m.shape[0] > cap:
        raise ValueError(f"dimension {m.shape[0]} exceeds cap {cap}")
    return m


def _freeze(arr):
    arr = np.array(arr, copy=True)
    arr.flags.writeable = False
    return arr


class HermitianOperator:
    """A Hermitian matrix, validated at construction.

    Parameters
    ----------
    matrix : array_like
        Square complex matrix with ``max|A - A^dag| <= 1e-12``.
    """

    def __init__(self, matrix):
        m = _as_square_complex(matrix)
        herm_defect = np.max(np.abs(m - m.conj().T))
        if herm_defect > HERMITICITY_TOL:
            raise ValueError(
                f"matrix is not Hermitian (max defect {herm_defect:.3e})"
            )
        self._matrix = _freeze(m)

    @property
    def matrix(self):
        return self._matrix

    @property
    def dim(self):
        return self._matrix.shape[0]

    def __repr__(self):
        return f"HermitianOperator(dim={self.dim})"


class DensityOperator:
    """A density matrix: Hermitian, unit trace, positive semidefinite.

    Positivity tolerates eigenvalues down to ``-1e-10`` (solver round-off);
    anything below that is rejected as genuinely invalid.
    """

    def __init__(self, matrix):
        m = _as_square_complex(matrix)
        herm_defect = np.max(np.abs(m - m.conj().T))
        if herm_defect > HERMITICITY_TOL:
            raise ValueError(
                f"density matrix is not Hermitian (max defect {herm_defect:.3e})"
            )
        tr = np.trace(m)
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValueError(f"density matrix trace {tr} is not 1")
        min_eig = float(np.linalg.eigvalsh(m)[0])
        if min_eig < -NEG_EIG_TOL:
            raise ValueError(
                f"density matrix has negative eigenvalue {min_eig:.3e}"
            )
        self._matrix = _freeze(m)

    @property
    def matrix(self):
        return self._matrix

    @property
    def dim(self):
        return self._matrix.shape[0]

    @classmethod
    def from_eigensystem(cls, probabilities, basis):
        """Build sum_j p_j |j><j| from eigenvalues and eigenvector columns."""
        p = np.asarray(probabilities, dtype=float)
        v = np.asarray(basis, dtype=complex)
        return cls((v * p) @ v.conj().T)

    @classmethod
    def from_pure(cls, state):
        psi = state.amplitudes if isinstance(state, PureState) else np.asarray(state)
        return cls(np.outer(psi, psi.conj()))

    def __repr__(self):
        return f"DensityOperator(dim={self.dim})"


class PureState:
    """A normalized state vector."""

    def __init__(self, amplitudes):
        a = np.asarray(amplitudes, dtype=complex)
        if a.ndim != 1 or a.shape[0] < 1:
            raise ValueError(f"expected a 1-d amplitude vector, got shape {a.shape}")
        if a.shape[0] > MAX_TENSOR_DIM:
            raise ValueError(f"dimension {a.shape[0]} exceeds cap {MAX_TENSOR_DIM}")
        norm_sq = float(np.vdot(a, a).real)
        if abs(norm_sq - 1.0) > NORM_TOL:
            raise ValueError(f"state norm^2 = {norm_sq} is not 1")
        self._amplitudes = _freeze(a)

    @property
    def amplitudes(self):
        return self._amplitudes

    @property
    def dim(self):
        return self._amplitudes.shape[0]

    def density(self):
        return DensityOperator.from_pure(self)

    def __repr__(self):
        return f"PureState(dim={self.dim})"


class EigenDecomposition:
    """Eigenvalues (ascending) and orthonormal eigenvector columns."""

    def __init__(self, eigenvalues, eigenvectors):
        w = np.asarray(eigenvalues, dtype=float)
        v = np.asarray(eigenvectors, dtype=complex)
        if np.any(np.diff(w) < 0):
            raise ValueError("eigenvalues must be ascending")
        gram = v.conj().T @ v
        ortho_defect = np.max(np.abs(gram - np.eye(v.shape[1])))
        if ortho_defect > ORTHONORMALITY_TOL:
            raise ValueError(
                f"eigenvectors not orthonormal (max defect {ortho_defect:.3e})"
            )
        self.eigenvalues = _freeze(w)
        self.eigenvectors = _freeze(v)

    def reconstruct(self):
        return (self.eigenvectors * self.eigenvalues) @ self.eigenvectors.conj().T


def _canonical_phases(v):
    """Fix each column's global phase: largest-modulus entry made real positive."""
    idx = np.argmax(np.abs(v), axis=0)
    pivots = v[idx, np.arange(v.shape[1])]
    # unit columns always have a nonzero pivot
    return v / (pivots / np.abs(pivots))


def _canonicalize_degenerate(w, v, degeneracy_tol):
    """Replace each degenerate eigenspace basis with one seeded by column index.

    Within a cluster of equal eigenvalues the LAPACK basis is arbitrary; we
    rebuild it by projecting standard basis vectors e_0, e_1, ... onto the
    eigenspace and Gram-Schmidt orthonormalizing, which depends only on the
    subspace itself.
    """
    d = len(w)
    start = 0
    v = v.copy()
    while start < d:
        stop = start + 1
        while stop < d and w[stop] - w[stop - 1] <= degeneracy_tol:
            stop += 1
        g = stop - start
        if g > 1:
            block = v[:, start:stop]
            proj = block @ block.conj().T
            chosen = []
            for j in range(d):
                cand = proj[:, j].copy()
                for u in chosen:
                    cand -= u * np.vdot(u, cand)
                norm = np.linalg.norm(cand)
                if norm > 1e-6:
                    chosen.append(cand / norm)
                    if len(chosen) == g:
                        break
            if len(chosen) == g:
                v[:, start:stop] = np.column_stack(chosen)
        start = stop
    return _canonical_phases(v)


def eig_hermitian(a, degeneracy_tol=1e-9):
    """Eigendecompose a Hermitian operator with a deterministic basis choice.

    Eigenvalues come back ascending.  Degenerate subspaces get a canonical
    basis (projector-seeded Gram-Schmidt over standard basis columns) so the
    result depends only on the input matrix, not on LAPACK internals.

    Raises
    ------
    ValueError
        If the eigensolver fails to converge or the reconstruction check
        ``max|A - V diag(w) V^dag| <= 1e-9`` fails.
    """
    m = a.matrix if hasattr(a, "matrix") else _as_square_complex(a)
    try:
        w, v = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:
        raise ValueError(f"Hermitian eigensolver did not converge: {exc}") from exc
    v = _canonicalize_degenerate(w, v, degeneracy_tol)
    recon_defect = np.max(np.abs((v * w) @ v.conj().T - m))
    if recon_defect > RECONSTRUCTION_TOL:
        raise ValueError(
            f"eigendecomposition reconstruction defect {recon_defect:.3e}"
        )
    return EigenDecomposition(w, v)


def _state_matrix(state):
    if isinstance(state, DensityOperator):
        return state.matrix
    if isinstance(state, PureState):
        return None  # handled separately for speed
    raise TypeError(f"expected DensityOperator or PureState, got {type(state)}")


def expectation(op, state):
    """Expectation value tr(rho op) or <psi|op|psi>.

    The imaginary residue must be below 1e-10; it is checked and then
    discarded.
    """
    m = op.matrix if isinstance(op, HermitianOperator) else np.asarray(op)
    if isinstance(state, PureState):
        if state.dim != m.shape[0]:
            raise ValueError(f"dimension mismatch: state {state.dim}, op {m.shape[0]}")
        val = np.vdot(state.amplitudes, m @ state.amplitudes)
    else:
        rho = _state_matrix(state)
        if rho.shape[0] != m.shape[0]:
            raise ValueError(f"dimension mismatch: state {rho.shape[0]}, op {m.shape[0]}")
        val = np.trace(rho @ m)
    if abs(val.imag) > IMAG_RESIDUE_TOL * max(1.0, abs(val.real)):
        raise ValueError(f"expectation has imaginary residue {val.imag:.3e}")
    return float(val.real)


def variance(op, state):
    """Variance <op^2> - <op>^2, clamped to be non-negative."""
    m = op.matrix if isinstance(op, HermitianOperator) else np.asarray(op)
    if isinstance(state, PureState):
        if state.dim != m.shape[0]:
            raise ValueError(f"dimension mismatch: state {state.dim}, op {m.shape[0]}")
        mpsi = m @ state.amplitudes
        mean = float(np.vdot(state.amplitudes, mpsi).real)
        second = float(np.vdot(mpsi, mpsi).real)
    else:
        rho = _state_matrix(state)
        if rho.shape[0] != m.shape[0]:
            raise ValueError(f"dimension mismatch: state {rho.shape[0]}, op {m.shape[0]}")
        mean = float(np.trace(rho @ m).real)
        second = float(np.trace(rho @ m @ m).real)
    var = second - mean * mean
    if var < -NEG_EIG_TOL:
        raise ValueError(f"variance {var:.3e} below round-off tolerance")
    return max(var, 0.0)


def tensor_product(a, b):
    """Kronecker product of two density operators.

    Entry convention is row-major: entry ``(i*db + k, j*db + l)`` of the
    result equals ``a[i, j] * b[k, l]``.
    """
    if a.dim * b.dim > MAX_TENSOR_DIM:
        raise ValueError(
            f"tensored dimension {a.dim * b.dim} exceeds cap {MAX_TENSOR_DIM}"
        )
    return DensityOperator(np.kron(a.matrix, b.matrix))


def commutator_path_tangent(rho, h):
    """Tangent -i[h, rho] of the unitary path generated by ``h``.

    The result is Hermitian and traceless; Hermiticity is enforced by the
    returned type.
    """
    r = rho.matrix if isinstance(rho, DensityOperator) else np.asarray(rho)
    m = h.matrix if isinstance(h, HermitianOperator) else np.asarray(h)
    if r.shape[0] != m.shape[0]:
        raise ValueError(f"dimension mismatch: rho {r.shape[0]}, h {m.shape[0]}")
    comm = m @ r - r @ m
    return HermitianOperator(-1j * comm)


def matrix_to_json(matrix):
    """Serialize a complex matrix as ``{dim, re, im}`` (row-major lists)."""
    m = _as_square_complex(matrix)
    return {
        "dim": int(m.shape[0]),
        "re": m.real.tolist(),
        "im": m.imag.tolist(),
    }


def matrix_from_json(obj):
    """Inverse of :func:`matrix_to_json`."""
    dim = int(obj["dim"])
    m = np.asarray(obj["re"], dtype=float) + 1j * np.asarray(obj["im"], dtype=float)
    if m.shape != (dim, dim):
        raise ValueError(f"payload shape {m.shape} does not match dim {dim}")
    return m


def random_hermitian(dim, rng, scale=1.0):
    """Random Hermitian matrix with Gaussian entries (GUE-like)."""
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return HermitianOperator(scale * (g + g.conj().T) / 2.0)


def random_pure(dim, rng):
    """Haar-random pure state."""
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return PureState(v / np.linalg.norm(v))


def random_density(dim, rng, rank=None, min_eigenvalue=0.0):
    """Random density operator of the given rank.

    ``min_eigenvalue`` floors the spectrum (after renormalization) so tests
    can demand strictly full-rank states.
    """
    rank = dim if rank is None else rank
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    m = g @ g.conj().T
    m /= np.trace(m).real
    if min_eigenvalue > 0.0:
        m = (1.0 - dim * min_eigenvalue) * m + min_eigenvalue * np.eye(dim)
    return DensityOperator((m + m.conj().T) / 2.0)
