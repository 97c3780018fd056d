"""Dense complex matrix primitives.

Kronecker products, partial traces/transposes over tensor factors,
anticommutators, and Hermitian eigendecomposition.  Matrices are plain
``numpy`` complex arrays; every function treats its inputs as immutable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, EigenConvergenceError, NotHermitianError

HERMITICITY_RTOL = 1e-10
PHASE_FLOOR = 1e-12

PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (PAULI_I, PAULI_X, PAULI_Y, PAULI_Z)

PAULI_I.flags.writeable = False
PAULI_X.flags.writeable = False
PAULI_Y.flags.writeable = False
PAULI_Z.flags.writeable = False


def as_matrix(m) -> np.ndarray:
    """Coerce to a square complex128 array with finite entries."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatchError(f"expected a square matrix, got shape {a.shape}")
    if not np.isfinite(a).all():
        raise ValueError("matrix entries must be finite")
    return a


def dagger(m: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return m.conj().T


def max_abs(m: np.ndarray) -> float:
    """Largest entry magnitude (zero for empty input)."""
    return float(np.max(np.abs(m))) if m.size else 0.0


def is_hermitian(m: np.ndarray, rtol: float = HERMITICITY_RTOL) -> bool:
    """Whether ``m`` equals its conjugate transpose to relative tolerance."""
    m = np.asarray(m)
    return max_abs(m - dagger(m)) <= rtol * max_abs(m)


def tensor_product(*factors) -> np.ndarray:
    """Kronecker product, folded left to right.

    The first factor occupies the most significant index block; for
    time-ordered operators this is the earliest time step.
    """
    if not factors:
        raise ValueError("tensor_product requires at least one factor")
    out = as_matrix(factors[0])
    for f in factors[1:]:
        out = np.kron(out, as_matrix(f))
    return out


def _check_dims(m: np.ndarray, dims) -> tuple[int, ...]:
    dims = tuple(int(d) for d in dims)
    if any(d < 1 for d in dims):
        raise DimensionMismatchError(f"factor dimensions must be positive, got {dims}")
    if math.prod(dims) != m.shape[0]:
        raise DimensionMismatchError(
            f"product of factor dimensions {dims} does not match matrix dimension {m.shape[0]}"
        )
    return dims


def partial_trace(m, dims, traced) -> np.ndarray:
    """Trace out the factors listed in ``traced``.

    Parameters
    ----------
    m : array
        Square matrix on the tensor product of the given factors.
    dims : sequence of int
        Per-factor dimensions, most significant first.
    traced : iterable of int
        Indices of the factors to remove.  The remaining factors keep
        their relative order.  Tracing out every factor leaves a 1x1
        matrix holding the scalar trace.
    """
    m = as_matrix(m)
    dims = _check_dims(m, dims)
    k = len(dims)
    traced = set(int(i) for i in traced)
    if any(i < 0 or i >= k for i in traced):
        raise DimensionMismatchError(f"traced indices {sorted(traced)} out of range for {k} factors")
    keep = [i for i in range(k) if i not in traced]

    t = m.reshape(dims + dims)
    row = list(range(k))
    col = [k + i for i in range(k)]
    for i in traced:
        col[i] = row[i]
    out_axes = [row[i] for i in keep] + [col[i] for i in keep]
    reduced = np.einsum(t, row + col, out_axes)
    d_keep = math.prod(dims[i] for i in keep) if keep else 1
    return reduced.reshape(d_keep, d_keep)


def partial_transpose(m, dims, transposed) -> np.ndarray:
    """Transpose the factors listed in ``transposed``, leaving the rest."""
    m = as_matrix(m)
    dims = _check_dims(m, dims)
    k = len(dims)
    transposed = set(int(i) for i in transposed)
    if any(i < 0 or i >= k for i in transposed):
        raise DimensionMismatchError(
            f"transposed indices {sorted(transposed)} out of range for {k} factors"
        )
    t = m.reshape(dims + dims)
    axes = list(range(2 * k))
    for i in transposed:
        axes[i], axes[k + i] = axes[k + i], axes[i]
    return t.transpose(axes).reshape(m.shape)


def anticommutator(a, b) -> np.ndarray:
    """``a @ b + b @ a`` for equal-dimension square matrices."""
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape != b.shape:
        raise DimensionMismatchError(f"anticommutator of shapes {a.shape} and {b.shape}")
    return a @ b + b @ a


@dataclass(frozen=True)
class HermitianEigenDecomposition:
    """Eigenvalues (real, ascending) and unit-norm eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def _fix_column_phases(v: np.ndarray) -> np.ndarray:
    # First component above the floor is rotated to the positive real axis,
    # so repeated runs give bit-identical eigenvectors.
    v = v.copy()
    for k in range(v.shape[1]):
        col = v[:, k]
        nz = np.flatnonzero(np.abs(col) > PHASE_FLOOR)
        if nz.size:
            pivot = col[nz[0]]
            v[:, k] = col * (abs(pivot) / pivot)
    return v


def hermitian_eig(m) -> HermitianEigenDecomposition:
    """Eigendecomposition of a Hermitian matrix.

    Eigenvalues come back ascending; each eigenvector column has its
    first non-negligible component made real positive so the result is
    reproducible.  Raises ``NotHermitianError`` if the input deviates
    from Hermiticity beyond ``HERMITICITY_RTOL`` relative to its largest
    entry, and ``EigenConvergenceError`` if the solver fails.
    """
    m = as_matrix(m)
    if not is_hermitian(m):
        raise NotHermitianError(
            f"matrix deviates from Hermiticity by {max_abs(m - dagger(m)):.3e}"
        )
    try:
        w, v = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:
        raise EigenConvergenceError(str(exc)) from exc
    return HermitianEigenDecomposition(eigenvalues=w, eigenvectors=_fix_column_phases(v))


def trace_norm(m) -> float:
    """Sum of absolute eigenvalues of a Hermitian matrix."""
    m = as_matrix(m)
    if not is_hermitian(m):
        raise NotHermitianError("trace_norm expects a Hermitian matrix")
    try:
        w = np.linalg.eigvalsh(m)
    except np.linalg.LinAlgError as exc:
        raise EigenConvergenceError(str(exc)) from exc
    return float(np.abs(w).sum())
