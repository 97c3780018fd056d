"""Pseudo-density matrices (PDMs) for systems probed at several time steps.

A PDM is a Hermitian, unit-trace operator on the tensor product of the
Hilbert spaces attached to successive time steps (earliest step in the
most significant factor).  Unlike a density matrix it need not be
positive semi-definite; its trace-norm excess over 1 ("negativity")
witnesses genuinely temporal correlations.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .channels import QuantumChannel
from .errors import (
    DimensionMismatchError,
    NotDensityMatrixError,
    NotHermitianError,
    NumericalInconsistencyError,
)
from .linalg import (
    PAULIS,
    anticommutator,
    as_matrix,
    dagger,
    max_abs,
    partial_trace,
    tensor_product,
    trace_norm,
)

HERMITICITY_ATOL = 1e-10
TRACE_ATOL = 1e-12
IMAG_ATOL = 1e-10
DENSITY_EIG_ATOL = 1e-10
DENSITY_TRACE_ATOL = 1e-10
NEGATIVITY_CLAMP = 1e-12

PauliString = tuple[int, ...]


def _is_qubit_dim(d: int) -> bool:
    return d >= 2 and (d & (d - 1)) == 0


@dataclass(frozen=True)
class Pdm:
    """Pseudo-density matrix plus the per-time-step factor dimensions.

    ``step_dims[k]`` is the Hilbert dimension at time step ``k`` (a power
    of two); step 0 sits in the leftmost tensor factor.
    """

    matrix: np.ndarray
    step_dims: tuple[int, ...]

    def __post_init__(self):
        m = as_matrix(self.matrix)
        dims = tuple(int(d) for d in self.step_dims)
        if not dims:
            raise ValueError("a PDM needs at least one time step")
        if any(not _is_qubit_dim(d) for d in dims):
            raise DimensionMismatchError(f"step dimensions must be qubit registers, got {dims}")
        if math.prod(dims) != m.shape[0]:
            raise DimensionMismatchError(
                f"step dimensions {dims} do not factor matrix dimension {m.shape[0]}"
            )
        if max_abs(m - dagger(m)) > HERMITICITY_ATOL:
            raise NotHermitianError("PDM must be Hermitian")
        tr = complex(np.trace(m))
        if abs(tr - 1.0) > TRACE_ATOL:
            raise ValueError(f"PDM must have unit trace, got {tr}")
        m = m.copy()
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "step_dims", dims)

    @property
    def steps(self) -> int:
        return len(self.step_dims)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def qubits_at(self, step: int) -> int:
        return self.step_dims[step].bit_length() - 1


def validate_density_matrix(rho) -> np.ndarray:
    """Check Hermiticity, unit trace, and positivity; return the array."""
    rho = as_matrix(rho)
    if max_abs(rho - dagger(rho)) > HERMITICITY_ATOL:
        raise NotDensityMatrixError("state is not Hermitian")
    tr = complex(np.trace(rho))
    if abs(tr - 1.0) > DENSITY_TRACE_ATOL:
        raise NotDensityMatrixError(f"state trace is {tr}, expected 1")
    w = np.linalg.eigvalsh(rho)
    if w[0] < -DENSITY_EIG_ATOL:
        raise NotDensityMatrixError(f"state has negative eigenvalue {w[0]:.3e}")
    return rho


def pdm_two_step(rho, channel: QuantumChannel) -> Pdm:
    """Two-step PDM from an initial state and the evolving channel.

    ``R = (1/2) { rho (x) I, M }`` with ``M`` the channel's Choi matrix
    on the (earlier, later) factor pair.  Tracing out the later factor
    returns ``rho``; tracing out the earlier one returns the evolved
    state.
    """
    rho = validate_density_matrix(rho)
    if rho.shape[0] != channel.dim_in:
        raise DimensionMismatchError(
            f"state dimension {rho.shape[0]} does not match channel input {channel.dim_in}"
        )
    lifted = np.kron(rho, np.eye(channel.dim_out))
    r = 0.5 * anticommutator(lifted, channel.choi)
    return Pdm(r, (channel.dim_in, channel.dim_out))


def pdm_extend(r: Pdm, channel: QuantumChannel) -> Pdm:
    """Append a time step by evolving the latest one through ``channel``.

    The existing PDM is padded with an identity factor for the new step,
    the channel's Choi matrix is embedded on the last two step factors,
    and the new PDM is half their anticommutator.  Tracing out the new
    step recovers ``r``.
    """
    if channel.dim_in != r.step_dims[-1]:
        raise DimensionMismatchError(
            f"channel input {channel.dim_in} does not match last step dimension {r.step_dims[-1]}"
        )
    prefix = math.prod(r.step_dims[:-1])
    padded = np.kron(r.matrix, np.eye(channel.dim_out))
    embedded = np.kron(np.eye(prefix), channel.choi)
    out = 0.5 * anticommutator(padded, embedded)
    return Pdm(out, r.step_dims + (channel.dim_out,))


def marginal(r: Pdm, keep: Iterable[int]) -> Pdm:
    """PDM on a subset of time steps, tracing out the rest."""
    keep = sorted(set(int(i) for i in keep))
    if not keep:
        raise ValueError("marginal requires a nonempty set of steps to keep")
    if any(i < 0 or i >= r.steps for i in keep):
        raise DimensionMismatchError(f"step indices {keep} out of range for {r.steps} steps")
    traced = set(range(r.steps)) - set(keep)
    reduced = partial_trace(r.matrix, r.step_dims, traced)
    return Pdm(reduced, tuple(r.step_dims[i] for i in keep))


def pauli_string_matrix(directions: Sequence[int]) -> np.ndarray:
    """Tensor product of single-qubit Pauli operators, by direction index.

    Index 0 is the identity, 1..3 are X, Y, Z.
    """
    if not len(directions):
        raise ValueError("a Pauli string needs at least one qubit")
    try:
        ops = [PAULIS[int(d)] for d in directions]
    except IndexError:
        raise ValueError(f"Pauli directions must lie in 0..3, got {tuple(directions)}") from None
    return tensor_product(*ops)


def _string_per_step(r: Pdm, strings: Sequence[Sequence[int]]) -> np.ndarray:
    if len(strings) != r.steps:
        raise DimensionMismatchError(
            f"need one Pauli string per step, got {len(strings)} for {r.steps} steps"
        )
    ops = []
    for step, s in enumerate(strings):
        n = r.qubits_at(step)
        if len(s) != n:
            raise DimensionMismatchError(
                f"step {step} has {n} qubits but its Pauli string has length {len(s)}"
            )
        ops.append(pauli_string_matrix(s))
    return tensor_product(*ops)


def pauli_correlation(r: Pdm, strings: Sequence[Sequence[int]]) -> float:
    """Temporal correlation of one Pauli string per time step.

    ``Tr[(s_0 (x) ... (x) s_{m-1}) R]``; the imaginary residue must stay
    below ``IMAG_ATOL`` (both operators are Hermitian) and is dropped.
    """
    op = _string_per_step(r, strings)
    val = complex(np.trace(op @ r.matrix))
    if abs(val.imag) > IMAG_ATOL:
        raise NumericalInconsistencyError(
            f"Pauli correlation has imaginary residue {val.imag:.3e}"
        )
    return float(val.real)


def pauli_index_tuples(n_qubits: int, steps: int) -> Iterator[tuple[PauliString, ...]]:
    """All per-step Pauli direction tuples, in lexicographic order."""
    single_step = list(itertools.product(range(4), repeat=n_qubits))
    return itertools.product(single_step, repeat=steps)


def all_pauli_correlations(r: Pdm) -> dict[tuple[PauliString, ...], float]:
    """Full correlation table of ``r`` over every Pauli string tuple.

    Only uniform qubit counts across steps are supported, matching
    :func:`pdm_from_correlations`.
    """
    n = r.qubits_at(0)
    if any(r.qubits_at(s) != n for s in range(r.steps)):
        raise DimensionMismatchError("correlation table requires equal qubit counts per step")
    return {key: pauli_correlation(r, key) for key in pauli_index_tuples(n, r.steps)}


def pdm_from_correlations(
    t: Mapping[tuple[PauliString, ...], float], n_qubits: int, steps: int
) -> Pdm:
    """Reconstruct a PDM from its complete Pauli correlation table.

    ``t`` must assign a real value to every tuple of per-step Pauli
    strings (``4**(n_qubits * steps)`` entries) with the all-identity
    entry equal to 1.  Round-trips with :func:`all_pauli_correlations`.
    """
    if n_qubits < 1 or steps < 1:
        raise ValueError("need at least one qubit and one step")
    dim = 2 ** (n_qubits * steps)
    out = np.zeros((dim, dim), dtype=complex)
    count = 0
    for key in pauli_index_tuples(n_qubits, steps):
        if key not in t:
            raise ValueError(f"correlation table is incomplete: missing entry for {key}")
        val = t[key]
        if isinstance(val, complex) or np.iscomplexobj(val):
            raise ValueError(f"correlation values must be real, got {val!r} for {key}")
        val = float(val)
        count += 1
        ops = [pauli_string_matrix(s) for s in key]
        out += val * tensor_product(*ops)
    identity_key = ((0,) * n_qubits,) * steps
    if abs(float(t[identity_key]) - 1.0) > 1e-10:
        raise ValueError("the all-identity correlation must equal 1")
    if len(t) != count:
        raise ValueError(f"correlation table has {len(t) - count} unexpected extra entries")
    out /= dim
    return Pdm(out, (2**n_qubits,) * steps)


def negativity(r: Pdm) -> float:
    """Trace norm of the PDM minus one, clamped against eigensolver noise.

    Zero exactly when the PDM is positive semi-definite; results in
    ``[-NEGATIVITY_CLAMP, 0)`` collapse to 0 so roundoff cannot report
    phantom non-classicality.
    """
    f = trace_norm(r.matrix) - 1.0
    if f < -NEGATIVITY_CLAMP:
        raise NumericalInconsistencyError(
            f"trace norm of a unit-trace matrix fell below 1 by {-f:.3e}"
        )
    return max(f, 0.0)
