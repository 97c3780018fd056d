"""CPTP maps in Kraus form with Choi-matrix duality.

The Kraus list is the canonical representation; the Choi matrix is
derived on demand (and cached) with the reference factor first::

    M = sum_ij (|i><j|)^T  (x)  E(|i><j|)

in the computational basis, so the identity qubit channel maps to the
swap operator and channel application can equivalently be written as
``E(sigma) = Tr_ref[(sigma (x) I) M]``.  Both application routes are
exposed and are cross-checked in the test suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatchError, NotUnitaryError
from .linalg import PAULI_I, PAULI_X, PAULI_Y, PAULI_Z, as_matrix, dagger, max_abs, partial_trace

TRACE_PRESERVATION_ATOL = 1e-10
UNITARITY_ATOL = 1e-10


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class QuantumChannel:
    """A trace-preserving quantum channel given by square Kraus operators.

    Construction validates trace preservation, ``sum_k K_k^dag K_k = I``
    within ``TRACE_PRESERVATION_ATOL``.  Complete positivity is automatic
    for any Kraus list.
    """

    kraus: tuple[np.ndarray, ...]
    _choi: np.ndarray | None = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.kraus:
            raise ValueError("channel needs at least one Kraus operator")
        ks = tuple(_frozen(as_matrix(k)) for k in self.kraus)
        d = ks[0].shape[0]
        if any(k.shape != (d, d) for k in ks):
            raise DimensionMismatchError("all Kraus operators must share one square shape")
        total = sum(dagger(k) @ k for k in ks)
        dev = max_abs(total - np.eye(d))
        if dev > TRACE_PRESERVATION_ATOL:
            raise ValueError(f"Kraus operators violate trace preservation by {dev:.3e}")
        object.__setattr__(self, "kraus", ks)

    @property
    def dim_in(self) -> int:
        return self.kraus[0].shape[1]

    @property
    def dim_out(self) -> int:
        return self.kraus[0].shape[0]

    @property
    def dim(self) -> int:
        return self.dim_in

    @property
    def choi(self) -> np.ndarray:
        """Cached Choi matrix, reference factor first."""
        if self._choi is None:
            object.__setattr__(self, "_choi", _frozen(choi_from_kraus(self)))
        return self._choi


def choi_from_kraus(channel: QuantumChannel) -> np.ndarray:
    """Choi matrix ``sum_ij (|i><j|)^T (x) E(|i><j|)`` of a channel."""
    d = channel.dim
    m = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        for j in range(d):
            e_ij = np.zeros((d, d), dtype=complex)
            e_ij[i, j] = 1.0
            m += np.kron(e_ij.T, apply_channel(channel, e_ij, validate=False))
    return m


def apply_channel(channel: QuantumChannel, sigma, validate: bool = True) -> np.ndarray:
    """Apply the channel through its Kraus operators."""
    sigma = as_matrix(sigma)
    if validate and sigma.shape[0] != channel.dim_in:
        raise DimensionMismatchError(
            f"state dimension {sigma.shape[0]} does not match channel input {channel.dim_in}"
        )
    out = np.zeros((channel.dim_out, channel.dim_out), dtype=complex)
    for k in channel.kraus:
        out += k @ sigma @ dagger(k)
    return out


def apply_channel_via_choi(channel: QuantumChannel, sigma) -> np.ndarray:
    """Apply the channel through its Choi matrix, ``Tr_ref[(sigma (x) I) M]``.

    Dual route to :func:`apply_channel`; the two must agree to roundoff.
    """
    sigma = as_matrix(sigma)
    d_in, d_out = channel.dim_in, channel.dim_out
    if sigma.shape[0] != d_in:
        raise DimensionMismatchError(
            f"state dimension {sigma.shape[0]} does not match channel input {d_in}"
        )
    lifted = np.kron(sigma, np.eye(d_out)) @ channel.choi
    return partial_trace(lifted, (d_in, d_out), {0})


def make_identity(dim: int = 2) -> QuantumChannel:
    """The identity channel on a ``dim``-dimensional system."""
    return QuantumChannel((np.eye(dim, dtype=complex),))


def make_depolarizing(eta: float) -> QuantumChannel:
    """Qubit depolarizing channel ``rho -> (1 - eta) rho + eta I/2``.

    Kraus set ``{sqrt(1 - 3 eta/4) I, sqrt(eta/4) X, sqrt(eta/4) Y,
    sqrt(eta/4) Z}``; ``eta`` must lie in [0, 1].
    """
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"depolarizing strength must lie in [0, 1], got {eta}")
    return QuantumChannel(
        (
            math.sqrt(1.0 - 0.75 * eta) * PAULI_I,
            math.sqrt(0.25 * eta) * PAULI_X,
            math.sqrt(0.25 * eta) * PAULI_Y,
            math.sqrt(0.25 * eta) * PAULI_Z,
        )
    )


def make_unitary(u) -> QuantumChannel:
    """Channel ``rho -> u rho u^dag`` for a unitary ``u``."""
    u = as_matrix(u)
    dev = max_abs(dagger(u) @ u - np.eye(u.shape[0]))
    if dev > UNITARITY_ATOL:
        raise NotUnitaryError(f"matrix deviates from unitarity by {dev:.3e}")
    return QuantumChannel((u,))


def unitary_from_hamiltonian(h, t: float = 1.0) -> np.ndarray:
    """Closed-form ``exp(-i h t)`` for a 2x2 Hermitian generator.

    Splits ``h = a I + b . sigma`` and uses the cosine/sine expansion;
    larger generators are out of scope.
    """
    h = as_matrix(h)
    if h.shape != (2, 2):
        raise DimensionMismatchError("closed-form exponential only covers 2x2 generators")
    if max_abs(h - dagger(h)) > 1e-12 * max(1.0, max_abs(h)):
        raise ValueError("generator must be Hermitian")
    a = np.trace(h).real / 2.0
    b = np.array(
        [
            np.trace(PAULI_X @ h).real / 2.0,
            np.trace(PAULI_Y @ h).real / 2.0,
            np.trace(PAULI_Z @ h).real / 2.0,
        ]
    )
    r = float(np.linalg.norm(b))
    phase = np.exp(-1j * a * t)
    if r == 0.0:
        return phase * np.eye(2, dtype=complex)
    n_sigma = (b[0] * PAULI_X + b[1] * PAULI_Y + b[2] * PAULI_Z) / r
    return phase * (math.cos(r * t) * PAULI_I - 1j * math.sin(r * t) * n_sigma)


def rabi_unitary(omega_t: float) -> np.ndarray:
    """``exp(-i (omega_t / 2) X)``: resonant Rabi rotation by ``omega_t``."""
    return unitary_from_hamiltonian(0.5 * omega_t * PAULI_X, 1.0)


def make_rabi(omega_t: float) -> QuantumChannel:
    """Unitary channel for a resonant Rabi rotation by ``omega_t``."""
    return make_unitary(rabi_unitary(omega_t))
