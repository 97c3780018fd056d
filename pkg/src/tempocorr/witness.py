"""Temporal non-classicality verdicts for pseudo-density matrices.

Covers the macrorealism certificate from PDM positivity, temporal
entanglement detection (negativity, then the PPT criterion on the PSD
remainder), the temporal CHSH value and its correlation-matrix optimum,
and the three-step Leggett-Garg family for a dichotomic observable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .channels import QuantumChannel
from .errors import DimensionMismatchError, NumericalInconsistencyError
from .linalg import (
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    hermitian_eig,
    partial_transpose,
    tensor_product,
)
from .pdm import Pdm, negativity, pdm_extend, pdm_two_step

PSD_ATOL = 1e-10
UNIT_VECTOR_ATOL = 1e-10
LGI_VIOLATION_ATOL = 1e-10

LGI_VARIANTS = ("++", "+-", "-+", "--")


class MrCertificate(Enum):
    """Whether PDM positivity guarantees macrorealism for every measurement."""

    GUARANTEED_ALL_MEASUREMENTS = "guaranteed_all_measurements"
    NOT_GUARANTEED = "not_guaranteed"


class TemporalEntanglement(Enum):
    """Outcome of the temporal separability analysis."""

    ENTANGLED_BY_NEGATIVITY = "entangled_by_negativity"
    ENTANGLED_BY_PPT = "entangled_by_ppt"
    SEPARABLE_PPT_2X2 = "separable_ppt_2x2"
    PPT_INCONCLUSIVE = "ppt_inconclusive"


def _min_eigenvalue(r: Pdm) -> float:
    return float(hermitian_eig(r.matrix).eigenvalues[0])


def mr_certificate(r: Pdm) -> MrCertificate:
    """Macrorealism certificate from the PDM spectrum.

    A positive semi-definite PDM satisfies macrorealism for every
    choice of sequential projective measurements.  The converse fails:
    ``NOT_GUARANTEED`` is not a proof of violation.
    """
    if r.steps not in (2, 3):
        raise DimensionMismatchError(f"certificate covers 2 or 3 steps, got {r.steps}")
    if _min_eigenvalue(r) >= -PSD_ATOL:
        return MrCertificate.GUARANTEED_ALL_MEASUREMENTS
    return MrCertificate.NOT_GUARANTEED


def temporal_entanglement(r: Pdm) -> TemporalEntanglement:
    """Classify a two-step PDM as temporally entangled or separable.

    Any negativity already implies temporal entanglement.  A PSD PDM is
    handled like a bipartite state: a negative partial transpose proves
    entanglement, a positive one proves separability only in the
    qubit-qubit case.
    """
    if r.steps != 2:
        raise DimensionMismatchError("separability analysis is restricted to two-step PDMs")
    if negativity(r) > 0.0:
        return TemporalEntanglement.ENTANGLED_BY_NEGATIVITY
    pt = partial_transpose(r.matrix, r.step_dims, {1})
    if hermitian_eig(pt).eigenvalues[0] < -PSD_ATOL:
        return TemporalEntanglement.ENTANGLED_BY_PPT
    if r.step_dims == (2, 2):
        return TemporalEntanglement.SEPARABLE_PPT_2X2
    return TemporalEntanglement.PPT_INCONCLUSIVE


def _unit_vector(v, name: str) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (3,):
        raise ValueError(f"{name} must be a Bloch 3-vector, got shape {v.shape}")
    if abs(np.linalg.norm(v) - 1.0) > UNIT_VECTOR_ATOL:
        raise ValueError(f"{name} must be a unit vector, norm is {np.linalg.norm(v)!r}")
    return v


def _bloch_operator(v: np.ndarray) -> np.ndarray:
    return v[0] * PAULI_X + v[1] * PAULI_Y + v[2] * PAULI_Z


def _correlation(r: Pdm, ops: Sequence[np.ndarray]) -> float:
    val = complex(np.trace(r.matrix @ tensor_product(*ops)))
    if abs(val.imag) > 1e-10:
        raise NumericalInconsistencyError(f"correlation has imaginary residue {val.imag:.3e}")
    return float(val.real)


def _require_single_qubit(r: Pdm, steps: int, what: str):
    if r.step_dims != (2,) * steps:
        raise DimensionMismatchError(f"{what} needs a {steps}-step single-qubit PDM")


def chsh_value(r: Pdm, a1, a2, b1, b2) -> float:
    """Temporal CHSH combination for the given Bloch settings.

    ``|<A1 B1> + <A1 B2> + <A2 B1> - <A2 B2>|`` with each correlation
    read off the PDM; bounded by 2 for time-separable PDMs.
    """
    _require_single_qubit(r, 2, "the temporal CHSH value")
    a1 = _unit_vector(a1, "a1")
    a2 = _unit_vector(a2, "a2")
    b1 = _unit_vector(b1, "b1")
    b2 = _unit_vector(b2, "b2")

    def c(a, b):
        return _correlation(r, (_bloch_operator(a), _bloch_operator(b)))

    return abs(c(a1, b1) + c(a1, b2) + c(a2, b1) - c(a2, b2))


def pauli_correlation_matrix(r: Pdm) -> np.ndarray:
    """3x3 table ``T[i, j] = <sigma_i at step 0, sigma_j at step 1>``."""
    _require_single_qubit(r, 2, "the Pauli correlation matrix")
    sig = (PAULI_X, PAULI_Y, PAULI_Z)
    return np.array([[_correlation(r, (sig[i], sig[j])) for j in range(3)] for i in range(3)])


def _chsh_optimum(r: Pdm):
    t = pauli_correlation_matrix(r)
    w, v = np.linalg.eigh(t.T @ t)
    w = np.clip(w, 0.0, None)  # roundoff can push tiny eigenvalues negative
    lam1, lam2 = w[2], w[1]
    v1, v2 = v[:, 2], v[:, 1]
    return t, lam1, lam2, v1, v2


def chsh_max(r: Pdm) -> float:
    """Best temporal CHSH value over all Bloch settings.

    Equals ``2 sqrt(lam1 + lam2)`` for the two largest eigenvalues of
    ``T^T T`` built from the Pauli correlation matrix, the same
    correlation-matrix criterion used for bipartite states.
    """
    _, lam1, lam2, _, _ = _chsh_optimum(r)
    return 2.0 * math.sqrt(lam1 + lam2)


def chsh_optimal_settings(r: Pdm) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Bloch settings ``(a1, a2, b1, b2)`` attaining :func:`chsh_max`.

    The later-step settings span the top eigenvectors of ``T^T T``; the
    earlier-step settings are the normalized images ``T (b1 +- b2)``.
    Ties and rank-deficient ``T`` fall back to arbitrary orthonormal
    choices without affecting the attained value.
    """
    t, lam1, lam2, v1, v2 = _chsh_optimum(r)
    phi = math.atan2(math.sqrt(lam2), math.sqrt(lam1)) if lam1 + lam2 > 0 else 0.0
    b1 = math.cos(phi) * v1 + math.sin(phi) * v2
    b2 = math.cos(phi) * v1 - math.sin(phi) * v2

    def image_direction(x, fallback):
        y = t @ x
        n = np.linalg.norm(y)
        return y / n if n > 1e-12 else fallback

    a1 = image_direction(b1 + b2, v1)
    a2 = image_direction(b1 - b2, v2)
    return a1, a2, b1, b2


def lgi_k3(r: Pdm, q) -> float:
    """Standard three-time Leggett-Garg combination ``C01 + C12 - C02``.

    ``q`` is the Bloch direction of the dichotomic observable, measured
    in pairs of time steps; each pair correlation pads the unmeasured
    step with the identity.
    """
    _require_single_qubit(r, 3, "the Leggett-Garg combination")
    q = _unit_vector(q, "q")
    qs = _bloch_operator(q)
    eye = np.eye(2, dtype=complex)
    c01 = _correlation(r, (qs, qs, eye))
    c12 = _correlation(r, (eye, qs, qs))
    c02 = _correlation(r, (qs, eye, qs))
    return c01 + c12 - c02


@dataclass(frozen=True)
class LgiVariantResult:
    value: float
    violated: bool


def lgi_full_class(r: Pdm, q) -> dict[str, LgiVariantResult]:
    """All four sign variants of the three-time Leggett-Garg inequality.

    Variant ``(s1, s2)`` evaluates ``s1 C01 + s2 C12 - s1 s2 C02`` and
    flags values above 1; keys are ``"++", "+-", "-+", "--"`` for the
    signs of (s1, s2).
    """
    _require_single_qubit(r, 3, "the Leggett-Garg family")
    q = _unit_vector(q, "q")
    qs = _bloch_operator(q)
    eye = np.eye(2, dtype=complex)
    c01 = _correlation(r, (qs, qs, eye))
    c12 = _correlation(r, (eye, qs, qs))
    c02 = _correlation(r, (qs, eye, qs))
    out: dict[str, LgiVariantResult] = {}
    for name, (s1, s2) in zip(LGI_VARIANTS, ((1, 1), (1, -1), (-1, 1), (-1, -1))):
        value = s1 * c01 + s2 * c12 - s1 * s2 * c02
        out[name] = LgiVariantResult(value=value, violated=value > 1.0 + LGI_VIOLATION_ATOL)
    return out


@dataclass(frozen=True)
class NonclassicalityReport:
    """Aggregated temporal non-classicality verdicts for one scenario.

    ``chsh_max`` is only defined for two-step scenarios and
    ``lgi_values`` only for three-step ones; the other is ``None``.
    """

    negativity: float
    psd: bool
    mr_certificate: MrCertificate
    entanglement: TemporalEntanglement
    chsh_max: float | None
    lgi_values: dict[str, float] | None


def nonclassicality_report(
    rho, channels: Sequence[QuantumChannel], lgi_axis=None
) -> NonclassicalityReport:
    """Build the PDM for a (state, channels) scenario and judge it.

    ``channels`` holds one channel per evolution interval (one for two
    steps, two for three).  ``lgi_axis`` picks the dichotomic observable
    for the three-step Leggett-Garg family (default z).
    """
    channels = tuple(channels)
    if len(channels) not in (1, 2):
        raise DimensionMismatchError("scenario needs one or two channels (2 or 3 time steps)")
    r = pdm_two_step(rho, channels[0])
    for ch in channels[1:]:
        r = pdm_extend(r, ch)

    neg = negativity(r)
    psd = _min_eigenvalue(r) >= -PSD_ATOL
    if psd != (neg == 0.0):
        raise NumericalInconsistencyError(
            f"positivity at tolerance ({psd}) conflicts with negativity {neg:.3e}"
        )
    cert = mr_certificate(r)

    if r.steps == 2:
        ent = temporal_entanglement(r)
        best_chsh = chsh_max(r) if r.step_dims == (2, 2) else None
        lgi = None
    else:
        ent = (
            TemporalEntanglement.ENTANGLED_BY_NEGATIVITY
            if neg > 0.0
            else TemporalEntanglement.PPT_INCONCLUSIVE
        )
        best_chsh = None
        axis = np.array([0.0, 0.0, 1.0]) if lgi_axis is None else lgi_axis
        lgi = {name: res.value for name, res in lgi_full_class(r, axis).items()}
    return NonclassicalityReport(
        negativity=neg,
        psd=psd,
        mr_certificate=cert,
        entanglement=ent,
        chsh_max=best_chsh,
        lgi_values=lgi,
    )
