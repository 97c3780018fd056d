"""Spatiotemporal Born-rule quasiprobabilities and their disturbance split.

For sequential projective measurements the Born rule applied to a PDM
yields a quasiprobability table Q.  Q decomposes as the Lueders-von
Neumann sequential-measurement probability P plus a disturbance table D,
and D vanishes identically exactly when the no-signaling-in-time (NSIT)
conditions, and hence macrorealism, hold for that measurement choice.
This module computes Q, P, D (with its four three-step subterms), the
NSIT violation quantifiers, and a per-condition NSIT report.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .channels import QuantumChannel, apply_channel
from .errors import DimensionMismatchError, NumericalInconsistencyError
from .linalg import (
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    as_matrix,
    dagger,
    hermitian_eig,
    max_abs,
    tensor_product,
)
from .pdm import Pdm, validate_density_matrix

PROJECTOR_ATOL = 1e-10
PROBABILITY_CLAMP = 1e-12
IMAG_ATOL = 1e-10
TABLE_SUM_ATOL = 1e-10
DECOMPOSITION_ATOL = 1e-12
NSIT_SATISFIED_ATOL = 1e-9
EIGENVALUE_CLUSTER_GAP = 1e-8

NSIT_CONDITIONS = ("0bar12", "01bar2", "1bar2", "0bar2", "0bar1")


@dataclass(frozen=True)
class ProjectiveMeasurement:
    """A complete set of mutually orthogonal projectors for one time step."""

    projectors: tuple[np.ndarray, ...]

    def __post_init__(self):
        ps = tuple(as_matrix(p) for p in self.projectors)
        if not ps:
            raise ValueError("a measurement needs at least one projector")
        d = ps[0].shape[0]
        if any(p.shape != (d, d) for p in ps):
            raise DimensionMismatchError("projectors must share one dimension")
        for a, p in enumerate(ps):
            if max_abs(p - dagger(p)) > PROJECTOR_ATOL:
                raise ValueError(f"projector {a} is not Hermitian")
            if max_abs(p @ p - p) > PROJECTOR_ATOL:
                raise ValueError(f"projector {a} is not idempotent")
            for b in range(a):
                if max_abs(ps[b] @ p) > PROJECTOR_ATOL:
                    raise ValueError(f"projectors {b} and {a} are not orthogonal")
        if max_abs(sum(ps) - np.eye(d)) > PROJECTOR_ATOL:
            raise ValueError("projectors do not sum to the identity")
        frozen = []
        for p in ps:
            p = p.copy()
            p.flags.writeable = False
            frozen.append(p)
        object.__setattr__(self, "projectors", tuple(frozen))

    @property
    def dim(self) -> int:
        return self.projectors[0].shape[0]

    @property
    def outcomes(self) -> int:
        return len(self.projectors)


def measurement_from_observable(obs, gap: float = EIGENVALUE_CLUSTER_GAP) -> ProjectiveMeasurement:
    """Eigenspace projectors of a Hermitian observable.

    Eigenvalues closer than ``gap`` are merged into one (possibly
    degenerate) projector; outcomes are ordered by descending
    eigenvalue, so outcome 0 belongs to the largest eigenvalue.
    """
    eig = hermitian_eig(obs)
    w, v = eig.eigenvalues, eig.eigenvectors
    clusters: list[list[int]] = [[0]]
    for i in range(1, w.size):
        if w[i] - w[clusters[-1][-1]] <= gap:
            clusters[-1].append(i)
        else:
            clusters.append([i])
    projectors = []
    for idx in reversed(clusters):
        cols = v[:, idx]
        projectors.append(cols @ dagger(cols))
    return ProjectiveMeasurement(tuple(projectors))


def bloch_measurement(theta: float, phi: float = 0.0) -> ProjectiveMeasurement:
    """Qubit measurement along the Bloch direction ``(theta, phi)``.

    Outcome 0 is the projector aligned with the axis (+1 eigenvalue).
    """
    n = np.array(
        [math.cos(phi) * math.sin(theta), math.sin(phi) * math.sin(theta), math.cos(theta)]
    )
    n_sigma = n[0] * PAULI_X + n[1] * PAULI_Y + n[2] * PAULI_Z
    eye = np.eye(2, dtype=complex)
    return ProjectiveMeasurement(((eye + n_sigma) / 2.0, (eye - n_sigma) / 2.0))


def pauli_axis_measurement(axis: str) -> ProjectiveMeasurement:
    """Qubit measurement along the x, y, or z axis."""
    theta_phi = {"x": (math.pi / 2, 0.0), "y": (math.pi / 2, math.pi / 2), "z": (0.0, 0.0)}
    if axis not in theta_phi:
        raise ValueError(f"axis must be one of 'x', 'y', 'z', got {axis!r}")
    return bloch_measurement(*theta_phi[axis])


@dataclass(frozen=True)
class QuasiDistribution:
    """Real-valued outcome table with one axis per time step.

    Quasiprobability and probability tables sum to 1; disturbance tables
    sum to 0.  Entries of a quasiprobability may be negative.
    """

    values: np.ndarray

    @property
    def shape(self) -> tuple[int, ...]:
        return self.values.shape

    def __getitem__(self, idx):
        return self.values[idx]

    def total(self) -> float:
        return float(self.values.sum())


def _real_table(raw: np.ndarray, expected_sum: float, what: str) -> np.ndarray:
    imag = max_abs(raw.imag)
    if imag > IMAG_ATOL:
        raise NumericalInconsistencyError(f"{what} has imaginary residue {imag:.3e}")
    table = raw.real.copy()
    dev = abs(table.sum() - expected_sum)
    if dev > TABLE_SUM_ATOL:
        raise NumericalInconsistencyError(
            f"{what} sums to {table.sum()!r}, expected {expected_sum} (off by {dev:.3e})"
        )
    table.flags.writeable = False
    return table


def _clamp_probabilities(table: np.ndarray, what: str) -> np.ndarray:
    low = float(table.min())
    if low < -PROBABILITY_CLAMP:
        raise NumericalInconsistencyError(f"{what} has entry {low:.3e} below -{PROBABILITY_CLAMP}")
    out = np.maximum(table, 0.0)
    out.flags.writeable = False
    return out


def _dephase(op: np.ndarray, projector: np.ndarray) -> np.ndarray:
    # Two-outcome coarse graining {P, I - P}, also used for measurements
    # with more outcomes: the complement is lumped into one block.
    comp = np.eye(op.shape[0]) - projector
    return projector @ op @ projector + comp @ op @ comp


def _check_two_step_dims(rho, channel, m0, m1):
    if rho.shape[0] != channel.dim_in:
        raise DimensionMismatchError("state and channel dimensions differ")
    if m0.dim != channel.dim_in or m1.dim != channel.dim_out:
        raise DimensionMismatchError("measurement dimensions do not match the scenario")


def lueders_two(
    rho, channel: QuantumChannel, m0: ProjectiveMeasurement, m1: ProjectiveMeasurement
) -> QuasiDistribution:
    """Sequential-measurement probabilities ``Tr[E(P_i rho P_i) P_j]``."""
    rho = validate_density_matrix(rho)
    _check_two_step_dims(rho, channel, m0, m1)
    raw = np.empty((m0.outcomes, m1.outcomes), dtype=complex)
    for i, p0 in enumerate(m0.projectors):
        evolved = apply_channel(channel, p0 @ rho @ p0, validate=False)
        for j, p1 in enumerate(m1.projectors):
            raw[i, j] = np.trace(evolved @ p1)
    table = _real_table(raw, 1.0, "sequential-measurement table")
    return QuasiDistribution(_clamp_probabilities(table, "sequential-measurement table"))


def margenau_hill_two(
    rho, channel: QuantumChannel, m0: ProjectiveMeasurement, m1: ProjectiveMeasurement
) -> QuasiDistribution:
    """Margenau-Hill table ``(1/2) Tr[E(rho P_i + P_i rho) P_j]``.

    Symmetrized (anticommutator) quasiprobability for the two sequential
    observables; equals the Born rule applied to the two-step PDM.
    """
    rho = validate_density_matrix(rho)
    _check_two_step_dims(rho, channel, m0, m1)
    raw = np.empty((m0.outcomes, m1.outcomes), dtype=complex)
    for i, p0 in enumerate(m0.projectors):
        evolved = apply_channel(channel, rho @ p0 + p0 @ rho, validate=False)
        for j, p1 in enumerate(m1.projectors):
            raw[i, j] = 0.5 * np.trace(evolved @ p1)
    return QuasiDistribution(_real_table(raw, 1.0, "Margenau-Hill table"))


def born_quasi_from_pdm(r: Pdm, measurements: Sequence[ProjectiveMeasurement]) -> QuasiDistribution:
    """Born rule on a PDM: ``Q(i..) = Tr[R (P_i (x) P_j (x) ...)]``."""
    if len(measurements) != r.steps:
        raise DimensionMismatchError(
            f"need one measurement per step, got {len(measurements)} for {r.steps}"
        )
    for k, m in enumerate(measurements):
        if m.dim != r.step_dims[k]:
            raise DimensionMismatchError(f"measurement {k} dimension does not match step {k}")
    shape = tuple(m.outcomes for m in measurements)
    raw = np.empty(shape, dtype=complex)
    for idx in np.ndindex(shape):
        op = tensor_product(*(m.projectors[i] for m, i in zip(measurements, idx)))
        raw[idx] = np.trace(r.matrix @ op)
    return QuasiDistribution(_real_table(raw, 1.0, "Born-rule table"))


def born_quasi_two(
    r01: Pdm, m0: ProjectiveMeasurement, m1: ProjectiveMeasurement
) -> QuasiDistribution:
    """Two-step Born-rule quasiprobability ``Tr[R (P_i (x) P_j)]``."""
    if r01.steps != 2:
        raise DimensionMismatchError(f"expected a two-step PDM, got {r01.steps} steps")
    return born_quasi_from_pdm(r01, (m0, m1))


def disturbance_two(
    rho, channel: QuantumChannel, m0: ProjectiveMeasurement, m1: ProjectiveMeasurement
) -> QuasiDistribution:
    """Measurement-disturbance table for two steps.

    Direct form ``(1/2) Tr[E(rho - rho_dephased_i) P_j]``, where the
    dephasing is the two-outcome coarse graining by ``{P_i, I - P_i}``.
    Cross-checked against the independent subtraction route
    (Margenau-Hill minus Lueders); disagreement raises
    ``NumericalInconsistencyError``.
    """
    rho = validate_density_matrix(rho)
    _check_two_step_dims(rho, channel, m0, m1)
    raw = np.empty((m0.outcomes, m1.outcomes), dtype=complex)
    for i, p0 in enumerate(m0.projectors):
        diff = apply_channel(channel, rho - _dephase(rho, p0), validate=False)
        for j, p1 in enumerate(m1.projectors):
            raw[i, j] = 0.5 * np.trace(diff @ p1)
    table = _real_table(raw, 0.0, "disturbance table")

    subtraction = margenau_hill_two(rho, channel, m0, m1).values - lueders_two(
        rho, channel, m0, m1
    ).values
    gap = max_abs(table - subtraction)
    if gap > DECOMPOSITION_ATOL:
        raise NumericalInconsistencyError(
            f"disturbance routes disagree by {gap:.3e} (direct vs subtraction)"
        )
    return QuasiDistribution(table)


def nsit_quantifier_two(
    rho, channel: QuantumChannel, m0: ProjectiveMeasurement, m1: ProjectiveMeasurement
) -> float:
    """Total absolute disturbance over all outcome pairs.

    Zero exactly when no-signaling-in-time (and hence macrorealism)
    holds for this measurement choice.
    """
    return float(np.abs(disturbance_two(rho, channel, m0, m1).values).sum())


def nsit_deviation_two(
    rho, channel: QuantumChannel, m0: ProjectiveMeasurement, m1: ProjectiveMeasurement
) -> float:
    """Largest violation of the two-step no-signaling condition.

    Compares the undisturbed later-time statistics with the earlier
    measurement marginalized out of the sequential table.
    """
    rho = validate_density_matrix(rho)
    _check_two_step_dims(rho, channel, m0, m1)
    p01 = lueders_two(rho, channel, m0, m1).values
    evolved = apply_channel(channel, rho, validate=False)
    p1 = np.array([np.trace(evolved @ p).real for p in m1.projectors])
    return float(np.abs(p1 - p01.sum(axis=0)).max())


def _check_three_step_dims(rho, e1, e2, m0, m1, m2):
    if rho.shape[0] != e1.dim_in:
        raise DimensionMismatchError("state and first channel dimensions differ")
    if e1.dim_out != e2.dim_in:
        raise DimensionMismatchError("channel dimensions do not chain")
    if m0.dim != e1.dim_in or m1.dim != e1.dim_out or m2.dim != e2.dim_out:
        raise DimensionMismatchError("measurement dimensions do not match the scenario")


def born_quasi_three(
    rho,
    e1: QuantumChannel,
    e2: QuantumChannel,
    m0: ProjectiveMeasurement,
    m1: ProjectiveMeasurement,
    m2: ProjectiveMeasurement,
) -> QuasiDistribution:
    """Three-step spatiotemporal Born-rule quasiprobability.

    Nested anticommutator form
    ``Q(i,j,k) = (1/4) Tr[E2({E1({rho, P_i}), P_j}) P_k]``,
    which agrees with the Born rule on the three-step PDM.
    """
    rho = validate_density_matrix(rho)
    _check_three_step_dims(rho, e1, e2, m0, m1, m2)
    raw = np.empty((m0.outcomes, m1.outcomes, m2.outcomes), dtype=complex)
    for i, p0 in enumerate(m0.projectors):
        inner = apply_channel(e1, rho @ p0 + p0 @ rho, validate=False)
        for j, p1 in enumerate(m1.projectors):
            outer = apply_channel(e2, inner @ p1 + p1 @ inner, validate=False)
            for k, p2 in enumerate(m2.projectors):
                raw[i, j, k] = 0.25 * np.trace(outer @ p2)
    return QuasiDistribution(_real_table(raw, 1.0, "three-step Born-rule table"))


def lueders_three(
    rho,
    e1: QuantumChannel,
    e2: QuantumChannel,
    m0: ProjectiveMeasurement,
    m1: ProjectiveMeasurement,
    m2: ProjectiveMeasurement,
) -> QuasiDistribution:
    """Three-step sequential-measurement probabilities.

    ``P(i,j,k) = Tr[P_k E2(P_j E1(P_i rho P_i) P_j)]``.
    """
    rho = validate_density_matrix(rho)
    _check_three_step_dims(rho, e1, e2, m0, m1, m2)
    raw = np.empty((m0.outcomes, m1.outcomes, m2.outcomes), dtype=complex)
    for i, p0 in enumerate(m0.projectors):
        evolved = apply_channel(e1, p0 @ rho @ p0, validate=False)
        for j, p1 in enumerate(m1.projectors):
            twice = apply_channel(e2, p1 @ evolved @ p1, validate=False)
            for k, p2 in enumerate(m2.projectors):
                raw[i, j, k] = np.trace(twice @ p2)
    table = _real_table(raw, 1.0, "three-step sequential table")
    return QuasiDistribution(_clamp_probabilities(table, "three-step sequential table"))


@dataclass(frozen=True)
class DisturbanceBreakdown3:
    """Three-step disturbance split into its four signaling subterms.

    Each field is a real table over outcomes ``(i, j, k)``:

    - ``d_02_012bar``: effect of dephasing the middle step on the final
      statistics, conditioned on the first projective outcome.
    - ``d_2_12bar``: effect of dephasing the middle step on the final
      statistics with no earlier measurement.
    - ``d_012bar_02bar``: middle-step dephasing sensitivity of the
      first-step-dephased state.
    - ``d_12_012bar``: effect of the first measurement on the joint
      statistics of the later two steps.

    ``total`` is their entrywise sum and equals the Born-rule table
    minus the sequential-measurement table.
    """

    d_02_012bar: np.ndarray
    d_2_12bar: np.ndarray
    d_012bar_02bar: np.ndarray
    d_12_012bar: np.ndarray
    total: np.ndarray


def disturbance_three(
    rho,
    e1: QuantumChannel,
    e2: QuantumChannel,
    m0: ProjectiveMeasurement,
    m1: ProjectiveMeasurement,
    m2: ProjectiveMeasurement,
) -> DisturbanceBreakdown3:
    """Four-part disturbance decomposition for three sequential steps.

    The subterm sum is verified entrywise against the independently
    computed difference between the Born-rule quasiprobability and the
    sequential-measurement probability; disagreement raises
    ``NumericalInconsistencyError``.

    Dephasing always uses the two-outcome coarse graining
    ``O -> P O P + (I - P) O (I - P)``, also when a measurement has more
    than two outcomes.
    """
    rho = validate_density_matrix(rho)
    _check_three_step_dims(rho, e1, e2, m0, m1, m2)
    shape = (m0.outcomes, m1.outcomes, m2.outcomes)
    t_02 = np.empty(shape, dtype=complex)
    t_2 = np.empty(shape, dtype=complex)
    t_012 = np.empty(shape, dtype=complex)
    t_12 = np.empty(shape, dtype=complex)

    e1_rho = apply_channel(e1, rho, validate=False)
    for i, p0 in enumerate(m0.projectors):
        e1_proj = apply_channel(e1, p0 @ rho @ p0, validate=False)
        e1_deph = apply_channel(e1, _dephase(rho, p0), validate=False)
        for j, p1 in enumerate(m1.projectors):
            a = apply_channel(e2, e1_proj - _dephase(e1_proj, p1), validate=False)
            b = apply_channel(e2, e1_rho - _dephase(e1_rho, p1), validate=False)
            c = apply_channel(e2, _dephase(e1_deph, p1) - e1_deph, validate=False)
            d = apply_channel(e2, p1 @ (e1_rho - e1_deph) @ p1, validate=False)
            for k, p2 in enumerate(m2.projectors):
                t_02[i, j, k] = 0.5 * np.trace(a @ p2)
                t_2[i, j, k] = 0.25 * np.trace(b @ p2)
                t_012[i, j, k] = 0.25 * np.trace(c @ p2)
                t_12[i, j, k] = 0.5 * np.trace(d @ p2)

    # Dephasing and channels preserve the trace, so each subterm sums to 0.
    d_02 = _real_table(t_02, 0.0, "disturbance subterm d_02_012bar")
    d_2 = _real_table(t_2, 0.0, "disturbance subterm d_2_12bar")
    d_012 = _real_table(t_012, 0.0, "disturbance subterm d_012bar_02bar")
    d_12 = _real_table(t_12, 0.0, "disturbance subterm d_12_012bar")
    total = d_02 + d_2 + d_012 + d_12

    reference = (
        born_quasi_three(rho, e1, e2, m0, m1, m2).values
        - lueders_three(rho, e1, e2, m0, m1, m2).values
    )
    gap = max_abs(total - reference)
    if gap > DECOMPOSITION_ATOL:
        raise NumericalInconsistencyError(
            f"disturbance subterms disagree with Born-minus-sequential by {gap:.3e}"
        )
    total.flags.writeable = False
    return DisturbanceBreakdown3(
        d_02_012bar=d_02,
        d_2_12bar=d_2,
        d_012bar_02bar=d_012,
        d_12_012bar=d_12,
        total=total,
    )


def nsit_quantifier_three(
    rho,
    e1: QuantumChannel,
    e2: QuantumChannel,
    m0: ProjectiveMeasurement,
    m1: ProjectiveMeasurement,
    m2: ProjectiveMeasurement,
) -> float:
    """Total absolute three-step disturbance, zero iff NSIT holds."""
    return float(np.abs(disturbance_three(rho, e1, e2, m0, m1, m2).total).sum())


@dataclass(frozen=True)
class NsitConditionReport:
    """Per-condition deviations for the three-step NSIT conditions.

    Condition names mark the marginalized (barred) measurement: e.g.
    ``"0bar12"`` compares the later-pair statistics with and without
    the first measurement, ``"1bar2"`` compares the final statistics
    with and without the middle measurement.  ``"0bar2"`` and
    ``"0bar1"`` are consequences of the first three plus the arrow of
    time, reported for completeness.
    """

    deviations: dict[str, float]
    threshold: float = NSIT_SATISFIED_ATOL

    def satisfied(self, name: str) -> bool:
        return self.deviations[name] <= self.threshold

    @property
    def all_satisfied(self) -> bool:
        return all(self.satisfied(name) for name in self.deviations)

    def max_deviation(self) -> float:
        return max(self.deviations.values())


def nsit_condition_report(
    rho,
    e1: QuantumChannel,
    e2: QuantumChannel,
    m0: ProjectiveMeasurement,
    m1: ProjectiveMeasurement,
    m2: ProjectiveMeasurement,
    threshold: float = NSIT_SATISFIED_ATOL,
) -> NsitConditionReport:
    """Evaluate the three-step NSIT conditions from measured statistics.

    All probabilities are computed directly from the sequential
    (Lueders) and single-time Born rules, independently of the
    disturbance tables.
    """
    rho = validate_density_matrix(rho)
    _check_three_step_dims(rho, e1, e2, m0, m1, m2)

    p012 = lueders_three(rho, e1, e2, m0, m1, m2).values
    e1_rho = apply_channel(e1, rho, validate=False)
    e21_rho = apply_channel(e2, e1_rho, validate=False)

    def pair_table(state, channel, ma, mb):
        raw = np.empty((ma.outcomes, mb.outcomes), dtype=complex)
        for a, pa in enumerate(ma.projectors):
            evolved = apply_channel(channel, pa @ state @ pa, validate=False)
            for b, pb in enumerate(mb.projectors):
                raw[a, b] = np.trace(evolved @ pb)
        return _real_table(raw, 1.0, "pair sequential table")

    p12 = pair_table(e1_rho, e2, m1, m2)
    p01 = pair_table(rho, e1, m0, m1)
    raw02 = np.empty((m0.outcomes, m2.outcomes), dtype=complex)
    for i, p0 in enumerate(m0.projectors):
        evolved = apply_channel(e2, apply_channel(e1, p0 @ rho @ p0, validate=False), validate=False)
        for k, p2 in enumerate(m2.projectors):
            raw02[i, k] = np.trace(evolved @ p2)
    p02 = _real_table(raw02, 1.0, "pair sequential table")

    p1 = np.array([np.trace(e1_rho @ p).real for p in m1.projectors])
    p2 = np.array([np.trace(e21_rho @ p).real for p in m2.projectors])

    deviations = {
        "0bar12": float(np.abs(p12 - p012.sum(axis=0)).max()),
        "01bar2": float(np.abs(p02 - p012.sum(axis=1)).max()),
        "1bar2": float(np.abs(p2 - p12.sum(axis=0)).max()),
        "0bar2": float(np.abs(p2 - p02.sum(axis=0)).max()),
        "0bar1": float(np.abs(p1 - p01.sum(axis=0)).max()),
    }
    return NsitConditionReport(deviations=deviations, threshold=threshold)
