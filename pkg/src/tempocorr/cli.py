"""Config-driven scenario runner.

Subcommands:

- ``run <config.json> [--out report.json]``: evaluate one scenario
  end-to-end and emit a JSON report with a fixed field set.
- ``sweep <config.json> <sweep.json> --out curve.csv``: scan one scalar
  parameter over a grid and write the requested outputs as CSV.
- ``selftest``: check the library against the hand-written reference
  matrices and the dual-path identities.

Exit codes: 0 success, 2 validation error, 3 numeric inconsistency.
Complex numbers in configs are ``{"re": ..., "im": ...}`` objects.
``TEMPOCORR_TOL`` may tighten (never loosen) the self-test reporting
thresholds.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, replace
from importlib import resources
from typing import Sequence

import numpy as np

from . import reference
from .channels import (
    QuantumChannel,
    apply_channel,
    apply_channel_via_choi,
    make_depolarizing,
    make_identity,
    make_rabi,
)
from .errors import ConfigError, EigenConvergenceError, NumericalInconsistencyError
from .linalg import PAULI_X, PAULI_Y, PAULI_Z, hermitian_eig, max_abs
from .pdm import Pdm, negativity, pdm_extend, pdm_two_step, validate_density_matrix
from .quasiprob import (
    ProjectiveMeasurement,
    bloch_measurement,
    born_quasi_from_pdm,
    born_quasi_three,
    born_quasi_two,
    disturbance_three,
    disturbance_two,
    lueders_three,
    lueders_two,
    pauli_axis_measurement,
)
from .witness import (
    MrCertificate,
    TemporalEntanglement,
    chsh_max,
    lgi_full_class,
    mr_certificate,
    temporal_entanglement,
)

RUN_DUAL_PATH_ATOL = 1e-12
DEFAULT_REPORT_TOL = 1e-9
TOL_ENV_VAR = "TEMPOCORR_TOL"

REPORT_FIELDS = (
    "steps",
    "step_dims",
    "negativity",
    "eigenvalues",
    "psd",
    "mr_certificate",
    "entanglement",
    "chsh_max",
    "lgi",
    "nsit_quantifier",
    "q_table",
    "p_table",
    "d_table",
)

SWEEP_PARAMETERS = ("eta", "omega_t", "theta1", "theta2")
SWEEP_OUTPUTS = (
    "negativity",
    "chsh_max",
    "n01",
    "n012",
    "k3",
    "lgi_variants",
    "q_table",
    "p_table",
    "d_table",
)

BUNDLED_SCENARIOS = (
    "maximally_mixed_identity",
    "maximally_mixed_depolarizing",
    "pure_depolarizing",
    "rabi_three_step",
    "three_step_identity",
)


def tightened_tolerance(default: float) -> float:
    """Apply the ``TEMPOCORR_TOL`` override; it can only tighten."""
    raw = os.environ.get(TOL_ENV_VAR)
    if raw is None:
        return default
    try:
        value = float(raw)
    except ValueError:
        raise ConfigError(TOL_ENV_VAR, f"not a number: {raw!r}") from None
    if value <= 0:
        raise ConfigError(TOL_ENV_VAR, f"must be positive, got {value}")
    return min(default, value)


# ---------------------------------------------------------------------------
# configuration parsing


def _require(obj: dict, key: str, path: str):
    if key not in obj:
        raise ConfigError(f"{path}.{key}" if path else key, "missing required field")
    return obj[key]


def _as_number(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(path, f"expected a number, got {value!r}")
    return float(value)


def _as_complex(value, path: str) -> complex:
    if not isinstance(value, dict) or set(value) - {"re", "im"}:
        raise ConfigError(path, 'complex entries must be {"re": ..., "im": ...} objects')
    re = _as_number(value.get("re", 0.0), f"{path}.re")
    im = _as_number(value.get("im", 0.0), f"{path}.im")
    return complex(re, im)


def _parse_matrix(value, path: str) -> tuple[tuple[complex, ...], ...]:
    if not isinstance(value, list) or not value:
        raise ConfigError(path, "expected a non-empty list of rows")
    rows = []
    for r, row in enumerate(value):
        if not isinstance(row, list) or len(row) != len(value):
            raise ConfigError(f"{path}[{r}]", "matrix must be square")
        rows.append(tuple(_as_complex(e, f"{path}[{r}][{c}]") for c, e in enumerate(row)))
    return tuple(rows)


def _matrix_json(m: tuple[tuple[complex, ...], ...]) -> list[list[dict]]:
    return [[{"re": e.real, "im": e.imag} for e in row] for row in m]


@dataclass(frozen=True)
class ChannelSpec:
    """Declarative channel description; ``build`` makes the channel."""

    kind: str
    eta: float | None = None
    omega_t: float | None = None
    kraus: tuple[tuple[tuple[complex, ...], ...], ...] | None = None

    @staticmethod
    def parse(obj, path: str) -> "ChannelSpec":
        if not isinstance(obj, dict):
            raise ConfigError(path, "expected an object")
        kind = _require(obj, "type", path)
        if kind == "identity":
            return ChannelSpec(kind="identity")
        if kind == "depolarizing":
            eta = _as_number(_require(obj, "eta", path), f"{path}.eta")
            if not 0.0 <= eta <= 1.0:
                raise ConfigError(f"{path}.eta", f"must lie in [0, 1], got {eta}")
            return ChannelSpec(kind="depolarizing", eta=eta)
        if kind == "unitary_rabi":
            omega_t = _as_number(_require(obj, "omega_t", path), f"{path}.omega_t")
            return ChannelSpec(kind="unitary_rabi", omega_t=omega_t)
        if kind == "kraus":
            ops = _require(obj, "operators", path)
            if not isinstance(ops, list) or not ops:
                raise ConfigError(f"{path}.operators", "expected a non-empty list of matrices")
            kraus = tuple(
                _parse_matrix(op, f"{path}.operators[{n}]") for n, op in enumerate(ops)
            )
            return ChannelSpec(kind="kraus", kraus=kraus)
        raise ConfigError(f"{path}.type", f"unknown channel type {kind!r}")

    def to_json(self) -> dict:
        if self.kind == "identity":
            return {"type": "identity"}
        if self.kind == "depolarizing":
            return {"type": "depolarizing", "eta": self.eta}
        if self.kind == "unitary_rabi":
            return {"type": "unitary_rabi", "omega_t": self.omega_t}
        return {"type": "kraus", "operators": [_matrix_json(k) for k in self.kraus]}

    def build(self, dim: int, path: str) -> QuantumChannel:
        try:
            if self.kind == "identity":
                return make_identity(dim)
            if self.kind == "depolarizing":
                if dim != 2:
                    raise ConfigError(path, "depolarizing channels act on one qubit")
                return make_depolarizing(self.eta)
            if self.kind == "unitary_rabi":
                if dim != 2:
                    raise ConfigError(path, "Rabi unitaries act on one qubit")
                return make_rabi(self.omega_t)
            channel = QuantumChannel(tuple(np.array(k, dtype=complex) for k in self.kraus))
            if channel.dim_in != dim:
                raise ConfigError(path, f"channel dimension {channel.dim_in} does not match {dim}")
            return channel
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(path, str(exc)) from exc


@dataclass(frozen=True)
class MeasurementSpec:
    """Declarative measurement description for one time step."""

    kind: str
    axis: str | None = None
    theta: float | None = None
    phi: float | None = None
    projectors: tuple[tuple[tuple[complex, ...], ...], ...] | None = None

    @staticmethod
    def parse(obj, path: str) -> "MeasurementSpec":
        if not isinstance(obj, dict):
            raise ConfigError(path, "expected an object")
        kind = _require(obj, "type", path)
        if kind == "pauli_axis":
            axis = _require(obj, "axis", path)
            if axis not in ("x", "y", "z"):
                raise ConfigError(f"{path}.axis", f"must be 'x', 'y' or 'z', got {axis!r}")
            return MeasurementSpec(kind="pauli_axis", axis=axis)
        if kind == "bloch":
            theta = _as_number(_require(obj, "theta", path), f"{path}.theta")
            phi = _as_number(obj.get("phi", 0.0), f"{path}.phi")
            return MeasurementSpec(kind="bloch", theta=theta, phi=phi)
        if kind == "projectors":
            ops = _require(obj, "operators", path)
            if not isinstance(ops, list) or not ops:
                raise ConfigError(f"{path}.operators", "expected a non-empty list of matrices")
            projectors = tuple(
                _parse_matrix(op, f"{path}.operators[{n}]") for n, op in enumerate(ops)
            )
            return MeasurementSpec(kind="projectors", projectors=projectors)
        raise ConfigError(f"{path}.type", f"unknown measurement type {kind!r}")

    def to_json(self) -> dict:
        if self.kind == "pauli_axis":
            return {"type": "pauli_axis", "axis": self.axis}
        if self.kind == "bloch":
            return {"type": "bloch", "theta": self.theta, "phi": self.phi}
        return {"type": "projectors", "operators": [_matrix_json(p) for p in self.projectors]}

    def build(self, dim: int, path: str) -> ProjectiveMeasurement:
        try:
            if self.kind == "pauli_axis":
                if dim != 2:
                    raise ConfigError(path, "Pauli-axis measurements act on one qubit")
                return pauli_axis_measurement(self.axis)
            if self.kind == "bloch":
                if dim != 2:
                    raise ConfigError(path, "Bloch measurements act on one qubit")
                return bloch_measurement(self.theta, self.phi)
            meas = ProjectiveMeasurement(tuple(np.array(p, dtype=complex) for p in self.projectors))
            if meas.dim != dim:
                raise ConfigError(path, f"measurement dimension {meas.dim} does not match {dim}")
            return meas
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(path, str(exc)) from exc

    def bloch_axis(self) -> np.ndarray | None:
        """Bloch direction of the measured observable, when inferable."""
        if self.kind == "pauli_axis":
            return {
                "x": np.array([1.0, 0.0, 0.0]),
                "y": np.array([0.0, 1.0, 0.0]),
                "z": np.array([0.0, 0.0, 1.0]),
            }[self.axis]
        if self.kind == "bloch":
            return np.array(
                [
                    math.cos(self.phi) * math.sin(self.theta),
                    math.sin(self.phi) * math.sin(self.theta),
                    math.cos(self.theta),
                ]
            )
        return None


@dataclass(frozen=True)
class ScenarioConfig:
    """Parsed scenario: initial state, channels, per-step measurements."""

    steps: int
    bloch: tuple[float, float, float] | None
    matrix: tuple[tuple[complex, ...], ...] | None
    channels: tuple[ChannelSpec, ...]
    measurements: tuple[MeasurementSpec, ...]

    @staticmethod
    def parse(obj) -> "ScenarioConfig":
        if not isinstance(obj, dict):
            raise ConfigError("config", "top level must be an object")
        steps = _require(obj, "steps", "")
        if steps not in (2, 3):
            raise ConfigError("steps", f"must be 2 or 3, got {steps!r}")

        state = _require(obj, "initial_state", "")
        if not isinstance(state, dict) or len(set(state) & {"bloch", "matrix"}) != 1:
            raise ConfigError("initial_state", 'needs exactly one of "bloch" or "matrix"')
        bloch = matrix = None
        if "bloch" in state:
            vec = state["bloch"]
            if not isinstance(vec, list) or len(vec) != 3:
                raise ConfigError("initial_state.bloch", "expected three components")
            bloch = tuple(_as_number(v, f"initial_state.bloch[{i}]") for i, v in enumerate(vec))
            if np.linalg.norm(bloch) > 1.0 + 1e-10:
                raise ConfigError(
                    "initial_state.bloch", f"vector norm {np.linalg.norm(bloch)!r} exceeds 1"
                )
        else:
            matrix = _parse_matrix(state["matrix"], "initial_state.matrix")

        channels_obj = _require(obj, "channels", "")
        if not isinstance(channels_obj, list):
            raise ConfigError("channels", "expected a list")
        if len(channels_obj) != steps - 1:
            raise ConfigError(
                "channels", f"need {steps - 1} channels for {steps} steps, got {len(channels_obj)}"
            )
        channels = tuple(
            ChannelSpec.parse(c, f"channels[{i}]") for i, c in enumerate(channels_obj)
        )

        meas_obj = _require(obj, "measurements", "")
        if not isinstance(meas_obj, list):
            raise ConfigError("measurements", "expected a list")
        if len(meas_obj) != steps:
            raise ConfigError(
                "measurements", f"need {steps} measurements, got {len(meas_obj)}"
            )
        measurements = tuple(
            MeasurementSpec.parse(m, f"measurements[{i}]") for i, m in enumerate(meas_obj)
        )

        config = ScenarioConfig(
            steps=steps, bloch=bloch, matrix=matrix, channels=channels, measurements=measurements
        )
        config.build_all()  # fail fast on semantic problems, with field paths
        return config

    def to_json(self) -> dict:
        state = (
            {"bloch": list(self.bloch)}
            if self.bloch is not None
            else {"matrix": _matrix_json(self.matrix)}
        )
        return {
            "steps": self.steps,
            "initial_state": state,
            "channels": [c.to_json() for c in self.channels],
            "measurements": [m.to_json() for m in self.measurements],
        }

    def build_state(self) -> np.ndarray:
        if self.bloch is not None:
            x, y, z = self.bloch
            rho = 0.5 * (np.eye(2, dtype=complex) + x * PAULI_X + y * PAULI_Y + z * PAULI_Z)
        else:
            rho = np.array(self.matrix, dtype=complex)
        try:
            return validate_density_matrix(rho)
        except ValueError as exc:
            raise ConfigError("initial_state", str(exc)) from exc

    def build_all(self):
        rho = self.build_state()
        dim = rho.shape[0]
        channels = tuple(
            spec.build(dim, f"channels[{i}]") for i, spec in enumerate(self.channels)
        )
        measurements = tuple(
            spec.build(dim, f"measurements[{i}]") for i, spec in enumerate(self.measurements)
        )
        return rho, channels, measurements

    def with_parameter(self, name: str, value: float) -> "ScenarioConfig":
        if name == "eta":
            if not any(c.kind == "depolarizing" for c in self.channels):
                raise ConfigError("sweep.parameter", "no depolarizing channel to sweep 'eta'")
            channels = tuple(
                replace(c, eta=value) if c.kind == "depolarizing" else c for c in self.channels
            )
            return replace(self, channels=channels)
        if name == "omega_t":
            if not any(c.kind == "unitary_rabi" for c in self.channels):
                raise ConfigError("sweep.parameter", "no Rabi channel to sweep 'omega_t'")
            channels = tuple(
                replace(c, omega_t=value) if c.kind == "unitary_rabi" else c
                for c in self.channels
            )
            return replace(self, channels=channels)
        if name in ("theta1", "theta2"):
            index = 0 if name == "theta1" else 1
            if self.measurements[index].kind != "bloch":
                raise ConfigError(
                    "sweep.parameter", f"measurement {index} is not of type 'bloch'"
                )
            measurements = list(self.measurements)
            measurements[index] = replace(measurements[index], theta=value)
            return replace(self, measurements=tuple(measurements))
        raise ConfigError(
            "sweep.parameter", f"unknown parameter {name!r}; expected one of {SWEEP_PARAMETERS}"
        )


@dataclass(frozen=True)
class SweepSpec:
    parameter: str
    start: float
    stop: float
    count: int
    outputs: tuple[str, ...]

    @staticmethod
    def parse(obj) -> "SweepSpec":
        if not isinstance(obj, dict):
            raise ConfigError("sweep", "top level must be an object")
        parameter = _require(obj, "parameter", "sweep")
        if parameter not in SWEEP_PARAMETERS:
            raise ConfigError(
                "sweep.parameter", f"unknown parameter {parameter!r}; expected one of {SWEEP_PARAMETERS}"
            )
        rng = _require(obj, "range", "sweep")
        if not isinstance(rng, dict):
            raise ConfigError("sweep.range", "expected an object")
        start = _as_number(_require(rng, "start", "sweep.range"), "sweep.range.start")
        stop = _as_number(_require(rng, "stop", "sweep.range"), "sweep.range.stop")
        count = _require(rng, "count", "sweep.range")
        if isinstance(count, bool) or not isinstance(count, int) or count < 2:
            raise ConfigError("sweep.range.count", f"must be an integer >= 2, got {count!r}")
        if not start < stop:
            raise ConfigError("sweep.range", f"start {start} must be below stop {stop}")
        outputs = _require(obj, "outputs", "sweep")
        if not isinstance(outputs, list) or not outputs:
            raise ConfigError("sweep.outputs", "expected a non-empty list")
        for o in outputs:
            if o not in SWEEP_OUTPUTS:
                raise ConfigError(
                    "sweep.outputs", f"unknown output {o!r}; expected from {SWEEP_OUTPUTS}"
                )
        return SweepSpec(
            parameter=parameter, start=start, stop=stop, count=count, outputs=tuple(outputs)
        )


# ---------------------------------------------------------------------------
# scenario evaluation


class ScenarioEvaluation:
    """All quantities for one concrete scenario, computed once."""

    def __init__(self, config: ScenarioConfig):
        self.config = config
        self.rho, self.channels, self.measurements = config.build_all()
        r = pdm_two_step(self.rho, self.channels[0])
        for ch in self.channels[1:]:
            r = pdm_extend(r, ch)
        self.pdm: Pdm = r
        self._tables = None

    @property
    def tables(self):
        if self._tables is None:
            if self.config.steps == 2:
                q = born_quasi_two(self.pdm, *self.measurements)
                p = lueders_two(self.rho, self.channels[0], *self.measurements)
                d = disturbance_two(self.rho, self.channels[0], *self.measurements)
                gap = max_abs(q.values - (p.values + d.values))
            else:
                q = born_quasi_three(self.rho, *self.channels, *self.measurements)
                p = lueders_three(self.rho, *self.channels, *self.measurements)
                d = disturbance_three(self.rho, *self.channels, *self.measurements)
                q_pdm = born_quasi_from_pdm(self.pdm, self.measurements)
                gap = max_abs(q.values - q_pdm.values)
            if gap > RUN_DUAL_PATH_ATOL:
                raise NumericalInconsistencyError(
                    f"quasiprobability routes disagree by {gap:.3e}"
                )
            self._tables = (q, p, d)
        return self._tables

    @property
    def d_values(self) -> np.ndarray:
        d = self.tables[2]
        return d.total if self.config.steps == 3 else d.values

    def nsit_quantifier(self) -> float:
        return float(np.abs(self.d_values).sum())

    def lgi_axis(self) -> np.ndarray:
        axis = self.config.measurements[0].bloch_axis()
        return axis if axis is not None else np.array([0.0, 0.0, 1.0])

    def lgi(self) -> dict[str, float]:
        return {k: v.value for k, v in lgi_full_class(self.pdm, self.lgi_axis()).items()}

    def k3(self) -> float:
        lgi = self.lgi()
        return lgi["++"]

    def entanglement(self) -> TemporalEntanglement:
        if self.config.steps == 2:
            return temporal_entanglement(self.pdm)
        if negativity(self.pdm) > 0.0:
            return TemporalEntanglement.ENTANGLED_BY_NEGATIVITY
        return TemporalEntanglement.PPT_INCONCLUSIVE

    def report(self) -> dict:
        eigenvalues = hermitian_eig(self.pdm.matrix).eigenvalues
        neg = negativity(self.pdm)
        q, p, _ = self.tables
        return {
            "steps": self.config.steps,
            "step_dims": list(self.pdm.step_dims),
            "negativity": neg,
            "eigenvalues": [float(w) for w in eigenvalues],
            "psd": bool(neg == 0.0),
            "mr_certificate": mr_certificate(self.pdm).value,
            "entanglement": self.entanglement().value,
            "chsh_max": chsh_max(self.pdm) if self.config.steps == 2 else None,
            "lgi": self.lgi() if self.config.steps == 3 else None,
            "nsit_quantifier": self.nsit_quantifier(),
            "q_table": q.values.tolist(),
            "p_table": p.values.tolist(),
            "d_table": self.d_values.tolist(),
        }


# ---------------------------------------------------------------------------
# sweep output columns


def _table_columns(prefix: str, shape: tuple[int, ...]) -> list[str]:
    return [f"{prefix}_{''.join(str(i) for i in idx)}" for idx in np.ndindex(shape)]


def sweep_columns(spec: SweepSpec, evaluation: ScenarioEvaluation) -> list[str]:
    steps = evaluation.config.steps
    columns: list[str] = []
    for output in spec.outputs:
        if output in ("chsh_max", "n01") and steps != 2:
            raise ConfigError("sweep.outputs", f"{output!r} needs a two-step scenario")
        if output in ("n012", "k3", "lgi_variants") and steps != 3:
            raise ConfigError("sweep.outputs", f"{output!r} needs a three-step scenario")
        if output == "lgi_variants":
            columns += ["lgi_pp", "lgi_pm", "lgi_mp", "lgi_mm"]
        elif output in ("q_table", "p_table", "d_table"):
            shape = evaluation.tables[0].shape
            columns += _table_columns(output[0], shape)
        else:
            columns.append(output)
    return columns


def sweep_values(spec: SweepSpec, evaluation: ScenarioEvaluation) -> list[float]:
    values: list[float] = []
    for output in spec.outputs:
        if output == "negativity":
            values.append(negativity(evaluation.pdm))
        elif output == "chsh_max":
            values.append(chsh_max(evaluation.pdm))
        elif output in ("n01", "n012"):
            values.append(evaluation.nsit_quantifier())
        elif output == "k3":
            values.append(evaluation.k3())
        elif output == "lgi_variants":
            lgi = evaluation.lgi()
            values += [lgi["++"], lgi["+-"], lgi["-+"], lgi["--"]]
        elif output == "q_table":
            values += evaluation.tables[0].values.ravel().tolist()
        elif output == "p_table":
            values += evaluation.tables[1].values.ravel().tolist()
        elif output == "d_table":
            values += evaluation.d_values.ravel().tolist()
    return values


def _fmt(x: float) -> str:
    return f"{float(x) + 0.0:.12g}"


# ---------------------------------------------------------------------------
# bundled scenarios and file loading


def scenario_path(name: str) -> str:
    """Filesystem path of a bundled scenario config."""
    if name not in BUNDLED_SCENARIOS:
        raise ConfigError("scenario", f"unknown bundled scenario {name!r}")
    return str(resources.files("tempocorr") / "scenarios" / f"{name}.json")


def _load_json(path: str, what: str) -> object:
    if not os.path.exists(path) and os.path.basename(path) == path:
        stem = path[:-5] if path.endswith(".json") else path
        if stem in BUNDLED_SCENARIOS:
            path = scenario_path(stem)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(what, f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(what, f"invalid JSON in {path}: {exc}") from exc


# ---------------------------------------------------------------------------
# subcommands


def run_command(config_path: str, out_path: str | None = None) -> int:
    config = ScenarioConfig.parse(_load_json(config_path, "config"))
    report = ScenarioEvaluation(config).report()
    text = json.dumps(report, indent=2) + "\n"
    sys.stdout.write(text)
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    return 0


def sweep_command(config_path: str, sweep_path: str, out_path: str) -> int:
    config = ScenarioConfig.parse(_load_json(config_path, "config"))
    spec = SweepSpec.parse(_load_json(sweep_path, "sweep"))

    grid = np.linspace(spec.start, spec.stop, spec.count)
    first = ScenarioEvaluation(config.with_parameter(spec.parameter, float(grid[0])))
    columns = sweep_columns(spec, first)

    lines = ["param," + ",".join(columns)]
    for value in grid:
        evaluation = ScenarioEvaluation(config.with_parameter(spec.parameter, float(value)))
        row = sweep_values(spec, evaluation)
        if len(row) != len(columns):
            raise NumericalInconsistencyError("sweep row width drifted across the grid")
        lines.append(",".join([_fmt(value)] + [_fmt(v) for v in row]))
    text = "\n".join(lines) + "\n"
    with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    sys.stdout.write(f"wrote {out_path} ({spec.count} rows, {len(columns)} columns)\n")
    return 0


def _selftest_checks():
    eye2 = np.eye(2, dtype=complex)
    mixed = eye2 / 2.0
    pure = np.diag([1.0, 0.0]).astype(complex)
    etas = (0.0, 0.25, 0.5, 2.0 / 3.0, 1.0)
    identity = make_identity()

    def dev_two_step_identity():
        r = pdm_two_step(mixed, identity)
        return max_abs(r.matrix - reference.maximally_mixed_identity_pdm())

    def dev_two_step_identity_spectrum():
        r = pdm_two_step(mixed, identity)
        w = hermitian_eig(r.matrix).eigenvalues
        return float(np.abs(w - reference.maximally_mixed_identity_eigenvalues()).max())

    def dev_mixed_depolarizing():
        return max(
            max_abs(
                pdm_two_step(mixed, make_depolarizing(eta)).matrix
                - reference.maximally_mixed_depolarizing_pdm(eta)
            )
            for eta in etas
        )

    def dev_pure_depolarizing():
        return max(
            max_abs(
                pdm_two_step(pure, make_depolarizing(eta)).matrix
                - reference.pure_state_depolarizing_pdm(eta)
            )
            for eta in etas
        )

    def dev_product_limit():
        r = pdm_two_step(pure, make_depolarizing(1.0))
        return max_abs(r.matrix - reference.product_pdm_full_depolarizing())

    def dev_three_step_identity():
        r = pdm_extend(pdm_two_step(mixed, identity), identity)
        return max_abs(r.matrix - reference.three_step_identity_pdm())

    def dev_negativity_closed_forms():
        worst = 0.0
        for eta in etas:
            worst = max(
                worst,
                abs(
                    negativity(pdm_two_step(mixed, make_depolarizing(eta)))
                    - reference.maximally_mixed_depolarizing_negativity(eta)
                ),
                abs(
                    negativity(pdm_two_step(pure, make_depolarizing(eta)))
                    - reference.pure_state_depolarizing_negativity(eta)
                ),
            )
        r3 = pdm_extend(pdm_two_step(mixed, identity), identity)
        return max(worst, abs(negativity(r3) - 2.0))

    def dev_chsh_closed_form():
        return max(
            max(
                abs(
                    chsh_max(pdm_two_step(rho, make_depolarizing(eta)))
                    - reference.depolarizing_chsh_max(eta)
                )
                for eta in etas
            )
            for rho in (mixed, pure)
        )

    def dev_channel_duality():
        probes = (pure, mixed, 0.5 * (eye2 + PAULI_X))
        channels = [identity, make_depolarizing(0.3), make_rabi(1.1)]
        worst = 0.0
        for ch in channels:
            for sigma in probes:
                worst = max(
                    worst, max_abs(apply_channel(ch, sigma) - apply_channel_via_choi(ch, sigma))
                )
        return worst

    def dev_three_step_dual_path():
        mz = pauli_axis_measurement("z")
        mx = pauli_axis_measurement("x")
        worst = 0.0
        for omega_t in (0.7, 2.1):
            e = make_rabi(omega_t)
            q = born_quasi_three(mixed, e, e, mz, mx, mz)
            r = pdm_extend(pdm_two_step(mixed, e), e)
            q_pdm = born_quasi_from_pdm(r, (mz, mx, mz))
            worst = max(worst, max_abs(q.values - q_pdm.values))
        e1, e2 = make_depolarizing(0.4), make_rabi(0.9)
        q = born_quasi_three(pure, e1, e2, mx, mz, mx)
        r = pdm_extend(pdm_two_step(pure, e1), e2)
        return max(worst, max_abs(q.values - born_quasi_from_pdm(r, (mx, mz, mx)).values))

    def dev_decomposition():
        mz = pauli_axis_measurement("z")
        mx = pauli_axis_measurement("x")
        worst = 0.0
        for rho in (mixed, pure):
            ch = make_depolarizing(0.25)
            q = born_quasi_two(pdm_two_step(rho, ch), mx, mz)
            p = lueders_two(rho, ch, mx, mz)
            d = disturbance_two(rho, ch, mx, mz)
            worst = max(worst, max_abs(q.values - p.values - d.values))
        e = make_rabi(1.3)
        q3 = born_quasi_three(pure, e, e, mz, mz, mz)
        p3 = lueders_three(pure, e, e, mz, mz, mz)
        d3 = disturbance_three(pure, e, e, mz, mz, mz)
        worst = max(worst, max_abs(q3.values - p3.values - d3.total))
        subterm_sum = d3.d_02_012bar + d3.d_2_12bar + d3.d_012bar_02bar + d3.d_12_012bar
        return max(worst, max_abs(d3.total - subterm_sum))

    def dev_rabi_closed_forms():
        mz = pauli_axis_measurement("z")
        worst = 0.0
        for omega_t in np.linspace(0.0, 2.0 * math.pi, 9):
            e = make_rabi(float(omega_t))
            n = nsit_quantifier_three(mixed, e, e, mz, mz, mz)
            worst = max(worst, abs(n - reference.rabi_nsit_three(float(omega_t))))
            r = pdm_extend(pdm_two_step(mixed, e), e)
            worst = max(
                worst, abs(lgi_k3(r, [0.0, 0.0, 1.0]) - reference.rabi_lgi_k3(float(omega_t)))
            )
        return worst

    return (
        ("two-step maximally mixed + identity matrix", dev_two_step_identity, 1e-12),
        ("two-step maximally mixed + identity spectrum", dev_two_step_identity_spectrum, 1e-10),
        ("two-step maximally mixed + depolarizing matrices", dev_mixed_depolarizing, 1e-12),
        ("two-step pure state + depolarizing matrices", dev_pure_depolarizing, 1e-12),
        ("pure state + full depolarizing product form", dev_product_limit, 1e-12),
        ("three-step identity recurrence", dev_three_step_identity, 1e-12),
        ("negativity closed forms", dev_negativity_closed_forms, 1e-9),
        ("temporal CHSH closed form", dev_chsh_closed_form, 1e-9),
        ("Kraus vs Choi channel application", dev_channel_duality, 1e-12),
        ("nested vs PDM-trace three-step Born rule", dev_three_step_dual_path, 1e-12),
        ("Born equals sequential plus disturbance", dev_decomposition, 1e-12),
        ("Rabi Leggett-Garg and NSIT closed forms", dev_rabi_closed_forms, 1e-9),
    )


def selftest_command() -> int:
    failures = 0
    for name, check, tol in _selftest_checks():
        tol = tightened_tolerance(tol)
        try:
            deviation = check()
        except Exception as exc:  # a crashed check is a failure, not an abort
            sys.stdout.write(f"FAIL {name}: {type(exc).__name__}: {exc}\n")
            failures += 1
            continue
        status = "PASS" if deviation <= tol else "FAIL"
        if status == "FAIL":
            failures += 1
        sys.stdout.write(f"{status} {name}: max deviation {deviation:.3e} (tolerance {tol:.0e})\n")
    total = len(_selftest_checks())
    sys.stdout.write(f"{total - failures}/{total} checks passed\n")
    return 0 if failures == 0 else 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tempocorr",
        description="Pseudo-density matrix scenarios: reports, sweeps, self-test.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="evaluate one scenario and print a JSON report")
    p_run.add_argument("config", help="scenario config JSON (path or bundled name)")
    p_run.add_argument("--out", help="also write the report to this file")

    p_sweep = sub.add_parser("sweep", help="scan a parameter and write a CSV curve")
    p_sweep.add_argument("config", help="scenario config JSON (path or bundled name)")
    p_sweep.add_argument("sweep", help="sweep spec JSON")
    p_sweep.add_argument("--out", required=True, help="output CSV path")

    sub.add_parser("selftest", help="run the reference checks")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return run_command(args.config, args.out)
        if args.command == "sweep":
            return sweep_command(args.config, args.sweep, args.out)
        return selftest_command()
    except (NumericalInconsistencyError, EigenConvergenceError) as exc:
        sys.stderr.write(f"numeric inconsistency: {exc}\n")
        return 3
    except ValueError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


def entry_point():
    raise SystemExit(main())
