"""Scenario files: JSON descriptions of a task over states and a group.

A scenario document carries the group (and optionally a distinct output
group), the states, the task name and task parameters; matrices are nested
rows of [re, im] pairs.  Parsing validates every state (Hermiticity, trace,
positivity) and reports schema violations with the offending path.
"""

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from .linalg import check_density_matrix
from .symmetry import dual_representation, finite_rep, su2_rep, u1_rep

TASKS = ("hmin", "feasible", "smoothed", "depol-threshold", "modes",
         "region-scan", "net")


class ScenarioError(ValueError):
    pass


def _complex_entry(value, path):
    if (not isinstance(value, (list, tuple)) or len(value) != 2
            or not all(isinstance(v, (int, float)) for v in value)):
        raise ScenarioError(f"{path}: matrix entries must be [re, im] pairs")
    return complex(value[0], value[1])


def parse_matrix(data, path="matrix"):
    if not isinstance(data, list) or not data:
        raise ScenarioError(f"{path}: expected a nonempty list of rows")
    rows = []
    for i, row in enumerate(data):
        if not isinstance(row, list) or len(row) != len(data):
            raise ScenarioError(f"{path}[{i}]: matrix must be square")
        rows.append([_complex_entry(v, f"{path}[{i}][{k}]")
                     for k, v in enumerate(row)])
    return np.array(rows, dtype=complex)


def matrix_json(m):
    m = np.asarray(m, dtype=complex)
    return [[[float(v.real), float(v.imag)] for v in row] for row in m]


def parse_group(data, path="group"):
    if not isinstance(data, dict) or "kind" not in data:
        raise ScenarioError(f"{path}: expected an object with a 'kind' field")
    kind = data["kind"]
    try:
        if kind == "u1":
            return u1_rep(data["weights"])
        if kind == "su2":
            return su2_rep([(s[0], s[1]) for s in data["spins"]])
        if kind == "finite":
            return finite_rep([parse_matrix(u, f"{path}.unitaries[{i}]")
                               for i, u in enumerate(data["unitaries"])])
    except KeyError as exc:
        raise ScenarioError(f"{path}: missing field {exc}")
    except ValueError as exc:
        raise ScenarioError(f"{path}: {exc}")
    raise ScenarioError(f"{path}.kind: unknown group kind {kind!r}")


def parse_state(data, path, dim=None):
    m = parse_matrix(data, path)
    try:
        m = check_density_matrix(m, name=path)
    except ValueError as exc:
        raise ScenarioError(str(exc))
    if dim is not None and m.shape[0] != dim:
        raise ScenarioError(f"{path}: dimension {m.shape[0]} does not match "
                            f"the group dimension {dim}")
    return m


@dataclass(eq=False)
class Scenario:
    task: str
    rep_in: object
    rep_out: object
    input_state: np.ndarray | None = None
    target_state: np.ndarray | None = None
    reference_state: np.ndarray | None = None
    params: dict = field(default_factory=dict)
    output_path: str | None = None
    output_format: str | None = None
    source_hash: str = ""

    @property
    def rep_ref(self):
        return dual_representation(self.rep_out)


def parse_scenario(text):
    """Parse and validate a scenario document (bytes or str)."""
    if isinstance(text, bytes):
        payload = text
    else:
        payload = text.encode("utf-8")
    try:
        doc = json.loads(payload.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ScenarioError(f"scenario: not valid UTF-8 JSON ({exc})")
    if not isinstance(doc, dict):
        raise ScenarioError("scenario: top level must be an object")
    task = doc.get("task")
    if task not in TASKS:
        raise ScenarioError(f"task: expected one of {TASKS}, got {task!r}")
    rep_in = parse_group(doc.get("group"), "group")
    rep_out = parse_group(doc["group_out"], "group_out") if "group_out" in doc \
        else rep_in
    params = doc.get("params", {})
    if not isinstance(params, dict):
        raise ScenarioError("params: expected an object")

    grid = params.get("grid")
    if grid is not None:
        res = grid.get("resolution", 0)
        if not isinstance(res, int) or res < 2:
            raise ScenarioError("params.grid.resolution: must be an integer >= 2")
    for rand_task in ("smoothed", "net"):
        if task == rand_task and "seed" not in params:
            raise ScenarioError(f"params.seed: required for task {rand_task!r}")
    surface = params.get("surface")
    if surface is not None and surface.get("sampler", "random") == "random" \
            and "seed" not in surface and "seed" not in params:
        raise ScenarioError("params.surface.seed: required for random sampling")

    sc = Scenario(task=task, rep_in=rep_in, rep_out=rep_out, params=params,
                  source_hash=hashlib.sha256(payload).hexdigest())
    if "input_state" in doc:
        sc.input_state = parse_state(doc["input_state"], "input_state", rep_in.dim)
    if "target_state" in doc:
        sc.target_state = parse_state(doc["target_state"], "target_state", rep_out.dim)
    if "reference_state" in doc:
        sc.reference_state = parse_state(doc["reference_state"], "reference_state",
                                         sc.rep_ref.dim)
    out = doc.get("output", {})
    sc.output_path = out.get("path")
    sc.output_format = out.get("format")

    needs_input = task in ("hmin", "feasible", "smoothed", "depol-threshold",
                           "modes", "region-scan")
    if needs_input and sc.input_state is None:
        raise ScenarioError(f"input_state: required for task {task!r}")
    if task in ("feasible", "smoothed", "depol-threshold") and sc.target_state is None:
        raise ScenarioError(f"target_state: required for task {task!r}")
    if task == "hmin" and sc.reference_state is None:
        raise ScenarioError("reference_state: required for task 'hmin'")
    return sc
