"""Scenario files (YAML) and machine-readable result records (JSON).

A scenario file looks like::

    schema_version: 1
    demand: {N: 100, gamma: 10}
    firms:
      - {c: 0.25}
      - {c: 0.5}
    K: 5
    solver: {tolerance: 1.0e-8, max_iterations: 100000, damping: 0.5, seed: 0}

``name``, ``description``, ``breakpoints`` and ``quadruple`` are optional.
Unknown keys are rejected.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

import yaml

from .errors import ValidationError
from .market import Demand, Firm, Scenario

SCHEMA_VERSION = 1
RECORD_SCHEMA_VERSION = "1"

PRESETS = {
    "paper-k5": "paper_k5.yaml",
    "paper-k10": "paper_k10.yaml",
    "paper-k1000": "paper_k1000.yaml",
    "example1": "example1.yaml",
}

_TOP_KEYS = {"schema_version", "name", "description", "demand", "firms", "K", "solver", "breakpoints", "quadruple"}
_DEMAND_KEYS = {"N", "gamma"}
_FIRM_KEYS = {"c", "name"}
_SOLVER_KEYS = {"tolerance", "max_iterations", "damping", "seed"}
_QUAD_KEYS = {"firm", "own", "own_prime", "others", "others_prime"}


@dataclass(frozen=True)
class ScenarioFile:
    scenario: Scenario
    name: str = ""
    description: str = ""
    solver: dict[str, Any] = field(default_factory=dict)
    breakpoints: tuple[float, ...] | None = None
    quadruple: dict[str, Any] | None = None
    source: str = ""


def _number(value: Any, where: str) -> float:
    # YAML 1.1 reads "1e-8" as a string
    if isinstance(value, bool):
        raise ValidationError(f"{where}: expected a number, got {value!r}")
    try:
        out = float(value)
    except (TypeError, ValueError):
        raise ValidationError(f"{where}: expected a number, got {value!r}") from None
    if not math.isfinite(out):
        raise ValidationError(f"{where}: must be finite, got {value!r}")
    return out


def _mapping(value: Any, where: str, allowed: set[str]) -> dict:
    if not isinstance(value, dict):
        raise ValidationError(f"{where}: expected a mapping, got {type(value).__name__}")
    unknown = sorted(set(map(str, value)) - allowed)
    if unknown:
        raise ValidationError(f"{where}: unknown key(s) {', '.join(unknown)}; allowed: {', '.join(sorted(allowed))}")
    return value


def _numbers(value: Any, where: str) -> tuple[float, ...]:
    if not isinstance(value, list):
        raise ValidationError(f"{where}: expected a list of numbers")
    return tuple(_number(v, f"{where}[{i}]") for i, v in enumerate(value))


def parse_scenario(data: Any, source: str = "<scenario>") -> ScenarioFile:
    """Validate a decoded scenario document."""
    top = _mapping(data, source, _TOP_KEYS)
    version = top.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ValidationError(f"{source}: schema_version {version!r} not supported (expected {SCHEMA_VERSION})")
    for key in ("demand", "firms", "K"):
        if key not in top:
            raise ValidationError(f"{source}: missing required key '{key}'")
    demand_map = _mapping(top["demand"], f"{source}: demand", _DEMAND_KEYS)
    for key in _DEMAND_KEYS:
        if key not in demand_map:
            raise ValidationError(f"{source}: demand.{key} is required")
    demand = Demand(_number(demand_map["N"], "demand.N"), _number(demand_map["gamma"], "demand.gamma"))
    if not isinstance(top["firms"], list) or not top["firms"]:
        raise ValidationError(f"{source}: firms must be a non-empty list")
    firms = []
    for i, entry in enumerate(top["firms"]):
        entry = _mapping(entry, f"{source}: firms[{i}]", _FIRM_KEYS)
        if "c" not in entry:
            raise ValidationError(f"{source}: firms[{i}].c is required")
        firms.append(Firm(i + 1, _number(entry["c"], f"firms[{i}].c")))
    scenario = Scenario(demand, tuple(firms), _number(top["K"], "K"))

    solver = dict(_mapping(top.get("solver", {}) or {}, f"{source}: solver", _SOLVER_KEYS))
    for key in ("tolerance", "damping"):
        if key in solver:
            solver[key] = _number(solver[key], f"solver.{key}")
    for key in ("max_iterations", "seed"):
        if key in solver:
            solver[key] = int(_number(solver[key], f"solver.{key}"))

    breakpoints = None
    if "breakpoints" in top:
        breakpoints = _numbers(top["breakpoints"], "breakpoints")
        if len(breakpoints) != len(firms):
            raise ValidationError(f"{source}: breakpoints has {len(breakpoints)} entries for {len(firms)} firms")

    quadruple = None
    if "quadruple" in top:
        q = _mapping(top["quadruple"], f"{source}: quadruple", _QUAD_KEYS)
        quadruple = {
            "firm": int(_number(q.get("firm", 0), "quadruple.firm")),
            "own": _number(q.get("own"), "quadruple.own"),
            "own_prime": _number(q.get("own_prime"), "quadruple.own_prime"),
            "others": _numbers(q.get("others"), "quadruple.others"),
            "others_prime": _numbers(q.get("others_prime"), "quadruple.others_prime"),
        }

    return ScenarioFile(
        scenario=scenario,
        name=str(top.get("name", "")),
        description=str(top.get("description", "")),
        solver=solver,
        breakpoints=breakpoints,
        quadruple=quadruple,
        source=source,
    )


def load_scenario_text(text: str, source: str = "<scenario>") -> ScenarioFile:
    try:
        data = yaml.safe_load(text)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark
        where = f"line {mark.line + 1}, column {mark.column + 1}" if mark else "unknown position"
        raise ValidationError(f"{source}: YAML syntax error at {where}: {exc.problem}") from None
    except yaml.YAMLError as exc:
        raise ValidationError(f"{source}: YAML error: {exc}") from None
    return parse_scenario(data, source)


def load_scenario(path: str | Path) -> ScenarioFile:
    """Read and validate a scenario file. ``OSError`` propagates for missing files."""
    path = Path(path)
    return load_scenario_text(path.read_text(), str(path))


def preset_path(name: str):
    """Location of a shipped preset scenario."""
    return resources.files("pab_sfe").joinpath("scenarios", PRESETS[name])


def load_preset(name: str) -> ScenarioFile:
    return load_scenario_text(preset_path(name).read_text(), f"preset:{name}")


def scenario_echo(sf: ScenarioFile) -> dict[str, Any]:
    sc = sf.scenario
    return {
        "name": sf.name,
        "source": sf.source,
        "demand": {"N": sc.demand.intercept_N, "gamma": sc.demand.slope_gamma},
        "firms": [{"c": f.cost_coeff_c} for f in sc.firms],
        "K": sc.lipschitz_K,
    }


@dataclass
class ResultRecord:
    command: str
    inputs: dict[str, Any]
    outputs: dict[str, Any]
    diagnostics: dict[str, Any] = field(default_factory=dict)
    schema_version: str = RECORD_SCHEMA_VERSION

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, allow_nan=False)

    @classmethod
    def from_json(cls, text: str) -> "ResultRecord":
        data = json.loads(text)
        return cls(**data)
