"""Built-in scenarios, the scenario file format, and the monetary-policy model."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence, Union

import jsonschema

from .core import DomainError, ScalarMapSpec, State, SystemSpec, ThresholdMapSpec
from .sim import DEFAULT_TOL, DEFAULT_WINDOW, Trace, simulate

FORMAT_VERSION = 1


class ScenarioError(ValueError):
    """A scenario file failed to parse or validate."""


@dataclass(frozen=True)
class RunConfig:
    n_steps: int = 1000
    tol: float = DEFAULT_TOL
    window: int = DEFAULT_WINDOW
    seed: int = 42


@dataclass(frozen=True)
class PolicyParams:
    """Inflation/threshold model with fixed response coefficients.

    ``slack`` is a constant or a per-quarter series. The threshold intercept
    for quarter n is 0.05 * (target - 0.1 * W_n).
    """

    target: float = 2.0
    slack: Union[float, tuple[float, ...]] = 2.0

    def __post_init__(self):
        if isinstance(self.slack, (list, tuple)):
            object.__setattr__(self, "slack", tuple(float(w) for w in self.slack))
        else:
            object.__setattr__(self, "slack", float(self.slack))
        object.__setattr__(self, "target", float(self.target))

    @property
    def is_series(self) -> bool:
        return isinstance(self.slack, tuple)

    def slack_at(self, quarter: int) -> float:
        if not self.is_series:
            return self.slack
        if not 0 <= quarter < len(self.slack):
            raise DomainError(f"quarter {quarter} outside slack series of length {len(self.slack)}")
        return self.slack[quarter]

    def intercept(self, quarter: int) -> float:
        return 0.05 * (self.target - 0.1 * self.slack_at(quarter))


def policy_system(params: PolicyParams, quarter: int = 0) -> SystemSpec:
    return SystemSpec(
        ScalarMapSpec.affine(0.9, 0.2),
        ScalarMapSpec.affine(0.85, 0.3),
        ThresholdMapSpec.affine(0.15, 0.8, params.intercept(quarter)),
    )


@dataclass(frozen=True)
class Scenario:
    name: str
    system: SystemSpec
    initial: State
    run: RunConfig = field(default_factory=RunConfig)
    policy: PolicyParams | None = None
    notes: str = ""

    @property
    def slack_series(self) -> tuple[float, ...] | None:
        if self.policy is not None and self.policy.is_series:
            return self.policy.slack
        return None

    @property
    def time_varying(self) -> bool:
        return self.slack_series is not None

    def system_at(self, n: int) -> SystemSpec:
        if self.time_varying:
            return policy_system(self.policy, n)
        return self.system

    def simulate(self, n_steps: int | None = None, initial: State | None = None) -> Trace:
        sys = self.system_at if self.time_varying else self.system
        return simulate(sys, initial or self.initial, n_steps or self.run.n_steps)

    def to_dict(self) -> dict:
        d = {"version": FORMAT_VERSION, "name": self.name}
        if self.policy is not None:
            slack = list(self.policy.slack) if self.policy.is_series else self.policy.slack
            d["policy"] = {"target": self.policy.target, "slack": slack}
        else:
            d["system"] = self.system.to_dict()
        d["initial"] = {"a": self.initial.a, "c": self.initial.c}
        d["run"] = {"n_steps": self.run.n_steps, "tol": self.run.tol,
                    "window": self.run.window, "seed": self.run.seed}
        d["notes"] = self.notes
        return d

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def dump(self, path) -> None:
        Path(path).write_text(self.dumps())


_MAP_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["family", "slope", "intercept"],
    "properties": {
        "family": {"enum": ["affine", "affine_mod1"]},
        "slope": {"type": "number"},
        "intercept": {"type": "number"},
    },
}


def _h_variant(family: str, fields: dict) -> dict:
    return {
        "if": {"properties": {"family": {"const": family}}},
        "then": {
            "additionalProperties": False,
            "required": ["family", *fields],
            "properties": {"family": {"const": family}, **fields},
        },
    }


_NUM = {"type": "number"}

SCENARIO_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "dynthresh scenario",
    "type": "object",
    "additionalProperties": False,
    "required": ["version", "name", "initial"],
    "properties": {
        "version": {"const": FORMAT_VERSION},
        "name": {"type": "string", "minLength": 1},
        "system": {
            "type": "object",
            "additionalProperties": False,
            "required": ["f", "g", "h"],
            "properties": {
                "f": _MAP_SCHEMA,
                "g": _MAP_SCHEMA,
                "h": {
                    "type": "object",
                    "required": ["family"],
                    "properties": {"family": {"enum": ["affine", "sine", "averaging"]}},
                    "allOf": [
                        _h_variant("affine", {"gamma": _NUM, "delta": _NUM, "epsilon": _NUM}),
                        _h_variant("sine", {"amp": _NUM, "delta": _NUM, "offset": _NUM}),
                        _h_variant("averaging", {
                            "weight": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                        }),
                    ],
                },
            },
        },
        "policy": {
            "type": "object",
            "additionalProperties": False,
            "required": ["slack"],
            "properties": {
                "target": _NUM,
                "slack": {"oneOf": [_NUM, {"type": "array", "items": _NUM, "minItems": 1}]},
            },
        },
        "initial": {
            "type": "object",
            "additionalProperties": False,
            "required": ["a", "c"],
            "properties": {"a": _NUM, "c": _NUM},
        },
        "run": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "n_steps": {"type": "integer", "minimum": 1},
                "tol": {"type": "number", "exclusiveMinimum": 0},
                "window": {"type": "integer", "minimum": 1},
                "seed": {"type": "integer", "minimum": 0},
            },
        },
        "notes": {"type": "string"},
    },
    "oneOf": [{"required": ["system"]}, {"required": ["policy"]}],
}

_VALIDATOR = jsonschema.Draft202012Validator(SCENARIO_SCHEMA)


def _map_from(d: dict) -> ScalarMapSpec:
    return ScalarMapSpec(d["family"], d["slope"], d["intercept"])


def _h_from(d: dict) -> ThresholdMapSpec:
    fam = d["family"]
    if fam == "affine":
        return ThresholdMapSpec.affine(d["gamma"], d["delta"], d["epsilon"])
    if fam == "sine":
        return ThresholdMapSpec.sine(d["amp"], d["delta"], d["offset"])
    return ThresholdMapSpec.averaging(d["weight"])


def scenario_from_dict(d: dict) -> Scenario:
    errors = sorted(_VALIDATOR.iter_errors(d), key=lambda e: (len(e.absolute_path), list(map(str, e.absolute_path))))
    if errors:
        err = max(errors, key=lambda e: len(e.absolute_path))
        where = ".".join(str(p) for p in err.absolute_path) or "<root>"
        raise ScenarioError(f"{where}: {err.message}")
    for key in ("a", "c"):
        if not math.isfinite(d["initial"][key]):
            raise ScenarioError(f"initial.{key}: must be finite")
    policy = None
    if "policy" in d:
        p = d["policy"]
        policy = PolicyParams(p.get("target", 2.0), p["slack"])
        system = policy_system(policy, 0)
    else:
        s = d["system"]
        system = SystemSpec(_map_from(s["f"]), _map_from(s["g"]), _h_from(s["h"]))
    run = RunConfig(**d.get("run", {}))
    return Scenario(d["name"], system, State(float(d["initial"]["a"]), float(d["initial"]["c"])),
                    run, policy, d.get("notes", ""))


def loads_scenario(text: str) -> Scenario:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return scenario_from_dict(d)


def load_scenario(path) -> Scenario:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ScenarioError(f"cannot read {path}: {exc.strerror}") from exc
    return loads_scenario(text)


def _affine_system(a1, b1, a2, b2, g, d, e) -> SystemSpec:
    return SystemSpec(ScalarMapSpec.affine(a1, b1), ScalarMapSpec.affine(a2, b2),
                      ThresholdMapSpec.affine(g, d, e))


def _builtins() -> dict[str, Scenario]:
    return {
        "type_a": Scenario(
            "type_a", _affine_system(0.5, 2, 1.5, -3, 0.3, 0.7, 1), State(0.0, 5.0), RunConfig(2000),
            notes="Type A convergence example; fixed point (4, 22/3). Orbits starting with "
                  "a > 6 above the threshold escape through the expanding regime.",
        ),
        "type_e": Scenario(
            "type_e", _affine_system(2.5, -0.5, -2.3, 2.3, 0.4, 0.6, 0.1), State(0.5, 0.7), RunConfig(1000),
            notes="Proposed chaos example with two expanding regimes. In exact arithmetic the orbit "
                  "from (0.5, 0.7) escapes to -infinity; no bounded chaotic orbit was found from a "
                  "[-10, 10]^2 grid.",
        ),
        "contraction_failure": Scenario(
            "contraction_failure", _affine_system(0.5, 10, 0.5, 15, 0.1, 0.8, 2), State(15.0, 22.0),
            RunConfig(10_000),
            notes="Both regime maps contract with constant 0.5. The claimed behaviour is indefinite "
                  "switching towards a limit cycle; simulation instead stays in regime 1 and converges "
                  "to the boundary point (20, 20).",
        ),
        "chaos_sine": Scenario(
            "chaos_sine",
            SystemSpec(ScalarMapSpec.affine_mod1(3, 0), ScalarMapSpec.affine_mod1(3, 0.5),
                       ThresholdMapSpec.sine(0.4, 0.5, 0.3)),
            State(0.2, 0.3), RunConfig(10_000),
            notes="Expanding mod-1 maps with sine threshold feedback; reference exponent 1.087, "
                  "analytic value ln 3 = 1.0986 since the Jacobian diagonal is (3, 0.5). "
                  "Initial state chosen here; none is given with the example.",
        ),
        "divergent_threshold": Scenario(
            "divergent_threshold", _affine_system(0.5, 1, 0.5, 3, -0.1, 1.2, 0.5), State(1.0, 2.5),
            RunConfig(100),
            notes="Contracting regimes, expanding threshold (delta = 1.2): a -> 2, c grows like 1.2^n. "
                  "Critical threshold persistence delta = 1.",
        ),
        "fed_policy": Scenario(
            "fed_policy", policy_system(PolicyParams()), State(1.5, 2.5), RunConfig(200, tol=1e-6),
            PolicyParams(),
            notes="Quarterly inflation/threshold model with constant slack W = 2. Reference claims: first "
                  "switch after about 8 quarters and common limit about 2.3%. Exact simulation: first "
                  "switch after quarter 10, single switch, convergence to the regime-2 point (2, 1.95).",
        ),
    }


BUILTIN_NAMES = tuple(_builtins())


def builtin(name: str) -> Scenario:
    table = _builtins()
    if name not in table:
        raise ScenarioError(f"unknown scenario {name!r}; valid names: {', '.join(table)}")
    return table[name]


def resolve(ref: str) -> Scenario:
    """A built-in name or a path to a scenario file."""
    if ref in BUILTIN_NAMES:
        return builtin(ref)
    if Path(ref).suffix == ".json" or Path(ref).exists():
        return load_scenario(ref)
    return builtin(ref)


def slack_series_scenario(series: Sequence[float], n_steps: int | None = None) -> Scenario:
    policy = PolicyParams(slack=tuple(series))
    return Scenario("fed_policy", policy_system(policy, 0), State(1.5, 2.5),
                    RunConfig(n_steps or len(series)), policy, "time-varying slack")
