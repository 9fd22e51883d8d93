"""JSON config files for scenarios and controllers."""
from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import numpy as np

from .controller import ControllerSpec, ControllerSpecError
from .measurements import ScalarExpr, Transform, VectorExpr
from .tasks import CostTerm, ScenarioError, ScenarioSpec, SearchGridConfig

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    def __init__(self, path, key: str, message: str):
        self.path = str(path)
        self.key = key
        super().__init__(f"{self.path}: key {key!r}: {message}")


def dumps(obj: Any) -> str:
    # json emits floats with repr(): shortest round-trip decimal
    return json.dumps(obj, indent=2, sort_keys=False, allow_nan=False) + "\n"


def _read(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(path, "<file>", f"cannot read: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(path, "<file>", f"invalid JSON at line {exc.lineno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ConfigError(path, "<root>", "expected a JSON object")
    version = data.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ConfigError(path, "schema_version", f"expected {SCHEMA_VERSION}, got {version!r}")
    return data


# -- controller ---------------------------------------------------------------

def scalar_expr_to_dict(e: ScalarExpr) -> dict:
    return {"source": e.source.value,
            "transform": [{"op": t.op.value, "value": t.value} for t in e.transform]}


def vector_expr_to_dict(e: VectorExpr) -> dict:
    return {"source": e.source.value, "orthogonal": e.rotate_orthogonal}


def controller_to_dict(spec: ControllerSpec) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "name": spec.name,
        "note": spec.note,
        "vmax": spec.vmax,
        "scalars": [scalar_expr_to_dict(e) for e in spec.scalar_exprs],
        "vectors": [vector_expr_to_dict(e) for e in spec.vector_exprs],
        "params": [[float(v) for v in row] for row in spec.params],
    }


def controller_from_dict(data: dict, path="<dict>") -> ControllerSpec:
    key = "scalars"
    try:
        scalars = [ScalarExpr(s["source"], [Transform(t["op"], t["value"]) for t in s.get("transform", [])])
                   for s in data["scalars"]]
        key = "vectors"
        vectors = [VectorExpr(v["source"], bool(v.get("orthogonal", False))) for v in data["vectors"]]
        key = "params"
        params = data["params"]
        params = np.array(params, dtype=float) if params else np.zeros((len(vectors), len(scalars)))
        key = "vmax"
        vmax = float(data["vmax"])
        key = "params"
        return ControllerSpec(params, scalars, vectors, vmax,
                              name=str(data.get("name", "")), note=str(data.get("note", "")))
    except KeyError as exc:
        raise ConfigError(path, f"{key}.{exc.args[0]}" if key != exc.args[0] else key,
                          "missing") from None
    except (TypeError, ValueError, ControllerSpecError) as exc:
        raise ConfigError(path, key, str(exc)) from None


def load_controller(path) -> ControllerSpec:
    return controller_from_dict(_read(path), path)


def save_controller(spec: ControllerSpec, path) -> None:
    Path(path).write_text(dumps(controller_to_dict(spec)), encoding="utf-8", newline="\n")


# -- scenario -----------------------------------------------------------------

_SCENARIO_KEYS = ("task", "n_agents", "groups", "map_half_extent", "sensing_radius", "dt",
                  "horizon_steps", "placement", "init_half_extent", "ring_radius", "goal_radius",
                  "proximity_threshold", "per_step_cost", "param_bounds", "name")


def scenario_to_dict(sc: ScenarioSpec) -> dict:
    out: dict[str, Any] = {"schema_version": SCHEMA_VERSION}
    for k in _SCENARIO_KEYS:
        v = getattr(sc, k)
        if hasattr(v, "value"):
            v = v.value
        if isinstance(v, tuple):
            v = list(v)
        out[k] = v
    out["cost_terms"] = [{"name": t.name, "sign": t.sign, "multiplier": t.multiplier,
                          "measure": t.measure} for t in sc.cost_terms]
    g = sc.search_grid
    out["search_grid"] = None if g is None else {
        "rows": g.rows, "cols": g.cols, "span_fraction": g.span_fraction,
        "counter_max": g.counter_max, "counter_rate": g.counter_rate,
        "reset_radius": g.reset_radius}
    return out


def scenario_from_dict(data: dict, path="<dict>") -> ScenarioSpec:
    unknown = set(data) - set(_SCENARIO_KEYS) - {"schema_version", "cost_terms", "search_grid"}
    if unknown:
        raise ConfigError(path, sorted(unknown)[0], "unknown key")
    for required in ("task", "n_agents"):
        if required not in data:
            raise ConfigError(path, required, "missing")
    kw: dict[str, Any] = {k: data[k] for k in _SCENARIO_KEYS if k in data}
    try:
        kw["cost_terms"] = [CostTerm(str(t["name"]), int(t["sign"]), float(t["multiplier"]),
                                     str(t["measure"])) for t in data.get("cost_terms", [])]
    except (KeyError, TypeError, ValueError, ScenarioError) as exc:
        raise ConfigError(path, "cost_terms", str(exc)) from None
    if data.get("search_grid") is not None:
        try:
            kw["search_grid"] = SearchGridConfig(**data["search_grid"])
        except TypeError as exc:
            raise ConfigError(path, "search_grid", str(exc)) from None
    try:
        return ScenarioSpec(**kw)
    except (ScenarioError, TypeError, ValueError) as exc:
        key = next((k for k in _SCENARIO_KEYS if k in str(exc)), "<scenario>")
        raise ConfigError(path, key, str(exc)) from None


def load_scenario(path) -> ScenarioSpec:
    return scenario_from_dict(_read(path), path)


def save_scenario(sc: ScenarioSpec, path) -> None:
    Path(path).write_text(dumps(scenario_to_dict(sc)), encoding="utf-8", newline="\n")
