"""JSON instance files and their schema."""
from __future__ import annotations

import json
from pathlib import Path

import jsonschema

from .constraints import (BudgetPathConstraint, CardinalityConstraint, ConstraintAutomaton,
                          PartitionMatroidConstraint, PathWitnessConstraint, PrefixDagConstraint)
from .core import GroundSet
from .errors import PreconditionError, ProbingError
from .functions import (ARBITRARY, AllTypesFunction, CoverageFunction, CutFunction, PartitionRankFunction,
                        SetFunction, TableFunction, XosFunction)
from .instances import Instance

FORMAT_VERSION = 1

_int_list = {"type": "array", "items": {"type": "integer", "minimum": 0}}
_num_list = {"type": "array", "items": {"type": "number"}}
_matrix = {"type": "array", "items": _num_list}

INSTANCE_SCHEMA = {
    "type": "object",
    "required": ["version", "n", "probs", "function", "constraint"],
    "properties": {
        "version": {"const": FORMAT_VERSION},
        "n": {"type": "integer", "minimum": 0},
        "probs": {"type": "array", "items": {"type": "number", "minimum": 0, "maximum": 1}},
        "metadata": {"type": "object"},
        "function": {
            "type": "object",
            "required": ["type"],
            "oneOf": [
                {"properties": {"type": {"const": "table"}, "values": _num_list, "kind": {"type": "string"}},
                 "required": ["values"]},
                {"properties": {"type": {"const": "coverage"}, "sets": {"type": "array", "items": _int_list},
                                "weights": _num_list}, "required": ["sets", "weights"]},
                {"properties": {"type": {"const": "xos"}, "coefficients": _matrix, "kind": {"type": "string"}},
                 "required": ["coefficients"]},
                {"properties": {"type": {"const": "partition_rank"}, "parts": _int_list,
                                "capacities": _int_list}, "required": ["parts"]},
                {"properties": {"type": {"const": "cut"}, "n": {"type": "integer"},
                                "edges": {"type": "array", "items": {"type": "array", "minItems": 3,
                                                                      "maxItems": 3}}},
                 "required": ["edges"]},
                {"properties": {"type": {"const": "all_types"}, "types": _int_list}, "required": ["types"]},
            ],
        },
        "constraint": {
            "type": "object",
            "required": ["type"],
            "oneOf": [
                {"properties": {"type": {"const": "cardinality"}, "k": {"type": "integer", "minimum": 0}},
                 "required": ["k"]},
                {"properties": {"type": {"const": "partition_matroid"}, "parts": _int_list,
                                "capacities": _int_list}, "required": ["parts", "capacities"]},
                {"properties": {"type": {"const": "path_witness"}, "arity": {"type": "integer", "minimum": 1},
                                "depth": {"type": "integer", "minimum": 1}}, "required": ["arity", "depth"]},
                {"properties": {"type": {"const": "prefix_dag"}, "sequences": {"type": "array",
                                                                              "items": _int_list}},
                 "required": ["sequences"]},
                {"properties": {"type": {"const": "budget_path"}, "dist": _matrix, "budget": {"type": "number"}},
                 "required": ["dist", "budget"]},
            ],
        },
    },
}


class SchemaError(ProbingError, ValueError):
    pass


def function_from_dict(d: dict, n: int) -> SetFunction:
    t = d["type"]
    if t == "table":
        return TableFunction(d["values"], kind=d.get("kind", ARBITRARY))
    if t == "coverage":
        return CoverageFunction(d["sets"], d["weights"])
    if t == "xos":
        return XosFunction(d["coefficients"], kind=d.get("kind"))
    if t == "partition_rank":
        return PartitionRankFunction(d["parts"], d.get("capacities"))
    if t == "cut":
        return CutFunction(d.get("n", n), [tuple(e) for e in d["edges"]])
    if t == "all_types":
        return AllTypesFunction(d["types"])
    raise SchemaError(f"unknown function type {t!r}")


def constraint_from_dict(d: dict, n: int) -> ConstraintAutomaton:
    t = d["type"]
    if t == "cardinality":
        return CardinalityConstraint(n, d["k"])
    if t == "partition_matroid":
        return PartitionMatroidConstraint(d["parts"], d["capacities"])
    if t == "path_witness":
        return PathWitnessConstraint(d["arity"], d["depth"])
    if t == "prefix_dag":
        return PrefixDagConstraint(d.get("n", n), d["sequences"])
    if t == "budget_path":
        return BudgetPathConstraint(d["dist"], d["budget"])
    raise SchemaError(f"unknown constraint type {t!r}")


def instance_to_dict(inst: Instance) -> dict:
    return {
        "version": FORMAT_VERSION,
        "n": inst.n,
        "probs": list(inst.ground.probs),
        "function": inst.objective.to_dict(),
        "constraint": inst.constraint.to_dict(),
        "metadata": dict(inst.metadata),
    }


def instance_from_dict(d: dict) -> Instance:
    try:
        jsonschema.validate(d, INSTANCE_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise SchemaError(f"instance fails schema: {exc.message}") from exc
    n = d["n"]
    if len(d["probs"]) != n:
        raise SchemaError(f"probs has length {len(d['probs'])}, expected {n}")
    try:
        f = function_from_dict(d["function"], n)
        c = constraint_from_dict(d["constraint"], n)
        return Instance(GroundSet(d["probs"]), f, c, dict(d.get("metadata", {})))
    except (PreconditionError, IndexError, KeyError, TypeError) as exc:
        raise SchemaError(f"invalid instance: {exc}") from exc


def dumps_instance(inst: Instance) -> str:
    return json.dumps(instance_to_dict(inst), indent=1, sort_keys=True)


def load_instance(path) -> Instance:
    try:
        d = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not JSON ({exc})") from exc
    return instance_from_dict(d)


def save_instance(inst: Instance, path) -> None:
    Path(path).write_text(dumps_instance(inst) + "\n")
