"""Task-spec and policy documents: canonical JSON-compatible trees.

Value codec: integers stay JSON numbers, rationals become strings "p/q" in
lowest terms, everything else is a plain string.  On decode, strings
matching p/q (with a denominator) come back as Fractions; all other strings
stay symbols.  Emission is canonical: keys sorted, sections ordered
deterministically, rationals reduced, so equal tasks emit byte-identical
documents.
"""

from __future__ import annotations

import json
import re
from fractions import Fraction
from typing import Any, Mapping

from .expr import parse_expression
from .scm import (
    FiniteTask,
    Policy,
    TaskBuilder,
    TaskError,
    validate_policy,
    validate_task,
)

FORMAT_TASK = "finite-task/v1"
FORMAT_POLICY = "policy/v1"

_RATIONAL = re.compile(r"^-?\d+/\d+$")


class SpecFormatError(ValueError):
    def __init__(self, message: str, path: str = ""):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


def encode_value(v) -> Any:
    if isinstance(v, bool):
        raise SpecFormatError(f"boolean value {v!r} not representable; use 0/1")
    if isinstance(v, int):
        return v
    if isinstance(v, Fraction):
        return int(v) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    return str(v)


def decode_value(v, path: str = "") -> Any:
    if isinstance(v, bool):
        raise SpecFormatError("booleans are not domain values", path)
    if isinstance(v, int):
        return v
    if isinstance(v, float):
        raise SpecFormatError(f"float {v!r} not allowed; write a rational string", path)
    if isinstance(v, str):
        if _RATIONAL.match(v):
            f = Fraction(v)
            return int(f) if f.denominator == 1 else f
        return v
    raise SpecFormatError(f"unsupported value {v!r}", path)


def encode_rational(v: Fraction) -> str:
    v = Fraction(v)
    return f"{v.numerator}/{v.denominator}" if v.denominator != 1 else str(v.numerator)


def decode_rational(v, path: str = "") -> Fraction:
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, str):
        try:
            f = Fraction(v)
        except (ValueError, ZeroDivisionError):
            raise SpecFormatError(f"bad rational {v!r}", path) from None
        if f.denominator <= 0:
            raise SpecFormatError(f"bad rational {v!r}", path)
        return f
    raise SpecFormatError(f"bad rational {v!r} (floats are not accepted)", path)


# ----------------------------------------------------------------- task docs


def emit_task(task: FiniteTask) -> dict:
    """Canonical document tree for a task; parse(emit(t)) is equivalent to t."""
    exo_names = set(task.exogenous_by_name)
    variables = [
        {"name": n, "domain": [encode_value(v) for v in task.domains[n]]}
        for n in sorted(task.domains)
        if n not in task.actions
    ]
    exogenous = [
        {
            "name": e.name,
            "domain": [encode_value(v) for v in e.domain],
            "probabilities": [encode_rational(p) for p in e.probabilities],
        }
        for e in sorted(task.exogenous, key=lambda e: e.name)
    ]
    confounders = sorted([list(e) for e in task.diagram.bidirected])
    functions = []
    for name in sorted(task.functions):
        fn = task.functions[name]
        entry: dict[str, Any] = {"output": name, "parents": list(fn.parents)}
        if fn.expr is not None:
            entry["expression"] = fn.expr.unparse()
        else:
            entry["table"] = [
                {"given": [encode_value(v) for v in key], "value": encode_value(out)}
                for key, out in sorted(fn.table.items(), key=lambda kv: [str(x) for x in kv[0]])
            ]
        functions.append(entry)
    actions = [
        {
            "name": a,
            "domain": [encode_value(v) for v in task.domains[a]],
            "inputs": list(inputs),
        }
        for a, inputs in task.policy_space
    ]
    return {
        "format": FORMAT_TASK,
        "name": task.name or "task",
        "variables": variables,
        "exogenous": exogenous,
        "confounders": confounders,
        "functions": functions,
        "actions": actions,
        "rewards": list(task.reward_nodes),
        "discount": encode_rational(task.discount),
        "horizon": len(task.policy_space),
    }


def parse_task(doc: Mapping) -> FiniteTask:
    """Build a FiniteTask from a document tree; schema errors carry paths."""
    if not isinstance(doc, Mapping):
        raise SpecFormatError("document must be an object")
    if doc.get("format", FORMAT_TASK) != FORMAT_TASK:
        raise SpecFormatError(f"unknown format {doc.get('format')!r}", "format")
    builder = TaskBuilder(str(doc.get("name") or "task"))
    domains: dict[str, list] = {}

    for i, entry in enumerate(_require_list(doc, "exogenous")):
        path = f"exogenous[{i}]"
        name = _require_str(entry, "name", path)
        domain = [decode_value(v, f"{path}.domain") for v in _require_list(entry, "domain", path)]
        probs = [decode_rational(p, f"{path}.probabilities") for p in _require_list(entry, "probabilities", path)]
        try:
            builder.exogenous(name, domain, probs)
        except (TaskError, ValueError) as e:
            raise SpecFormatError(str(e), path) from None
        domains[name] = domain

    for i, entry in enumerate(_require_list(doc, "variables")):
        path = f"variables[{i}]"
        name = _require_str(entry, "name", path)
        domains[name] = [decode_value(v, f"{path}.domain") for v in _require_list(entry, "domain", path)]

    rewards = [str(x) for x in _require_list(doc, "rewards")]
    functions = {}
    for i, entry in enumerate(_require_list(doc, "functions")):
        path = f"functions[{i}]"
        functions[_require_str(entry, "output", path)] = (entry, path)

    action_entries = []
    for i, entry in enumerate(_require_list(doc, "actions")):
        path = f"actions[{i}]"
        name = _require_str(entry, "name", path)
        domain = [decode_value(v, f"{path}.domain") for v in _require_list(entry, "domain", path)]
        inputs = [str(s) for s in _require_list(entry, "inputs", path)]
        action_entries.append((name, domain, inputs))
        domains[name] = domain

    action_by_name = {a: (d, i) for a, d, i in action_entries}
    for name in sorted(functions):
        entry, path = functions[name]
        if name not in domains:
            raise SpecFormatError(f"variable {name} has a function but no domain", path)
        parents = [str(p) for p in entry.get("parents", ())]
        for p in parents:
            if p not in domains and p not in action_by_name:
                raise SpecFormatError(f"unknown parent {p!r}", f"{path}.parents")
        table = None
        expr = entry.get("expression")
        if "table" in entry:
            table = {}
            for j, row in enumerate(entry["table"]):
                rpath = f"{path}.table[{j}]"
                given = tuple(decode_value(v, rpath) for v in _require_list(row, "given", rpath))
                if len(given) != len(parents):
                    raise SpecFormatError("row arity mismatch", rpath)
                table[given] = decode_value(row.get("value"), rpath)
        elif expr is None:
            raise SpecFormatError("function needs a table or an expression", path)
        try:
            builder.chance(
                name,
                parents,
                domain=domains[name],
                table=table,
                expr=expr,
                reward=name in rewards,
            )
        except (TaskError, ValueError) as e:
            raise SpecFormatError(str(e), path) from None

    for name, domain, inputs in action_entries:
        builder.action(name, domain=domain, inputs=inputs)

    discount = decode_rational(doc.get("discount", 1), "discount")
    try:
        task = builder.build(discount=discount)
    except (TaskError, ValueError) as e:
        raise SpecFormatError(str(e)) from None

    missing = [y for y in rewards if y not in task.functions]
    if missing:
        raise SpecFormatError(f"reward nodes without functions: {missing}", "rewards")
    if tuple(rewards) != task.reward_nodes:
        # builder recorded rewards in declaration order; the document's list
        # fixes the discount exponents, so it wins
        task = FiniteTask(
            diagram=task.diagram,
            exogenous=task.exogenous,
            functions=task.functions,
            policy_space=task.policy_space,
            domains=task.domains,
            reward_nodes=tuple(rewards),
            discount=task.discount,
            name=task.name,
        )
    if "horizon" in doc and int(doc["horizon"]) != len(task.policy_space):
        raise SpecFormatError(
            f"horizon {doc['horizon']} != {len(task.policy_space)} actions", "horizon"
        )
    declared_conf = {tuple(sorted(map(str, pair))) for pair in doc.get("confounders", ())}
    actual = {tuple(sorted(e)) for e in task.diagram.bidirected}
    if doc.get("confounders") is not None and declared_conf != actual:
        raise SpecFormatError(
            f"declared confounders {sorted(declared_conf)} do not match shared exogenous parents {sorted(actual)}",
            "confounders",
        )
    report = validate_task(task)
    if not report.ok:
        raise SpecFormatError("; ".join(report.errors))
    return task


def _require_list(obj, key, path=""):
    v = obj.get(key)
    if not isinstance(v, (list, tuple)):
        raise SpecFormatError(f"missing or non-list {key!r}", path or key)
    return v


def _require_str(obj, key, path=""):
    v = obj.get(key)
    if not isinstance(v, str) or not v:
        raise SpecFormatError(f"missing or non-string {key!r}", path or key)
    return v


# --------------------------------------------------------------- policy docs


def emit_policy(task: FiniteTask, policy: Policy) -> dict:
    problems = validate_policy(task, policy)
    if problems:
        raise SpecFormatError("; ".join(problems))
    actions = {}
    for action, inputs in task.policy_space:
        rows = []
        for row in task.input_rows(action):
            dist = policy.rules[action][row]
            rows.append(
                {
                    "given": [encode_value(v) for v in row],
                    "distribution": [
                        [encode_value(v), encode_rational(p)]
                        for v, p in sorted(dist.items(), key=lambda kv: str(kv[0]))
                        if p != 0
                    ],
                }
            )
        actions[action] = {
            "inputs": list(inputs),
            "domain": [encode_value(v) for v in task.domains[action]],
            "rows": rows,
        }
    return {"format": FORMAT_POLICY, "actions": actions}


def parse_policy(task: FiniteTask, doc: Mapping) -> Policy:
    if not isinstance(doc, Mapping):
        raise SpecFormatError("policy document must be an object")
    if doc.get("format", FORMAT_POLICY) != FORMAT_POLICY:
        raise SpecFormatError(f"unknown format {doc.get('format')!r}", "format")
    body = doc.get("actions")
    if not isinstance(body, Mapping):
        raise SpecFormatError("missing actions section", "actions")
    rules = {}
    for action, inputs in task.policy_space:
        if action not in body:
            raise SpecFormatError(f"no rules for action {action}", "actions")
        entry = body[action]
        path = f"actions.{action}"
        if list(entry.get("inputs", ())) != list(inputs):
            raise SpecFormatError(f"inputs do not match the task's {list(inputs)}", path)
        rows = {}
        for j, row in enumerate(_require_list(entry, "rows", path)):
            rpath = f"{path}.rows[{j}]"
            given = tuple(decode_value(v, rpath) for v in _require_list(row, "given", rpath))
            dist = {}
            for pair in _require_list(row, "distribution", rpath):
                if not isinstance(pair, (list, tuple)) or len(pair) != 2:
                    raise SpecFormatError("distribution entries are [value, probability] pairs", rpath)
                dist[decode_value(pair[0], rpath)] = decode_rational(pair[1], rpath)
            rows[given] = dist
        rules[action] = rows
    policy = Policy(rules, provenance="file")
    problems = validate_policy(task, policy)
    if problems:
        raise SpecFormatError("; ".join(problems))
    return policy


# ------------------------------------------------------------------ documents


def to_json(doc: Mapping) -> str:
    """Canonical rendering: sorted keys, two-space indent, trailing newline."""
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def from_json(text: str) -> dict:
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise SpecFormatError(f"invalid JSON: {e}") from None
