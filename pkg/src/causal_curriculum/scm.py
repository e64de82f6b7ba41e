"""Finite discrete structural causal models with exact rational evaluation.

A FiniteTask bundles an SCM, a policy space, and a discounted-sum reward.
Every probability in the engine is a Fraction; interventional distributions
are computed by exhaustive enumeration of exogenous joint values and action
branches, so all reported numbers are exact.  Floating point never enters
evaluation (only the seeded sampler draws floats, and those are compared
against exact thresholds).

Tasks, policies, and edits are immutable by convention; all operations are
pure functions, so values can be shared freely between threads.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from random import Random
from typing import Callable, Iterable, Mapping, Sequence, Union

from .diagram import CausalDiagram, GraphError, NodeRole, ValidationReport
from .expr import Expr, ExpressionError, parse_expression

Value = Union[int, str, Fraction]

_BUDGET_ENV = "CAUSAL_CURRICULUM_BUDGET"
_DEFAULT_BUDGET = 1_000_000


class BudgetExceededError(RuntimeError):
    """Enumeration would visit more leaves than the configured cap allows."""


class TaskError(ValueError):
    pass


def enumeration_budget() -> int:
    raw = os.environ.get(_BUDGET_ENV)
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return _DEFAULT_BUDGET


def value_key(v: Value):
    """Total order over domain values: numbers first, then strings."""
    if isinstance(v, bool):
        return (0, Fraction(int(v)))
    if isinstance(v, (int, Fraction)):
        return (0, Fraction(v))
    return (1, str(v))


def _check_domain(values: Sequence[Value], where: str) -> tuple[Value, ...]:
    vals = tuple(values)
    if not vals:
        raise TaskError(f"{where}: empty domain")
    if len(set(vals)) != len(vals):
        raise TaskError(f"{where}: duplicate domain values")
    return vals


@dataclass(frozen=True)
class FiniteDomain:
    values: tuple[Value, ...]

    def __post_init__(self):
        _check_domain(self.values, "domain")

    def __iter__(self):
        return iter(self.values)

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class ExogenousVar:
    name: str
    domain: tuple[Value, ...]
    probabilities: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "domain", _check_domain(self.domain, self.name))
        probs = tuple(Fraction(p) for p in self.probabilities)
        object.__setattr__(self, "probabilities", probs)
        if len(probs) != len(self.domain):
            raise TaskError(f"{self.name}: {len(probs)} probabilities for {len(self.domain)} values")
        if any(p < 0 for p in probs):
            raise TaskError(f"{self.name}: negative probability")
        if sum(probs) != 1:
            raise TaskError(f"{self.name}: probabilities sum to {sum(probs)}, not 1")


@dataclass(frozen=True)
class StructuralFunction:
    """Deterministic map from parent values to an output value.

    `table` is always materialised and is what evaluation uses; `expr` is
    kept when the function was authored as an expression so documents can
    round-trip it.
    """

    output: str
    parents: tuple[str, ...]
    table: Mapping[tuple[Value, ...], Value]
    expr: Expr | None = None

    def __call__(self, env: Mapping[str, Value]) -> Value:
        return self.table[tuple(env[p] for p in self.parents)]


def compile_function(
    output: str,
    parents: Sequence[str],
    *,
    expr: Expr | str | None = None,
    table: Mapping[tuple, Value] | None = None,
    parent_domains: Mapping[str, Sequence[Value]] | None = None,
) -> StructuralFunction:
    """Build a StructuralFunction from a table or an expression.

    Expressions are compiled to a full table over the parent product domain,
    which requires `parent_domains`.  A provided table must cover the full
    product domain exactly.
    """
    parents = tuple(parents)
    if isinstance(expr, str):
        expr = parse_expression(expr)
    if table is None:
        if expr is None:
            raise TaskError(f"{output}: needs a table or an expression")
        if parent_domains is None:
            raise TaskError(f"{output}: expression compilation needs parent domains")
        missing = expr.references() - set(parents)
        if missing:
            raise TaskError(f"{output}: expression references non-parents {sorted(missing)}")
        rows = {}
        for combo in itertools.product(*[tuple(parent_domains[p]) for p in parents]):
            rows[combo] = expr.evaluate(dict(zip(parents, combo)))
        table = rows
    else:
        table = {tuple(k): v for k, v in table.items()}
        if parent_domains is not None:
            expect = set(itertools.product(*[tuple(parent_domains[p]) for p in parents]))
            if set(table) != expect:
                raise TaskError(f"{output}: table does not cover the parent product domain")
    return StructuralFunction(output, parents, table, expr)


# --------------------------------------------------------------------- policy


@dataclass(frozen=True)
class Policy:
    """Per-action decision tables with exact probabilities.

    rules[action][input_row][value] -> Fraction; every row distribution sums
    to one and rows cover the full input product domain.
    """

    rules: Mapping[str, Mapping[tuple, Mapping[Value, Fraction]]]
    provenance: str | None = None

    def probability(self, action: str, row: tuple, value: Value) -> Fraction:
        return self.rules[action][row].get(value, Fraction(0))

    def argmax(self, action: str, row: tuple) -> Value:
        dist = self.rules[action][row]
        top = max(dist.values())
        return min((v for v, p in dist.items() if p == top), key=value_key)

    def replace(self, action: str, row: tuple, value: Value) -> "Policy":
        """New policy with one row made deterministic at `value`."""
        rules = {a: dict(rows) for a, rows in self.rules.items()}
        rules[action][row] = {value: Fraction(1)}
        return Policy(rules, self.provenance)

    def is_deterministic(self) -> bool:
        return all(
            max(dist.values()) == 1 for rows in self.rules.values() for dist in rows.values()
        )


def uniform_policy(task: "FiniteTask") -> Policy:
    rules = {}
    for action, inputs in task.policy_space:
        dom = task.domains[action]
        p = Fraction(1, len(dom))
        rows = {}
        for row in task.input_rows(action):
            rows[row] = {v: p for v in dom}
        rules[action] = rows
    return Policy(rules, provenance="uniform")


def deterministic_policy(task: "FiniteTask", choice: Mapping[str, Callable[[tuple], Value]] | Callable[[str, tuple], Value], provenance: str | None = None) -> Policy:
    """Build a deterministic policy from per-row choices.

    `choice` is either a mapping action -> fn(row) -> value or a single
    fn(action, row) -> value.
    """
    rules = {}
    for action, _inputs in task.policy_space:
        rows = {}
        for row in task.input_rows(action):
            v = choice[action](row) if isinstance(choice, Mapping) else choice(action, row)
            if v not in task.domains[action]:
                raise TaskError(f"{action}: value {v!r} outside domain")
            rows[row] = {v: Fraction(1)}
        rules[action] = rows
    return Policy(rules, provenance)


def validate_policy(task: "FiniteTask", policy: Policy) -> list[str]:
    problems = []
    for action, _inputs in task.policy_space:
        if action not in policy.rules:
            problems.append(f"missing rules for {action}")
            continue
        rows = policy.rules[action]
        expect = set(task.input_rows(action))
        if set(rows) != expect:
            problems.append(f"{action}: rows do not cover the input product domain")
        dom = set(task.domains[action])
        for row, dist in rows.items():
            if sum(dist.values()) != 1:
                problems.append(f"{action}{row}: probabilities sum to {sum(dist.values())}")
            if set(dist) - dom:
                problems.append(f"{action}{row}: values outside action domain")
    return problems


# ----------------------------------------------------------------------- task


@dataclass
class FiniteTask:
    """Target task: finite SCM + policy space + discounted-sum reward.

    `policy_space` is the ordered tuple of (action, input tuple) pairs; its
    order is the temporal order of the actions.  `reward_nodes` is ordered;
    reward node i is discounted by discount**i.
    """

    diagram: CausalDiagram
    exogenous: tuple[ExogenousVar, ...]
    functions: Mapping[str, StructuralFunction]
    policy_space: tuple[tuple[str, tuple[str, ...]], ...]
    domains: Mapping[str, tuple[Value, ...]]
    reward_nodes: tuple[str, ...]
    discount: Fraction = Fraction(1)
    name: str | None = None

    def __post_init__(self):
        self.discount = Fraction(self.discount)

    # --------------------------------------------------------------- queries

    @property
    def actions(self) -> tuple[str, ...]:
        return tuple(a for a, _ in self.policy_space)

    def inputs_of(self, action: str) -> tuple[str, ...]:
        for a, ss in self.policy_space:
            if a == action:
                return ss
        raise TaskError(f"unknown action {action!r}")

    def input_rows(self, action: str) -> tuple[tuple, ...]:
        """All input tuples for an action, in domain product order."""
        inputs = self.inputs_of(action)
        return tuple(itertools.product(*[self.domains[s] for s in inputs]))

    @cached_property
    def exogenous_by_name(self) -> dict[str, ExogenousVar]:
        return {e.name: e for e in self.exogenous}

    @cached_property
    def _plan(self) -> list[tuple]:
        """Endogenous evaluation steps in topological order."""
        order = self.diagram.topological_order()
        action_set = set(self.actions)
        steps = []
        for node in order:
            role = self.diagram.role(node)
            if role in (NodeRole.EDIT_INDICATOR, NodeRole.REGIME):
                continue
            if node in action_set:
                steps.append(("action", node, self.inputs_of(node), self.domains[node]))
            else:
                steps.append(("chance", node, self.functions[node]))
        return steps

    @cached_property
    def reward_exponents(self) -> dict[str, int]:
        return {y: i for i, y in enumerate(self.reward_nodes)}

    def reward_of(self, env: Mapping[str, Value]) -> Fraction:
        gamma = self.discount
        total = Fraction(0)
        for i, y in enumerate(self.reward_nodes):
            total += gamma**i * Fraction(env[y])
        return total

    # ----------------------------------------------------------- enumeration

    def enumerate_support(self, policy: Policy, budget: int | None = None):
        """Yield (env, probability) over every positive-probability world.

        `env` maps exogenous and endogenous names to values and is reused
        between yields; consumers must copy what they keep.
        """
        budget = budget if budget is not None else enumeration_budget()
        exo_choices = [
            [(v, p) for v, p in zip(e.domain, e.probabilities) if p > 0] for e in self.exogenous
        ]
        exo_names = [e.name for e in self.exogenous]
        plan = self._plan
        count = 0
        env: dict[str, Value] = {}

        def walk(step_index: int, prob: Fraction):
            nonlocal count
            if step_index == len(plan):
                count += 1
                if count > budget:
                    raise BudgetExceededError(
                        f"enumeration exceeds {budget} leaves (set ${_BUDGET_ENV} to raise)"
                    )
                yield env, prob
                return
            kind, node, *rest = plan[step_index]
            if kind == "chance":
                env[node] = rest[0](env)
                yield from walk(step_index + 1, prob)
            else:
                inputs, domain = rest
                row = tuple(env[s] for s in inputs)
                dist = policy.rules[node][row]
                for v in domain:
                    p = dist.get(v, Fraction(0))
                    if p > 0:
                        env[node] = v
                        yield from walk(step_index + 1, prob * p)

        for combo in itertools.product(*exo_choices):
            p0 = Fraction(1)
            for name, (v, p) in zip(exo_names, combo):
                env[name] = v
                p0 *= p
            yield from walk(0, p0)

    # -------------------------------------------------------------- validation

    def validate(self) -> ValidationReport:
        return validate_task(self)


@dataclass(frozen=True)
class Distribution:
    """Exact joint distribution over an ordered tuple of variables."""

    variables: tuple[str, ...]
    table: Mapping[tuple[Value, ...], Fraction]

    def probability(self, values: tuple) -> Fraction:
        return self.table.get(tuple(values), Fraction(0))

    def total(self) -> Fraction:
        return sum(self.table.values(), Fraction(0))

    def expectation(self) -> Fraction:
        if len(self.variables) != 1:
            raise TaskError("expectation needs a single-variable distribution")
        return sum((Fraction(k[0]) * p for k, p in self.table.items()), Fraction(0))

    def support(self) -> tuple[tuple[Value, ...], ...]:
        return tuple(sorted((k for k, p in self.table.items() if p > 0), key=lambda t: [value_key(v) for v in t]))


@dataclass(frozen=True)
class UnsupportedEvent:
    """Distinguished result for conditioning on a probability-zero event."""

    given: tuple[tuple[str, Value], ...]

    def __bool__(self) -> bool:
        return False


# ---------------------------------------------------------------------- edits


@dataclass(frozen=True)
class SetConstant:
    node: str
    value: Value


@dataclass(frozen=True)
class ReplaceFunction:
    node: str
    function: StructuralFunction


@dataclass(frozen=True)
class ReweightExogenous:
    name: str
    probabilities: tuple[Fraction, ...]


Edit = Union[SetConstant, ReplaceFunction, ReweightExogenous]


@dataclass
class SourceTask:
    """Edited SCM sharing the target's diagram, policy space, and reward."""

    base: FiniteTask
    edits: tuple[Edit, ...]
    delta: tuple[str, ...]
    task: FiniteTask

    @property
    def diagram(self) -> CausalDiagram:
        return self.base.diagram


AnyTask = Union[FiniteTask, SourceTask]


def as_task(t: AnyTask) -> FiniteTask:
    return t.task if isinstance(t, SourceTask) else t


def _exogenous_children(task: FiniteTask, exo_name: str) -> tuple[str, ...]:
    return tuple(
        sorted(name for name, fn in task.functions.items() if exo_name in fn.parents)
    )


def apply_edits(task: AnyTask, edits: Iterable[Edit]) -> SourceTask:
    """Materialise a source task; the edited SCM keeps the target's diagram.

    A SetConstant drops the node's parents in the edited SCM only; replacement
    functions may use any subset of the node's existing parents; reweighting
    an exogenous variable counts every one of its children as edited.  Edits
    touching an action or a reward are rejected.
    """
    base = as_task(task)
    protected = set(base.actions) | set(base.reward_nodes)
    functions = dict(base.functions)
    exogenous = list(base.exogenous)
    exo_index = {e.name: i for i, e in enumerate(exogenous)}
    delta: set[str] = set()
    edits = tuple(edits)
    for e in edits:
        if isinstance(e, SetConstant):
            if e.node not in functions:
                raise TaskError(f"cannot edit {e.node!r}: not an endogenous chance node")
            if e.node in protected:
                raise TaskError(f"cannot edit {e.node!r}: actions and rewards are not editable")
            if e.value not in base.domains[e.node]:
                raise TaskError(f"{e.node}: constant {e.value!r} outside domain")
            functions[e.node] = StructuralFunction(e.node, (), {(): e.value})
            delta.add(e.node)
        elif isinstance(e, ReplaceFunction):
            fn = e.function
            if e.node in protected or e.node not in base.functions:
                raise TaskError(f"cannot edit {e.node!r}")
            if fn.output != e.node:
                raise TaskError(f"replacement output {fn.output!r} != {e.node!r}")
            if not set(fn.parents) <= set(base.functions[e.node].parents):
                raise TaskError(f"{e.node}: replacement adds parents outside the diagram")
            dom = set(base.domains[e.node])
            if not set(fn.table.values()) <= dom:
                raise TaskError(f"{e.node}: replacement leaves the output domain")
            functions[e.node] = fn
            delta.add(e.node)
        elif isinstance(e, ReweightExogenous):
            if e.name not in exo_index:
                raise TaskError(f"unknown exogenous variable {e.name!r}")
            old = exogenous[exo_index[e.name]]
            children = _exogenous_children(base, e.name)
            bad = [c for c in children if c in protected]
            if bad:
                raise TaskError(f"reweighting {e.name} would edit protected nodes {bad}")
            exogenous[exo_index[e.name]] = ExogenousVar(e.name, old.domain, tuple(e.probabilities))
            delta.update(children)
        else:
            raise TaskError(f"unknown edit {e!r}")
    edited = FiniteTask(
        diagram=base.diagram,
        exogenous=tuple(exogenous),
        functions=functions,
        policy_space=base.policy_space,
        domains=base.domains,
        reward_nodes=base.reward_nodes,
        discount=base.discount,
        name=(base.name or "task") + "+edits",
    )
    return SourceTask(base=base, edits=edits, delta=tuple(sorted(delta)), task=edited)


# ----------------------------------------------------------------- operations


def interventional_distribution(
    t: AnyTask,
    policy: Policy,
    query: Iterable[str],
    given: Mapping[str, Value] | None = None,
) -> Distribution | UnsupportedEvent:
    """Exact P(query | given; do(policy)), by enumeration.

    Conditioning renormalises exactly; a zero-probability conditioning event
    yields an UnsupportedEvent instead of a table.
    """
    task = as_task(t)
    names = tuple(sorted({str(q) for q in query}))
    if not names:
        raise TaskError("empty query")
    known = set(task.domains) | set(task.exogenous_by_name)
    for n in names:
        if n not in known:
            raise TaskError(f"unknown query variable {n!r}")
    given = dict(given or {})
    for n in given:
        if n not in known:
            raise TaskError(f"unknown conditioning variable {n!r}")
    table: dict[tuple, Fraction] = {}
    total = Fraction(0)
    for env, p in task.enumerate_support(policy):
        if any(env[k] != v for k, v in given.items()):
            continue
        total += p
        key = tuple(env[n] for n in names)
        table[key] = table.get(key, Fraction(0)) + p
    if total == 0:
        return UnsupportedEvent(tuple(sorted(given.items())))
    if given:
        table = {k: v / total for k, v in table.items()}
    return Distribution(names, table)


def expected_reward(t: AnyTask, policy: Policy) -> Fraction:
    task = as_task(t)
    total = Fraction(0)
    for env, p in task.enumerate_support(policy):
        total += p * task.reward_of(env)
    return total


def conditional_expected_reward_node(
    t: AnyTask, policy: Policy, node: str, given: Mapping[str, Value]
) -> Fraction | UnsupportedEvent:
    """E[node | given; do(policy)] for a numeric node; exact."""
    dist = interventional_distribution(t, policy, [node], given)
    if isinstance(dist, UnsupportedEvent):
        return dist
    return dist.expectation()


def reachable_values(t: AnyTask, policy: Policy, variables: Sequence[str]) -> tuple[tuple, ...]:
    """Support of the joint of `variables` under do(policy), sorted."""
    task = as_task(t)
    names = tuple(variables)
    seen: set[tuple] = set()
    for env, p in task.enumerate_support(policy):
        seen.add(tuple(env[n] for n in names))
    return tuple(sorted(seen, key=lambda row: [value_key(v) for v in row]))


def reachable_input_rows(t: AnyTask, policy: Policy) -> dict[str, set[tuple]]:
    """Reachable input rows for every action, from a single enumeration."""
    task = as_task(t)
    inputs = {a: ss for a, ss in task.policy_space}
    out: dict[str, set[tuple]] = {a: set() for a in inputs}
    for env, p in task.enumerate_support(policy):
        for a, ss in inputs.items():
            out[a].add(tuple(env[s] for s in ss))
    return out


@dataclass(frozen=True)
class Episode:
    values: Mapping[str, Value]
    exogenous: Mapping[str, Value]
    reward: Fraction


def sample_episode(t: AnyTask, policy: Policy, seed: int) -> Episode:
    """One trajectory under do(policy); identical seeds give identical runs."""
    task = as_task(t)
    rng = Random(seed)
    env, exo = _sample_env(task, policy, rng)
    return Episode(values=env, exogenous=exo, reward=task.reward_of(env))


def _sample_env(task: FiniteTask, policy: Policy, rng: Random):
    exo: dict[str, Value] = {}
    env: dict[str, Value] = {}
    for e in task.exogenous:
        exo[e.name] = _draw(e.domain, e.probabilities, rng)
        env[e.name] = exo[e.name]
    for step in task._plan:
        if step[0] == "chance":
            _, node, fn = step
            env[node] = fn(env)
        else:
            _, node, inputs, domain = step
            row = tuple(env[s] for s in inputs)
            dist = policy.rules[node][row]
            probs = [dist.get(v, Fraction(0)) for v in domain]
            env[node] = _draw(domain, probs, rng)
    return env, exo


def _draw(values, probs, rng: Random) -> Value:
    u = rng.random()
    acc = Fraction(0)
    for v, p in zip(values, probs):
        acc += p
        if u < acc:
            return v
    return values[-1]


# ----------------------------------------------------------------- validation


def validate_task(t: AnyTask) -> ValidationReport:
    """Report-style consistency check of SCM, diagram, and policy space."""
    edited = isinstance(t, SourceTask)
    task = as_task(t)
    errors: list[str] = []
    warnings: list[str] = []
    diagram_report = task.diagram.validate()
    errors.extend(diagram_report.errors)
    warnings.extend(diagram_report.warnings)

    exo_names = set()
    for e in task.exogenous:
        if e.name in exo_names:
            errors.append(f"duplicate exogenous variable {e.name}")
        exo_names.add(e.name)

    action_set = set(task.actions)
    for node in task.diagram.nodes:
        role = task.diagram.role(node)
        if role in (NodeRole.EDIT_INDICATOR, NodeRole.REGIME):
            continue
        if node in action_set:
            continue
        if node not in task.functions:
            errors.append(f"no structural function for {node}")

    shared: set[tuple[str, str]] = set()
    by_exo: dict[str, list[str]] = {}
    for name, fn in task.functions.items():
        if fn.output != name:
            errors.append(f"function for {name} declares output {fn.output}")
        endo_parents = [p for p in fn.parents if p not in exo_names]
        unknown = [p for p in endo_parents if not task.diagram.has_node(p)]
        if unknown:
            errors.append(f"{name}: unknown parents {unknown}")
            continue
        declared = set(task.diagram.parents(name)) if task.diagram.has_node(name) else set()
        if edited:
            if not set(endo_parents) <= declared:
                errors.append(f"{name}: edited function adds parents outside the diagram")
        elif set(endo_parents) != declared:
            errors.append(
                f"{name}: function parents {sorted(endo_parents)} != diagram parents {sorted(declared)}"
            )
        # domain coverage
        doms = []
        ok = True
        for p in fn.parents:
            if p in exo_names:
                doms.append(task.exogenous_by_name[p].domain)
            elif p in task.domains:
                doms.append(task.domains[p])
            else:
                ok = False
        if ok:
            expect = set(itertools.product(*doms)) if doms else {()}
            if set(fn.table) != expect:
                errors.append(f"{name}: table does not cover the parent product domain")
            out_dom = set(task.domains.get(name, ()))
            extra = set(fn.table.values()) - out_dom
            if extra:
                errors.append(f"{name}: table values {sorted(map(str, extra))} outside domain")
        for p in fn.parents:
            if p in exo_names:
                by_exo.setdefault(p, []).append(name)
    for exo, kids in by_exo.items():
        for a, b in itertools.combinations(sorted(set(kids)), 2):
            shared.add((a, b))
    if not edited:
        declared_bi = {tuple(sorted(e)) for e in task.diagram.bidirected}
        if declared_bi != shared:
            errors.append(
                f"bidirected edges {sorted(declared_bi)} do not match shared exogenous parents {sorted(shared)}"
            )

    # policy space legality (Def. of a policy space: no peeking at the future)
    names = [a for a, _ in task.policy_space]
    if len(set(names)) != len(names):
        errors.append("duplicate action in policy space")
    if not diagram_report.errors:
        for i, (a, ss) in enumerate(task.policy_space):
            later = names[i + 1 :]
            if later and a in task.diagram.descendants(later):
                errors.append(f"action {a} descends from a later action")
            de = set(task.diagram.descendants(names[i:]))
            for s in ss:
                if s in de:
                    errors.append(f"input {s} of {a} descends from {a} or a later action")
    for a, ss in task.policy_space:
        if task.diagram.action_inputs.get(a, ()) != ss:
            errors.append(f"policy space and diagram disagree on inputs of {a}")
    for y in task.reward_nodes:
        if not task.diagram.has_node(y):
            errors.append(f"reward node {y} missing from diagram")
    for node in task.reward_nodes:
        dom = task.domains.get(node, ())
        for v in dom:
            if isinstance(v, str):
                errors.append(f"reward {node}: non-numeric domain value {v!r}")
                break
    if not (0 < task.discount <= 1):
        errors.append(f"discount {task.discount} outside (0, 1]")
    return ValidationReport(tuple(errors), tuple(warnings))


# -------------------------------------------------------------------- builder


class TaskBuilder:
    """Incremental construction of a FiniteTask; infers the diagram.

    Declaration order of actions fixes the temporal order; bidirected edges
    are inferred from shared exogenous parents.
    """

    def __init__(self, name: str | None = None):
        self.name = name
        self._exogenous: list[ExogenousVar] = []
        self._chance: list[tuple[str, tuple[str, ...], dict | None, Expr | str | None, tuple]] = []
        self._actions: list[tuple[str, tuple[Value, ...], tuple[str, ...]]] = []
        self._rewards: list[str] = []
        self._roles: dict[str, NodeRole] = {}

    def exogenous(self, name, values, probabilities) -> "TaskBuilder":
        self._exogenous.append(
            ExogenousVar(name, tuple(values), tuple(Fraction(p) for p in probabilities))
        )
        return self

    def chance(self, name, parents=(), *, domain, table=None, expr=None, reward=False) -> "TaskBuilder":
        self._chance.append((name, tuple(parents), table, expr, _check_domain(domain, name)))
        self._roles[name] = NodeRole.REWARD if reward else NodeRole.STATE
        if reward:
            self._rewards.append(name)
        return self

    def reward(self, name, parents=(), *, domain, table=None, expr=None) -> "TaskBuilder":
        return self.chance(name, parents, domain=domain, table=table, expr=expr, reward=True)

    def action(self, name, *, domain, inputs) -> "TaskBuilder":
        self._actions.append((name, _check_domain(domain, name), tuple(inputs)))
        self._roles[name] = NodeRole.ACTION
        return self

    def build(self, discount: Fraction | int | str = 1) -> FiniteTask:
        exo_doms = {e.name: e.domain for e in self._exogenous}
        domains: dict[str, tuple[Value, ...]] = {}
        for name, _parents, _table, _expr, dom in self._chance:
            domains[name] = dom
        for name, dom, _inputs in self._actions:
            domains[name] = dom
        parent_domains = dict(exo_doms)
        parent_domains.update(domains)
        functions: dict[str, StructuralFunction] = {}
        directed: set[tuple[str, str]] = set()
        for name, parents, table, expr, _dom in self._chance:
            fn = compile_function(name, parents, expr=expr, table=table, parent_domains=parent_domains)
            functions[name] = fn
            for p in fn.parents:
                if p not in exo_doms:
                    directed.add((p, name))
        action_inputs = {}
        for name, _dom, inputs in self._actions:
            action_inputs[name] = inputs
            for s in inputs:
                directed.add((s, name))
        by_exo: dict[str, list[str]] = {}
        for name, fn in functions.items():
            for p in fn.parents:
                if p in exo_doms:
                    by_exo.setdefault(p, []).append(name)
        bidirected = set()
        for kids in by_exo.values():
            for a, b in itertools.combinations(sorted(set(kids)), 2):
                bidirected.add((a, b))
        diagram = CausalDiagram(self._roles, directed, bidirected, action_inputs)
        task = FiniteTask(
            diagram=diagram,
            exogenous=tuple(self._exogenous),
            functions=functions,
            policy_space=tuple((a, i) for a, _d, i in self._actions),
            domains=domains,
            reward_nodes=tuple(self._rewards),
            discount=Fraction(discount),
            name=self.name,
        )
        report = validate_task(task)
        if not report.ok:
            raise TaskError("built task is invalid: " + "; ".join(report.errors))
        return task
