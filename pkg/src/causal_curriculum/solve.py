"""Exact optimal policies by backward induction over the relevance order,
a seeded tabular learner, and evaluation helpers.

The solver walks the relevance-graph condensation (first component to
optimize first).  A singleton component is solved row by row from the exact
conditional reward of its downstream signals; a larger component couples its
members' inputs, so it is solved by exhaustive search over the deterministic
decision-rule combinations of its members (capped).  Not-yet-optimized
actions behave uniformly during the conditionals, which leaves them
well-defined and maximally supported; rows that no behavior can reach get a
deterministic default rule (smallest action value).

Ties everywhere break toward the lexicographically smallest action value,
in the solver and in the learner's greedy extraction alike, so repeated
runs are bit-identical.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from random import Random
from typing import Mapping, Sequence

from .editability import relevance_graph
from .scm import (
    AnyTask,
    BudgetExceededError,
    FiniteTask,
    Policy,
    TaskError,
    as_task,
    expected_reward,
    reachable_input_rows,
    uniform_policy,
    value_key,
)

DEFAULT_SCC_CAP = 4096


def _downstream_reward_weights(task: FiniteTask, members: Sequence[str]) -> dict[str, Fraction]:
    """Reward node -> discount weight, restricted to descendants of members."""
    de = set(task.diagram.intervened().descendants(members))
    gamma = task.discount
    return {y: gamma**i for i, y in enumerate(task.reward_nodes) if y in de}


def _solve_with_support(t: AnyTask, scc_cap: int = DEFAULT_SCC_CAP):
    task = as_task(t)
    rel = relevance_graph(task)
    rules = {a: dict(rows) for a, rows in uniform_policy(task).rules.items()}
    decided: dict[str, set[tuple]] = {a: set() for a in task.actions}
    for component in rel.sccs:
        if len(component) == 1:
            _solve_singleton(task, component[0], rules, decided)
        else:
            _solve_component(task, component, rules, decided, scc_cap)
    return Policy(rules, provenance="exact"), decided


def solve_optimal(t: AnyTask, *, scc_cap: int = DEFAULT_SCC_CAP) -> Policy:
    """Exact optimal policy for a finite task; deterministic output."""
    policy, _decided = _solve_with_support(t, scc_cap)
    return policy


def _solve_singleton(task: FiniteTask, action: str, rules, decided) -> None:
    weights = _downstream_reward_weights(task, [action])
    inputs = task.inputs_of(action)
    domain = task.domains[action]
    behavior = Policy(rules)
    mass: dict[tuple, dict] = {}
    gain: dict[tuple, dict] = {}
    if weights:
        for env, p in task.enumerate_support(behavior):
            row = tuple(env[s] for s in inputs)
            x = env[action]
            r = sum((w * Fraction(env[y]) for y, w in weights.items()), Fraction(0))
            m = mass.setdefault(row, {})
            g = gain.setdefault(row, {})
            m[x] = m.get(x, Fraction(0)) + p
            g[x] = g.get(x, Fraction(0)) + p * r
    new_rows = {}
    default = min(domain, key=value_key)
    for row in task.input_rows(action):
        m = mass.get(row)
        if not m:
            new_rows[row] = {default: Fraction(1)}
            continue
        best_value = None
        best_q = None
        for x in sorted(domain, key=value_key):
            if x not in m or m[x] == 0:
                continue
            q = gain[row][x] / m[x]
            if best_q is None or q > best_q:
                best_q, best_value = q, x
        new_rows[row] = {best_value: Fraction(1)}
        decided[action].add(row)
    rules[action] = new_rows


def _solve_component(task: FiniteTask, component: Sequence[str], rules, decided, scc_cap: int) -> None:
    """Jointly optimize a strongly connected component of the relevance graph.

    Exhaustive over deterministic rule combinations of the members, staying
    inside the declared policy space (each member still sees only its own
    inputs).  Candidates are scanned in lexicographic order so the first
    maximizer encountered is the canonical one.
    """
    members = sorted(component)
    weights = _downstream_reward_weights(task, members)
    row_lists = {a: task.input_rows(a) for a in members}
    total = 1
    for a in members:
        total *= len(task.domains[a]) ** len(row_lists[a])
        if total > scc_cap:
            raise BudgetExceededError(
                f"joint optimization of {members} needs {total}+ rule combinations (cap {scc_cap})"
            )
    value_lists = {a: tuple(sorted(task.domains[a], key=value_key)) for a in members}
    per_member_rules = []
    for a in members:
        per_member_rules.append(
            list(itertools.product(value_lists[a], repeat=len(row_lists[a])))
        )
    best_value = None
    best_combo = None
    for combo in itertools.product(*per_member_rules):
        trial = dict(rules)
        for a, assignment in zip(members, combo):
            trial[a] = {
                row: {v: Fraction(1)} for row, v in zip(row_lists[a], assignment)
            }
        policy = Policy(trial)
        value = Fraction(0)
        for env, p in task.enumerate_support(policy):
            r = sum((w * Fraction(env[y]) for y, w in weights.items()), Fraction(0))
            value += p * r
        if best_value is None or value > best_value:
            best_value, best_combo = value, combo
    for a, assignment in zip(members, best_combo):
        rules[a] = {row: {v: Fraction(1)} for row, v in zip(row_lists[a], assignment)}
        decided[a].update(row_lists[a])


# -------------------------------------------------------------------- learner


@dataclass(frozen=True)
class LearnerConfig:
    episodes: int
    learning_rate: Fraction = Fraction(1, 10)
    exploration: Fraction = Fraction(1, 10)
    seed: int = 0

    def __post_init__(self):
        if self.episodes < 0:
            raise TaskError("episodes must be >= 0")
        for name in ("learning_rate", "exploration"):
            v = Fraction(getattr(self, name))
            object.__setattr__(self, name, v)
            if not (0 < v <= 1):
                raise TaskError(f"{name} must lie in (0, 1]")


def q_learn(t: AnyTask, cfg: LearnerConfig, init: Policy | None = None) -> Policy:
    """Tabular temporal-difference control over the task's input rows.

    Stage i bootstraps from stage i+1; each reward node is attributed to the
    latest action that precedes it in topological order and enters the
    target already discounted, so Q values estimate returns-to-go.  Rows
    never visited keep the initial policy's rule.  Deterministic per seed.
    """
    task = as_task(t)
    if init is None:
        init = uniform_policy(task)
    if cfg.episodes == 0:
        return Policy({a: dict(rows) for a, rows in init.rules.items()}, provenance="learned")
    actions = task.actions
    alpha = float(cfg.learning_rate)
    epsilon = cfg.exploration
    rng = Random(cfg.seed)
    gamma = task.discount

    topo = task.diagram.topological_order()
    position = {n: i for i, n in enumerate(topo)}
    reward_owner: dict[str, str | None] = {}
    for y in task.reward_nodes:
        owner = None
        for a in actions:
            if position[a] < position[y]:
                owner = a
        reward_owner[y] = owner
    reward_weight = {y: gamma**i for i, y in enumerate(task.reward_nodes)}

    domains = {a: tuple(sorted(task.domains[a], key=value_key)) for a in actions}
    q: dict[str, dict[tuple, dict]] = {
        a: {row: {v: 0.0 for v in domains[a]} for row in task.input_rows(a)} for a in actions
    }
    visited: dict[str, set[tuple]] = {a: set() for a in actions}

    exo = [(e.name, e.domain, e.probabilities) for e in task.exogenous]
    plan = task._plan

    for _episode in range(cfg.episodes):
        env: dict = {}
        for name, dom, probs in exo:
            env[name] = _draw(dom, probs, rng)
        taken: list[tuple[str, tuple, object]] = []
        for step in plan:
            if step[0] == "chance":
                _, node, fn = step
                env[node] = fn(env)
            else:
                _, node, inputs, _domain = step
                row = tuple(env[s] for s in inputs)
                if rng.random() < epsilon:
                    choice = domains[node][rng.randrange(len(domains[node]))]
                else:
                    choice = _greedy(q[node][row])
                env[node] = choice
                taken.append((node, row, choice))
        immediate = {a: 0.0 for a in actions}
        for y in task.reward_nodes:
            owner = reward_owner[y]
            if owner is not None:
                immediate[owner] += float(reward_weight[y] * Fraction(env[y]))
        for k, (action, row, choice) in enumerate(taken):
            if k + 1 < len(taken):
                nxt_action, nxt_row, _ = taken[k + 1]
                bootstrap = max(q[nxt_action][nxt_row].values())
            else:
                bootstrap = 0.0
            target = immediate[action] + bootstrap
            cell = q[action][row]
            cell[choice] += alpha * (target - cell[choice])
            visited[action].add(row)

    rules = {}
    for a in actions:
        rows = {}
        for row in task.input_rows(a):
            if row in visited[a]:
                rows[row] = {_greedy(q[a][row]): Fraction(1)}
            else:
                rows[row] = dict(init.rules[a][row])
        rules[a] = rows
    return Policy(rules, provenance="learned")


def _greedy(cell: Mapping) -> object:
    top = max(cell.values())
    return min((v for v, x in cell.items() if x == top), key=value_key)


def _draw(values, probs, rng: Random):
    u = rng.random()
    acc = Fraction(0)
    for v, p in zip(values, probs):
        acc += p
        if u < acc:
            return v
    return values[-1]


# ------------------------------------------------------------------- overlap


@dataclass(frozen=True)
class ActionOverlap:
    action: str
    shared_rows: tuple[tuple, ...]
    agreeing: tuple[tuple, ...]
    differing: tuple[tuple, ...]

    @property
    def invariant(self) -> bool:
        return not self.differing


@dataclass(frozen=True)
class OverlapReport:
    entries: Mapping[str, ActionOverlap]

    @property
    def invariant_actions(self) -> tuple[str, ...]:
        return tuple(sorted(a for a, e in self.entries.items() if e.invariant))

    def all_invariant(self) -> bool:
        return all(e.invariant for e in self.entries.values())


def rule_overlap(
    policy_a: Policy,
    policy_b: Policy,
    task_a: AnyTask,
    task_b: AnyTask | None = None,
) -> OverlapReport:
    """Compare argmax rules of two policies on shared reachable inputs.

    Rows for each side are the reachable input rows of that policy in its
    own task (task_b defaults to task_a); the comparison runs over the
    intersection, per action.
    """
    if task_b is None:
        task_b = task_a
    base_a = as_task(task_a)
    rows_a = reachable_input_rows(task_a, policy_a)
    rows_b = reachable_input_rows(task_b, policy_b)
    entries = {}
    for action, _inputs in base_a.policy_space:
        shared = sorted(rows_a[action] & rows_b[action], key=lambda r: [value_key(v) for v in r])
        agree, differ = [], []
        for row in shared:
            if policy_a.argmax(action, row) == policy_b.argmax(action, row):
                agree.append(row)
            else:
                differ.append(row)
        entries[action] = ActionOverlap(action, tuple(shared), tuple(agree), tuple(differ))
    return OverlapReport(entries)


# ----------------------------------------------------------------- aggregate


def normalized_iqm(values: Sequence, lower, upper) -> Fraction:
    """Interquartile mean rescaled by known bounds, exact.

    With n divisible by four this is (2/n) * sum of the middle half of the
    sorted, shifted values over (upper - lower).  Otherwise floor(n/4)
    entries are trimmed from each end and the remainder averaged (documented
    extension of the divisible case).
    """
    lo = Fraction(lower)
    hi = Fraction(upper)
    if hi <= lo:
        raise TaskError(f"degenerate bounds [{lo}, {hi}]")
    xs = sorted(Fraction(v) for v in values)
    if not xs:
        raise TaskError("empty value list")
    if xs[0] < lo or xs[-1] > hi:
        raise TaskError("values outside declared bounds")
    n = len(xs)
    k = n // 4
    middle = xs[k : n - k]
    return sum(((x - lo) / (hi - lo) for x in middle), Fraction(0)) / len(middle)


@dataclass(frozen=True)
class EvalReport:
    expected: Fraction
    overlap: OverlapReport | None = None
    iqm: Fraction | None = None


def evaluate(
    t: AnyTask,
    policy: Policy,
    *,
    reference: Policy | None = None,
    reference_task: AnyTask | None = None,
    sample_returns: Sequence | None = None,
    bounds: tuple | None = None,
) -> EvalReport:
    """Expected reward plus optional rule comparison and normalized IQM."""
    expected = expected_reward(t, policy)
    overlap = None
    if reference is not None:
        overlap = rule_overlap(policy, reference, t, reference_task or t)
    iqm = None
    if sample_returns is not None:
        if bounds is None:
            raise TaskError("normalized IQM needs explicit bounds")
        iqm = normalized_iqm(sample_returns, bounds[0], bounds[1])
    return EvalReport(expected, overlap, iqm)
