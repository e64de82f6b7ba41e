"""Curricula over source tasks: the training loop, aligned-curriculum
construction, the alignment checker, and coverage-driven causal curriculum
learning.

Two training modes exist.  Exact mode treats "train to convergence" as one
exact solve per source task; the sequential loop then carries the solver's
canonical policy forward (its deterministic defaults fill rows the source
cannot reach).  Tabular mode threads Q tables through the tasks, so rows a
source never visits keep their previous rules.  The coverage-driven loop
always merges rather than replaces, updating only rows the current source
actually decides, because its guarantee depends on never clobbering rows
covered by earlier rounds.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from random import Random
from typing import Callable, Iterable, Mapping, Sequence

from .editability import NotSolubleError, find_max_edit, is_edit, soluble_order
from .scm import (
    AnyTask,
    Edit,
    FiniteTask,
    Policy,
    ReweightExogenous,
    SetConstant,
    SourceTask,
    TaskError,
    apply_edits,
    as_task,
    expected_reward,
    reachable_input_rows,
    uniform_policy,
    value_key,
)
from .solve import LearnerConfig, OverlapReport, _solve_with_support, q_learn, rule_overlap, solve_optimal

GeneratorHook = Callable[[FiniteTask, tuple[str, ...], int, int], list[Edit]]


class CoverageError(RuntimeError):
    """The coverage loop hit its round cap before spanning the target rows."""


@dataclass(frozen=True)
class Curriculum:
    """Ordered source tasks with their declared per-task action sets."""

    target: FiniteTask
    tasks: tuple[SourceTask, ...]
    action_sets: tuple[tuple[str, ...], ...]

    def __post_init__(self):
        if len(self.tasks) != len(self.action_sets):
            raise TaskError("one action set per source task required")
        for st in self.tasks:
            if st.base is not self.target and not st.base.diagram.same_structure(self.target.diagram):
                raise TaskError("curriculum tasks must share the target's diagram")

    def __len__(self):
        return len(self.tasks)


@dataclass(frozen=True)
class RunLogEntry:
    step: int
    actions: tuple[str, ...]
    delta: tuple[str, ...]
    source_value: Fraction
    target_value: Fraction


@dataclass(frozen=True)
class RunLog:
    mode: str
    seed: int
    entries: tuple[RunLogEntry, ...]

    @property
    def final_target_value(self) -> Fraction | None:
        return self.entries[-1].target_value if self.entries else None


def _learn_in(
    source: SourceTask,
    current: Policy,
    learner,
    seed: int,
    *,
    merge_only_decided: bool,
) -> Policy:
    if learner == "exact":
        solved, decided = _solve_with_support(source)
        if not merge_only_decided:
            return solved
        rules = {a: dict(rows) for a, rows in current.rules.items()}
        for action, rows in decided.items():
            for row in rows:
                rules[action][row] = dict(solved.rules[action][row])
        return Policy(rules, provenance="exact")
    if isinstance(learner, LearnerConfig):
        cfg = LearnerConfig(
            episodes=learner.episodes,
            learning_rate=learner.learning_rate,
            exploration=learner.exploration,
            seed=seed,
        )
        return q_learn(source, cfg, init=current)
    raise TaskError(f"unknown learner {learner!r}; use 'exact' or a LearnerConfig")


def curriculum_learning(
    curriculum: Curriculum, learner="exact", seed: int = 0
) -> tuple[Policy, RunLog]:
    """Train through the curriculum in order and log target values.

    The policy starts uniform; each source task is trained to its optimum
    (exact solve, or tabular learning continued from the previous tables),
    and the target-task value is recorded after every task.
    """
    target = curriculum.target
    policy = uniform_policy(target)
    entries = []
    for step, (source, actions) in enumerate(zip(curriculum.tasks, curriculum.action_sets)):
        policy = _learn_in(source, policy, learner, seed + step, merge_only_decided=False)
        entries.append(
            RunLogEntry(
                step=step,
                actions=tuple(actions),
                delta=source.delta,
                source_value=expected_reward(source, policy),
                target_value=expected_reward(target, policy),
            )
        )
    mode = "exact" if learner == "exact" else "tabular"
    return policy, RunLog(mode, seed, tuple(entries))


# ------------------------------------------------------------------ generators


def _closed_exogenous(target: FiniteTask, delta: set[str]) -> dict[str, tuple[str, ...]]:
    """Editable var -> exogenous parents whose children all lie in delta."""
    children: dict[str, set[str]] = {}
    for name, fn in target.functions.items():
        for p in fn.parents:
            if p in target.exogenous_by_name:
                children.setdefault(p, set()).add(name)
    out = {}
    for v in delta:
        exo = [p for p in target.functions[v].parents if p in target.exogenous_by_name]
        out[v] = tuple(u for u in exo if children[u] <= delta)
    return out


def spanning_cycle_generator(target: FiniteTask, delta, round_index: int, seed: int) -> list[Edit]:
    """Default generator: re-randomize what can be, pin the rest cyclically.

    Editable variables backed by an exogenous parent (one whose children all
    lie inside the editable set) get that parent reweighted to uniform, so
    their reachable values span the full domain in every round.  The
    remaining variables are pinned to constants drawn from a mixed-radix
    counter over the round index, varying variables later in topological
    order fastest; rounds therefore sweep the downstream state combinations
    first, which is what coverage of an action's inputs needs.
    """
    delta = set(delta)
    if not delta:
        return []
    closed = _closed_exogenous(target, delta)
    edits: list[Edit] = []
    reweighted: set[str] = set()
    pinned: list[str] = []
    order = target.diagram.topological_order()
    pos = {n: i for i, n in enumerate(order)}
    for v in sorted(delta, key=lambda v: pos[v]):
        if closed[v]:
            for u in closed[v]:
                if u not in reweighted:
                    reweighted.add(u)
                    n = len(target.exogenous_by_name[u].domain)
                    edits.append(ReweightExogenous(u, (Fraction(1, n),) * n))
        else:
            pinned.append(v)
    r = round_index
    for v in reversed(pinned):
        dom = target.domains[v]
        edits.append(SetConstant(v, dom[r % len(dom)]))
        r //= len(dom)
    return edits


def cycling_assignment_generator(target: FiniteTask, delta, round_index: int, seed: int) -> list[Edit]:
    """Pin every editable variable to a constant, cycling deterministically
    through the product of their domains (later variables fastest)."""
    order = target.diagram.topological_order()
    pos = {n: i for i, n in enumerate(order)}
    vars_slow_to_fast = sorted(delta, key=lambda v: pos[v])
    if not vars_slow_to_fast:
        return []
    edits = []
    r = round_index
    for v in reversed(vars_slow_to_fast):
        dom = target.domains[v]
        edits.append(SetConstant(v, dom[r % len(dom)]))
        r //= len(dom)
    return sorted(edits, key=lambda e: e.node)


def shuffled_assignment_generator(target: FiniteTask, delta, round_index: int, seed: int) -> list[Edit]:
    """Pin every editable variable to a seeded random constant."""
    rng = Random((seed, round_index))
    return [SetConstant(v, rng.choice(target.domains[v])) for v in sorted(delta)]


GENERATORS: dict[str, GeneratorHook] = {
    "span": spanning_cycle_generator,
    "cycle": cycling_assignment_generator,
    "shuffle": shuffled_assignment_generator,
}


def _generate(target: FiniteTask, gen: GeneratorHook, delta, round_index: int, seed: int) -> SourceTask:
    edits = list(gen(target, tuple(delta), round_index, seed))
    source = apply_edits(target, edits)
    outside = set(source.delta) - set(delta)
    if outside:
        raise TaskError(f"generator edited {sorted(outside)} outside the editable set")
    return source


# ------------------------------------------------------- curriculum synthesis


def find_causal_curriculum(
    target: FiniteTask, gen: GeneratorHook | None = None, seed: int = 0
) -> Curriculum:
    """Build an aligned curriculum for a soluble task.

    Walks the soluble ordering: task j declares the first j actions of the
    ordering and edits their maximal editable set, so declared action sets
    are nested by construction.  Raises NotSolubleError otherwise.
    """
    gen = gen or spanning_cycle_generator
    order = soluble_order(target)
    diagram = target.diagram.intervened()
    tasks = []
    action_sets = []
    for k in range(1, len(order.actions) + 1):
        actions = tuple(sorted(order.actions[:k]))
        delta = find_max_edit(diagram, actions)
        tasks.append(_generate(target, gen, delta, k - 1, seed))
        action_sets.append(actions)
    return Curriculum(target, tuple(tasks), tuple(action_sets))


# ----------------------------------------------------------------- alignment


@dataclass(frozen=True)
class PairVerdict:
    before_index: int
    after_index: int
    invariant_before: tuple[str, ...]
    invariant_after: tuple[str, ...]
    lost: tuple[str, ...]
    witnesses: tuple[tuple[str, tuple], ...]  # (action, input row) that regressed

    @property
    def expanding(self) -> bool:
        return not self.lost


@dataclass(frozen=True)
class AlignmentReport:
    aligned: bool
    per_task_invariant: tuple[tuple[str, ...], ...]
    pairs: tuple[PairVerdict, ...]


def _invariant_actions(
    target: FiniteTask,
    target_policy: Policy,
    optimal_value: Fraction,
    source: SourceTask,
    source_policy: Policy,
    considered: Iterable[str],
) -> tuple[set[str], dict[str, tuple]]:
    """Actions whose source-optimal rules transfer, with failure witnesses.

    An action counts as invariant when its argmax rules agree with the
    target's on the shared reachable inputs, or, failing pointwise equality
    (optimal policies need not be unique), when substituting the source rule
    into the target policy on those rows still attains the optimal value.
    """
    overlap = rule_overlap(source_policy, target_policy, source, target)
    invariant: set[str] = set()
    witnesses: dict[str, tuple] = {}
    for action in considered:
        entry = overlap.entries[action]
        if entry.invariant:
            invariant.add(action)
            continue
        patched = target_policy
        for row in entry.shared_rows:
            patched = patched.replace(action, row, source_policy.argmax(action, row))
        if expected_reward(target, patched) == optimal_value:
            invariant.add(action)
        else:
            witnesses[action] = entry.differing[0]
    return invariant, witnesses


def check_causally_aligned(target: FiniteTask, curriculum: Curriculum) -> AlignmentReport:
    """Check that the invariant-rule sets expand along the curriculum.

    The invariant set after task j is computed over the actions declared up
    to j (coincidental agreements outside the declared sets are ignored);
    monotone containment of consecutive sets makes the curriculum aligned.
    Witness rows are reported where containment fails.
    """
    target_policy = solve_optimal(target)
    optimal_value = expected_reward(target, target_policy)
    declared_cumulative: list[tuple[str, ...]] = []
    seen: set[str] = set()
    for actions in curriculum.action_sets:
        seen |= set(actions)
        declared_cumulative.append(tuple(sorted(seen)))
    invariants = []
    witness_maps = []
    for source, considered in zip(curriculum.tasks, declared_cumulative):
        source_policy = solve_optimal(source)
        inv, wit = _invariant_actions(
            target, target_policy, optimal_value, source, source_policy, considered
        )
        invariants.append(inv)
        witness_maps.append(wit)
    pairs = []
    aligned = True
    for j in range(len(invariants) - 1):
        lost = tuple(sorted(invariants[j] - invariants[j + 1]))
        witnesses = tuple(
            (a, witness_maps[j + 1][a]) for a in lost if a in witness_maps[j + 1]
        )
        if lost:
            aligned = False
        pairs.append(
            PairVerdict(
                before_index=j,
                after_index=j + 1,
                invariant_before=tuple(sorted(invariants[j])),
                invariant_after=tuple(sorted(invariants[j + 1])),
                lost=lost,
                witnesses=witnesses,
            )
        )
    return AlignmentReport(
        aligned=aligned,
        per_task_invariant=tuple(tuple(sorted(s)) for s in invariants),
        pairs=tuple(pairs),
    )


# ------------------------------------------------- coverage-driven learning


def causal_curriculum_learning(
    target: FiniteTask,
    gen: GeneratorHook | None = None,
    learner="exact",
    seed: int = 0,
    round_cap: int = 32,
) -> tuple[Policy, RunLog]:
    """Generate-and-train per action until reachable inputs are covered.

    Actions are taken in ascending soluble order; for each one, source tasks
    over its maximal editable set are generated until the rows the target's
    optimal policy can reach are all covered by rows reached in the sources.
    Training merges solver output into the running policy at decided rows
    only, so earlier coverage survives later rounds.  The final policy is
    target-optimal whenever the loop terminates without a CoverageError.
    """
    gen = gen or spanning_cycle_generator
    order = soluble_order(target)
    diagram = target.diagram.intervened()
    oracle = solve_optimal(target)
    target_rows = reachable_input_rows(target, oracle)
    policy = uniform_policy(target)
    entries = []
    step = 0
    for action in order.actions:
        delta = find_max_edit(diagram, [action])
        needed = set(target_rows[action])
        covered: set[tuple] = set()
        rounds = 0
        while not needed <= covered:
            if rounds >= round_cap:
                missing = sorted(needed - covered, key=lambda r: [value_key(v) for v in r])
                raise CoverageError(
                    f"{action}: {len(missing)} target rows uncovered after {round_cap} rounds"
                    f" (first missing {missing[0]})"
                )
            source = _generate(target, gen, delta, step, seed)
            policy = _learn_in(source, policy, learner, seed + step, merge_only_decided=True)
            covered |= reachable_input_rows(source, policy)[action]
            entries.append(
                RunLogEntry(
                    step=step,
                    actions=(action,),
                    delta=source.delta,
                    source_value=expected_reward(source, policy),
                    target_value=expected_reward(target, policy),
                )
            )
            step += 1
            rounds += 1
    mode = "exact" if learner == "exact" else "tabular"
    return policy, RunLog(mode, seed, tuple(entries))


# ------------------------------------------------------------------- metrics


def misaligned_fraction(target: AnyTask, candidates: Sequence[SourceTask]) -> Fraction:
    """Fraction of candidate source tasks whose edits fail the criterion
    with regard to the full action set.  Candidates with no edits count as
    aligned (the empty edit set is trivially editable)."""
    if not candidates:
        return Fraction(0)
    task = as_task(target)
    diagram = task.diagram.intervened()
    actions = task.actions
    bad = 0
    for st in candidates:
        if not st.delta:
            continue
        if not is_edit(diagram, st.delta, actions):
            bad += 1
    return Fraction(bad, len(candidates))
