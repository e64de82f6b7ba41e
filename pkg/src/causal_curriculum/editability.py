"""Editable-state analysis: which variables may be changed when generating
source tasks so that optimal decision rules over chosen actions transfer.

The criterion is graphical: a set of variables is editable with regard to a
set of actions when an indicator node pointing into every member is
d-separated from each action's downstream rewards given the action and its
declared inputs, all read off the intervened diagram.

Note on the published pseudocode for the single-shot membership test: it
returns False when the independence HOLDS, which inverts the stated
criterion.  This implementation returns False on d-connection, matching the
definition the test is meant to decide.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .diagram import CausalDiagram, GraphError, NodeRole
from .scm import AnyTask, as_task


class NotSolubleError(RuntimeError):
    """Raised when an operation requires a soluble task and the task is not.

    Carries the first failing regime-independence pair and, when present,
    the offending strongly connected component of the relevance graph.
    """

    def __init__(self, witness=None, scc=None):
        self.witness = witness
        self.scc = tuple(scc) if scc else None
        parts = []
        if witness:
            parts.append(f"regime of {witness[0]} reaches rewards of {witness[1]}")
        if self.scc:
            parts.append(f"actions {list(self.scc)} must be optimized jointly")
        super().__init__("task is not soluble" + (": " + "; ".join(parts) if parts else ""))


def _candidate_states(diagram: CausalDiagram) -> tuple[str, ...]:
    """Nodes eligible for editing: endogenous, neither action nor reward."""
    skip = (NodeRole.ACTION, NodeRole.REWARD, NodeRole.EDIT_INDICATOR, NodeRole.REGIME)
    return tuple(n for n in diagram.nodes if diagram.role(n) not in skip)


def _check_actions(diagram: CausalDiagram, actions: Iterable[str]) -> tuple[str, ...]:
    acts = tuple(sorted({str(a) for a in actions}))
    if not acts:
        raise GraphError("empty action set")
    for a in acts:
        if not diagram.has_node(a) or diagram.role(a) is not NodeRole.ACTION:
            raise GraphError(f"{a!r} is not an action")
        if a not in diagram.action_inputs:
            raise GraphError(f"action {a!r} has no declared inputs")
    return acts


def _downstream_rewards(diagram: CausalDiagram, action: str) -> tuple[str, ...]:
    de = set(diagram.descendants([action]))
    return tuple(y for y in diagram.rewards if y in de)


def is_edit(diagram: CausalDiagram, delta: Iterable[str], actions: Iterable[str]) -> bool:
    """Decide editability of `delta` w.r.t. `actions` in an intervened diagram.

    True iff, with one shared indicator node pointing into every member of
    delta, the indicator is d-separated from Y ∩ De(X) given {X} ∪ S_X for
    every action X.  An action with no downstream rewards passes vacuously.
    The empty delta is rejected; callers may treat it as trivially editable.
    """
    delta = tuple(sorted({str(v) for v in delta}))
    if not delta:
        raise GraphError("empty edit set; the empty set is trivially editable")
    acts = _check_actions(diagram, actions)
    protected = {n for n in delta if diagram.role(n) in (NodeRole.ACTION, NodeRole.REWARD)}
    if protected:
        raise GraphError(f"delta contains actions or rewards: {sorted(protected)}")
    augmented, tau = diagram.with_edit_indicator(delta)
    for action in acts:
        rewards = _downstream_rewards(diagram, action)
        if not rewards:
            continue
        conditioning = set(diagram.action_inputs[action]) | {action}
        if not augmented.d_separated([tau], rewards, conditioning - {tau}):
            return False
    return True


def find_max_edit(
    diagram: CausalDiagram,
    actions: Iterable[str],
    *,
    candidate_order: Sequence[str] | None = None,
) -> tuple[str, ...]:
    """The unique maximal editable set w.r.t. `actions`, sorted by name.

    Follows the incremental search: tentatively add each candidate to the
    running set, test the criterion with a shared indicator, and remove the
    candidate on failure.  The outcome does not depend on the iteration
    order; `candidate_order` exists so tests can demonstrate that.
    """
    acts = _check_actions(diagram, actions)
    candidates = list(candidate_order) if candidate_order is not None else list(_candidate_states(diagram))
    allowed = set(_candidate_states(diagram))
    for c in candidates:
        if c not in allowed:
            raise GraphError(f"candidate {c!r} is not an editable-state candidate")
    reward_cache = {a: _downstream_rewards(diagram, a) for a in acts}
    cond_cache = {a: set(diagram.action_inputs[a]) | {a} for a in acts}
    delta: list[str] = []
    for v in candidates:
        delta.append(v)
        augmented, tau = diagram.with_edit_indicator(delta)
        for action in acts:
            rewards = reward_cache[action]
            if not rewards:
                continue
            if not augmented.d_separated([tau], rewards, cond_cache[action]):
                delta.pop()
                break
    return tuple(sorted(delta))


def find_edit(
    diagram: CausalDiagram, actions: Iterable[str], pool: Iterable[str] | None = None
) -> tuple[str, ...]:
    """Maximal editable subset of `pool` (defaults to every candidate)."""
    if pool is None:
        return find_max_edit(diagram, actions)
    pool = sorted({str(v) for v in pool})
    allowed = set(_candidate_states(diagram))
    bad = [v for v in pool if v not in allowed]
    if bad:
        raise GraphError(f"pool contains non-editable nodes: {bad}")
    if not pool:
        return ()
    return find_max_edit(diagram, actions, candidate_order=pool)


def list_edits(diagram: CausalDiagram, actions: Iterable[str]):
    """Yield every non-empty editable set, in descending bitmask order.

    The mask runs from 2**k - 1 down to 1 over the sorted maximal set; bit
    j of the mask (least significant first) selects the element j positions
    from the end.  Every yielded set is editable by the subset property of
    the maximal set.
    """
    maximal = list(find_max_edit(diagram, actions))
    k = len(maximal)
    mask = (1 << k) - 1
    while mask:
        subset = []
        tmp = mask
        i = k - 1
        while tmp:
            if tmp & 1:
                subset.append(maximal[i])
            i -= 1
            tmp >>= 1
        yield tuple(sorted(subset))
        mask -= 1


# ------------------------------------------------------------ relevance graph


@dataclass(frozen=True)
class RelevanceGraph:
    """Directed graph over actions: X' -> X when X' must be optimized first.

    `sccs` lists the strongly connected components in condensation order
    (first component to optimize first); every action appears in exactly
    one component.
    """

    actions: tuple[str, ...]
    edges: frozenset[tuple[str, str]]
    sccs: tuple[tuple[str, ...], ...]

    @property
    def is_acyclic(self) -> bool:
        return all(len(s) == 1 for s in self.sccs)


def relevance_graph(t: AnyTask) -> RelevanceGraph:
    """Build the relevance graph of a task from regime d-connection tests."""
    task = as_task(t)
    diagram = task.diagram.intervened()
    actions = task.actions
    reward_cache = {a: _downstream_rewards(diagram, a) for a in actions}
    edges: set[tuple[str, str]] = set()
    for source in actions:
        augmented, pi = diagram.with_regime(source)
        for target in actions:
            if target == source:
                continue
            rewards = reward_cache[target]
            if not rewards:
                continue
            conditioning = set(diagram.action_inputs[target]) | {target}
            if not augmented.d_separated([pi], rewards, conditioning):
                edges.add((source, target))
    sccs = _condensed_sccs(actions, edges)
    return RelevanceGraph(tuple(actions), frozenset(edges), sccs)


def _condensed_sccs(nodes: Sequence[str], edges: set[tuple[str, str]]) -> tuple[tuple[str, ...], ...]:
    """Tarjan SCCs followed by a deterministic condensation topsort."""
    adjacency: dict[str, list[str]] = {n: [] for n in nodes}
    for u, v in sorted(edges):
        adjacency[u].append(v)
    index: dict[str, int] = {}
    low: dict[str, int] = {}
    on_stack: set[str] = set()
    stack: list[str] = []
    components: list[tuple[str, ...]] = []
    counter = 0

    def connect(root: str):
        nonlocal counter
        work = [(root, 0)]
        while work:
            node, ei = work[-1]
            if ei == 0:
                index[node] = low[node] = counter
                counter += 1
                stack.append(node)
                on_stack.add(node)
            advanced = False
            for j in range(ei, len(adjacency[node])):
                nxt = adjacency[node][j]
                if nxt not in index:
                    work[-1] = (node, j + 1)
                    work.append((nxt, 0))
                    advanced = True
                    break
                if nxt in on_stack:
                    low[node] = min(low[node], index[nxt])
            if advanced:
                continue
            work.pop()
            if low[node] == index[node]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == node:
                        break
                components.append(tuple(sorted(comp)))
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])

    for n in sorted(nodes):
        if n not in index:
            connect(n)

    member: dict[str, int] = {}
    for i, comp in enumerate(components):
        for n in comp:
            member[n] = i
    cedges: dict[int, set[int]] = {i: set() for i in range(len(components))}
    indeg = {i: 0 for i in range(len(components))}
    for u, v in edges:
        a, b = member[u], member[v]
        if a != b and b not in cedges[a]:
            cedges[a].add(b)
            indeg[b] += 1
    ready = sorted((i for i, d in indeg.items() if d == 0), key=lambda i: components[i][0])
    order: list[int] = []
    while ready:
        i = ready.pop(0)
        order.append(i)
        for j in sorted(cedges[i], key=lambda j: components[j][0]):
            indeg[j] -= 1
            if indeg[j] == 0:
                ready.append(j)
        ready.sort(key=lambda i: components[i][0])
    return tuple(components[i] for i in order)


# --------------------------------------------------------------- solubility


@dataclass(frozen=True)
class SolubilityReport:
    soluble: bool
    witness: tuple[str, str] | None = None  # (earlier action, later action)
    witness_indices: tuple[int, int] | None = None  # 1-based temporal indices


@dataclass(frozen=True)
class SolubleOrder:
    """Ascending optimization order: first entry is optimized first."""

    actions: tuple[str, ...]

    def position(self, action: str) -> int:
        return self.actions.index(action)


def check_soluble(t: AnyTask) -> SolubilityReport:
    """Direct regime-node test over every temporally ordered action pair.

    Decided straight from the definition (not via the relevance graph) so
    the two constructions can cross-check each other in tests.
    """
    task = as_task(t)
    diagram = task.diagram.intervened()
    actions = task.actions
    for j, earlier in enumerate(actions):
        augmented, pi = diagram.with_regime(earlier)
        for i in range(j + 1, len(actions)):
            later = actions[i]
            rewards = _downstream_rewards(diagram, later)
            if not rewards:
                continue
            conditioning = set(diagram.action_inputs[later]) | {later}
            if not augmented.d_separated([pi], rewards, conditioning):
                return SolubilityReport(False, (earlier, later), (j + 1, i + 1))
    return SolubilityReport(True)


def is_soluble(t: AnyTask) -> bool:
    return check_soluble(t).soluble


def soluble_order(t: AnyTask) -> SolubleOrder:
    """Ascending soluble ordering (first-to-optimize first) or NotSolubleError."""
    report = check_soluble(t)
    rel = relevance_graph(t)
    if not report.soluble:
        offending = next((s for s in rel.sccs if len(s) > 1), None)
        raise NotSolubleError(witness=report.witness, scc=offending)
    task = as_task(t)
    temporal = {a: i for i, a in enumerate(task.actions)}
    # flatten the (all-singleton) condensation; among unordered peers the
    # temporally later action is optimized first
    indeg = {a: 0 for a in rel.actions}
    out: dict[str, list[str]] = {a: [] for a in rel.actions}
    for u, v in rel.edges:
        out[u].append(v)
        indeg[v] += 1
    ready = [a for a, d in indeg.items() if d == 0]
    order: list[str] = []
    while ready:
        ready.sort(key=lambda a: temporal[a], reverse=True)
        a = ready.pop(0)
        order.append(a)
        for b in out[a]:
            indeg[b] -= 1
            if indeg[b] == 0:
                ready.append(b)
    if len(order) != len(rel.actions):
        raise NotSolubleError(scc=next(s for s in rel.sccs if len(s) > 1))
    return SolubleOrder(tuple(order))


def expanded_action_set(order: SolubleOrder, actions: Iterable[str]) -> tuple[str, ...]:
    """Close `actions` under predecessors in the soluble ordering."""
    acts = {str(a) for a in actions}
    unknown = acts - set(order.actions)
    if unknown:
        raise GraphError(f"unknown actions {sorted(unknown)}")
    if not acts:
        return ()
    last = max(order.position(a) for a in acts)
    return tuple(sorted(set(order.actions[: last + 1]) | acts))
