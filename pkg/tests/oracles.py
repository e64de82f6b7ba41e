"""Independent brute-force oracles used to pin expected values.

The d-separation oracle enumerates every simple path in the mixed graph and
applies the blocking rule edge pair by edge pair; it shares no code with the
reachability implementation it checks.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from random import Random

from causal_curriculum import (
    CausalDiagram,
    FiniteTask,
    NodeRole,
    Policy,
    TaskBuilder,
    is_soluble,
)


def oracle_d_separated(diagram: CausalDiagram, x, y, z=()) -> bool:
    """Exhaustive simple-path enumeration with the textbook blocking rule."""
    xs = {str(n) for n in ([x] if isinstance(x, str) else x)}
    ys = {str(n) for n in ([y] if isinstance(y, str) else y)}
    zs = {str(n) for n in ([z] if isinstance(z, str) else z)}
    # edges as (neighbor, head_at_self, head_at_neighbor)
    adjacency: dict[str, list[tuple[str, bool, bool]]] = {n: [] for n in diagram.nodes}
    for u, v in diagram.directed:
        adjacency[u].append((v, False, True))
        adjacency[v].append((u, True, False))
    for u, v in diagram.bidirected:
        adjacency[u].append((v, True, True))
        adjacency[v].append((u, True, True))
    anz = set(diagram.ancestors(zs)) if zs else set()

    def active_middle(node: str, head_in: bool, head_out: bool) -> bool:
        if head_in and head_out:  # collider
            return node in anz
        return node not in zs

    def search(node: str, head_here: bool, visited: frozenset) -> bool:
        for nxt, head_self, head_next in adjacency[node]:
            if nxt in visited:
                continue
            if not active_middle(node, head_here, head_self):
                continue
            if nxt in ys:
                return True
            if search(nxt, head_next, visited | {nxt}):
                return True
        return False

    for s in xs:
        for nxt, head_self, head_next in adjacency[s]:
            if nxt in ys:
                return False
            if nxt in xs:
                continue
            if search(nxt, head_next, frozenset({s, nxt})):
                return False
    return True


def find_active_path(diagram: CausalDiagram, x, y, z=()):
    """One active simple path, for failure diagnostics; None if separated."""
    xs = {str(n) for n in ([x] if isinstance(x, str) else x)}
    ys = {str(n) for n in ([y] if isinstance(y, str) else y)}
    zs = {str(n) for n in ([z] if isinstance(z, str) else z)}
    adjacency: dict[str, list[tuple[str, bool, bool]]] = {n: [] for n in diagram.nodes}
    for u, v in diagram.directed:
        adjacency[u].append((v, False, True))
        adjacency[v].append((u, True, False))
    for u, v in diagram.bidirected:
        adjacency[u].append((v, True, True))
        adjacency[v].append((u, True, True))
    anz = set(diagram.ancestors(zs)) if zs else set()

    def active_middle(node, head_in, head_out):
        if head_in and head_out:
            return node in anz
        return node not in zs

    def search(node, head_here, visited, trail):
        for nxt, head_self, head_next in adjacency[node]:
            if nxt in visited:
                continue
            if not active_middle(node, head_here, head_self):
                continue
            mark = "->" if head_next else "<-" if head_self else "--"
            if nxt in ys:
                return trail + [(mark, nxt)]
            found = search(nxt, head_next, visited | {nxt}, trail + [(mark, nxt)])
            if found:
                return found
        return None

    for s in sorted(xs):
        for nxt, head_self, head_next in adjacency[s]:
            mark = "->" if head_next else "<-" if head_self else "--"
            if nxt in ys:
                return [("", s), (mark, nxt)]
            if nxt in xs:
                continue
            found = search(nxt, head_next, frozenset({s, nxt}), [("", s), (mark, nxt)])
            if found:
                return found
    return None


# ----------------------------------------------------------- random diagrams


def random_admg(rng: Random, max_nodes: int = 8, edge_p: float = 0.3, bi_p: float = 0.15) -> CausalDiagram:
    n = rng.randint(2, max_nodes)
    names = [f"V{i}" for i in range(n)]
    order = names[:]
    rng.shuffle(order)
    directed = set()
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < edge_p:
                directed.add((order[i], order[j]))
    bidirected = set()
    for u, v in itertools.combinations(names, 2):
        if rng.random() < bi_p:
            bidirected.add((u, v))
    return CausalDiagram({m: NodeRole.STATE for m in names}, directed, bidirected)


def random_query(rng: Random, diagram: CausalDiagram):
    nodes = list(diagram.nodes)
    rng.shuffle(nodes)
    x = [nodes.pop()]
    y = [nodes.pop()]
    z = [v for v in nodes if rng.random() < 0.4]
    return x, y, z


def random_decision_diagram(rng: Random, max_nodes: int = 10) -> CausalDiagram:
    """Random diagram with a legal action/reward structure for editability."""
    n_actions = rng.randint(1, 3)
    n_states = rng.randint(1, max(1, max_nodes - 2 * n_actions - 1))
    states = [f"S{i}" for i in range(n_states)]
    actions = [f"X{i + 1}" for i in range(n_actions)]
    rewards = [f"Y{i + 1}" for i in range(n_actions)]
    roles = {}
    for s in states:
        roles[s] = NodeRole.STATE
    for a in actions:
        roles[a] = NodeRole.ACTION
    for y in rewards:
        roles[y] = NodeRole.REWARD
    # layered order: states shuffled between stages, rewards after actions
    order = states[:]
    rng.shuffle(order)
    per_stage = max(1, len(order) // n_actions)
    stage_states = [order[i * per_stage : (i + 1) * per_stage] for i in range(n_actions)]
    stage_states[-1].extend(order[n_actions * per_stage :])
    directed = set()
    bidirected = set()
    action_inputs = {}
    earlier: list[str] = []
    for k in range(n_actions):
        for s in stage_states[k]:
            for p in earlier:
                if rng.random() < 0.3:
                    directed.add((p, s))
        pool = earlier + stage_states[k]
        inputs = tuple(sorted(s for s in stage_states[k] if rng.random() < 0.8))
        if not inputs and stage_states[k]:
            inputs = (sorted(stage_states[k])[0],)
        action_inputs[actions[k]] = inputs
        for s in inputs:
            directed.add((s, actions[k]))
        directed.add((actions[k], rewards[k]))
        for p in pool:
            if rng.random() < 0.3:
                directed.add((p, rewards[k]))
        if k + 1 < n_actions:
            for s in stage_states[k + 1]:
                if rng.random() < 0.5:
                    directed.add((actions[k], s))
        for s in pool:
            if rng.random() < 0.2:
                bidirected.add(tuple(sorted((s, rewards[k]))))
        earlier = pool + [actions[k]]
    for y1, y2 in itertools.combinations(rewards, 2):
        if rng.random() < 0.1:
            bidirected.add(tuple(sorted((y1, y2))))
    d = CausalDiagram(roles, directed, bidirected, action_inputs)
    assert d.validate().ok, d.validate().errors
    return d


# --------------------------------------------------------------- random tasks


_PROBS = [Fraction(1, 2), Fraction(1, 4), Fraction(3, 4), Fraction(1, 10), Fraction(9, 10)]


def random_task(rng: Random, *, stages: int | None = None, recall: bool | None = None) -> FiniteTask:
    """Small random binary task; `recall=True` makes inputs perfect-recall."""
    n_stages = stages if stages is not None else rng.randint(1, 2)
    if recall is None:
        recall = rng.random() < 0.5
    b = TaskBuilder("random")
    history: list[str] = []  # endogenous non-reward nodes so far
    observed: list[str] = []
    for k in range(1, n_stages + 1):
        n_states = rng.randint(1, 2)
        new_states = []
        confound_pool = []
        for i in range(n_states):
            name = f"S{k}{i}"
            u = f"U_{name}"
            p1 = rng.choice(_PROBS)
            b.exogenous(u, (0, 1), (1 - p1, p1))
            parents = [h for h in history if rng.random() < 0.4]
            parents.append(u)
            table = {}
            for combo in itertools.product((0, 1), repeat=len(parents)):
                table[combo] = rng.choice((0, 1)) if rng.random() < 0.5 else combo[-1]
            b.chance(name, tuple(parents), domain=(0, 1), table=table)
            new_states.append(name)
            confound_pool.append((name, u))
        action = f"X{k}"
        if recall:
            inputs = tuple(observed + new_states + [f"X{j}" for j in range(1, k)])
        else:
            inputs = tuple(s for s in new_states if rng.random() < 0.9) or (new_states[0],)
        b.action(action, domain=(0, 1), inputs=inputs)
        reward = f"Y{k}"
        rparents = [action] + [s for s in new_states if rng.random() < 0.7]
        shared = None
        if confound_pool and rng.random() < 0.6:
            shared = rng.choice(confound_pool)[1]
            rparents.append(shared)
        table = {}
        for combo in itertools.product((0, 1), repeat=len(rparents)):
            table[combo] = rng.choice((0, 1))
        b.reward(reward, tuple(rparents), domain=(0, 1), table=table)
        history.extend(new_states + [action])
        observed.extend(new_states)
    return b.build(discount=1)


def random_soluble_task(rng: Random, *, stages: int | None = None) -> FiniteTask:
    """Rejection-sample random tasks until one passes the solubility test."""
    for _ in range(200):
        task = random_task(rng, stages=stages)
        if is_soluble(task):
            return task
    raise AssertionError("could not sample a soluble task")


def random_full_support_policy(rng: Random, task: FiniteTask) -> Policy:
    rules = {}
    for action, _inputs in task.policy_space:
        dom = task.domains[action]
        rows = {}
        for row in task.input_rows(action):
            weights = [rng.randint(1, 4) for _ in dom]
            total = sum(weights)
            rows[row] = {v: Fraction(w, total) for v, w in zip(dom, weights)}
        rules[action] = rows
    return Policy(rules)


def enumerate_deterministic_policies(task: FiniteTask):
    """All deterministic policies; callers must keep the count small."""
    per_action = []
    for action, _inputs in task.policy_space:
        rows = task.input_rows(action)
        dom = task.domains[action]
        per_action.append([dict(zip(rows, combo)) for combo in itertools.product(dom, repeat=len(rows))])
    for combo in itertools.product(*per_action):
        rules = {}
        for (action, _inputs), assignment in zip(task.policy_space, combo):
            rules[action] = {row: {v: Fraction(1)} for row, v in assignment.items()}
        yield Policy(rules)
