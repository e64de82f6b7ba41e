"""Mixed causal diagrams (directed + bidirected edges) with exact d-separation.

A diagram carries node roles (state / action / reward plus the auxiliary
edit-indicator and regime roles used during analysis) and, for every action,
the ordered tuple of input states the action is allowed to observe.  All
operations are pure: surgery methods return new diagrams and never mutate
the receiver, so diagrams are safe to share across threads.

Bidirected edges mark unobserved confounders.  Internally each one is
materialised as a fresh latent parent (u <- h -> v); the latent names never
appear in public results.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping


class NodeRole(Enum):
    STATE = "state"
    ACTION = "action"
    REWARD = "reward"
    EDIT_INDICATOR = "edit_indicator"
    REGIME = "regime"


class GraphError(ValueError):
    """Raised for structurally impossible requests (unknown ids, cycles, ...)."""


@dataclass(frozen=True)
class ValidationReport:
    errors: tuple[str, ...]
    warnings: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.errors


def _as_role(role) -> NodeRole:
    if isinstance(role, NodeRole):
        return role
    return NodeRole(str(role))


class CausalDiagram:
    """Immutable ADMG over named nodes.

    Parameters
    ----------
    nodes:
        mapping name -> role, or iterable of (name, role) pairs.  Roles may be
        given as NodeRole members or their string values.
    directed:
        iterable of (parent, child) pairs.
    bidirected:
        iterable of unordered pairs marking latent confounding.
    action_inputs:
        mapping action -> ordered input states.  Iteration order of this
        mapping fixes the temporal order of the actions (X_1 first).
    """

    def __init__(self, nodes, directed=(), bidirected=(), action_inputs=None):
        if isinstance(nodes, Mapping):
            items = list(nodes.items())
        else:
            items = [(n, r) for n, r in nodes]
        self._roles: dict[str, NodeRole] = {}
        for name, role in items:
            if not name or not isinstance(name, str):
                raise GraphError(f"node name must be a non-empty string, got {name!r}")
            if name in self._roles:
                raise GraphError(f"duplicate node {name!r}")
            self._roles[name] = _as_role(role)
        self.directed: frozenset[tuple[str, str]] = frozenset(
            (str(u), str(v)) for u, v in directed
        )
        self.bidirected: frozenset[tuple[str, str]] = frozenset(
            tuple(sorted((str(u), str(v)))) for u, v in bidirected
        )
        inputs = action_inputs or {}
        self.action_inputs: dict[str, tuple[str, ...]] = {
            str(a): tuple(str(s) for s in ss) for a, ss in inputs.items()
        }
        # adjacency over declared nodes; edges naming unknown ids are kept for
        # validate() to report but skipped here
        self._pa: dict[str, set[str]] = {n: set() for n in self._roles}
        self._ch: dict[str, set[str]] = {n: set() for n in self._roles}
        for u, v in self.directed:
            if u in self._roles and v in self._roles:
                self._pa[v].add(u)
                self._ch[u].add(v)
        self._sib: dict[str, set[str]] = {n: set() for n in self._roles}
        for u, v in self.bidirected:
            if u in self._roles and v in self._roles and u != v:
                self._sib[u].add(v)
                self._sib[v].add(u)

    # ------------------------------------------------------------------ views

    @property
    def nodes(self) -> tuple[str, ...]:
        return tuple(sorted(self._roles))

    def role(self, name: str) -> NodeRole:
        self._require(name)
        return self._roles[name]

    def has_node(self, name: str) -> bool:
        return name in self._roles

    @property
    def actions(self) -> tuple[str, ...]:
        """Actions in temporal (policy) order, per action_inputs order."""
        declared = [a for a in self.action_inputs if self._roles.get(a) is NodeRole.ACTION]
        rest = sorted(
            n for n, r in self._roles.items() if r is NodeRole.ACTION and n not in self.action_inputs
        )
        return tuple(declared + rest)

    @property
    def rewards(self) -> tuple[str, ...]:
        return tuple(sorted(n for n, r in self._roles.items() if r is NodeRole.REWARD))

    @property
    def states(self) -> tuple[str, ...]:
        return tuple(sorted(n for n, r in self._roles.items() if r is NodeRole.STATE))

    def parents(self, name: str) -> tuple[str, ...]:
        self._require(name)
        return tuple(sorted(self._pa[name]))

    def children(self, name: str) -> tuple[str, ...]:
        self._require(name)
        return tuple(sorted(self._ch[name]))

    def siblings(self, name: str) -> tuple[str, ...]:
        """Nodes joined to `name` by a bidirected edge."""
        self._require(name)
        return tuple(sorted(self._sib[name]))

    def _require(self, *names: str) -> None:
        for n in names:
            if n not in self._roles:
                raise GraphError(f"unknown node {n!r}")

    # ------------------------------------------------------- family relations

    def ancestors(self, names: Iterable[str]) -> tuple[str, ...]:
        """An(names), inclusive of the argument, sorted by name."""
        seed = self._as_set(names)
        seen = set(seed)
        stack = list(seed)
        while stack:
            for p in self._pa[stack.pop()]:
                if p not in seen:
                    seen.add(p)
                    stack.append(p)
        return tuple(sorted(seen))

    def descendants(self, names: Iterable[str]) -> tuple[str, ...]:
        """De(names), inclusive of the argument, sorted by name."""
        seed = self._as_set(names)
        seen = set(seed)
        stack = list(seed)
        while stack:
            for c in self._ch[stack.pop()]:
                if c not in seen:
                    seen.add(c)
                    stack.append(c)
        return tuple(sorted(seen))

    def _as_set(self, names) -> set[str]:
        if isinstance(names, str):
            names = [names]
        out = {str(n) for n in names}
        self._require(*out)
        return out

    def topological_order(self) -> tuple[str, ...]:
        """Topological order of the directed part, ties broken by node name."""
        indeg = {n: len(self._pa[n]) for n in self._roles}
        ready = sorted(n for n, d in indeg.items() if d == 0)
        order: list[str] = []
        while ready:
            ready.sort(reverse=True)  # pop smallest name
            n = ready.pop()
            order.append(n)
            for c in sorted(self._ch[n]):
                indeg[c] -= 1
                if indeg[c] == 0:
                    ready.append(c)
        if len(order) != len(self._roles):
            raise GraphError("directed part contains a cycle")
        return tuple(order)

    # ----------------------------------------------------------- d-separation

    def d_separated(self, x, y, z=()) -> bool:
        """True iff x and y are d-separated given z.

        Implemented by ancestor-restricted reachability over the latent
        expansion of the diagram, O(n + m).  The three sets must be disjoint
        and x, y non-empty.
        """
        xs = self._as_set(x)
        ys = self._as_set(y)
        zs = self._as_set(z) if z else set()
        if not xs or not ys:
            raise GraphError("x and y must be non-empty")
        if xs & ys or xs & zs or ys & zs:
            raise GraphError("x, y, z must be pairwise disjoint")
        pa, ch = self._expanded()
        # ancestors of z in the expanded graph, z included
        anz = set(zs)
        stack = list(zs)
        while stack:
            for p in pa[stack.pop()]:
                if p not in anz:
                    anz.add(p)
                    stack.append(p)
        # (node, direction) reachability; "up" = arrived from a child or start
        seen: set[tuple[str, bool]] = set()
        queue: deque[tuple[str, bool]] = deque((s, True) for s in xs)
        while queue:
            node, up = queue.popleft()
            if (node, up) in seen:
                continue
            seen.add((node, up))
            if node in ys:
                return False
            if up:
                if node not in zs:
                    for p in pa[node]:
                        queue.append((p, True))
                    for c in ch[node]:
                        queue.append((c, False))
            else:
                if node not in zs:
                    for c in ch[node]:
                        queue.append((c, False))
                if node in anz:
                    for p in pa[node]:
                        queue.append((p, True))
        return True

    def _expanded(self) -> tuple[dict[str, list[str]], dict[str, list[str]]]:
        """Parent/child adjacency with one fresh latent per bidirected edge."""
        cached = getattr(self, "_expanded_cache", None)
        if cached is not None:
            return cached
        pa = {n: sorted(self._pa[n]) for n in self._roles}
        ch = {n: sorted(self._ch[n]) for n in self._roles}
        for i, (u, v) in enumerate(sorted(self.bidirected)):
            if u not in self._roles or v not in self._roles:
                continue
            h = f"\x00lat{i}"
            pa[h] = []
            ch[h] = [u, v]
            pa[u].append(h)
            pa[v].append(h)
        object.__setattr__(self, "_expanded_cache", (pa, ch))
        return pa, ch

    # -------------------------------------------------------------- validation

    def validate(self) -> ValidationReport:
        """Structural check; returns a report instead of raising.

        Errors: dangling edges, directed cycles, bidirected edges touching
        indicator/regime nodes, indicator/regime nodes with parents, missing
        or illegal action inputs, and policy-order violations (an action or
        one of its inputs descending from a later action).  A reward node
        with endogenous children is reported as a warning only.
        """
        errors: list[str] = []
        warnings: list[str] = []
        for u, v in sorted(self.directed):
            if u not in self._roles or v not in self._roles:
                errors.append(f"dangling directed edge {u}->{v}")
        for u, v in sorted(self.bidirected):
            if u not in self._roles or v not in self._roles:
                errors.append(f"dangling bidirected edge {u}<->{v}")
                continue
            if u == v:
                errors.append(f"bidirected self-loop at {u}")
            for end in (u, v):
                if self._roles[end] in (NodeRole.EDIT_INDICATOR, NodeRole.REGIME):
                    errors.append(f"bidirected edge touches auxiliary node {end}")
        try:
            self.topological_order()
        except GraphError:
            errors.append("directed cycle")
        for n, r in sorted(self._roles.items()):
            if r in (NodeRole.EDIT_INDICATOR, NodeRole.REGIME) and self._pa[n]:
                errors.append(f"auxiliary node {n} has parents")
        for a, ss in self.action_inputs.items():
            if a not in self._roles:
                errors.append(f"action_inputs names unknown node {a}")
                continue
            if self._roles[a] is not NodeRole.ACTION:
                errors.append(f"action_inputs entry for non-action {a}")
            for s in ss:
                if s not in self._roles:
                    errors.append(f"input {s} of {a} is not a node")
        declared = [a for a in self.action_inputs if self._roles.get(a) is NodeRole.ACTION]
        for n, r in sorted(self._roles.items()):
            if r is NodeRole.ACTION and n not in self.action_inputs:
                errors.append(f"action {n} has no input declaration")
        # policy-order constraints: nothing observed (or decided) may descend
        # from a later action
        if not any("cycle" in e for e in errors):
            for i, a in enumerate(declared):
                later = [b for b in declared[i + 1 :] if b in self._roles]
                if later:
                    de_later = set(self.descendants(later))
                    if a in de_later:
                        errors.append(f"action {a} descends from a later action")
                here_on = [b for b in declared[i:] if b in self._roles]
                de_here = set(self.descendants(here_on)) if here_on else set()
                for s in self.action_inputs.get(a, ()):
                    if s in de_here:
                        errors.append(f"input {s} of {a} descends from {a} or a later action")
        for y in self.rewards:
            kids = [c for c in self._ch[y] if self._roles[c] is not NodeRole.REGIME]
            if kids:
                warnings.append(f"reward {y} has endogenous children {sorted(kids)}")
        return ValidationReport(tuple(errors), tuple(warnings))

    # ----------------------------------------------------------------- surgery

    def intervened(self) -> "CausalDiagram":
        """Diagram under the policy convention: Pa(X_i) = S_i exactly.

        Every action loses its incoming directed edges and its bidirected
        edges, gaining one edge from each declared input.  Idempotent.
        """
        report = self.validate()
        if not report.ok:
            raise GraphError("cannot intervene an invalid diagram: " + "; ".join(report.errors))
        acts = set(self.actions)
        directed = {(u, v) for u, v in self.directed if v not in acts}
        for a in acts:
            for s in self.action_inputs[a]:
                directed.add((s, a))
        bidirected = {e for e in self.bidirected if not (set(e) & acts)}
        return CausalDiagram(dict(self._roles), directed, bidirected, self.action_inputs)

    def with_edit_indicator(self, targets: Iterable[str]) -> tuple["CausalDiagram", str]:
        """Add one fresh edit-indicator node pointing into each target."""
        ts = sorted(self._as_set(targets))
        if not ts:
            raise GraphError("edit indicator needs at least one target")
        bad_roles = (NodeRole.ACTION, NodeRole.REWARD, NodeRole.EDIT_INDICATOR, NodeRole.REGIME)
        for t in ts:
            if self._roles[t] in bad_roles:
                raise GraphError(f"cannot edit {t}: role {self._roles[t].value}")
        tau = self._fresh("tau")
        roles = dict(self._roles)
        roles[tau] = NodeRole.EDIT_INDICATOR
        directed = set(self.directed) | {(tau, t) for t in ts}
        return (
            CausalDiagram(roles, directed, self.bidirected, self.action_inputs),
            tau,
        )

    def with_regime(self, action: str) -> tuple["CausalDiagram", str]:
        """Add a regime node with a single edge into the given action."""
        self._require(action)
        if self._roles[action] is not NodeRole.ACTION:
            raise GraphError(f"{action} is not an action")
        pi = self._fresh(f"pi_{action}")
        roles = dict(self._roles)
        roles[pi] = NodeRole.REGIME
        directed = set(self.directed) | {(pi, action)}
        return (
            CausalDiagram(roles, directed, self.bidirected, self.action_inputs),
            pi,
        )

    def without_nodes(self, names: Iterable[str]) -> "CausalDiagram":
        drop = self._as_set(names)
        roles = {n: r for n, r in self._roles.items() if n not in drop}
        directed = {(u, v) for u, v in self.directed if u not in drop and v not in drop}
        bidirected = {e for e in self.bidirected if not (set(e) & drop)}
        inputs = {
            a: tuple(s for s in ss if s not in drop)
            for a, ss in self.action_inputs.items()
            if a not in drop
        }
        return CausalDiagram(roles, directed, bidirected, inputs)

    def _fresh(self, base: str) -> str:
        if base not in self._roles:
            return base
        k = 2
        while f"{base}_{k}" in self._roles:
            k += 1
        return f"{base}_{k}"

    # ------------------------------------------------------------------- misc

    def same_structure(self, other: "CausalDiagram") -> bool:
        """Equality of nodes, roles, edges, and input declarations."""
        return (
            self._roles == other._roles
            and self.directed == other.directed
            and self.bidirected == other.bidirected
            and self.action_inputs == other.action_inputs
        )

    def __repr__(self) -> str:
        return (
            f"CausalDiagram({len(self._roles)} nodes, {len(self.directed)} edges, "
            f"{len(self.bidirected)} bidirected)"
        )
