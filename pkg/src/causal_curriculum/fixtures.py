"""Built-in tasks at desk scale.

* example1_sokoban_chain — the three-step box-pushing chain with a
  confounded box color: the color mirrors a per-step coin (P(blue) = 3/4)
  that also decides whether a push next to the goal pays 10 or -10; every
  other step costs -0.1.
* example2_two_stage — the two-stage overwriting example: H = U_H,
  Z = not X1 xor U_Z, rewards 1/2*(H xor X1) and (not H xor X2) and Z,
  with P(U_Z=1) = 1/2 and P(U_H=1) = 1/10.
* mini_colored_sokoban(grid_size, horizon) — grid version with cell-index
  locations; push moves the box one cell away from an adjacent agent.
* mini_button_maze(grid_size, horizon) — goal color flips randomly each
  step (P=1/2) until the button is pressed, after which it mirrors the
  persistent reward coin (P=1/5); stepping onto the goal pays +/-1 by that
  coin, staying put costs 0.1, moving costs 0.01.
"""

from __future__ import annotations

from fractions import Fraction

from .scm import FiniteTask, TaskBuilder, TaskError

F = Fraction

MOVE, PUSH = "move", "push"
FAR, NEXT_TO_GOAL, IN_GOAL = "far", "next to goal", "in goal"


def example1_sokoban_chain() -> FiniteTask:
    """Three-step colored-box chain; diagram matches the paper-style layout
    (locations feed only the action; rewards read box position, action, and
    the color's hidden coin)."""
    b = TaskBuilder("example1_sokoban_chain")
    b.exogenous("U_L1", (0, 1), (F(1, 2), F(1, 2)))
    b.exogenous("U_B1", (FAR, NEXT_TO_GOAL, IN_GOAL), (F(1, 3), F(1, 3), F(1, 3)))
    for i in (1, 2, 3):
        b.exogenous(f"U_{i}", (0, 1), (F(1, 4), F(3, 4)))

    b.chance("L1", ("U_L1",), domain=(0, 1), expr="U_L1")
    b.chance("B1", ("U_B1",), domain=(FAR, NEXT_TO_GOAL, IN_GOAL), expr="U_B1")

    advance = {FAR: NEXT_TO_GOAL, NEXT_TO_GOAL: IN_GOAL, IN_GOAL: IN_GOAL}
    for i in (1, 2, 3):
        b.chance(f"C{i}", (f"U_{i}",), domain=(0, 1), expr=f"U_{i}")
        b.action(f"X{i}", domain=(MOVE, PUSH), inputs=(f"L{i}", f"B{i}", f"C{i}"))
        reward_table = {}
        for box in (FAR, NEXT_TO_GOAL, IN_GOAL):
            for act in (MOVE, PUSH):
                for u in (0, 1):
                    if box == NEXT_TO_GOAL and act == PUSH:
                        reward_table[(box, act, u)] = F(10) if u == 0 else F(-10)
                    else:
                        reward_table[(box, act, u)] = F(-1, 10)
        b.reward(
            f"Y{i}",
            (f"B{i}", f"X{i}", f"U_{i}"),
            domain=(F(10), F(-10), F(-1, 10)),
            table=reward_table,
        )
        if i < 3:
            b.chance(
                f"L{i + 1}",
                (f"L{i}", f"X{i}"),
                domain=(0, 1),
                table={(l, a): 1 if a == MOVE else l for l in (0, 1) for a in (MOVE, PUSH)},
            )
            b.chance(
                f"B{i + 1}",
                (f"B{i}", f"X{i}"),
                domain=(FAR, NEXT_TO_GOAL, IN_GOAL),
                table={
                    (box, a): advance[box] if a == PUSH else box
                    for box in (FAR, NEXT_TO_GOAL, IN_GOAL)
                    for a in (MOVE, PUSH)
                },
            )
    return b.build(discount=1)


def example2_two_stage() -> FiniteTask:
    b = TaskBuilder("example2_two_stage")
    b.exogenous("U_H", (0, 1), (F(9, 10), F(1, 10)))
    b.exogenous("U_Z", (0, 1), (F(1, 2), F(1, 2)))
    b.chance("H", ("U_H",), domain=(0, 1), expr="U_H")
    b.action("X1", domain=(0, 1), inputs=("H",))
    b.reward("Y1", ("H", "X1"), domain=(F(0), F(1, 2)), expr="1/2*(H xor X1)")
    b.chance("Z", ("X1", "U_Z"), domain=(0, 1), expr="not X1 xor U_Z")
    b.action("X2", domain=(0, 1), inputs=("Z",))
    b.reward("Y2", ("H", "X2", "Z"), domain=(0, 1), expr="not H xor X2 and Z")
    return b.build(discount=1)


# ------------------------------------------------------------------ grid goo


def _cells(g: int) -> range:
    return range(g * g)


def _rc(cell: int, g: int) -> tuple[int, int]:
    return divmod(cell, g)


def _cell(r: int, c: int, g: int) -> int:
    return r * g + c


_DIRS = {"N": (-1, 0), "S": (1, 0), "E": (0, 1), "W": (0, -1)}


def _step(cell: int, direction: str, g: int) -> int:
    r, c = _rc(cell, g)
    dr, dc = _DIRS[direction]
    nr, nc = r + dr, c + dc
    if 0 <= nr < g and 0 <= nc < g:
        return _cell(nr, nc, g)
    return cell


def _adjacent(a: int, b: int, g: int) -> bool:
    ra, ca = _rc(a, g)
    rb, cb = _rc(b, g)
    return abs(ra - rb) + abs(ca - cb) == 1


def mini_colored_sokoban(grid_size: int = 4, horizon: int = 6) -> FiniteTask:
    """Grid Sokoban with a confounded box color.

    The goal sits at the top-right cell.  Pushing while adjacent to the box
    shoves it one cell directly away from the agent; a push that would land
    the box in the goal pays 10 when the hidden coin shows 0 and -10 when it
    shows 1 (the rendered color mirrors that coin); anything else costs 0.1.
    """
    g = int(grid_size)
    h = int(horizon)
    if g < 2 or h < 1:
        raise TaskError("grid_size >= 2 and horizon >= 1 required")
    if (g * g) ** 2 * 5 * h > 500_000:
        raise TaskError("grid fixture too large to enumerate; shrink grid_size or horizon")
    goal = g - 1
    start_agent = _cell(g - 1, 0, g)  # bottom-left
    start_box = _cell(g // 2, g // 2, g)
    if start_box in (start_agent, goal):
        start_box = _cell(g // 2, max(0, g // 2 - 1), g)
    actions = ("E", "N", "S", "W", PUSH)
    cells = tuple(_cells(g))

    def push_dest(agent: int, box: int) -> int | None:
        # box moves one cell directly away from the agent, walls block
        if not _adjacent(agent, box, g):
            return None
        ra, ca = _rc(agent, g)
        rb, cb = _rc(box, g)
        nr, nc = rb + (rb - ra), cb + (cb - ca)
        if 0 <= nr < g and 0 <= nc < g:
            return _cell(nr, nc, g)
        return box

    def next_agent(l: int, bx: int, a: str) -> int:
        if a == PUSH:
            return l
        dest = _step(l, a, g)
        return l if dest == bx else dest

    def next_box(l: int, bx: int, a: str) -> int:
        if a != PUSH:
            return bx
        dest = push_dest(l, bx)
        return bx if dest is None else dest

    def reward(l: int, bx: int, a: str, u: int) -> Fraction:
        if a == PUSH and push_dest(l, bx) == goal:
            return F(10) if u == 0 else F(-10)
        return F(-1, 10)

    b = TaskBuilder(f"mini_colored_sokoban_{g}x{g}_h{h}")
    b.exogenous("U_L1", (start_agent,), (F(1),))
    b.exogenous("U_B1", (start_box,), (F(1),))
    for i in range(1, h + 1):
        b.exogenous(f"U_{i}", (0, 1), (F(1, 4), F(3, 4)))
    b.chance("L1", ("U_L1",), domain=cells, table={(start_agent,): start_agent})
    b.chance("B1", ("U_B1",), domain=cells, table={(start_box,): start_box})
    for i in range(1, h + 1):
        b.chance(f"C{i}", (f"U_{i}",), domain=(0, 1), expr=f"U_{i}")
        b.action(f"X{i}", domain=actions, inputs=(f"L{i}", f"B{i}", f"C{i}"))
        b.reward(
            f"Y{i}",
            (f"L{i}", f"B{i}", f"X{i}", f"U_{i}"),
            domain=(F(10), F(-10), F(-1, 10)),
            table={
                (l, bx, a, u): reward(l, bx, a, u)
                for l in cells
                for bx in cells
                for a in actions
                for u in (0, 1)
            },
        )
        if i < h:
            b.chance(
                f"L{i + 1}",
                (f"L{i}", f"B{i}", f"X{i}"),
                domain=cells,
                table={
                    (l, bx, a): next_agent(l, bx, a) for l in cells for bx in cells for a in actions
                },
            )
            b.chance(
                f"B{i + 1}",
                (f"L{i}", f"B{i}", f"X{i}"),
                domain=cells,
                table={
                    (l, bx, a): next_box(l, bx, a) for l in cells for bx in cells for a in actions
                },
            )
    return b.build(discount=1)


def mini_button_maze(grid_size: int = 4, horizon: int = 6) -> FiniteTask:
    """Grid maze whose goal color is noise until the button is pressed.

    Before the press the rendered color is an independent per-step coin
    (P=1/2); afterwards it mirrors the persistent coin U_C (P(1)=1/5) that
    decides the payoff of stepping onto the goal (+1/-1).  Standing still,
    bumping a wall, or pressing costs 0.1; any other move costs 0.01.
    """
    g = int(grid_size)
    h = int(horizon)
    if g < 2 or h < 1:
        raise TaskError("grid_size >= 2 and horizon >= 1 required")
    if (g * g) * 5 * h > 100_000:
        raise TaskError("grid fixture too large to enumerate; shrink grid_size or horizon")
    goal = g - 1
    button = _cell(g - 1, 0, g)
    start = _cell(g - 1, g - 1, g)  # bottom-right, away from the button
    actions = ("E", "N", "PRESS", "S", "W")
    cells = tuple(_cells(g))

    def next_loc(l: int, a: str) -> int:
        if a == "PRESS":
            return l
        return _step(l, a, g)

    def next_button(bstat: int, l: int, a: str) -> int:
        if a == "PRESS" and l == button:
            return 1 - bstat
        return bstat

    def reward(l: int, a: str, uc: int) -> Fraction:
        if a != "PRESS" and _step(l, a, g) == goal and l != goal:
            return F(1) if uc == 1 else F(-1)
        if a == "PRESS" or _step(l, a, g) == l:
            return F(-1, 10)
        return F(-1, 100)

    b = TaskBuilder(f"mini_button_maze_{g}x{g}_h{h}")
    b.exogenous("U_L1", (start,), (F(1),))
    b.exogenous("U_C", (0, 1), (F(4, 5), F(1, 5)))
    for i in range(1, h + 1):
        b.exogenous(f"U_{i}", (0, 1), (F(1, 2), F(1, 2)))
    b.chance("L1", ("U_L1",), domain=cells, table={(start,): start})
    b.chance("B1", (), domain=(0, 1), table={(): 0})
    for i in range(1, h + 1):
        b.chance(
            f"C{i}",
            (f"B{i}", f"U_{i}", "U_C"),
            domain=(0, 1),
            table={
                (bstat, u, uc): uc if bstat else u
                for bstat in (0, 1)
                for u in (0, 1)
                for uc in (0, 1)
            },
        )
        # the full button history is observed: past colors leak the reward
        # coin once the button has been pressed, and only remembering when
        # that happened screens the leak off
        history = tuple(f"B{j}" for j in range(1, i + 1))
        b.action(f"X{i}", domain=actions, inputs=(f"L{i}", f"C{i}") + history)
        b.reward(
            f"Y{i}",
            (f"L{i}", f"X{i}", "U_C"),
            domain=(F(1), F(-1), F(-1, 10), F(-1, 100)),
            table={(l, a, uc): reward(l, a, uc) for l in cells for a in actions for uc in (0, 1)},
        )
        if i < h:
            b.chance(
                f"L{i + 1}",
                (f"L{i}", f"X{i}"),
                domain=cells,
                table={(l, a): next_loc(l, a) for l in cells for a in actions},
            )
            b.chance(
                f"B{i + 1}",
                (f"B{i}", f"L{i}", f"X{i}"),
                domain=(0, 1),
                table={
                    (bstat, l, a): next_button(bstat, l, a)
                    for bstat in (0, 1)
                    for l in cells
                    for a in actions
                },
            )
    return b.build(discount=1)


FIXTURES = {
    "example1_sokoban_chain": example1_sokoban_chain,
    "example2_two_stage": example2_two_stage,
    "mini_colored_sokoban": mini_colored_sokoban,
    "mini_button_maze": mini_button_maze,
}

_ALIASES = {
    "example1": "example1_sokoban_chain",
    "example2": "example2_two_stage",
}


def load_fixture(name: str, *args, **kwargs) -> FiniteTask:
    """Look up a fixture by id; grid ids accept `name(grid,horizon)` or
    `name:grid:horizon` forms."""
    text = str(name).strip()
    if "(" in text and text.endswith(")"):
        base, _, argtext = text.partition("(")
        args = tuple(int(a) for a in argtext[:-1].split(",") if a.strip()) or args
        text = base.strip()
    elif ":" in text:
        base, *rest = text.split(":")
        args = tuple(int(a) for a in rest) or args
        text = base.strip()
    key = _ALIASES.get(text, text)
    if key not in FIXTURES:
        raise TaskError(f"unknown fixture {name!r}; choose from {sorted(FIXTURES)}")
    return FIXTURES[key](*args, **kwargs)
