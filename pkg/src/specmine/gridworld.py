"""Slippery grid world with colored tiles.

Coordinates are (x, y): x grows east (right along a file row), y grows south
(down the file). Moving off the grid leaves the agent in place. With slip
probability p, an action moves perpendicular (either side with p/2 each)
instead of where it was aimed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import IO, Iterable

import numpy as np

COLORS = ("red", "yellow", "blue", "brown", "white")

_CHAR_COLOR = {"r": "red", "y": "yellow", "b": "blue", "n": "brown", ".": "white", "A": "white"}

ACTIONS = ("N", "S", "E", "W")

_DELTA = {"N": (0, -1), "S": (0, 1), "E": (1, 0), "W": (-1, 0)}

# (left, right) when facing along the action
_PERP = {"N": ("W", "E"), "S": ("E", "W"), "E": ("N", "S"), "W": ("S", "N")}


class WorldError(ValueError):
    pass


@dataclass(frozen=True)
class Step:
    pos: tuple[int, int]
    obs: frozenset[str]
    action: str | None


@dataclass(frozen=True)
class Trace:
    """Sequence of (position, observation, action) steps.

    The final step's action may be None (a planned trace stops at its goal);
    every earlier step carries the action that produced the next position.
    """

    steps: tuple[Step, ...]

    def __len__(self) -> int:
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)

    @property
    def observations(self) -> tuple[frozenset[str], ...]:
        return tuple(s.obs for s in self.steps)


@dataclass(frozen=True)
class GridWorld:
    width: int
    height: int
    tiles: tuple[tuple[str, ...], ...]  # tiles[y][x] is a color name
    start: tuple[int, int]
    p_slip: float
    max_steps: int

    def in_bounds(self, pos: tuple[int, int]) -> bool:
        x, y = pos
        return 0 <= x < self.width and 0 <= y < self.height

    def color(self, pos: tuple[int, int]) -> str:
        return self.tiles[pos[1]][pos[0]]

    def colors_present(self) -> frozenset[str]:
        return frozenset(c for row in self.tiles for c in row)


def label(world: GridWorld, pos: tuple[int, int]) -> frozenset[str]:
    """Observation at a cell: the singleton set of its color."""
    if not world.in_bounds(pos):
        raise WorldError(f"position {pos} outside {world.width}x{world.height} grid")
    return frozenset((world.color(pos),))


def load_world(text: str, p_slip: float = 0.0, max_steps: int = 40) -> GridWorld:
    """Parse a world file: one row per line, chars r/y/b/n/. and one 'A'.

    'A' marks the start cell and reads as white.
    """
    if not 0.0 <= p_slip < 1.0:
        raise WorldError(f"p_slip must be in [0, 1), got {p_slip}")
    if max_steps < 1:
        raise WorldError(f"max_steps must be positive, got {max_steps}")
    lines = [ln for ln in text.splitlines() if ln.strip() != ""]
    if not lines:
        raise WorldError("empty world file")
    width = len(lines[0])
    rows = []
    start = None
    for y, line in enumerate(lines):
        if len(line) != width:
            raise WorldError(f"ragged row {y}: expected width {width}, got {len(line)}")
        row = []
        for x, ch in enumerate(line):
            if ch not in _CHAR_COLOR:
                raise WorldError(f"unknown tile character {ch!r} at ({x}, {y})")
            if ch == "A":
                if start is not None:
                    raise WorldError("multiple start cells")
                start = (x, y)
            row.append(_CHAR_COLOR[ch])
        rows.append(tuple(row))
    if start is None:
        raise WorldError("missing start cell 'A'")
    return GridWorld(width, len(rows), tuple(rows), start, p_slip, max_steps)


def step(
    world: GridWorld,
    pos: tuple[int, int],
    action: str,
    rng: np.random.Generator | None = None,
) -> tuple[int, int]:
    """One transition. Needs an rng whenever the world can slip."""
    if action not in _DELTA:
        raise WorldError(f"unknown action {action!r}")
    if not world.in_bounds(pos):
        raise WorldError(f"position {pos} outside grid")
    direction = action
    if world.p_slip > 0.0:
        if rng is None:
            raise WorldError("slippery world requires an rng")
        u = rng.random()
        if u < world.p_slip / 2.0:
            direction = _PERP[action][0]
        elif u < world.p_slip:
            direction = _PERP[action][1]
    dx, dy = _DELTA[direction]
    nxt = (pos[0] + dx, pos[1] + dy)
    return nxt if world.in_bounds(nxt) else pos


def rollout_random(world: GridWorld, length: int, rng: np.random.Generator) -> Trace:
    """Random-walk trace of exactly `length` steps from the start cell.

    Every step records a uniformly drawn action; the last action falls
    beyond the horizon, so only the first length-1 are applied.
    """
    if length < 1:
        raise WorldError(f"rollout length must be positive, got {length}")
    if length > world.max_steps:
        raise WorldError(f"rollout length {length} exceeds bound {world.max_steps}")
    steps = []
    pos = world.start
    for i in range(length):
        action = ACTIONS[int(rng.integers(0, 4))]
        steps.append(Step(pos, label(world, pos), action))
        if i < length - 1:
            pos = step(world, pos, action, rng)
    return Trace(tuple(steps))


def validate_trace(world: GridWorld, trace: Trace) -> None:
    """Check positions, observations and action placement; raise on defect."""
    if len(trace) == 0:
        raise WorldError("empty trace")
    for i, s in enumerate(trace.steps):
        if not world.in_bounds(s.pos):
            raise WorldError(f"step {i}: position {s.pos} outside grid")
        if s.obs != label(world, s.pos):
            raise WorldError(f"step {i}: observation {set(s.obs)} != label at {s.pos}")
        if i < len(trace) - 1:
            if s.action is None:
                raise WorldError(f"step {i}: missing action before further steps")
            nxt = trace.steps[i + 1].pos
            dx, dy = nxt[0] - s.pos[0], nxt[1] - s.pos[1]
            if (dx, dy) != (0, 0) and abs(dx) + abs(dy) != 1:
                raise WorldError(f"step {i}: jump from {s.pos} to {nxt}")


# ---------------- trace files ----------------
# One JSON object per line ({"pos": [x, y], "props": [...], "action": ...});
# a blank line separates traces within a file.


def _step_to_json(s: Step) -> str:
    return json.dumps({"pos": list(s.pos), "props": sorted(s.obs), "action": s.action})


def _step_from_json(line: str) -> Step:
    d = json.loads(line)
    pos = tuple(d["pos"])
    if len(pos) != 2:
        raise WorldError(f"bad pos field: {d['pos']!r}")
    action = d["action"]
    if action is not None and action not in _DELTA:
        raise WorldError(f"bad action field: {action!r}")
    return Step((int(pos[0]), int(pos[1])), frozenset(d["props"]), action)


def dump_traces(traces: Iterable[Trace], f: IO[str]) -> None:
    first = True
    for trace in traces:
        if not first:
            f.write("\n")
        first = False
        for s in trace.steps:
            f.write(_step_to_json(s) + "\n")


def parse_traces(text: str) -> list[Trace]:
    traces: list[Trace] = []
    block: list[Step] = []
    for line in text.splitlines():
        if line.strip() == "":
            if block:
                traces.append(Trace(tuple(block)))
                block = []
            continue
        block.append(_step_from_json(line))
    if block:
        traces.append(Trace(tuple(block)))
    return traces
