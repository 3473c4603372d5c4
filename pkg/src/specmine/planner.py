"""Trace planning: find a shortest trace that satisfies a formula.

Breadth-first search over the product of grid cells and monitor states,
using the deterministic movement kernel (slip is a property of execution,
not of what the demonstrator intends to show). Because the monitor state
captures everything the formula remembers about the past, (cell, monitor)
pairs can be deduplicated without losing completeness.
"""

from __future__ import annotations

from collections import deque

import numpy as np

from specmine import pltl
from specmine.gridworld import ACTIONS, GridWorld, Step, Trace, _DELTA, label


def _move(world: GridWorld, pos: tuple[int, int], action: str) -> tuple[int, int]:
    dx, dy = _DELTA[action]
    nxt = (pos[0] + dx, pos[1] + dy)
    return nxt if world.in_bounds(nxt) else pos


def plan_satisfying_trace(
    world: GridWorld,
    phi: pltl.Formula,
    max_len: int | None = None,
    rng: np.random.Generator | None = None,
) -> Trace | None:
    """Shortest trace from the start whose final position satisfies phi.

    max_len bounds the trace length (number of steps); defaults to the
    world's step bound. An rng shuffles expansion order to vary which of
    the equally short solutions is returned; without one the action
    preference is N, S, E, W. Returns None when no trace short enough
    exists.
    """
    bound = world.max_steps if max_len is None else max_len
    if bound < 1:
        raise ValueError(f"max_len must be positive, got {bound}")
    ops = pltl.compile_ops(phi)
    root = len(ops) - 1
    start_bits = pltl.bits_init(ops, label(world, world.start))
    # queue entries: (pos, bits, trace length so far); parents for rebuild
    start_key = (world.start, start_bits)
    parent: dict[tuple[tuple[int, int], int], tuple | None] = {start_key: None}
    if (start_bits >> root) & 1:
        return _rebuild(world, parent, start_key)
    queue = deque([(start_key, 1)])
    while queue:
        (pos, bits), length = queue.popleft()
        if length >= bound:
            continue
        actions = ACTIONS
        if rng is not None:
            actions = tuple(ACTIONS[i] for i in rng.permutation(4))
        for action in actions:
            npos = _move(world, pos, action)
            nbits = pltl.bits_step(ops, bits, label(world, npos))
            key = (npos, nbits)
            if key in parent:
                continue
            parent[key] = ((pos, bits), action)
            if (nbits >> root) & 1:
                return _rebuild(world, parent, key)
            queue.append((key, length + 1))
    return None


def _rebuild(world: GridWorld, parent: dict, key: tuple) -> Trace:
    positions = [key[0]]
    actions: list[str] = []
    link = parent[key]
    while link is not None:
        prev_key, action = link
        positions.append(prev_key[0])
        actions.append(action)
        link = parent[prev_key]
    positions.reverse()
    actions.reverse()
    steps = []
    for i, pos in enumerate(positions):
        act = actions[i] if i < len(actions) else None
        steps.append(Step(pos, label(world, pos), act))
    return Trace(tuple(steps))


def plan_distinguishing_trace(
    world: GridWorld,
    a: pltl.Formula,
    b: pltl.Formula,
    max_len: int | None = None,
    rng: np.random.Generator | None = None,
) -> Trace | None:
    """Shortest trace on which exactly one of the two formulas holds."""
    xor = pltl.Or(pltl.And(a, pltl.Not(b)), pltl.And(pltl.Not(a), b))
    return plan_satisfying_trace(world, xor, max_len, rng)
