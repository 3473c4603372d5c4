"""Batch evaluation of formulas over many traces.

A pool stores traces as boolean atom matrices grouped by length, so one
formula can be checked against thousands of traces with vectorized sweeps
instead of per-trace recursion. Results always come back in the order the
traces were given.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from specmine import pltl
from specmine.gridworld import Trace


@dataclass(frozen=True, eq=False)
class _Group:
    length: int
    indices: np.ndarray  # positions in the original trace list
    cols: dict[str, np.ndarray]  # atom -> bool matrix (n_traces, length)


@dataclass(frozen=True, eq=False)
class TracePool:
    atoms: tuple[str, ...]
    size: int
    groups: tuple[_Group, ...]

    @property
    def lengths(self) -> np.ndarray:
        out = np.empty(self.size, dtype=int)
        for g in self.groups:
            out[g.indices] = g.length
        return out


def build_pool(traces: Sequence[Trace], atoms: Sequence[str]) -> TracePool:
    if not traces:
        raise ValueError("empty trace pool")
    by_length: dict[int, list[int]] = {}
    for i, t in enumerate(traces):
        if len(t) == 0:
            raise ValueError(f"trace {i} is empty")
        by_length.setdefault(len(t), []).append(i)
    groups = []
    for length in sorted(by_length):
        idx = np.array(by_length[length], dtype=int)
        cols = {}
        for a in atoms:
            m = np.zeros((len(idx), length), dtype=bool)
            for row, i in enumerate(idx):
                for j, obs in enumerate(traces[i].observations):
                    if a in obs:
                        m[row, j] = True
            cols[a] = m
        groups.append(_Group(length, idx, cols))
    return TracePool(tuple(atoms), len(traces), tuple(groups))


def _sweep(phi: pltl.Formula, group: _Group) -> np.ndarray:
    """Final-position truth of phi for every trace in a same-length group."""
    nodes = pltl.subformulas(phi)
    n = len(group.indices)
    cur: list[np.ndarray] = [None] * len(nodes)  # type: ignore[list-item]
    child_index: dict[int, int] = {}
    for t in range(group.length):
        nxt: list[np.ndarray] = [None] * len(nodes)  # type: ignore[list-item]
        for k, node in enumerate(nodes):
            if isinstance(node, pltl.Atom):
                if node.name not in group.cols:
                    raise ValueError(f"atom {node.name!r} not tracked by this pool")
                v = group.cols[node.name][:, t]
            elif isinstance(node, pltl.Const):
                v = np.full(n, node.value, dtype=bool)
            elif isinstance(node, pltl.Not):
                v = ~nxt[child_index[id(node.child)]]
            elif isinstance(node, pltl.And):
                v = nxt[child_index[id(node.left)]] & nxt[child_index[id(node.right)]]
            elif isinstance(node, pltl.Or):
                v = nxt[child_index[id(node.left)]] | nxt[child_index[id(node.right)]]
            elif isinstance(node, pltl.Implies):
                v = ~nxt[child_index[id(node.left)]] | nxt[child_index[id(node.right)]]
            elif isinstance(node, pltl.Historically):
                c = nxt[child_index[id(node.child)]]
                v = c if t == 0 else cur[k] & c
            elif isinstance(node, pltl.Once):
                c = nxt[child_index[id(node.child)]]
                v = c if t == 0 else cur[k] | c
            elif isinstance(node, pltl.Since):
                g = nxt[child_index[id(node.right)]]
                f = nxt[child_index[id(node.left)]]
                v = g if t == 0 else g | (f & cur[k])
            elif isinstance(node, pltl.Yesterday):
                c = child_index[id(node.child)]
                v = np.zeros(n, dtype=bool) if t == 0 else cur[c]
            else:
                raise TypeError(f"unhandled node {type(node).__name__}")
            nxt[k] = v
            child_index[id(node)] = k
        cur = nxt
    return cur[-1].copy()


def satisfies(pool: TracePool, phi: pltl.Formula) -> np.ndarray:
    """Boolean vector: does each pooled trace satisfy phi at its last step."""
    out = np.zeros(pool.size, dtype=bool)
    for g in pool.groups:
        out[g.indices] = _sweep(phi, g)
    return out


def satisfaction_rate(pool: TracePool, phi: pltl.Formula) -> float:
    return float(np.mean(satisfies(pool, phi)))


def signature(pool: TracePool, phi: pltl.Formula) -> bytes:
    """Hashable satisfaction fingerprint, for semantic grouping of formulas."""
    return satisfies(pool, phi).tobytes()
