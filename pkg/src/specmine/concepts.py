"""Candidate specification classes.

Two ways to build the hypothesis space: a set of named template families
(the default, sized for interactive mining), or free enumeration of every
formula up to a node budget. Both return a canonical list ordered by
(size, text) with structural duplicates removed.

Background atoms (by default the blank floor color) are kept out of the
since/guard slots of the templates: a trace that merely starts and ends on
the floor would satisfy constraints like "not-floor since X" vacuously, and
those artifacts would otherwise crowd out the intended specifications.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import IO, Sequence

from specmine import pltl
from specmine.gridworld import COLORS
from specmine.pool import TracePool, build_pool, signature

DEFAULT_TEMPLATES = (
    "hist",
    "once",
    "since",
    "hist_once",
    "hist_once_once",
    "guarded",
    "hist_once_guarded",
)

DEFAULT_OPERATORS = ("!", "&", "|", "->", "H", "O", "S")

_UNARY_OPS = {"!": pltl.Not, "H": pltl.Historically, "O": pltl.Once, "Y": pltl.Yesterday}
_BINARY_OPS = {"&": pltl.And, "|": pltl.Or, "->": pltl.Implies, "S": pltl.Since}


@dataclass(frozen=True)
class ConceptConfig:
    """What the candidate class ranges over.

    templates=None switches to free grammar enumeration, which then needs
    max_size. background atoms never occupy since/guard template slots.
    """

    atoms: tuple[str, ...]
    templates: tuple[str, ...] | None = DEFAULT_TEMPLATES
    background: tuple[str, ...] = ()
    operators: tuple[str, ...] = DEFAULT_OPERATORS
    max_size: int = 0
    cap: int = 100_000


def default_config() -> ConceptConfig:
    return ConceptConfig(atoms=COLORS, background=("white",))


def _literals(atoms: Sequence[str]) -> list[pltl.Formula]:
    out: list[pltl.Formula] = []
    for a in atoms:
        out.append(pltl.Atom(a))
        out.append(pltl.Not(pltl.Atom(a)))
    return out


def _guard(a: str, b: str, c: str) -> pltl.Formula:
    """H((a & O b) -> (!b S c)): after b, stay off b until c absolves."""
    return pltl.Historically(
        pltl.Implies(
            pltl.And(pltl.Atom(a), pltl.Once(pltl.Atom(b))),
            pltl.Since(pltl.Not(pltl.Atom(b)), pltl.Atom(c)),
        )
    )


def _template_family(name: str, lits: list[pltl.Formula], feat: list[str]):
    if name == "hist":
        for l in lits:
            yield pltl.Historically(l)
    elif name == "once":
        for l in lits:
            yield pltl.Once(l)
    elif name == "since":
        for a, b in itertools.permutations(feat, 2):
            yield pltl.Since(pltl.Not(pltl.Atom(a)), pltl.Atom(b))
    elif name == "hist_once":
        for l1 in lits:
            for l2 in lits:
                yield pltl.And(pltl.Historically(l1), pltl.Once(l2))
    elif name == "hist_once_once":
        for l1 in lits:
            for l2, l3 in itertools.combinations(lits, 2):
                yield pltl.And(pltl.And(pltl.Historically(l1), pltl.Once(l2)), pltl.Once(l3))
    elif name == "guarded":
        for a, b, c in itertools.permutations(feat, 3):
            yield _guard(a, b, c)
    elif name == "hist_once_guarded":
        for l1 in lits:
            for a, b, c in itertools.permutations(feat, 3):
                yield pltl.And(
                    pltl.And(pltl.Historically(l1), pltl.Once(pltl.Atom(a))),
                    _guard(a, b, c),
                )
    else:
        raise ValueError(f"unknown template family {name!r}")


def _enumerate_templates(cfg: ConceptConfig) -> list[pltl.Formula]:
    lits = _literals(cfg.atoms)
    feat = [a for a in cfg.atoms if a not in cfg.background]
    out: list[pltl.Formula] = []
    for name in cfg.templates or ():
        out.extend(_template_family(name, lits, feat))
    return out


def _enumerate_free(cfg: ConceptConfig) -> list[pltl.Formula]:
    if cfg.max_size < 1:
        raise ValueError("free grammar enumeration needs max_size >= 1")
    unary = [_UNARY_OPS[o] for o in cfg.operators if o in _UNARY_OPS]
    binary = [_BINARY_OPS[o] for o in cfg.operators if o in _BINARY_OPS]
    bad = [o for o in cfg.operators if o not in _UNARY_OPS and o not in _BINARY_OPS]
    if bad:
        raise ValueError(f"unknown operators {bad}")
    by_size: list[list[pltl.Formula]] = [[] for _ in range(cfg.max_size + 1)]
    by_size[1] = [pltl.Atom(a) for a in cfg.atoms]
    total = len(by_size[1])
    for k in range(2, cfg.max_size + 1):
        bucket: list[pltl.Formula] = []
        for op in unary:
            bucket.extend(op(f) for f in by_size[k - 1])
        for op in binary:
            for i in range(1, k - 1):
                for f in by_size[i]:
                    bucket.extend(op(f, g) for g in by_size[k - 1 - i])
        by_size[k] = bucket
        total += len(bucket)
        if total > cfg.cap:
            raise ValueError(f"candidate class exceeds cap of {cfg.cap} formulas")
    return [f for bucket in by_size for f in bucket]


def enumerate_candidates(cfg: ConceptConfig) -> list[pltl.Formula]:
    """Build the candidate class: deduplicated, sorted by (size, text)."""
    if not cfg.atoms:
        raise ValueError("no atoms")
    raw = _enumerate_templates(cfg) if cfg.templates is not None else _enumerate_free(cfg)
    seen = set()
    out = []
    for f in raw:
        if f not in seen:
            seen.add(f)
            out.append(f)
    if len(out) > cfg.cap:
        raise ValueError(f"candidate class exceeds cap of {cfg.cap} formulas")
    out.sort(key=lambda f: (pltl.size(f), str(f)))
    return out


def dedupe_on_pool(formulas: Sequence[pltl.Formula], pool: TracePool) -> list[pltl.Formula]:
    """Keep one representative per satisfaction signature on the pool.

    Representatives are the smallest formula of each group (ties on text),
    returned in the input's relative order.
    """
    best: dict[bytes, pltl.Formula] = {}
    for f in formulas:
        sig = signature(pool, f)
        cur = best.get(sig)
        if cur is None or (pltl.size(f), str(f)) < (pltl.size(cur), str(cur)):
            best[sig] = f
    keep = set(map(id, best.values()))
    return [f for f in formulas if id(f) in keep]


def dedupe_semantic(
    formulas: Sequence[pltl.Formula],
    world,
    n_probe: int,
    rng,
) -> list[pltl.Formula]:
    """Approximate semantic dedup against random probe traces from a world.

    Probe lengths are drawn uniformly from [1, world.max_steps]. Formulas in
    a merged group agree on every probe; distinct signatures never merge.
    """
    from specmine.gridworld import rollout_random

    if n_probe < 1:
        raise ValueError("need at least one probe trace")
    names = set(world.colors_present())
    for f in formulas:
        names.update(pltl.atoms(f))
    lengths = rng.integers(1, world.max_steps + 1, size=n_probe)
    probes = [rollout_random(world, int(L), rng) for L in lengths]
    pool = build_pool(probes, tuple(sorted(names)))
    return dedupe_on_pool(formulas, pool)


def dump_formulas(formulas: Sequence[pltl.Formula], f: IO[str]) -> None:
    for phi in formulas:
        f.write(str(phi) + "\n")
