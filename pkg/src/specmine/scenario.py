"""Scenario files: one flat key = value document per experiment.

A scenario wires together a world file, a demonstration recipe (or a trace
file on disk), the concept-class settings, the rollout budget, and the
transfer-protocol knobs. Lines starting with `#` are comments. The `demo`
and `bob_demo` keys may repeat; each occurrence reads as

    demo = COUNT MINLEN FORMULA

meaning COUNT planned traces of at least MINLEN steps satisfying FORMULA.

All randomness in a run derives from the single mandatory `seed` key;
subcomponents draw from generators labeled by fixed integers, so any demo
entry yields the same traces in every file that lists it at the same
position. That keeps the restricted corpus of one scenario bit-identical
to the matching prefix of another.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from specmine import pltl
from specmine.concepts import DEFAULT_TEMPLATES, ConceptConfig
from specmine.gridworld import (
    COLORS,
    GridWorld,
    Trace,
    load_world,
    parse_traces,
    validate_trace,
)
from specmine.planner import plan_satisfying_trace


class ScenarioError(ValueError):
    pass


# Stream labels: every generator is default_rng([seed, label, ...indices]).
STREAM_DEMO = 1  # planned demonstrations, per (recipe entry, trace index)
STREAM_MINE = 2  # rollout pool for one-shot mining
STREAM_ROUND = 3  # rollout pool per transfer round
STREAM_PROBE = 4  # probe planning tie-breaks, per (round, probe index)
STREAM_BOB = 5  # rollout pool for Bob's probe ranking, per round
STREAM_SIG = 6  # shared signature-probe pool for semantic comparisons
STREAM_DEDUP = 7  # optional concept-class dedup probes
STREAM_CLAR = 8  # clarification planning tie-breaks, per (round, index)
STREAM_PLAN = 9  # one-off planning from the command line


def seed_stream(seed: int, *key: int) -> np.random.Generator:
    """Independent deterministic generator for a labeled subcomponent."""
    return np.random.default_rng([seed, *key])


def pad_to_length(phi: pltl.Formula, length: int) -> pltl.Formula:
    """Conjoin a chain of L-1 Yesterdays so satisfying traces need L steps.

    `Y Y ... Y true` is only true once that many steps have elapsed, which
    turns the minimum-length planner into an exact-length one whenever phi
    itself is satisfiable within the bound.
    """
    if length < 1:
        raise ValueError("length must be positive")
    if length == 1:
        return phi
    inner: pltl.Formula = pltl.Const(True)
    for _ in range(length - 1):
        inner = pltl.Yesterday(inner)
    return pltl.And(phi, inner)


@dataclass(frozen=True)
class DemoRecipe:
    count: int
    min_length: int
    spec: pltl.Formula


@dataclass(frozen=True)
class Scenario:
    world: GridWorld
    world_path: str
    seed: int
    n_rollouts: int
    sig_probes: int
    true_spec: pltl.Formula | None
    demo_recipes: tuple[DemoRecipe, ...]
    bob_recipes: tuple[DemoRecipe, ...]
    demos_file: str | None
    tau: float
    max_rounds: int
    probes_per_round: int
    bob_mode: str  # "replay" or "plan"
    concept: ConceptConfig
    out_dir: str = "out"


_DEFAULTS = {
    "n_rollouts": "10000",
    "sig_probes": "10000",
    "p_slip": "0.0",
    "max_steps": "60",
    "tau": "0.5",
    "max_rounds": "5",
    "probes_per_round": "4",
    "bob_mode": "plan",
    "out": "out",
}

_KNOWN_KEYS = set(_DEFAULTS) | {
    "world",
    "seed",
    "true_spec",
    "demo",
    "bob_demo",
    "demos_file",
    "atoms",
    "templates",
    "background",
}


def _parse_recipe(value: str, lineno: int) -> DemoRecipe:
    parts = value.split(None, 2)
    if len(parts) != 3:
        raise ScenarioError(f"line {lineno}: demo entries read COUNT MINLEN FORMULA")
    try:
        count, min_length = int(parts[0]), int(parts[1])
    except ValueError:
        raise ScenarioError(
            f"line {lineno}: demo entries read COUNT MINLEN FORMULA"
        ) from None
    if count < 1 or min_length < 1:
        raise ScenarioError(f"line {lineno}: demo count and length must be positive")
    try:
        spec = pltl.parse_formula(parts[2])
    except pltl.ParseError as exc:
        raise ScenarioError(f"line {lineno}: {exc}") from None
    return DemoRecipe(count, min_length, spec)


def parse_scenario(text: str, base_dir: str = ".") -> Scenario:
    values = dict(_DEFAULTS)
    demos: list[DemoRecipe] = []
    bob: list[DemoRecipe] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ScenarioError(f"line {lineno}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _KNOWN_KEYS:
            raise ScenarioError(f"line {lineno}: unknown key {key!r}")
        if key == "demo":
            demos.append(_parse_recipe(value, lineno))
        elif key == "bob_demo":
            bob.append(_parse_recipe(value, lineno))
        else:
            values[key] = value

    if "world" not in values:
        raise ScenarioError("missing required key: world")
    if "seed" not in values:
        raise ScenarioError("missing required key: seed (runs never default to wall-clock)")

    def _num(key: str, cast, check=lambda v: True, what: str = ""):
        try:
            v = cast(values[key])
        except ValueError:
            raise ScenarioError(f"key {key!r}: not a {cast.__name__}") from None
        if not check(v):
            raise ScenarioError(f"key {key!r}: {what}")
        return v

    world_path = os.path.normpath(os.path.join(base_dir, values["world"]))
    try:
        with open(world_path, encoding="utf-8") as f:
            world_text = f.read()
    except OSError as exc:
        raise ScenarioError(f"cannot read world file: {exc}") from None
    world = load_world(
        world_text,
        p_slip=_num("p_slip", float, lambda v: 0.0 <= v < 1.0, "needs 0 <= p_slip < 1"),
        max_steps=_num("max_steps", int, lambda v: v >= 1, "needs max_steps >= 1"),
    )

    true_spec = None
    if "true_spec" in values:
        try:
            true_spec = pltl.parse_formula(values["true_spec"])
        except pltl.ParseError as exc:
            raise ScenarioError(f"true_spec: {exc}") from None

    demos_file = None
    if "demos_file" in values:
        demos_file = os.path.normpath(os.path.join(base_dir, values["demos_file"]))
        if demos:
            raise ScenarioError("give either demo recipes or demos_file, not both")

    atoms = tuple(values["atoms"].split()) if "atoms" in values else COLORS
    templates = tuple(values["templates"].split()) if "templates" in values else DEFAULT_TEMPLATES
    background = tuple(values["background"].split()) if "background" in values else ("white",)
    concept = ConceptConfig(atoms=atoms, templates=templates, background=background)

    scn = Scenario(
        world=world,
        world_path=world_path,
        seed=_num("seed", int, lambda v: v >= 0, "needs seed >= 0"),
        n_rollouts=_num("n_rollouts", int, lambda v: v >= 1, "needs n_rollouts >= 1"),
        sig_probes=_num("sig_probes", int, lambda v: v >= 1, "needs sig_probes >= 1"),
        true_spec=true_spec,
        demo_recipes=tuple(demos),
        bob_recipes=tuple(bob),
        demos_file=demos_file,
        tau=_num("tau", float, lambda v: v > 0.0, "needs tau > 0"),
        max_rounds=_num("max_rounds", int, lambda v: v >= 1, "needs max_rounds >= 1"),
        probes_per_round=_num("probes_per_round", int, lambda v: v >= 1, "needs k >= 1"),
        bob_mode=values["bob_mode"],
        concept=concept,
        out_dir=values["out"],
    )
    if scn.bob_mode not in ("replay", "plan"):
        raise ScenarioError("bob_mode must be 'replay' or 'plan'")
    _check_colors(scn)
    return scn


def load_scenario(path: str) -> Scenario:
    with open(path, encoding="utf-8") as f:
        text = f.read()
    return parse_scenario(text, base_dir=os.path.dirname(path) or ".")


def _check_colors(scn: Scenario) -> None:
    """Every color a scenario formula names must exist somewhere on the map."""
    named: set[str] = set()
    for recipe in scn.demo_recipes + scn.bob_recipes:
        named |= pltl.atoms(recipe.spec)
    if scn.true_spec is not None:
        named |= pltl.atoms(scn.true_spec)
    missing = sorted(named - set(scn.world.colors_present()))
    if missing:
        raise ScenarioError(f"formulas reference colors absent from the world: {missing}")


def _generate(
    world: GridWorld,
    recipes: Sequence[DemoRecipe],
    seed: int,
    entry_base: int,
) -> list[Trace]:
    out: list[Trace] = []
    for entry, recipe in enumerate(recipes, start=entry_base):
        for i in range(recipe.count):
            rng = seed_stream(seed, STREAM_DEMO, entry, i)
            goal = pad_to_length(recipe.spec, recipe.min_length)
            trace = plan_satisfying_trace(world, goal, rng=rng)
            if trace is None:
                raise ScenarioError(
                    f"demo recipe {recipe.spec} at length {recipe.min_length} "
                    f"is unsatisfiable within {world.max_steps} steps"
                )
            validate_trace(world, trace)
            if not pltl.evaluate(recipe.spec, trace):
                raise ScenarioError(f"planned demo fails its own spec {recipe.spec}")
            out.append(trace)
    return out


def build_demos(scn: Scenario) -> list[Trace]:
    """Materialize the demonstration corpus: planned recipes or a file."""
    if scn.demos_file is not None:
        with open(scn.demos_file, encoding="utf-8") as f:
            traces = parse_traces(f.read())
        if not traces:
            raise ScenarioError("no demonstrations in demos_file")
        for t in traces:
            validate_trace(scn.world, t)
        return traces
    if not scn.demo_recipes:
        raise ScenarioError("scenario has no demonstrations")
    return _generate(scn.world, scn.demo_recipes, scn.seed, entry_base=0)


def build_bob_corpus(scn: Scenario) -> list[Trace]:
    """Bob's replay corpus; entry labels continue after the demo entries,
    so a corpus entry equals the same-position demo entry of a larger file."""
    return _generate(scn.world, scn.bob_recipes, scn.seed, entry_base=len(scn.demo_recipes))
