import io
import os

import pytest

from specmine import pltl
from specmine.gridworld import dump_traces
from specmine.scenario import (
    ScenarioError,
    build_bob_corpus,
    build_demos,
    load_scenario,
    pad_to_length,
    parse_scenario,
    seed_stream,
)

HERE = os.path.dirname(os.path.abspath(__file__))
REPO = os.path.dirname(HERE)

MINI_WORLD = "..y\n.A.\nr..\n"


@pytest.fixture()
def world_file(tmp_path):
    p = tmp_path / "mini.world"
    p.write_text(MINI_WORLD)
    return str(p)


def cfg_text(world_path, extra=""):
    return f"world = {world_path}\nseed = 7\n{extra}"


def test_parse_defaults_and_overrides(world_file):
    scn = parse_scenario(cfg_text(world_file, "demo = 1 3 O yellow\n"))
    assert scn.seed == 7
    assert scn.n_rollouts == 10000
    assert scn.tau == 0.5
    assert scn.max_rounds == 5
    assert scn.bob_mode == "plan"
    assert scn.world.max_steps == 60
    assert scn.demo_recipes[0].count == 1
    assert str(scn.demo_recipes[0].spec) == "O yellow"

    scn2 = parse_scenario(
        cfg_text(world_file, "demo = 1 3 O yellow\ntau = 1.5\nbob_mode = replay\nmax_steps = 9\n")
    )
    assert scn2.tau == 1.5 and scn2.bob_mode == "replay" and scn2.world.max_steps == 9


@pytest.mark.parametrize(
    "text,fragment",
    [
        ("seed = 7\n", "world"),
        ("world = {w}\n", "seed"),
        ("world = {w}\nseed = 7\nbogus = 1\n", "unknown key"),
        ("world = {w}\nseed = 7\ndemo = 1 O yellow\n", "COUNT MINLEN FORMULA"),
        ("world = {w}\nseed = 7\ndemo = 0 3 O yellow\n", "positive"),
        ("world = {w}\nseed = 7\ndemo = 1 3 O (yellow\n", "line 3"),
        ("world = {w}\nseed = 7\ntau = -1\n", "tau"),
        ("world = {w}\nseed = 7\nseed = -4\n", "seed"),
        ("world = {w}\nseed = 7\nbob_mode = shout\n", "bob_mode"),
        ("world = {w}\nseed = 7\nno equals sign\n", "key = value"),
        ("world = {w}\nseed = 7\ndemo = 1 3 O blue\n", "absent from the world"),
    ],
)
def test_parse_errors(world_file, text, fragment):
    with pytest.raises(ScenarioError, match=fragment):
        parse_scenario(text.format(w=world_file))


def test_pad_to_length_forces_minimum():
    phi = pltl.parse_formula("O yellow")
    padded = pad_to_length(phi, 4)
    assert pltl.size(padded) == pltl.size(phi) + 5  # And + 3 Y's + true
    short = [{"yellow"}, {"yellow"}]
    long_enough = [{"white"}, {"white"}, {"white"}, {"yellow"}]
    from test_pool import make_trace

    assert not pltl.evaluate(padded, make_trace(short))
    assert pltl.evaluate(padded, make_trace(long_enough))
    with pytest.raises(ValueError):
        pad_to_length(phi, 0)


def test_build_demos_deterministic_and_validated(world_file):
    text = cfg_text(world_file, "demo = 3 4 O yellow & H !red\n")
    demos_a = build_demos(parse_scenario(text))
    demos_b = build_demos(parse_scenario(text))
    assert demos_a == demos_b
    assert all(len(t) == 4 for t in demos_a)
    phi = pltl.parse_formula("O yellow & H !red")
    assert all(pltl.evaluate(phi, t) for t in demos_a)


def test_demo_entries_are_position_stable(world_file):
    # a restricted file's corpus is a bit-identical prefix of the full one,
    # and bob entries line up with the same-position demo entries
    full = parse_scenario(cfg_text(world_file, "demo = 2 3 O yellow\ndemo = 2 5 O yellow\n"))
    restricted = parse_scenario(
        cfg_text(world_file, "demo = 2 3 O yellow\nbob_demo = 2 5 O yellow\n")
    )
    full_demos = build_demos(full)
    assert build_demos(restricted) == full_demos[:2]
    assert build_bob_corpus(restricted) == full_demos[2:]


def test_unsatisfiable_recipe_reports(world_file):
    scn = parse_scenario(cfg_text(world_file, "demo = 1 3 yellow & red\n"))
    with pytest.raises(ScenarioError, match="unsatisfiable"):
        build_demos(scn)


def test_demos_file_round_trip(tmp_path, world_file):
    scn = parse_scenario(cfg_text(world_file, "demo = 2 4 O yellow\n"))
    demos = build_demos(scn)
    buf = io.StringIO()
    dump_traces(demos, buf)
    traces_path = tmp_path / "demos.jsonl"
    traces_path.write_text(buf.getvalue())

    scn2 = parse_scenario(cfg_text(world_file, f"demos_file = {traces_path}\n"))
    assert build_demos(scn2) == demos

    with pytest.raises(ScenarioError, match="not both"):
        parse_scenario(
            cfg_text(world_file, f"demo = 1 3 O yellow\ndemos_file = {traces_path}\n")
        )


def test_shipped_scenarios_parse():
    full = load_scenario(os.path.join(REPO, "scenarios", "paper-full.cfg"))
    restricted = load_scenario(os.path.join(REPO, "scenarios", "paper-xprime.cfg"))
    assert full.world.width == 11 and full.world.height == 11
    assert full.seed == restricted.seed
    assert [r.count for r in full.demo_recipes] == [2, 9, 9]
    assert restricted.demo_recipes == full.demo_recipes[:1]
    assert restricted.bob_recipes == full.demo_recipes[1:]
    assert restricted.bob_mode == "replay"
    assert full.true_spec == pltl.parse_formula(
        "(H !red & O yellow) & H((yellow & O blue) -> (!blue S brown))"
    )


def test_seed_stream_independence():
    a = seed_stream(7, 1, 0, 0)
    b = seed_stream(7, 1, 0, 1)
    c = seed_stream(7, 1, 0, 0)
    xs, ys, zs = a.integers(0, 1 << 30, 8), b.integers(0, 1 << 30, 8), c.integers(0, 1 << 30, 8)
    assert list(xs) == list(zs)
    assert list(xs) != list(ys)
