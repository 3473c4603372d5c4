"""Command-line front end: evaluate, mine, plan, transfer.

Four subcommands wire the library together for scripted use.  Every run is
deterministic given its inputs and seed; output files are written with a
temp-then-rename so a crashed run never leaves a half-written artifact.
Wall-clock timings go to stdout only, never into files, so reruns with the
same seed produce byte-identical artifacts.

Exit codes: 0 success (an UNSAT planning answer is a success), 2 for usage,
parse, or config errors, 3 for runtime failures.
"""

from __future__ import annotations

import argparse
import dataclasses
import io
import json
import math
import os
import sys
import tempfile
import time
from collections.abc import Sequence

from . import pltl
from .concepts import enumerate_candidates
from .gridworld import COLORS, Trace, WorldError, dump_traces, load_world, parse_traces
from .inference import Ranking, rank_specs
from .planner import plan_satisfying_trace
from .scenario import (
    STREAM_MINE,
    STREAM_PLAN,
    Scenario,
    ScenarioError,
    build_bob_corpus,
    build_demos,
    load_scenario,
    seed_stream,
)
from .transfer import TransferConfig, run_transfer_protocol, summarize, transcript_to_dict

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_RUNTIME = 3


class CliError(Exception):
    """Carries the intended exit code alongside the message."""

    def __init__(self, message: str, code: int = EXIT_RUNTIME):
        super().__init__(message)
        self.code = code


def _write_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(path) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _traces_text(traces: Sequence[Trace]) -> str:
    buf = io.StringIO()
    dump_traces(traces, buf)
    return buf.getvalue()


def _fmt(value: float) -> str:
    if value == -math.inf:
        return "-inf"
    return format(value, ".12g")


def ranking_tsv(ranking: Ranking) -> str:
    """Tab-separated ranking table, best candidate first."""
    lines = ["formula\tphi_bar\tphi_hat\tkl_term\tlog_posterior"]
    for s in ranking.scores:
        lines.append(
            "\t".join(
                (str(s.formula), _fmt(s.empirical), _fmt(s.random), _fmt(s.kl_term), _fmt(s.log_posterior))
            )
        )
    return "\n".join(lines) + "\n"


def _parse_formula(text: str) -> pltl.Formula:
    try:
        phi = pltl.parse_formula(text)
        pltl.check_atoms(phi, set(COLORS))
    except (pltl.ParseError, pltl.UnknownAtomError) as exc:
        raise CliError(f"formula: {exc}", EXIT_USAGE) from None
    return phi


def _load_scenario(path: str, seed: int | None, out: str | None) -> Scenario:
    try:
        scn = load_scenario(path)
    except OSError as exc:
        raise CliError(f"cannot read config: {exc}", EXIT_USAGE) from None
    except ScenarioError as exc:
        raise CliError(f"config: {exc}", EXIT_USAGE) from None
    if seed is not None:
        scn = dataclasses.replace(scn, seed=seed)
    if out is not None:
        scn = dataclasses.replace(scn, out_dir=out)
    return scn


def cmd_eval(args: argparse.Namespace) -> int:
    phi = _parse_formula(args.formula)
    try:
        with open(args.traces, encoding="utf-8") as f:
            traces = parse_traces(f.read())
    except OSError as exc:
        raise CliError(f"cannot read traces: {exc}") from None
    except ValueError as exc:
        raise CliError(f"traces: {exc}", EXIT_USAGE) from None
    if not traces:
        raise CliError("traces: file holds no traces", EXIT_USAGE)
    for i, trace in enumerate(traces):
        verdict = pltl.evaluate(phi, trace)
        print(f"trace {i}: {'true' if verdict else 'false'}")
    return EXIT_OK


def cmd_mine(args: argparse.Namespace) -> int:
    scn = _load_scenario(args.config, args.seed, args.out)
    started = time.perf_counter()
    try:
        demos = build_demos(scn)
    except ScenarioError as exc:
        raise CliError(f"config: {exc}", EXIT_USAGE) from None
    except (WorldError, ValueError) as exc:
        raise CliError(str(exc)) from None
    candidates = enumerate_candidates(scn.concept)
    ranking = rank_specs(
        candidates, demos, scn.world, scn.n_rollouts, seed_stream(scn.seed, STREAM_MINE)
    )
    elapsed = time.perf_counter() - started

    best = ranking.best
    summary = "\n".join(
        (
            f"top formula: {best.formula}",
            f"log posterior: {_fmt(best.log_posterior)}  (phi_bar {_fmt(best.empirical)}, phi_hat {_fmt(best.random)})",
            f"candidates explored: {len(candidates)}",
            f"demonstrations: {len(demos)}",
        )
    )
    tsv_path = os.path.join(scn.out_dir, "ranking.tsv")
    demos_path = os.path.join(scn.out_dir, "demos.jsonl")
    summary_path = os.path.join(scn.out_dir, "summary.txt")
    _write_atomic(tsv_path, ranking_tsv(ranking))
    _write_atomic(demos_path, _traces_text(demos))
    # timing stays off the artifact so same-seed reruns are byte-identical
    _write_atomic(summary_path, summary + "\n")

    print(summary)
    print(f"wall time: {elapsed:.2f} s")
    for path in (tsv_path, demos_path, summary_path):
        print(f"wrote {path}")
    return EXIT_OK


def cmd_plan(args: argparse.Namespace) -> int:
    if args.max_len < 1:
        raise CliError("max_len must be at least 1", EXIT_USAGE)
    try:
        with open(args.world, encoding="utf-8") as f:
            world_text = f.read()
    except OSError as exc:
        raise CliError(f"cannot read world: {exc}") from None
    try:
        world = load_world(world_text, max_steps=args.max_len)
    except WorldError as exc:
        raise CliError(f"world: {exc}", EXIT_USAGE) from None
    phi = _parse_formula(args.formula)
    trace = plan_satisfying_trace(
        world, phi, max_len=args.max_len, rng=seed_stream(args.seed, STREAM_PLAN)
    )
    if trace is None:
        print("UNSAT")
        return EXIT_OK
    _write_atomic(args.out, _traces_text([trace]))
    print(f"trace with {len(trace.steps)} steps written to {args.out}")
    return EXIT_OK


def cmd_transfer(args: argparse.Namespace) -> int:
    scn = _load_scenario(args.config, args.seed, args.out)
    if scn.true_spec is None:
        raise CliError("config: transfer needs true_spec", EXIT_USAGE)
    if scn.bob_mode == "replay" and not scn.bob_recipes:
        raise CliError("config: bob_mode replay needs bob_demo entries", EXIT_USAGE)
    started = time.perf_counter()
    try:
        demos = build_demos(scn)
        corpus = build_bob_corpus(scn) if scn.bob_mode == "replay" else []
    except ScenarioError as exc:
        raise CliError(f"config: {exc}", EXIT_USAGE) from None
    candidates = enumerate_candidates(scn.concept)
    cfg = TransferConfig(
        tau=scn.tau,
        max_rounds=scn.max_rounds,
        probes_per_round=scn.probes_per_round,
        n_rollouts=scn.n_rollouts,
        sig_probes=scn.sig_probes,
        seed=scn.seed,
        bob_mode=scn.bob_mode,
    )
    transcript = run_transfer_protocol(
        scn.world, scn.true_spec, demos, candidates, cfg, bob_corpus=corpus
    )
    elapsed = time.perf_counter() - started

    path = os.path.join(scn.out_dir, "transcript.json")
    payload = json.dumps(transcript_to_dict(transcript), indent=2, sort_keys=True)
    _write_atomic(path, payload + "\n")

    print(summarize(transcript))
    print(f"wall time: {elapsed:.2f} s")
    print(f"wrote {path}")
    if any(r.error for r in transcript.rounds):
        messages = "; ".join(r.error for r in transcript.rounds if r.error)
        raise CliError(f"protocol stopped: {messages}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="specmine",
        description="Mine temporal-logic task specifications from grid-world demonstrations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_eval = sub.add_parser("eval", help="evaluate a formula over a trace file")
    p_eval.add_argument("formula", help="formula text, e.g. 'H !red & O yellow'")
    p_eval.add_argument("traces", help="trace file, one JSON object per line")
    p_eval.set_defaults(func=cmd_eval)

    p_mine = sub.add_parser("mine", help="rank the concept class against demonstrations")
    p_mine.add_argument("--config", required=True, help="scenario config file")
    p_mine.add_argument("--seed", type=int, default=None, help="override the config seed")
    p_mine.add_argument("--out", default=None, help="override the output directory")
    p_mine.set_defaults(func=cmd_mine)

    p_plan = sub.add_parser("plan", help="find a shortest trace satisfying a formula")
    p_plan.add_argument("world", help="world file")
    p_plan.add_argument("formula", help="formula the trace must satisfy")
    p_plan.add_argument("max_len", type=int, help="largest trace length to consider")
    p_plan.add_argument("--seed", type=int, default=0, help="tie-break seed (default 0)")
    p_plan.add_argument("--out", default="trace.jsonl", help="output trace file")
    p_plan.set_defaults(func=cmd_plan)

    p_tr = sub.add_parser("transfer", help="run the two-agent clarification protocol")
    p_tr.add_argument("--config", required=True, help="scenario config file")
    p_tr.add_argument("--seed", type=int, default=None, help="override the config seed")
    p_tr.add_argument("--out", default=None, help="override the output directory")
    p_tr.set_defaults(func=cmd_transfer)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 on --help; keep both
        return int(exc.code or 0)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (ScenarioError, pltl.ParseError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
