"""Active intent transfer between two agents.

Alice holds a demonstration set and infers the most likely specification.
Bob holds the true specification. Each round, Alice ranks her evidence; if
candidates remain that her evidence cannot tell apart from the winner, she
plans probe traces that act out the strongest rival hypothesis. Bob runs
the same inference on the probes to see what Alice is entertaining, then
answers with clarifying demonstrations, either planned to satisfy the true
specification while violating Alice's hypothesis, or replayed from his own
corpus. Alice's evidence grows monotonically until no close rival remains
and her winner matches Bob's specification, or the round budget runs out.

Both agents share the world, the concept class, the scoring settings, and
the seed discipline, so either can reproduce the other's ranking exactly.

"Cannot tell apart" is operational: a rival counts as ambiguous when its
score is finite, its divergence from the winner is below the threshold, and
it actually disagrees with the winner somewhere, judged by satisfaction
signatures on a shared pool of random probe traces. Candidates whose
signatures match the winner's are the same hypothesis in this world and are
neither probed nor allowed to block convergence.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from specmine import pltl
from specmine.gridworld import GridWorld, Trace, rollout_random, validate_trace
from specmine.inference import Ranking, SpecScore, divergence, rank_specs
from specmine.planner import plan_satisfying_trace
from specmine.pool import TracePool, build_pool, signature
from specmine.scenario import (
    STREAM_BOB,
    STREAM_CLAR,
    STREAM_PROBE,
    STREAM_ROUND,
    STREAM_SIG,
    seed_stream,
)


@dataclass(frozen=True)
class TransferConfig:
    tau: float = 0.5
    max_rounds: int = 5
    probes_per_round: int = 4
    n_rollouts: int = 10000
    sig_probes: int = 10000
    seed: int = 0
    bob_mode: str = "plan"  # "plan" or "replay"

    def __post_init__(self):
        if self.tau <= 0.0:
            raise ValueError("tau must be positive")
        if self.max_rounds < 1 or self.probes_per_round < 1:
            raise ValueError("round and probe counts must be positive")
        if self.bob_mode not in ("plan", "replay"):
            raise ValueError("bob_mode must be 'plan' or 'replay'")


@dataclass
class AgentState:
    """What one side of the exchange knows."""

    role: str  # "alice" or "bob"
    world: GridWorld
    candidates: tuple[pltl.Formula, ...]
    demos: list[Trace] = field(default_factory=list)
    ranking: Ranking | None = None
    rivals: tuple[SpecScore, ...] = ()
    true_spec: pltl.Formula | None = None  # bob only


@dataclass(frozen=True)
class RoundRecord:
    number: int
    n_demos: int
    ranking: Ranking  # computed from the demo set at round start
    top: SpecScore
    rivals: tuple[SpecScore, ...]
    probed_rival: pltl.Formula | None
    skipped_rivals: tuple[pltl.Formula, ...]  # unrealizable within the bound
    probes: tuple[Trace, ...]
    bob_hypothesis: pltl.Formula | None
    clarifications: tuple[Trace, ...]
    converged: bool
    error: str | None = None


@dataclass(frozen=True)
class TransferTranscript:
    rounds: tuple[RoundRecord, ...]
    status: str  # "converged" or "exhausted"

    @property
    def final_top(self) -> SpecScore:
        return self.rounds[-1].top


class _SignatureIndex:
    """Lazy satisfaction signatures over one shared probe pool."""

    def __init__(self, pool: TracePool):
        self.pool = pool
        self._cache: dict[pltl.Formula, bytes] = {}

    def of(self, phi: pltl.Formula) -> bytes:
        sig = self._cache.get(phi)
        if sig is None:
            sig = signature(self.pool, phi)
            self._cache[phi] = sig
        return sig

    def same(self, a: pltl.Formula, b: pltl.Formula) -> bool:
        return self.of(a) == self.of(b)


def signature_pool(
    world: GridWorld,
    candidates: Sequence[pltl.Formula],
    n_probe: int,
    seed: int,
) -> TracePool:
    """Random traces of mixed lengths used to compare candidate semantics."""
    rng = seed_stream(seed, STREAM_SIG)
    names = set(world.colors_present())
    for phi in candidates:
        names.update(pltl.atoms(phi))
    lengths = rng.integers(1, world.max_steps + 1, size=n_probe)
    probes = [rollout_random(world, int(L), rng) for L in lengths]
    return build_pool(probes, tuple(sorted(names)))


def find_ambiguous_rivals(
    ranking: Ranking,
    tau: float,
    sigs: _SignatureIndex | None = None,
) -> list[SpecScore]:
    """Finite-scored candidates within tau of the winner, in rank order.

    With a signature index, candidates indistinguishable from the winner on
    the probe pool are dropped: they are the same hypothesis, not rivals.
    """
    top = ranking.best
    out = []
    for score in ranking.finite():
        if score.formula == top.formula:
            continue
        if divergence(top, score) >= tau:
            continue
        if sigs is not None and sigs.same(top.formula, score.formula):
            continue
        out.append(score)
    return out


def probe_round(
    alice: AgentState,
    cfg: TransferConfig,
    round_no: int,
) -> tuple[tuple[Trace, ...], pltl.Formula | None, tuple[pltl.Formula, ...]]:
    """Plan probe traces acting out Alice's strongest realizable rival.

    Returns (probes, probed rival, skipped rivals). Rivals the planner
    cannot realize within the episode bound are skipped in rank order; if
    none is realizable the probe list comes back empty and the caller
    records the failure.
    """
    skipped: list[pltl.Formula] = []
    for rival in alice.rivals:
        first = plan_satisfying_trace(
            alice.world, rival.formula, rng=seed_stream(cfg.seed, STREAM_PROBE, round_no, 0)
        )
        if first is None:
            skipped.append(rival.formula)
            continue
        probes = [first]
        for i in range(1, cfg.probes_per_round):
            t = plan_satisfying_trace(
                alice.world, rival.formula, rng=seed_stream(cfg.seed, STREAM_PROBE, round_no, i)
            )
            probes.append(t)
        return tuple(probes), rival.formula, tuple(skipped)
    return (), None, tuple(skipped)


def _clarify(
    bob: AgentState,
    hypothesis: pltl.Formula,
    cfg: TransferConfig,
    round_no: int,
    corpus: Sequence[Trace],
    sent: int,
) -> tuple[Trace, ...]:
    """Bob's answer to a hypothesis he wants to talk Alice out of.

    Replay mode returns the next probes_per_round unsent corpus traces,
    cycling once the corpus is spent. Plan mode plans traces satisfying the
    true spec while violating the hypothesis, falling back to plain
    true-spec traces when the two cannot be split.
    """
    if bob.true_spec is None:
        raise ValueError("bob holds no true specification")
    if cfg.bob_mode == "replay":
        if not corpus:
            raise ValueError("replay mode needs a clarification corpus")
        return tuple(corpus[(sent + i) % len(corpus)] for i in range(cfg.probes_per_round))
    out: list[Trace] = []
    subject = pltl.And(bob.true_spec, pltl.Not(hypothesis))
    for i in range(cfg.probes_per_round):
        rng = seed_stream(cfg.seed, STREAM_CLAR, round_no, i)
        t = plan_satisfying_trace(bob.world, subject, rng=rng)
        if t is None:
            t = plan_satisfying_trace(bob.world, bob.true_spec, rng=rng)
        if t is None:
            raise ValueError("true specification is unrealizable")
        out.append(t)
    return tuple(out)


def bob_respond(
    bob: AgentState,
    probes: Sequence[Trace],
    cfg: TransferConfig,
    round_no: int,
    corpus: Sequence[Trace] = (),
    sent: int = 0,
) -> tuple[pltl.Formula, tuple[Trace, ...]]:
    """Infer Alice's hypothesis from her probes and answer it.

    Bob ranks the probe set with the shared inference machinery; the winner
    is his estimate of what Alice currently believes.
    """
    if not probes:
        raise ValueError("no probes to respond to")
    if bob.true_spec is None:
        raise ValueError("bob holds no true specification")
    probe_ranking = rank_specs(
        bob.candidates,
        list(probes),
        bob.world,
        cfg.n_rollouts,
        seed_stream(cfg.seed, STREAM_BOB, round_no),
    )
    hypothesis = probe_ranking.best.formula
    return hypothesis, _clarify(bob, hypothesis, cfg, round_no, corpus, sent)


def run_transfer_protocol(
    world: GridWorld,
    true_spec: pltl.Formula,
    initial_demos: Sequence[Trace],
    candidates: Sequence[pltl.Formula],
    cfg: TransferConfig,
    bob_corpus: Sequence[Trace] = (),
) -> TransferTranscript:
    """Run rounds of rank / probe / clarify until convergence or budget.

    Convergence requires both halves: Alice's winner matches the true
    specification on the signature pool, and no ambiguous rival remains.
    """
    if not initial_demos:
        raise ValueError("no initial demonstrations")
    if plan_satisfying_trace(world, true_spec) is None:
        raise ValueError("true specification is unrealizable in this world")
    for t in bob_corpus:
        validate_trace(world, t)
        if not pltl.evaluate(true_spec, t):
            raise ValueError("bob's corpus contains a trace violating the true spec")

    candidates = tuple(candidates)
    sigs = _SignatureIndex(signature_pool(world, candidates, cfg.sig_probes, cfg.seed))
    alice = AgentState("alice", world, candidates, demos=list(initial_demos))
    bob = AgentState("bob", world, candidates, true_spec=true_spec)

    rounds: list[RoundRecord] = []
    status = "exhausted"
    sent = 0
    for round_no in range(1, cfg.max_rounds + 1):
        alice.ranking = rank_specs(
            candidates,
            alice.demos,
            world,
            cfg.n_rollouts,
            seed_stream(cfg.seed, STREAM_ROUND, round_no),
        )
        top = alice.ranking.best
        alice.rivals = tuple(find_ambiguous_rivals(alice.ranking, cfg.tau, sigs))
        settled = not alice.rivals and sigs.same(top.formula, true_spec)
        if settled:
            rounds.append(
                RoundRecord(
                    round_no, len(alice.demos), alice.ranking, top, alice.rivals,
                    None, (), (), None, (), converged=True,
                )
            )
            status = "converged"
            break

        probes, probed, skipped = ((), None, ())
        error = None
        if alice.rivals:
            probes, probed, skipped = probe_round(alice, cfg, round_no)
            if not probes:
                error = "rivals unrealizable"
        if probes:
            hypothesis, clar = bob_respond(bob, probes, cfg, round_no, bob_corpus, sent)
        elif error is None:
            # no rivals left but the winner is still not the true intent;
            # Bob reads Alice's top straight off the shared ranking
            hypothesis = top.formula
            clar = _clarify(bob, hypothesis, cfg, round_no, bob_corpus, sent)
        else:
            hypothesis, clar = None, ()

        for t in clar:
            if not pltl.evaluate(true_spec, t):
                raise AssertionError("clarifying trace violates the true specification")

        rounds.append(
            RoundRecord(
                round_no, len(alice.demos), alice.ranking, top, alice.rivals,
                probed, skipped, probes, hypothesis, clar,
                converged=False, error=error,
            )
        )
        if error is not None:
            break
        sent += len(clar)
        alice.demos.extend(clar)
        if not clar:
            break  # nothing new to learn from; no progress possible

    return TransferTranscript(tuple(rounds), status)


def transcript_to_dict(transcript: TransferTranscript) -> dict:
    """Plain-data form of a transcript, ready for JSON serialization."""

    def trace_dict(t: Trace) -> list[dict]:
        return [
            {"pos": [s.pos[0], s.pos[1]], "props": sorted(s.obs), "action": s.action}
            for s in t.steps
        ]

    def score_dict(s: SpecScore) -> dict:
        return {
            "formula": str(s.formula),
            "phi_bar": s.empirical,
            "phi_hat": s.random,
            "kl": s.kl_term,
            "log_posterior": s.log_posterior if s.log_posterior != float("-inf") else None,
        }

    rounds = []
    for r in transcript.rounds:
        rounds.append(
            {
                "round": r.number,
                "n_demos": r.n_demos,
                "top": score_dict(r.top),
                "rivals": [
                    dict(score_dict(s), divergence=divergence(r.top, s)) for s in r.rivals
                ],
                "probed_rival": str(r.probed_rival) if r.probed_rival is not None else None,
                "skipped_rivals": [str(f) for f in r.skipped_rivals],
                "probes": [trace_dict(t) for t in r.probes],
                "bob_hypothesis": str(r.bob_hypothesis) if r.bob_hypothesis else None,
                "clarifications": [trace_dict(t) for t in r.clarifications],
                "converged": r.converged,
                "error": r.error,
                "ranking": [score_dict(s) for s in r.ranking.scores],
            }
        )
    return {"status": transcript.status, "rounds": rounds}


def summarize(transcript: TransferTranscript) -> str:
    """Human-readable round table."""
    lines = ["round  demos  rivals  min_div  top"]
    for r in transcript.rounds:
        if r.rivals:
            min_div = min(divergence(r.top, s) for s in r.rivals)
            div_text = f"{min_div:7.3f}"
        else:
            div_text = "      -"
        lines.append(
            f"{r.number:5d}  {r.n_demos:5d}  {len(r.rivals):6d}  {div_text}  {r.top.formula}"
        )
    lines.append(f"status: {transcript.status}")
    return "\n".join(lines)
