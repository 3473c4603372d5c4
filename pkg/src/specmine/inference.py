"""Posterior scoring of candidate specifications.

A candidate formula phi is scored against a set of demonstrations X and a
matched pool of random rollouts:

    log_posterior(phi) = |X| * KL(phi_bar || phi_hat)   if phi_bar >= phi_hat
                         -inf                           otherwise

where phi_bar is the fraction of demonstrations satisfying phi, phi_hat the
fraction of random rollouts doing so, and KL the Bernoulli relative entropy.
A formula the demonstrator hits more often than chance scores high; one it
hits less often than chance is ruled out entirely.
"""

from __future__ import annotations

import hashlib
import io
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from specmine import pltl
from specmine.gridworld import GridWorld, Trace, dump_traces, rollout_random
from specmine.pool import TracePool, build_pool, satisfies


def kl_bernoulli(p: float, q: float) -> float:
    """KL(Ber(p) || Ber(q)) in nats, with the 0*log(0) = 0 convention.

    Args:
        p: empirical rate, may be 0 or 1.
        q: reference rate, must lie strictly inside (0, 1).
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be in [0, 1], got {p}")
    if not 0.0 < q < 1.0:
        raise ValueError(f"q must be in (0, 1), got {q}")
    out = 0.0
    if p > 0.0:
        out += p * math.log(p / q)
    if p < 1.0:
        out += (1.0 - p) * math.log((1.0 - p) / (1.0 - q))
    return out


def clamp_rate(q: float, n_samples: int) -> float:
    """Pull a Monte Carlo rate away from {0, 1} by half a sample's weight."""
    if n_samples < 1:
        raise ValueError("need at least one sample")
    eps = 1.0 / (2.0 * n_samples)
    return min(max(q, eps), 1.0 - eps)


def demo_fingerprint(demos: Sequence[Trace]) -> str:
    """Short content hash of a demonstration set.

    Scores carry this so that divergences are only ever taken between
    scores computed from the same demonstrations.
    """
    buf = io.StringIO()
    dump_traces(demos, buf)
    return hashlib.sha256(buf.getvalue().encode("utf-8")).hexdigest()[:16]


@dataclass(frozen=True)
class SpecScore:
    formula: pltl.Formula
    empirical: float  # satisfaction rate over the demonstrations
    random: float  # raw satisfaction rate over matched random rollouts
    kl_term: float  # KL(empirical || clamped random)
    log_posterior: float
    size: int
    fingerprint: str = ""  # demo-set hash; empty for hand-built scores

    def __str__(self) -> str:
        return (
            f"{self.formula}  emp={self.empirical:.3f} rand={self.random:.4f} "
            f"kl={self.kl_term:.4f} logpost={self.log_posterior:.4f}"
        )


@dataclass(frozen=True)
class Ranking:
    """Scored candidates, best first."""

    scores: tuple[SpecScore, ...]
    n_demos: int
    n_rollouts: int
    fingerprint: str = ""

    @property
    def best(self) -> SpecScore:
        return self.scores[0]

    def finite(self) -> tuple[SpecScore, ...]:
        return tuple(s for s in self.scores if s.log_posterior > float("-inf"))


def posterior_score(phi_bar: float, phi_hat: float, n_demos: int, n_rollouts: int) -> tuple[float, float]:
    """(kl_term, log_posterior) for the given rates.

    The acceptance indicator compares against the raw phi_hat; clamping only
    feeds the KL term.
    """
    if n_demos < 1:
        raise ValueError("need at least one demonstration")
    kl = kl_bernoulli(phi_bar, clamp_rate(phi_hat, n_rollouts))
    if phi_bar >= phi_hat:
        return kl, n_demos * kl
    return kl, float("-inf")


def empirical_satisfaction(phi: pltl.Formula, demos: Sequence[Trace]) -> float:
    """Fraction of demonstrations satisfying phi."""
    if not demos:
        raise ValueError("no demonstrations")
    return sum(pltl.evaluate(phi, t) for t in demos) / len(demos)


def random_satisfaction(
    phi: pltl.Formula,
    world: GridWorld,
    demo_lengths: Sequence[int],
    n_rollouts: int,
    rng: np.random.Generator,
) -> float:
    """Monte Carlo estimate of phi's satisfaction rate under random actions.

    Rollout lengths are resampled from the demonstration lengths so the
    comparison is like-for-like.
    """
    if n_rollouts < 1:
        raise ValueError("need at least one rollout")
    rollouts = matched_rollouts(world, demo_lengths, n_rollouts, rng)
    pool = build_pool(rollouts, _pool_atoms(world, (phi,)))
    return float(np.mean(satisfies(pool, phi)))


def score_candidates(
    candidates: Sequence[pltl.Formula],
    demo_pool: TracePool,
    rollout_pool: TracePool,
    fingerprint: str = "",
) -> Ranking:
    """Score every candidate and sort by posterior, then size, then text."""
    scores = []
    for phi in candidates:
        phi_bar = float(np.mean(satisfies(demo_pool, phi)))
        phi_hat = float(np.mean(satisfies(rollout_pool, phi)))
        kl, logpost = posterior_score(phi_bar, phi_hat, demo_pool.size, rollout_pool.size)
        scores.append(SpecScore(phi, phi_bar, phi_hat, kl, logpost, pltl.size(phi), fingerprint))
    scores.sort(key=lambda s: (-s.log_posterior, s.size, str(s.formula)))
    return Ranking(tuple(scores), demo_pool.size, rollout_pool.size, fingerprint)


def rank_specs(
    candidates: Sequence[pltl.Formula],
    demos: Sequence[Trace],
    world: GridWorld,
    n_rollouts: int,
    rng: np.random.Generator,
) -> Ranking:
    """Rank a concept class against demonstrations.

    One shared rollout pool is scored against every candidate: common random
    numbers keep the ranking comparable across formulas and cut the variance
    of divergences between them.
    """
    if not candidates:
        raise ValueError("empty concept class")
    if not demos:
        raise ValueError("no demonstrations")
    atoms = _pool_atoms(world, candidates)
    rollouts = matched_rollouts(world, [len(t) for t in demos], n_rollouts, rng)
    return score_candidates(
        candidates,
        build_pool(demos, atoms),
        build_pool(rollouts, atoms),
        demo_fingerprint(demos),
    )


def divergence(a: SpecScore, b: SpecScore) -> float:
    """KL gap between two scored formulas.

    Only meaningful when both were scored against the same demonstrations,
    hence the fingerprint check.
    """
    if a.fingerprint != b.fingerprint:
        raise ValueError("scores come from different demonstration sets")
    return a.kl_term - b.kl_term


def matched_rollouts(
    world: GridWorld,
    demo_lengths: Sequence[int],
    n_rollouts: int,
    rng: np.random.Generator,
) -> list[Trace]:
    """Random rollouts whose lengths are resampled from the demo lengths."""
    if not demo_lengths:
        raise ValueError("no demonstration lengths to match")
    lengths = rng.choice(np.asarray(demo_lengths, dtype=int), size=n_rollouts)
    return [rollout_random(world, int(L), rng) for L in lengths]


def _pool_atoms(world: GridWorld, formulas: Sequence[pltl.Formula]) -> tuple[str, ...]:
    names = set(world.colors_present())
    for phi in formulas:
        names.update(pltl.atoms(phi))
    return tuple(sorted(names))
