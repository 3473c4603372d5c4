# Mining an intention from demonstrations.
#
# The miner never sees the teacher's formula. It sees a handful of traces,
# scores every candidate in a concept class, and ranks them: a candidate
# scores high when the demonstrations always satisfy it (phi_bar) while
# random walks of the same lengths rarely do (phi_hat). The score is
# |X| * KL(Bernoulli(phi_bar) || Bernoulli(phi_hat)), gated so that any
# candidate the demos satisfy less often than chance is ruled out.

from pathlib import Path

import numpy as np

from specmine import pltl
from specmine.concepts import ConceptConfig, enumerate_candidates
from specmine.gridworld import load_world
from specmine.inference import rank_specs
from specmine.planner import plan_satisfying_trace
from specmine.scenario import pad_to_length

here = Path(__file__).resolve().parent
world = load_world((here.parent / "worlds" / "calib-3x3.world").read_text(), max_steps=12)

# The secret intention: touch yellow, stay off red.
secret = pltl.parse_formula("H !red & O yellow")

# A compact concept class over the colors this world actually has.
cfg = ConceptConfig(
    atoms=("yellow", "red", "white"),
    templates=("hist", "once", "since", "hist_once"),
    background=("white",),
)
candidates = enumerate_candidates(cfg)
print(f"concept class: {len(candidates)} candidates")


def show(ranking, rows=5):
    print(f"  {'formula':24s} {'phi_bar':>7s} {'phi_hat':>7s} {'log posterior':>13s}")
    for s in ranking.scores[:rows]:
        print(f"  {str(s.formula):24s} {s.empirical:7.2f} {s.random:7.4f} {s.log_posterior:13.4f}")


# Round one: three shortest demonstrations. Two steps to the corner never
# come anywhere near red, so "O yellow", "!red S yellow" and the secret
# are satisfied by exactly the same random walks and tie. Ties break
# toward the smallest formula, and the miner undersells the intention.
demos = [
    plan_satisfying_trace(world, secret, rng=np.random.default_rng(i)) for i in range(3)
]
print("\nwith three 3-step demonstrations:")
ranking = rank_specs(candidates, demos, world, n_rollouts=4000, rng=np.random.default_rng(99))
show(ranking)
print("mined:", ranking.best.formula)

# Round two: ask the teacher for longer walks. Forcing seven steps is a
# formula trick, conjoining a chain of Y operators, so the same planner
# applies. Long random walks often stumble into red before reaching
# yellow, which separates the secret from plain "O yellow".
demos = [
    plan_satisfying_trace(world, pad_to_length(secret, 7), rng=np.random.default_rng(i))
    for i in range(3)
]
print("\nwith three 7-step demonstrations:")
ranking = rank_specs(candidates, demos, world, n_rollouts=4000, rng=np.random.default_rng(99))
show(ranking)
print("mined:", ranking.best.formula)
print("matches the secret:", ranking.best.formula == secret)

# The lesson: what the miner can recover is bounded by what the
# demonstrations can disambiguate. demos/04_transfer_protocol.py shows the
# interactive way out when collecting more demonstrations is not an option.
