# Two agents talking each other out of an ambiguity.
#
# Alice mined her demonstrations and cannot tell two candidate intentions
# apart: their scores are within tau of each other. So she plans a probe
# trace that acts out the rival, sends it to Bob (who knows the real
# intention), and Bob answers with clarifying traces that satisfy the
# truth and contradict what the probe suggested. Alice folds those into
# her demo set and rescores. Rounds repeat until no rival is close.
#
# Here the truth is "O red" but the opening demonstration also recharges,
# so "O yellow" starts out just as plausible.

import numpy as np

from specmine import pltl
from specmine.gridworld import Step, Trace, load_world, label
from specmine.transfer import TransferConfig, run_transfer_protocol, summarize

WORLD = "..y\n.A.\nr..\n"
world = load_world(WORLD, max_steps=8)


def walk(actions):
    # deterministic walk from the start, same kernel the planner uses
    moves = {"N": (0, -1), "S": (0, 1), "E": (1, 0), "W": (-1, 0)}
    pos, steps = world.start, []
    for a in actions:
        steps.append(Step(pos, label(world, pos), a))
        dx, dy = moves[a]
        nx, ny = pos[0] + dx, pos[1] + dy
        if 0 <= nx < world.width and 0 <= ny < world.height:
            pos = (nx, ny)
    steps.append(Step(pos, label(world, pos), None))
    return Trace(tuple(steps))


# The opening demo visits the red corner, then wanders up to yellow.
opening = walk(["S", "W", "N", "N", "E", "E"])
print("opening demo colors:", [sorted(s.obs) for s in opening.steps])

candidates = (pltl.parse_formula("O red"), pltl.parse_formula("O yellow"))
cfg = TransferConfig(
    tau=1.0, max_rounds=5, probes_per_round=2,
    n_rollouts=2000, sig_probes=2000, seed=3, bob_mode="plan",
)
transcript = run_transfer_protocol(
    world, pltl.parse_formula("O red"), [opening], candidates, cfg
)

print()
print(summarize(transcript))
print()
# Round one: Alice acts out the rival reading of her demos. Bob reads the
# probes as "this agent wants yellow", knows that is wrong, and answers
# with traces that satisfy the truth while never touching yellow at all.
for r in transcript.rounds:
    if r.probed_rival is not None:
        print(f"round {r.number}: Alice probes '{r.probed_rival}', Bob reads it as '{r.bob_hypothesis}'")
        for t in r.clarifications:
            print("   clarification:", [sorted(s.obs) for s in t.steps])

# The big version of this run lives in scenarios/paper-xprime.cfg: Alice
# starts from demonstrations that never touch water, converges on the full
# water-safety intention in three rounds, and writes a transcript.json.
# Try: specmine transfer --config scenarios/paper-xprime.cfg
