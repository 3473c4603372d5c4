# Past-time temporal formulas over colored traces.
#
# A trace is a sequence of observations (sets of color names). A formula
# talks about the history up to the current step: H f says f held at every
# step so far, O f says f held at least once, f S g says g happened and f
# has held ever since, Y f looks one step back. Satisfaction is judged at
# the last step of the trace.

from specmine import pltl

# The running example: reach a recharge (yellow) tile without ever
# touching lava (red).
phi = pltl.parse_formula("H !red & O yellow")
print("formula:", phi)
print("AST size:", pltl.size(phi), "nodes")
print("atoms:", sorted(pltl.atoms(phi)))

# Evaluate over a few hand-written observation sequences.
W, Y, R = frozenset({"white"}), frozenset({"yellow"}), frozenset({"red"})
for name, obs in [
    ("white, white, yellow", [W, W, Y]),
    ("white, red, yellow  ", [W, R, Y]),
    ("yellow only         ", [Y]),
    ("never recharges     ", [W, W, W]),
]:
    print(f"  {name} -> {pltl.evaluate(phi, obs)}")

# The same verdicts fall out of the incremental monitor, one observation
# at a time. The monitor keeps one boolean per subformula, so it runs in
# constant space no matter how long the trace gets.
print("\nmonitoring white, red, yellow step by step:")
state = pltl.monitor_init(phi, W)
print("  after white :", state.satisfied)
for obs, label in [(R, "red"), (Y, "yellow")]:
    state = pltl.monitor_step(phi, state, obs)
    print(f"  after {label:6s}:", state.satisfied)

# Since-formulas order events: "no water since the drying tile" means the
# last brown observation is more recent than any blue one.
guard = pltl.parse_formula("!blue S brown")
B, N = frozenset({"blue"}), frozenset({"brown"})
print("\nguard:", guard)
print("  brown then white :", pltl.evaluate(guard, [N, W]))
print("  brown then blue  :", pltl.evaluate(guard, [N, B]))
print("  blue then brown  :", pltl.evaluate(guard, [B, N]))
