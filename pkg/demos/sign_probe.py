"""The sign probe: start at zero and kick with alpha_i = sign(B_1 ... B_i).

All the terms of the response then share a sign, so the probe's sup is the
largest response any unit-size offsets can produce.  A bounded probe means
every bounded input gives a bounded output (up to the simulated horizon).
Impulses applied as delta functions are the special case B_i = 1.
"""
import math

from impulsive import (
    CoefficientOperator,
    ImpulsiveSystem,
    JumpSequence,
    build_uniform_schedule,
    delta_to_jumps,
    scalar_probe,
    sign_sequence,
    solve_ivp,
)


def scalar(a, b, horizon=40.0, eta=1.0):
    sched = build_uniform_schedule(eta, horizon)
    return ImpulsiveSystem(CoefficientOperator.constant([[a]]),
                           JumpSequence.constant([[b]], len(sched)), sched)


for label, system in [("frozen, halved", scalar(0.0, 0.5)),
                      ("decaying, times e", scalar(1.0, math.e)),
                      ("decaying, times -1.5", scalar(0.8, -1.5, eta=0.7))]:
    v = scalar_probe(system)
    print(f"{label:22s} {v.verdict.value:15s} Q_hat = {v.Q_hat:10.6f}  "
          f"window growth = {v.growth_ratio:.4f}")

print("signs for B = -1.5:", sign_sequence(scalar(0.8, -1.5, 5.0, 1.0)))

# unit deltas at every integer on x' + x = 0 settle at 1/(1 - 1/e)
layer, forcing = delta_to_jumps(1.0, 1.0, 20.0)
traj = solve_ivp(layer.system(CoefficientOperator.constant([[1.0]])), forcing, [0.0])
print(f"delta train: x(20+) = {traj.at(20.0)[0]:.6f}, limit {1 / (1 - math.exp(-1)):.6f}")
