"""Two scalar systems with impulses at every integer.

A frozen state halved at each impulse decays like 2^-t.  A decaying state
multiplied by e at each impulse returns to its start after every period:
the jumps cancel the flow exactly, so the system is stable but not
asymptotically stable.
"""
import math

import numpy as np

from impulsive import (
    CoefficientOperator,
    ImpulsiveSystem,
    JumpSequence,
    build_uniform_schedule,
    estimate_decay_rate,
    solve_ivp,
)


def scalar(a, b, horizon=10.0):
    sched = build_uniform_schedule(1.0, horizon)
    return ImpulsiveSystem(CoefficientOperator.constant([[a]]),
                           JumpSequence.constant([[b]], len(sched)), sched)


# x' = 0, x(i) = x(i-0) / 2
halving = solve_ivp(scalar(0.0, 0.5), x0=[1.0])
x = halving.x[:, 0]
print("halving: x at t = 0.5, 1, 2.5, 9.9 ->", [float(halving.at(t)[0]) for t in (0.5, 1.0, 2.5, 9.9)])
print("  max |x - 2^-floor(t)|      =", np.max(np.abs(x - 2.0 ** -np.floor(halving.t))))
print("  max x(t) / (2 exp(-t ln2)) =", np.max(x / (2 * np.exp(-halving.t * math.log(2)))))

# x' + x = 0, x(i) = e x(i-0)
balanced = solve_ivp(scalar(1.0, math.e), x0=[1.0])
print("balanced: x(i) for i = 1..10 ->", np.round([balanced.at(float(i))[0] for i in range(1, 11)], 12))
print("  lowest value just before a jump:", balanced.x[:, 0].min(), "(e^-1 =", math.exp(-1), ")")

# the tail-sup envelope is flat, so the fitted rate is zero; a raw log fit
# would read the sawtooth as slow decay
nu_env, _ = estimate_decay_rate(balanced.t, balanced.norms())
nu_raw, _ = estimate_decay_rate(balanced.t, balanced.norms(), envelope=False)
print(f"  fitted rate: envelope {nu_env:.2e}, raw samples {nu_raw:.3f}")
