"""C(t, s) two ways: from the fundamental matrix, and by chaining jump-free
propagators G with the jump matrices.  Going backwards in time inverts the
jumps, so a singular jump blocks that direction only."""
import numpy as np

from impulsive import (
    CoefficientOperator,
    ImpulseSchedule,
    ImpulsiveSystem,
    JumpSequence,
    NonImpulsiveEvolution,
    SingularJumpError,
    evolution_branch,
    evolution_from_G,
    evolution_operator,
    op_norm,
    semigroup_residual,
)

rng = np.random.default_rng(1)
times = np.array([0.6, 1.1, 1.9, 2.4])
A = CoefficientOperator.piecewise([0.0, *times], rng.uniform(-1, 1, (5, 2, 2)))
B = JumpSequence(rng.uniform(-1, 1, (4, 2, 2)) + np.eye(2))
system = ImpulsiveSystem(A, B, ImpulseSchedule(times, 3.0))
G = NonImpulsiveEvolution(A)

for t, s in [(0.9, 0.7), (2.8, 0.2), (0.3, 2.2)]:
    C1 = evolution_operator(system, t, s)
    C2 = evolution_from_G(G, B, system.schedule, t, s)
    print(f"C({t}, {s}) [{evolution_branch(system.schedule, t, s)}]")
    print(np.array2string(C1, precision=6))
    print(f"  disagreement between constructions: {op_norm(C1 - C2):.2e}")

print("semigroup residual ||C(t,s) - C(t,r) C(r,s)||:")
for t, r, s in rng.uniform(0, 3, (5, 3)):
    print(f"  t={t:.3f} r={r:.3f} s={s:.3f}: {semigroup_residual(system, t, r, s):.2e}")

# a rank-one jump: forward evolution exists, backward does not
flat = ImpulsiveSystem(CoefficientOperator.constant(np.zeros((2, 2))),
                       JumpSequence([[[1.0, 0.0], [0.0, 0.0]]]), ImpulseSchedule([1.0], 2.0))
G0 = NonImpulsiveEvolution(flat.coefficients)
print("forward across a singular jump:\n", evolution_from_G(G0, flat.jumps, flat.schedule, 1.5, 0.5))
try:
    evolution_from_G(G0, flat.jumps, flat.schedule, 0.5, 1.5)
except SingularJumpError as exc:
    print("backward:", exc)
