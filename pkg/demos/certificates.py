"""From a measured boundedness constant k to explicit exponential bounds.

k is the largest response to unit-size jump offsets.  It fixes a rate
nu = ln(k/(k-1))/sigma and a constant N, and every bound is then checked
against the simulated fundamental matrix.
"""
import math

import numpy as np

from impulsive import (
    CoefficientOperator,
    DecayingForcingSpec,
    Forcing,
    ImpulsiveSystem,
    JumpSequence,
    TimeFunction,
    build_uniform_schedule,
    certify_system,
    decay_transfer,
    evolution_dominance,
    fundamental_dominance,
    probe_k_estimate,
    response_bound,
    solve_ivp,
)

sched = build_uniform_schedule(1.0, 20.0)
system = ImpulsiveSystem(CoefficientOperator.constant([[0.0]]),
                         JumpSequence.constant([[0.5]], len(sched)), sched)

k = probe_k_estimate(system, trials=8, seed=0)
cert = certify_system(system, k)
print(f"k = {k:.9f}")
print("hypothesis bounds:", cert.bounds)
for c, rep in [(cert.fundamental, fundamental_dominance(cert.fundamental, system)),
               (cert.evolution, evolution_dominance(cert.evolution, system))]:
    print(f"{c.kind:11s} N = {c.N:g}, nu = {c.nu:.6f}: worst ratio {rep.worst_ratio:.4f} "
          f"at t = {rep.worst_time:g} -> {'PASS' if rep.passed else 'FAIL'}")

# bounded inputs give a bounded response
rng = np.random.default_rng(0)
forcing = Forcing(TimeFunction.constant([0.3]), rng.uniform(-1, 1, (len(sched), 1)), horizon=20.0)
sup = solve_ivp(system, forcing, [1.0]).norms().max()
bound = response_bound(cert.evolution, sched.rho, 1.0, forcing.sup_alpha, forcing.sup_f)
print(f"sup |x| = {sup:.4f} <= response bound {bound:.1f}")

# exponentially decaying inputs give an exponentially decaying response
spec = DecayingForcingSpec(1.0, 0.5)
decaying = Forcing(TimeFunction.from_callable(lambda t: np.array([math.exp(-0.5 * t)]), (1,)),
                   np.exp(-0.5 * np.arange(1, len(sched) + 1))[:, None], horizon=20.0)
traj = solve_ivp(system, decaying, [1.0])
env = decay_transfer(cert.evolution, sched.rho, sched.sigma, spec)
ratio = np.max(traj.norms() * np.exp(env.nu0 * traj.t) / env.N0)
print(f"envelope N0 = {env.N0:.1f}, nu0 = {env.nu0:.4f}; max |x| / envelope = {ratio:.2e}")
