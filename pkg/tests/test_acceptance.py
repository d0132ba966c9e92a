"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run on its own with ``pytest tests/test_acceptance.py`` or
``python tests/test_acceptance.py``.
"""

import functools
import math
import time

import numpy as np
import pytest

from impulsive import (
    Forcing,
    HypothesisViolated,
    NonImpulsiveEvolution,
    TimeFunction,
    evolution_from_G,
    evolution_operator,
    hypothesis_bounds,
    representation_solution,
    semigroup_residual,
    solve_ivp,
)
from impulsive.evolution import BACKWARD, FORWARD, SAME_INTERVAL, evolution_branch, fundamental_solution
from impulsive.probe import Verdict, probe_k_estimate, scalar_probe
from impulsive.stability import (
    DecayingForcingSpec,
    StabilityCertificate,
    certify_system,
    check_dominance,
    decay_transfer,
    estimate_decay_rate,
    fundamental_dominance,
    gronwall_bounds,
    response_bound,
    tail_sup,
    theorem21_constants,
    transfer_continuous_to_impulsive,
    transfer_hypotheses,
    transfer_impulsive_to_continuous,
)

from _systems import example1, example2, random_forcing, random_system, scalar_system

SUITE_SEED = 7
SUITE_SIZE = 25


@functools.lru_cache(maxsize=None)
def suite():
    """25 random systems (n <= 3, <= 6 impulses, piecewise-constant A in [-1, 1])."""
    rng = np.random.default_rng(SUITE_SEED)
    return [random_system(rng) for _ in range(SUITE_SIZE)]


def op_norms(C):
    return np.max(np.sum(np.abs(C), axis=-1), axis=-1)


def stable_scalar_systems(count, seed, contraction, horizon):
    """Scalar systems with |B| exp(-a eta) <= contraction, so the jumps never undo the decay."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        a = rng.uniform(0.2, 1.0)
        eta = rng.uniform(0.5, 1.5)
        mag = rng.uniform(0.2, contraction) * math.exp(a * eta)
        b = mag * rng.choice([-1.0, 1.0])
        out.append(scalar_system(a, b, horizon, eta))
    return out


# ---------------------------------------------------------------------------


def test_criterion_01_example1(report):
    start = time.perf_counter()
    traj = solve_ivp(example1(), x0=[1.0])
    elapsed = time.perf_counter() - start
    x = traj.x[:, 0]
    err = np.max(np.abs(x - 2.0 ** -np.floor(traj.t)))
    ratio = np.max(x / (2 * np.exp(-traj.t * math.log(2))))
    ok = err <= 1e-9 and ratio <= 1 + 1e-9 and elapsed < 1.0
    report("1 Example 1 reproduction", ok,
           f"max |x - 2^-floor(t)| = {err:.2e}, max x / 2e^(-t ln2) = {ratio:.6f}, {elapsed:.3f}s")
    assert ok


def test_criterion_02_example2(report):
    start = time.perf_counter()
    traj = solve_ivp(example2(), x0=[1.0])
    nu_hat, _ = estimate_decay_rate(traj.t, traj.norms())
    elapsed = time.perf_counter() - start
    dev = max(abs(traj.at(float(i))[0] - 1) for i in range(1, 11))
    ok = dev < 1e-6 and nu_hat < 0.01 and elapsed < 1.0
    report("2 Example 2 reproduction", ok,
           f"max |x(i) - 1| = {dev:.2e}, nu_hat = {nu_hat:.2e}, {elapsed:.3f}s")
    assert ok


def test_criterion_03_representation_oracle(report):
    systems = suite()
    rng = np.random.default_rng(SUITE_SEED + 1)
    start = time.perf_counter()
    worst = 0.0
    for system in systems:
        forcing = random_forcing(rng, system)
        x0 = rng.uniform(-1, 1, system.dimension)
        ts = rng.uniform(0, system.horizon, 20)
        traj = solve_ivp(system, forcing, x0, t_eval=ts)
        for t in ts:
            diff = traj.at(t) - representation_solution(system, forcing, x0, t)
            worst = max(worst, float(np.max(np.abs(diff))))
    elapsed = time.perf_counter() - start
    ok = worst < 1e-5 and elapsed < 30
    report("3 representation-formula oracle", ok,
           f"worst ||solve_ivp - representation|| = {worst:.2e} over 25 x 20, {elapsed:.1f}s")
    assert ok


def test_criterion_04_semigroup(report):
    systems = suite()
    rng = np.random.default_rng(SUITE_SEED + 2)
    start = time.perf_counter()
    worst = 0.0
    for i in range(100):
        system = systems[i % len(systems)]
        t, tau, s = rng.uniform(0, system.horizon, 3)
        worst = max(worst, semigroup_residual(system, t, tau, s))
    elapsed = time.perf_counter() - start
    ok = worst < 1e-7 and elapsed < 30
    report("4 semigroup identity", ok, f"worst residual = {worst:.2e} over 100 draws, {elapsed:.1f}s")
    assert ok


def test_criterion_05_construction_equivalence(report):
    systems = suite()
    rng = np.random.default_rng(SUITE_SEED + 3)
    counts = {SAME_INTERVAL: 0, FORWARD: 0, BACKWARD: 0}
    worst = 0.0
    for system in systems:
        G = NonImpulsiveEvolution(system.coefficients)
        for _ in range(8):
            t, s = rng.uniform(0, system.horizon, 2)
            counts[evolution_branch(system.schedule, t, s)] += 1
            diff = evolution_operator(system, t, s) - evolution_from_G(G, system.jumps,
                                                                      system.schedule, t, s)
            worst = max(worst, float(op_norms(diff)))
    ok = worst < 1e-6 and min(counts.values()) >= 10
    report("5 construction equivalence", ok, f"worst disagreement = {worst:.2e}, branches {counts}")
    assert ok


def test_criterion_06_gronwall_dominance(report):
    systems = suite()
    worst_inner = worst_jump = 0.0
    for system in systems:
        hb = hypothesis_bounds(system)
        inner, jump = gronwall_bounds(hb.M, hb.b)
        fs = fundamental_solution(system)
        ts, Xs = fs.samples()
        edges = [0.0, *system.schedule.times.tolist(), system.horizon]
        for p in range(len(edges) - 1):
            lo, hi = edges[p], edges[p + 1]
            Xinv = np.linalg.inv(fs.at(lo))
            inside = (ts >= lo) & (ts < hi)
            worst_inner = max(worst_inner, float(op_norms(Xs[inside] @ Xinv).max()) / inner)
            if p + 1 < len(edges) - 1:
                worst_jump = max(worst_jump, float(op_norms(fs.at(hi) @ Xinv)) / jump)
    ok = worst_inner <= 1 + 1e-6 and worst_jump <= 1 + 1e-6
    report("6 Gronwall dominance", ok,
           f"max ||C||/e^M = {worst_inner:.4f}, max ||C across jump||/(b e^M) = {worst_jump:.4f}")
    assert ok


def test_criterion_07_certificate_pipeline_example1(report):
    k_hat = probe_k_estimate(example1(40.0), trials=4, seed=0)
    nu = theorem21_constants(k_hat, 1.0, 0.5, 0.0).nu
    system = example1(20.0)
    cert = certify_system(system, k_hat)
    dom = fundamental_dominance(cert.fundamental, system)
    # decay exponent of X(t) = 2^-floor(t), read off the simulated X(20)
    exact = -math.log(fundamental_solution(system).at(20.0)[0, 0]) / 20.0
    ok = (abs(k_hat - 2) <= 1e-6 and abs(nu - math.log(2)) <= 1e-9
          and abs(nu - exact) <= 1e-9 and dom.passed)
    report("7 k-hat to certificate on Example 1", ok,
           f"k_hat = {k_hat:.12f}, nu = {nu:.12f}, exact exponent {exact:.12f}, "
           f"N = {cert.fundamental.N:g}, "
           f"dominance worst ratio {dom.worst_ratio:.4f} on [0, 20]")
    assert ok


def test_criterion_08_response_bound(report):
    rng = np.random.default_rng(SUITE_SEED + 4)
    worst = 0.0
    for system in stable_scalar_systems(10, SUITE_SEED + 4, 0.8, 30.0):
        k_hat = probe_k_estimate(system, trials=2, seed=0)
        cert = certify_system(system, k_hat).evolution
        m = len(system.schedule)
        breaks = np.concatenate(([0.0], np.sort(rng.uniform(0, 30, 5))))
        f = TimeFunction.piecewise(breaks, rng.uniform(-1, 1, (6, 1)))
        forcing = Forcing(f, rng.uniform(-1, 1, (m, 1)), horizon=30.0)
        x0 = rng.uniform(-1, 1, 1)
        sup = float(solve_ivp(system, forcing, x0).norms().max())
        bound = response_bound(cert, system.schedule.rho, float(np.max(np.abs(x0))),
                               forcing.sup_alpha, forcing.sup_f)
        worst = max(worst, sup / bound)
    ok = worst <= 1.0
    report("8 response bound dominance", ok, f"max sup||x|| / bound = {worst:.3e} over 10 systems")
    assert ok


def test_criterion_09_decaying_forcing(report):
    rng = np.random.default_rng(SUITE_SEED + 5)
    horizon = 40.0
    worst_tail = worst_ratio = 0.0
    for system in stable_scalar_systems(6, SUITE_SEED + 5, 0.5, horizon):
        spec = DecayingForcingSpec(N1=rng.uniform(0.5, 2.0), lam=rng.uniform(0.3, 1.5))
        c = rng.uniform(-1, 1)
        f = TimeFunction.from_callable(lambda t, c=c, s=spec: np.array([c * s.N1 * np.exp(-s.lam * t)]),
                                       (1,))
        n = np.arange(1, len(system.schedule) + 1)
        alphas = (spec.N1 * np.exp(-spec.lam * n) * rng.uniform(-1, 1, len(n)))[:, None]
        forcing = Forcing(f, alphas, horizon=horizon)
        assert spec.holds_for(forcing, np.linspace(0, horizon, 401))
        x0 = rng.uniform(-1, 1, 1)
        traj = solve_ivp(system, forcing, x0)

        # (a) decay to zero
        tails = [tail_sup(traj, t) for t in (5.0, 10.0, 20.0, 30.0, 35.0)]
        assert all(a >= b for a, b in zip(tails, tails[1:]))
        worst_tail = max(worst_tail, tails[-1])

        # (b) exponential envelope
        k_hat = probe_k_estimate(system, trials=2, seed=0)
        cert = certify_system(system, k_hat).evolution
        env = decay_transfer(cert, system.schedule.rho, system.schedule.sigma, spec)
        rep = check_dominance(StabilityCertificate(env.N0, env.nu0, "evolution", "theorem22"),
                              traj.t, traj.norms())
        worst_ratio = max(worst_ratio, rep.worst_ratio)
    ok = worst_tail < 1e-3 and worst_ratio <= 1 + 1e-6
    report("9 decaying forcing", ok,
           f"max tail_sup(35) = {worst_tail:.2e}, max ||x|| / N0 e^(-nu0 t) = {worst_ratio:.3e}")
    assert ok


def test_criterion_10_probe_discrimination(report):
    v1 = scalar_probe(example1(40.0))
    v2 = scalar_probe(example2(40.0))
    ok = (v1.verdict is Verdict.BOUNDED and abs(v1.Q_hat - 2) <= 1e-6
          and v2.verdict is Verdict.GROWTH)
    report("10 sign-probe discrimination", ok,
           f"Example 1: {v1.verdict.value} Q_hat = {v1.Q_hat:.9f}; "
           f"Example 2: {v2.verdict.value} Q_hat = {v2.Q_hat:.3f}")
    assert ok


def _decay_with_unit_jumps(horizon):
    return scalar_system(1.0, 1.0, horizon)


def test_criterion_11_transfers(report):
    outcomes = {}
    checks = []

    # impulsive -> continuous, positive: x' + x = 0 with B = 1
    pos = _decay_with_unit_jumps(10.0)
    k_hat = probe_k_estimate(pos, trials=2, seed=0)
    impulsive_cert = certify_system(pos, k_hat).fundamental
    checks.append(fundamental_dominance(impulsive_cert, pos).passed)
    cont = transfer_impulsive_to_continuous(transfer_hypotheses(pos), impulsive_cert)
    G = NonImpulsiveEvolution(pos.coefficients)
    ts = np.linspace(0, 10, 201)
    checks.append(check_dominance(cont, ts, [op_norms(G(t, 0.0)) for t in ts]).passed)
    outcomes["to-continuous, B=1"] = "certificate"

    # impulsive -> continuous, negative: Example 1 products tend to zero
    try:
        transfer_impulsive_to_continuous(transfer_hypotheses(example1(40.0)),
                                         StabilityCertificate(8.0, math.log(2)))
        outcomes["to-continuous, halving"] = "certificate"
    except HypothesisViolated:
        outcomes["to-continuous, halving"] = "hypothesis-violated"

    # continuous -> impulsive, positive: B = 1, U(t) = e^-t
    imp = transfer_continuous_to_impulsive(transfer_hypotheses(pos), StabilityCertificate(1.0, 1.0))
    checks.append((imp.N, imp.nu) == (1.0, 1.0))
    checks.append(fundamental_dominance(imp, pos).passed)
    outcomes["to-impulsive, B=1"] = "certificate"

    # continuous -> impulsive, negative: Example 2 jump products are unbounded
    try:
        transfer_continuous_to_impulsive(transfer_hypotheses(example2(40.0)),
                                         StabilityCertificate(1.0, 1.0))
        outcomes["to-impulsive, balanced"] = "certificate"
    except HypothesisViolated:
        outcomes["to-impulsive, balanced"] = "hypothesis-violated"

    expected = {"to-continuous, B=1": "certificate", "to-continuous, halving": "hypothesis-violated",
                "to-impulsive, B=1": "certificate", "to-impulsive, balanced": "hypothesis-violated"}
    ok = outcomes == expected and all(checks)
    report("11 transfer verdicts", ok, f"{outcomes}, dominance checks {checks}")
    assert ok


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
