import math
import warnings

import numpy as np
import pytest

from impulsive import (
    CoefficientOperator,
    Forcing,
    HorizonSensitivityWarning,
    ImpulseSchedule,
    ImpulsiveSystem,
    InvalidArgumentError,
    JumpSequence,
    TimeFunction,
    evolution_operator,
    solve_ivp,
)
from impulsive.evolution import fundamental_solution
from impulsive.probe import (
    Verdict,
    delta_to_jumps,
    probe_k_estimate,
    scalar_probe,
    sign_sequence,
    window_growth,
)
from impulsive.stability import estimate_decay_rate

from _systems import example1, example2, scalar_system


def test_sign_sequence_examples():
    np.testing.assert_array_equal(sign_sequence(scalar_system(0, 0.5, 5.0)), [1] * 5)
    np.testing.assert_array_equal(sign_sequence(scalar_system(0, -0.5, 4.0)), [-1, 1, -1, 1])
    sched = ImpulseSchedule([1.0, 2.0, 3.0], 4.0)
    system = ImpulsiveSystem(CoefficientOperator.constant([[0.0]]),
                             JumpSequence([[[2.0]], [[-1.0]], [[-3.0]]]), sched)
    np.testing.assert_array_equal(sign_sequence(system), [1, -1, 1])


def test_sign_sequence_rejects():
    with pytest.raises(InvalidArgumentError):
        sign_sequence(scalar_system(0, 0.0, 3.0))
    sched = ImpulseSchedule([1.0], 2.0)
    with pytest.raises(InvalidArgumentError):
        sign_sequence(ImpulsiveSystem(CoefficientOperator.constant(np.eye(2)),
                                      JumpSequence.constant(np.eye(2), 1), sched))


def test_sign_sequence_survives_underflow():
    signs = sign_sequence(scalar_system(0, -1e-30, 40.0))
    assert len(signs) == 40 and set(signs) == {-1.0, 1.0}


def test_sign_matches_post_jump_fundamental_sign():
    # sign(prod B) and sign(B_i X(tau_i - 0)) agree since the flow factor is positive
    system = scalar_system(0.7, -1.4, 8.0, eta=0.6)
    fs = fundamental_solution(system)
    for i, tau in enumerate(system.schedule.times):
        assert sign_sequence(system)[i] == np.sign(system.jumps[i][0, 0] * fs.left(tau)[0, 0])


def test_probe_example1_bounded():
    v = scalar_probe(example1(40.0))
    assert v.verdict is Verdict.BOUNDED
    assert v.Q_hat == pytest.approx(2.0, abs=1e-6)


def test_probe_example2_growth():
    v = scalar_probe(example2(40.0))
    assert v.verdict is Verdict.GROWTH
    # value at tau_k^+ equals k
    for k in (5, 17, 40):
        assert v.trajectory.at(float(k))[0] == pytest.approx(k, rel=1e-9)


def test_probe_no_impulses_is_zero():
    sys0 = ImpulsiveSystem(CoefficientOperator.constant([[0.0]]), JumpSequence(np.zeros((0, 1, 1))),
                           ImpulseSchedule([], 5.0))
    v = scalar_probe(sys0)
    assert v.verdict is Verdict.BOUNDED and v.Q_hat == 0.0


def test_probe_overflow_is_growth():
    v = scalar_probe(scalar_system(-60.0, 1.0, 40.0), h_max=1e-2)
    assert v.verdict is Verdict.GROWTH and v.overflow_time is not None
    assert v.to_record()["overflow_time"] == v.overflow_time


def test_window_growth():
    t = np.linspace(0, 100, 1001)
    assert window_growth(t, np.exp(0.01 * t), 10)[1]
    assert not window_growth(t, 2 + np.sin(t), 10)[1]
    ratio, growing = window_growth(t, np.minimum(t, 25.0), 10)
    assert not growing and ratio > 1
    # a long rising transient that has settled by the horizon is not growth
    ratio, growing = window_growth(t, 1 - np.exp(-t / 12), 10)
    assert ratio > 1.1 and not growing


def test_slow_convergence_is_bounded():
    # |B| e^(-a eta) ~ 0.86: the probe climbs for several windows before settling
    v = scalar_probe(scalar_system(0.8, -1.5, 40.0, eta=0.7))
    assert v.verdict is Verdict.BOUNDED
    assert v.Q_hat == pytest.approx(1 / (1 - 1.5 * math.exp(-0.56)), rel=1e-3)


def test_k_estimate_scalar_equals_probe():
    system = scalar_system(0.3, -0.9, 30.0, eta=0.8)
    q = scalar_probe(system).Q_hat
    for trials, seed in ((1, 0), (4, 7), (16, 123)):
        assert probe_k_estimate(system, trials, seed) == q


def test_k_estimate_example1():
    assert probe_k_estimate(example1(40.0), trials=3) == pytest.approx(2.0, abs=1e-6)


def test_k_estimate_warns_on_growth():
    # growth needs three rising 10-sigma windows, so horizons of at least 40
    with pytest.warns(HorizonSensitivityWarning):
        k40 = probe_k_estimate(example2(40.0), trials=2)
    with pytest.warns(HorizonSensitivityWarning):
        k80 = probe_k_estimate(example2(80.0), trials=2)
    assert k80 == pytest.approx(2 * k40, rel=1e-9)


def test_k_estimate_zero_jumps_finite():
    system = scalar_system(0.0, 0.0, 10.0)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert probe_k_estimate(system, trials=4) == 1.0


def test_k_estimate_matrix_deterministic(rng):
    from _systems import random_system

    system = random_system(rng, n=2)
    assert probe_k_estimate(system, 5, seed=3) == probe_k_estimate(system, 5, seed=3)
    with pytest.raises(InvalidArgumentError):
        probe_k_estimate(system, 0)


def test_probe_running_sup_monotone():
    system = scalar_system(0.2, -0.8, 20.0, eta=0.5)
    traj = scalar_probe(system).trajectory
    post = np.array([traj.at(tau)[0] for tau in system.schedule.times])
    running = np.maximum.accumulate(np.abs(post))
    assert np.all(np.diff(running) >= 0)


def test_probe_certifies_sum_of_evolutions():
    system = scalar_system(0.5, -1.2, 6.0, eta=0.75)
    q = scalar_probe(system).Q_hat
    for t in np.linspace(0.1, 6.0, 25):
        total = sum(abs(evolution_operator(system, t, tau)[0, 0])
                    for tau in system.schedule.times if tau <= t)
        assert total <= q * (1 + 1e-9)


def test_bounded_probe_implies_decay():
    for a, b in ((0.0, 0.5), (0.5, -1.2), (1.0, 2.0)):
        system = scalar_system(a, b, 30.0)
        assert scalar_probe(system).verdict is Verdict.BOUNDED
        ts, norms = fundamental_solution(system).norm_samples()
        assert estimate_decay_rate(ts, norms)[0] > 0


def test_delta_staircase():
    layer, forcing = delta_to_jumps(1.0, 0.3, 5.5)
    traj = solve_ivp(layer.system(CoefficientOperator.constant([[0.0]])), forcing, [0.0])
    for t in (0.5, 1.0, 2.7, 5.2):
        assert traj.at(t)[0] == pytest.approx(0.3 * math.floor(t), abs=1e-12)


def test_delta_zero_alphas_is_flow():
    layer, forcing = delta_to_jumps(0.5, [0.0, 0.0], 3.0, dimension=2)
    A = CoefficientOperator.constant([[1.0, 0.2], [0.0, 0.5]])
    traj = solve_ivp(layer.system(A), forcing, [1.0, 1.0])
    plain = ImpulsiveSystem(A, JumpSequence(np.zeros((0, 2, 2))), ImpulseSchedule([], 3.0))
    np.testing.assert_allclose(traj.x[-1], solve_ivp(plain, x0=[1.0, 1.0]).x[-1], rtol=1e-12)


def test_delta_geometric_limit():
    layer, forcing = delta_to_jumps(1.0, 1.0, 20.0)
    traj = solve_ivp(layer.system(CoefficientOperator.constant([[1.0]])), forcing, [0.0])
    limit = 1 / (1 - math.exp(-1))
    assert traj.at(20.0)[0] == pytest.approx(limit, abs=1e-7)
    assert limit == pytest.approx(1.58198, abs=1e-5)


def test_delta_matches_direct_configuration_bit_for_bit():
    alphas = np.array([[0.5], [-1.0], [2.0], [0.25]])
    layer, forcing = delta_to_jumps(0.75, alphas, 3.2)
    A = CoefficientOperator.constant([[0.8]])
    via = solve_ivp(layer.system(A), forcing, [1.0])
    sched = ImpulseSchedule([0.75, 1.5, 2.25, 3.0], 3.2)
    direct = solve_ivp(ImpulsiveSystem(A, JumpSequence.constant([[1.0]], 4), sched),
                       Forcing(TimeFunction.constant([0.0]), alphas), [1.0])
    np.testing.assert_array_equal(via.t, direct.t)
    np.testing.assert_array_equal(via.x, direct.x)


def test_delta_rejects_bad_eta():
    with pytest.raises(InvalidArgumentError):
        delta_to_jumps(0.0, 1.0, 5.0)
