"""Constructive boundedness tests.

The scalar sign probe drives the homogeneous equation from x(0) = 0 with
jump offsets alpha_i = sign(B_1 ... B_i).  Every term C(t, tau_i) alpha_i of
the response then has the same sign, so the probe's sup equals the
uniform-boundedness constant k = sup_t sum_i |C(t, tau_i)|: one bounded run
certifies boundedness for every bounded input.

All verdicts are relative to the simulated horizon.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import HorizonSensitivityWarning, InvalidArgumentError, NumericalOverflowError
from .integrator import DEFAULT_H_MAX, Trajectory, solve_ivp
from .system_model import (
    CoefficientOperator,
    Forcing,
    ImpulseSchedule,
    ImpulsiveSystem,
    JumpSequence,
    TimeFunction,
    as_vectors,
    build_uniform_schedule,
)

#: A window sup this much above the previous one counts as growth.
GROWTH_THRESHOLD = 1 + 1e-3
#: Consecutive growing windows needed for a growth verdict.
GROWTH_WINDOWS = 3
#: Window length in units of the largest impulse gap.
WINDOW_GAPS = 10


class Verdict(str, enum.Enum):
    BOUNDED = "BoundedUpTo"
    GROWTH = "GrowthDetected"


@dataclass(frozen=True)
class ProbeVerdict:
    verdict: Verdict
    Q_hat: float
    growth_ratio: float
    horizon: float
    overflow_time: float | None = None
    trajectory: Trajectory | None = field(default=None, repr=False, compare=False)

    def to_record(self, **extra) -> dict:
        rec = {"verdict": self.verdict.value, "Q_hat": self.Q_hat,
               "growth_ratio": self.growth_ratio, "horizon": self.horizon}
        if self.overflow_time is not None:
            rec["overflow_time"] = self.overflow_time
        rec.update(extra)
        return rec


def window_growth(times, norms, width):
    """(max ratio of consecutive window sups, sustained-growth flag).

    Growth must still be under way at the horizon: the last GROWTH_WINDOWS
    ratios all exceed GROWTH_THRESHOLD.  A rising run inside the transient
    of a slowly converging response does not count.
    """
    t = np.asarray(times)
    y = np.asarray(norms)
    count = max(1, math.ceil(t[-1] / width - 1e-9))
    idx = np.minimum((t / width).astype(int), count - 1)
    sups = np.zeros(count)
    np.maximum.at(sups, idx, y)
    ratios = []
    for prev, cur in zip(sups[:-1], sups[1:]):
        if prev > 0:
            ratios.append(cur / prev)
        else:
            ratios.append(math.inf if cur > 0 else 1.0)
    tail = ratios[-GROWTH_WINDOWS:]
    growing = len(tail) == GROWTH_WINDOWS and all(r > GROWTH_THRESHOLD for r in tail)
    return (max(ratios) if ratios else 1.0), growing


def _window_width(system: ImpulsiveSystem):
    if len(system.schedule) == 0:
        return system.horizon
    return WINDOW_GAPS * system.schedule.sigma


def _require_scalar(system):
    if system.dimension != 1:
        raise InvalidArgumentError("the sign probe is defined for scalar systems only")


def sign_sequence(system: ImpulsiveSystem) -> np.ndarray:
    """alpha_i = sign(B_1 B_2 ... B_i), accumulated by sign only."""
    _require_scalar(system)
    b = system.jumps.operators[:, 0, 0]
    if np.any(b == 0):
        raise InvalidArgumentError("a zero jump coefficient has no sign")
    return np.cumprod(np.sign(b))


def scalar_probe(system: ImpulsiveSystem, h_max=DEFAULT_H_MAX) -> ProbeVerdict:
    """Run the sign probe from x(0) = 0 and classify the response.

    Growth means the window sup (windows of 10 sigma) rose by more than 0.1 %
    over each of the last three windows, or the state overflowed.
    """
    _require_scalar(system)
    signs = sign_sequence(system)
    forcing = Forcing(TimeFunction.constant([0.0]), signs[:, None])
    try:
        traj = solve_ivp(system, forcing, [0.0], h_max)
    except NumericalOverflowError as exc:
        return ProbeVerdict(Verdict.GROWTH, math.inf, math.inf, system.horizon, exc.time)
    norms = traj.norms()
    ratio, growing = window_growth(traj.t, norms, _window_width(system))
    verdict = Verdict.GROWTH if growing else Verdict.BOUNDED
    return ProbeVerdict(verdict, float(norms.max()), float(ratio), system.horizon,
                        trajectory=traj)


def probe_k_estimate(system: ImpulsiveSystem, trials=16, seed=0, h_max=DEFAULT_H_MAX) -> float:
    """Largest sup ||x(t)|| over probes with random sign-vector offsets.

    Scalar systems also run the deterministic sign probe, which dominates
    every other sign choice, so the result is exact there.  Warns with
    :class:`HorizonSensitivityWarning` when the sup is still growing at the
    horizon.
    """
    if trials < 1:
        raise InvalidArgumentError("need at least one trial")
    n, m = system.dimension, len(system.schedule)
    rng = np.random.default_rng(seed)
    offsets = [rng.choice([-1.0, 1.0], size=(m, n)) for _ in range(trials)]
    if n == 1:
        try:
            offsets.insert(0, sign_sequence(system)[:, None])
        except InvalidArgumentError:
            pass  # zero jumps reset the state; random signs already attain the sup
    best = None
    for alphas in offsets:
        traj = solve_ivp(system, Forcing(TimeFunction.constant(np.zeros(n)), alphas),
                         np.zeros(n), h_max)
        norms = traj.norms()
        if best is None or norms.max() > best[1].max():
            best = (traj.t, norms)
    running = np.maximum.accumulate(best[1])
    _, growing = window_growth(best[0], running, _window_width(system))
    if growing:
        warnings.warn(f"k estimate still growing at horizon {system.horizon:g}; "
                      "no finite k is evident", HorizonSensitivityWarning, stacklevel=2)
    return float(best[1].max())


@dataclass(frozen=True)
class JumpLayer:
    """Schedule and identity jumps that realize an impulse train as jumps."""

    schedule: ImpulseSchedule
    jumps: JumpSequence

    def system(self, coefficients: CoefficientOperator) -> ImpulsiveSystem:
        return ImpulsiveSystem(coefficients, self.jumps, self.schedule)


def delta_to_jumps(eta, alphas, horizon, dimension=None):
    """Rewrite x' + A x = sum_i alpha_i delta(t - eta i) as additive jumps.

    Returns a :class:`JumpLayer` (uniform schedule, B_i = I) and a
    :class:`Forcing` with f = 0 and the given offsets.  ``alphas`` may be one
    vector (or scalar) repeated for every impulse, or one per impulse.
    """
    if not eta > 0:
        raise InvalidArgumentError("eta must be positive")
    schedule = build_uniform_schedule(eta, horizon)
    arr = np.asarray(alphas, dtype=float)
    if dimension is None:
        dimension = arr.shape[1] if arr.ndim == 2 else 1
    m = len(schedule)
    offsets = as_vectors(arr, m, dimension)
    layer = JumpLayer(schedule, JumpSequence.constant(np.eye(dimension), m))
    return layer, Forcing(TimeFunction.constant(np.zeros(dimension)), offsets)
