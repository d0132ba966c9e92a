"""Fundamental matrix X(t), evolution operator C(t, s) = X(t) X(s)^-1, and
the same operator rebuilt from the jump-free propagator G(t, s)."""

from __future__ import annotations

import bisect
from functools import lru_cache

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .errors import InvalidArgumentError, SingularFundamentalError, SingularJumpError
from .integrator import DEFAULT_H_MAX, _march, flow
from .system_model import (
    SINGULAR_CONDITION,
    CoefficientOperator,
    ImpulseSchedule,
    ImpulsiveSystem,
    JumpSequence,
    op_norm,
)

SAME_INTERVAL = "same-interval"
FORWARD = "forward"
BACKWARD = "backward"


class FundamentalSolution:
    """X(t) with X(0) = I and X(tau_i) = B_i X(tau_i - 0).

    Only the pre/post values at each impulse are stored; ``at`` re-integrates
    from the nearest checkpoint at or before ``t``.
    """

    def __init__(self, system: ImpulsiveSystem, h_max=DEFAULT_H_MAX):
        self.system = system
        self.h_max = h_max
        n = system.dimension
        self._times = system.schedule.times.tolist()
        self._pre = []
        self._post = []
        X = np.eye(n)
        A = system.coefficients
        for i, (a, b) in enumerate(system.schedule.segments()):
            if i == len(self._times):
                break
            pre = flow(A, None, a, b, X, h_max)
            X = system.jumps[i] @ pre
            self._pre.append(pre)
            self._post.append(X)
        self._samples = None

    @property
    def checkpoints(self):
        return list(zip(self._times, self._pre, self._post))

    def _start(self, t):
        j = bisect.bisect_right(self._times, t)
        if j == 0:
            return 0.0, np.eye(self.system.dimension)
        return self._times[j - 1], self._post[j - 1]

    def at(self, t) -> np.ndarray:
        """X(t), post-jump at impulse instants."""
        t = float(t)
        if not 0 <= t <= self.system.horizon:
            raise InvalidArgumentError(f"t={t} outside [0, horizon]")
        t0, X0 = self._start(t)
        return flow(self.system.coefficients, None, t0, t, X0, self.h_max)

    def left(self, t) -> np.ndarray:
        """X(t - 0)."""
        j = bisect.bisect_left(self._times, t)
        if j < len(self._times) and self._times[j] == t:
            return self._pre[j].copy()
        return self.at(t)

    def samples(self):
        """(times, matrices) on the full RK4 grid; cached."""
        if self._samples is None:
            n = self.system.dimension
            ts, Xs, _ = _march(self.system, np.eye(n), None, self.h_max)
            self._samples = (ts, Xs)
        return self._samples

    def norm_samples(self):
        ts, Xs = self.samples()
        return ts, np.max(np.sum(np.abs(Xs), axis=2), axis=1)


@lru_cache(maxsize=64)
def fundamental_solution(system: ImpulsiveSystem, h_max=DEFAULT_H_MAX) -> FundamentalSolution:
    return FundamentalSolution(system, h_max)


def fundamental_matrix(system: ImpulsiveSystem, t, h_max=DEFAULT_H_MAX) -> np.ndarray:
    return fundamental_solution(system, h_max).at(t)


def _check_fundamental(X, s):
    cond = float(np.linalg.cond(X, 1))
    if not np.isfinite(cond) or cond > SINGULAR_CONDITION:
        raise SingularFundamentalError(
            f"X({s:.17g}) is numerically singular (cond={cond:.3g})", time=s, condition=cond)


def evolution_operator(system: ImpulsiveSystem, t, s, h_max=DEFAULT_H_MAX) -> np.ndarray:
    """C(t, s) = X(t) X(s)^-1 via an LU factorization of X(s)."""
    fs = fundamental_solution(system, h_max)
    Xs = fs.at(s)
    if t == s:
        return np.eye(system.dimension)
    Xt = fs.at(t)
    _check_fundamental(Xs, s)
    # X(s)^T C^T = X(t)^T
    return lu_solve(lu_factor(Xs), Xt.T, trans=1).T


class NonImpulsiveEvolution:
    """G(t, s) for x' + A(t) x = 0 without jumps, integrated on demand."""

    def __init__(self, coefficients: CoefficientOperator, h_max=DEFAULT_H_MAX):
        self.coefficients = coefficients
        self.h_max = h_max

    @property
    def dimension(self) -> int:
        return self.coefficients.dimension

    def __call__(self, t, s) -> np.ndarray:
        n = self.dimension
        if t == s:
            return np.eye(n)
        if t > s:
            return flow(self.coefficients, None, s, t, np.eye(n), self.h_max)
        return np.linalg.inv(flow(self.coefficients, None, t, s, np.eye(n), self.h_max))


def evolution_branch(schedule: ImpulseSchedule, t, s) -> str:
    """Which case of the G-based construction applies to (t, s)."""
    if schedule.count_upto(t) == schedule.count_upto(s):
        return SAME_INTERVAL
    return FORWARD if t > s else BACKWARD


def evolution_from_G(G: NonImpulsiveEvolution, jumps: JumpSequence, schedule: ImpulseSchedule,
                     t, s) -> np.ndarray:
    """C(t, s) assembled from jump-free propagators and jump matrices.

    Forward (s < t, impulses tau_k..tau_i in (s, t]):
        G(t, tau_i) B_i G(tau_i, tau_{i-1}) ... B_k G(tau_k, s)
    Backward (t < s, impulses tau_k..tau_i in (t, s]):
        G(t, tau_k) B_k^-1 G(tau_k, tau_{k+1}) ... B_i^-1 G(tau_i, s)
    """
    branch = evolution_branch(schedule, t, s)
    if branch == SAME_INTERVAL:
        return G(t, s)
    times = schedule.times
    lo, hi = sorted((schedule.count_upto(s), schedule.count_upto(t)))
    C = np.eye(G.dimension)
    cur = s
    if branch == FORWARD:
        for j in range(lo, hi):
            C = jumps[j] @ (G(times[j], cur) @ C)
            cur = times[j]
    else:
        for j in reversed(range(lo, hi)):
            try:
                Binv = jumps.inverse(j)
            except SingularJumpError as exc:
                raise SingularJumpError(
                    f"backward evolution needs B_{j + 1}^-1: {exc}",
                    index=j, condition=exc.condition) from exc
            C = Binv @ (G(times[j], cur) @ C)
            cur = times[j]
    return G(t, cur) @ C


def scalar_product_formula(U, jumps: JumpSequence, schedule: ImpulseSchedule, t) -> float:
    """U(t) times the product of every B_i with tau_i <= t (scalar systems)."""
    ops = jumps.operators
    if len(ops) and ops.shape[1:] != (1, 1):
        raise InvalidArgumentError("the product formula needs a scalar system")
    k = schedule.count_upto(t)
    return float(U(t)) * float(np.prod(ops[:k, 0, 0]))


def semigroup_residual(system: ImpulsiveSystem, t, tau, s, h_max=DEFAULT_H_MAX) -> float:
    """||C(t, s) - C(t, tau) C(tau, s)||."""
    lhs = evolution_operator(system, t, s, h_max)
    rhs = evolution_operator(system, t, tau, h_max) @ evolution_operator(system, tau, s, h_max)
    return op_norm(lhs - rhs)
