"""Problem data for linear impulsive equations.

The homogeneous system is

    x'(t) + A(t) x(t) = 0,        t != tau_i,
    x(tau_i + 0) = B_i x(tau_i - 0),

and a forcing adds a right-hand side f(t) to the flow and offsets alpha_i to
the jumps.  Everything here is immutable after construction.

All norms are the vector max-norm and the induced matrix norm (max absolute
row sum).
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np
from scipy.integrate import simpson

from .errors import InvalidArgumentError, SingularJumpError

#: Condition number above which a matrix is treated as numerically singular.
SINGULAR_CONDITION = 1e12

#: Simpson nodes per interval when integrating ||A(s)||.
SIMPSON_NODES = 129


def vec_norm(x) -> float:
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        return 0.0
    return float(np.max(np.abs(x)))


def op_norm(m) -> float:
    """Induced infinity-norm: the largest absolute row sum."""
    m = np.atleast_2d(np.asarray(m, dtype=float))
    return float(np.max(np.sum(np.abs(m), axis=1)))


def check_invertible(m, what="matrix"):
    """Return the 1-norm condition number of ``m``; raise if it is singular."""
    cond = float(np.linalg.cond(np.atleast_2d(m), 1))
    if not np.isfinite(cond) or cond > SINGULAR_CONDITION:
        raise SingularJumpError(f"{what} is numerically singular (cond={cond:.3g})",
                                condition=cond)
    return cond


# ---------------------------------------------------------------------------
# time-dependent coefficients


class TimeFunction:
    """A matrix- or vector-valued function of time.

    Four variants exist.  ``constant``, ``piecewise`` (right-continuous steps
    starting at each break) and ``table`` (linear interpolation between rows,
    held constant outside the table) round-trip through scenario files;
    ``callable`` wraps an arbitrary Python function and does not.

    Calling with ``left=True`` returns the left limit, which only differs from
    the ordinary value at a piecewise break.
    """

    KINDS = ("constant", "piecewise", "table", "callable")

    def __init__(self, kind, values=None, knots=None, fn=None, shape=None):
        if kind not in self.KINDS:
            raise InvalidArgumentError(f"unknown function kind {kind!r}")
        self.kind = kind
        self._fn = fn
        if kind == "callable":
            if fn is None or shape is None:
                raise InvalidArgumentError("callable variant needs fn and shape")
            self.shape = tuple(shape)
            self.values = None
            self.knots = None
            return
        values = np.array(values, dtype=float)
        if kind == "constant":
            self.values = values
            self.shape = values.shape
            self.knots = None
        else:
            knots = np.array(knots, dtype=float).ravel()
            if values.ndim < 1 or len(values) != len(knots) or len(knots) == 0:
                raise InvalidArgumentError("need one value per knot")
            if np.any(np.diff(knots) <= 0):
                raise InvalidArgumentError("knots must be strictly increasing")
            self.values = values
            self.knots = knots
            self.shape = values.shape[1:]
        if not np.all(np.isfinite(self.values)):
            raise InvalidArgumentError("function values must be finite")
        self.values.setflags(write=False)

    @classmethod
    def constant(cls, value):
        return cls("constant", values=value)

    @classmethod
    def piecewise(cls, breaks, values):
        return cls("piecewise", values=values, knots=breaks)

    @classmethod
    def table(cls, times, values):
        return cls("table", values=values, knots=times)

    @classmethod
    def from_callable(cls, fn: Callable[[float], np.ndarray], shape):
        return cls("callable", fn=fn, shape=shape)

    def __call__(self, t, left=False):
        if self.kind == "constant":
            return self.values
        if self.kind == "callable":
            return np.asarray(self._fn(t), dtype=float).reshape(self.shape)
        if self.kind == "piecewise":
            if left:
                i = bisect.bisect_left(self.knots, t) - 1
            else:
                i = bisect.bisect_right(self.knots, t) - 1
            return self.values[max(i, 0)]
        # table
        knots = self.knots
        if t <= knots[0]:
            return self.values[0]
        if t >= knots[-1]:
            return self.values[-1]
        i = bisect.bisect_right(knots, t) - 1
        w = (t - knots[i]) / (knots[i + 1] - knots[i])
        return (1.0 - w) * self.values[i] + w * self.values[i + 1]

    @property
    def breakpoints(self) -> tuple:
        """Times where the function may jump (piecewise variant only)."""
        if self.kind == "piecewise":
            return tuple(float(k) for k in self.knots[1:])
        return ()

    def constant_on(self, a, b):
        """The value if the function is constant on (a, b), else None."""
        if self.kind == "constant":
            return self.values
        if self.kind == "piecewise":
            i = bisect.bisect_right(self.knots, a) - 1
            j = bisect.bisect_left(self.knots, b) - 1
            if max(i, 0) == max(j, 0):
                return self.values[max(i, 0)]
        return None

    def sup_norm(self, a, b, norm=vec_norm, samples=1001) -> float:
        """Supremum of ``norm(f(t))`` over [a, b].

        Exact for the tabulated variants (a norm of a linear interpolant peaks
        at a node); the callable variant is sampled.
        """
        if self.kind == "constant":
            return norm(self.values)
        if self.kind == "callable":
            return max(norm(self(t)) for t in np.linspace(a, b, samples))
        cands = [self(a), self(b, left=True)]
        inside = (self.knots > a) & (self.knots < b)
        cands.extend(self.values[inside])
        if self.kind == "piecewise":
            cands.extend(self.values[:-1][(self.knots[1:] > a) & (self.knots[1:] <= b)])
        return max(norm(v) for v in cands)

    def to_config(self):
        if self.kind == "callable":
            raise InvalidArgumentError("callable functions are not serializable")
        if self.kind == "constant":
            return {"kind": "constant", "data": self.values.tolist()}
        key = "breaks" if self.kind == "piecewise" else "times"
        return {"kind": self.kind,
                "data": {key: self.knots.tolist(), "values": self.values.tolist()}}

    def __repr__(self):
        return f"TimeFunction(kind={self.kind!r}, shape={self.shape})"


class CoefficientOperator(TimeFunction):
    """The n x n coefficient A(t) of x' + A(t) x = f."""

    def __init__(self, kind, values=None, knots=None, fn=None, shape=None):
        if kind == "constant":
            values = np.atleast_2d(np.asarray(values, dtype=float))
        elif kind != "callable" and np.ndim(values) == 1:
            values = np.asarray(values, dtype=float).reshape(-1, 1, 1)
        super().__init__(kind, values=values, knots=knots, fn=fn, shape=shape)
        if len(self.shape) != 2 or self.shape[0] != self.shape[1]:
            raise InvalidArgumentError(f"A(t) must be square, got shape {self.shape}")

    @property
    def dimension(self) -> int:
        return self.shape[0]


# ---------------------------------------------------------------------------
# schedules and jumps


@dataclass(frozen=True, eq=False)
class ImpulseSchedule:
    """Strictly increasing impulse instants in (0, horizon]."""

    times: np.ndarray
    horizon: float

    def __post_init__(self):
        times = np.array(self.times, dtype=float).ravel()
        horizon = float(self.horizon)
        if not horizon > 0 or not math.isfinite(horizon):
            raise InvalidArgumentError("horizon must be positive and finite")
        if times.size:
            if times[0] <= 0:
                raise InvalidArgumentError("impulse times must be > 0")
            if np.any(np.diff(times) <= 0):
                raise InvalidArgumentError("impulse times must be strictly increasing")
            if times[-1] > horizon:
                raise InvalidArgumentError("impulse times must not exceed the horizon")
        times.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "horizon", horizon)

    def __len__(self):
        return len(self.times)

    @property
    def gaps(self) -> np.ndarray:
        """Gaps between consecutive instants, counting the one from 0 to tau_1."""
        return np.diff(np.concatenate(([0.0], self.times)))

    @property
    def rho(self) -> float:
        return float(self.gaps.min())

    @property
    def sigma(self) -> float:
        return float(self.gaps.max())

    @property
    def density(self) -> float:
        return len(self.times) / self.horizon

    def count_upto(self, t) -> int:
        """Number of instants tau_i <= t."""
        return bisect.bisect_right(self.times, t)

    def segments(self):
        """Jump-free intervals [0, tau_1], [tau_1, tau_2], ..., [tau_m, horizon]."""
        edges = [0.0, *self.times.tolist()]
        ends = [*self.times.tolist(), self.horizon]
        return list(zip(edges, ends))


@dataclass(frozen=True, eq=False)
class JumpSequence:
    """Jump matrices B_1, B_2, ..., one per impulse instant."""

    operators: np.ndarray

    def __post_init__(self):
        ops = np.array(self.operators, dtype=float)
        if ops.ndim == 1:
            ops = ops.reshape(-1, 1, 1)
        if ops.size == 0:
            ops = ops.reshape(0, *(ops.shape[1:] if ops.ndim == 3 else (0, 0)))
        if ops.ndim != 3 or ops.shape[1] != ops.shape[2]:
            raise InvalidArgumentError("jump operators must be a list of square matrices")
        if not np.all(np.isfinite(ops)):
            raise InvalidArgumentError("jump operators must be finite")
        ops.setflags(write=False)
        object.__setattr__(self, "operators", ops)

    @classmethod
    def constant(cls, matrix, count):
        m = np.atleast_2d(np.asarray(matrix, dtype=float))
        return cls(np.repeat(m[None], count, axis=0))

    def __len__(self):
        return len(self.operators)

    def __getitem__(self, i):
        return self.operators[i]

    @property
    def b(self) -> float:
        """sup_i ||B_i||."""
        if len(self) == 0:
            return 0.0
        return max(op_norm(m) for m in self.operators)

    def inverse(self, i):
        """Inverse of B_{i+1} (zero-based index ``i``); raises if singular."""
        try:
            check_invertible(self.operators[i], what=f"jump operator B_{i + 1}")
        except SingularJumpError as exc:
            exc.index = i
            raise
        return np.linalg.inv(self.operators[i])


@dataclass(frozen=True, eq=False)
class ImpulsiveSystem:
    """Coefficients, jumps and schedule of the homogeneous impulsive equation."""

    coefficients: CoefficientOperator
    jumps: JumpSequence
    schedule: ImpulseSchedule

    def __post_init__(self):
        if len(self.jumps) != len(self.schedule):
            raise InvalidArgumentError(
                f"{len(self.jumps)} jump operators for {len(self.schedule)} impulse times")
        n = self.coefficients.dimension
        if len(self.jumps) and self.jumps.operators.shape[1] != n:
            raise InvalidArgumentError("jump operators and A(t) disagree on dimension")
        allowed = {0.0, *self.schedule.times.tolist()}
        stray = [t for t in self.coefficients.breakpoints
                 if 0 < t < self.schedule.horizon and t not in allowed]
        if stray:
            raise InvalidArgumentError(
                f"A(t) breaks at {stray[0]:g}, which is not an impulse time")

    @property
    def dimension(self) -> int:
        return self.coefficients.dimension

    @property
    def horizon(self) -> float:
        return self.schedule.horizon


@dataclass(frozen=True, eq=False)
class Forcing:
    """Right-hand side f(t) plus jump offsets alpha_i.

    ``sup_f`` is taken over [0, horizon] when a horizon is given, otherwise
    over every tabulated value (NaN for the callable variant).
    """

    f: TimeFunction
    alphas: np.ndarray
    horizon: float | None = None
    sup_f: float = field(init=False)
    sup_alpha: float = field(init=False)

    def __post_init__(self):
        if len(self.f.shape) != 1:
            raise InvalidArgumentError("f(t) must be vector valued")
        n = self.f.shape[0]
        alphas = np.array(self.alphas, dtype=float)
        if alphas.size == 0:
            alphas = alphas.reshape(0, n)
        elif alphas.ndim == 1:
            alphas = alphas.reshape(-1, 1)
        if alphas.ndim != 2 or alphas.shape[1] != n:
            raise InvalidArgumentError("alphas must be a list of n-vectors")
        if not np.all(np.isfinite(alphas)):
            raise InvalidArgumentError("alphas must be finite")
        alphas.setflags(write=False)
        if self.horizon is not None:
            sup_f = self.f.sup_norm(0.0, float(self.horizon))
        elif self.f.kind == "callable":
            sup_f = float("nan")
        else:
            sup_f = vec_norm(self.f.values)
        object.__setattr__(self, "alphas", alphas)
        object.__setattr__(self, "sup_alpha", vec_norm(alphas))
        object.__setattr__(self, "sup_f", sup_f)

    @classmethod
    def zero(cls, n, count):
        return cls(TimeFunction.constant(np.zeros(n)), np.zeros((count, n)))

    @property
    def dimension(self) -> int:
        return self.f.shape[0]

    def check_against(self, system: ImpulsiveSystem):
        if len(self.alphas) != len(system.schedule):
            raise InvalidArgumentError(
                f"{len(self.alphas)} jump offsets for {len(system.schedule)} impulse times")
        if self.dimension != system.dimension:
            raise InvalidArgumentError("forcing and system disagree on dimension")


# ---------------------------------------------------------------------------
# operations


def build_uniform_schedule(eta, horizon) -> ImpulseSchedule:
    """Instants eta, 2 eta, ..., up to and including ``horizon``."""
    eta = float(eta)
    horizon = float(horizon)
    if not eta > 0:
        raise InvalidArgumentError("eta must be positive")
    if horizon < eta:
        raise InvalidArgumentError("horizon must be at least eta")
    count = int(math.floor(horizon / eta * (1 + 1e-12)))
    times = eta * np.arange(1, count + 1)
    times[-1] = min(times[-1], horizon)
    return ImpulseSchedule(times, horizon)


class HypothesisBounds(NamedTuple):
    rho: float
    sigma: float
    b: float
    M: float
    q: float


def integrated_norm(coefficients: TimeFunction, a, b, nodes=SIMPSON_NODES) -> float:
    """Simpson estimate of the integral of ||A(s)|| over [a, b]."""
    if b <= a:
        return 0.0
    ts = np.linspace(a, b, nodes)
    vals = [op_norm(coefficients(t)) for t in ts[:-1]]
    vals.append(op_norm(coefficients(b, left=True)))
    return float(simpson(vals, x=ts))


def hypothesis_bounds(system: ImpulsiveSystem) -> HypothesisBounds:
    """Gap bounds, jump-norm bound, per-interval integral of ||A|| and density.

    ``M`` covers every jump-free interval, including the leading one from 0
    and the trailing one up to the horizon.
    """
    sched = system.schedule
    if len(sched) == 0:
        raise InvalidArgumentError("hypothesis bounds need at least one impulse")
    A = system.coefficients
    M = max(integrated_norm(A, a, b) for a, b in sched.segments())
    return HypothesisBounds(sched.rho, sched.sigma, system.jumps.b, M, sched.density)


def as_vectors(data, count, n) -> np.ndarray:
    """Broadcast ``data`` (a scalar, one n-vector, or ``count`` vectors) to rows."""
    arr = np.asarray(data, dtype=float)
    if arr.ndim == 0:
        return np.full((count, n), float(arr))
    if arr.ndim == 1:
        if n == 1 and len(arr) != 1:
            arr = arr.reshape(-1, 1)
        elif len(arr) == n:
            return np.tile(arr, (count, 1))
    if arr.ndim != 2 or arr.shape[1] != n or len(arr) < count:
        raise InvalidArgumentError(f"expected {count} vectors of length {n}")
    return arr[:count]


def as_matrices(data, count) -> np.ndarray:
    """Broadcast one matrix (or scalar) to ``count`` copies; pass lists through."""
    arr = np.asarray(data, dtype=float)
    if arr.ndim <= 2:
        return np.repeat(np.atleast_2d(arr)[None], count, axis=0)
    return arr
