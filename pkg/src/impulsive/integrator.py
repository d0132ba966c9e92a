"""Fixed-step RK4 integration between impulses with exact jump maps."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import simpson

from .errors import InvalidArgumentError, NumericalOverflowError
from .system_model import (
    SIMPSON_NODES,
    Forcing,
    ImpulsiveSystem,
    TimeFunction,
    vec_norm,
)

DEFAULT_H_MAX = 1e-3


def _pieces(a, b, breaks):
    """Split [a, b] at every break strictly inside it."""
    cuts = sorted({float(t) for t in breaks if a < t < b})
    edges = [a, *cuts, b]
    return list(zip(edges[:-1], edges[1:]))


def _linear_rk4_maps(A, h):
    """State and forcing matrices of one RK4 step for x' = -A x + f, A and f frozen.

    RK4 applied to a constant-coefficient linear field is the degree-4 Taylor
    polynomial of the exponential, so one step is x -> P x + h S f.
    """
    L = -h * A
    n = A.shape[0]
    term = np.eye(n)
    P = np.eye(n)
    S = np.eye(n)
    for k in range(1, 5):
        term = term @ L / k
        P = P + term
        if k < 4:
            S = S + term / (k + 1)
    return P, h * S


def _rk4_piece(A, f, a, b, x, h_max):
    """Integrate one continuity piece; returns node times and states."""
    m = max(1, math.ceil((b - a) / h_max - 1e-9))
    ts = a + (b - a) * np.arange(m + 1) / m
    ts[-1] = b
    h = (b - a) / m
    xs = np.empty((m + 1, *x.shape))
    xs[0] = x
    Ac = A.constant_on(a, b)
    fc = None if f is None else f.constant_on(a, b)
    if Ac is not None and (f is None or fc is not None):
        P, S = _linear_rk4_maps(Ac, h)
        c = None if f is None else S @ fc
        if c is not None and x.ndim == 2:
            c = c[:, None]
        for k in range(m):
            nxt = P @ xs[k]
            xs[k + 1] = nxt if c is None else nxt + c
        return ts, xs

    def rhs(t, y, left=False):
        d = -A(t, left=left) @ y
        if f is not None:
            fv = f(t, left=left)
            d = d + (fv if y.ndim == 1 else fv[:, None])
        return d

    for k in range(m):
        t, y = ts[k], xs[k]
        k1 = rhs(t, y)
        k2 = rhs(t + h / 2, y + h / 2 * k1)
        k3 = rhs(t + h / 2, y + h / 2 * k2)
        k4 = rhs(ts[k + 1], y + h * k3, left=True)
        xs[k + 1] = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return ts, xs


def _rk4_path(A, f, t0, t1, x0, h_max, extra_breaks=()):
    """All RK4 nodes from t0 to t1, split at coefficient breaks and ``extra_breaks``."""
    if not h_max > 0:
        raise InvalidArgumentError("h_max must be positive")
    if t1 < t0:
        raise InvalidArgumentError("flow runs forward only (t0 <= t1)")
    x = np.array(x0, dtype=float)
    if t1 == t0:
        return np.array([t0]), x[None].copy()
    breaks = list(A.breakpoints) + list(extra_breaks)
    if f is not None:
        breaks += list(f.breakpoints)
    all_t = [np.array([t0])]
    all_x = [x[None]]
    with np.errstate(over="ignore", invalid="ignore"):
        for a, b in _pieces(t0, t1, breaks):
            ts, xs = _rk4_piece(A, f, a, b, all_x[-1][-1], h_max)
            bad = ~np.isfinite(xs.reshape(len(xs), -1)).all(axis=1)
            if bad.any():
                when = float(ts[np.argmax(bad)])
                raise NumericalOverflowError(
                    f"nonfinite state at t={when:.17g}", time=when)
            all_t.append(ts[1:])
            all_x.append(xs[1:])
    return np.concatenate(all_t), np.concatenate(all_x)


def flow(A: TimeFunction, f: TimeFunction | None, t0, t1, x0, h_max=DEFAULT_H_MAX):
    """x(t1) for x' + A(t) x = f(t), x(t0) = x0, with no impulse in (t0, t1).

    Classical RK4 with uniform step ``(t1 - t0) / ceil((t1 - t0) / h_max)``
    on each continuity piece of A and f.  ``x0`` may also be an n x k matrix,
    in which case ``f`` must be None.
    """
    _, xs = _rk4_path(A, f, float(t0), float(t1), x0, h_max)
    return xs[-1]


# ---------------------------------------------------------------------------
# trajectories


@dataclass(frozen=True)
class JumpRecord:
    index: int
    time: float
    pre: np.ndarray
    post: np.ndarray


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Right-continuous sampled path: ``x[k]`` is the post-jump value at ``t[k]``."""

    t: np.ndarray
    x: np.ndarray
    jumps: list = field(default_factory=list)
    h_max: float = DEFAULT_H_MAX

    @property
    def dimension(self) -> int:
        return self.x.shape[1]

    @property
    def horizon(self) -> float:
        return float(self.t[-1])

    def norms(self) -> np.ndarray:
        return np.max(np.abs(self.x), axis=1)

    def at(self, t) -> np.ndarray:
        """Sample at ``t`` (post-jump at impulses), linear between nodes."""
        k = int(np.searchsorted(self.t, t, side="right")) - 1
        if k < 0 or t > self.t[-1]:
            raise InvalidArgumentError(f"t={t} outside the trajectory")
        if self.t[k] == t or k == len(self.t) - 1:
            return self.x[k].copy()
        w = (t - self.t[k]) / (self.t[k + 1] - self.t[k])
        return (1 - w) * self.x[k] + w * self.x[k + 1]

    def write_csv(self, stream):
        """Write ``t,x1..xn,is_jump_pre,is_jump_post`` rows, 17 significant digits.

        A pre-jump row precedes the post-jump row sharing its time.
        """
        n = self.dimension
        w = csv.writer(stream, lineterminator="\n")
        w.writerow(["t", *(f"x{i + 1}" for i in range(n)), "is_jump_pre", "is_jump_post"])
        pre_at = {}
        for rec in self.jumps:
            pre_at[rec.time] = rec.pre
        fmt = "{:.17g}".format
        for tk, xk in zip(self.t, self.x):
            tk = float(tk)
            if tk in pre_at:
                w.writerow([fmt(tk), *map(fmt, pre_at.pop(tk)), 1, 0])
                w.writerow([fmt(tk), *map(fmt, xk), 0, 1])
            else:
                w.writerow([fmt(tk), *map(fmt, xk), 0, 0])

    def to_csv(self) -> str:
        buf = io.StringIO()
        self.write_csv(buf)
        return buf.getvalue()

    @classmethod
    def read_csv(cls, stream) -> "Trajectory":
        rows = list(csv.reader(stream))
        header, body = rows[0], rows[1:]
        if header[0] != "t" or header[-2:] != ["is_jump_pre", "is_jump_post"]:
            raise InvalidArgumentError("not a trajectory CSV")
        n = len(header) - 3
        ts, xs, jumps, pre = [], [], [], None
        for row in body:
            t = float(row[0])
            x = np.array([float(v) for v in row[1:1 + n]])
            if row[-2] == "1":
                pre = x
                continue
            if row[-1] == "1":
                jumps.append(JumpRecord(len(jumps), t, pre, x))
            ts.append(t)
            xs.append(x)
        return cls(np.array(ts), np.array(xs).reshape(len(xs), n), jumps)


def _march(system: ImpulsiveSystem, x0, forcing: Forcing | None, h_max, extra_times=()):
    """Node times, post-jump states and jump records over [0, horizon].

    Works for vector states and, with ``forcing=None``, for matrix states.
    """
    A = system.coefficients
    f = None if forcing is None else forcing.f
    sched = system.schedule
    x = np.array(x0, dtype=float)
    ts_all, xs_all, records = [np.array([0.0])], [x[None]], []
    for i, (a, b) in enumerate(sched.segments()):
        if b > a:
            try:
                ts, xs = _rk4_path(A, f, a, b, x, h_max, extra_breaks=extra_times)
            except NumericalOverflowError as exc:
                raise NumericalOverflowError(
                    f"{exc} while integrating [{a:.17g}, {b:.17g}]", time=exc.time) from exc
            ts_all.append(ts[1:])
            xs_all.append(xs[1:])
            x = xs[-1]
        if i < len(sched):
            pre = x.copy()
            post = system.jumps[i] @ pre
            if forcing is not None:
                post = post + forcing.alphas[i]
            if not np.all(np.isfinite(post)):
                raise NumericalOverflowError(
                    f"nonfinite state after jump {i + 1} at t={b:.17g}", time=b)
            records.append(JumpRecord(i, float(b), pre, post))
            xs_all[-1][-1] = post
            x = post
    return np.concatenate(ts_all), np.concatenate(xs_all), records


def solve_ivp(system: ImpulsiveSystem, forcing: Forcing | None = None, x0=None,
              h_max=DEFAULT_H_MAX, t_eval=()) -> Trajectory:
    """Solve x' + A x = f with x(tau_i + 0) = B_i x(tau_i - 0) + alpha_i.

    ``t_eval`` adds exact nodes so ``Trajectory.at`` hits them without
    interpolation.
    """
    n = system.dimension
    if forcing is None:
        forcing = Forcing.zero(n, len(system.schedule))
    forcing.check_against(system)
    x0 = np.zeros(n) if x0 is None else np.asarray(x0, dtype=float).reshape(n)
    ts, xs, records = _march(system, x0, forcing, h_max, extra_times=tuple(t_eval))
    return Trajectory(ts, xs, records, h_max)


def representation_solution(system: ImpulsiveSystem, forcing: Forcing | None, x0, t,
                            h_max=DEFAULT_H_MAX) -> np.ndarray:
    """Evaluate x(t) from fundamental and evolution operators instead of marching.

    x(t) = X(t) x0 + X(t) * int_0^t X(s)^-1 f(s) ds + sum_{tau_i <= t} C(t, tau_i) alpha_i

    The integral uses composite Simpson on every jump-free, continuity piece
    of [0, t]; X(s) at the nodes is carried forward node to node.
    """
    from .evolution import evolution_operator, fundamental_solution

    n = system.dimension
    t = float(t)
    if not 0 <= t <= system.horizon:
        raise InvalidArgumentError(f"t={t} outside [0, horizon]")
    if forcing is None:
        forcing = Forcing.zero(n, len(system.schedule))
    forcing.check_against(system)
    fs = fundamental_solution(system, h_max)
    Xt = fs.at(t)
    x = Xt @ np.asarray(x0, dtype=float).reshape(n)

    for i, tau in enumerate(system.schedule.times):
        if tau > t:
            break
        if np.any(forcing.alphas[i]):
            x = x + evolution_operator(system, t, tau, h_max) @ forcing.alphas[i]

    f = forcing.f
    if f.kind == "constant" and not np.any(f.values):
        return x
    A = system.coefficients
    cuts = [*system.schedule.times, *A.breakpoints, *f.breakpoints]
    integral = np.zeros(n)
    for a, b in _pieces(0.0, t, cuts):
        nodes = np.linspace(a, b, SIMPSON_NODES)
        X = fs.at(a)
        vals = np.empty((len(nodes), n))
        for k, s in enumerate(nodes):
            if k:
                X = flow(A, None, nodes[k - 1], s, X, h_max)
            last = k == len(nodes) - 1
            vals[k] = np.linalg.solve(X, f(s, left=last))
        integral += simpson(vals, x=nodes, axis=0)
    return x + Xt @ integral


def sup_norm(traj: Trajectory) -> float:
    return vec_norm(traj.x)
