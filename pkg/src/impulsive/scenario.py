"""Scenario documents (JSON, or YAML when PyYAML is importable).

Schema::

    {
      "dimension": 1,
      "horizon": 10.0,
      "schedule": {"kind": "uniform", "eta": 1.0}
                | {"kind": "explicit", "times": [0.7, 1.5, ...]},
      "A": {"kind": "constant", "data": [[1.0]]}
         | {"kind": "piecewise", "data": {"breaks": [0, 1, ...], "values": [[[..]], ...]}}
         | {"kind": "table", "data": {"times": [...], "values": [[[..]], ...]}},
      "B": {"kind": "constant", "data": [[0.5]]} | {"kind": "list", "data": [[[..]], ...]},
      "f": {"kind": "zero"} | same variants as A with vector values,
      "alphas": {"kind": "zero" | "constant" | "list" | "signs", "data": ...},
      "x0": [1.0],
      "run": {"h_max": 0.001, "seed": 0}
    }

``f``, ``alphas``, ``x0`` and ``run`` are optional (zero forcing, zero
offsets, x0 = ones).  Scalars are accepted wherever a 1 x 1 matrix or a
length-1 vector is expected.  Everything is validated before any numerics.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, ImpulsiveError
from .integrator import DEFAULT_H_MAX
from .system_model import (
    CoefficientOperator,
    Forcing,
    ImpulseSchedule,
    ImpulsiveSystem,
    JumpSequence,
    TimeFunction,
    as_matrices,
    as_vectors,
    build_uniform_schedule,
)


@dataclass(frozen=True, eq=False)
class Scenario:
    system: ImpulsiveSystem
    forcing: Forcing
    x0: np.ndarray
    h_max: float = DEFAULT_H_MAX
    seed: int = 0
    document: dict = field(default_factory=dict, repr=False)


def _need(doc, key, where="scenario"):
    if key not in doc:
        raise ConfigError(f"{where}: missing field {key!r}")
    return doc[key]


def _schedule(doc, horizon):
    spec = _need(doc, "schedule")
    kind = spec.get("kind")
    if kind == "uniform":
        return build_uniform_schedule(_need(spec, "eta", "schedule"), horizon)
    if kind == "explicit":
        return ImpulseSchedule(_need(spec, "times", "schedule"), horizon)
    raise ConfigError(f"schedule: unknown kind {kind!r}")


def _function(spec, n, matrix, where):
    kind = spec.get("kind")
    data = spec.get("data")
    cls = CoefficientOperator if matrix else TimeFunction
    shape = (n, n) if matrix else (n,)

    def shaped(v, lead=()):
        arr = np.asarray(v, dtype=float)
        try:
            return arr.reshape(*lead, *shape)
        except ValueError:
            raise ConfigError(f"{where}: values do not fit shape {shape}") from None

    if kind == "zero":
        return cls("constant", values=np.zeros(shape))
    if kind == "constant":
        return cls("constant", values=shaped(data))
    if kind in ("piecewise", "table"):
        key = "breaks" if kind == "piecewise" else "times"
        knots = _need(data, key, where)
        values = shaped(_need(data, "values", where), (len(knots),))
        return cls(kind, values=values, knots=knots)
    raise ConfigError(f"{where}: unknown kind {kind!r}")


def _jumps(spec, n, count):
    kind = spec.get("kind")
    data = spec.get("data")
    if kind == "constant":
        return JumpSequence(as_matrices(np.reshape(data, (n, n)), count))
    if kind == "list":
        ops = np.asarray(data, dtype=float)
        if len(ops) != count:
            raise ConfigError(f"B: {len(ops)} matrices for {count} impulse times")
        return JumpSequence(ops.reshape(count, n, n))
    raise ConfigError(f"B: unknown kind {kind!r}")


def _alphas(spec, n, count, jumps):
    kind = spec.get("kind", "zero")
    data = spec.get("data")
    if kind == "zero":
        return np.zeros((count, n))
    if kind == "constant":
        return as_vectors(data, count, n)
    if kind == "list":
        arr = np.asarray(data, dtype=float).reshape(len(data), -1) if len(data) else np.zeros((0, n))
        if len(arr) != count or (count and arr.shape[1] != n):
            raise ConfigError(f"alphas: {len(arr)} offsets for {count} impulse times")
        return arr
    if kind == "signs":
        if n != 1:
            raise ConfigError("alphas: 'signs' needs a scalar system")
        b = jumps.operators[:, 0, 0]
        if np.any(b == 0):
            raise ConfigError("alphas: 'signs' undefined with a zero jump coefficient")
        return np.cumprod(np.sign(b))[:, None]
    raise ConfigError(f"alphas: unknown kind {kind!r}")


def scenario_from_dict(doc: dict, horizon=None, h_max=None, seed=None) -> Scenario:
    """Validate a scenario document; keyword arguments override its values."""
    try:
        n = int(_need(doc, "dimension"))
        if n < 1:
            raise ConfigError("dimension must be at least 1")
        horizon = float(horizon if horizon is not None else _need(doc, "horizon"))
        schedule = _schedule(doc, horizon)
        A = _function(_need(doc, "A"), n, True, "A")
        jumps = _jumps(_need(doc, "B"), n, len(schedule))
        system = ImpulsiveSystem(A, jumps, schedule)
        f = _function(doc.get("f", {"kind": "zero"}), n, False, "f")
        alphas = _alphas(doc.get("alphas", {"kind": "zero"}), n, len(schedule), jumps)
        forcing = Forcing(f, alphas, horizon=horizon)
        forcing.check_against(system)
        x0 = np.asarray(doc.get("x0", np.ones(n)), dtype=float)
        if x0.size != n:
            raise ConfigError(f"x0 has {x0.size} entries, expected {n}")
        run = doc.get("run", {})
        h = float(h_max if h_max is not None else run.get("h_max", DEFAULT_H_MAX))
        if not h > 0:
            raise ConfigError("h_max must be positive")
        s = int(seed if seed is not None else run.get("seed", 0))
    except ConfigError:
        raise
    except (ImpulsiveError, ValueError, TypeError, KeyError, AttributeError) as exc:
        raise ConfigError(str(exc)) from exc
    return Scenario(system, forcing, x0.reshape(n), h, s, doc)


def load_document(path) -> dict:
    text = Path(path).read_text()
    if str(path).endswith((".yaml", ".yml")):
        import yaml

        return yaml.safe_load(text)
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def load_scenario(path, **overrides) -> Scenario:
    return scenario_from_dict(load_document(path), **overrides)


def example_document(which: int) -> dict:
    """The two worked examples as scenario documents (horizon 10)."""
    if which == 1:
        a, b = 0.0, 0.5
    elif which == 2:
        a, b = 1.0, float(np.e)
    else:
        raise ConfigError(f"no example {which}")
    return {
        "dimension": 1,
        "horizon": 10.0,
        "schedule": {"kind": "uniform", "eta": 1.0},
        "A": {"kind": "constant", "data": [[a]]},
        "B": {"kind": "constant", "data": [[b]]},
        "x0": [1.0],
    }
