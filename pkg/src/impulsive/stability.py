"""Exponential-stability constants, response bounds and their empirical checks.

Every certificate asserts either ||X(t)|| <= N exp(-nu t) ("fundamental") or
||C(t, s)|| <= N exp(-nu (t - s)) ("evolution").  The constructors below turn
the uniform-boundedness constant ``k`` (estimated in :mod:`impulsive.probe`)
and the hypothesis quantities of :func:`hypothesis_bounds` into explicit
(N, nu) pairs; :func:`check_dominance` tests a certificate against samples.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import HypothesisViolated, InvalidArgumentError, RateUndefinedError
from .evolution import NonImpulsiveEvolution, fundamental_solution
from .integrator import DEFAULT_H_MAX, Trajectory
from .system_model import (
    Forcing,
    HypothesisBounds,
    ImpulsiveSystem,
    hypothesis_bounds,
    op_norm,
    vec_norm,
)

FUNDAMENTAL = "fundamental"
EVOLUTION = "evolution"
PROVENANCES = ("theorem21", "theorem22", "empirical-fit", "transfer-41", "transfer-42")

#: Relative slack allowed when checking a bound against floating-point samples.
DOMINANCE_RTOL = 1e-6

#: Products of jump norms beyond this (or below its inverse) count as unbounded (or vanishing).
PRODUCT_LIMIT = 1e12

#: Commutator residual under which B_i and G(t, s) are taken to commute.
COMMUTE_TOL = 1e-8

#: Minimum distance from the resonances nu*rho = lambda and nu = lambda.
RESONANCE_GAP = 1e-9
RESONANCE_SHIFT = 1e-6


@dataclass(frozen=True)
class StabilityCertificate:
    N: float
    nu: float
    kind: str = FUNDAMENTAL
    provenance: str = "theorem21"
    inputs: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.kind not in (FUNDAMENTAL, EVOLUTION):
            raise InvalidArgumentError(f"unknown certificate kind {self.kind!r}")
        if self.provenance not in PROVENANCES:
            raise InvalidArgumentError(f"unknown provenance {self.provenance!r}")
        if not (math.isfinite(self.N) and self.N >= 1):
            raise InvalidArgumentError(f"N must be a finite number >= 1, got {self.N}")
        if not (math.isfinite(self.nu) and self.nu > 0):
            raise InvalidArgumentError(f"nu must be positive, got {self.nu}")

    def bound(self, t, s=0.0):
        return self.N * np.exp(-self.nu * (np.asarray(t) - s))

    def to_record(self) -> dict:
        return {"kind": self.kind, "N": self.N, "nu": self.nu,
                "provenance": self.provenance, "inputs": self.inputs}

    def to_json(self) -> str:
        return json.dumps(self.to_record(), sort_keys=True)

    @classmethod
    def from_record(cls, rec: dict) -> "StabilityCertificate":
        return cls(float(rec["N"]), float(rec["nu"]), rec["kind"], rec["provenance"],
                   dict(rec.get("inputs", {})))


@dataclass(frozen=True)
class DecayingForcingSpec:
    """||alpha_n|| <= N1 exp(-lambda n) and ||f(t)|| <= N1 exp(-lambda t)."""

    N1: float
    lam: float

    def __post_init__(self):
        if self.N1 < 0 or not self.lam > 0:
            raise InvalidArgumentError("need N1 >= 0 and lambda > 0")

    def holds_for(self, forcing: Forcing, times) -> bool:
        """Check both envelopes on the offsets and on f at ``times``."""
        n = np.arange(1, len(forcing.alphas) + 1)
        a_ok = np.all(np.max(np.abs(forcing.alphas), axis=1, initial=0.0)
                      <= self.N1 * np.exp(-self.lam * n) * (1 + 1e-12))
        f_ok = all(vec_norm(forcing.f(t)) <= self.N1 * math.exp(-self.lam * t) * (1 + 1e-12)
                   for t in times)
        return bool(a_ok and f_ok)


@dataclass(frozen=True)
class TransferHypotheses:
    """Product and commutation data for moving estimates between the impulsive
    and the jump-free equation.

    ``epsilon`` is the infimum of |B_i ... B_j| (scalar systems, else None),
    ``Q`` the supremum of ||B_i|| ... ||B_j|| (``inf`` when unbounded).
    """

    epsilon: float | None
    Q: float
    commuting: bool
    commutator_residual: float


class DominanceReport(NamedTuple):
    passed: bool
    worst_ratio: float
    worst_time: float


class DecayTransfer(NamedTuple):
    N0: float
    nu0: float
    N2: float
    nu2: float
    N3: float
    nu3: float
    lam: float


class Certification(NamedTuple):
    bounds: HypothesisBounds
    fundamental: StabilityCertificate
    evolution: StabilityCertificate


# ---------------------------------------------------------------------------
# closed-form constants


def gronwall_bounds(M, b):
    """(e^M, b e^M): ||C(t, tau_p)|| inside an interval and across the next jump."""
    return math.exp(M), b * math.exp(M)


def theorem21_constants(k, sigma, X_tau1_norm, pre_tau1_sup) -> StabilityCertificate:
    """nu = ln(k/(k-1))/sigma and N = max(||X(tau_1)|| k^4/(k-1)^2, pre_tau1_sup).

    ``pre_tau1_sup`` is the caller's sup of exp(nu t)||X(t)|| over [0, tau_1).
    """
    if not k > 1:
        raise InvalidArgumentError(f"k must exceed 1, got {k}")
    if not sigma > 0:
        raise InvalidArgumentError("sigma must be positive")
    nu = math.log(k / (k - 1)) / sigma
    N1 = X_tau1_norm * k ** 4 / (k - 1) ** 2
    return StabilityCertificate(
        max(N1, pre_tau1_sup), nu, FUNDAMENTAL, "theorem21",
        {"k": k, "sigma": sigma, "X_tau1_norm": X_tau1_norm, "pre_tau1_sup": pre_tau1_sup})


def theorem22_constant(k, sigma, nu, b, M) -> StabilityCertificate:
    """N = N2^2 with N2 = max{b e^M k^4/(k-1)^2, b e^(nu sigma + M), e^(nu sigma + M)}."""
    if not k > 1:
        raise InvalidArgumentError(f"k must exceed 1, got {k}")
    if not (sigma > 0 and nu > 0 and b > 0 and M >= 0):
        raise InvalidArgumentError("need sigma, nu, b > 0 and M >= 0")
    grow = math.exp(nu * sigma + M)
    N2 = max(b * math.exp(M) * k ** 4 / (k - 1) ** 2, b * grow, grow)
    return StabilityCertificate(
        N2 ** 2, nu, EVOLUTION, "theorem22",
        {"k": k, "sigma": sigma, "nu": nu, "b": b, "M": M, "N2": N2})


def response_bound(cert: StabilityCertificate, rho, x0_norm, alpha_sup, f_sup) -> float:
    """N ||x0|| + N sup||alpha|| / (1 - exp(-nu rho)) + (N / nu) sup||f||."""
    if not rho > 0:
        raise InvalidArgumentError("rho must be positive")
    N, nu = cert.N, cert.nu
    return N * x0_norm + N * alpha_sup / (1 - math.exp(-nu * rho)) + N / nu * f_sup


def decay_transfer(cert: StabilityCertificate, rho, sigma,
                   spec: DecayingForcingSpec) -> DecayTransfer:
    """Exponential envelope N0 exp(-nu0 t) for a solution driven by decaying data.

    Jump-offset term: nu2 = lambda/sigma and
    N2 = N N1 exp(nu rho) / (exp(|nu rho - lambda|) - 1).
    Forcing term: int_0^t N e^(-nu (t-s)) N1 e^(-lambda s) ds
    <= N N1 / |nu - lambda| e^(-min(nu, lambda) t), giving (N3, nu3).
    Near either resonance lambda is lowered by ``RESONANCE_SHIFT``, which keeps
    the forcing envelope valid.
    """
    N, nu = cert.N, cert.nu
    N1, lam = spec.N1, spec.lam
    if abs(nu * rho - lam) <= RESONANCE_GAP or abs(nu - lam) <= RESONANCE_GAP:
        lam -= RESONANCE_SHIFT
    nu2 = lam / sigma
    gap = abs(nu * rho - lam)
    if N1 == 0 or gap > 700:
        N2 = 0.0
    else:
        N2 = N * N1 * math.exp(nu * rho) / math.expm1(gap)
    N3 = N * N1 / abs(nu - lam)
    nu3 = min(nu, lam)
    return DecayTransfer(max(N, N2, N3), min(nu, nu2, nu3), N2, nu2, N3, nu3, lam)


# ---------------------------------------------------------------------------
# empirical side


def estimate_decay_rate(times, norms, envelope=True):
    """Least-squares exponential rate over the second half of the samples.

    Returns (nu_hat, N_hat) with N_hat = max norm(t) exp(nu_hat t) over all
    samples, so N_hat exp(-nu_hat t) dominates the data.  With ``envelope``
    the fit runs on the running tail supremum sup_{s >= t} norm(s) rather than
    the raw norms; the envelope is what a certificate bounds, and it removes
    the sawtooth bias jump-driven paths put into a raw log-linear fit.
    """
    t = np.asarray(times, dtype=float)
    y = np.asarray(norms, dtype=float)
    if len(t) < 10:
        raise InvalidArgumentError("need at least 10 samples")
    window = t >= t[-1] / 2
    if np.any(y[window] <= 0):
        raise RateUndefinedError("zero norm in fit window; the solution is annihilated")
    fit_y = np.maximum.accumulate(y[::-1])[::-1] if envelope else y
    slope, _ = np.polyfit(t[window], np.log(fit_y[window]), 1)
    nu_hat = float(-slope)
    N_hat = float(np.max(y * np.exp(nu_hat * t)))
    return nu_hat, N_hat


def tail_sup(trajectory: Trajectory, t_min) -> float:
    """sup ||x(t)|| over samples with t >= t_min."""
    if not t_min < trajectory.horizon:
        raise InvalidArgumentError("t_min must lie before the end of the trajectory")
    return float(np.max(trajectory.norms()[trajectory.t >= t_min]))


def check_dominance(cert: StabilityCertificate, times, norms, s=0.0,
                    rtol=DOMINANCE_RTOL) -> DominanceReport:
    """Does norm(t) <= N exp(-nu (t - s)) (1 + rtol) hold at every sample?"""
    t = np.asarray(times, dtype=float)
    ratio = np.asarray(norms, dtype=float) * np.exp(cert.nu * (t - s)) / cert.N
    k = int(np.argmax(ratio))
    return DominanceReport(bool(ratio[k] <= 1 + rtol), float(ratio[k]), float(t[k]))


def fundamental_dominance(cert: StabilityCertificate, system: ImpulsiveSystem,
                          h_max=DEFAULT_H_MAX) -> DominanceReport:
    ts, norms = fundamental_solution(system, h_max).norm_samples()
    return check_dominance(cert, ts, norms)


def evolution_dominance(cert: StabilityCertificate, system: ImpulsiveSystem, starts=None,
                        h_max=DEFAULT_H_MAX) -> DominanceReport:
    """Check ||C(t, s)|| on the RK4 grid for several start times ``s``.

    Default starts: 0, every impulse instant, and every interval midpoint.
    """
    ts, Xs = fundamental_solution(system, h_max).samples()
    if starts is None:
        edges = np.concatenate(([0.0], system.schedule.times))
        mids = (edges[:-1] + edges[1:]) / 2
        starts = np.concatenate((edges, mids))
    worst = DominanceReport(True, 0.0, 0.0)
    for s in starts:
        k = int(np.searchsorted(ts, s, side="right")) - 1
        if ts[k] != s:
            continue
        Xs_inv = np.linalg.inv(Xs[k])
        C = Xs[k:] @ Xs_inv
        rep = check_dominance(cert, ts[k:], np.max(np.sum(np.abs(C), axis=2), axis=1), s=s)
        if rep.worst_ratio > worst.worst_ratio:
            worst = rep
    return worst


def certify_system(system: ImpulsiveSystem, k, h_max=DEFAULT_H_MAX) -> Certification:
    """Hypothesis bounds plus both explicit certificates for a given ``k``."""
    bounds = hypothesis_bounds(system)
    fs = fundamental_solution(system, h_max)
    nu = math.log(k / (k - 1)) / bounds.sigma if k > 1 else float("nan")
    tau1 = float(system.schedule.times[0])
    ts, norms = fs.norm_samples()
    early = ts < tau1
    pre_sup = float(np.max(norms[early] * np.exp(nu * ts[early]))) if k > 1 else 0.0
    cert21 = theorem21_constants(k, bounds.sigma, op_norm(fs.at(tau1)), pre_sup)
    cert22 = theorem22_constant(k, bounds.sigma, cert21.nu, bounds.b, bounds.M)
    return Certification(bounds, cert21, cert22)


# ---------------------------------------------------------------------------
# transfers between impulsive and jump-free estimates


def _extreme_products(logs, mode):
    """min (or max) over i <= j of sum(logs[i..j])."""
    best = math.inf if mode == "min" else -math.inf
    prefix = 0.0
    run = 0.0  # extreme prefix sum seen before index j
    for v in logs:
        prefix += v
        cand = prefix - run
        best = min(best, cand) if mode == "min" else max(best, cand)
        run = max(run, prefix) if mode == "min" else min(run, prefix)
    return best


def transfer_hypotheses(system: ImpulsiveSystem, h_max=DEFAULT_H_MAX,
                        limit=PRODUCT_LIMIT) -> TransferHypotheses:
    """Measure epsilon, Q and commutativity over the finite schedule.

    A product below 1/limit is reported as epsilon = 0 and one above ``limit``
    as Q = inf: on a truncated schedule these are the only visible signs of
    products tending to zero or infinity.
    """
    ops = system.jumps.operators
    if len(ops) == 0:
        return TransferHypotheses(1.0 if system.dimension == 1 else None, 1.0, True, 0.0)
    with np.errstate(divide="ignore"):
        norm_logs = np.maximum(np.log([op_norm(B) for B in ops]), -1e6)
    log_Q = _extreme_products(norm_logs, "max")
    Q = math.inf if log_Q > math.log(limit) else math.exp(log_Q)

    if system.dimension == 1:
        with np.errstate(divide="ignore"):
            logs = np.maximum(np.log(np.abs(ops[:, 0, 0])), -1e6)
        log_eps = _extreme_products(logs, "min")
        eps = 0.0 if log_eps < -math.log(limit) else math.exp(log_eps)
        return TransferHypotheses(eps, Q, True, 0.0)

    G = NonImpulsiveEvolution(system.coefficients, h_max)
    edges = [0.0, *system.schedule.times.tolist()]
    samples = []
    for a, b in zip(edges[:-1], edges[1:]):
        samples += [G(b, a), G((a + b) / 2, a)]
    resid = max(op_norm(B @ g - g @ B) for B in ops for g in samples)
    return TransferHypotheses(None, Q, resid < COMMUTE_TOL, float(resid))


def transfer_impulsive_to_continuous(hyp: TransferHypotheses,
                                     impulsive_cert: StabilityCertificate) -> StabilityCertificate:
    """Certificate for the jump-free U(t) from one for X(t) = U(t) prod B_i.

    N = N_impulsive / min(epsilon, 1); the cap at 1 covers [0, tau_1), where
    the product is empty and U = X.
    """
    if hyp.epsilon is None:
        raise InvalidArgumentError("the impulsive-to-continuous transfer is scalar only")
    if not hyp.epsilon > 0:
        raise HypothesisViolated("jump products are not bounded away from zero")
    eps = min(hyp.epsilon, 1.0)
    return StabilityCertificate(impulsive_cert.N / eps, impulsive_cert.nu, FUNDAMENTAL,
                                "transfer-41", {"epsilon": hyp.epsilon, "N_in": impulsive_cert.N})


def transfer_continuous_to_impulsive(hyp: TransferHypotheses,
                                     continuous_cert: StabilityCertificate) -> StabilityCertificate:
    """Certificate for X(t) from one for U(t) when jumps commute with G.

    N = N_continuous * max(Q, 1); as above, the empty product on [0, tau_1)
    forces the factor to be at least 1.
    """
    if not hyp.commuting:
        raise HypothesisViolated(
            f"jumps do not commute with G (residual {hyp.commutator_residual:.3g})")
    if not math.isfinite(hyp.Q):
        raise HypothesisViolated("products of jump norms are unbounded")
    return StabilityCertificate(continuous_cert.N * max(hyp.Q, 1.0), continuous_cert.nu,
                                FUNDAMENTAL, "transfer-42",
                                {"Q": hyp.Q, "N_in": continuous_cert.N})
