"""Command-line entry point.

Exit codes: 0 success, 1 validation error, 2 numerical error, 3 hypothesis
violated (including a failed dominance check).  Errors go to stderr as one
JSON line ``{"error": <kind>, "message": ...}``.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys
import warnings
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from .errors import (
    HypothesisViolated,
    ImpulsiveError,
    InvalidArgumentError,
    NumericalOverflowError,
    RateUndefinedError,
    SingularFundamentalError,
    SingularJumpError,
)
from .evolution import (
    NonImpulsiveEvolution,
    evolution_branch,
    evolution_from_G,
    evolution_operator,
    fundamental_solution,
)
from .integrator import Trajectory, solve_ivp
from .probe import probe_k_estimate, scalar_probe
from .scenario import load_scenario, scenario_from_dict, example_document
from .stability import (
    StabilityCertificate,
    certify_system,
    check_dominance,
    estimate_decay_rate,
    evolution_dominance,
    fundamental_dominance,
)
from .system_model import op_norm, vec_norm

OUTPUT_DIR_ENV = "IMPULSIVE_OUTPUT_DIR"

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_HYPOTHESIS = 0, 1, 2, 3

fmt = "{:.17g}".format


def _emit(record, stream=None):
    print(json.dumps(record, sort_keys=True), file=stream or sys.stdout)


def _resolve(path):
    p = Path(path)
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not p.is_absolute():
        p = Path(base) / p
    p.parent.mkdir(parents=True, exist_ok=True)
    return p


@contextmanager
def _output(path):
    if path is None:
        yield sys.stdout
    else:
        with open(_resolve(path), "w", newline="") as fh:
            yield fh


def _scenario(args):
    return load_scenario(args.config, horizon=args.horizon, h_max=args.h_max, seed=args.seed)


# ---------------------------------------------------------------------------
# subcommands


def cmd_simulate(args):
    sc = _scenario(args)
    traj = solve_ivp(sc.system, sc.forcing, sc.x0, sc.h_max)
    with _output(args.output) as fh:
        traj.write_csv(fh)
    return EXIT_OK


def _write_norms(fh, ts, norms, every=1):
    fh.write("t,norm\n")
    for t, v in zip(ts[::every], norms[::every]):
        fh.write(f"{fmt(t)},{fmt(v)}\n")


def cmd_fundamental(args):
    sc = _scenario(args)
    ts, norms = fundamental_solution(sc.system, sc.h_max).norm_samples()
    with _output(args.output) as fh:
        _write_norms(fh, ts, norms, args.every)
    return EXIT_OK


def _matrix_block(fh, C, t, s, construction, branch):
    fh.write(f"# C(t,s) t={fmt(t)} s={fmt(s)} construction={construction} branch={branch}\n")
    for row in np.atleast_2d(C):
        fh.write(",".join(fmt(v) for v in row) + "\n")


def cmd_evolution(args):
    sc = _scenario(args)
    sys_ = sc.system
    branch = evolution_branch(sys_.schedule, args.t, args.s)
    C8 = evolution_operator(sys_, args.t, args.s, sc.h_max)
    G = NonImpulsiveEvolution(sys_.coefficients, sc.h_max)
    C20 = evolution_from_G(G, sys_.jumps, sys_.schedule, args.t, args.s)
    with _output(args.output) as fh:
        _matrix_block(fh, C8, args.t, args.s, "fundamental", branch)
        _matrix_block(fh, C20, args.t, args.s, "from_G", branch)
        fh.write(f"# disagreement={fmt(op_norm(C8 - C20))}\n")
    return EXIT_OK


def _read_norm_csv(path):
    """(times, norms relative to ||x(0)||) from a fundamental or trajectory CSV."""
    text = Path(path).read_text()
    header = text.splitlines()[0].split(",")
    if header == ["t", "norm"]:
        data = np.loadtxt(io.StringIO(text), delimiter=",", skiprows=1, ndmin=2)
        return data[:, 0], data[:, 1]
    traj = Trajectory.read_csv(io.StringIO(text))
    x0 = vec_norm(traj.x[0])
    norms = traj.norms()
    if x0 == 0:
        return traj.t, np.where(norms > 0, math.inf, 0.0)
    return traj.t, norms / x0


def _check_certificates(cert_path, csv_path):
    ts, norms = _read_norm_csv(csv_path)
    ok = True
    for line in Path(cert_path).read_text().splitlines():
        rec = json.loads(line)
        if "kind" not in rec or "N" not in rec:
            continue
        cert = StabilityCertificate.from_record(rec)
        rep = check_dominance(cert, ts, norms)
        ok &= rep.passed
        _emit({"record": "check", "provenance": cert.provenance, "kind": cert.kind,
               "result": "PASS" if rep.passed else "FAIL", "worst_ratio": rep.worst_ratio,
               "worst_time": rep.worst_time})
    print("PASS" if ok else "FAIL")
    return EXIT_OK if ok else EXIT_HYPOTHESIS


def cmd_certify(args):
    if args.check:
        if not args.trajectory:
            raise InvalidArgumentError("--check needs --trajectory")
        return _check_certificates(args.check, args.trajectory)
    if not args.config:
        raise InvalidArgumentError("certify needs a scenario config")
    sc = _scenario(args)
    k = args.k
    if k is None:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            k = probe_k_estimate(sc.system, args.trials, sc.seed, sc.h_max)
        for w in caught:
            _emit({"record": "warning", "message": str(w.message)}, sys.stderr)
    if not k > 1:
        raise HypothesisViolated(f"k = {k:.6g} does not exceed 1")
    cert = certify_system(sc.system, k, sc.h_max)
    _emit({"record": "bounds", **cert.bounds._asdict(), "k": k, "seed": sc.seed})
    reports = [fundamental_dominance(cert.fundamental, sc.system, sc.h_max),
               evolution_dominance(cert.evolution, sc.system, h_max=sc.h_max)]
    ok = True
    for c, rep in zip((cert.fundamental, cert.evolution), reports):
        _emit({"record": "certificate", **c.to_record()})
        _emit({"record": "dominance", "provenance": c.provenance,
               "result": "PASS" if rep.passed else "FAIL",
               "worst_ratio": rep.worst_ratio, "worst_time": rep.worst_time})
        ok &= rep.passed
    if args.output:
        with _output(args.output) as fh:
            for c in (cert.fundamental, cert.evolution):
                fh.write(c.to_json() + "\n")
    print("PASS" if ok else "FAIL")
    return EXIT_OK if ok else EXIT_HYPOTHESIS


def cmd_probe(args):
    sc = _scenario(args)
    extra = {"seed": sc.seed}
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        extra["k_hat"] = probe_k_estimate(sc.system, args.trials, sc.seed, sc.h_max)
    if caught:
        extra["warning"] = str(caught[0].message)
    if sc.system.dimension == 1:
        verdict = scalar_probe(sc.system, sc.h_max)
        _emit(verdict.to_record(**extra))
        if args.trajectory_out and verdict.trajectory is not None:
            with _output(args.trajectory_out) as fh:
                verdict.trajectory.write_csv(fh)
    else:
        _emit({"verdict": None, "horizon": sc.system.horizon, **extra})
    return EXIT_OK


def cmd_examples(args):
    """Reproduce both worked examples and compare with their stated behaviour."""
    ok = True
    sc1 = scenario_from_dict(example_document(1), h_max=args.h_max)
    tr1 = solve_ivp(sc1.system, sc1.forcing, sc1.x0, sc1.h_max)
    x1 = tr1.x[:, 0]
    exact = 2.0 ** -np.floor(tr1.t)
    ratio = float(np.max(x1 * 2.0 ** tr1.t / 2))
    err = float(np.max(np.abs(x1 - exact)))
    pass1 = ratio <= 1 + 1e-9 and err <= 1e-9
    _emit({"example": 1, "claim": "x(t) <= 2 exp(-t ln 2)", "max_ratio": ratio,
           "max_error_vs_2^-floor(t)": err, "result": "PASS" if pass1 else "FAIL"})
    ok &= pass1

    sc2 = scenario_from_dict(example_document(2), h_max=args.h_max)
    tr2 = solve_ivp(sc2.system, sc2.forcing, sc2.x0, sc2.h_max)
    at_int = [float(tr2.at(i)[0]) for i in range(1, 11)]
    dev = max(abs(v - 1) for v in at_int)
    nu_hat, _ = estimate_decay_rate(tr2.t, tr2.norms())
    pass2 = dev < 1e-6 and nu_hat < 0.01
    _emit({"example": 2, "claim": "x(i) = x(0)", "max_dev_at_integers": dev,
           "nu_hat": nu_hat, "result": "PASS" if pass2 else "FAIL"})
    ok &= pass2
    print("PASS" if ok else "FAIL")
    return EXIT_OK if ok else EXIT_HYPOTHESIS


# ---------------------------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(prog="impulsive",
                                description="Linear impulsive equations: simulation and stability")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--h-max", dest="h_max", type=float, default=None)
    p.add_argument("--horizon", type=float, default=None)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="trajectory CSV")
    s.add_argument("config")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("fundamental", help="||X(t)|| samples CSV")
    s.add_argument("config")
    s.add_argument("-o", "--output")
    s.add_argument("--every", type=int, default=1)
    s.set_defaults(func=cmd_fundamental)

    s = sub.add_parser("evolution", help="C(t,s) by both constructions")
    s.add_argument("config")
    s.add_argument("--t", type=float, required=True)
    s.add_argument("--s", type=float, required=True)
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_evolution)

    s = sub.add_parser("certify", help="explicit certificates and dominance checks")
    s.add_argument("config", nargs="?")
    s.add_argument("--k", type=float, default=None, help="skip the probe and use this k")
    s.add_argument("--trials", type=int, default=16)
    s.add_argument("-o", "--output", help="write certificates as JSON lines")
    s.add_argument("--check", metavar="CERTS", help="re-validate certificates from a file")
    s.add_argument("--trajectory", metavar="CSV", help="trajectory or fundamental CSV for --check")
    s.set_defaults(func=cmd_certify)

    s = sub.add_parser("probe", help="sign probe and k estimate")
    s.add_argument("config")
    s.add_argument("--trials", type=int, default=16)
    s.add_argument("--trajectory-out")
    s.set_defaults(func=cmd_probe)

    s = sub.add_parser("examples", help="reproduce the two worked examples")
    s.set_defaults(func=cmd_examples)
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_VALIDATION
    try:
        return args.func(args)
    except HypothesisViolated as exc:
        _emit({"error": "hypothesis-violated", "message": str(exc)}, sys.stderr)
        return EXIT_HYPOTHESIS
    except (NumericalOverflowError, SingularJumpError, SingularFundamentalError,
            RateUndefinedError) as exc:
        _emit({"error": "numerical", "message": str(exc)}, sys.stderr)
        return EXIT_NUMERICAL
    except (ImpulsiveError, OSError, ValueError) as exc:
        _emit({"error": "validation", "message": str(exc)}, sys.stderr)
        return EXIT_VALIDATION


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
