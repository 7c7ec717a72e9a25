"""Command-line front end.

Exit codes: 0 numerically certified / success, 1 synthesis failure,
2 certification failure, 3 input error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .cases import CASES, get_case
from .certify import certify
from .cpoly import CPolynomial
from .dynamics import NORM_TOL, as_state, bloch_vector, evolve_many, measure_bloch_period
from .formats import barrier_from_dict, problem_from_dict, read_json, write_json
from .regions import contains_many, sample
from .synth import BarrierCandidate, SynthesisError, SynthesisProblem, TemplateSpec, synthesize

EXIT_OK, EXIT_SYNTH, EXIT_CERT, EXIT_INPUT = 0, 1, 2, 3

log = logging.getLogger("qbarrier")


class InputError(Exception):
    pass


def _load_problem(args) -> tuple[SynthesisProblem, BarrierCandidate | None]:
    """Problem (and the case's reference barrier, if any) with CLI overrides applied."""
    try:
        if args.case:
            case = get_case(args.case)
            problem, reference = case.problem(), case.expected_barrier
        elif args.problem:
            problem, reference = problem_from_dict(read_json(args.problem)), None
        else:
            raise InputError("one of --case or --problem is required")
        degree = getattr(args, "degree", None) or problem.template.degree
        balanced = problem.template.balanced_only and not getattr(args, "full_template", False)
        samples = getattr(args, "samples", None) or problem.samples
        seed = problem.seed if args.seed is None else args.seed
        problem = SynthesisProblem(
            problem.hamiltonian, problem.initial, problem.unsafe,
            TemplateSpec(problem.dim, degree, balanced), samples, seed,
        )
    except InputError:
        raise
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise InputError(str(exc)) from exc
    return problem, reference


def _load_barrier(path: str, dim: int):
    try:
        barrier = barrier_from_dict(read_json(path))
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise InputError(f"cannot read barrier {path}: {exc}") from exc
    n = barrier.dim if isinstance(barrier, BarrierCandidate) else barrier.n
    if n != dim:
        raise InputError(f"dimension mismatch: barrier has dim {n}, problem has dim {dim}")
    return barrier


def cmd_list(args) -> int:
    for name, case in CASES.items():
        print(f"{name}\td={case.dim}\tZ0: {case.initial}\tZu: {case.unsafe}\t{case.notes}")
    return EXIT_OK


def cmd_synth(args) -> int:
    problem, _ = _load_problem(args)
    out = Path(args.out)
    report_path = out.with_name(out.stem + ".report.json")
    try:
        barrier = synthesize(problem)
    except SynthesisError as err:
        print(f"synthesis failed at stage {err.stage}: {err.message}", file=sys.stderr)
        diag = {
            k: (np.asarray(v).tolist() if not isinstance(v, np.ndarray) else [[z.real, z.imag] for z in v])
            for k, v in err.diagnostics.items()
        }
        write_json(report_path, {"verdict": "synthesis-failed", "stage": err.stage, "message": err.message, "diagnostics": diag})
        return EXIT_SYNTH
    write_json(out, barrier.to_dict())
    report = certify(barrier, problem, t_max=args.t_max)
    write_json(report_path, report.to_dict())
    print(f"barrier written to {out}; verdict: {report.verdict}", file=sys.stderr)
    return EXIT_OK if report.certified else EXIT_CERT


def cmd_certify(args) -> int:
    problem, _ = _load_problem(args)
    if not args.barrier:
        raise InputError("--barrier is required")
    barrier = _load_barrier(args.barrier, problem.dim)
    report = certify(barrier, problem, t_max=args.t_max)
    print(json.dumps(report.to_dict(), indent=2))
    return EXIT_OK if report.certified else EXIT_CERT


def _parse_state(text: str, dim: int) -> np.ndarray:
    try:
        pairs = np.array(json.loads(text), dtype=float)
        z = pairs[:, 0] + 1j * pairs[:, 1]
        if z.shape[0] != dim:
            raise ValueError(f"state has {z.shape[0]} amplitudes, expected {dim}")
        return as_state(z)
    except (ValueError, IndexError, TypeError, json.JSONDecodeError) as exc:
        raise InputError(f"bad --state: {exc}") from exc


def cmd_simulate(args) -> int:
    problem, reference = _load_problem(args)
    if args.steps < 2:
        raise InputError("--steps must be at least 2")
    if not args.t_max > 0:
        raise InputError("--t-max must be positive")
    barrier = _load_barrier(args.barrier, problem.dim) if args.barrier else reference
    poly: CPolynomial | None = None
    if barrier is not None:
        poly = barrier.polynomial() if isinstance(barrier, BarrierCandidate) else barrier

    d = problem.dim
    if args.state:
        starts = _parse_state(args.state, d)[None, :]
    else:
        starts = sample(problem.initial, args.count, problem.seed)
    times = np.linspace(0.0, args.t_max, args.steps)

    header = ["t"] + [f"{part}_{j}" for j in range(d) for part in ("re", "im")] + ["B", "in_unsafe"]
    fmt = "{:.17g}".format
    bloch_rows = []
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for z0 in starts:
            states = evolve_many(problem.hamiltonian, z0, times)
            bvals = poly.evaluate_many(states).real if poly is not None else np.full(len(times), np.nan)
            unsafe = contains_many(problem.unsafe, states, tol=0.0, sphere_tol=NORM_TOL)
            for t, z, b, u in zip(times, states, bvals, unsafe):
                row = [fmt(t)] + [fmt(x) for c in z for x in (c.real, c.imag)] + [fmt(b), "true" if u else "false"]
                writer.writerow(row)
            if d == 2:
                bloch_rows.extend(zip(times, bloch_vector(states)))
    if d == 2:
        period = measure_bloch_period(problem.hamiltonian, starts[0])
        print(f"measured Bloch-sphere period of the first trajectory: {period}", file=sys.stderr)
        if args.bloch:
            with open(args.bloch, "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["t", "x", "y", "z"])
                for t, v in bloch_rows:
                    writer.writerow([fmt(t)] + [fmt(x) for x in v])
    print(f"wrote {len(starts)} trajectories to {args.out}", file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qbarrier", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def problem_args(p):
        p.add_argument("--case", choices=list(CASES))
        p.add_argument("--problem", help="problem JSON file")
        p.add_argument("--seed", type=int)
        p.add_argument("--t-max", type=float, default=10.0)

    p = sub.add_parser("list", help="list the built-in case studies")
    p.set_defaults(func=cmd_list)

    p = sub.add_parser("synth", help="synthesise and certify a barrier")
    problem_args(p)
    p.add_argument("--degree", type=int)
    p.add_argument("--full-template", action="store_true", help="include unbalanced monomials")
    p.add_argument("--samples", type=int)
    p.add_argument("--out", default="barrier.json")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("certify", help="validate a barrier file against a problem")
    problem_args(p)
    p.add_argument("--barrier")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("simulate", help="write trajectory CSV data")
    problem_args(p)
    p.add_argument("--barrier")
    p.add_argument("--state", help='initial state as JSON [[re, im], ...]')
    p.add_argument("--steps", type=int, default=1000)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--out", default="trajectories.csv")
    p.add_argument("--bloch", help="extra CSV of Bloch coordinates (d = 2 only)")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
