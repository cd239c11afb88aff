"""``profilepriv`` command line: synthesize, sample, verify, experiment.

Exit codes: 0 success / verification pass, 1 verification failure,
2 usage or input error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import io as pio
from .baselines import as_profile_mechanism, randomized_response
from .errors import NumericalFailure, ProfilePrivError
from .experiments import DEFAULT_EPSILON_GRID, DEFAULT_P_GRID, EXPERIMENTS, ExperimentSpec, run_experiment
from .mechanisms import apply, apply_many, one_bit_cluster, smooth_categorical, smooth_one_bit
from .verifier import verify_exact, verify_monte_carlo

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERICAL = 0, 1, 2, 3

ALGORITHMS = {
    "cluster": lambda g, w: one_bit_cluster(g),
    "smooth-onebit": lambda g, w: smooth_one_bit(g),
    "smooth-categorical": lambda g, w: smooth_categorical(g, w),
    "ldp": lambda g, w: as_profile_mechanism(randomized_response(g.d, g.epsilon), g),
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(message)


class _UsageError(Exception):
    pass


def _floats(text: str) -> list:
    return [float(v) for v in text.split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="profilepriv", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("synthesize", help="graph file -> mechanism file")
    p.add_argument("graph")
    p.add_argument("--algorithm", choices=sorted(ALGORITHMS), default="smooth-categorical")
    p.add_argument("--weights", type=_floats, help="per-profile objective weights (smooth-categorical)")
    p.add_argument("-o", "--output", default="-")

    p = sub.add_parser("sample", help="privatize one observed category")
    p.add_argument("mechanism")
    p.add_argument("--profile", required=True)
    p.add_argument("--value", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--count", type=int, default=1, help="number of independent releases")

    p = sub.add_parser("verify", help="certify a mechanism against a graph")
    p.add_argument("graph")
    p.add_argument("mechanism")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--monte-carlo", type=int, metavar="N", help="estimate from N sampled releases per profile")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", default="-")

    p = sub.add_parser("experiment", help="reproduce a simulation setting as CSV")
    p.add_argument("name", choices=EXPERIMENTS)
    p.add_argument("--epsilon-grid", type=_floats, default=list(DEFAULT_EPSILON_GRID))
    p.add_argument("--p-grid", type=_floats, default=list(DEFAULT_P_GRID))
    p.add_argument("-o", "--output", default="-")
    return parser


def _emit(text: str, path: str) -> None:
    if path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _synthesize(args) -> int:
    graph = pio.load_graph(args.graph)
    mech = ALGORITHMS[args.algorithm](graph, args.weights)
    _emit(pio.dump_mechanism(mech), args.output)
    return EXIT_OK


def _sample(args) -> int:
    mech = pio.load_mechanism(args.mechanism)
    if args.profile not in mech.profile_ids:
        raise _UsageError(f"unknown profile {args.profile!r}")
    if args.count == 1:
        values = [apply(mech, args.profile, args.value, args.seed).value]
    else:
        values = apply_many(mech, args.profile, [args.value] * args.count, args.seed).tolist()
    sys.stdout.write("\n".join(str(v) for v in values) + "\n")
    return EXIT_OK


def _verify(args) -> int:
    graph = pio.load_graph(args.graph)
    mech = pio.load_mechanism(args.mechanism)
    if args.monte_carlo:
        report = verify_monte_carlo(graph, mech, args.monte_carlo, args.seed)
    else:
        report = verify_exact(graph, mech)
    text = pio.report_csv(report) if args.format == "csv" else pio.dump_report(report)
    _emit(text, args.output)
    return EXIT_OK if report.passed else EXIT_FAIL


def _experiment(args) -> int:
    spec = ExperimentSpec(args.name, tuple(args.epsilon_grid), args.output, tuple(args.p_grid))
    text = run_experiment(spec)
    if args.output == "-":
        sys.stdout.write(text)
    return EXIT_OK


COMMANDS = {"synthesize": _synthesize, "sample": _sample, "verify": _verify, "experiment": _experiment}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args)
    except _UsageError as exc:
        print(f"profilepriv: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalFailure as exc:
        print(f"profilepriv: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ProfilePrivError, ValueError, KeyError, IndexError, OSError, json.JSONDecodeError) as exc:
        print(f"profilepriv: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
