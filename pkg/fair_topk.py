"""
FAIR TOP-K - Intersectional Fair Selection
Command-line entry point and command dispatch

Selects k candidates maximizing J = B - lambda * D, where B is the total
score of the admitted candidates and D sums, over intersectional classes,
the gap between the class selection rate and the target rate p.

Commands:
- solve:  optimum for one (k or p, lambda) with dp, greedy, greedy-merged or lp
- sweep:  lambda sweep per admission rate until parity (single track)
- tracks: independent sweeps per program pool (separate tracks)
- gen:    seeded synthetic candidate file
- stats:  per-class score statistics
- oracle: exhaustive optimum for small instances
- bench:  DP against merged greedy on growing sub-samples

Exit codes: 0 success, 1 internal error, 2 usage or data error.
"""

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

import pandas as pd

from topk.errors import InvalidParameterError, TopKError
from topk.experiments import (
    DEFAULT_LAMBDA_STEPS,
    DEFAULT_PARITY_THRESHOLD,
    DEFAULT_RATES,
    PARITY_METRICS,
    SweepConfig,
    run_efficiency,
    run_separate_tracks,
    run_single_track,
)
from topk.ingestion import (
    CodingConfig,
    SyntheticSpec,
    class_stats,
    load_csv,
    load_pools,
    write_synthetic,
)
from topk.model import PolicyParams
from topk.oracle import MAX_SUBSET_CANDIDATES, oracle_counts, oracle_subsets
from topk.report import (
    format_breakdown,
    format_efficiency,
    format_selection,
    format_stats,
    write_efficiency,
    write_separate_tracks,
    write_single_track,
    write_stats,
)
from topk.objective import evaluate
from topk.solvers import SOLVERS, solve

logger = logging.getLogger("fair_topk")

LOG_FORMAT = "%(levelname)s %(name)s: %(message)s"

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_USAGE = 2

# Data problems surfaced by the file layer rather than by the library
INPUT_ERRORS = (OSError, UnicodeDecodeError, json.JSONDecodeError,
                pd.errors.EmptyDataError, pd.errors.ParserError)


def _float_list(text):
    try:
        return tuple(float(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _int_list(text):
    try:
        return tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fair_topk", description="Intersectional fair top-k selection")
    parser.add_argument("-v", "--verbose", action="count", default=0,
                        help="-v for progress, -vv for solver internals")
    commands = parser.add_subparsers(dest="command", required=True)

    def add_input(sub):
        sub.add_argument("--input", required=True, type=Path, help="candidate CSV (id,score,<attributes>)")
        sub.add_argument("--coding", required=True, type=Path, help="coding config JSON")

    def add_policy(sub):
        size = sub.add_mutually_exclusive_group(required=True)
        size.add_argument("--k", type=int, help="number of candidates to select")
        size.add_argument("--rate", type=float, help="selection rate p; k = floor(p * n)")
        sub.add_argument("--lambda", dest="tradeoff", type=float, default=0.0,
                         help="trade-off weight (default 0)")

    def add_sweep(sub, min_class_help):
        sub.add_argument("--threshold", type=float, default=DEFAULT_PARITY_THRESHOLD,
                         help="parity stop value (default %(default)s)")
        sub.add_argument("--metric", choices=PARITY_METRICS, default="mean",
                         help="stop on mean (D/|C|) or total discrepancy")
        sub.add_argument("--min-class-size", type=int, default=None, help=min_class_help)
        sub.add_argument("--lambda-steps", type=int, default=DEFAULT_LAMBDA_STEPS,
                         help="geometric grid length after lambda = 0")
        sub.add_argument("--lambda-unit", type=float, default=None,
                         help="first non-zero lambda (default: top-k mean score / |C|)")
        sub.add_argument("--solver", choices=list(SOLVERS), default="dp")
        sub.add_argument("--out-dir", required=True, type=Path)

    solve_cmd = commands.add_parser("solve", help="solve one instance")
    add_input(solve_cmd)
    add_policy(solve_cmd)
    solve_cmd.add_argument("--solver", choices=list(SOLVERS), default="dp")
    solve_cmd.add_argument("--out", type=Path, help="write the selection here instead of stdout")
    solve_cmd.add_argument("--format", choices=("ids", "csv"), default="ids",
                           help="one id per line, or CSV with scores and class labels")
    solve_cmd.add_argument("--dump-table", type=Path, help="write the DP value table as CSV (dp only)")

    sweep_cmd = commands.add_parser("sweep", help="lambda sweep per admission rate")
    add_input(sweep_cmd)
    sweep_cmd.add_argument("--rates", type=_float_list, default=DEFAULT_RATES,
                           help="comma-separated rates (default 0.05,0.15,0.30,0.50)")
    add_sweep(sweep_cmd, "ignore classes below this size (default 1)")

    tracks_cmd = commands.add_parser("tracks", help="independent sweeps per program pool")
    tracks_cmd.add_argument("--manifest", required=True, type=Path,
                            help="JSON list of {program_id, input, rate}")
    tracks_cmd.add_argument("--coding", required=True, type=Path)
    add_sweep(tracks_cmd, "ignore classes below this size (default 3)")

    gen_cmd = commands.add_parser("gen", help="generate a synthetic candidate file")
    gen_cmd.add_argument("--spec", required=True, type=Path, help="synthetic spec JSON")
    gen_cmd.add_argument("--out", required=True, type=Path)
    gen_cmd.add_argument("--seed", type=int, default=None, help="override the spec's seed")
    gen_cmd.add_argument("--coding-out", type=Path, help="also write a coding config that reads the file")

    stats_cmd = commands.add_parser("stats", help="per-class score statistics")
    add_input(stats_cmd)
    stats_cmd.add_argument("--out", type=Path, help="write CSV instead of a text table")

    oracle_cmd = commands.add_parser("oracle", help="exhaustive optimum (small instances only)")
    add_input(oracle_cmd)
    add_policy(oracle_cmd)
    oracle_cmd.add_argument("--subsets", action="store_true",
                            help=f"also enumerate candidate subsets (n <= {MAX_SUBSET_CANDIDATES})")

    bench_cmd = commands.add_parser("bench", help="time DP against merged greedy")
    add_input(bench_cmd)
    bench_cmd.add_argument("--sizes", type=_int_list, required=True, help="comma-separated sample sizes")
    bench_cmd.add_argument("--rate", type=float, default=DEFAULT_RATES[0])
    bench_cmd.add_argument("--lambda", dest="tradeoff", type=float, default=0.0)
    bench_cmd.add_argument("--seed", type=int, default=0)
    bench_cmd.add_argument("--out", type=Path, help="write CSV instead of a text table")
    return parser


class FairTopK:
    """Command-line application"""

    def __init__(self, argv=None, stdout=None):
        self.parser = build_parser()
        self.args = self.parser.parse_args(argv)
        self.stdout = stdout or sys.stdout
        self.commands = {
            "solve": self.cmd_solve,
            "sweep": self.cmd_sweep,
            "tracks": self.cmd_tracks,
            "gen": self.cmd_gen,
            "stats": self.cmd_stats,
            "oracle": self.cmd_oracle,
            "bench": self.cmd_bench,
        }

    def configure_logging(self):
        level = {0: logging.WARNING, 1: logging.INFO}.get(self.args.verbose, logging.DEBUG)
        logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr)

    def write(self, text):
        self.stdout.write(text)

    def run(self) -> int:
        """Dispatch the chosen command and map failures onto exit codes"""
        self.configure_logging()
        try:
            self.commands[self.args.command]()
        except TopKError as e:
            print(f"error: {e}", file=sys.stderr)
            return EXIT_USAGE
        except INPUT_ERRORS as e:
            print(f"error: {e}", file=sys.stderr)
            return EXIT_USAGE
        except Exception:
            logger.exception("internal error")
            return EXIT_INTERNAL
        return EXIT_OK

    # ------------------------------------------------------------------
    # Commands
    # ------------------------------------------------------------------

    def _load(self):
        return load_csv(self.args.input, CodingConfig.from_json(self.args.coding))

    def _params(self, instance):
        return PolicyParams.for_instance(instance, rate=self.args.rate, quota=self.args.k,
                                         tradeoff=self.args.tradeoff)

    def _sweep_config(self, rates):
        return SweepConfig(
            rates=rates,
            lambda_steps=self.args.lambda_steps,
            lambda_unit=self.args.lambda_unit,
            parity_threshold=self.args.threshold,
            parity_metric=self.args.metric,
            min_class_size=self.args.min_class_size,
            solver=self.args.solver,
        )

    def cmd_solve(self):
        args = self.args
        if args.dump_table and args.solver != "dp":
            raise InvalidParameterError("--dump-table needs --solver dp")
        instance = self._load()
        params = self._params(instance)
        outcome = solve(instance, params, args.solver)
        logger.info("%s: k=%d J=%.6f", args.solver, params.quota, outcome.breakdown.total)

        if args.dump_table:
            outcome.detail.to_csv(args.dump_table, instance.labels)
            logger.info("wrote %s", args.dump_table)

        selection = format_selection(instance, outcome.selection, args.format)
        summary = format_breakdown(instance, params, outcome.selection, outcome.breakdown, args.solver)
        if args.out:
            with open(args.out, "w", encoding="utf-8", newline="\n") as f:
                f.write(selection)
            logger.info("wrote %s", args.out)
            self.write(summary)
        else:
            self.write(summary + "\n" + selection)

    def cmd_sweep(self):
        config = self._sweep_config(self.args.rates)
        instance = self._load()
        runs = run_single_track(instance, config)
        write_single_track(runs, self.args.out_dir)
        for rate, run in runs.items():
            status = "parity" if run.parity_reached else "parity NOT reached"
            last = run.results[-1]
            self.write(f"p={rate:.2f}: {len(run)} points, {status} at lambda={last.tradeoff:g} "
                       f"(mean D {last.mean_discrepancy:.5f}, decrease {last.avg_utility_decrease:.3f})\n")

    def cmd_tracks(self):
        config = self._sweep_config(DEFAULT_RATES)
        pools = load_pools(self.args.manifest, CodingConfig.from_json(self.args.coding))
        runs = run_separate_tracks(pools, config)
        write_separate_tracks(runs, self.args.out_dir)
        for program_id, run in runs.items():
            if run.skipped:
                self.write(f"{program_id}: skipped ({run.skipped_reason})\n")
                continue
            status = "parity" if run.parity_reached else "parity NOT reached"
            self.write(f"{program_id}: p={run.rate:.2f}, {len(run.labels)} classes, {len(run)} points, "
                       f"{status}\n")

    def cmd_gen(self):
        args = self.args
        spec = SyntheticSpec.from_json(args.spec)
        if args.seed is not None:
            spec = dataclasses.replace(spec, seed=args.seed)
        instance = write_synthetic(spec, args.out)
        logger.info("wrote %s", args.out)
        if args.coding_out:
            CodingConfig.from_instance(instance, spec.attribute_columns).save_json(args.coding_out)
            logger.info("wrote %s", args.coding_out)
        self.write(f"{instance.total_candidates} candidates in {instance.num_classes} classes\n")

    def cmd_stats(self):
        stats = class_stats(self._load())
        if self.args.out:
            write_stats(stats, self.args.out)
        else:
            self.write(format_stats(stats))

    def cmd_oracle(self):
        instance = self._load()
        params = self._params(instance)
        best = oracle_counts(instance, params)
        self.write(format_breakdown(instance, params, best.selection,
                                    evaluate(instance, params, best.selection), "oracle"))
        if self.args.subsets:
            subset = oracle_subsets(instance, params)
            self.write(f"subset oracle J = {subset.objective:.6f}\n")

    def cmd_bench(self):
        args = self.args
        records = run_efficiency(self._load(), args.sizes, args.rate, args.tradeoff, args.seed)
        if args.out:
            write_efficiency(records, args.out)
        else:
            self.write(format_efficiency(records))


def main(argv=None):
    """Entry point"""
    app = FairTopK(argv)
    return app.run()


if __name__ == "__main__":
    sys.exit(main())
