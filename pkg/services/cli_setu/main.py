import sys
import json
import logging
import argparse
import traceback
from pathlib import Path

import pydantic

from shared.assignment_core import cost, simulate_broadcast
from shared.errors import BudgetExceeded, PrasaranError, ValidationError
from shared.grid_model import generate_square_grid
from shared.network_io import (
    assignment_to_dict,
    load_any_network,
    load_assignment,
    save_assignment,
    save_grid,
    save_network,
)
from shared.schemas import ExperimentConfigFile, PlannerReport, VerifyReport
from shared.settings import get_settings, reload_settings
from services.bench_chakra.generators import SOURCE_MODES, generate_random_cross
from services.bench_chakra.monte_carlo import (
    PRESETS,
    TOPOLOGIES,
    ExperimentConfig,
    preset_config,
    reference_means,
    run_monte_carlo,
    stats_frame,
    write_csv,
    write_json,
)
from services.bench_chakra.property_suite import run_property_suite
from services.engine_vyuha.planner_registry import registry, run_planner

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


class _Parser(argparse.ArgumentParser):
    # usage errors are input errors (exit 1); exit 2 is reserved for budget exhaustion
    def error(self, message):
        raise ValidationError(f"{self.prog}: {message}")


def configure_logging(level="INFO"):
    logging.basicConfig(level=level.upper(), format=LOG_FORMAT, stream=sys.stderr, force=True)


def _emit(text, path=None):
    if path is None or str(path) == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _dump(payload):
    return json.dumps(payload, indent=2) + "\n"


def _int_list(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ValidationError(f"expected comma-separated integers, got {text!r}")


def _name_list(text):
    return [v.strip() for v in text.split(",") if v.strip()]


# --- subcommands ---

def cmd_gen(args):
    network = generate_random_cross(args.N, args.seed, args.arm_half_length, args.source_mode)
    _emit(save_network(network), args.out)
    return 0


def cmd_grid_gen(args):
    grid = generate_square_grid(args.k, args.side, args.N, args.seed)
    _emit(save_grid(grid), args.out)
    return 0


def cmd_assign(args):
    network = load_any_network(args.network)
    resume = None
    if args.resume:
        resume = json.loads(Path(args.resume).read_text(encoding="utf-8"))
    try:
        assignment, report = run_planner(
            args.algo, network, args.alpha,
            budget=args.budget, prune=args.prune, workers=args.workers, resume=resume,
        )
    except BudgetExceeded as e:
        if args.checkpoint and e.checkpoint is not None:
            Path(args.checkpoint).write_text(_dump(e.checkpoint), encoding="utf-8")
            logging.warning(f"search checkpoint written to {args.checkpoint}")
        raise
    report = PlannerReport(**report).model_dump()
    if args.out:
        save_assignment(assignment, args.out)
        _emit(_dump(report))
    else:
        _emit(_dump({"assignment": assignment_to_dict(assignment), "report": report}))
    return 0


def cmd_verify(args):
    network = load_any_network(args.network)
    assignment = load_assignment(args.assignment).check_fits(network)
    outcome = simulate_broadcast(network, assignment)
    report = VerifyReport(
        delivered=outcome.delivered_to(network.n_nodes),
        cost=cost(assignment),
        reached=len(outcome.reached),
        n_nodes=network.n_nodes,
        rounds=outcome.rounds,
    )
    _emit(_dump(report.model_dump()))
    return 0


def _experiment_config(args):
    flags = {
        "topology": args.topology,
        "n_values": tuple(_int_list(args.N)) if args.N else None,
        "trials": args.trials,
        "alpha": args.alpha,
        "master_seed": args.seed,
        "algorithms": tuple(_name_list(args.algos)) if args.algos else None,
        "denominator": args.denominator,
        "arm_half_length": args.arm_half_length,
        "grid_k": args.grid_k,
        "grid_side": args.grid_side,
        "budget": args.budget,
        "workers": args.workers,
    }
    if args.preset:
        return preset_config(args.preset, **flags)

    params = {}
    if args.config:
        try:
            payload = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise ValidationError(f"{args.config}: {e}")
        parsed = ExperimentConfigFile.model_validate(payload)
        params = {
            "topology": parsed.topology,
            "n_values": tuple(parsed.N),
            "trials": parsed.trials,
            "alpha": parsed.alpha,
            "master_seed": parsed.seed,
            "algorithms": tuple(parsed.algorithms) if parsed.algorithms else None,
            "denominator": parsed.denominator,
            "arm_half_length": parsed.arm_half_length,
            "grid_k": parsed.grid_k,
            "grid_side": parsed.grid_side,
            "budget": parsed.budget,
            "workers": parsed.workers,
        }
    params.update({k: v for k, v in flags.items() if v is not None})
    params = {k: v for k, v in params.items() if v is not None}
    params.setdefault("workers", get_settings().workers)
    return ExperimentConfig(**params)


def cmd_mc(args):
    try:
        config = _experiment_config(args)
    except pydantic.ValidationError as e:
        raise ValidationError(f"experiment config: {e.errors()[0]['msg']}")

    stats = run_monte_carlo(config)
    if args.csv:
        write_csv(stats, args.csv)
    else:
        _emit(stats_frame(stats).to_csv(index=False))
    if args.json:
        write_json(stats, args.json)

    if args.preset:
        for n_nodes in config.n_values:
            reference = reference_means(args.preset, n_nodes)
            if reference:
                logging.info(f"reference mean ratios at N={n_nodes}: {reference}")
    if stats.partial:
        print(f"BudgetExceeded: {stats.skipped} trial(s) dropped, results are partial", file=sys.stderr)
        return BudgetExceeded.exit_code
    return 0


def cmd_props(args):
    report = run_property_suite(seed=args.seed, samples=args.samples, instances=args.instances)
    text = _dump(report.as_dict())
    _emit(text, args.json)
    if args.json:
        _emit(_dump({"total_violations": report.total_violations}))
    # any violation is a bug in a planner, not an input problem
    return 3 if report.total_violations else 0


def build_parser():
    parser = _Parser(prog="prasaran", description="Minimum-energy broadcast on cross and grid networks")
    parser.add_argument("--log-level", default=None, help="logging level (default: CROSSBCAST_LOG_LEVEL or INFO)")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", help="generate a random cross network (JSON)")
    p.add_argument("-N", type=int, required=True, help="number of nodes including the source")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--source-mode", choices=SOURCE_MODES, default="uniform")
    p.add_argument("--arm-half-length", type=float, default=1.0)
    p.add_argument("-o", "--out", default=None, help="output file (default: stdout)")
    p.set_defaults(handler=cmd_gen)

    p = sub.add_parser("grid-gen", help="generate a random k x k square grid (JSON)")
    p.add_argument("-k", type=int, default=2)
    p.add_argument("--side", type=float, default=1.0)
    p.add_argument("-N", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--out", default=None)
    p.set_defaults(handler=cmd_grid_gen)

    p = sub.add_parser("assign", help="compute a range assignment")
    p.add_argument("network", help="cross or grid network file")
    p.add_argument("--algo", required=True, choices=registry.names)
    p.add_argument("--alpha", type=float, default=2.0)
    p.add_argument("--budget", type=int, default=None, help="exact-search step budget (default: CROSSBCAST_BUDGET)")
    p.add_argument("--prune", dest="prune", action="store_true", default=None)
    p.add_argument("--no-prune", dest="prune", action="store_false")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--checkpoint", default=None, help="where to write the search state if the budget runs out")
    p.add_argument("--resume", default=None, help="continue an exact search from a checkpoint file")
    p.add_argument("-o", "--out", default=None, help="assignment file (report then goes to stdout)")
    p.set_defaults(handler=cmd_assign)

    p = sub.add_parser("verify", help="simulate a broadcast and report delivery and cost")
    p.add_argument("network")
    p.add_argument("assignment")
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("mc", help="Monte Carlo comparison of planners")
    p.add_argument("--preset", choices=tuple(PRESETS), default=None)
    p.add_argument("--config", default=None, help="experiment config JSON")
    p.add_argument("--topology", choices=TOPOLOGIES, default=None)
    p.add_argument("-N", default=None, help="comma-separated node counts, e.g. 20,40,80")
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--algos", default=None, help="comma-separated planner names")
    p.add_argument("--denominator", default=None, help="planner the ratios are taken against")
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--arm-half-length", type=float, default=None)
    p.add_argument("--grid-k", type=int, default=None)
    p.add_argument("--grid-side", type=float, default=None)
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--csv", default=None, help="CSV output (default: stdout)")
    p.add_argument("--json", default=None, help="JSON mirror of the CSV")
    p.set_defaults(handler=cmd_mc)

    p = sub.add_parser("props", help="run the randomised invariant suite")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--instances", type=int, default=200)
    p.add_argument("--json", default=None)
    p.set_defaults(handler=cmd_props)
    return parser


def cli_main(argv=None):
    try:
        # environment is read once per invocation
        settings = reload_settings()
        args = build_parser().parse_args(argv)
        configure_logging(args.log_level or settings.log_level)
        return args.handler(args)
    except SystemExit as e:
        # --help
        return int(e.code or 0)
    except PrasaranError as e:
        print(f"{type(e).__name__}: {e}", file=sys.stderr)
        return e.exit_code
    except Exception:
        logging.error(f"unexpected failure: {traceback.format_exc()}")
        return 1


if __name__ == "__main__":
    sys.exit(cli_main())
