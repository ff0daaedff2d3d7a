import json
import math
import logging
from dataclasses import asdict, dataclass, field
from concurrent.futures import ProcessPoolExecutor
from typing import Optional

import numpy as np
import pandas as pd

from shared.errors import BudgetExceeded, ValidationError
from shared.grid_model import generate_square_grid
from shared.settings import get_settings
from services.bench_chakra.generators import generate_random_cross
from services.engine_vyuha.planner_registry import CROSS, GRID, registry, run_planner

TOPOLOGIES = ("cross-general", "cross-intersection", "square-grid")
CSV_COLUMNS = ["topology", "N", "algo", "trials", "mean_cost", "mean_ratio", "ci95", "denominator", "seed"]
Z_95 = 1.96

DEFAULT_ALGORITHMS = ("near-optimal", "bip-sweep", "bip", "distributed")
DEFAULT_GRID_ALGORITHMS = ("bip-sweep", "bip", "distributed")


@dataclass(frozen=True)
class ExperimentConfig:
    topology: str = "cross-general"
    n_values: tuple = (13,)
    trials: int = 100
    alpha: float = 2.0
    master_seed: int = 0
    # None: DEFAULT_ALGORITHMS, or DEFAULT_GRID_ALGORITHMS on grids
    algorithms: Optional[tuple] = None
    # None: near-optimal on crosses, bip-sweep on grids
    denominator: Optional[str] = None
    arm_half_length: float = 1.0
    grid_k: int = 2
    grid_side: float = 1.0
    budget: Optional[int] = None
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "n_values", tuple(int(n) for n in self.n_values))
        if self.topology not in TOPOLOGIES:
            raise ValidationError(f"topology must be one of {TOPOLOGIES}, got {self.topology!r}")
        if self.algorithms is None:
            default = DEFAULT_GRID_ALGORITHMS if self.topology == "square-grid" else DEFAULT_ALGORITHMS
            object.__setattr__(self, "algorithms", default)
        object.__setattr__(self, "algorithms", tuple(self.algorithms))
        if self.trials < 1:
            raise ValidationError(f"trials must be >= 1, got {self.trials}")
        if not self.n_values or min(self.n_values) < 2:
            raise ValidationError(f"every N must be >= 2, got {list(self.n_values)}")
        if not self.algorithms:
            raise ValidationError("at least one algorithm is required")
        if self.workers < 1:
            raise ValidationError(f"workers must be >= 1, got {self.workers}")
        kind = self.kind
        for name in self.planned:
            registry.get_planner(name, kind)

    @property
    def kind(self):
        return GRID if self.topology == "square-grid" else CROSS

    @property
    def ratio_base(self):
        if self.denominator is not None:
            return self.denominator
        return "bip-sweep" if self.kind == GRID else "near-optimal"

    @property
    def planned(self):
        """Algorithms to run per trial: the listed ones plus the denominator."""
        extra = () if self.ratio_base in self.algorithms else (self.ratio_base,)
        return self.algorithms + extra

    @property
    def label(self):
        if self.kind == GRID:
            return f"square-grid-{self.grid_k}"
        return self.topology


class RunningStats:
    """Welford accumulator: streamed mean and sample variance."""

    def __init__(self):
        self.count = 0
        self.mean = 0.0
        self._m2 = 0.0

    def push(self, value):
        self.count += 1
        delta = value - self.mean
        self.mean += delta / self.count
        self._m2 += delta * (value - self.mean)

    @property
    def variance(self):
        return self._m2 / (self.count - 1) if self.count > 1 else 0.0

    @property
    def ci95(self):
        if self.count < 2:
            return 0.0
        return Z_95 * math.sqrt(self.variance) / math.sqrt(self.count)


@dataclass
class AlgoStats:
    algo: str
    n_nodes: int
    trials: int
    mean_cost: float
    mean_ratio: float
    ci95: float
    mean_runtime: float


@dataclass
class TrialStats:
    config: ExperimentConfig
    rows: list = field(default_factory=list)
    skipped: int = 0

    @property
    def partial(self):
        return self.skipped > 0

    def row(self, algo, n_nodes=None):
        for r in self.rows:
            if r.algo == algo and (n_nodes is None or r.n_nodes == n_nodes):
                return r
        raise KeyError(f"no statistics for {algo!r} at N={n_nodes}")


def trial_seed(master_seed, n_nodes, trial):
    """Independent stream per (N, trial): depends on nothing but these three numbers."""
    return np.random.SeedSequence(master_seed, spawn_key=(n_nodes, trial))


def build_instance(config, n_nodes, trial):
    seed = trial_seed(config.master_seed, n_nodes, trial)
    if config.topology == "square-grid":
        return generate_square_grid(config.grid_k, config.grid_side, n_nodes, seed)
    mode = "intersection" if config.topology == "cross-intersection" else "uniform"
    return generate_random_cross(n_nodes, seed, config.arm_half_length, mode)


def _run_trial(args):
    """
    One trial: build the instance and run every planned algorithm on it.
    Module level so ProcessPoolExecutor can pickle it.
    """
    config, n_nodes, trial = args
    network = build_instance(config, n_nodes, trial)
    costs, runtimes = {}, {}
    for algo in config.planned:
        try:
            _, report = run_planner(algo, network, config.alpha, budget=config.budget, workers=1)
        except BudgetExceeded as e:
            logging.warning(f"trial {trial} (N={n_nodes}): {algo} ran out of budget after {e.steps:,} steps")
            return {"trial": trial, "costs": None, "runtimes": None}
        costs[algo] = report["cost"]
        runtimes[algo] = report["runtime"]
    return {"trial": trial, "costs": costs, "runtimes": runtimes}


def _ratio(value, base):
    if base > 0:
        return value / base
    return 1.0 if value == 0 else math.inf


def run_monte_carlo(config):
    """
    Runs `trials` seeded instances per N, every algorithm on the same instance,
    and aggregates mean cost, mean cost ratio against the denominator and the
    95% half-width of that ratio. Results are identical for any worker count.
    Trials whose exact search ran out of budget are dropped; `partial` is set.
    """
    stats = TrialStats(config=config)
    base = config.ratio_base
    logging.info(
        f"monte carlo: {config.label}, N={list(config.n_values)}, {config.trials} trials, "
        f"algos={list(config.algorithms)}, denominator={base}, seed={config.master_seed}, workers={config.workers}"
    )

    for n_nodes in config.n_values:
        acc = {a: (RunningStats(), RunningStats(), RunningStats()) for a in config.algorithms}
        jobs = [(config, n_nodes, t) for t in range(config.trials)]
        step = max(1, config.trials // 10)

        def consume(results):
            for done, result in enumerate(results, start=1):
                if result["costs"] is None:
                    stats.skipped += 1
                else:
                    denom = result["costs"][base]
                    for algo in config.algorithms:
                        c_acc, r_acc, t_acc = acc[algo]
                        c_acc.push(result["costs"][algo])
                        r_acc.push(_ratio(result["costs"][algo], denom))
                        t_acc.push(result["runtimes"][algo])
                if done % step == 0 or done == config.trials:
                    logging.info(f"N={n_nodes}: {done}/{config.trials} trials")

        if config.workers > 1:
            with ProcessPoolExecutor(max_workers=config.workers) as pool:
                # map() yields in submission order, so aggregation is order-stable
                consume(pool.map(_run_trial, jobs, chunksize=max(1, config.trials // (4 * config.workers))))
        else:
            consume(map(_run_trial, jobs))

        for algo in config.algorithms:
            c_acc, r_acc, t_acc = acc[algo]
            stats.rows.append(AlgoStats(
                algo=algo,
                n_nodes=n_nodes,
                trials=c_acc.count,
                mean_cost=c_acc.mean,
                mean_ratio=r_acc.mean,
                ci95=r_acc.ci95,
                mean_runtime=t_acc.mean,
            ))

    _log_summary(stats)
    return stats


def _log_summary(stats):
    lines = [f"{'N':>5} {'algo':<14} {'trials':>7} {'mean_cost':>12} {'ratio':>8} {'ci95':>8} {'runtime':>9}"]
    for r in stats.rows:
        lines.append(
            f"{r.n_nodes:>5} {r.algo:<14} {r.trials:>7} {r.mean_cost:>12.6f} "
            f"{r.mean_ratio:>8.4f} {r.ci95:>8.4f} {r.mean_runtime:>8.4f}s"
        )
    if stats.partial:
        lines.append(f"{stats.skipped} trial(s) dropped: exact search budget exhausted")
    logging.info("monte carlo summary\n" + "\n".join(lines))


# --- output ---

def stats_frame(stats):
    cfg = stats.config
    records = [
        {
            "topology": cfg.label,
            "N": r.n_nodes,
            "algo": r.algo,
            "trials": r.trials,
            "mean_cost": r.mean_cost,
            "mean_ratio": r.mean_ratio,
            "ci95": r.ci95,
            "denominator": cfg.ratio_base,
            "seed": cfg.master_seed,
        }
        for r in stats.rows
    ]
    return pd.DataFrame.from_records(records, columns=CSV_COLUMNS)


def write_csv(stats, path):
    # runtimes stay out of the files so reruns are byte-identical
    stats_frame(stats).to_csv(path, index=False)


def stats_payload(stats):
    cfg = asdict(stats.config)
    cfg.pop("workers")
    return {
        "config": cfg,
        "partial": stats.partial,
        "skipped_trials": stats.skipped,
        "rows": stats_frame(stats).to_dict(orient="records"),
    }


def write_json(stats, path):
    with open(path, "w", encoding="utf-8") as f:
        json.dump(stats_payload(stats), f, indent=2, default=_json_default)
        f.write("\n")


def _json_default(value):
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, tuple):
        return list(value)
    raise TypeError(f"cannot serialise {type(value).__name__}")


# --- presets ---

PRESETS = {
    "table-general": dict(
        topology="cross-general", n_values=(13,), trials=100,
        algorithms=DEFAULT_ALGORITHMS, denominator="optimal",
    ),
    "table-intersection": dict(
        topology="cross-intersection", n_values=(14, 18), trials=100,
        algorithms=DEFAULT_ALGORITHMS, denominator="optimal-intersection",
    ),
    "near-optimal-trend": dict(
        topology="cross-general", n_values=(20, 40, 80), trials=10_000,
        algorithms=("near-optimal", "bip", "bip-sweep", "distributed"), denominator="near-optimal",
    ),
    "grid": dict(
        topology="square-grid", n_values=(20, 40, 80), trials=10_000, grid_k=2, grid_side=1.0,
        algorithms=DEFAULT_GRID_ALGORITHMS, denominator="bip-sweep",
    ),
}

# Reference mean ratios against the exact optimum, per (preset, N)
REFERENCE_MEANS = {
    ("table-general", 13): {"near-optimal": 1.0668, "bip-sweep": 1.1302, "bip": 1.1747, "distributed": 1.2556},
    ("table-intersection", 14): {"near-optimal": 1.1140, "bip-sweep": 1.2244, "bip": 1.3009, "distributed": 1.4303},
    ("table-intersection", 18): {"near-optimal": 1.1102, "bip-sweep": 1.2100, "bip": 1.2623, "distributed": 1.3666},
}


def preset_config(name, **overrides):
    if name not in PRESETS:
        raise ValidationError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    params = dict(PRESETS[name])
    params.update({k: v for k, v in overrides.items() if v is not None})
    if "workers" not in params:
        params["workers"] = get_settings().workers
    return ExperimentConfig(**params)


def reference_means(name, n_nodes):
    return REFERENCE_MEANS.get((name, n_nodes))
