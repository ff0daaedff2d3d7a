import time
import logging

from shared.assignment_core import DEFAULT_ALPHA, cost, reaches_all
from shared.cross_model import CrossNetwork
from shared.errors import SourceNotAtIntersection, UnknownPlanner
from shared.grid_model import GridNetwork
from shared.settings import get_settings
from services.engine_vyuha.baselines import bip_assignment, bip_sweep_assignment, mst_assignment
from services.engine_vyuha.brute_force import brute_force_oracle
from services.engine_vyuha.distributed import distributed_assignment, grid_distributed_assignment
from services.engine_vyuha.near_optimal import near_optimal_assignment
from services.engine_vyuha.optimal_search import search_optimal

CROSS = "cross"
GRID = "grid"


class PlannerRegistry:
    def __init__(self):
        # Maps planner name to one callable per topology.
        # Every callable returns (assignment, iterations or None).
        self.planners = {
            "optimal": {CROSS: self.plan_optimal},
            "optimal-intersection": {CROSS: self.plan_optimal_intersection},
            "brute": {CROSS: self.plan_brute},
            "near-optimal": {CROSS: self.plan_near_optimal},
            "distributed": {CROSS: self.plan_distributed, GRID: self.plan_grid_distributed},
            "mst": {CROSS: self.plan_mst, GRID: self.plan_mst},
            "bip": {CROSS: self.plan_bip, GRID: self.plan_bip},
            "bip-sweep": {CROSS: self.plan_bip_sweep, GRID: self.plan_bip_sweep},
        }

    @property
    def names(self):
        return tuple(self.planners)

    def get_planner(self, name, topology=CROSS):
        """
        Planner callable for a name on a topology. Cross-only planners are
        rejected on grids.
        """
        if name not in self.planners:
            raise UnknownPlanner(f"unknown planner {name!r}; choose from {', '.join(self.planners)}")
        by_topology = self.planners[name]
        if topology not in by_topology:
            raise UnknownPlanner(f"planner {name!r} does not run on {topology} networks")
        return by_topology[topology]

    # --- exact ---

    def plan_optimal(self, network, alpha, options):
        result = search_optimal(network, alpha, **_search_options(options))
        return result.assignment, result.steps

    def plan_optimal_intersection(self, network, alpha, options):
        if not network.source_at_intersection:
            raise SourceNotAtIntersection(
                f"source sits {network.source_offset:g} away from the intersection"
            )
        result = search_optimal(network, alpha, at_intersection=True, **_search_options(options))
        return result.assignment, result.steps

    def plan_brute(self, network, alpha, options):
        return brute_force_oracle(network, alpha, cap=options.get("brute_cap")), None

    # --- heuristics ---

    def plan_near_optimal(self, network, alpha, options):
        return near_optimal_assignment(network, alpha), None

    def plan_distributed(self, network, alpha, options):
        return distributed_assignment(network, alpha), None

    def plan_grid_distributed(self, grid, alpha, options):
        return grid_distributed_assignment(grid, alpha), None

    def plan_mst(self, network, alpha, options):
        return mst_assignment(network, alpha, strict=options.get("strict", True)), None

    def plan_bip(self, network, alpha, options):
        return bip_assignment(network, alpha), None

    def plan_bip_sweep(self, network, alpha, options):
        return bip_sweep_assignment(network, alpha), None


def _search_options(options):
    settings = get_settings()
    out = {
        "budget": options.get("budget"),
        "prune": settings.prune if options.get("prune") is None else options["prune"],
        "workers": options.get("workers") or settings.workers,
    }
    if options.get("resume") is not None:
        out["resume"] = options["resume"]
    return out


def topology_of(network):
    if isinstance(network, GridNetwork):
        return GRID
    if isinstance(network, CrossNetwork):
        return CROSS
    raise UnknownPlanner(f"no planners for {type(network).__name__}")


registry = PlannerRegistry()


def run_planner(name, network, alpha=DEFAULT_ALPHA, **options):
    """
    Runs a planner by name and returns (assignment, report). The report holds
    the cost, the wall-clock runtime, the search iterations (exact planners
    only) and whether the assignment delivers to every node.
    """
    planner = registry.get_planner(name, topology_of(network))
    started = time.perf_counter()
    assignment, iterations = planner(network, alpha, options)
    runtime = time.perf_counter() - started
    report = {
        "algo": name,
        "cost": cost(assignment),
        "runtime": runtime,
        "iterations": iterations,
        "delivered": reaches_all(network, assignment),
    }
    logging.debug(f"{name}: cost={report['cost']:.6g} in {runtime:.3f}s")
    return assignment, report
