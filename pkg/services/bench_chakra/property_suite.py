import logging
from dataclasses import dataclass, field

import numpy as np

from shared.assignment_core import (
    depends_on,
    prefix_property_holds,
    reaches_all,
    simulate_broadcast,
    superadditivity_holds,
)
from shared.cross_model import coverage_extents_at, receivers
from services.bench_chakra.generators import generate_random_cross
from services.engine_vyuha.planner_registry import run_planner

SUITE_PLANNERS = ("near-optimal", "distributed", "mst", "bip", "bip-sweep")


@dataclass
class PropertyReport:
    checked: dict = field(default_factory=dict)
    violations: dict = field(default_factory=dict)
    examples: list = field(default_factory=list)

    def record(self, name, ok, detail=None):
        self.checked[name] = self.checked.get(name, 0) + 1
        if not ok:
            self.violations[name] = self.violations.get(name, 0) + 1
            if detail is not None and len(self.examples) < 20:
                self.examples.append({"check": name, **detail})

    @property
    def total_violations(self):
        return sum(self.violations.values())

    def as_dict(self):
        return {
            "checked": dict(self.checked),
            "violations": {k: self.violations.get(k, 0) for k in self.checked},
            "total_violations": self.total_violations,
            "examples": self.examples,
        }


def _check_numeric(report, rng, samples):
    for _ in range(samples):
        k = int(rng.integers(2, 8))
        parts = rng.random(k) * 10.0
        alpha = float(rng.uniform(2.0, 6.0))
        report.record("superadditivity", superadditivity_holds(parts, alpha),
                      {"parts": parts.tolist(), "alpha": alpha})

    r = rng.random(samples) * 10.0
    h = rng.random(samples) * 10.0
    for ri, hi in zip(r, h):
        same, perp, oppo = coverage_extents_at(float(hi), float(ri))
        report.record("coverage_chain", same >= perp >= oppo, {"range": float(ri), "h": float(hi)})


def _check_instance(report, network, rng, alpha):
    n = network.n_nodes
    node = int(rng.integers(0, n))
    r1, r2 = np.sort(rng.random(2) * 2.0 * network.arm_half_length)
    report.record("receivers_monotone", receivers(network, node, r1) <= receivers(network, node, r2),
                  {"node": node, "r1": float(r1), "r2": float(r2)})

    for name in SUITE_PLANNERS:
        assignment, _ = run_planner(name, network, alpha)
        delivered = reaches_all(network, assignment)
        report.record(f"delivery[{name}]", delivered, {"n_nodes": n})
        outcome = simulate_broadcast(network, assignment)
        report.record("prefix_property", prefix_property_holds(network, outcome), {"planner": name})
        if name == "distributed":
            mst, _ = run_planner("mst", network, alpha)
            report.record("distributed_equals_mst", bool(np.array_equal(assignment.ranges, mst.ranges)),
                          {"n_nodes": n})
        if delivered and name == "bip" and n >= 3:
            a, b = (int(v) for v in rng.choice(np.arange(1, n), size=2, replace=False))
            both = depends_on(network, assignment, a, b) and depends_on(network, assignment, b, a)
            report.record("depends_on_antisymmetric", not both, {"a": a, "b": b})


def run_property_suite(seed=0, samples=10_000, instances=200, n_range=(5, 40), alpha=2.0):
    """
    Randomised invariant checks: numeric inequalities on `samples` draws, and
    structural properties of every planner on `instances` random crosses.
    """
    rng = np.random.default_rng(seed)
    report = PropertyReport()
    _check_numeric(report, rng, samples)

    lo, hi = n_range
    for k in range(instances):
        n_nodes = int(rng.integers(lo, hi + 1))
        mode = "intersection" if k % 4 == 0 else "uniform"
        network = generate_random_cross(n_nodes, np.random.SeedSequence(seed, spawn_key=(k,)), source_mode=mode)
        _check_instance(report, network, rng, alpha)
        if (k + 1) % max(1, instances // 10) == 0:
            logging.info(f"property suite: {k + 1}/{instances} instances, {report.total_violations} violation(s)")

    if report.total_violations:
        logging.error(f"property suite found {report.total_violations} violation(s): {report.violations}")
    else:
        logging.info(f"property suite passed: {sum(report.checked.values()):,} checks")
    return report
