import time
import logging
import itertools
from dataclasses import dataclass, field
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from shared.assignment_core import RangeAssignment, cost
from shared.cross_model import SEGMENTS, SOURCE_ID, covers
from shared.errors import BudgetExceeded, SourceNotAtIntersection
from services.engine_vyuha.budget import BudgetGuard

# Exact search over range assignments of the shape every optimum has: at most
# three nodes of N_hat plus the source and the diamond nodes transmit with a
# free range; everybody else transmits either nothing or exactly M.
#
# A candidate is a triple (t, c, p): t picks the special nodes, c gives each
# special node a range d(t_j, c_j) (c_j = t_j means silent), p is the segment
# order of the walk that fills in everyone else. The walk is evaluated
# depth-first: a c_j is only branched on once its node is reached, so all
# triples sharing a prefix share its work.


def reach_masks(dist):
    """
    masks[i][j]: bitmask of the nodes u != i that hear node i when it
    transmits with range d(i, j). masks[i][i] is empty (silent node).
    """
    n = dist.shape[0]
    weights = [1 << u for u in range(n)]
    masks = []
    for i in range(n):
        heard = covers(dist[i][None, :], dist[i][:, None])
        heard[:, i] = False
        masks.append([sum(weights[u] for u in np.flatnonzero(row)) for row in heard])
    return masks


@dataclass(frozen=True)
class SearchSpace:
    """
    T: tuples of special nodes (chosen free nodes + fixed diamond nodes).
    walks: distinct walk orders with the first permutation index producing them.
    C is implicit: every special node (and the source) ranges over all N nodes.
    """
    t_members: tuple
    walks: tuple
    reach: list = field(repr=False)
    n_nodes: int = 0

    @property
    def c_size(self):
        width = 1 + (len(self.t_members[0]) if self.t_members else 0)
        return self.n_nodes ** width


PERMUTATIONS = tuple(itertools.permutations(SEGMENTS))


def walk_orders(index):
    """
    Node visiting order of every segment permutation. Permutations that only
    differ in where empty segments sit give the same walk; the first index wins.
    """
    seen = {}
    for p_index, perm in enumerate(PERMUTATIONS):
        order = tuple(node for label in perm for node in index.nodes_on(label))
        seen.setdefault(order, p_index)
    return tuple((p_index, order) for order, p_index in seen.items())


def build_search_space(network, at_intersection=False):
    index = network.index
    if at_intersection:
        pool = sorted(range(1, network.n_nodes))
        fixed = ()
    else:
        pool = sorted(index.n_hat)
        fixed = tuple(v for v in index.diamond if v != SOURCE_ID)
    k = min(3, len(pool))
    members = tuple(chosen + fixed for chosen in itertools.combinations(pool, k))
    return SearchSpace(
        t_members=members,
        walks=walk_orders(index),
        reach=reach_masks(network.dist),
        n_nodes=network.n_nodes,
    )


@dataclass
class Incumbent:
    cost: float = float("inf")
    key: tuple = None
    ranges: list = None

    def offer(self, value, key, ranges):
        if value < self.cost or (value == self.cost and (self.key is None or key < self.key)):
            self.cost, self.key, self.ranges = value, key, list(ranges)
            return True
        return False

    def merge(self, other):
        if other.ranges is not None:
            self.offer(other.cost, other.key, other.ranges)


@dataclass
class SearchResult:
    assignment: RangeAssignment
    cost: float
    key: tuple
    steps: int
    leaves: int
    runtime: float
    t_count: int


class _Walker:
    """Depth-first evaluation of every (c, p) for one member t of T."""

    def __init__(self, network, space, alpha, guard, merge_equivalent, prune, bound):
        self.dist = network.dist
        self.powered = network.dist ** alpha
        self.hops = network.hops
        self.hop_pow = network.hops ** alpha
        self.next_of = network.index.next_of
        self.reach = space.reach
        self.n = network.n_nodes
        self.all_tagged = (1 << self.n) - 1
        self.guard = guard
        self.merge = merge_equivalent
        self.prune = prune
        self.bound = bound
        self.leaves = 0
        # Candidate c order per node: increasing range (merging keeps the smallest)
        ids = np.arange(self.n)
        if merge_equivalent:
            self.c_order = [tuple(int(c) for c in np.lexsort((ids, self.dist[v]))) for v in range(self.n)]
        else:
            self.c_order = [tuple(range(self.n))] * self.n

    def run(self, t_index, t_member, walks, best):
        self.best = best
        self.t_index = t_index
        self.special = {node: j + 1 for j, node in enumerate(t_member)}
        self.choice = [SOURCE_ID] * (1 + len(t_member))
        self.ranges = [0.0] * self.n
        for p_index, order in walks:
            self.p_index = p_index
            self._branch(SOURCE_ID, 0, 1 << SOURCE_ID, 0.0, order, 0, ())

    def _limit(self):
        if not self.prune:
            return float("inf")
        return min(self.best.cost, self.bound)

    def _branch(self, node, slot, tagged, spent, order, pos, deferred):
        """Try every range of a special node (or the source), then keep walking."""
        masks = self.reach[node]
        row = self.powered[node]
        tried = set() if self.merge else None
        self.guard.spend(len(self.c_order[node]))
        for c in self.c_order[node]:
            after = tagged | masks[c]
            if tried is not None:
                if after in tried:
                    continue
                tried.add(after)
            total = spent + row[c]
            if total > self._limit():
                if self.merge:
                    break      # candidates are sorted by range
                continue
            self.choice[slot] = c
            self.ranges[node] = self.dist[node, c]
            self._walk(order, pos, deferred, after, total)

    def _walk(self, order, pos, deferred, tagged, spent):
        """
        Nodes not yet tagged when the walk reaches them are deferred; once the
        order is exhausted the deferred nodes are walked again, in the same
        order, as long as at least one of them has been tagged meanwhile.
        """
        next_of, reach, hops, hop_pow = self.next_of, self.reach, self.hops, self.hop_pow
        limit = self._limit()
        while True:
            length = len(order)
            start = pos
            while pos < length:
                n = order[pos]
                if not (tagged >> n) & 1:
                    deferred += (n,)
                    pos += 1
                    continue
                slot = self.special.get(n)
                if slot is not None:
                    self.guard.spend(pos - start + 1)
                    self._branch(n, slot, tagged, spent, order, pos + 1, deferred)
                    return
                nn = next_of[n]
                if nn is not None and not (tagged >> nn) & 1:
                    self.ranges[n] = hops[n]
                    tagged |= reach[n][nn]
                    spent += hop_pow[n]
                    if spent > limit:
                        self.guard.spend(pos - start + 1)
                        return
                else:
                    self.ranges[n] = 0.0
                pos += 1
            self.guard.spend(pos - start + 1)
            if not deferred or not any((tagged >> n) & 1 for n in deferred):
                break
            order, pos, deferred = deferred, 0, ()
        self.leaves += 1
        if tagged != self.all_tagged:
            return
        if spent <= self.best.cost:
            key = (self.t_index, tuple(self.choice), self.p_index)
            self.best.offer(spent, key, self.ranges)


def _search_range(network, alpha, at_intersection, t_lo, t_hi, budget, merge_equivalent, prune, bound,
                  incumbent=None):
    """Searches T[t_lo:t_hi]. Module level so worker processes can run it."""
    space = build_search_space(network, at_intersection)
    guard = BudgetGuard(budget, label=f"optimal search T[{t_lo}:{t_hi}]")
    best = Incumbent()
    if incumbent is not None:
        best.merge(incumbent)
    walker = _Walker(network, space, alpha, guard, merge_equivalent, prune, bound)
    t_index = t_lo
    try:
        for t_index in range(t_lo, t_hi):
            walker.run(t_index, space.t_members[t_index], space.walks, best)
        t_index = t_hi
    except BudgetExceeded as e:
        e.checkpoint = _checkpoint(t_index, best)
        return best, guard.spent, walker.leaves, e
    return best, guard.spent, walker.leaves, None


def _checkpoint(next_t, best):
    return {
        "next_t": int(next_t),
        "best_cost": None if best.ranges is None else float(best.cost),
        "best_key": None if best.key is None else [best.key[0], list(best.key[1]), best.key[2]],
        "best_ranges": best.ranges,
    }


def _incumbent_from(checkpoint):
    inc = Incumbent()
    if checkpoint and checkpoint.get("best_ranges") is not None:
        k = checkpoint["best_key"]
        inc.offer(checkpoint["best_cost"], (k[0], tuple(k[1]), k[2]), checkpoint["best_ranges"])
    return inc


def _chunks(lo, hi, parts):
    size = hi - lo
    parts = max(1, min(parts, size))
    base, extra = divmod(size, parts)
    out, start = [], lo
    for k in range(parts):
        stop = start + base + (1 if k < extra else 0)
        out.append((start, stop))
        start = stop
    return out


def search_optimal(network, alpha=2.0, *, at_intersection=False, budget=None, prune=False,
                   workers=1, resume=None, merge_equivalent=True, upper_bound=None):
    """
    Minimum-cost assignment delivering to every node.

    prune: skip branches whose partial cost already exceeds the incumbent (or
    `upper_bound`, by default the near-optimal cost). Results are identical
    with and without it.
    workers > 1 partitions T across processes; the merge keeps the smallest
    (cost, (t, c, p)) so the result matches a sequential run.
    resume: checkpoint dict from a previous BudgetExceeded.
    """
    started = time.perf_counter()
    mode = "source-at-intersection" if at_intersection else "general"
    if network.n_nodes == 1:
        return SearchResult(RangeAssignment.zeros(1, alpha), 0.0, (), 0, 0, 0.0, 0)

    space = build_search_space(network, at_intersection)
    t_count = len(space.t_members)
    bound = float("inf")
    if prune:
        if upper_bound is None:
            from services.engine_vyuha.near_optimal import near_optimal_assignment
            upper_bound = cost(near_optimal_assignment(network, alpha))
        bound = upper_bound * (1.0 + 1e-9) + 1e-12

    first_t = int(resume["next_t"]) if resume else 0
    best = _incumbent_from(resume)
    guard = BudgetGuard(budget, label=f"optimal search ({mode})")
    logging.info(
        f"optimal search ({mode}): N={network.n_nodes}, |T|={t_count}, walks={len(space.walks)}, "
        f"start t={first_t}, prune={prune}, workers={workers}"
    )

    steps = leaves = 0
    failure = None
    if workers <= 1 or t_count - first_t <= 1:
        found, steps, leaves, failure = _search_range(
            network, alpha, at_intersection, first_t, t_count, guard.limit,
            merge_equivalent, prune, bound, incumbent=best,
        )
        best = found
    else:
        ranges = _chunks(first_t, t_count, workers)
        limits = guard.split(len(ranges))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(_search_range, network, alpha, at_intersection, lo, hi, lim,
                            merge_equivalent, prune, bound)
                for (lo, hi), lim in zip(ranges, limits)
            ]
            failures = []
            for fut in futures:
                found, s, lv, err = fut.result()
                best.merge(found)
                steps += s
                leaves += lv
                if err is not None:
                    failures.append(err)
        if failures:
            failure = min(failures, key=lambda e: e.checkpoint["next_t"])
            failure.checkpoint = _checkpoint(failure.checkpoint["next_t"], best)

    if failure is not None:
        failure.steps = steps
        raise failure

    runtime = time.perf_counter() - started
    assignment = RangeAssignment(np.array(best.ranges), alpha)
    logging.info(
        f"optimal search ({mode}) done: cost={best.cost:.6g}, steps={steps:,}, leaves={leaves:,}, "
        f"{runtime:.2f}s"
    )
    return SearchResult(assignment, best.cost, best.key, steps, leaves, runtime, t_count)


def optimal_assignment(network, alpha=2.0, **options):
    return search_optimal(network, alpha, **options).assignment


def optimal_assignment_source_at_intersection(network, alpha=2.0, **options):
    if not network.source_at_intersection:
        raise SourceNotAtIntersection(
            f"source sits {network.source_offset:g} away from the intersection"
        )
    return search_optimal(network, alpha, at_intersection=True, **options).assignment
