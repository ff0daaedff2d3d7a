import math
from dataclasses import dataclass, field

import numpy as np

from shared.cross_model import covers
from shared.errors import ValidationError
from shared.settings import COVER_ABS_EPS, COVER_REL_EPS

ALPHA_MIN = 2.0
ALPHA_MAX = 6.0
DEFAULT_ALPHA = 2.0


@dataclass(frozen=True, eq=False)
class RangeAssignment:
    """Transmission radius per node id, plus the path-loss exponent used for cost."""
    ranges: np.ndarray
    alpha: float = DEFAULT_ALPHA

    def __post_init__(self):
        r = np.array(self.ranges, dtype=float).reshape(-1)
        if not np.all(np.isfinite(r)):
            raise ValidationError("ranges must be finite")
        if np.any(r < 0):
            raise ValidationError(f"ranges must be >= 0 (node {int(np.argmin(r))} is {r.min()})")
        if not (ALPHA_MIN <= self.alpha <= ALPHA_MAX):
            raise ValidationError(f"alpha must lie in [{ALPHA_MIN}, {ALPHA_MAX}], got {self.alpha}")
        r.setflags(write=False)
        object.__setattr__(self, "ranges", r)
        object.__setattr__(self, "alpha", float(self.alpha))

    @classmethod
    def zeros(cls, n_nodes, alpha=DEFAULT_ALPHA):
        return cls(np.zeros(n_nodes), alpha)

    def __len__(self):
        return self.ranges.shape[0]

    def __getitem__(self, node):
        return float(self.ranges[node])

    def with_range(self, node, value):
        r = self.ranges.copy()
        r[node] = value
        return RangeAssignment(r, self.alpha)

    def as_list(self):
        return [float(v) for v in self.ranges]

    def check_fits(self, network):
        if len(self) != network.n_nodes:
            raise ValidationError(
                f"assignment has {len(self)} ranges but the network has {network.n_nodes} nodes"
            )
        return self


def cost(assignment):
    """Total energy: sum over nodes of R(k)^alpha."""
    return float(np.sum(assignment.ranges ** assignment.alpha))


@dataclass(frozen=True)
class BroadcastOutcome:
    reached: frozenset
    hop_parentage: dict = field(default_factory=dict)
    rounds: int = 0

    def delivered_to(self, n_nodes):
        return len(self.reached) == n_nodes


def _closure(dist, ranges, source):
    """Reached flags of the fixpoint propagation, no bookkeeping."""
    reached = np.zeros(dist.shape[0], dtype=bool)
    reached[source] = True
    frontier = np.array([source])
    while frontier.size:
        hit = covers(dist[frontier], ranges[frontier][:, None]).any(axis=0)
        new = hit & ~reached
        reached |= new
        frontier = np.flatnonzero(new)
    return reached


def simulate_broadcast(network, assignment):
    """
    Fixpoint propagation from the source.

    Each round, every node reached in the previous round transmits once with its
    range. Transmitters are processed in increasing id order, so a node's
    hop parent is the lowest-id transmitter of the round that first covered it.
    """
    assignment.check_fits(network)
    dist = network.dist
    ranges = assignment.ranges
    src = network.source_id

    reached = np.zeros(network.n_nodes, dtype=bool)
    reached[src] = True
    parents = {}
    rounds = 0
    frontier = np.array([src])
    while frontier.size:
        hit = covers(dist[frontier], ranges[frontier][:, None])
        new = hit.any(axis=0) & ~reached
        if not new.any():
            break
        rounds += 1
        fresh = np.flatnonzero(new)
        first_hit = np.argmax(hit[:, fresh], axis=0)
        for v, k in zip(fresh, first_hit):
            parents[int(v)] = int(frontier[k])
        reached |= new
        frontier = fresh

    return BroadcastOutcome(
        reached=frozenset(int(v) for v in np.flatnonzero(reached)),
        hop_parentage=parents,
        rounds=rounds,
    )


def reaches_all(network, assignment):
    assignment.check_fits(network)
    return bool(_closure(network.dist, assignment.ranges, network.source_id).all())


def depends_on(network, assignment, b, a):
    """
    b <-R a: b only receives through a path that contains a. Checked by
    silencing a (R(a) = 0) and re-running the propagation.
    """
    if a == b:
        raise ValidationError("depends_on needs two distinct nodes")
    if b == network.source_id:
        return False
    silenced = assignment.ranges.copy()
    silenced[a] = 0.0
    return not bool(_closure(network.dist, silenced, network.source_id)[b])


def intended_receivers(network, assignment, node):
    """Nodes that cannot receive at all unless `node` transmits."""
    base = _closure(network.dist, assignment.ranges, network.source_id)
    silenced = assignment.ranges.copy()
    silenced[node] = 0.0
    after = _closure(network.dist, silenced, network.source_id)
    lost = base & ~after
    lost[node] = False
    return frozenset(int(v) for v in np.flatnonzero(lost))


def _near(value, target):
    return abs(value - target) <= target * COVER_REL_EPS + COVER_ABS_EPS


@dataclass(frozen=True)
class RangeAudit:
    increased: frozenset
    shape_ok: bool


def increased_range_audit(network, assignment):
    """
    Nodes of N_hat transmitting past their next adjacent neighbor, and whether
    every other N_hat node transmits either nothing or exactly M.
    """
    assignment.check_fits(network)
    index = network.index
    hops = network.hops
    increased = set()
    shape_ok = True
    for a in sorted(index.n_hat):
        r, m = assignment.ranges[a], hops[a]
        if r > m * (1.0 + COVER_REL_EPS) + COVER_ABS_EPS:
            increased.add(a)
        elif not (_near(r, 0.0) or _near(r, m)):
            shape_ok = False
    return RangeAudit(increased=frozenset(increased), shape_ok=shape_ok)


def prefix_property_holds(network, outcome):
    """
    Every node before a reached node on the same segment is reached too.
    Only meaningful for cross networks.
    """
    index = network.index
    for label, nodes in index.segments.items():
        seen_gap = False
        for node in nodes:
            if node not in outcome.reached:
                seen_gap = True
            elif seen_gap:
                return False
    return True


def superadditivity_holds(parts, alpha):
    """(sum a_k)^alpha >= sum a_k^alpha for nonnegative parts and alpha >= 1."""
    parts = np.asarray(parts, dtype=float)
    total = float(parts.sum()) ** alpha
    pieces = float(np.sum(parts ** alpha))
    return total >= pieces * (1.0 - 1e-12)


def star_cost(network, alpha=DEFAULT_ALPHA):
    """Cost of the source reaching everybody in one hop."""
    far = float(network.dist[network.source_id].max()) if network.n_nodes > 1 else 0.0
    return math.pow(far, alpha)
