import math
from enum import Enum
from functools import cached_property
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.spatial.distance import cdist

from shared.errors import InvalidNetwork, TiedWeights, ValidationError
from shared.settings import AXIS_SNAP_EPS, COVER_ABS_EPS, COVER_REL_EPS, TIE_EPS

# Canonical frame: intersection at the origin, source at (-d, 0) with d >= 0,
# Segment IV on the positive y half-line. The source always has id 0.

SOURCE_ID = 0


class SegmentLabel(str, Enum):
    I = "I"
    II = "II"
    III = "III"
    IV = "IV"
    V = "V"


SEGMENTS = tuple(SegmentLabel)
# Half-lines that start at the intersection and point away from the source
FAR_SEGMENTS = (SegmentLabel.III, SegmentLabel.IV, SegmentLabel.V)


@dataclass(frozen=True)
class Point2:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise InvalidNetwork(f"non-finite coordinate ({self.x}, {self.y})")

    def as_tuple(self):
        return (self.x, self.y)


def covers(distance, range_):
    """Disc coverage with the round-off tolerance. Works on scalars and arrays."""
    return distance <= range_ * (1.0 + COVER_REL_EPS) + COVER_ABS_EPS


def pairwise_distances(points):
    return cdist(points, points)


def find_tied_distances(dist, eps=TIE_EPS, limit=5):
    """
    Returns up to `limit` pairs of node pairs whose distances differ by at most eps.
    An empty list means every pairwise distance is distinct.
    """
    n = dist.shape[0]
    if n < 3:
        return []
    iu, ju = np.triu_indices(n, k=1)
    flat = dist[iu, ju]
    order = np.argsort(flat, kind="stable")
    gaps = np.diff(flat[order])
    ties = []
    for k in np.flatnonzero(gaps <= eps)[:limit]:
        a, b = order[k], order[k + 1]
        ties.append(((int(iu[a]), int(ju[a])), (int(iu[b]), int(ju[b]))))
    return ties


def canonicalize(source, nodes, intersection=(0.0, 0.0)):
    """
    Rigidly maps an axis-aligned cross onto the canonical frame.

    The cross is translated so the intersection is the origin, then rotated by a
    multiple of 90 degrees so the source lies on the non-positive x half-line.
    Coordinates within AXIS_SNAP_EPS of an axis are snapped onto it.

    Returns (source_xy, nodes_xy) as numpy arrays.
    """
    origin = np.asarray(intersection, dtype=float)
    pts = np.vstack([np.asarray(source, dtype=float).reshape(1, 2),
                     np.asarray(nodes, dtype=float).reshape(-1, 2)]) - origin
    pts[np.abs(pts) <= AXIS_SNAP_EPS] = 0.0

    sx, sy = pts[0]
    if sy == 0.0 and sx > 0.0:
        pts = -pts                                   # 180 degrees
    elif sx == 0.0 and sy > 0.0:
        pts = np.column_stack([-pts[:, 1], pts[:, 0]])   # +90: (0, b) -> (-b, 0)
    elif sx == 0.0 and sy < 0.0:
        pts = np.column_stack([pts[:, 1], -pts[:, 0]])   # -90: (0, b) -> (b, 0)
    elif sx != 0.0 and sy != 0.0:
        raise InvalidNetwork(f"source ({sx}, {sy}) is not on either line of the cross")
    # -0.0 would leak into files as "-0.0"
    pts = pts + 0.0
    return pts[0], pts[1:]


@dataclass(frozen=True, eq=False)
class CrossNetwork:
    """
    Nodes on two perpendicular lines, in the canonical frame.

    points[0] is the source; the remaining rows are the other nodes, id = row.
    Immutable after construction (the coordinate array is made read-only), so
    instances can be shared with worker processes.
    """
    points: np.ndarray
    arm_half_length: float = 1.0

    def __post_init__(self):
        pts = np.array(self.points, dtype=float).reshape(-1, 2)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        self._validate()

    @classmethod
    def from_points(cls, source, nodes, arm_half_length=1.0, intersection=(0.0, 0.0),
                    check_ties=False):
        src, rest = canonicalize(source, nodes, intersection)
        network = cls(np.vstack([src.reshape(1, 2), rest]), arm_half_length=arm_half_length)
        if check_ties:
            check_distinct_distances(network)
        return network

    def _validate(self):
        pts = self.points
        if pts.shape[0] < 1:
            raise InvalidNetwork("a cross network needs at least the source node")
        if not np.all(np.isfinite(pts)):
            raise InvalidNetwork("coordinates must be finite")
        if not (self.arm_half_length > 0 and math.isfinite(self.arm_half_length)):
            raise InvalidNetwork(f"arm_half_length must be > 0, got {self.arm_half_length}")
        sx, sy = pts[0]
        if sy != 0.0 or sx > 0.0:
            raise InvalidNetwork(f"source ({sx}, {sy}) is not on the non-positive x half-line")
        off_axis = np.flatnonzero((pts[:, 0] != 0.0) & (pts[:, 1] != 0.0))
        if off_axis.size:
            bad = int(off_axis[0])
            raise InvalidNetwork(f"node {bad} at {tuple(pts[bad])} is off both lines")
        at_origin = np.flatnonzero((pts[1:, 0] == 0.0) & (pts[1:, 1] == 0.0))
        if at_origin.size:
            raise InvalidNetwork(f"node {int(at_origin[0]) + 1} sits exactly on the intersection")
        if pts.shape[0] > 1:
            off = self.dist.copy()
            np.fill_diagonal(off, np.inf)
            if off.min() <= 0.0:
                i, j = np.unravel_index(np.argmin(off), off.shape)
                raise InvalidNetwork(f"nodes {i} and {j} share the position {tuple(pts[i])}")

    # --- basic accessors ---

    @property
    def n_nodes(self):
        return self.points.shape[0]

    @property
    def source_id(self):
        return SOURCE_ID

    @property
    def source_offset(self):
        """d: distance from the source to the intersection."""
        return float(-self.points[0, 0])

    @property
    def source_at_intersection(self):
        return self.points[0, 0] == 0.0

    def point(self, node):
        return Point2(float(self.points[node, 0]), float(self.points[node, 1]))

    def node_ids(self):
        return range(self.n_nodes)

    @cached_property
    def dist(self):
        d = pairwise_distances(self.points)
        d.setflags(write=False)
        return d

    @cached_property
    def to_intersection(self):
        """Distance of every node to the intersection (h)."""
        h = np.hypot(self.points[:, 0], self.points[:, 1])
        h.setflags(write=False)
        return h

    @cached_property
    def index(self):
        return build_segment_index(self)

    @cached_property
    def hops(self):
        """M(a) for every node; 0 for the source and for last-on-segment nodes."""
        m = np.zeros(self.n_nodes)
        for node, nxt in enumerate(self.index.next_of):
            if nxt is not None:
                m[node] = self.dist[node, nxt]
        m.setflags(write=False)
        return m


def check_distinct_distances(network, eps=TIE_EPS):
    """Raises TiedWeights when two pairwise distances tie within eps."""
    ties = find_tied_distances(network.dist, eps=eps)
    if ties:
        (a, b), (c, e) = ties[0]
        raise TiedWeights(
            f"pairwise distances d({a},{b}) and d({c},{e}) tie within {eps:g}; "
            f"{len(ties)} tie(s) reported",
            pairs=ties,
        )


def classify_segment(network, node):
    if node == SOURCE_ID:
        raise ValidationError("the source is not on any segment")
    x, y = network.points[node]
    if y == 0.0:
        if x < -network.source_offset:
            return SegmentLabel.I
        if x < 0.0:
            return SegmentLabel.II
        return SegmentLabel.III
    return SegmentLabel.IV if y > 0.0 else SegmentLabel.V


@dataclass(frozen=True)
class SegmentIndex:
    """
    Per-segment node order (increasing distance from the source) and the
    special node sets derived from it.
    """
    segments: dict
    label_of: tuple
    next_of: tuple
    n_hat: frozenset
    diamond: tuple

    def nodes_on(self, label):
        return self.segments[SegmentLabel(label)]

    def first_of(self, label) -> Optional[int]:
        nodes = self.nodes_on(label)
        return nodes[0] if nodes else None

    def last_of(self, label) -> Optional[int]:
        nodes = self.nodes_on(label)
        return nodes[-1] if nodes else None

    def segment_of(self, node):
        return self.label_of[node]

    def is_empty(self, label):
        return not self.nodes_on(label)

    @property
    def diamond_root(self):
        return self.diamond[0]


def build_segment_index(network):
    n = network.n_nodes
    from_source = network.dist[SOURCE_ID]
    buckets = {label: [] for label in SEGMENTS}
    labels = [None] * n
    for node in range(1, n):
        label = classify_segment(network, node)
        labels[node] = label
        buckets[label].append(node)

    segments = {}
    next_of = [None] * n
    for label, nodes in buckets.items():
        ordered = tuple(sorted(nodes, key=lambda a: (from_source[a], a)))
        segments[label] = ordered
        for a, b in zip(ordered, ordered[1:]):
            next_of[a] = b

    def first(label):
        return segments[label][0] if segments[label] else None

    # s takes over l_II's role when Segment II is empty
    root = segments[SegmentLabel.II][-1] if segments[SegmentLabel.II] else SOURCE_ID
    diamond = tuple([root] + [f for f in (first(lbl) for lbl in FAR_SEGMENTS) if f is not None])
    n_hat = frozenset(range(n)) - {SOURCE_ID} - set(diamond)

    return SegmentIndex(
        segments=segments,
        label_of=tuple(labels),
        next_of=tuple(next_of),
        n_hat=n_hat,
        diamond=diamond,
    )


def next_adjacent(network, node):
    """First node after `node` on its segment, or None if it is the last one."""
    if node == SOURCE_ID:
        raise ValidationError("the source has no next adjacent neighbor")
    return network.index.next_of[node]


def hop_distance(network, node):
    """M(node): distance to the next adjacent neighbor, 0 for the last node."""
    if node == SOURCE_ID:
        raise ValidationError("M is undefined for the source")
    return float(network.hops[node])


def coverage_extents(network, node, range_):
    """
    How far a disc of radius `range_` around `node` reaches along the cross.

    With h the distance from the node to the intersection:
      cov_same = range                          (along its own line)
      cov_perp = sqrt(max(0, range^2 - h^2))    (from the intersection, along the other line)
      cov_oppo = max(0, range - h)              (past the intersection, along its own line)
    cov_same >= cov_perp >= cov_oppo always holds.
    """
    if range_ < 0:
        raise ValidationError(f"range must be >= 0, got {range_}")
    h = float(network.to_intersection[node])
    return coverage_extents_at(h, range_)


def coverage_extents_at(h, range_):
    same = float(range_)
    perp = math.sqrt(max(0.0, same * same - h * h))
    oppo = max(0.0, same - h)
    # sqrt round-off can push perp a hair past same when h is tiny
    perp = min(perp, same)
    oppo = min(oppo, perp)
    return same, perp, oppo


def receivers(network, node, range_):
    """All nodes u != node within `range_` of node (tolerant disc test)."""
    if range_ < 0:
        raise ValidationError(f"range must be >= 0, got {range_}")
    if range_ == 0:
        return frozenset()
    hit = covers(network.dist[node], range_)
    hit[node] = False
    return frozenset(int(u) for u in np.flatnonzero(hit))


def split_receivers(network, node, range_):
    """
    Splits receivers(node, range) into (downstream, elsewhere): downstream are
    the receivers after `node` on its own segment; elsewhere is everything else.
    """
    got = receivers(network, node, range_)
    if node == SOURCE_ID:
        return frozenset(), got
    index = network.index
    label = index.label_of[node]
    seq = index.nodes_on(label)
    after = set(seq[seq.index(node) + 1:])
    downstream = frozenset(u for u in got if u in after)
    return downstream, got - downstream


def describe(network):
    """Short per-segment summary used in log lines and CLI reports."""
    index = network.index
    counts = {label.value: len(index.nodes_on(label)) for label in SEGMENTS}
    return {
        "n_nodes": network.n_nodes,
        "source_offset": network.source_offset,
        "segments": counts,
        "diamond": list(index.diamond),
    }

