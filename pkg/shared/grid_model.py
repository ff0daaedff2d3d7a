import math
import logging
from collections import deque
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from shared.cross_model import pairwise_distances
from shared.errors import DisconnectedGrid, EmptySegment, InfeasibleN, InvalidNetwork

# Grids of axis-aligned line-segments. A node belongs to exactly one segment;
# a node sitting on several (shared endpoint, crossing point) is assigned to the
# lowest segment id that contains it.

ON_SEGMENT_EPS = 1e-9


@dataclass(frozen=True)
class GridSegment:
    x1: float
    y1: float
    x2: float
    y2: float

    def __post_init__(self):
        coords = (self.x1, self.y1, self.x2, self.y2)
        if not all(math.isfinite(c) for c in coords):
            raise InvalidNetwork(f"segment {coords} has a non-finite endpoint")
        if (self.x1 != self.x2) == (self.y1 != self.y2):
            raise InvalidNetwork(f"segment {coords} is neither horizontal nor vertical (or is a point)")
        # Normalise so the first endpoint has the smaller coordinate
        if (self.x1, self.y1) > (self.x2, self.y2):
            object.__setattr__(self, "x1", coords[2])
            object.__setattr__(self, "y1", coords[3])
            object.__setattr__(self, "x2", coords[0])
            object.__setattr__(self, "y2", coords[1])

    @property
    def horizontal(self):
        return self.y1 == self.y2

    @property
    def length(self):
        return (self.x2 - self.x1) + (self.y2 - self.y1)

    def along(self, x, y):
        """Coordinate of a point measured along the segment's own axis."""
        return x if self.horizontal else y

    def contains(self, x, y, eps=ON_SEGMENT_EPS):
        if self.horizontal:
            return abs(y - self.y1) <= eps and self.x1 - eps <= x <= self.x2 + eps
        return abs(x - self.x1) <= eps and self.y1 - eps <= y <= self.y2 + eps

    def as_list(self):
        return [self.x1, self.y1, self.x2, self.y2]


@dataclass(frozen=True)
class Intersection:
    x: float
    y: float
    segments: tuple


def _crossing(h, v):
    """Point shared by a horizontal and a vertical segment, or None."""
    if h.x1 <= v.x1 <= h.x2 and v.y1 <= h.y1 <= v.y2:
        return (v.x1, h.y1)
    return None


@dataclass(frozen=True, eq=False)
class GridNetwork:
    segments: tuple
    points: np.ndarray
    node_segment: tuple
    source_id: int = 0

    def __post_init__(self):
        segs = tuple(s if isinstance(s, GridSegment) else GridSegment(*s) for s in self.segments)
        object.__setattr__(self, "segments", segs)
        pts = np.array(self.points, dtype=float).reshape(-1, 2)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "node_segment", self._assign_segments(tuple(int(s) for s in self.node_segment)))
        self._validate()

    def _assign_segments(self, declared):
        if len(declared) != self.points.shape[0]:
            raise InvalidNetwork(f"{len(declared)} segment labels for {self.points.shape[0]} nodes")
        out = []
        for node, seg in enumerate(declared):
            if not 0 <= seg < len(self.segments):
                raise InvalidNetwork(f"node {node} refers to unknown segment {seg}")
            x, y = self.points[node]
            if not self.segments[seg].contains(x, y):
                raise InvalidNetwork(f"node {node} at ({x}, {y}) is not on segment {seg}")
            out.append(next(k for k, s in enumerate(self.segments) if s.contains(x, y)))
        return tuple(out)

    def _validate(self):
        if not self.segments:
            raise InvalidNetwork("a grid needs at least one segment")
        n = self.points.shape[0]
        if n < 1:
            raise InvalidNetwork("a grid needs at least the source node")
        if not 0 <= self.source_id < n:
            raise InvalidNetwork(f"source id {self.source_id} out of range")
        if not np.all(np.isfinite(self.points)):
            raise InvalidNetwork("coordinates must be finite")
        if n > 1:
            off = self.dist.copy()
            np.fill_diagonal(off, np.inf)
            if off.min() <= 0.0:
                i, j = np.unravel_index(np.argmin(off), off.shape)
                raise InvalidNetwork(f"nodes {i} and {j} share a position")
        counts = np.bincount(np.array(self.node_segment), minlength=len(self.segments))
        empty = np.flatnonzero(counts == 0)
        if empty.size:
            raise EmptySegment(f"segment(s) {empty.tolist()} carry no node; every segment needs one")
        if not self._segments_connected():
            raise DisconnectedGrid("the segments do not form a single connected structure")

    def _segments_connected(self):
        m = len(self.segments)
        adj = [set() for _ in range(m)]
        for x in self.intersections:
            for a in x.segments:
                adj[a].update(b for b in x.segments if b != a)
        seen = {0}
        queue = deque([0])
        while queue:
            a = queue.popleft()
            for b in adj[a] - seen:
                seen.add(b)
                queue.append(b)
        return len(seen) == m

    @classmethod
    def from_cross(cls, network):
        """The two-segment grid occupying the same positions as a cross (ids kept)."""
        extent = max(network.arm_half_length, float(np.abs(network.points).max()))
        segments = (GridSegment(-extent, 0.0, extent, 0.0), GridSegment(0.0, -extent, 0.0, extent))
        labels = tuple(0 if y == 0.0 else 1 for _, y in network.points)
        return cls(segments, network.points, labels, source_id=network.source_id)

    # --- derived structure ---

    @property
    def n_nodes(self):
        return self.points.shape[0]

    @cached_property
    def dist(self):
        d = pairwise_distances(self.points)
        d.setflags(write=False)
        return d

    @cached_property
    def intersections(self):
        found = {}
        for a, sa in enumerate(self.segments):
            if not sa.horizontal:
                continue
            for b, sb in enumerate(self.segments):
                if sb.horizontal:
                    continue
                p = _crossing(sa, sb)
                if p is not None:
                    found.setdefault(p, set()).update((a, b))
        # Collinear segments touching at a crossing share that intersection
        out = []
        for (x, y), segs in sorted(found.items()):
            segs.update(k for k, s in enumerate(self.segments) if s.contains(x, y, eps=0.0))
            out.append(Intersection(x, y, tuple(sorted(segs))))
        return tuple(out)

    @cached_property
    def chains(self):
        """Node ids of every segment, ordered along the segment."""
        per = [[] for _ in self.segments]
        for node, seg in enumerate(self.node_segment):
            per[seg].append(node)
        out = []
        for seg, nodes in zip(self.segments, per):
            out.append(tuple(sorted(nodes, key=lambda v: (seg.along(*self.points[v]), v))))
        return tuple(out)

    def _stops(self, seg_id):
        """Along-coordinates of the intersections on a segment."""
        seg = self.segments[seg_id]
        return sorted(seg.along(x.x, x.y) for x in self.intersections if seg_id in x.segments)

    def intersection_between(self, seg_id, a, b):
        seg = self.segments[seg_id]
        lo, hi = sorted((seg.along(*self.points[a]), seg.along(*self.points[b])))
        return any(lo < t < hi for t in self._stops(seg_id))

    def arm_nodes(self, x_id):
        """
        Diamond vertices of an intersection: nodes sitting exactly on it, then
        the nearest node on each side of every segment through it (left, right
        for horizontal segments; up, down for vertical ones).
        """
        x = self.intersections[x_id]
        here = [v for v in range(self.n_nodes)
                if self.points[v, 0] == x.x and self.points[v, 1] == x.y]
        arms = list(here)
        ordered = sorted(x.segments, key=lambda k: (not self.segments[k].horizontal, k))
        for seg_id in ordered:
            seg = self.segments[seg_id]
            t0 = seg.along(x.x, x.y)
            chain = self.chains[seg_id]
            below = [v for v in chain if seg.along(*self.points[v]) < t0]
            above = [v for v in chain if seg.along(*self.points[v]) > t0]
            picks = (below[-1:] + above[:1]) if seg.horizontal else (above[:1] + below[-1:])
            for v in picks:
                if v not in arms:
                    arms.append(v)
        return arms

    def intersection_order(self):
        """
        Intersections in breadth-first order starting from the source's segment
        (nearest to the source first); neighbours are consecutive along a segment.
        """
        count = len(self.intersections)
        if count == 0:
            return []
        by_segment = {}
        for k, x in enumerate(self.intersections):
            for s in x.segments:
                by_segment.setdefault(s, []).append(k)
        adj = [set() for _ in range(count)]
        for s, members in by_segment.items():
            seg = self.segments[s]
            members.sort(key=lambda k: seg.along(self.intersections[k].x, self.intersections[k].y))
            for a, b in zip(members, members[1:]):
                adj[a].add(b)
                adj[b].add(a)

        sx, sy = self.points[self.source_id]
        start_seg = self.node_segment[self.source_id]
        start = sorted(by_segment.get(start_seg, []),
                       key=lambda k: (math.hypot(self.intersections[k].x - sx, self.intersections[k].y - sy), k))
        order, seen = [], set()
        queue = deque()
        for k in start:
            if k not in seen:
                seen.add(k)
                queue.append(k)
        while queue:
            k = queue.popleft()
            order.append(k)
            for j in sorted(adj[k]):
                if j not in seen:
                    seen.add(j)
                    queue.append(j)
        return order


def generate_square_grid(k, side, n_nodes, seed):
    """
    k x k square grid of cells with side `side`: k+1 horizontal and k+1 vertical
    full-length lines (so k=1 gives 4 segments, 4 intersections). One node is
    forced onto every segment, the rest fall uniformly over the total length,
    and the source is a uniformly chosen node.
    """
    if k < 1:
        raise InfeasibleN(f"k must be >= 1, got {k}")
    if not side > 0:
        raise InfeasibleN(f"side must be > 0, got {side}")
    extent = k * side
    segments = [GridSegment(0.0, i * side, extent, i * side) for i in range(k + 1)]
    segments += [GridSegment(i * side, 0.0, i * side, extent) for i in range(k + 1)]
    n_segments = len(segments)
    if n_nodes < n_segments:
        raise InfeasibleN(f"N={n_nodes} is below the segment count {n_segments}")

    rng = np.random.default_rng(seed)
    attempt = 0
    while True:
        attempt += 1
        on = np.concatenate([np.arange(n_segments), rng.integers(0, n_segments, n_nodes - n_segments)])
        t = rng.random(n_nodes) * extent
        pts = np.empty((n_nodes, 2))
        for v, (seg_id, pos) in enumerate(zip(on, t)):
            seg = segments[seg_id]
            pts[v] = (pos, seg.y1) if seg.horizontal else (seg.x1, pos)
        source = int(rng.integers(0, n_nodes))
        try:
            return GridNetwork(tuple(segments), pts, tuple(int(s) for s in on), source_id=source)
        except InvalidNetwork as e:
            # Only coincident draws land here (probability zero); redraw
            logging.warning(f"grid draw {attempt} rejected ({e}); resampling")
            if attempt >= 100:
                raise
