import logging

import numpy as np

from shared.assignment_core import RangeAssignment, _closure
from shared.cross_model import FAR_SEGMENTS, SOURCE_ID, SegmentLabel, covers
from shared.errors import PlannerInvariantError
from services.engine_vyuha.optimal_search import PERMUTATIONS


def _segment_sequence(index, perm):
    """
    Segments of a permutation that take part in the walk: nonempty ones, plus
    Segment II when it is empty (the source then plays l_II's part).
    """
    return tuple(
        label for label in perm
        if not index.is_empty(label) or label == SegmentLabel.II
    )


def _heard(network, node, range_):
    hit = covers(network.dist[node], range_)
    hit[node] = False
    return hit


def _run_sequence(network, seq):
    """One permutation of the heuristic. Returns (ranges, all_tagged) or None on abort."""
    index = network.index
    dist, hops, next_of = network.dist, network.hops, index.next_of
    to_x = network.to_intersection
    ranges = np.zeros(network.n_nodes)
    tagged = np.zeros(network.n_nodes, dtype=bool)

    first_real = next(label for label in seq if not index.is_empty(label))
    ranges[SOURCE_ID] = dist[SOURCE_ID, index.first_of(first_real)]
    tagged[SOURCE_ID] = True
    tagged |= _heard(network, SOURCE_ID, ranges[SOURCE_ID])

    for k, label in enumerate(seq):
        nodes = list(index.nodes_on(label))
        for node in nodes:
            if not tagged[node]:
                return None
            nn = next_of[node]
            if nn is not None and not tagged[nn]:
                ranges[node] = hops[node]
                tagged[nn] = True
            else:
                ranges[node] = 0.0

        if nodes:
            r, h = ranges[nodes], to_x[nodes]
            perp = np.sqrt(np.maximum(0.0, r * r - h * h))
            oppo = np.maximum(0.0, r - h)
            boundary = [nodes[int(np.argmax(perp))], nodes[int(np.argmax(oppo))]]
            if label in (SegmentLabel.I, SegmentLabel.II):
                # reach into the other side of the source's line
                boundary.append(nodes[int(np.argmax(r - dist[SOURCE_ID, nodes]))])
            for m in boundary:
                tagged |= _heard(network, m, ranges[m])

        upcoming = seq[k + 1] if k + 1 < len(seq) else None
        if label == SegmentLabel.I or upcoming not in FAR_SEGMENTS:
            continue
        target = index.first_of(upcoming)
        if tagged[target]:
            continue
        if label == SegmentLabel.II:
            sn = index.last_of(SegmentLabel.II) if nodes else SOURCE_ID
        else:
            sn = index.first_of(label)
        # never shrinks: an sn already covering the target would have tagged it
        ranges[sn] = max(ranges[sn], dist[sn, target])
        heard = _heard(network, sn, ranges[sn])
        tagged |= heard
        if label in FAR_SEGMENTS:
            for i in nodes:
                nxt = next_of[i]
                if i != sn and nxt is not None and heard[nxt]:
                    ranges[i] = 0.0

    return ranges, bool(tagged.all())


def near_optimal_assignment(network, alpha=2.0):
    """
    Linear-time heuristic: for each of the 120 segment orders, walk the
    segments hop by hop, let the boundary nodes of each finished segment tag
    what they reach on the others, and stretch one node when the next far
    segment's first node is still uncovered. Keeps the cheapest delivering
    order.
    """
    n = network.n_nodes
    if n == 1:
        return RangeAssignment.zeros(1, alpha)
    index = network.index
    best_cost, best = float("inf"), None
    done = set()
    for p_index, perm in enumerate(PERMUTATIONS):
        seq = _segment_sequence(index, perm)
        if seq in done:
            continue
        done.add(seq)
        outcome = _run_sequence(network, seq)
        if outcome is None or not outcome[1]:
            continue
        ranges = outcome[0]
        value = float(np.sum(ranges ** alpha))
        if value >= best_cost:
            continue
        if not _closure(network.dist, ranges, SOURCE_ID).all():
            logging.error(f"near-optimal: order {p_index} tagged every node but does not deliver")
            continue
        best_cost, best = value, ranges

    if best is None:
        raise PlannerInvariantError("near-optimal found no delivering segment order")
    logging.debug(f"near-optimal: {len(done)} distinct orders, cost={best_cost:.6g}")
    return RangeAssignment(best, alpha)
