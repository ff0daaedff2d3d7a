import logging

import numpy as np

from shared.assignment_core import DEFAULT_ALPHA, RangeAssignment, _closure
from shared.cross_model import check_distinct_distances
from shared.errors import InfeasibleInput
from services.engine_vyuha.spanning import max_child_edge, prim_parents

# Centralised baselines. All three work on any point set exposing
# `dist`, `source_id` and `n_nodes` (cross and grid networks alike).


def mst_assignment(network, alpha=DEFAULT_ALPHA, strict=True):
    """
    MST-based assignment: Euclidean MST over all nodes (Prim), rooted at the
    source; every node transmits just far enough to reach its farthest child.

    strict=True rejects inputs with tied pairwise distances (the MST would not
    be unique). Hand-built symmetric fixtures pass strict=False and rely on
    Prim's lowest-id tie-break.
    """
    if strict:
        check_distinct_distances(network)
    parent = prim_parents(network.dist, root=network.source_id)
    return RangeAssignment(max_child_edge(network.dist, parent), alpha)


def bip_assignment(network, alpha=DEFAULT_ALPHA):
    """
    Broadcast Incremental Power.

    Grows a tree from the source. Each step picks the pair (i in tree, j outside)
    with the smallest extra power d(i,j)^alpha - P(i); ties go to the smallest
    (i, j). Nodes already inside i's disc cost nothing extra and join next.
    """
    dist = network.dist
    n = network.n_nodes
    powered = dist ** alpha
    power = np.zeros(n)
    radius = np.zeros(n)
    in_tree = np.zeros(n, dtype=bool)
    in_tree[network.source_id] = True

    for _ in range(n - 1):
        tree = np.flatnonzero(in_tree)
        out = np.flatnonzero(~in_tree)
        extra = powered[np.ix_(tree, out)] - power[tree][:, None]
        # argmin on the row-major grid returns the lowest (i, j) among equal minima
        k = int(np.argmin(extra))
        i, j = int(tree[k // out.size]), int(out[k % out.size])
        if powered[i, j] > power[i]:
            power[i] = powered[i, j]
            radius[i] = dist[i, j]
        in_tree[j] = True

    return RangeAssignment(radius, alpha)


def sweep(network, assignment, alpha=None):
    """
    Elimination pass: visit transmitters in decreasing range order and silence
    every one whose removal still lets the broadcast reach all nodes. Passes
    repeat until one changes nothing.
    """
    alpha = assignment.alpha if alpha is None else alpha
    assignment.check_fits(network)
    dist, src = network.dist, network.source_id
    ranges = assignment.ranges.copy()
    if not _closure(dist, ranges, src).all():
        raise InfeasibleInput("sweep needs an assignment that already reaches every node")

    passes = 0
    changed = True
    while changed:
        changed = False
        passes += 1
        order = sorted(np.flatnonzero(ranges > 0), key=lambda v: (-ranges[v], v))
        for node in order:
            kept = ranges[node]
            ranges[node] = 0.0
            if _closure(dist, ranges, src).all():
                changed = True
            else:
                ranges[node] = kept
    logging.debug(f"sweep finished after {passes} pass(es)")
    return RangeAssignment(ranges, alpha)


def bip_sweep_assignment(network, alpha=DEFAULT_ALPHA):
    return sweep(network, bip_assignment(network, alpha), alpha)
