import logging

import numpy as np

from shared.assignment_core import RangeAssignment
from shared.errors import TooLarge
from shared.settings import get_settings
from services.engine_vyuha.optimal_search import reach_masks


def brute_force_oracle(network, alpha=2.0, cap=None):
    """
    Exhaustive minimum over assignments whose ranges are 0 or an inter-node
    distance, independent of any structural result about optima.

    Nodes are assigned in the order the broadcast reaches them (lowest pending
    id first), so only delivering assignments are enumerated. Two ranges of the
    same node that leave the same set of reached nodes lead to identical
    futures; only the smaller one is expanded.
    """
    cap = get_settings().brute_cap if cap is None else cap
    n = network.n_nodes
    if n > cap:
        raise TooLarge(f"brute force is capped at N={cap}, got N={n}")
    if n == 1:
        return RangeAssignment.zeros(1, alpha)

    dist = network.dist
    powered = dist ** alpha
    masks = reach_masks(dist)
    ids = np.arange(n)
    order = [tuple(int(c) for c in np.lexsort((ids, dist[u]))) for u in range(n)]
    everyone = (1 << n) - 1

    best = {"cost": float("inf"), "ranges": None}
    ranges = [0.0] * n
    visited = [0]

    def expand(reached, assigned, spent):
        visited[0] += 1
        if reached == everyone:
            if spent < best["cost"]:
                best["cost"], best["ranges"] = spent, list(ranges)
            return
        pending = reached & ~assigned
        if not pending:
            return
        u = (pending & -pending).bit_length() - 1
        tried = set()
        for c in order[u]:
            after = reached | masks[u][c]
            if after in tried:
                continue
            tried.add(after)
            total = spent + powered[u, c]
            if total >= best["cost"]:
                break
            ranges[u] = dist[u, c]
            expand(after, assigned | (1 << u), total)
            ranges[u] = 0.0

    source = network.source_id
    expand(1 << source, 0, 0.0)
    logging.debug(f"brute force: N={n}, {visited[0]:,} states, cost={best['cost']:.6g}")
    return RangeAssignment(np.array(best["ranges"]), alpha)
