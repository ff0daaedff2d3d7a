import logging

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import breadth_first_order, minimum_spanning_tree

from shared.assignment_core import DEFAULT_ALPHA, RangeAssignment
from shared.cross_model import SOURCE_ID, SegmentLabel
from services.engine_vyuha.spanning import max_child_edge, prim_parents, tree_edges


def diamond_tree(network):
    """
    MST of the diamond graph rooted at its first vertex (l_II, or the source
    when Segment II is empty). Returns (vertices, parent-index array).
    """
    vertices = list(network.index.diamond)
    sub = network.dist[np.ix_(vertices, vertices)]
    return vertices, prim_parents(sub, root=0)


def distributed_assignment(network, alpha=DEFAULT_ALPHA):
    """
    Constant-information rule for crosses.

    Every node transmits to its next adjacent neighbor (M). The diamond nodes
    also cover their children in the rooted diamond MST. The source covers
    f_I and f_II, or f_I and its diamond children when Segment II is empty.
    """
    index = network.index
    dist = network.dist
    ranges = np.array(network.hops, dtype=float)

    vertices, parent = diamond_tree(network)
    sub = dist[np.ix_(vertices, vertices)]
    child_max = max_child_edge(sub, parent)
    for k, node in enumerate(vertices):
        if node != SOURCE_ID:
            ranges[node] = max(ranges[node], child_max[k])

    terms = []
    f_one = index.first_of(SegmentLabel.I)
    if f_one is not None:
        terms.append(dist[SOURCE_ID, f_one])
    f_two = index.first_of(SegmentLabel.II)
    if f_two is not None:
        terms.append(dist[SOURCE_ID, f_two])
    else:
        terms.append(child_max[0])
    ranges[SOURCE_ID] = max(terms)
    return RangeAssignment(ranges, alpha)


# --- grids ---

def _grid_edges(grid):
    """
    Undirected relay edges of the grid rule: chain edges between consecutive
    nodes of a segment with no intersection strictly between them, plus the
    edges of every local diamond MST.
    """
    edges = set()
    for seg_id, chain in enumerate(grid.chains):
        for a, b in zip(chain, chain[1:]):
            if not grid.intersection_between(seg_id, a, b):
                edges.add((min(a, b), max(a, b)))

    diamonds = []
    for x_id in grid.intersection_order():
        arms = grid.arm_nodes(x_id)
        if len(arms) < 2:
            diamonds.append((x_id, arms, []))
            continue
        sub = grid.dist[np.ix_(arms, arms)]
        local = [(arms[p], arms[v]) for p, v in tree_edges(prim_parents(sub, root=0))]
        for a, b in local:
            edges.add((min(a, b), max(a, b)))
        diamonds.append((x_id, arms, local))
    return edges, diamonds


def grid_distributed_assignment(grid, alpha=DEFAULT_ALPHA):
    """
    The diamond rule applied at every intersection of a grid.

    Relay edges (segment chains plus one local diamond MST per intersection)
    close cycles around the grid cells. The data follows the minimum spanning
    tree of the relay graph, rooted at the source, so each cycle gives up its
    longest relay edge. Every node then transmits to its farthest child. On a
    single cross the relay graph is already a tree and this is the cross rule.
    """
    dist = grid.dist
    n = grid.n_nodes
    edges, diamonds = _grid_edges(grid)

    pairs = np.array(sorted(edges), dtype=int).reshape(-1, 2)
    rows, cols = pairs[:, 0], pairs[:, 1]
    relay = csr_matrix((dist[rows, cols], (rows, cols)), shape=(n, n))
    tree = minimum_spanning_tree(relay)
    order, predecessors = breadth_first_order(tree, grid.source_id, directed=False, return_predecessors=True)

    ranges = np.zeros(n)
    for v in order[1:]:
        u = predecessors[v]
        ranges[u] = max(ranges[u], dist[u, v])

    if order.size < n:
        # Validation guarantees connectivity; reaching here means a bug upstream
        seen = np.zeros(n, dtype=bool)
        seen[order] = True
        missing = np.flatnonzero(~seen)
        logging.error(f"grid rule left {missing.size} node(s) unrooted: {missing[:10].tolist()}")
    logging.debug(
        f"grid rule: {len(edges)} relay edges, {tree.nnz} kept, over {len(diamonds)} intersections"
    )
    return RangeAssignment(ranges, alpha)
