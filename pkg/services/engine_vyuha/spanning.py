import numpy as np


def prim_parents(dist, root=0):
    """
    Prim's algorithm on a dense symmetric distance matrix.

    Returns the parent of every vertex in the MST rooted at `root` (-1 for the
    root). Ties resolve deterministically: the lowest-id vertex is attached
    first, and a vertex keeps the parent that offered its key earliest.
    """
    n = dist.shape[0]
    parent = np.full(n, -1, dtype=int)
    if n <= 1:
        return parent
    in_tree = np.zeros(n, dtype=bool)
    in_tree[root] = True
    key = np.array(dist[root], dtype=float)
    parent[:] = root
    parent[root] = -1
    key[root] = np.inf
    for _ in range(n - 1):
        candidates = np.where(in_tree, np.inf, key)
        v = int(np.argmin(candidates))
        in_tree[v] = True
        better = (~in_tree) & (dist[v] < key)
        key[better] = dist[v][better]
        parent[better] = v
    return parent


def tree_edges(parent):
    return [(int(p), int(v)) for v, p in enumerate(parent) if p >= 0]


def max_child_edge(dist, parent):
    """Per vertex: the longest edge to one of its children (0 for leaves)."""
    out = np.zeros(dist.shape[0])
    for v, p in enumerate(parent):
        if p >= 0 and dist[p, v] > out[p]:
            out[p] = dist[p, v]
    return out
