"""Graph coloring: DSATUR greedy, exact DSATUR branch-and-bound, clique bounds."""
from __future__ import annotations

from typing import Sequence

import networkx as nx


def _adjacency(n: int, edges) -> list[set[int]]:
    adj = [set() for _ in range(n)]
    for u, v in edges:
        u, v = int(u), int(v)
        adj[u].add(v)
        adj[v].add(u)
    return adj


def dsatur_greedy(n: int, edges) -> list[int]:
    """Greedy DSATUR coloring.  Ties: saturation, then degree, then lowest index."""
    adj = _adjacency(n, edges)
    colors = [-1] * n
    neighbor_colors = [set() for _ in range(n)]
    for _ in range(n):
        u = max(
            (v for v in range(n) if colors[v] < 0),
            key=lambda v: (len(neighbor_colors[v]), len(adj[v]), -v),
        )
        c = 0
        while c in neighbor_colors[u]:
            c += 1
        colors[u] = c
        for v in adj[u]:
            neighbor_colors[v].add(c)
    return colors


def greedy_clique(n: int, edges) -> list[int]:
    adj = _adjacency(n, edges)
    order = sorted(range(n), key=lambda v: (-len(adj[v]), v))
    clique: list[int] = []
    for v in order:
        if all(v in adj[u] for u in clique):
            clique.append(v)
    return clique


def max_clique(n: int, edges) -> list[int]:
    g = nx.Graph()
    g.add_nodes_from(range(n))
    g.add_edges_from((int(u), int(v)) for u, v in edges)
    clique, _ = nx.max_weight_clique(g, weight=None)
    return sorted(clique)


def exact_coloring(n: int, edges, clique: Sequence[int] | None = None, node_limit: int | None = None):
    """Minimum coloring by DSATUR branch-and-bound.

    Returns ``(colors, optimal)``; ``optimal`` is False only when ``node_limit``
    search nodes were exhausted before the bound closed.
    """
    if n == 0:
        return [], True
    adj = [sorted(a) for a in _adjacency(n, edges)]
    best = dsatur_greedy(n, edges)
    best_k = max(best) + 1
    clique = list(clique) if clique is not None else greedy_clique(n, edges)
    lower = max(1, len(clique))
    if best_k == lower:
        return best, True

    colors = [-1] * n
    # count of neighbors holding each color, per vertex
    counts = [[0] * (best_k + 1) for _ in range(n)]
    sat = [0] * n
    degree = [len(a) for a in adj]
    visited = 0

    def assign(v: int, c: int):
        colors[v] = c
        for u in adj[v]:
            if counts[u][c] == 0:
                sat[u] += 1
            counts[u][c] += 1

    def unassign(v: int, c: int):
        colors[v] = -1
        for u in adj[v]:
            counts[u][c] -= 1
            if counts[u][c] == 0:
                sat[u] -= 1

    # pre-color the clique so symmetric branches are cut
    for i, v in enumerate(clique):
        assign(v, i)

    def search(colored: int, used: int) -> bool:
        nonlocal best, best_k, visited
        visited += 1
        if node_limit is not None and visited > node_limit:
            return True
        if colored == n:
            best, best_k = colors[:], used
            return best_k == lower
        v = -1
        key = (-1, -1)
        for u in range(n):
            if colors[u] < 0:
                k = (sat[u], degree[u])
                if k > key:
                    key, v = k, u
        row = counts[v]
        for c in range(used + 1):
            if c >= best_k - 1:
                break
            if row[c]:
                continue
            assign(v, c)
            done = search(colored + 1, max(used, c + 1))
            unassign(v, c)
            if done:
                return True
        return False

    search(len(clique), len(clique))
    optimal = node_limit is None or visited <= node_limit
    return best, optimal


def chromatic_number(n: int, edges) -> int:
    colors, _ = exact_coloring(n, edges, clique=max_clique(n, edges) if n else [])
    return max(colors) + 1 if colors else 0


def is_proper(colors: Sequence[int], edges) -> bool:
    return all(colors[int(u)] != colors[int(v)] for u, v in edges)
