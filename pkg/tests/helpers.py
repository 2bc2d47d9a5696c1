"""Shared builders for the test suite: fixed small models and seeded random corpora."""

import math

import numpy as np

from mrfbound import Model

COUPLE_2 = [[2.0, 1.0], [1.0, 2.0]]  # strength sqrt(2)


def triangle(table=COUPLE_2):
    return Model([2, 2, 2], [(0, 1), (0, 2), (1, 2)], [table] * 3)


def triangle_with_unary():
    """Triangle of sqrt(2)-strength edges with weight [2, 1] folded at node 0."""
    host = np.array(COUPLE_2) * np.array([[2.0], [1.0]])
    return Model([2, 2, 2], [(0, 1), (0, 2), (1, 2)], [host, COUPLE_2, COUPLE_2])


def two_node(table):
    return Model([2, 2], [(0, 1)], [table])


def grid_edges(rows, cols):
    edges = []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                edges.append((v, v + 1))
            if r + 1 < rows:
                edges.append((v, v + cols))
    return edges


def cycle_edges(n):
    return [(i, (i + 1) % n) for i in range(n)]


def clique_edges(n):
    return [(i, j) for i in range(n) for j in range(i + 1, n)]


def random_spanning_edges(rng, n, extra=0):
    """A random tree on n nodes plus up to ``extra`` chords, canonical order."""
    edges = set()
    order = list(rng.permutation(n))
    for i in range(1, n):
        u = order[i]
        v = order[int(rng.integers(0, i))]
        edges.add((min(u, v), max(u, v)))
    tries = 0
    while extra > 0 and tries < 100:
        u, v = rng.integers(0, n, 2)
        key = (min(int(u), int(v)), max(int(u), int(v)))
        if u != v and key not in edges:
            edges.add(key)
            extra -= 1
        tries += 1
    return sorted(edges)


def random_tables(rng, edges, cards, max_strength=3.0):
    """Entries exp(U[-ln s, ln s]), which keeps every strength within [1, s]."""
    a = math.log(max_strength)
    return [np.exp(rng.uniform(-a, a, (cards[u], cards[v]))) for u, v in edges]


def random_tree_model(rng, n, card_choices=(2, 3, 4), max_strength=3.0):
    edges = random_spanning_edges(rng, n)
    cards = [int(rng.choice(card_choices)) for _ in range(n)]
    return Model(cards, edges, random_tables(rng, edges, cards, max_strength))


def random_loopy_model(rng, n, card_choices=(2, 3), max_strength=3.0, extra=None):
    if extra is None:
        extra = 1 + int(rng.integers(0, n))
    edges = random_spanning_edges(rng, n, extra)
    cards = [int(rng.choice(card_choices)) for _ in range(n)]
    return Model(cards, edges, random_tables(rng, edges, cards, max_strength))


def mixed_topology_model(rng, index, card_choices=(2, 3), max_strength=3.0):
    """Rotate through random / clique / cycle / grid graphs, 3-8 nodes."""
    kind = index % 4
    if kind == 0:
        n = int(rng.integers(3, 9))
        edges = random_spanning_edges(rng, n, int(rng.integers(0, n)))
    elif kind == 1:
        n = int(rng.integers(3, 7))
        edges = clique_edges(n)
    elif kind == 2:
        n = int(rng.integers(3, 9))
        edges = cycle_edges(n)
    else:
        rows, cols = [(2, 2), (2, 3), (2, 4), (3, 3)][int(rng.integers(0, 4))]
        n = rows * cols
        edges = grid_edges(rows, cols)
    edges = sorted((min(u, v), max(u, v)) for u, v in edges)
    cards = [int(rng.choice(card_choices)) for _ in range(n)]
    return Model(cards, edges, random_tables(rng, edges, cards, max_strength))


def graph_diameter(model):
    """Longest shortest path (in edges) over the model's graph; 0 if edgeless."""
    import collections

    best = 0
    for start in range(model.node_count):
        dist = {start: 0}
        queue = collections.deque([start])
        while queue:
            u = queue.popleft()
            for w in model.neighbors(u):
                if w not in dist:
                    dist[w] = dist[u] + 1
                    queue.append(w)
        best = max(best, max(dist.values()))
    return best
