"""Independent brute-force oracles for the test suite.

Everything here deliberately avoids the library's search strategies:
cuts are decided by enumerating every directed path, and choke points by
enumerating every parent subset of every node.  Small networks only.
"""

from __future__ import annotations

import random
from itertools import combinations

from twounicast.network import LayeredNetwork


def all_paths(net: LayeredNetwork, start: str, goal: str, removed: frozenset[str]) -> list[list[str]]:
    """Every directed path start -> goal avoiding `removed` (DFS, no memoization)."""
    if start in removed or goal in removed:
        return []
    paths = []

    def walk(node, trail):
        if node == goal:
            paths.append(trail)
            return
        for child in net.children(node):
            if child not in removed:
                walk(child, trail + [child])

    walk(start, [start])
    return paths


def is_cut_naive(net: LayeredNetwork, removed, from_nodes, to_nodes) -> bool:
    removed = frozenset(removed)
    for u in from_nodes:
        for v in to_nodes:
            if all_paths(net, u, v, removed):
                return False
    return True


def bottlenecks_naive(net: LayeredNetwork) -> list[tuple[str, int, int, frozenset[str]]]:
    """All (node, destination_index, minimal_m, witness) records by full enumeration.

    Mirrors the library contract: a destination is never a choke point
    for itself, and ties at the minimal size resolve to the
    lexicographically smallest parent subset.
    """
    out = []
    for v in sorted(net.nodes, key=net.node_key):
        for i in (1, 2):
            dest = net.destinations[i - 1]
            if v == dest:
                continue
            if not is_cut_naive(net, {v}, set(net.sources), {dest}):
                continue
            other = net.sources[2 - i]
            parents = sorted(net.parents(v))
            qualifying = [
                frozenset(sub)
                for size in range(1, len(parents) + 1)
                for sub in combinations(parents, size)
                if is_cut_naive(net, sub, {other}, set(net.destinations))
            ]
            if qualifying:
                best_size = min(len(s) for s in qualifying)
                best = min(
                    (s for s in qualifying if len(s) == best_size),
                    key=lambda s: sorted(s),
                )
                out.append((v, i, best_size, best))
    return out


def omniscient_naive(net: LayeredNetwork) -> list[tuple[str, int, str]]:
    out = []
    for v in sorted(net.nodes, key=net.node_key):
        for i in (1, 2):
            dest = net.destinations[i - 1]
            if not is_cut_naive(net, {v}, set(net.sources), {dest}):
                continue
            other = net.sources[2 - i]
            for u in sorted(net.parents(v) | {v}, key=net.node_key):
                if is_cut_naive(net, {u}, {other}, set(net.destinations)):
                    out.append((v, i, u))
                    break
    return out


def random_layered_net(rng: random.Random, max_nodes: int = 10) -> LayeredNetwork:
    """Random layered two-unicast network with at most `max_nodes` nodes."""
    n_middle = rng.randint(0, 2)
    budget = max_nodes - 4
    sizes = []
    for _ in range(n_middle):
        if budget < 1:
            break
        size = rng.randint(1, min(3, budget))
        sizes.append(size)
        budget -= size
    layers = [("s1", "s2")]
    for li, size in enumerate(sizes):
        layers.append(tuple(f"m{li + 1}{j}" for j in range(1, size + 1)))
    layers.append(("d1", "d2"))
    p = rng.choice([0.35, 0.6, 0.85])
    edges = []
    for a, bnodes in zip(layers, layers[1:]):
        for u in a:
            for v in bnodes:
                if rng.random() < p:
                    edges.append((u, v))
    return LayeredNetwork(tuple(layers), tuple(edges), ("s1", "s2"), ("d1", "d2"))


def random_query(rng: random.Random, net: LayeredNetwork):
    nodes = list(net.nodes)
    removed = frozenset(rng.sample(nodes, rng.randint(0, min(3, len(nodes)))))
    from_nodes = frozenset(rng.sample(nodes, rng.randint(1, 2)))
    to_nodes = frozenset(rng.sample(nodes, rng.randint(1, 2)))
    return removed, from_nodes, to_nodes
