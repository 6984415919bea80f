"""Layered two-unicast networks: model, JSON I/O, and example generators.

A network is a layered DAG with exactly two source-destination pairs.
Layer 1 holds the two sources, the last layer the two destinations, and
every edge goes from one layer to the next.  Networks are immutable after
construction and safe to share between analyses.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable


class NetworkError(ValueError):
    """Raised when a document or construction violates the network model."""


class UnknownNodeError(NetworkError):
    """Raised when an operation names a node that is not in the network."""


@dataclass(frozen=True)
class LayeredNetwork:
    """Immutable layered network with ordered layers and edges.

    Fields mirror the JSON wire format: `layers` is an ordered tuple of
    node-name tuples, `edges` an ordered tuple of (parent, child) pairs,
    and `sources`/`destinations` the flow endpoints ((s1, d1) is flow 1,
    (s2, d2) flow 2).
    """

    layers: tuple[tuple[str, ...], ...]
    edges: tuple[tuple[str, str], ...]
    sources: tuple[str, str]
    destinations: tuple[str, str]

    _layer_of: dict = field(init=False, repr=False, compare=False)
    _parents: dict = field(init=False, repr=False, compare=False)
    _children: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        layer_of: dict[str, int] = {}
        for idx, layer in enumerate(self.layers):
            if not layer:
                raise NetworkError(f"layering violation: layer {idx + 1} is empty")
            for name in layer:
                if not isinstance(name, str) or not name:
                    raise NetworkError(f"schema violation: bad node name {name!r}")
                if name in layer_of:
                    raise NetworkError(f"duplicate node: {name!r}")
                layer_of[name] = idx
        if len(self.layers) < 2:
            raise NetworkError("layering violation: need at least 2 layers")

        s1, s2 = self.sources
        d1, d2 = self.destinations
        if len({s1, s2, d1, d2}) != 4:
            raise NetworkError(
                f"missing source/destination: endpoints {self.sources + self.destinations} "
                "must be four distinct nodes"
            )
        for name, role in ((s1, "source s1"), (s2, "source s2")):
            if layer_of.get(name) != 0:
                raise NetworkError(f"missing source/destination: {role} {name!r} not in first layer")
        last = len(self.layers) - 1
        for name, role in ((d1, "destination d1"), (d2, "destination d2")):
            if layer_of.get(name) != last:
                raise NetworkError(f"missing source/destination: {role} {name!r} not in last layer")
        if set(self.layers[0]) != {s1, s2}:
            raise NetworkError("missing source/destination: first layer must be exactly the two sources")
        if set(self.layers[last]) != {d1, d2}:
            raise NetworkError("missing source/destination: last layer must be exactly the two destinations")

        parents: dict[str, set[str]] = {v: set() for v in layer_of}
        children: dict[str, set[str]] = {v: set() for v in layer_of}
        seen: set[tuple[str, str]] = set()
        for edge in self.edges:
            u, v = edge
            for end in (u, v):
                if end not in layer_of:
                    raise NetworkError(f"schema violation: edge {edge} uses unknown node {end!r}")
            if layer_of[v] != layer_of[u] + 1:
                raise NetworkError(f"layering violation: edge {edge} does not go to the next layer")
            if edge in seen:
                raise NetworkError(f"duplicate edge: {edge}")
            seen.add(edge)
            parents[v].add(u)
            children[u].add(v)

        object.__setattr__(self, "_layer_of", layer_of)
        object.__setattr__(self, "_parents", {v: frozenset(p) for v, p in parents.items()})
        object.__setattr__(self, "_children", {v: frozenset(c) for v, c in children.items()})

    # -- lookups ---------------------------------------------------------

    @property
    def nodes(self) -> tuple[str, ...]:
        return tuple(n for layer in self.layers for n in layer)

    @property
    def num_hops(self) -> int:
        return len(self.layers) - 1

    def __contains__(self, name: str) -> bool:
        return name in self._layer_of

    def layer_of(self, v: str) -> int:
        """0-based layer index of node `v`."""
        self._require(v)
        return self._layer_of[v]

    def parents(self, v: str) -> frozenset[str]:
        """Set of nodes with an edge into `v`; empty for sources."""
        self._require(v)
        return self._parents[v]

    def children(self, v: str) -> frozenset[str]:
        self._require(v)
        return self._children[v]

    def has_edge(self, u: str, v: str) -> bool:
        return u in self and v in self._children[u]

    def node_key(self, v: str) -> tuple[int, str]:
        """Deterministic (layer, name) sort key."""
        return (self._layer_of[v], v)

    def _require(self, v) -> None:
        if v not in self._layer_of:
            raise UnknownNodeError(f"unknown node: {v!r}")

    # -- reachability ----------------------------------------------------

    def reachable(self, from_nodes: Iterable[str], removed: Iterable[str] = ()) -> frozenset[str]:
        """Forward-reachable set with `removed` nodes (and incident edges) deleted.

        Nodes listed in `removed` are never returned, even if they also
        appear in `from_nodes`.
        """
        removed = frozenset(removed)
        from_nodes = frozenset(from_nodes)
        for v in from_nodes | removed:
            self._require(v)
        frontier = [v for v in from_nodes if v not in removed]
        seen = set(frontier)
        while frontier:
            u = frontier.pop()
            for v in self._children[u]:
                if v not in removed and v not in seen:
                    seen.add(v)
                    frontier.append(v)
        return frozenset(seen)

    def has_path(self, u: str, v: str) -> bool:
        return v in self.reachable({u})


# -- JSON wire format ----------------------------------------------------

def parse_network(text: str) -> LayeredNetwork:
    """Parse the network JSON document; raises NetworkError on violations."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise NetworkError(f"schema violation: not valid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise NetworkError("schema violation: top level must be an object")
    for key in ("layers", "edges", "sources", "destinations"):
        if key not in doc:
            raise NetworkError(f"schema violation: missing key {key!r}")
    layers = doc["layers"]
    edges = doc["edges"]
    if not isinstance(layers, list) or not all(isinstance(l, list) for l in layers):
        raise NetworkError("schema violation: layers must be an array of arrays")
    if not isinstance(edges, list) or not all(
        isinstance(e, list) and len(e) == 2 for e in edges
    ):
        raise NetworkError("schema violation: edges must be an array of 2-element arrays")
    for pair_key in ("sources", "destinations"):
        pair = doc[pair_key]
        if not isinstance(pair, list) or len(pair) != 2:
            raise NetworkError(f"schema violation: {pair_key} must be a 2-element array")
    return LayeredNetwork(
        layers=tuple(tuple(l) for l in layers),
        edges=tuple((e[0], e[1]) for e in edges),
        sources=(doc["sources"][0], doc["sources"][1]),
        destinations=(doc["destinations"][0], doc["destinations"][1]),
    )


def serialize_network(net: LayeredNetwork) -> str:
    """Order-preserving JSON serialization; parse(serialize(net)) == net."""
    doc = {
        "layers": [list(l) for l in net.layers],
        "edges": [list(e) for e in net.edges],
        "sources": list(net.sources),
        "destinations": list(net.destinations),
    }
    return json.dumps(doc, indent=2) + "\n"


# -- generators ----------------------------------------------------------

def gen_bottleneck_family(m: int) -> LayeredNetwork:
    """4-layer network whose node `w` chokes flow 1 behind m flow-2 relays.

    Layer 2 holds v1 (fed by s1) and v2..v{m+1} (fed by s2).  Layer 3
    holds `w`, hearing all of layer 2, plus side relays u1..u{m-1} where
    uk hears the distributor v2 and v{k+2}.  d1 hangs off w; d2 off the
    side relays (off w itself when m == 1, since there are no side
    relays to carry flow 2).
    """
    if m < 1:
        raise ValueError(f"m must be a positive integer, got {m}")
    brelays = [f"v{j}" for j in range(2, m + 2)]
    siders = [f"u{k}" for k in range(1, m)]
    layers = (
        ("s1", "s2"),
        tuple(["v1"] + brelays),
        tuple(["w"] + siders),
        ("d1", "d2"),
    )
    edges: list[tuple[str, str]] = [("s1", "v1")]
    edges += [("s2", b) for b in brelays]
    edges += [("v1", "w")] + [(b, "w") for b in brelays]
    for k in range(1, m):
        edges += [("v2", f"u{k}"), (f"v{k + 2}", f"u{k}")]
    edges.append(("w", "d1"))
    if m == 1:
        edges.append(("w", "d2"))
    else:
        edges += [(u, "d2") for u in siders]
    return LayeredNetwork(layers, tuple(edges), ("s1", "s2"), ("d1", "d2"))


def gen_double_bottleneck_family(m: int) -> LayeredNetwork:
    """Two flow-swapped copies of the bottleneck family glued in series.

    The first copy chokes flow 1 at `w` and hands both flows to a 2-node
    glue layer (g1 carries flow 1, g2 flow 2).  The second copy repeats
    the structure with the flows exchanged: flow 2 passes through the
    single node `w2` whose other m parents q1..qm carry flow 1.
    """
    if m < 1:
        raise ValueError(f"m must be a positive integer, got {m}")
    first = gen_bottleneck_family(m)
    brelays = [f"v{j}" for j in range(2, m + 2)]
    siders = [f"u{k}" for k in range(1, m)]
    arelays = [f"q{j}" for j in range(1, m + 1)]
    siders2 = [f"z{k}" for k in range(1, m)]
    layers = (
        first.layers[0],
        first.layers[1],
        first.layers[2],
        ("g1", "g2"),
        tuple(["y1"] + arelays),
        tuple(["w2"] + siders2),
        ("d1", "d2"),
    )
    edges = [e for e in first.edges if e[1] not in ("d1", "d2")]
    edges.append(("w", "g1"))
    if m == 1:
        edges.append(("w", "g2"))
    else:
        edges += [(u, "g2") for u in siders]
    edges.append(("g2", "y1"))
    edges += [("g1", q) for q in arelays]
    edges += [("y1", "w2")] + [(q, "w2") for q in arelays]
    for k in range(1, m):
        edges += [("q1", f"z{k}"), (f"q{k + 1}", f"z{k}")]
    edges.append(("w2", "d2"))
    if m == 1:
        edges.append(("w2", "d1"))
    else:
        edges += [(z, "d1") for z in siders2]
    return LayeredNetwork(layers, tuple(edges), ("s1", "s2"), ("d1", "d2"))


def gen_no_bottleneck_example() -> LayeredNetwork:
    """Fixed 4-layer, 12-node network with no choke point for either flow.

    Both flows fan out over parallel relays, so every single-node cut
    candidate leaves a detour for the other flow and both detectors come
    back empty.  The relay diversity is exactly what the built-in
    "no-bottleneck" scheme exploits to deliver (1, 1).
    """
    layers = (
        ("s1", "s2"),
        ("v1", "v2", "v3", "v4", "v5"),
        ("v6", "v7", "v8"),
        ("d1", "d2"),
    )
    edges = (
        ("s1", "v1"), ("s1", "v2"),
        ("s2", "v3"), ("s2", "v4"), ("s2", "v5"),
        ("v1", "v6"), ("v1", "v7"),
        ("v2", "v6"), ("v2", "v7"),
        ("v3", "v6"), ("v3", "v8"),
        ("v4", "v6"), ("v4", "v7"), ("v4", "v8"),
        ("v5", "v6"), ("v5", "v7"), ("v5", "v8"),
        ("v6", "d1"),
        ("v7", "d1"),
        ("v8", "d2"),
    )
    return LayeredNetwork(layers, edges, ("s1", "s2"), ("d1", "d2"))
