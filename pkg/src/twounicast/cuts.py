"""Vertex-cut predicates and choke-point detection.

A node set A is a (B, C)-cut when removing A disconnects every directed
path from B to C; a cut that contains a node of B or C disconnects
trivially.  Two structures are detected on top of this predicate:

* omniscient node: v cuts both sources from one destination while some
  u in parents(v) or v itself cuts the other source from both
  destinations.  Forces D1 + D2 <= 1.
* m-bottleneck node for d_i: v cuts both sources from d_i and some
  size-m subset of parents(v) cuts the other source from both
  destinations.  Forces m*D_i + D_other <= m; smaller m is tighter, so
  the minimal m per (node, destination) is reported.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable

from .network import LayeredNetwork


class IndegreeBudgetError(ValueError):
    """Candidate node's in-degree exceeds the exhaustive-search budget."""


@dataclass(frozen=True)
class CutQuery:
    """Ask whether removing `removed` disconnects `from_nodes` from `to_nodes`."""

    removed: frozenset[str]
    from_nodes: frozenset[str]
    to_nodes: frozenset[str]

    @classmethod
    def of(cls, removed: Iterable[str], from_nodes: Iterable[str], to_nodes: Iterable[str]) -> "CutQuery":
        return cls(frozenset(removed), frozenset(from_nodes), frozenset(to_nodes))


@dataclass(frozen=True)
class BottleneckRecord:
    node: str
    destination_index: int  # 1 or 2
    minimal_m: int
    witness: frozenset[str]  # size == minimal_m, subset of parents(node)


@dataclass(frozen=True)
class OmniscientRecord:
    node: str
    destination_index: int
    witness_u: str


@dataclass(frozen=True)
class BottleneckReport:
    bottlenecks: tuple[BottleneckRecord, ...]
    omniscient: tuple[OmniscientRecord, ...]

    def to_json(self) -> str:
        doc = {
            "bottlenecks": [
                {
                    "node": r.node,
                    "destination_index": r.destination_index,
                    "minimal_m": r.minimal_m,
                    "witness": sorted(r.witness),
                }
                for r in self.bottlenecks
            ],
            "omniscient": [
                {
                    "node": r.node,
                    "destination_index": r.destination_index,
                    "witness_u": r.witness_u,
                }
                for r in self.omniscient
            ],
        }
        return json.dumps(doc, indent=2) + "\n"


def is_cut(net: LayeredNetwork, q: CutQuery) -> bool:
    """True iff nothing in `q.to_nodes` is reachable from `q.from_nodes`
    once `q.removed` is deleted."""
    for v in q.from_nodes | q.to_nodes:
        net._require(v)
    reach = net.reachable(q.from_nodes - q.removed, q.removed)
    return not (reach & q.to_nodes)


def _cuts_both_sources_from(net: LayeredNetwork, v: str, dest: str) -> bool:
    return is_cut(net, CutQuery.of({v}, set(net.sources), {dest}))


def _cuts_other_source_from_both(net: LayeredNetwork, nodes: Iterable[str], other_source: str) -> bool:
    return is_cut(net, CutQuery.of(nodes, {other_source}, set(net.destinations)))


def detect_omniscient(net: LayeredNetwork) -> tuple[OmniscientRecord, ...]:
    """All (node, destination, witness) triples matching the omniscient
    structure, ordered by (layer, name, destination).

    Sources and destinations themselves are legitimate candidates and are
    reported when they qualify; interpreting those degenerate records is
    left to the caller.
    """
    records = []
    ordered = sorted(net.nodes, key=net.node_key)
    for v in ordered:
        for i, dest in ((1, net.destinations[0]), (2, net.destinations[1])):
            if not _cuts_both_sources_from(net, v, dest):
                continue
            other_source = net.sources[2 - i]  # s2 for i=1, s1 for i=2
            candidates = sorted(net.parents(v) | {v}, key=net.node_key)
            for u in candidates:
                if _cuts_other_source_from_both(net, {u}, other_source):
                    records.append(OmniscientRecord(v, i, u))
                    break
    return tuple(records)


def detect_bottlenecks(net: LayeredNetwork, max_indegree_for_exhaustive: int = 16) -> BottleneckReport:
    """Exhaustive minimal-m choke-point search over every qualifying node.

    For each destination index i and each node v that cuts both sources
    from d_i (excluding d_i itself, whose cut status is vacuous), subsets
    of parents(v) are enumerated smallest-first; the first subset that
    cuts the other source from both destinations is recorded with its
    size as the minimal m.  Ties at equal size break lexicographically.
    Raises IndegreeBudgetError instead of silently skipping a candidate
    whose in-degree exceeds the budget.
    """
    bottlenecks = []
    ordered = sorted(net.nodes, key=net.node_key)
    for v in ordered:
        for i, dest in ((1, net.destinations[0]), (2, net.destinations[1])):
            if v == dest:
                continue
            if not _cuts_both_sources_from(net, v, dest):
                continue
            parents = sorted(net.parents(v))
            if len(parents) > max_indegree_for_exhaustive:
                raise IndegreeBudgetError(
                    f"node {v!r} has in-degree {len(parents)} > budget "
                    f"{max_indegree_for_exhaustive}; refusing to search "
                    f"2^{len(parents)} subsets"
                )
            other_source = net.sources[2 - i]
            found = None
            for size in range(1, len(parents) + 1):
                for subset in combinations(parents, size):
                    if _cuts_other_source_from_both(net, subset, other_source):
                        found = BottleneckRecord(v, i, size, frozenset(subset))
                        break
                if found:
                    break
            if found:
                bottlenecks.append(found)
    omniscient = detect_omniscient(net)
    return BottleneckReport(tuple(bottlenecks), omniscient)
