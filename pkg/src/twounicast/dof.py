"""Outer-bound DoF region assembly over exact rationals.

The region is the intersection of half-planes contributed by the box
bounds (0 <= D_i <= 1 when flow i is connected, else D_i <= 0), one
half-plane m*D_i + D_other <= m per detected choke point, and
D1 + D2 <= 1 per omniscient record.  Everything here is a Fraction; no
floating point enters this module.

The result is an outer bound only.  Achievability is asserted elsewhere
(by simulation), and there exist networks whose true DoF region is
strictly smaller than the bound assembled here, so containment must not
be read as attainability.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

from .cuts import BottleneckReport
from .network import LayeredNetwork

Point = tuple[Fraction, Fraction]


@dataclass(frozen=True)
class DofConstraint:
    """Half-plane a1*D1 + a2*D2 <= rhs with a provenance tag.

    Box lower bounds D_i >= 0 are stored with a negative coefficient
    (-D_i <= 0); every other constraint has a1, a2 >= 0.
    """

    a1: Fraction
    a2: Fraction
    rhs: Fraction
    provenance: str

    def holds(self, p: Point) -> bool:
        return self.a1 * p[0] + self.a2 * p[1] <= self.rhs

    def as_dict(self) -> dict:
        return {
            "a1": str(self.a1),
            "a2": str(self.a2),
            "rhs": str(self.rhs),
            "provenance": self.provenance,
        }


@dataclass(frozen=True)
class DofRegion:
    constraints: tuple[DofConstraint, ...]
    vertices: tuple[Point, ...]  # convex hull, counter-clockwise from origin side
    max_sum: Fraction
    argmax_vertex: Point

    def contains(self, p: Point) -> bool:
        return all(c.holds(p) for c in self.constraints)

    def to_json(self) -> str:
        doc = {
            "constraints": [c.as_dict() for c in self.constraints],
            "vertices": [[str(x), str(y)] for x, y in self.vertices],
            "max_sum": str(self.max_sum),
            "argmax_vertex": [str(self.argmax_vertex[0]), str(self.argmax_vertex[1])],
        }
        return json.dumps(doc, indent=2) + "\n"


def _cross(o: Point, a: Point, b: Point) -> Fraction:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _hull_ccw(points: list[Point]) -> tuple[Point, ...]:
    """Andrew's monotone chain over exact rationals; drops collinear points.

    Returns the counter-clockwise cycle rotated to start at the
    lexicographically smallest vertex (the origin whenever it is one).
    Degenerate inputs (point, segment) come back as 1 or 2 points.
    """
    pts = sorted(set(points))
    if len(pts) <= 2:
        return tuple(pts)
    lower: list[Point] = []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list[Point] = []
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    hull = lower[:-1] + upper[:-1]
    if len(hull) < 3:  # all points collinear
        return (pts[0], pts[-1])
    start = hull.index(min(hull))
    return tuple(hull[start:] + hull[:start])


def build_region(net: LayeredNetwork, report: BottleneckReport) -> DofRegion:
    """Assemble the outer-bound region for `net` from a detection report."""
    one = Fraction(1)
    zero = Fraction(0)
    constraints = [
        DofConstraint(Fraction(-1), zero, zero, "box"),
        DofConstraint(zero, Fraction(-1), zero, "box"),
    ]
    for i in (1, 2):
        connected = net.has_path(net.sources[i - 1], net.destinations[i - 1])
        cap = one if connected else zero
        a1, a2 = (one, zero) if i == 1 else (zero, one)
        constraints.append(DofConstraint(a1, a2, cap, "box"))
    for r in report.bottlenecks:
        m = Fraction(r.minimal_m)
        a1, a2 = (m, one) if r.destination_index == 1 else (one, m)
        constraints.append(
            DofConstraint(a1, a2, m, f"bottleneck({r.node},{r.destination_index},{r.minimal_m})")
        )
    for r in report.omniscient:
        constraints.append(DofConstraint(one, one, one, f"omniscient({r.node})"))

    feasible: list[Point] = []
    for c, d in combinations(constraints, 2):
        det = c.a1 * d.a2 - c.a2 * d.a1
        if det == 0:
            continue
        x = (c.rhs * d.a2 - c.a2 * d.rhs) / det
        y = (c.a1 * d.rhs - c.rhs * d.a1) / det
        p = (x, y)
        if all(k.holds(p) for k in constraints):
            feasible.append(p)
    vertices = _hull_ccw(feasible)
    max_sum = max(x + y for x, y in vertices)
    argmax = max(vertices, key=lambda p: (p[0] + p[1], p[0]))
    return DofRegion(tuple(constraints), vertices, max_sum, argmax)


def max_sum_dof(region: DofRegion) -> Fraction:
    """Exact maximum of D1 + D2 over the region; attained at a vertex."""
    return region.max_sum


def sum_dof_membership(x: Fraction) -> tuple[bool, int | None]:
    """Test whether x is an attainable sum-DoF level 2*(1 - 1/k) or 2.

    Returns (True, k) for x = 2*(1 - 1/k) with integer k >= 1,
    (True, None) for x = 2, and (False, None) otherwise.
    """
    x = Fraction(x)
    if x < 0:
        raise ValueError(f"sum DoF must be nonnegative, got {x}")
    if x == 2:
        return True, None
    if x > 2:
        return False, None
    k = Fraction(2) / (Fraction(2) - x)
    if k.denominator == 1 and k >= 1:
        return True, int(k)
    return False, None
