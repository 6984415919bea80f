"""Time-slotted linear transmission schedules and CSIT legality.

A scheme assigns each (slot, node) of each hop block a transmit action.
Hop blocks run sequentially (all slots of hop 1, then hop 2, ...), so a
hop-h local slot t maps to the global slot (h-1)*T + t.  Coefficients
may reference channel gains; the knowledge model is: a node knows every
gain up to the previous slot, plus the current-slot gains on its own
incoming edges.  Anything else (current-slot gains elsewhere, future
gains) is illegal and is what rules out transmitter-side interference
neutralization.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .network import (
    LayeredNetwork,
    gen_bottleneck_family,
    gen_double_bottleneck_family,
    gen_no_bottleneck_example,
)

BUILTIN_FAMILIES = ("bottleneck", "double-bottleneck", "no-bottleneck")


class SchemeError(ValueError):
    """Raised when a scheme is structurally invalid for its network."""


@dataclass(frozen=True)
class SymbolId:
    """One information symbol; flow 1 symbols are the a_i, flow 2 the b_i."""

    flow: int
    index: int

    def __post_init__(self):
        if self.flow not in (1, 2) or self.index < 1:
            raise SchemeError(f"bad symbol: flow={self.flow} index={self.index}")

    @property
    def label(self) -> str:
        return f"{'a' if self.flow == 1 else 'b'}{self.index}"

    @classmethod
    def from_label(cls, s: str) -> "SymbolId":
        if len(s) >= 2 and s[0] in "ab" and s[1:].isdigit():
            return cls(1 if s[0] == "a" else 2, int(s[1:]))
        raise SchemeError(f"bad symbol label {s!r}")


def a(i: int) -> SymbolId:
    return SymbolId(1, i)


def b(i: int) -> SymbolId:
    return SymbolId(2, i)


@dataclass(frozen=True)
class GainRef:
    """Reference to the channel gain of `edge` at a global slot."""

    edge: tuple[str, str]
    slot: int


@dataclass(frozen=True)
class Coeff:
    """A constant times a product of referenced gains."""

    const: float = 1.0
    gains: tuple[GainRef, ...] = ()

    @classmethod
    def gain(cls, u: str, v: str, slot: int) -> "Coeff":
        return cls(1.0, (GainRef((u, v), slot),))


@dataclass(frozen=True)
class Silent:
    pass


@dataclass(frozen=True)
class SendSymbol:
    sym: SymbolId
    scale: Coeff = Coeff()


@dataclass(frozen=True)
class ReplayReceived:
    slot: int  # global slot of the node's own past reception
    scale: Coeff = Coeff()


@dataclass(frozen=True)
class SendReconstruction:
    """Transmit a linear form over symbols that the node's history determines.

    Feasibility (the node's received signals span the target) is checked
    at execution time by solving the node's local system.
    """

    target: tuple[tuple[SymbolId, Coeff], ...]
    scale: Coeff = Coeff()


@dataclass(frozen=True)
class LinearCombo:
    parts: tuple[tuple[float, "TransmitSpec"], ...]


TransmitSpec = Union[Silent, SendSymbol, ReplayReceived, SendReconstruction, LinearCombo]


@dataclass(frozen=True)
class HopBlock:
    slots: int
    schedule: dict  # (local slot 1..slots, node) -> TransmitSpec


@dataclass(frozen=True)
class Scheme:
    family: str
    m: int
    hop_blocks: tuple[HopBlock, ...]
    k1: int
    k2: int

    @property
    def slots_per_hop(self) -> int:
        return self.hop_blocks[0].slots

    @property
    def declared_symbols(self) -> tuple[int, int]:
        return (self.k1, self.k2)

    @property
    def declared_dof(self) -> tuple[Fraction, Fraction]:
        t = self.slots_per_hop
        return (Fraction(self.k1, t), Fraction(self.k2, t))

    @property
    def total_slots(self) -> int:
        return sum(hb.slots for hb in self.hop_blocks)

    def global_slot(self, hop: int, local: int) -> int:
        """Global index of local slot `local` of 1-based hop `hop`."""
        return (hop - 1) * self.slots_per_hop + local


# -- validation ------------------------------------------------------------

def _iter_coeffs(spec: TransmitSpec):
    if isinstance(spec, SendSymbol):
        yield spec.scale
    elif isinstance(spec, ReplayReceived):
        yield spec.scale
    elif isinstance(spec, SendReconstruction):
        yield spec.scale
        for _, c in spec.target:
            yield c
    elif isinstance(spec, LinearCombo):
        for _, sub in spec.parts:
            yield from _iter_coeffs(sub)


def _iter_symbols(spec: TransmitSpec):
    if isinstance(spec, SendSymbol):
        yield spec.sym
    elif isinstance(spec, SendReconstruction):
        for s, _ in spec.target:
            yield s
    elif isinstance(spec, LinearCombo):
        for _, sub in spec.parts:
            yield from _iter_symbols(sub)


def _check_send_symbol(net: LayeredNetwork, node: str, spec: TransmitSpec) -> None:
    if isinstance(spec, SendSymbol):
        owner = net.sources[spec.sym.flow - 1]
        if node != owner:
            raise SchemeError(
                f"node {node!r} cannot send raw symbol {spec.sym.label}; "
                f"only source {owner!r} holds it (use a reconstruction)"
            )
    elif isinstance(spec, LinearCombo):
        for _, sub in spec.parts:
            _check_send_symbol(net, node, sub)


def _check_replay(net: LayeredNetwork, sch: Scheme, node: str, spec: TransmitSpec) -> None:
    specs = [spec] if not isinstance(spec, LinearCombo) else [s for _, s in spec.parts]
    for s in specs:
        if isinstance(s, LinearCombo):
            _check_replay(net, sch, node, s)
        elif isinstance(s, ReplayReceived):
            layer = net.layer_of(node)
            if layer == 0:
                raise SchemeError(f"source {node!r} has no receptions to replay")
            lo = sch.global_slot(layer, 1)
            hi = sch.global_slot(layer, sch.slots_per_hop)
            if not (lo <= s.slot <= hi):
                raise SchemeError(
                    f"node {node!r} replays slot {s.slot}, but it only receives "
                    f"during global slots {lo}..{hi}"
                )


def validate_scheme(net: LayeredNetwork, sch: Scheme) -> None:
    """Structural checks: hop/layer alignment, symbol ranges, references."""
    if len(sch.hop_blocks) != net.num_hops:
        raise SchemeError(
            f"scheme has {len(sch.hop_blocks)} hop blocks, network has {net.num_hops} hops"
        )
    t = sch.hop_blocks[0].slots
    if t < 1:
        raise SchemeError("hop blocks need at least one slot")
    if any(hb.slots != t for hb in sch.hop_blocks):
        raise SchemeError("hop blocks must all have the same slot count")
    if sch.k1 < 0 or sch.k2 < 0:
        raise SchemeError("symbol counts must be nonnegative")
    horizon = net.num_hops * t
    for hop0, hb in enumerate(sch.hop_blocks):
        for (slot, node), spec in hb.schedule.items():
            if not (1 <= slot <= t):
                raise SchemeError(f"slot {slot} out of range 1..{t} in hop {hop0 + 1}")
            net._require(node)
            if net.layer_of(node) != hop0:
                raise SchemeError(
                    f"node {node!r} (layer {net.layer_of(node) + 1}) scheduled in "
                    f"hop {hop0 + 1}; nodes transmit only in their own hop block"
                )
            for sym in _iter_symbols(spec):
                bound = sch.k1 if sym.flow == 1 else sch.k2
                if sym.index > bound:
                    raise SchemeError(
                        f"symbol {sym.label} out of declared range (k{sym.flow}={bound})"
                    )
            _check_send_symbol(net, node, spec)
            _check_replay(net, sch, node, spec)
            for coeff in _iter_coeffs(spec):
                for ref in coeff.gains:
                    u, v = ref.edge
                    if not net.has_edge(u, v):
                        raise SchemeError(f"gain reference to nonexistent edge {ref.edge}")
                    if not (1 <= ref.slot <= horizon):
                        raise SchemeError(
                            f"gain reference to nonexistent slot {ref.slot} (horizon {horizon})"
                        )


# -- CSIT legality ----------------------------------------------------------

@dataclass(frozen=True)
class LegalityViolation:
    node: str
    slot: int  # global transmit slot
    gain: str | None  # "h(u,v)[t]" or None for non-gain violations
    reason: str


@dataclass(frozen=True)
class LegalityReport:
    ok: bool
    violations: tuple[LegalityViolation, ...]

    def to_json(self) -> str:
        doc = {
            "ok": self.ok,
            "violations": [
                {"node": v.node, "slot": v.slot, "gain": v.gain, "reason": v.reason}
                for v in self.violations
            ],
        }
        return json.dumps(doc, indent=2) + "\n"


def check_csit_legality(
    net: LayeredNetwork,
    sch: Scheme,
    min_delay: int = 1,
    stretch: int = 1,
    probe: bool = True,
) -> LegalityReport:
    """Check every referenced gain against the delayed-knowledge model.

    A gain at slot g referenced while transmitting at slot g_tx is legal
    when g is strictly in the past by at least `min_delay` slots, or when
    g == g_tx on an edge into the transmitting node (receivers learn
    their own incoming gains immediately).  `stretch` rescales the slot
    axis, modelling an interleaving of `stretch` parallel blocks: a gap
    of one scheme slot becomes `stretch` physical slots.

    With `probe` set, the scheme is also executed once on a fixed channel
    draw so that infeasible reconstructions are reported as violations.
    """
    validate_scheme(net, sch)
    violations: list[LegalityViolation] = []
    for hop0, hb in enumerate(sch.hop_blocks):
        for (slot, node), spec in sorted(hb.schedule.items()):
            g_tx = sch.global_slot(hop0 + 1, slot)
            for coeff in _iter_coeffs(spec):
                for ref in coeff.gains:
                    label = f"h{ref.edge}[{ref.slot}]"
                    if ref.slot > g_tx:
                        violations.append(
                            LegalityViolation(node, g_tx, label, "future gain")
                        )
                    elif ref.slot == g_tx:
                        if ref.edge[1] != node:
                            violations.append(
                                LegalityViolation(
                                    node, g_tx, label, "instantaneous cross-node gain"
                                )
                            )
                    elif stretch * (g_tx - ref.slot) < min_delay:
                        violations.append(
                            LegalityViolation(
                                node,
                                g_tx,
                                label,
                                f"gain not yet known under delay {min_delay}",
                            )
                        )
    if probe:
        from . import sim  # deferred: sim depends on this module

        try:
            real = sim.draw_realization(net, sch, seed=0xC0FFEE)
            sim.execute(net, sch, real)
        except sim.ReconstructionError as exc:
            violations.append(
                LegalityViolation(exc.node, exc.slot, None, f"reconstruction infeasible: {exc}")
            )
    return LegalityReport(not violations, tuple(violations))


# -- built-in schemes --------------------------------------------------------

def builtin_network(family: str, m: int | None = None) -> LayeredNetwork:
    """Generator topology matching a built-in scheme family."""
    if family == "bottleneck":
        return gen_bottleneck_family(_require_m(m))
    if family == "double-bottleneck":
        return gen_double_bottleneck_family(_require_m(m))
    if family == "no-bottleneck":
        if m is not None:
            raise SchemeError("the no-bottleneck family takes no parameter")
        return gen_no_bottleneck_example()
    raise SchemeError(f"unknown family {family!r}; choose from {BUILTIN_FAMILIES}")


def _require_m(m: int | None) -> int:
    if m is None or m < 1:
        raise SchemeError(f"family parameter m must be a positive integer, got {m}")
    return m


def builtin_scheme(family: str, m: int | None = None) -> Scheme:
    """The library's transmission strategy for one of the generator families.

    * bottleneck(m): m-slot hop blocks delivering m-1 flow-1 symbols and
      m flow-2 symbols; the distributor v2 retransmits the interference
      mix the choke point heard, so it can be cancelled there.
    * double-bottleneck(m): (m+1)-slot blocks running the bottleneck
      strategy, an extra slot for the m-th flow-1 symbol, then the
      mirrored strategy over the second half of the network.
    * no-bottleneck: the fixed 3-slot strategy delivering (1, 1) by
      retroactive interference cancellation at the parallel relays.
    """
    if family == "bottleneck":
        return _bottleneck_scheme(_require_m(m))
    if family == "double-bottleneck":
        return _double_bottleneck_scheme(_require_m(m))
    if family == "no-bottleneck":
        if m is not None:
            raise SchemeError("the no-bottleneck family takes no parameter")
        return _no_bottleneck_scheme()
    raise SchemeError(f"unknown family {family!r}; choose from {BUILTIN_FAMILIES}")


def _recon(*terms: tuple[SymbolId, Coeff]) -> SendReconstruction:
    return SendReconstruction(tuple(terms))


def _recon_symbol(sym: SymbolId) -> SendReconstruction:
    return _recon((sym, Coeff()))


def _bottleneck_scheme(m: int) -> Scheme:
    T = m
    hop1: dict = {}
    for t in range(1, m):
        hop1[(t, "s1")] = SendSymbol(a(t))
    for t in range(1, m + 1):
        hop1[(t, "s2")] = SendSymbol(b(t))

    g_h2s1 = T + 1  # global slot of hop 2, slot 1
    hop2: dict = {}
    for j in range(2, m + 2):
        hop2[(1, f"v{j}")] = _recon_symbol(b(j - 1))
    if m >= 2:
        hop2[(2, "v1")] = _recon_symbol(a(1))
        # the mix the choke point heard in slot 1, rebuilt from delayed gains
        hop2[(2, "v2")] = _recon(
            *((b(j - 1), Coeff.gain(f"v{j}", "w", g_h2s1)) for j in range(2, m + 2))
        )
        for t in range(3, m + 1):
            hop2[(t, "v1")] = _recon_symbol(a(t - 1))

    hop3: dict = {}
    if m == 1:
        hop3[(1, "w")] = ReplayReceived(g_h2s1)
    else:
        for t in range(1, m):
            hop3[(t, "w")] = _recon_symbol(a(t))
        hop3[(1, "u1")] = ReplayReceived(T + 2)
        for k in range(1, m):
            hop3[(k + 1, f"u{k}")] = ReplayReceived(g_h2s1)

    return Scheme(
        family="bottleneck",
        m=m,
        hop_blocks=(HopBlock(T, hop1), HopBlock(T, hop2), HopBlock(T, hop3)),
        k1=m - 1,
        k2=m,
    )


def _no_bottleneck_scheme() -> Scheme:
    T = 3
    hop1 = {}
    for t in (1, 2, 3):
        hop1[(t, "s1")] = SendSymbol(a(t))
        hop1[(t, "s2")] = SendSymbol(b(t))

    hop2 = {
        (1, "v3"): _recon_symbol(b(1)),
        (1, "v4"): _recon_symbol(b(2)),
        (1, "v5"): _recon_symbol(b(3)),
        (2, "v1"): _recon_symbol(a(1)),
        (2, "v2"): _recon_symbol(a(2)),
        # v3 rebuilds the full flow-2 mix v6 heard in slot 4
        (2, "v3"): _recon(
            (b(1), Coeff.gain("v3", "v6", 4)),
            (b(2), Coeff.gain("v4", "v6", 4)),
            (b(3), Coeff.gain("v5", "v6", 4)),
        ),
        (3, "v1"): _recon_symbol(a(3)),
        # v4 rebuilds the pair mix v7 heard in slot 4; v7 cancels it later
        (3, "v4"): _recon(
            (b(2), Coeff.gain("v4", "v7", 4)),
            (b(3), Coeff.gain("v5", "v7", 4)),
        ),
    }

    hop3 = {
        # v6's recovered flow-1 mix from slot 5
        (1, "v6"): _recon(
            (a(1), Coeff.gain("v1", "v6", 5)),
            (a(2), Coeff.gain("v2", "v6", 5)),
        ),
        (1, "v8"): ReplayReceived(4),
        (2, "v7"): ReplayReceived(5),
        (2, "v8"): ReplayReceived(5),
        (3, "v7"): _recon_symbol(a(3)),
        (3, "v8"): ReplayReceived(6),
    }

    return Scheme(
        family="no-bottleneck",
        m=1,
        hop_blocks=(HopBlock(T, hop1), HopBlock(T, hop2), HopBlock(T, hop3)),
        k1=3,
        k2=3,
    )


def _double_bottleneck_scheme(m: int) -> Scheme:
    T = m + 1

    def g(hop: int, t: int) -> int:
        return (hop - 1) * T + t

    hop1: dict = {}
    for t in range(1, m):
        hop1[(t, "s1")] = SendSymbol(a(t))
    hop1[(m + 1, "s1")] = SendSymbol(a(m))
    for t in range(1, m + 1):
        hop1[(t, "s2")] = SendSymbol(b(t))

    hop2: dict = {}
    for j in range(2, m + 2):
        hop2[(1, f"v{j}")] = _recon_symbol(b(j - 1))
    if m >= 2:
        hop2[(2, "v1")] = _recon_symbol(a(1))
        hop2[(2, "v2")] = _recon(
            *((b(j - 1), Coeff.gain(f"v{j}", "w", g(2, 1))) for j in range(2, m + 2))
        )
        for t in range(3, m + 1):
            hop2[(t, "v1")] = _recon_symbol(a(t - 1))
    hop2[(m + 1, "v1")] = _recon_symbol(a(m))

    hop3: dict = {}
    if m == 1:
        hop3[(1, "w")] = _recon_symbol(a(1))
        hop3[(2, "w")] = _recon_symbol(b(1))
    else:
        for t in range(1, m + 1):
            hop3[(t, "w")] = _recon_symbol(a(t))
        hop3[(1, "u1")] = ReplayReceived(g(2, 2))
        for k in range(1, m):
            hop3[(k + 1, f"u{k}")] = ReplayReceived(g(2, 1))

    hop4: dict = {}
    for t in range(1, m + 1):
        hop4[(t, "g1")] = _recon_symbol(a(t))
    for t in range(1, m):
        hop4[(t, "g2")] = _recon_symbol(b(t))
    hop4[(m + 1, "g2")] = _recon_symbol(b(m))

    hop5: dict = {}
    for j in range(1, m + 1):
        hop5[(1, f"q{j}")] = _recon_symbol(a(j))
    if m >= 2:
        hop5[(2, "y1")] = _recon_symbol(b(1))
        hop5[(2, "q1")] = _recon(
            *((a(j), Coeff.gain(f"q{j}", "w2", g(5, 1))) for j in range(1, m + 1))
        )
        for t in range(3, m + 1):
            hop5[(t, "y1")] = _recon_symbol(b(t - 1))
    hop5[(m + 1, "y1")] = _recon_symbol(b(m))

    hop6: dict = {}
    if m == 1:
        hop6[(1, "w2")] = _recon_symbol(b(1))
        hop6[(2, "w2")] = _recon_symbol(a(1))
    else:
        for t in range(1, m + 1):
            hop6[(t, "w2")] = _recon_symbol(b(t))
        hop6[(1, "z1")] = ReplayReceived(g(5, 2))
        for k in range(1, m):
            hop6[(k + 1, f"z{k}")] = ReplayReceived(g(5, 1))

    return Scheme(
        family="double-bottleneck",
        m=m,
        hop_blocks=tuple(HopBlock(T, h) for h in (hop1, hop2, hop3, hop4, hop5, hop6)),
        k1=m,
        k2=m,
    )


# -- JSON wire format --------------------------------------------------------

def _coeff_to_obj(c: Coeff):
    if not c.gains:
        return c.const
    return {
        "const": c.const,
        "gains": [{"edge": list(g.edge), "slot": g.slot} for g in c.gains],
    }


def _coeff_from_obj(obj) -> Coeff:
    if isinstance(obj, (int, float)):
        return Coeff(float(obj))
    if isinstance(obj, dict):
        gains = tuple(
            GainRef((g["edge"][0], g["edge"][1]), int(g["slot"]))
            for g in obj.get("gains", [])
        )
        return Coeff(float(obj.get("const", 1.0)), gains)
    raise SchemeError(f"bad coefficient {obj!r}")


def _spec_to_obj(spec: TransmitSpec) -> dict:
    if isinstance(spec, Silent):
        return {"kind": "silent"}
    if isinstance(spec, SendSymbol):
        return {"kind": "symbol", "symbol": spec.sym.label, "scale": _coeff_to_obj(spec.scale)}
    if isinstance(spec, ReplayReceived):
        return {"kind": "replay", "slot": spec.slot, "scale": _coeff_to_obj(spec.scale)}
    if isinstance(spec, SendReconstruction):
        return {
            "kind": "reconstruct",
            "target": [
                {"symbol": s.label, "coeff": _coeff_to_obj(c)} for s, c in spec.target
            ],
            "scale": _coeff_to_obj(spec.scale),
        }
    if isinstance(spec, LinearCombo):
        return {
            "kind": "combo",
            "parts": [{"weight": w, "spec": _spec_to_obj(s)} for w, s in spec.parts],
        }
    raise SchemeError(f"bad transmit spec {spec!r}")


def _spec_from_obj(obj: dict) -> TransmitSpec:
    kind = obj.get("kind")
    if kind == "silent":
        return Silent()
    if kind == "symbol":
        return SendSymbol(SymbolId.from_label(obj["symbol"]), _coeff_from_obj(obj.get("scale", 1.0)))
    if kind == "replay":
        return ReplayReceived(int(obj["slot"]), _coeff_from_obj(obj.get("scale", 1.0)))
    if kind == "reconstruct":
        target = tuple(
            (SymbolId.from_label(t["symbol"]), _coeff_from_obj(t.get("coeff", 1.0)))
            for t in obj["target"]
        )
        return SendReconstruction(target, _coeff_from_obj(obj.get("scale", 1.0)))
    if kind == "combo":
        parts = tuple((float(p["weight"]), _spec_from_obj(p["spec"])) for p in obj["parts"])
        return LinearCombo(parts)
    raise SchemeError(f"unknown transmit spec kind {kind!r}")


def serialize_scheme(sch: Scheme) -> str:
    doc = {
        "family": sch.family,
        "m": sch.m,
        "hops": [
            {
                "T": hb.slots,
                "schedule": {
                    f"{slot},{node}": _spec_to_obj(spec)
                    for (slot, node), spec in sorted(hb.schedule.items())
                },
            }
            for hb in sch.hop_blocks
        ],
        "symbols": {"k1": sch.k1, "k2": sch.k2},
    }
    return json.dumps(doc, indent=2) + "\n"


def parse_scheme(text: str) -> Scheme:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemeError(f"not valid JSON: {exc}") from exc
    try:
        hops = []
        for hop in doc["hops"]:
            schedule = {}
            for key, obj in hop["schedule"].items():
                slot_str, node = key.split(",", 1)
                schedule[(int(slot_str), node)] = _spec_from_obj(obj)
            hops.append(HopBlock(int(hop["T"]), schedule))
        if not hops:
            raise SchemeError("scheme needs at least one hop block")
        return Scheme(
            family=str(doc.get("family", "custom")),
            m=int(doc.get("m", 1)),
            hop_blocks=tuple(hops),
            k1=int(doc["symbols"]["k1"]),
            k2=int(doc["symbols"]["k2"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, SchemeError):
            raise
        raise SchemeError(f"bad scheme document: {exc}") from exc
