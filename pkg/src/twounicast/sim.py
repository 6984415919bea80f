"""Execute schemes over random channel draws and certify decodability.

Every received signal is tracked as an exact coefficient vector over the
joint symbol space (a_1..a_k1, b_1..b_k2): a reception is the gain-
weighted sum of its parents' transmit vectors plus, in noisy mode, a
fresh unit-variance noise term.  A destination decodes its flow when
rank([A | B]) - rank(B) equals its symbol count, where A holds the
own-flow columns of its stacked receptions and B the interference
columns; rank uses singular-value thresholding relative to the largest
singular value.

Gains are drawn independently per (edge, slot) straight from the seed,
so the assignment never depends on iteration order, and a realization
can be reproduced from its seed alone.  Gains with magnitude below 1e-3
are redrawn to keep the rank decisions well-conditioned.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .network import LayeredNetwork
from .scheme import (
    Coeff,
    LinearCombo,
    ReplayReceived,
    Scheme,
    SendReconstruction,
    SendSymbol,
    Silent,
    validate_scheme,
)

GAIN_GUARD = 1e-3
RANK_TOL = 1e-8
RECON_TOL = 1e-6

_MASK64 = (1 << 64) - 1
_EDGE_TAG, _NOISE_TAG, _TRIAL_TAG, _SYMBOL_TAG = 11, 13, 17, 19


class SimulationError(RuntimeError):
    pass


class MissingGainError(SimulationError):
    pass


class ReconstructionError(SimulationError):
    """A node was asked to transmit a form its history does not determine."""

    def __init__(self, node: str, slot: int, detail: str):
        super().__init__(f"reconstruction infeasible at ({node}, slot {slot}): {detail}")
        self.node = node
        self.slot = slot


@dataclass(frozen=True)
class ChannelRealization:
    seed: int
    gains: dict  # (u, v, global_slot) -> float

    def gain(self, u: str, v: str, slot: int) -> float:
        try:
            return self.gains[(u, v, slot)]
        except KeyError:
            raise MissingGainError(f"no gain drawn for edge ({u}, {v}) at slot {slot}") from None


def _unit_normal(entropy: tuple[int, ...], guard: float = GAIN_GUARD) -> float:
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))
    x = rng.standard_normal()
    while abs(x) < guard:
        x = rng.standard_normal()
    return float(x)


def draw_realization(net: LayeredNetwork, sch: Scheme, seed: int) -> ChannelRealization:
    """I.i.d. standard-normal gains for every edge at every slot.

    Fast fading: the gain process exists on each edge at all times, so
    references to an edge's gain outside its transmitting hop resolve too.
    """
    edge_index = {e: i for i, e in enumerate(sorted(net.edges))}
    seed &= _MASK64
    horizon = net.num_hops * sch.slots_per_hop
    gains = {}
    for (u, v), idx in edge_index.items():
        for g in range(1, horizon + 1):
            gains[(u, v, g)] = _unit_normal((seed, _EDGE_TAG, idx, g))
    return ChannelRealization(seed, gains)


def trial_seed(seed: int, trial: int) -> int:
    """Per-trial sub-seed; stable across platforms and iteration order."""
    ss = np.random.SeedSequence((seed & _MASK64, _TRIAL_TAG, trial))
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass
class Reception:
    slot: int  # global slot
    coeffs: np.ndarray  # (k1 + k2,)
    noise: np.ndarray | None  # (noise_dim,) in noisy mode


@dataclass
class SignalLedger:
    k1: int
    k2: int
    destinations: tuple[str, str]
    mode: str
    power: float
    receptions: dict  # node -> list[Reception], chronological
    mix_weights: dict  # (node, global_slot) -> np.ndarray over the node's knowledge rows
    noise_index: dict | None  # (node, global_slot) -> column in the noise basis

    @property
    def dim(self) -> int:
        return self.k1 + self.k2

    def rows(self, node: str) -> np.ndarray:
        recs = self.receptions.get(node, [])
        if not recs:
            return np.zeros((0, self.dim))
        return np.stack([r.coeffs for r in recs])

    def noise_rows(self, node: str) -> np.ndarray | None:
        recs = self.receptions.get(node, [])
        if not recs or recs[0].noise is None:
            return None
        return np.stack([r.noise for r in recs])


def _symbol_column(sch: Scheme, flow: int, index: int) -> int:
    return index - 1 if flow == 1 else sch.k1 + index - 1


def _eval_coeff(c: Coeff, real: ChannelRealization) -> float:
    val = c.const
    for ref in c.gains:
        val *= real.gain(ref.edge[0], ref.edge[1], ref.slot)
    return val


class _Engine:
    def __init__(self, net: LayeredNetwork, sch: Scheme, real: ChannelRealization,
                 mode: str, power: float, recon_tol: float):
        if mode not in ("noiseless", "noisy"):
            raise ValueError(f"mode must be 'noiseless' or 'noisy', got {mode!r}")
        self.net = net
        self.sch = sch
        self.real = real
        self.mode = mode
        self.power = power
        self.recon_tol = recon_tol
        self.dim = sch.k1 + sch.k2
        t = sch.slots_per_hop
        self.noise_index: dict = {}
        if mode == "noisy":
            for hop0 in range(net.num_hops):
                for local in range(1, t + 1):
                    g = hop0 * t + local
                    for recv in net.layers[hop0 + 1]:
                        self.noise_index[(recv, g)] = len(self.noise_index)
        self.noise_dim = len(self.noise_index)
        self.receptions: dict = {v: [] for v in net.nodes}
        self.mix_weights: dict = {}

    def _knowledge(self, node: str) -> np.ndarray:
        """Rows spanning what `node` can linearly determine about the symbols."""
        if self.net.layer_of(node) == 0:
            flow = 1 if node == self.net.sources[0] else 2
            count = self.sch.k1 if flow == 1 else self.sch.k2
            rows = np.zeros((count, self.dim))
            for i in range(count):
                rows[i, _symbol_column(self.sch, flow, i + 1)] = 1.0
            return rows
        recs = self.receptions[node]
        if not recs:
            return np.zeros((0, self.dim))
        return np.stack([r.coeffs for r in recs])

    def _knowledge_noise(self, node: str) -> np.ndarray:
        if self.net.layer_of(node) == 0:
            flow = 1 if node == self.net.sources[0] else 2
            count = self.sch.k1 if flow == 1 else self.sch.k2
            return np.zeros((count, self.noise_dim))
        recs = self.receptions[node]
        if not recs:
            return np.zeros((0, self.noise_dim))
        return np.stack([r.noise for r in recs])

    def _eval(self, node: str, spec, g: int) -> tuple[np.ndarray, np.ndarray]:
        zero = (np.zeros(self.dim), np.zeros(self.noise_dim))
        if isinstance(spec, Silent):
            return zero
        if isinstance(spec, SendSymbol):
            vec = np.zeros(self.dim)
            vec[_symbol_column(self.sch, spec.sym.flow, spec.sym.index)] = _eval_coeff(
                spec.scale, self.real
            )
            return vec, np.zeros(self.noise_dim)
        if isinstance(spec, ReplayReceived):
            rec = next((r for r in self.receptions[node] if r.slot == spec.slot), None)
            if rec is None:
                raise SimulationError(f"node {node!r} has no reception at slot {spec.slot}")
            scale = _eval_coeff(spec.scale, self.real)
            noise = scale * rec.noise if rec.noise is not None else np.zeros(self.noise_dim)
            return scale * rec.coeffs, noise
        if isinstance(spec, SendReconstruction):
            target = np.zeros(self.dim)
            for sym, coeff in spec.target:
                target[_symbol_column(self.sch, sym.flow, sym.index)] += _eval_coeff(
                    coeff, self.real
                )
            know = self._knowledge(node)
            if know.shape[0] == 0:
                raise ReconstructionError(node, g, "node has no received history")
            lam, *_ = np.linalg.lstsq(know.T, target, rcond=None)
            residual = float(np.linalg.norm(know.T @ lam - target))
            if residual > self.recon_tol * max(1.0, float(np.linalg.norm(target))):
                raise ReconstructionError(
                    node, g, f"local system does not determine the target (residual {residual:.3e})"
                )
            self.mix_weights[(node, g)] = lam
            scale = _eval_coeff(spec.scale, self.real)
            if self.mode == "noisy":
                noise = scale * (lam @ self._knowledge_noise(node))
            else:
                noise = np.zeros(self.noise_dim)
            return scale * target, noise
        if isinstance(spec, LinearCombo):
            vec = np.zeros(self.dim)
            noise = np.zeros(self.noise_dim)
            for weight, sub in spec.parts:
                v, n = self._eval(node, sub, g)
                vec += weight * v
                noise += weight * n
            return vec, noise
        raise SimulationError(f"bad transmit spec {spec!r}")

    def run(self) -> SignalLedger:
        t = self.sch.slots_per_hop
        for hop0, hb in enumerate(self.sch.hop_blocks):
            for local in range(1, t + 1):
                g = hop0 * t + local
                tx: dict[str, tuple[np.ndarray, np.ndarray]] = {}
                for node in self.net.layers[hop0]:
                    vec, noise = self._eval(node, hb.schedule.get((local, node), Silent()), g)
                    if self.mode == "noisy":
                        # normalize by signal power only: the factor is then a
                        # deterministic function of past gains, so downstream
                        # rebroadcasts stay proportional to stored receptions
                        p = float(vec @ vec)
                        if p > 0:
                            f = np.sqrt(self.power / p)
                            vec = f * vec
                            noise = f * noise
                    tx[node] = (vec, noise)
                for recv in self.net.layers[hop0 + 1]:
                    y = np.zeros(self.dim)
                    n = np.zeros(self.noise_dim) if self.mode == "noisy" else None
                    for u in self.net.parents(recv):
                        h = self.real.gain(u, recv, g)
                        y = y + h * tx[u][0]
                        if n is not None:
                            n = n + h * tx[u][1]
                    if n is not None:
                        n[self.noise_index[(recv, g)]] += 1.0
                    self.receptions[recv].append(Reception(g, y, n))
        return SignalLedger(
            k1=self.sch.k1,
            k2=self.sch.k2,
            destinations=self.net.destinations,
            mode=self.mode,
            power=self.power,
            receptions=self.receptions,
            mix_weights=self.mix_weights,
            noise_index=self.noise_index if self.mode == "noisy" else None,
        )


def execute(
    net: LayeredNetwork,
    sch: Scheme,
    real: ChannelRealization,
    mode: str = "noiseless",
    power: float = 100.0,
    recon_tol: float = RECON_TOL,
) -> SignalLedger:
    """Run the scheme hop by hop, slot by slot, over one channel draw."""
    validate_scheme(net, sch)
    return _Engine(net, sch, real, mode, power, recon_tol).run()


def _rank(mat: np.ndarray, tol: float) -> tuple[int, float]:
    """(rank, smallest kept singular value) with a relative threshold."""
    if mat.size == 0:
        return 0, 0.0
    svals = np.linalg.svd(mat, compute_uv=False)
    if svals.size == 0 or svals[0] == 0.0:
        return 0, 0.0
    kept = svals[svals > tol * svals[0]]
    return int(kept.size), float(kept[-1]) if kept.size else 0.0


def decodable(ledger: SignalLedger, destination_index: int, tol: float = RANK_TOL) -> bool:
    """True when the destination's own flow is resolvable past the interference."""
    ok, _ = decodability_margin(ledger, destination_index, tol)
    return ok


def decodability_margin(
    ledger: SignalLedger, destination_index: int, tol: float = RANK_TOL
) -> tuple[bool, float]:
    """Decodability plus the smallest singular value the rank decision kept."""
    if destination_index not in (1, 2):
        raise ValueError("destination_index must be 1 or 2")
    node = ledger.destinations[destination_index - 1]
    rows = ledger.rows(node)
    a_cols = np.arange(0, ledger.k1)
    b_cols = np.arange(ledger.k1, ledger.dim)
    own, other = (a_cols, b_cols) if destination_index == 1 else (b_cols, a_cols)
    k_own = ledger.k1 if destination_index == 1 else ledger.k2
    full_rank, margin = _rank(rows[:, np.concatenate([own, other])], tol)
    other_rank, _ = _rank(rows[:, other], tol)
    return full_rank - other_rank == k_own, margin


# -- direct numeric twin ------------------------------------------------------

def execute_numeric(
    net: LayeredNetwork,
    sch: Scheme,
    real: ChannelRealization,
    symbols: np.ndarray,
    ledger: SignalLedger,
) -> dict:
    """Propagate actual signal values (noiseless) through the network.

    Transmit values are computed from received values alone; the only
    input taken from the coefficient-tracked run is the mixing weights a
    node solved for its reconstructions, which the node derives from
    delayed gain knowledge.  Returns {(node, global_slot): value}.
    """
    values: dict = {}
    recv_slots: dict = {v: [] for v in net.nodes}
    t = sch.slots_per_hop

    def knowledge_values(node: str) -> np.ndarray:
        if net.layer_of(node) == 0:
            flow = 1 if node == net.sources[0] else 2
            count = sch.k1 if flow == 1 else sch.k2
            base = 0 if flow == 1 else sch.k1
            return symbols[base:base + count]
        return np.array([values[(node, s)] for s in recv_slots[node]])

    def eval_value(node: str, spec, g: int) -> float:
        if isinstance(spec, Silent):
            return 0.0
        if isinstance(spec, SendSymbol):
            col = _symbol_column(sch, spec.sym.flow, spec.sym.index)
            return _eval_coeff(spec.scale, real) * float(symbols[col])
        if isinstance(spec, ReplayReceived):
            return _eval_coeff(spec.scale, real) * values[(node, spec.slot)]
        if isinstance(spec, SendReconstruction):
            lam = ledger.mix_weights[(node, g)]
            return _eval_coeff(spec.scale, real) * float(lam @ knowledge_values(node))
        if isinstance(spec, LinearCombo):
            return sum(w * eval_value(node, sub, g) for w, sub in spec.parts)
        raise SimulationError(f"bad transmit spec {spec!r}")

    for hop0, hb in enumerate(sch.hop_blocks):
        for local in range(1, t + 1):
            g = hop0 * t + local
            tx = {
                node: eval_value(node, hb.schedule.get((local, node), Silent()), g)
                for node in net.layers[hop0]
            }
            for recv in net.layers[hop0 + 1]:
                values[(recv, g)] = sum(
                    real.gain(u, recv, g) * tx[u] for u in net.parents(recv)
                )
                recv_slots[recv].append(g)
    return values


def evaluate_ledger(ledger: SignalLedger, symbols: np.ndarray, noise: np.ndarray | None = None) -> dict:
    """{(node, slot): coefficient-vector dot symbols (+ noise part)}."""
    out = {}
    for node, recs in ledger.receptions.items():
        for r in recs:
            val = float(r.coeffs @ symbols)
            if noise is not None and r.noise is not None:
                val += float(r.noise @ noise)
            out[(node, r.slot)] = val
    return out


# -- Monte Carlo ---------------------------------------------------------------

@dataclass(frozen=True)
class SimulationReport:
    trials: int
    seed: int
    mode: str
    decodable_trials: tuple[int, int]
    declared_dof: tuple[Fraction, Fraction]
    achieved_dof: tuple[Fraction, Fraction] | None
    min_singular_values: dict  # {"d1": {"min":…, "mean":…}, "d2": …}
    per_trial: tuple  # (trial, seed, dec1, dec2, sigma1, sigma2)

    def to_json(self) -> str:
        doc = {
            "trials": self.trials,
            "seed": self.seed,
            "mode": self.mode,
            "decodable_trials": {
                "d1": self.decodable_trials[0],
                "d2": self.decodable_trials[1],
            },
            "declared_dof": [str(x) for x in self.declared_dof],
            "achieved_dof": (
                [str(x) for x in self.achieved_dof] if self.achieved_dof else None
            ),
            "min_singular_values": self.min_singular_values,
        }
        return json.dumps(doc, indent=2) + "\n"

    def to_csv(self) -> str:
        lines = ["trial,seed,d1_decodable,d2_decodable,d1_sigma_min,d2_sigma_min"]
        for row in self.per_trial:
            lines.append(
                f"{row[0]},{row[1]},{int(row[2])},{int(row[3])},{row[4]!r},{row[5]!r}"
            )
        return "\n".join(lines) + "\n"


def monte_carlo(
    net: LayeredNetwork,
    sch: Scheme,
    trials: int,
    seed: int,
    mode: str = "noiseless",
    power: float = 100.0,
    tol: float = RANK_TOL,
) -> SimulationReport:
    """Run `trials` independent realizations; deterministic in (seed, trials).

    The achieved DoF pair is the scheme's declared pair and is reported
    only when every trial decodes at both destinations.  Execution errors
    abort with the failing trial's seed in the message.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    validate_scheme(net, sch)
    dec_counts = [0, 0]
    sigmas: tuple[list[float], list[float]] = ([], [])
    per_trial = []
    for i in range(trials):
        tseed = trial_seed(seed, i)
        real = draw_realization(net, sch, tseed)
        try:
            ledger = execute(net, sch, real, mode=mode, power=power)
        except SimulationError as exc:
            raise SimulationError(f"trial {i} (seed {tseed}) failed: {exc}") from exc
        ok1, s1 = decodability_margin(ledger, 1, tol)
        ok2, s2 = decodability_margin(ledger, 2, tol)
        dec_counts[0] += ok1
        dec_counts[1] += ok2
        sigmas[0].append(s1)
        sigmas[1].append(s2)
        per_trial.append((i, tseed, ok1, ok2, s1, s2))
    achieved = sch.declared_dof if dec_counts == [trials, trials] else None
    stats = {
        f"d{j + 1}": {
            "min": min(sigmas[j]),
            "mean": sum(sigmas[j]) / trials,
        }
        for j in range(2)
    }
    return SimulationReport(
        trials=trials,
        seed=seed,
        mode=mode,
        decodable_trials=(dec_counts[0], dec_counts[1]),
        declared_dof=sch.declared_dof,
        achieved_dof=achieved,
        min_singular_values=stats,
        per_trial=tuple(per_trial),
    )
