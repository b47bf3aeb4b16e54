"""Slotted directional neighbor discovery: random scanning (CRA) vs sensing-prior RL-CRA.

Node 0 is the reference. Every slot each node independently transmits with
probability ``tx_probability`` (else listens) and points its beam at a sector
drawn from its own policy. Node ``i`` discovers node ``j`` when ``j``
transmits toward the sector holding ``i`` while ``i`` listens toward the
sector holding ``j`` and the two are within communication range. A run ends
when the reference has discovered all of its neighbors, or at ``slot_cap``.

In ``rl_cra`` every node starts from ``w_s = 1 + beta * hits_s`` (radar hits
inside the sensing range) and, after each listening slot, multiplies the
listened sector's weight by ``1 + alpha`` on a new discovery and ``1 - alpha``
otherwise. Selection probabilities mix in a uniform floor:
``p_s = eps + (1 - K eps) w_s / sum(w)``, so they sum to one and never drop
below ``eps``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numba as nb
import numpy as np

from .geometry import NodeWorld, place_around_reference, place_nodes, sector_count_for
from .rng import RngHandle
from .series import SeriesRow, TrialSeries, mean_ci

ALGORITHMS = ("cra", "rl_cra")
_BLOCK = 4096


@dataclass(frozen=True)
class NdConfig:
    neighbor_count: int = 30
    beamwidth_deg: float = 10.0
    sense_to_comm_ratio: float = 0.5
    comm_range_m: float = 100.0
    tx_probability: float = 0.5
    prior_boost: float = 9.0
    learning_rate: float = 0.1
    exploration_floor: float = 0.005
    slot_cap: int = 1_000_000
    trials: int = 1000
    placement: str = "disc"
    side_m: float = 200.0

    def __post_init__(self):
        if self.neighbor_count < 0:
            raise ValueError("neighbor_count must be >= 0")
        if not 0 < self.tx_probability < 1:
            raise ValueError("tx_probability must be in (0, 1)")
        if self.slot_cap < 1:
            raise ValueError("slot_cap must be >= 1")
        if self.exploration_floor < 0 or self.exploration_floor * self.sector_count > 1:
            raise ValueError("exploration_floor * sector_count must be <= 1")
        if not 0 <= self.learning_rate < 1:
            raise ValueError("learning_rate must be in [0, 1)")
        if self.prior_boost < 0:
            raise ValueError("prior_boost must be >= 0")
        if self.placement not in ("disc", "square"):
            raise ValueError("placement must be 'disc' or 'square'")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")

    @property
    def sector_count(self) -> int:
        return sector_count_for(self.beamwidth_deg)


@dataclass
class SectorPolicy:
    weights: np.ndarray
    mode: str = "uniform"
    floor: float = 0.0

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        if np.any(self.weights < 0) or self.weights.sum() <= 0:
            raise ValueError("weights must be non-negative with a positive sum")
        if self.mode not in ("uniform", "rl"):
            raise ValueError("mode must be 'uniform' or 'rl'")
        if self.floor * len(self.weights) > 1:
            raise ValueError("floor * sector_count must be <= 1")

    @classmethod
    def from_hits(cls, hits, mode: str, prior_boost: float, floor: float) -> "SectorPolicy":
        hits = np.asarray(hits, dtype=float)
        if mode == "uniform":
            return cls(np.ones_like(hits), "uniform", floor)
        return cls(1.0 + prior_boost * hits, "rl", floor)

    @property
    def raw_probabilities(self) -> np.ndarray:
        return self.weights / self.weights.sum()

    @property
    def probabilities(self) -> np.ndarray:
        k = len(self.weights)
        return self.floor + (1.0 - k * self.floor) * self.raw_probabilities


@dataclass
class DiscoveryState:
    discovered: np.ndarray
    slots_elapsed: int
    sensing_hits: np.ndarray
    discovery_slot: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    truncated: bool = False
    policy_violations: int = 0


def sensing_scan(world: NodeWorld, node: int = 0) -> np.ndarray:
    """Per-sector count of nodes inside ``node``'s sensing range (binary, noiseless)."""
    d = world.distances()[node]
    sec = world.sectors()[node]
    hits = np.zeros(world.sector_count, dtype=np.int64)
    for j in range(world.n):
        if j != node and d[j] <= world.sense_range_m:
            hits[sec[j]] += 1
    return hits


def reference_neighbors(world: NodeWorld, node: int = 0) -> np.ndarray:
    d = world.distances()[node]
    idx = np.flatnonzero(d <= world.comm_range_m)
    return idx[idx != node]


def build_world(config: NdConfig, rng: RngHandle, neighbor_count: int | None = None) -> NodeWorld:
    n = config.neighbor_count if neighbor_count is None else neighbor_count
    if config.placement == "disc":
        return place_around_reference(rng, n, config.comm_range_m, sense_ratio=config.sense_to_comm_ratio,
                                      beamwidth_deg=config.beamwidth_deg)
    return place_nodes(rng, n + 1, config.side_m, comm_range_m=config.comm_range_m,
                       sense_ratio=config.sense_to_comm_ratio, beamwidth_deg=config.beamwidth_deg)


@nb.njit(cache=True)
def _refresh(w, eps, cdf):
    k = w.shape[0]
    tot = 0.0
    for s in range(k):
        tot += w[s]
    acc = 0.0
    lo = 1.0
    for s in range(k):
        p = eps + (1.0 - k * eps) * w[s] / tot
        if p < lo:
            lo = p
        acc += p
        cdf[s] = acc
    return acc, lo


@nb.njit(cache=True)
def _pick(cdf, u):
    k = cdf.shape[0]
    # cdf[-1] may differ from 1 by rounding; scale the draw instead of renormalising
    v = u * cdf[k - 1]
    for s in range(k):
        if v < cdf[s]:
            return s
    return k - 1


@nb.njit(cache=True)
def _run_block(u, t0, cap, sec, members, counts, w, cdf, disc, disc_slot, remaining,
               rl, alpha, eps, p_tx, tx, ch):
    """Advance the simulation through the slots in block ``u``; returns (slot, remaining, violations)."""
    n = sec.shape[0]
    k = w.shape[1]
    violations = 0
    for b in range(u.shape[0]):
        t = t0 + b
        if remaining == 0 or t >= cap:
            return t, remaining, violations
        for i in range(n):
            tx[i] = u[b, i, 0] < p_tx
            ch[i] = _pick(cdf[i], u[b, i, 1])
        for i in range(n):
            if tx[i]:
                continue
            s = ch[i]
            new = 0
            for q in range(counts[i, s]):
                j = members[i, s, q]
                if tx[j] and ch[j] == sec[j, i] and not disc[i, j]:
                    disc[i, j] = True
                    new += 1
                    if i == 0:
                        disc_slot[j] = t + 1
                        remaining -= 1
            if rl:
                if new > 0:
                    w[i, s] *= 1.0 + alpha
                else:
                    w[i, s] *= 1.0 - alpha
                tot = 0.0
                for q in range(k):
                    tot += w[i, q]
                if tot < 1e-200:
                    for q in range(k):
                        w[i, q] /= tot
                acc, lo = _refresh(w[i], eps, cdf[i])
                if abs(acc - 1.0) > 1e-12 or lo < eps * (1.0 - 1e-12):
                    violations += 1
    t = t0 + u.shape[0]
    return t, remaining, violations


def run_discovery(config: NdConfig, world: NodeWorld, algorithm: str, rng: RngHandle,
                  sensing_hits: np.ndarray | None = None) -> DiscoveryState:
    """Simulate one discovery run for the reference node (node 0).

    ``sensing_hits`` overrides every node's radar scan (shape ``(n, K)``);
    CRA ignores it by construction.
    """
    if algorithm not in ALGORITHMS:
        raise ValueError(f"algorithm must be one of {ALGORITHMS}")
    n, k = world.n, world.sector_count
    sec = world.sectors()
    dist = world.distances()
    inrange = (dist <= world.comm_range_m) & ~np.eye(n, dtype=bool)

    if sensing_hits is None:
        sensing_hits = np.stack([sensing_scan(world, i) for i in range(n)])
    rl = algorithm == "rl_cra"
    mode = "rl" if rl else "uniform"
    w = np.stack([SectorPolicy.from_hits(sensing_hits[i], mode, config.prior_boost,
                                         config.exploration_floor).weights for i in range(n)])
    eps = config.exploration_floor
    cdf = np.empty((n, k))
    for i in range(n):
        _refresh(w[i], eps, cdf[i])

    counts = np.zeros((n, k), dtype=np.int64)
    members = np.zeros((n, k, max(n, 1)), dtype=np.int64)
    for i in range(n):
        for j in np.flatnonzero(inrange[i]):
            s = sec[i, j]
            members[i, s, counts[i, s]] = j
            counts[i, s] += 1

    neighbors = reference_neighbors(world)
    disc = np.zeros((n, n), dtype=bool)
    disc_slot = np.zeros(n, dtype=np.int64)
    remaining = len(neighbors)
    t, violations = 0, 0
    gen = rng.generator()
    tx = np.zeros(n, dtype=np.bool_)
    ch = np.zeros(n, dtype=np.int64)
    while remaining > 0 and t < config.slot_cap:
        u = gen.random((min(_BLOCK, config.slot_cap - t), n, 2))
        t, remaining, v = _run_block(u, t, config.slot_cap, sec, members, counts, w, cdf, disc, disc_slot,
                                     remaining, rl, config.learning_rate, eps, config.tx_probability, tx, ch)
        violations += v

    return DiscoveryState(
        discovered=disc[0, neighbors].copy(),
        slots_elapsed=int(t),
        sensing_hits=np.asarray(sensing_hits[0]),
        discovery_slot=disc_slot[neighbors].copy(),
        truncated=bool(remaining > 0),
        policy_violations=int(violations),
    )


def nd_trials(config: NdConfig, neighbor_count: int, rng: RngHandle, algorithms=ALGORITHMS) -> dict:
    """Per-trial slot counts and truncation flags, paired across algorithms.

    Trial ``t`` builds its world from ``rng.stream(t).child(0)`` and drives the
    slot process from ``rng.stream(t).child(1)``, identical for every algorithm.
    """
    out = {a: {"slots": np.zeros(config.trials, dtype=np.int64),
               "truncated": np.zeros(config.trials, dtype=bool)} for a in algorithms}
    for t in range(config.trials):
        h = rng.stream(t)
        world = build_world(config, h.child(0), neighbor_count)
        for a in algorithms:
            st = run_discovery(config, world, a, h.child(1))
            if st.policy_violations:
                raise AssertionError("sector policy left the probability simplex / floor")
            out[a]["slots"][t] = st.slots_elapsed
            out[a]["truncated"][t] = st.truncated
    return out


def run_nd_sweep(config: NdConfig, neighbor_counts, rng: RngHandle, algorithms=ALGORITHMS,
                 trial_log: dict | None = None) -> TrialSeries:
    """Censored mean slots to full discovery per neighbor count and algorithm.

    If ``trial_log`` is given it receives the per-trial ``nd_trials`` output
    keyed by neighbor count.
    """
    counts = [int(c) for c in neighbor_counts]
    if not counts:
        raise ValueError("empty neighbor_counts")
    rows = []
    for c in counts:
        res = nd_trials(config, c, rng, algorithms)
        if trial_log is not None:
            trial_log[c] = res
        for a in algorithms:
            mean, half = mean_ci(res[a]["slots"])
            frac = float(res[a]["truncated"].mean())
            rows.append(SeriesRow(c, a, "mean_slots", mean, half, config.trials,
                                  "truncated" if frac > 0 else "ok", frac))
    return TrialSeries("nd", rows)
