"""Slotted CSMA with hidden terminals, with and without sensed hidden-node knowledge.

Each node sends its frames to its nearest neighbor. A node with a queued
frame and no pending backoff senses the channel: it is busy when a node in
carrier-sense range is transmitting (``jcsc`` also treats transmitting known
hidden nodes as busy). Busy means re-sense after ``U[bmin, bmax]`` slots;
idle means transmit for ``frame_slots`` slots. A reception fails when the
receiver is itself transmitting or hears any other transmitter during the
frame; the sender then backs off ``U[1, cw * F * 2^stage]`` slots, with
``stage`` the capped retry count, and retransmits.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numba as nb
import numpy as np

from .rng import RngHandle
from .series import SeriesRow, TrialSeries, mean_ci

VARIANTS = ("conventional", "jcsc")


@dataclass(frozen=True)
class MacConfig:
    node_count: int = 10
    frame_slots: tuple = (5, 10, 20, 40)
    offered_load: float = 0.5
    arrival_prob: float | None = None
    backoff_window: tuple = (1, 3)
    collision_window_frames: int = 2
    max_backoff_stage: int = 5
    side_m: float = 100.0
    comm_range_m: float = 50.0
    carrier_sense_range_m: float = 50.0
    variant: str = "conventional"
    hidden_detection_fraction: float = 1.0
    trials: int = 20
    horizon_slots: int | None = None
    min_frames: int = 1000
    saturation_backlog: float = 0.1

    def __post_init__(self):
        object.__setattr__(self, "frame_slots", tuple(int(f) for f in self.frame_slots))
        object.__setattr__(self, "backoff_window", tuple(int(b) for b in self.backoff_window))
        if self.node_count < 2:
            raise ValueError("node_count must be >= 2")
        if any(f < 1 for f in self.frame_slots):
            raise ValueError("frame_slots entries must be >= 1")
        lo, hi = self.backoff_window
        if not 1 <= lo <= hi:
            raise ValueError("backoff_window must satisfy 1 <= min <= max")
        if self.arrival_prob is not None and not 0 < self.arrival_prob < 1:
            raise ValueError("arrival_prob must be in (0, 1)")
        if self.arrival_prob is None and not self.offered_load > 0:
            raise ValueError("offered_load must be positive")
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}")
        if not 0 <= self.hidden_detection_fraction <= 1:
            raise ValueError("hidden_detection_fraction must be in [0, 1]")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.collision_window_frames < 1 or self.max_backoff_stage < 0:
            raise ValueError("collision_window_frames must be >= 1 and max_backoff_stage >= 0")

    def arrival_prob_for(self, frame_slots: int) -> float:
        """Per-node per-slot Bernoulli arrival probability.

        Without an explicit ``arrival_prob`` it is set so the offered load
        ``node_count * p * frame_slots`` (frame airtime demanded per slot)
        equals ``offered_load``. Plain CSMA in the default 10-node world
        saturates at roughly 1.2-1.5 frame airtimes per slot thanks to spatial
        reuse, so the default 0.5 sits near 0.4 of that capacity.
        """
        p = self.arrival_prob
        if p is None:
            p = self.offered_load / (self.node_count * frame_slots)
        if not 0 < p < 1:
            raise ValueError(f"arrival probability {p} outside (0, 1) for frame_slots={frame_slots}")
        return p

    def horizon_for(self, frame_slots: int) -> int:
        if self.horizon_slots is not None:
            return int(self.horizon_slots)
        rate = self.node_count * self.arrival_prob_for(frame_slots)
        return int(math.ceil(1.5 * self.min_frames / rate))


@dataclass
class MacWorld:
    positions: np.ndarray
    comm_range_m: float
    carrier_sense_range_m: float
    receiver: np.ndarray
    hidden_pairs: list
    known_hidden: np.ndarray

    @property
    def n(self) -> int:
        return len(self.positions)

    def distances(self) -> np.ndarray:
        diff = self.positions[None, :, :] - self.positions[:, None, :]
        return np.hypot(diff[..., 0], diff[..., 1])

    @property
    def hears(self) -> np.ndarray:
        d = self.distances()
        return (d <= self.comm_range_m) & ~np.eye(self.n, dtype=bool)

    @property
    def senses(self) -> np.ndarray:
        d = self.distances()
        return (d <= self.carrier_sense_range_m) & ~np.eye(self.n, dtype=bool)

    @property
    def no_hidden(self) -> bool:
        return not self.hidden_pairs


def find_hidden_pairs(positions, comm_range_m: float, carrier_sense_range_m: float) -> list:
    """Unordered pairs ``(i, j)`` outside each other's carrier-sense range that some third node hears both of."""
    pos = np.asarray(positions, dtype=float)
    n = len(pos)
    d = np.hypot(*(pos[None, :, :] - pos[:, None, :]).transpose(2, 0, 1))
    reach = d <= comm_range_m
    pairs = []
    for i in range(n):
        for j in range(i + 1, n):
            if d[i, j] <= carrier_sense_range_m:
                continue
            if any(reach[i, r] and reach[j, r] for r in range(n) if r != i and r != j):
                pairs.append((i, j))
    return pairs


def build_mac_world(config: MacConfig, rng: RngHandle, positions=None, max_tries: int = 10_000) -> MacWorld:
    """Place nodes, pick nearest-neighbor receivers, find hidden pairs, draw which ones ND detected.

    Placement (``rng.child(0)``) is redrawn until every node's nearest
    neighbor is within communication range. Detection draws
    (``rng.child(1)``) are made for every hidden pair regardless of the
    variant, so the two variants see identical worlds.
    """
    if positions is None:
        g = rng.child(0).generator()
        for _ in range(max_tries):
            pos = g.uniform(0.0, config.side_m, size=(config.node_count, 2))
            d = np.hypot(*(pos[None, :, :] - pos[:, None, :]).transpose(2, 0, 1))
            np.fill_diagonal(d, np.inf)
            if np.all(d.min(axis=1) <= config.comm_range_m):
                break
        else:
            raise ValueError("could not place a network where every node has a neighbor in range")
    else:
        pos = np.asarray(positions, dtype=float)
        if len(pos) < 2:
            raise ValueError("node_count must be >= 2")
    d = np.hypot(*(pos[None, :, :] - pos[:, None, :]).transpose(2, 0, 1))
    np.fill_diagonal(d, np.inf)
    receiver = d.argmin(axis=1)
    if np.any(d[np.arange(len(pos)), receiver] > config.comm_range_m):
        raise ValueError("a node has no neighbor within communication range")

    pairs = find_hidden_pairs(pos, config.comm_range_m, config.carrier_sense_range_m)
    draws = rng.child(1).generator().random(len(pairs))
    known = np.zeros((len(pos), len(pos)), dtype=bool)
    for (i, j), u in zip(pairs, draws):
        if u < config.hidden_detection_fraction:
            known[i, j] = known[j, i] = True
    np.fill_diagonal(d, 0.0)
    assert not np.any(known & (d <= config.carrier_sense_range_m)), "known hidden node inside carrier-sense range"
    return MacWorld(pos, config.comm_range_m, config.carrier_sense_range_m, receiver, pairs, known)


@dataclass
class MacResult:
    delays: np.ndarray
    arrived: int
    delivered: int
    backlog: int
    attempts: np.ndarray
    hidden_collisions: int
    other_collisions: int
    half_duplex_failures: int
    offered_load: float
    saturated: bool
    conservation_ok: bool
    collision_geometry_ok: bool
    extra: dict = field(default_factory=dict)

    @property
    def mean_delay(self) -> float:
        return float(self.delays.mean()) if self.delays.size else math.nan


@nb.njit(cache=True)
def _mac_kernel(u_arr, u_back, p, frame, bmin, bmax, cw, max_stage, hears, defer, receiver,
                qcap, delays_cap, attempts_cap):
    horizon, n = u_arr.shape
    queue = np.zeros((n, qcap), dtype=np.int64)
    head = np.zeros(n, dtype=np.int64)
    tail = np.zeros(n, dtype=np.int64)
    back = np.zeros(n, dtype=np.int64)
    rem = np.zeros(n, dtype=np.int64)
    fail = np.zeros(n, dtype=np.bool_)
    stage = np.zeros(n, dtype=np.int64)
    active = np.zeros(n, dtype=np.bool_)
    delays = np.zeros(delays_cap, dtype=np.int64)
    attempts = np.zeros((attempts_cap, 3), dtype=np.int64)
    n_att = 0
    arrived = 0
    delivered = 0
    hidden_c = 0
    other_c = 0
    half_duplex = 0
    conservation_ok = True
    geometry_ok = True
    overflow = False
    for t in range(horizon):
        for i in range(n):
            if u_arr[t, i] < p:
                if tail[i] - head[i] < qcap:
                    queue[i, tail[i] % qcap] = t
                    tail[i] += 1
                    arrived += 1
                else:
                    overflow = True
        for i in range(n):
            active[i] = rem[i] > 0
        for i in range(n):
            if rem[i] > 0 or tail[i] == head[i]:
                continue
            if back[i] > 0:
                back[i] -= 1
                continue
            busy = False
            for j in range(n):
                if active[j] and (hears[i, j] or defer[i, j]):
                    busy = True
                    break
            if busy:
                back[i] = bmin + int(u_back[t, i] * (bmax - bmin + 1))
                continue
            rem[i] = frame
            fail[i] = False
            if n_att < attempts_cap:
                attempts[n_att, 0] = t
                attempts[n_att, 1] = i
                n_att += 1
        for i in range(n):
            active[i] = rem[i] > 0
        for i in range(n):
            if not active[i] or fail[i]:
                continue
            r = receiver[i]
            if active[r]:
                fail[i] = True
                half_duplex += 1
                continue
            for j in range(n):
                if j != i and j != r and active[j] and hears[r, j]:
                    fail[i] = True
                    if not (hears[r, i] and hears[r, j]):
                        geometry_ok = False
                    if hears[i, j]:
                        other_c += 1
                    else:
                        hidden_c += 1
                    break
        in_flight = 0
        for i in range(n):
            if not active[i]:
                continue
            rem[i] -= 1
            if rem[i] > 0:
                in_flight += 1
                continue
            if fail[i]:
                w = cw * frame * (1 << min(stage[i], max_stage))
                stage[i] += 1
                back[i] = 1 + int(u_back[t, i] * w)
            else:
                delays[delivered] = t + 1 - queue[i, head[i] % qcap]
                head[i] += 1
                delivered += 1
                stage[i] = 0
            # record outcome of the attempt that just ended
            for a in range(n_att - 1, -1, -1):
                if attempts[a, 1] == i:
                    attempts[a, 2] = 1 if fail[i] else 0
                    break
        queued = 0
        for i in range(n):
            queued += tail[i] - head[i]
        if arrived != delivered + (queued - in_flight) + in_flight:
            conservation_ok = False
    backlog = 0
    for i in range(n):
        backlog += tail[i] - head[i]
    return (delays[:delivered], arrived, delivered, backlog, attempts[:n_att], hidden_c, other_c,
            half_duplex, conservation_ok and not overflow, geometry_ok, overflow)


def run_mac(config: MacConfig, world: MacWorld, rng: RngHandle, frame_slots: int | None = None,
            variant: str | None = None) -> MacResult:
    """One trial of the slotted CSMA process over ``config.horizon_for(F)`` slots."""
    f = int(frame_slots if frame_slots is not None else config.frame_slots[0])
    v = variant or config.variant
    if v not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}")
    p = config.arrival_prob_for(f)
    horizon = config.horizon_for(f)
    g = rng.generator()
    u_arr = g.random((horizon, world.n))
    u_back = g.random((horizon, world.n))
    defer = world.known_hidden if v == "jcsc" else np.zeros_like(world.known_hidden)
    per_node = np.count_nonzero(u_arr < p, axis=0)
    qcap = int(per_node.max()) + 1
    attempts_cap = horizon * world.n // f + world.n + 1
    (delays, arrived, delivered, backlog, attempts, hid, oth, hd, cons_ok, geo_ok,
     _overflow) = _mac_kernel(u_arr, u_back, p, f, config.backoff_window[0], config.backoff_window[1],
                              config.collision_window_frames, config.max_backoff_stage,
                              world.hears, defer, world.receiver.astype(np.int64), qcap,
                              int(per_node.sum()) + 1, attempts_cap)
    # copies drop the oversized kernel buffers
    delays, attempts = delays.copy(), attempts.copy()
    load = world.n * p * f
    # a growing queue or too few completed frames means the delay estimate is not steady-state
    saturated = backlog > max(20, config.saturation_backlog * arrived) or delivered < config.min_frames
    return MacResult(delays, arrived, delivered, backlog, attempts, hid, oth, hd, load, saturated,
                     cons_ok, geo_ok, {"frame_slots": f, "variant": v, "horizon": horizon})


def mac_trials(config: MacConfig, frame_slots: int, rng: RngHandle, variants=VARIANTS) -> dict:
    """Per-trial mean delays, paired across variants.

    Trial ``t`` builds its world from ``rng.stream(t).child(0)`` and runs from
    ``rng.stream(t).child(1)`` for every variant.
    """
    out = {v: {"mean_delay": np.zeros(config.trials), "saturated": np.zeros(config.trials, dtype=bool),
               "no_hidden": np.zeros(config.trials, dtype=bool), "results": []} for v in variants}
    for t in range(config.trials):
        h = rng.stream(t)
        world = build_mac_world(config, h.child(0))
        for v in variants:
            res = run_mac(config, world, h.child(1), frame_slots, v)
            if not (res.conservation_ok and res.collision_geometry_ok):
                raise AssertionError("MAC invariant violated (conservation or collision geometry)")
            out[v]["mean_delay"][t] = res.mean_delay
            out[v]["saturated"][t] = res.saturated
            out[v]["no_hidden"][t] = world.no_hidden
            out[v]["results"].append(res)
    return out


def run_mac_sweep(config: MacConfig, rng: RngHandle, variants=VARIANTS,
                  trial_log: dict | None = None) -> TrialSeries:
    """Mean frame delay per frame length and variant, averaged over trials.

    If ``trial_log`` is given it receives the per-trial ``mac_trials`` output
    keyed by frame length.
    """
    if not config.frame_slots:
        raise ValueError("empty frame_slots")
    rows = []
    for f in config.frame_slots:
        res = mac_trials(config, f, rng, variants)
        if trial_log is not None:
            trial_log[f] = res
        for v in variants:
            mean, half = mean_ci(res[v]["mean_delay"])
            if res[v]["saturated"].any():
                flag = "saturated"
            elif res[v]["no_hidden"].all():
                flag = "warn_no_hidden"
            else:
                flag = "ok"
            rows.append(SeriesRow(f, v, "mean_delay_slots", mean, half, config.trials, flag))
    return TrialSeries("mac", rows)
