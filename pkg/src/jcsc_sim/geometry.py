"""Planar node placement and beam-sector arithmetic."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .rng import RngHandle


@dataclass(frozen=True)
class NodeWorld:
    """Static node positions plus the radio ranges shared by every node.

    ``positions`` is an ``(n, 2)`` array in meters. Positions are checked to
    lie in the deployment square ``[0, side_m]^2``.
    """

    positions: np.ndarray
    comm_range_m: float
    sense_ratio: float = 0.5
    sector_count: int = 36
    side_m: float = 100.0

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float).reshape(-1, 2)
        object.__setattr__(self, "positions", pos)
        if len(pos) == 0:
            raise ValueError("empty world: at least one node is required")
        if self.comm_range_m <= 0 or self.sense_ratio <= 0:
            raise ValueError("ranges must be positive")
        if self.sector_count < 1:
            raise ValueError("sector_count must be >= 1")
        if np.any(pos < 0) or np.any(pos > self.side_m):
            raise ValueError(f"node outside deployment square [0, {self.side_m}]^2")

    @property
    def sense_range_m(self) -> float:
        return self.sense_ratio * self.comm_range_m

    @property
    def n(self) -> int:
        return len(self.positions)

    def distances(self) -> np.ndarray:
        diff = self.positions[None, :, :] - self.positions[:, None, :]
        return np.hypot(diff[..., 0], diff[..., 1])

    def sectors(self) -> np.ndarray:
        """``out[i, j]`` is the sector of node j as seen from node i (diagonal is -1)."""
        return sector_matrix(self.positions, self.sector_count)


def sector_count_for(beamwidth_deg: float) -> int:
    return int(round(360.0 / beamwidth_deg))


def place_nodes(rng: RngHandle, n: int, side_m: float, *, comm_range_m: float = 50.0,
                sense_ratio: float = 0.5, beamwidth_deg: float = 10.0) -> NodeWorld:
    """Drop ``n`` nodes i.i.d. uniformly over ``[0, side_m]^2``."""
    if n < 1:
        raise ValueError("empty world: n must be >= 1")
    if side_m <= 0:
        raise ValueError("side_m must be positive")
    pos = rng.generator().uniform(0.0, side_m, size=(n, 2))
    return NodeWorld(pos, comm_range_m, sense_ratio, sector_count_for(beamwidth_deg), side_m)


def place_around_reference(rng: RngHandle, neighbors: int, comm_range_m: float, *,
                           sense_ratio: float = 0.5, beamwidth_deg: float = 10.0) -> NodeWorld:
    """Reference node at the center of a ``2R`` square, neighbors uniform in its comm disc.

    Node 0 is the reference. Area-uniform placement: radius ``R*sqrt(U)``.
    """
    if neighbors < 0:
        raise ValueError("neighbor count must be >= 0")
    g = rng.generator()
    r = comm_range_m * np.sqrt(g.random(neighbors))
    theta = 2.0 * np.pi * g.random(neighbors)
    center = np.array([comm_range_m, comm_range_m])
    pts = center + np.column_stack([r * np.cos(theta), r * np.sin(theta)])
    pos = np.vstack([center, pts])
    # float rounding can push a point a hair outside the square
    pos = np.clip(pos, 0.0, 2.0 * comm_range_m)
    return NodeWorld(pos, comm_range_m, sense_ratio, sector_count_for(beamwidth_deg), 2.0 * comm_range_m)


def _bearing_deg(dx, dy):
    b = np.mod(np.degrees(np.arctan2(dy, dx)), 360.0)
    return np.where(b >= 360.0, 0.0, b)


def sector_matrix(positions: np.ndarray, sector_count: int) -> np.ndarray:
    pos = np.asarray(positions, dtype=float)
    dx = pos[None, :, 0] - pos[:, None, 0]
    dy = pos[None, :, 1] - pos[:, None, 1]
    width = 360.0 / sector_count
    sec = np.floor(_bearing_deg(dx, dy) / width).astype(np.int64)
    sec = np.minimum(sec, sector_count - 1)
    np.fill_diagonal(sec, -1)
    return sec


def sector_of(src, dst, sector_count: int) -> int:
    """Index of the beam sector at ``src`` that contains ``dst``.

    Sectors are half-open ``[k*w, (k+1)*w)`` with bearing measured
    counter-clockwise from +x, so a bearing on an edge belongs to the
    higher-index sector.
    """
    dx = float(dst[0]) - float(src[0])
    dy = float(dst[1]) - float(src[1])
    if dx == 0.0 and dy == 0.0:
        raise ValueError("undefined bearing: coincident points")
    return int(sector_matrix(np.array([src, dst], dtype=float), sector_count)[0, 1])


def bearing_deg(src, dst) -> float:
    return float(_bearing_deg(dst[0] - src[0], dst[1] - src[1]))


__all__ = [
    "NodeWorld",
    "place_nodes",
    "place_around_reference",
    "sector_of",
    "sector_matrix",
    "sector_count_for",
    "bearing_deg",
]
