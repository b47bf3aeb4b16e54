"""OFDM radar range/velocity estimation from a known transmitted grid."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .waveform import FrameGrid, WaveformConfig

_DIV_GUARD = 1e-12


@dataclass(frozen=True)
class SensingEstimate:
    range_m: float
    velocity_mps: float
    peak_to_sidelobe_db: float
    excluded_elements: int = 0

    @property
    def division_guard_hit(self) -> bool:
        return self.excluded_elements > 0


def null_peer_code(received: np.ndarray, config: WaveformConfig) -> np.ndarray:
    """Remove the component along the peer's code row from every tile.

    Only meaningful for ``cd_ofdm``: the peer's unknown data lives in a
    one-dimensional subspace per tile, so projecting it out cancels the peer
    while removing just ``1/L`` of the noise.
    """
    a, b = config.tiles
    lt, lf = config.spread_time, config.spread_freq
    code = config.code_tile(config.peer_code_row)  # (Lt, Lf), entries +/-1
    y = np.asarray(received).reshape(a, lt, b, lf)
    coef = (y * code[None, :, None, :]).sum(axis=(1, 3)) / config.spread_length
    y = y - coef[:, None, :, None] * code[None, :, None, :]
    return y.reshape(config.num_symbols, config.num_subcarriers)


def _parabolic_offset(left: float, center: float, right: float) -> float:
    denom = left - 2.0 * center + right
    if denom == 0.0:
        return 0.0
    return float(np.clip(0.5 * (left - right) / denom, -0.5, 0.5))


def range_doppler_map(received: np.ndarray, transmitted: np.ndarray):
    """Element-wise division, IDFT over subcarriers, DFT over symbols.

    Returns ``(complex map, excluded count)``; rows are Doppler bins in FFT
    order, columns are delay bins.
    """
    x = np.asarray(transmitted)
    y = np.asarray(received)
    ok = np.abs(x) > _DIV_GUARD
    z = np.zeros_like(y, dtype=complex)
    np.divide(y, x, out=z, where=ok)
    delay = np.fft.ifft(z, axis=1)
    return np.fft.fft(delay, axis=0), int(ok.size - np.count_nonzero(ok))


def estimate_range_velocity(received, transmitted, config: WaveformConfig,
                            null_peer: bool = False) -> SensingEstimate:
    """Single-target range/velocity from the 2D periodogram peak.

    The peak search is restricted to delay bins inside the cyclic prefix;
    3-point parabolic interpolation on the magnitude refines both axes. With
    ``null_peer`` (``cd_ofdm`` only) the peer code row is projected out before
    division; without a peer present that projection only costs signal, so it
    is off by default.
    """
    x = transmitted.freq_symbols if isinstance(transmitted, FrameGrid) else np.asarray(transmitted)
    y = np.asarray(received)
    if y.shape != x.shape or x.shape != (config.num_symbols, config.num_subcarriers):
        raise ValueError("config mismatch: grid shapes differ")
    if null_peer and config.mode == "cd_ofdm":
        y = null_peer_code(y, config)
    rd, excluded = range_doppler_map(y, x)
    mag = np.abs(rd)
    m, n = mag.shape
    kmax = min(config.cp_samples, n - 1)
    search = mag[:, : kmax + 1]
    l_pk, k_pk = np.unravel_index(int(np.argmax(search)), search.shape)
    peak = mag[l_pk, k_pk]

    dk = _parabolic_offset(mag[l_pk, (k_pk - 1) % n], peak, mag[l_pk, (k_pk + 1) % n])
    dl = _parabolic_offset(mag[(l_pk - 1) % m, k_pk], peak, mag[(l_pk + 1) % m, k_pk]) if m > 2 else 0.0

    rng_bin = min(max(k_pk + dk, 0.0), float(config.cp_samples))
    dop_bin = l_pk + dl
    if dop_bin >= m / 2:
        dop_bin -= m

    side = search.copy()
    side[[(l_pk + d) % m for d in (-1, 0, 1)], max(k_pk - 1, 0): k_pk + 2] = 0.0
    side_max = float(side.max()) if side.size else 0.0
    pslr = math.inf if side_max == 0.0 else 20.0 * math.log10(peak / side_max)

    return SensingEstimate(
        range_m=rng_bin * config.range_bin_m,
        velocity_mps=dop_bin * config.velocity_bin_mps,
        peak_to_sidelobe_db=pslr,
        excluded_elements=excluded,
    )
