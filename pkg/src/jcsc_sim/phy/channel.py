"""Communication (AWGN) and monostatic echo channels on the frequency grid.

SNR values are per resource element, referenced to the unit transmit power
of every grid entry.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..rng import RngHandle
from .waveform import SPEED_OF_LIGHT, FrameGrid, WaveformConfig, qpsk_map, spread

NO_NOISE = math.inf


@dataclass(frozen=True)
class PointTarget:
    range_m: float
    velocity_mps: float = 0.0
    reflect_amp: complex = 1.0 + 0.0j

    def __post_init__(self):
        if self.range_m < 0:
            raise ValueError("target range must be >= 0")

    @property
    def delay_s(self) -> float:
        return 2.0 * self.range_m / SPEED_OF_LIGHT

    def doppler_hz(self, carrier_hz: float) -> float:
        return 2.0 * self.velocity_mps * carrier_hz / SPEED_OF_LIGHT


def check_unambiguous(target: PointTarget, config: WaveformConfig) -> None:
    # small slack so a target placed exactly at the CP edge is accepted
    if target.delay_s > config.cp_duration * (1 + 1e-12):
        raise ValueError(
            f"scenario error: target at {target.range_m} m exceeds unambiguous range "
            f"{config.max_range_m:.3f} m (round trip longer than cyclic prefix)")


def unit_noise(shape, gen: np.random.Generator) -> np.ndarray:
    """Circular complex Gaussian with unit total variance per entry."""
    return (gen.standard_normal(shape) + 1j * gen.standard_normal(shape)) / math.sqrt(2.0)


def _grid(frame) -> np.ndarray:
    return frame.freq_symbols if isinstance(frame, FrameGrid) else np.asarray(frame)


def apply_comm_channel(frame, snr_db: float, rng: RngHandle) -> np.ndarray:
    """Flat unit-gain LOS link plus AWGN at ``snr_db`` per resource element.

    ``snr_db = NO_NOISE`` (``math.inf``) returns an unmodified copy.
    """
    x = _grid(frame)
    if math.isinf(snr_db) and snr_db > 0:
        return x.copy()
    if not math.isfinite(snr_db):
        raise ValueError("snr_db must be finite or +inf")
    sigma = math.sqrt(10.0 ** (-snr_db / 10.0))
    return x + sigma * unit_noise(x.shape, rng.generator())


def echo_response(targets, config: WaveformConfig) -> np.ndarray:
    """Noiseless multiplicative channel ``H(m, n)`` summed over targets."""
    m = np.arange(config.num_symbols)[:, None]
    n = np.arange(config.num_subcarriers)[None, :]
    h = np.zeros((config.num_symbols, config.num_subcarriers), dtype=complex)
    for t in targets:
        check_unambiguous(t, config)
        tau = t.delay_s
        fd = t.doppler_hz(config.carrier_hz)
        h += (t.reflect_amp
              * np.exp(-2j * np.pi * n * config.subcarrier_spacing * tau)
              * np.exp(2j * np.pi * fd * m * config.symbol_duration))
    return h


def peer_frame(gen: np.random.Generator, config: WaveformConfig) -> np.ndarray:
    """Unit-power data frame of a co-channel peer; in cd mode spread with ``config.peer_code_row``."""
    bits = gen.integers(0, 2, size=config.bits_per_frame, dtype=np.int8)
    symbols = qpsk_map(bits)
    if config.mode == "plain_ofdm":
        return symbols.reshape(config.num_symbols, config.num_subcarriers)
    return spread(symbols, config, row=config.peer_code_row)


def apply_echo_channel(frame, targets, snr_db: float, config: WaveformConfig, rng: RngHandle,
                       inr_db: float | None = None) -> np.ndarray:
    """Point-target echo of ``frame`` plus noise at the echo SNR ``snr_db``.

    ``inr_db`` optionally adds a co-channel peer transmission (unknown data) at
    the given interference-to-noise ratio, with a uniformly random carrier
    phase. Noise and peer draws come from separate children of ``rng``.
    """
    x = _grid(frame)
    if x.shape != (config.num_symbols, config.num_subcarriers):
        raise ValueError("config mismatch: grid shape does not match config")
    y = echo_response(targets, config) * x
    noiseless = math.isinf(snr_db) and snr_db > 0
    if not noiseless and not math.isfinite(snr_db):
        raise ValueError("snr_db must be finite or +inf")
    if inr_db is not None and noiseless:
        raise ValueError("inr_db is relative to noise; it needs a finite snr_db")
    if noiseless:
        return y
    sigma2 = 10.0 ** (-snr_db / 10.0)
    y = y + math.sqrt(sigma2) * unit_noise(x.shape, rng.child(0).generator())
    if inr_db is not None:
        g = rng.child(1).generator()
        phase = np.exp(2j * np.pi * g.random())
        amp = math.sqrt(sigma2 * 10.0 ** (inr_db / 10.0))
        y = y + amp * phase * peer_frame(g, config)
    return y
