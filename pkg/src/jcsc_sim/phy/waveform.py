"""OFDM / CD-OFDM frame construction and hard-decision QPSK demodulation.

A frame is an ``M x N`` grid of frequency-domain resource elements (rows are
OFDM symbols, columns are subcarriers). In ``cd_ofdm`` mode the grid is cut
into ``Lt x Lf`` tiles and each tile carries one QPSK symbol multiplied by a
row of the order-``Lf*Lt`` Sylvester Hadamard matrix.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

SPEED_OF_LIGHT = 3.0e8
MODES = ("plain_ofdm", "cd_ofdm")


def _is_pow2(x: int) -> bool:
    return x >= 1 and (x & (x - 1)) == 0


def hadamard(order: int) -> np.ndarray:
    """Sylvester Hadamard matrix with +/-1 entries; entry ``(r, i)`` is ``(-1)^popcount(r & i)``."""
    if not _is_pow2(order):
        raise ValueError(f"Hadamard order must be a power of two, got {order}")
    return _hadamard(order).copy()


@lru_cache(maxsize=None)
def _hadamard(order: int) -> np.ndarray:
    h = np.ones((1, 1), dtype=np.int8)
    while h.shape[0] < order:
        h = np.block([[h, h], [h, -h]])
    h.setflags(write=False)
    return h


@dataclass(frozen=True)
class WaveformConfig:
    carrier_hz: float = 24e9
    bandwidth_hz: float = 122.88e6
    num_subcarriers: int = 2048
    cp_samples: int = 144
    num_symbols: int = 16
    modulation: str = "qpsk"
    mode: str = "cd_ofdm"
    spread_freq: int = 64
    spread_time: int = 16
    code_row: int = 0

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.modulation != "qpsk":
            raise ValueError("only qpsk modulation is supported")
        if self.num_subcarriers < 1 or self.num_symbols < 1 or self.cp_samples < 0:
            raise ValueError("num_subcarriers, num_symbols must be >= 1 and cp_samples >= 0")
        if self.bandwidth_hz <= 0 or self.carrier_hz <= 0:
            raise ValueError("carrier_hz and bandwidth_hz must be positive")
        lf, lt = self.spread_freq, self.spread_time
        if self.mode == "plain_ofdm" and (lf != 1 or lt != 1):
            raise ValueError("plain_ofdm requires spread_freq = spread_time = 1")
        if not (_is_pow2(lf) and _is_pow2(lt)):
            raise ValueError(f"spreading factors must be powers of two (Hadamard), got Lf={lf}, Lt={lt}")
        if self.num_subcarriers % lf:
            raise ValueError(f"spread_freq Lf={lf} must divide num_subcarriers N={self.num_subcarriers}")
        if self.num_symbols % lt:
            raise ValueError(f"spread_time Lt={lt} must divide num_symbols M={self.num_symbols}")
        if not 0 <= self.code_row < lf * lt:
            raise ValueError(f"code_row must be in [0, {lf * lt})")

    def as_mode(self, mode: str, spread_freq: int | None = None, spread_time: int | None = None) -> "WaveformConfig":
        """Copy with a different mode; plain mode forces unit spreading."""
        if mode == "plain_ofdm":
            return dataclasses.replace(self, mode=mode, spread_freq=1, spread_time=1, code_row=0)
        return dataclasses.replace(self, mode=mode,
                                   spread_freq=spread_freq or self.spread_freq,
                                   spread_time=spread_time or self.spread_time)

    @property
    def spread_length(self) -> int:
        return self.spread_freq * self.spread_time

    @property
    def subcarrier_spacing(self) -> float:
        return self.bandwidth_hz / self.num_subcarriers

    @property
    def symbol_duration(self) -> float:
        return (self.num_subcarriers + self.cp_samples) / self.bandwidth_hz

    @property
    def cp_duration(self) -> float:
        return self.cp_samples / self.bandwidth_hz

    @property
    def range_bin_m(self) -> float:
        return SPEED_OF_LIGHT / (2.0 * self.bandwidth_hz)

    @property
    def max_range_m(self) -> float:
        return SPEED_OF_LIGHT * self.cp_duration / 2.0

    @property
    def velocity_bin_mps(self) -> float:
        return SPEED_OF_LIGHT / (2.0 * self.carrier_hz * self.num_symbols * self.symbol_duration)

    @property
    def tiles(self) -> tuple[int, int]:
        """(time tiles, frequency tiles)."""
        return self.num_symbols // self.spread_time, self.num_subcarriers // self.spread_freq

    @property
    def symbols_per_frame(self) -> int:
        a, b = self.tiles
        return a * b

    @property
    def bits_per_frame(self) -> int:
        return 2 * self.symbols_per_frame

    @property
    def peer_code_row(self) -> int:
        """Code row reserved for a co-channel peer: differs from ``code_row`` only in the symbol-alternating bit."""
        if self.spread_length == 1:
            return 0
        return self.code_row ^ 1

    def code_tile(self, row: int | None = None) -> np.ndarray:
        """Spreading code of ``row`` laid out as an ``(Lt, Lf)`` tile (symbols x subcarriers)."""
        r = self.code_row if row is None else row
        h = _hadamard(self.spread_length)[r].astype(float)
        # chip index i = f * Lt + t
        return h.reshape(self.spread_freq, self.spread_time).T


def qpsk_map(bits: np.ndarray) -> np.ndarray:
    """Gray QPSK: bit pair (b0, b1) -> ((1-2 b0) + j(1-2 b1)) / sqrt(2)."""
    b = np.asarray(bits, dtype=np.int8).reshape(-1, 2)
    return ((1 - 2 * b[:, 0]) + 1j * (1 - 2 * b[:, 1])) / np.sqrt(2.0)


def qpsk_slice(symbols: np.ndarray) -> np.ndarray:
    s = np.asarray(symbols).ravel()
    out = np.empty((s.size, 2), dtype=np.int8)
    out[:, 0] = s.real < 0
    out[:, 1] = s.imag < 0
    return out.ravel()


def spread(symbols: np.ndarray, config: WaveformConfig, row: int | None = None) -> np.ndarray:
    """Place data symbols on the grid, one symbol per tile, chips = symbol x code."""
    a, b = config.tiles
    s = np.asarray(symbols).reshape(a, b)
    code = config.code_tile(row)  # (Lt, Lf)
    grid = s[:, None, :, None] * code[None, :, None, :]
    return grid.reshape(config.num_symbols, config.num_subcarriers)


def despread(grid: np.ndarray, config: WaveformConfig, row: int | None = None) -> np.ndarray:
    """Correlate each tile with its code row; coherent average of ``Lf*Lt`` chips."""
    a, b = config.tiles
    g = np.asarray(grid).reshape(a, config.spread_time, b, config.spread_freq)
    code = config.code_tile(row)
    return (g * code[None, :, None, :]).sum(axis=(1, 3)).ravel() / config.spread_length


@dataclass
class FrameGrid:
    data_bits: np.ndarray
    freq_symbols: np.ndarray
    config: WaveformConfig

    @cached_property
    def time_samples(self) -> np.ndarray:
        return freq_to_time(self.freq_symbols, self.config)


def freq_to_time(grid: np.ndarray, config: WaveformConfig) -> np.ndarray:
    """Per-symbol unitary IDFT with cyclic prefix prepended, flattened to ``M*(N+cp)`` samples."""
    body = np.fft.ifft(grid, axis=1, norm="ortho")
    cp = config.cp_samples
    with_cp = np.concatenate([body[:, body.shape[1] - cp:], body], axis=1) if cp else body
    return with_cp.ravel()


def time_to_freq(samples: np.ndarray, config: WaveformConfig) -> np.ndarray:
    n, cp = config.num_subcarriers, config.cp_samples
    rows = np.asarray(samples).reshape(config.num_symbols, n + cp)[:, cp:]
    return np.fft.fft(rows, axis=1, norm="ortho")


def modulate(bits, config: WaveformConfig) -> FrameGrid:
    bits = np.asarray(bits, dtype=np.int8).ravel()
    if bits.size != config.bits_per_frame:
        raise ValueError(
            f"bit count mismatch: expected {config.bits_per_frame} = 2*(M/Lt)*(N/Lf), got {bits.size}")
    if np.any((bits != 0) & (bits != 1)):
        raise ValueError("bits must be 0/1")
    symbols = qpsk_map(bits)
    if config.mode == "plain_ofdm":
        grid = symbols.reshape(config.num_symbols, config.num_subcarriers)
    else:
        grid = spread(symbols, config)
    return FrameGrid(bits, grid, config)


def demodulate(received: np.ndarray, config: WaveformConfig, tx_bits=None):
    """Hard-decision demodulation. Returns ``(bits, ber)``; ``ber`` is None without reference bits."""
    rx = np.asarray(received)
    if rx.shape != (config.num_symbols, config.num_subcarriers):
        raise ValueError(
            f"config mismatch: grid shape {rx.shape} != {(config.num_symbols, config.num_subcarriers)}")
    symbols = rx.ravel() if config.mode == "plain_ofdm" else despread(rx, config)
    bits = qpsk_slice(symbols)
    ber = None
    if tx_bits is not None:
        ref = np.asarray(tx_bits).ravel()
        if ref.size != bits.size:
            raise ValueError("config mismatch: reference bit count differs")
        ber = float(np.count_nonzero(bits != ref)) / bits.size
    return bits, ber


def random_bits(gen: np.random.Generator, config: WaveformConfig) -> np.ndarray:
    return gen.integers(0, 2, size=config.bits_per_frame, dtype=np.int8)
