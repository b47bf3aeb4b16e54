"""Monte-Carlo BER and ranging-RMSE sweeps.

Trial ``t`` draws everything from ``rng.stream(t)``: child 0 for data bits,
child 1 for channel noise. The same unit-variance noise is rescaled for every
SNR point (common random numbers), which is exactly what
``apply_comm_channel`` would produce point by point with that handle.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.special import erfc

from ..rng import RngHandle
from ..series import SeriesRow, TrialSeries, mean_ci, rmse_ci
from .channel import PointTarget, check_unambiguous, echo_response, peer_frame, unit_noise
from .radar import estimate_range_velocity
from .waveform import WaveformConfig, demodulate, modulate, random_bits


def qpsk_ber_theory(ebn0_db) -> np.ndarray:
    """Gray QPSK over AWGN: ``Q(sqrt(2 Eb/N0))``."""
    g = 10.0 ** (np.asarray(ebn0_db, dtype=float) / 10.0)
    return 0.5 * erfc(np.sqrt(g))


def ebn0_to_snr_db(ebn0_db: float, config: WaveformConfig) -> float:
    """Per-resource-element SNR for a given Eb/N0 (2 bits per QPSK symbol, L chips per symbol)."""
    return ebn0_db + 10.0 * math.log10(2.0 / config.spread_length)


def frames_for_bits(config: WaveformConfig, trials: int, min_bits: int = 0) -> int:
    return max(trials, math.ceil(min_bits / config.bits_per_frame))


def run_ber_sweep(config: WaveformConfig, snr_list, trials: int, rng: RngHandle,
                  min_bits: int = 0) -> TrialSeries:
    """Mean frame BER per SNR point with a 95% half-width over frames."""
    snrs = [float(s) for s in snr_list]
    if not snrs:
        raise ValueError("empty snr_list")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    frames = frames_for_bits(config, trials, min_bits)
    ber = np.empty((len(snrs), frames))
    for t in range(frames):
        h = rng.stream(t)
        frame = modulate(random_bits(h.child(0).generator(), config), config)
        x = frame.freq_symbols
        w = unit_noise(x.shape, h.child(1).generator())
        for i, snr in enumerate(snrs):
            y = x if math.isinf(snr) and snr > 0 else x + math.sqrt(10.0 ** (-snr / 10.0)) * w
            ber[i, t] = demodulate(y, config, frame.data_bits)[1]
    rows = []
    for i, snr in enumerate(snrs):
        mean, half = mean_ci(ber[i])
        rows.append(SeriesRow(snr, config.mode, "ber", mean, half, frames))
    return TrialSeries("ber", rows)


def run_rmse_sweep(config: WaveformConfig, snr_list, target: PointTarget, trials: int, rng: RngHandle,
                   inr_db: float | None = None) -> TrialSeries:
    """Range and velocity RMSE of the single-target estimator per echo SNR.

    ``inr_db`` adds a co-channel peer at a fixed interference-to-noise ratio
    (see ``apply_echo_channel``). Noise, peer phase and peer data come from
    ``rng.stream(t).child(1)``; scaling them per SNR reproduces
    ``apply_echo_channel`` with that trial's handle.
    """
    snrs = [float(s) for s in snr_list]
    if not snrs:
        raise ValueError("empty snr_list")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    check_unambiguous(target, config)
    resp = echo_response([target], config)
    r_err = np.empty((len(snrs), trials))
    v_err = np.empty((len(snrs), trials))
    for t in range(trials):
        h = rng.stream(t)
        frame = modulate(random_bits(h.child(0).generator(), config), config)
        x = frame.freq_symbols
        echo = resp * x
        disturbance = unit_noise(x.shape, h.child(1).child(0).generator())
        if inr_db is not None:
            g = h.child(1).child(1).generator()
            phase = np.exp(2j * np.pi * g.random())
            disturbance = disturbance + math.sqrt(10.0 ** (inr_db / 10.0)) * phase * peer_frame(g, config)
        for i, snr in enumerate(snrs):
            y = echo + math.sqrt(10.0 ** (-snr / 10.0)) * disturbance
            est = estimate_range_velocity(y, x, config, null_peer=inr_db is not None)
            r_err[i, t] = est.range_m - target.range_m
            v_err[i, t] = est.velocity_mps - target.velocity_mps
    rows = []
    for i, snr in enumerate(snrs):
        for metric, err in (("range_rmse", r_err[i]), ("velocity_rmse", v_err[i])):
            mean, half = rmse_ci(err)
            rows.append(SeriesRow(snr, config.mode, metric, mean, half, trials))
    return TrialSeries("rmse", rows)


def equivalent_snr_gain(snr_base, rmse_base, snr_prop, rmse_prop) -> np.ndarray:
    """For each proposed point, how many dB more SNR the baseline needs for the same RMSE.

    Interpolates the baseline curve linearly in (SNR dB, log RMSE); proposed
    points whose RMSE lies outside the baseline's range give NaN.
    """
    xb = np.asarray(snr_base, dtype=float)
    lb = np.log10(np.asarray(rmse_base, dtype=float))
    order = np.argsort(lb)
    out = []
    for s, r in zip(snr_prop, rmse_prop):
        lr = math.log10(r)
        if lr < lb.min() or lr > lb.max():
            out.append(math.nan)
            continue
        # baseline RMSE decreases with SNR: interpolate SNR as a function of log RMSE
        s_eq = float(np.interp(lr, lb[order], xb[order]))
        out.append(s_eq - float(s))
    return np.array(out)
