import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from jcsc_sim.phy.channel import (NO_NOISE, PointTarget, apply_comm_channel, apply_echo_channel,
                                  check_unambiguous, echo_response)
from jcsc_sim.phy.radar import estimate_range_velocity
from jcsc_sim.phy.sweeps import run_ber_sweep, run_rmse_sweep
from jcsc_sim.phy.waveform import WaveformConfig, demodulate, modulate, random_bits
from jcsc_sim.rng import RngHandle


def _frame(cfg, seed=0):
    return modulate(random_bits(RngHandle(seed).generator(), cfg), cfg)


def test_infinite_snr_passthrough():
    cfg = WaveformConfig()
    f = _frame(cfg)
    y = apply_comm_channel(f, NO_NOISE, RngHandle(1))
    assert np.array_equal(y, f.freq_symbols)
    assert y is not f.freq_symbols


def test_measured_snr_at_zero_db():
    cfg = WaveformConfig(num_symbols=64)
    f = _frame(cfg)
    assert f.freq_symbols.size >= 100_000
    noise = apply_comm_channel(f, 0.0, RngHandle(2)) - f.freq_symbols
    snr = 10 * math.log10(np.mean(np.abs(f.freq_symbols) ** 2) / np.mean(np.abs(noise) ** 2))
    assert abs(snr) < 0.1


def test_channel_deterministic_per_handle():
    cfg = WaveformConfig()
    f = _frame(cfg)
    a = apply_comm_channel(f, 3.0, RngHandle(9).stream(4))
    b = apply_comm_channel(f, 3.0, RngHandle(9).stream(4))
    c = apply_comm_channel(f, 3.0, RngHandle(9).stream(5))
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_non_finite_snr_rejected():
    cfg = WaveformConfig()
    with pytest.raises(ValueError):
        apply_comm_channel(_frame(cfg), math.nan, RngHandle(0))


def test_echo_phase_slope_matches_delay():
    cfg = WaveformConfig()
    r = 37.3
    h = echo_response([PointTarget(r)], cfg)
    # independent oracle: phase step between adjacent subcarriers is -2 pi df (2 r / c)
    step = np.angle(h[0, 1:] / h[0, :-1])
    expected = -2 * np.pi * cfg.subcarrier_spacing * 2 * r / 3e8
    assert np.allclose(step, np.angle(np.exp(1j * expected)), atol=1e-9)
    assert np.allclose(np.abs(h), 1.0)


def test_echo_doppler_phase_along_symbols():
    cfg = WaveformConfig()
    v = 12.0
    h = echo_response([PointTarget(10.0, v)], cfg)
    step = np.angle(h[1:, 0] / h[:-1, 0])
    expected = 2 * np.pi * (2 * v * cfg.carrier_hz / 3e8) * cfg.symbol_duration
    assert np.allclose(step, np.angle(np.exp(1j * expected)), atol=1e-9)


def test_echo_linear_in_targets():
    cfg = WaveformConfig()
    f = _frame(cfg)
    t1, t2 = PointTarget(20.0, 3.0, 0.5), PointTarget(60.0, -4.0, 0.25j)
    y12 = apply_echo_channel(f, [t1, t2], NO_NOISE, cfg, RngHandle(0))
    y1 = apply_echo_channel(f, [t1], NO_NOISE, cfg, RngHandle(0))
    y2 = apply_echo_channel(f, [t2], NO_NOISE, cfg, RngHandle(0))
    assert np.allclose(y12, y1 + y2, atol=1e-12)


def test_target_beyond_cyclic_prefix_rejected():
    cfg = WaveformConfig()
    with pytest.raises(ValueError, match="scenario error"):
        check_unambiguous(PointTarget(cfg.max_range_m + 1.0), cfg)
    check_unambiguous(PointTarget(cfg.max_range_m), cfg)


def test_echo_config_mismatch():
    cfg = WaveformConfig()
    with pytest.raises(ValueError, match="config mismatch"):
        apply_echo_channel(np.ones((4, 4)), [PointTarget(1.0)], 0.0, cfg, RngHandle(0))


def test_ber_sweep_matches_apply_comm_channel():
    cfg = WaveformConfig(num_subcarriers=256, cp_samples=16, num_symbols=16, spread_freq=16, spread_time=4)
    rng = RngHandle(11)
    series = run_ber_sweep(cfg, [-6.0], 1, rng)
    h = rng.stream(0)
    f = modulate(random_bits(h.child(0).generator(), cfg), cfg)
    y = apply_comm_channel(f, -6.0, h.child(1))
    assert series.rows[0].mean == demodulate(y, cfg, f.data_bits)[1]


@pytest.mark.parametrize("mode", ["plain_ofdm", "cd_ofdm"])
def test_rmse_sweep_matches_apply_echo_channel(mode):
    cfg = WaveformConfig().as_mode(mode)
    rng = RngHandle(12)
    target = PointTarget(30.0, 5.0)
    series = run_rmse_sweep(cfg, [-5.0], target, 1, rng, inr_db=0.0)
    h = rng.stream(0)
    f = modulate(random_bits(h.child(0).generator(), cfg), cfg)
    y = apply_echo_channel(f, [target], -5.0, cfg, h.child(1), inr_db=0.0)
    est = estimate_range_velocity(y, f, cfg)
    assert series.row(-5.0, mode, "range_rmse").mean == pytest.approx(abs(est.range_m - 30.0), abs=1e-12)
    assert series.row(-5.0, mode, "velocity_rmse").mean == pytest.approx(abs(est.velocity_mps - 5.0), abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(n_exp=st.integers(6, 9), m_exp=st.integers(2, 5), data=st.data())
def test_noiseless_bin_center_targets_recovered(n_exp, m_exp, data):
    n, m = 2 ** n_exp, 2 ** m_exp
    cp = n // 8
    lf = 2 ** data.draw(st.integers(0, min(n_exp, 4)))
    lt = 2 ** data.draw(st.integers(0, min(m_exp, 2)))
    mode = "plain_ofdm" if lf * lt == 1 else "cd_ofdm"
    cfg = WaveformConfig(num_subcarriers=n, cp_samples=cp, num_symbols=m, mode=mode, spread_freq=lf,
                         spread_time=lt, bandwidth_hz=n * 60e3)
    k = data.draw(st.integers(0, cp))
    dop = data.draw(st.integers(-m // 2 + 1, m // 2 - 1))
    target = PointTarget(k * cfg.range_bin_m, dop * cfg.velocity_bin_mps)
    f = _frame(cfg, data.draw(st.integers(0, 1000)))
    y = apply_echo_channel(f, [target], NO_NOISE, cfg, RngHandle(0))
    est = estimate_range_velocity(y, f, cfg)
    assert abs(est.range_m - target.range_m) < 1e-6
    assert abs(est.velocity_mps - target.velocity_mps) < 1e-6 * max(1.0, abs(target.velocity_mps))
