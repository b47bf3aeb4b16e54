import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st

from jcsc_sim.phy.waveform import (WaveformConfig, demodulate, despread, freq_to_time, hadamard, modulate,
                                   qpsk_map, random_bits, spread, time_to_freq)
from jcsc_sim.rng import RngHandle

SMALL = dict(num_subcarriers=64, cp_samples=8, num_symbols=8, spread_freq=8, spread_time=4)


def test_all_zero_bits_map_to_first_quadrant():
    cfg = WaveformConfig(mode="plain_ofdm", spread_freq=1, spread_time=1, **{k: v for k, v in SMALL.items()
                                                                            if not k.startswith("spread")})
    frame = modulate(np.zeros(cfg.bits_per_frame, dtype=np.int8), cfg)
    assert np.allclose(frame.freq_symbols, (1 + 1j) / np.sqrt(2))


def test_qpsk_gray_map():
    s = qpsk_map(np.array([0, 0, 0, 1, 1, 0, 1, 1]))
    assert np.allclose(s * np.sqrt(2), [1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j])


@pytest.mark.parametrize("order", [1, 2, 4, 16, 1024])
def test_hadamard_matches_scipy_and_is_orthogonal(order):
    h = hadamard(order).astype(float)
    assert np.array_equal(h, scipy.linalg.hadamard(order))
    assert np.allclose(h @ h.T, order * np.eye(order))


def test_spread_despread_identity():
    cfg = WaveformConfig(**SMALL)
    sym = qpsk_map(random_bits(RngHandle(1).generator(), cfg))
    for row in (0, 5, cfg.spread_length - 1):
        assert np.allclose(despread(spread(sym, cfg, row), cfg, row), sym)


def test_spread_grid_has_unit_power():
    cfg = WaveformConfig(**SMALL)
    frame = modulate(random_bits(RngHandle(2).generator(), cfg), cfg)
    assert np.allclose(np.abs(frame.freq_symbols), 1.0)


def test_despread_noise_variance_is_one_over_l():
    cfg = WaveformConfig()
    g = RngHandle(4).generator()
    w = (g.standard_normal((cfg.num_symbols, cfg.num_subcarriers))
         + 1j * g.standard_normal((cfg.num_symbols, cfg.num_subcarriers))) / np.sqrt(2)
    z = despread(w, cfg)
    assert abs(np.var(z) * cfg.spread_length - 1.0) < 0.1


@pytest.mark.parametrize("mode", ["plain_ofdm", "cd_ofdm"])
def test_round_trip_and_parseval(mode):
    cfg = WaveformConfig().as_mode(mode)
    frame = modulate(random_bits(RngHandle(3).generator(), cfg), cfg)
    x = frame.freq_symbols
    t = freq_to_time(x, cfg)
    assert t.size == cfg.num_symbols * (cfg.num_subcarriers + cfg.cp_samples)
    back = time_to_freq(t, cfg)
    assert np.linalg.norm(back - x) / np.linalg.norm(x) < 1e-9
    body = t.reshape(cfg.num_symbols, -1)[:, cfg.cp_samples:]
    assert abs(np.sum(np.abs(body) ** 2) / np.sum(np.abs(x) ** 2) - 1.0) < 1e-9


@pytest.mark.parametrize("mode", ["plain_ofdm", "cd_ofdm"])
def test_noiseless_ber_zero(mode):
    cfg = WaveformConfig().as_mode(mode)
    frame = modulate(random_bits(RngHandle(5).generator(), cfg), cfg)
    bits, ber = demodulate(frame.freq_symbols, cfg, frame.data_bits)
    assert ber == 0.0
    assert np.array_equal(bits, frame.data_bits)


def test_config_invariants():
    with pytest.raises(ValueError, match="powers? of two"):
        WaveformConfig(spread_freq=3)
    with pytest.raises(ValueError):
        WaveformConfig(mode="plain_ofdm")  # plain mode needs unit spreading
    with pytest.raises(ValueError):
        WaveformConfig(num_symbols=8, spread_time=16)
    with pytest.raises(ValueError):
        WaveformConfig(code_row=1024)


def test_derived_quantities():
    cfg = WaveformConfig()
    assert cfg.spread_length == 1024
    assert cfg.range_bin_m == pytest.approx(1.220703125, abs=1e-12)
    assert cfg.subcarrier_spacing == pytest.approx(60e3)
    assert cfg.max_range_m == pytest.approx(144 * 1.220703125)


def test_bit_count_mismatch_raises():
    cfg = WaveformConfig(**SMALL)
    with pytest.raises(ValueError):
        modulate(np.zeros(cfg.bits_per_frame + 2, dtype=np.int8), cfg)


@settings(max_examples=30, deadline=None)
@given(n_exp=st.integers(4, 8), m_exp=st.integers(1, 4), lf_exp=st.integers(0, 4), lt_exp=st.integers(0, 2),
       seed=st.integers(0, 2**32))
def test_random_configs_round_trip(n_exp, m_exp, lf_exp, lt_exp, seed):
    lf, lt = 2 ** min(lf_exp, n_exp), 2 ** min(lt_exp, m_exp)
    mode = "plain_ofdm" if lf * lt == 1 else "cd_ofdm"
    cfg = WaveformConfig(num_subcarriers=2 ** n_exp, cp_samples=4, num_symbols=2 ** m_exp, mode=mode,
                         spread_freq=lf, spread_time=lt)
    frame = modulate(random_bits(RngHandle(seed).generator(), cfg), cfg)
    assert demodulate(frame.freq_symbols, cfg, frame.data_bits)[1] == 0.0
    assert np.allclose(time_to_freq(frame.time_samples, cfg), frame.freq_symbols, atol=1e-9)
