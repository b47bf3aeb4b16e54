import math

import numpy as np
import pytest

from jcsc_sim.phy.sweeps import (ebn0_to_snr_db, equivalent_snr_gain, frames_for_bits, qpsk_ber_theory,
                                 run_ber_sweep)
from jcsc_sim.phy.waveform import WaveformConfig
from jcsc_sim.rng import RngHandle
from jcsc_sim.series import crossing

PLAIN = WaveformConfig(mode="plain_ofdm", spread_freq=1, spread_time=1)


def test_qpsk_theory_reference_values():
    # Q(sqrt(2 Eb/N0)) at 0 dB and 9.6 dB
    assert qpsk_ber_theory(0.0) == pytest.approx(0.0786496, rel=1e-5)
    assert qpsk_ber_theory(9.6) == pytest.approx(1.0e-5, rel=0.05)


def test_ebn0_conversion():
    assert ebn0_to_snr_db(10.0, PLAIN) == pytest.approx(10 + 10 * math.log10(2))
    assert ebn0_to_snr_db(10.0, WaveformConfig()) == pytest.approx(10 + 10 * math.log10(2 / 1024))


def test_frames_for_bits():
    cfg = WaveformConfig(num_symbols=64)
    assert cfg.bits_per_frame == 256
    assert frames_for_bits(cfg, 10, 2_000_000) == 7813
    assert frames_for_bits(cfg, 10_000, 2_000_000) == 10_000


def test_ber_monotone_in_snr():
    s = run_ber_sweep(PLAIN, [0.0, 3.0, 6.0, 9.0], 20, RngHandle(1))
    _, ber = s.curve("plain_ofdm", "ber")
    assert np.all(np.diff(ber) < 0)


@pytest.mark.parametrize("ebn0", [4.0, 8.0, 10.0])
def test_ber_matches_qpsk_theory(ebn0):
    snr = ebn0_to_snr_db(ebn0, PLAIN)
    trials = 400 if ebn0 >= 10 else 40
    row = run_ber_sweep(PLAIN, [snr], trials, RngHandle(5)).rows[0]
    assert abs(row.mean - qpsk_ber_theory(ebn0)) <= row.ci_half_width


def test_equivalent_gain_shifted_curve():
    snr = np.arange(-10.0, 11.0, 2.0)
    base = 0.1 * 10 ** (-snr / 20)
    prop_snr = np.arange(-10.0, 5.0, 2.0)
    prop = 0.1 * 10 ** (-(prop_snr + 3.0) / 20)
    gain = equivalent_snr_gain(snr, base, prop_snr, prop)
    assert np.allclose(gain, 3.0)


def test_equivalent_gain_out_of_range_is_nan():
    gain = equivalent_snr_gain([0.0, 2.0], [1.0, 0.5], [0.0], [0.01])
    assert math.isnan(gain[0])


def test_crossing_log_linear():
    assert crossing([0.0, 10.0], [1e-2, 1e-4], 1e-3) == pytest.approx(5.0)
    with pytest.raises(ValueError):
        crossing([0.0, 10.0], [1e-2, 1e-4], 1e-6)


def test_empty_sweep_rejected():
    with pytest.raises(ValueError):
        run_ber_sweep(PLAIN, [], 1, RngHandle(0))
