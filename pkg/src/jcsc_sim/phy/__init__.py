from .channel import NO_NOISE, PointTarget, apply_comm_channel, apply_echo_channel
from .radar import SensingEstimate, estimate_range_velocity
from .sweeps import ebn0_to_snr_db, equivalent_snr_gain, qpsk_ber_theory, run_ber_sweep, run_rmse_sweep
from .waveform import SPEED_OF_LIGHT, FrameGrid, WaveformConfig, demodulate, hadamard, modulate

__all__ = [
    "NO_NOISE", "PointTarget", "apply_comm_channel", "apply_echo_channel",
    "SensingEstimate", "estimate_range_velocity",
    "ebn0_to_snr_db", "equivalent_snr_gain", "qpsk_ber_theory", "run_ber_sweep", "run_rmse_sweep",
    "SPEED_OF_LIGHT", "FrameGrid", "WaveformConfig", "demodulate", "hadamard", "modulate",
]
