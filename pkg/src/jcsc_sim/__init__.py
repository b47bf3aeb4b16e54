"""Simulators for a joint communication, sensing and computation (JCSC) machine network.

Three experiments share one seeded harness:

* ``phy``  - OFDM vs code-division OFDM waveform: BER and ranging RMSE.
* ``nd``   - directional neighbor discovery, random scanning vs sensing-prior learning.
* ``mac``  - slotted CSMA with hidden terminals, with and without sensed hidden-node knowledge.
"""
__version__ = "0.1.0"
