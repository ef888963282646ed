"""Switching-energy partition physics and a synthetic EM side-channel pipeline.

Subpackages by concern:

* :mod:`emleak.circuit`   circuit specs, validation, derived parameters
* :mod:`emleak.transient` closed-form and RK4 waveform solvers
* :mod:`emleak.energy`    heat/radiation partitions, resistance and ramp sweeps
* :mod:`emleak.tracegen`  seeded synthetic EM trace sets and the grid model
* :mod:`emleak.attack`    correlation key recovery, SNR, traces-to-disclosure
* :mod:`emleak.cli`       the ``emleak`` command-line frontend
"""

__version__ = "0.1.0"
