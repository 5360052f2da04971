"""Interpolated-DFT estimation of grid-signal frequency, amplitude and phase.

Three DFT bins of a record windowed with a maximum-decay-sidelobes
(Rife-Vincent class I) window are enough to recover the dominant tone,
with the leakage of its negative-frequency image cancelled explicitly.
Records may hold less than one signal period.
"""

from .errors import (
    AliasingError,
    ConfigError,
    CorruptFileError,
    DegenerateSystemError,
    DesignError,
    EstimationError,
    InsufficientDataError,
    InvalidOrderError,
    IpdftError,
    NoSignalError,
    ShapeError,
    SingularityError,
)
from .estimator import (
    CoupledAmplitudes,
    Estimate,
    estimate_all,
    estimate_amplitude,
    estimate_frequency,
    estimate_frequency_batch,
    estimate_known_frequency,
    estimate_phase,
    solve_F,
)
from .signalgen import SignalSpec, Tone, synth
from .spectrum import SpectrumTriplet, select_triplet, windowed_dft
from .windows import WindowSpec, window_coefficients, window_samples

__version__ = "0.1.0"

__all__ = [
    "AliasingError",
    "ConfigError",
    "CorruptFileError",
    "DegenerateSystemError",
    "DesignError",
    "EstimationError",
    "InsufficientDataError",
    "InvalidOrderError",
    "IpdftError",
    "NoSignalError",
    "ShapeError",
    "SingularityError",
    "CoupledAmplitudes",
    "Estimate",
    "estimate_all",
    "estimate_amplitude",
    "estimate_frequency",
    "estimate_frequency_batch",
    "estimate_known_frequency",
    "estimate_phase",
    "solve_F",
    "SignalSpec",
    "Tone",
    "synth",
    "SpectrumTriplet",
    "select_triplet",
    "windowed_dft",
    "WindowSpec",
    "window_coefficients",
    "window_samples",
]
