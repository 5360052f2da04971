"""Seeded synthesis of test signals.

Noise is drawn from ``numpy.random.default_rng(seed)`` (PCG64 bit
generator, ziggurat normals), so a given seed reproduces the same sequence
on every platform numpy supports.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import inf, log10, sqrt

import numpy as np

from .errors import AliasingError

__all__ = [
    "Tone",
    "Drift",
    "SignalSpec",
    "synth",
    "snr_db",
    "sigma_for_snr",
    "exponential_drift",
    "step_test",
    "quantize",
    "harmonic_tones",
]


@dataclass(frozen=True)
class Tone:
    A: float
    f: float
    phi: float = 0.0


@dataclass(frozen=True)
class Drift:
    """Decaying exponential ``A_e exp(-(t - t0)/tau)`` switched on at ``t0``."""

    A_e: float
    tau: float
    t0: float = 0.0

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError("drift time constant must be positive")


@dataclass(frozen=True)
class SignalSpec:
    tones: tuple = field(default_factory=tuple)
    fs: float = 24000.0
    noise_sigma: float = 0.0
    drift: Drift | None = None
    quant_bits: int | None = None
    full_scale: float = 1.0
    seed: int | None = None

    def __post_init__(self):
        tones = tuple(t if isinstance(t, Tone) else Tone(*t) for t in self.tones)
        object.__setattr__(self, "tones", tones)
        if not tones:
            raise ValueError("at least one tone (the fundamental) is required")
        if not tones[0].A > 0 or not tones[0].f > 0:
            raise ValueError("fundamental needs A > 0 and f > 0")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")
        fmax = max(t.f for t in tones)
        if not self.fs > 2 * fmax:
            raise AliasingError(f"fs={self.fs} Hz does not exceed twice the highest tone ({fmax} Hz)")

    @property
    def fundamental(self) -> Tone:
        return self.tones[0]

    @property
    def thd(self) -> float:
        """``sqrt(sum A_i^2, i >= 2) / A_1``."""
        return sqrt(sum(t.A**2 for t in self.tones[1:])) / self.tones[0].A


def harmonic_tones(A1: float, f1: float, phi1: float, harmonics) -> tuple:
    """Fundamental plus ``(order, relative_amplitude, phase)`` harmonics."""
    out = [Tone(A1, f1, phi1)]
    out += [Tone(A1 * rel, order * f1, ph) for order, rel, ph in harmonics]
    return tuple(out)


def exponential_drift(A_e: float, tau: float, t0: float, N: int, fs: float, t_start: float = 0.0) -> np.ndarray:
    """``d_n = A_e exp(-(t_n - t0)/tau)`` for ``t_n >= t0``, zero before."""
    if not tau > 0:
        raise ValueError("tau must be positive")
    t = t_start + np.arange(N) / fs
    dt = t - t0
    return np.where(dt >= 0, A_e * np.exp(-np.clip(dt, 0, None) / tau), 0.0)


def quantize(x, bits: int, full_scale: float = 1.0):
    """Uniform mid-tread quantiser with ``2**bits`` levels over
    ``[-full_scale, full_scale)``.

    Returns ``(y, n_clipped)``; out-of-range samples are clamped to the
    extreme levels and counted.
    """
    if not 8 <= bits <= 24:
        raise ValueError("bits must lie in [8, 24]")
    step = 2.0 * full_scale / 2**bits
    codes = np.rint(np.asarray(x, dtype=float) / step)
    lo, hi = -(2 ** (bits - 1)), 2 ** (bits - 1) - 1
    clipped = int(np.count_nonzero((codes < lo) | (codes > hi)))
    return np.clip(codes, lo, hi) * step, clipped


def synth(spec: SignalSpec, N: int, t_start: float = 0.0) -> np.ndarray:
    """Sum of tones, drift and white Gaussian noise, optionally quantised.

    Sample ``n`` sits at ``t_start + n / fs``.
    """
    t = t_start + np.arange(N) / spec.fs
    x = np.zeros(N)
    for tone in spec.tones:
        x += tone.A * np.sin(2 * np.pi * tone.f * t + tone.phi)
    if spec.drift is not None:
        d = spec.drift
        x += exponential_drift(d.A_e, d.tau, d.t0, N, spec.fs, t_start)
    if spec.noise_sigma > 0:
        x += spec.noise_sigma * np.random.default_rng(spec.seed).standard_normal(N)
    if spec.quant_bits is not None:
        x, _ = quantize(x, spec.quant_bits, spec.full_scale)
    return x


def snr_db(spec: SignalSpec) -> float:
    """``10 log10((A_1^2 / 2) / sigma^2)``; ``inf`` for a noiseless spec."""
    if spec.noise_sigma == 0:
        return inf
    return 10 * log10(spec.fundamental.A**2 / 2 / spec.noise_sigma**2)


def sigma_for_snr(snr: float, A1: float = 1.0) -> float:
    """Noise standard deviation that gives ``snr`` dB for amplitude ``A1``."""
    return A1 * sqrt(0.5 * 10 ** (-snr / 10))


def step_test(
    kind: str,
    N_total: int,
    fs: float = 24000.0,
    *,
    f1: float = 50.0,
    A1: float = 1.0,
    phi1: float = 0.0,
    n_pre: int | None = None,
    t_step: float = 0.0,
    amplitude_factor: float = 1.1,
    phase_jump: float = np.pi / 2,
):
    """Tone with an amplitude or phase step at ``t = t_step``.

    The record has ``n_pre`` samples (default half) before ``t = 0``.
    Returns ``(t, x)``.
    """
    if kind not in ("amplitude", "phase"):
        raise ValueError("kind must be 'amplitude' or 'phase'")
    if n_pre is None:
        n_pre = N_total // 2
    t = (np.arange(N_total) - n_pre) / fs
    after = t >= t_step
    A = np.where(after, A1 * amplitude_factor, A1) if kind == "amplitude" else np.full(N_total, A1)
    phi = np.where(after, phi1 + phase_jump, phi1) if kind == "phase" else np.full(N_total, phi1)
    return t, A * np.sin(2 * np.pi * f1 * t + phi)
