"""Linear-phase FIR band-pass prefilters around the 50 Hz fundamental.

Filters are equiripple (Parks-McClellan via :func:`scipy.signal.remez`)
and are checked against their template on a dense frequency grid after
every design.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache
from math import ceil, log10, sqrt
from pathlib import Path

import numpy as np
from scipy import signal

from .errors import CorruptFileError, DesignError, InsufficientDataError

__all__ = [
    "FilterTemplate",
    "FirFilter",
    "FILTER_A_TEMPLATE",
    "FILTER_B_TEMPLATE",
    "REFERENCE_ORDERS",
    "design_bandpass",
    "estimate_order",
    "check_template",
    "apply_fir",
    "freq_response",
    "StreamingFir",
    "save_taps",
    "load_taps",
]

log = logging.getLogger(__name__)

MAX_ORDER = 8192
# Frequencies above fs/4 get extra stopband weight; without it remez leaves
# the response near Nyquist a few dB short of the template.
_HF_SPLIT = 0.25
_HF_BOOST = 4.0
_GRID_HALF = 2**16


@dataclass(frozen=True)
class FilterTemplate:
    """Band-pass template; ``a_pass`` is the peak-to-peak passband ripple."""

    f_stop1: float
    f_pass1: float
    f_pass2: float
    f_stop2: float
    a_stop: float
    a_pass: float
    fs: float = 24000.0

    def __post_init__(self):
        if not 0 < self.f_stop1 < self.f_pass1 < self.f_pass2 < self.f_stop2 < self.fs / 2:
            raise ValueError("band edges must satisfy 0 < fs1 < fp1 < fp2 < fs2 < fs/2")
        if not (self.a_stop > 0 and self.a_pass > 0):
            raise ValueError("a_stop and a_pass must be positive")

    @property
    def delta_pass(self) -> float:
        g = 10 ** (self.a_pass / 20)
        return (g - 1) / (g + 1)

    @property
    def delta_stop(self) -> float:
        return 10 ** (-self.a_stop / 20)


FILTER_A_TEMPLATE = FilterTemplate(10.0, 40.0, 60.0, 90.0, a_stop=40.0, a_pass=0.1)
FILTER_B_TEMPLATE = FilterTemplate(10.0, 40.0, 60.0, 90.0, a_stop=60.0, a_pass=0.01)
REFERENCE_ORDERS = {"A": 1686, "B": 2738}


@dataclass(frozen=True, eq=False)
class FirFilter:
    taps: np.ndarray
    fs: float = 24000.0

    def __post_init__(self):
        taps = np.asarray(self.taps, dtype=float)
        if taps.ndim != 1 or taps.size == 0:
            raise ValueError("taps must be a non-empty 1-D sequence")
        taps = taps.copy()
        taps.setflags(write=False)
        object.__setattr__(self, "taps", taps)

    @property
    def order(self) -> int:
        return len(self.taps) - 1

    @property
    def group_delay(self) -> int:
        """Delay in samples; ``order / 2`` for the symmetric taps designed here."""
        return self.order // 2

    @property
    def is_symmetric(self) -> bool:
        return bool(np.allclose(self.taps, self.taps[::-1], rtol=0, atol=1e-12 * np.max(np.abs(self.taps))))


def estimate_order(t: FilterTemplate) -> int:
    """Kaiser's equiripple length estimate for the narrower transition band."""
    df = min(t.f_pass1 - t.f_stop1, t.f_stop2 - t.f_pass2) / t.fs
    n = (-20 * log10(sqrt(t.delta_pass * t.delta_stop)) - 13) / (14.6 * df)
    return 2 * ceil(n / 2)


def _dense_response(taps, fs):
    H = np.fft.rfft(taps, n=2 * _GRID_HALF)
    f = np.fft.rfftfreq(2 * _GRID_HALF, d=1 / fs)
    return f, np.abs(H)


def check_template(f: FirFilter, t: FilterTemplate) -> dict:
    """Measure the response against ``t`` on a 2**16-point grid plus the
    band edges.  Returns the measured figures and a ``passed`` flag."""
    freqs, mag = _dense_response(f.taps, f.fs)
    edges = np.array([t.f_stop1, t.f_pass1, t.f_pass2, t.f_stop2])
    _, H_edges = signal.freqz(f.taps, worN=edges, fs=f.fs)
    freqs = np.concatenate([freqs, edges])
    mag = np.concatenate([mag, np.abs(H_edges)])
    stop = (freqs <= t.f_stop1) | (freqs >= t.f_stop2)
    pb = (freqs >= t.f_pass1) & (freqs <= t.f_pass2)
    stop_db = 20 * np.log10(np.max(mag[stop]))
    ripple_db = 20 * np.log10(np.max(mag[pb]) / np.min(mag[pb]))
    return {
        "order": f.order,
        "stop_db": float(stop_db),
        "ripple_db": float(ripple_db),
        "passed": bool(stop_db <= -t.a_stop and ripple_db <= t.a_pass),
    }


def _remez(t: FilterTemplate, order: int) -> np.ndarray:
    split = _HF_SPLIT * t.fs
    ds, dp = t.delta_stop, t.delta_pass
    return signal.remez(
        order + 1,
        [0, t.f_stop1, t.f_pass1, t.f_pass2, t.f_stop2, split, split, t.fs / 2],
        [0, 1, 0, 0],
        weight=[1 / ds, 1 / dp, 1 / ds, _HF_BOOST / ds],
        fs=t.fs,
    )


@lru_cache(maxsize=16)
def _design_cached(t: FilterTemplate, order: int | None) -> FirFilter:
    if order is not None:
        if order % 2 or order < 2:
            raise DesignError("order must be a positive even number (type I linear phase)")
        f = FirFilter(_remez(t, order), t.fs)
        report = check_template(f, t)
        if not report["passed"]:
            raise DesignError(f"order {order} misses the template: {report}")
        return f
    order = estimate_order(t)
    while order <= MAX_ORDER:
        f = FirFilter(_remez(t, order), t.fs)
        report = check_template(f, t)
        log.debug("order %d: %s", order, report)
        if report["passed"]:
            return f
        order += max(2, 2 * round(0.01 * order / 2))
    raise DesignError(f"template not met at any order up to {MAX_ORDER}")


def design_bandpass(t: FilterTemplate, order: int | None = None) -> FirFilter:
    """Equiripple band-pass FIR meeting ``t``.

    With ``order=None`` the order starts at the Kaiser estimate and grows
    until the verified response meets the template.  Designs are cached.
    """
    return _design_cached(t, order)


def apply_fir(f: FirFilter, x, compensate_delay: bool = True):
    """Direct-form convolution of ``x`` with the taps.

    With ``compensate_delay`` the output is advanced by the group delay so
    sample ``n`` of the output lines up with sample ``n`` of the input, and
    ``(y, valid)`` is returned, where ``valid`` marks samples whose whole
    tap span lies inside ``x``.  Without it the plain causal output
    ``y[n] = sum_j taps[j] x[n-j]`` (zero initial state) is returned.
    """
    x = np.asarray(x, dtype=float)
    if len(x) <= len(f.taps):
        raise InsufficientDataError(f"record of {len(x)} samples is not longer than {len(f.taps)} taps")
    full = np.convolve(x, f.taps)
    if not compensate_delay:
        return full[: len(x)]
    gd = f.group_delay
    y = full[gd : gd + len(x)]
    valid = np.zeros(len(x), dtype=bool)
    valid[gd : len(x) - gd] = True
    return y, valid


def freq_response(f: FirFilter, freqs) -> np.ndarray:
    """``20 log10 |sum_n taps_n exp(-j 2 pi f n / fs)|`` at ``freqs`` (Hz)."""
    freqs = np.atleast_1d(np.asarray(freqs, dtype=float))
    _, H = signal.freqz(f.taps, worN=freqs, fs=f.fs)
    with np.errstate(divide="ignore"):
        return 20 * np.log10(np.abs(H))


class StreamingFir:
    """Causal FIR with persistent state across calls."""

    def __init__(self, f: FirFilter):
        self.filter = f
        self._zi = np.zeros(len(f.taps) - 1)

    def process(self, chunk) -> np.ndarray:
        y, self._zi = signal.lfilter(self.filter.taps, 1.0, np.asarray(chunk, dtype=float), zi=self._zi)
        return y

    def reset(self):
        self._zi[:] = 0.0


def save_taps(f: FirFilter, path) -> None:
    """One coefficient per line, 17 significant digits, ``# order=.. fs=..`` header."""
    lines = [f"# order={f.order} fs={f.fs:g}"] + [f"{c:.17e}" for c in f.taps]
    Path(path).write_text("\n".join(lines) + "\n")


def load_taps(path, fs: float | None = None) -> FirFilter:
    text = Path(path).read_text().splitlines()
    header_fs = None
    vals = []
    for ln in text:
        ln = ln.strip()
        if not ln:
            continue
        if ln.startswith("#"):
            for tok in ln[1:].split():
                if tok.startswith("fs="):
                    header_fs = float(tok[3:])
            continue
        try:
            vals.append(float(ln))
        except ValueError as exc:
            raise CorruptFileError(f"bad coefficient line {ln!r} in {path}") from exc
    if not vals:
        raise CorruptFileError(f"no coefficients in {path}")
    return FirFilter(np.array(vals), fs if fs is not None else (header_fs or 24000.0))
