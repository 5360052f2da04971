"""Sliding-window estimation loop as run on a DSP.

Samples arrive one at a time (optionally through a causal FIR that keeps
its state), the latest ``N`` are held in a ring buffer, and a full
estimate is recomputed every ``update_stride`` samples.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from math import inf, log2

import numpy as np

from .errors import IpdftError
from .estimator import Estimate, estimate_all, wrap_phase
from .prefilter import FirFilter, StreamingFir

__all__ = ["StreamConfig", "RingBuffer", "EstimateTrace", "run_stream", "settle_time", "phase_spike"]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class StreamConfig:
    N: int
    fs: float = 24000.0
    update_stride: int = 4
    H: int = 2
    fir: FirFilter | None = None
    nominal_frequency: float = 50.0
    known_frequency: bool = False

    def __post_init__(self):
        if self.update_stride < 1:
            raise ValueError("update_stride must be >= 1")
        if self.N < 4 or not log2(self.N).is_integer():
            raise ValueError(f"N must be a power of two, got {self.N}")

    @property
    def group_delay(self) -> int:
        return 0 if self.fir is None else self.fir.group_delay

    @property
    def latency(self) -> float:
        """Declared latency ``group_delay T + N T`` in seconds."""
        return (self.group_delay + self.N) / self.fs

    @property
    def nominal_cir(self) -> float:
        return self.nominal_frequency * self.N / self.fs


class RingBuffer:
    """Holds the latest ``N`` samples; :meth:`window` is a contiguous view.

    Every sample is written twice, ``N`` apart, so the newest ``N`` always
    sit contiguously in a ``2N`` array.
    """

    def __init__(self, N: int):
        self.N = N
        self._buf = np.zeros(2 * N)
        self._pos = 0
        self.count = 0

    def push(self, samples) -> None:
        for v in np.atleast_1d(samples):
            self._buf[self._pos] = v
            self._buf[self._pos + self.N] = v
            self._pos = (self._pos + 1) % self.N
            self.count += 1

    @property
    def full(self) -> bool:
        return self.count >= self.N

    def window(self) -> np.ndarray:
        """Oldest to newest; a read-only view, valid until the next push."""
        v = self._buf[self._pos : self._pos + self.N]
        v = v.view()
        v.setflags(write=False)
        return v


@dataclass
class EstimateTrace:
    """Estimates over time.

    ``t`` is the input time of the newest sample in each window.
    ``t_ref`` is the input time the window's first sample stands for,
    i.e. shifted back by the prefilter group delay.  ``phi1`` refers to
    that first sample.  :meth:`phase_referred` moves it to another point
    of the window along the estimated frequency and expresses it against
    a nominal-frequency clock; ``phi_abs`` uses the window centre, where
    a frequency error disturbs the phase least.
    """

    t: list = field(default_factory=list)
    t_ref: list = field(default_factory=list)
    estimates: list = field(default_factory=list)
    valid: list = field(default_factory=list)
    nominal_frequency: float = 50.0
    window_span: float = 0.0

    def append(self, t: float, t_ref: float, est: Estimate | None, valid: bool):
        self.t.append(t)
        self.t_ref.append(t_ref)
        self.estimates.append(est)
        self.valid.append(bool(valid and est is not None))

    def __len__(self):
        return len(self.t)

    def _field(self, name):
        return np.array([getattr(e, name) if e is not None else np.nan for e in self.estimates])

    @property
    def times(self) -> np.ndarray:
        return np.asarray(self.t)

    @property
    def valid_mask(self) -> np.ndarray:
        return np.asarray(self.valid, dtype=bool)

    @property
    def A1(self) -> np.ndarray:
        return self._field("A1")

    @property
    def f1(self) -> np.ndarray:
        return self._field("f1")

    @property
    def phi1(self) -> np.ndarray:
        return self._field("phi1")

    def phase_referred(self, where: str = "centre") -> np.ndarray:
        """Phase at the window ``'start'``, ``'centre'`` or ``'end'`` minus
        ``2 pi f_nom`` times that instant."""
        frac = {"start": 0.0, "centre": 0.5, "end": 1.0}
        if where not in frac:
            raise ValueError(f"where must be one of {tuple(frac)}")
        d = frac[where] * self.window_span
        t = np.asarray(self.t_ref) + d
        return wrap_phase(self.phi1 + 2 * np.pi * self.f1 * d - 2 * np.pi * self.nominal_frequency * t)

    @property
    def phi_abs(self) -> np.ndarray:
        return self.phase_referred("centre")

    def to_csv(self, fh) -> None:
        from .persistence import write_csv

        write_csv(fh, ["t", "f1", "A1", "phi1", "valid"], zip(self.t, self.f1, self.A1, self.phi1, self.valid))


def run_stream(cfg: StreamConfig, x, t_start: float = 0.0) -> EstimateTrace:
    """Feed ``x`` (sample ``n`` at ``t_start + n / fs``) through the loop.

    An estimate is produced after every ``update_stride`` samples once the
    buffer holds ``N`` samples; with a prefilter, estimates stay flagged
    invalid until the filter has seen ``order`` samples more.  A failing
    estimate is recorded as invalid and the stream carries on.
    """
    x = np.asarray(x, dtype=float)
    T = 1.0 / cfg.fs
    ring = RingBuffer(cfg.N)
    fir = StreamingFir(cfg.fir) if cfg.fir is not None else None
    warm = cfg.N + (cfg.fir.order if cfg.fir is not None else 0)
    gd = cfg.group_delay
    lam_known = cfg.nominal_cir if cfg.known_frequency else None
    expected = 1.5 * cfg.nominal_cir
    trace = EstimateTrace(nominal_frequency=cfg.nominal_frequency, window_span=(cfg.N - 1) * T)
    s = cfg.update_stride
    for start in range(0, len(x) - s + 1, s):
        chunk = x[start : start + s]
        ring.push(fir.process(chunk) if fir is not None else chunk)
        if not ring.full:
            continue
        newest = start + s - 1
        t_new = t_start + newest * T
        t_ref = t_new - (cfg.N - 1 + gd) * T
        est = None
        try:
            est = estimate_all(ring.window(), cfg.fs, cfg.H, lambda1=lam_known, expected_cir_max=expected)
        except IpdftError as exc:
            log.debug("estimate failed at t=%g: %s", t_new, exc)
        trace.append(t_new, t_ref, est, ring.count >= warm)
    return trace


def settle_time(t, values, target: float, tol: float, t_event: float = 0.0, *, phase: bool = False) -> float:
    """Time after ``t_event`` from which every later point stays within
    ``tol`` of ``target``.

    Invalid (NaN) points count as outside.  Returns 0 if the trace never
    leaves the band after the event and ``inf`` if the last point is still
    outside.
    """
    t = np.asarray(t, dtype=float)
    v = np.asarray(values, dtype=float)
    after = t >= t_event
    t, v = t[after], v[after]
    if t.size == 0:
        return inf
    d = wrap_phase(v - target) if phase else v - target
    bad = ~(np.abs(d) <= tol)
    if not bad.any():
        return 0.0
    last = int(np.flatnonzero(bad)[-1])
    if last == len(t) - 1:
        return inf
    return float(t[last + 1] - t_event)


def phase_spike(t, values, before: float, target: float, t_event: float = 0.0) -> float:
    """Largest excursion outside the range spanned by the old and new
    value after the event, relative to ``|target|``."""
    t = np.asarray(t, dtype=float)
    v = wrap_phase(np.asarray(values, dtype=float)[t >= t_event])
    v = v[np.isfinite(v)]
    lo, hi = min(before, target), max(before, target)
    over = max(0.0, float(np.max(v - hi, initial=0.0)), float(np.max(lo - v, initial=0.0)))
    return over / abs(target)
