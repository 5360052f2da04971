"""Error statistics and Cramer-Rao bounds for single-tone estimation."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .estimator import estimate_frequency_batch, estimate_known_frequency, wrap_phase
from .prefilter import FirFilter, apply_fir
from .spectrum import windowed_dft
from .windows import window_samples

__all__ = [
    "crb_amplitude",
    "crb_phase",
    "empirical_mse",
    "wrapped_phase_error",
    "phase_grid",
    "tone_basis",
    "estimate_records",
    "worst_phase_sweep",
    "SweepResult",
]

_CONVENTIONS = ("real", "complex")


def _check_convention(convention: str):
    if convention not in _CONVENTIONS:
        raise ValueError(f"convention must be one of {_CONVENTIONS}, got {convention!r}")


def crb_amplitude(sigma: float, N: int, convention: str = "real") -> float:
    """Variance bound for the amplitude of a tone in white Gaussian noise.

    ``'real'``: real-valued samples with noise variance ``sigma^2``,
    ``2 sigma^2 / N``.  ``'complex'``: the complex-exponential form of the
    classic single-tone bound with ``sigma^2`` per quadrature component,
    ``sigma^2 / N``.  Frequency and phase being unknown does not change the
    amplitude bound.
    """
    _check_convention(convention)
    if N < 2:
        raise ValueError("N must be >= 2")
    scale = 2.0 if convention == "real" else 1.0
    return scale * sigma**2 / N


def crb_phase(sigma: float, A: float, N: int, known_frequency: bool = False, convention: str = "complex") -> float:
    """Variance bound for the phase (at the first sample), rad^2.

    Joint estimation with unknown frequency:
    ``c sigma^2 (2N-1) / (A^2 N (N+1))``; known frequency:
    ``c sigma^2 / (2 A^2 N)``.  ``c = 2`` for the ``'complex'`` convention
    and ``c = 4`` for ``'real'`` (see :func:`crb_amplitude`).
    """
    _check_convention(convention)
    if not A > 0:
        raise ValueError("A must be positive")
    c = 4.0 if convention == "real" else 2.0
    if known_frequency:
        return c * sigma**2 / (2 * A**2 * N)
    return c * sigma**2 * (2 * N - 1) / (A**2 * N * (N + 1))


def wrapped_phase_error(estimate, truth):
    """Signed difference wrapped to ``(-pi, pi]``."""
    return wrap_phase(np.asarray(estimate, dtype=float) - np.asarray(truth, dtype=float))


def empirical_mse(estimates, truth, *, phase: bool = False, axis=None):
    """Mean squared deviation from the truth (not from the sample mean).

    With ``phase=True`` deviations are wrapped first.
    """
    est = np.asarray(estimates, dtype=float)
    if est.size == 0:
        raise ValueError("no estimates")
    d = wrapped_phase_error(est, truth) if phase else est - truth
    return np.mean(np.square(d), axis=axis)


def phase_grid(step: float = 0.01) -> np.ndarray:
    """``0, step, ...`` up to (excluding) ``2 pi``."""
    return np.arange(0.0, 2 * np.pi, step)


def tone_basis(N: int, cir: float, *, fs: float = 24000.0, fir: FirFilter | None = None, harmonics=()):
    """Sine and cosine records of the fundamental plus the fixed harmonic record.

    The fundamental with phase ``phi`` is ``cos(phi) s + sin(phi) c``.
    ``harmonics`` are ``(order, rel_amp, phase)`` with phase referred to
    the first sample.  With ``fir`` the records are taken from the
    delay-compensated steady-state output of the filter, so sample ``0``
    still refers to the same instant.
    """
    f1 = cir * fs / N
    # enough margin that the kept span sees only steady-state output
    pad = 0 if fir is None else fir.group_delay + 1
    n = np.arange(-pad, N + pad)
    arg = 2 * np.pi * f1 * n / fs
    s, c = np.sin(arg), np.cos(arg)
    h = np.zeros_like(s)
    for order, rel, ph in harmonics:
        h += rel * np.sin(order * arg + ph)
    if fir is not None:
        out = []
        for rec in (s, c, h):
            y, _ = apply_fir(fir, rec)
            out.append(y[pad : pad + N])
        s, c, h = out
    return s, c, h


def estimate_records(X, cir: float, H: int = 2, frequency: str = "known", k: int = 1):
    """Amplitude and phase (and lam1) for a stack of spectra of one tone."""
    if frequency == "known":
        lam = np.full(X.shape[0], float(cir))
        A, phi = estimate_known_frequency(X, cir, k=k, H=H)
    elif frequency == "estimated":
        lam = estimate_frequency_batch(X[:, k - 1 : k + 2], k=k, H=H, on_error="nan")
        A = np.empty(len(lam))
        phi = np.empty(len(lam))
        for j, l in enumerate(lam):
            if np.isnan(l):
                A[j] = phi[j] = np.nan
                continue
            a, p = estimate_known_frequency(X[j], l, k=k, H=H)
            A[j], phi[j] = a[0], p[0]
    else:
        raise ValueError("frequency must be 'known' or 'estimated'")
    return lam, A, phi


def _triplet_k(cir: float) -> int:
    return 1 if cir < 2 else int(np.rint(cir))


def worst_phase_sweep(
    N: int,
    cir: float,
    H: int = 2,
    phi_step: float = 0.01,
    *,
    harmonics=(),
    fir: FirFilter | None = None,
    fs: float = 24000.0,
    frequency: str = "known",
):
    """Largest noiseless error over the fundamental phase grid.

    Returns ``(max relative amplitude error, max |phase error| in rad)``.
    NaN if the estimator fails for any phase.
    """
    phis = phase_grid(phi_step)
    s, c, h = tone_basis(N, cir, fs=fs, fir=fir, harmonics=harmonics)
    w = window_samples(H, N)
    S, C, Hh = windowed_dft(np.stack([s, c, h]), w)
    X = np.cos(phis)[:, None] * S + np.sin(phis)[:, None] * C + Hh
    _, A, phi = estimate_records(X, cir, H, frequency, k=_triplet_k(cir))
    err_a = np.abs(A - 1.0)
    err_p = np.abs(wrapped_phase_error(phi, phis))
    if np.any(np.isnan(err_a)):
        return float("nan"), float("nan")
    return float(np.max(err_a)), float(np.max(err_p))


@dataclass
class SweepResult:
    """Named columns of equal length, written as CSV."""

    columns: dict = field(default_factory=dict)

    def __post_init__(self):
        lengths = {len(np.atleast_1d(v)) for v in self.columns.values()}
        if len(lengths) > 1:
            raise ValueError(f"columns differ in length: {lengths}")

    def __len__(self):
        return len(next(iter(self.columns.values()))) if self.columns else 0

    def __getitem__(self, name):
        return np.asarray(self.columns[name])

    def to_csv(self, path_or_file) -> None:
        from .persistence import write_csv

        write_csv(path_or_file, list(self.columns), zip(*self.columns.values()))
