"""Windowed DFT, direct DtFT evaluation and three-bin extraction."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NoSignalError, ShapeError

__all__ = ["SpectrumTriplet", "windowed_dft", "dtft_at", "select_triplet", "peak_bin"]


@dataclass(frozen=True)
class SpectrumTriplet:
    """Bins ``X_{k-1}, X_k, X_{k+1}`` of one windowed record."""

    k: int
    Xkm1: complex
    Xk: complex
    Xkp1: complex
    N: int
    H: int

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"triplet centre bin must be >= 1, got k={self.k}")

    @property
    def bins(self) -> np.ndarray:
        return np.array([self.Xkm1, self.Xk, self.Xkp1], dtype=complex)

    @classmethod
    def from_spectrum(cls, X, k: int, H: int) -> "SpectrumTriplet":
        X = np.asarray(X)
        if not 1 <= k <= len(X) - 2:
            raise ValueError(f"k={k} outside 1..{len(X) - 2}")
        return cls(int(k), complex(X[k - 1]), complex(X[k]), complex(X[k + 1]), len(X), H)


def _check_lengths(x, w):
    x = np.asarray(x, dtype=float)
    w = np.asarray(w, dtype=float)
    if x.shape[-1] != w.shape[-1]:
        raise ShapeError(f"signal length {x.shape[-1]} != window length {w.shape[-1]}")
    return x, w


def windowed_dft(x, w) -> np.ndarray:
    """``X_k = sum_n x_n w_n exp(-j 2 pi n k / N)`` for all ``k`` via FFT.

    ``x`` may be 2-D (one record per row); the transform runs along the
    last axis.
    """
    x, w = _check_lengths(x, w)
    return np.fft.fft(x * w, axis=-1)


def dtft_at(x, w, lam):
    """Direct-sum DtFT of the windowed record at real ``lam`` (in bins)."""
    x, w = _check_lengths(x, w)
    N = x.shape[-1]
    lam = np.asarray(lam, dtype=float)
    n = np.arange(N)
    kernel = np.exp(-2j * np.pi * np.multiply.outer(lam, n) / N)
    out = kernel @ (x * w)
    return out if np.ndim(out) else complex(out)


def peak_bin(X) -> int:
    X = np.asarray(X)
    N = len(X)
    mag = np.abs(X[1 : max(N // 2, 2)])
    if mag.size == 0 or not np.any(mag > 0):
        raise NoSignalError("spectrum has no energy away from DC")
    return int(np.argmax(mag)) + 1


def select_triplet(X, H: int, expected_cir_max: float | None = None) -> SpectrumTriplet:
    """Pick the three bins around the main lobe.

    ``k`` is the largest-magnitude bin in ``1..N/2-1``; when the caller
    knows the tone lies below two cycles in the record
    (``expected_cir_max < 2``) ``k`` is fixed to 1.
    """
    X = np.asarray(X)
    if len(X) < 3:
        raise ShapeError("spectrum needs at least three bins")
    if not np.any(np.abs(X) > 0):
        raise NoSignalError("all-zero spectrum")
    if expected_cir_max is not None and expected_cir_max < 2:
        k = 1
    else:
        k = peak_bin(X)
        k = min(k, len(X) - 2)
    return SpectrumTriplet.from_spectrum(X, k, H)
