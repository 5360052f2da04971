"""Maximum-decay-sidelobes (Rife-Vincent class I) cosine windows.

The window of order ``H`` is

    w_n = sum_{h=0}^{H-1} (-1)^h a_h cos(2 pi n h / N),   n = 0..N-1

with binomial coefficients.  Its DtFT is modelled as ``W = D / P`` where

    D(lam) = N (2H-2)! / (pi 2^(2H-2)) * sin(pi lam) * exp(-j pi lam)
    P(lam) = lam * prod_{h=1}^{H-1} (h^2 - lam^2)

``D`` and ``P`` share zeros at ``lam = 0, +-1, ..., +-(H-1)``.  The
ratio ``sin(pi lam) / P(lam)`` is evaluated with the common zero cancelled
analytically, so the model is finite and accurate to full double precision
right up to (and at) those integers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import comb, factorial, pi

import numpy as np

from .errors import InvalidOrderError

__all__ = [
    "WindowSpec",
    "window_coefficients",
    "window_samples",
    "poly_P",
    "dirichlet_D",
    "dirichlet_scale",
    "sin_over_P",
    "window_spectrum_model",
]


def window_coefficients(H: int) -> np.ndarray:
    """Coefficients ``a_0..a_{H-1}`` of the order-``H`` window.

    ``a_0 = C(2H-2, H-1) / 2^(2H-2)`` and ``a_h = C(2H-2, H-1-h) / 2^(2H-3)``.
    H=1 is the rectangular window, H=2 is Hanning.
    """
    H = int(H)
    if H < 1:
        raise InvalidOrderError(f"window order must be >= 1, got {H}")
    if H == 1:
        return np.array([1.0])
    m = 2 * H - 2
    a = [comb(m, H - 1) / 2.0**m]
    a += [comb(m, H - 1 - h) / 2.0 ** (m - 1) for h in range(1, H)]
    return np.array(a, dtype=float)


@dataclass(frozen=True)
class WindowSpec:
    """Window order ``H`` and record length ``N``; coefficients are derived."""

    H: int
    N: int
    a: tuple = field(init=False, repr=False)

    def __post_init__(self):
        if self.H < 1:
            raise InvalidOrderError(f"window order must be >= 1, got {self.H}")
        if self.N < 2 * self.H:
            raise ValueError(f"N={self.N} too short for order H={self.H} (need N >= 2H)")
        object.__setattr__(self, "a", tuple(window_coefficients(self.H)))

    @property
    def P(self) -> int:
        """Number of cosine terms beyond the constant one."""
        return self.H - 1

    def samples(self) -> np.ndarray:
        return window_samples(self)


@lru_cache(maxsize=64)
def _window_cached(H: int, N: int) -> np.ndarray:
    a = window_coefficients(H)
    n = np.arange(N)
    w = np.zeros(N)
    for h in range(H):
        w += (-1) ** h * a[h] * np.cos(2 * pi * n * h / N)
    w.setflags(write=False)
    return w


def window_samples(spec: WindowSpec | int, N: int | None = None) -> np.ndarray:
    """Window samples ``w_0..w_{N-1}``.

    Accepts either a :class:`WindowSpec` or ``(H, N)``.  The returned array
    is cached and read-only.
    """
    if isinstance(spec, WindowSpec):
        H, N = spec.H, spec.N
    else:
        H = int(spec)
        if N is None:
            raise TypeError("N is required when passing the window order directly")
        WindowSpec(H, int(N))  # validates
    return _window_cached(int(H), int(N))


def poly_P(H: int, lam):
    """``P(lam) = lam * prod_{h=1}^{H-1} (h^2 - lam^2)``; odd in ``lam``."""
    if H < 2:
        raise InvalidOrderError("the spectrum model requires H >= 2")
    lam = np.asarray(lam, dtype=float)
    # evaluate on |lam| so that oddness holds bit for bit
    a = np.abs(lam)
    out = a.copy()
    for h in range(1, H):
        out = out * (h - a) * (h + a)
    out = np.where(lam < 0, -out, out)
    return out if out.ndim else float(out)


def dirichlet_scale(H: int, N: int) -> float:
    """Constant factor ``N (2H-2)! / (pi 2^(2H-2))`` of ``D``."""
    return N * factorial(2 * H - 2) / (pi * 2.0 ** (2 * H - 2))


def dirichlet_D(H: int, N: int, lam):
    """``D(lam)``; exactly zero at integer ``lam``."""
    if H < 2:
        raise InvalidOrderError("the spectrum model requires H >= 2")
    lam = np.asarray(lam, dtype=float)
    eps = lam - np.rint(lam)
    # (-1)^j factors of sin and exp cancel, leaving only the fractional part.
    out = dirichlet_scale(H, N) * np.sin(pi * eps) * np.exp(-1j * pi * eps)
    return out if out.ndim else complex(out)


def sin_over_P(H: int, mu):
    """``sin(pi mu) / P(mu)`` with the shared zeros of numerator and
    denominator cancelled.

    At ``mu = j`` with ``|j| < H`` the value is the finite limit; close to
    such a ``j`` the vanishing factor of ``P`` is replaced by the exactly
    representable offset ``mu - j`` so no cancellation error arises.
    """
    if H < 2:
        raise InvalidOrderError("the spectrum model requires H >= 2")
    mu = np.asarray(mu, dtype=float)
    j = np.rint(mu)
    eps = mu - j
    sign_j = np.where(np.mod(j, 2) == 0, 1.0, -1.0)
    singular = np.abs(j) < H

    lead = np.where(j == 0, 1.0, mu)
    rest = np.ones_like(mu)
    full = mu.copy()
    for h in range(1, H):
        fm = h - mu
        fp = h + mu
        full = full * fm * fp
        rest = rest * np.where(j == h, 1.0, fm) * np.where(j == -h, 1.0, fp)
    # the removed factor is +eps (j <= 0) or -eps (j > 0)
    removed_sign = np.where(j > 0, -1.0, 1.0)

    with np.errstate(divide="ignore", invalid="ignore"):
        regular = sign_j * np.sin(pi * eps) / full
        limit = sign_j * pi * np.sinc(eps) / (removed_sign * lead * rest)
    out = np.where(singular, limit, regular)
    return out if out.ndim else float(out)


def window_spectrum_model(H: int, N: int, lam):
    """Approximate window DtFT ``W(lam) = D(lam) / P(lam)`` (valid for
    ``lam << N``), finite everywhere."""
    lam = np.asarray(lam, dtype=float)
    out = dirichlet_scale(H, N) * np.exp(-1j * pi * lam) * sin_over_P(H, lam)
    return out if np.ndim(out) else complex(out)
