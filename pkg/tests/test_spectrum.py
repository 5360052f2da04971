import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ipdft_grid.errors import NoSignalError, ShapeError
from ipdft_grid.spectrum import SpectrumTriplet, dtft_at, peak_bin, select_triplet, windowed_dft
from ipdft_grid.windows import window_samples


def direct_sum(x, w, lam):
    n = np.arange(len(x))
    return np.sum(x * w * np.exp(-2j * np.pi * lam * n / len(x)))


def tone(N, lam, A=1.0, phi=0.0):
    n = np.arange(N)
    return A * np.sin(2 * np.pi * lam * n / N + phi)


def test_constant_rectangular():
    X = windowed_dft(np.full(32, 2.5), window_samples(1, 32))
    assert X[0] == pytest.approx(80.0)
    assert np.max(np.abs(X[1:])) < 1e-12


def test_sine_on_bin():
    X = windowed_dft(tone(64, 3), window_samples(1, 64))
    assert abs(X[3]) == pytest.approx(32.0)
    others = np.delete(np.abs(X), [3, 61])
    assert np.max(others) < 1e-12


def test_fft_matches_direct_sum():
    rng = np.random.default_rng(1)
    x = rng.standard_normal(256)
    w = window_samples(2, 256)
    X = windowed_dft(x, w)
    ref = np.array([direct_sum(x, w, k) for k in range(256)])
    assert np.max(np.abs(X - ref)) <= 1e-10 * np.max(np.abs(ref))


def test_dtft_integer_matches_dft():
    rng = np.random.default_rng(2)
    x = rng.standard_normal(64)
    w = window_samples(2, 64)
    X = windowed_dft(x, w)
    np.testing.assert_allclose(dtft_at(x, w, np.arange(5)), X[:5], rtol=1e-12, atol=1e-12)


def test_dtft_zero_input():
    assert dtft_at(np.zeros(16), window_samples(2, 16), 1.3) == 0


@pytest.mark.parametrize("phi", np.arange(0.0, 3.2, 0.4))
def test_dtft_peak_near_tone(phi):
    # image leakage pulls the magnitude peak by a few hundredths of a bin
    w = window_samples(2, 512)
    grid = np.round(np.arange(0.0, 3.0 + 1e-9, 0.01), 2)
    mags = np.abs(dtft_at(tone(512, 1.3, phi=phi), w, grid))
    assert abs(grid[np.argmax(mags)] - 1.3) <= 0.05


@given(a=st.floats(-5, 5), b=st.floats(-5, 5), seed=st.integers(0, 1000))
@settings(max_examples=30)
def test_linearity(a, b, seed):
    rng = np.random.default_rng(seed)
    x, y = rng.standard_normal((2, 128))
    w = window_samples(2, 128)
    lhs = windowed_dft(a * x + b * y, w)
    rhs = a * windowed_dft(x, w) + b * windowed_dft(y, w)
    scale = max(np.max(np.abs(lhs)), 1.0)
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * scale


def test_conjugate_symmetry():
    x = np.random.default_rng(3).standard_normal(128)
    X = windowed_dft(x, window_samples(2, 128))
    np.testing.assert_allclose(X[1:][::-1], np.conj(X[1:]), rtol=1e-12, atol=1e-12)


def test_batch_rows():
    rng = np.random.default_rng(4)
    x = rng.standard_normal((3, 64))
    w = window_samples(2, 64)
    X = windowed_dft(x, w)
    for r in range(3):
        np.testing.assert_allclose(X[r], windowed_dft(x[r], w))


def test_length_mismatch():
    with pytest.raises(ShapeError):
        windowed_dft(np.ones(8), window_samples(2, 16))


def test_select_k1_for_low_cir():
    X = windowed_dft(tone(512, 1.07), window_samples(2, 512))
    t = select_triplet(X, 2, expected_cir_max=1.5)
    assert t.k == 1
    assert t.bins == pytest.approx(X[:3])


def test_select_peak_unclamped():
    X = windowed_dft(tone(512, 5.4), window_samples(2, 512))
    assert select_triplet(X, 2).k == 5
    assert peak_bin(X) == 5


def test_select_zero_input():
    with pytest.raises(NoSignalError):
        select_triplet(np.zeros(64, complex), 2)


def test_triplet_from_spectrum():
    X = np.arange(10) + 1j
    t = SpectrumTriplet.from_spectrum(X, 4, 2)
    assert (t.Xkm1, t.Xk, t.Xkp1) == (X[3], X[4], X[5])
    assert t.N == 10


def test_triplet_rejects_k0():
    with pytest.raises(ValueError):
        SpectrumTriplet(0, 1j, 1j, 1j, 16, 2)
