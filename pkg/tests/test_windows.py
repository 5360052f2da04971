import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ipdft_grid.errors import InvalidOrderError
from ipdft_grid.windows import (
    WindowSpec,
    dirichlet_D,
    poly_P,
    window_coefficients,
    window_samples,
    window_spectrum_model,
)


def direct_dtft(w, lam):
    n = np.arange(len(w))
    return np.sum(w * np.exp(-2j * np.pi * lam * n / len(w)))


@pytest.mark.parametrize(
    "H, expected",
    [(1, [1.0]), (2, [0.5, 0.5]), (3, [0.375, 0.5, 0.125])],
)
def test_coefficients(H, expected):
    np.testing.assert_allclose(window_coefficients(H), expected, rtol=0, atol=1e-15)


def test_invalid_order():
    with pytest.raises(InvalidOrderError):
        window_coefficients(0)


def test_short_window_rejected():
    with pytest.raises(ValueError):
        window_samples(3, 4)


def test_hann_small():
    np.testing.assert_allclose(window_samples(2, 4), [0.0, 0.5, 1.0, 0.5], atol=1e-15)


def test_rectangular():
    np.testing.assert_array_equal(window_samples(1, 37), np.ones(37))


@pytest.mark.parametrize("N", [8, 64, 512, 2048])
def test_matches_hanning_closed_form(N):
    n = np.arange(N)
    np.testing.assert_allclose(window_samples(2, N), 0.5 * (1 - np.cos(2 * np.pi * n / N)), rtol=0, atol=1e-15)


def test_spec_and_int_forms_agree():
    np.testing.assert_array_equal(window_samples(WindowSpec(3, 64)), window_samples(3, 64))


def test_samples_read_only():
    w = window_samples(2, 16)
    with pytest.raises(ValueError):
        w[0] = 1.0


@given(H=st.integers(2, 6), p=st.integers(4, 11))
@settings(max_examples=40, deadline=None)
def test_first_sample_zero_and_sum(H, p):
    N = 2**p
    if N < 2 * H:
        return
    w = window_samples(H, N)
    assert abs(w[0]) < 1e-15
    assert np.sum(w) == pytest.approx(N * window_coefficients(H)[0], rel=1e-12)


def test_third_order_sidelobe_decay():
    # class I order H sidelobes fall at 6(2H-1) dB/octave; 30 dB for H=3
    N = 256
    w = window_samples(3, N)
    peaks = [abs(direct_dtft(w, lam)) for lam in (10.5, 20.5, 40.5)]
    slopes = 20 * np.log10(np.array(peaks[1:]) / np.array(peaks[:-1]))
    np.testing.assert_allclose(slopes, -30.0, atol=1.0)


def test_poly_P_values():
    assert poly_P(2, 0.5) == pytest.approx(0.375)
    assert poly_P(4, 0.0) == 0.0
    assert poly_P(3, 2.0) == 0.0


@given(H=st.integers(2, 6), lam=st.floats(-10, 10, allow_nan=False))
def test_poly_P_odd(H, lam):
    assert poly_P(H, -lam) == -poly_P(H, lam)


def test_dirichlet_values():
    assert dirichlet_D(2, 512, 0.5) == pytest.approx(-256j / np.pi, rel=1e-14)
    for m in range(-3, 4):
        assert abs(dirichlet_D(2, 512, float(m))) < 1e-9


@given(
    lam=st.floats(0.05, 3.0).filter(lambda v: abs(v - round(v)) > 1e-3),
    k=st.integers(1, 5),
    sign=st.sampled_from([-1, 1]),
)
def test_dirichlet_shift_identity(lam, k, sign):
    d = [dirichlet_D(2, 512, k + j + sign * lam) for j in (-1, 0, 1)]
    np.testing.assert_allclose(d[0], d[1], rtol=1e-9)
    np.testing.assert_allclose(d[2], d[1], rtol=1e-9)


def test_model_dc_and_half_bin():
    assert window_spectrum_model(2, 512, 0.0) == pytest.approx(256.0, rel=1e-14)
    expected = -1j * (256 / np.pi) / 0.375
    assert window_spectrum_model(2, 512, 0.5) == pytest.approx(expected, rel=1e-12)


def test_model_limit_branch_continuous():
    for m in (0.0, 1.0):
        at = window_spectrum_model(2, 512, m)
        near = window_spectrum_model(2, 512, m + 1e-7)
        assert abs(at - near) / abs(at) < 1e-5


def test_model_vs_direct_sum():
    w = window_samples(2, 1024)
    direct = direct_dtft(w, 0.5)
    assert abs(window_spectrum_model(2, 1024, 0.5) - direct) / abs(direct) < 1e-3


@pytest.mark.parametrize("H", [2, 3, 4])
@pytest.mark.parametrize("N", [512, 2048])
def test_model_fidelity(H, N):
    w = window_samples(H, N)
    lams = np.arange(0.1, 5.0, 0.37)
    lams = lams[np.abs(lams - np.round(lams)) > 0.05]
    for lam in lams:
        direct = direct_dtft(w, lam)
        model = window_spectrum_model(H, N, lam)
        assert abs(model - direct) <= 1e-2 * abs(direct)


def test_zero_structure():
    for m in (2, 3, 5):
        assert abs(window_spectrum_model(2, 512, m + 1e-9)) < 1e-6
