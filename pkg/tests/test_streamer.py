import io

import numpy as np
import pytest
from scipy.signal import lfilter

from ipdft_grid.estimator import estimate_all
from ipdft_grid.prefilter import FirFilter, StreamingFir
from ipdft_grid.signalgen import quantize, step_test
from ipdft_grid.streamer import RingBuffer, StreamConfig, phase_spike, run_stream, settle_time

FS = 24000.0


def test_config_validation():
    with pytest.raises(ValueError):
        StreamConfig(100)
    with pytest.raises(ValueError):
        StreamConfig(64, update_stride=0)
    cfg = StreamConfig(256, fir=FirFilter(np.ones(101)))
    assert cfg.group_delay == 50
    assert cfg.latency == pytest.approx(306 / FS)
    assert cfg.nominal_cir == pytest.approx(50 * 256 / FS)


def test_ring_buffer_order():
    rb = RingBuffer(4)
    rb.push(np.arange(3))
    assert not rb.full
    rb.push(np.arange(3, 10))
    assert rb.full and rb.count == 10
    np.testing.assert_array_equal(rb.window(), [6, 7, 8, 9])
    with pytest.raises(ValueError):
        rb.window()[0] = 1.0


def tone(n_samples, A=1.0, phi=0.3, f=50.0):
    n = np.arange(n_samples)
    return A * np.sin(2 * np.pi * f * n / FS + phi)


def test_timestamps_and_warmup():
    cfg = StreamConfig(64, update_stride=4)
    x = tone(400)
    tr = run_stream(cfg, x)
    t = tr.times
    np.testing.assert_allclose(np.diff(t), 4 / FS)
    assert t[0] == pytest.approx(63 / FS)
    assert tr.valid_mask.all()


def test_streaming_equals_batch():
    N, s = 128, 4
    x = tone(1000) + 0.01 * np.random.default_rng(0).standard_normal(1000)
    tr = run_stream(StreamConfig(N, update_stride=s, nominal_frequency=50.0), x)
    for j in (0, 7, len(tr) - 1):
        newest = int(round(tr.t[j] * FS))
        ref = estimate_all(x[newest - N + 1 : newest + 1], FS, 2, expected_cir_max=1.5 * N * 50 / FS)
        assert tr.estimates[j] == ref


def test_streaming_equals_batch_with_prefilter():
    fir = FirFilter(np.hanning(65) / np.sum(np.hanning(65)))
    N = 64
    x = tone(800)
    tr = run_stream(StreamConfig(N, fir=fir), x)
    sf = StreamingFir(fir)
    y = np.concatenate([sf.process(x[i : i + 4]) for i in range(0, len(x), 4)])
    np.testing.assert_allclose(y, lfilter(fir.taps, 1.0, x), rtol=0, atol=1e-14)
    valid = tr.valid_mask
    assert not valid[0] and valid[-1]
    j = len(tr) - 1
    newest = int(round(tr.t[j] * FS))
    ref = estimate_all(y[newest - N + 1 : newest + 1], FS, 2, expected_cir_max=1.5 * N * 50 / FS)
    assert tr.estimates[j] == ref
    assert tr.t_ref[j] == pytest.approx(tr.t[j] - (N - 1 + 32) / FS)


def test_steady_tone_flat():
    x, _ = quantize(tone(4000), 16, 2.0)
    tr = run_stream(StreamConfig(256), x)
    assert np.max(np.abs(tr.A1 - 1.0)) < 2 * 1.8e-3


def test_failures_flagged_not_fatal():
    x = np.concatenate([np.zeros(200), tone(400)])
    tr = run_stream(StreamConfig(64), x)
    assert not tr.valid_mask[0]
    assert tr.valid_mask[-1]
    assert np.isnan(tr.A1[0])


def test_phase_abs_constant_for_steady_tone():
    tr = run_stream(StreamConfig(128), tone(2000, phi=0.4), t_start=0.0)
    np.testing.assert_allclose(tr.phi_abs, 0.4, atol=1e-3)


def test_trace_csv():
    tr = run_stream(StreamConfig(64), tone(80))
    buf = io.StringIO()
    tr.to_csv(buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "t,f1,A1,phi1,valid"
    assert len(lines) == len(tr) + 1


def test_settle_time_constant():
    t = np.linspace(0, 1, 11)
    assert settle_time(t, np.ones(11), 1.0, 0.01) == 0.0


def test_settle_time_suffix():
    t = np.arange(10) * 0.1
    v = np.array([0, 0, 1, 1, 0, 1, 1, 1, 1, 1], dtype=float)
    assert settle_time(t, v, 1.0, 0.1) == pytest.approx(0.5)


def test_settle_time_never():
    t = np.arange(5.0)
    assert settle_time(t, [0, 0, 0, 0, 0], 1.0, 0.1) == np.inf


def test_settle_time_nan_counts_outside():
    t = np.arange(5.0)
    assert settle_time(t, [1, np.nan, 1, 1, 1], 1.0, 0.1) == 2.0


def test_settle_time_phase_wrap():
    t = np.arange(3.0)
    assert settle_time(t, [np.pi - 0.01, -np.pi + 0.01, np.pi], np.pi, 0.05, phase=True) == 0.0


def test_phase_spike():
    t = np.arange(6.0)
    v = [0.0, 0.5, 1.8, 1.6, 1.57, 1.57]
    assert phase_spike(t, v, 0.0, np.pi / 2) == pytest.approx((1.8 - np.pi / 2) / (np.pi / 2))
    assert phase_spike(t[:4], [0, 0.5, 1.0, 1.5], 0.0, np.pi / 2) == 0.0


def test_amplitude_step_settles():
    N = 128
    t, x = step_test("amplitude", 6 * N, FS, n_pre=3 * N)
    tr = run_stream(StreamConfig(N), x, t_start=t[0])
    st = settle_time(tr.times, tr.A1, 1.1, 0.011)
    assert 0 < st < N / FS
