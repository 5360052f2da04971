"""Experiment drivers behind the CLI subcommands.

Each ``run_*`` function is deterministic given its arguments (and seed)
and returns a :class:`~ipdft_grid.metrics.SweepResult`.
"""

from __future__ import annotations

import logging
from math import pi

import numpy as np

from .estimator import estimate_known_frequency
from .metrics import (
    SweepResult,
    crb_amplitude,
    crb_phase,
    phase_grid,
    worst_phase_sweep,
    wrapped_phase_error,
)
from .prefilter import FILTER_A_TEMPLATE, FILTER_B_TEMPLATE, REFERENCE_ORDERS, FirFilter, design_bandpass
from .signalgen import Drift, SignalSpec, harmonic_tones, quantize, sigma_for_snr, snr_db, step_test, synth
from .streamer import StreamConfig, phase_spike, run_stream, settle_time
from .windows import window_samples

__all__ = [
    "DEFAULT_N_GRID",
    "DEFAULT_CIR_GRID",
    "DEFAULT_HARMONIC_SETS",
    "COMBINED_HARMONICS",
    "reference_filter",
    "loglog_slope",
    "run_fig1_fig2",
    "run_fig3_fig4",
    "run_table1_table2",
    "run_transient",
    "run_combined",
]

log = logging.getLogger(__name__)

DEFAULT_N_GRID = tuple(2**p for p in range(5, 12))
DEFAULT_CIR_GRID = tuple(np.round(np.arange(0.1, 2.0 + 1e-9, 0.05), 2))
DEFAULT_HARMONIC_SETS = ((2,), (3,), (4,), (5,), (6,), (7,), (2, 3), (3, 4), (2, 3, 4))
# (order, amplitude relative to the fundamental, phase rad); THD ~ 38%
COMBINED_HARMONICS = (
    (3, 0.5 / 1.5, np.deg2rad(60)),
    (5, 0.2 / 1.5, np.deg2rad(45)),
    (7, 0.15 / 1.5, np.deg2rad(36)),
    (11, 0.1 / 1.5, np.deg2rad(30)),
)


def reference_filter(name: str) -> FirFilter | None:
    """``'none'``, ``'A'`` or ``'B'`` at the reference orders."""
    name = name.upper() if name.lower() != "none" else "none"
    if name == "none":
        return None
    template = {"A": FILTER_A_TEMPLATE, "B": FILTER_B_TEMPLATE}.get(name)
    if template is None:
        raise ValueError(f"unknown filter {name!r}")
    return design_bandpass(template, REFERENCE_ORDERS[name])


def loglog_slope(x, y) -> float:
    """Least-squares slope of ``log y`` against ``log x``."""
    return float(np.polyfit(np.log(np.asarray(x, float)), np.log(np.asarray(y, float)), 1)[0])


def run_fig1_fig2(
    Ns=DEFAULT_N_GRID,
    cirs=DEFAULT_CIR_GRID,
    *,
    H: int = 2,
    phi_step: float = 0.01,
    frequency: str = "known",
) -> SweepResult:
    """Worst-phase systematic error of a pure tone over ``N`` x CiR."""
    rows = []
    for cir in cirs:
        for N in Ns:
            ea, ep = worst_phase_sweep(N, cir, H, phi_step, frequency=frequency)
            rows.append((float(cir), int(N), ea, ep))
    cols = list(zip(*rows))
    return SweepResult({"cir": cols[0], "N": cols[1], "err_amp": cols[2], "err_phase": cols[3]})


def _low_bin_operator(N: int, H: int, bins: int = 3) -> np.ndarray:
    """``(N, bins)`` matrix mapping a record to its windowed DFT bins 0..bins-1."""
    n = np.arange(N)
    return window_samples(H, N)[:, None] * np.exp(-2j * pi * np.outer(n, np.arange(bins)) / N)


def _noise_bins(N: int, realizations: int, seed: int, op: np.ndarray, chunk: int = 4096) -> np.ndarray:
    """Low DFT bins of unit-variance noise; realization ``i`` uses seed ``seed + i``."""
    out = np.empty((realizations, op.shape[1]), dtype=complex)
    for start in range(0, realizations, chunk):
        stop = min(start + chunk, realizations)
        z = np.stack([np.random.default_rng(seed + i).standard_normal(N) for i in range(start, stop)])
        out[start:stop] = z @ op
    return out


def run_fig3_fig4(
    cirs=(0.7, 1.5),
    snrs=tuple(range(30, 91, 10)),
    *,
    N: int = 512,
    realizations: int = 10_000,
    seed: int = 0,
    H: int = 2,
    phi_step: float = 0.01,
    crb_convention: str = "complex",
) -> SweepResult:
    """Noise study: eMSE of amplitude and phase against the CRB.

    Unit-amplitude tone with known frequency; realization ``i`` has phase
    ``(i mod len(phase grid)) * phi_step`` and noise seeded with
    ``seed + i``.  The same unit noise is reused at every SNR and CiR.
    """
    if realizations < 2:
        raise ValueError("need at least two realizations")
    grid = phase_grid(phi_step)
    phis = grid[np.arange(realizations) % len(grid)]
    op = _low_bin_operator(N, H)
    Z = _noise_bins(N, realizations, seed, op)
    n = np.arange(N)
    rows = []
    for cir in cirs:
        if cir >= 2:
            raise ValueError("noise study uses the k=1 triplet; CiR must be below 2")
        S = np.sin(2 * pi * cir * n / N) @ op
        C = np.cos(2 * pi * cir * n / N) @ op
        clean = np.cos(phis)[:, None] * S + np.sin(phis)[:, None] * C
        for snr in snrs:
            sigma = sigma_for_snr(snr)
            A, phi = estimate_known_frequency(clean + sigma * Z, cir, k=1, H=H, N=N)
            dA2 = (A - 1.0) ** 2
            dp2 = wrapped_phase_error(phi, phis) ** 2
            emse_a, emse_p = dA2.mean(), dp2.mean()
            se_a = dA2.std(ddof=1) / np.sqrt(realizations)
            se_p = dp2.std(ddof=1) / np.sqrt(realizations)
            crb_a = crb_amplitude(sigma, N, convention=crb_convention)
            crb_pk = crb_phase(sigma, 1.0, N, known_frequency=True, convention=crb_convention)
            crb_pj = crb_phase(sigma, 1.0, N, known_frequency=False, convention=crb_convention)
            rows.append(
                (
                    float(cir),
                    float(snr),
                    sigma,
                    np.sqrt(emse_a),
                    np.sqrt(crb_a),
                    np.sqrt(emse_a / crb_a),
                    emse_a + se_a >= crb_a,
                    np.sqrt(emse_p),
                    np.sqrt(crb_pk),
                    np.sqrt(emse_p / crb_pk),
                    emse_p + se_p >= crb_pk,
                    np.sqrt(crb_pj),
                )
            )
    names = [
        "cir",
        "snr_db",
        "sigma",
        "rmse_amp",
        "sqrt_crb_amp",
        "ratio_amp",
        "amp_above_crb",
        "rmse_phase",
        "sqrt_crb_phase_known_f",
        "ratio_phase",
        "phase_above_crb",
        "sqrt_crb_phase_joint",
    ]
    return SweepResult(dict(zip(names, zip(*rows))))


def _set_label(orders) -> str:
    return "+".join(str(o) for o in orders)


def run_table1_table2(
    Ns=(64, 128, 256, 512),
    harmonic_sets=DEFAULT_HARMONIC_SETS,
    filters=("none", "A", "B"),
    *,
    f1: float = 50.0,
    fs: float = 24000.0,
    rel_amplitude: float = 0.1,
    harmonic_phase: float = 0.0,
    H: int = 2,
    phi_step: float = 0.01,
    frequency: str = "known",
) -> SweepResult:
    """Worst-phase errors with harmonics present, with and without prefilter.

    Harmonics have ``rel_amplitude`` of the fundamental and a fixed phase
    at the record start; only the fundamental phase is swept.  Amplitude
    error is in percent.
    """
    rows = []
    for fname in filters:
        fir = reference_filter(fname)
        for N in Ns:
            cir = f1 * N / fs
            for orders in harmonic_sets:
                harm = [(o, rel_amplitude, harmonic_phase) for o in orders]
                ea, ep = worst_phase_sweep(N, cir, H, phi_step, harmonics=harm, fir=fir, fs=fs, frequency=frequency)
                rows.append((fname, int(N), cir, _set_label(orders), 100 * ea, ep))
    names = ["filter", "N", "cir", "harmonics", "err_amp_pct", "err_phase"]
    return SweepResult(dict(zip(names, zip(*rows))))


def run_transient(
    Ns=(64, 128, 256),
    *,
    f1: float = 60.0,
    fs: float = 24000.0,
    quant_bits: int | None = 16,
    full_scale: float = 2.0,
    known_frequency: bool = False,
    update_stride: int = 4,
    amp_tol_rel: float = 0.01,
    phase_tol: float = 0.15,
    H: int = 2,
) -> SweepResult:
    """Amplitude (+10%) and phase (+90 deg) step responses of the stream.

    The default 60 Hz tone puts N = 64, 128, 256 at CiR 0.16, 0.32, 0.64.
    Settle times use the suffix criterion measured from the step; the
    steady error is the largest deviation before the step (after warm-up).
    Phase is read at the window centre (see ``EstimateTrace.phi_abs``).
    """
    rows = []
    for N in Ns:
        NT = N / fs
        cfg = StreamConfig(N, fs, update_stride, H, nominal_frequency=f1, known_frequency=known_frequency)
        for kind in ("amplitude", "phase"):
            t, x = step_test(kind, 6 * N, fs, f1=f1, n_pre=3 * N)
            if quant_bits is not None:
                x, _ = quantize(x, quant_bits, full_scale)
            tr = run_stream(cfg, x, t_start=t[0])
            tt = tr.times
            pre = tr.valid_mask & (tt < 0)
            if kind == "amplitude":
                A = tr.A1
                st = settle_time(tt, A, 1.1, amp_tol_rel * 1.1)
                steady = float(np.max(np.abs(A[pre] - 1.0)))
                spike = float("nan")
            else:
                ph = tr.phi_abs
                st = settle_time(tt, ph, pi / 2, phase_tol, phase=True)
                steady = float(np.max(np.abs(wrapped_phase_error(ph[pre], 0.0))))
                spike = phase_spike(tt, ph, 0.0, pi / 2)
            rows.append((int(N), f1 * NT, kind, st, st / NT, spike, steady))
    names = ["N", "cir", "kind", "settle_s", "settle_NT", "spike_rel", "steady_err"]
    return SweepResult(dict(zip(names, zip(*rows))))


def run_combined(
    Ns=(256, 512),
    *,
    seed: int = 0,
    A1: float = 31.6,
    f1: float = 50.0,
    phi1: float = np.deg2rad(80),
    fs: float = 24000.0,
    sigma: float = 0.05,
    drift_rel: float = 0.25,
    tau: float = 0.05,
    harmonics=COMBINED_HARMONICS,
    filter_name: str = "A",
    pre: float = 0.3,
    post: float = 0.3,
    update_stride: int = 4,
    H: int = 2,
) -> SweepResult:
    """Full pipeline on a distorted, noisy tone with an exponential drift
    switched on at ``t = 0``.

    Reports, per ``N``, the largest errors before the drift onset, the
    largest errors once every input sample behind an estimate postdates the
    onset (``t >= (2 gd + N - 1) T``), and the peak errors in between.
    """
    fir = reference_filter(filter_name)
    spec = SignalSpec(
        harmonic_tones(A1, f1, phi1, harmonics),
        fs=fs,
        noise_sigma=sigma,
        drift=Drift(drift_rel * A1, tau, 0.0),
        seed=seed,
    )
    n_pre = int(round(pre * fs))
    x = synth(spec, n_pre + int(round(post * fs)), t_start=-n_pre / fs)
    rows = []
    for N in Ns:
        cfg = StreamConfig(N, fs, update_stride, H, fir=fir, nominal_frequency=f1)
        tr = run_stream(cfg, x, t_start=-n_pre / fs)
        tt, ok = tr.times, tr.valid_mask
        ea = np.abs(tr.A1 / A1 - 1.0)
        ep = np.abs(wrapped_phase_error(tr.phi_abs, phi1))
        gd = cfg.group_delay
        settled_after = (2 * gd + N - 1) / fs
        before = ok & (tt < 0)
        after = ok & (tt >= settled_after)
        between = ok & (tt >= 0) & (tt < settled_after)
        n_fail = int(np.sum(~ok & (tt >= -pre + (N + (fir.order if fir else 0)) / fs)))
        rows.append(
            (
                int(N),
                spec.thd,
                snr_db(spec),
                float(np.max(ea[before])),
                float(np.max(ep[before])),
                float(np.max(ea[after])),
                float(np.max(ep[after])),
                float(np.max(ea[between], initial=0.0)),
                float(np.max(ep[between], initial=0.0)),
                settled_after,
                n_fail,
            )
        )
    names = [
        "N",
        "thd",
        "snr_db",
        "amp_err_before",
        "phase_err_before",
        "amp_err_after",
        "phase_err_after",
        "amp_err_transient_peak",
        "phase_err_transient_peak",
        "settled_after_s",
        "failed_estimates",
    ]
    return SweepResult(dict(zip(names, zip(*rows))))
