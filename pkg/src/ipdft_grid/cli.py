"""``ipdft-grid`` command line: experiment reproduction and one-shot estimation.

Usage::

    ipdft-grid <subcommand> --config <file> [--seed S] [--quick] [--out <path>]

Exit status is 0 on success, 2 for configuration or input errors and 3
when estimation fails.
"""

from __future__ import annotations

import argparse
import logging
import sys
from contextlib import contextmanager

import numpy as np

from . import experiments as ex
from .errors import ConfigError, CorruptFileError, DesignError, EstimationError, NoSignalError
from .estimator import estimate_all
from .metrics import SweepResult
from .persistence import load_config, read_samples
from .prefilter import apply_fir, load_taps

log = logging.getLogger(__name__)

SUBCOMMANDS = ("fig1", "fig3", "table1", "table2", "transient", "combined", "estimate")
NEEDS_SEED = ("fig3", "combined")
EXIT_OK, EXIT_CONFIG, EXIT_ESTIMATION = 0, 2, 3
QUICK_FACTOR = 10

# recognised keys per section; anything else is a config error
SCHEMA = {
    "experiment": {"name"},
    "output": {"path"},
    "window": {"H"},
    "sweep": {"N", "cir", "snr", "phi_step", "realizations", "frequency", "crb_convention", "harmonic_sets"},
    "signal": {
        "f1",
        "fs",
        "A1",
        "phi1_deg",
        "sigma",
        "drift_rel",
        "tau",
        "quant_bits",
        "full_scale",
        "harmonic_rel",
        "harmonic_phase",
    },
    "prefilter": {"select", "file", "filters"},
    "stream": {"update_stride", "known_frequency", "amp_tol_rel", "phase_tol"},
    "input": {"path", "N", "lambda1", "expected_cir_max"},
}


class Config:
    """Typed access to the INI file with schema checking."""

    def __init__(self, cp):
        self.cp = cp
        for section in cp.sections():
            if section not in SCHEMA:
                raise ConfigError(f"unknown section [{section}]")
            unknown = set(cp[section]) - {k.lower() for k in SCHEMA[section]}
            if unknown:
                raise ConfigError(f"unknown keys in [{section}]: {', '.join(sorted(unknown))}")

    def raw(self, section, key):
        if self.cp.has_section(section):
            return self.cp[section].get(key.lower())
        return None

    def get(self, section, key, conv, default=None):
        v = self.raw(section, key)
        if v is None or v.strip() == "":
            return default
        try:
            return conv(v.strip())
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"[{section}] {key} = {v!r}: {exc}") from exc

    def floats(self, section, key, default):
        return self.get(section, key, parse_grid, default)

    def ints(self, section, key, default):
        v = self.get(section, key, parse_grid, None)
        if v is None:
            return default
        if any(abs(x - round(x)) > 1e-9 for x in v):
            raise ConfigError(f"[{section}] {key} must be integers")
        return tuple(int(round(x)) for x in v)


def parse_grid(text: str) -> tuple:
    """``"1, 2, 3"`` or ``"start:stop:step"`` (inclusive stop)."""
    text = text.strip()
    if ":" in text:
        parts = [float(p) for p in text.split(":")]
        if len(parts) != 3 or parts[2] <= 0 or parts[1] < parts[0]:
            raise ValueError("range must be start:stop:step with step > 0 and stop >= start")
        start, stop, step = parts
        n = int(np.floor((stop - start) / step + 1e-9)) + 1
        return tuple(float(np.round(start + i * step, 12)) for i in range(n))
    vals = tuple(float(p) for p in text.replace(";", ",").split(",") if p.strip())
    if not vals:
        raise ValueError("empty list")
    return vals


def parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def parse_sets(text: str) -> tuple:
    """``"2; 3; 2+3"`` -> ``((2,), (3,), (2, 3))``."""
    out = []
    for item in text.replace(",", ";").split(";"):
        item = item.strip()
        if item:
            out.append(tuple(int(o) for o in item.split("+")))
    if not out:
        raise ValueError("no harmonic sets")
    return tuple(out)


def _names(text: str) -> tuple:
    vals = tuple(v.strip() for v in text.split(",") if v.strip())
    for v in vals:
        if v.lower() not in ("none", "a", "b"):
            raise ValueError(f"filter must be none, A or B, got {v!r}")
    return vals


def _require(cond, msg):
    if not cond:
        raise ConfigError(msg)


def _run_fig1(cfg: Config, seed, quick):
    step = cfg.get("sweep", "phi_step", float, 0.01)
    if quick:
        step *= QUICK_FACTOR
    Ns = cfg.ints("sweep", "N", ex.DEFAULT_N_GRID)
    cirs = cfg.floats("sweep", "cir", ex.DEFAULT_CIR_GRID)
    _require(all(c > 0 for c in cirs), "CiR values must be positive")
    _require(all(N >= 8 for N in Ns), "N values must be >= 8")
    return ex.run_fig1_fig2(
        Ns,
        cirs,
        H=cfg.get("window", "H", int, 2),
        phi_step=step,
        frequency=cfg.get("sweep", "frequency", str, "known"),
    )


def _run_fig3(cfg: Config, seed, quick):
    R = cfg.get("sweep", "realizations", int, 10_000)
    if quick:
        R = max(200, R // QUICK_FACTOR)
    cirs = cfg.floats("sweep", "cir", (0.7, 1.5))
    _require(all(0 < c < 2 for c in cirs), "noise study CiR values must lie in (0, 2)")
    return ex.run_fig3_fig4(
        cirs,
        cfg.floats("sweep", "snr", tuple(range(30, 91, 10))),
        N=cfg.ints("sweep", "N", (512,))[0],
        realizations=R,
        seed=seed,
        H=cfg.get("window", "H", int, 2),
        phi_step=cfg.get("sweep", "phi_step", float, 0.01),
        crb_convention=cfg.get("sweep", "crb_convention", str, "complex"),
    )


def _run_tables(cfg: Config, seed, quick):
    step = cfg.get("sweep", "phi_step", float, 0.01)
    if quick:
        step *= QUICK_FACTOR
    return ex.run_table1_table2(
        cfg.ints("sweep", "N", (64, 128, 256, 512)),
        cfg.get("sweep", "harmonic_sets", parse_sets, ex.DEFAULT_HARMONIC_SETS),
        cfg.get("prefilter", "filters", _names, ("none", "A", "B")),
        f1=cfg.get("signal", "f1", float, 50.0),
        fs=cfg.get("signal", "fs", float, 24000.0),
        rel_amplitude=cfg.get("signal", "harmonic_rel", float, 0.1),
        harmonic_phase=cfg.get("signal", "harmonic_phase", float, 0.0),
        H=cfg.get("window", "H", int, 2),
        phi_step=step,
        frequency=cfg.get("sweep", "frequency", str, "known"),
    )


def _select(result: SweepResult, keep) -> SweepResult:
    return SweepResult({k: result.columns[k] for k in keep})


def _run_table1(cfg, seed, quick):
    return _select(_run_tables(cfg, seed, quick), ["filter", "N", "cir", "harmonics", "err_amp_pct"])


def _run_table2(cfg, seed, quick):
    return _select(_run_tables(cfg, seed, quick), ["filter", "N", "cir", "harmonics", "err_phase"])


def _run_transient(cfg: Config, seed, quick):
    bits = cfg.get("signal", "quant_bits", str, "16")
    return ex.run_transient(
        cfg.ints("sweep", "N", (64, 128, 256)),
        f1=cfg.get("signal", "f1", float, 60.0),
        fs=cfg.get("signal", "fs", float, 24000.0),
        quant_bits=None if bits.lower() == "none" else int(bits),
        full_scale=cfg.get("signal", "full_scale", float, 2.0),
        known_frequency=cfg.get("stream", "known_frequency", parse_bool, False),
        update_stride=cfg.get("stream", "update_stride", int, 4),
        amp_tol_rel=cfg.get("stream", "amp_tol_rel", float, 0.01),
        phase_tol=cfg.get("stream", "phase_tol", float, 0.15),
        H=cfg.get("window", "H", int, 2),
    )


def _run_combined(cfg: Config, seed, quick):
    sel = cfg.get("prefilter", "select", str, "A")
    _require(sel.lower() in ("none", "a", "b"), "combined run takes prefilter select = none, A or B")
    return ex.run_combined(
        cfg.ints("sweep", "N", (256, 512)),
        seed=seed,
        A1=cfg.get("signal", "A1", float, 31.6),
        f1=cfg.get("signal", "f1", float, 50.0),
        phi1=np.deg2rad(cfg.get("signal", "phi1_deg", float, 80.0)),
        fs=cfg.get("signal", "fs", float, 24000.0),
        sigma=cfg.get("signal", "sigma", float, 0.05),
        drift_rel=cfg.get("signal", "drift_rel", float, 0.25),
        tau=cfg.get("signal", "tau", float, 0.05),
        filter_name=sel,
        update_stride=cfg.get("stream", "update_stride", int, 4),
        H=cfg.get("window", "H", int, 2),
    )


def _run_estimate(cfg: Config, seed, quick):
    path = cfg.get("input", "path", str)
    _require(path, "[input] path is required for estimate")
    try:
        rec = read_samples(path)
    except CorruptFileError as exc:
        raise ConfigError(str(exc)) from exc
    x = rec.samples
    sel = cfg.get("prefilter", "select", str, "none")
    fir = None
    if sel.lower() == "file":
        taps = cfg.get("prefilter", "file", str)
        _require(taps, "[prefilter] file is required when select = file")
        try:
            fir = load_taps(taps, rec.fs)
        except (OSError, CorruptFileError) as exc:
            raise ConfigError(str(exc)) from exc
    elif sel.lower() != "none":
        fir = ex.reference_filter(sel)
    if fir is not None:
        y, valid = apply_fir(fir, x)
        x = y[valid]
    N = cfg.get("input", "N", int, len(x))
    _require(3 <= N <= len(x), f"N={N} needs 3 <= N <= {len(x)} usable samples")
    est = estimate_all(
        x[-N:],
        rec.fs,
        cfg.get("window", "H", int, 2),
        lambda1=cfg.get("input", "lambda1", float),
        expected_cir_max=cfg.get("input", "expected_cir_max", float),
    )
    return SweepResult(
        {"f1": [est.f1], "A1": [est.A1], "phi1": [est.phi1], "lambda1": [est.lambda1], "k": [est.k], "N": [N]}
    )


RUNNERS = {
    "fig1": _run_fig1,
    "fig3": _run_fig3,
    "table1": _run_table1,
    "table2": _run_table2,
    "transient": _run_transient,
    "combined": _run_combined,
    "estimate": _run_estimate,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ipdft-grid", description=__doc__.splitlines()[0])
    p.add_argument("subcommand", choices=SUBCOMMANDS)
    p.add_argument("--config", required=True, help="INI experiment configuration")
    p.add_argument("--seed", type=int, help="base RNG seed (required for fig3 and combined)")
    p.add_argument("--quick", action="store_true", help="shrink grids and realization counts tenfold")
    p.add_argument("--out", help="output CSV path ('-' for stdout); overrides [output] path")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


@contextmanager
def _open_out(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        try:
            fh = open(path, "w", newline="")
        except OSError as exc:
            raise ConfigError(f"cannot write {path}: {exc}") from exc
        with fh:
            yield fh


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = Config(load_config(args.config))
        seed = args.seed
        if args.subcommand in NEEDS_SEED and seed is None:
            raise ConfigError(f"--seed is required for {args.subcommand}")
        result = RUNNERS[args.subcommand](cfg, seed, args.quick)
        out = args.out if args.out is not None else cfg.get("output", "path", str)
        with _open_out(out) as fh:
            result.to_csv(fh)
    except (ConfigError, DesignError) as exc:
        print(f"ipdft-grid: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, TypeError) as exc:
        print(f"ipdft-grid: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (EstimationError, NoSignalError) as exc:
        print(f"ipdft-grid: estimation failed: {exc}", file=sys.stderr)
        return EXIT_ESTIMATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
