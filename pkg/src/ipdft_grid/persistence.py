"""Raw sample files, experiment configs and CSV output."""

from __future__ import annotations

import configparser
import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, CorruptFileError

__all__ = [
    "SampleRecord",
    "read_samples",
    "write_samples",
    "header_path",
    "load_config",
    "write_csv",
    "format_value",
]


@dataclass(frozen=True, eq=False)
class SampleRecord:
    fs: float
    samples: np.ndarray
    note: str = ""

    def __post_init__(self):
        if not self.fs > 0:
            raise ValueError("fs must be positive")
        x = np.asarray(self.samples, dtype=float)
        if x.ndim != 1 or x.size == 0:
            raise ValueError("samples must be a non-empty 1-D sequence")
        object.__setattr__(self, "samples", x)


def header_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".hdr")


def write_samples(record: SampleRecord, path) -> None:
    """Raw little-endian float64 payload plus ``<path>.hdr`` holding
    ``fs=<hz> n=<count>`` (and an optional ``note=`` line)."""
    path = Path(path)
    path.write_bytes(record.samples.astype("<f8").tobytes())
    hdr = f"fs={record.fs!r} n={record.samples.size}\n"
    if record.note:
        hdr += f"note={record.note}\n"
    header_path(path).write_text(hdr)


def _parse_header(text: str, where) -> dict:
    fields = {}
    for line in text.splitlines():
        if line.startswith("note="):
            fields["note"] = line[5:]
            continue
        for tok in line.split():
            key, sep, val = tok.partition("=")
            if not sep:
                raise CorruptFileError(f"malformed header token {tok!r} in {where}")
            fields[key] = val
    try:
        fs = float(fields["fs"])
        n = int(fields["n"])
    except (KeyError, ValueError) as exc:
        raise CorruptFileError(f"header {where} needs numeric fs= and n=") from exc
    if not (fs > 0 and n > 0):
        raise CorruptFileError(f"header {where} has non-positive fs or n")
    return {"fs": fs, "n": n, "note": fields.get("note", "")}


def read_samples(path) -> SampleRecord:
    path = Path(path)
    hpath = header_path(path)
    try:
        payload = path.read_bytes()
        hdr = _parse_header(hpath.read_text(), hpath)
    except FileNotFoundError as exc:
        raise CorruptFileError(f"missing sample file or header: {exc.filename}") from exc
    if len(payload) == 0:
        raise CorruptFileError(f"{path} is empty")
    if len(payload) != 8 * hdr["n"]:
        raise CorruptFileError(f"{path}: header says {hdr['n']} samples, payload holds {len(payload) / 8:g}")
    x = np.frombuffer(payload, dtype="<f8").astype(float)
    return SampleRecord(hdr["fs"], x, hdr["note"])


def load_config(path) -> configparser.ConfigParser:
    """Read an INI-style config; missing or unparsable files raise ConfigError."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return cp


def format_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return f"{v:.10e}"
    return str(v)


def write_csv(path_or_file, header, rows) -> None:
    """Header row then data rows; floats in scientific notation, 11 significant digits."""
    if isinstance(path_or_file, io.TextIOBase) or hasattr(path_or_file, "write"):
        _write(path_or_file, header, rows)
        return
    with open(path_or_file, "w", newline="") as fh:
        _write(fh, header, rows)


def _write(fh, header, rows):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([format_value(v) for v in row])
