"""Plain-text formats: schedule and trace CSV, key=value reports.

Every file starts with ``# key=value`` comment lines carrying the metadata
needed to reproduce it.  Floats are written with ``repr`` so a read-back is
bit-exact.
"""

from __future__ import annotations

import io
import os
import tempfile
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .compiler import CompilerConfig, Schedule, multipass_params
from .model import ModelParams
from .propagator import EvolutionTrace

SCHEDULE_COLUMNS = (
    "index",
    "start_time_s",
    "duration_s",
    "amplitude_rad_s",
    "carrier_offset_rad_s",
    "phase_rad",
    "fx",
    "fy",
    "fz",
)
TRACE_COLUMNS = ("t_phys_s", "t_dimless", "p0", "ground_fidelity")

PathLike = Union[str, os.PathLike]

_SCHEDULE_KEYS = {
    "delta",
    "b",
    "t_start",
    "span_length",
    "passes",
    "mode",
    "include_cd",
    "quantized",
    "omega_cap",
    "n_segments",
    "time_resolution",
    "sample_point",
}


class FormatError(ValueError):
    """Malformed input file; carries the 1-based line and column."""

    def __init__(self, line: int, column: int, message: str):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


def format_value(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def header_lines(meta: Mapping[str, object]) -> List[str]:
    return [f"# {key}={format_value(value)}" for key, value in meta.items()]


def atomic_write(path: PathLike, text: str) -> None:
    """Write via a temporary file in the same directory, then rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _rows_text(columns: Sequence[str], rows: Iterable[Sequence[object]]) -> str:
    out = io.StringIO()
    out.write(",".join(columns) + "\n")
    for row in rows:
        out.write(",".join(format_value(v) for v in row) + "\n")
    return out.getvalue()


def schedule_to_csv(s: Schedule, extra_meta: Optional[Mapping[str, object]] = None) -> str:
    meta = dict(s.metadata())
    if extra_meta:
        meta.update(extra_meta)
    rows = zip(
        range(len(s)),
        s.start_times,
        s.durations,
        s.amplitudes,
        s.carriers,
        s.phases,
        s.fields[:, 0],
        s.fields[:, 1],
        s.fields[:, 2],
    )
    return "\n".join(header_lines(meta)) + "\n" + _rows_text(SCHEDULE_COLUMNS, rows)


def write_schedule(path: PathLike, s: Schedule, extra_meta: Optional[Mapping[str, object]] = None) -> None:
    atomic_write(path, schedule_to_csv(s, extra_meta))


def _parse_bool(text: str, line: int) -> bool:
    if text in ("true", "True", "1"):
        return True
    if text in ("false", "False", "0"):
        return False
    raise FormatError(line, 1, f"expected a boolean, got {text!r}")


def _split_comments(lines: List[str]) -> Tuple[Dict[str, Tuple[str, int]], int]:
    meta: Dict[str, Tuple[str, int]] = {}
    i = 0
    while i < len(lines) and (lines[i].startswith("#") or not lines[i].strip()):
        body = lines[i][1:].strip()
        if body:
            if "=" not in body:
                raise FormatError(i + 1, 1, f"comment header is not key=value: {lines[i]!r}")
            key, value = body.split("=", 1)
            meta[key.strip()] = (value.strip(), i + 1)
        i += 1
    return meta, i


def _parse_table(lines: List[str], start: int, columns: Sequence[str]) -> Tuple[np.ndarray, List[int]]:
    if start >= len(lines):
        raise FormatError(start + 1, 1, "missing header row")
    header = [c.strip() for c in lines[start].split(",")]
    if tuple(header) != tuple(columns):
        for col, (got, want) in enumerate(zip(header + [""] * len(columns), columns), start=1):
            if got != want:
                raise FormatError(start + 1, col, f"expected column {want!r}, got {got!r}")
        raise FormatError(start + 1, len(columns) + 1, "unexpected extra columns")
    rows, linenos = [], []
    for lineno in range(start + 1, len(lines)):
        text = lines[lineno]
        if not text.strip():
            continue
        cells = text.split(",")
        if len(cells) != len(columns):
            raise FormatError(lineno + 1, min(len(cells), len(columns)) + 1,
                              f"expected {len(columns)} fields, got {len(cells)}")
        row = []
        for col, cell in enumerate(cells, start=1):
            try:
                row.append(float(cell))
            except ValueError:
                raise FormatError(lineno + 1, col, f"not a number: {cell.strip()!r}") from None
        rows.append(row)
        linenos.append(lineno + 1)
    if not rows:
        raise FormatError(len(lines) + 1, 1, "no data rows")
    return np.array(rows, dtype=float), linenos


def schedule_from_csv(text: str) -> Schedule:
    lines = text.splitlines()
    meta, start = _split_comments(lines)
    missing = sorted(_SCHEDULE_KEYS - meta.keys())
    if missing:
        raise FormatError(start + 1, 1, f"missing metadata keys: {', '.join(missing)}")

    def get(key, conv):
        value, line = meta[key]
        try:
            return conv(value)
        except (TypeError, ValueError) as exc:
            raise FormatError(line, 1, f"bad value for {key}: {exc}") from None

    first = get("t_start", float)
    length = get("span_length", float)
    p = get("delta", float), get("b", float)
    try:
        base = ModelParams(p[0], p[1], (first, first + length))
        passes = multipass_params(base, get("passes", int))
        config = CompilerConfig(
            omega_cap=get("omega_cap", float),
            n_segments=get("n_segments", int),
            time_resolution=get("time_resolution", float),
            sample_point=meta["sample_point"][0],
        )
    except ValueError as exc:
        raise FormatError(start + 1, 1, f"inconsistent metadata: {exc}") from None

    table, linenos = _parse_table(lines, start, SCHEDULE_COLUMNS)
    index = table[:, 0]
    bad = np.flatnonzero(index != np.arange(len(table)))
    if len(bad):
        raise FormatError(linenos[int(bad[0])], 1, f"expected index {int(bad[0])}, got {index[bad[0]]!r}")
    durations = table[:, 2]
    expected_start = np.concatenate([[0.0], np.cumsum(durations)[:-1]])
    off = np.abs(table[:, 1] - expected_start) > 1e-9 * max(1e-30, float(np.sum(durations)))
    if np.any(off):
        k = int(np.flatnonzero(off)[0])
        raise FormatError(linenos[k], 2, "start time does not match the running sum of durations")
    extra = {k: v for k, (v, _) in meta.items() if k not in _SCHEDULE_KEYS}
    try:
        return Schedule(
            durations=durations,
            amplitudes=table[:, 3],
            carriers=table[:, 4],
            phases=table[:, 5],
            fields=table[:, 6:9],
            passes=tuple(passes),
            config=config,
            mode=meta["mode"][0],
            include_cd=get("include_cd", lambda v: _parse_bool(v, meta["include_cd"][1])),
            quantized=get("quantized", lambda v: _parse_bool(v, meta["quantized"][1])),
            extra=extra,
        )
    except ValueError as exc:
        if isinstance(exc, FormatError):
            raise
        raise FormatError(linenos[0], 1, str(exc)) from None


def read_schedule(path: PathLike) -> Schedule:
    return schedule_from_csv(Path(path).read_text())


def trace_to_csv(trace: EvolutionTrace, meta: Optional[Mapping[str, object]] = None) -> str:
    head = "\n".join(header_lines(meta)) + "\n" if meta else ""
    rows = zip(trace.t_phys, trace.t_dimless, trace.p0, trace.ground_fidelity)
    return head + _rows_text(TRACE_COLUMNS, rows)


def write_trace(path: PathLike, trace: EvolutionTrace, meta: Optional[Mapping[str, object]] = None) -> None:
    atomic_write(path, trace_to_csv(trace, meta))


def trace_from_csv(text: str) -> Tuple[EvolutionTrace, Dict[str, str]]:
    lines = text.splitlines()
    meta, start = _split_comments(lines)
    table, _ = _parse_table(lines, start, TRACE_COLUMNS)
    trace = EvolutionTrace(table[:, 0], table[:, 1], table[:, 2], table[:, 3])
    return trace, {k: v for k, (v, _) in meta.items()}


def report_to_text(report: Mapping[str, object], meta: Optional[Mapping[str, object]] = None) -> str:
    head = "\n".join(header_lines(meta)) + "\n" if meta else ""
    return head + "".join(f"{k}={format_value(v)}\n" for k, v in report.items())


def report_from_text(text: str) -> Dict[str, str]:
    out = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        if "=" not in line:
            raise FormatError(lineno, 1, "expected key=value")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def reports_to_csv(reports: Sequence[Mapping[str, object]], meta: Optional[Mapping[str, object]] = None) -> str:
    if not reports:
        raise ValueError("no reports to write")
    columns = list(reports[0].keys())
    head = "\n".join(header_lines(meta)) + "\n" if meta else ""
    return head + _rows_text(columns, ([r[c] for c in columns] for r in reports))
