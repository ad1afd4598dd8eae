"""Command-line front end.

Subcommands ``simulate``, ``compile``, ``bench`` and ``multipass`` write
plot-ready CSV / key=value files into ``--out``.  Settings may also come from
a ``key=value`` file given with ``--config``; command-line flags win.

Exit codes: 0 success, 2 configuration error, 3 numerical or search failure.
"""

from __future__ import annotations

import argparse
import math
import os
import re
import sys
import tempfile
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from . import __version__
from .analysis import SearchError, find_unassisted_duration, loss_budget, theory_curve
from .compiler import (
    CompileError,
    CompilerConfig,
    ConfigError,
    DEFAULT_OMEGA_CAP,
    compile_multipass,
    compile_schedule,
    quantize,
)
from .model import ModelParams
from .propagator import evolve
from .serialization import atomic_write, report_to_text, reports_to_csv, write_schedule, write_trace

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

DEFAULT_B_VALUES = (0.6, 1.0, 1.6, 2.0, 3.0, 4.0)

_FREQ_UNITS = {"hz": 1.0, "khz": 1e3, "mhz": 1e6, "ghz": 1e9}
_TIME_UNITS = {"s": 1.0, "ms": 1e-3, "us": 1e-6, "ns": 1e-9, "ps": 1e-12}
_NUMBER = r"([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)"


class RunConfigError(ConfigError):
    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


def parse_angular_frequency(text: str, key: str = "omega") -> float:
    """``"0.2MHz"`` -> ``2 pi 0.2e6`` rad/s; ``"1.2e6rad_s"`` is taken as is."""
    m = re.fullmatch(_NUMBER + r"\s*([A-Za-z_/]+)", text.strip())
    if not m:
        raise RunConfigError(key, f"expected a number with unit suffix (hz, khz, mhz, rad_s), got {text!r}")
    value, unit = float(m.group(1)), m.group(2).lower()
    if unit in ("rad_s", "rad/s"):
        return value
    if unit in _FREQ_UNITS:
        return 2 * math.pi * value * _FREQ_UNITS[unit]
    raise RunConfigError(key, f"unknown unit {m.group(2)!r}")


def parse_seconds(text: str, key: str = "grid") -> float:
    m = re.fullmatch(_NUMBER + r"\s*([A-Za-z]+)", text.strip())
    if not m or m.group(2).lower() not in _TIME_UNITS:
        raise RunConfigError(key, f"expected a duration with unit suffix (s, us, ns), got {text!r}")
    return float(m.group(1)) * _TIME_UNITS[m.group(2).lower()]


def _parse_float(text: str, key: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise RunConfigError(key, f"not a number: {text!r}") from None
    if not math.isfinite(value):
        raise RunConfigError(key, f"must be finite, got {text!r}")
    return value


def _parse_int(text: str, key: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise RunConfigError(key, f"not an integer: {text!r}") from None


def _choice(text: str, key: str, options: Sequence[str]) -> str:
    if text not in options:
        raise RunConfigError(key, f"must be one of {', '.join(options)}, got {text!r}")
    return text


@dataclass(frozen=True)
class RunConfig:
    delta: float = 0.2
    b_list: Tuple[float, ...] = DEFAULT_B_VALUES
    omega_cap: float = DEFAULT_OMEGA_CAP
    n_segments: int = 56
    mode: str = "analog"
    cd: str = "on"
    passes: int = 1
    grid: float = 0.25e-9
    out: str = "out"
    target: float = 0.99
    rows: int = 500
    source: str = "schedule"

    def __post_init__(self):
        if not self.delta > 0:
            raise RunConfigError("delta", f"must be positive, got {self.delta!r}")
        if not self.b_list:
            raise RunConfigError("b", "list is empty")
        if any(b == 0 for b in self.b_list):
            raise RunConfigError("b", "values must be nonzero")
        if not self.omega_cap > 0:
            raise RunConfigError("omega", f"must be positive, got {self.omega_cap!r}")
        if self.n_segments < 2:
            raise RunConfigError("segments", f"must be >= 2, got {self.n_segments!r}")
        _choice(self.mode, "mode", ("analog", "rapid", "both"))
        _choice(self.cd, "cd", ("on", "off", "both"))
        _choice(self.source, "source", ("schedule", "oracle"))
        if self.passes < 1:
            raise RunConfigError("passes", f"must be >= 1, got {self.passes!r}")
        if not self.grid > 0:
            raise RunConfigError("grid", f"must be positive, got {self.grid!r}")
        if not 0 < self.target < 1:
            raise RunConfigError("target", f"must lie in (0, 1), got {self.target!r}")
        if self.rows < 1:
            raise RunConfigError("rows", f"must be >= 1, got {self.rows!r}")

    @property
    def modes(self) -> List[str]:
        return ["analog", "rapid"] if self.mode == "both" else [self.mode]

    @property
    def cd_flags(self) -> List[bool]:
        return {"on": [True], "off": [False], "both": [True, False]}[self.cd]

    def compiler_config(self) -> CompilerConfig:
        return CompilerConfig(omega_cap=self.omega_cap, n_segments=self.n_segments, time_resolution=self.grid)

    def echo(self, command: str) -> Dict[str, object]:
        meta: Dict[str, object] = {"config.command": command}
        for f in fields(self):
            value = getattr(self, f.name)
            if f.name == "b_list":
                value = ";".join(repr(float(b)) for b in value)
            meta[f"config.{f.name}"] = value
        return meta


# flag/file key -> (RunConfig field, parser)
_KEYS = {
    "delta": ("delta", _parse_float),
    "b": ("b_list", lambda v, k: tuple(_parse_float(x, k) for x in re.split(r"[,;\s]+", v.strip()) if x)),
    "omega": ("omega_cap", parse_angular_frequency),
    "segments": ("n_segments", _parse_int),
    "mode": ("mode", lambda v, k: v),
    "cd": ("cd", lambda v, k: v),
    "passes": ("passes", _parse_int),
    "grid": ("grid", parse_seconds),
    "out": ("out", lambda v, k: v),
    "target": ("target", _parse_float),
    "rows": ("rows", _parse_int),
    "source": ("source", lambda v, k: v),
}


def read_config_file(path: str) -> Dict[str, str]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise RunConfigError("config", f"cannot read {path!r}: {exc.strerror}") from None
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise RunConfigError("config", f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _KEYS:
            raise RunConfigError(key, f"unknown key in {path}:{lineno}")
        values[key] = value
    return values


def resolve_config(args: argparse.Namespace, defaults: Optional[Dict[str, object]] = None) -> RunConfig:
    raw: Dict[str, str] = {}
    if args.config:
        raw.update(read_config_file(args.config))
    for key in _KEYS:
        value = getattr(args, key, None)
        if value is not None:
            raw[key] = value
    kwargs: Dict[str, object] = dict(defaults or {})
    for key, value in raw.items():
        name, parse = _KEYS[key]
        kwargs[name] = parse(value, key)
    return RunConfig(**kwargs)


def ensure_writable(out: str) -> Path:
    path = Path(out)
    try:
        path.mkdir(parents=True, exist_ok=True)
        with tempfile.NamedTemporaryFile(dir=path, prefix=".probe."):
            pass
    except OSError as exc:
        raise RunConfigError("out", f"directory {out!r} is not writable: {exc.strerror}") from None
    return path


def _tag(b: float) -> str:
    return f"{b:g}".replace("-", "m")


def _stem(kind: str, mode: str, cd: bool, b: float, passes: int) -> str:
    stem = f"{kind}_{mode}_cd-{'on' if cd else 'off'}_b{_tag(b)}"
    return stem + (f"_x{passes}" if passes > 1 else "")


def _schedule(cfg: RunConfig, b: float, mode: str, cd: bool):
    p = ModelParams(cfg.delta, b)
    ccfg = cfg.compiler_config()
    s = compile_multipass(p, ccfg, cfg.passes, mode, cd) if cfg.passes > 1 else compile_schedule(p, ccfg, mode, cd)
    return quantize(s) if mode == "rapid" else s


def cmd_simulate(cfg: RunConfig, command: str = "simulate") -> List[Path]:
    out = ensure_writable(cfg.out)
    written = []
    for b in cfg.b_list:
        for mode in cfg.modes:
            for cd in cfg.cd_flags:
                meta = cfg.echo(command)
                meta.update({"job.b": b, "job.mode": mode, "job.cd": cd, "job.source": cfg.source})
                p = ModelParams(cfg.delta, b)
                if cfg.source == "oracle":
                    trace = theory_curve(p, cfg.compiler_config(), mode, cfg.rows, include_cd=cd, n_passes=cfg.passes)
                else:
                    s = _schedule(cfg, b, mode, cd)
                    trace = evolve(s, record_every=max(1, len(s) // cfg.rows))
                report = loss_budget(trace, ModelParams(cfg.delta, b if cfg.passes % 2 else -b))
                meta.update({f"loss.{k}": v for k, v in report.as_dict().items()})
                path = out / (_stem("trace", mode, cd, b, cfg.passes) + ".csv")
                write_trace(path, trace, meta)
                written.append(path)
    return written


def cmd_compile(cfg: RunConfig) -> List[Path]:
    out = ensure_writable(cfg.out)
    written = []
    for b in cfg.b_list:
        for mode in cfg.modes:
            for cd in cfg.cd_flags:
                s = _schedule(cfg, b, mode, cd)
                meta = cfg.echo("compile")
                meta["total_duration_s"] = s.total_duration
                path = out / (_stem("schedule", mode, cd, b, cfg.passes) + ".csv")
                write_schedule(path, s, meta)
                written.append(path)
    return written


def cmd_bench(cfg: RunConfig) -> List[Path]:
    out = ensure_writable(cfg.out)
    written, rows = [], []
    for b in cfg.b_list:
        report = find_unassisted_duration(ModelParams(cfg.delta, b), cfg.compiler_config(), cfg.target)
        row = report.as_dict()
        rows.append(row)
        path = out / f"speedup_b{_tag(b)}.txt"
        atomic_write(path, report_to_text(row, cfg.echo("bench")))
        written.append(path)
    path = out / "speedup_summary.csv"
    atomic_write(path, reports_to_csv(rows, cfg.echo("bench")))
    written.append(path)
    return written


def cmd_multipass(cfg: RunConfig) -> List[Path]:
    return cmd_compile(cfg) + cmd_simulate(cfg, "multipass")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="aapass", description="Assisted adiabatic passage simulator and pulse compiler")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "simulate": "evolve compiled scans and write population traces",
        "compile": "write pulse-segment tables",
        "bench": "find the unassisted duration and report speedups",
        "multipass": "alternating back-and-forth scans (schedule + trace)",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", help="key=value file; flags override it")
        p.add_argument("--delta", help="dimensionless gap (default 0.2)")
        p.add_argument("--b", help="comma-separated sweep rates (default 0.6,1,1.6,2,3,4)")
        p.add_argument("--omega", help="amplitude cap with unit suffix, e.g. 0.2MHz or 1.2566e6rad_s")
        p.add_argument("--segments", help="rapid-scan segment count (default 56)")
        p.add_argument("--mode", help="analog | rapid | both")
        p.add_argument("--cd", help="on | off | both")
        p.add_argument("--passes", help="number of alternating passes")
        p.add_argument("--grid", help="AWG time grid with unit suffix (default 0.25ns)")
        p.add_argument("--out", help="output directory (default ./out)")
        p.add_argument("--target", help="bench: target fidelity (default 0.99)")
        p.add_argument("--rows", help="approximate rows per trace (default 500)")
        p.add_argument("--source", help="simulate: schedule | oracle")
    return parser


_COMMANDS = {"simulate": cmd_simulate, "compile": cmd_compile, "bench": cmd_bench, "multipass": cmd_multipass}
_DEFAULTS = {"multipass": {"passes": 5, "mode": "rapid", "b_list": (2.0,)}}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args, _DEFAULTS.get(args.command))
        written = _COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"aapass: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (CompileError, SearchError, ArithmeticError) as exc:
        print(f"aapass: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    for path in written:
        print(os.fspath(path))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
