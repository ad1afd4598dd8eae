"""Compile a dimensionless scan into rectangular-pulse schedules.

Two strategies are provided:

* analog: one global time scale ``s_a`` chosen so the peak transverse drive
  equals the amplitude cap, sampled on the AWG grid;
* rapid: every one of ``N`` segments gets its own scale ``s_m`` so that its
  transverse drive sits exactly at the cap, which shortens the far-detuned
  parts of the sweep.

Both produce a :class:`Schedule`: per-segment durations plus the rotating-frame
field (rad/s) that is held constant during each segment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .model import ModelParams, field_array

DEFAULT_OMEGA_CAP = 2 * np.pi * 0.2e6
DEFAULT_N_SEGMENTS = 56
DEFAULT_TIME_RESOLUTION = 0.25e-9
SAMPLE_POINTS = ("right", "midpoint")
MODES = ("analog", "rapid")

_AMPLITUDE_SLACK = 1e-9


class ConfigError(ValueError):
    """Invalid compiler configuration."""


class CompileError(RuntimeError):
    """A schedule could not be produced from a valid configuration."""


@dataclass(frozen=True)
class CompilerConfig:
    """Hardware constraints for compilation.

    Parameters
    ----------
    omega_cap : float
        Maximum transverse drive, rad/s.
    n_segments : int
        Segment count for rapid-scan compilation.
    time_resolution : float
        AWG time grid in seconds.
    sample_point : {"right", "midpoint"}
        Where each segment samples the continuous field.  ``"right"`` uses
        the segment end, ``"midpoint"`` has second-order Trotter error.
    """

    omega_cap: float = DEFAULT_OMEGA_CAP
    n_segments: int = DEFAULT_N_SEGMENTS
    time_resolution: float = DEFAULT_TIME_RESOLUTION
    sample_point: str = "right"

    def __post_init__(self):
        if not np.isfinite(self.omega_cap) or self.omega_cap <= 0:
            raise ConfigError(f"omega_cap must be positive, got {self.omega_cap!r}")
        if int(self.n_segments) != self.n_segments or self.n_segments < 2:
            raise ConfigError(f"n_segments must be an integer >= 2, got {self.n_segments!r}")
        object.__setattr__(self, "n_segments", int(self.n_segments))
        if not np.isfinite(self.time_resolution) or self.time_resolution <= 0:
            raise ConfigError(f"time_resolution must be positive, got {self.time_resolution!r}")
        if self.sample_point not in SAMPLE_POINTS:
            raise ConfigError(f"sample_point must be one of {SAMPLE_POINTS}, got {self.sample_point!r}")


@dataclass(frozen=True)
class PulseSegment:
    """One rectangular pulse; angular quantities in rad/s, carrier relative to omega0."""

    duration: float
    amplitude: float
    carrier: float
    phase: float

    def __post_init__(self):
        if not self.duration > 0:
            raise ValueError(f"segment duration must be positive, got {self.duration!r}")
        if not self.amplitude >= 0:
            raise ValueError(f"segment amplitude must be >= 0, got {self.amplitude!r}")


@dataclass(frozen=True, eq=False)
class Schedule:
    """An ordered sequence of rectangular segments.

    The arrays are per-segment; ``fields`` holds the rotating-frame field in
    rad/s, shape ``(n, 3)``.  ``passes`` lists the dimensionless scan of each
    pass in time order; segments are split evenly between passes.
    """

    durations: np.ndarray
    amplitudes: np.ndarray
    carriers: np.ndarray
    phases: np.ndarray
    fields: np.ndarray
    passes: Tuple[ModelParams, ...]
    config: CompilerConfig
    mode: str
    include_cd: bool = True
    quantized: bool = False
    extra: Dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        for name in ("durations", "amplitudes", "carriers", "phases", "fields"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        n = len(self.durations)
        if n == 0:
            raise ValueError("schedule has no segments")
        if not (len(self.amplitudes) == len(self.carriers) == len(self.phases) == n):
            raise ValueError("per-segment arrays differ in length")
        if self.fields.shape != (n, 3):
            raise ValueError(f"fields must have shape ({n}, 3), got {self.fields.shape}")
        if not self.passes or n % len(self.passes):
            raise ValueError("segment count must split evenly across passes")
        if np.any(~(self.durations > 0)):
            raise ValueError("all segment durations must be positive")
        if np.any(self.amplitudes > self.config.omega_cap * (1 + _AMPLITUDE_SLACK)):
            raise ValueError("segment amplitude exceeds omega_cap")
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        object.__setattr__(self, "passes", tuple(self.passes))

    def __len__(self) -> int:
        return len(self.durations)

    @property
    def delta(self) -> float:
        return self.passes[0].delta

    @property
    def n_passes(self) -> int:
        return len(self.passes)

    @property
    def segments_per_pass(self) -> int:
        return len(self) // self.n_passes

    @property
    def segments(self) -> List[PulseSegment]:
        return [
            PulseSegment(float(d), float(a), float(c), float(ph))
            for d, a, c, ph in zip(self.durations, self.amplitudes, self.carriers, self.phases)
        ]

    @property
    def total_duration(self) -> float:
        return math.fsum(self.durations)

    @property
    def start_times(self) -> np.ndarray:
        return np.concatenate([[0.0], np.cumsum(self.durations)[:-1]])

    @property
    def end_times(self) -> np.ndarray:
        return np.cumsum(self.durations)

    @property
    def dimensionless_steps(self) -> np.ndarray:
        """Dimensionless time covered by each segment (``duration / scale``)."""
        return self.durations * np.abs(self.fields[:, 0]) / self.delta

    @property
    def pass_index(self) -> np.ndarray:
        return np.arange(len(self)) // self.segments_per_pass

    @property
    def t_dimless_end(self) -> np.ndarray:
        """Dimensionless time at each segment end, restarted from each pass's ``t_start``."""
        steps = self.dimensionless_steps.reshape(self.n_passes, -1)
        starts = np.array([p.t_start for p in self.passes])[:, None]
        return (starts + np.cumsum(steps, axis=1)).reshape(-1)

    @property
    def transverse_amplitude(self) -> np.ndarray:
        return np.hypot(self.fields[:, 0], self.fields[:, 1])

    def metadata(self) -> Dict[str, object]:
        first = self.passes[0]
        meta = {
            "delta": first.delta,
            "b": first.b,
            "t_start": first.t_start,
            "span_length": first.length,
            "passes": self.n_passes,
            "mode": self.mode,
            "include_cd": self.include_cd,
            "quantized": self.quantized,
            "omega_cap": self.config.omega_cap,
            "n_segments": self.config.n_segments,
            "time_resolution": self.config.time_resolution,
            "sample_point": self.config.sample_point,
        }
        meta.update(self.extra)
        return meta

    def inverse(self) -> "Schedule":
        """Schedule whose propagator is the inverse of this one.

        Segments run in reverse order with negated fields.  Pass bookkeeping
        is rebuilt as an alternating scan so the result stays well formed;
        ground-state references taken from it have no physical meaning.
        """
        f = -self.fields[::-1]
        t0, length = self.passes[0].t_start, self.passes[0].length
        passes = tuple(
            ModelParams(p.delta, -p.b, (t0 + k * length, t0 + (k + 1) * length))
            for k, p in enumerate(reversed(self.passes))
        )
        return replace(
            self,
            durations=self.durations[::-1],
            amplitudes=self.amplitudes[::-1],
            carriers=f[:, 2],
            phases=np.arctan2(-f[:, 1], f[:, 0]),
            fields=f,
            passes=passes,
        )

    def equals(self, other: "Schedule", rtol: float = 0.0) -> bool:
        """Array-wise comparison (exact by default)."""
        arrays = ("durations", "amplitudes", "carriers", "phases", "fields")
        same_arrays = all(
            np.allclose(getattr(self, a), getattr(other, a), rtol=rtol, atol=0.0) for a in arrays
        )
        return (
            same_arrays
            and self.passes == other.passes
            and self.config == other.config
            and self.mode == other.mode
            and self.include_cd == other.include_cd
            and self.quantized == other.quantized
        )


def analog_scale_factor(p: ModelParams, cfg: CompilerConfig) -> float:
    """Seconds per dimensionless unit at which the peak drive ``sqrt(delta^2 + b^2/delta^2)`` hits the cap."""
    return math.sqrt(p.delta**2 + (p.b / p.delta) ** 2) / cfg.omega_cap


def analog_scan_duration(p: ModelParams, cfg: CompilerConfig) -> float:
    """Continuous analog scan duration ``s_a * length`` (``2 s_a`` on the default span)."""
    return analog_scale_factor(p, cfg) * p.length


def _sample_times(p: ModelParams, n: int, sample_point: str) -> np.ndarray:
    k = np.arange(1, n + 1, dtype=float)
    if sample_point == "midpoint":
        k -= 0.5
    t = p.t_start + p.length * k / n
    return np.minimum(t, p.t_end)


def _phases(fields: np.ndarray) -> np.ndarray:
    return np.arctan2(-fields[:, 1], fields[:, 0])


def compile_analog(p: ModelParams, cfg: CompilerConfig, include_cd: bool = True) -> Schedule:
    """Uniformly time-scaled waveform on the AWG grid.

    The grid step count is rounded up, so the realized scale is at most one
    grid step slower than ``s_a`` and the drive never exceeds the cap.
    """
    s_a = analog_scale_factor(p, cfg)
    res = cfg.time_resolution
    n = max(1, math.ceil(s_a * p.length / res - 1e-9))
    h = p.length / n
    peak_width = p.delta / abs(p.b)
    if h > peak_width:
        raise ConfigError(
            f"time_resolution={res!r} s is too coarse: {n} steps cannot resolve the "
            f"counter-diabatic peak (step {h:.3g} > width {peak_width:.3g})"
        )
    scale = res / h
    f = field_array(p, _sample_times(p, n, cfg.sample_point), include_cd) / scale
    return Schedule(
        durations=np.full(n, res),
        amplitudes=np.hypot(f[:, 0], f[:, 1]),
        carriers=f[:, 2],
        phases=_phases(f),
        fields=f,
        passes=(p,),
        config=cfg,
        mode="analog",
        include_cd=include_cd,
    )


def compile_rapid(p: ModelParams, cfg: CompilerConfig, include_cd: bool = True) -> Schedule:
    """Constant-amplitude segment table.

    Segment ``m`` covers dimensionless time ``delta_t = length / N`` with its
    own scale ``s_m = |B_perp(t_m)| / omega_cap``, lasting ``s_m * delta_t``.
    With ``include_cd=False`` the timing is kept and only the counter-diabatic
    component is dropped.
    """
    n = cfg.n_segments
    dt = p.length / n
    t = _sample_times(p, n, cfg.sample_point)
    f_cd = field_array(p, t, True)
    s_m = np.hypot(f_cd[:, 0], f_cd[:, 1]) / cfg.omega_cap
    f = (f_cd if include_cd else field_array(p, t, False)) / s_m[:, None]
    amplitudes = np.full(n, cfg.omega_cap) if include_cd else np.hypot(f[:, 0], f[:, 1])
    return Schedule(
        durations=s_m * dt,
        amplitudes=amplitudes,
        carriers=f[:, 2],
        phases=_phases(f),
        fields=f,
        passes=(p,),
        config=cfg,
        mode="rapid",
        include_cd=include_cd,
    )


def compile_schedule(
    p: ModelParams, cfg: CompilerConfig, mode: str = "analog", include_cd: bool = True
) -> Schedule:
    if mode == "analog":
        return compile_analog(p, cfg, include_cd)
    if mode == "rapid":
        return compile_rapid(p, cfg, include_cd)
    raise ConfigError(f"mode must be one of {MODES}, got {mode!r}")


def multipass_params(p: ModelParams, n_passes: int) -> List[ModelParams]:
    """Back-to-back passes with ``b`` alternating in sign."""
    if int(n_passes) != n_passes or n_passes < 1:
        raise ConfigError(f"n_passes must be an integer >= 1, got {n_passes!r}")
    return [
        ModelParams(p.delta, p.b if k % 2 == 0 else -p.b, (p.t_start + k * p.length, p.t_end + k * p.length))
        for k in range(int(n_passes))
    ]


def concatenate(schedules: Sequence[Schedule]) -> Schedule:
    """Join schedules back to back (no idle gap)."""
    first = schedules[0]
    sizes = {len(s) // s.n_passes for s in schedules}
    if len(sizes) != 1:
        raise CompileError("passes compiled to different segment counts")
    cat = lambda name: np.concatenate([getattr(s, name) for s in schedules])  # noqa: E731
    return Schedule(
        durations=cat("durations"),
        amplitudes=cat("amplitudes"),
        carriers=cat("carriers"),
        phases=cat("phases"),
        fields=cat("fields"),
        passes=tuple(q for s in schedules for q in s.passes),
        config=first.config,
        mode=first.mode,
        include_cd=first.include_cd,
        quantized=all(s.quantized for s in schedules),
    )


def compile_multipass(
    p: ModelParams,
    cfg: CompilerConfig,
    n_passes: int,
    mode: str = "rapid",
    include_cd: bool = True,
) -> Schedule:
    """Alternate ``b`` and ``-b`` for ``n_passes`` consecutive scans."""
    return concatenate([compile_schedule(q, cfg, mode, include_cd) for q in multipass_params(p, n_passes)])


def _round_half_away(x: np.ndarray) -> np.ndarray:
    return np.sign(x) * np.floor(np.abs(x) + 0.5)


def quantize(s: Schedule, cfg: Optional[CompilerConfig] = None) -> Schedule:
    """Snap durations to the time grid without cumulative drift.

    Segment boundaries (not individual durations) are rounded half away from
    zero, so every boundary stays within half a grid step of its ideal time.
    Field values are kept; the rotation angle of each segment changes with
    its duration.
    """
    res = (cfg or s.config).time_resolution
    if not res > 0:
        raise ConfigError(f"time_resolution must be positive, got {res!r}")
    ticks = _round_half_away(np.cumsum(s.durations) / res).astype(np.int64)
    counts = np.diff(np.concatenate([[0], ticks]))
    if np.any(counts <= 0):
        bad = int(np.flatnonzero(counts <= 0)[0])
        raise CompileError(
            f"segment {bad} (duration {s.durations[bad]:.3g} s) rounds to zero on a {res:.3g} s grid"
        )
    durations = counts * res
    if np.array_equal(durations, s.durations):
        durations = s.durations
    config = s.config if cfg is None else replace(s.config, time_resolution=res)
    return replace(s, durations=durations, config=config, quantized=True)
