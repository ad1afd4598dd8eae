"""Loss budgets, the Landau-Zener oracle and the unassisted-scan benchmark."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from .compiler import (
    CompilerConfig,
    analog_scale_factor,
    compile_analog,
    compile_rapid,
    multipass_params,
)
from .model import ModelParams, SpinorState, ground_state, mixing_angle
from .propagator import EvolutionTrace, evolve_oracle, oracle_propagator

# largest rotation angle per micro-step in the unassisted search
_MAX_STEP_ANGLE = 0.01
_MIN_ORACLE_STEPS = 4000


class SearchError(RuntimeError):
    """The duration search could not bracket the target fidelity."""

    def __init__(self, message: str, diagnostics: Optional[List[Tuple[float, float]]] = None):
        super().__init__(message)
        self.diagnostics = diagnostics or []


def lz_transition_probability(p: ModelParams) -> float:
    """Asymptotic diabatic survival ``exp(-pi delta^2 / (2 |b|))``."""
    return math.exp(-math.pi * p.delta**2 / (2 * abs(p.b)))


@dataclass(frozen=True)
class LossReport:
    """Departure from the instantaneous ground state along one trace.

    ``final_bare_loss`` measures the end state against the bare target
    (``|1>`` after an upward sweep, ``|0>`` after a downward one) instead of
    the finite-range ground state.
    """

    peak_intermediate_loss: float
    final_loss: float
    loss_location_t: float
    final_bare_loss: Optional[float] = None
    consistent: bool = True

    def as_dict(self) -> Dict[str, object]:
        return asdict(self)


def loss_budget(trace: EvolutionTrace, p: Optional[ModelParams] = None) -> LossReport:
    if len(trace) == 0:
        raise ValueError("empty trace")
    loss = np.clip(1.0 - trace.ground_fidelity, 0.0, 1.0)
    k = int(np.argmax(loss))
    peak, final = float(loss[k]), float(loss[-1])
    bare = None
    if p is not None:
        p0_end = float(trace.p0[-1])
        upward = mixing_angle(p, p.t_end) < math.pi / 2
        bare = p0_end if upward else 1.0 - p0_end
    return LossReport(
        peak_intermediate_loss=peak,
        final_loss=final,
        loss_location_t=float(trace.t_dimless[k]),
        final_bare_loss=bare,
        consistent=0.0 <= final <= peak <= 1.0,
    )


def unassisted_params(p: ModelParams, cfg: CompilerConfig, duration: float) -> ModelParams:
    """Dimensionless model of a CD-free scan stretched to ``duration`` seconds.

    The physical fields (``delta / s_a`` and the ``+-b / s_a`` sweep range)
    stay those of the assisted analog scan; only the sweep is slower.
    """
    stretch = duration / (analog_scale_factor(p, cfg) * p.length)
    return ModelParams(p.delta * stretch, p.b * stretch, p.t_span)


def unassisted_fidelity(p: ModelParams, cfg: CompilerConfig, duration: float) -> float:
    """Final ground-state fidelity of the CD-free scan lasting ``duration``."""
    q = unassisted_params(p, cfg, duration)
    peak = math.hypot(q.delta, q.b * q.length / 2)
    n_steps = max(_MIN_ORACLE_STEPS, math.ceil(q.length * peak / _MAX_STEP_ANGLE))
    u = oracle_propagator(q, n_steps, include_cd=False).u
    psi = u @ ground_state(q, q.t_start).as_array()
    return ground_state(q, q.t_end).fidelity(SpinorState.from_array(psi, normalize=True))


@dataclass(frozen=True)
class SpeedupReport:
    """Unassisted reference duration versus the two assisted protocols."""

    b: float
    delta: float
    target_fidelity: float
    unassisted_duration: float
    analog_duration: float
    rapid_duration: float
    window: float
    evaluations: int = 0
    samples: Tuple[Tuple[float, float], ...] = field(default=(), repr=False)

    @property
    def assisted_duration(self) -> float:
        return self.analog_duration

    @property
    def speedup_analog(self) -> float:
        return self.unassisted_duration / self.analog_duration

    @property
    def speedup_rapid(self) -> float:
        return self.unassisted_duration / self.rapid_duration

    @property
    def speedup(self) -> float:
        return self.speedup_analog

    def as_dict(self) -> Dict[str, object]:
        return {
            "b": self.b,
            "delta": self.delta,
            "target_fidelity": self.target_fidelity,
            "unassisted_duration_s": self.unassisted_duration,
            "analog_duration_s": self.analog_duration,
            "rapid_duration_s": self.rapid_duration,
            "speedup_analog": self.speedup_analog,
            "speedup_rapid": self.speedup_rapid,
            "envelope_window": self.window,
            "evaluations": self.evaluations,
        }


def find_unassisted_duration(
    p: ModelParams,
    cfg: CompilerConfig,
    target_fidelity: float = 0.99,
    search_bounds: Optional[Tuple[float, float]] = None,
    *,
    window: float = 0.2,
    window_samples: int = 21,
    rtol: float = 1e-3,
) -> SpeedupReport:
    """Shortest CD-free scan duration that reaches ``target_fidelity``.

    Final fidelity oscillates with duration, so the search condition at
    duration ``T`` is that every sampled duration in ``[T, (1 + window) T]``
    reaches the target.  Bisection runs in log-duration down to ``rtol``.
    Default bounds are 1x to 1000x the assisted analog duration.
    """
    if not 0 < target_fidelity < 1:
        raise ValueError(f"target_fidelity must lie in (0, 1), got {target_fidelity!r}")
    analog = compile_analog(p, cfg).total_duration
    rapid = compile_rapid(p, cfg).total_duration
    lo, hi = search_bounds if search_bounds is not None else (analog, 1e3 * analog)
    if not 0 < lo < hi:
        raise ValueError(f"search_bounds must satisfy 0 < lo < hi, got {(lo, hi)!r}")

    cache: Dict[float, float] = {}

    def fid(duration: float) -> float:
        if duration not in cache:
            cache[duration] = unassisted_fidelity(p, cfg, duration)
        return cache[duration]

    def holds(duration: float) -> bool:
        probe = duration * np.linspace(1.0, 1.0 + window, window_samples)
        return all(fid(float(d)) >= target_fidelity for d in probe)

    if not holds(hi):
        samples = sorted(cache.items())
        raise SearchError(
            f"target fidelity {target_fidelity} not sustained at the upper bound {hi:.4g} s "
            f"(min sampled fidelity {min(v for _, v in samples):.6f})",
            samples,
        )
    if not holds(lo):
        while hi / lo - 1 > rtol:
            mid = math.sqrt(lo * hi)
            if holds(mid):
                hi = mid
            else:
                lo = mid
    else:
        hi = lo
    return SpeedupReport(
        b=p.b,
        delta=p.delta,
        target_fidelity=target_fidelity,
        unassisted_duration=hi,
        analog_duration=analog,
        rapid_duration=rapid,
        window=window,
        evaluations=len(cache),
        samples=tuple(sorted(cache.items())),
    )


def theory_curve(
    p: ModelParams,
    cfg: Optional[CompilerConfig] = None,
    mode: str = "analog",
    n_points: int = 500,
    *,
    include_cd: bool = True,
    n_passes: int = 1,
    n_steps: int = 200_000,
) -> EvolutionTrace:
    """Dense ``P_|0>`` curve of the ideal continuous scan.

    Multi-pass curves chain alternating passes; ``mode`` picks the
    physical time axis (uniform analog scaling or the rapid-scan stretch).
    """
    state = ground_state(p, p.t_start)
    offset = 0.0
    parts: List[EvolutionTrace] = []
    for q in multipass_params(p, n_passes):
        tr = evolve_oracle(
            q, cfg, state, n_steps, include_cd=include_cd, mode=mode,
            n_records=n_points, t_phys_offset=offset,
        )
        parts.append(tr)
        state = tr.final_state
        offset = float(tr.t_phys[-1])
    cols = {}
    for name in ("t_phys", "t_dimless", "p0", "ground_fidelity"):
        pieces = [getattr(parts[0], name)] + [getattr(t, name)[1:] for t in parts[1:]]
        cols[name] = np.concatenate(pieces)
    return EvolutionTrace(final_state=state, propagator=None, **cols)
