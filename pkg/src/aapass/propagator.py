"""Spinor evolution under piecewise-constant and continuous fields.

Every step is an exact SU(2) exponential; products of many steps are formed
with vectorized prefix scans so that hundreds of thousands of segments stay
cheap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .compiler import CompilerConfig, ConfigError, Schedule, analog_scale_factor
from .frames import LabFrameConfig, frame_rotation
from .model import (
    FieldVector,
    ModelParams,
    SpinorState,
    field_array,
    ground_state,
    ground_state_array,
)

REUNITARIZE_EVERY = 10_000
_SERIES_BELOW = 1e-6
_PROB_TOL = 1e-12
_MIN_STEPS_PER_PERIOD = 40


@dataclass(frozen=True, eq=False)
class Propagator2:
    """A 2x2 unitary."""

    u: np.ndarray

    def __post_init__(self):
        u = np.array(self.u, dtype=complex).reshape(2, 2)
        err = np.abs(u.conj().T @ u - np.eye(2)).max()
        if err > 1e-10 or abs(abs(np.linalg.det(u)) - 1) > 1e-10:
            raise ValueError(f"matrix is not unitary (|U^dag U - 1| = {err:.3g})")
        u.setflags(write=False)
        object.__setattr__(self, "u", u)

    def __matmul__(self, other: "Propagator2") -> "Propagator2":
        return Propagator2(self.u @ other.u)

    def dagger(self) -> "Propagator2":
        return Propagator2(self.u.conj().T)

    def apply(self, state: SpinorState) -> SpinorState:
        return SpinorState.from_array(self.u @ state.as_array(), normalize=True)

    def distance(self, other: "Propagator2") -> float:
        """Spectral-norm distance ``||U - V||``."""
        return float(np.linalg.norm(self.u - other.u, 2))


def su2_steps(fields, durations, scale: float = 1.0) -> np.ndarray:
    """``exp(-i t B.sigma/2)`` for each row of ``fields``, shape ``(n, 2, 2)``.

    Uses ``cos(a/2) 1 - i sin(a/2) n.sigma`` with ``a = |B| t / scale``.
    """
    f = np.atleast_2d(np.asarray(fields, dtype=float))
    half = 0.5 * np.broadcast_to(np.asarray(durations, dtype=float), f.shape[:1]) / scale
    theta = np.linalg.norm(f, axis=1) * half
    small = theta < _SERIES_BELOW
    sinc = np.where(small, 1.0 - theta**2 / 6.0, np.sin(theta) / np.where(small, 1.0, theta))
    c = np.cos(theta)
    k = (sinc * half)[:, None] * f
    kx, ky, kz = k[:, 0], k[:, 1], k[:, 2]
    u = np.empty((len(f), 2, 2), dtype=complex)
    u[:, 0, 0] = c - 1j * kz
    u[:, 1, 1] = c + 1j * kz
    u[:, 0, 1] = -1j * kx - ky
    u[:, 1, 0] = -1j * kx + ky
    return u


def su2_step(field: Union[FieldVector, np.ndarray], duration: float, scale: float = 1.0) -> Propagator2:
    """Exact propagator of a constant field held for ``duration``."""
    if isinstance(field, FieldVector):
        field = field.as_array()
    if duration < 0:
        raise ValueError(f"duration must be >= 0, got {duration!r}")
    return Propagator2(su2_steps(np.asarray(field, dtype=float)[None], [duration], scale)[0])


def _mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Batched 2x2 product ``a @ b`` written out elementwise."""
    out = np.empty(np.broadcast_shapes(a.shape, b.shape), dtype=complex)
    a00, a01, a10, a11 = a[..., 0, 0], a[..., 0, 1], a[..., 1, 0], a[..., 1, 1]
    b00, b01, b10, b11 = b[..., 0, 0], b[..., 0, 1], b[..., 1, 0], b[..., 1, 1]
    out[..., 0, 0] = a00 * b00 + a01 * b10
    out[..., 0, 1] = a00 * b01 + a01 * b11
    out[..., 1, 0] = a10 * b00 + a11 * b10
    out[..., 1, 1] = a10 * b01 + a11 * b11
    return out


def reunitarize(u: np.ndarray) -> np.ndarray:
    """Project a near-SU(2) matrix back onto SU(2)."""
    a = 0.5 * (u[..., 0, 0] + np.conj(u[..., 1, 1]))
    b = 0.5 * (u[..., 1, 0] - np.conj(u[..., 0, 1]))
    norm = np.sqrt(np.abs(a) ** 2 + np.abs(b) ** 2)
    a, b = a / norm, b / norm
    out = np.empty(u.shape, dtype=complex)
    out[..., 0, 0] = a
    out[..., 0, 1] = -np.conj(b)
    out[..., 1, 0] = b
    out[..., 1, 1] = np.conj(a)
    return out


def cumulative_products(us: np.ndarray, block: int = REUNITARIZE_EVERY) -> np.ndarray:
    """Running products ``P_k = U_k ... U_1`` for every ``k``.

    Each block of ``block`` steps is scanned in log2(block) vectorized
    passes; the carried product is projected back onto SU(2) at every block
    boundary to stop roundoff drift.
    """
    out = np.empty_like(us)
    carry = None
    for lo in range(0, len(us), block):
        p = us[lo : lo + block].copy()
        shift = 1
        while shift < len(p):
            p[shift:] = _mul(p[shift:], p[:-shift])
            shift *= 2
        if carry is not None:
            p = _mul(p, carry)
        out[lo : lo + len(p)] = p
        carry = reunitarize(p[-1])
    return out


def ordered_product(us: np.ndarray) -> np.ndarray:
    """``U_n ... U_1`` by pairwise reduction (later steps on the left)."""
    us = np.asarray(us)
    while len(us) > 1:
        if len(us) % 2:
            us = np.concatenate([us, np.eye(2, dtype=complex)[None]])
        us = _mul(us[1::2], us[0::2])
    return us[0]


@dataclass(frozen=True, eq=False)
class EvolutionTrace:
    """Recorded populations along a scan.

    ``ground_fidelity`` is measured against the instantaneous ground state of
    the bare Landau-Zener part at ``t_dimless``.
    """

    t_phys: np.ndarray
    t_dimless: np.ndarray
    p0: np.ndarray
    ground_fidelity: np.ndarray
    final_state: Optional[SpinorState] = None
    propagator: Optional[Propagator2] = None

    def __post_init__(self):
        arrays = {}
        for name in ("t_phys", "t_dimless", "p0", "ground_fidelity"):
            arrays[name] = np.array(getattr(self, name), dtype=float).reshape(-1)
        n = len(arrays["t_phys"])
        if any(len(a) != n for a in arrays.values()):
            raise ValueError("trace columns differ in length")
        if n > 1 and np.any(np.diff(arrays["t_phys"]) <= 0):
            raise ValueError("t_phys must be strictly increasing")
        for name in ("p0", "ground_fidelity"):
            a = arrays[name]
            if np.any(a < -_PROB_TOL) or np.any(a > 1 + _PROB_TOL):
                raise ValueError(f"{name} outside [0, 1]")
            arrays[name] = np.clip(a, 0.0, 1.0)
        for name, a in arrays.items():
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    def __len__(self) -> int:
        return len(self.t_phys)

    @property
    def loss(self) -> np.ndarray:
        return 1.0 - self.ground_fidelity


def _record_indices(n: int, record_every: Optional[int]) -> np.ndarray:
    if record_every is None:
        return np.array([n - 1])
    if record_every < 1:
        raise ValueError(f"record_every must be >= 1, got {record_every!r}")
    idx = np.arange(record_every - 1, n, record_every)
    if len(idx) == 0 or idx[-1] != n - 1:
        idx = np.append(idx, n - 1)
    return idx


def _as_vec(initial: SpinorState) -> np.ndarray:
    return initial.as_array()


def _states(products: np.ndarray, psi0: np.ndarray) -> np.ndarray:
    return products @ psi0


def _ground_fidelity(psi: np.ndarray, theta: np.ndarray) -> np.ndarray:
    g = ground_state_array(theta)
    return np.abs(np.sum(np.conj(g) * psi, axis=-1)) ** 2


def _schedule_thetas(s: Schedule, seg_idx: np.ndarray, t_end: np.ndarray) -> np.ndarray:
    k = s.pass_index[seg_idx]
    b = np.array([q.b for q in s.passes])[k]
    t0 = np.array([q.t_start for q in s.passes])[k]
    t1 = np.array([q.t_end for q in s.passes])[k]
    lam = b * (np.clip(t_end, t0, t1) - 0.5 * (t0 + t1))
    return np.arctan2(s.delta, lam)


def _trace(t_phys, t_dim, psi, theta, products_last, initial, initial_t_dim, initial_theta, t0_phys=0.0):
    p0 = np.abs(psi[:, 0]) ** 2
    fid = _ground_fidelity(psi, theta)
    psi0 = _as_vec(initial)
    g0 = ground_state_array(initial_theta)
    fid0 = abs(np.vdot(g0, psi0)) ** 2
    final = SpinorState.from_array(psi[-1], normalize=True)
    return EvolutionTrace(
        t_phys=np.concatenate([[t0_phys], t_phys]),
        t_dimless=np.concatenate([[initial_t_dim], t_dim]),
        p0=np.concatenate([[abs(psi0[0]) ** 2], p0]),
        ground_fidelity=np.concatenate([[fid0], fid]),
        final_state=final,
        propagator=Propagator2(reunitarize(products_last)),
    )


def schedule_propagator(s: Schedule) -> Propagator2:
    """Total propagator of a schedule in the rotating frame."""
    return Propagator2(reunitarize(ordered_product(su2_steps(s.fields, s.durations))))


def evolve(s: Schedule, initial: Optional[SpinorState] = None, record_every: Optional[int] = 1) -> EvolutionTrace:
    """Propagate ``initial`` through a schedule, segment by segment.

    Rows are recorded at segment ends (every ``record_every``-th segment and
    always the last), preceded by the initial state at ``t_phys = 0``.  The
    default initial state is the ground state at the start of the first pass.
    """
    first = s.passes[0]
    if initial is None:
        initial = ground_state(first, first.t_start)
    products = cumulative_products(su2_steps(s.fields, s.durations))
    idx = _record_indices(len(s), record_every)
    psi = _states(products[idx], _as_vec(initial))
    t_end = s.t_dimless_end[idx]
    theta = _schedule_thetas(s, idx, t_end)
    return _trace(
        s.end_times[idx], t_end, psi, theta, products[-1], initial, first.t_start,
        np.arctan2(first.delta, first.b * (first.t_start - first.t_mid)),
    )


def oracle_steps(p: ModelParams, n_steps: int, include_cd: bool = True) -> np.ndarray:
    """Midpoint-sampled micro-step propagators over the full dimensionless span."""
    if n_steps < 1:
        raise ValueError(f"n_steps must be >= 1, got {n_steps!r}")
    dt = p.length / n_steps
    t = p.t_start + (np.arange(n_steps) + 0.5) * dt
    return su2_steps(field_array(p, t, include_cd), dt)


def oracle_propagator(p: ModelParams, n_steps: int = 200_000, include_cd: bool = True) -> Propagator2:
    return Propagator2(reunitarize(ordered_product(oracle_steps(p, n_steps, include_cd))))


def _physical_steps(p: ModelParams, cfg: Optional[CompilerConfig], mode: str, n_steps: int) -> np.ndarray:
    dt = p.length / n_steps
    if cfg is None:
        return np.full(n_steps, dt)
    if mode == "analog":
        return np.full(n_steps, dt * analog_scale_factor(p, cfg))
    if mode == "rapid":
        t = p.t_start + (np.arange(n_steps) + 0.5) * dt
        f = field_array(p, t, True)
        return dt * np.hypot(f[:, 0], f[:, 1]) / cfg.omega_cap
    raise ConfigError(f"mode must be 'analog' or 'rapid', got {mode!r}")


def evolve_oracle(
    p: ModelParams,
    cfg: Optional[CompilerConfig] = None,
    initial: Optional[SpinorState] = None,
    n_steps: int = 200_000,
    *,
    include_cd: bool = True,
    mode: str = "analog",
    n_records: Optional[int] = 1000,
    t_phys_offset: float = 0.0,
) -> EvolutionTrace:
    """Brute-force time-ordered evolution of the continuous Hamiltonian.

    ``mode`` only sets the physical time axis: ``"analog"`` uses the uniform
    scale ``s_a``, ``"rapid"`` the local constant-amplitude scale.  Without a
    ``cfg`` physical time equals dimensionless time.  ``n_records=None``
    records just the final state.
    """
    if initial is None:
        initial = ground_state(p, p.t_start)
    us = oracle_steps(p, n_steps, include_cd)
    record_every = None if n_records is None else max(1, n_steps // n_records)
    idx = _record_indices(n_steps, record_every)
    if record_every is None:
        last = ordered_product(us)
        psi = (last @ _as_vec(initial))[None]
    else:
        products = cumulative_products(us)
        last = products[-1]
        psi = _states(products[idx], _as_vec(initial))
    t_end = p.t_start + (idx + 1) * (p.length / n_steps)
    t_end = np.minimum(t_end, p.t_end)
    t_phys = t_phys_offset + np.cumsum(_physical_steps(p, cfg, mode, n_steps))[idx]
    theta = np.arctan2(p.delta, p.b * (t_end - p.t_mid))
    return _trace(
        t_phys, t_end, psi, theta, last, initial, p.t_start,
        np.arctan2(p.delta, p.b * (p.t_start - p.t_mid)), t0_phys=t_phys_offset,
    )


def lab_frame_evolve(
    s: Schedule,
    cfg: LabFrameConfig,
    initial: Optional[SpinorState] = None,
    n_steps: Optional[int] = None,
    *,
    drive: str = "linear",
    steps_per_period: int = 200,
    record_every: Optional[int] = 1,
) -> EvolutionTrace:
    """Integrate the schedule in the laboratory frame and rotate back.

    ``drive="linear"`` is the physical ``-omega0 I_z + 2 omega_1(t) I_x``
    Hamiltonian including counter-rotating terms; ``drive="circular"`` is the
    exact frame image of the rotating-frame field (no RWA involved).  Each
    segment is split into midpoint micro-steps no longer than
    ``total_duration / n_steps`` (or ``1/steps_per_period`` of a carrier
    period when ``n_steps`` is omitted).  Recorded rows sit at segment ends and
    hold the state transformed back by ``exp(-i xi I_z)``.
    """
    if drive not in ("linear", "circular"):
        raise ConfigError(f"drive must be 'linear' or 'circular', got {drive!r}")
    total = s.total_duration
    w0 = cfg.omega0
    period = 2 * math.pi / w0 if w0 > 0 else math.inf
    if n_steps is None:
        if w0 > 0:
            dt_max = period / steps_per_period
        else:
            dt_max = 0.01 / np.max(np.linalg.norm(s.fields, axis=1))
    else:
        dt_max = total / n_steps
    if w0 > 0 and dt_max > period / _MIN_STEPS_PER_PERIOD:
        raise ConfigError(
            f"carrier under-resolved: step {dt_max:.3g} s exceeds 1/{_MIN_STEPS_PER_PERIOD} "
            f"of the carrier period {period:.3g} s"
        )

    k = np.maximum(1, np.ceil(s.durations / dt_max - 1e-9)).astype(np.int64)
    seg = np.repeat(np.arange(len(s)), k)
    local = np.arange(len(seg)) - np.repeat(np.cumsum(k) - k, k)
    sub = (s.durations / k)[seg]
    starts = s.start_times
    fz = s.fields[:, 2]
    # frame phase accumulated from the rotating-frame z field
    xi_start = np.concatenate([[0.0], np.cumsum(fz * s.durations)[:-1]])
    t_local = (local + 0.5) * sub
    t_mid = starts[seg] + t_local
    xi = w0 * t_mid + xi_start[seg] + fz[seg] * t_local
    fx, fy = s.fields[seg, 0], s.fields[seg, 1]
    wx = fx * np.cos(xi) + fy * np.sin(xi)
    wy = -fx * np.sin(xi) + fy * np.cos(xi)
    if drive == "linear":
        lab = np.stack([2 * wx, np.zeros_like(wx), np.full_like(wx, -w0)], axis=1)
    else:
        lab = np.stack([wx, wy, np.full_like(wx, -w0)], axis=1)

    first = s.passes[0]
    if initial is None:
        initial = ground_state(first, first.t_start)
    products = cumulative_products(su2_steps(lab, sub))
    idx = _record_indices(len(s), record_every)
    seg_end = np.cumsum(k) - 1
    psi_lab = _states(products[seg_end[idx]], _as_vec(initial))
    xi_end = w0 * s.end_times[idx] + np.cumsum(fz * s.durations)[idx]
    psi = (frame_rotation(xi_end) @ psi_lab[..., None])[..., 0]
    t_end = s.t_dimless_end[idx]
    theta = _schedule_thetas(s, idx, t_end)
    return _trace(
        s.end_times[idx], t_end, psi, theta, products[-1], initial, first.t_start,
        np.arctan2(first.delta, first.b * (first.t_start - first.t_mid)),
    )


def state_infidelity(a: SpinorState, b: SpinorState) -> float:
    return max(0.0, 1.0 - a.fidelity(b))
