"""Dimensionless Landau-Zener model with a counter-diabatic drive.

The rotating-frame Hamiltonian is ``H(t) = B(t) . I`` with ``I_k = sigma_k / 2``
and field ``B(t) = (delta, v_cd(t), lambda(t))``.  Everything here is a pure
function of dimensionless time; hbar = 1.

All time-dependent functions accept scalars or numpy arrays.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY = np.eye(2, dtype=complex)

_NORM_TOL = 1e-12
_SPAN_TOL = 1e-12


class DomainError(ValueError):
    """Raised when a time argument falls outside the scan interval."""


@dataclass(frozen=True)
class ModelParams:
    """Scan definition in dimensionless units.

    Parameters
    ----------
    delta : float
        Transverse field, equal to the minimal gap. Must be positive.
    b : float
        Sweep rate ``d lambda / dt``.  The sign sets the scan direction;
        on the default span the sweep runs from ``-b`` to ``+b``.
    t_span : (float, float)
        Dimensionless time interval.  ``lambda`` crosses zero at its midpoint.
    """

    delta: float
    b: float
    t_span: Tuple[float, float] = (0.0, 2.0)

    def __post_init__(self):
        if not np.isfinite(self.delta) or self.delta <= 0:
            raise ValueError(f"delta must be positive, got {self.delta!r}")
        if not np.isfinite(self.b) or self.b == 0:
            raise ValueError(f"b must be finite and nonzero, got {self.b!r}")
        t0, t1 = self.t_span
        if not (np.isfinite(t0) and np.isfinite(t1) and t1 > t0):
            raise ValueError(f"t_span must be a forward interval, got {self.t_span!r}")
        object.__setattr__(self, "t_span", (float(t0), float(t1)))

    @property
    def t_start(self) -> float:
        return self.t_span[0]

    @property
    def t_end(self) -> float:
        return self.t_span[1]

    @property
    def length(self) -> float:
        return self.t_span[1] - self.t_span[0]

    @property
    def t_mid(self) -> float:
        return 0.5 * (self.t_span[0] + self.t_span[1])

    def reversed(self) -> "ModelParams":
        """Same geometry swept the other way (``b -> -b``)."""
        return ModelParams(self.delta, -self.b, self.t_span)

    def shifted(self, offset: float) -> "ModelParams":
        t0, t1 = self.t_span
        return ModelParams(self.delta, self.b, (t0 + offset, t1 + offset))


@dataclass(frozen=True)
class FieldVector:
    """Rotating-frame field ``(x, y, z)`` = (delta, v_cd, lambda) at one instant."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        if not all(np.isfinite(c) for c in (self.x, self.y, self.z)):
            raise ValueError(f"field components must be finite: {self}")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)

    @property
    def norm(self) -> float:
        return float(np.sqrt(self.x**2 + self.y**2 + self.z**2))


@dataclass(frozen=True)
class SpinorState:
    """Normalized state ``amp0 |0> + amp1 |1>``; ``|0>`` is the ``I_z = +1/2`` eigenstate."""

    amp0: complex
    amp1: complex

    def __post_init__(self):
        norm = abs(self.amp0) ** 2 + abs(self.amp1) ** 2
        if abs(norm - 1.0) > _NORM_TOL:
            raise ValueError(f"state is not normalized: |psi|^2 = {norm!r}")
        object.__setattr__(self, "amp0", complex(self.amp0))
        object.__setattr__(self, "amp1", complex(self.amp1))

    @classmethod
    def from_array(cls, vec, normalize: bool = False) -> "SpinorState":
        vec = np.asarray(vec, dtype=complex).reshape(2)
        if normalize:
            vec = vec / np.linalg.norm(vec)
        return cls(vec[0], vec[1])

    def as_array(self) -> np.ndarray:
        return np.array([self.amp0, self.amp1], dtype=complex)

    @property
    def p0(self) -> float:
        return abs(self.amp0) ** 2

    def overlap(self, other: "SpinorState") -> complex:
        """``<self|other>``."""
        return np.conj(self.amp0) * other.amp0 + np.conj(self.amp1) * other.amp1

    def fidelity(self, other: "SpinorState") -> float:
        return float(abs(self.overlap(other)) ** 2)


KET0 = SpinorState(1.0, 0.0)
KET1 = SpinorState(0.0, 1.0)


def _check_span(p: ModelParams, t):
    t = np.asarray(t, dtype=float)
    t0, t1 = p.t_span
    tol = _SPAN_TOL * max(1.0, abs(t0), abs(t1))
    if np.any(t < t0 - tol) or np.any(t > t1 + tol) or np.any(~np.isfinite(t)):
        raise DomainError(f"time {t!r} outside scan interval {p.t_span}")
    return t


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


def lambda_of_t(p: ModelParams, t):
    """Linear sweep ``lambda(t) = b (t - t_mid)``; ``b (t - 1)`` on the default span."""
    t = _check_span(p, t)
    return _out(p.b * (t - p.t_mid))


def _v_cd_from_lambda(delta, b, lam):
    return -b * delta / (delta**2 + lam**2)


def v_cd(p: ModelParams, t):
    """Counter-diabatic field ``-(d lambda/dt) delta / (delta^2 + lambda^2)``."""
    lam = lambda_of_t(p, t)
    return _out(_v_cd_from_lambda(p.delta, p.b, np.asarray(lam)))


def field_array(p: ModelParams, t, include_cd: bool = True) -> np.ndarray:
    """Field components stacked along the last axis, shape ``t.shape + (3,)``."""
    lam = np.asarray(lambda_of_t(p, t), dtype=float)
    if include_cd:
        y = _v_cd_from_lambda(p.delta, p.b, lam)
    else:
        y = np.zeros_like(lam)
    return np.stack([np.full_like(lam, p.delta), y, lam], axis=-1)


def field_vector(p: ModelParams, t: float, include_cd: bool = True) -> FieldVector:
    x, y, z = field_array(p, float(t), include_cd)
    return FieldVector(float(x), float(y), float(z))


def mixing_angle(p: ModelParams, t):
    """Angle with ``tan(theta) = delta / lambda`` on the branch ``(0, pi)``."""
    lam = lambda_of_t(p, t)
    return _out(np.arctan2(p.delta, lam))


def ground_state_from_angle(theta: float) -> SpinorState:
    """``sin(theta/2) |0> - cos(theta/2) |1>``."""
    return SpinorState(np.sin(theta / 2), -np.cos(theta / 2))


def ground_state(p: ModelParams, t: float) -> SpinorState:
    return ground_state_from_angle(mixing_angle(p, float(t)))


def ground_state_array(theta) -> np.ndarray:
    """Vectorized ground states, shape ``theta.shape + (2,)``."""
    theta = np.asarray(theta, dtype=float)
    return np.stack([np.sin(theta / 2), -np.cos(theta / 2)], axis=-1).astype(complex)


def energy_gap(p: ModelParams, t):
    """``sqrt(lambda^2 + delta^2)``, the splitting of the bare LZ levels."""
    lam = lambda_of_t(p, t)
    return _out(np.hypot(lam, p.delta))


def field_to_matrix(field) -> np.ndarray:
    """``B . sigma / 2`` for a field of shape ``(..., 3)``."""
    f = np.asarray(field, dtype=float)
    bx, by, bz = f[..., 0], f[..., 1], f[..., 2]
    h = np.empty(f.shape[:-1] + (2, 2), dtype=complex)
    h[..., 0, 0] = bz / 2
    h[..., 1, 1] = -bz / 2
    h[..., 0, 1] = (bx - 1j * by) / 2
    h[..., 1, 0] = (bx + 1j * by) / 2
    return h


def hamiltonian(p: ModelParams, t: float, include_cd: bool = True) -> np.ndarray:
    """Total rotating-frame Hamiltonian ``H_LZ + H_CD`` as a 2x2 matrix.

    ``include_cd=False`` gives the bare Landau-Zener part (the unassisted
    reference scan).
    """
    return field_to_matrix(field_array(p, float(t), include_cd))
