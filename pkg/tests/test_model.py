import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aapass.model import (
    SIGMA_X,
    DomainError,
    ModelParams,
    SpinorState,
    energy_gap,
    field_vector,
    ground_state,
    hamiltonian,
    lambda_of_t,
    mixing_angle,
    v_cd,
)

deltas = st.floats(0.01, 5.0)
rates = st.floats(0.05, 10.0).flatmap(lambda b: st.sampled_from([b, -b]))
times = st.floats(0.0, 2.0)


def test_params_validation():
    with pytest.raises(ValueError):
        ModelParams(0.0, 1.0)
    with pytest.raises(ValueError):
        ModelParams(0.2, 0.0)
    with pytest.raises(ValueError):
        ModelParams(0.2, 1.0, (1.0, 1.0))


@pytest.mark.parametrize("t, expected", [(0.0, -2.0), (1.0, 0.0), (2.0, 2.0)])
def test_lambda_endpoints(fig1, t, expected):
    assert lambda_of_t(fig1, t) == expected


def test_lambda_outside_span(fig1):
    with pytest.raises(DomainError):
        lambda_of_t(fig1, 2.1)
    with pytest.raises(DomainError):
        v_cd(fig1, -0.5)


def test_lambda_on_shifted_span():
    p = ModelParams(0.2, -2.0, (2.0, 4.0))
    assert lambda_of_t(p, 2.0) == 2.0
    assert lambda_of_t(p, 4.0) == -2.0


def test_v_cd_values(fig1):
    assert v_cd(fig1, 1.0) == pytest.approx(-10.0, rel=1e-15)
    assert v_cd(fig1, 0.0) == pytest.approx(-0.4 / 4.04, rel=1e-15)
    assert v_cd(fig1.reversed(), 1.0) == pytest.approx(10.0, rel=1e-15)
    assert -0.4 / 4.04 == pytest.approx(-0.09901, abs=5e-6)


def test_field_vector(fig1):
    f = field_vector(fig1, 1.0)
    assert (f.x, f.y, f.z) == pytest.approx((0.2, -10.0, 0.0))
    f0 = field_vector(fig1, 0.0)
    assert (f0.x, f0.y, f0.z) == pytest.approx((0.2, -0.09901, -2.0), abs=1e-5)
    xs = [field_vector(fig1, t).x for t in np.linspace(0, 2, 17)]
    assert set(xs) == {0.2}


def test_mixing_angle_anticrossing(fig1):
    assert mixing_angle(fig1, 1.0) == math.pi / 2


@pytest.mark.parametrize("ratio, overlap", [(-3.0, 0.9871), (-20.0, 0.9997)])
def test_initial_overlap(ratio, overlap):
    # lambda(0) = -b on the default span, so b = -ratio * delta
    p = ModelParams(0.2, -ratio * 0.2)
    assert lambda_of_t(p, 0.0) / p.delta == pytest.approx(ratio)
    assert math.sin(mixing_angle(p, 0.0) / 2) == pytest.approx(overlap, abs=1e-4)
    assert abs(ground_state(p, 0.0).amp0) == pytest.approx(overlap, abs=1e-4)


def test_ground_state_at_anticrossing(fig1):
    g = ground_state(fig1, 1.0)
    assert g.amp0 == pytest.approx(math.sqrt(0.5))
    assert g.amp1 == pytest.approx(-math.sqrt(0.5))


def test_energy_gap(fig1):
    assert energy_gap(fig1, 1.0) == pytest.approx(0.2)
    assert energy_gap(fig1, 2.0) == pytest.approx(math.sqrt(4.04))
    assert energy_gap(fig1, 0.3) == pytest.approx(energy_gap(fig1, 1.7))


def test_hamiltonian_single_term(fig1):
    np.testing.assert_allclose(hamiltonian(fig1, 1.0, include_cd=False), 0.1 * SIGMA_X)


def test_spinor_rejects_unnormalized():
    with pytest.raises(ValueError):
        SpinorState(1.0, 0.1)
    s = SpinorState.from_array([3, 4j], normalize=True)
    assert s.p0 == pytest.approx(0.36)


@settings(max_examples=200, deadline=None)
@given(deltas, rates, times)
def test_hamiltonian_eigen_oracle(delta, b, t):
    p = ModelParams(delta, b)
    for include_cd in (True, False):
        h = hamiltonian(p, t, include_cd)
        np.testing.assert_allclose(h, h.conj().T, atol=0)
        assert abs(np.trace(h)) < 1e-15
        lam, vcd = lambda_of_t(p, t), v_cd(p, t) if include_cd else 0.0
        half = 0.5 * math.sqrt(lam**2 + delta**2 + vcd**2)
        np.testing.assert_allclose(np.linalg.eigvalsh(h), [-half, half], rtol=1e-12, atol=1e-14)


@settings(max_examples=1000, deadline=None)
@given(deltas, rates, times)
def test_ground_state_is_lowest_eigenvector(delta, b, t):
    p = ModelParams(delta, b)
    g = ground_state(p, t).as_array()
    assert abs(np.vdot(g, g) - 1) < 1e-12
    h = hamiltonian(p, t, include_cd=False)
    np.testing.assert_allclose(h @ g, -0.5 * energy_gap(p, t) * g, atol=1e-10 * max(1.0, abs(b)))
    # independent eigensolver agrees up to phase
    vals, vecs = np.linalg.eigh(h)
    assert abs(np.vdot(vecs[:, 0], g)) ** 2 == pytest.approx(1.0, abs=1e-10)


@settings(max_examples=200, deadline=None)
@given(deltas, rates)
def test_cd_peak_at_anticrossing(delta, b):
    p = ModelParams(delta, b)
    t = np.linspace(0, 2, 2001)
    assert t[np.argmax(np.abs(v_cd(p, t)))] == 1.0
    assert abs(v_cd(p, 1.0)) == pytest.approx(abs(b) / delta)


@settings(max_examples=200, deadline=None)
@given(deltas, rates, times)
def test_cd_antisymmetry(delta, b, t):
    p = ModelParams(delta, b)
    assert v_cd(p, t) == pytest.approx(-v_cd(p.reversed(), 2 - t), rel=1e-12)


@settings(max_examples=200, deadline=None)
@given(deltas, rates, times)
def test_mixing_angle_range(delta, b, t):
    p = ModelParams(delta, b)
    theta = mixing_angle(p, t)
    assert 0 < theta < math.pi
    assert (theta == math.pi / 2) == (lambda_of_t(p, t) == 0)


def test_mixing_angle_monotone_in_lambda():
    p = ModelParams(0.3, 1.5)
    theta = mixing_angle(p, np.linspace(0, 2, 501))
    assert np.all(np.diff(theta) < 0)
