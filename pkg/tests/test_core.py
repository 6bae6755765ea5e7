import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from bloch_rephase.core import (
    AtomSpec,
    BlochVector,
    Frame,
    c1_from_angle,
    c1_matrix,
    c2_matrix,
    control_vector,
    density_roundtrip,
    free_evolution_matrix,
    is_rotation,
    rot_axis,
    rot_z,
    tipping_angle,
)
from bloch_rephase.errors import DegenerateControlError, DomainError
from bloch_rephase.pulses import ConstantEnvelope, PulseSpec, chirped_arp, constant_phase, square_pulse

finite = st.floats(-50, 50, allow_nan=False)
angles = st.floats(-20, 20, allow_nan=False)


@pytest.mark.parametrize("vec", [(0, 0, 1), (1, 0, 0), (0.3, -0.4, 0.5)])
def test_density_roundtrip_examples(vec):
    b = density_roundtrip(BlochVector(*vec))
    assert np.allclose(b.as_array(), vec, atol=1e-12)


@given(st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1))
def test_density_roundtrip_identity(u, v, w):
    n = math.sqrt(u * u + v * v + w * w)
    if n > 1:
        u, v, w = u / n, v / n, w / n
    b = BlochVector(u, v, w)
    assert np.max(np.abs(density_roundtrip(b).as_array() - b.as_array())) <= 1e-12


def test_density_elements_follow_bloch_definition():
    rho_ab, rho_ba, rho_aa, rho_bb = BlochVector(0.2, -0.6, 0.4).to_density()
    assert rho_ab + rho_ba == pytest.approx(0.2)
    assert (1j * (rho_ba - rho_ab)).real == pytest.approx(-0.6)
    assert rho_bb - rho_aa == pytest.approx(0.4)
    assert rho_aa + rho_bb == pytest.approx(1.0)


def test_bloch_vector_norm_bound():
    BlochVector(1.0 + 5e-10, 0, 0)
    with pytest.raises(DomainError):
        BlochVector(1.01, 0, 0)


def test_atom_requires_positive_frequency():
    with pytest.raises(DomainError):
        AtomSpec(0.0)


def test_c1_zero_angle_is_identity():
    p = square_pulse(0.0 + 1.0, 1.0, 2.0)
    assert np.allclose(c1_matrix(0.0, p), np.eye(3))


def test_c1_quarter_turn():
    m = c1_from_angle(math.pi / 2)
    assert np.allclose(m @ [1, 0, 0], [0, -1, 0], atol=1e-15)


def test_c1_rejects_time_outside_window():
    p = square_pulse(5.0, 1.0, 2.0)
    with pytest.raises(DomainError):
        c1_matrix(1.5, p)


def test_c1_uses_carrier_and_phase():
    p = chirped_arp(3.0, 1.0, 4.0, 2.0, phase_offset=0.7)
    t = 0.4
    a = 3.0 * t + 0.5 * 2.0 * t * t + 0.7
    assert np.allclose(c1_matrix(t, p), c1_from_angle(a))
    assert np.allclose(c1_matrix(t, p), rot_z(-a))


@given(angles)
def test_matrix_constructors_are_rotations(a):
    for m in (c1_from_angle(a), c2_matrix(a), rot_z(a), rot_axis([1.0, -2.0, 0.5], a)):
        assert is_rotation(m, 1e-10)


def test_c2_examples():
    assert np.allclose(c2_matrix(0.0), np.eye(3))
    assert np.allclose(c2_matrix(math.pi), np.diag([-1, 1, -1]), atol=1e-15)


def test_c2_quarter_turn_matches_tipping_convention():
    # the control vector at theta = pi/2 is (Omega, 0, 0); C2 must carry it to +w
    assert np.allclose(c2_matrix(math.pi / 2) @ [1, 0, 0], [0, 0, 1], atol=1e-15)
    assert np.allclose(c2_matrix(math.pi / 2) @ [0, 0, 1], [-1, 0, 0], atol=1e-15)


def _static(omega, d, omega0=10.0):
    return PulseSpec(ConstantEnvelope(omega), constant_phase(), omega0, 2.0), AtomSpec(omega0 + d)


@pytest.mark.parametrize(
    "omega,d,theta",
    [(0.0, 1.0, 0.0), (1.0, 0.0, math.pi / 2), (0.0, -1.0, math.pi)],
)
def test_tipping_angle_examples(omega, d, theta):
    p, atom = _static(omega, d)
    assert tipping_angle(0.0, p, atom) == pytest.approx(theta, abs=1e-15)


def test_tipping_angle_degenerate():
    p, atom = _static(0.0, 0.0)
    with pytest.raises(DegenerateControlError):
        tipping_angle(0.0, p, atom)


@given(st.floats(0, 10), st.floats(-10, 10))
def test_c2_maps_rotating_to_tipping(omega, d):
    assume(omega > 1e-9 or abs(d) > 1e-9)
    p, atom = _static(omega, d)
    th = tipping_angle(0.0, p, atom)
    rot = control_vector(0.0, p, atom, Frame.ROTATING).vector
    tip = control_vector(0.0, p, atom, Frame.TIPPING).vector
    assert np.max(np.abs(c2_matrix(th) @ rot - tip)) <= 1e-10 * max(1.0, np.linalg.norm(rot))


def test_control_vector_frames():
    p = chirped_arp(20.0, 0.8, 4.0, 10.0)
    atom = AtomSpec(20.0 + 0.2)
    t = 0.2 / (4.0 / 10.0)  # phidot = r t = Delta
    assert np.allclose(control_vector(t, p, atom, "rotating").vector, [0.8, 0, 0], atol=1e-12)
    tip = control_vector(1.3, p, atom, "tipping")
    assert tip.vector[0] == 0.0 and tip.vector[1] == 0.0
    assert tip.norm == pytest.approx(control_vector(1.3, p, atom, "rotating").norm, rel=1e-14)
    lab = control_vector(1.3, p, atom, "lab").vector
    assert lab[1] == 0.0 and lab[2] == atom.omega_ab
    assert lab[0] == pytest.approx(2 * 0.8 * math.cos(p.carrier_angle(1.3)))


def test_free_evolution_examples():
    atom = AtomSpec(2.0)
    assert np.allclose(free_evolution_matrix(0.0, atom), np.eye(3))
    m = free_evolution_matrix(math.pi / 4, atom)
    assert np.allclose(m @ [1, 0, 0], [0, 1, 0], atol=1e-15)
    with pytest.raises(DomainError):
        free_evolution_matrix(-1.0, atom)


@given(st.floats(0, 100), st.floats(0, 100), st.floats(0.1, 50))
def test_free_evolution_is_homomorphism(t1, t2, w):
    atom = AtomSpec(w)
    lhs = free_evolution_matrix(t1, atom) @ free_evolution_matrix(t2, atom)
    assert np.allclose(lhs, free_evolution_matrix(t1 + t2, atom), atol=1e-9)


def test_is_rotation_rejects_reflection():
    assert not is_rotation(np.diag([1.0, 1.0, -1.0]))
    assert not is_rotation(np.full((3, 3), np.nan))
