"""Bloch vectors, atoms and the elementary frame-change matrices.

Frames
------
``lab``       laboratory frame R, axes (u, v, w).
``rotating``  frame R' turning about w by omega0*t + phi(t) (RWA applied).
``tipping``   frame R'' whose polar axis follows the rotating-frame control
              vector.

Every matrix here acts on column vectors and is a proper rotation.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DegenerateControlError, DomainError

# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BlochVector:
    """Two-level state (u, v, w) = (2 Re rho_ab, 2 Im rho_ab, rho_bb - rho_aa)."""

    u: float
    v: float
    w: float

    def __post_init__(self):
        if self.norm > 1.0 + 1e-9:
            raise DomainError(f"Bloch vector norm {self.norm} exceeds 1")

    @property
    def norm(self):
        return float(np.sqrt(self.u**2 + self.v**2 + self.w**2))

    def as_array(self):
        return np.array([self.u, self.v, self.w], dtype=float)

    @classmethod
    def from_array(cls, a):
        a = np.asarray(a, dtype=float)
        return cls(float(a[0]), float(a[1]), float(a[2]))

    def to_density(self):
        """Return (rho_ab, rho_ba, rho_aa, rho_bb) for a trace-one state."""
        rho_ab = 0.5 * (self.u + 1j * self.v)
        rho_bb = 0.5 * (1.0 + self.w)
        return rho_ab, np.conj(rho_ab), 1.0 - rho_bb, rho_bb

    @classmethod
    def from_density(cls, rho_ab, rho_ba, rho_aa, rho_bb):
        u = rho_ab + rho_ba
        v = 1j * (rho_ba - rho_ab)
        return cls(float(np.real(u)), float(np.real(v)), float(np.real(rho_bb - rho_aa)))


def density_roundtrip(bloch):
    """Convert to density-matrix elements and back (identity map)."""
    return BlochVector.from_density(*bloch.to_density())


@dataclass(frozen=True)
class AtomSpec:
    """A single frequency class with transition angular frequency ``omega_ab``."""

    omega_ab: float

    def __post_init__(self):
        if not self.omega_ab > 0:
            raise DomainError(f"omega_ab must be positive, got {self.omega_ab}")

    def detuning(self, pulse):
        """Delta = omega_ab - omega0 for the given pulse."""
        return self.omega_ab - pulse.omega0


class Frame(str, Enum):
    LAB = "lab"
    ROTATING = "rotating"
    TIPPING = "tipping"


@dataclass(frozen=True)
class ControlVector:
    vector: np.ndarray
    frame: Frame

    @property
    def norm(self):
        return float(np.linalg.norm(self.vector))


# ---------------------------------------------------------------------------
# Rotation helpers
# ---------------------------------------------------------------------------


def rot_z(angle):
    """Counter-clockwise rotation about w."""
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def rot_y(angle):
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rot_axis(axis, angle):
    """Right-handed rotation by ``angle`` about ``axis`` (Rodrigues)."""
    n = np.asarray(axis, dtype=float)
    n = n / np.linalg.norm(n)
    k = np.array([[0.0, -n[2], n[1]], [n[2], 0.0, -n[0]], [-n[1], n[0], 0.0]])
    return np.eye(3) + np.sin(angle) * k + (1.0 - np.cos(angle)) * (k @ k)


def is_rotation(m, tol=1e-10):
    m = np.asarray(m, dtype=float)
    if m.shape != (3, 3) or not np.all(np.isfinite(m)):
        return False
    return bool(np.max(np.abs(m.T @ m - np.eye(3))) <= tol and abs(np.linalg.det(m) - 1.0) <= tol)


# ---------------------------------------------------------------------------
# Frame-change and free-evolution matrices
# ---------------------------------------------------------------------------


def c1_matrix(t, pulse):
    """Lab -> rotating frame change at local time ``t``: rot_z(-(omega0 t + phi(t)))."""
    pulse.check_time(t)
    return c1_from_angle(float(pulse.carrier_angle(t)))


def c1_from_angle(a):
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, s, 0.0], [-s, c, 0.0], [0.0, 0.0, 1.0]])


def c2_matrix(theta):
    """Rotating -> tipping frame change for tipping angle ``theta``."""
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, 0.0, -s], [0.0, 1.0, 0.0], [s, 0.0, c]])


def free_evolution_matrix(tau, atom):
    """Lab-frame free precession over ``tau``: rot_z(omega_ab * tau)."""
    if tau < 0:
        raise DomainError(f"free evolution time must be non-negative, got {tau}")
    return rot_z(atom.omega_ab * tau)


def effective_detuning(t, pulse, atom):
    """Delta - phidot(t), the w component of the rotating-frame control."""
    return atom.detuning(pulse) - pulse.phi_rate(t)


def tipping_angle(t, pulse, atom):
    """Polar angle theta(t) in [0, pi] of the rotating-frame control vector."""
    pulse.check_time(t)
    omega = float(pulse.rabi(t))
    d = float(effective_detuning(t, pulse, atom))
    if omega == 0.0 and d == 0.0:
        raise DegenerateControlError(f"control vector vanishes at t={t}")
    return float(np.arctan2(omega, d))


def control_vector(t, pulse, atom, frame=Frame.ROTATING):
    """Control vector beta at local time ``t`` expressed in ``frame``."""
    pulse.check_time(t)
    frame = Frame(frame)
    omega = float(pulse.rabi(t))
    if frame is Frame.LAB:
        vec = np.array([2.0 * omega * np.cos(pulse.carrier_angle(t)), 0.0, atom.omega_ab])
    else:
        d = float(effective_detuning(t, pulse, atom))
        if frame is Frame.ROTATING:
            vec = np.array([omega, 0.0, d])
        else:
            vec = np.array([0.0, 0.0, np.hypot(omega, d)])
    return ControlVector(vec, frame)
