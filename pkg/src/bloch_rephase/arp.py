"""Analytic description of a single adiabatic rapid passage.

Under the adiabatic approximation the Bloch vector precesses about the
rotating-frame control vector, which is followed from one far-detuned edge
of the sweep to the other.  Composing the two frame changes with the
accumulated precession gives the pulse propagator

    M = C1(hi)^-1 C2(hi)^-1 U(chi) C2(lo) C1(lo)

which, with far-off-resonance edges, is a pi rotation about an equatorial
axis whose azimuth depends on the precession angle chi(Delta).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .core import c1_from_angle, c2_matrix, effective_detuning, is_rotation, rot_z
from .errors import DegenerateControlError, DomainError, ValidityError

DEFAULT_THRESHOLD = 0.1
DEFAULT_ZETA_SAMPLES = 4096
CHI_RTOL = 1e-9

# ---------------------------------------------------------------------------
# Precession angle
# ---------------------------------------------------------------------------


def generalized_rabi(t, pulse, atom):
    """|beta(t)| = sqrt(Omega^2 + (Delta - phidot)^2)."""
    return np.hypot(pulse.rabi(t), effective_detuning(t, pulse, atom))


def precession_angle_chi(pulse, atom, rtol=CHI_RTOL):
    """Total precession angle chi = integral of |beta(t)| over the pulse window.

    Adaptive Gauss-Kronrod (QUADPACK) with relative tolerance ``rtol``.  The
    resonance crossing, when it lies inside the window, is passed as a
    breakpoint.
    """
    lo, hi = pulse.lo, pulse.hi
    points = _crossings(pulse, atom)
    val, _ = integrate.quad(
        lambda t: float(generalized_rabi(t, pulse, atom)),
        lo,
        hi,
        epsabs=0.0,
        epsrel=rtol,
        limit=2000,
        points=points or None,
    )
    return float(val)


def _crossings(pulse, atom, n=257):
    """Approximate instants where Delta - phidot changes sign."""
    t = np.linspace(pulse.lo, pulse.hi, n)
    d = effective_detuning(t, pulse, atom)
    idx = np.flatnonzero(np.sign(d[:-1]) * np.sign(d[1:]) < 0)
    return [float(0.5 * (t[i] + t[i + 1])) for i in idx]


# ---------------------------------------------------------------------------
# Edge diagnostics and the propagator
# ---------------------------------------------------------------------------


def off_resonance_ratios(pulse, atom):
    """|Omega/(Delta - phidot)| at the start and end of the pulse window."""
    out = []
    for t in (pulse.lo, pulse.hi):
        om = abs(float(pulse.rabi(t)))
        d = abs(float(effective_detuning(t, pulse, atom)))
        out.append(np.inf if d == 0.0 else om / d if om else 0.0)
    return out[0], out[1]


def _edge_theta(t, pulse, atom, exact):
    d = float(effective_detuning(t, pulse, atom))
    if exact:
        om = float(pulse.rabi(t))
        if om == 0.0 and d == 0.0:
            raise DegenerateControlError(f"control vector vanishes at t={t}")
        return float(np.arctan2(om, d))
    if d == 0.0:
        raise ValidityError("pulse edge sits on resonance; reduced edge matrix undefined", np.inf)
    return 0.0 if d > 0 else np.pi


def _check_edges(pulse, atom, threshold):
    start, end = off_resonance_ratios(pulse, atom)
    if pulse.kind == "half_passage":
        # only the far-detuned edge is required to be off resonance
        checks = [("start", start)] if start <= end else [("end", end)]
    else:
        checks = [("start", start), ("end", end)]
    for edge, ratio in checks:
        if not ratio <= threshold:
            raise ValidityError(
                f"far-off-resonance condition violated at pulse {edge}: "
                f"|Omega/(Delta-phidot)| = {ratio:.4g} > {threshold}",
                ratio,
                edge,
            )


def adiabatic_matrix(pulse, atom, exact_edges=False, chi=None):
    """Lab-frame propagator across the pulse window under adiabatic following.

    With ``exact_edges`` the tipping angles at the window edges are used as
    they are; otherwise they are rounded to 0 or pi by the sign of
    Delta - phidot (far-off-resonance limit).  Half passages always use the
    exact angle at their on-resonance edge.
    """
    lo, hi = pulse.lo, pulse.hi
    if chi is None:
        chi = precession_angle_chi(pulse, atom)
    start, end = off_resonance_ratios(pulse, atom)
    exact_lo = exact_edges or (pulse.kind == "half_passage" and start > end)
    exact_hi = exact_edges or (pulse.kind == "half_passage" and end >= start)
    th_lo = _edge_theta(lo, pulse, atom, exact_lo)
    th_hi = _edge_theta(hi, pulse, atom, exact_hi)
    a_lo = float(pulse.carrier_angle(lo))
    a_hi = float(pulse.carrier_angle(hi))
    c1_lo, c1_hi = c1_from_angle(a_lo), c1_from_angle(a_hi)
    return c1_hi.T @ c2_matrix(th_hi).T @ rot_z(chi) @ c2_matrix(th_lo) @ c1_lo


def arp_matrix(pulse, atom, threshold=DEFAULT_THRESHOLD, exact_edges=False):
    """Propagator M_ARP of one passage, acting on lab-frame Bloch vectors.

    Raises :class:`ValidityError` if an edge ratio exceeds ``threshold``.
    """
    _check_edges(pulse, atom, threshold)
    return adiabatic_matrix(pulse, atom, exact_edges=exact_edges)


def _sweep_sign(pulse, atom):
    d_lo = float(effective_detuning(pulse.lo, pulse, atom))
    d_hi = float(effective_detuning(pulse.hi, pulse, atom))
    if d_lo > 0 > d_hi:
        return 1.0
    if d_lo < 0 < d_hi:
        return -1.0
    raise ValidityError("pulse does not sweep through resonance for this atom")


def equatorial_axis_phi(pulse, atom, threshold=DEFAULT_THRESHOLD, chi=None):
    """Azimuth phi(Delta) in [0, pi), measured from v, of the ARP rotation axis.

    For a positive chirp on a symmetric window this is
    (-chi + phi(-T/2) + phi(T/2)) / 2; negative chirps flip the sign of chi.
    The rotation axis itself points along (cos(phi + pi/2), sin(phi + pi/2), 0).
    """
    _check_edges(pulse, atom, threshold)
    s = _sweep_sign(pulse, atom)
    if chi is None:
        chi = precession_angle_chi(pulse, atom)
    half = 0.5 * (float(pulse.carrier_angle(pulse.lo)) + float(pulse.carrier_angle(pulse.hi)) - s * chi)
    return float(np.mod(half, np.pi))


# ---------------------------------------------------------------------------
# Axis-angle decomposition
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AxisAngle:
    axis: np.ndarray
    angle: float

    @property
    def azimuth(self):
        """Angle of the axis projection in the uv plane, from u."""
        return float(np.arctan2(self.axis[1], self.axis[0]))


def _canonical_sign(n, eps=1e-12):
    for c in n:
        if abs(c) > eps:
            return n if c > 0 else -n
    return n


def rotation_axis_angle(m, tol=1e-8):
    """Axis-angle form of a rotation matrix; angle in [0, pi].

    The identity reports axis +w.  At angle pi the axis sign is fixed so that
    its first non-zero component is positive.
    """
    m = np.asarray(m, dtype=float)
    if not is_rotation(m, tol):
        raise DomainError("matrix is not a proper rotation")
    skew = np.array([m[2, 1] - m[1, 2], m[0, 2] - m[2, 0], m[1, 0] - m[0, 1]])
    s = 0.5 * np.linalg.norm(skew)
    c = 0.5 * (np.trace(m) - 1.0)
    angle = float(np.arctan2(s, c))
    if angle < 1e-12:
        return AxisAngle(np.array([0.0, 0.0, 1.0]), 0.0)
    if c > 0:
        axis = skew / (2.0 * s)
    else:
        nn = (0.5 * (m + m.T) - c * np.eye(3)) / (1.0 - c)
        j = int(np.argmax(np.diag(nn)))
        axis = nn[:, j] / np.sqrt(nn[j, j])
        axis = axis / np.linalg.norm(axis)
        if np.pi - angle < 1e-7:
            axis = _canonical_sign(axis)
            angle = np.pi
        elif np.dot(axis, skew) < 0:
            axis = -axis
    return AxisAngle(axis, angle)


def signed_z_angle(m):
    """Counter-clockwise angle of a rotation about +w, in (-pi, pi]."""
    return float(np.arctan2(m[1, 0] - m[0, 1], m[0, 0] + m[1, 1]))


# ---------------------------------------------------------------------------
# Adiabaticity
# ---------------------------------------------------------------------------


def adiabaticity_zeta(t, pulse, atom):
    """Ratio of tipping rate to precession rate at local time ``t``."""
    pulse.check_time(t)
    return float(_zeta(np.asarray(t, dtype=float), pulse, atom, strict=True))


def _zeta(t, pulse, atom, strict=False):
    om = pulse.rabi(t)
    dom = pulse.rabi_rate(t)
    d = effective_detuning(t, pulse, atom)
    acc = pulse.phi_accel(t)
    den = (om * om + d * d) ** 1.5
    num = np.abs(dom * d + om * acc)
    if strict and np.any(den == 0):
        raise DegenerateControlError("control vector vanishes; zeta undefined")
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(den > 0, num / np.where(den > 0, den, 1.0), np.inf)
    return z


@dataclass(frozen=True)
class ArpCharacterization:
    chi: float
    phi_axis: float
    times: np.ndarray = field(repr=False)
    zeta_trace: np.ndarray = field(repr=False)
    theta_trace: np.ndarray = field(repr=False)
    zeta_max: float
    zeta_violation_fraction: float
    off_resonance_ratio_start: float
    off_resonance_ratio_end: float
    simplified_adiabaticity: float
    valid_edges: bool

    def summary(self):
        return {
            "chi_rad": self.chi,
            "phi_axis_rad": self.phi_axis,
            "zeta_max": self.zeta_max,
            "zeta_violation_fraction": self.zeta_violation_fraction,
            "off_resonance_ratio_start": self.off_resonance_ratio_start,
            "off_resonance_ratio_end": self.off_resonance_ratio_end,
            "simplified_adiabaticity": self.simplified_adiabaticity,
            "valid_edges": self.valid_edges,
        }


def characterize(pulse, atom, samples=DEFAULT_ZETA_SAMPLES, threshold=DEFAULT_THRESHOLD):
    """Fill every diagnostic of one pulse on a uniform grid of ``samples`` points.

    Nothing is enforced: an edge violation is reported through
    ``valid_edges`` and ``phi_axis`` is NaN when the axis is undefined.
    """
    if samples < 64:
        raise DomainError("characterize needs at least 64 samples")
    t = np.linspace(pulse.lo, pulse.hi, int(samples))
    zeta = _zeta(t, pulse, atom)
    om = pulse.rabi(t) + 0.0 * t
    d = effective_detuning(t, pulse, atom)
    theta = np.arctan2(om, d)
    chi = precession_angle_chi(pulse, atom)
    start, end = off_resonance_ratios(pulse, atom)
    try:
        phi_axis = equatorial_axis_phi(pulse, atom, threshold, chi=chi)
        valid = True
    except ValidityError:
        phi_axis, valid = float("nan"), False
    r = abs(pulse.mean_chirp_rate)
    simplified = float(np.min(om) ** 2 / r) if r > 0 else float("inf")
    return ArpCharacterization(
        chi=chi,
        phi_axis=phi_axis,
        times=t,
        zeta_trace=zeta,
        theta_trace=theta,
        zeta_max=float(np.max(zeta)),
        zeta_violation_fraction=float(np.mean(zeta > 1.0)),
        off_resonance_ratio_start=float(start),
        off_resonance_ratio_end=float(end),
        simplified_adiabaticity=simplified,
        valid_edges=valid,
    )
