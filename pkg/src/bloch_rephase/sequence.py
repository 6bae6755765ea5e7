"""Sequence timelines, propagator composition and rephasing analysis.

A sequence is an ordered list of free-evolution delays and pulses laid end
to end starting at t = 0.  Every pulse is a time-shifted copy of its
description: its field is ``2 Omega(t - t0) cos(omega0 (t - t0) + phi(t - t0))``
with ``t0`` fixed by where the pulse lands on the timeline.  Because of this
the lab-frame pulse propagators do not depend on placement, and the full
sequence matrix is simply the time-ordered product of element matrices.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Tuple, Union

import numpy as np

from .arp import (
    DEFAULT_THRESHOLD,
    _check_edges,
    adiabatic_matrix,
    equatorial_axis_phi,
    precession_angle_chi,
    signed_z_angle,
)
from .core import AtomSpec, c1_from_angle, free_evolution_matrix, rot_axis
from .errors import DomainError, SequenceSemanticError, ShapeError
from .pulses import PolynomialPhase, PulseSpec
from .units import wrap_angle

TAU_TOL = 1e-9
ALPHA_TOL = 1e-6
Z_ROTATION_TOL = 1e-8
CONDITION_GRID = 101


@dataclass(frozen=True)
class Delay:
    tau: float


Element = Union[Delay, PulseSpec]


@dataclass(frozen=True)
class CanonicalShape:
    """Delay - pulse A - delay - pulse B - delay, with the delays summed."""

    tau1: float
    tau2: float
    tau3: float
    pulse_a: PulseSpec
    pulse_b: PulseSpec

    @property
    def tau_residual(self):
        return self.tau3 - (self.tau2 - self.tau1)


@dataclass(frozen=True)
class SequenceSpec:
    """Ordered delays and pulses.

    ``reference`` is the angular frequency of the rotating frame used by the
    integrators; it defaults to the carrier of the first pulse.
    """

    elements: Tuple[Element, ...] = ()
    reference: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        for i, el in enumerate(self.elements):
            if isinstance(el, Delay):
                if not np.isfinite(el.tau) or el.tau < 0:
                    raise SequenceSemanticError(f"delay must be non-negative, got {el.tau} us", i)
            elif not isinstance(el, PulseSpec):
                raise SequenceSemanticError(f"unsupported element {type(el).__name__}", i)

    @property
    def pulses(self):
        return [el for el in self.elements if isinstance(el, PulseSpec)]

    @property
    def omega_ref(self):
        if self.reference is not None:
            return float(self.reference)
        pulses = self.pulses
        return float(pulses[0].omega0) if pulses else 0.0

    def timeline(self):
        """[(t_start, t_end, placed_pulse_or_None), ...] in sequence time."""
        out = []
        t = 0.0
        for el in self.elements:
            if isinstance(el, Delay):
                out.append((t, t + el.tau, None))
                t += el.tau
            else:
                placed = el.at(t - el.lo)
                out.append((t, t + el.duration, placed))
                t += el.duration
        return out

    @property
    def duration(self):
        return sum(el.tau if isinstance(el, Delay) else el.duration for el in self.elements)

    def placed_pulses(self):
        return [p for _, _, p in self.timeline() if p is not None]

    def canonical(self):
        """Collapse to (tau1, A, tau2, B, tau3); missing delays count as zero."""
        groups = [0.0]
        pulses = []
        for el in self.elements:
            if isinstance(el, Delay):
                groups[-1] += el.tau
            else:
                pulses.append(el)
                groups.append(0.0)
        if len(pulses) != 2:
            raise ShapeError(f"rephasing analysis needs exactly two pulses, found {len(pulses)}")
        for p in pulses:
            if p.kind != "arp":
                raise ShapeError(f"rephasing analysis needs two full passages, found kind {p.kind!r}")
        return CanonicalShape(groups[0], groups[1], groups[2], pulses[0], pulses[1])


def rephasing_sequence(pulse_a, pulse_b, tau1, tau2, tau3, reference=None):
    return SequenceSpec((Delay(tau1), pulse_a, Delay(tau2), pulse_b, Delay(tau3)), reference)


# ---------------------------------------------------------------------------
# Composition
# ---------------------------------------------------------------------------


def square_matrix(pulse, atom):
    """Exact rotating-wave propagator of a constant-amplitude, constant-phase pulse."""
    if not (isinstance(pulse.phase, PolynomialPhase) and len(np.trim_zeros(np.asarray(pulse.phase.coeffs[1:]), "b")) == 0):
        raise DomainError("square pulse needs a constant phase")
    om = float(pulse.rabi(0.0))
    beta = np.array([om, 0.0, atom.detuning(pulse)])
    nb = np.linalg.norm(beta)
    rot = np.eye(3) if nb == 0 else rot_axis(beta, nb * pulse.duration)
    c_lo = c1_from_angle(float(pulse.carrier_angle(pulse.lo)))
    c_hi = c1_from_angle(float(pulse.carrier_angle(pulse.hi)))
    return c_hi.T @ rot @ c_lo


def pulse_matrix(pulse, atom, threshold=DEFAULT_THRESHOLD, exact_edges=False, chi=None):
    """Analytic lab-frame propagator of one pulse, chosen by ``pulse.kind``."""
    if pulse.kind == "square":
        return square_matrix(pulse, atom)
    _check_edges(pulse, atom, threshold)
    return adiabatic_matrix(pulse, atom, exact_edges=exact_edges, chi=chi)


def element_matrices(seq, atom, threshold=DEFAULT_THRESHOLD, exact_edges=False, chis=None):
    """Per-element lab-frame matrices in time order."""
    out = []
    k = 0
    for el in seq.elements:
        if isinstance(el, Delay):
            out.append(free_evolution_matrix(el.tau, atom))
        else:
            chi = None if chis is None else chis[k]
            out.append(pulse_matrix(el, atom, threshold, exact_edges, chi))
            k += 1
    return out


def compose(seq, atom, threshold=DEFAULT_THRESHOLD, exact_edges=False, chis=None):
    """Sequence propagator L, the product of element matrices right to left in time."""
    m = np.eye(3)
    for e in element_matrices(seq, atom, threshold, exact_edges, chis):
        m = e @ m
    return m


def is_z_rotation(m, tol=Z_ROTATION_TOL):
    m = np.asarray(m)
    off = max(abs(m[0, 2]), abs(m[1, 2]), abs(m[2, 0]), abs(m[2, 1]))
    return bool(abs(m[2, 2] - 1.0) <= tol and off <= tol)


# ---------------------------------------------------------------------------
# Rephasing analysis
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SequenceReport:
    L: np.ndarray
    alpha: float
    is_z_rotation: bool
    echo_time_predicted: Optional[float]
    condition_tau: bool
    tau_residual: float
    condition_chi: float
    phase_relation: float
    alpha_reduced: float
    alpha_spread: float
    alpha_independent: bool
    tau1: float
    tau2: float
    tau3: float
    detuning_grid: np.ndarray = field(repr=False)
    alpha_grid: np.ndarray = field(repr=False)
    z_angle_grid: np.ndarray = field(repr=False)

    def summary(self):
        return {
            "alpha_rad": self.alpha,
            "is_z_rotation": self.is_z_rotation,
            "echo_time_after_second_pulse_us": self.echo_time_predicted,
            "condition_tau": self.condition_tau,
            "tau_residual_us": self.tau_residual,
            "condition_chi_rad": self.condition_chi,
            "phase_relation_rad": self.phase_relation,
            "alpha_reduced_rad": self.alpha_reduced,
            "alpha_spread_rad": self.alpha_spread,
            "alpha_independent": self.alpha_independent,
            "tau_us": [self.tau1, self.tau2, self.tau3],
        }


def phase_relation(pulse_a, pulse_b):
    """phi_B(lo)+phi_B(hi) - phi_A(lo) - phi_A(hi)."""
    pa = float(pulse_a.phi(pulse_a.lo)) + float(pulse_a.phi(pulse_a.hi))
    pb = float(pulse_b.phi(pulse_b.lo)) + float(pulse_b.phi(pulse_b.hi))
    return pb - pa


def analyze_rephasing(
    seq,
    ensemble,
    threshold=DEFAULT_THRESHOLD,
    alpha_tol=ALPHA_TOL,
    grid=CONDITION_GRID,
):
    """Evaluate the rephasing conditions of a two-passage sequence over an ensemble.

    The recovered-phase angle for each sampled atom is
    ``omega_ab (tau1 - tau2 + tau3) + 2 (phi_B - phi_A)`` with phi_J the
    equatorial axis azimuth of pulse J.  It is reported at the ensemble
    centre, together with its spread over the grid.
    """
    shape = seq.canonical()
    a, b = shape.pulse_a, shape.pulse_b
    w_ref = seq.omega_ref
    det = ensemble.condition_grid(grid)
    if not np.any(np.isclose(det, ensemble.center)):
        det = np.sort(np.append(det, ensemble.center))
    i_c = int(np.argmin(np.abs(det - ensemble.center)))
    lin = shape.tau1 - shape.tau2 + shape.tau3
    alphas = np.empty(det.size)
    zang = np.empty(det.size)
    dchi = np.empty(det.size)
    z_ok = True
    L_c = None
    for i, d in enumerate(det):
        atom = AtomSpec(w_ref + d)
        chi_a = precession_angle_chi(a, atom)
        chi_b = chi_a if b == a else precession_angle_chi(b, atom)
        phi_a = equatorial_axis_phi(a, atom, threshold, chi=chi_a)
        phi_b = equatorial_axis_phi(b, atom, threshold, chi=chi_b)
        alphas[i] = wrap_angle(atom.omega_ab * lin + 2.0 * (phi_b - phi_a))
        L = compose(seq, atom, threshold, chis=(chi_a, chi_b))
        zang[i] = signed_z_angle(L)
        z_ok = z_ok and is_z_rotation(L)
        dchi[i] = abs(chi_a - chi_b)
        if i == i_c:
            L_c = L
    spread = float(np.max(np.abs(wrap_angle(alphas - alphas[i_c]))))
    rel = phase_relation(a, b)
    resid = shape.tau_residual
    echo = shape.tau2 - shape.tau1
    return SequenceReport(
        L=L_c,
        alpha=float(alphas[i_c]),
        is_z_rotation=z_ok,
        echo_time_predicted=float(echo) if echo >= 0 else None,
        condition_tau=abs(resid) <= TAU_TOL,
        tau_residual=float(resid),
        condition_chi=float(np.max(dchi)),
        phase_relation=float(rel),
        alpha_reduced=float(wrap_angle(rel)),
        alpha_spread=spread,
        alpha_independent=spread <= alpha_tol,
        tau1=shape.tau1,
        tau2=shape.tau2,
        tau3=shape.tau3,
        detuning_grid=det,
        alpha_grid=alphas,
        z_angle_grid=zang,
    )
