"""Brute-force integration of the Bloch precession equation.

This is the independent check on the analytic propagators: it knows nothing
about adiabatic following, frame reductions or precession angles, only the
control vector as a function of time.

Rotating-frame runs use a single frame turning at ``omega_ref`` whose angle
is zero at t = 0, so a lab vector is recovered as ``rot_z(omega_ref t) @ B``.
Lab-frame runs keep the full oscillating field (no rotating-wave
approximation) and are only practical for scaled-down carriers.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .core import AtomSpec, BlochVector, rot_z
from .ensemble import NO_RELAXATION, EnsembleSpec
from .errors import DomainError
from .pulses import PulseSpec
from .sequence import SequenceSpec

DEFAULT_TOL = 1e-10
TOL_RANGE = (1e-13, 1e-6)
DEFAULT_SAMPLES = 201


def _check_tol(tol):
    if not TOL_RANGE[0] <= tol <= TOL_RANGE[1]:
        raise DomainError(f"tolerance {tol} outside [{TOL_RANGE[0]}, {TOL_RANGE[1]}]")


def _as_array(b0):
    if isinstance(b0, BlochVector):
        return b0.as_array()
    return np.asarray(b0, dtype=float)


def _timeline(obj, omega_ref):
    if isinstance(obj, PulseSpec):
        tl = [(obj.lo + obj.t0, obj.hi + obj.t0, obj)]
        ref = obj.omega0 if omega_ref is None else omega_ref
    elif isinstance(obj, SequenceSpec):
        tl = obj.timeline()
        ref = obj.omega_ref if omega_ref is None else omega_ref
    else:
        tl = list(obj)
        if omega_ref is None:
            raise DomainError("omega_ref is required for a raw timeline")
        ref = omega_ref
    if not tl:
        tl = [(0.0, 0.0, None)]
    return tl, float(ref)


def _sample_grid(t0, t1, samples, sample_times):
    if sample_times is not None:
        return np.asarray(sample_times, dtype=float)
    return np.linspace(t0, t1, max(int(samples), 2))


def pairwise_sum(a):
    """Sum along axis 0 by recursive halving (order fixed by index)."""
    a = np.asarray(a)
    n = a.shape[0]
    if n <= 8:
        out = a[0].copy()
        for i in range(1, n):
            out = out + a[i]
        return out
    h = n // 2
    return pairwise_sum(a[:h]) + pairwise_sum(a[h:])


@dataclass(frozen=True)
class Trajectory:
    """Sampled Bloch vectors of one class (or of an ensemble mean).

    ``frame`` is ``"rotating"`` (reference frame at ``omega_ref``) or ``"lab"``.
    """

    times: np.ndarray
    states: np.ndarray = field(repr=False)
    final: np.ndarray
    frame: str
    omega_ref: float
    t_end: float

    def to_lab(self):
        if self.frame == "lab":
            return self
        states = _ref_to_lab(self.times, self.states, self.omega_ref)
        final = rot_z(self.omega_ref * self.t_end) @ self.final
        return Trajectory(self.times, states, final, "lab", self.omega_ref, self.t_end)

    @property
    def final_lab(self):
        return self.to_lab().final

    def bloch(self, i=-1):
        return BlochVector.from_array(self.states[i])

    def norms(self):
        return np.linalg.norm(self.states, axis=1)

    def write_csv(self, fh, class_index=None):
        write_trajectory_csv(fh, self.times, self.states, class_index)


def _ref_to_lab(times, states, omega_ref):
    a = omega_ref * times
    c, s = np.cos(a), np.sin(a)
    out = np.empty_like(states)
    out[..., 0] = c * states[..., 0] - s * states[..., 1]
    out[..., 1] = s * states[..., 0] + c * states[..., 1]
    out[..., 2] = states[..., 2]
    return out


def write_trajectory_csv(fh, times, states, class_index=None):
    """CSV with columns t_us,u,v,w (plus class_index for per-class dumps)."""
    w = csv.writer(fh, lineterminator="\n")
    states = np.asarray(states)
    if states.ndim == 2:
        w.writerow(["t_us", "u", "v", "w"] + ([] if class_index is None else ["class_index"]))
        for t, s in zip(times, states):
            row = [repr(float(t))] + [repr(float(x)) for x in s]
            w.writerow(row + ([] if class_index is None else [int(class_index)]))
    else:
        w.writerow(["class_index", "t_us", "u", "v", "w"])
        for k, cls in enumerate(states):
            for t, s in zip(times, cls):
                w.writerow([k, repr(float(t))] + [repr(float(x)) for x in s])


def evolve_classes(
    timeline,
    omega_ref,
    detunings,
    y0,
    tol=DEFAULT_TOL,
    relax=NO_RELAXATION,
    sample_times=(),
    lab=False,
):
    """Integrate every detuning class over ``timeline``.

    ``detunings`` are omega_ab - omega_ref.  ``y0`` is the initial state in
    the integration frame, either one vector or one per class.  Returns
    ``(finals, samples)`` in that same frame.
    """
    _check_tol(tol)
    segs, data = _kernels.pack_timeline(timeline, omega_ref)
    dz = np.asarray(detunings, dtype=float)
    mode = _kernels.MODE_ROTATING
    if lab:
        if relax.enabled:
            raise DomainError("relaxation is only defined in the rotating frame")
        dz = dz + omega_ref
        mode = _kernels.MODE_LAB
    finals, samples, _ = _kernels.integrate_batch(
        segs, data, mode, dz, omega_ref, relax.rates(), y0, tol, np.asarray(sample_times, dtype=float)
    )
    return finals, samples


def integrate_rotating(
    seq,
    atom,
    b0,
    tol=DEFAULT_TOL,
    relax=NO_RELAXATION,
    samples=DEFAULT_SAMPLES,
    sample_times=None,
    omega_ref=None,
):
    """Rotating-wave integration of one class through a pulse or sequence.

    ``b0`` is the lab-frame state at the start of the timeline.  The
    trajectory is returned in the reference frame; use ``to_lab`` for lab
    coordinates.
    """
    tl, ref = _timeline(seq, omega_ref)
    t_start, t_end = tl[0][0], tl[-1][1]
    ts = _sample_grid(t_start, t_end, samples, sample_times)
    y0 = rot_z(-ref * t_start) @ _as_array(b0)
    finals, smp = evolve_classes(tl, ref, [atom.omega_ab - ref], y0, tol, relax, ts)
    return Trajectory(ts, smp[0], finals[0], "rotating", ref, t_end)


def integrate_lab(
    pulse,
    atom,
    b0,
    tol=DEFAULT_TOL,
    samples=DEFAULT_SAMPLES,
    sample_times=None,
):
    """Full-field integration without the rotating-wave approximation."""
    tl, ref = _timeline(pulse, None)
    t_start, t_end = tl[0][0], tl[-1][1]
    ts = _sample_grid(t_start, t_end, samples, sample_times)
    finals, smp = evolve_classes(tl, ref, [atom.omega_ab - ref], _as_array(b0), tol, NO_RELAXATION, ts, lab=True)
    return Trajectory(ts, smp[0], finals[0], "lab", ref, t_end)


@dataclass(frozen=True)
class EnsembleResult:
    mean: Trajectory
    detunings: np.ndarray
    weights: np.ndarray
    class_finals: np.ndarray = field(repr=False)
    class_states: np.ndarray = field(repr=False)

    def mean_final_lab(self):
        return self.mean.final_lab

    def class_finals_lab(self):
        return (rot_z(self.mean.omega_ref * self.mean.t_end) @ self.class_finals.T).T


def ensemble_evolve(
    seq,
    ensemble,
    b0,
    tol=DEFAULT_TOL,
    relax=NO_RELAXATION,
    samples=DEFAULT_SAMPLES,
    sample_times=None,
    omega_ref=None,
):
    """Integrate each class of ``ensemble`` and reduce to a weighted mean.

    Detunings of the ensemble are taken relative to the reference carrier.
    """
    if not isinstance(ensemble, EnsembleSpec):
        raise DomainError("ensemble must be an EnsembleSpec")
    tl, ref = _timeline(seq, omega_ref)
    det, wts = ensemble.classes()
    if np.any(ref + det <= 0):
        raise DomainError("ensemble reaches non-positive transition frequencies")
    t_start, t_end = tl[0][0], tl[-1][1]
    ts = _sample_grid(t_start, t_end, samples, sample_times)
    y0 = rot_z(-ref * t_start) @ _as_array(b0)
    finals, smp = evolve_classes(tl, ref, det, y0, tol, relax, ts)
    mean_states = pairwise_sum(wts[:, None, None] * smp)
    mean_final = pairwise_sum(wts[:, None] * finals)
    mean = Trajectory(ts, mean_states, mean_final, "rotating", ref, t_end)
    return EnsembleResult(mean, det, wts, finals, smp)


def single_class(seq, detuning, b0, **kw):
    """Convenience: one class at ``detuning`` from the reference carrier."""
    tl, ref = _timeline(seq, kw.pop("omega_ref", None))
    return integrate_rotating(seq, AtomSpec(ref + detuning), b0, omega_ref=ref, **kw)


def coherence_time(traj):
    """Time integral of the squared equatorial fraction (u^2+v^2)/|B|^2."""
    s = traj.states
    n2 = np.sum(s * s, axis=1)
    frac = np.where(n2 > 0, (s[:, 0] ** 2 + s[:, 1] ** 2) / np.where(n2 > 0, n2, 1.0), 0.0)
    return float(np.trapezoid(frac, traj.times))
