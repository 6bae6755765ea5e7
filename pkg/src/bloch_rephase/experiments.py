"""Echo error metrics and the preparation/readout experiments.

Closed-form error estimates sit next to brute-force measurements that run
the same sequences through :mod:`bloch_rephase.oracle`.  The readout model
is an optical probe whose transmitted intensity is ``I0 exp(-k rho_aa)``
with ``rho_aa = (1 - w)/2`` averaged over the ensemble.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace
from typing import Optional

import numpy as np

from .core import AtomSpec
from .ensemble import NO_RELAXATION, EnsembleSpec, RelaxationSpec
from .errors import ConditionError, DomainError, ShapeError
from .oracle import DEFAULT_TOL, evolve_classes, integrate_rotating, pairwise_sum
from .pulses import PolynomialPhase, PulseSpec, half_passage, square_pulse
from .sequence import Delay, SequenceSpec
from .units import TWO_PI, wrap_angle

# carrier used by the error measurements; only detunings matter
_CARRIER = 100.0

# ---------------------------------------------------------------------------
# Closed forms
# ---------------------------------------------------------------------------


def epsilon_pi(delta, omega, tau):
    """Rephasing error of tau - pi - tau with a square pulse."""
    return np.sin(2.0 * delta * tau) * (delta / omega) ** 2


def epsilon_2pi(delta, omega, tau1, tau2):
    """Rephasing error of tau1 - pi - tau2 - pi - (tau2 - tau1)."""
    br = (
        np.sin(2.0 * delta * tau1)
        - np.sin(2.0 * delta * (tau2 - tau1))
        - 2.0 * np.sin(delta * tau2)
        + 2.0 * np.sin(delta * (tau2 - 2.0 * tau1))
    )
    return br * (delta / omega) ** 2


def epsilon_arp(delta, r):
    """Rephasing error of tau - ARP - tau for a linear chirp of rate r."""
    return np.square(delta) / r


def epsilon_inversion_pi(delta, omega):
    """Small-detuning polar-angle error of a square pi pulse used for inversion."""
    return 2.0 * delta / omega


# ---------------------------------------------------------------------------
# Measurements with the integrator
# ---------------------------------------------------------------------------


def equatorial_error(test, resonant):
    """Counter-clockwise angle from the resonant atom's equatorial projection to the test atom's."""
    return float(
        np.arctan2(resonant[0] * test[1] - resonant[1] * test[0], resonant[0] * test[0] + resonant[1] * test[1])
    )


def polar_error(b, target=(0.0, 0.0, -1.0)):
    """Angle between ``b`` and the target direction."""
    b = np.asarray(b, dtype=float)
    c = np.dot(b, target) / np.linalg.norm(b)
    return float(np.arccos(np.clip(c, -1.0, 1.0)))


def _phase_locked(elements, omega_ref):
    """Offset each pulse's phase so its field axis sits at u in the reference frame."""
    seq = SequenceSpec(tuple(elements), omega_ref)
    out = []
    for el, (_, _, placed) in zip(seq.elements, seq.timeline()):
        if isinstance(el, PulseSpec):
            el = el.with_phase_offset(math.fmod(omega_ref * placed.t0, TWO_PI))
        out.append(el)
    return SequenceSpec(tuple(out), omega_ref)


def _echo_pair(seq, delta, b0, tol):
    ref = seq.omega_ref
    test = integrate_rotating(seq, AtomSpec(ref + delta), b0, tol=tol, samples=2).final
    res = integrate_rotating(seq, AtomSpec(ref), b0, tol=tol, samples=2).final
    return test, res


_V = (0.0, 1.0, 0.0)


def measure_epsilon_pi(delta, omega, tau, tol=DEFAULT_TOL):
    p = square_pulse(_CARRIER, omega, math.pi / omega)
    seq = _phase_locked((Delay(tau), p, Delay(tau)), _CARRIER)
    return equatorial_error(*_echo_pair(seq, delta, _V, tol))


def measure_epsilon_2pi(delta, omega, tau1, tau2, same_axis=True, tol=DEFAULT_TOL):
    if tau1 > tau2:
        raise ConditionError("tau1 must not exceed tau2")
    p1 = square_pulse(_CARRIER, omega, math.pi / omega)
    p2 = p1 if same_axis else p1.with_phase_offset(math.pi)
    seq = _phase_locked((Delay(tau1), p1, Delay(tau2), p2, Delay(tau2 - tau1)), _CARRIER)
    return equatorial_error(*_echo_pair(seq, delta, _V, tol))


def measure_epsilon_arp(delta, pulse, tau, tol=DEFAULT_TOL):
    """tau - ARP - tau with ``pulse`` re-centred on the measurement carrier."""
    p = PulseSpec(pulse.envelope, pulse.phase, _CARRIER, pulse.T, kind=pulse.kind)
    seq = _phase_locked((Delay(tau), p, Delay(tau)), _CARRIER)
    return equatorial_error(*_echo_pair(seq, delta, _V, tol))


def measure_inversion_pi(delta, omega, tol=DEFAULT_TOL):
    p = square_pulse(_CARRIER, omega, math.pi / omega)
    tr = integrate_rotating(p, AtomSpec(_CARRIER + delta), (0.0, 0.0, 1.0), tol=tol, samples=2)
    return polar_error(tr.final)


def measure_inversion_arp(delta, pulse, tol=DEFAULT_TOL):
    p = PulseSpec(pulse.envelope, pulse.phase, _CARRIER, pulse.T, kind=pulse.kind)
    tr = integrate_rotating(p, AtomSpec(_CARRIER + delta), (0.0, 0.0, 1.0), tol=tol, samples=2)
    return polar_error(tr.final)


@dataclass(frozen=True)
class EchoErrorReport:
    delta: float
    omega: float
    r: float
    tau: float
    tau1: float
    tau2: float
    eps_pi: float
    eps_2pi: float
    eps_arp: float
    eps_inversion_pi: float
    eps_inversion_arp: float = 0.0
    measured: Optional[dict] = None

    def __post_init__(self):
        for k in ("eps_pi", "eps_2pi", "eps_arp", "eps_inversion_pi", "eps_inversion_arp"):
            if not math.isfinite(getattr(self, k)):
                raise DomainError(f"{k} is not finite")


def echo_error_report(delta, omega, r, tau, tau1, tau2, arp_pulse=None, tol=DEFAULT_TOL):
    """Closed-form errors, plus integrator measurements when ``arp_pulse`` is given.

    The inversion error of an ARP is zero by construction under the
    validity preconditions; the measured value, if requested, is the
    polar-angle deviation left by imperfect adiabaticity.
    """
    if not (omega > 0 and r > 0):
        raise DomainError("omega and r must be positive")
    measured = None
    if arp_pulse is not None:
        measured = {
            "eps_pi": measure_epsilon_pi(delta, omega, tau, tol),
            "eps_2pi": measure_epsilon_2pi(delta, omega, tau1, tau2, tol=tol),
            "eps_arp": measure_epsilon_arp(delta, arp_pulse, tau, tol),
            "eps_inversion_pi": measure_inversion_pi(delta, omega, tol),
            "eps_inversion_arp": measure_inversion_arp(delta, arp_pulse, tol),
        }
    return EchoErrorReport(
        delta=float(delta),
        omega=float(omega),
        r=float(r),
        tau=float(tau),
        tau1=float(tau1),
        tau2=float(tau2),
        eps_pi=float(epsilon_pi(delta, omega, tau)),
        eps_2pi=float(epsilon_2pi(delta, omega, tau1, tau2)),
        eps_arp=float(epsilon_arp(delta, r)),
        eps_inversion_pi=float(epsilon_inversion_pi(delta, omega)),
        measured=measured,
    )


def loglog_slope(x, y):
    """Least-squares slope of log|y| against log|x|."""
    x, y = np.abs(np.asarray(x, dtype=float)), np.abs(np.asarray(y, dtype=float))
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


# ---------------------------------------------------------------------------
# Preparation / readout
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ProbeModel:
    I0: float = 1.0
    k: float = 3.0

    def __post_init__(self):
        if not self.I0 > 0:
            raise DomainError("I0 must be positive")
        if not self.k >= 0:
            raise DomainError("k must be non-negative")

    def intensity(self, rho_aa):
        return self.I0 * np.exp(-self.k * np.asarray(rho_aa))


@dataclass(frozen=True)
class ReadoutPoint:
    rho_aa_initial: float
    rho_aa_final: float
    I_i: float
    I_f: float
    mean_final: np.ndarray

    @property
    def ratio(self):
        return self.I_f / self.I_i


@dataclass(frozen=True)
class ScanResult:
    variable: str
    unit: str
    values: np.ndarray
    I_i: np.ndarray
    I_f: np.ndarray
    mean_finals: np.ndarray = field(repr=False)
    alpha_hat: Optional[float] = None
    metadata: dict = field(default_factory=dict, repr=False)

    @property
    def ratio(self):
        return self.I_f / self.I_i

    def write_csv(self, fh):
        import csv

        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"scan_value_{self.unit}", "I_i_arb", "I_f_arb", "ratio", "alpha_hat_rad"])
        ah = "" if self.alpha_hat is None else repr(float(self.alpha_hat))
        for v, a, b, r in zip(self.values, self.I_i, self.I_f, self.ratio):
            w.writerow([repr(float(v)), repr(float(a)), repr(float(b)), repr(float(r)), ah])

    def sidecar(self):
        meta = dict(self.metadata)
        meta.update(variable=self.variable, unit=self.unit, n_points=int(len(self.values)))
        if self.alpha_hat is not None:
            meta["alpha_hat_rad"] = float(self.alpha_hat)
        return meta

    def write_sidecar(self, fh):
        json.dump(self.sidecar(), fh, indent=2, sort_keys=True, default=_jsonable)
        fh.write("\n")


def _jsonable(x):
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if hasattr(x, "__dataclass_fields__"):
        return asdict(x)
    return str(x)


def readout_half_passages(omega0, rabi, span, T, bandwidth=None):
    """AHP/rAHP pair cut from the ARP (omega0, rabi, span, T)."""
    return (
        half_passage("up", omega0, rabi, span, T, bandwidth=bandwidth),
        half_passage("down", omega0, rabi, span, T, bandwidth=bandwidth),
    )


def half_passages_of(pulse):
    """AHP/rAHP pair cut from a polynomial-phase full passage, phase offset dropped.

    The AHP is the first half of ``pulse``; the rAHP runs the second half
    with the phase polynomial negated, so it sweeps from resonance back to
    the edge the AHP started from.
    """
    if pulse.kind != "arp" or not isinstance(pulse.phase, PolynomialPhase):
        raise ShapeError("readout passages need a polynomial-phase full passage")
    mid = 0.5 * (pulse.lo + pulse.hi)
    coeffs = tuple(pulse.phase.coeffs)
    up = replace(pulse, phase=PolynomialPhase(coeffs), window=(pulse.lo, mid), kind="half_passage", label="AHP")
    down = replace(
        pulse,
        phase=PolynomialPhase(tuple(-c for c in coeffs)),
        window=(mid, pulse.hi),
        kind="half_passage",
        label="rAHP",
    )
    return up, down


def _pipeline(core_seq, ahp, rahp):
    els = (ahp,) + tuple(core_seq.elements) + (rahp,)
    ref = core_seq.reference if core_seq.reference is not None else ahp.omega0
    return SequenceSpec(els, ref)


def _weighted_mean(w, finals):
    return pairwise_sum(w[:, None] * finals)


class _Prepared:
    """Ensemble state just before the readout passage."""

    def __init__(self, core_seq, ahp, rahp, ensemble, relax, tol):
        self.pipe = _pipeline(core_seq, ahp, rahp)
        self.ref = self.pipe.omega_ref
        tl = self.pipe.timeline()
        self.prefix, self.last = tl[:-1], tl[-1]
        self.det, self.wts = ensemble.classes()
        self.relax, self.tol = relax, tol
        self.y_pre, _ = evolve_classes(self.prefix, self.ref, self.det, np.array([0.0, 0.0, 1.0]), tol, relax)

    def readout(self, delta_offset):
        t_a, t_b, placed = self.last
        suffix = [(t_a, t_b, placed.with_phase_offset(delta_offset))]
        finals, _ = evolve_classes(suffix, self.ref, self.det, self.y_pre, self.tol, self.relax)
        return finals


def _point(finals, wts, probe):
    mean = _weighted_mean(wts, finals)
    rho_i = 0.0  # B0 = +w
    rho_f = 0.5 * (1.0 - float(mean[2]))
    return ReadoutPoint(rho_i, rho_f, float(probe.intensity(rho_i)), float(probe.intensity(rho_f)), mean)


def run_preparation_readout(
    core_seq,
    ahp,
    rahp,
    delta_offset=0.0,
    ensemble=None,
    relax=NO_RELAXATION,
    probe=ProbeModel(),
    tol=DEFAULT_TOL,
):
    """B0 = +w -> AHP -> core sequence -> rAHP (phase-shifted by ``delta_offset``)."""
    ensemble = ensemble or EnsembleSpec.single()
    prep = _Prepared(core_seq, ahp, rahp, ensemble, relax, tol)
    return _point(prep.readout(delta_offset), prep.wts, probe)


def fit_cosine_peak(x, y):
    """Least-squares fit y = a + b cos(x - x0) with b >= 0; returns x0 in (-pi, pi]."""
    x = np.asarray(x, dtype=float)
    A = np.column_stack([np.ones_like(x), np.cos(x), np.sin(x)])
    c, *_ = np.linalg.lstsq(A, np.asarray(y, dtype=float), rcond=None)
    return float(wrap_angle(np.arctan2(c[2], c[1])))


def _meta(core_seq, ahp, rahp, ensemble, relax, probe, tol):
    from .pulses import describe

    return {
        "core_elements": [
            {"delay_us": el.tau} if isinstance(el, Delay) else describe(el) for el in core_seq.elements
        ],
        "ahp": describe(ahp),
        "rahp": describe(rahp),
        "ensemble": asdict(ensemble),
        "relaxation": {"T2_us": relax.T2, "T1_us": relax.T1, "w_eq": relax.w_eq},
        "probe": asdict(probe),
        "tol": tol,
    }


def phase_scan(
    deltas,
    core_seq,
    ahp,
    rahp,
    ensemble=None,
    relax=NO_RELAXATION,
    probe=ProbeModel(),
    tol=DEFAULT_TOL,
):
    """I_f/I_i as a function of the readout phase offset.

    ``alpha_hat`` is the peak of a cosine fit; the best readout phase equals
    the net z-rotation angle of the core sequence.
    """
    ensemble = ensemble or EnsembleSpec.single()
    deltas = np.asarray(deltas, dtype=float)
    prep = _Prepared(core_seq, ahp, rahp, ensemble, relax, tol)
    pts = [_point(prep.readout(d), prep.wts, probe) for d in deltas]
    res = _collect("delta", "rad", deltas, pts, _meta(core_seq, ahp, rahp, ensemble, relax, probe, tol))
    alpha = fit_cosine_peak(deltas, res.ratio) if deltas.size >= 3 else None
    return ScanResult(res.variable, res.unit, res.values, res.I_i, res.I_f, res.mean_finals, alpha, res.metadata)


def _collect(var, unit, values, pts, meta):
    return ScanResult(
        variable=var,
        unit=unit,
        values=np.asarray(values, dtype=float),
        I_i=np.array([p.I_i for p in pts]),
        I_f=np.array([p.I_f for p in pts]),
        mean_finals=np.array([p.mean_final for p in pts]),
        metadata=meta,
    )


def tau_scan(
    tau1_values,
    tau2,
    pulse_a,
    pulse_b,
    ahp,
    rahp,
    ensemble=None,
    relax=NO_RELAXATION,
    probe=ProbeModel(),
    tol=DEFAULT_TOL,
    delta_offset=0.0,
    tau3_offset=0.0,
):
    """Readout ratio for each tau1 with tau3 = tau2 - tau1 (+ ``tau3_offset``)."""
    ensemble = ensemble or EnsembleSpec.single()
    pts = []
    core = None
    for t1 in tau1_values:
        if t1 > tau2:
            raise ConditionError(f"tau1={t1} exceeds tau2={tau2}; tau3 would be negative")
        tau3 = tau2 - t1 + tau3_offset
        if tau3 < 0:
            raise ConditionError(f"tau3={tau3} is negative")
        core = SequenceSpec((Delay(t1), pulse_a, Delay(tau2), pulse_b, Delay(tau3)))
        prep = _Prepared(core, ahp, rahp, ensemble, relax, tol)
        pts.append(_point(prep.readout(delta_offset), prep.wts, probe))
    meta = _meta(core, ahp, rahp, ensemble, relax, probe, tol)
    meta.update(tau2_us=tau2, tau3_offset_us=tau3_offset, delta_offset_rad=delta_offset)
    return _collect("tau1", "us", tau1_values, pts, meta)


__all__ = [
    "EchoErrorReport",
    "ProbeModel",
    "ReadoutPoint",
    "RelaxationSpec",
    "ScanResult",
    "echo_error_report",
    "epsilon_2pi",
    "epsilon_arp",
    "epsilon_inversion_pi",
    "epsilon_pi",
    "equatorial_error",
    "fit_cosine_peak",
    "loglog_slope",
    "measure_epsilon_2pi",
    "measure_epsilon_arp",
    "measure_epsilon_pi",
    "measure_inversion_arp",
    "measure_inversion_pi",
    "phase_scan",
    "polar_error",
    "run_preparation_readout",
    "readout_half_passages",
    "half_passages_of",
    "tau_scan",
]
