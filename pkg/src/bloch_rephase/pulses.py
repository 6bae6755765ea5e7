"""Pulse descriptions: Rabi envelopes, phase laws and the PulseSpec value type.

A pulse is written in the laboratory as ``A0(t) cos(omega0*t + phi(t))`` with
``t`` measured from the pulse centre ``t0``.  Envelopes and phases are small
frozen objects so that the same description can be evaluated from Python
(vectorised over ``t``) and packed into flat arrays for the compiled
integrators in :mod:`bloch_rephase._kernels`.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Tuple, Union

import numpy as np

from .errors import DomainError

# ---------------------------------------------------------------------------
# Phase laws
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PolynomialPhase:
    """phi(t) = offset + sum_k coeffs[k] * t**k."""

    coeffs: Tuple[float, ...] = (0.0,)
    offset: float = 0.0

    def value(self, t, step=None):
        return np.polynomial.polynomial.polyval(t, self.coeffs) + self.offset

    def rate(self, t, step=None):
        d = np.polynomial.polynomial.polyder(self.coeffs)
        return np.polynomial.polynomial.polyval(t, d) + 0.0 * np.asarray(t, dtype=float)

    def accel(self, t, step=None):
        d = np.polynomial.polynomial.polyder(self.coeffs, 2)
        return np.polynomial.polynomial.polyval(t, d) + 0.0 * np.asarray(t, dtype=float)

    def shifted(self, delta):
        return replace(self, offset=self.offset + delta)


def linear_chirp(rate, offset=0.0):
    """phi(t) = rate*t**2/2 + offset, i.e. instantaneous frequency rate*t."""
    return PolynomialPhase(coeffs=(0.0, 0.0, 0.5 * rate), offset=offset)


def constant_phase(offset=0.0):
    return PolynomialPhase(coeffs=(0.0,), offset=offset)


@dataclass(frozen=True, eq=False)
class SampledPhase:
    """Phase table with linear interpolation.

    Derivatives use central differences with spacing ``step`` (the pulse
    supplies ``T/4096`` when ``step`` is None).
    """

    times: np.ndarray
    values: np.ndarray
    offset: float = 0.0
    step: Optional[float] = None

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.ndim != 1 or t.shape != v.shape or t.size < 2:
            raise DomainError("sampled phase needs matching 1-D tables of length >= 2")
        if np.any(np.diff(t) <= 0):
            raise DomainError("sampled phase times must be strictly increasing")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)

    def value(self, t, step=None):
        return np.interp(t, self.times, self.values) + self.offset

    def rate(self, t, step=None):
        h = self.step or step
        return (self.value(np.asarray(t) + h) - self.value(np.asarray(t) - h)) / (2 * h)

    def accel(self, t, step=None):
        h = self.step or step
        t = np.asarray(t, dtype=float)
        return (self.value(t + h) - 2 * self.value(t) + self.value(t - h)) / (h * h)

    def shifted(self, delta):
        return replace(self, offset=self.offset + delta)


Phase = Union[PolynomialPhase, SampledPhase]

# ---------------------------------------------------------------------------
# Rabi envelopes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConstantEnvelope:
    rabi: float

    def value(self, t, phase, step=None):
        return self.rabi + 0.0 * np.asarray(t, dtype=float)

    def rate(self, t, phase, step=None):
        return 0.0 * np.asarray(t, dtype=float)


@dataclass(frozen=True)
class LorentzianEnvelope:
    """Amplitude response of a resonant circuit fed at constant current.

    Omega(t) = peak / sqrt(1 + (2*(phidot(t) - center)/bandwidth)**2), where
    ``bandwidth`` is the full width (rad/us) and ``center`` the offset of the
    circuit resonance from the carrier (rad/us).
    """

    peak: float
    bandwidth: float
    center: float = 0.0

    def value(self, t, phase, step=None):
        x = 2.0 * (phase.rate(t, step) - self.center) / self.bandwidth
        return self.peak / np.sqrt(1.0 + x * x)

    def rate(self, t, phase, step=None):
        x = 2.0 * (phase.rate(t, step) - self.center) / self.bandwidth
        dxdt = 2.0 * phase.accel(t, step) / self.bandwidth
        return -self.peak * x * dxdt / (1.0 + x * x) ** 1.5


@dataclass(frozen=True, eq=False)
class SampledEnvelope:
    """Rabi-frequency table with linear interpolation (rad/us)."""

    times: np.ndarray
    values: np.ndarray
    step: Optional[float] = None

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.ndim != 1 or t.shape != v.shape or t.size < 2:
            raise DomainError("sampled envelope needs matching 1-D tables of length >= 2")
        if np.any(np.diff(t) <= 0):
            raise DomainError("sampled envelope times must be strictly increasing")
        if np.any(v < 0):
            raise DomainError("Rabi frequency must be non-negative")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)

    def value(self, t, phase, step=None):
        return np.interp(t, self.times, self.values)

    def rate(self, t, phase, step=None):
        h = self.step or step
        t = np.asarray(t, dtype=float)
        return (self.value(t + h, phase) - self.value(t - h, phase)) / (2 * h)


Envelope = Union[ConstantEnvelope, LorentzianEnvelope, SampledEnvelope]

# ---------------------------------------------------------------------------
# PulseSpec
# ---------------------------------------------------------------------------

PULSE_KINDS = ("arp", "half_passage", "square")


@dataclass(frozen=True)
class PulseSpec:
    """One chirped or hard pulse.

    Parameters
    ----------
    envelope, phase
        Rabi envelope Omega(t) and phase law phi(t), with t local to ``t0``.
    omega0 : float
        Carrier angular frequency, rad/us.
    T : float
        Nominal duration, us.  The pulse acts on ``window`` which defaults to
        ``(-T/2, T/2)``; half passages use one half of it.
    t0 : float
        Centre instant in sequence time, us.  Reassigned when the pulse is
        placed on a :class:`~bloch_rephase.sequence.SequenceSpec` timeline.
    kind : str
        ``"arp"``, ``"half_passage"`` or ``"square"``; selects the analytic
        propagator used by :func:`bloch_rephase.sequence.compose`.
    """

    envelope: Envelope
    phase: Phase
    omega0: float
    T: float
    t0: float = 0.0
    window: Optional[Tuple[float, float]] = None
    kind: str = "arp"
    label: str = field(default="", compare=False)

    def __post_init__(self):
        if not self.T > 0:
            raise DomainError(f"pulse duration must be positive, got {self.T}")
        if self.kind not in PULSE_KINDS:
            raise DomainError(f"unknown pulse kind {self.kind!r}")
        if self.window is not None:
            lo, hi = self.window
            if not (-self.T / 2 - 1e-12 <= lo < hi <= self.T / 2 + 1e-12):
                raise DomainError(f"window {self.window} not inside [-T/2, T/2]")

    # window ---------------------------------------------------------------
    @property
    def lo(self):
        return -self.T / 2 if self.window is None else float(self.window[0])

    @property
    def hi(self):
        return self.T / 2 if self.window is None else float(self.window[1])

    @property
    def duration(self):
        return self.hi - self.lo

    @property
    def fd_step(self):
        return self.T / 4096.0

    def check_time(self, t):
        t_arr = np.asarray(t, dtype=float)
        slack = 1e-9 * self.T
        if np.any(t_arr < self.lo - slack) or np.any(t_arr > self.hi + slack):
            raise DomainError(f"t={t} outside pulse window [{self.lo}, {self.hi}]")

    # evaluation (local time) ---------------------------------------------
    def rabi(self, t):
        return self.envelope.value(t, self.phase, self.fd_step)

    def rabi_rate(self, t):
        return self.envelope.rate(t, self.phase, self.fd_step)

    def phi(self, t):
        return self.phase.value(t, self.fd_step)

    def phi_rate(self, t):
        return self.phase.rate(t, self.fd_step)

    def phi_accel(self, t):
        return self.phase.accel(t, self.fd_step)

    def carrier_angle(self, t):
        """omega0*t + phi(t), the lab-frame field phase."""
        return self.omega0 * np.asarray(t, dtype=float) + self.phi(t)

    # derived pulses --------------------------------------------------------
    def with_phase_offset(self, delta):
        return replace(self, phase=self.phase.shifted(delta))

    def at(self, t0):
        return replace(self, t0=float(t0))

    @property
    def mean_chirp_rate(self):
        """Mean of phi''(t) over the window."""
        return float((self.phi_rate(self.hi) - self.phi_rate(self.lo)) / self.duration)


def _envelope(rabi, bandwidth):
    if bandwidth is None:
        return ConstantEnvelope(rabi)
    return LorentzianEnvelope(peak=rabi, bandwidth=bandwidth)


def chirped_arp(omega0, rabi, span, T, phase_offset=0.0, bandwidth=None, label=""):
    """Linearly chirped ARP sweeping ``span`` (rad/us) across duration ``T``.

    A positive span chirps from low to high frequency.  ``bandwidth`` (rad/us)
    selects the resonant-circuit envelope; None gives a constant envelope.
    """
    return PulseSpec(
        envelope=_envelope(rabi, bandwidth),
        phase=linear_chirp(span / T, phase_offset),
        omega0=omega0,
        T=T,
        kind="arp",
        label=label,
    )


def half_passage(direction, omega0, rabi, span, T, phase_offset=0.0, bandwidth=None, label=""):
    """Adiabatic half passage cut from the ARP (omega0, rabi, span, T).

    ``direction="up"`` is the AHP: phi = r t^2/2 on [-T/2, 0], ending on
    resonance.  ``direction="down"`` is the reversed AHP: phi = -r t^2/2 on
    [0, T/2], starting on resonance and sweeping back to the same far edge.
    """
    r = span / T
    if direction == "up":
        phase, window = linear_chirp(r, phase_offset), (-T / 2, 0.0)
    elif direction == "down":
        phase, window = linear_chirp(-r, phase_offset), (0.0, T / 2)
    else:
        raise DomainError(f"direction must be 'up' or 'down', got {direction!r}")
    return PulseSpec(
        envelope=_envelope(rabi, bandwidth),
        phase=phase,
        omega0=omega0,
        T=T,
        window=window,
        kind="half_passage",
        label=label or ("AHP" if direction == "up" else "rAHP"),
    )


def square_pulse(omega0, rabi, T, phase_offset=0.0, label=""):
    """Hard pulse with constant envelope and constant phase."""
    return PulseSpec(
        envelope=ConstantEnvelope(rabi),
        phase=constant_phase(phase_offset),
        omega0=omega0,
        T=T,
        kind="square",
        label=label,
    )


def reversed_in_time(pulse):
    """Play a pulse backwards: Omega(t) -> Omega(-t), phidot(t) -> phidot(-t).

    The phase becomes -phi(-t) (constant offset kept), so a linear chirp
    changes sign and sweeps the same frequencies in the opposite order.
    Only polynomial phases with constant or Lorentzian envelopes are
    supported.
    """
    if not isinstance(pulse.phase, PolynomialPhase):
        raise DomainError("time reversal needs a polynomial phase")
    if not isinstance(pulse.envelope, (ConstantEnvelope, LorentzianEnvelope)):
        raise DomainError("time reversal needs a constant or Lorentzian envelope")
    c = np.array(pulse.phase.coeffs, dtype=float)
    c = -c * (-1.0) ** np.arange(c.size)
    window = None if pulse.window is None else (-pulse.window[1], -pulse.window[0])
    return replace(
        pulse,
        phase=PolynomialPhase(tuple(c), pulse.phase.offset),
        window=window,
    )


def describe(pulse):
    """Plain-dict summary used by the CLI reports."""
    env = pulse.envelope
    if isinstance(env, ConstantEnvelope):
        env_d = {"type": "constant", "rabi": env.rabi}
    elif isinstance(env, LorentzianEnvelope):
        env_d = {"type": "lorentzian", "peak": env.peak, "bandwidth": env.bandwidth, "center": env.center}
    else:
        env_d = {"type": "sampled", "n": int(env.times.size)}
    ph = pulse.phase
    if isinstance(ph, PolynomialPhase):
        ph_d = {"type": "polynomial", "coeffs": list(ph.coeffs), "offset": ph.offset}
    else:
        ph_d = {"type": "sampled", "n": int(ph.times.size), "offset": ph.offset}
    return {
        "label": pulse.label,
        "kind": pulse.kind,
        "t0_us": pulse.t0,
        "T_us": pulse.T,
        "window_us": [pulse.lo, pulse.hi],
        "omega0_rad_per_us": pulse.omega0,
        "envelope": env_d,
        "phase": ph_d,
    }


