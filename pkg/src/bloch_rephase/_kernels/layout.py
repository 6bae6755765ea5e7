"""Flat array layout of a pulse/delay timeline for the integrators.

Each timeline segment is one row of a float64 table; sampled envelope and
phase tables and polynomial coefficients live in a shared ``data`` buffer
addressed by (offset, length) columns.
"""

import math

import numpy as np

from ..pulses import (
    ConstantEnvelope,
    LorentzianEnvelope,
    PolynomialPhase,
    SampledEnvelope,
    SampledPhase,
)

T_START = 0
T_END = 1
IS_PULSE = 2
T0 = 3
OMEGA0 = 4
PSI_CONST = 5
ENV_KIND = 6
ENV_A = 7
ENV_B = 8
ENV_C = 9
ENV_OFF = 10
ENV_N = 11
ENV_STEP = 12
PH_KIND = 13
PH_OFFSET = 14
PH_OFF = 15
PH_N = 16
PH_STEP = 17
NCOL = 18

ENV_CONST = 0
ENV_LORENTZ = 1
ENV_TABLE = 2

PH_POLY = 0
PH_TABLE = 1

MODE_ROTATING = 0
MODE_LAB = 1


class _Buffer:
    def __init__(self):
        self.chunks = []
        self.size = 0

    def add(self, *arrays):
        off = self.size
        for a in arrays:
            a = np.asarray(a, dtype=float).ravel()
            self.chunks.append(a)
            self.size += a.size
        return off

    def array(self):
        if not self.chunks:
            return np.zeros(1)
        return np.concatenate(self.chunks)


def _pack_pulse(row, pulse, buf):
    env = pulse.envelope
    if isinstance(env, ConstantEnvelope):
        row[ENV_KIND], row[ENV_A] = ENV_CONST, env.rabi
    elif isinstance(env, LorentzianEnvelope):
        row[ENV_KIND], row[ENV_A], row[ENV_B], row[ENV_C] = ENV_LORENTZ, env.peak, env.bandwidth, env.center
    elif isinstance(env, SampledEnvelope):
        row[ENV_KIND] = ENV_TABLE
        row[ENV_OFF] = buf.add(env.times, env.values)
        row[ENV_N] = env.times.size
    else:
        raise TypeError(f"cannot pack envelope {type(env).__name__}")
    row[ENV_STEP] = getattr(env, "step", None) or pulse.fd_step

    ph = pulse.phase
    row[PH_OFFSET] = ph.offset
    if isinstance(ph, PolynomialPhase):
        row[PH_KIND] = PH_POLY
        row[PH_OFF] = buf.add(ph.coeffs)
        row[PH_N] = len(ph.coeffs)
    elif isinstance(ph, SampledPhase):
        row[PH_KIND] = PH_TABLE
        row[PH_OFF] = buf.add(ph.times, ph.values)
        row[PH_N] = ph.times.size
    else:
        raise TypeError(f"cannot pack phase {type(ph).__name__}")
    row[PH_STEP] = ph.step if getattr(ph, "step", None) else pulse.fd_step


def pack_timeline(timeline, omega_ref):
    """Pack ``[(t_start, t_end, pulse_or_None), ...]`` into (segments, data).

    ``pulse.t0`` must already be the absolute centre instant.  The constant
    part of the rotating-frame field angle, -omega_ref*t0, is reduced mod 2pi
    here so the kernels never handle large phases.
    """
    buf = _Buffer()
    segs = np.zeros((max(len(timeline), 1), NCOL))
    for i, (t_start, t_end, pulse) in enumerate(timeline):
        row = segs[i]
        row[T_START], row[T_END] = t_start, t_end
        if pulse is None:
            continue
        row[IS_PULSE] = 1.0
        row[T0] = pulse.t0
        row[OMEGA0] = pulse.omega0
        row[PSI_CONST] = -math.fmod(omega_ref * pulse.t0, 2.0 * math.pi)
        _pack_pulse(row, pulse, buf)
    if not timeline:
        segs[0, T_START] = segs[0, T_END] = 0.0
    return segs, buf.array()
