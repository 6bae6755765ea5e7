"""Scalar pulse evaluation and the Bloch right-hand side.

Written in the numba-compatible subset; with numba absent these are plain
Python functions and the numpy backend calls them directly.
"""

import math

from ._jit import njit
from .layout import (
    ENV_A,
    ENV_B,
    ENV_C,
    ENV_CONST,
    ENV_KIND,
    ENV_LORENTZ,
    ENV_N,
    ENV_OFF,
    IS_PULSE,
    MODE_LAB,
    OMEGA0,
    PH_KIND,
    PH_N,
    PH_OFF,
    PH_OFFSET,
    PH_POLY,
    PH_STEP,
    PSI_CONST,
    T0,
)


@njit
def interp_table(data, off, n, x):
    # times at data[off:off+n], values at data[off+n:off+2n]; clamped ends
    if x <= data[off]:
        return data[off + n]
    if x >= data[off + n - 1]:
        return data[off + 2 * n - 1]
    lo = 0
    hi = n - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if data[off + mid] <= x:
            lo = mid
        else:
            hi = mid
    t0 = data[off + lo]
    f = (x - t0) / (data[off + hi] - t0)
    return data[off + n + lo] * (1.0 - f) + data[off + n + hi] * f


@njit
def phase_value(seg, data, tau):
    off = int(seg[PH_OFF])
    n = int(seg[PH_N])
    if int(seg[PH_KIND]) == PH_POLY:
        acc = 0.0
        for k in range(n - 1, -1, -1):
            acc = acc * tau + data[off + k]
        return acc + seg[PH_OFFSET]
    return interp_table(data, off, n, tau) + seg[PH_OFFSET]


@njit
def phase_rate(seg, data, tau):
    off = int(seg[PH_OFF])
    n = int(seg[PH_N])
    if int(seg[PH_KIND]) == PH_POLY:
        acc = 0.0
        for k in range(n - 1, 0, -1):
            acc = acc * tau + k * data[off + k]
        return acc
    h = seg[PH_STEP]
    return (interp_table(data, off, n, tau + h) - interp_table(data, off, n, tau - h)) / (2.0 * h)


@njit
def rabi_value(seg, data, tau):
    kind = int(seg[ENV_KIND])
    if kind == ENV_CONST:
        return seg[ENV_A]
    if kind == ENV_LORENTZ:
        x = 2.0 * (phase_rate(seg, data, tau) - seg[ENV_C]) / seg[ENV_B]
        return seg[ENV_A] / math.sqrt(1.0 + x * x)
    return interp_table(data, int(seg[ENV_OFF]), int(seg[ENV_N]), tau)


@njit
def control(mode, seg, data, t, dz, omega_ref):
    """Control vector (bx, by, bz) at sequence time ``t``.

    Rotating mode works in the frame turning at ``omega_ref`` with zero angle
    at t = 0 (``dz`` = omega_ab - omega_ref).  Lab mode keeps the full
    oscillating field (``dz`` = omega_ab).
    """
    if seg[IS_PULSE] == 0.0:
        return 0.0, 0.0, dz
    tau = t - seg[T0]
    om = rabi_value(seg, data, tau)
    phi = phase_value(seg, data, tau)
    if mode == MODE_LAB:
        a = seg[OMEGA0] * tau + phi
        return 2.0 * om * math.cos(a), 0.0, dz
    psi = (seg[OMEGA0] - omega_ref) * tau + phi + seg[PSI_CONST]
    return om * math.cos(psi), om * math.sin(psi), dz


@njit
def bloch_rhs(mode, seg, data, t, dz, omega_ref, inv_t2, inv_t1, w_eq, y0, y1, y2):
    bx, by, bz = control(mode, seg, data, t, dz, omega_ref)
    f0 = by * y2 - bz * y1 - inv_t2 * y0
    f1 = bz * y0 - bx * y2 - inv_t2 * y1
    f2 = bx * y1 - by * y0 - inv_t1 * (y2 - w_eq)
    return f0, f1, f2
