"""Per-class Dormand-Prince 5(4) integration, parallel over frequency classes."""

import numpy as np

from ._jit import njit, prange
from .layout import T_END, T_START
from .scalar import bloch_rhs

# Dormand-Prince 5(4) tableau
C2, C3, C4, C5 = 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0
A21 = 1.0 / 5.0
A31, A32 = 3.0 / 40.0, 9.0 / 40.0
A41, A42, A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
A51, A52, A53, A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
A61, A62, A63, A64, A65 = 9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0
B1, B3, B4, B5, B6 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
E1, E3, E4, E5, E6, E7 = (
    71.0 / 57600.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
)
# continuous extension (Hairer & Wanner, dopri5 contd5)
D1 = -12715105075.0 / 11282082432.0
D3 = 87487479700.0 / 32700410799.0
D4 = -10690763975.0 / 1880347072.0
D5 = 701980252875.0 / 199316789632.0
D6 = -1453857185.0 / 822651844.0
D7 = 69997945.0 / 29380423.0

STATUS_OK = 0
STATUS_UNDERFLOW = 1
STATUS_MAX_STEPS = 2

SAFETY = 0.9
FAC_MIN = 0.2
FAC_MAX = 5.0


@njit
def integrate_one(segs, data, mode, dz, omega_ref, inv_t2, inv_t1, w_eq, y_init, tol, sample_times, out, max_steps):
    """Integrate one class through every segment; fill ``out`` at sample times.

    Returns (final state, status, accepted steps).
    """
    ns = sample_times.shape[0]
    y = np.empty(3)
    y[0], y[1], y[2] = y_init[0], y_init[1], y_init[2]
    k = 0
    t = segs[0, T_START]
    while k < ns and sample_times[k] <= t:
        out[k, 0], out[k, 1], out[k, 2] = y[0], y[1], y[2]
        k += 1
    h = 0.0
    steps = 0
    status = STATUS_OK
    for s in range(segs.shape[0]):
        seg = segs[s]
        t = seg[T_START]
        t_end = seg[T_END]
        if t_end <= t:
            continue
        k10, k11, k12 = bloch_rhs(mode, seg, data, t, dz, omega_ref, inv_t2, inv_t1, w_eq, y[0], y[1], y[2])
        if h <= 0.0:
            rate = np.sqrt(k10 * k10 + k11 * k11 + k12 * k12) + 1.0 / (t_end - t)
            h = 0.2 * tol**0.2 / rate
        while t < t_end:
            last = False
            if t + h >= t_end:
                h_use = t_end - t
                last = True
            else:
                h_use = h
            y0, y1, y2 = y[0], y[1], y[2]
            k20, k21, k22 = bloch_rhs(mode, seg, data, t + C2 * h_use, dz, omega_ref, inv_t2, inv_t1, w_eq,
                                      y0 + h_use * A21 * k10,
                                      y1 + h_use * A21 * k11,
                                      y2 + h_use * A21 * k12)
            k30, k31, k32 = bloch_rhs(mode, seg, data, t + C3 * h_use, dz, omega_ref, inv_t2, inv_t1, w_eq,
                                      y0 + h_use * (A31 * k10 + A32 * k20),
                                      y1 + h_use * (A31 * k11 + A32 * k21),
                                      y2 + h_use * (A31 * k12 + A32 * k22))
            k40, k41, k42 = bloch_rhs(mode, seg, data, t + C4 * h_use, dz, omega_ref, inv_t2, inv_t1, w_eq,
                                      y0 + h_use * (A41 * k10 + A42 * k20 + A43 * k30),
                                      y1 + h_use * (A41 * k11 + A42 * k21 + A43 * k31),
                                      y2 + h_use * (A41 * k12 + A42 * k22 + A43 * k32))
            k50, k51, k52 = bloch_rhs(mode, seg, data, t + C5 * h_use, dz, omega_ref, inv_t2, inv_t1, w_eq,
                                      y0 + h_use * (A51 * k10 + A52 * k20 + A53 * k30 + A54 * k40),
                                      y1 + h_use * (A51 * k11 + A52 * k21 + A53 * k31 + A54 * k41),
                                      y2 + h_use * (A51 * k12 + A52 * k22 + A53 * k32 + A54 * k42))
            k60, k61, k62 = bloch_rhs(mode, seg, data, t + h_use, dz, omega_ref, inv_t2, inv_t1, w_eq,
                                      y0 + h_use * (A61 * k10 + A62 * k20 + A63 * k30 + A64 * k40 + A65 * k50),
                                      y1 + h_use * (A61 * k11 + A62 * k21 + A63 * k31 + A64 * k41 + A65 * k51),
                                      y2 + h_use * (A61 * k12 + A62 * k22 + A63 * k32 + A64 * k42 + A65 * k52))
            n0 = y0 + h_use * (B1 * k10 + B3 * k30 + B4 * k40 + B5 * k50 + B6 * k60)
            n1 = y1 + h_use * (B1 * k11 + B3 * k31 + B4 * k41 + B5 * k51 + B6 * k61)
            n2 = y2 + h_use * (B1 * k12 + B3 * k32 + B4 * k42 + B5 * k52 + B6 * k62)
            t_new = t_end if last else t + h_use
            k70, k71, k72 = bloch_rhs(mode, seg, data, t_new, dz, omega_ref, inv_t2, inv_t1, w_eq, n0, n1, n2)
            e0 = h_use * (E1 * k10 + E3 * k30 + E4 * k40 + E5 * k50 + E6 * k60 + E7 * k70)
            e1 = h_use * (E1 * k11 + E3 * k31 + E4 * k41 + E5 * k51 + E6 * k61 + E7 * k71)
            e2 = h_use * (E1 * k12 + E3 * k32 + E4 * k42 + E5 * k52 + E6 * k62 + E7 * k72)
            err = max(abs(e0), abs(e1), abs(e2)) / tol
            if err <= 1.0:
                while k < ns and sample_times[k] <= t_new:
                    th = (sample_times[k] - t) / h_use
                    th1 = 1.0 - th
                    r20, r21, r22 = n0 - y0, n1 - y1, n2 - y2
                    r30, r31, r32 = h_use * k10 - r20, h_use * k11 - r21, h_use * k12 - r22
                    r40, r41, r42 = r20 - h_use * k70 - r30, r21 - h_use * k71 - r31, r22 - h_use * k72 - r32
                    r50 = h_use * (D1 * k10 + D3 * k30 + D4 * k40 + D5 * k50 + D6 * k60 + D7 * k70)
                    r51 = h_use * (D1 * k11 + D3 * k31 + D4 * k41 + D5 * k51 + D6 * k61 + D7 * k71)
                    r52 = h_use * (D1 * k12 + D3 * k32 + D4 * k42 + D5 * k52 + D6 * k62 + D7 * k72)
                    out[k, 0] = y0 + th * (r20 + th1 * (r30 + th * (r40 + th1 * r50)))
                    out[k, 1] = y1 + th * (r21 + th1 * (r31 + th * (r41 + th1 * r51)))
                    out[k, 2] = y2 + th * (r22 + th1 * (r32 + th * (r42 + th1 * r52)))
                    k += 1
                y[0], y[1], y[2] = n0, n1, n2
                k10, k11, k12 = k70, k71, k72
                t = t_new
                steps += 1
                if steps >= max_steps:
                    return y, STATUS_MAX_STEPS, steps
                fac = FAC_MAX if err == 0.0 else min(FAC_MAX, max(FAC_MIN, SAFETY * err**-0.2))
                if not last:
                    h = h_use * fac
            else:
                h = h_use * max(FAC_MIN, SAFETY * err**-0.2)
                if h < 1e-14 * max(1.0, abs(t)):
                    return y, STATUS_UNDERFLOW, steps
    while k < ns:
        out[k, 0], out[k, 1], out[k, 2] = y[0], y[1], y[2]
        k += 1
    return y, status, steps


@njit(parallel=True)
def integrate_batch(segs, data, mode, dz, omega_ref, relax, y_init, tol, sample_times, max_steps):
    """Integrate every class (rows of ``dz``/``y_init``) independently."""
    n = dz.shape[0]
    ns = sample_times.shape[0]
    finals = np.empty((n, 3))
    samples = np.empty((n, ns, 3))
    status = np.zeros(n, dtype=np.int64)
    steps = np.zeros(n, dtype=np.int64)
    for i in prange(n):
        yf, st, nst = integrate_one(segs, data, mode, dz[i], omega_ref, relax[0], relax[1], relax[2],
                                    y_init[i], tol, sample_times, samples[i], max_steps)
        finals[i, 0], finals[i, 1], finals[i, 2] = yf[0], yf[1], yf[2]
        status[i] = st
        steps[i] = nst
    return finals, samples, status, steps
