"""Pure-numpy Dormand-Prince 5(4): all classes advance with a shared step.

The control vector's transverse part depends only on time, so one scalar
evaluation per stage serves every class; the per-class work is vectorised.
The step is controlled by the worst class, so results agree with the
per-class numba path to within the tolerance, not bit for bit.
"""

import numpy as np

from ._jit import python_version
from .layout import T_END, T_START
from .numba_backend import (
    A21, A31, A32, A41, A42, A43, A51, A52, A53, A54, A61, A62, A63, A64, A65,
    B1, B3, B4, B5, B6, C2, C3, C4, C5, D1, D3, D4, D5, D6, D7,
    E1, E3, E4, E5, E6, E7, FAC_MAX, FAC_MIN, SAFETY,
    STATUS_MAX_STEPS, STATUS_OK, STATUS_UNDERFLOW,
)
from .scalar import control

_control = python_version(control)


def _rhs(mode, seg, data, t, dz, omega_ref, relax, y):
    bx, by, _ = _control(mode, seg, data, t, 0.0, omega_ref)
    inv_t2, inv_t1, w_eq = relax
    f = np.empty_like(y)
    f[:, 0] = by * y[:, 2] - dz * y[:, 1] - inv_t2 * y[:, 0]
    f[:, 1] = dz * y[:, 0] - bx * y[:, 2] - inv_t2 * y[:, 1]
    f[:, 2] = bx * y[:, 1] - by * y[:, 0] - inv_t1 * (y[:, 2] - w_eq)
    return f


def integrate_batch(segs, data, mode, dz, omega_ref, relax, y_init, tol, sample_times, max_steps):
    dz = np.asarray(dz, dtype=float)
    y = np.array(y_init, dtype=float, copy=True)
    n = dz.shape[0]
    ns = sample_times.shape[0]
    samples = np.empty((n, ns, 3))
    status = np.full(n, STATUS_OK, dtype=np.int64)
    k = 0
    t = segs[0, T_START]
    while k < ns and sample_times[k] <= t:
        samples[:, k] = y
        k += 1
    h = 0.0
    steps = 0
    for seg in segs:
        t, t_end = seg[T_START], seg[T_END]
        if t_end <= t:
            continue
        k1 = _rhs(mode, seg, data, t, dz, omega_ref, relax, y)
        if h <= 0.0:
            rate = np.max(np.linalg.norm(k1, axis=1)) + 1.0 / (t_end - t)
            h = 0.2 * tol**0.2 / rate
        while t < t_end:
            last = t + h >= t_end
            hu = t_end - t if last else h
            k2 = _rhs(mode, seg, data, t + C2 * hu, dz, omega_ref, relax, y + hu * A21 * k1)
            k3 = _rhs(mode, seg, data, t + C3 * hu, dz, omega_ref, relax, y + hu * (A31 * k1 + A32 * k2))
            k4 = _rhs(mode, seg, data, t + C4 * hu, dz, omega_ref, relax, y + hu * (A41 * k1 + A42 * k2 + A43 * k3))
            k5 = _rhs(mode, seg, data, t + C5 * hu, dz, omega_ref, relax,
                      y + hu * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4))
            k6 = _rhs(mode, seg, data, t + hu, dz, omega_ref, relax,
                      y + hu * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5))
            y_new = y + hu * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6)
            t_new = t_end if last else t + hu
            k7 = _rhs(mode, seg, data, t_new, dz, omega_ref, relax, y_new)
            e = hu * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7)
            err = float(np.max(np.abs(e))) / tol
            if err <= 1.0:
                if k < ns and sample_times[k] <= t_new:
                    r2 = y_new - y
                    r3 = hu * k1 - r2
                    r4 = r2 - hu * k7 - r3
                    r5 = hu * (D1 * k1 + D3 * k3 + D4 * k4 + D5 * k5 + D6 * k6 + D7 * k7)
                    while k < ns and sample_times[k] <= t_new:
                        th = (sample_times[k] - t) / hu
                        th1 = 1.0 - th
                        samples[:, k] = y + th * (r2 + th1 * (r3 + th * (r4 + th1 * r5)))
                        k += 1
                y, k1, t = y_new, k7, t_new
                steps += 1
                if steps >= max_steps:
                    status[:] = STATUS_MAX_STEPS
                    return y, samples, status, np.full(n, steps, dtype=np.int64)
                fac = FAC_MAX if err == 0.0 else min(FAC_MAX, max(FAC_MIN, SAFETY * err**-0.2))
                if not last:
                    h = hu * fac
            else:
                h = hu * max(FAC_MIN, SAFETY * err**-0.2)
                if h < 1e-14 * max(1.0, abs(t)):
                    status[:] = STATUS_UNDERFLOW
                    return y, samples, status, np.full(n, steps, dtype=np.int64)
    while k < ns:
        samples[:, k] = y
        k += 1
    return y, samples, status, np.full(n, steps, dtype=np.int64)
