"""Unit conventions.

Internally every angular frequency is in rad/us, every time in us and every
phase in rad.  Files and the command line use ordinary frequencies (MHz or
kHz), converted with omega = 2*pi*nu.
"""

import math

import numpy as np

TWO_PI = 2.0 * math.pi


def mhz(nu):
    """Ordinary frequency in MHz -> angular frequency in rad/us."""
    return TWO_PI * nu


def khz(nu):
    """Ordinary frequency in kHz -> angular frequency in rad/us."""
    return TWO_PI * nu * 1e-3


def to_mhz(omega):
    return omega / TWO_PI


def to_khz(omega):
    return omega / TWO_PI * 1e3


def mhz_per_us(rate):
    """Chirp rate given as MHz/us -> rad/us^2."""
    return TWO_PI * rate


def wrap_angle(a):
    """Wrap an angle (scalar or array) to the interval (-pi, pi]."""
    w = np.mod(np.asarray(a, dtype=float) + math.pi, TWO_PI) - math.pi
    w = np.where(w == -math.pi, math.pi, w)
    return float(w) if np.ndim(w) == 0 else w
