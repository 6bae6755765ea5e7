"""Inhomogeneous-broadening ensembles and phenomenological relaxation."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .errors import DomainError

FWHM_PER_SIGMA = 2.0 * math.sqrt(2.0 * math.log(2.0))
GAUSSIAN_CUTOFF = 3.0
DISTRIBUTIONS = ("gaussian", "uniform", "explicit")


@dataclass(frozen=True)
class EnsembleSpec:
    """Discretised distribution of detunings relative to the reference carrier.

    ``width`` is the FWHM for ``gaussian`` (truncated at +-3 sigma, with
    sigma = FWHM / (2 sqrt(2 ln 2))) and the half-width for ``uniform``.
    ``explicit`` takes ``detunings`` (and optionally ``weights``) verbatim.
    ``center`` shifts the whole distribution.
    """

    distribution: str = "gaussian"
    width: float = 0.0
    n_classes: int = 1
    center: float = 0.0
    detunings: Tuple[float, ...] = ()
    weights: Tuple[float, ...] = ()

    def __post_init__(self):
        if self.distribution not in DISTRIBUTIONS:
            raise DomainError(f"unknown distribution {self.distribution!r}")
        if self.distribution == "explicit":
            if not self.detunings:
                raise DomainError("explicit ensemble needs at least one detuning")
            if self.weights and len(self.weights) != len(self.detunings):
                raise DomainError("weights and detunings differ in length")
            if self.weights and (min(self.weights) < 0 or sum(self.weights) <= 0):
                raise DomainError("weights must be non-negative with positive sum")
        else:
            if self.n_classes < 1:
                raise DomainError("n_classes must be >= 1")
            if self.width < 0:
                raise DomainError("width must be >= 0")

    @classmethod
    def single(cls, detuning=0.0):
        return cls("explicit", detunings=(float(detuning),))

    @property
    def size(self):
        return len(self.detunings) if self.distribution == "explicit" else self.n_classes

    @property
    def gamma_inh(self):
        """Full width used for condition grids."""
        if self.distribution == "gaussian":
            return self.width
        if self.distribution == "uniform":
            return 2.0 * self.width
        return float(max(self.detunings) - min(self.detunings))

    def classes(self):
        """(detunings, weights) with weights summing to 1."""
        if self.distribution == "explicit":
            x = np.asarray(self.detunings, dtype=float)
            w = np.asarray(self.weights, dtype=float) if self.weights else np.ones_like(x)
            return x + self.center, w / w.sum()
        n = self.n_classes
        if n == 1 or self.width == 0.0:
            x = np.full(n, 0.0)
            w = np.ones(n)
        elif self.distribution == "gaussian":
            sigma = self.width / FWHM_PER_SIGMA
            x = np.linspace(-GAUSSIAN_CUTOFF * sigma, GAUSSIAN_CUTOFF * sigma, n)
            w = np.exp(-0.5 * (x / sigma) ** 2)
        else:
            x = np.linspace(-self.width, self.width, n)
            w = np.ones(n)
        return x + self.center, w / w.sum()

    def condition_grid(self, n=101):
        """Uniform grid over center +- gamma_inh/2."""
        half = 0.5 * self.gamma_inh
        return np.linspace(self.center - half, self.center + half, n)


@dataclass(frozen=True)
class RelaxationSpec:
    """Exponential damping: transverse with T2, longitudinal toward w_eq with T1."""

    T2: float = math.inf
    T1: float = math.inf
    w_eq: float = -1.0

    def __post_init__(self):
        if not (self.T2 > 0 and self.T1 > 0):
            raise DomainError("T1 and T2 must be positive")
        if math.isfinite(self.T1) and self.T2 > 2.0 * self.T1:
            raise DomainError("T2 must not exceed 2*T1")
        if abs(self.w_eq) > 1:
            raise DomainError("w_eq must lie in [-1, 1]")

    @property
    def enabled(self):
        return math.isfinite(self.T2) or math.isfinite(self.T1)

    def rates(self):
        return np.array([1.0 / self.T2, 1.0 / self.T1, self.w_eq])


NO_RELAXATION = RelaxationSpec()
