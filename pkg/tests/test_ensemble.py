import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bloch_rephase.ensemble import FWHM_PER_SIGMA, NO_RELAXATION, EnsembleSpec, RelaxationSpec
from bloch_rephase.errors import DomainError


@given(st.sampled_from(["gaussian", "uniform"]), st.floats(0.0, 10.0), st.integers(1, 400), st.floats(-2, 2))
def test_weights_normalised(dist, width, n, center):
    det, w = EnsembleSpec(dist, width, n, center).classes()
    assert det.size == w.size == n
    assert abs(w.sum() - 1.0) <= 1e-12
    assert np.all(w >= 0)


def test_gaussian_truncated_at_three_sigma():
    ens = EnsembleSpec("gaussian", 2.0, 201, center=0.5)
    det, w = ens.classes()
    sigma = 2.0 / FWHM_PER_SIGMA
    assert FWHM_PER_SIGMA == pytest.approx(2 * math.sqrt(2 * math.log(2)))
    assert det[0] == pytest.approx(0.5 - 3 * sigma) and det[-1] == pytest.approx(0.5 + 3 * sigma)
    assert w[100] / w[0] == pytest.approx(math.exp(4.5))
    assert ens.gamma_inh == 2.0


def test_uniform_half_width():
    det, w = EnsembleSpec("uniform", 0.3, 7).classes()
    assert det[0] == pytest.approx(-0.3) and det[-1] == pytest.approx(0.3)
    assert np.allclose(w, 1 / 7)
    assert EnsembleSpec("uniform", 0.3, 7).gamma_inh == pytest.approx(0.6)


def test_explicit_and_single():
    det, w = EnsembleSpec("explicit", detunings=(0.1, 0.2), weights=(1.0, 3.0)).classes()
    assert np.allclose(det, [0.1, 0.2]) and np.allclose(w, [0.25, 0.75])
    det, w = EnsembleSpec.single(0.4).classes()
    assert det.tolist() == [0.4] and w.tolist() == [1.0]


def test_condition_grid_spans_gamma():
    g = EnsembleSpec("gaussian", 3.0, 11, center=1.0).condition_grid(5)
    assert np.allclose(g, [-0.5, 0.25, 1.0, 1.75, 2.5])


@pytest.mark.parametrize(
    "kw",
    [
        dict(distribution="lorentzian"),
        dict(distribution="gaussian", n_classes=0),
        dict(distribution="uniform", width=-1.0),
        dict(distribution="explicit"),
        dict(distribution="explicit", detunings=(0.0,), weights=(1.0, 2.0)),
        dict(distribution="explicit", detunings=(0.0, 1.0), weights=(-1.0, 2.0)),
    ],
)
def test_ensemble_validation(kw):
    with pytest.raises(DomainError):
        EnsembleSpec(**kw)


def test_relaxation_spec():
    assert not NO_RELAXATION.enabled
    r = RelaxationSpec(T2=510.0)
    assert r.enabled and np.allclose(r.rates(), [1 / 510.0, 0.0, -1.0])
    RelaxationSpec(T2=20.0, T1=10.0)
    with pytest.raises(DomainError):
        RelaxationSpec(T2=21.0, T1=10.0)
    with pytest.raises(DomainError):
        RelaxationSpec(T2=0.0)
    with pytest.raises(DomainError):
        RelaxationSpec(w_eq=1.5)
