"""Acceptance criteria, one test each.

Every test prints a single ``CRITERION n: PASS|FAIL`` line (visible with
``pytest -s`` or in the terminal summary) before asserting, so a failing
criterion still reports what was measured.
"""

import json
import math
import time

import numpy as np
import pytest

from _families import passage_at_level, shape_draws
from bloch_rephase.arp import adiabaticity_zeta, arp_matrix, characterize, rotation_axis_angle
from bloch_rephase.cli import _error_pulse, main
from bloch_rephase.core import AtomSpec
from bloch_rephase.ensemble import EnsembleSpec, RelaxationSpec
from bloch_rephase.experiments import (
    _pipeline,
    epsilon_2pi,
    half_passages_of,
    loglog_slope,
    measure_epsilon_2pi,
    measure_epsilon_arp,
    measure_epsilon_pi,
    phase_scan,
    tau_scan,
)
from bloch_rephase.oracle import Trajectory, coherence_time, ensemble_evolve, integrate_rotating
from bloch_rephase.pulses import chirped_arp
from bloch_rephase.seqfile import load_sequence, shipped_example
from bloch_rephase.sequence import analyze_rephasing, rephasing_sequence
from bloch_rephase.units import khz, mhz

pytestmark = pytest.mark.acceptance

W0 = mhz(14.0)
PRESET = load_sequence(shipped_example())
ARP = PRESET.pulses[0]
UNIFORM = EnsembleSpec("uniform", mhz(0.25), 101)
GAUSS = EnsembleSpec("gaussian", mhz(0.5), 201)
T2 = 510.0


def report(capsys, n, ok, detail):
    with capsys.disabled():
        print(f"\nCRITERION {n}: {'PASS' if ok else 'FAIL'} - {detail}")


def wrap(x):
    return float(np.angle(np.exp(1j * np.asarray(x))))


def angle(a, b):
    return float(np.arccos(np.clip(np.dot(a, b) / np.linalg.norm(a) / np.linalg.norm(b), -1, 1)))


@pytest.fixture(scope="module")
def family_draws():
    return shape_draws(100, seed=21)


def test_criterion_1_pi_rotation_structure(capsys, family_draws):
    t = time.perf_counter()
    levels = np.random.default_rng(22).uniform(0.02, 0.1, len(family_draws))
    worst_eig = worst_axis = 0.0
    for draw, lv in zip(family_draws, levels):
        p, atom = passage_at_level(draw, lv)
        m = arp_matrix(p, atom)
        ev = np.sort(np.linalg.eigvals(m).real)
        worst_eig = max(worst_eig, float(np.max(np.abs(ev - [-1, -1, 1]))))
        worst_axis = max(worst_axis, abs(float(rotation_axis_angle(m).axis[2])))
    dt = time.perf_counter() - t
    ok = worst_eig <= 1e-8 and worst_axis <= 1e-8 and dt < 10
    report(capsys, 1, ok, f"eigenvalue error {worst_eig:.2e}, axis |z| {worst_axis:.2e}, {dt:.1f} s")
    assert ok


def test_criterion_2_analytic_matches_integrator(capsys, family_draws):
    t = time.perf_counter()
    rng = np.random.default_rng(23)
    b0s = rng.normal(size=(len(family_draws), 3))
    b0s /= np.linalg.norm(b0s, axis=1)[:, None]
    worst, mean = [], []
    for lv in (0.1, 0.05, 0.02):
        angs = []
        for draw, b0 in zip(family_draws, b0s):
            p, atom = passage_at_level(draw, lv)
            fin = integrate_rotating(p, atom, b0, tol=1e-9, samples=2).final_lab
            angs.append(angle(fin, arp_matrix(p, atom) @ b0))
        worst.append(max(angs))
        mean.append(float(np.mean(angs)))
    dt = time.perf_counter() - t
    ok = (
        max(worst) <= 0.15
        and worst[0] > worst[1] > worst[2]
        and mean[0] > mean[1] > mean[2]
        and dt < 60
    )
    report(capsys, 2, ok, f"worst angle by level {np.round(worst, 4).tolist()} rad, mean {np.round(mean, 4).tolist()}, {dt:.1f} s")
    assert ok


def test_criterion_3_identity_rephasing(capsys):
    t = time.perf_counter()
    b0 = np.array([1.0, 0.0, 0.0])
    res = ensemble_evolve(PRESET, UNIFORM, b0, tol=1e-9, samples=2)
    per_class = [math.degrees(angle(f, b0)) for f in res.class_finals_lab()]
    mean_dev = math.degrees(angle(res.mean_final_lab(), b0))
    dt = time.perf_counter() - t
    ok = max(per_class) <= 2.0 and mean_dev <= 0.5 and dt < 120
    report(capsys, 3, ok, f"worst class {max(per_class):.2f} deg, mean {mean_dev:.3f} deg, {dt:.1f} s")
    assert ok


def test_criterion_4_phase_law(capsys):
    b0 = np.array([1.0, 0.0, 0.0])
    analytic, ode = [], []
    for d0 in (math.pi / 6, math.pi / 4, math.pi / 2, math.pi):
        seq = rephasing_sequence(ARP, ARP.with_phase_offset(d0), 10, 20, 10, reference=W0)
        rep = analyze_rephasing(seq, UNIFORM)
        z_err = max(abs(wrap(a - 2 * d0)) for a in rep.z_angle_grid)
        analytic.append(max(z_err, abs(wrap(rep.alpha - 2 * d0))))
        mean = ensemble_evolve(seq, UNIFORM, b0, tol=1e-9, samples=2).mean_final_lab()
        ode.append(abs(wrap(math.atan2(mean[1], mean[0]) - 2 * d0)))
    ok = max(analytic) <= 0.02 and max(ode) <= 0.1
    report(capsys, 4, ok, f"analytic error {max(analytic):.2e} rad, ensemble azimuth error {max(ode):.4f} rad")
    assert ok


@pytest.fixture(scope="module")
def readout():
    return half_passages_of(ARP)


def test_criterion_5_phase_scan(capsys, readout):
    ahp, rahp = readout
    n = 17
    deltas = 2 * math.pi * np.arange(n) / n
    res = phase_scan(deltas, PRESET, ahp, rahp, ensemble=GAUSS, tol=1e-9)
    step = 2 * math.pi / n
    d_max = deltas[int(np.argmax(res.ratio))]
    d_min = deltas[int(np.argmin(res.ratio))]
    max_ok = abs(wrap(d_max)) <= step + 1e-12
    min_ok = abs(wrap(d_min - math.pi)) <= step + 1e-12
    alpha_ok = abs(res.alpha_hat) <= 0.05 * 2 * math.pi
    ok = max_ok and min_ok and alpha_ok
    report(
        capsys,
        5,
        ok,
        f"max at {d_max:.4f} ({'ok' if max_ok else 'off'}), min at {d_min:.4f} ({'ok' if min_ok else 'off'}), "
        f"alpha_hat {res.alpha_hat:.4f} rad vs limit {0.1 * math.pi:.4f}",
    )
    assert ok


@pytest.fixture(scope="module")
def tau_scans(readout):
    ahp, rahp = readout
    tau1 = [2.0, 4.0, 6.0, 8.0]
    free = tau_scan(tau1, 20.0, ARP, ARP, ahp, rahp, ensemble=GAUSS, tol=1e-9)
    damped = tau_scan(tau1, 20.0, ARP, ARP, ahp, rahp, ensemble=GAUSS, relax=RelaxationSpec(T2=T2), tol=1e-9)
    return free, damped


def test_criterion_6_tau_scan_invariance(capsys, tau_scans):
    free, damped = tau_scans
    spread_damped = float(np.ptp(damped.ratio) / np.mean(damped.ratio))
    spread_free = float(np.ptp(free.ratio) / np.mean(free.ratio))
    unity = float(np.max(np.abs(free.ratio - 1.0)))
    ok = spread_damped <= 0.01 and spread_free <= 0.01 and unity <= 0.001
    report(
        capsys,
        6,
        ok,
        f"spread with T2 {100 * spread_damped:.3f}%, without {100 * spread_free:.3f}%, "
        f"largest distance of relaxation-free ratio from 1: {unity:.4f}",
    )
    assert ok


def test_criterion_7_error_scalings(capsys):
    xs = np.array([0.01, 0.02, 0.04, 0.07, 0.1])
    om = 1.0
    pulse, r = _error_pulse(om, 10.0, 0.02)
    pi = [measure_epsilon_pi(x, om, 0.5 / x, 1e-10) for x in xs]
    two = [measure_epsilon_2pi(x, om, 0.3 / x, 1.1 / x, tol=1e-10) for x in xs]
    arp = [measure_epsilon_arp(x, pulse, 0.5 / x, 1e-10) for x in xs]
    slopes = [loglog_slope(xs, y) for y in (pi, two, arp)]
    slopes_ok = all(abs(s - 2.0) <= 0.05 for s in slopes)

    # measured and closed form differ by a term of third order in delta/Omega
    resid = [
        measure_epsilon_2pi(x, om, 0.7 / x, 2.0 / x, tol=1e-10) + epsilon_2pi(x, om, 0.7 / x, 2.0 / x) for x in xs
    ]
    cube_slope = loglog_slope(xs, resid)
    next_order_ok = abs(cube_slope - 3.0) <= 0.2

    x = 0.05
    pi_ref = abs(measure_epsilon_pi(x, om, 0.5 / x, 1e-10))
    ratios = {}
    for q in (2.0, 5.0, 10.0):
        p, _ = _error_pulse(om, q, 0.02)
        ratios[q] = abs(measure_epsilon_arp(x, p, 0.5 / x, 1e-10)) / pi_ref
    # the adiabatic rate law only holds for zeta = r / Omega^2 <= 0.1
    arp_ok = ratios[10.0] >= 0.8 * 10.0
    ok = slopes_ok and next_order_ok and arp_ok
    report(
        capsys,
        7,
        ok,
        f"slopes {np.round(slopes, 3).tolist()}, residual order {cube_slope:.3f}, "
        f"ARP/pi ratio over Omega^2/r: "
        + ", ".join(f"{q:g}: {ratios[q] / q:.3f}" for q in ratios),
    )
    assert ok


def test_criterion_8_t2_consistency(capsys, readout):
    ahp, rahp = readout
    pipe = _pipeline(rephasing_sequence(ARP, ARP, 10, 20, 10, reference=W0), ahp, rahp)
    res = ensemble_evolve(pipe, GAUSS, (0.0, 0.0, 1.0), tol=1e-9, samples=4001)
    t_coh = sum(
        w * coherence_time(Trajectory(res.mean.times, s, s[-1], "rotating", 0.0, 0.0))
        for w, s in zip(res.weights, res.class_states)
    )
    free_ratio = run_ratio(pipe, ahp, rahp, None)
    damped_ratio = run_ratio(pipe, ahp, rahp, RelaxationSpec(T2=T2))
    predicted = free_ratio * math.exp(-t_coh / T2)
    rel = damped_ratio / predicted - 1.0
    ok = abs(rel) <= 0.05
    report(
        capsys,
        8,
        ok,
        f"t_coh {t_coh:.1f} us, ratio with T2 {damped_ratio:.4f}, predicted {predicted:.4f}, off by {100 * rel:+.1f}%",
    )
    assert ok


def run_ratio(pipe, ahp, rahp, relax):
    from bloch_rephase.experiments import run_preparation_readout
    from bloch_rephase.sequence import SequenceSpec

    core = SequenceSpec(pipe.elements[1:-1], pipe.reference)
    kw = {} if relax is None else {"relax": relax}
    return run_preparation_readout(core, ahp, rahp, ensemble=GAUSS, tol=1e-9, **kw).ratio


def test_criterion_9_adiabaticity_diagnostics(capsys):
    om, span, T = khz(141.0), mhz(4.0), 100.0
    r = span / T
    const = chirped_arp(W0, om, span, T)
    z0 = adiabaticity_zeta(0.0, const, AtomSpec(W0))
    exact = abs(z0 / (r / om**2) - 1.0) <= 1e-12
    at_zero = characterize(ARP, AtomSpec(W0)).zeta_violation_fraction
    at_edge = characterize(ARP, AtomSpec(W0 + mhz(0.25))).zeta_violation_fraction
    ok = exact and at_zero == 0.0
    report(
        capsys,
        9,
        ok,
        f"zeta(0) / (r/Omega^2) = {z0 / (r / om**2):.15f}, violation at 0: {at_zero:.4f}, "
        f"at 250 kHz: {100 * at_edge:.2f}% (reported only)",
    )
    assert ok


def test_criterion_10_determinism(capsys, tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(
        json.dumps(
            {
                "sequence": str(shipped_example()),
                "ensemble": {"distribution": "gaussian", "width_mhz": 0.5, "n_classes": 11},
                "tol": 1e-8,
                "seed": 7,
                "errors": {"delta_over_rabi": [0.02, 0.05], "random_sets": 2},
            }
        )
    )
    same = True
    files = 0
    for cmd in ("simulate", "phase-scan", "tau-scan", "compare-errors", "characterize"):
        outs = []
        for k in range(2):
            out = tmp_path / f"{cmd}-{k}"
            assert main([cmd, "--config", str(cfg), "--out", str(out)]) == 0
            outs.append(out)
        for f in sorted(outs[0].glob("*.csv")):
            files += 1
            same = same and f.read_bytes() == (outs[1] / f.name).read_bytes()
    ok = same and files >= 6
    report(capsys, 10, ok, f"{files} CSV files compared across repeated runs, identical: {same}")
    assert ok
