"""Command-line front end.

Every run is described by one JSON document.  Values are resolved in this
order, later ones winning:

1. built-in defaults (see ``RunConfig``),
2. the file given with ``--config``,
3. command-line flags (``--seq``, ``--out``, ``--tol``, ``--classes``,
   ``--seed``, ``--frame``).

A relative sequence path inside a config file is looked up next to that
file, then among the bundled examples; a relative ``--seq`` is looked up in
the working directory, then among the bundled examples.  The output
directory is relative to the working directory.  A config path that does
not exist is also looked up among the bundled examples, so
``--config identity_demo.json`` works from anywhere.

Frequencies in config files are ordinary frequencies (MHz or kHz, as the
key name says); times are microseconds.

Exit status: 0 on success, 1 when a computation fails (validity,
integration or condition errors), 2 for usage and I/O problems.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .arp import characterize
from .core import AtomSpec
from .ensemble import EnsembleSpec, RelaxationSpec
from .errors import (
    BlochRephaseError,
    DomainError,
    SequenceSemanticError,
    SequenceSyntaxError,
    ShapeError,
)
from .experiments import (
    ProbeModel,
    epsilon_2pi,
    epsilon_arp,
    epsilon_pi,
    half_passages_of,
    loglog_slope,
    measure_epsilon_2pi,
    measure_epsilon_arp,
    measure_epsilon_pi,
    phase_scan,
    tau_scan,
)
from .oracle import DEFAULT_TOL, TOL_RANGE, ensemble_evolve, evolve_classes, write_trajectory_csv
from .pulses import chirped_arp
from .seqfile import load_sequence, shipped_example
from .sequence import analyze_rephasing
from .units import mhz, to_mhz

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------


@dataclass
class RunConfig:
    sequence: Path | None = None
    out: Path = Path(".")
    tol: float = DEFAULT_TOL
    seed: int = 0
    frame: str = "rotating"
    ensemble: dict = field(default_factory=lambda: {"distribution": "gaussian", "width_mhz": 0.5, "n_classes": 201})
    relaxation: dict = field(default_factory=dict)
    probe: dict = field(default_factory=dict)
    initial: tuple = (1.0, 0.0, 0.0)
    threshold: float = 0.1
    samples: int = 201
    detuning_mhz: float = 0.0
    zeta_samples: int = 4096
    phase_scan: dict = field(default_factory=lambda: {"points": 17})
    tau_scan: dict = field(default_factory=lambda: {"tau1_us": [2.0, 4.0, 6.0, 8.0], "tau2_us": 20.0})
    errors: dict = field(
        default_factory=lambda: {
            "rabi_mhz": 1.0 / (2.0 * math.pi),
            "adiabaticity": 10.0,
            "edge_ratio": 0.02,
            "delta_over_rabi": [0.01, 0.02, 0.04, 0.07, 0.1],
            "phase": 1.0,
            "tau_phases": [0.3, 1.1],
            "random_sets": 3,
        }
    )

    def validate(self):
        if self.sequence is not None and not Path(self.sequence).is_file():
            raise UsageError(f"sequence file not found: {self.sequence}")
        if not TOL_RANGE[0] <= self.tol <= TOL_RANGE[1]:
            raise UsageError(f"tol {self.tol} outside [{TOL_RANGE[0]}, {TOL_RANGE[1]}]")
        if self.frame not in ("rotating", "lab"):
            raise UsageError(f"frame must be rotating or lab, got {self.frame!r}")
        if self.samples < 2:
            raise UsageError("samples must be >= 2")
        try:
            self.ensemble_spec()
            self.relaxation_spec()
            self.probe_model()
        except DomainError as exc:
            raise UsageError(str(exc)) from None
        return self

    def ensemble_spec(self):
        e = dict(self.ensemble)
        unknown = set(e) - {"distribution", "width_mhz", "n_classes", "center_mhz", "detunings_mhz", "weights"}
        if unknown:
            raise UsageError(f"unknown ensemble keys: {sorted(unknown)}")
        return EnsembleSpec(
            distribution=e.get("distribution", "gaussian"),
            width=mhz(e.get("width_mhz", 0.0)),
            n_classes=int(e.get("n_classes", 1)),
            center=mhz(e.get("center_mhz", 0.0)),
            detunings=tuple(mhz(x) for x in e.get("detunings_mhz", ())),
            weights=tuple(e.get("weights", ())),
        )

    def relaxation_spec(self):
        r = self.relaxation
        unknown = set(r) - {"T2_us", "T1_us", "w_eq"}
        if unknown:
            raise UsageError(f"unknown relaxation keys: {sorted(unknown)}")
        inf = lambda x: math.inf if x is None else float(x)  # noqa: E731
        return RelaxationSpec(T2=inf(r.get("T2_us")), T1=inf(r.get("T1_us")), w_eq=float(r.get("w_eq", -1.0)))

    def probe_model(self):
        return ProbeModel(**self.probe)

    def as_dict(self):
        d = asdict(self)
        d["sequence"] = None if self.sequence is None else str(self.sequence)
        d["out"] = str(self.out)
        d["initial"] = list(self.initial)
        return d


_FIELDS = set(RunConfig.__dataclass_fields__)


def _resolve_config_path(p):
    path = Path(p)
    if path.is_file():
        return path
    bundled = shipped_example(str(p))
    if not path.is_absolute() and bundled.is_file():
        return bundled
    raise UsageError(f"config file not found: {p}")


def _resolve_seq_path(p, base):
    path = Path(p)
    if not path.is_absolute():
        cand = base / path
        if cand.is_file():
            return cand
        bundled = shipped_example(str(p))
        if bundled.is_file():
            return bundled
        return cand
    return path


def load_config(args):
    cfg = RunConfig()
    if getattr(args, "config", None):
        path = _resolve_config_path(args.config)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise UsageError(f"{path}: invalid JSON ({exc})") from None
        except OSError as exc:
            raise UsageError(f"{path}: {exc.strerror}") from None
        if not isinstance(data, dict):
            raise UsageError(f"{path}: top level must be an object")
        unknown = set(data) - _FIELDS
        if unknown:
            raise UsageError(f"{path}: unknown keys {sorted(unknown)}")
        base = path.parent
        for k, v in data.items():
            if k == "sequence" and v is not None:
                v = _resolve_seq_path(v, base)
            elif k == "out":
                v = Path(v)
            elif k == "initial":
                v = tuple(float(x) for x in v)
            elif k in ("ensemble", "relaxation", "probe", "phase_scan", "tau_scan", "errors"):
                v = {**getattr(cfg, k), **v} if k in ("phase_scan", "tau_scan", "errors") else dict(v)
            setattr(cfg, k, v)
    if getattr(args, "seq", None):
        cfg.sequence = _resolve_seq_path(args.seq, Path.cwd())
    if getattr(args, "out", None):
        cfg.out = Path(args.out)
    if getattr(args, "tol", None) is not None:
        cfg.tol = args.tol
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    if getattr(args, "frame", None):
        cfg.frame = args.frame
    if getattr(args, "classes", None) is not None:
        if args.classes < 1:
            raise UsageError("--classes must be >= 1")
        cfg.ensemble = {**cfg.ensemble, "n_classes": args.classes}
    return cfg.validate()


def _need_sequence(cfg):
    if cfg.sequence is None:
        raise UsageError("no sequence file given (use --seq or the config 'sequence' key)")
    return load_sequence(cfg.sequence)


def _out(cfg, name):
    try:
        cfg.out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise UsageError(f"cannot create output directory {cfg.out}: {exc.strerror}") from None
    return cfg.out / name


def _write_json(path, obj):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=_plain)
        fh.write("\n")


def _plain(x):
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        return x.item()
    if isinstance(x, Path):
        return str(x)
    return str(x)


def _f(x):
    return repr(float(x))


def _angle_deg(a, b):
    a, b = np.asarray(a, float), np.asarray(b, float)
    c = np.dot(a, b) / (np.linalg.norm(a) * np.linalg.norm(b))
    return math.degrees(math.acos(min(1.0, max(-1.0, c))))


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_characterize(cfg):
    seq = _need_sequence(cfg)
    atom = AtomSpec(seq.omega_ref + mhz(cfg.detuning_mhz))
    reports = []
    for i, pulse in enumerate(seq.pulses):
        entry = {"index": i, "kind": pulse.kind, "label": pulse.label}
        if pulse.kind == "square":
            entry["skipped"] = "square pulses have no adiabatic diagnostics"
            reports.append(entry)
            print(f"pulse {i} (square): skipped")
            continue
        ch = characterize(pulse, atom, cfg.zeta_samples, cfg.threshold)
        entry.update(ch.summary())
        entry["warning"] = not ch.valid_edges
        reports.append(entry)
        with open(_out(cfg, f"zeta_pulse{i}.csv"), "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t_us", "zeta", "theta_rad"])
            for t, z, th in zip(ch.times, ch.zeta_trace, ch.theta_trace):
                w.writerow([_f(t), _f(z), _f(th)])
        flag = "edges ok" if ch.valid_edges else "WARNING: edge off-resonance ratio above threshold"
        print(
            f"pulse {i} ({pulse.kind}): chi = {ch.chi:.4f} rad, zeta_max = {ch.zeta_max:.4f}, "
            f"violation = {100 * ch.zeta_violation_fraction:.2f}%, {flag}"
        )
    _write_json(
        _out(cfg, "characterize.json"),
        {
            "detuning_mhz": cfg.detuning_mhz,
            "threshold": cfg.threshold,
            "warnings": any(r.get("warning", False) for r in reports),
            "pulses": reports,
            "config": cfg.as_dict(),
        },
    )
    return EXIT_OK


def cmd_simulate(cfg):
    seq = _need_sequence(cfg)
    ens = cfg.ensemble_spec()
    relax = cfg.relaxation_spec()
    b0 = np.asarray(cfg.initial, dtype=float)
    if cfg.frame == "lab" and relax.enabled:
        raise UsageError("relaxation is only available in the rotating frame")
    res = ensemble_evolve(seq, ens, b0, cfg.tol, relax, cfg.samples)
    finals_lab = res.class_finals_lab()
    mean_lab = res.mean_final_lab()

    if cfg.frame == "lab":
        tl = seq.timeline()
        ref = seq.omega_ref
        ts = res.mean.times
        lab_finals, lab_states = evolve_classes(tl, ref, res.detunings, b0, cfg.tol, relax, ts, lab=True)
        traj_states = np.tensordot(res.weights, lab_states, axes=1)
        with open(_out(cfg, "rwa_comparison.csv"), "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["class_index", "detuning_mhz", "u_rwa", "v_rwa", "w_rwa", "u_lab", "v_lab", "w_lab", "angle_deg"])
            print(f"{'class':>5} {'detuning_MHz':>13} {'w_rwa':>10} {'w_lab':>10} {'angle_deg':>10}")
            for k, (d, a, b) in enumerate(zip(res.detunings, finals_lab, lab_finals)):
                ang = _angle_deg(a, b)
                w.writerow([k, _f(to_mhz(d)), *map(_f, a), *map(_f, b), _f(ang)])
                print(f"{k:>5} {to_mhz(d):>13.6f} {a[2]:>10.6f} {b[2]:>10.6f} {ang:>10.5f}")
        worst = max(_angle_deg(a, b) for a, b in zip(finals_lab, lab_finals))
        print(f"rotating-wave vs full-field: worst class differs by {worst:.4f} deg")
    else:
        traj_states = res.mean.states
        worst = None

    with open(_out(cfg, "trajectory.csv"), "w", newline="") as fh:
        write_trajectory_csv(fh, res.mean.times, traj_states)
    with open(_out(cfg, "finals.csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["class_index", "detuning_mhz", "weight", "u", "v", "w", "angle_from_initial_deg"])
        for k, (d, wt, f) in enumerate(zip(res.detunings, res.weights, finals_lab)):
            w.writerow([k, _f(to_mhz(d)), _f(wt), *map(_f, f), _f(_angle_deg(f, b0))])
    mean_angle = _angle_deg(mean_lab, b0)
    class_angles = [_angle_deg(f, b0) for f in finals_lab]
    summary = {
        "frame": cfg.frame,
        "n_classes": int(res.detunings.size),
        "duration_us": seq.duration,
        "mean_final_lab": mean_lab,
        "mean_length": float(np.linalg.norm(mean_lab)),
        "mean_angle_from_initial_deg": mean_angle,
        "max_class_angle_from_initial_deg": max(class_angles),
        "rwa_worst_angle_deg": worst,
        "config": cfg.as_dict(),
    }
    _write_json(_out(cfg, "simulate.json"), summary)
    print(
        f"simulate: {res.detunings.size} classes over {seq.duration:g} us; mean final within "
        f"{mean_angle:.3f} deg of initial (|mean| = {np.linalg.norm(mean_lab):.4f}); "
        f"worst class {max(class_angles):.2f} deg"
    )
    return EXIT_OK


def _readout_pair(seq):
    pulses = seq.pulses
    if not pulses:
        raise UsageError("sequence has no pulses to derive the readout passages from")
    try:
        return half_passages_of(pulses[0])
    except ShapeError as exc:
        raise UsageError(str(exc)) from None


def _scan_outputs(cfg, name, result, extra):
    with open(_out(cfg, f"{name}.csv"), "w", newline="") as fh:
        result.write_csv(fh)
    side = result.sidecar()
    side.update(extra)
    side["config"] = cfg.as_dict()
    _write_json(_out(cfg, f"{name}.json"), side)


def cmd_phase_scan(cfg):
    seq = _need_sequence(cfg)
    ahp, rahp = _readout_pair(seq)
    n = int(cfg.phase_scan.get("points", 17))
    if n < 3:
        raise UsageError("phase scan needs at least 3 points")
    deltas = 2.0 * math.pi * np.arange(n) / n
    res = phase_scan(
        deltas, seq, ahp, rahp, cfg.ensemble_spec(), cfg.relaxation_spec(), cfg.probe_model(), cfg.tol
    )
    i_max, i_min = int(np.argmax(res.ratio)), int(np.argmin(res.ratio))
    _scan_outputs(cfg, "phase_scan", res, {"argmax_delta_rad": deltas[i_max], "argmin_delta_rad": deltas[i_min]})
    print(
        f"phase scan: {n} points; max ratio {res.ratio[i_max]:.5f} at delta = {deltas[i_max]:.4f} rad, "
        f"min {res.ratio[i_min]:.5f} at {deltas[i_min]:.4f} rad; fitted alpha_hat = {res.alpha_hat:.4f} rad"
    )
    return EXIT_OK


def cmd_tau_scan(cfg):
    seq = _need_sequence(cfg)
    try:
        shape = seq.canonical()
    except ShapeError as exc:
        raise UsageError(str(exc)) from None
    ahp, rahp = _readout_pair(seq)
    tau1 = [float(x) for x in cfg.tau_scan.get("tau1_us", [2.0, 4.0, 6.0, 8.0])]
    tau2 = float(cfg.tau_scan.get("tau2_us", shape.tau2))
    res = tau_scan(
        tau1,
        tau2,
        shape.pulse_a,
        shape.pulse_b,
        ahp,
        rahp,
        cfg.ensemble_spec(),
        cfg.relaxation_spec(),
        cfg.probe_model(),
        cfg.tol,
        delta_offset=float(cfg.tau_scan.get("delta_offset_rad", 0.0)),
        tau3_offset=float(cfg.tau_scan.get("tau3_offset_us", 0.0)),
    )
    spread = float(np.ptp(res.ratio) / np.mean(res.ratio))
    _scan_outputs(cfg, "tau_scan", res, {"relative_spread": spread})
    print(f"tau scan: {len(tau1)} points, ratios {np.round(res.ratio, 5).tolist()}, relative spread {100 * spread:.3f}%")
    return EXIT_OK


def _error_pulse(omega, q, edge_ratio):
    r = omega * omega / q
    half = omega / edge_ratio
    T = 2.0 * half / r
    return chirped_arp(100.0, omega, 2.0 * half, T), r


def cmd_compare_errors(cfg):
    e = cfg.errors
    unknown = set(e) - set(RunConfig().errors)
    if unknown:
        raise UsageError(f"unknown errors keys: {sorted(unknown)}")
    omega = mhz(float(e["rabi_mhz"]))
    ratios = np.asarray(e["delta_over_rabi"], dtype=float)
    if ratios.size < 2 or np.any(ratios <= 0):
        raise UsageError("delta_over_rabi needs at least two positive values")
    deltas = ratios * omega
    phase = float(e["phase"])
    a1, a2 = (float(x) for x in e["tau_phases"])
    pulse, r = _error_pulse(omega, float(e["adiabaticity"]), float(e["edge_ratio"]))

    rows = []
    for d in deltas:
        tau, t1, t2 = 0.5 * phase / d, a1 / d, a2 / d
        rows.append(
            (
                d,
                tau,
                epsilon_pi(d, omega, tau),
                measure_epsilon_pi(d, omega, tau, cfg.tol),
                epsilon_2pi(d, omega, t1, t2),
                measure_epsilon_2pi(d, omega, t1, t2, tol=cfg.tol),
                epsilon_arp(d, r),
                measure_epsilon_arp(d, pulse, tau, cfg.tol),
            )
        )
    arr = np.array(rows)
    with open(_out(cfg, "errors.csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(
            [
                "delta_rad_per_us",
                "tau_us",
                "eps_pi_rad",
                "eps_pi_measured_rad",
                "eps_2pi_rad",
                "eps_2pi_measured_rad",
                "eps_arp_rad",
                "eps_arp_measured_rad",
            ]
        )
        for row in arr:
            w.writerow([_f(x) for x in row])

    rng = np.random.default_rng(cfg.seed)
    coeffs = []
    for _ in range(int(e["random_sets"])):
        p1 = rng.uniform(0.1, 1.5)
        p2 = p1 + rng.uniform(0.1, 1.5)
        x = float(ratios[0])
        d = x * omega
        meas = measure_epsilon_2pi(d, omega, p1 / d, p2 / d, tol=cfg.tol)
        closed = epsilon_2pi(d, omega, p1 / d, p2 / d)
        coeffs.append({"tau1_phase": p1, "tau2_phase": p2, "residual_over_cube": (meas + closed) / x**3})

    slopes = {
        "eps_pi": loglog_slope(deltas, arr[:, 3]),
        "eps_2pi": loglog_slope(deltas, arr[:, 5]),
        "eps_arp": loglog_slope(deltas, arr[:, 7]),
    }
    resid = arr[:, 5] + arr[:, 4]
    summary = {
        "rabi_rad_per_us": omega,
        "chirp_rate_rad_per_us2": r,
        "adiabaticity_rabi2_over_r": omega * omega / r,
        "slopes_measured": slopes,
        "eps_2pi_residual_over_cube": (resid / ratios**3).tolist(),
        "eps_2pi_random_sets": coeffs,
        "arp_over_pi_measured": (np.abs(arr[:, 7]) / np.abs(arr[:, 3])).tolist(),
        "config": cfg.as_dict(),
    }
    _write_json(_out(cfg, "errors.json"), summary)
    print("log-log slopes vs delta: " + ", ".join(f"{k} = {v:.3f}" for k, v in slopes.items()))
    print(f"eps_2pi residual / (delta/Omega)^3: {np.round(resid / ratios**3, 4).tolist()}")
    return EXIT_OK


def cmd_parse_check(cfg):
    seq = _need_sequence(cfg)
    print(f"{cfg.sequence}: {len(seq.elements)} elements, {len(seq.pulses)} pulses, {seq.duration:g} us")
    print(f"reference carrier {to_mhz(seq.omega_ref):g} MHz")
    for i, (t0, t1, p) in enumerate(seq.timeline()):
        what = "delay" if p is None else f"pulse {p.kind}"
        print(f"  [{i}] {t0:10.4f} .. {t1:10.4f} us  {what}")
    out = {"elements": len(seq.elements), "pulses": len(seq.pulses), "duration_us": seq.duration}
    try:
        seq.canonical()
    except ShapeError:
        pass
    else:
        rep = analyze_rephasing(seq, cfg.ensemble_spec(), cfg.threshold)
        out["rephasing"] = rep.summary()
        print(
            f"rephasing: alpha = {rep.alpha:.6f} rad, z-rotation {rep.is_z_rotation}, "
            f"tau condition {rep.condition_tau} (residual {rep.tau_residual:g} us), "
            f"chi mismatch {rep.condition_chi:.3g} rad"
        )
    if cfg.out != Path("."):
        _write_json(_out(cfg, "parse_check.json"), out)
    return EXIT_OK


COMMANDS = {
    "characterize": (cmd_characterize, "per-pulse adiabaticity and axis diagnostics"),
    "simulate": (cmd_simulate, "integrate an ensemble through a sequence"),
    "phase-scan": (cmd_phase_scan, "readout ratio against the rAHP phase"),
    "tau-scan": (cmd_tau_scan, "readout ratio against tau1 with tau3 = tau2 - tau1"),
    "compare-errors": (cmd_compare_errors, "closed-form echo errors against brute-force integration"),
    "parse-check": (cmd_parse_check, "parse a sequence file and report its timeline"),
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON run configuration")
    common.add_argument("--seq", metavar="PATH", help="sequence file (overrides config)")
    common.add_argument("--out", metavar="DIR", help="output directory (default: current directory)")
    common.add_argument("--tol", type=float, help=f"integrator tolerance in [{TOL_RANGE[0]:g}, {TOL_RANGE[1]:g}]")
    common.add_argument("--classes", type=int, help="number of detuning classes")
    common.add_argument("--seed", type=int, help="seed for randomized sweeps")
    common.add_argument("--frame", choices=("rotating", "lab"), help="integration frame for simulate")
    parser = argparse.ArgumentParser(
        prog="bloch-rephase",
        description="Construct and verify chirped-pulse rephasing sequences.",
        epilog="Exit status: 0 success, 1 numerical or validity failure, 2 usage or I/O error.",
    )
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True
    for name, (_, help_) in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=help_, description=help_)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    func = COMMANDS[args.command][0]
    cfg = None
    try:
        cfg = load_config(args)
        return func(cfg)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SequenceSyntaxError, SequenceSemanticError) as exc:
        where = f"{cfg.sequence}: " if cfg is not None else ""
        print(f"error: {where}{exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        name = exc.filename if exc.filename is not None else ""
        print(f"error: {name}: {exc.strerror}", file=sys.stderr)
        return EXIT_USAGE
    except BlochRephaseError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
