"""Analytic construction and numerical verification of chirped-pulse rephasing sequences."""

__version__ = "0.1.0"

from .arp import (
    ArpCharacterization,
    AxisAngle,
    adiabaticity_zeta,
    arp_matrix,
    characterize,
    equatorial_axis_phi,
    off_resonance_ratios,
    precession_angle_chi,
    rotation_axis_angle,
    signed_z_angle,
)
from .core import AtomSpec, BlochVector, Frame, control_vector, free_evolution_matrix, rot_z
from .ensemble import NO_RELAXATION, EnsembleSpec, RelaxationSpec
from .errors import (
    BlochRephaseError,
    ConditionError,
    DegenerateControlError,
    DomainError,
    SequenceSemanticError,
    SequenceSyntaxError,
    ShapeError,
    StiffnessError,
    ValidityError,
)
from .experiments import (
    ProbeModel,
    echo_error_report,
    epsilon_2pi,
    epsilon_arp,
    epsilon_inversion_pi,
    epsilon_pi,
    half_passages_of,
    phase_scan,
    readout_half_passages,
    run_preparation_readout,
    tau_scan,
)
from .oracle import Trajectory, coherence_time, ensemble_evolve, integrate_lab, integrate_rotating
from .pulses import PulseSpec, chirped_arp, half_passage, square_pulse
from .seqfile import load_sequence, parse_sequence_file
from .sequence import Delay, SequenceSpec, analyze_rephasing, compose, rephasing_sequence
from .units import khz, mhz

__all__ = [
    "ArpCharacterization",
    "AtomSpec",
    "AxisAngle",
    "BlochRephaseError",
    "BlochVector",
    "ConditionError",
    "DegenerateControlError",
    "Delay",
    "DomainError",
    "EnsembleSpec",
    "Frame",
    "NO_RELAXATION",
    "ProbeModel",
    "PulseSpec",
    "RelaxationSpec",
    "SequenceSemanticError",
    "SequenceSpec",
    "SequenceSyntaxError",
    "ShapeError",
    "StiffnessError",
    "Trajectory",
    "ValidityError",
    "adiabaticity_zeta",
    "analyze_rephasing",
    "arp_matrix",
    "characterize",
    "chirped_arp",
    "coherence_time",
    "compose",
    "control_vector",
    "echo_error_report",
    "ensemble_evolve",
    "epsilon_2pi",
    "epsilon_arp",
    "epsilon_inversion_pi",
    "epsilon_pi",
    "equatorial_axis_phi",
    "free_evolution_matrix",
    "half_passage",
    "half_passages_of",
    "integrate_lab",
    "integrate_rotating",
    "khz",
    "load_sequence",
    "mhz",
    "off_resonance_ratios",
    "parse_sequence_file",
    "phase_scan",
    "precession_angle_chi",
    "readout_half_passages",
    "rephasing_sequence",
    "rot_z",
    "rotation_axis_angle",
    "run_preparation_readout",
    "signed_z_angle",
    "square_pulse",
    "tau_scan",
]
