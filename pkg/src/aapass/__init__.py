"""Counter-diabatic assisted adiabatic passage in a driven two-level system.

Simulation of the dimensionless Landau-Zener + counter-diabatic model, and
compilation of the scan into analog or constant-amplitude (rapid-scan) pulse
schedules for an arbitrary waveform generator.
"""

from .analysis import (
    LossReport,
    SearchError,
    SpeedupReport,
    find_unassisted_duration,
    loss_budget,
    lz_transition_probability,
    theory_curve,
)
from .compiler import (
    CompileError,
    CompilerConfig,
    ConfigError,
    PulseSegment,
    Schedule,
    analog_scale_factor,
    analog_scan_duration,
    compile_analog,
    compile_multipass,
    compile_rapid,
    compile_schedule,
    quantize,
)
from .frames import LabFrameConfig, lab_field_components, rwa_amplitude, xi_phase
from .model import (
    DomainError,
    FieldVector,
    ModelParams,
    SpinorState,
    energy_gap,
    field_vector,
    ground_state,
    hamiltonian,
    lambda_of_t,
    mixing_angle,
    v_cd,
)
from .propagator import (
    EvolutionTrace,
    Propagator2,
    evolve,
    evolve_oracle,
    lab_frame_evolve,
    su2_step,
)

__version__ = "0.1.0"

__all__ = [
    "CompileError",
    "CompilerConfig",
    "ConfigError",
    "DomainError",
    "EvolutionTrace",
    "FieldVector",
    "LabFrameConfig",
    "LossReport",
    "ModelParams",
    "Propagator2",
    "PulseSegment",
    "Schedule",
    "SearchError",
    "SpeedupReport",
    "SpinorState",
    "analog_scale_factor",
    "analog_scan_duration",
    "compile_analog",
    "compile_multipass",
    "compile_rapid",
    "compile_schedule",
    "energy_gap",
    "evolve",
    "evolve_oracle",
    "field_vector",
    "find_unassisted_duration",
    "ground_state",
    "hamiltonian",
    "lab_field_components",
    "lab_frame_evolve",
    "lambda_of_t",
    "loss_budget",
    "lz_transition_probability",
    "mixing_angle",
    "quantize",
    "rwa_amplitude",
    "su2_step",
    "theory_curve",
    "v_cd",
    "xi_phase",
]
