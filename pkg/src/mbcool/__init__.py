"""Measurement-based simultaneous ground-state cooling of resonator modes."""
from .errors import (AlreadyCold, ConfigError, ExpansionDomainError, InvalidArgument,
                     KernelMismatch, NumericError, TruncationOverflow)
from .interval import (ScanResult, ThermalRabi, analytic_optimal_interval, perturbative_mean,
                       scan_interval, thermal_rabi)
from .kernel import (CoolingMap, RabiSpectrum, alpha_multi_mode, alpha_single_mode,
                     alpha_two_mode, build_cooling_map, cooling_map_for, rabi_two_mode)
from .oracle import (ManifoldBlock, exact_ground_amplitude, ground_amplitude_expm,
                     manifold_block, oracle_cooling_map)
from .physics import (HBAR, K_B, ModeSpec, ThermalPopulations, TruncationPolicy,
                      bose_einstein_occupation, choose_truncation, thermal_populations)
from .protocol import (RunRecord, Schedule, apply_round, effective_temperature,
                       equal_spacing_final, ground_fidelity, mean_occupation, run_protocol)
from .state import JointDiagonalState, SparseJointState, joint_state_from_thermal

__version__ = "0.1.0"
