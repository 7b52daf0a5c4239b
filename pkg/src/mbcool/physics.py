"""Thermal resonator states, Fock truncation and unit conventions.

Computation runs with hbar = 1: every frequency, coupling and detuning is an
angular frequency in rad/s and every interval is in seconds.  SI constants
only enter when converting a bath temperature to the dimensionless
Boltzmann exponent ``hbar * omega / (k_B * T)``.

The constants are the three-significant-figure values ``HBAR = 1.055e-34 J s``
and ``K_B = 1.38e-23 J/K``.  With them, 1.4e9 rad/s at 0.1 K gives a mean
occupation of 8.85 (and 1.68e9 rad/s gives 7.30); the CODATA values give
8.86.  ``CODATA_HBAR`` / ``CODATA_K_B`` are kept for callers that want them.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import constants as _sc

from .errors import InvalidArgument, TruncationOverflow

HBAR = 1.055e-34  # J s
K_B = 1.38e-23  # J / K
CODATA_HBAR = _sc.hbar
CODATA_K_B = _sc.k


@dataclass(frozen=True)
class ModeSpec:
    """One resonator mode and its coupling to the ancilla transition."""

    omega: float  # rad/s
    coupling: float  # rad/s
    detuning: float  # rad/s
    temperature: float  # K

    def __post_init__(self):
        for name in ("omega", "coupling", "detuning", "temperature"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidArgument(f"{name} must be finite")
        if self.omega <= 0:
            raise InvalidArgument("omega must be > 0")
        if self.coupling < 0:
            raise InvalidArgument("coupling must be >= 0")
        if self.temperature < 0:
            raise InvalidArgument("temperature must be >= 0")


@dataclass(frozen=True)
class TruncationPolicy:
    """How far each mode's Fock basis extends.

    ``tail_epsilon`` bounds the discarded Boltzmann mass per mode and
    ``hard_cap`` is the largest cutoff allowed.  The last two fields only
    matter for K >= 3 states: ``max_grid_entries`` limits the size of a dense
    (sector) grid and ``joint_tail_epsilon`` is the mass a pruned sparse
    multi-index map may drop.
    """

    tail_epsilon: float = 1e-12
    hard_cap: int = 1024
    joint_tail_epsilon: float = 1e-9
    max_grid_entries: int = 20_000_000

    def __post_init__(self):
        if not 0 < self.tail_epsilon < 1:
            raise InvalidArgument("tail_epsilon must lie in (0, 1)")
        if self.hard_cap < 1:
            raise InvalidArgument("hard_cap must be >= 1")
        if not 0 < self.joint_tail_epsilon < 1:
            raise InvalidArgument("joint_tail_epsilon must lie in (0, 1)")
        if self.max_grid_entries < 1:
            raise InvalidArgument("max_grid_entries must be >= 1")


@dataclass(frozen=True, eq=False)
class ThermalPopulations:
    populations: np.ndarray
    mean_occupation: float

    @property
    def cutoff(self) -> int:
        return len(self.populations) - 1


def _check_omega_temperature(omega, temperature):
    if not (math.isfinite(omega) and omega > 0):
        raise InvalidArgument(f"omega must be finite and > 0, got {omega!r}")
    if not (math.isfinite(temperature) and temperature >= 0):
        raise InvalidArgument(f"temperature must be finite and >= 0, got {temperature!r}")


def boltzmann_exponent(omega: float, temperature: float) -> float:
    """hbar*omega/(k_B*T); infinite at T = 0."""
    _check_omega_temperature(omega, temperature)
    thermal_energy = K_B * temperature
    if thermal_energy == 0:
        return math.inf
    return HBAR * omega / thermal_energy


def bose_einstein_occupation(omega: float, temperature: float) -> float:
    x = boltzmann_exponent(omega, temperature)
    if x > 700.0:  # expm1 overflows past ~709; the occupation is e^-x there
        return math.exp(-x)
    return 1.0 / math.expm1(x)


def choose_truncation(omega: float, temperature: float, policy: TruncationPolicy | None = None) -> int:
    """Smallest cutoff N with Boltzmann tail mass r**(N+1) < tail_epsilon.

    Raises TruncationOverflow when N would exceed ``policy.hard_cap``.
    """
    policy = policy or TruncationPolicy()
    x = boltzmann_exponent(omega, temperature)
    if math.isinf(x):
        return 1
    # r**(N+1) < eps  <=>  N + 1 > -ln(eps)/x
    bound = -math.log(policy.tail_epsilon) / x
    cutoff = max(1, math.floor(bound))
    if cutoff > policy.hard_cap:
        raise TruncationOverflow(cutoff, policy.hard_cap)
    return cutoff


def thermal_populations(omega: float, temperature: float,
                        policy: TruncationPolicy | None = None) -> ThermalPopulations:
    policy = policy or TruncationPolicy()
    cutoff = choose_truncation(omega, temperature, policy)
    x = boltzmann_exponent(omega, temperature)
    if math.isinf(x):
        # all mass on the vacuum; the trailing zero of the minimum basis is dropped
        return ThermalPopulations(np.array([1.0]), 0.0)
    n = np.arange(cutoff + 1)
    weights = -np.expm1(-x) * np.exp(-x * n)
    p = weights / weights.sum()
    return ThermalPopulations(p, float(p @ n))
