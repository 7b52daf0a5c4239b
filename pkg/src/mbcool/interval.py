"""Optimal measurement interval: analytic rule, its expansion, and a scan."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .errors import AlreadyCold, ExpansionDomainError, InvalidArgument
from .kernel import CLOSED_FORM, kernel_for_state, uniform_detuning
from .protocol import current_means, resolve_kernel
from .state import joint_state_from_thermal


@dataclass(frozen=True, eq=False)
class ThermalRabi:
    value: float  # rad/s
    contributions: tuple  # g_k^2 * nbar_k per mode


@dataclass(frozen=True, eq=False)
class ScanResult:
    grid: np.ndarray  # s
    objective: np.ndarray
    minimizer: float
    minimum: float
    initial_mean: float

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["tau_s", "nbar_after_one_measurement"])
            for t, v in zip(self.grid, self.objective):
                w.writerow([repr(float(t)), repr(float(v))])

    def metadata(self) -> dict:
        return {"minimizer_tau_s": float(self.minimizer),
                "minimum_nbar": float(self.minimum),
                "initial_nbar": float(self.initial_mean),
                "samples": int(len(self.grid)),
                "tau_max_s": float(self.grid[-1])}

    def write_metadata(self, path):
        with open(path, "w") as fh:
            json.dump(self.metadata(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def thermal_rabi(means, couplings) -> ThermalRabi:
    means = list(means)
    couplings = list(couplings)
    if len(means) != len(couplings):
        raise InvalidArgument("means and couplings must have the same length")
    if any(m < 0 for m in means):
        raise InvalidArgument("mean occupations must be >= 0")
    contrib = tuple(g * g * m for g, m in zip(couplings, means))
    return ThermalRabi(math.sqrt(math.fsum(contrib)), contrib)


def analytic_optimal_interval(rabi: ThermalRabi) -> float:
    if rabi.value <= 0:
        raise AlreadyCold("thermal Rabi frequency is zero: every mode is already in its ground state")
    return 1.0 / rabi.value


def _total_excitation(state):
    tot = 0
    for a in state.kernel_indices():
        tot = tot + a
    return np.broadcast_to(np.asarray(tot, dtype=float), state.populations.shape)


def _weighted_excitation(state, specs):
    s = 0.0
    for a, sp in zip(state.kernel_indices(), specs):
        s = s + sp.coupling ** 2 * a
    return np.broadcast_to(np.asarray(s, dtype=float), state.populations.shape)


def perturbative_mean(tau, specs, means=None, order=2, *, state=None, policy=None) -> float:
    """Total mean after one measurement, denominator expanded to order tau^2.

    The numerator sum(n p |alpha|^2) is exact; the denominator sum(p |alpha|^2)
    becomes 1 - W^2 tau^2 [sin(x)/x]^2 with x = delta*tau/2 and W the thermal
    Rabi frequency of ``means``.  Validity ends where that denominator
    vanishes; tau >= 1/W is rejected (the pole itself, on resonance).
    """
    specs = list(specs)
    if order != 2:
        raise InvalidArgument("only the order-tau^2 expansion is available")
    if not uniform_detuning(specs):
        raise InvalidArgument("the expansion assumes equal detunings")
    if not (math.isfinite(tau) and tau >= 0):
        raise InvalidArgument("tau must be finite and >= 0")
    state = state or joint_state_from_thermal(specs, policy)
    if means is None:
        means = current_means(state)
    w = thermal_rabi(means, [s.coupling for s in specs]).value
    x = specs[0].detuning * tau / 2
    sinc = 1.0 if x == 0 else math.sin(x) / x
    # domain ends at tau = 1/W; detuning only moves the true pole outward
    if w * tau >= 1.0:
        raise ExpansionDomainError(
            f"tau = {tau:.6g} s is at or past the expansion singularity 1/W = {1 / w:.6g} s"
            if w > 0 else "tau is outside the expansion domain")
    denom = 1.0 - (w * tau * sinc) ** 2
    ratios = kernel_for_state(state, specs, CLOSED_FORM).ratios(tau)
    num = float((state.populations * ratios * _total_excitation(state)).sum())
    return num / denom


def _one_measurement_objective(state, specs, kernel):
    evaluate = kernel_for_state(state, specs, kernel)
    weights = state.populations
    tot = _total_excitation(state)

    def objective(tau):
        q = weights * evaluate.ratios(tau)
        return float((q * tot).sum() / q.sum())
    return objective


def scan_interval(initial, specs, tau_max, samples, kernel=CLOSED_FORM, refine=True) -> ScanResult:
    """Total mean after one measurement on a uniform tau grid [0, tau_max].

    The grid minimizer (smallest tau on ties) is refined by golden-section
    search inside its bracketing triple.
    """
    specs = list(specs)
    if int(samples) != samples or samples < 2:
        raise InvalidArgument("samples must be an integer >= 2")
    if not (math.isfinite(tau_max) and tau_max > 0):
        raise InvalidArgument("tau_max must be finite and > 0")
    f = _one_measurement_objective(initial, specs, resolve_kernel(kernel, specs))
    grid = np.linspace(0.0, float(tau_max), int(samples))
    obj = np.array([f(t) for t in grid])
    i = int(np.argmin(obj))
    best_t, best_v = float(grid[i]), float(obj[i])
    if refine and 0 < i < len(grid) - 1 and obj[i - 1] > obj[i] < obj[i + 1]:
        a, c = float(grid[i - 1]), float(grid[i + 1])
        try:
            res = optimize.minimize_scalar(f, bracket=(a, best_t, c), method="golden",
                                           options={"xtol": 1e-10})
        except ValueError:
            res = None
        if res is not None and a <= res.x <= c and res.fun < best_v:
            best_t, best_v = float(res.x), float(res.fun)
    initial_mean = float(obj[0]) if grid[0] == 0 else f(0.0)
    return ScanResult(grid, obj, best_t, best_v, initial_mean)
