"""Repeated evolve-then-measure rounds on diagonal joint states.

Each round multiplies every population by its cooling ratio, keeps the
pre-normalization mass as the round's conditional survival probability and
renormalizes.  The cumulative survival probability is the running product
of round survivals, which equals sum |alpha|^(2N) p without ever forming
the underflow-prone power.
"""
from __future__ import annotations

import csv
import logging
import math
import string
from dataclasses import dataclass, field

import numpy as np

from .errors import AlreadyCold, InvalidArgument, NumericError
from .kernel import CLOSED_FORM, ORACLE, CoolingMap, kernel_for_state, uniform_detuning
from .physics import HBAR, K_B

log = logging.getLogger(__name__)

EQUAL = "equal"
ITERATIVE = "iterative"


def mode_label(k: int) -> str:
    if k < 26:
        return string.ascii_lowercase[k]
    return f"m{k}"


def resolve_kernel(kind, specs) -> str:
    if kind == "auto":
        return CLOSED_FORM if uniform_detuning(list(specs)) else ORACLE
    if kind not in (CLOSED_FORM, ORACLE):
        raise InvalidArgument(f"unknown kernel {kind!r}")
    return kind


@dataclass(frozen=True)
class Schedule:
    """Measurement timing.

    ``equal``: every round uses ``interval`` (seconds), or the analytic
    optimum for the initial state when ``interval`` is None.
    ``iterative``: the first interval is the analytic optimum for the
    initial state and it is recomputed from the current means after rounds
    L, 2L, 3L, ... where L is ``update_every``.
    """

    kind: str = EQUAL
    rounds: int = 1
    interval: float | None = None
    update_every: int = 1

    def __post_init__(self):
        if self.kind not in (EQUAL, ITERATIVE):
            raise InvalidArgument(f"schedule kind must be 'equal' or 'iterative', got {self.kind!r}")
        if int(self.rounds) != self.rounds or self.rounds < 1:
            raise InvalidArgument("rounds must be an integer >= 1")
        if int(self.update_every) != self.update_every or self.update_every < 1:
            raise InvalidArgument("update_every must be an integer >= 1")
        if self.interval is not None and not (math.isfinite(self.interval) and self.interval > 0):
            raise InvalidArgument("interval must be > 0")


@dataclass(eq=False)
class RunRecord:
    """Per-round observables; row 0 is the initial state."""

    mode_labels: list
    intervals: list = field(default_factory=list)
    survival_round: list = field(default_factory=list)
    survival_cum: list = field(default_factory=list)
    nbar_modes: list = field(default_factory=list)
    fidelities: dict = field(default_factory=dict)
    teff: list = field(default_factory=list)
    interval_decreases: list = field(default_factory=list)
    final_state: object = None

    @property
    def rounds(self) -> int:
        return len(self.intervals) - 1

    @property
    def nbar_total(self) -> np.ndarray:
        return np.asarray(self.nbar_modes).sum(axis=1)

    def mode_means(self, k) -> np.ndarray:
        return np.asarray(self.nbar_modes)[:, k]

    def columns(self) -> list:
        cols = ["round", "interval_s", "survival_round", "survival_cum", "nbar_total"]
        cols += [f"nbar_mode_{lab}" for lab in self.mode_labels]
        cols += [f"fid_{name}" for name in self.fidelities]
        cols += [f"Teff_mode_{lab}_K" for lab in self.mode_labels]
        return cols

    def rows(self):
        total = self.nbar_total
        for i in range(len(self.intervals)):
            row = [i, self.intervals[i], self.survival_round[i], self.survival_cum[i], total[i]]
            row += list(self.nbar_modes[i])
            row += [series[i] for series in self.fidelities.values()]
            row += list(self.teff[i])
            yield row

    def to_csv(self, path, columns=None):
        cols = self.columns()
        keep = list(range(len(cols))) if columns is None else [cols.index(c) for c in columns]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow([cols[j] for j in keep])
            for row in self.rows():
                w.writerow([_fmt(row[j]) for j in keep])


def _fmt(v):
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def mean_occupation(state, mode_index: int) -> float:
    return state.mean(mode_index)


def ground_fidelity(state, subset) -> float:
    """Ground population of the marginal over ``subset`` (mode indices)."""
    return min(1.0, max(0.0, state.ground_population(subset)))


def effective_temperature(mean_occupation: float, omega: float) -> float:
    """Temperature (K) of the thermal state with this mean; 0 K for a zero mean."""
    if not (math.isfinite(omega) and omega > 0):
        raise InvalidArgument("omega must be finite and > 0")
    if mean_occupation < 0:
        raise InvalidArgument("mean occupation must be >= 0")
    if mean_occupation == 0:
        return 0.0
    return HBAR * omega / (K_B * math.log1p(1.0 / mean_occupation))


def _align(state, cmap: CoolingMap):
    r = cmap.ratios
    p = state.populations
    if r.shape == p.shape:
        return r
    if r.ndim == p.ndim and all(a >= b for a, b in zip(r.shape, p.shape)) and \
            not getattr(state, "is_grouped", True):
        return r[tuple(slice(0, s) for s in p.shape)]
    raise InvalidArgument(f"cooling map shape {r.shape} does not cover state shape {p.shape}")


def apply_round(state, cmap: CoolingMap):
    """One evolve-and-measure round; returns (new_state, round_survival)."""
    q = state.populations * _align(state, cmap)
    survival = float(q.sum())
    if not survival > 0:
        raise NumericError("measurement annihilated the whole ensemble (survival 0)")
    return state.with_populations(q / survival), survival


def current_means(state):
    return [state.mean(k) for k in range(state.n_modes)]


def equal_spacing_final(initial, tau, rounds, specs, kernel=CLOSED_FORM):
    """p * ratio**N in one pass; returns (final_state, cumulative survival)."""
    cmap = kernel_for_state(initial, specs, resolve_kernel(kernel, specs))(tau)
    q = initial.populations * _align(initial, cmap) ** int(rounds)
    pg = float(q.sum())
    if not pg > 0:
        raise NumericError("cumulative survival underflowed to zero")
    return initial.with_populations(q / pg), pg


def run_protocol(initial, schedule: Schedule, specs, kernel=CLOSED_FORM, fidelity_subsets=None,
                 mode_labels=None):
    """Fold ``schedule.rounds`` rounds over ``initial`` and record observables.

    ``fidelity_subsets`` maps a column name to mode indices; the default is
    ``{"mode_<first label>": (0,), "total": all modes}``.
    """
    from .interval import analytic_optimal_interval, thermal_rabi

    specs = list(specs)
    K = len(specs)
    if initial.n_modes != K:
        raise InvalidArgument(f"state has {initial.n_modes} modes but {K} specs were given")
    kernel = resolve_kernel(kernel, specs)
    labels = list(mode_labels) if mode_labels is not None else [mode_label(k) for k in range(K)]
    if len(labels) != K:
        raise InvalidArgument("one label per mode is required")
    if fidelity_subsets is None:
        fidelity_subsets = {f"mode_{labels[0]}": (0,), "total": tuple(range(K))}
    couplings = [s.coupling for s in specs]
    evaluate = kernel_for_state(initial, specs, kernel)

    rec = RunRecord(labels)
    rec.fidelities = {name: [] for name in fidelity_subsets}

    def observe(state, tau, surv, cum):
        means = current_means(state)
        rec.intervals.append(tau)
        rec.survival_round.append(surv)
        rec.survival_cum.append(cum)
        rec.nbar_modes.append(means)
        for name, subset in fidelity_subsets.items():
            rec.fidelities[name].append(ground_fidelity(state, subset))
        rec.teff.append([effective_temperature(max(m, 0.0), s.omega) for m, s in zip(means, specs)])
        return means

    state = initial
    means = observe(state, 0.0, 1.0, 1.0)
    if schedule.kind == EQUAL and schedule.interval is not None:
        tau = float(schedule.interval)
    else:
        tau = analytic_optimal_interval(thermal_rabi(means, couplings))

    cum = 1.0
    for i in range(1, schedule.rounds + 1):
        if schedule.kind == ITERATIVE and i > 1 and (i - 1) % schedule.update_every == 0:
            previous = tau
            try:
                tau = analytic_optimal_interval(thermal_rabi(means, couplings))
            except AlreadyCold:
                log.info("state is in its ground state after round %d; keeping interval", i - 1)
            if tau < previous:
                rec.interval_decreases.append(i)
                log.warning("interval decreased at round %d: %.6g s -> %.6g s", i, previous, tau)
        state, surv = apply_round(state, evaluate(tau))
        cum *= surv
        means = observe(state, tau, surv, cum)
    rec.final_state = state
    return rec
