"""Diagonal joint states of K resonator modes.

The protocol only ever multiplies Fock-basis populations by per-state
ratios, so a joint state is a vector of populations and coherences are never
stored.  Two layouts exist.

``JointDiagonalState`` is a dense grid.  For K <= 2 every mode is its own
axis and the grid is the ordinary product Fock basis.  For K >= 3, modes
that share the same coupling and detuning are merged into one axis that
holds their *total* excitation: inside such a group only the symmetric
("bright") combination couples to the ancilla, so the ground amplitude of
every Fock state depends on the group total alone.  The populations inside
a sector of fixed total therefore never change relative to each other, and
per-mode marginals can be rebuilt exactly from the initial per-mode thermal
vectors.

``SparseJointState`` is a map from explicit multi-indices to populations,
pruned to a joint mass budget.  It is the fallback when a grid would be too
large, e.g. K >= 3 modes that all have different couplings.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import InvalidArgument, TruncationOverflow
from .physics import ModeSpec, TruncationPolicy, thermal_populations

K_MAX = 12
NORM_TOL = 1e-10


def grid_kernel_indices(shape, groups) -> list:
    """Per-mode Fock numbers that fix each grid cell's cooling ratio.

    Arrays broadcast against a grid of ``shape``.  For a merged group the
    whole group total is assigned to its first mode and the others get
    zero, which is exact under the bright-mode reduction.
    """
    ndim = len(shape)
    out = [None] * sum(len(g) for g in groups)
    for a, g in enumerate(groups):
        axis_shape = [1] * ndim
        axis_shape[a] = shape[a]
        out[g[0]] = np.arange(shape[a]).reshape(axis_shape)
        for k in g[1:]:
            out[k] = np.zeros([1] * ndim, dtype=int)
    return out


def _convolve_all(vectors):
    out = np.array([1.0])
    for v in vectors:
        out = np.convolve(out, v)
    return out


class _Sector:
    """Tables for one group of modes that share coupling and detuning."""

    def __init__(self, modes, components):
        self.modes = tuple(modes)
        self.components = {k: components[k] for k in self.modes}
        self.total = _convolve_all([components[k] for k in self.modes])
        # sectors whose prior weight underflowed carry no mass
        self._safe_total = np.where(self.total > 0, self.total, 1.0)

    def _without(self, excluded):
        return _convolve_all([self.components[k] for k in self.modes if k not in excluded])

    def conditional_mean(self, k):
        # E[n_k | group total = N]
        pk = self.components[k]
        num = np.convolve(pk * np.arange(len(pk)), self._without({k}))
        return num / self._safe_total

    def marginal(self, k, sector_mass):
        pk = self.components[k]
        v = np.where(self.total > 0, sector_mass / self._safe_total, 0.0)
        return pk * np.correlate(v, self._without({k}), mode="valid")

    def ground_factor(self, subset):
        # P(n_k = 0 for k in subset | group total = N)
        prod0 = math.prod(self.components[k][0] for k in subset)
        rest = self._without(set(subset))
        out = np.zeros_like(self.total)
        out[: len(rest)] = prod0 * rest
        return out / self._safe_total


@dataclass(frozen=True, eq=False)
class JointDiagonalState:
    populations: np.ndarray
    groups: tuple = None
    components: tuple = None

    def __post_init__(self):
        pops = np.asarray(self.populations, dtype=float)
        object.__setattr__(self, "populations", pops)
        if self.groups is None:
            object.__setattr__(self, "groups", tuple((k,) for k in range(pops.ndim)))
        else:
            object.__setattr__(self, "groups", tuple(tuple(g) for g in self.groups))
        if len(self.groups) != pops.ndim:
            raise InvalidArgument("one grid axis per mode group is required")
        modes = sorted(k for g in self.groups for k in g)
        if modes != list(range(len(modes))):
            raise InvalidArgument("groups must partition modes 0..K-1")
        if any(len(g) > 1 for g in self.groups) and self.components is None:
            raise InvalidArgument("grouped axes need per-mode component vectors")

    @classmethod
    def from_populations(cls, populations) -> "JointDiagonalState":
        """Dense state with one axis per mode, normalized on the way in."""
        p = np.asarray(populations, dtype=float)
        if p.ndim < 1 or p.size == 0:
            raise InvalidArgument("populations must be a non-empty array")
        if np.any(p < 0) or not np.all(np.isfinite(p)):
            raise InvalidArgument("populations must be finite and non-negative")
        total = p.sum()
        if total <= 0:
            raise InvalidArgument("populations must carry positive mass")
        return cls(p / total)

    @property
    def n_modes(self) -> int:
        return sum(len(g) for g in self.groups)

    @property
    def dims(self) -> tuple:
        return tuple(s - 1 for s in self.populations.shape)

    @property
    def is_grouped(self) -> bool:
        return any(len(g) > 1 for g in self.groups)

    @cached_property
    def _sectors(self):
        if self.components is None:
            return {}
        return {a: _Sector(g, self.components) for a, g in enumerate(self.groups) if len(g) > 1}

    def with_populations(self, populations) -> "JointDiagonalState":
        return JointDiagonalState(populations, self.groups, self.components)

    def total_mass(self) -> float:
        return float(self.populations.sum())

    def _axis_of(self, k):
        for a, g in enumerate(self.groups):
            if k in g:
                return a
        raise InvalidArgument(f"mode index {k} out of range for {self.n_modes} modes")

    def _axis_mass(self, axis):
        others = tuple(a for a in range(self.populations.ndim) if a != axis)
        return self.populations.sum(axis=others)

    def kernel_indices(self) -> list:
        return grid_kernel_indices(self.populations.shape, self.groups)

    def marginal(self, k: int) -> np.ndarray:
        axis = self._axis_of(k)
        mass = self._axis_mass(axis)
        if axis in self._sectors:
            return self._sectors[axis].marginal(k, mass)
        return mass

    def mean(self, k: int) -> float:
        axis = self._axis_of(k)
        mass = self._axis_mass(axis)
        if axis in self._sectors:
            return float(mass @ self._sectors[axis].conditional_mean(k))
        return float(mass @ np.arange(len(mass)))

    def ground_population(self, subset) -> float:
        subset = tuple(subset)
        if not subset:
            raise InvalidArgument("ground fidelity needs a non-empty mode subset")
        factor = np.ones([1] * self.populations.ndim)
        for a, g in enumerate(self.groups):
            hit = [k for k in subset if k in g]
            if not hit:
                continue
            shape = [1] * self.populations.ndim
            shape[a] = self.populations.shape[a]
            if a in self._sectors:
                f = self._sectors[a].ground_factor(hit)
            else:
                f = np.zeros(self.populations.shape[a])
                f[0] = 1.0
            factor = factor * f.reshape(shape)
        for k in subset:
            self._axis_of(k)
        return float((self.populations * factor).sum())


@dataclass(frozen=True, eq=False)
class SparseJointState:
    """Populations on an explicit list of multi-indices (rows of ``indices``)."""

    indices: np.ndarray
    populations: np.ndarray
    dropped_mass: float = 0.0

    def __post_init__(self):
        idx = np.asarray(self.indices)
        pops = np.asarray(self.populations, dtype=float)
        if idx.ndim != 2 or idx.shape[0] != pops.shape[0] or pops.ndim != 1:
            raise InvalidArgument("indices must be (M, K) with one population per row")
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "populations", pops)

    @property
    def n_modes(self) -> int:
        return self.indices.shape[1]

    @property
    def dims(self) -> tuple:
        return tuple(int(c) for c in self.indices.max(axis=0))

    def with_populations(self, populations) -> "SparseJointState":
        return SparseJointState(self.indices, populations, self.dropped_mass)

    def total_mass(self) -> float:
        return float(self.populations.sum())

    def _check_mode(self, k):
        if not 0 <= k < self.n_modes:
            raise InvalidArgument(f"mode index {k} out of range for {self.n_modes} modes")

    def kernel_indices(self) -> list:
        return [self.indices[:, k] for k in range(self.n_modes)]

    def marginal(self, k: int) -> np.ndarray:
        self._check_mode(k)
        return np.bincount(self.indices[:, k], weights=self.populations)

    def mean(self, k: int) -> float:
        self._check_mode(k)
        return float(self.populations @ self.indices[:, k])

    def ground_population(self, subset) -> float:
        subset = list(subset)
        if not subset:
            raise InvalidArgument("ground fidelity needs a non-empty mode subset")
        for k in subset:
            self._check_mode(k)
        mask = np.all(self.indices[:, subset] == 0, axis=1)
        return float(self.populations[mask].sum())


def coupling_groups(specs, rtol: float = 1e-12) -> tuple:
    """Partition modes into classes with equal coupling and equal detuning."""
    groups = []
    keys = []
    for k, s in enumerate(specs):
        for key, members in zip(keys, groups):
            if math.isclose(s.coupling, key[0], rel_tol=rtol, abs_tol=0.0) and \
                    math.isclose(s.detuning, key[1], rel_tol=rtol, abs_tol=0.0):
                members.append(k)
                break
        else:
            keys.append((s.coupling, s.detuning))
            groups.append([k])
    return tuple(tuple(g) for g in groups)


def _enumerate_sparse(components, policy):
    """All multi-indices whose product population clears a threshold.

    The threshold is lowered tenfold until the discarded mass is below
    ``policy.joint_tail_epsilon``.  Components must be non-increasing.
    """
    K = len(components)
    best_rest = [math.prod(c[0] for c in components[k + 1:]) for k in range(K)]
    threshold = policy.joint_tail_epsilon
    while True:
        idx = np.zeros((1, 0), dtype=np.int64)
        pr = np.ones(1)
        for k, p in enumerate(components):
            need = threshold / (pr * best_rest[k])
            counts = np.searchsorted(-p, -need, side="right")
            keep = counts > 0
            idx, pr, counts = idx[keep], pr[keep], counts[keep]
            size = int(counts.sum())
            if size > policy.max_grid_entries:
                raise TruncationOverflow(size, policy.max_grid_entries, what="sparse joint state")
            rows = np.repeat(np.arange(len(pr)), counts)
            start = np.cumsum(counts) - counts
            nk = np.arange(size) - np.repeat(start, counts)
            idx = np.column_stack([idx[rows], nk])
            pr = pr[rows] * p[nk]
        dropped = max(0.0, 1.0 - float(pr.sum()))
        if dropped <= policy.joint_tail_epsilon:
            return idx, pr, dropped
        threshold /= 10.0


def joint_state_from_thermal(specs, policy: TruncationPolicy | None = None, layout: str = "auto"):
    """Product of per-mode thermal states.

    ``layout`` is ``"auto"``, ``"dense"`` (one axis per mode), ``"grouped"``
    or ``"sparse"``.  ``"auto"`` is dense for K <= 2 and grouped for K >= 3,
    falling back to sparse when the grouped grid exceeds
    ``policy.max_grid_entries``.
    """
    policy = policy or TruncationPolicy()
    specs = list(specs)
    if not specs:
        raise InvalidArgument("at least one mode is required")
    if len(specs) > K_MAX:
        raise InvalidArgument(f"at most {K_MAX} modes are supported")
    if not all(isinstance(s, ModeSpec) for s in specs):
        raise InvalidArgument("specs must be ModeSpec instances")
    if layout not in ("auto", "dense", "grouped", "sparse"):
        raise InvalidArgument(f"unknown layout {layout!r}")

    components = tuple(thermal_populations(s.omega, s.temperature, policy).populations
                       for s in specs)
    K = len(specs)
    if layout == "auto":
        layout = "dense" if K <= 2 else "grouped"

    if layout == "sparse":
        idx, pr, dropped = _enumerate_sparse(components, policy)
        return SparseJointState(idx, pr / pr.sum(), dropped)

    groups = tuple((k,) for k in range(K)) if layout == "dense" else coupling_groups(specs)
    axes = [_convolve_all([components[k] for k in g]) for g in groups]
    size = math.prod(len(a) for a in axes)
    if size > policy.max_grid_entries:
        if layout == "grouped" and K >= 3:
            idx, pr, dropped = _enumerate_sparse(components, policy)
            return SparseJointState(idx, pr / pr.sum(), dropped)
        raise TruncationOverflow(size, policy.max_grid_entries, what="joint grid")
    pops = axes[0]
    for a in axes[1:]:
        pops = np.multiply.outer(pops, a)
    pops = pops / pops.sum()
    return JointDiagonalState(pops, groups, components)
