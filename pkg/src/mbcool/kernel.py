"""Closed-form cooling coefficients at multi-photon resonance.

With all detunings equal to ``delta`` the ancilla ground amplitude of the
product Fock state |n_1 .. n_K> after an interval ``tau`` is

    alpha = exp(-i delta tau / 2) [cos(W tau) + i delta sin(W tau) / (2 W)],
    W = sqrt(sum_k g_k^2 n_k + delta^2 / 4),

and |alpha|^2 = 1 - (sum_k g_k^2 n_k) sin^2(W tau) / W^2 is the factor by
which one evolve-and-measure round scales that state's population.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument, KernelMismatch
from .state import JointDiagonalState, SparseJointState, grid_kernel_indices

CLOSED_FORM = "closed-form"
ORACLE = "oracle"


@dataclass(frozen=True, eq=False)
class CoolingMap:
    interval: float
    ratios: np.ndarray
    phases: np.ndarray | None = None
    kernel_kind: str = CLOSED_FORM


@dataclass(frozen=True, eq=False)
class RabiSpectrum:
    frequencies: np.ndarray


def _check_count(name, v):
    if int(v) != v or v < 0:
        raise InvalidArgument(f"{name} must be a non-negative integer, got {v!r}")


def _check_tau(tau):
    if not (math.isfinite(tau) and tau >= 0):
        raise InvalidArgument(f"tau must be finite and >= 0, got {tau!r}")


def rabi_two_mode(n, m, g_a, g_b, delta) -> float:
    _check_count("n", n)
    _check_count("m", m)
    return math.sqrt(g_a * g_a * n + g_b * g_b * m + delta * delta / 4)


def alpha_two_mode(n, m, tau, g_a, g_b, delta) -> complex:
    """Ground amplitude for |n, m> under two-photon resonance."""
    _check_tau(tau)
    omega = rabi_two_mode(n, m, g_a, g_b, delta)
    if omega == 0.0:
        return 1.0 + 0.0j
    bracket = complex(math.cos(omega * tau), delta * math.sin(omega * tau) / (2 * omega))
    phase = complex(math.cos(delta * tau / 2), -math.sin(delta * tau / 2))
    return phase * bracket


def alpha_single_mode(n, tau, g, delta) -> complex:
    return alpha_two_mode(n, 0, tau, g, 0.0, delta)


def alpha_multi_mode(n_vec, tau, g_vec, delta_prime) -> float:
    """|alpha_K|^2 for one product Fock state of K modes."""
    if len(n_vec) != len(g_vec):
        raise InvalidArgument("n_vec and g_vec must have the same length")
    for n in n_vec:
        _check_count("n_k", n)
    _check_tau(tau)
    s = sum(g * g * n for g, n in zip(g_vec, n_vec))
    omega = math.sqrt(s + delta_prime * delta_prime / 4)
    if omega == 0.0:
        return 1.0
    return min(1.0, max(0.0, 1.0 - s * math.sin(omega * tau) ** 2 / omega ** 2))


def uniform_detuning(specs, rtol=1e-12) -> bool:
    d0 = specs[0].detuning
    return all(math.isclose(s.detuning, d0, rel_tol=rtol, abs_tol=0.0) for s in specs)


def _weighted_excitation(indices, couplings):
    s = 0.0
    for n, g in zip(indices, couplings):
        s = s + (g * g) * n
    return np.asarray(s, dtype=float)


class ClosedFormKernel:
    """Precomputed Rabi frequencies; call with ``tau`` to get a CoolingMap."""

    kind = CLOSED_FORM

    def __init__(self, indices, specs, shape=None):
        if not uniform_detuning(specs):
            raise KernelMismatch(
                "closed-form coefficients need equal detunings on every mode; "
                "use the oracle kernel for unequal detunings")
        self.n_modes = len(specs)
        self.delta = float(specs[0].detuning)
        s = _weighted_excitation(indices, [sp.coupling for sp in specs])
        if shape is not None:
            s = np.broadcast_to(s, shape)
        self.excitation = np.array(s, dtype=float)
        self.rabi = np.sqrt(self.excitation + self.delta ** 2 / 4)

    def spectrum(self) -> RabiSpectrum:
        return RabiSpectrum(self.rabi)

    def ratios(self, tau):
        _check_tau(tau)
        w = self.rabi
        with np.errstate(divide="ignore", invalid="ignore"):
            r = 1.0 - self.excitation * np.sin(w * tau) ** 2 / (w * w)
        r = np.where(w == 0.0, 1.0, r)
        return np.clip(r, 0.0, 1.0)

    def amplitudes(self, tau):
        if self.n_modes > 2:
            raise InvalidArgument("closed-form complex phases are only provided for K <= 2")
        _check_tau(tau)
        w = self.rabi
        with np.errstate(divide="ignore", invalid="ignore"):
            sinc_term = np.where(w == 0.0, 0.0, np.sin(w * tau) / (2 * w))
        bracket = np.cos(w * tau) + 1j * self.delta * sinc_term
        alpha = np.exp(-0.5j * self.delta * tau) * bracket
        return np.where(w == 0.0, 1.0 + 0.0j, alpha)

    def __call__(self, tau, with_phases=False) -> CoolingMap:
        phases = self.amplitudes(tau) if with_phases else None
        return CoolingMap(float(tau), self.ratios(tau), phases, CLOSED_FORM)


def make_kernel(indices, specs, kind=CLOSED_FORM, shape=None):
    if kind == CLOSED_FORM:
        return ClosedFormKernel(indices, specs, shape)
    if kind == ORACLE:
        from .oracle import OracleKernel
        return OracleKernel(indices, specs, shape)
    raise InvalidArgument(f"unknown kernel {kind!r}")


def kernel_for_state(state, specs, kind=CLOSED_FORM):
    specs = list(specs)
    if len(specs) != state.n_modes:
        raise InvalidArgument(f"state has {state.n_modes} modes but {len(specs)} specs were given")
    return make_kernel(state.kernel_indices(), specs, kind, shape=state.populations.shape)


def build_cooling_map(dims, tau, specs, kernel=CLOSED_FORM, *, groups=None, support=None,
                      with_phases=False) -> CoolingMap:
    """Per-basis-state cooling ratios for one interval.

    ``dims`` are the grid cutoffs (one per grid axis).  Grouped grids pass
    ``groups``; sparse states pass their multi-index rows as ``support``
    (``dims`` is then ignored).
    """
    specs = list(specs)
    if support is not None:
        support = np.asarray(support)
        indices = [support[:, k] for k in range(support.shape[1])]
        shape = (support.shape[0],)
    else:
        shape = tuple(int(d) + 1 for d in dims)
        groups = groups or tuple((k,) for k in range(len(shape)))
        indices = grid_kernel_indices(shape, groups)
    if len(indices) != len(specs):
        raise InvalidArgument("one ModeSpec per mode is required")
    return make_kernel(indices, specs, kernel, shape)(tau, with_phases=with_phases)


def cooling_map_for(state, tau, specs, kernel=CLOSED_FORM, with_phases=False) -> CoolingMap:
    if isinstance(state, SparseJointState):
        return build_cooling_map(None, tau, specs, kernel, support=state.indices,
                                 with_phases=with_phases)
    assert isinstance(state, JointDiagonalState)
    return build_cooling_map(state.dims, tau, specs, kernel, groups=state.groups,
                             with_phases=with_phases)
