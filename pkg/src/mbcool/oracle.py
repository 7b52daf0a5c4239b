"""Exact ancilla ground amplitudes from excitation-manifold blocks.

In the rotating frame the Hamiltonian never leaves the manifold spanned by
|g; n_1..n_K> and |k; .., n_k - 1, ..> (one row per mode with n_k >= 1).
That block is real symmetric, with zeros on the ground row's diagonal,
the detunings on the excited diagonal and g_k sqrt(n_k) couplings, so

    <g|U(tau)|g> = sum_j v_j[0]^2 exp(-i lambda_j tau)

from one eigendecomposition.  This holds for any detunings and is the
reference the closed-form coefficients are checked against.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import InvalidArgument, NumericError
from .kernel import ORACLE, CoolingMap, _check_tau

THREADS_ENV = "MBCOOL_THREADS"


def thread_count() -> int:
    raw = os.environ.get(THREADS_ENV, "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        raise InvalidArgument(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    if n < 0:
        raise InvalidArgument(f"{THREADS_ENV} must be >= 0")
    return n or (os.cpu_count() or 1)


@dataclass(frozen=True, eq=False)
class ManifoldBlock:
    dimension: int
    matrix: np.ndarray
    index: tuple
    rows: tuple  # mode behind each excited row (row k+1 <-> rows[k])


def _check_index(index, specs):
    index = tuple(index)
    if len(index) != len(specs):
        raise InvalidArgument(f"index has {len(index)} entries for {len(specs)} modes")
    for n in index:
        if int(n) != n or n < 0:
            raise InvalidArgument(f"Fock numbers must be non-negative integers, got {index}")
    return tuple(int(n) for n in index)


def manifold_block(index, specs) -> ManifoldBlock:
    specs = list(specs)
    index = _check_index(index, specs)
    rows = tuple(k for k, n in enumerate(index) if n >= 1)
    d = len(rows) + 1
    h = np.zeros((d, d))
    for r, k in enumerate(rows, start=1):
        h[r, r] = specs[k].detuning
        h[0, r] = h[r, 0] = specs[k].coupling * math.sqrt(index[k])
    return ManifoldBlock(d, h, index, rows)


def exact_ground_amplitude(index, tau, specs) -> complex:
    _check_tau(tau)
    block = manifold_block(index, specs)
    if tau == 0 or block.dimension == 1:
        return 1.0 + 0.0j
    try:
        lam, vec = np.linalg.eigh(block.matrix)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"eigendecomposition failed for index {block.index}: "
                           f"block={block.matrix.tolist()}") from exc
    return complex(np.sum(vec[0] ** 2 * np.exp(-1j * lam * tau)))


def ground_amplitude_expm(index, tau, specs) -> complex:
    """Same amplitude via Pade scaling-and-squaring of exp(-i H tau)."""
    _check_tau(tau)
    block = manifold_block(index, specs)
    return complex(scipy.linalg.expm(-1j * tau * block.matrix)[0, 0])


class OracleKernel:
    """Batched eigendecomposition of every cell's manifold block.

    Eigen data do not depend on ``tau``, so one kernel serves any number of
    intervals.  Cells whose ground row has no coupling have amplitude 1
    exactly.
    """

    kind = ORACLE

    def __init__(self, indices, specs, shape=None, threads=None):
        specs = list(specs)
        if len(indices) != len(specs):
            raise InvalidArgument("one ModeSpec per mode is required")
        if shape is None:
            shape = np.broadcast_shapes(*[np.shape(a) for a in indices])
        self.shape = tuple(shape)
        active = [k for k, a in enumerate(indices) if np.any(np.asarray(a) != 0)]
        cols = [np.broadcast_to(np.asarray(indices[k], dtype=float), self.shape).ravel()
                for k in active]
        m = int(np.prod(self.shape))
        d = len(active) + 1
        h = np.zeros((m, d, d))
        for r, (k, n) in enumerate(zip(active, cols), start=1):
            h[:, r, r] = specs[k].detuning
            h[:, 0, r] = h[:, r, 0] = specs[k].coupling * np.sqrt(n)
        self.decoupled = ~np.any(h[:, 0, 1:] != 0, axis=1) if d > 1 else np.ones(m, bool)
        self.eigenvalues, self.weights = self._decompose(h, threads or thread_count())

    @staticmethod
    def _decompose(h, threads):
        def work(chunk):
            lam, vec = np.linalg.eigh(chunk)
            return lam, vec[:, 0, :] ** 2

        try:
            if threads <= 1 or len(h) < 2 * threads:
                return work(h)
            bounds = np.linspace(0, len(h), threads + 1).astype(int)
            chunks = [h[a:b] for a, b in zip(bounds[:-1], bounds[1:])]
            with ThreadPoolExecutor(threads) as pool:
                parts = list(pool.map(work, chunks))
        except np.linalg.LinAlgError as exc:
            raise NumericError(f"batched eigendecomposition failed: {exc}") from exc
        return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])

    def amplitudes(self, tau):
        _check_tau(tau)
        alpha = np.sum(self.weights * np.exp(-1j * self.eigenvalues * tau), axis=1)
        alpha = np.where(self.decoupled, 1.0 + 0.0j, alpha)
        if tau == 0:
            alpha = np.ones_like(alpha)
        return alpha.reshape(self.shape)

    def ratios(self, tau):
        a = self.amplitudes(tau)
        return np.clip(a.real ** 2 + a.imag ** 2, 0.0, 1.0)

    def __call__(self, tau, with_phases=False) -> CoolingMap:
        a = self.amplitudes(tau)
        r = np.clip(a.real ** 2 + a.imag ** 2, 0.0, 1.0)
        return CoolingMap(float(tau), r, a if with_phases else None, ORACLE)


def oracle_cooling_map(dims, tau, specs, *, groups=None, support=None, with_phases=False):
    from .kernel import build_cooling_map
    return build_cooling_map(dims, tau, specs, ORACLE, groups=groups, support=support,
                             with_phases=with_phases)
