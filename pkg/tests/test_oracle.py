import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mbcool import (ModeSpec, alpha_multi_mode, alpha_two_mode, build_cooling_map,
                    exact_ground_amplitude, ground_amplitude_expm, manifold_block,
                    oracle_cooling_map)
from mbcool.oracle import OracleKernel

import fullspace
from conftest import DELTA, G, WA, two_mode_specs


def test_manifold_block_examples():
    specs = two_mode_specs()
    b = manifold_block((0, 0), specs)
    assert b.dimension == 1 and b.matrix.tolist() == [[0.0]]
    b = manifold_block((1, 0), specs)
    assert np.array_equal(b.matrix, [[0, G], [G, DELTA]])
    b = manifold_block((4, 9), specs)
    assert b.dimension == 3
    assert np.array_equal(b.matrix, [[0, 2 * G, 3 * G], [2 * G, DELTA, 0], [3 * G, 0, DELTA]])
    assert np.array_equal(b.matrix, b.matrix.T)


def test_amplitude_at_zero_interval():
    specs = two_mode_specs(detuning_b=3 * DELTA)
    for idx in [(0, 0), (1, 0), (5, 7)]:
        assert exact_ground_amplitude(idx, 0.0, specs) == 1.0


def test_oracle_matches_closed_form_on_grid(rng):
    specs = two_mode_specs()
    for tau in rng.uniform(0, 50 / WA, 50):
        for n in range(31):
            for m in range(31):
                a = exact_ground_amplitude((n, m), tau, specs)
                b = alpha_two_mode(n, m, tau, G, G, DELTA)
                assert abs(abs(a) ** 2 - abs(b) ** 2) < 1e-10
                assert abs(a - b) < 1e-9


def test_dual_method_off_resonance():
    specs = two_mode_specs(detuning_b=2.5 * DELTA)
    for tau in np.linspace(0.5, 50, 25) / WA:
        a = exact_ground_amplitude((1, 1), tau, specs)
        b = ground_amplitude_expm((1, 1), tau, specs)
        assert abs(abs(a) ** 2 - abs(b) ** 2) < 1e-9


@settings(max_examples=150, deadline=None)
@given(n=st.integers(0, 80), m=st.integers(0, 80), tau=st.floats(0, 200),
       de=st.floats(-0.05, 0.05), df=st.floats(-0.05, 0.05), gb=st.floats(0, 0.1))
def test_unitarity_bound(n, m, tau, de, df, gb):
    specs = [ModeSpec(WA, G, de * WA, 0.1), ModeSpec(1.2 * WA, gb * WA, df * WA, 0.1)]
    a = exact_ground_amplitude((n, m), tau / WA, specs)
    assert abs(a) <= 1 + 1e-12


def test_three_mode_block_matches_multi_mode_formula(rng):
    gs = [G, 0.6 * G, 1.4 * G]
    specs = [ModeSpec(WA, g, DELTA, 0.1) for g in gs]
    for _ in range(200):
        idx = tuple(int(v) for v in rng.integers(0, 20, 3))
        tau = rng.uniform(0, 40 / WA)
        a = exact_ground_amplitude(idx, tau, specs)
        assert abs(abs(a) ** 2 - alpha_multi_mode(idx, tau, gs, DELTA)) < 1e-10


@pytest.mark.parametrize("detuning_b", [DELTA, 3 * DELTA, -2 * DELTA])
def test_ground_sector_is_diagonal_on_full_space(detuning_b):
    specs = two_mode_specs(detuning_b=detuning_b)
    cut = (3, 3)
    for tau in (2.0 / WA, 11.0 / WA, 37.0 / WA):
        vg = fullspace.ground_block_propagator(specs, cut, tau)
        off = vg - np.diag(np.diag(vg))
        assert np.max(np.abs(off)) < 1e-12
        diag = np.diag(vg).reshape(4, 4)
        for n in range(4):
            for m in range(4):
                assert abs(diag[n, m] - exact_ground_amplitude((n, m), tau, specs)) < 1e-10


def test_ground_sector_diagonal_three_modes():
    specs = [ModeSpec(WA, G, DELTA, 0.1), ModeSpec(WA, 0.7 * G, 2 * DELTA, 0.1),
             ModeSpec(WA, 1.2 * G, -DELTA, 0.1)]
    cut = (2, 2, 2)
    tau = 9.0 / WA
    vg = fullspace.ground_block_propagator(specs, cut, tau)
    assert np.max(np.abs(vg - np.diag(np.diag(vg)))) < 1e-12
    diag = np.diag(vg).reshape(3, 3, 3)
    for idx in np.ndindex(3, 3, 3):
        assert abs(diag[idx] - exact_ground_amplitude(idx, tau, specs)) < 1e-10


def test_oracle_map_equals_closed_form_map():
    specs = two_mode_specs()
    for tau in (1.0 / WA, 6.2 / WA, 33.3 / WA):
        closed = build_cooling_map((60, 50), tau, specs)
        oracle = oracle_cooling_map((60, 50), tau, specs)
        assert oracle.kernel_kind == "oracle"
        assert np.max(np.abs(closed.ratios - oracle.ratios)) < 1e-10
        assert oracle.ratios[0, 0] == 1.0


def test_oracle_map_off_resonance_matches_scalar():
    specs = two_mode_specs(detuning_b=4 * DELTA)
    tau = 8.0 / WA
    cmap = oracle_cooling_map((10, 8), tau, specs, with_phases=True)
    for n in range(11):
        for m in range(9):
            a = exact_ground_amplitude((n, m), tau, specs)
            assert cmap.phases[n, m] == pytest.approx(a, abs=1e-12)


def test_oracle_threads_bitwise_identical(monkeypatch):
    specs = two_mode_specs(detuning_b=2 * DELTA)
    idx = [np.arange(120)[:, None], np.arange(90)[None, :]]
    k1 = OracleKernel(idx, specs, threads=1)
    k4 = OracleKernel(idx, specs, threads=4)
    assert np.array_equal(k1.ratios(7.7 / WA), k4.ratios(7.7 / WA))
    monkeypatch.setenv("MBCOOL_THREADS", "3")
    k3 = OracleKernel(idx, specs)
    assert np.array_equal(k1.ratios(7.7 / WA), k3.ratios(7.7 / WA))
