import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mbcool import (InvalidArgument, KernelMismatch, ModeSpec, alpha_multi_mode,
                    alpha_single_mode, alpha_two_mode, build_cooling_map, rabi_two_mode)
from mbcool.kernel import ClosedFormKernel

from conftest import DELTA, G, WA, two_mode_specs

counts = st.integers(0, 60)
rates = st.floats(0.0, 0.1).map(lambda f: f * WA)
detunings = st.floats(-0.05, 0.05).map(lambda f: f * WA)
taus = st.floats(0.0, 60.0).map(lambda f: f / WA)


def test_rabi_examples():
    assert rabi_two_mode(0, 0, G, G, DELTA) == DELTA / 2
    assert rabi_two_mode(0, 0, G, G, 0.0) == 0.0
    assert rabi_two_mode(1, 0, G, 3 * G, 0.0) == G
    # sqrt(0.04^2 * 13 + 0.01^2 / 4) omega_a
    expected = math.sqrt(0.0016 * 13 + 0.000025) * WA
    assert rabi_two_mode(4, 9, 0.04 * WA, 0.04 * WA, 0.01 * WA) == pytest.approx(expected, rel=1e-14)
    assert expected / WA == pytest.approx(0.144309, abs=1e-6)


def test_rabi_matches_block_eigenvalue_gap():
    g, d = 0.04 * WA, 0.01 * WA
    h = np.array([[0, g * 2, g * 3], [g * 2, d, 0], [g * 3, 0, d]])
    lam = np.linalg.eigvalsh(h)
    # bright pair sits at d/2 -/+ Omega, the dark state at d
    assert (lam[-1] - lam[0]) / 2 == pytest.approx(rabi_two_mode(4, 9, g, g, d), rel=1e-12)


def test_rabi_rejects_negative_counts():
    with pytest.raises(InvalidArgument):
        rabi_two_mode(-1, 0, G, G, 0.0)
    with pytest.raises(InvalidArgument):
        alpha_two_mode(0, -2, 1e-9, G, G, 0.0)


def test_alpha_examples():
    for tau in (0.0, 3e-9, 1e-7):
        assert abs(alpha_two_mode(0, 0, tau, G, G, DELTA)) ** 2 == pytest.approx(1.0, abs=1e-15)
    assert alpha_two_mode(0, 0, 5e-9, G, G, 0.0) == 1.0
    tau = 7e-9
    assert abs(alpha_two_mode(1, 0, tau, G, 2 * G, 0.0)) ** 2 == pytest.approx(
        math.cos(G * tau) ** 2, abs=1e-15)
    with pytest.raises(InvalidArgument):
        alpha_two_mode(1, 1, -1e-9, G, G, 0.0)


@pytest.mark.parametrize("n,m,j", [(3, 2, 1), (10, 0, 2), (7, 11, 3)])
def test_alpha_unit_on_protected_bands(n, m, j):
    omega = rabi_two_mode(n, m, G, G, DELTA)
    tau = j * math.pi / omega
    assert abs(alpha_two_mode(n, m, tau, G, G, DELTA)) ** 2 == pytest.approx(1.0, abs=1e-12)


def test_single_mode_reductions():
    for n in range(0, 40, 3):
        tau = 4.2e-9
        assert alpha_single_mode(n, tau, G, DELTA) == alpha_two_mode(n, 0, tau, G, 0.0, DELTA)
        assert abs(alpha_single_mode(n, tau, G, 0.0)) ** 2 == pytest.approx(
            math.cos(G * math.sqrt(n) * tau) ** 2, abs=1e-14)
    # vacuum with ground ancilla carries zero energy: no phase at all
    assert alpha_single_mode(0, 1e-8, G, DELTA) == pytest.approx(1.0, abs=1e-15)
    assert abs(alpha_single_mode(0, 1e-8, G, DELTA)) == pytest.approx(1.0, abs=1e-15)


def test_multi_mode_examples(rng):
    assert alpha_multi_mode([0, 0, 0], 3e-9, [G, 2 * G, G], DELTA) == 1.0
    n = [2, 1, 4]
    gs = [G, 0.5 * G, 1.5 * G]
    omega = math.sqrt(sum(g * g * k for g, k in zip(gs, n)) + DELTA ** 2 / 4)
    assert alpha_multi_mode(n, 2 * math.pi / omega, gs, DELTA) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(InvalidArgument):
        alpha_multi_mode([1, 2], 1e-9, [G], DELTA)
    for tau in rng.uniform(0, 50 / WA, 5):
        for a in range(31):
            for b in range(31):
                expected = abs(alpha_two_mode(a, b, tau, G, 1.3 * G, DELTA)) ** 2
                assert abs(alpha_multi_mode([a, b], tau, [G, 1.3 * G], DELTA) - expected) < 1e-12


@settings(max_examples=300, deadline=None)
@given(n=counts, m=counts, tau=taus, ga=rates, gb=rates, d=detunings)
def test_ratio_bounds_and_ground_protection(n, m, tau, ga, gb, d):
    r = abs(alpha_two_mode(n, m, tau, ga, gb, d)) ** 2
    assert -1e-15 <= r <= 1 + 1e-12
    assert alpha_multi_mode([n, m], tau, [ga, gb], d) <= 1.0
    assert alpha_multi_mode([0, 0], tau, [ga, gb], d) == 1.0


@settings(max_examples=200, deadline=None)
@given(n=counts, m=counts, j=st.integers(1, 40), ga=rates, gb=rates, d=detunings,
       offset=st.floats(-1e-9, 1e-9))
def test_protected_band_continuity(n, m, j, ga, gb, d, offset):
    omega = math.sqrt(ga * ga * n + gb * gb * m + d * d / 4)
    if omega == 0:
        return
    tau = (j * math.pi + offset) / omega
    assert alpha_multi_mode([n, m], tau, [ga, gb], d) >= 1 - 1e-15


@settings(max_examples=200, deadline=None)
@given(n=counts, m=counts, tau=taus, d=detunings)
def test_periodicity_in_tau(n, m, tau, d):
    omega = rabi_two_mode(n, m, G, G, d)
    if omega == 0:
        return
    r1 = alpha_multi_mode([n, m], tau, [G, G], d)
    r2 = alpha_multi_mode([n, m], tau + math.pi / omega, [G, G], d)
    assert r1 == pytest.approx(r2, abs=1e-9)


@settings(max_examples=200, deadline=None)
@given(n=counts, tau=taus, g=rates, d=detunings)
def test_reduction_consistency(n, tau, g, d):
    single = abs(alpha_single_mode(n, tau, g, d)) ** 2
    two = abs(alpha_two_mode(n, 0, tau, g, 0.7 * g, d)) ** 2
    multi = alpha_multi_mode([0, n, 0], tau, [g, g, 2 * g], d)
    assert abs(single - two) < 1e-12
    assert abs(single - multi) < 1e-12


def test_build_cooling_map_invariants():
    specs = two_mode_specs()
    cmap = build_cooling_map((40, 30), 10 / WA, specs)
    assert cmap.ratios.shape == (41, 31)
    assert cmap.ratios[0, 0] == 1.0
    assert np.all((cmap.ratios >= 0) & (cmap.ratios <= 1))
    again = build_cooling_map((40, 30), 10 / WA, specs)
    assert np.array_equal(cmap.ratios, again.ratios)
    with pytest.raises(KernelMismatch):
        build_cooling_map((4, 4), 1e-9, two_mode_specs(detuning_b=2 * DELTA))


def test_build_cooling_map_banded_landscape():
    # tau = 10/omega_a: cells with g^2 (n + m) near j^2 pi^2 / tau^2 - delta^2/4 are protected
    tau = 10 / WA
    cmap = build_cooling_map((300, 300), tau, two_mode_specs())
    total = np.add.outer(np.arange(301), np.arange(301))
    for j in (1, 2, 3):
        exact = ((j * math.pi / tau) ** 2 - DELTA ** 2 / 4) / G ** 2
        near = int(round(exact))
        band = cmap.ratios[total == near]
        assert band.size > 0
        worst = 1 - G * G * near * math.sin(math.sqrt(G * G * near + DELTA ** 2 / 4) * tau) ** 2 / (
            G * G * near + DELTA ** 2 / 4)
        assert np.allclose(band, worst, atol=1e-13)
        assert worst > 0.9
        mid = int(round((((j + 0.5) * math.pi / tau) ** 2 - DELTA ** 2 / 4) / G ** 2))
        assert np.all(cmap.ratios[total == mid] < 0.1)


def test_phases_match_scalar_coefficients():
    specs = two_mode_specs()
    tau = 6.3 / WA
    cmap = build_cooling_map((12, 9), tau, specs, with_phases=True)
    for n in range(13):
        for m in range(10):
            assert cmap.phases[n, m] == pytest.approx(alpha_two_mode(n, m, tau, G, G, DELTA),
                                                      abs=1e-14)
    assert np.allclose(np.abs(cmap.phases) ** 2, cmap.ratios, atol=1e-15)


def test_closed_form_phases_limited_to_two_modes():
    specs = [ModeSpec(WA, G, DELTA, 0.01)] * 3
    k = ClosedFormKernel([np.arange(3), np.zeros(1, int), np.zeros(1, int)], specs)
    with pytest.raises(InvalidArgument):
        k.amplitudes(1e-9)
