import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from exc_spectra.exactdiag import diagonalize
from exc_spectra.hilbert import sector, wigner_d
from exc_spectra.model import DegenerateRotationError, ModelParams, derive, interaction_hamiltonian
from exc_spectra.perturbation import (PerturbationValidityWarning, energies_first_order,
                                      hprime_element, hprime_matrix, states_first_order,
                                      zeroth_order_energies)

G5 = 5.0


def theta_grid(n=25, g=G5):
    """Detunings whose dressing angles are evenly spread over (0, pi)."""
    thetas = np.linspace(0.05, math.pi - 0.05, n)
    return [2 * g / math.tan(t) for t in thetas]


def rotation_oracle(s, p):
    d = wigner_d(s, derive(p).theta)
    return d.T @ interaction_hamiltonian(s, p) @ d


params_st = st.builds(
    lambda delta, g, a, nu: ModelParams.from_detuning(0.0, delta, g).with_couplings(a, nu),
    st.floats(-80, 80), st.floats(0.5, 10), st.floats(0, 5), st.floats(0, 3),
)


def test_element_resonant_spin_one():
    p = ModelParams.from_detuning(0.0, 0.0, G5).with_couplings(3.0, 0.0)
    assert hprime_element(1, -1, -1, p) == pytest.approx(1.5, abs=1e-14)


def test_element_vanishes_for_single_excitation():
    p = ModelParams.from_detuning(0.0, 7.0, G5).with_couplings(3.0, 0.9)
    for n in (-0.5, 0.5):
        for m in (-0.5, 0.5):
            assert hprime_element(0.5, n, m, p) == 0.0


def test_element_band_limit():
    p = ModelParams.from_detuning(0.0, 7.0, G5).with_couplings(3.0, 0.9)
    assert hprime_element(2, 2, -1, p) == 0.0
    assert hprime_element(2, -2, 1, p) == 0.0
    assert hprime_element(1, 2, 0, p) == 0.0


def test_matrix_zero_without_interactions():
    p = ModelParams.from_detuning(0.0, 3.0, G5)
    for n in range(6):
        assert not np.any(hprime_matrix(sector(n), p))


@pytest.mark.parametrize("n", range(7))
@pytest.mark.parametrize("a, nu", [(1.0, 0.0), (0.0, 1.0), (3.0, 0.9)])
def test_matrix_matches_rotation_oracle(n, a, nu):
    s = sector(n)
    for delta in theta_grid():
        p = ModelParams.from_detuning(0.0, delta, G5).with_couplings(a, nu)
        np.testing.assert_allclose(hprime_matrix(s, p), rotation_oracle(s, p), atol=1e-10)


@settings(max_examples=100)
@given(params_st, st.integers(0, 8))
def test_matrix_symmetric_pentadiagonal_trace(p, n):
    s = sector(n)
    v = hprime_matrix(s, p)
    np.testing.assert_allclose(v, v.T, atol=1e-12 * max(1.0, np.abs(v).max()))
    i, j = np.indices(v.shape)
    assert np.all(v[np.abs(i - j) > 2] == 0)
    assert np.trace(v) == pytest.approx(np.trace(interaction_hamiltonian(s, p)),
                                        abs=1e-12 * max(1.0, np.abs(v).max() * s.dim))


@settings(max_examples=100)
@given(params_st, st.integers(0, 8))
def test_closed_form_energies_equal_matrix_diagonal(p, n):
    s = sector(n)
    ref = zeroth_order_energies(s, p) + np.diag(hprime_matrix(s, p))
    np.testing.assert_allclose(energies_first_order(s, p), ref, atol=1e-12 * max(1, abs(ref).max()))


def test_energies_low_sectors():
    p = ModelParams.from_detuning(10.0, 4.0, G5).with_couplings(3.0, 0.9)
    d = derive(p)
    np.testing.assert_allclose(energies_first_order(sector(0), p), [0.0])
    np.testing.assert_allclose(energies_first_order(sector(1), p),
                               [d.Omega - d.G / 2, d.Omega + d.G / 2], atol=1e-13)


def test_energies_two_excitons_resonant():
    # hand evaluation at theta = pi/2: m = -1: 2(A/4 + nu/2); m = 0: A; m = 1: 2(A/4 - nu/2)
    p = ModelParams.from_detuning(0.0, 0.0, 5.0).with_couplings(3.0, 0.9)
    np.testing.assert_allclose(energies_first_order(sector(2), p), [-7.6, 3.0, 10.6],
                               atol=1e-12)


def test_degenerate_rotation_rejected():
    p = ModelParams(1.0, 1.0, 0.0, 1.0, 0.1)
    with pytest.raises(DegenerateRotationError):
        energies_first_order(sector(2), p)
    with pytest.raises(DegenerateRotationError):
        states_first_order(sector(2), p)


def test_states_without_interaction_are_rotation_columns():
    p = ModelParams.from_detuning(0.0, 6.0, G5)
    for n in range(6):
        s = sector(n)
        d = wigner_d(s, derive(p).theta)
        states = states_first_order(s, p)
        for idx, st_ in enumerate(states):
            np.testing.assert_array_equal(st_.coeffs, d[:, idx])
            assert st_.energy == pytest.approx(n * p.Omega + st_.k * derive(p).G, abs=1e-12)


def test_single_excitation_states_uncorrected():
    p = ModelParams.from_detuning(0.0, 6.0, G5).with_couplings(3.0, 0.9)
    th = derive(p).theta
    c, s = math.cos(th / 2), math.sin(th / 2)
    states = states_first_order(sector(1), p)
    np.testing.assert_allclose(states[0].coeffs, [c, -s], atol=1e-15)
    np.testing.assert_allclose(states[1].coeffs, [s, c], atol=1e-15)


def test_admixture_linear_in_interaction():
    s = sector(4)
    base = ModelParams.from_detuning(0.0, 3.0, G5)
    d = wigner_d(s, derive(base).theta)
    full = [d.T @ st_.coeffs for st_ in states_first_order(s, base.with_couplings(0.02, 0.0))]
    half = [d.T @ st_.coeffs for st_ in states_first_order(s, base.with_couplings(0.01, 0.0))]
    k = 2  # m = 0; admixtures from m = +-2 sit at indices 0 and 4
    for n in (0, 4):
        assert full[k][n] != 0
        assert full[k][n] / half[k][n] == pytest.approx(2.0, rel=1e-12)


def test_normalization_flag():
    s = sector(3)
    p = ModelParams.from_detuning(0.0, 2.0, G5).with_couplings(0.05, 0.015)
    raw = states_first_order(s, p)
    unit = states_first_order(s, p, normalize=True)
    lam = 0.05 / G5
    for r, u in zip(raw, unit):
        assert u.normalized and not r.normalized
        assert np.linalg.norm(u.coeffs) == pytest.approx(1.0, abs=1e-12)
        assert abs(np.linalg.norm(r.coeffs) - 1) < 10 * lam**2 * s.dim**2


def test_validity_warning():
    p = ModelParams.from_detuning(0.0, 0.0, G5).with_couplings(30.0, 0.0)
    with pytest.warns(PerturbationValidityWarning):
        states = states_first_order(sector(3), p)
    assert max(st_.max_mixing for st_ in states) > 0.5
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        states_first_order(sector(3), p.with_couplings(0.01, 0.003))


def test_states_are_finite():
    p = ModelParams.from_detuning(0.0, -200.0, 0.1).with_couplings(0.05, 0.01)
    for n in range(10):
        for st_ in states_first_order(sector(n), p):
            assert np.all(np.isfinite(st_.coeffs)) and math.isfinite(st_.energy)


def energy_error(n, p):
    s = sector(n)
    return np.abs(energies_first_order(s, p) - diagonalize(s, p).energies).max()


@pytest.mark.parametrize("delta", [-40.0, -7.0, 0.0, 3.0, 25.0])
def test_quadratic_convergence_to_oracle(delta):
    g = G5
    for n in range(2, 7):
        errs = []
        for lam in (1e-3, 1e-2):
            p = ModelParams.from_detuning(0.0, delta, g).with_couplings(lam * g, 0.3 * lam * g)
            errs.append(energy_error(n, p))
            assert errs[-1] <= 5 * lam**2 * g * n**2
        assert 50 <= errs[1] / errs[0] <= 200, (n, errs)


def test_first_order_exact_in_single_excitation_sector():
    p = ModelParams.from_detuning(0.0, 9.0, G5).with_couplings(3.0, 0.9)
    assert energy_error(1, p) < 1e-12
    assert energy_error(0, p) == 0
