import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from exc_spectra.exactdiag import AmbiguousLabel, diagonalize, exact_dressed_labels
from exc_spectra.hilbert import sector
from exc_spectra.model import ModelParams, derive, sector_hamiltonian

# N = 2, g = 5, Delta = 0, A = 3, nu = 0.9, Omega = 0. The block is
# [[2A, a, 0], [a, 0, b], [0, b, 0]] with a^2 = 2 (g - nu)^2, b^2 = 2 g^2, so the
# levels are the roots of x^3 - 2A x^2 - (a^2 + b^2) x + 2A b^2
# = x^3 - 6 x^2 - 83.62 x + 300 (numpy.roots).
GOLDEN_N2 = [-8.339837847756838, 3.2410749512101993, 11.098762896546646]


def test_golden_two_exciton_levels():
    p = ModelParams.from_detuning(0.0, 0.0, 5.0, a_over_g=0.6, nu_over_a=0.3)
    es = diagonalize(sector(2), p)
    np.testing.assert_allclose(es.energies, GOLDEN_N2, atol=1e-10)


@pytest.mark.parametrize("n", range(10))
def test_free_levels(n):
    p = ModelParams.from_detuning(4.0, -3.0, 1.5)
    d = derive(p)
    es = diagonalize(sector(n), p)
    np.testing.assert_allclose(es.energies, n * d.Omega + sector(n).m_values * d.G, atol=1e-10)


def test_single_excitation_ignores_interactions():
    for a, nu in [(0.0, 0.0), (3.0, 0.9), (10.0, 5.0)]:
        p = ModelParams.from_detuning(1.0, 2.0, 3.0).with_couplings(a, nu)
        d = derive(p)
        np.testing.assert_allclose(diagonalize(sector(1), p).energies,
                                   [d.Omega - d.G / 2, d.Omega + d.G / 2], atol=1e-12)


params_st = st.builds(
    ModelParams,
    omega1=st.floats(-20, 20), omega2=st.floats(-20, 20), g=st.floats(0.1, 10),
    a_int=st.floats(0, 5), nu=st.floats(0, 3),
)


@settings(max_examples=60)
@given(params_st, st.integers(0, 20))
def test_eigensystem_contract(p, n):
    s = sector(n)
    es = diagonalize(s, p)
    h = sector_hamiltonian(s, p)
    assert es.residual() <= 1e-10 * max(1.0, np.linalg.norm(h, 2))
    np.testing.assert_allclose(es.vectors.T @ es.vectors, np.eye(s.dim), atol=1e-10)
    assert np.all(np.diff(es.energies) >= 0)
    assert es.energies.sum() == pytest.approx(np.trace(h), abs=1e-10 * max(1.0, np.abs(h).sum()))


def test_sector_cap():
    with pytest.raises(ValueError):
        diagonalize(sector(21), ModelParams(1.0, 1.0, 1.0))


def test_labels_free_case():
    p = ModelParams.from_detuning(0.0, 5.0, 2.0)
    for n in range(7):
        es = diagonalize(sector(n), p)
        assert exact_dressed_labels(es) == list(sector(n).m_values)


def test_labels_small_coupling_keep_order():
    for delta in (-10.0, 0.0, 10.0):
        p = ModelParams.from_detuning(0.0, delta, 5.0).with_couplings(5e-3, 1.5e-3)
        for n in range(7):
            es = diagonalize(sector(n), p)
            assert exact_dressed_labels(es) == list(sector(n).m_values)


def test_labels_strong_interaction_ambiguous():
    p = ModelParams.from_detuning(0.0, 0.0, 5.0, a_over_g=10.0)
    with pytest.raises(AmbiguousLabel):
        exact_dressed_labels(diagonalize(sector(3), p))
