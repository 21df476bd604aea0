import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from exc_spectra.hilbert import sector
from exc_spectra.model import (DegenerateRotationError, InitialState, ModelParams, derive,
                               interaction_hamiltonian, sector_hamiltonian)

from conftest import full_hamiltonian, project_to_sector

params_st = st.builds(
    ModelParams,
    omega1=st.floats(-50, 50), omega2=st.floats(-50, 50), g=st.floats(0.1, 10),
    a_int=st.floats(0, 5), nu=st.floats(0, 3),
)


def test_derive_resonance():
    d = derive(ModelParams(1500.0, 1500.0, 6.0))
    assert d.Delta == 0
    assert d.theta == pytest.approx(math.pi / 2)
    assert d.G == pytest.approx(12.0)


def test_derive_large_detuning():
    p = ModelParams.from_detuning(0.0, 60.0, 6.0)
    d = derive(p)
    assert d.theta == pytest.approx(0.19739555984988078, abs=1e-12)
    assert d.G == pytest.approx(math.sqrt(3744.0), abs=1e-12)
    assert math.tan(d.theta) == pytest.approx(2 * 6.0 / 60.0)


def test_derive_negative_detuning_branch():
    d = derive(ModelParams.from_detuning(0.0, -60.0, 6.0))
    assert math.pi / 2 < d.theta < math.pi
    assert math.cos(d.theta) == pytest.approx(-60 / d.G)
    assert math.sin(d.theta) == pytest.approx(12 / d.G)


def test_derive_rejects_zero_coupling():
    with pytest.raises(DegenerateRotationError):
        derive(ModelParams(1.0, 1.0, 0.0))


def test_params_validation():
    with pytest.raises(ValueError):
        ModelParams(1.0, 1.0, -1.0)
    with pytest.raises(ValueError):
        ModelParams(1.0, 1.0, 1.0, a_int=-0.1)
    with pytest.raises(ValueError):
        ModelParams(1.0, 1.0, 1.0, nu=-0.1)
    with pytest.raises(ValueError):
        ModelParams(float("inf"), 1.0, 1.0)


def test_from_detuning_ratios():
    p = ModelParams.from_detuning(10.0, 4.0, 5.0, a_over_g=0.6, nu_over_a=0.3)
    assert (p.omega1, p.omega2) == (12.0, 8.0)
    assert p.a_int == pytest.approx(3.0)
    assert p.nu == pytest.approx(0.9)
    assert p.Omega == 10.0 and p.Delta == 4.0
    q = p.with_detuning(-2.0)
    assert q.Omega == 10.0 and q.Delta == -2.0 and q.a_int == p.a_int


def test_single_excitation_block():
    p = ModelParams(3.0, 2.0, 0.7, a_int=1.3, nu=0.4)
    np.testing.assert_allclose(sector_hamiltonian(sector(1), p), [[2.0, 0.7], [0.7, 3.0]])


def test_two_excitation_block():
    w1, w2, g, A, nu = 3.0, 2.0, 0.7, 1.3, 0.4
    h = sector_hamiltonian(sector(2), ModelParams(w1, w2, g, A, nu))
    np.testing.assert_allclose(np.diag(h), [2 * w2 + 2 * A, w1 + w2, 2 * w1])
    np.testing.assert_allclose([h[1, 0], h[2, 1]], [math.sqrt(2) * (g - nu), math.sqrt(2) * g])
    assert h[2, 0] == 0


@pytest.mark.parametrize("n", range(8))
def test_free_spectrum_is_equally_spaced(n):
    p = ModelParams.from_detuning(7.0, 3.0, 2.0)
    d = derive(p)
    w = np.linalg.eigvalsh(sector_hamiltonian(sector(n), p))
    np.testing.assert_allclose(w, n * d.Omega + sector(n).m_values * d.G, atol=1e-10)


@settings(max_examples=40)
@given(params_st)
def test_sector_blocks_match_product_space(p):
    cutoff = 6
    full = full_hamiltonian(p, cutoff)
    for n in range(5):
        ref = project_to_sector(full, n, cutoff)
        np.testing.assert_allclose(sector_hamiltonian(sector(n), p), ref, atol=1e-12)


def test_product_space_conserves_number():
    cutoff = 5
    p = ModelParams(1.0, 2.0, 0.5, 0.3, 0.2)
    full = full_hamiltonian(p, cutoff)
    na, nb = np.divmod(np.arange(cutoff**2), cutoff)
    total = na + nb
    rows, cols = np.nonzero(np.abs(full) > 0)
    assert np.all(total[rows] == total[cols])


@settings(max_examples=100)
@given(params_st, st.integers(0, 10))
def test_symmetric(p, n):
    h = sector_hamiltonian(sector(n), p)
    assert np.array_equal(h, h.T)
    assert np.array_equal(interaction_hamiltonian(sector(n), p),
                          interaction_hamiltonian(sector(n), p).T)


@settings(max_examples=100)
@given(params_st, st.integers(0, 10), st.floats(-100, 100))
def test_common_shift(p, n, c):
    q = ModelParams(p.omega1 + c, p.omega2 + c, p.g, p.a_int, p.nu)
    w = np.linalg.eigvalsh(sector_hamiltonian(sector(n), p))
    wq = np.linalg.eigvalsh(sector_hamiltonian(sector(n), q))
    np.testing.assert_allclose(wq, w + n * c, atol=1e-9)


def test_initial_state_parse():
    assert InitialState.parse("n=2").amplitudes == {2: 1.0}
    sup = InitialState.parse("super:1,2")
    assert set(sup.amplitudes) == {1, 2}
    assert sum(abs(c) ** 2 for c in sup.amplitudes.values()) == pytest.approx(1.0, abs=1e-15)
    assert sup.label() == "super:1,2"
    assert InitialState.parse("vacuum").amplitudes == {0: 1.0}
    for bad in ("n=", "two", "super:"):
        with pytest.raises(ValueError):
            InitialState.parse(bad)


def test_initial_state_validation():
    with pytest.raises(ValueError):
        InitialState({1: 0.5})
    with pytest.raises(ValueError):
        InitialState({9: 1.0})
    assert InitialState({9: 1.0}, max_n=9).sectors == [9]
    with pytest.raises(ValueError):
        InitialState({})
