from math import ceil, pi

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pei import discrimination as disc
from pei import unitary as un
from pei.qcore import KrausSet, QubitCapError, product_state
from pei.seesaw import seesaw_optimize
from pei.source import SourceProblem, ps_star

# optimum over all measurements for the rotated W-type probe, independent SDP solve
SDP_N3_PI3 = 0.7993705646021618


def test_overlap_examples():
    assert un.overlap_coefficient(4, 2, pi) == pytest.approx(-1 / 3, abs=1e-15)
    for m in range(6):
        assert un.overlap_coefficient(5, m, 0.0) == 1.0
    for phi in (0.3, 1.7, pi):
        assert un.overlap_coefficient(5, 0, phi) == 1.0
        assert un.overlap_coefficient(5, 5, phi) == 1.0


@pytest.mark.parametrize("n,m,phi", [(4, 2, pi), (3, 1, 1.2), (5, 2, 0.7), (6, 3, 2.5), (2, 1, 0.4)])
def test_overlap_matches_explicit_vectors(n, m, phi):
    explicit = un.dicke_overlap_oracle(n, m, phi)
    assert explicit.real == pytest.approx(un.overlap_coefficient(n, m, phi), abs=1e-12)
    assert abs(explicit.imag) < 1e-12


def test_phi_min_values():
    assert un.phi_min(2) == pytest.approx(pi / 2, abs=1e-15)
    assert un.phi_min(4) == pytest.approx(2 * pi / 3, abs=1e-15)
    assert un.phi_min(3) == un.phi_min(4)
    assert un.phi_min(10**6) == pytest.approx(pi, abs=3e-3)


@pytest.mark.parametrize("n", range(2, 12))
def test_half_weight_vanishes_at_threshold(n):
    assert abs(un.overlap_coefficient(n, ceil(n / 2), un.phi_min(n))) <= 1e-12


def test_optimal_input_examples():
    c = un.optimal_input(un.UnitaryProblem(2, pi / 2)).coefficients
    np.testing.assert_allclose(c, [0, 1, 0], atol=1e-12)
    c = un.optimal_input(un.UnitaryProblem(2, pi)).coefficients
    np.testing.assert_allclose(c, [0.5, 0.5, 0], atol=1e-12)
    c = un.optimal_input(un.UnitaryProblem(4, 2 * pi / 3)).coefficients
    np.testing.assert_allclose(c, [0, 0, 1, 0, 0], atol=1e-12)
    with pytest.raises(ValueError):
        un.optimal_input(un.UnitaryProblem(3, 0.0))


@given(st.integers(2, 40), st.floats(0.01, pi))
@settings(max_examples=80, deadline=None)
def test_above_threshold_offdiag_is_zero(n, phi):
    p = un.UnitaryProblem(n, phi)
    if phi <= un.phi_min(n):
        return
    assert abs(un.symmetric_offdiag(p, un.optimal_input(p))) < 1e-12
    assert un.ps_unitary(p) == 1.0


def test_ps_unitary_examples():
    assert un.ps_unitary(un.UnitaryProblem(5, 0.0)) == pytest.approx(0.2)
    assert un.ps_unitary(un.UnitaryProblem(2, pi / 2)) == pytest.approx(1.0, abs=1e-12)
    assert un.ps_unitary(un.UnitaryProblem(3, pi / 3)) == pytest.approx(SDP_N3_PI3, abs=1e-9)


@pytest.mark.parametrize("n", [2, 4, 6, 8])
@pytest.mark.parametrize("phi", [0.2, 0.9, 1.4])
def test_even_n_display_form(n, phi):
    if phi > un.phi_min(n):
        return
    c, s = np.cos(phi / 2), np.sin(phi / 2)
    expected = ((c + np.sqrt(n - 1) * s) / np.sqrt(n)) ** 2
    assert un.ps_unitary(un.UnitaryProblem(n, phi)) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("n,phi,expected", [
    (2, 0.5, 0.7397127693021015),
    (3, 1.0, 0.781574068169128),
    (4, 1.0, 0.7292920482285389),
])
def test_dicke_input_globally_optimal(n, phi, expected):
    # seesaw ranges over every input state, not only symmetric ones
    res = seesaw_optimize(KrausSet((un.rotation(phi),)), n, restarts=3, seed=1)
    assert res.value == pytest.approx(expected, abs=1e-6)
    assert un.ps_unitary(un.UnitaryProblem(n, phi)) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("n", range(2, 33))
def test_half_weight_minimal(n):
    h = ceil(n / 2)
    for phi in np.linspace(0, pi, 41):
        b = [un.overlap_coefficient(n, m, phi) for m in range(n + 1)]
        assert b[h] <= min(b) + 1e-15


@given(st.integers(2, 6), st.floats(0.05, pi), st.integers(0, 2**32 - 1))
@settings(max_examples=30, deadline=None)
def test_symmetric_gram_is_circulant(n, phi, seed):
    c = np.random.default_rng(seed).dirichlet(np.ones(n + 1))
    p = un.UnitaryProblem(n, phi)
    inp = un.SymmetricInput(c)
    g = un.unitary_oracle(p, inp, certify=False).gram
    assert g.is_circulant
    off = g.entries[0, 1] * n
    assert off.real == pytest.approx(un.symmetric_offdiag(p, inp), abs=1e-10)
    assert abs(off.imag) < 1e-10
    res = un.unitary_oracle(p, inp, certify=False)
    assert res.srm == pytest.approx(un.symmetric_input_ps(p, inp), abs=1e-9)


@pytest.mark.parametrize("n", range(2, 7))
@pytest.mark.parametrize("phi", [0.4, 1.3, pi])
def test_product_probe_recovers_source(n, phi):
    probe = product_state(np.array([1.0, 0.0]), n)
    r = un.unitary_oracle(un.UnitaryProblem(n, phi), probe)
    assert r.srm == pytest.approx(ps_star(SourceProblem(n, phi)), abs=1e-9)


@pytest.mark.parametrize("n", range(2, 7))
def test_oracle_below_threshold(n):
    phi = 0.8 * un.phi_min(n)
    p = un.UnitaryProblem(n, phi)
    r = un.unitary_oracle(p, un.optimal_input(p))
    assert r.srm == pytest.approx(un.ps_unitary(p), abs=1e-9)
    assert r.fixed_point == pytest.approx(un.ps_unitary(p), abs=1e-7)
    assert r.certificate_slack >= -1e-8


@given(st.sampled_from([2, 3, 4, 8, 17]), st.floats(0, pi))
@settings(max_examples=100, deadline=None)
def test_no_disadvantage(n, phi):
    assert un.entanglement_advantage(un.UnitaryProblem(n, phi)) >= -1e-12


def test_advantage_vanishes():
    grid = np.linspace(0, pi, 50)
    worst = [max(un.entanglement_advantage(un.UnitaryProblem(n, phi)) for phi in grid)
             for n in (64, 256, 1024)]
    assert worst[0] > worst[1] > worst[2]
    for n, w in zip((64, 256, 1024), worst):
        assert w * np.sqrt(n) < 1.0


def test_symmetric_input_validation():
    with pytest.raises(ValueError):
        un.SymmetricInput([0.5, 0.6])
    with pytest.raises(ValueError):
        un.UnitaryProblem(1, 0.5)


def test_oracle_cap():
    with pytest.raises(QubitCapError):
        un.unitary_oracle(un.UnitaryProblem(13, 1.0), un.SymmetricInput.single(13, 7))


def test_explicit_states_are_normalized():
    p = un.UnitaryProblem(4, 1.1)
    ens = un.unitary_states(p, un.symmetric_input_state(un.optimal_input(p)))
    g = disc.gram_of(ens)
    np.testing.assert_allclose(np.diag(g.entries).real, 0.25, atol=1e-14)
