import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pei import discrimination as disc
from pei.channel import PauliChannel
from pei.qcore import KrausSet
from pei.seesaw import hypothesis_ensemble, seesaw_optimize

# optimum of the N=2, phi=pi/2 source ensemble from an independent SDP solve
SDP_TWO_SOURCES = 0.9330127018933656


def two_sources():
    a = np.kron([np.sqrt(0.5), np.sqrt(0.5)], [1, 0])
    b = np.kron([1, 0], [np.sqrt(0.5), np.sqrt(0.5)])
    return disc.Ensemble.uniform([a, b])


def random_ensemble(seed, n, dim, mixed=False):
    rng = np.random.default_rng(seed)
    states = []
    for _ in range(n):
        if mixed:
            a = rng.normal(size=(dim, 2)) + 1j * rng.normal(size=(dim, 2))
            r = a @ a.conj().T
            states.append(r / np.trace(r))
        else:
            v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
            states.append(v / np.linalg.norm(v))
    priors = rng.dirichlet(np.ones(n))
    return disc.Ensemble(tuple(states), priors)


def test_gram_of_two_sources():
    g = disc.gram_of(two_sources())
    np.testing.assert_allclose(g.entries, [[0.5, 0.25], [0.25, 0.5]], atol=1e-15)
    assert g.is_circulant
    np.testing.assert_allclose(g.eigenvalues, [0.25, 0.75])


def test_srm_two_sources():
    assert disc.srm_success_probability(disc.gram_of(two_sources())) == pytest.approx(
        SDP_TWO_SOURCES, abs=1e-9)


def test_fixed_point_two_sources():
    povm = disc.fixed_point_optimal_povm(two_sources())
    assert povm.converged
    assert povm.success_probability == pytest.approx(SDP_TWO_SOURCES, abs=1e-7)
    assert povm.certificate.valid


def test_orthogonal_states_are_perfect():
    ens = disc.Ensemble.uniform(list(np.eye(4)))
    assert disc.srm_success_probability(disc.gram_of(ens)) == pytest.approx(1.0)
    assert disc.fixed_point_optimal_povm(ens).success_probability == pytest.approx(1.0)


def test_identical_states_give_prior():
    v = np.array([1.0, 0.0])
    ens = disc.Ensemble.uniform([v, v, v])
    assert disc.srm_success_probability(disc.gram_of(ens)) == pytest.approx(1 / 3, abs=1e-14)
    with pytest.raises(disc.LinearlyDependentError):
        disc.srm_povm(ens)


def test_single_hypothesis():
    ens = disc.Ensemble.uniform([np.array([0.6, 0.8])])
    assert disc.fixed_point_optimal_povm(ens).success_probability == pytest.approx(1.0)
    assert disc.srm_success_probability(disc.gram_of(ens)) == pytest.approx(1.0)


def test_non_pure_gram_rejected():
    ens = disc.Ensemble.uniform([np.eye(2) / 2, np.diag([1.0, 0.0])])
    with pytest.raises(disc.NonPureEnsembleError):
        disc.gram_of(ens)


def test_bad_priors_rejected():
    with pytest.raises(ValueError):
        disc.Ensemble((np.array([1.0, 0]), np.array([0, 1.0])), np.array([0.7, 0.7]))


def test_certificate_flags_suboptimal_povm():
    ens = two_sources()
    povm = disc.POVM([np.eye(4) / 2, np.eye(4) / 2], 0.5)
    cert = disc.check_dual_certificate(ens, povm)
    assert cert.slack < -1e-4
    assert not cert.valid


def test_srm_povm_is_certified():
    ens = two_sources()
    povm = disc.srm_povm(ens)
    assert povm.success_probability == pytest.approx(SDP_TWO_SOURCES, abs=1e-9)
    assert disc.check_dual_certificate(ens, povm).slack >= -1e-10
    assert max(abs(np.sum(povm.full_elements(), axis=0) - np.eye(4)).ravel()) < 1e-12


@given(st.integers(0, 2**32 - 1), st.integers(2, 4), st.booleans())
@settings(max_examples=25, deadline=None)
def test_fixed_point_povm_valid(seed, n, mixed):
    ens = random_ensemble(seed, n, 4, mixed)
    povm = disc.fixed_point_optimal_povm(ens, max_iter=3000)
    assert povm.completeness_error() < 1e-9
    assert povm.min_eigenvalue() > -1e-9
    full = povm.full_elements()
    assert np.max(np.abs(sum(full) - np.eye(4))) < 1e-9
    assert povm.success_probability <= 1 + 1e-12
    # never below the trivial strategy of always guessing the likeliest prior
    assert povm.success_probability >= ens.priors.max() - 1e-9


@given(st.integers(0, 2**32 - 1), st.integers(2, 4))
@settings(max_examples=25, deadline=None)
def test_srm_is_a_lower_bound(seed, n):
    ens = random_ensemble(seed, n, 5)
    srm = disc.srm_success_probability(disc.gram_of(ens))
    fp = disc.fixed_point_optimal_povm(ens, max_iter=5000).success_probability
    assert srm <= fp + 1e-7


@given(st.integers(0, 2**32 - 1), st.integers(2, 5))
@settings(max_examples=25, deadline=None)
def test_srm_optimal_for_circulant(seed, n):
    # the orbit of a vector under a cyclic shift has a circulant Gram
    rng = np.random.default_rng(seed)
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    v /= np.linalg.norm(v)
    ens = disc.Ensemble.uniform([np.roll(v, k) for k in range(n)])
    g = disc.gram_of(ens)
    assert g.is_circulant
    if g.eigenvalues[0] < 1e-6:
        return
    povm = disc.srm_povm(ens, g)
    assert disc.check_dual_certificate(ens, povm).slack >= -1e-8
    assert povm.success_probability == pytest.approx(disc.srm_success_probability(g), abs=1e-10)


def test_seesaw_identity_channel():
    res = seesaw_optimize(KrausSet.identity(), 3, restarts=2, seed=0)
    assert res.value == pytest.approx(1 / 3, abs=1e-9)


def test_seesaw_dephasing():
    res = seesaw_optimize(PauliChannel(0.5, 0, 0, 0.5), 2, restarts=4, seed=0)
    assert res.value == pytest.approx(0.75, abs=1e-6)


def test_seesaw_history_monotone_and_deterministic():
    chan = PauliChannel(0.4, 0.3, 0.2, 0.1)
    a = seesaw_optimize(chan, 2, restarts=3, seed=7)
    b = seesaw_optimize(chan, 2, restarts=3, seed=7)
    assert a.value == b.value
    for trace in a.restarts:
        assert np.all(np.diff(trace.history) >= -1e-9)
    state, povm, value = a
    assert value == a.value
    assert np.max(np.abs(sum(povm.full_elements()) - np.eye(4))) < 1e-9


def test_seesaw_value_matches_its_pair():
    chan = PauliChannel(0.25, 0.25, 0.25, 0.25)
    state, povm, value = seesaw_optimize(chan, 2, restarts=2, seed=3)
    ens = hypothesis_ensemble(chan.kraus_set(), state, 2)
    achieved = sum(np.trace(a @ m).real
                   for a, m in zip(ens.weighted_operators(), povm.full_elements()))
    assert achieved == pytest.approx(value, abs=1e-7)


def test_seesaw_rejects_zero_restarts():
    with pytest.raises(ValueError):
        seesaw_optimize(KrausSet.identity(), 2, restarts=0)
