import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import unitary_group

from nmqubits.algebra import density_from_pure
from nmqubits.observables import (concurrence, observe, purity, sanity_monitor,
                                  trace_distance, trace_distances)

from conftest import random_density

seeds = st.integers(0, 2**32 - 1)


def ket(*c):
    return np.array(c, dtype=complex)


def product(a, b):
    # qubit A is the left factor; single-qubit order (|1>, |0>)
    return np.kron(a, b)


def test_purity_examples(rng):
    assert purity(density_from_pure(ket(0.6, 0, 0.8j, 0))) == pytest.approx(1)
    assert purity(np.eye(4) / 4) == pytest.approx(0.25)


def test_concurrence_examples():
    s = 1 / np.sqrt(2)
    assert concurrence(density_from_pure(ket(s, 0, 0, s))) == pytest.approx(1)
    assert concurrence(density_from_pure(ket(0, s, s, 0))) == pytest.approx(1)
    a, b = ket(0.6, 0.8), ket(1j, 0)
    assert concurrence(density_from_pure(product(a, b))) < 1e-9
    assert concurrence(np.eye(4) / 4) == 0


def test_trace_distance_examples(rng):
    rho = random_density(rng)
    assert trace_distance(rho, rho) == pytest.approx(0, abs=1e-15)
    assert trace_distance(np.diag([1, 0, 0, 0]), np.diag([0, 0, 0, 1])) == pytest.approx(1)
    assert trace_distance(np.eye(4) / 4, np.diag([0, 0, 0, 1])) == pytest.approx(0.75)
    stack_a = np.stack([rho, np.eye(4) / 4])
    stack_b = np.stack([rho, np.diag([0, 0, 0, 1.0])])
    np.testing.assert_allclose(trace_distances(stack_a, stack_b), [0, 0.75], atol=1e-15)


def test_sanity_monitor_examples(rng):
    rho = random_density(rng)
    s = sanity_monitor(rho)
    assert s.trace == pytest.approx(1) and s.min_eig >= -1e-6 and s.herm_defect <= 1e-10
    bad = rho.copy()
    bad[0, 1] += 1e-3
    assert sanity_monitor(bad).herm_defect == pytest.approx(1e-3)
    z = sanity_monitor(np.zeros((4, 4)))
    assert z.trace == 0 and z.min_eig == 0 and z.herm_defect == 0


def test_observe_record(rng):
    rec = observe(1.5, density_from_pure(ket(1, 0, 0, 0)))
    assert rec.t == 1.5 and rec.purity == pytest.approx(1) and rec.concurrence == 0


@settings(max_examples=50, deadline=None)
@given(seeds)
def test_purity_unitary_invariance(seed):
    rng = np.random.default_rng(seed)
    rho = random_density(rng)
    u = unitary_group.rvs(4, random_state=rng)
    assert abs(purity(u @ rho @ u.conj().T) - purity(rho)) <= 1e-12
    assert 0.25 - 1e-9 <= purity(rho) <= 1 + 1e-9


@settings(max_examples=50, deadline=None)
@given(seeds, st.integers(1, 5))
def test_separable_mixtures_have_no_concurrence(seed, n_terms):
    rng = np.random.default_rng(seed)
    weights = rng.dirichlet(np.ones(n_terms))
    rho = np.zeros((4, 4), dtype=complex)
    for w in weights:
        a = rng.normal(size=2) + 1j * rng.normal(size=2)
        b = rng.normal(size=2) + 1j * rng.normal(size=2)
        psi = product(a / np.linalg.norm(a), b / np.linalg.norm(b))
        rho += w * density_from_pure(psi)
    assert concurrence(rho) <= 1e-9


@settings(max_examples=50, deadline=None)
@given(seeds)
def test_trace_distance_metric(seed):
    rng = np.random.default_rng(seed)
    a, b, c = (random_density(rng, rank=int(rng.integers(1, 5))) for _ in range(3))
    assert abs(trace_distance(a, b) - trace_distance(b, a)) <= 1e-14
    assert trace_distance(a, c) <= trace_distance(a, b) + trace_distance(b, c) + 1e-12
