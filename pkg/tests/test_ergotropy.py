import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import unitary_group

from workcap.ergotropy import (
    EntropyMatcher,
    find_beta_star,
    gibbs_entropy_energy,
    gibbs_state,
    mean_energy,
    passive_decompose,
    total_ergotropy,
    von_neumann_entropy,
)
from workcap.errors import DimensionMismatch, TargetOutOfRange
from workcap.qops import Hamiltonian, ket, pure_state

H3 = Hamiltonian.from_eigenvalues([0.0, 1.0, 2.0])


def random_state(rng, d, rank=None):
    rank = rank or d
    a = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def random_hamiltonian(rng, d):
    u = unitary_group.rvs(d, random_state=rng)
    return Hamiltonian.from_matrix(u @ np.diag(rng.uniform(0, 3, d)) @ u.conj().T)


def brute_passive_energy(probs, energies):
    return min(sum(p * energies[i] for p, i in zip(probs, perm))
               for perm in itertools.permutations(range(len(probs))))


def gibbs_entropy_direct(energies, beta):
    w = np.exp(-beta * np.asarray(energies))
    p = w / w.sum()
    return float(-(p * np.log(p)).sum())


def test_mean_energy_examples():
    assert mean_energy(ket(3, 0), H3) == 0.0
    assert math.isclose(mean_energy(np.eye(3) / 3, H3), 1.0)
    assert math.isclose(mean_energy(np.diag([0.1, 0.2, 0.7]), H3), 1.6)
    with pytest.raises(DimensionMismatch):
        mean_energy(np.eye(2) / 2, H3)


def test_thermal_state_is_passive():
    w = np.exp(-np.array([0.0, 1.0, 2.0]))
    assert passive_decompose(np.diag(w / w.sum()), H3).ergotropy == pytest.approx(0, abs=1e-15)


def test_top_level_drops_to_ground():
    pd = passive_decompose(ket(3, 2), H3)
    assert pd.ergotropy == pytest.approx(2.0)
    assert np.allclose(pd.passive_state, ket(3, 0))


def test_passive_example_against_permutations():
    pd = passive_decompose(np.diag([0.1, 0.2, 0.7]), H3)
    assert np.allclose(pd.passive_state, np.diag([0.7, 0.2, 0.1]))
    assert pd.passive_energy == pytest.approx(0.4, abs=1e-14)
    assert pd.passive_energy == pytest.approx(brute_passive_energy([0.1, 0.2, 0.7], [0, 1, 2]), abs=1e-14)
    assert pd.ergotropy == pytest.approx(1.2, abs=1e-14)


def test_passive_state_in_rotated_energy_basis():
    rng = np.random.default_rng(7)
    h = random_hamiltonian(rng, 4)
    rho = random_state(rng, 4)
    pd = passive_decompose(rho, h)
    # passive state commutes with h and has the same spectrum
    assert np.allclose(pd.passive_state @ h.op, h.op @ pd.passive_state, atol=1e-12)
    assert np.allclose(np.linalg.eigvalsh(pd.passive_state), np.linalg.eigvalsh(rho), atol=1e-12)
    assert mean_energy(pd.passive_state, h) == pytest.approx(pd.passive_energy, abs=1e-12)


def test_entropy_examples():
    assert von_neumann_entropy(pure_state([1, 1j, 0])) == pytest.approx(0, abs=1e-12)
    for d in (2, 3, 5):
        assert von_neumann_entropy(np.eye(d) / d) == pytest.approx(math.log(d), abs=1e-14)
    assert von_neumann_entropy(np.diag([0.5, 0.5, 0])) == pytest.approx(math.log(2), abs=1e-14)


def test_beta_star_limits():
    g = find_beta_star(H3, 0.0)
    assert math.isinf(g.beta)
    assert np.allclose(g.state, ket(3, 0))
    g = find_beta_star(H3, math.log(3))
    assert g.beta == 0.0
    assert np.allclose(g.state, np.eye(3) / 3)


def test_beta_star_degenerate_ground_is_uniform():
    h = Hamiltonian.from_eigenvalues([0.0, 0.0, 1.0])
    g = find_beta_star(h, 0.0)
    assert math.isinf(g.beta)
    assert np.allclose(np.diag(g.state).real, [0.5, 0.5, 0.0])
    # entropies up to ln 2 are reached only at zero temperature
    assert math.isinf(find_beta_star(h, 0.5).beta)


def test_beta_star_ln2():
    g = find_beta_star(H3, math.log(2))
    assert abs(gibbs_entropy_direct([0, 1, 2], g.beta) - math.log(2)) < 1e-10
    assert abs(von_neumann_entropy(g.state) - math.log(2)) < 1e-10


def test_beta_star_out_of_range():
    with pytest.raises(TargetOutOfRange):
        find_beta_star(H3, -0.1)
    with pytest.raises(TargetOutOfRange):
        find_beta_star(H3, math.log(3) + 0.01)


@settings(max_examples=200, deadline=None)
@given(st.floats(1e-6, math.log(3) - 1e-6))
def test_entropy_matcher_inverts_entropy(target):
    beta = EntropyMatcher([0.0, 1.0, 2.0]).beta(target)
    assert abs(gibbs_entropy_direct([0, 1, 2], beta) - target) < 1e-10


def test_entropy_matcher_warm_start_is_history_independent():
    m = EntropyMatcher([0.0, 0.3, 1.7, 2.0])
    targets = np.linspace(0.05, 1.3, 25)
    fresh = [EntropyMatcher([0.0, 0.3, 1.7, 2.0]).beta(t) for t in targets]
    warm = [m.beta(t) for t in targets[::-1]][::-1]
    assert np.allclose(fresh, warm, rtol=1e-12)


def test_gibbs_entropy_energy_consistency():
    for beta in (0.1, 1.0, 7.0):
        s, e = gibbs_entropy_energy([0, 1, 2], beta)
        g = gibbs_state(H3, beta)
        assert s == pytest.approx(g.entropy, abs=1e-14)
        assert e == pytest.approx(g.energy, abs=1e-14)


def test_total_ergotropy_half_half():
    beta = find_beta_star(H3, math.log(2)).beta
    w = np.exp(-beta * np.array([0, 1, 2]))
    expected = 0.5 - float(w @ [0, 1, 2] / w.sum())
    assert total_ergotropy(np.diag([0.5, 0.5, 0.0]), H3) == pytest.approx(expected, abs=1e-10)
    assert expected == pytest.approx(0.1957529, abs=1e-6)


def test_pure_state_total_ergotropy_is_mean_energy():
    rng = np.random.default_rng(8)
    for d in (2, 3, 4):
        h = random_hamiltonian(rng, d)
        psi = rng.normal(size=d) + 1j * rng.normal(size=d)
        rho = pure_state(psi)
        assert total_ergotropy(rho, h) == pytest.approx(mean_energy(rho, h), abs=1e-10)


@settings(max_examples=150, deadline=None)
@given(st.integers(2, 5), st.integers(0, 2**32 - 1))
def test_ergotropy_ordering(d, seed):
    rng = np.random.default_rng(seed)
    h = random_hamiltonian(rng, d)
    rho = random_state(rng, d, rank=int(rng.integers(1, d + 1)))
    erg = passive_decompose(rho, h).ergotropy
    tot = total_ergotropy(rho, h)
    e = mean_energy(rho, h)
    assert -1e-12 <= erg <= tot + 1e-10
    assert tot <= e + 1e-10


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_qubit_total_equals_ergotropy(seed):
    rng = np.random.default_rng(seed)
    h = random_hamiltonian(rng, 2)
    rho = random_state(rng, 2)
    assert abs(total_ergotropy(rho, h) - passive_decompose(rho, h).ergotropy) < 1e-8


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 5), st.integers(0, 2**32 - 1))
def test_passive_energy_is_unitarily_invariant(d, seed):
    rng = np.random.default_rng(seed)
    h = random_hamiltonian(rng, d)
    rho = random_state(rng, d)
    u = unitary_group.rvs(d, random_state=rng)
    a = passive_decompose(rho, h).passive_energy
    b = passive_decompose(u @ rho @ u.conj().T, h).passive_energy
    assert abs(a - b) < 1e-10


def test_no_unitary_lowers_passive_energy():
    rng = np.random.default_rng(9)
    h = random_hamiltonian(rng, 3)
    pd = passive_decompose(random_state(rng, 3), h)
    us = unitary_group.rvs(3, size=10_000, random_state=rng)
    rotated = us @ pd.passive_state @ us.conj().transpose(0, 2, 1)
    energies = np.einsum("kij,ji->k", rotated, h.op).real
    assert energies.min() >= pd.passive_energy - 1e-12


def test_total_ergotropy_dominates_over_copies():
    # the completely passive energy is the large-n limit of passive energy per copy
    rho = np.diag([0.5, 0.3, 0.2])
    tot = total_ergotropy(rho, H3)
    prev = 0.0
    levels = np.array([0.0, 1.0, 2.0])
    for n in (1, 2, 3, 4):
        probs = np.array([1.0])
        energies = np.array([0.0])
        for _ in range(n):
            probs = np.kron(probs, np.diag(rho).real)
            energies = np.add.outer(energies, levels).ravel()
        e_pass = np.sort(probs)[::-1] @ np.sort(energies)
        per_copy = (n * mean_energy(rho, H3) - e_pass) / n
        assert per_copy >= prev - 1e-12
        assert per_copy <= tot + 1e-12
        prev = per_copy
