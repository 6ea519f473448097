import math

import numpy as np
import pytest
from scipy import stats

from entbound.bounds import page_mean_entropy
from entbound.models import LatticeChainSpec, build_lattice_chain, build_spin_glass, build_syk, derive_seed
from entbound.qcore import PureState, entanglement_entropies
from entbound.sampling import (
    EnsembleSpec,
    bloch_vectors,
    disorder_energies,
    disorder_mean_abs_energy_exact,
    disorder_term_expectations,
    energy_statistics,
    energy_values,
    ensemble_states,
    haar_bipartite_entropies,
    haar_qubit_factors,
    product_state_expectation,
    sample_haar_bipartite,
    sample_haar_product_state,
)


def test_product_state_has_no_entanglement():
    psi = sample_haar_product_state(5, seed=3)
    for k in range(1, 5):
        assert float(entanglement_entropies(psi.amplitudes, tuple(range(k)))) == pytest.approx(0.0, abs=1e-10)
    assert float(entanglement_entropies(psi.amplitudes, (1, 3))) == pytest.approx(0.0, abs=1e-10)


def test_samplers_are_seed_deterministic():
    assert np.array_equal(sample_haar_product_state(4, 9).amplitudes, sample_haar_product_state(4, 9).amplitudes)
    assert np.array_equal(sample_haar_bipartite(2, 4, 1), sample_haar_bipartite(2, 4, 1))
    assert not np.array_equal(sample_haar_bipartite(2, 4, 1), sample_haar_bipartite(2, 4, 2))
    a = haar_bipartite_entropies(2, 3, 500, seed=4, batch=64)
    b = haar_bipartite_entropies(2, 3, 500, seed=4, batch=500)
    assert np.array_equal(a, b)


def test_bloch_vectors_uniform():
    b = bloch_vectors(haar_qubit_factors(10000, seed=2))
    assert np.allclose(np.linalg.norm(b, axis=1), 1.0)
    se = b.std(axis=0, ddof=1) / math.sqrt(len(b))
    assert np.all(np.abs(b.mean(axis=0)) <= 3 * se)
    # cos(theta) = z is uniform on [-1, 1] for the Haar measure
    assert stats.kstest(b[:, 2], stats.uniform(loc=-1, scale=2).cdf).pvalue > 1e-3


@pytest.mark.parametrize("d_a,d_b,expected", [(2, 2, 1 / 3), (2, 4, 0.509524)])
def test_page_monte_carlo(d_a, d_b, expected):
    assert page_mean_entropy(d_a, d_b) == pytest.approx(expected, abs=1e-6)
    s = haar_bipartite_entropies(d_a, d_b, 100000, seed=derive_seed(5, d_b))
    assert abs(s.mean() - page_mean_entropy(d_a, d_b)) <= 3 * s.std(ddof=1) / math.sqrt(s.size)


def test_page_concentration_tightens_with_environment():
    var = [haar_bipartite_entropies(2, d_b, 20000, seed=1).var() for d_b in (4, 8, 16)]
    assert var[0] > var[1] > var[2]


def test_bipartite_entropy_symmetry_and_rejection():
    v = sample_haar_bipartite(2, 4, seed=7)
    assert float(entanglement_entropies(v, (0,))) == pytest.approx(float(entanglement_entropies(v, (1, 2))), abs=1e-8)
    with pytest.raises(ValueError):
        sample_haar_bipartite(4, 2)


def test_computational_basis_ensemble():
    spec = EnsembleSpec("computational_basis", num_qubits=3, num_samples=5, basis_index=6)
    for v in ensemble_states(spec):
        assert v[6] == 1.0 and np.sum(np.abs(v)) == 1.0
    rand = list(ensemble_states(EnsembleSpec("computational_basis", num_qubits=3, num_samples=50, seed=1)))
    assert len({int(np.argmax(v)) for v in rand}) > 1


def test_zz_chain_energy_of_all_zero_state():
    h = build_lattice_chain(LatticeChainSpec(6, translationally_invariant=True, bond_term={"ZZ": 1.0}))
    vals = energy_values(h, EnsembleSpec("computational_basis", num_qubits=6, num_samples=100, basis_index=0))
    assert np.all(vals == 6.0)


def test_product_expectation_matches_dense():
    h = build_lattice_chain(LatticeChainSpec(5, seed=2))
    factors = haar_qubit_factors(5, seed=8)
    psi = PureState.product(list(factors))
    dense = np.vdot(psi.amplitudes, h.matrix @ psi.amplitudes).real
    assert product_state_expectation(h, bloch_vectors(factors)) == pytest.approx(dense, abs=1e-12)


def test_haar_mean_energy_is_zero():
    h = build_lattice_chain(LatticeChainSpec(8, seed=5))
    st_ = energy_statistics(h, EnsembleSpec("haar_qubit_product", num_qubits=8, num_samples=5000, seed=3))
    assert abs(st_.mean) <= 3 * st_.stderr_mean
    assert 0.0 <= st_.fraction_above_threshold <= 1.0
    with pytest.raises(ValueError):
        energy_statistics(h, EnsembleSpec("haar_qubit_product", num_qubits=8, num_samples=10))


def test_zz_chain_energy_std_scales_as_sqrt_n():
    ns = np.array([6, 8, 10, 12])
    stds = []
    for n in ns:
        h = build_lattice_chain(LatticeChainSpec(int(n), translationally_invariant=True, bond_term={"ZZ": 1.0}))
        stds.append(energy_statistics(h, EnsembleSpec("haar_qubit_product", num_qubits=int(n),
                                                      num_samples=4000, seed=int(n))).std)
    slope = stats.linregress(np.log(ns), np.log(stds)).slope
    assert abs(slope - 0.5) <= 0.15


@pytest.mark.parametrize("kind,size,builder", [("spin_glass", 4, build_spin_glass), ("syk", 8, build_syk)])
def test_disorder_energies_match_builders(kind, size, builder):
    nq = size if kind == "spin_glass" else size // 2
    psi = sample_haar_product_state(nq, 3).amplitudes
    fast = disorder_energies(kind, size, psi, 20, seed=6)
    slow = [np.vdot(psi, builder(size, derive_seed(6, i)).hamiltonian.matrix @ psi).real for i in range(20)]
    assert np.allclose(fast, slow, atol=1e-12)


def test_spin_glass_hypothesis_closed_form():
    zero = np.zeros(2**6, dtype=complex)
    zero[0] = 1
    exact = disorder_mean_abs_energy_exact("spin_glass", 6, zero)
    assert exact == pytest.approx(math.sqrt(2 / (9 * math.pi)), abs=1e-12)
    assert exact == pytest.approx(0.26596, abs=1e-5)
    e = np.abs(disorder_energies("spin_glass", 6, zero, 4000, seed=1))
    assert abs(e.mean() - exact) <= 3 * e.std(ddof=1) / math.sqrt(e.size)


def test_syk_zero_state_monomials():
    zero = np.zeros(2**6, dtype=complex)
    zero[0] = 1
    m = disorder_term_expectations("syk", 12, zero)
    # only products of two chi_{2a} chi_{2a+1} pairs have nonzero expectation
    assert np.sum(np.abs(m) > 0.5) == math.comb(6, 2) == 15
    assert np.allclose(np.abs(m[np.abs(m) > 0.5]), 1.0)
    assert disorder_mean_abs_energy_exact("syk", 12, zero) == pytest.approx(
        math.sqrt(2 / math.pi) * math.sqrt(15 / 495))
