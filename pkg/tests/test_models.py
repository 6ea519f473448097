import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from entbound.models import (
    BOND_BASIS,
    ChargeCircuitSpec,
    LatticeChainSpec,
    apply_layer,
    build_charge_conserving_unitary,
    build_lattice_chain,
    build_spin_glass,
    build_syk,
    charge_circuit_layers,
    check_nondegenerate_gaps,
    derive_seed,
    majorana_monomial,
    majorana_string,
    pair_aligned_blocks,
    restrict_to_subsystem,
    spin_glass_dimension,
    subsystem_sum,
    trace_moment_check,
)
from entbound.qcore import total_charge

from test_qcore import PAULI, kron_all, pauli_oracle


def test_derive_seed_is_stable_and_distinct():
    assert derive_seed(0, 1) == derive_seed(0, 1)
    seeds = {derive_seed(7, i) for i in range(1000)}
    assert len(seeds) == 1000
    assert all(0 <= s < 2**64 for s in seeds)
    assert derive_seed(7, -1) not in seeds


# -- lattice chains ---------------------------------------------------------


def test_ti_zz_chain_spectrum():
    h = build_lattice_chain(LatticeChainSpec(3, translationally_invariant=True, bond_term={"ZZ": 1.0}))
    z = PAULI["Z"]
    oracle = sum(kron_all([z if k in b else PAULI["I"] for k in range(3)]) for b in [(0, 1), (1, 2), (2, 0)])
    assert np.allclose(h.matrix, oracle)
    assert np.allclose(h.eigenvalues, sorted([3, -1, -1, -1, -1, -1, -1, 3]))


@pytest.mark.parametrize("ti", [False, True])
@pytest.mark.parametrize("boundary", ["periodic", "open"])
def test_chain_is_traceless_and_reproducible(ti, boundary):
    spec = LatticeChainSpec(5, boundary=boundary, translationally_invariant=ti, seed=12)
    h = build_lattice_chain(spec)
    assert h.is_traceless
    assert abs(np.trace(h.matrix)) <= 1e-12
    assert np.array_equal(h.matrix, build_lattice_chain(spec).matrix)
    assert len(h.bonds) == (5 if boundary == "periodic" else 4)
    assert np.allclose(sum(p.matrix for p in h.parts), h.matrix)
    norms = h.bond_norms()
    assert np.all((norms >= 0.5) & (norms <= 2.0))


def test_bond_basis_excludes_left_only_terms():
    assert len(BOND_BASIS) == 12
    assert all(b != "I" for _, b in BOND_BASIS)


def test_ti_random_chain_has_identical_bonds():
    h = build_lattice_chain(LatticeChainSpec(6, translationally_invariant=True, seed=3))
    ms = h.bond_matrices()
    assert all(np.allclose(m, ms[0]) for m in ms)
    # translation by one site commutes with H
    perm = np.array([((i >> 1) | ((i & 1) << 5)) for i in range(64)])
    shifted = h.matrix[np.ix_(perm, perm)]
    assert np.allclose(shifted, h.matrix)


def test_chain_rejects_bad_specs():
    with pytest.raises(ValueError):
        build_lattice_chain(LatticeChainSpec(2))
    with pytest.raises(ValueError):
        build_lattice_chain(LatticeChainSpec(4, bond_term={"ZZ": 5.0}))
    with pytest.raises(ValueError):
        build_lattice_chain(LatticeChainSpec(4, bond_term={"II": 1.0}))


def test_gap_certified_chain():
    h = build_lattice_chain(LatticeChainSpec(6, translationally_invariant=True, seed=1,
                                             require_nondegenerate_gaps=True))
    assert h.gap_report.ok
    with pytest.raises(RuntimeError):
        build_lattice_chain(LatticeChainSpec(4, bond_term={"ZZ": 1.0}, require_nondegenerate_gaps=True))


# -- gap check --------------------------------------------------------------


def test_gap_check_examples():
    assert not check_nondegenerate_gaps([0.0, 1.0, 2.0], 1e-6).ok
    assert check_nondegenerate_gaps([0.0, 1.0, math.pi], 1e-6).ok
    assert not check_nondegenerate_gaps([0.0, 0.0, 1.7], 1e-6).ok


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=2, max_size=7))
def test_gap_check_matches_brute_force(levels):
    tol = 1e-6
    diffs = [a - b for a, b in itertools.permutations(levels, 2)]
    brute = all(abs(x - y) > tol for x, y in itertools.combinations(diffs, 2))
    assert check_nondegenerate_gaps(levels, tol).ok == brute


# -- spin glass -------------------------------------------------------------


def test_spin_glass_two_qubits():
    s = build_spin_glass(2, seed=5)
    assert s.coefficients.size == 9 == spin_glass_dimension(2)
    oracle = sum(c * pauli_oracle(1.0, {0: l, 1: m}, 2) for (j, k, l, m), c in zip(s.index, s.coefficients)) / 3
    assert np.allclose(s.hamiltonian.matrix, oracle)


def test_spin_glass_zero_coefficients():
    s = build_spin_glass(3, coefficients=np.zeros(spin_glass_dimension(3)))
    assert np.allclose(s.hamiltonian.matrix, 0)


def test_spin_glass_second_moment():
    vals = np.array([
        np.mean(build_spin_glass(3, derive_seed(2, i)).hamiltonian.eigenvalues ** 2) for i in range(300)
    ])
    assert abs(vals.mean() - 1.0) <= 3 * vals.std(ddof=1) / math.sqrt(vals.size)


def test_restriction_examples():
    s = build_spin_glass(3, seed=1)
    r = restrict_to_subsystem(s, (0, 1))
    assert len(r.terms) == 9
    expected = [c / 3 for (j, k, _, _), c in zip(s.index, s.coefficients) if (j, k) == (0, 1)]
    assert np.allclose([t.coefficient for t in r.terms], expected)
    assert np.allclose(restrict_to_subsystem(s, (0, 1, 2)).matrix, s.hamiltonian.matrix)


@pytest.mark.parametrize("big,n", [(4, 2), (5, 3)])
def test_subsystem_average_reconstructs_hamiltonian(big, n):
    s = build_spin_glass(big, seed=8)
    diff = subsystem_sum(s, n) - s.hamiltonian.matrix
    assert np.max(np.abs(np.linalg.eigvalsh(diff))) <= 1e-9


# -- SYK --------------------------------------------------------------------


@pytest.mark.parametrize("n_majorana", [8, 10, 12])
def test_majorana_anticommutation(n_majorana):
    nq = n_majorana // 2
    chis = [majorana_string(a, nq).to_matrix(nq) for a in range(n_majorana)]
    for a, b in itertools.combinations_with_replacement(range(n_majorana), 2):
        ac = chis[a] @ chis[b] + chis[b] @ chis[a]
        assert np.max(np.abs(ac - (2 * np.eye(2**nq) if a == b else 0))) <= 1e-10


def test_majorana_monomial_matches_product():
    nq = 4
    chis = [majorana_string(a, nq).to_matrix(nq) for a in range(8)]
    for quad in [(0, 1, 2, 3), (1, 3, 4, 6), (0, 2, 5, 7)]:
        m = majorana_monomial(quad, nq)
        prod = chis[quad[0]] @ chis[quad[1]] @ chis[quad[2]] @ chis[quad[3]]
        assert np.allclose(m.to_matrix(nq), prod)
        assert np.allclose(prod, prod.conj().T)


def test_syk_counts_and_parity():
    s = build_syk(8, seed=2)
    assert s.coefficients.size == math.comb(8, 4) == 70
    assert s.num_qubits == 4
    h = s.hamiltonian.matrix
    assert abs(np.trace(h)) <= 1e-12
    p = np.diag([(-1) ** bin(i).count("1") for i in range(16)])
    assert np.allclose(h @ p, p @ h)
    with pytest.raises(ValueError):
        build_syk(7)
    with pytest.raises(ValueError):
        build_syk(6)


def test_syk_restriction_to_blocks():
    s = build_syk(10, seed=4)
    assert pair_aligned_blocks(10, 4) == [(0, 1, 2, 3), (2, 3, 4, 5), (4, 5, 6, 7), (6, 7, 8, 9)]
    r = restrict_to_subsystem(s, (2, 3, 4, 5))
    assert r.num_qubits == 2
    assert len(r.terms) == 1
    # the single inside coupling, renormalized by C(4,4) = 1
    idx = s.index.index((2, 3, 4, 5))
    assert abs(r.terms[0].coefficient) == pytest.approx(abs(s.coefficients[idx]))
    assert np.allclose(restrict_to_subsystem(s, tuple(range(10))).matrix, s.hamiltonian.matrix)
    with pytest.raises(ValueError):
        restrict_to_subsystem(s, (1, 2, 3, 4))


# -- charge-conserving circuits ---------------------------------------------


def test_depth_zero_is_identity():
    assert np.array_equal(build_charge_conserving_unitary(ChargeCircuitSpec(4, 0)), np.eye(16))


def test_circuit_is_unitary_and_conserves_charge():
    spec = ChargeCircuitSpec(5, 4, seed=9)
    u = build_charge_conserving_unitary(spec)
    assert np.allclose(u.conj().T @ u, np.eye(32), atol=1e-12)
    q = total_charge(5).matrix
    assert np.allclose(u @ q, q @ u, atol=1e-12)
    rng = np.random.default_rng(0)
    psi = rng.standard_normal(32) + 1j * rng.standard_normal(32)
    psi /= np.linalg.norm(psi)
    out = u @ psi
    charges = np.diag(q).real
    for c in np.unique(charges):
        sel = charges == c
        assert np.sum(np.abs(out[sel]) ** 2) == pytest.approx(np.sum(np.abs(psi[sel]) ** 2), abs=1e-10)
    # layer-by-layer application agrees with the dense unitary
    v = psi
    for layer in charge_circuit_layers(spec):
        v = apply_layer(v, layer, 5)
    assert np.allclose(v, out, atol=1e-12)


def test_single_gate_keeps_one_excitation_sector():
    layers = charge_circuit_layers(ChargeCircuitSpec(2, 1, seed=3))
    v = np.zeros(4, dtype=complex)
    v[0b01] = 1
    out = apply_layer(v, layers[0], 2)
    assert abs(out[0]) < 1e-14 and abs(out[3]) < 1e-14
    assert np.linalg.norm(out) == pytest.approx(1.0)


# -- moments ----------------------------------------------------------------


def test_moment_check_bounds_and_k1():
    reps = trace_moment_check("spin_glass", 2, 2, 2000, seed=1)
    assert [r.bound for r in reps] == [1, 3]
    assert all(r.upper_ok and r.lower_ok for r in reps)
    assert abs(reps[0].mean_tr_2k - 1.0) <= 3 * reps[0].stderr_tr_2k
    with pytest.raises(ValueError):
        trace_moment_check("spin_glass", 4, 2, 50)
