import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm, logm

from entbound.qcore import (
    DensityMatrix,
    HermitianOperator,
    InvalidStateError,
    PauliString,
    PureState,
    SubsystemMask,
    eigendecompose,
    embed,
    entanglement_entropies,
    expectation_value,
    partial_trace,
    pauli_expectations,
    pauli_multiply,
    purity,
    renyi2_entropy,
    solve_thermal_beta,
    thermal_energy,
    thermal_entropy,
    thermal_state,
    total_charge,
    trace_norm_distance,
    von_neumann_entropy,
)

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]]),
    "Z": np.diag([1.0, -1.0]).astype(complex),
}


def kron_all(ms):
    out = np.eye(1, dtype=complex)
    for m in ms:
        out = np.kron(out, m)
    return out


def pauli_oracle(coefficient, factors, n):
    return coefficient * kron_all([PAULI[factors.get(k, "I")] for k in range(n)])


def partial_trace_oracle(rho, n, keep):
    """Reshape to a 2n-index tensor, move kept axes first, trace the rest pairwise."""
    t = rho.reshape([2] * (2 * n))
    drop = [k for k in range(n) if k not in keep]
    order = list(keep) + drop
    t = np.transpose(t, order + [n + k for k in order])
    dk, dd = 2 ** len(keep), 2 ** len(drop)
    t = t.reshape(dk, dd, dk, dd)
    return np.einsum("ajbj->ab", t)


def random_density(rng, n, rank=None):
    d = 2**n
    rank = rank or d
    g = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_state(rng, n):
    v = rng.standard_normal(2**n) + 1j * rng.standard_normal(2**n)
    return v / np.linalg.norm(v)


# -- partial trace ----------------------------------------------------------


def test_bell_marginal_is_maximally_mixed():
    psi = PureState(2, np.array([1, 0, 0, 1]) / math.sqrt(2))
    assert np.allclose(partial_trace(psi, [0]).matrix, np.eye(2) / 2, atol=1e-12)


def test_product_marginal():
    psi = PureState.basis(2, 0b01)
    assert np.allclose(partial_trace(psi, [1]).matrix, np.diag([0, 1]), atol=1e-12)
    assert np.allclose(partial_trace(psi, [0]).matrix, np.diag([1, 0]), atol=1e-12)


def test_ghz_two_qubit_marginal():
    v = np.zeros(8)
    v[0] = v[7] = 1 / math.sqrt(2)
    expected = np.zeros((4, 4))
    expected[0, 0] = expected[3, 3] = 0.5
    assert np.allclose(partial_trace(PureState(3, v), [0, 1]).matrix, expected, atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(n=st.integers(1, 5), data=st.data())
def test_partial_trace_matches_transpose_oracle(n, data):
    keep = sorted(data.draw(st.sets(st.integers(0, n - 1), min_size=1, max_size=n)))
    seed = data.draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    psi = random_state(rng, n)
    oracle = partial_trace_oracle(np.outer(psi, psi.conj()), n, keep)
    assert np.allclose(partial_trace(PureState(n, psi), keep).matrix, oracle, atol=1e-12)
    rho = random_density(rng, n)
    assert np.allclose(partial_trace(DensityMatrix(n, rho), keep).matrix,
                       partial_trace_oracle(rho, n, keep), atol=1e-12)


def test_partial_trace_rejects_bad_masks():
    psi = PureState.basis(3, 0)
    with pytest.raises(IndexError):
        partial_trace(psi, [3])
    with pytest.raises(ValueError):
        SubsystemMask((1, 1))
    with pytest.raises(ValueError):
        SubsystemMask(())


def test_invalid_states_rejected():
    with pytest.raises(InvalidStateError):
        PureState(1, np.array([1.0, 1.0]))
    with pytest.raises(InvalidStateError):
        DensityMatrix(1, np.diag([1.5, -0.5]))
    with pytest.raises(InvalidStateError):
        DensityMatrix(1, np.array([[0.5, 0.1], [0.0, 0.5]]))


# -- entropies --------------------------------------------------------------


def test_entropy_examples():
    assert von_neumann_entropy(np.eye(2) / 2) == pytest.approx(math.log(2), abs=1e-12)
    assert von_neumann_entropy(np.diag([1.0, 0.0])) == pytest.approx(0.0, abs=1e-12)
    assert von_neumann_entropy(np.diag([0.5, 0.25, 0.125, 0.125])) == pytest.approx(1.75 * math.log(2), abs=1e-12)
    assert 1.75 * math.log(2) == pytest.approx(1.21301, abs=1e-5)
    assert renyi2_entropy(np.eye(4) / 4) == pytest.approx(2 * math.log(2), abs=1e-12)
    assert renyi2_entropy(np.diag([1.0, 0.0])) == pytest.approx(0.0, abs=1e-12)
    assert renyi2_entropy(np.diag([0.75, 0.25])) == pytest.approx(math.log(1.6), abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 3))
def test_entropy_matches_matrix_log_oracle(seed, n):
    rho = random_density(np.random.default_rng(seed), n)
    oracle = -np.trace(rho @ logm(rho)).real
    assert von_neumann_entropy(rho) == pytest.approx(oracle, abs=1e-9)
    assert renyi2_entropy(rho) <= von_neumann_entropy(rho) + 1e-12
    assert purity(rho) == pytest.approx(np.trace(rho @ rho).real, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 6), data=st.data())
def test_batched_entropies_agree_with_partial_trace(seed, n, data):
    keep = tuple(sorted(data.draw(st.sets(st.integers(0, n - 1), min_size=1, max_size=n - 1))))
    rng = np.random.default_rng(seed)
    states = np.array([random_state(rng, n) for _ in range(3)])
    batch = entanglement_entropies(states, keep)
    single = [von_neumann_entropy(partial_trace(PureState(n, v), keep)) for v in states]
    assert np.allclose(batch, single, atol=1e-10)
    comp = tuple(k for k in range(n) if k not in keep)
    assert np.allclose(batch, entanglement_entropies(states, comp), atol=1e-8)


def test_trace_norm_distance_examples():
    rho = np.diag([1.0, 0.0])
    assert trace_norm_distance(rho, rho) == pytest.approx(0.0, abs=1e-12)
    assert trace_norm_distance(rho, np.diag([0.0, 1.0])) == pytest.approx(2.0)
    assert trace_norm_distance(rho, np.eye(2) / 2) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        trace_norm_distance(rho, np.eye(4) / 4)


# -- operators --------------------------------------------------------------


def test_expectation_examples():
    z = HermitianOperator.from_pauli(1, {0: "Z"})
    x = HermitianOperator.from_pauli(1, {0: "X"})
    assert expectation_value(PureState.basis(1, 0), z) == pytest.approx(1.0)
    plus = PureState(1, np.array([1, 1]) / math.sqrt(2))
    assert expectation_value(plus, x) == pytest.approx(1.0)
    assert expectation_value(DensityMatrix.maximally_mixed(1), x) == pytest.approx(0.0, abs=1e-15)


@settings(max_examples=80, deadline=None)
@given(n=st.integers(1, 4), data=st.data())
def test_pauli_string_matrix_matches_kron_oracle(n, data):
    factors = data.draw(st.dictionaries(st.integers(0, n - 1), st.sampled_from("XYZ"), max_size=n))
    c = data.draw(st.floats(-3, 3).filter(lambda v: abs(v) > 1e-3))
    p = PauliString(c, factors)
    assert np.allclose(p.to_matrix(n), pauli_oracle(c, factors, n), atol=1e-13)
    v = random_state(np.random.default_rng(data.draw(st.integers(0, 2**31))), n)
    direct = np.vdot(v, pauli_oracle(1.0, factors, n) @ v).real
    assert pauli_expectations(v, [p])[0] == pytest.approx(direct, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(data=st.data())
def test_pauli_multiply_matches_matrix_product(data):
    n = 3
    fa = data.draw(st.dictionaries(st.integers(0, n - 1), st.sampled_from("XYZ")))
    fb = data.draw(st.dictionaries(st.integers(0, n - 1), st.sampled_from("XYZ")))
    phase, factors = pauli_multiply(PauliString(1.0, fa), PauliString(1.0, fb))
    assert np.allclose(phase * pauli_oracle(1.0, factors, n),
                       pauli_oracle(1.0, fa, n) @ pauli_oracle(1.0, fb, n), atol=1e-13)


def test_operator_json_round_trip():
    h = HermitianOperator(3, [PauliString(0.5, {0: "X", 2: "Y"}), PauliString(-1.25, {1: "Z"})])
    back = HermitianOperator.from_json(h.to_json())
    assert np.array_equal(back.matrix, h.matrix)
    assert h.is_traceless


def test_eigendecompose_examples():
    w, _ = eigendecompose(HermitianOperator.from_pauli(1, {0: "X"}))
    assert np.allclose(w, [-1, 1])
    w, _ = eigendecompose(HermitianOperator.from_pauli(2, {0: "Z", 1: "Z"}))
    assert np.allclose(w, [-1, -1, 1, 1])
    rng = np.random.default_rng(4)
    terms = [PauliString(rng.standard_normal(), {k: rng.choice(list("XYZ")) for k in rng.choice(3, 2, replace=False)})
             for _ in range(6)]
    h = HermitianOperator(3, terms)
    w, v = eigendecompose(h)
    assert np.all(np.diff(w) >= 0)
    assert np.allclose(v @ np.diag(w) @ v.conj().T, h.matrix, atol=1e-12)
    assert np.allclose(v.conj().T @ v, np.eye(8), atol=1e-12)
    with pytest.raises(ValueError):
        eigendecompose(np.array([[0, 1], [0, 0]], dtype=complex))


def test_embed_matches_kron():
    rng = np.random.default_rng(1)
    a = rng.standard_normal((4, 4))
    b = rng.standard_normal((2, 2))
    full = np.kron(np.kron(a, np.eye(2)), b)
    # sites 0,1 carry a, site 3 carries b; compare via two embeddings
    got = embed(a, (0, 1), 4) @ embed(b, (3,), 4)
    assert np.allclose(got, full)
    swap = embed(a, (1, 0), 2)
    perm = np.array([0, 2, 1, 3])
    assert np.allclose(swap, a[np.ix_(perm, perm)])


def test_total_charge_is_diagonal_count():
    q = total_charge(3).matrix
    expected = [3 - 2 * bin(i).count("1") for i in range(8)]
    assert np.allclose(np.diag(q).real, expected)


# -- thermal states ---------------------------------------------------------


def test_thermal_examples():
    z = HermitianOperator.from_pauli(1, {0: "Z"})
    assert np.allclose(thermal_state(HermitianOperator.from_pauli(2, {0: "X", 1: "Y"}), 0.0).matrix,
                       np.eye(4) / 4, atol=1e-14)
    for beta in (-1.3, 0.4, 2.0):
        expected = np.diag([math.exp(-beta), math.exp(beta)]) / (2 * math.cosh(beta))
        assert np.allclose(thermal_state(z, beta).matrix, expected, atol=1e-14)
    assert np.allclose(thermal_state(z, 50.0).matrix, np.diag([0.0, 1.0]), atol=1e-10)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), beta=st.floats(-3, 3))
def test_thermal_quantities_match_expm_oracle(seed, beta):
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    h = (g + g.conj().T) / 2
    rho = expm(-beta * h)
    rho /= np.trace(rho).real
    w = np.linalg.eigvalsh(h)
    assert float(thermal_energy(w, beta)) == pytest.approx(np.trace(rho @ h).real, abs=1e-9)
    assert float(thermal_entropy(w, beta)) == pytest.approx(von_neumann_entropy(rho), abs=1e-9)


def test_thermal_large_beta_is_finite():
    w = np.array([-400.0, 0.0, 400.0])
    assert np.isfinite(thermal_energy(w, 10.0))
    assert float(thermal_energy(w, 10.0)) == pytest.approx(-400.0)


def test_solve_thermal_beta():
    w = np.linspace(-1, 1, 9)
    beta = solve_thermal_beta(lambda b: float(thermal_energy(w, b)), 0.3)
    assert float(thermal_energy(w, beta)) == pytest.approx(0.3, abs=1e-8)
    assert beta < 0
