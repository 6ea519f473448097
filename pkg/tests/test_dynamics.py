import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.linalg import expm
from scipy.special import entr

from entbound.dynamics import (
    EvolutionContext,
    TimeGrid,
    default_tau,
    diagonal_ensemble,
    effective_dimension,
    energy_series,
    entropy_timeseries,
    evolve,
    evolve_many,
    reduced_diagonal_ensemble,
    time_averaged_trace_distance,
    write_timeseries_csv,
)
from entbound.models import LatticeChainSpec, build_lattice_chain
from entbound.qcore import HermitianOperator, PauliString, partial_trace, trace_norm
from entbound.sampling import sample_haar_product_state

SZ = HermitianOperator.from_pauli(1, {0: "Z"})
PLUS = np.array([1, 1]) / math.sqrt(2)


def test_time_grid_validation():
    with pytest.raises(ValueError):
        TimeGrid(np.array([0.0, 1.0, 1.0]))
    g = TimeGrid.uniform_random(5.0, 10, seed=1)
    assert np.all((g.times >= 0) & (g.times <= 5)) and g.tau == 5.0
    assert np.array_equal(g.times, TimeGrid.uniform_random(5.0, 10, seed=1).times)
    assert g.describe()["num_times"] == 10


def test_evolve_examples():
    ctx = EvolutionContext.from_hamiltonian(SZ, PLUS)
    assert np.allclose(evolve(ctx, 0.0).amplitudes, PLUS, atol=1e-14)
    t = math.pi / 2
    expected = np.array([np.exp(-1j * t), np.exp(1j * t)]) / math.sqrt(2)
    assert np.allclose(evolve(ctx, t).amplitudes, expected, atol=1e-14)


def test_evolution_matches_expm_and_conserves_energy():
    h = build_lattice_chain(LatticeChainSpec(5, seed=4))
    psi = sample_haar_product_state(5, 2).amplitudes
    ctx = EvolutionContext.from_hamiltonian(h, psi)
    times = np.linspace(0, 7, 15)
    states = evolve_many(ctx, times)
    for t, v in zip(times, states):
        assert np.allclose(v, expm(-1j * h.matrix * t) @ psi, atol=1e-10)
    e = energy_series(ctx, states, h.matrix)
    assert np.max(np.abs(e - ctx.energy)) <= 1e-8


def test_two_qubit_xx_entropy_oscillation():
    h = HermitianOperator(2, [PauliString(1.0, {0: "X", 1: "X"})])
    v = np.zeros(4, dtype=complex)
    v[0] = 1
    grid = TimeGrid.linear(3.0, 61)
    s = entropy_timeseries(EvolutionContext.from_hamiltonian(h, v), grid, [(0,)])[:, 0]
    # cos(t)|00> - i sin(t)|11>: marginal spectrum (cos^2 t, sin^2 t)
    c2 = np.cos(grid.times) ** 2
    oracle = entr(c2) + entr(1 - c2)
    assert np.allclose(s, oracle, atol=1e-10)
    assert s.max() <= math.log(2) + 1e-8
    at_quarter = entropy_timeseries(EvolutionContext.from_hamiltonian(h, v), TimeGrid(np.array([math.pi / 4])), [(0,)])
    assert at_quarter[0, 0] == pytest.approx(math.log(2), abs=1e-12)


def test_product_state_starts_unentangled():
    h = build_lattice_chain(LatticeChainSpec(4, seed=1))
    ctx = EvolutionContext.from_hamiltonian(h, sample_haar_product_state(4, 5))
    s = entropy_timeseries(ctx, TimeGrid.linear(1.0, 3), [(0,), (0, 1), (1, 3)])
    assert np.allclose(s[0], 0.0, atol=1e-10)


def test_diagonal_ensemble_examples():
    ctx = EvolutionContext.from_hamiltonian(SZ, PLUS)
    assert np.allclose(diagonal_ensemble(ctx).matrix, np.eye(2) / 2)
    h = build_lattice_chain(LatticeChainSpec(4, seed=2))
    w, v = h.eigh()
    eig = EvolutionContext(w, v, v[:, 3])
    assert np.allclose(diagonal_ensemble(eig).matrix, np.outer(v[:, 3], v[:, 3].conj()), atol=1e-12)
    assert effective_dimension(eig) == pytest.approx(1.0)
    uniform = EvolutionContext(w, v, v.sum(axis=1) / 4)
    assert effective_dimension(uniform) == pytest.approx(16.0)
    rho = diagonal_ensemble(EvolutionContext.from_hamiltonian(h, sample_haar_product_state(4, 1)))
    assert np.trace(rho.matrix).real == pytest.approx(1.0, abs=1e-10)


def test_effective_dimension_hand_value():
    w = np.arange(4.0)
    v = np.eye(4, dtype=complex)
    psi = np.sqrt([0.5, 0.25, 0.125, 0.125]).astype(complex)
    assert effective_dimension(EvolutionContext(w, v, psi)) == pytest.approx(32 / 11)


def test_reduced_diagonal_ensemble_matches_partial_trace():
    h = build_lattice_chain(LatticeChainSpec(5, seed=3))
    ctx = EvolutionContext.from_hamiltonian(h, sample_haar_product_state(5, 4))
    full = partial_trace(diagonal_ensemble(ctx), [1, 2]).matrix
    assert np.allclose(reduced_diagonal_ensemble(ctx, (1, 2)), full, atol=1e-12)


def test_trace_distance_single_qubit_precession():
    ctx = EvolutionContext.from_hamiltonian(SZ, PLUS)
    grid = TimeGrid.uniform_random(50.0, 40, seed=0)
    avg = time_averaged_trace_distance(ctx, (0,), grid)
    assert avg.estimate == pytest.approx(1.0, abs=1e-12)


def test_trace_distance_against_quadrature():
    h = HermitianOperator(2, [PauliString(1.0, {0: "X", 1: "X"}), PauliString(0.7, {0: "Z"}),
                              PauliString(0.31, {1: "Z"}), PauliString(0.45, {0: "Y", 1: "Z"})])
    psi = sample_haar_product_state(2, 11).amplitudes
    ctx = EvolutionContext.from_hamiltonian(h, psi)
    rho_inf = reduced_diagonal_ensemble(ctx, (0,))
    tau = 40.0

    def dist(t):
        v = expm(-1j * h.matrix * t) @ psi
        return trace_norm(partial_trace(v, [0]).matrix - rho_inf)

    exact = quad(dist, 0, tau, limit=400)[0] / tau
    grid = TimeGrid(np.linspace(0, tau, 20001), "linear", tau)
    est = time_averaged_trace_distance(ctx, (0,), grid).estimate
    assert est == pytest.approx(exact, abs=2e-3)


def test_eigenstate_has_zero_distance_and_warning_for_short_tau():
    h = build_lattice_chain(LatticeChainSpec(4, seed=2))
    w, v = h.eigh()
    ctx = EvolutionContext(w, v, v[:, 0])
    with pytest.warns(RuntimeWarning):
        avg = time_averaged_trace_distance(ctx, (0, 1), TimeGrid.uniform_random(1e-3, 5, seed=1))
    assert avg.estimate == pytest.approx(0.0, abs=1e-12)
    assert default_tau(ctx) == pytest.approx(100 / ctx.min_nonzero_gap())


def test_timeseries_csv(tmp_path):
    path = tmp_path / "ts.csv"
    write_timeseries_csv(path, [0.0, 1.0], np.array([[0.0, 0.1], [0.2, 0.3]]), energies=[1.0, 1.0],
                         mask_ids=["a", "b"])
    lines = path.read_text().splitlines()
    assert lines[0] == "time,mask_id,entropy_nats,energy,bound_rhs_if_any"
    assert lines[1] == "0.0,a,0.0,1.0," and len(lines) == 5
