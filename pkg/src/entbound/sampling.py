"""
Seeded Haar ensembles and Monte Carlo statistics of initial-state energies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Literal

import numpy as np

from .models import as_rng, derive_seed, majorana_monomial, spin_glass_index, syk_index
from .qcore import (
    HermitianOperator,
    PauliString,
    PureState,
    entropy_from_spectrum,
    pauli_expectations,
)


@dataclass(frozen=True)
class EnsembleSpec:
    """
    ``haar_qubit_product``: Haar product states on ``num_qubits`` qubits.
    ``haar_bipartite``: Haar vectors in ``C^{d_A} ⊗ C^{d_B}``.
    ``computational_basis``: the basis state ``basis_index``, or a uniformly
    random basis state per sample when ``basis_index`` is None.

    Sample ``i`` uses ``derive_seed(seed, i)``.
    """

    kind: Literal["haar_qubit_product", "haar_bipartite", "computational_basis"]
    num_qubits: int | None = None
    d_A: int | None = None
    d_B: int | None = None
    seed: int = 0
    num_samples: int = 1
    basis_index: int | None = None

    def __post_init__(self):
        if self.num_samples < 1:
            raise ValueError("num_samples must be >= 1")
        if self.kind == "haar_bipartite":
            if self.d_A is None or self.d_B is None:
                raise ValueError("haar_bipartite needs d_A and d_B")
        elif self.kind in ("haar_qubit_product", "computational_basis"):
            if not self.num_qubits or self.num_qubits < 1:
                raise ValueError(f"{self.kind} needs num_qubits >= 1")
        else:
            raise ValueError(f"unknown ensemble kind {self.kind!r}")


def haar_qubit_factors(n: int, seed=None) -> np.ndarray:
    """``(n, 2)`` array of independent Haar-random single-qubit vectors."""
    rng = as_rng(seed)
    z = rng.standard_normal((n, 2)) + 1j * rng.standard_normal((n, 2))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def bloch_vectors(factors: np.ndarray) -> np.ndarray:
    """Bloch vectors ``(<X>, <Y>, <Z>)`` of single-qubit vectors, shape ``(..., 3)``."""
    a, b = factors[..., 0], factors[..., 1]
    cross = np.conj(a) * b
    return np.stack([2 * cross.real, 2 * cross.imag, np.abs(a) ** 2 - np.abs(b) ** 2], axis=-1)


def product_vector(factors: np.ndarray) -> np.ndarray:
    v = factors[0]
    for f in factors[1:]:
        v = np.kron(v, f)
    return v


def sample_haar_product_state(n: int, seed=None) -> PureState:
    """Tensor product of ``n`` independent Haar-random qubits (qubit 0 first)."""
    if n < 1:
        raise ValueError("need at least one qubit")
    return PureState(n, product_vector(haar_qubit_factors(n, seed)))


def sample_haar_bipartite(d_A: int, d_B: int, seed=None) -> np.ndarray:
    """Haar-random unit vector of length ``d_A * d_B`` (A-major ordering)."""
    if d_A > d_B:
        raise ValueError(f"d_A = {d_A} exceeds d_B = {d_B}")
    rng = as_rng(seed)
    z = rng.standard_normal(d_A * d_B) + 1j * rng.standard_normal(d_A * d_B)
    return z / np.linalg.norm(z)


def haar_bipartite_entropies(d_A: int, d_B: int, num_samples: int, seed=0,
                             batch: int = 20000) -> np.ndarray:
    """
    ``S(rho_A)`` for ``num_samples`` Haar bipartite states.

    Drawn in batches from one generator seeded with ``seed``; the batch size
    does not change the stream because draws are consumed in order.
    """
    if d_A > d_B:
        raise ValueError(f"d_A = {d_A} exceeds d_B = {d_B}")
    rng = as_rng(seed)
    out = np.empty(num_samples)
    done = 0
    while done < num_samples:
        m = min(batch, num_samples - done)
        z = rng.standard_normal((m, d_A, d_B, 2))
        psi = z[..., 0] + 1j * z[..., 1]
        psi /= np.linalg.norm(psi.reshape(m, -1), axis=1)[:, None, None]
        rho = psi @ np.swapaxes(psi.conj(), -1, -2)
        out[done:done + m] = entropy_from_spectrum(np.linalg.eigvalsh(rho))
        done += m
    return out


def ensemble_states(ensemble: EnsembleSpec) -> Iterator[np.ndarray]:
    """Yield state vectors of the ensemble, one per sample."""
    for i in range(ensemble.num_samples):
        s = derive_seed(ensemble.seed, i)
        if ensemble.kind == "haar_qubit_product":
            yield product_vector(haar_qubit_factors(ensemble.num_qubits, s))
        elif ensemble.kind == "haar_bipartite":
            yield sample_haar_bipartite(ensemble.d_A, ensemble.d_B, s)
        else:
            dim = 2**ensemble.num_qubits
            idx = ensemble.basis_index
            if idx is None:
                idx = int(as_rng(s).integers(dim))
            v = np.zeros(dim, dtype=complex)
            v[idx] = 1.0
            yield v


def product_state_expectation(op: HermitianOperator, bloch: np.ndarray) -> np.ndarray:
    """
    ``<Psi|H|Psi>`` for product states given by Bloch vectors of shape ``(..., N, 3)``.

    Each Pauli term factorizes into a product of Bloch components, so this
    never touches a ``2^N`` vector.
    """
    col = {"X": 0, "Y": 1, "Z": 2}
    out = np.zeros(bloch.shape[:-2])
    for t in op.terms:
        val = np.full(bloch.shape[:-2], t.coefficient)
        for site, p in t.factors.items():
            val = val * bloch[..., site, col[p]]
        out = out + val
    return out


@dataclass
class EnergyStatistics:
    num_samples: int
    mean: float
    mean_abs: float
    stderr_mean_abs: float
    std: float
    threshold: float
    fraction_above_threshold: float

    @property
    def stderr_mean(self) -> float:
        return self.std / math.sqrt(self.num_samples)


def summarize_energies(values: np.ndarray, threshold: float) -> EnergyStatistics:
    values = np.asarray(values, dtype=float)
    m = values.size
    absv = np.abs(values)
    return EnergyStatistics(
        num_samples=m,
        mean=float(values.mean()),
        mean_abs=float(absv.mean()),
        stderr_mean_abs=float(absv.std(ddof=1) / math.sqrt(m)) if m > 1 else 0.0,
        std=float(values.std(ddof=1)) if m > 1 else 0.0,
        threshold=threshold,
        fraction_above_threshold=float(np.mean(absv >= threshold)),
    )


def energy_values(op: HermitianOperator, ensemble: EnsembleSpec) -> np.ndarray:
    """``<Psi|H|Psi>`` for each member of the ensemble."""
    if ensemble.kind == "haar_qubit_product":
        if ensemble.num_qubits != op.num_qubits:
            raise ValueError("ensemble and operator sizes differ")
        factors = np.array([
            haar_qubit_factors(ensemble.num_qubits, derive_seed(ensemble.seed, i))
            for i in range(ensemble.num_samples)
        ])
        if op.terms:
            return product_state_expectation(op, bloch_vectors(factors))
        states = [product_vector(f) for f in factors]
    else:
        states = list(ensemble_states(ensemble))
    h = op.matrix
    if states and states[0].shape[0] != h.shape[0]:
        raise ValueError("ensemble and operator sizes differ")
    return np.array([np.vdot(v, h @ v).real for v in states])


def energy_statistics(op: HermitianOperator, ensemble: EnsembleSpec,
                      threshold_factor: float = 1.0) -> EnergyStatistics:
    """
    Mean, mean absolute value, spread and tail fraction of ``<Psi|H|Psi>``.

    The tail counts samples with ``|<H>| >= threshold_factor * sqrt(N)``.
    """
    if ensemble.num_samples < 100:
        raise ValueError("energy statistics need at least 100 samples")
    vals = energy_values(op, ensemble)
    return summarize_energies(vals, threshold_factor * math.sqrt(op.num_qubits))


# ---------------------------------------------------------------------------
# Energies over disorder for a fixed state
# ---------------------------------------------------------------------------


def disorder_term_expectations(kind: str, size: int, state) -> np.ndarray:
    """
    Normalized expectation of every coupling's operator in ``state``:
    ``<psi|sigma_j^l sigma_k^m|psi>`` (spin glass) or
    ``<psi|chi_j chi_k chi_l chi_m|psi>`` (SYK), in coefficient order.
    """
    if kind == "spin_glass":
        strings = [PauliString(1.0, {j: l, k: m}) for j, k, l, m in spin_glass_index(size)]
    elif kind == "syk":
        strings = [majorana_monomial(q, size // 2) for q in syk_index(size)]
    else:
        raise ValueError(f"unknown disorder kind {kind!r}")
    signs = np.array([p.coefficient for p in strings])
    return signs * pauli_expectations(state, strings)


def disorder_energies(kind: str, size: int, state, num_disorder: int, seed: int = 0) -> np.ndarray:
    """``<psi|H_J|psi>`` for disorder samples ``derive_seed(seed, i)``."""
    m = disorder_term_expectations(kind, size, state)
    out = np.empty(num_disorder)
    for i in range(num_disorder):
        # same stream the model builders consume
        coeffs = as_rng(derive_seed(seed, i)).standard_normal(m.size)
        out[i] = coeffs @ m / math.sqrt(m.size)
    return out


def disorder_mean_abs_energy_exact(kind: str, size: int, state) -> float:
    """
    ``E_J |<psi|H_J|psi>|`` in closed form.

    ``<psi|H_J|psi>`` is a centred Gaussian with variance ``sum m_i^2 / d``,
    so the mean absolute value is ``sqrt(2 / pi)`` times its standard deviation.
    """
    m = disorder_term_expectations(kind, size, state)
    return math.sqrt(2.0 / math.pi) * math.sqrt(float(m @ m) / m.size)
