"""
Pure states, density matrices and Pauli-sum operators on qubit registers.

Qubit ordering
--------------
Qubit 0 is the most significant bit of the computational-basis index, so the
register ``|q_0 q_1 ... q_{N-1}>`` has index ``sum_s q_s 2^(N-1-s)``. This is
the ``np.kron(a_0, a_1, ...)`` ordering and every module relies on it.

Entropies are in nats.
"""

from __future__ import annotations

import functools
import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence, Union

import numpy as np
from scipy.special import entr

NORM_TOL = 1e-10
HERMITIAN_TOL = 1e-10
NEG_EIG_TOL = 1e-9

PAULI_LABELS = ("X", "Y", "Z")

_PAULI_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

# single-site products: (a, b) -> (phase, label) with a @ b = phase * label
_PAULI_PRODUCT = {
    ("X", "X"): (1, "I"), ("Y", "Y"): (1, "I"), ("Z", "Z"): (1, "I"),
    ("X", "Y"): (1j, "Z"), ("Y", "X"): (-1j, "Z"),
    ("Y", "Z"): (1j, "X"), ("Z", "Y"): (-1j, "X"),
    ("Z", "X"): (1j, "Y"), ("X", "Z"): (-1j, "Y"),
}


class InvalidStateError(ValueError):
    """Raised when an array violates a state or density-matrix invariant."""


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------


def _num_qubits_for(dim: int) -> int:
    n = int(dim).bit_length() - 1
    if dim < 2 or (1 << n) != dim:
        raise ValueError(f"dimension {dim} is not a power of two >= 2")
    return n


@dataclass(frozen=True)
class PureState:
    """Normalized amplitude vector over ``2**num_qubits`` basis states."""

    num_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if self.num_qubits < 1 or amps.shape[0] != 2**self.num_qubits:
            raise ValueError(
                f"expected {2**self.num_qubits} amplitudes for "
                f"{self.num_qubits} qubits, got {amps.shape[0]}"
            )
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise InvalidStateError(f"state norm {norm!r} differs from 1")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_vector(cls, vector, normalize: bool = False) -> "PureState":
        v = np.asarray(vector, dtype=complex).reshape(-1)
        if normalize:
            v = v / np.linalg.norm(v)
        return cls(_num_qubits_for(v.shape[0]), v)

    @classmethod
    def basis(cls, num_qubits: int, index: int = 0) -> "PureState":
        v = np.zeros(2**num_qubits, dtype=complex)
        v[index] = 1.0
        return cls(num_qubits, v)

    @classmethod
    def product(cls, factors: Sequence[np.ndarray]) -> "PureState":
        """Tensor product of single-qubit vectors, qubit 0 first."""
        v = functools.reduce(np.kron, [np.asarray(f, dtype=complex) for f in factors])
        return cls(len(factors), v / np.linalg.norm(v))

    @property
    def dim(self) -> int:
        return 2**self.num_qubits

    def density_matrix(self) -> "DensityMatrix":
        return DensityMatrix(self.num_qubits, np.outer(self.amplitudes, self.amplitudes.conj()))


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite matrix on ``num_qubits`` qubits."""

    num_qubits: int
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        d = 2**self.num_qubits
        if m.shape != (d, d):
            raise ValueError(f"expected a {d}x{d} matrix, got shape {m.shape}")
        if np.max(np.abs(m - m.conj().T)) > HERMITIAN_TOL:
            raise InvalidStateError("density matrix is not Hermitian")
        tr = np.trace(m).real
        if abs(tr - 1.0) > NORM_TOL:
            raise InvalidStateError(f"density matrix trace {tr!r} differs from 1")
        m = 0.5 * (m + m.conj().T)
        if np.linalg.eigvalsh(m)[0] < -NEG_EIG_TOL:
            raise InvalidStateError("density matrix has a negative eigenvalue")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_matrix(cls, matrix) -> "DensityMatrix":
        m = np.asarray(matrix, dtype=complex)
        return cls(_num_qubits_for(m.shape[0]), m)

    @classmethod
    def maximally_mixed(cls, num_qubits: int) -> "DensityMatrix":
        d = 2**num_qubits
        return cls(num_qubits, np.eye(d, dtype=complex) / d)

    @property
    def dim(self) -> int:
        return 2**self.num_qubits

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)


@dataclass(frozen=True)
class SubsystemMask:
    """Strictly increasing tuple of site indices."""

    sites: tuple

    def __post_init__(self):
        sites = tuple(int(s) for s in self.sites)
        if not sites:
            raise ValueError("subsystem mask must be non-empty")
        if any(b <= a for a, b in zip(sites, sites[1:])):
            raise ValueError(f"mask sites must be strictly increasing: {sites}")
        if sites[0] < 0:
            raise ValueError(f"negative site index in {sites}")
        object.__setattr__(self, "sites", sites)

    def __len__(self) -> int:
        return len(self.sites)

    def __iter__(self):
        return iter(self.sites)

    def check(self, num_qubits: int) -> None:
        if self.sites[-1] >= num_qubits:
            raise IndexError(f"site {self.sites[-1]} out of range for {num_qubits} qubits")

    def complement(self, num_qubits: int) -> "SubsystemMask":
        rest = tuple(s for s in range(num_qubits) if s not in self.sites)
        return SubsystemMask(rest)


def as_mask(sites) -> SubsystemMask:
    return sites if isinstance(sites, SubsystemMask) else SubsystemMask(tuple(sites))


@dataclass(frozen=True)
class PauliString:
    """``coefficient * prod_s P_s`` with identity on sites absent from ``factors``."""

    coefficient: float
    factors: Mapping[int, str] = field(default_factory=dict)

    def __post_init__(self):
        c = float(self.coefficient)
        if not np.isfinite(c) or c == 0.0:
            raise ValueError(f"Pauli coefficient must be finite and nonzero, got {c}")
        facs = {int(k): str(v).upper() for k, v in dict(self.factors).items()}
        for site, label in facs.items():
            if label not in PAULI_LABELS:
                raise ValueError(f"unknown Pauli label {label!r} on site {site}")
            if site < 0:
                raise ValueError(f"negative site {site}")
        object.__setattr__(self, "coefficient", c)
        object.__setattr__(self, "factors", dict(sorted(facs.items())))

    @property
    def support(self) -> tuple:
        return tuple(self.factors)

    @property
    def is_identity(self) -> bool:
        return not self.factors

    def masks(self, num_qubits: int) -> tuple[int, int, int]:
        """Bit masks ``(x_mask, z_mask, num_y)`` under the MSB-first ordering."""
        x_mask = z_mask = 0
        n_y = 0
        for site, label in self.factors.items():
            bit = 1 << (num_qubits - 1 - site)
            if label in ("X", "Y"):
                x_mask |= bit
            if label in ("Z", "Y"):
                z_mask |= bit
            n_y += label == "Y"
        return x_mask, z_mask, n_y

    def to_matrix(self, num_qubits: int) -> np.ndarray:
        if self.factors and max(self.factors) >= num_qubits:
            raise IndexError(f"Pauli string {self} does not fit {num_qubits} qubits")
        d = 2**num_qubits
        out = np.zeros((d, d), dtype=complex)
        _accumulate_pauli(out, self, num_qubits)
        return out

    def relabeled(self, mapping: Mapping[int, int]) -> "PauliString":
        return PauliString(self.coefficient, {mapping[s]: p for s, p in self.factors.items()})

    def label(self) -> str:
        return "".join(f"{p}{s}" for s, p in self.factors.items()) or "I"


@functools.lru_cache(maxsize=64)
def _basis_indices(num_qubits: int) -> np.ndarray:
    idx = np.arange(2**num_qubits, dtype=np.int64)
    idx.setflags(write=False)
    return idx


def _accumulate_pauli(out: np.ndarray, p: PauliString, num_qubits: int, scale: float = 1.0):
    # P|c> = i^{n_y} (-1)^{popcount(c & z)} |c ^ x>
    x_mask, z_mask, n_y = p.masks(num_qubits)
    cols = _basis_indices(num_qubits)
    rows = cols ^ x_mask
    signs = 1.0 - 2.0 * (np.bitwise_count(cols & z_mask) & 1).astype(float)
    out[rows, cols] += (scale * p.coefficient * (1j) ** n_y) * signs


def pauli_expectations(state, strings: Sequence[PauliString]) -> np.ndarray:
    """``<psi|P|psi> / coefficient`` for each Pauli string, without dense matrices."""
    v = state.amplitudes if isinstance(state, PureState) else np.asarray(state, dtype=complex)
    n = _num_qubits_for(v.shape[0])
    cols = _basis_indices(n)
    out = np.empty(len(strings))
    for i, p in enumerate(strings):
        x_mask, z_mask, n_y = p.masks(n)
        signs = 1.0 - 2.0 * (np.bitwise_count(cols & z_mask) & 1)
        val = (1j) ** n_y * np.vdot(v[cols ^ x_mask], signs * v)
        out[i] = val.real
    return out


def pauli_multiply(a: PauliString, b: PauliString) -> tuple[complex, dict]:
    """Return ``(phase, factors)`` with ``a @ b = phase * prod(factors)``."""
    phase = complex(a.coefficient * b.coefficient)
    factors = dict(a.factors)
    for site, label in b.factors.items():
        if site not in factors:
            factors[site] = label
            continue
        ph, lab = _PAULI_PRODUCT[(factors[site], label)]
        phase *= ph
        if lab == "I":
            del factors[site]
        else:
            factors[site] = lab
    return phase, dict(sorted(factors.items()))


class HermitianOperator:
    """
    Hermitian operator given as a real-weighted Pauli sum on ``num_qubits`` qubits.

    The dense matrix and the eigendecomposition are computed lazily and cached.
    ``parts`` optionally records a decomposition ``H = sum(parts)`` (e.g. the
    bond terms of a lattice chain).
    """

    def __init__(self, num_qubits: int, terms: Iterable[PauliString] = (),
                 matrix: np.ndarray | None = None, parts: Sequence["HermitianOperator"] = ()):
        if num_qubits < 1:
            raise ValueError("num_qubits must be >= 1")
        self.num_qubits = int(num_qubits)
        self.terms = tuple(terms)
        for t in self.terms:
            if t.factors and max(t.factors) >= self.num_qubits:
                raise IndexError(f"term {t.label()} acts outside {num_qubits} qubits")
        self.parts = tuple(parts)
        self._matrix = None
        self._eig = None
        if matrix is not None:
            m = np.asarray(matrix, dtype=complex)
            if m.shape != (self.dim, self.dim):
                raise ValueError(f"matrix shape {m.shape} does not match {num_qubits} qubits")
            if np.max(np.abs(m - m.conj().T)) > HERMITIAN_TOL * max(1.0, np.max(np.abs(m))):
                raise ValueError("matrix is not Hermitian")
            m = 0.5 * (m + m.conj().T)
            m.setflags(write=False)
            self._matrix = m

    @classmethod
    def from_matrix(cls, matrix) -> "HermitianOperator":
        m = np.asarray(matrix, dtype=complex)
        return cls(_num_qubits_for(m.shape[0]), matrix=m)

    @classmethod
    def from_pauli(cls, num_qubits: int, spec: Mapping[int, str], coefficient: float = 1.0):
        return cls(num_qubits, [PauliString(coefficient, spec)])

    @property
    def dim(self) -> int:
        return 2**self.num_qubits

    @property
    def matrix(self) -> np.ndarray:
        if self._matrix is None:
            m = np.zeros((self.dim, self.dim), dtype=complex)
            for t in self.terms:
                _accumulate_pauli(m, t, self.num_qubits)
            m.setflags(write=False)
            self._matrix = m
        return self._matrix

    @property
    def is_traceless(self) -> bool:
        if self.terms or self._matrix is None:
            return sum(t.coefficient for t in self.terms if t.is_identity) == 0.0
        return abs(np.trace(self._matrix)) <= HERMITIAN_TOL * self.dim

    def eigh(self) -> tuple[np.ndarray, np.ndarray]:
        if self._eig is None:
            self._eig = eigendecompose(self)
        return self._eig

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.eigh()[0]

    def norm(self) -> float:
        """Operator (spectral) norm."""
        w = self.eigenvalues
        return float(max(abs(w[0]), abs(w[-1])))

    def restricted(self, sites: Sequence[int]) -> "HermitianOperator":
        """
        The same Pauli sum re-expressed on ``len(sites)`` qubits.

        Every term must be supported inside ``sites``; site ``sites[i]``
        becomes qubit ``i``.
        """
        mapping = {s: i for i, s in enumerate(sites)}
        terms = []
        for t in self.terms:
            if not set(t.factors) <= set(mapping):
                raise ValueError(f"term {t.label()} is not supported on sites {tuple(sites)}")
            terms.append(t.relabeled(mapping))
        return HermitianOperator(len(sites), terms)

    def __add__(self, other: "HermitianOperator") -> "HermitianOperator":
        if other.num_qubits != self.num_qubits:
            raise ValueError("operator dimensions differ")
        return HermitianOperator(self.num_qubits, self.terms + other.terms)

    def scaled(self, factor: float) -> "HermitianOperator":
        return HermitianOperator(
            self.num_qubits, [PauliString(t.coefficient * factor, t.factors) for t in self.terms]
        )

    def to_records(self) -> list[dict]:
        """JSON-ready list of ``{coefficient, factors}`` records."""
        return [
            {"coefficient": t.coefficient, "factors": {str(s): p for s, p in t.factors.items()}}
            for t in self.terms
        ]

    def to_json(self) -> str:
        return json.dumps({"num_qubits": self.num_qubits, "terms": self.to_records()}, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "HermitianOperator":
        data = json.loads(text)
        terms = [
            PauliString(r["coefficient"], {int(s): p for s, p in r["factors"].items()})
            for r in data["terms"]
        ]
        return cls(data["num_qubits"], terms)

    def __repr__(self):
        return f"HermitianOperator(num_qubits={self.num_qubits}, terms={len(self.terms)})"


def total_charge(num_qubits: int) -> HermitianOperator:
    """``sum_j Z_j``."""
    return HermitianOperator(num_qubits, [PauliString(1.0, {j: "Z"}) for j in range(num_qubits)])


def embed(local: np.ndarray, sites: Sequence[int], num_qubits: int) -> np.ndarray:
    """Dense ``local ⊗ I`` with ``local`` acting on ``sites`` (in that order)."""
    k = len(sites)
    rest = [s for s in range(num_qubits) if s not in sites]
    full = np.kron(local, np.eye(2 ** (num_qubits - k)))
    # axes of `full` are ordered (sites..., rest...); move back to 0..N-1
    order = list(sites) + rest
    inv = np.argsort(order)
    t = full.reshape([2] * (2 * num_qubits))
    t = t.transpose(list(inv) + [num_qubits + i for i in inv])
    return t.reshape(2**num_qubits, 2**num_qubits)


# ---------------------------------------------------------------------------
# Partial trace
# ---------------------------------------------------------------------------


@functools.lru_cache(maxsize=512)
def keep_major_permutation(num_qubits: int, keep: tuple) -> np.ndarray:
    """
    Index permutation ``P`` such that ``P[a * d_rest + r]`` is the full basis
    index whose kept bits spell ``a`` and whose traced bits spell ``r``.
    """
    idx = np.arange(2**num_qubits, dtype=np.int64)
    rest = [s for s in range(num_qubits) if s not in keep]
    keep_part = np.zeros_like(idx)
    rest_part = np.zeros_like(idx)
    for i, s in enumerate(keep):
        keep_part |= ((idx >> (num_qubits - 1 - s)) & 1) << (len(keep) - 1 - i)
    for i, s in enumerate(rest):
        rest_part |= ((idx >> (num_qubits - 1 - s)) & 1) << (len(rest) - 1 - i)
    perm = np.empty_like(idx)
    perm[(keep_part << len(rest)) | rest_part] = idx
    perm.setflags(write=False)
    return perm


def _vector_matrix(psi: np.ndarray, num_qubits: int, keep: tuple) -> np.ndarray:
    """Reshape state vector(s) into ``(…, d_keep, d_rest)`` coefficient matrices."""
    perm = keep_major_permutation(num_qubits, keep)
    dk = 2 ** len(keep)
    return psi[..., perm].reshape(psi.shape[:-1] + (dk, 2**num_qubits // dk))


def reduced_matrices(states: np.ndarray, keep: Sequence[int]) -> np.ndarray:
    """
    Reduced density matrices of a stack of pure-state vectors.

    ``states`` has shape ``(..., 2**N)``; the result has shape ``(..., d, d)``
    with ``d = 2**len(keep)``. No validation; see :func:`partial_trace`.
    """
    states = np.asarray(states)
    n = _num_qubits_for(states.shape[-1])
    m = _vector_matrix(states, n, tuple(keep))
    return m @ np.swapaxes(m.conj(), -1, -2)


def partial_trace(state, keep) -> DensityMatrix:
    """
    Reduced density matrix on ``keep`` (in increasing site order).

    ``state`` may be a :class:`PureState`, a :class:`DensityMatrix` or a raw
    vector / square matrix.
    """
    keep = as_mask(keep)
    if isinstance(state, np.ndarray):
        state = PureState.from_vector(state) if state.ndim == 1 else DensityMatrix.from_matrix(state)
    n = state.num_qubits
    keep.check(n)
    k = keep.sites
    if isinstance(state, PureState):
        rho = reduced_matrices(state.amplitudes, k)
    elif isinstance(state, DensityMatrix):
        perm = keep_major_permutation(n, k)
        dk = 2 ** len(k)
        dr = 2**n // dk
        r = state.matrix[np.ix_(perm, perm)].reshape(dk, dr, dk, dr)
        rho = np.einsum("arbr->ab", r)
    else:
        raise TypeError(f"cannot take the partial trace of {type(state).__name__}")
    return DensityMatrix(len(k), 0.5 * (rho + rho.conj().T))


# ---------------------------------------------------------------------------
# Entropies and distances
# ---------------------------------------------------------------------------


def entropy_from_spectrum(p, axis: int = -1) -> np.ndarray:
    """``-sum p ln p`` along ``axis``, clipping eigenvalues in ``[-1e-9, 0)`` to zero."""
    p = np.asarray(p, dtype=float)
    if p.size and np.min(p) < -NEG_EIG_TOL:
        raise InvalidStateError(f"eigenvalue {np.min(p):.3e} below -{NEG_EIG_TOL}")
    return entr(np.clip(p, 0.0, None)).sum(axis=axis)


def von_neumann_entropy(rho) -> float:
    """``S(rho) = -tr(rho ln rho)`` in nats."""
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
    return float(entropy_from_spectrum(np.linalg.eigvalsh(m)))


def renyi2_entropy(rho) -> float:
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
    purity = float(np.sum(np.abs(m) ** 2))
    return -np.log(purity)


def purity(rho) -> float:
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
    return float(np.sum(np.abs(m) ** 2))


def entanglement_entropies(states: np.ndarray, keep: Sequence[int]) -> np.ndarray:
    """
    Von Neumann entropy of the ``keep`` marginal for a stack of pure states.

    Uses the Schmidt spectrum of the smaller side, so it is cheaper than
    forming the reduced density matrix when ``keep`` is large.
    """
    states = np.asarray(states)
    n = _num_qubits_for(states.shape[-1])
    m = _vector_matrix(states, n, tuple(keep))
    if m.shape[-2] > m.shape[-1]:
        m = np.swapaxes(m, -1, -2)
    gram = m @ np.swapaxes(m.conj(), -1, -2)
    return entropy_from_spectrum(np.linalg.eigvalsh(gram))


def trace_norm(x) -> float:
    m = np.asarray(x)
    return float(np.sum(np.abs(np.linalg.eigvalsh(0.5 * (m + m.conj().T)))))


def trace_norm_distance(rho, sigma) -> float:
    """``||rho - sigma||_1`` (not halved)."""
    a = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
    b = sigma.matrix if isinstance(sigma, DensityMatrix) else np.asarray(sigma)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return trace_norm(a - b)


def expectation_value(state, op) -> float:
    """``<psi|H|psi>`` or ``tr(rho H)``; the imaginary residue must be below 1e-8."""
    h = op.matrix if isinstance(op, HermitianOperator) else np.asarray(op)
    if isinstance(state, PureState):
        v = state.amplitudes
        if v.shape[0] != h.shape[0]:
            raise ValueError("dimension mismatch between state and operator")
        val = np.vdot(v, h @ v)
    else:
        m = state.matrix if isinstance(state, DensityMatrix) else np.asarray(state)
        if m.ndim == 1:
            val = np.vdot(m, h @ m)
        else:
            if m.shape != h.shape:
                raise ValueError("dimension mismatch between state and operator")
            val = np.sum(m * h.T)
    if abs(val.imag) > 1e-8 * max(1.0, abs(val.real)):
        raise ValueError(f"expectation value has imaginary part {val.imag:.3e}")
    return float(val.real)


# ---------------------------------------------------------------------------
# Spectra and thermal states
# ---------------------------------------------------------------------------


def eigendecompose(op) -> tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and orthonormal eigenvectors (columns)."""
    h = op.matrix if isinstance(op, HermitianOperator) else np.asarray(op, dtype=complex)
    scale = max(1.0, float(np.max(np.abs(h)))) if h.size else 1.0
    if np.max(np.abs(h - h.conj().T)) > HERMITIAN_TOL * scale:
        raise ValueError("eigendecompose: operator is not Hermitian")
    w, v = np.linalg.eigh(h)
    w.setflags(write=False)
    v.setflags(write=False)
    return w, v


def thermal_weights(eigenvalues, beta: float) -> np.ndarray:
    """
    Gibbs populations ``exp(-beta E_i) / Z`` along the last axis.

    Exponents are shifted by the extremal eigenvalue, so large ``|beta|``
    does not overflow.
    """
    e = np.asarray(eigenvalues, dtype=float)
    x = -beta * e
    x = x - np.max(x, axis=-1, keepdims=True)
    w = np.exp(x)
    return w / w.sum(axis=-1, keepdims=True)


def log_partition_function(eigenvalues, beta: float) -> np.ndarray:
    e = np.asarray(eigenvalues, dtype=float)
    x = -beta * e
    xmax = np.max(x, axis=-1)
    return xmax + np.log(np.exp(x - xmax[..., None]).sum(axis=-1))


def thermal_energy(eigenvalues, beta: float) -> np.ndarray:
    e = np.asarray(eigenvalues, dtype=float)
    return np.sum(thermal_weights(e, beta) * e, axis=-1)


def thermal_entropy(eigenvalues, beta: float) -> np.ndarray:
    return entropy_from_spectrum(thermal_weights(eigenvalues, beta))


def thermal_state(op, beta: float) -> DensityMatrix:
    """``exp(-beta H) / tr exp(-beta H)``."""
    if isinstance(op, HermitianOperator):
        w, v = op.eigh()
        n = op.num_qubits
    else:
        w, v = eigendecompose(op)
        n = _num_qubits_for(w.shape[0])
    p = thermal_weights(w, beta)
    rho = (v * p) @ v.conj().T
    return DensityMatrix(n, 0.5 * (rho + rho.conj().T))


def solve_thermal_beta(energy_fn, target: float, tol: float = 1e-8,
                       bracket: float = 1.0, max_bracket: float = 1e4) -> float:
    """
    Bisection for ``beta`` with ``energy_fn(beta) == target``.

    ``energy_fn`` must be non-increasing (true for any Gibbs energy). The
    bracket doubles until it contains the root; the tolerance is on the
    constraint value, not on ``beta``.
    """
    lo, hi = -bracket, bracket
    while energy_fn(lo) < target:
        lo *= 2
        if -lo > max_bracket:
            raise ValueError(f"target energy {target} is above the reachable range")
    while energy_fn(hi) > target:
        hi *= 2
        if hi > max_bracket:
            raise ValueError(f"target energy {target} is below the reachable range")
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        val = energy_fn(mid)
        if abs(val - target) <= tol:
            return mid
        if val > target:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-15 * max(1.0, abs(mid)):
            break
    return 0.5 * (lo + hi)


Stateish = Union[PureState, DensityMatrix, np.ndarray]
