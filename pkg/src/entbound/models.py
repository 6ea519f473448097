"""
Hamiltonian and unitary ensembles: local chains, the all-to-all spin glass,
SYK via Jordan-Wigner, and charge-conserving brickwork circuits.

Random draws come from ``numpy.random.default_rng(seed)``. Independent
samples use seeds derived from a master seed by :func:`derive_seed`, so any
sample can be regenerated on its own.
"""

from __future__ import annotations

import hashlib
import itertools
import math
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from .qcore import (
    HermitianOperator,
    PauliString,
    SubsystemMask,
    as_mask,
    embed,
    pauli_multiply,
)

MAX_GAP_QUBITS = 13
_MASK64 = (1 << 64) - 1


def derive_seed(master: int, index: int) -> int:
    """``master XOR blake2b(index)`` truncated to 64 bits."""
    digest = hashlib.blake2b(int(index).to_bytes(8, "little", signed=True), digest_size=8).digest()
    return (int(master) ^ int.from_bytes(digest, "little")) & _MASK64


def as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


# ---------------------------------------------------------------------------
# Local chains
# ---------------------------------------------------------------------------

# two-site traceless Pauli basis minus the terms acting only on the left qubit
BOND_BASIS = tuple(
    (a, b)
    for a in ("I", "X", "Y", "Z")
    for b in ("I", "X", "Y", "Z")
    if b != "I"
)


@dataclass(frozen=True)
class LatticeChainSpec:
    """
    Nearest-neighbour qubit chain.

    ``bond_term`` fixes the two-site term as ``{"ZZ": 1.0, "XI": 0.3, ...}``
    (first letter on the left qubit) and makes the chain translation
    invariant. Otherwise terms are drawn at random: one seed term for a
    translation-invariant chain, one per bond otherwise.
    """

    num_qubits: int
    boundary: Literal["periodic", "open"] = "periodic"
    translationally_invariant: bool = False
    seed: int = 0
    norm_floor: float = 0.5
    norm_ceiling: float = 2.0
    bond_term: dict | None = None
    require_nondegenerate_gaps: bool = False
    max_retries: int = 20


def _bond_paulis(coeffs: dict, left: int, right: int) -> list[PauliString]:
    terms = []
    for label, c in coeffs.items():
        if len(label) != 2:
            raise ValueError(f"bond label {label!r} must have two letters")
        facs = {}
        if label[0] != "I":
            facs[left] = label[0]
        if label[1] != "I":
            facs[right] = label[1]
        if not facs:
            raise ValueError("bond terms must be traceless (no 'II' component)")
        if c != 0.0:
            terms.append(PauliString(c, facs))
    return terms


def random_bond_coefficients(rng: np.random.Generator) -> dict:
    """
    Gaussian coefficients on the 12 two-site Paulis with a non-identity right
    factor, rescaled so the bond term has unit operator norm.
    """
    raw = rng.standard_normal(len(BOND_BASIS))
    coeffs = {a + b: float(c) for (a, b), c in zip(BOND_BASIS, raw)}
    op = HermitianOperator(2, _bond_paulis(coeffs, 0, 1))
    scale = op.norm()
    return {k: v / scale for k, v in coeffs.items()}


def _chain_bonds(n: int, boundary: str) -> list[tuple[int, int]]:
    bonds = [(j, j + 1) for j in range(n - 1)]
    if boundary == "periodic":
        bonds.append((n - 1, 0))
    return bonds


def _assemble_chain(spec: LatticeChainSpec, rng: np.random.Generator) -> "LatticeChain":
    n = spec.num_qubits
    bonds = _chain_bonds(n, spec.boundary)
    if spec.bond_term is not None:
        per_bond = [dict(spec.bond_term)] * len(bonds)
    elif spec.translationally_invariant:
        per_bond = [random_bond_coefficients(rng)] * len(bonds)
    else:
        per_bond = [random_bond_coefficients(rng) for _ in bonds]
    parts = [HermitianOperator(n, _bond_paulis(c, l, r)) for c, (l, r) in zip(per_bond, bonds)]
    for (l, r), part in zip(bonds, parts):
        if not part.terms:
            raise ValueError(f"bond ({l}, {r}) is the zero operator")
        nrm = part.restricted((l, r)).norm()
        if not spec.norm_floor - 1e-12 <= nrm <= spec.norm_ceiling + 1e-12:
            raise ValueError(
                f"bond ({l}, {r}) norm {nrm:.4f} outside [{spec.norm_floor}, {spec.norm_ceiling}]"
            )
    terms = [t for p in parts for t in p.terms]
    return LatticeChain(n, terms, parts=parts, bonds=bonds, spec=spec)


class LatticeChain(HermitianOperator):
    """Chain Hamiltonian that remembers its bond decomposition."""

    def __init__(self, num_qubits, terms, parts, bonds, spec=None):
        super().__init__(num_qubits, terms, parts=parts)
        self.bonds = tuple(bonds)
        self.spec = spec
        self.gap_report = None

    def bond_matrices(self) -> list[np.ndarray]:
        """Local 4x4 matrices of the bond terms, in bond order."""
        return [p.restricted(b).matrix for p, b in zip(self.parts, self.bonds)]

    def bond_norms(self) -> np.ndarray:
        return np.array([p.restricted(b).norm() for p, b in zip(self.parts, self.bonds)])


def build_lattice_chain(spec: LatticeChainSpec) -> LatticeChain:
    """
    ``H = sum_j H_j`` with bond ``j`` acting on ``(j, j+1)`` (``(N-1, 0)`` closes
    a periodic chain).

    The returned operator carries ``parts`` (the bond operators, embedded on
    all ``N`` qubits) and ``bonds`` (their site pairs). With
    ``require_nondegenerate_gaps`` a random chain is redrawn until its
    spectrum passes :func:`check_nondegenerate_gaps`.
    """
    if spec.num_qubits < 3:
        raise ValueError("lattice chain needs at least 3 qubits")
    if spec.boundary not in ("periodic", "open"):
        raise ValueError(f"unknown boundary {spec.boundary!r}")
    rng = as_rng(spec.seed)
    attempts = spec.max_retries if spec.require_nondegenerate_gaps else 1
    for _ in range(attempts):
        h = _assemble_chain(spec, rng)
        if not spec.require_nondegenerate_gaps:
            return h
        report = check_nondegenerate_gaps(h.eigenvalues, tol=default_gap_tolerance(h))
        h.gap_report = report
        if report.ok:
            return h
        if spec.bond_term is not None:
            break
    raise RuntimeError(
        f"no chain with non-degenerate gaps after {attempts} draws (seed {spec.seed})"
    )


# ---------------------------------------------------------------------------
# Disordered all-to-all models
# ---------------------------------------------------------------------------


def spin_glass_dimension(n: int) -> int:
    """``d_n = 9 n (n - 1) / 2``."""
    return 9 * n * (n - 1) // 2


def spin_glass_index(n: int) -> list[tuple[int, int, str, str]]:
    """Coefficient order: pairs ``j < k`` lexicographically, then ``l, m`` in x, y, z."""
    return [
        (j, k, l, m)
        for j, k in itertools.combinations(range(n), 2)
        for l in "XYZ"
        for m in "XYZ"
    ]


def majorana_string(index: int, num_qubits: int) -> PauliString:
    """
    Jordan-Wigner Majorana (0-based): ``chi_{2k} = Z_0...Z_{k-1} X_k`` and
    ``chi_{2k+1} = Z_0...Z_{k-1} Y_k``.
    """
    k, r = divmod(index, 2)
    if k >= num_qubits:
        raise IndexError(f"Majorana {index} needs more than {num_qubits} qubits")
    facs = {q: "Z" for q in range(k)}
    facs[k] = "Y" if r else "X"
    return PauliString(1.0, facs)


def majorana_monomial(indices: Sequence[int], num_qubits: int) -> PauliString:
    """``chi_a chi_b chi_c chi_d`` as a unit-norm Pauli string with real sign."""
    phase = 1 + 0j
    factors: dict = {}
    for a in indices:
        ph, factors = pauli_multiply(PauliString(1.0, factors), majorana_string(a, num_qubits))
        phase *= ph
    if abs(phase.imag) > 1e-12 or abs(abs(phase.real) - 1.0) > 1e-12:
        raise ValueError(f"monomial {tuple(indices)} is not Hermitian (phase {phase})")
    return PauliString(phase.real, factors)


@dataclass
class DisorderSample:
    """Seeded Gaussian couplings together with the Hamiltonian they define."""

    kind: Literal["spin_glass", "syk"]
    seed: int
    size: int  # qubits for spin_glass, Majoranas for syk
    coefficients: np.ndarray
    hamiltonian: HermitianOperator
    index: list = field(default_factory=list, repr=False)

    @property
    def num_qubits(self) -> int:
        return self.hamiltonian.num_qubits


def build_spin_glass(n: int, seed=0, coefficients=None) -> DisorderSample:
    """
    ``H = d_n^{-1/2} sum_{j<k} sum_{l,m} J_{jklm} sigma_j^l sigma_k^m`` with
    i.i.d. standard normal ``J``.
    """
    if n < 2:
        raise ValueError("spin glass needs at least 2 qubits")
    d = spin_glass_dimension(n)
    if coefficients is None:
        coefficients = as_rng(seed).standard_normal(d)
    coefficients = np.asarray(coefficients, dtype=float)
    if coefficients.shape != (d,):
        raise ValueError(f"expected {d} coefficients, got {coefficients.shape}")
    index = spin_glass_index(n)
    norm = 1.0 / math.sqrt(d)
    terms = [
        PauliString(norm * c, {j: l, k: m})
        for (j, k, l, m), c in zip(index, coefficients)
        if c != 0.0
    ]
    return DisorderSample("spin_glass", seed, n, coefficients, HermitianOperator(n, terms), index)


def syk_index(n_majorana: int) -> list[tuple[int, int, int, int]]:
    return list(itertools.combinations(range(n_majorana), 4))


def build_syk(n_majorana: int, seed=0, coefficients=None) -> DisorderSample:
    """
    ``H = C(N,4)^{-1/2} sum_{j<k<l<m} K_{jklm} chi_j chi_k chi_l chi_m`` on
    ``N/2`` qubits.
    """
    if n_majorana % 2:
        raise ValueError("SYK needs an even number of Majoranas")
    if n_majorana < 8:
        raise ValueError("SYK needs at least 8 Majoranas")
    nq = n_majorana // 2
    index = syk_index(n_majorana)
    if coefficients is None:
        coefficients = as_rng(seed).standard_normal(len(index))
    coefficients = np.asarray(coefficients, dtype=float)
    if coefficients.shape != (len(index),):
        raise ValueError(f"expected {len(index)} coefficients, got {coefficients.shape}")
    norm = 1.0 / math.sqrt(len(index))
    terms = []
    for quad, c in zip(index, coefficients):
        if c == 0.0:
            continue
        mono = majorana_monomial(quad, nq)
        terms.append(PauliString(norm * c * mono.coefficient, mono.factors))
    return DisorderSample("syk", seed, n_majorana, coefficients, HermitianOperator(nq, terms), index)


def restrict_to_subsystem(sample: DisorderSample, subsystem) -> HermitianOperator:
    """
    The couplings of ``sample`` that live entirely inside ``subsystem``,
    renormalized as a model of that size and returned on ``len(subsystem)``
    qubits (spin glass) or ``len(subsystem) // 2`` qubits (SYK).

    For SYK the subsystem is a list of Majorana indices forming a
    pair-aligned contiguous block ``{2a, ..., 2a + n - 1}``.
    """
    sites = as_mask(subsystem).sites
    if sample.kind == "spin_glass":
        if len(sites) < 2:
            raise ValueError("spin-glass restriction needs |A| >= 2")
        inside = set(sites)
        relabel = {s: i for i, s in enumerate(sites)}
        norm = 1.0 / math.sqrt(spin_glass_dimension(len(sites)))
        terms = [
            PauliString(norm * c, {relabel[j]: l, relabel[k]: m})
            for (j, k, l, m), c in zip(sample.index, sample.coefficients)
            if j in inside and k in inside and c != 0.0
        ]
        return HermitianOperator(len(sites), terms)
    if sample.kind == "syk":
        n = len(sites)
        if n < 4:
            raise ValueError("SYK restriction needs |A| >= 4")
        start = sites[0]
        if start % 2 or n % 2 or sites != tuple(range(start, start + n)):
            raise ValueError(f"SYK subsystem {sites} is not a pair-aligned Majorana block")
        inside = set(sites)
        nq = n // 2
        norm = 1.0 / math.sqrt(math.comb(n, 4))
        terms = []
        for quad, c in zip(sample.index, sample.coefficients):
            if c == 0.0 or not inside.issuperset(quad):
                continue
            mono = majorana_monomial([q - start for q in quad], nq)
            terms.append(PauliString(norm * c * mono.coefficient, mono.factors))
        return HermitianOperator(nq, terms)
    raise ValueError(f"unknown disorder kind {sample.kind!r}")


def pair_aligned_blocks(n_majorana: int, n: int) -> list[tuple[int, ...]]:
    """Non-wrapping Majorana blocks ``{2a, ..., 2a + n - 1}``."""
    if n % 2:
        raise ValueError("pair-aligned blocks need an even size")
    return [tuple(range(2 * a, 2 * a + n)) for a in range((n_majorana - n) // 2 + 1)]


def majorana_block_qubits(block: Sequence[int]) -> tuple[int, ...]:
    return tuple(range(block[0] // 2, (block[-1] + 1) // 2))


def subsystem_sum(sample: DisorderSample, n: int) -> np.ndarray:
    """``sqrt(d_N / d_n) * E_{|A|=n} H_A ⊗ I`` as a dense matrix (spin glass)."""
    big = sample.num_qubits
    subsets = list(itertools.combinations(range(big), n))
    acc = np.zeros((2**big, 2**big), dtype=complex)
    for a in subsets:
        acc += embed(restrict_to_subsystem(sample, a).matrix, a, big)
    scale = math.sqrt(spin_glass_dimension(big) / spin_glass_dimension(n))
    return scale * acc / len(subsets)


# ---------------------------------------------------------------------------
# Charge-conserving circuits
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ChargeCircuitSpec:
    """Brickwork of Haar-random U(1)-symmetric two-qubit gates on an open chain."""

    num_qubits: int
    depth: int
    seed: int = 0


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary from the QR decomposition of a Ginibre matrix."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def charge_conserving_gate(rng: np.random.Generator) -> np.ndarray:
    """``e^{i a} ⊕ U(2) ⊕ e^{i b}`` in the basis ``|00>, |01>, |10>, |11>``."""
    g = np.zeros((4, 4), dtype=complex)
    phases = np.exp(2j * np.pi * rng.random(2))
    g[0, 0] = phases[0]
    g[1:3, 1:3] = haar_unitary(2, rng)
    g[3, 3] = phases[1]
    return g


def charge_circuit_layers(spec: ChargeCircuitSpec) -> list[list[tuple[int, int, np.ndarray]]]:
    """One entry per layer: even bonds then odd bonds, each ``(q, q + 1, gate)``."""
    if spec.depth < 0:
        raise ValueError("depth must be non-negative")
    rng = as_rng(spec.seed)
    n = spec.num_qubits
    layers = []
    for _ in range(spec.depth):
        layer = []
        for start in (0, 1):
            for q in range(start, n - 1, 2):
                layer.append((q, q + 1, charge_conserving_gate(rng)))
        layers.append(layer)
    return layers


def apply_two_qubit_gate(state: np.ndarray, gate: np.ndarray, q: int, num_qubits: int) -> np.ndarray:
    """Apply ``gate`` to adjacent qubits ``(q, q + 1)`` of a state vector."""
    psi = state.reshape(2**q, 4, 2 ** (num_qubits - q - 2))
    return np.einsum("ab,ibj->iaj", gate, psi).reshape(-1)


def apply_layer(state: np.ndarray, layer, num_qubits: int) -> np.ndarray:
    for q, _, gate in layer:
        state = apply_two_qubit_gate(state, gate, q, num_qubits)
    return state


def build_charge_conserving_unitary(spec: ChargeCircuitSpec) -> np.ndarray:
    """Dense unitary of the whole circuit (identity at depth 0)."""
    n = spec.num_qubits
    u = np.eye(2**n, dtype=complex)
    for layer in charge_circuit_layers(spec):
        for q, _, gate in layer:
            u = (embed(gate, (q, q + 1), n)) @ u
    return u


# ---------------------------------------------------------------------------
# Spectral diagnostics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GapReport:
    ok: bool
    worst_collision: float
    tol: float


def default_gap_tolerance(h: HermitianOperator | np.ndarray) -> float:
    """
    ``1e-13 * ||H||``, about a hundred times the eigensolver error.

    A looser tolerance is not usable: at N = 10 there are ~5e5 positive gaps
    and accidental spacings below 1e-10 occur in most draws.
    """
    w = h.eigenvalues if isinstance(h, HermitianOperator) else np.asarray(h)
    return 1e-13 * max(1.0, float(np.max(np.abs(w))))


def check_nondegenerate_gaps(eigenvalues, tol: float) -> GapReport:
    """
    Whether all differences ``E_j - E_k`` (``j != k``) are pairwise distinct.

    Only the non-negative gaps ``j > k`` are formed; a gap ``g`` also collides
    with its mirror ``-g`` when ``2 g < tol``, which catches degenerate levels.
    """
    e = np.sort(np.asarray(eigenvalues, dtype=float))
    d = e.shape[0]
    if d > 2**MAX_GAP_QUBITS:
        raise MemoryError(f"{d} levels exceed the gap-check budget (2^{MAX_GAP_QUBITS})")
    if d < 2:
        return GapReport(True, math.inf, tol)
    j, k = np.triu_indices(d, 1)
    gaps = np.sort(e[k] - e[j])
    spacing = np.diff(gaps).min() if gaps.size > 1 else math.inf
    worst = min(float(spacing), 2.0 * float(gaps[0]))
    return GapReport(worst > tol, worst, tol)


def double_factorial(m: int) -> int:
    return math.prod(range(m, 0, -2)) if m > 0 else 1


@dataclass
class MomentReport:
    k: int
    mean_tr_2k: float  # E_J tr(H^{2k}) / 2^N
    stderr_tr_2k: float
    mean_tr_k_sq: float  # E_J tr^2(H^k) / 2^{2N}
    stderr_tr_k_sq: float
    bound: int  # (2k-1)!!
    upper_ok: bool
    lower_ok: bool


def trace_moment_check(kind: str, n: int, k_max: int, num_samples: int, seed: int = 0) -> list[MomentReport]:
    """
    Monte Carlo check of
    ``E tr^2(H^k) / 4^N <= E tr(H^{2k}) / 2^N <= (2k-1)!!`` for ``k = 1..k_max``.
    """
    if kind != "spin_glass":
        raise ValueError("moment check is defined for the spin glass")
    if num_samples < 100:
        raise ValueError("moment check needs at least 100 samples")
    if n > 10 or k_max > 4:
        raise ValueError("moment check limited to N <= 10, k_max <= 4")
    spectra = np.array([
        build_spin_glass(n, derive_seed(seed, i)).hamiltonian.eigenvalues for i in range(num_samples)
    ])
    reports = []
    for k in range(1, k_max + 1):
        hi = np.mean(spectra ** (2 * k), axis=1)
        lo = np.mean(spectra**k, axis=1) ** 2
        se_hi = hi.std(ddof=1) / math.sqrt(num_samples)
        se_lo = lo.std(ddof=1) / math.sqrt(num_samples)
        bound = double_factorial(2 * k - 1)
        reports.append(MomentReport(
            k, float(hi.mean()), float(se_hi), float(lo.mean()), float(se_lo), bound,
            upper_ok=bool(hi.mean() <= bound + 3 * se_hi),
            lower_ok=bool(lo.mean() <= hi.mean() + 3 * math.hypot(se_hi, se_lo)),
        ))
    return reports
