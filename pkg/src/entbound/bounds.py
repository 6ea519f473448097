"""
Certificate evaluators: measure the left-hand side of an entropy bound on a
concrete instance, evaluate its right-hand side, and record the margin.

Two kinds of check appear here. *Exact* inequalities (subadditivity chains,
the two-qubit entropy bound, Gibbs maximality, equilibration and continuity
bounds) hold on every instance and use an absolute tolerance of 1e-7 or
tighter; a failure is a bug. *Statistical* checks compare Monte Carlo means
against a target with a three-standard-error allowance. Asymptotic
statements are only ever checked as trends across an ``N`` sweep.
"""

from __future__ import annotations

import functools
import itertools
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
from scipy import stats

from ._parallel import parallel_map
from .dynamics import (
    EvolutionContext,
    TimeGrid,
    default_tau,
    effective_dimension,
    eigenstate_marginals,
    evolve_many,
    reduced_diagonal_ensemble,
)
from .models import (
    LatticeChain,
    apply_layer,
    build_spin_glass,
    build_syk,
    check_nondegenerate_gaps,
    default_gap_tolerance,
    derive_seed,
    double_factorial,
    majorana_block_qubits,
    majorana_string,
    pair_aligned_blocks,
    restrict_to_subsystem,
    spin_glass_dimension,
)
from .qcore import (
    DensityMatrix,
    HermitianOperator,
    PureState,
    embed,
    entanglement_entropies,
    entropy_from_spectrum,
    expectation_value,
    reduced_matrices,
    solve_thermal_beta,
    thermal_energy,
    thermal_entropy,
    von_neumann_entropy,
)
from .sampling import (
    disorder_mean_abs_energy_exact,
    disorder_term_expectations,
    haar_qubit_factors,
    product_vector,
)

LN2 = math.log(2.0)
EXACT_TOL = 1e-7


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------


def _plain(x):
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, (np.floating, float)):
        return float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, np.ndarray):
        return _plain(x.tolist())
    return x


@dataclass
class CertificateReport:
    """
    One inequality ``lhs <= rhs`` on one instance.

    ``margin = rhs - lhs`` and the check passes iff
    ``margin >= -(tolerance + 3 * statistical_error)``. ``kind`` is
    ``"exact"`` or ``"statistical"``.
    """

    theorem_id: str
    instance: dict
    lhs: float
    rhs: float
    tolerance: float
    statistical_error: float = 0.0
    kind: str = "exact"
    notes: list = field(default_factory=list)
    margin: float = field(init=False)
    passed: bool = field(init=False)

    def __post_init__(self):
        self.lhs = float(self.lhs)
        self.rhs = float(self.rhs)
        self.margin = self.rhs - self.lhs
        self.passed = bool(self.margin >= -(self.tolerance + 3.0 * self.statistical_error))

    def to_dict(self) -> dict:
        return _plain(asdict(self))

    @classmethod
    def from_dict(cls, data: dict) -> "CertificateReport":
        data = dict(data)
        data.pop("margin", None)
        data.pop("passed", None)
        return cls(**data)

    def csv_row(self) -> list:
        inst = self.instance
        return [self.theorem_id, inst.get("N", ""), inst.get("n", ""), self.lhs, self.rhs,
                self.margin, self.statistical_error, self.passed]


CSV_COLUMNS = ("theorem_id", "N", "n", "lhs", "rhs", "margin", "stat_err", "pass")


def reports_to_json(reports: Sequence[CertificateReport]) -> str:
    return json.dumps([r.to_dict() for r in reports], sort_keys=True, indent=1)


def worst_by_id(reports: Sequence[CertificateReport]) -> dict[str, CertificateReport]:
    """Smallest-margin report for each theorem id (slack-adjusted)."""
    out: dict[str, CertificateReport] = {}
    for r in reports:
        slack = r.margin + r.tolerance + 3 * r.statistical_error
        cur = out.get(r.theorem_id)
        if cur is None or slack < cur.margin + cur.tolerance + 3 * cur.statistical_error:
            out[r.theorem_id] = r
    return out


@dataclass
class SeriesResult:
    """Per-time (or per-layer) columns plus the reports evaluated on them."""

    times: np.ndarray
    columns: dict
    reports: list


# ---------------------------------------------------------------------------
# Closed forms
# ---------------------------------------------------------------------------


def page_mean_entropy(d_A: int, d_B: int) -> float:
    """``sum_{k=d_B+1}^{d_A d_B} 1/k - (d_A - 1) / (2 d_B)``, evaluated exactly."""
    if d_A < 1 or d_B < 1:
        raise ValueError("dimensions must be positive")
    if d_A > d_B:
        raise ValueError(f"d_A = {d_A} exceeds d_B = {d_B}")
    return math.fsum(1.0 / k for k in range(d_B + 1, d_A * d_B + 1)) - (d_A - 1) / (2 * d_B)


def fannes_audenaert_bound(t: float, dim: int) -> float:
    """``T ln(D-1) - T ln T - (1-T) ln(1-T)`` for trace distance ``T`` in ``[0, 1]``."""
    t = min(max(float(t), 0.0), 1.0)
    h = 0.0
    if 0.0 < t < 1.0:
        h = -t * math.log(t) - (1 - t) * math.log(1 - t)
    return t * math.log(dim - 1) + h if dim > 1 else h


def lemma6_energy_bound(beta: float, terms: int = 40) -> float:
    """
    Explicit right-hand side of the small-``beta`` energy bound,
    ``-beta e^{beta^2/2} + sum_{k>=1} beta^{2k} sqrt((4k+1)!!) / (2k)!``,
    valid for ``beta <= 0``.
    """
    tail = math.fsum(
        beta ** (2 * k) * math.sqrt(double_factorial(4 * k + 1)) / math.factorial(2 * k)
        for k in range(1, terms + 1)
    )
    return -beta * math.exp(beta * beta / 2) + tail


def fit_trend(x, y) -> dict:
    """Least-squares line with a 95% confidence interval on the slope."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 3:
        raise ValueError("fewer than 3 sweep points")
    res = stats.linregress(x, y)
    half = stats.t.ppf(0.975, x.size - 2) * res.stderr if x.size > 2 else math.inf
    return {
        "slope": float(res.slope),
        "intercept": float(res.intercept),
        "slope_stderr": float(res.stderr),
        "slope_ci95": [float(res.slope - half), float(res.slope + half)],
        "r_value": float(res.rvalue),
        "num_points": int(x.size),
    }


# ---------------------------------------------------------------------------
# Subsystem families
# ---------------------------------------------------------------------------


def contiguous_windows(num_qubits: int, n: int) -> list[tuple[int, ...]]:
    """The ``N`` periodic windows ``(j, j+1, ..., j+n-1) mod N``."""
    return [tuple((j + i) % num_qubits for i in range(n)) for j in range(num_qubits)]


def window_family(num_qubits: int, n: int, m: int) -> list[tuple[int, ...]]:
    """``m`` periodic windows of length ``n`` starting every ``N / m`` sites."""
    if num_qubits % m:
        raise ValueError(f"m = {m} must divide N = {num_qubits}")
    step = num_qubits // m
    fam = [tuple((j * step + i) % num_qubits for i in range(n)) for j in range(m)]
    check_covering(fam, num_qubits)
    return fam


def check_covering(family: Sequence[Sequence[int]], num_qubits: int) -> int:
    """Return the common multiplicity ``m n / N``; raise if sites are covered unevenly."""
    counts = np.zeros(num_qubits, dtype=int)
    for a in family:
        if len(set(a)) != len(a):
            raise ValueError(f"subsystem {tuple(a)} repeats a site")
        counts[list(a)] += 1
    if np.any(counts != counts[0]):
        raise ValueError(f"covering property violated: site multiplicities {counts.tolist()}")
    return int(counts[0])


def subsystem_family(num_qubits: int, n: int, scheme: str = "contiguous", m: int | None = None):
    if n < 1 or n > num_qubits:
        raise ValueError(f"subsystem size {n} invalid for {num_qubits} qubits")
    if scheme == "contiguous":
        return contiguous_windows(num_qubits, n)
    if scheme == "all_subsets":
        return list(itertools.combinations(range(num_qubits), n))
    if scheme == "windows":
        if m is None:
            raise ValueError("windows scheme needs m")
        return window_family(num_qubits, n, m)
    raise ValueError(f"unknown subsystem scheme {scheme!r}")


def family_entropies(states: np.ndarray, family) -> np.ndarray:
    """``S(rho_A)`` for each state (rows) and subsystem (columns)."""
    states = np.atleast_2d(states)
    return np.stack([entanglement_entropies(states, a) for a in family], axis=-1)


def subsystem_average_entropy(state, n: int, scheme: str = "contiguous", m: int | None = None) -> float:
    """Mean ``S(rho_A)`` over the ``scheme``'s subsystems of size ``n``."""
    if isinstance(state, DensityMatrix):
        from .qcore import partial_trace

        fam = subsystem_family(state.num_qubits, n, scheme, m)
        return float(np.mean([von_neumann_entropy(partial_trace(state, sorted(a))) for a in fam]))
    v = state.amplitudes if isinstance(state, PureState) else np.asarray(state)
    nq = int(v.shape[0]).bit_length() - 1
    fam = subsystem_family(nq, n, scheme, m)
    return float(family_entropies(v, fam).mean())


# ---------------------------------------------------------------------------
# Two-qubit entropy bound
# ---------------------------------------------------------------------------


def lemma2_rhs(eps) -> np.ndarray:
    return 2 * LN2 - np.asarray(eps) ** 2 / 2


def lemma2_check(rho, h, tol: float = 1e-9) -> CertificateReport:
    """``S(rho) <= 2 ln 2 - eps^2 / 2`` with ``eps = |tr(rho H)| / ||H||``."""
    rho_m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
    h_op = h if isinstance(h, HermitianOperator) else HermitianOperator.from_matrix(h)
    if rho_m.shape != (4, 4) or h_op.dim != 4:
        raise ValueError("lemma 2 is a two-qubit statement")
    if abs(np.trace(h_op.matrix)) > 1e-10 * max(1.0, h_op.norm()):
        raise ValueError("H_j must be traceless")
    eps = abs(expectation_value(rho_m, h_op)) / h_op.norm()
    s = von_neumann_entropy(rho_m)
    return CertificateReport("lemma2", {"eps": eps}, s, float(lemma2_rhs(eps)), tol)


def lemma2_extremal_spectra(eps: float) -> list[np.ndarray]:
    """The Schur-extremal spectra at deviation ``eps`` (third only for ``eps <= 1/2``)."""
    q = 0.25
    out = [
        np.array([q + eps / 4, q + eps / 4, q - eps / 4, q - eps / 4]),
        np.array([q + eps / 2, q - eps / 6, q - eps / 6, q - eps / 6]),
    ]
    if eps <= 0.5:
        out.append(np.array([q - eps / 2, q + eps / 6, q + eps / 6, q + eps / 6]))
    return out


def lemma2_sweep(step: float = 1e-3, tol: float = 1e-9) -> CertificateReport:
    """Worst ``S - (2 ln 2 - eps^2/2)`` over the extremal spectra for ``eps`` in ``[0, 1]``."""
    worst = -math.inf
    where = None
    for eps in np.linspace(0.0, 1.0, int(round(1.0 / step)) + 1):
        for case, p in enumerate(lemma2_extremal_spectra(float(eps))):
            gap = float(entropy_from_spectrum(p)) - float(lemma2_rhs(eps))
            if gap > worst:
                worst, where = gap, (float(eps), case + 1)
    return CertificateReport(
        "lemma2.extremal_sweep",
        {"step": step, "worst_eps": where[0], "worst_case": where[1]},
        worst, 0.0, tol,
    )


# ---------------------------------------------------------------------------
# Local chains
# ---------------------------------------------------------------------------


def _two_site_marginals(states: np.ndarray, bonds) -> np.ndarray:
    """``(T, num_bonds, 4, 4)`` marginals with the bond's own qubit order."""
    return np.stack([reduced_matrices(states, b) for b in bonds], axis=1)


def lattice_quantities(chain: LatticeChain, states: np.ndarray, n: int) -> dict:
    """Per-time ingredients of the local-chain inequality chain."""
    nq = chain.num_qubits
    states = np.atleast_2d(states)
    bond_ms = np.array(chain.bond_matrices())
    norms = chain.bond_norms()
    rho2 = _two_site_marginals(states, chain.bonds)
    tr = np.einsum("tbij,bji->tb", rho2, bond_ms).real
    eps = np.abs(tr) / norms
    s2 = entropy_from_spectrum(np.linalg.eigvalsh(rho2))
    sn = family_entropies(states, contiguous_windows(nq, n))
    energy = np.einsum("ti,ij,tj->t", states.conj(), chain.matrix, states).real
    return {
        "avg_entropy": sn.mean(axis=1),
        "avg_entropy_2": s2.mean(axis=1),
        "bond_entropies": s2,
        "eps": eps,
        "eps_sum": eps.sum(axis=1),
        "energy": energy,
        "max_bond_norm": float(norms.max()),
    }


def _lattice_rhs(n: int, nq: int, eps_sum):
    return n * LN2 - n / (4.0 * nq * nq) * np.asarray(eps_sum) ** 2


def theorem_lat_certificate(chain: LatticeChain, psi, grid: TimeGrid, n: int,
                            tol: float = EXACT_TOL, label: dict | None = None) -> SeriesResult:
    """
    The local-chain inequality chain at every grid time:

    ``E_{|A|=n} S <= (n/2) E_{|A|=2} S``                        (lattice.lemma1)
    ``(n/2) E_{|A|=2} S <= (n/2N) sum_j (2 ln 2 - eps_j^2/2)``   (lattice.lemma2)
    ``... <= n ln 2 - (n/4N^2) (sum_j eps_j)^2``                  (lattice.rms_am)
    ``sum_j eps_j >= |<Psi|H|Psi>| / max_j ||H_j||``            (lattice.energy)
    ``E_{|A|=n} S <= n ln 2 - (n/4N^2) (<H> / max||H_j||)^2``      (lattice.bound)
    """
    if n <= 1:
        raise ValueError("the subadditivity step needs n > 1")
    if chain.spec is not None and chain.spec.boundary != "periodic":
        raise ValueError("the certificate is stated for periodic chains")
    nq = chain.num_qubits
    if n > nq / 2:
        raise ValueError("subsystem size must satisfy n <= N/2")
    v0 = psi.amplitudes if isinstance(psi, PureState) else np.asarray(psi)
    ctx = EvolutionContext.from_hamiltonian(chain, v0)
    states = evolve_many(ctx, grid.times)
    q = lattice_quantities(chain, states, n)
    e0 = float(np.vdot(v0, chain.matrix @ v0).real)
    floor = abs(e0) / q["max_bond_norm"]
    step1 = n / 2 * q["avg_entropy_2"]
    step2 = n / (2.0 * nq) * np.sum(lemma2_rhs(q["eps"]), axis=1)
    step3 = _lattice_rhs(n, nq, q["eps_sum"])
    final = _lattice_rhs(n, nq, floor)
    base = {"N": nq, "n": n, **(label or {})}
    reports = []
    for i, t in enumerate(grid.times):
        inst = {**base, "t": float(t)}
        reports += [
            CertificateReport("lattice.lemma1", inst, q["avg_entropy"][i], step1[i], tol),
            CertificateReport("lattice.lemma2", inst, step1[i], step2[i], tol),
            CertificateReport("lattice.rms_am", inst, step2[i], step3[i], tol),
            CertificateReport("lattice.energy", inst, floor, q["eps_sum"][i], tol),
            CertificateReport("lattice.bound", inst, q["avg_entropy"][i], final, tol),
        ]
    big = abs(e0) > 0.3 * math.sqrt(nq)
    reports.append(CertificateReport(
        "lattice.time_max_below_max",
        {**base, "energy": e0, "energy_above_threshold": bool(big), "time_grid": grid.describe()},
        float(q["avg_entropy"].max()), n * LN2, 0.0))
    cols = {
        "avg_entropy": q["avg_entropy"],
        "rhs": step3,
        "bound": np.full(len(grid), final),
        "eps_sum": q["eps_sum"],
        "energy": q["energy"],
    }
    return SeriesResult(grid.times, cols, reports)


def corollary_ti_certificate(chain: LatticeChain, n: int, num_states: int, grid: TimeGrid,
                             seed: int = 0, tol: float = EXACT_TOL) -> SeriesResult:
    """
    Translation-invariant variant: average ``S(rho_A(t))`` over Haar product
    states for the single window ``A = (0..n-1)`` and compare with the
    state-averaged chain bound. Statistical, one report per time.
    """
    nq = chain.num_qubits
    lhs = np.zeros((num_states, len(grid)))
    rhs = np.zeros((num_states, len(grid)))
    w, v = chain.eigh()
    for i in range(num_states):
        psi = product_vector(haar_qubit_factors(nq, derive_seed(seed, i)))
        states = evolve_many(EvolutionContext(w, v, psi), grid.times)
        q = lattice_quantities(chain, states, n)
        lhs[i] = entanglement_entropies(states, tuple(range(n)))
        rhs[i] = _lattice_rhs(n, nq, q["eps_sum"])
    diff = rhs - lhs
    se = diff.std(axis=0, ddof=1) / math.sqrt(num_states) if num_states > 1 else np.zeros(len(grid))
    reports = [
        CertificateReport("lattice.corollary_ti", {"N": nq, "n": n, "t": float(t), "num_states": num_states},
                          lhs[:, i].mean(), rhs[:, i].mean(), tol, float(se[i]), kind="statistical")
        for i, t in enumerate(grid.times)
    ]
    return SeriesResult(grid.times, {"avg_entropy": lhs.mean(0), "rhs": rhs.mean(0)}, reports)


# ---------------------------------------------------------------------------
# Charge-conserving circuits
# ---------------------------------------------------------------------------


def _z_expectations(states: np.ndarray, nq: int) -> np.ndarray:
    probs = np.abs(np.atleast_2d(states)) ** 2
    idx = np.arange(2**nq)
    out = []
    for k in range(nq):
        sign = 1.0 - 2.0 * ((idx >> (nq - 1 - k)) & 1)
        out.append(probs @ sign)
    return np.stack(out, axis=-1)


def theorem_charge_certificate(layers, psi, n: int, windows=None, tol: float = EXACT_TOL,
                               label: dict | None = None) -> SeriesResult:
    """
    The charge-conserving analogue, evaluated after every layer (layer 0 is
    the initial state):

    ``(1/m) sum_j S(A_j) <= (n/N) sum_k S(rho_k)``                (charge.lemma1)
    ``S(rho_k) <= ln 2 - <Z_k>^2 / 2`` for every qubit             (charge.lemma2)
    ``(n/N) sum_k (ln 2 - z_k^2/2) <= n ln 2 - (n/2N^2)(sum|z_k|)^2`` (charge.rms_am)
    ``sum_k |z_k| >= |<Psi|Z_tot|Psi>|``                            (charge.energy)
    ``(1/m) sum_j S(A_j) <= n ln 2 - (n/4N^2)(sum_k |z_k|)^2``      (charge.bound)
    ``|<Z_tot>(layer) - <Z_tot>(0)| <= 1e-9``                       (charge.conservation)
    """
    v = psi.amplitudes if isinstance(psi, PureState) else np.asarray(psi, dtype=complex)
    nq = int(v.shape[0]).bit_length() - 1
    if n > nq / 2:
        raise ValueError("subsystem size must satisfy n <= N/2")
    fam = contiguous_windows(nq, n) if windows is None else [tuple(w) for w in windows]
    check_covering(fam, nq)
    states = [v]
    for layer in layers:
        states.append(apply_layer(states[-1], layer, nq))
    states = np.array(states)
    avg = family_entropies(states, fam).mean(axis=1)
    s1 = family_entropies(states, [(k,) for k in range(nq)])
    z = _z_expectations(states, nq)
    q = z.sum(axis=1)
    q0 = float(q[0])
    zsum = np.abs(z).sum(axis=1)
    step1 = n / nq * s1.sum(axis=1)
    per_qubit_gap = (s1 - (LN2 - z**2 / 2)).max(axis=1)
    step2 = n / nq * np.sum(LN2 - z**2 / 2, axis=1)
    step3 = n * LN2 - n / (2.0 * nq * nq) * zsum**2
    headline = n * LN2 - n / (4.0 * nq * nq) * zsum**2
    base = {"N": nq, "n": n, "m": len(fam), **(label or {})}
    reports = []
    for i in range(len(states)):
        inst = {**base, "layer": i}
        reports += [
            CertificateReport("charge.lemma1", inst, avg[i], step1[i], tol),
            CertificateReport("charge.lemma2", inst, per_qubit_gap[i], 0.0, tol),
            CertificateReport("charge.rms_am", inst, step2[i], step3[i], tol),
            CertificateReport("charge.energy", inst, abs(q0), zsum[i], tol),
            CertificateReport("charge.bound", inst, avg[i], headline[i], tol),
            CertificateReport("charge.conservation", inst, abs(q[i] - q0), 0.0, 1e-9),
        ]
    big = abs(q0) > 0.3 * math.sqrt(nq)
    reports.append(CertificateReport(
        "charge.time_max_below_max", {**base, "charge": q0, "charge_above_threshold": bool(big)},
        float(avg.max()), n * LN2, 0.0))
    cols = {"avg_entropy": avg, "rhs": headline, "charge": q, "z_abs_sum": zsum}
    return SeriesResult(np.arange(len(states), dtype=float), cols, reports)


def single_qubit_charge_check(rho, tol: float = EXACT_TOL) -> CertificateReport:
    """``S(rho) <= ln 2 - tr^2(rho Z) / 2`` for one qubit."""
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
    z = float((m[0, 0] - m[1, 1]).real)
    return CertificateReport("charge.lemma2", {"z": z}, von_neumann_entropy(m), LN2 - z * z / 2, tol)


# ---------------------------------------------------------------------------
# Spin glass: thermodynamic curves
# ---------------------------------------------------------------------------


def _builder(kind: str):
    if kind == "spin_glass":
        return build_spin_glass
    if kind == "syk":
        return build_syk
    raise ValueError(f"unknown disorder kind {kind!r}")


def _default_state(kind: str, size: int) -> np.ndarray:
    nq = size if kind == "spin_glass" else size // 2
    v = np.zeros(2**nq, dtype=complex)
    v[0] = 1.0
    return v


@dataclass
class ThermoCurves:
    beta: np.ndarray
    energy: np.ndarray
    energy_se: np.ndarray
    entropy: np.ndarray
    entropy_se: np.ndarray
    signs: np.ndarray
    fitted_C: float
    reports: list

    def table(self) -> list[dict]:
        return [
            {"beta": float(b), "energy": float(e), "energy_se": float(es),
             "entropy": float(s), "entropy_se": float(ss)}
            for b, e, es, s, ss in zip(self.beta, self.energy, self.energy_se, self.entropy, self.entropy_se)
        ]


def thermo_curves(kind: str, size: int, beta_grid, num_disorder: int, initial_state=None,
                  seed: int = 0, antithetic: bool = False, lemma6_range: float = 0.5) -> ThermoCurves:
    """
    Disorder-averaged energy ``E(beta)`` and entropy ``S(beta)`` of thermal
    states, with each sample's temperature sign flipped according to the sign
    of ``<psi|H_J|psi>``.

    Equivalently, every sample contributes the Gibbs energy and entropy of
    ``s_J H_J`` at inverse temperature ``beta``, where ``s_J`` is that sign.
    With ``antithetic`` the samples come in pairs ``(J, -J)``.
    """
    if num_disorder < 100:
        raise ValueError("thermo curves need at least 100 disorder samples")
    beta = np.sort(np.asarray(beta_grid, dtype=float))
    if np.any(np.abs(beta) > 1.0):
        raise ValueError("beta grid must lie in [-1, 1]")
    psi = _default_state(kind, size) if initial_state is None else np.asarray(
        initial_state.amplitudes if isinstance(initial_state, PureState) else initial_state, dtype=complex)
    spectra, signs = [], []
    build = _builder(kind)
    for i in range(num_disorder):
        if antithetic:
            base = build(size, derive_seed(seed, i // 2))
            coeffs = base.coefficients if i % 2 == 0 else -base.coefficients
            sample = build(size, None, coefficients=coeffs)
        else:
            sample = build(size, derive_seed(seed, i))
        w = sample.hamiltonian.eigenvalues
        e0 = float(np.vdot(psi, sample.hamiltonian.matrix @ psi).real)
        s = 1.0 if e0 > 0 else -1.0
        spectra.append(np.sort(s * w))
        signs.append(s)
    spectra = np.array(spectra)
    signs = np.array(signs)
    n_plus = int(np.sum(signs > 0))
    if min(n_plus, num_disorder - n_plus) < 10:
        raise ValueError(f"too few samples in a sign class ({n_plus} positive of {num_disorder})")
    e = np.array([thermal_energy(spectra, b) for b in beta])  # (B, M)
    s_ = np.array([thermal_entropy(spectra, b) for b in beta])
    se = lambda a: a.std(axis=1, ddof=1) / math.sqrt(num_disorder)
    E, E_se, S, S_se = e.mean(1), se(e), s_.mean(1), se(s_)
    nq = spectra.shape[1].bit_length() - 1
    inst = {"kind": kind, "N": size, "num_disorder": num_disorder, "seed": seed}
    reports = []
    zero = np.flatnonzero(beta == 0.0)
    if zero.size:
        i0 = zero[0]
        reports.append(CertificateReport("thermo.energy_zero", inst, abs(E[i0]), 0.0, 1e-12,
                                         float(E_se[i0]), kind="statistical"))
        reports.append(CertificateReport("thermo.entropy_zero", inst, abs(S[i0] - nq * LN2), 0.0, 1e-9))
    worst_step = float(np.max(np.diff(E))) if beta.size > 1 else -math.inf
    reports.append(CertificateReport("thermo.monotone", inst, worst_step, 0.0, 1e-12))
    neg = (beta < 0) & (beta >= -lemma6_range)
    fitted = math.nan
    if kind == "spin_glass":
        for b, val, err in zip(beta[neg], E[neg], E_se[neg]):
            reports.append(CertificateReport(
                "thermo.lemma6", {**inst, "beta": float(b)}, val, lemma6_energy_bound(b), 1e-9,
                float(err), kind="statistical"))
    if np.any(neg):
        bn = beta[neg]
        fitted = float(np.max((E[neg] + bn) / bn**2))
    reports.append(CertificateReport("thermo.entropy_ceiling", inst, float(S.max()), nq * LN2, 1e-9))
    nz = beta != 0.0
    if np.any(nz):
        ratio = (nq * LN2 - S[nz]) / E[nz] ** 2
        reports.append(CertificateReport(
            "thermo.entropy_deficit_positive", {**inst, "min_ratio": float(ratio.min())},
            0.0, float(ratio.min()), 0.0))
    return ThermoCurves(beta, E, E_se, S, S_se, signs, fitted, reports)


def sign_symmetry_check(kind: str, size: int, seed: int, beta_grid, initial_state=None,
                        tol: float = 1e-12) -> CertificateReport:
    """``J -> -J`` swaps the sign classes and leaves each thermal contribution unchanged."""
    psi = _default_state(kind, size) if initial_state is None else np.asarray(initial_state, dtype=complex)
    build = _builder(kind)
    a = build(size, seed)
    b = build(size, None, coefficients=-a.coefficients)
    ea = float(np.vdot(psi, a.hamiltonian.matrix @ psi).real)
    eb = float(np.vdot(psi, b.hamiltonian.matrix @ psi).real)
    sa, sb = math.copysign(1.0, ea), math.copysign(1.0, eb)
    wa = np.sort(sa * a.hamiltonian.eigenvalues)
    wb = np.sort(sb * b.hamiltonian.eigenvalues)
    worst = 0.0
    for beta in beta_grid:
        worst = max(worst, abs(float(thermal_energy(wa, beta) - thermal_energy(wb, beta))),
                    abs(float(thermal_entropy(wa, beta) - thermal_entropy(wb, beta))))
    flipped = 0.0 if sa == -sb else 1.0
    return CertificateReport("thermo.sign_symmetry", {"N": size, "seed": seed, "kind": kind},
                             worst + flipped, 0.0, tol)


def solve_common_beta(signed_spectra: np.ndarray, target: float, tol: float = 1e-8) -> float:
    """Common inverse temperature at which the mean Gibbs energy equals ``target``."""
    return solve_thermal_beta(lambda b: float(np.mean(thermal_energy(signed_spectra, b))), target, tol)


# ---------------------------------------------------------------------------
# Spin glass: time-maximized entropy against the thermal ceiling
# ---------------------------------------------------------------------------


@dataclass
class _SGSample:
    e0: float
    sub_err: float
    change_err: float
    max_entropy: float
    argmax_t: float
    max_single: float
    signed_spectra: np.ndarray  # (subsets, 2^n), already multiplied by sign(e0)


def _sg_sample(args) -> _SGSample:
    nq, n, seed, psi, times = args
    sample = build_spin_glass(nq, seed)
    h = sample.hamiltonian
    e0 = float(np.vdot(psi, h.matrix @ psi).real)
    s = 1.0 if e0 > 0 else -1.0
    subsets = list(itertools.combinations(range(nq), n))
    restricted = [restrict_to_subsystem(sample, a) for a in subsets]
    acc = np.zeros_like(h.matrix)
    for a, r in zip(subsets, restricted):
        acc = acc + embed(r.matrix, a, nq)
    recon = math.sqrt(spin_glass_dimension(nq) / spin_glass_dimension(n)) * acc / len(subsets)
    diff = recon - h.matrix
    sub_err = float(np.max(np.abs(np.linalg.eigvalsh(diff))))
    ctx = EvolutionContext.from_hamiltonian(h, psi)
    states = evolve_many(ctx, times)
    ent = family_entropies(states, subsets)
    avg = ent.mean(axis=1)
    i_max = int(np.argmax(avg))
    # energy identity at t = 0
    r0 = [reduced_matrices(psi, a) for a in subsets]
    restricted_energy = np.mean([np.trace(r @ op.matrix).real for r, op in zip(r0, restricted)])
    change_err = abs(restricted_energy - math.sqrt(spin_glass_dimension(n) / spin_glass_dimension(nq)) * e0)
    spectra = np.array([np.sort(s * r.eigenvalues) for r in restricted])
    return _SGSample(e0, sub_err, float(change_err), float(avg[i_max]), float(times[i_max]),
                     float(ent.max()), spectra)


@dataclass
class DisorderCertificate:
    reports: list
    metrics: dict
    per_sample: list = field(default_factory=list)


def theorem_sg_certificate(num_qubits: int, n: int, num_disorder: int, initial_state=None,
                           grid: TimeGrid | None = None, seed: int = 0, jobs: int = 1) -> DisorderCertificate:
    """
    Spin-glass certificate for an arbitrary product initial state.

    Per disorder sample: reconstruction of ``H`` from its restrictions, the
    restricted-energy identity at ``t = 0``, and ``max_t E_{|A|=n} S``
    over ``grid`` (a finite stand-in for the supremum). Across samples:
    the energy hypothesis against its closed form, the Gibbs ceiling at the
    common inverse temperature fixed by the conserved signed energy, and
    the gap below ``n ln 2``.
    """
    if n < 2 or n > num_qubits / 2:
        raise ValueError("need 2 <= n <= N/2")
    grid = grid or TimeGrid.linear(30.0, 50)
    if len(grid) < 20:
        raise ValueError("time grid too coarse: the max needs at least 20 points")
    psi = _default_state("spin_glass", num_qubits) if initial_state is None else np.asarray(
        initial_state.amplitudes if isinstance(initial_state, PureState) else initial_state, dtype=complex)
    tasks = [(num_qubits, n, derive_seed(seed, i), psi, grid.times) for i in range(num_disorder)]
    samples = parallel_map(_sg_sample, tasks, jobs)
    e0 = np.array([s.e0 for s in samples])
    maxes = np.array([s.max_entropy for s in samples])
    m = num_disorder
    inst = {"N": num_qubits, "n": n, "num_disorder": m, "seed": seed, "time_grid": grid.describe()}
    notes = [f"sup over t replaced by max over {len(grid)} grid points"]
    reports = []
    exact_abs = disorder_mean_abs_energy_exact("spin_glass", num_qubits, psi)
    mean_abs = float(np.abs(e0).mean())
    se_abs = float(np.abs(e0).std(ddof=1) / math.sqrt(m))
    reports.append(CertificateReport("sg.hypothesis", {**inst, "mean_abs_energy": mean_abs,
                                                        "closed_form": exact_abs},
                                     abs(mean_abs - exact_abs), 0.0, 0.0, se_abs, kind="statistical"))
    reports.append(CertificateReport("sg.subsystem_identity", inst,
                                     max(s.sub_err for s in samples), 0.0, 1e-9))
    reports.append(CertificateReport("sg.energy_identity", inst,
                                     max(s.change_err for s in samples), 0.0, 1e-9))
    target = math.sqrt(spin_glass_dimension(n) / spin_glass_dimension(num_qubits)) * mean_abs
    spectra = np.concatenate([s.signed_spectra for s in samples])
    beta = solve_common_beta(spectra, target)
    if not beta < 0:
        raise AssertionError(f"thermal solution beta = {beta} is not negative")
    ceiling = float(np.mean(thermal_entropy(spectra, beta)))
    lhs = float(maxes.mean())
    se = float(maxes.std(ddof=1) / math.sqrt(m))
    reports.append(CertificateReport("sg.thermal_ceiling", {**inst, "beta": beta}, lhs, ceiling, 1e-6, se,
                                     kind="statistical", notes=notes))
    reports.append(CertificateReport("sg.below_max_entropy", inst, lhs + 3 * se, n * LN2, 0.0,
                                     notes=notes + ["lhs is the mean plus three standard errors"]))
    reports.append(CertificateReport("sg.entropy_ceiling", inst, max(s.max_single for s in samples),
                                     n * LN2, 1e-8))
    metrics = {
        "mean_abs_energy": mean_abs,
        "mean_abs_energy_se": se_abs,
        "mean_abs_energy_closed_form": exact_abs,
        "mean_time_max_entropy": lhs,
        "mean_time_max_entropy_se": se,
        "thermal_beta": beta,
        "thermal_ceiling": ceiling,
        "max_entropy": n * LN2,
        "margin_below_max": n * LN2 - lhs,
    }
    return DisorderCertificate(reports, metrics, [
        {"seed_index": i, "e0": s.e0, "time_max_entropy": s.max_entropy, "argmax_t": s.argmax_t}
        for i, s in enumerate(samples)
    ])


# ---------------------------------------------------------------------------
# SYK
# ---------------------------------------------------------------------------


def majorana_anticommutation_error(n_majorana: int) -> float:
    nq = n_majorana // 2
    chis = [majorana_string(a, nq).to_matrix(nq) for a in range(n_majorana)]
    eye = np.eye(2**nq)
    worst = 0.0
    for a in range(n_majorana):
        for b in range(a, n_majorana):
            ac = chis[a] @ chis[b] + chis[b] @ chis[a] - (2.0 * eye if a == b else 0.0)
            worst = max(worst, float(np.max(np.abs(ac))))
    return worst


def engf_fraction(n_majorana: int, state, threshold: float = 0.5) -> float:
    """Fraction of 4-Majorana monomials with ``|<psi|m|psi>| >= threshold``."""
    m = disorder_term_expectations("syk", n_majorana, state)
    return float(np.mean(np.abs(m) >= threshold))


def _syk_sample(args):
    nm, n, seed, psi, times = args
    sample = build_syk(nm, seed)
    h = sample.hamiltonian
    e0 = float(np.vdot(psi, h.matrix @ psi).real)
    blocks = pair_aligned_blocks(nm, n)
    qubits = [majorana_block_qubits(b) for b in blocks]
    ctx = EvolutionContext.from_hamiltonian(h, psi)
    states = evolve_many(ctx, times)
    ent = family_entropies(states, qubits)
    avg = ent.mean(axis=1)
    i_max = int(np.argmax(avg))
    restricted = [restrict_to_subsystem(sample, b) for b in blocks]
    block_energy = np.array([
        np.trace(reduced_matrices(states[i_max], q) @ r.matrix).real for q, r in zip(qubits, restricted)
    ])
    spectra = np.array([r.eigenvalues for r in restricted])
    return e0, float(avg[i_max]), float(times[i_max]), float(ent.max()), block_energy, spectra


def theorem_syk_certificate(n_majorana: int, n: int, num_disorder: int, initial_state=None,
                            grid: TimeGrid | None = None, seed: int = 0, jobs: int = 1,
                            engf_threshold: float = 0.5) -> DisorderCertificate:
    """
    SYK certificate on pair-aligned Majorana blocks of size ``n``.

    Checks the Jordan-Wigner anticommutators, the ``(n/2) ln 2`` ceiling,
    the energy hypothesis (nonzero and matching its Gaussian closed form),
    and a Gibbs ceiling built from the block energies at each sample's
    maximizing time. Reports the fraction of monomials with order-one
    expectation for the chosen state.
    """
    if n < 4 or n % 2:
        raise ValueError("need an even block size n >= 4")
    if n > n_majorana / 2:
        raise ValueError("need n <= N/2")
    grid = grid or TimeGrid.linear(30.0, 50)
    if len(grid) < 20:
        raise ValueError("time grid too coarse: the max needs at least 20 points")
    psi = _default_state("syk", n_majorana) if initial_state is None else np.asarray(
        initial_state.amplitudes if isinstance(initial_state, PureState) else initial_state, dtype=complex)
    tasks = [(n_majorana, n, derive_seed(seed, i), psi, grid.times) for i in range(num_disorder)]
    out = parallel_map(_syk_sample, tasks, jobs)
    e0 = np.array([o[0] for o in out])
    maxes = np.array([o[1] for o in out])
    m = num_disorder
    ceiling_max = n / 2 * LN2
    inst = {"N": n_majorana, "n": n, "num_disorder": m, "seed": seed, "time_grid": grid.describe(),
            "subsystems": "pair-aligned contiguous Majorana blocks"}
    notes = [
        f"sup over t replaced by max over {len(grid)} grid points",
        "average restricted to pair-aligned Majorana blocks, not all subsets",
    ]
    frac = engf_fraction(n_majorana, psi, engf_threshold)
    mean_abs = float(np.abs(e0).mean())
    se_abs = float(np.abs(e0).std(ddof=1) / math.sqrt(m))
    exact_abs = disorder_mean_abs_energy_exact("syk", n_majorana, psi)
    reports = [
        CertificateReport("syk.anticommutation", inst, majorana_anticommutation_error(n_majorana), 0.0, 1e-10),
        CertificateReport("syk.entropy_ceiling", inst, max(o[3] for o in out), ceiling_max, 1e-8),
        CertificateReport("syk.hypothesis", {**inst, "mean_abs_energy": mean_abs, "closed_form": exact_abs},
                          abs(mean_abs - exact_abs), 0.0, 0.0, se_abs, kind="statistical"),
        CertificateReport("syk.hypothesis_nonzero", {**inst, "engf_fraction": frac,
                                                     "engf_threshold": engf_threshold},
                          3 * se_abs, mean_abs, 0.0),
    ]
    signs = np.where(e0 > 0, 1.0, -1.0)
    signed_energy = float(np.mean([s * o[4].mean() for s, o in zip(signs, out)]))
    spectra = np.concatenate([np.sort(s * o[5], axis=1) for s, o in zip(signs, out)])
    beta = solve_common_beta(spectra, signed_energy)
    ceiling = float(np.mean(thermal_entropy(spectra, beta)))
    lhs = float(maxes.mean())
    se = float(maxes.std(ddof=1) / math.sqrt(m))
    reports.append(CertificateReport("syk.thermal_ceiling", {**inst, "beta": beta}, lhs, ceiling, 1e-6,
                                     notes=notes + ["constraint uses block energies at each sample's maximizing time"]))
    reports.append(CertificateReport("syk.below_max_entropy", inst, lhs + 3 * se, ceiling_max, 0.0,
                                     notes=notes + ["lhs is the mean plus three standard errors"]))
    metrics = {
        "mean_abs_energy": mean_abs,
        "mean_abs_energy_se": se_abs,
        "mean_abs_energy_closed_form": exact_abs,
        "engf_fraction": frac,
        "mean_time_max_entropy": lhs,
        "mean_time_max_entropy_se": se,
        "thermal_beta": beta,
        "thermal_ceiling": ceiling,
        "max_entropy": ceiling_max,
        "margin_below_max": ceiling_max - lhs,
    }
    return DisorderCertificate(reports, metrics, [
        {"seed_index": i, "e0": o[0], "time_max_entropy": o[1], "argmax_t": o[2]} for i, o in enumerate(out)
    ])


# ---------------------------------------------------------------------------
# Translation-invariant equilibration
# ---------------------------------------------------------------------------


def _ti_state(args):
    w, v, nq, n, seed, times, marginals = args
    psi = product_vector(haar_qubit_factors(nq, seed))
    ctx = EvolutionContext(w, v, psi)
    deff = effective_dimension(ctx)
    rho_inf = reduced_diagonal_ensemble(ctx, None, marginals)
    states = evolve_many(ctx, times)
    rho_t = reduced_matrices(states, tuple(range(n)))
    s_t = entropy_from_spectrum(np.linalg.eigvalsh(rho_t))
    diff = rho_t - rho_inf
    dist = np.abs(np.linalg.eigvalsh(0.5 * (diff + np.swapaxes(diff.conj(), -1, -2)))).sum(axis=-1)
    s_inf = float(entropy_from_spectrum(np.linalg.eigvalsh(rho_inf)))
    eig_s = entropy_from_spectrum(np.linalg.eigvalsh(marginals))
    concave_gap = float(ctx.populations @ eig_s) - s_inf
    fa = max(abs(float(a) - s_inf) - fannes_audenaert_bound(d / 2, 2**n) for a, d in zip(s_t, dist))
    return deff, s_t, dist, concave_gap, fa


@dataclass
class EquilibrationCertificate:
    reports: list
    metrics: dict


def theorem_ti_equilibration_certificate(chain: LatticeChain, n: int, num_states: int,
                                         tau: float | None = None, num_times: int = 100,
                                         seed: int = 0, jobs: int = 1) -> EquilibrationCertificate:
    """
    Equilibration certificate for a gap-certified translation-invariant chain.

    (i) eigenstate-averaged entropy of ``A = (0..n-1)`` against its Renyi-2
    and purity lower bounds, with the purity bound ``2^-n + 2^n / N``;
    (ii) effective dimensions of Haar product states;
    (iii) the time-averaged trace distance to the diagonal ensemble against
    ``2^n / sqrt(D_eff)``, plus the continuity and concavity steps;
    (iv) the entropy deficit ``n ln 2 - E_Psi S(rho_A(t))`` at random times.
    """
    nq = chain.num_qubits
    gap = chain.gap_report or check_nondegenerate_gaps(chain.eigenvalues, default_gap_tolerance(chain))
    if not gap.ok:
        raise ValueError("spectrum does not have non-degenerate gaps; hypothesis unmet")
    w, v = chain.eigh()
    ctx0 = EvolutionContext(w, v, v[:, 0])
    if tau is None:
        tau = default_tau(ctx0)
    grid = TimeGrid.uniform_random(tau, num_times, derive_seed(seed, -1))
    keep = tuple(range(n))
    marg = eigenstate_marginals(ctx0, keep)
    eig_spec = np.linalg.eigvalsh(marg)
    eig_s = entropy_from_spectrum(eig_spec)
    eig_pur = np.sum(np.abs(marg) ** 2, axis=(1, 2))
    avg_s = float(eig_s.mean())
    avg_s2 = float(np.mean(-np.log(eig_pur)))
    avg_pur = float(eig_pur.mean())
    pur_bound = 2.0**-n + 2.0**n / nq
    inst = {"N": nq, "n": n, "num_states": num_states, "seed": seed, "tau": float(tau),
            "num_times": num_times, "min_gap_spacing": gap.worst_collision}
    notes = [f"infinite-time average replaced by {num_times} uniform random times in [0, {tau:.4g}]"]
    reports = [
        CertificateReport("ti.renyi_step", inst, avg_s2, avg_s, EXACT_TOL),
        CertificateReport("ti.jensen_step", inst, -math.log(avg_pur), avg_s2, EXACT_TOL),
        CertificateReport("ti.eigenstate_purity", {**inst, "purity_bound": pur_bound}, avg_pur, pur_bound, EXACT_TOL),
        CertificateReport("ti.eigenstate_floor", inst, -math.log(pur_bound), avg_s, EXACT_TOL),
    ]
    tasks = [(w, v, nq, n, derive_seed(seed, i), grid.times, marg) for i in range(num_states)]
    out = parallel_map(_ti_state, tasks, jobs)
    deff = np.array([o[0] for o in out])
    s_t = np.array([o[1] for o in out])  # (states, times)
    sqrt_t = math.sqrt(num_times)
    eq_worst = None
    for i, (d, _, dist, cg, fa) in enumerate(out):
        est = float(dist.mean())
        se = float(dist.std(ddof=1) / sqrt_t) if num_times > 1 else 0.0
        r = CertificateReport("ti.equilibration", {**inst, "state": i, "d_eff": float(d)},
                              est, 2.0**n / math.sqrt(d), 0.0, se, kind="statistical", notes=notes)
        if eq_worst is None or r.margin + 3 * r.statistical_error < eq_worst.margin + 3 * eq_worst.statistical_error:
            eq_worst = r
        reports.append(r)
    reports.append(CertificateReport("ti.concavity", inst, max(o[3] for o in out), 0.0, EXACT_TOL))
    reports.append(CertificateReport("ti.continuity", inst, max(o[4] for o in out), 0.0, EXACT_TOL))
    reports.append(CertificateReport("ti.entropy_ceiling", inst, float(s_t.max()), n * LN2, 1e-8))
    per_state = s_t.mean(axis=1)
    mean_s = float(s_t.mean())
    se_s = float(per_state.std(ddof=1) / math.sqrt(num_states)) if num_states > 1 else 0.0
    metrics = {
        "N": nq,
        "n": n,
        "deficit": n * LN2 - mean_s,
        "deficit_se": se_s,
        "mean_entropy": mean_s,
        "mean_log_deff": float(np.mean(np.log(deff))),
        "log_deff_se": float(np.std(np.log(deff), ddof=1) / math.sqrt(num_states)) if num_states > 1 else 0.0,
        "eigenstate_avg_entropy": avg_s,
        "eigenstate_avg_purity": avg_pur,
        "purity_bound": pur_bound,
        "tau": float(tau),
    }
    return EquilibrationCertificate(reports, metrics)


def ti_trend_reports(metrics: Sequence[dict]) -> tuple[list, dict]:
    """
    Trend checks over an ``N`` sweep of equilibration metrics: positive slope
    of mean ``log D_eff`` against ``N``, and a deficit that decreases with ``N``.
    """
    ms = sorted(metrics, key=lambda m: m["N"])
    ns = np.array([m["N"] for m in ms], dtype=float)
    logd = np.array([m["mean_log_deff"] for m in ms])
    deficit = np.array([m["deficit"] for m in ms])
    fit_d = fit_trend(ns, logd)
    fit_def = fit_trend(1.0 / ns, deficit)
    inst = {"N_values": ns.astype(int).tolist(), "n": ms[0]["n"]}
    reports = [
        CertificateReport("ti.deff_growth", {**inst, **fit_d}, 0.0, fit_d["slope"], 0.0,
                          kind="statistical"),
        CertificateReport("ti.deficit_decreasing", {**inst, "deficits": deficit.tolist()},
                          float(np.max(np.diff(deficit))), 0.0, 0.0, kind="statistical"),
    ]
    return reports, {"log_deff_vs_N": fit_d, "deficit_vs_invN": fit_def}
