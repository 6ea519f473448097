"""
Exact time evolution in the energy eigenbasis (hbar = 1).

Everything here works from one eigendecomposition ``H = V diag(E) V^†``:
``|Psi(t)> = V (e^{-i E t} * c)`` with ``c = V^† |Psi>``. The same basis
gives the diagonal ensemble, the effective dimension and the gap scale used
to pick a default averaging window.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .models import as_rng
from .qcore import (
    DensityMatrix,
    HermitianOperator,
    PureState,
    as_mask,
    eigendecompose,
    entanglement_entropies,
    reduced_matrices,
)

NORM_TOL = 1e-10


@dataclass(frozen=True)
class TimeGrid:
    times: np.ndarray
    sampling: str = "linear"
    tau: float | None = None

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float).reshape(-1)
        if t.size == 0:
            raise ValueError("time grid is empty")
        if np.any(np.diff(t) <= 0):
            raise ValueError("time grid must be strictly increasing")
        t.setflags(write=False)
        object.__setattr__(self, "times", t)

    @classmethod
    def linear(cls, t_max: float, num: int, t_min: float = 0.0) -> "TimeGrid":
        return cls(np.linspace(t_min, t_max, num), "linear", t_max - t_min)

    @classmethod
    def uniform_random(cls, tau: float, num: int, seed=None) -> "TimeGrid":
        """``num`` sorted times drawn uniformly from ``[0, tau]``."""
        if tau <= 0:
            raise ValueError("tau must be positive")
        t = np.sort(as_rng(seed).uniform(0.0, tau, num))
        return cls(t, "uniform_random", tau)

    def __len__(self) -> int:
        return self.times.size

    def describe(self) -> dict:
        return {
            "sampling": self.sampling,
            "num_times": int(self.times.size),
            "t_min": float(self.times[0]),
            "t_max": float(self.times[-1]),
            "tau": None if self.tau is None else float(self.tau),
        }


class EvolutionContext:
    """Eigendecomposition of ``H`` plus the initial state's energy-basis coefficients."""

    def __init__(self, eigenvalues: np.ndarray, eigenvectors: np.ndarray, initial: np.ndarray):
        self.eigenvalues = np.asarray(eigenvalues, dtype=float)
        self.eigenvectors = np.asarray(eigenvectors)
        psi = initial.amplitudes if isinstance(initial, PureState) else np.asarray(initial, dtype=complex)
        if psi.shape[0] != self.eigenvalues.shape[0]:
            raise ValueError("state and Hamiltonian dimensions differ")
        self.initial = psi
        self.coefficients = self.eigenvectors.conj().T @ psi
        self.populations = np.abs(self.coefficients) ** 2
        if abs(self.populations.sum() - 1.0) > NORM_TOL:
            raise ValueError(f"populations sum to {self.populations.sum()!r}, not 1")

    @classmethod
    def from_hamiltonian(cls, h, initial) -> "EvolutionContext":
        w, v = h.eigh() if isinstance(h, HermitianOperator) else eigendecompose(h)
        return cls(w, v, initial)

    @property
    def num_qubits(self) -> int:
        return int(self.eigenvalues.size).bit_length() - 1

    @property
    def energy(self) -> float:
        return float(self.populations @ self.eigenvalues)

    def with_state(self, initial) -> "EvolutionContext":
        return EvolutionContext(self.eigenvalues, self.eigenvectors, initial)

    def min_nonzero_gap(self, rel_tol: float = 1e-12) -> float:
        e = self.eigenvalues
        scale = max(1.0, float(np.max(np.abs(e))))
        d = np.diff(e)
        d = d[d > rel_tol * scale]
        return float(d.min()) if d.size else math.inf


def evolve(ctx: EvolutionContext, t: float) -> PureState:
    """``e^{-iHt}|Psi>``."""
    return PureState(ctx.num_qubits, evolve_many(ctx, [t])[0])


def evolve_many(ctx: EvolutionContext, times: Sequence[float]) -> np.ndarray:
    """State vectors at each time, shape ``(len(times), D)``."""
    t = np.asarray(times, dtype=float)
    phases = np.exp(-1j * np.outer(ctx.eigenvalues, t)) * ctx.coefficients[:, None]
    return (ctx.eigenvectors @ phases).T


def energy_series(ctx: EvolutionContext, states: np.ndarray, h: np.ndarray) -> np.ndarray:
    return np.einsum("ti,ij,tj->t", states.conj(), h, states).real


def entropy_timeseries(ctx: EvolutionContext, grid: TimeGrid, masks) -> np.ndarray:
    """``S(rho_A(t))`` with shape ``(len(grid), len(masks))``."""
    states = evolve_many(ctx, grid.times)
    n = ctx.num_qubits
    cols = []
    for mask in masks:
        m = as_mask(mask)
        m.check(n)
        cols.append(entanglement_entropies(states, m.sites))
    return np.stack(cols, axis=1)


def diagonal_ensemble(ctx: EvolutionContext) -> DensityMatrix:
    """``rho_inf = sum_j p_j |j><j|``."""
    v = ctx.eigenvectors
    rho = (v * ctx.populations) @ v.conj().T
    return DensityMatrix(ctx.num_qubits, 0.5 * (rho + rho.conj().T))


def eigenstate_marginals(ctx: EvolutionContext, mask) -> np.ndarray:
    """``tr_{Abar} |j><j|`` for every eigenvector, shape ``(D, d_A, d_A)``."""
    return reduced_matrices(ctx.eigenvectors.T, as_mask(mask).sites)


def reduced_diagonal_ensemble(ctx: EvolutionContext, mask, marginals: np.ndarray | None = None) -> np.ndarray:
    """``tr_{Abar} rho_inf = sum_j p_j tr_{Abar}|j><j|`` without forming ``rho_inf``."""
    if marginals is None:
        marginals = eigenstate_marginals(ctx, mask)
    return np.einsum("j,jab->ab", ctx.populations, marginals)


def effective_dimension(ctx: EvolutionContext) -> float:
    """``1 / sum_j p_j^2``."""
    return float(1.0 / np.sum(ctx.populations**2))


def default_tau(ctx: EvolutionContext) -> float:
    """``100 / (smallest nonzero level spacing)``."""
    return 100.0 / ctx.min_nonzero_gap()


@dataclass(frozen=True)
class TimeAverage:
    estimate: float
    stderr: float
    num_times: int
    tau: float | None


def time_averaged_trace_distance(ctx: EvolutionContext, mask, grid: TimeGrid,
                                 marginals: np.ndarray | None = None) -> TimeAverage:
    """
    Monte Carlo estimate of ``(1/tau) int_0^tau ||rho_A(t) - rho_A^inf||_1 dt``.

    ``grid`` should be drawn uniformly from ``[0, tau]``; the standard error is
    that of the sample mean over grid points. Warns when ``tau`` is shorter
    than ten inverse minimum gaps.
    """
    mask = as_mask(mask)
    gap = ctx.min_nonzero_gap()
    tau = grid.tau if grid.tau is not None else float(grid.times[-1])
    if math.isfinite(gap) and tau < 10.0 / gap:
        warnings.warn(
            f"tau = {tau:.3g} is below 10 / min gap = {10.0 / gap:.3g}; estimate is pre-asymptotic",
            RuntimeWarning,
            stacklevel=2,
        )
    rho_inf = reduced_diagonal_ensemble(ctx, mask, marginals)
    states = evolve_many(ctx, grid.times)
    rho_t = reduced_matrices(states, mask.sites)
    diff = rho_t - rho_inf
    dist = np.abs(np.linalg.eigvalsh(0.5 * (diff + np.swapaxes(diff.conj(), -1, -2)))).sum(axis=-1)
    se = float(dist.std(ddof=1) / math.sqrt(dist.size)) if dist.size > 1 else 0.0
    return TimeAverage(float(dist.mean()), se, int(dist.size), grid.tau)


TIMESERIES_COLUMNS = ("time", "mask_id", "entropy_nats", "energy", "bound_rhs_if_any")


def write_timeseries_csv(path, times, entropies: np.ndarray, energies=None, bound_rhs=None,
                         mask_ids: Sequence[str] | None = None) -> None:
    """
    One row per ``(time, mask)``: columns ``time, mask_id, entropy_nats,
    energy, bound_rhs_if_any``. Missing values are written as empty fields.
    """
    entropies = np.atleast_2d(np.asarray(entropies))
    if mask_ids is None:
        mask_ids = [str(i) for i in range(entropies.shape[1])]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TIMESERIES_COLUMNS)
        for ti, t in enumerate(times):
            for mi, mid in enumerate(mask_ids):
                w.writerow([
                    repr(float(t)),
                    mid,
                    repr(float(entropies[ti, mi])),
                    "" if energies is None else repr(float(energies[ti])),
                    "" if bound_rhs is None else repr(float(np.atleast_1d(bound_rhs)[ti])),
                ])
