"""
Config-driven experiment runner.

``entbound run config.json`` executes one experiment and writes
``reports.json``, ``certificates.csv``, any data tables, and
``summary.txt`` into the output directory. ``entbound sweep DIR`` runs
every config in ``DIR`` (at least three, differing only in system size) and
fits the declared scaling trends.

Exit status: 0 all exact certificates pass, 1 a certificate failed,
2 invalid config, 3 resource guard.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import bounds
from ._parallel import parallel_map
from .bounds import CSV_COLUMNS, CertificateReport, fit_trend
from .dynamics import TIMESERIES_COLUMNS, TimeGrid
from .models import (
    ChargeCircuitSpec,
    LatticeChainSpec,
    build_lattice_chain,
    charge_circuit_layers,
    derive_seed,
    trace_moment_check,
)
from .sampling import EnsembleSpec, energy_statistics, haar_bipartite_entropies, sample_haar_product_state

SCHEMA_VERSION = 1
MAX_DENSE_QUBITS = 13

EXIT_OK, EXIT_CERT, EXIT_CONFIG, EXIT_GUARD = 0, 1, 2, 3


class ConfigError(ValueError):
    def __init__(self, field_name: str, reason: str):
        super().__init__(f"{field_name}: {reason}")
        self.field = field_name
        self.reason = reason


class ResourceGuardError(RuntimeError):
    pass


# name -> (type, default); REQUIRED marks a mandatory parameter
_INT, _FLOAT, _BOOL, _STR, _DICT = int, float, bool, str, dict
REQUIRED = object()

EXPERIMENTS: dict[str, dict[str, tuple]] = {
    "page": {"d_A": (_INT, REQUIRED), "d_B": (_INT, REQUIRED), "num_samples": (_INT, 100000)},
    "lattice": {
        "N": (_INT, REQUIRED), "n": (_INT, REQUIRED), "num_states": (_INT, 20),
        "t_max": (_FLOAT, 20.0), "num_times": (_INT, 50),
        "translationally_invariant": (_BOOL, False), "bond_term": (_DICT, None),
        "energy_samples": (_INT, 1000),
    },
    "lattice_ti_equilibration": {
        "N": (_INT, REQUIRED), "n": (_INT, REQUIRED), "num_states": (_INT, 20),
        "num_times": (_INT, 100), "tau": (_FLOAT, None), "bond_term": (_DICT, None),
    },
    "charge": {
        "N": (_INT, REQUIRED), "n": (_INT, REQUIRED), "depth": (_INT, 20),
        "num_states": (_INT, 20), "m": (_INT, None),
    },
    "spin_glass": {
        "N": (_INT, REQUIRED), "n": (_INT, REQUIRED), "num_disorder": (_INT, 200),
        "t_max": (_FLOAT, 30.0), "num_times": (_INT, 50), "initial_basis_index": (_INT, 0),
    },
    "syk": {
        "N_majorana": (_INT, REQUIRED), "n": (_INT, REQUIRED), "num_disorder": (_INT, 100),
        "t_max": (_FLOAT, 30.0), "num_times": (_INT, 50), "initial_basis_index": (_INT, 0),
        "engf_threshold": (_FLOAT, 0.5),
    },
    "thermo_curves": {
        "kind": (_STR, "spin_glass"), "N": (_INT, REQUIRED), "num_disorder": (_INT, 200),
        "beta_min": (_FLOAT, -1.0), "beta_max": (_FLOAT, 1.0), "num_beta": (_INT, 21),
        "antithetic": (_BOOL, False), "initial_basis_index": (_INT, 0),
    },
    "moment_check": {
        "kind": (_STR, "spin_glass"), "N": (_INT, REQUIRED), "k_max": (_INT, 2),
        "num_samples": (_INT, 1000),
    },
}

SWEEP_AXES = ("N", "N_majorana")


@dataclass
class RunConfig:
    experiment: str
    params: dict
    master_seed: int = 0
    output_dir: str | None = None
    name: str | None = None
    schema_version: int = SCHEMA_VERSION

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "experiment": self.experiment,
            "name": self.name,
            "master_seed": self.master_seed,
            "output_dir": self.output_dir,
            "params": dict(self.params),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        if not isinstance(data, dict):
            raise ConfigError("config", "top level must be a JSON object")
        extra = set(data) - {"schema_version", "experiment", "name", "master_seed", "output_dir", "params"}
        if extra:
            raise ConfigError(sorted(extra)[0], "unknown top-level field")
        if data.get("schema_version") != SCHEMA_VERSION:
            raise ConfigError("schema_version", f"expected {SCHEMA_VERSION}, got {data.get('schema_version')!r}")
        exp = data.get("experiment")
        if exp not in EXPERIMENTS:
            raise ConfigError("experiment", f"must be one of {sorted(EXPERIMENTS)}, got {exp!r}")
        seed = data.get("master_seed", 0)
        if not isinstance(seed, int) or isinstance(seed, bool):
            raise ConfigError("master_seed", "must be an integer")
        params = data.get("params", {})
        if not isinstance(params, dict):
            raise ConfigError("params", "must be an object")
        cfg = cls(exp, _validate_params(exp, params), seed, data.get("output_dir"), data.get("name"))
        _check_preconditions(cfg)
        return cfg

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError("config", f"invalid JSON ({exc.msg} at line {exc.lineno})") from None
        return cls.from_dict(data)

    @classmethod
    def load(cls, path) -> "RunConfig":
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError("config", f"cannot read {path}: {exc.strerror}") from None
        return cls.from_json(text)


def _validate_params(exp: str, params: dict) -> dict:
    schema = EXPERIMENTS[exp]
    for key in params:
        if key not in schema:
            raise ConfigError(f"params.{key}", f"not a parameter of {exp}")
    out = {}
    for key, (typ, default) in schema.items():
        if key not in params:
            if default is REQUIRED:
                raise ConfigError(f"params.{key}", "required")
            out[key] = default
            continue
        val = params[key]
        if val is None and default is None:
            out[key] = None
            continue
        ok = isinstance(val, typ) and not (typ is not _BOOL and isinstance(val, bool))
        if typ is _FLOAT and isinstance(val, int) and not isinstance(val, bool):
            val, ok = float(val), True
        if not ok:
            raise ConfigError(f"params.{key}", f"expected {typ.__name__}, got {type(val).__name__}")
        if typ is _INT and key != "initial_basis_index" and val < 1:
            raise ConfigError(f"params.{key}", "must be positive")
        out[key] = val
    return out


def _qubits(cfg: RunConfig) -> int:
    p = cfg.params
    if cfg.experiment == "page":
        return math.ceil(math.log2(p["d_A"] * p["d_B"]))
    if cfg.experiment == "syk":
        return p["N_majorana"] // 2
    if cfg.experiment in ("thermo_curves", "moment_check") and p["kind"] == "syk":
        return p["N"] // 2
    return p["N"]


def _check_preconditions(cfg: RunConfig) -> None:
    p = cfg.params
    exp = cfg.experiment
    if exp == "page" and p["d_A"] > p["d_B"]:
        raise ConfigError("params.d_A", "must not exceed d_B")
    if exp in ("lattice", "charge", "spin_glass") and not 2 <= p["n"] <= p["N"] / 2:
        raise ConfigError("params.n", "need 2 <= n <= N/2")
    if exp == "lattice_ti_equilibration" and not 1 <= p["n"] <= p["N"] / 2:
        raise ConfigError("params.n", "need 1 <= n <= N/2")
    if exp in ("lattice", "lattice_ti_equilibration") and p["N"] < 3:
        raise ConfigError("params.N", "chain needs at least 3 sites")
    if exp == "charge" and p["m"] is not None and p["N"] % p["m"]:
        raise ConfigError("params.m", "must divide N")
    if exp == "syk":
        if p["N_majorana"] % 2 or p["N_majorana"] < 8:
            raise ConfigError("params.N_majorana", "must be even and >= 8")
        if p["n"] % 2 or not 4 <= p["n"] <= p["N_majorana"] / 2:
            raise ConfigError("params.n", "need even 4 <= n <= N_majorana/2")
    if exp in ("spin_glass", "syk") and p["num_times"] < 20:
        raise ConfigError("params.num_times", "time grid too coarse: need at least 20 points")
    if exp in ("spin_glass", "thermo_curves") and p["num_disorder"] < 100:
        raise ConfigError("params.num_disorder", "need at least 100 disorder samples")
    if exp == "thermo_curves":
        if p["kind"] not in ("spin_glass", "syk"):
            raise ConfigError("params.kind", "must be spin_glass or syk")
        if not -1.0 <= p["beta_min"] < p["beta_max"] <= 1.0:
            raise ConfigError("params.beta_min", "need -1 <= beta_min < beta_max <= 1")
    if exp == "moment_check":
        if p["kind"] != "spin_glass":
            raise ConfigError("params.kind", "moment check is defined for the spin glass")
        if p["num_samples"] < 100:
            raise ConfigError("params.num_samples", "need at least 100 samples")
        if p["k_max"] > 4 or p["N"] > 10:
            raise ConfigError("params.k_max", "limited to k_max <= 4 and N <= 10")


def resource_guard(cfg: RunConfig) -> None:
    nq = _qubits(cfg)
    if nq > MAX_DENSE_QUBITS:
        raise ResourceGuardError(
            f"{nq} qubits requested; dense simulation is refused above {MAX_DENSE_QUBITS} qubits")


# ---------------------------------------------------------------------------
# Experiments
# ---------------------------------------------------------------------------


@dataclass
class RunResult:
    reports: list
    metrics: dict = field(default_factory=dict)
    tables: dict = field(default_factory=dict)  # filename -> (columns, rows)


def _chain_spec(cfg: RunConfig, ti: bool, gaps: bool = False) -> LatticeChainSpec:
    p = cfg.params
    return LatticeChainSpec(
        p["N"], translationally_invariant=ti, seed=derive_seed(cfg.master_seed, -1),
        bond_term=p.get("bond_term"), require_nondegenerate_gaps=gaps,
    )


def _run_page(cfg: RunConfig, jobs: int) -> RunResult:
    p = cfg.params
    s = haar_bipartite_entropies(p["d_A"], p["d_B"], p["num_samples"], cfg.master_seed)
    exact = bounds.page_mean_entropy(p["d_A"], p["d_B"])
    mean, se = float(s.mean()), float(s.std(ddof=1) / math.sqrt(s.size))
    inst = {"d_A": p["d_A"], "d_B": p["d_B"], "num_samples": p["num_samples"]}
    rep = CertificateReport("page.mean", inst, abs(mean - exact), 0.0, 0.0, se, kind="statistical",
                            notes=[f"z = {(mean - exact) / se:.3f}"])
    metrics = {"mean": mean, "stderr": se, "exact": exact, "z_score": (mean - exact) / se,
               "variance": float(s.var(ddof=1))}
    return RunResult([rep], metrics)


def _lattice_task(args):
    chain, n, seed, index, t_max, num_times = args
    psi = sample_haar_product_state(chain.num_qubits, seed)
    return bounds.theorem_lat_certificate(chain, psi, TimeGrid.linear(t_max, num_times), n,
                                          label={"state": index})


def _series_rows(results, label: str, n: int):
    rows = []
    for i, res in enumerate(results):
        for k, t in enumerate(res.times):
            rows.append([repr(float(t)), f"{label}{i}:n{n}", repr(float(res.columns["avg_entropy"][k])),
                         repr(float(res.columns.get("energy", res.columns.get("charge"))[k])),
                         repr(float(res.columns["rhs"][k]))])
    return rows


def _run_lattice(cfg: RunConfig, jobs: int) -> RunResult:
    p = cfg.params
    chain = build_lattice_chain(_chain_spec(cfg, p["translationally_invariant"]))
    tasks = [(chain, p["n"], derive_seed(cfg.master_seed, i), i, p["t_max"], p["num_times"])
             for i in range(p["num_states"])]
    results = parallel_map(_lattice_task, tasks, jobs)
    reports = [r for res in results for r in res.reports]
    if p["translationally_invariant"]:
        reports += bounds.corollary_ti_certificate(
            chain, p["n"], p["num_states"], TimeGrid.linear(p["t_max"], p["num_times"]),
            derive_seed(cfg.master_seed, -3)).reports
    stats = energy_statistics(chain, EnsembleSpec(
        "haar_qubit_product", p["N"], seed=derive_seed(cfg.master_seed, -2), num_samples=p["energy_samples"]))
    margins = [bounds.LN2 * p["n"] - float(r.columns["avg_entropy"].max()) for r in results]
    metrics = {
        "energy_std": stats.std, "energy_mean_abs": stats.mean_abs, "energy_mean": stats.mean,
        "energy_stderr_mean": stats.stderr_mean,
        "energy_fraction_above_sqrtN": stats.fraction_above_threshold,
        "margin_below_max": float(np.mean(margins)),
        "margin_below_max_se": float(np.std(margins, ddof=1) / math.sqrt(len(margins))) if len(margins) > 1 else 0.0,
    }
    return RunResult(reports, metrics, {"timeseries.csv": (TIMESERIES_COLUMNS, _series_rows(results, "state", p["n"]))})


def _run_ti(cfg: RunConfig, jobs: int) -> RunResult:
    p = cfg.params
    chain = build_lattice_chain(_chain_spec(cfg, True, gaps=True))
    cert = bounds.theorem_ti_equilibration_certificate(
        chain, p["n"], p["num_states"], p["tau"], p["num_times"], cfg.master_seed, jobs)
    return RunResult(cert.reports, cert.metrics)


def _charge_task(args):
    nq, depth, circuit_seed, state_seed, n, m, index = args
    layers = charge_circuit_layers(ChargeCircuitSpec(nq, depth, circuit_seed))
    psi = sample_haar_product_state(nq, state_seed)
    windows = None if m is None else bounds.window_family(nq, n, m)
    return bounds.theorem_charge_certificate(layers, psi, n, windows, label={"state": index})


def _run_charge(cfg: RunConfig, jobs: int) -> RunResult:
    p = cfg.params
    circuit_seed = derive_seed(cfg.master_seed, -1)
    tasks = [(p["N"], p["depth"], circuit_seed, derive_seed(cfg.master_seed, i), p["n"], p["m"], i)
             for i in range(p["num_states"])]
    results = parallel_map(_charge_task, tasks, jobs)
    reports = [r for res in results for r in res.reports]
    rows = []
    for i, res in enumerate(results):
        for k, layer in enumerate(res.times):
            rows.append([int(layer), f"state{i}", repr(float(res.columns["avg_entropy"][k])),
                         repr(float(res.columns["charge"][k])), repr(float(res.columns["rhs"][k]))])
    margins = [bounds.LN2 * p["n"] - float(r.columns["avg_entropy"].max()) for r in results]
    return RunResult(reports, {"margin_below_max": float(np.mean(margins))},
                     {"layers.csv": (("layer", "state_id", "entropy_nats", "charge", "bound_rhs"), rows)})


def _basis_vector(nq: int, index: int) -> np.ndarray:
    if not 0 <= index < 2**nq:
        raise ConfigError("params.initial_basis_index", f"out of range for {nq} qubits")
    v = np.zeros(2**nq, dtype=complex)
    v[index] = 1.0
    return v


def _disorder_result(cert) -> RunResult:
    rows = [[d["seed_index"], repr(d["e0"]), repr(d["time_max_entropy"]), repr(d["argmax_t"])]
            for d in cert.per_sample]
    return RunResult(cert.reports, cert.metrics,
                     {"samples.csv": (("sample", "energy", "time_max_entropy", "argmax_time"), rows)})


def _run_spin_glass(cfg: RunConfig, jobs: int) -> RunResult:
    p = cfg.params
    cert = bounds.theorem_sg_certificate(
        p["N"], p["n"], p["num_disorder"], _basis_vector(p["N"], p["initial_basis_index"]),
        TimeGrid.linear(p["t_max"], p["num_times"]), cfg.master_seed, jobs)
    return _disorder_result(cert)


def _run_syk(cfg: RunConfig, jobs: int) -> RunResult:
    p = cfg.params
    cert = bounds.theorem_syk_certificate(
        p["N_majorana"], p["n"], p["num_disorder"], _basis_vector(p["N_majorana"] // 2, p["initial_basis_index"]),
        TimeGrid.linear(p["t_max"], p["num_times"]), cfg.master_seed, jobs, p["engf_threshold"])
    return _disorder_result(cert)


def _run_thermo(cfg: RunConfig, jobs: int) -> RunResult:
    p = cfg.params
    nq = p["N"] if p["kind"] == "spin_glass" else p["N"] // 2
    beta = np.linspace(p["beta_min"], p["beta_max"], p["num_beta"])
    if p["beta_min"] < 0 < p["beta_max"]:
        beta = np.unique(np.append(beta, 0.0))
    tc = bounds.thermo_curves(p["kind"], p["N"], beta, p["num_disorder"], _basis_vector(nq, p["initial_basis_index"]),
                              cfg.master_seed, p["antithetic"])
    rows = [[repr(r["beta"]), repr(r["energy"]), repr(r["energy_se"]), repr(r["entropy"]), repr(r["entropy_se"])]
            for r in tc.table()]
    metrics = {"fitted_C": tc.fitted_C, "num_positive": int(np.sum(tc.signs > 0))}
    return RunResult(tc.reports, metrics,
                     {"thermo.csv": (("beta", "energy", "energy_se", "entropy", "entropy_se"), rows)})


def _run_moment(cfg: RunConfig, jobs: int) -> RunResult:
    p = cfg.params
    reports = []
    for m in trace_moment_check(p["kind"], p["N"], p["k_max"], p["num_samples"], cfg.master_seed):
        inst = {"N": p["N"], "k": m.k, "num_samples": p["num_samples"]}
        reports.append(CertificateReport("moment.upper", inst, m.mean_tr_2k, m.bound, 0.0, m.stderr_tr_2k,
                                         kind="statistical"))
        reports.append(CertificateReport("moment.lower", inst, m.mean_tr_k_sq, m.mean_tr_2k, 0.0,
                                         math.hypot(m.stderr_tr_2k, m.stderr_tr_k_sq), kind="statistical"))
        if m.k == 1:
            reports.append(CertificateReport("moment.k1_exact", inst, abs(m.mean_tr_2k - 1.0), 0.0, 0.0,
                                             m.stderr_tr_2k, kind="statistical"))
    return RunResult(reports)


RUNNERS = {
    "page": _run_page,
    "lattice": _run_lattice,
    "lattice_ti_equilibration": _run_ti,
    "charge": _run_charge,
    "spin_glass": _run_spin_glass,
    "syk": _run_syk,
    "thermo_curves": _run_thermo,
    "moment_check": _run_moment,
}


def execute(cfg: RunConfig, jobs: int = 1) -> RunResult:
    resource_guard(cfg)
    return RUNNERS[cfg.experiment](cfg, jobs)


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------


def _write_csv(path: Path, columns, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        w.writerows(rows)


def exit_status(reports, strict: bool) -> int:
    for r in reports:
        if not r.passed and (r.kind == "exact" or strict):
            return EXIT_CERT
    return EXIT_OK


def summary_text(title: str, reports, metrics: dict) -> str:
    lines = [title, ""]
    by_id: dict[str, list] = {}
    for r in reports:
        by_id.setdefault(r.theorem_id, []).append(r)
    width = max([len(k) for k in by_id] + [10])
    lines.append(f"{'certificate':<{width}}  kind         pass  fail  worst margin")
    for key in sorted(by_id):
        rs = by_id[key]
        fails = sum(not r.passed for r in rs)
        worst = min(rs, key=lambda r: r.margin + r.tolerance + 3 * r.statistical_error)
        lines.append(f"{key:<{width}}  {rs[0].kind:<11}  {len(rs) - fails:>4}  {fails:>4}  {worst.margin:+.6e}")
    total_fail = sum(not r.passed for r in reports)
    lines += ["", f"total: {len(reports) - total_fail} passed, {total_fail} failed"]
    if metrics:
        lines += ["", "metrics:"]
        lines += [f"  {k} = {v}" for k, v in sorted(metrics.items())]
    return "\n".join(lines) + "\n"


def write_outputs(out: Path, cfg: RunConfig, result: RunResult) -> None:
    out.mkdir(parents=True, exist_ok=True)
    payload = {
        "config": cfg.to_dict(),
        "metrics": bounds._plain(result.metrics),
        "reports": [r.to_dict() for r in result.reports],
    }
    (out / "reports.json").write_text(json.dumps(payload, sort_keys=True, indent=1) + "\n")
    _write_csv(out / "certificates.csv", CSV_COLUMNS, [r.csv_row() for r in result.reports])
    for name, (cols, rows) in result.tables.items():
        _write_csv(out / name, cols, rows)
    (out / "summary.txt").write_text(summary_text(f"experiment: {cfg.experiment}", result.reports, result.metrics))


def run_config(cfg: RunConfig, out: Path, jobs: int = 1, strict: bool = False) -> tuple[int, RunResult]:
    result = execute(cfg, jobs)
    write_outputs(out, cfg, result)
    return exit_status(result.reports, strict), result


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------


def _sweep_value(cfg: RunConfig) -> int:
    for axis in SWEEP_AXES:
        if axis in cfg.params:
            return cfg.params[axis]
    raise ConfigError("params", f"{cfg.experiment} has no sweepable size axis")


def check_sweep(configs: list[RunConfig]) -> None:
    if len(configs) < 3:
        raise ConfigError("sweep", "fewer than 3 sweep points")
    first = configs[0]
    for c in configs[1:]:
        if c.experiment != first.experiment:
            raise ConfigError("experiment", "sweep configs must share the experiment")
        if c.master_seed != first.master_seed:
            raise ConfigError("master_seed", "sweep configs must share the master seed")
        for k in set(c.params) | set(first.params):
            if k not in SWEEP_AXES and c.params.get(k) != first.params.get(k):
                raise ConfigError(f"params.{k}", "differs between sweep configs but is not a sweep axis")
    values = [_sweep_value(c) for c in configs]
    if len(set(values)) != len(values):
        raise ConfigError("params.N", "sweep points must have distinct sizes")


def sweep_trends(experiment: str, sizes, metrics: list[dict]) -> tuple[list, dict]:
    """Declared scaling fits for an ``N`` sweep."""
    sizes = np.asarray(sizes, dtype=float)
    reports, fits = [], {}
    if experiment == "lattice_ti_equilibration":
        reports, fits = bounds.ti_trend_reports(metrics)
    if experiment == "lattice":
        fit = fit_trend(np.log(sizes), np.log([m["energy_std"] for m in metrics]))
        fits["log_energy_std_vs_log_N"] = fit
        reports.append(CertificateReport("sweep.energy_std_slope", {"N_values": sizes.astype(int).tolist(), **fit},
                                         abs(fit["slope"] - 0.5), 0.15, 0.0, kind="statistical"))
    if metrics and "margin_below_max" in metrics[0]:
        fits["margin_below_max_vs_invN"] = fit_trend(1.0 / sizes, [m["margin_below_max"] for m in metrics])
    return reports, fits


def run_sweep(directory: Path, out: Path, seed: int | None, jobs: int, strict: bool) -> int:
    paths = sorted(Path(directory).glob("*.json"))
    configs = [RunConfig.load(p) for p in paths]
    if seed is not None:
        for c in configs:
            c.master_seed = seed
    check_sweep(configs)
    for c in configs:
        resource_guard(c)
    order = sorted(range(len(configs)), key=lambda i: _sweep_value(configs[i]))
    configs = [configs[i] for i in order]
    status = EXIT_OK
    all_metrics = []
    for c in configs:
        code, res = run_config(c, out / f"N{_sweep_value(c)}", jobs, strict)
        status = max(status, code)
        all_metrics.append(res.metrics)
    sizes = [_sweep_value(c) for c in configs]
    reports, fits = sweep_trends(configs[0].experiment, sizes, all_metrics)
    payload = {"experiment": configs[0].experiment, "sizes": sizes, "fits": fits,
               "metrics": bounds._plain(all_metrics), "reports": [r.to_dict() for r in reports]}
    out.mkdir(parents=True, exist_ok=True)
    (out / "trend.json").write_text(json.dumps(payload, sort_keys=True, indent=1) + "\n")
    text = summary_text(f"sweep: {configs[0].experiment} over N = {sizes}", reports, {})
    text += "\nfits:\n" + "".join(
        f"  {k}: slope {v['slope']:+.4g}, 95% CI [{v['slope_ci95'][0]:+.4g}, {v['slope_ci95'][1]:+.4g}]\n"
        for k, v in sorted(fits.items()))
    (out / "summary.txt").write_text(text)
    return max(status, exit_status(reports, strict))


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="entbound", description=__doc__.strip().splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="override the config's master_seed")
    common.add_argument("--out", type=Path, default=None, help="output directory")
    common.add_argument("--jobs", type=int, default=1, help="worker processes")
    common.add_argument("--strict", action="store_true", help="statistical failures also exit nonzero")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", parents=[common], help="run one config")
    p_run.add_argument("config", type=Path)
    p_sweep = sub.add_parser("sweep", parents=[common], help="run a directory of configs and fit trends")
    p_sweep.add_argument("directory", type=Path)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.jobs < 1:
            raise ConfigError("--jobs", "must be >= 1")
        if args.command == "run":
            cfg = RunConfig.load(args.config)
            if args.seed is not None:
                cfg.master_seed = args.seed
            out = args.out or Path(cfg.output_dir or f"out/{cfg.name or cfg.experiment}")
            code, result = run_config(cfg, out, args.jobs, args.strict)
            sys.stdout.write((out / "summary.txt").read_text())
            return code
        out = args.out or Path("out") / Path(args.directory).name
        code = run_sweep(args.directory, out, args.seed, args.jobs, args.strict)
        sys.stdout.write((out / "summary.txt").read_text())
        return code
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ResourceGuardError as exc:
        print(f"resource guard: {exc}", file=sys.stderr)
        return EXIT_GUARD
