"""Experiment grid runner with deterministic, thread-count-independent CSV.

A config is a JSON document:

    {
      "master_seed": 7,
      "trials": 20,
      "threads": 4,                # optional; CLI flag / DPPCA_THREADS win
      "out": "results.csv",        # optional; CLI flag wins
      "record_walltime": false,    # optional; true trades determinism for timing
      "grid": [ {cell}, ... ]
    }

Each cell names a generator and an algorithm:

    {
      "cell": "adaptive-n16000",          # optional id; defaults to the index
      "gen": {"kind": "gaussian", "n": 16000, "d": 20,
              "sigma1_sq": 0.5, "kappabar": 0.5, "rotate": true}
            | {"kind": "gaussian", "n": ..., "spec": [s1, s2, ...]}
            | {"kind": "low-coh", "n": ..., "d": ..., "sigma1_frac": ..., "gap": ...}
            | {"kind": "high-coh", "n": ..., "d": ...},
      "algo": "adaptive" | "adaptive-sweep" | "analyze-gauss" | "naive-power",
      "eps_total": 1.0, "delta_total": 1e-5, "beta": 0.05,
      "T": 10 | "corollary",              # adaptive / naive-power
      "t_const": 1.0,                     # multiplier for the corollary rule
      "kappa": 0.5,                       # gap guess for the corollary rule
      "sweep_J": 6                        # adaptive-sweep only
    }

Every (cell, trial) pair owns the RngStream (master_seed, cell_index *
trials + trial), so records do not depend on scheduling; they are sorted
by (cell id, trial) before writing.  Wall-clock times are recorded only
when record_walltime is on, because the determinism contract promises
byte-identical CSV output across runs and thread counts.
"""

from __future__ import annotations

import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import theory
from .adaptive import (
    AdaptiveParams,
    corollary_iterations,
    run_adaptive_power,
    run_kappa_sweep,
)
from .baselines import analyze_gauss, noisy_power_naive
from .datagen import (
    GaussSpec,
    gen_gaussian_iid,
    gen_high_coherence,
    gen_low_coherence,
    scale_for_privacy,
)
from .errors import (
    BudgetError,
    ContractViolationError,
    DppcaError,
    NumericalError,
    ParameterError,
)
from .matcore import DenseMatrix, rayleigh_ratio, sin_sq, spectrum_stats
from .mech import PrivacyBudget, RngStream, invert_budget

CSV_HEADER = (
    "cell,trial,algo,n,d,eps_total,delta_total,T,gen,sin2_emp,sin2_pop,"
    "rayleigh,kappa,upsilon,u_inf,removed,clipped,theory_B,wall_ms,error"
)

_ALGOS = ("adaptive", "adaptive-sweep", "analyze-gauss", "naive-power")
_GEN_KINDS = ("gaussian", "low-coh", "high-coh")


@dataclass
class ResultRecord:
    cell: str
    trial: int
    algo: str
    n: int
    d: int
    eps_total: float
    delta_total: float
    t: int | None
    gen: str
    sin2_emp: float | None = None
    sin2_pop: float | None = None
    rayleigh: float | None = None
    kappa: float | None = None
    upsilon: float | None = None
    u_inf: float | None = None
    removed: int | None = None
    clipped: int | None = None
    theory_b: float | None = None
    wall_ms: float | None = None
    error: str = ""


@dataclass
class ExperimentConfig:
    master_seed: int
    trials: int
    grid: list[dict]
    threads: int = 1
    out: str | None = None
    record_walltime: bool = False

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ParameterError(f"trials must be >= 1, got {self.trials}")
        if self.threads < 1:
            raise ParameterError(f"threads must be >= 1, got {self.threads}")
        if not self.grid:
            raise ParameterError("grid must contain at least one cell")
        for i, cell in enumerate(self.grid):
            _validate_cell(cell, i)

    @staticmethod
    def from_json(path: str | Path) -> "ExperimentConfig":
        doc = json.loads(Path(path).read_text())
        return ExperimentConfig(
            master_seed=doc["master_seed"],
            trials=doc["trials"],
            grid=doc["grid"],
            threads=doc.get("threads", 1),
            out=doc.get("out"),
            record_walltime=doc.get("record_walltime", False),
        )


def _validate_cell(cell: dict, index: int) -> None:
    where = f"grid[{index}]"
    gen = cell.get("gen")
    if not isinstance(gen, dict) or gen.get("kind") not in _GEN_KINDS:
        raise ParameterError(f"{where}: gen.kind must be one of {_GEN_KINDS}")
    algo = cell.get("algo")
    if algo not in _ALGOS:
        raise ParameterError(f"{where}: algo must be one of {_ALGOS}")
    # Budget fields validate eagerly; generator params validate at run time.
    PrivacyBudget(cell["eps_total"], cell["delta_total"])
    beta = cell.get("beta", 0.05)
    if not 0.0 < beta < 1.0:
        raise ParameterError(f"{where}: beta must lie in (0, 1), got {beta}")
    if algo == "adaptive-sweep":
        if int(cell.get("sweep_J", 0)) < 1:
            raise ParameterError(f"{where}: adaptive-sweep needs sweep_J >= 1")
    elif algo in ("adaptive", "naive-power"):
        t = cell.get("T")
        if t == "corollary":
            if not 0.0 < float(cell.get("kappa", 0.0)) <= 1.0:
                raise ParameterError(
                    f"{where}: T='corollary' needs a kappa guess in (0, 1]"
                )
        elif not (isinstance(t, int) and t >= 1):
            raise ParameterError(f"{where}: T must be an int >= 1 or 'corollary'")


def _build_instance(gen: dict, rng: RngStream, beta: float):
    """Returns (DenseMatrix ready for private algorithms, vbar1 or None, clip_count)."""
    kind = gen["kind"]
    if kind == "gaussian":
        if "spec" in gen:
            spec = GaussSpec(tuple(gen["spec"]), rotate=gen.get("rotate", True))
        else:
            spec = GaussSpec(
                GaussSpec.spiked(
                    gen["d"], gen["sigma1_sq"], gen["kappabar"]
                ).sigmabar_sq,
                rotate=gen.get("rotate", True),
            )
        raw, vbar1 = gen_gaussian_iid(gen["n"], spec, rng)
        scaled = scale_for_privacy(raw, beta)
        return scaled.matrix, vbar1, scaled.clip_count
    if kind == "low-coh":
        a = gen_low_coherence(
            gen["n"], gen["d"], gen["sigma1_frac"], gen["gap"], rng,
            rotate=gen.get("rotate", True),
        )
        return a, None, 0
    a = gen_high_coherence(
        gen["n"], gen["d"], rng,
        spikes=gen.get("spikes", 4), noise_norm=gen.get("noise_norm", 0.05),
    )
    return a, None, 0


def _cell_iterations(cell: dict, n: int) -> int:
    t = cell.get("T")
    if t == "corollary":
        return corollary_iterations(
            n,
            cell.get("beta", 0.05),
            cell["delta_total"],
            cell["eps_total"],
            float(cell["kappa"]),
            float(cell.get("t_const", 1.0)),
        )
    return int(t)


def _theory_b(
    a: DenseMatrix, stats, t: int, beta: float, per_iter: PrivacyBudget
) -> float | None:
    if t < 2:
        return None
    try:
        _, _, k = theory.constants_K(t, a.n, beta, per_iter.delta)
        _, b = theory.bound_B(stats, per_iter.epsilon, t, k, a.d, a.n)
        return b
    except DppcaError:
        return None


def _run_one(cfg: ExperimentConfig, cell_idx: int, trial: int) -> ResultRecord:
    cell = cfg.grid[cell_idx]
    gen = cell["gen"]
    algo = cell["algo"]
    beta = cell.get("beta", 0.05)
    total = PrivacyBudget(cell["eps_total"], cell["delta_total"])
    rec = ResultRecord(
        cell=str(cell.get("cell", cell_idx)),
        trial=trial,
        algo=algo,
        n=int(gen["n"]),
        d=int(gen.get("d", len(gen.get("spec", [])))),
        eps_total=total.epsilon,
        delta_total=total.delta,
        t=None,
        gen=gen["kind"],
    )
    stream = RngStream(cfg.master_seed, cell_idx * cfg.trials + trial)
    start = time.perf_counter()
    try:
        a, vbar1, clipped = _build_instance(gen, stream, beta)
        rec.n, rec.d, rec.clipped = a.n, a.d, clipped
        stats = spectrum_stats(a)

        if algo == "adaptive":
            t = _cell_iterations(cell, a.n)
            per_iter = invert_budget(total, 2 * t)
            params = AdaptiveParams(iterations=t, per_iter=per_iter, beta=beta)
            x_hat, trace = run_adaptive_power(a, params, stream)
            rec.t, rec.removed = t, trace.total_removed
            rec.theory_b = _theory_b(a, stats, t, beta, per_iter)
        elif algo == "adaptive-sweep":
            sweep = run_kappa_sweep(
                a, total, stream,
                num_guesses=int(cell["sweep_J"]), beta=beta,
                t_const=float(cell.get("t_const", 1.0)),
            )
            x_hat = sweep.estimate
            chosen = sweep.candidates[sweep.selected]
            rec.t = chosen.iterations
            rec.removed = chosen.trace.total_removed
        elif algo == "analyze-gauss":
            x_hat = analyze_gauss(a, total, stream)
            rec.t = 0
        else:  # naive-power
            t = _cell_iterations(cell, a.n)
            per_iter = invert_budget(total, t)
            x_hat = noisy_power_naive(a, t, per_iter, stream)
            rec.t = t

        rec.sin2_emp = sin_sq(x_hat, stats.top_vector)
        if vbar1 is not None:
            rec.sin2_pop = sin_sq(x_hat, vbar1)
        rec.rayleigh = rayleigh_ratio(a, x_hat)
        rec.kappa, rec.upsilon, rec.u_inf = stats.kappa, stats.upsilon, stats.u_inf
    except BudgetError as exc:
        rec.error = f"budget_error:{exc}"
    except ContractViolationError as exc:
        rec.error = f"contract_violation:{exc}"
    except ParameterError as exc:
        rec.error = f"parameter_error:{exc}"
    except NumericalError as exc:
        rec.error = f"numerical_error:{exc}"
    if cfg.record_walltime:
        rec.wall_ms = (time.perf_counter() - start) * 1000.0
    return rec


def run_experiment(cfg: ExperimentConfig, threads: int | None = None) -> list[ResultRecord]:
    """Execute every (cell, trial) pair; records sorted by (cell, trial).

    Thread count: explicit argument, else cfg.threads.  Output is
    independent of the thread count because each trial's randomness is a
    pure function of (master_seed, cell index, trial index).
    """
    workers = threads if threads is not None else cfg.threads
    jobs = [
        (ci, tr) for ci in range(len(cfg.grid)) for tr in range(cfg.trials)
    ]
    if workers <= 1:
        records = [_run_one(cfg, ci, tr) for ci, tr in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(lambda j: _run_one(cfg, *j), jobs))
    records.sort(key=lambda r: (r.cell, r.trial))
    return records


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        if math.isnan(value):
            return ""
        return repr(value)
    return str(value)


def records_to_csv(records: list[ResultRecord]) -> str:
    lines = [CSV_HEADER]
    for r in records:
        lines.append(
            ",".join(
                _fmt(v)
                for v in (
                    r.cell, r.trial, r.algo, r.n, r.d, r.eps_total,
                    r.delta_total, r.t, r.gen, r.sin2_emp, r.sin2_pop,
                    r.rayleigh, r.kappa, r.upsilon, r.u_inf, r.removed,
                    r.clipped, r.theory_b, r.wall_ms,
                    r.error.replace(",", ";").replace("\n", " "),
                )
            )
        )
    return "\n".join(lines) + "\n"


def write_csv(records: list[ResultRecord], path: str | Path) -> None:
    Path(path).write_text(records_to_csv(records))


_METRICS = ("sin2_emp", "sin2_pop", "rayleigh", "kappa", "upsilon", "u_inf",
            "removed", "theory_b", "wall_ms")


def _order_stats(values: list[float]) -> dict:
    v = sorted(values)
    c = len(v)
    return {
        "median": v[(c - 1) // 2],
        "q25": v[(c - 1) // 4],
        "q75": v[(3 * (c - 1)) // 4],
        "mean": sum(v) / c,
        "count": c,
    }


def summarize(records: list[ResultRecord]) -> dict:
    """Per-cell order statistics (lower-median / lower-quartile convention).

    Error rows are excluded from the statistics and counted under
    "errors".  Raises on an empty record list.
    """
    if not records:
        raise ContractViolationError("summarize of an empty record list")
    cells: dict[str, dict] = {}
    for r in records:
        bucket = cells.setdefault(r.cell, {"errors": 0, "metrics": {}})
        if r.error:
            bucket["errors"] += 1
            continue
        for m in _METRICS:
            val = getattr(r, m)
            if val is not None:
                bucket["metrics"].setdefault(m, []).append(float(val))
    return {
        cell: {
            "errors": bucket["errors"],
            **{m: _order_stats(vals) for m, vals in bucket["metrics"].items()},
        }
        for cell, bucket in cells.items()
    }


def threads_from_env(default: int = 1) -> int:
    raw = os.environ.get("DPPCA_THREADS")
    if raw is None:
        return default
    try:
        val = int(raw)
    except ValueError as exc:
        raise ParameterError(f"DPPCA_THREADS={raw!r} is not an integer") from exc
    if val < 1:
        raise ParameterError(f"DPPCA_THREADS must be >= 1, got {val}")
    return val
