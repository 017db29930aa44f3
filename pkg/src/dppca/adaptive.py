"""Coherence-adaptive private power iteration for the top eigenvector.

Per iteration the algorithm (1) privately finds a threshold theta so that
almost all rows have bounded leverage against the current iterate, (2)
drops the offending rows, and (3) applies the Gram matrix of the kept rows
to the iterate plus Gaussian noise calibrated to sensitivity theta.  The
threshold adapts the noise to the data's incoherence instead of paying the
worst case: well-spread data fires on a small theta and gets small noise.

Accounting: each iteration runs two (epsilon)-mechanisms — the threshold
search and the Gaussian step — so a T-iteration run is composed as 2T
epsilon-mechanisms and T delta-mechanisms.  `invert_budget(total, 2 * T)`
produces the per-mechanism budget used here; each iteration's Gaussian
step spends (epsilon, delta) and its threshold search spends epsilon.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ContractViolationError, ParameterError
from .matcore import DenseMatrix, gram
from .mech import (
    PrivacyBudget,
    RngStream,
    exp_mech_select,
    gaussian_sigma,
    invert_budget,
    sample_gaussian_vec,
)
from .svtfilter import SvtConfig, apply_filter, threshold_search

_ROW_NORM_SLACK = 1.0 + 1e-9


@dataclass
class AdaptiveParams:
    """Configuration for one run of the adaptive iteration.

    per_iter is the per-mechanism budget: every threshold search spends
    per_iter.epsilon, every Gaussian step spends the full pair.
    """

    iterations: int
    per_iter: PrivacyBudget
    beta: float = 0.05
    normalize: bool = True
    noise_variant: str = "alg_line9"
    noiseless: bool = False
    grid_lo_exp: int = -40
    grid_hi_exp: int = 1
    svt: SvtConfig | None = None  # grid/scaling template; epsilon comes from per_iter

    def __post_init__(self) -> None:
        if self.iterations < 1:
            raise ParameterError(f"iterations must be >= 1, got {self.iterations}")
        if not 0.0 < self.beta < 1.0:
            raise ParameterError(f"beta must lie in (0, 1), got {self.beta}")
        if self.noise_variant not in ("alg_line9", "proof"):
            raise ParameterError(f"unknown noise variant {self.noise_variant!r}")


@dataclass
class IterationTrace:
    """Per-iteration diagnostics; every list has length `iterations`."""

    theta: list[float] = field(default_factory=list)
    removed: list[int] = field(default_factory=list)
    noise_sigma: list[float] = field(default_factory=list)
    x_norm_pre: list[float] = field(default_factory=list)
    x_norm_post: list[float] = field(default_factory=list)
    queries_issued: list[int] = field(default_factory=list)
    restarts: int = 0
    total_removed: int = 0

    def as_dict(self) -> dict:
        return {
            "theta": self.theta,
            "removed": self.removed,
            "noise_sigma": self.noise_sigma,
            "x_norm_pre": self.x_norm_pre,
            "x_norm_post": self.x_norm_post,
            "queries_issued": self.queries_issued,
            "restarts": self.restarts,
            "total_removed": self.total_removed,
        }


def check_private_input(a: DenseMatrix) -> None:
    """Preconditions shared by all privacy-facing algorithms."""
    if a.d > a.n:
        raise ContractViolationError(
            f"matrix has d={a.d} > n={a.n}; the analysis requires n >= d"
        )
    m = a.max_row_norm()
    if m > _ROW_NORM_SLACK:
        raise ContractViolationError(
            f"max row norm {m:.6g} exceeds 1; rescale rows first "
            "(the CLI offers --auto-scale)"
        )


def run_adaptive_power(
    a: DenseMatrix, params: AdaptiveParams, rng: RngStream
) -> tuple[np.ndarray, IterationTrace]:
    """Run the adaptive iteration; returns (unit estimate, trace).

    With noiseless=True this reduces exactly to plain power iteration on
    A^T A from the same Gaussian start (the threshold search then returns
    the smallest grid value keeping every row, which for rows of norm at
    most 1 keeps all of them).
    """
    check_private_input(a)
    x = rng.standard_normal(a.d)
    trace = IterationTrace()

    if params.svt is not None:
        svt_cfg = replace(
            params.svt,
            epsilon=params.per_iter.epsilon,
            beta=params.beta,
            noiseless=params.noiseless,
        )
    else:
        svt_cfg = SvtConfig(
            epsilon=params.per_iter.epsilon,
            beta=params.beta,
            grid_lo_exp=params.grid_lo_exp,
            grid_hi_exp=params.grid_hi_exp,
            noiseless=params.noiseless,
        )

    for _ in range(params.iterations):
        found = threshold_search(a, x, svt_cfg, rng)
        outcome = apply_filter(a, x, found.theta, found.queries_issued)

        if params.noiseless:
            sigma = 0.0
        else:
            sigma = gaussian_sigma(found.theta, params.per_iter, params.noise_variant)

        trace.theta.append(found.theta)
        trace.removed.append(outcome.removed_count)
        trace.noise_sigma.append(sigma)
        trace.queries_issued.append(found.queries_issued)
        trace.x_norm_pre.append(float(np.linalg.norm(x)))

        x_new = outcome.kept_gram @ x + sample_gaussian_vec(a.d, sigma, rng)
        norm = float(np.linalg.norm(x_new))
        if norm == 0.0:
            # Dead iterate (all rows dropped and zero noise): restart fresh.
            x_new = rng.standard_normal(a.d)
            norm = float(np.linalg.norm(x_new))
            trace.restarts += 1
        trace.x_norm_post.append(norm)
        x = x_new / norm if params.normalize else x_new

    trace.total_removed = int(sum(trace.removed))
    final_norm = float(np.linalg.norm(x))
    if final_norm == 0.0:  # pragma: no cover - excluded by the restart above
        raise ContractViolationError("final iterate collapsed to zero")
    return x / final_norm, trace


def corollary_iterations(
    n: int, beta: float, delta: float, epsilon: float, kappa: float, const: float = 1.0
) -> int:
    """Iteration count T = ceil(const * ln(n / (beta delta epsilon)) / kappa).

    Clamped below at 1 (the log argument can drop under 1 for enormous
    epsilon; a single iteration is the sensible floor there).
    """
    if not 0.0 < kappa <= 1.0:
        raise ParameterError(f"kappa must lie in (0, 1], got {kappa}")
    arg = n / (beta * delta * epsilon)
    if arg <= 1.0:
        return 1
    return max(1, math.ceil(const * math.log(arg) / kappa))


@dataclass
class SweepCandidate:
    kappa_guess: float
    iterations: int
    estimate: np.ndarray
    quality: float
    trace: IterationTrace


@dataclass
class SweepResult:
    estimate: np.ndarray
    selected: int  # index into candidates
    candidates: list[SweepCandidate]
    selection_epsilon: float


def run_kappa_sweep(
    a: DenseMatrix,
    total: PrivacyBudget,
    rng: RngStream,
    num_guesses: int = 6,
    beta: float = 0.05,
    t_const: float = 1.0,
    noiseless: bool = False,
    normalize: bool = True,
) -> SweepResult:
    """Run the iteration once per gap guess kappa_j = 2^-j and pick privately.

    Budget split: half the epsilon goes to the exponential-mechanism
    selection; each of the J runs gets epsilon_total / (2J) and
    delta_total / J, converted to a per-mechanism budget via invert_budget
    over its own 2 T_j mechanisms.  Selection quality is the captured
    variance x^T A^T A x, whose row-level sensitivity is 1 for unit rows.
    """
    if num_guesses < 1:
        raise ParameterError(f"need at least one guess, got {num_guesses}")
    check_private_input(a)

    run_eps = total.epsilon / (2.0 * num_guesses)
    run_delta = total.delta / num_guesses
    sel_eps = total.epsilon / 2.0
    g = gram(a)

    candidates: list[SweepCandidate] = []
    for j in range(num_guesses):
        kappa_j = 2.0**-j
        t_j = corollary_iterations(
            a.n, beta, total.delta, total.epsilon, kappa_j, t_const
        )
        per_iter = invert_budget(PrivacyBudget(run_eps, run_delta), 2 * t_j)
        params = AdaptiveParams(
            iterations=t_j,
            per_iter=per_iter,
            beta=beta,
            noiseless=noiseless,
            normalize=normalize,
        )
        x_j, trace_j = run_adaptive_power(a, params, rng.child(j))
        quality = float(x_j @ (g @ x_j))
        candidates.append(SweepCandidate(kappa_j, t_j, x_j, quality, trace_j))

    qualities = np.array([c.quality for c in candidates])
    winner = exp_mech_select(qualities, 1.0, sel_eps, rng.child(num_guesses))
    return SweepResult(
        estimate=candidates[winner].estimate,
        selected=winner,
        candidates=candidates,
        selection_epsilon=sel_eps,
    )


def run_with_restarts(
    a: DenseMatrix,
    total: PrivacyBudget,
    iterations: int,
    restarts: int,
    rng: RngStream,
    beta: float = 0.05,
    noiseless: bool = False,
    normalize: bool = True,
) -> tuple[np.ndarray, list[IterationTrace]]:
    """Best-of-R runs, picked by captured variance via the exponential
    mechanism (opt-in; the core guarantee does not rely on restarts).

    Budget split mirrors the sweep: half the epsilon to selection, each
    run gets epsilon_total / (2R) and delta_total / R.
    """
    if restarts < 1:
        raise ParameterError(f"restarts must be >= 1, got {restarts}")
    check_private_input(a)
    g = gram(a)
    run_budget = PrivacyBudget(total.epsilon / (2.0 * restarts), total.delta / restarts)
    per_iter = invert_budget(run_budget, 2 * iterations)
    estimates, traces, qualities = [], [], []
    for r in range(restarts):
        params = AdaptiveParams(
            iterations=iterations,
            per_iter=per_iter,
            beta=beta,
            noiseless=noiseless,
            normalize=normalize,
        )
        x_r, tr = run_adaptive_power(a, params, rng.child(r))
        estimates.append(x_r)
        traces.append(tr)
        qualities.append(float(x_r @ (g @ x_r)))
    winner = exp_mech_select(
        np.array(qualities), 1.0, total.epsilon / 2.0, rng.child(restarts)
    )
    return estimates[winner], traces
