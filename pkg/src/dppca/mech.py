"""Privacy budgets, noise mechanisms, and counter-based random streams.

Randomness policy: every consumer draws from an `RngStream`, which wraps a
Philox counter-based generator keyed by (master_seed, stream_id).  A
stream's output is a pure function of those two fields and the order of
draws, so any run is reproducible from its seed regardless of scheduling.
Laplace noise is sampled through the explicit inverse CDF; Gaussian noise
uses the generator's standard_normal (ziggurat).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BudgetError, ParameterError

_CHILD_MIX = 0x9E3779B97F4A7C15  # odd multiplier for child stream ids


def _check_budget_fields(epsilon: float, delta: float) -> None:
    if not (math.isfinite(epsilon) and epsilon > 0.0):
        raise BudgetError(f"epsilon must be positive and finite, got {epsilon}")
    if not (math.isfinite(delta) and 0.0 < delta < 1.0):
        raise BudgetError(f"delta must lie in (0, 1), got {delta}")


@dataclass(frozen=True)
class PrivacyBudget:
    """An (epsilon, delta) pair; both strictly positive, delta < 1."""

    epsilon: float
    delta: float

    def __post_init__(self) -> None:
        _check_budget_fields(self.epsilon, self.delta)


@dataclass
class RngStream:
    """A deterministic Philox stream identified by (master_seed, stream_id).

    `counter` tracks how many draw calls have been issued; it exists for
    tracing and is not consulted when generating.
    """

    master_seed: int
    stream_id: int = 0
    counter: int = field(default=0, compare=False)

    def __post_init__(self) -> None:
        if not 0 <= self.master_seed < 2**64:
            raise ParameterError("master_seed must fit in 64 unsigned bits")
        if not 0 <= self.stream_id < 2**64:
            raise ParameterError("stream_id must fit in 64 unsigned bits")
        key = (self.master_seed << 64) | self.stream_id
        self._gen = np.random.Generator(np.random.Philox(key=key))

    def child(self, index: int) -> "RngStream":
        """Derive an independent downstream stream (e.g. one per sweep run)."""
        mixed = ((self.stream_id * _CHILD_MIX) + index + 1) % 2**64
        return RngStream(self.master_seed, mixed)

    def standard_normal(self, size: int | tuple[int, ...]) -> np.ndarray:
        self.counter += 1
        return self._gen.standard_normal(size)

    def uniform_open(self, size: int | None = None) -> np.ndarray | float:
        """Uniform on the open interval (0, 1)."""
        self.counter += 1
        u = self._gen.random(size)
        # random() covers [0, 1); nudge exact zeros up one ulp.
        tiny = np.nextafter(0.0, 1.0)
        if size is None:
            return float(u) if u > 0.0 else tiny
        u[u == 0.0] = tiny
        return u

    def integers(self, high: int) -> int:
        self.counter += 1
        return int(self._gen.integers(high))


def sample_laplace(scale: float, rng: RngStream, size: int | None = None):
    """Laplace(0, scale) via the inverse CDF applied to uniform(0,1) draws.

    x = -scale * sign(u - 1/2) * ln(1 - 2|u - 1/2|)
    """
    if not (math.isfinite(scale) and scale >= 0.0):
        raise ParameterError(f"laplace scale must be >= 0, got {scale}")
    if scale == 0.0:
        return 0.0 if size is None else np.zeros(size)
    u = rng.uniform_open(size)
    centered = u - 0.5
    inner = 1.0 - 2.0 * np.abs(centered)
    # u in (0,1) keeps inner > 0 except at the closed right edge, which the
    # open-interval sampler excludes; clamp anyway for safety.
    inner = np.maximum(inner, np.nextafter(0.0, 1.0))
    out = -scale * np.sign(centered) * np.log(inner)
    return float(out) if size is None else out


def gaussian_sigma(
    sensitivity: float, budget: PrivacyBudget, variant: str = "alg_line9"
) -> float:
    """Gaussian-mechanism noise scale for a given L2 sensitivity.

    variant "alg_line9": sigma = k * sqrt(2 ln(2/delta)) / epsilon
    variant "proof":     sigma = 2k * sqrt(ln(2/delta)) / epsilon
    """
    if not (math.isfinite(sensitivity) and sensitivity >= 0.0):
        raise ParameterError(f"sensitivity must be >= 0, got {sensitivity}")
    root = math.sqrt(math.log(2.0 / budget.delta))
    if variant == "alg_line9":
        return sensitivity * math.sqrt(2.0) * root / budget.epsilon
    if variant == "proof":
        return 2.0 * sensitivity * root / budget.epsilon
    raise ParameterError(f"unknown gaussian variant {variant!r}")


def sample_gaussian_vec(dim: int, sigma: float, rng: RngStream) -> np.ndarray:
    if dim < 1:
        raise ParameterError(f"dimension must be >= 1, got {dim}")
    if not (math.isfinite(sigma) and sigma >= 0.0):
        raise ParameterError(f"sigma must be >= 0, got {sigma}")
    if sigma == 0.0:
        return np.zeros(dim)
    return sigma * rng.standard_normal(dim)


def compose(per_mechanism: PrivacyBudget, t: int) -> PrivacyBudget:
    """Advanced composition of t adaptive (eps, delta) mechanisms.

    eps' = 2 (t eps^2 + sqrt(2 ln(1/delta) t) eps),  delta' = (t + 1) delta.
    Raises BudgetError if the composed delta reaches 1.
    """
    if t < 1:
        raise ParameterError(f"mechanism count must be >= 1, got {t}")
    eps, delta = per_mechanism.epsilon, per_mechanism.delta
    eps_total = 2.0 * (t * eps * eps + math.sqrt(2.0 * math.log(1.0 / delta) * t) * eps)
    delta_total = (t + 1) * delta
    if delta_total >= 1.0:
        raise BudgetError(
            f"composed delta {(t + 1)} * {delta} = {delta_total} reaches 1"
        )
    return PrivacyBudget(eps_total, delta_total)


def invert_budget(total: PrivacyBudget, t: int) -> PrivacyBudget:
    """Per-mechanism budget whose t-fold composition equals `total`.

    Solves 2 t eps^2 + 2 sqrt(2 ln(1/delta) t) eps - eps_total = 0 for the
    positive root, with delta = delta_total / (t + 1).  Round-trips with
    `compose` up to floating point.
    """
    if t < 1:
        raise ParameterError(f"mechanism count must be >= 1, got {t}")
    delta = total.delta / (t + 1)
    if not 0.0 < delta < 1.0:
        raise BudgetError(f"per-mechanism delta {delta} out of range")
    b = 2.0 * math.sqrt(2.0 * math.log(1.0 / delta) * t)
    # Numerically stable positive root of 2t e^2 + b e - eps_total = 0.
    eps = 2.0 * total.epsilon / (b + math.sqrt(b * b + 8.0 * t * total.epsilon))
    return PrivacyBudget(eps, delta)


def exp_mech_select(
    qualities: np.ndarray, sensitivity: float, epsilon: float, rng: RngStream
) -> int:
    """Exponential mechanism: sample index j with P(j) ~ exp(eps q_j / (2 s)).

    Logits are max-shifted before exponentiation.  If the scaled logits are
    not finite (the degenerate epsilon -> infinity path) the highest-quality
    index wins, ties broken by lowest index.
    """
    q = np.asarray(qualities, dtype=np.float64)
    if q.ndim != 1 or q.size == 0:
        raise ParameterError("qualities must be a non-empty 1-d array")
    if not np.isfinite(q).all():
        raise ParameterError("qualities must be finite")
    if not (math.isfinite(sensitivity) and sensitivity > 0.0):
        raise ParameterError(f"sensitivity must be positive, got {sensitivity}")
    if not epsilon > 0.0:
        raise BudgetError(f"epsilon must be positive, got {epsilon}")

    with np.errstate(over="ignore"):
        logits = (epsilon / (2.0 * sensitivity)) * q
    if not np.isfinite(logits).all():
        return int(np.argmax(q))
    weights = np.exp(logits - logits.max())
    tot = float(weights.sum())
    if not math.isfinite(tot) or tot <= 0.0:
        return int(np.argmax(q))
    u = rng.uniform_open() * tot
    return int(np.searchsorted(np.cumsum(weights), u, side="left").clip(0, q.size - 1))
