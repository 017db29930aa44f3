"""Synthetic instance generators covering three coherence regimes.

- Gaussian i.i.d. rows from a spiked covariance (unbounded rows; callers
  scale them down before any private algorithm sees them),
- low-coherence planted-spectrum matrices with max row norm exactly 1,
- high-coherence stress instances where a handful of canonical-basis rows
  carry the whole top direction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .matcore import DenseMatrix
from .mech import RngStream

_SMALL_TAIL_FRAC = 0.01  # tail eigenvalues of the planted spectrum


@dataclass(frozen=True)
class GaussSpec:
    """Population spectrum sigmabar_sq (trace 1, nonincreasing) + rotation flag."""

    sigmabar_sq: tuple[float, ...]
    rotate: bool = True

    def __post_init__(self) -> None:
        vals = tuple(float(v) for v in self.sigmabar_sq)
        if len(vals) < 1:
            raise ParameterError("spectrum must have at least one entry")
        if any(v < 0.0 for v in vals):
            raise ParameterError("spectrum entries must be nonnegative")
        if any(vals[i] + 1e-12 < vals[i + 1] for i in range(len(vals) - 1)):
            raise ParameterError("spectrum must be nonincreasing")
        if abs(sum(vals) - 1.0) > 1e-12:
            raise ParameterError(f"spectrum must sum to 1, got {sum(vals)!r}")
        object.__setattr__(self, "sigmabar_sq", vals)

    @property
    def d(self) -> int:
        return len(self.sigmabar_sq)

    @property
    def kappabar(self) -> float:
        s1 = self.sigmabar_sq[0]
        if s1 == 0.0:
            raise ParameterError("top population eigenvalue is zero")
        s2 = self.sigmabar_sq[1] if self.d > 1 else 0.0
        return (s1 - s2) / s1

    @staticmethod
    def spiked(d: int, sigma1_sq: float, kappabar: float) -> "GaussSpec":
        """Spiked spectrum: given top value and relative gap, flat tail.

        sigma2_sq = (1 - kappabar) * sigma1_sq; the remaining mass
        1 - sigma1_sq - sigma2_sq is spread evenly over the other d - 2
        coordinates (it must be nonnegative and at most sigma2_sq each).
        """
        if d < 2:
            raise ParameterError("spiked spectrum needs d >= 2")
        sigma2_sq = (1.0 - kappabar) * sigma1_sq
        tail = 1.0 - sigma1_sq - sigma2_sq
        if tail < -1e-12:
            raise ParameterError("spectrum mass exceeds 1")
        rest = max(tail, 0.0) / (d - 2) if d > 2 else 0.0
        if d > 2 and rest > sigma2_sq + 1e-12:
            raise ParameterError("flat tail would exceed the second eigenvalue")
        vals = [sigma1_sq, sigma2_sq] + [rest] * (d - 2)
        # Absorb rounding into the last entry so the sum is exactly 1.
        vals[-1] += 1.0 - sum(vals)
        return GaussSpec(tuple(vals))


def random_orthogonal(dim: int, rng: RngStream) -> np.ndarray:
    """Haar-distributed orthogonal matrix: QR with sign-fixed diagonal."""
    g = rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(g)
    return q * np.sign(np.diag(r))


def _haar_columns(n: int, d: int, rng: RngStream) -> np.ndarray:
    """First d columns of a Haar orthogonal n x n matrix (n x d, orthonormal)."""
    g = rng.standard_normal((n, d))
    q, r = np.linalg.qr(g)
    return q * np.sign(np.diag(r))


def gen_gaussian_iid(
    n: int, spec: GaussSpec, rng: RngStream
) -> tuple[DenseMatrix, np.ndarray]:
    """Rows g_i = Q diag(sigmabar) z_i, z_i ~ N(0, I); returns (A, vbar1 = Q e1).

    Q is identity when spec.rotate is off.  Rows are unbounded; use
    scale_for_privacy before feeding a private algorithm.
    """
    if n < 1:
        raise ParameterError(f"n must be >= 1, got {n}")
    d = spec.d
    q = random_orthogonal(d, rng) if spec.rotate else np.eye(d)
    z = rng.standard_normal((n, d))
    sigmabar = np.sqrt(np.array(spec.sigmabar_sq))
    a = (z * sigmabar) @ q.T
    return DenseMatrix(a), q[:, 0].copy()


@dataclass
class ScaledMatrix:
    matrix: DenseMatrix
    scale: float  # the divisor L
    clip_count: int


def scale_for_privacy(a: DenseMatrix, beta: float, n_ref: int | None = None) -> ScaledMatrix:
    """Divide rows by L = 1 + sqrt(2 ln(n/beta)); clip survivors above norm 1.

    For trace-1 Gaussian rows, a row exceeds L (hence gets clipped) with
    probability at most beta; the clip count is reported so runs can
    confirm the bounded-row event held.
    """
    if not 0.0 < beta < 1.0:
        raise ParameterError(f"beta must lie in (0, 1), got {beta}")
    n = n_ref if n_ref is not None else a.n
    el = 1.0 + math.sqrt(2.0 * math.log(n / beta))
    data = a.data / el
    norms = np.sqrt(np.einsum("ij,ij->i", data, data))
    over = norms > 1.0
    clip_count = int(over.sum())
    if clip_count:
        data = data.copy()
        data[over] /= norms[over, None]
    return ScaledMatrix(DenseMatrix(data), el, clip_count)


def gen_low_coherence(
    n: int,
    d: int,
    sigma1_frac: float,
    gap: float,
    rng: RngStream,
    rotate: bool = True,
) -> DenseMatrix:
    """Planted deterministic spectrum with spread-out singular vectors.

    sigma1^2 = sigma1_frac * n, sigma2^2 = (1 - gap) * sigma1^2, tail
    eigenvalues equal and small.  The diagonal core is conjugated by
    seeded random orthogonal factors on both sides (skipped when rotate is
    off), then rescaled so the max row norm is exactly 1.
    """
    if n < d:
        raise ParameterError(f"need n >= d, got n={n}, d={d}")
    if not 0.0 < sigma1_frac < 1.0:
        raise ParameterError(f"sigma1_frac must lie in (0, 1), got {sigma1_frac}")
    if not 0.0 < gap < 1.0:
        raise ParameterError(f"gap must lie in (0, 1), got {gap}")

    s1_sq = sigma1_frac * n
    s2_sq = (1.0 - gap) * s1_sq
    tail_sq = _SMALL_TAIL_FRAC * s2_sq
    sq = np.full(d, tail_sq)
    sq[0] = s1_sq
    if d > 1:
        sq[1] = s2_sq
    if d > 1 and s2_sq < tail_sq:
        raise ParameterError("infeasible spectrum: gap leaves no room for the tail")
    sigma = np.sqrt(sq)

    if rotate:
        left = _haar_columns(n, d, rng)
        right = random_orthogonal(d, rng)
    else:
        left = np.zeros((n, d))
        left[:d, :d] = np.eye(d)
        right = np.eye(d)
    a = (left * sigma) @ right.T

    max_norm = float(np.sqrt(np.einsum("ij,ij->i", a, a)).max())
    if max_norm == 0.0:
        raise ParameterError("infeasible spectrum: generated matrix is zero")
    return DenseMatrix(a / max_norm)


def gen_high_coherence(
    n: int,
    d: int,
    rng: RngStream,
    spikes: int = 4,
    noise_norm: float = 0.05,
) -> DenseMatrix:
    """Coherence near its maximum: mu(A) close to n.

    The first `spikes` rows are e1 at norm 1 and carry the entire top
    direction (their first left singular vector has Upsilon = 1/sqrt(spikes)
    exactly).  Remaining rows are Gaussian noise of norm `noise_norm`
    confined to the coordinates 2..d so the top direction stays exact.
    """
    if n < d:
        raise ParameterError(f"need n >= d, got n={n}, d={d}")
    if not 1 <= spikes <= n:
        raise ParameterError(f"spikes must lie in [1, n], got {spikes}")
    if not 0.0 <= noise_norm <= 1.0:
        raise ParameterError(f"noise_norm must lie in [0, 1], got {noise_norm}")

    a = np.zeros((n, d))
    a[:spikes, 0] = 1.0
    rest = n - spikes
    if rest > 0 and noise_norm > 0.0 and d > 1:
        g = rng.standard_normal((rest, d - 1))
        norms = np.sqrt(np.einsum("ij,ij->i", g, g))
        norms[norms == 0.0] = 1.0
        a[spikes:, 1:] = noise_norm * g / norms[:, None]
    return DenseMatrix(a)
