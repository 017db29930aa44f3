"""Non-adaptive baselines: input perturbation and naive noisy power iteration.

Both assume rows with norm at most 1 (the same precondition as the
adaptive method) and share its RNG and linear-algebra conventions so that
head-to-head comparisons differ only in the mechanism.
"""

from __future__ import annotations

import numpy as np

from .adaptive import check_private_input
from .errors import ParameterError
from .matcore import DenseMatrix, gram, sym_eig
from .mech import PrivacyBudget, RngStream, gaussian_sigma, sample_gaussian_vec


def _sensitivity(neighbor: str) -> float:
    """Row-level sensitivity of the Gram matrix under the neighbor relation.

    add/remove-one-row: one rank-one term of Frobenius norm <= 1 changes.
    swap-one-row: two such terms, doubling the sensitivity.
    """
    if neighbor == "add_remove":
        return 1.0
    if neighbor == "swap":
        return 2.0
    raise ParameterError(f"unknown neighbor relation {neighbor!r}")


def analyze_gauss(
    a: DenseMatrix,
    budget: PrivacyBudget,
    rng: RngStream,
    noiseless: bool = False,
    neighbor: str = "add_remove",
) -> np.ndarray:
    """Top eigenvector of A^T A + E with symmetric Gaussian perturbation.

    E has iid N(0, sigma^2) entries on and above the diagonal, mirrored
    below; sigma is the Gaussian-mechanism scale for sensitivity 1 (the
    Frobenius change from one unit row).  The whole budget is spent in this
    single release; the eigenvector extraction is post-processing.
    """
    check_private_input(a)
    g = gram(a)
    if not noiseless:
        sigma = gaussian_sigma(_sensitivity(neighbor), budget)
        d = a.d
        noise = sigma * rng.standard_normal((d, d))
        upper = np.triu(noise)
        g = g + upper + np.triu(noise, 1).T
    return sym_eig(g).vectors[:, 0].copy()


def noisy_power_naive(
    a: DenseMatrix,
    iterations: int,
    per_iter: PrivacyBudget,
    rng: RngStream,
    noiseless: bool = False,
    neighbor: str = "add_remove",
) -> np.ndarray:
    """Power iteration with worst-case per-step Gaussian noise.

    Each step applies the full Gram matrix and adds N(0, sigma^2 I) with
    sigma calibrated to sensitivity 1 (no leverage filtering), then
    normalizes.  Composes as `iterations` Gaussian mechanisms.
    """
    if iterations < 1:
        raise ParameterError(f"iterations must be >= 1, got {iterations}")
    check_private_input(a)
    g = gram(a)
    sigma = 0.0 if noiseless else gaussian_sigma(_sensitivity(neighbor), per_iter)
    x = rng.standard_normal(a.d)
    for _ in range(iterations):
        x = g @ x + sample_gaussian_vec(a.d, sigma, rng)
        norm = float(np.linalg.norm(x))
        if norm == 0.0:
            x = rng.standard_normal(a.d)
            norm = float(np.linalg.norm(x))
        x = x / norm
    return x
