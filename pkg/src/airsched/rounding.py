"""Randomized recovery of integral schedules from relaxation output.

The relaxation returns a mean vector x and a matrix X whose difference
X - x x' is (numerically) a covariance matrix.  Schedules are recovered by
drawing Gaussian samples with that mean and covariance, projecting each
sample row-wise onto one-hot delay choices, and keeping the best
capacity-feasible result.  The projected mean itself is always evaluated as
sample 0, so the procedure never does worse than deterministic rounding.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .model import Instance, Schedule, evaluate_schedule


@dataclass(frozen=True)
class GaussianSampler:
    """Mean and a factor of the clamped covariance: factor @ factor.T ~ X - xx'."""

    mean: np.ndarray
    factor: np.ndarray  # (p, k); k = number of strictly positive eigenvalues

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        """count x p matrix of draws from N(mean, factor factor')."""
        if self.factor.shape[1] == 0:
            return np.tile(self.mean, (count, 1))
        g = rng.standard_normal((count, self.factor.shape[1]))
        return self.mean[None, :] + g @ self.factor.T


@dataclass(frozen=True)
class RoundingReport:
    samples_drawn: int
    feasible_count: int
    best: Optional[Schedule]
    best_delay: Optional[float]
    delay_histogram: dict


def make_sampler(x: np.ndarray, X: np.ndarray, tolerance: float = 1e-6) -> GaussianSampler:
    """Factor X - x x' after clamping slightly negative eigenvalues to zero.

    Eigenvalues below ``-tolerance`` mean the relaxation output is not a
    covariance matrix at all (a solver bug, not noise) and raise.
    """
    x = np.asarray(x, dtype=float)
    X = np.asarray(X, dtype=float)
    cov = X - np.outer(x, x)
    cov = 0.5 * (cov + cov.T)
    evals, vecs = np.linalg.eigh(cov)
    if evals.size and evals[0] < -tolerance:
        raise ValueError(
            f"X - xx' has eigenvalue {evals[0]:.3e} below -{tolerance:.0e}; "
            "not a covariance matrix"
        )
    pos = evals > 0.0
    factor = vecs[:, pos] * np.sqrt(evals[pos])[None, :]
    return GaussianSampler(mean=x, factor=factor)


def project_sample(u: np.ndarray, n: int, d: int) -> Schedule:
    """Euclidean projection of u onto one-hot delay rows.

    Row-wise argmax is the exact projection (||u - e_j||^2 differs across j
    only through -2 u_j); ties go to the smallest delay.
    """
    u = np.asarray(u, dtype=float).reshape(n, d + 1)
    return Schedule(tuple(int(j) for j in np.argmax(u, axis=1)))


def randomize(
    instance: Instance,
    x: np.ndarray,
    X: np.ndarray,
    num_samples: int = 100,
    seed: int = 0,
    tolerance: float = 1e-6,
) -> RoundingReport:
    """Sample, project, evaluate; keep the best feasible schedule.

    Evaluates ``num_samples`` schedules total: the projected mean as sample
    0, then Gaussian draws.  Deterministic for a fixed seed.  Infeasible
    samples are discarded (no repair); the histogram counts feasible samples
    by total delay.
    """
    if num_samples < 1:
        raise ValueError("num_samples must be >= 1")
    sampler = make_sampler(x, X, tolerance)
    rng = np.random.default_rng(seed)
    n, d = instance.n, instance.d
    draws = [np.asarray(x, dtype=float)]
    if num_samples > 1:
        draws.append(sampler.sample(rng, num_samples - 1))
    points = np.vstack(draws)

    feasible_count = 0
    best: Optional[Schedule] = None
    best_delay: Optional[float] = None
    histogram: dict = {}
    for row in points:
        schedule = project_sample(row, n, d)
        result = evaluate_schedule(instance, schedule)
        if not result.feasible:
            continue
        feasible_count += 1
        delay = result.total_delay
        histogram[delay] = histogram.get(delay, 0) + 1
        if best_delay is None or delay < best_delay:
            best, best_delay = schedule, delay
    return RoundingReport(
        samples_drawn=num_samples,
        feasible_count=feasible_count,
        best=best,
        best_delay=best_delay,
        delay_histogram=histogram,
    )


def histogram_csv(report: RoundingReport) -> str:
    """Figure-style export: one ``delay,count`` row per observed value."""
    lines = ["delay,count"]
    for delay in sorted(report.delay_histogram):
        lines.append(f"{delay},{report.delay_histogram[delay]}")
    return "\n".join(lines) + "\n"
