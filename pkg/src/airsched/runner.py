"""Pipeline orchestration: one entry point per run mode, plus benchmark sweeps.

A run takes an instance and a mode:

* ``exact``      - brute-force oracle only;
* ``sdp``        - relaxation lower bound via the interior-point solver;
* ``sdp+round``  - relaxation followed by randomized rounding.

Results are summarized in a ``RunRecord`` whose fields match the benchmark
CSV header ``m,n,T,d,seed,mode,wall_s,sdp_bound,oracle,best_rounded,status``.
Wall time is measured around the optimization calls only (enumeration, SDP
solve, rounding), never around I/O or problem assembly.

An optional objective perturbation (i.i.d. uniform [0, eps) added to the
delay weights) breaks symmetric optima.  The perturbed weights are used in
the SDP only; rounded schedules are always evaluated against the original
integral weights.  A rounded schedule is certified globally optimal when its
delay equals ceil(bound - 1e-6), where the bound is the SDP value minus
n*eps under perturbation (the perturbation adds at most eps per flight, so
that correction keeps the bound valid for the unperturbed problem).
"""

from __future__ import annotations

import csv
import io
import math
import time
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import solver
from .exact import EnumerationBudgetError, enumerate_optimal
from .model import Instance, generate_instance
from .relax import build_sdp
from .rounding import RoundingReport, randomize

CSV_HEADER = ["m", "n", "T", "d", "seed", "mode", "wall_s",
              "sdp_bound", "oracle", "best_rounded", "status"]

MODES = ("exact", "sdp", "sdp+round")

STATUS_INFEASIBLE = "INFEASIBLE"
STATUS_BUDGET_EXCEEDED = "BUDGET_EXCEEDED"


@dataclass
class RunRecord:
    m: int
    n: int
    T: int
    d: int
    seed: Optional[int]
    mode: str
    wall_s: float
    sdp_bound: Optional[float]
    oracle: Optional[float]
    best_rounded: Optional[float]
    status: str


@dataclass
class RunResult:
    """RunRecord plus the artifacts the record summarizes."""

    record: RunRecord
    schedule: Optional[tuple[int, ...]] = None
    x: Optional[np.ndarray] = None
    X: Optional[np.ndarray] = None
    schur_residual: Optional[float] = None
    rounding: Optional[RoundingReport] = None
    certified: bool = False


def perturb_weights(instance: Instance, eps: float, seed: int) -> Instance:
    """Add i.i.d. uniform [0, eps) noise to every objective weight."""
    if eps < 0:
        raise ValueError("perturbation must be nonnegative")
    rng = np.random.default_rng(seed)
    w = instance.weights() + rng.uniform(0.0, eps, size=(instance.n, instance.d + 1))
    return instance.with_weights(w)


def certified_optimal(best_delay: Optional[float], bound: float) -> bool:
    """Delay totals are integral, so matching ceil(bound - 1e-6) is a proof."""
    if best_delay is None:
        return False
    return best_delay == math.ceil(bound - 1e-6)


def run_solve(
    instance: Instance,
    mode: str,
    seed: Optional[int] = None,
    gap_tol: float = 1e-7,
    feas_tol: float = 1e-7,
    max_iters: int = 100,
    samples: int = 100,
    round_seed: int = 0,
    perturb: Optional[float] = None,
    perturb_seed: int = 0,
    budget: int = 10_000_000,
) -> RunResult:
    """Run one mode on one instance.  ``seed`` only labels the record."""
    if mode not in MODES:
        raise ValueError(f"unknown mode '{mode}'")
    record = RunRecord(
        m=instance.m, n=instance.n, T=instance.T, d=instance.d,
        seed=seed, mode=mode, wall_s=0.0,
        sdp_bound=None, oracle=None, best_rounded=None, status="",
    )
    result = RunResult(record=record)

    if mode == "exact":
        t0 = time.perf_counter()
        exact = enumerate_optimal(instance, budget=budget)
        record.wall_s = time.perf_counter() - t0
        if exact is None:
            record.status = STATUS_INFEASIBLE
        else:
            record.oracle = exact.total_delay
            record.status = solver.OPTIMAL
            result.schedule = exact.schedule.delays
        return result

    solve_instance = instance
    eps = 0.0
    if perturb is not None and perturb > 0:
        eps = perturb
        solve_instance = perturb_weights(instance, eps, perturb_seed)
    problem = build_sdp(solve_instance)
    opts = solver.SolverOptions(
        gap_tol=gap_tol, feas_tol=feas_tol, max_iters=max_iters,
        init_scale=(instance.n + 1) / problem.dim,
    )
    t0 = time.perf_counter()
    solution = solver.solve(problem, opts)
    record.wall_s = time.perf_counter() - t0
    record.sdp_bound = solution.objective
    record.status = solution.status
    result.x = solution.x
    result.X = solution.X
    ext = solver.extract(solution.Z) if solution.Z[-1, -1] > 0 else None
    result.schur_residual = ext.schur_residual if ext else None

    if mode == "sdp+round" and solution.status == solver.OPTIMAL:
        # only a converged solve yields a valid mean/covariance to sample
        t0 = time.perf_counter()
        report = randomize(
            instance, solution.x, solution.X,
            num_samples=samples, seed=round_seed,
        )
        record.wall_s += time.perf_counter() - t0
        result.rounding = report
        record.best_rounded = report.best_delay
        if report.best is not None:
            result.schedule = report.best.delays
        # the perturbation inflates the bound by at most n*eps
        result.certified = certified_optimal(
            report.best_delay, record.sdp_bound - instance.n * eps
        )
    return result


def run_bench(
    n_values: list[int],
    seeds: list[int],
    modes: list[str],
    m: int = 50,
    T: int = 30,
    d: int = 2,
    capacity_range: tuple[int, int] = (1, 3),
    route_length_range: tuple[int, int] = (3, 8),
    gap_tol: float = 1e-7,
    max_iters: int = 100,
    samples: int = 100,
    budget: int = 10_000_000,
) -> list[RunRecord]:
    """Sweep a grid of instance sizes; failures land in the status column."""
    if not n_values or not seeds or not modes:
        raise ValueError("bench grid must be nonempty (n_values, seeds, modes)")
    for mode in modes:
        if mode not in MODES:
            raise ValueError(f"unknown mode '{mode}'")
    records = []
    for n in n_values:
        for seed in seeds:
            instance = generate_instance(
                m=m, n=n, T=T, d=d,
                capacity_range=capacity_range,
                route_length_range=route_length_range,
                seed=seed,
            )
            for mode in modes:
                try:
                    result = run_solve(
                        instance, mode, seed=seed,
                        gap_tol=gap_tol, max_iters=max_iters,
                        samples=samples, budget=budget,
                    )
                    records.append(result.record)
                except EnumerationBudgetError:
                    records.append(RunRecord(
                        m=m, n=n, T=T, d=d, seed=seed, mode=mode,
                        wall_s=0.0, sdp_bound=None, oracle=None,
                        best_rounded=None, status=STATUS_BUDGET_EXCEEDED,
                    ))
                except Exception as exc:  # keep sweeping, mark the row
                    records.append(RunRecord(
                        m=m, n=n, T=T, d=d, seed=seed, mode=mode,
                        wall_s=0.0, sdp_bound=None, oracle=None,
                        best_rounded=None, status=f"ERROR({type(exc).__name__})",
                    ))
    return records


def records_to_csv(records: list[RunRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in records:
        writer.writerow([
            r.m, r.n, r.T, r.d,
            "" if r.seed is None else r.seed,
            r.mode,
            f"{r.wall_s:.6f}",
            "" if r.sdp_bound is None else f"{r.sdp_bound:.9g}",
            "" if r.oracle is None else r.oracle,
            "" if r.best_rounded is None else r.best_rounded,
            r.status,
        ])
    return buf.getvalue()
