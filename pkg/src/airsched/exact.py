"""Exact side of the pipeline: binary-program data and a brute-force oracle.

The delay choice is a binary matrix x with one-hot rows; columns are ordered
flight-major, so variable (i, j) sits at column i*(d+1) + j.  That vec
convention is shared by every module downstream.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .model import Instance, Schedule, expanded_occupancy


class EnumerationBudgetError(RuntimeError):
    """The schedule space exceeds the configured enumeration budget."""


@dataclass(frozen=True)
class MilpData:
    """Matrix form of the scheduling program.

    ``a_cap`` has one 0/1 row per (sector, period) pair that some delayed
    flight can occupy, ordered sector-major then time; ``b_cap`` holds the
    matching capacities.  ``a_assign`` is the row-sum matrix forcing one
    delay per flight and ``c`` the flattened objective weights.
    """

    a_cap: np.ndarray
    b_cap: np.ndarray
    a_assign: np.ndarray
    c: np.ndarray
    cap_rows: tuple[tuple[int, int], ...]  # (sector, period) label per a_cap row


@dataclass(frozen=True)
class ExactResult:
    schedule: Schedule
    total_delay: float


def build_milp(instance: Instance, keep_zero_rows: bool = False) -> MilpData:
    """Assemble capacity rows, assignment rows and the objective vector.

    Rows where no flight can ever occupy the (sector, period) cell are
    dropped unless ``keep_zero_rows`` is set (the full m*(T+d) grid is then
    emitted, still sector-major then time).
    """
    n, d, m, T = instance.n, instance.d, instance.m, instance.T
    p = n * (d + 1)
    width = T + d
    full = np.zeros((m * width, p), dtype=np.int64)
    for i, route in enumerate(instance.routes):
        for j in range(d + 1):
            occ = expanded_occupancy(route, j, m, T, d)
            full[:, i * (d + 1) + j] = occ.reshape(-1)  # row-major: sector-major then time
    caps = np.asarray(instance.capacities, dtype=np.int64)
    b_full = np.repeat(caps, width)
    labels = [(k + 1, t + 1) for k in range(m) for t in range(width)]
    if keep_zero_rows:
        keep = np.ones(m * width, dtype=bool)
    else:
        keep = full.any(axis=1)
    a_assign = np.zeros((n, p), dtype=np.int64)
    for i in range(n):
        a_assign[i, i * (d + 1) : (i + 1) * (d + 1)] = 1
    return MilpData(
        a_cap=full[keep],
        b_cap=b_full[keep],
        a_assign=a_assign,
        c=instance.weights().reshape(-1),
        cap_rows=tuple(lbl for lbl, k in zip(labels, keep) if k),
    )


def enumerate_optimal(
    instance: Instance, budget: int = 10_000_000
) -> Optional[ExactResult]:
    """Depth-first search over all delay vectors; the ground-truth oracle.

    Returns a minimum-cost feasible schedule or ``None`` if no delay vector
    satisfies the capacities.  Ties break to the lexicographically smallest
    delay vector.  Loads are maintained incrementally and a branch is pruned
    as soon as its partial cost reaches the incumbent or a capacity breaks.
    """
    n, d, m, T = instance.n, instance.d, instance.m, instance.T
    if (d + 1) ** n > budget:
        raise EnumerationBudgetError(
            f"(d+1)^n = {(d + 1) ** n} exceeds budget {budget}"
        )
    weights = instance.weights()
    caps = np.asarray(instance.capacities, dtype=np.int64)
    # cells[i][j]: (sector, period) indices hit by flight i under delay j
    cells = [
        [
            list(zip(*np.nonzero(expanded_occupancy(r, j, m, T, d))))
            for j in range(d + 1)
        ]
        for r in instance.routes
    ]
    loads = np.zeros((m, T + d), dtype=np.int64)
    best_cost = np.inf
    best_delays: Optional[tuple[int, ...]] = None
    delays = [0] * n

    def place(i: int, j: int) -> bool:
        """Add flight i's occupancy at delay j; roll back and fail on overload."""
        placed = []
        for cell in cells[i][j]:
            loads[cell] += 1
            placed.append(cell)
            if loads[cell] > caps[cell[0]]:
                for c in placed:
                    loads[c] -= 1
                return False
        return True

    def unplace(i: int, j: int) -> None:
        for cell in cells[i][j]:
            loads[cell] -= 1

    def dfs(i: int, partial_cost: float) -> None:
        nonlocal best_cost, best_delays
        if i == n:
            # strict improvement only: first-found keeps the lex-min optimum
            if partial_cost < best_cost:
                best_cost = partial_cost
                best_delays = tuple(delays)
            return
        for j in range(d + 1):
            cost = partial_cost + weights[i, j]
            if cost >= best_cost:
                continue
            if not place(i, j):
                continue
            delays[i] = j
            dfs(i + 1, cost)
            unplace(i, j)

    dfs(0, 0.0)
    if best_delays is None:
        return None
    schedule = Schedule(best_delays)
    total = (
        int(sum(best_delays))
        if instance.objective_weights is None
        else float(best_cost)
    )
    return ExactResult(schedule=schedule, total_delay=total)
