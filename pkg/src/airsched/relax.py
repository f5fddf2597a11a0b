"""Lifting machinery: quadratic program data, its convex dual pair, and the
scheduling relaxation.

A nonconvex quadratically constrained program

    minimize    x' P0 x + q0' x + r0
    subject to  x' Pi x + qi' x + ri <= 0        i = 1..mc

has a Lagrangian dual that is itself an SDP in (gamma, lambda >= 0) with a
bordered-block linear matrix inequality, and the dual of THAT program is the
trace-linear relaxation over the block matrix

    [[X, x], [x', 1]] >= 0,     Tr(X Pi) + qi' x + ri <= 0.

Both are produced here in one standard container, ``SdpProblem``, which the
interior-point solver consumes: a matrix-cost minimization over one PSD
block with trace equalities and inequalities.  Maximize-form programs (the
Lagrangian dual) store the same conic data with ``sense == "max"``; the
solver reads their value off the dual side.

The scheduling relaxation ``build_sdp`` is constructed directly from the
capacity rows; ``bidual(build_qcqp(instance))`` must reproduce it, which the
tests use as a cross-check between the generic and the direct route.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .exact import build_milp
from .model import Instance


@dataclass(frozen=True, eq=False)
class QcqpProblem:
    """Quadratic objective and inequality constraint triples (P, q, r)."""

    dim: int
    p0: np.ndarray
    q0: np.ndarray
    r0: float
    constraints: tuple[tuple[np.ndarray, np.ndarray, float], ...]

    def __post_init__(self):
        _require_symmetric(self.p0, self.dim, "p0")
        if self.q0.shape != (self.dim,):
            raise ValueError("q0 has the wrong length")
        for i, (P, qv, _) in enumerate(self.constraints):
            _require_symmetric(P, self.dim, f"constraints[{i}].P")
            if qv.shape != (self.dim,):
                raise ValueError(f"constraints[{i}].q has the wrong length")

    @property
    def num_constraints(self) -> int:
        return len(self.constraints)


@dataclass
class SdpProblem:
    """Standard form: linear cost over one PSD matrix block of order ``dim``
    with trace equality/inequality constraints.

    ``offset`` is added to reported objective values.  ``sense`` is "min"
    for programs whose value is the primal minimum and "max" for programs
    stored through their conic dual (the solver then reports the dual
    objective as the value).  ``meta`` carries bookkeeping such as the map
    from merged constraint pairs back to QCQP multiplier indices.
    """

    dim: int
    cost: np.ndarray
    equalities: list[tuple[np.ndarray, float]]
    inequalities: list[tuple[np.ndarray, float]]
    sense: str = "min"
    offset: float = 0.0
    meta: dict = field(default_factory=dict)


def _require_symmetric(mat: np.ndarray, dim: int, name: str) -> None:
    if mat.shape != (dim, dim):
        raise ValueError(f"{name} must be {dim}x{dim}")
    scale = max(1.0, float(np.abs(mat).max()) if mat.size else 1.0)
    if np.abs(mat - mat.T).max(initial=0.0) > 1e-10 * scale:
        raise ValueError(f"{name} must be symmetric")


def _bordered(P: Optional[np.ndarray], qv: np.ndarray) -> np.ndarray:
    """[[P, q/2], [q'/2, 0]] so that <., Z> = Tr(X P) + q' x at unit corner."""
    p = qv.shape[0]
    F = np.zeros((p + 1, p + 1))
    if P is not None:
        F[:p, :p] = P
    F[:p, p] = qv / 2.0
    F[p, :p] = qv / 2.0
    return F


def _corner_unit(p: int) -> tuple[np.ndarray, float]:
    E = np.zeros((p + 1, p + 1))
    E[p, p] = 1.0
    return E, 1.0


def build_sdp(instance: Instance) -> SdpProblem:
    """The scheduling relaxation over Z = [[X, vec(x)], [vec(x)', 1]].

    Equalities: unit corner, diag(X) = vec(x), and one-hot row sums;
    inequalities: the active capacity rows.  Its optimal value lower-bounds
    the exact optimum.
    """
    milp = build_milp(instance)
    n, d = instance.n, instance.d
    p = n * (d + 1)
    cost = _bordered(None, milp.c.astype(float))
    equalities = [_corner_unit(p)]
    for var in range(p):
        A = np.zeros((p + 1, p + 1))
        A[var, var] = 1.0
        A[var, p] = -0.5
        A[p, var] = -0.5
        equalities.append((A, 0.0))
    for i in range(n):
        equalities.append((_bordered(None, milp.a_assign[i].astype(float)), 1.0))
    inequalities = [
        (_bordered(None, row.astype(float)), float(cap))
        for row, cap in zip(milp.a_cap, milp.b_cap)
    ]
    return SdpProblem(
        dim=p + 1,
        cost=cost,
        equalities=equalities,
        inequalities=inequalities,
        meta={"n": n, "d": d, "cap_rows": milp.cap_rows},
    )


def build_qcqp(instance: Instance) -> QcqpProblem:
    """The scheduling program as generic quadratic data.

    Linear capacity rows and one-hot row sums are carried with zero
    quadratic part (equalities as inequality pairs); integrality becomes one
    x^2 - x = 0 pair per variable.  Constraint order: capacity rows, then
    assignment pairs, then integrality pairs.
    """
    milp = build_milp(instance)
    p = milp.c.shape[0]
    zero = np.zeros((p, p))
    constraints: list[tuple[np.ndarray, np.ndarray, float]] = []
    for row, cap in zip(milp.a_cap, milp.b_cap):
        constraints.append((zero, row.astype(float), -float(cap)))
    for i in range(milp.a_assign.shape[0]):
        row = milp.a_assign[i].astype(float)
        constraints.append((zero, row, -1.0))
        constraints.append((zero, -row, 1.0))
    for var in range(p):
        P = np.zeros((p, p))
        P[var, var] = 1.0
        e = np.zeros(p)
        e[var] = 1.0
        constraints.append((P, -e, 0.0))
        constraints.append((-P, e, 0.0))
    return QcqpProblem(
        dim=p,
        p0=zero,
        q0=milp.c.astype(float),
        r0=0.0,
        constraints=tuple(constraints),
    )


def dual_function_value(qcqp: QcqpProblem, lam: np.ndarray) -> float:
    """Closed-form Lagrangian dual function g(lambda), or -inf off its domain.

    g is finite only when P(lambda) is PSD (eigenvalues above -1e-9 relative
    to the spectral norm) and q(lambda) lies in its range (pseudo-inverse
    residual below 1e-8 relative); then
    g = r(lambda) - q(lambda)' P(lambda)^+ q(lambda) / 4.
    """
    lam = np.asarray(lam, dtype=float)
    if lam.shape != (qcqp.num_constraints,):
        raise ValueError(
            f"lambda must have length {qcqp.num_constraints}, got {lam.shape}"
        )
    if lam.size and lam.min() < 0:
        raise ValueError("multipliers must be nonnegative")
    P = qcqp.p0.copy()
    qv = qcqp.q0.copy()
    r = qcqp.r0
    for li, (Pi, qi, ri) in zip(lam, qcqp.constraints):
        if li != 0.0:
            P += li * Pi
            qv += li * qi
            r += li * ri
    evals, vecs = np.linalg.eigh(0.5 * (P + P.T))
    scale = max(1.0, float(np.abs(evals).max()) if evals.size else 1.0)
    cutoff = 1e-9 * scale
    if evals.size and evals[0] < -cutoff:
        return -math.inf
    pos = evals > cutoff
    pinv_q = vecs[:, pos] @ ((vecs[:, pos].T @ qv) / evals[pos])
    if np.linalg.norm(P @ pinv_q - qv) > 1e-8 * max(1.0, float(np.linalg.norm(qv))):
        return -math.inf
    return float(r - 0.25 * qv @ pinv_q)


def _split_negation_pairs(qcqp: QcqpProblem):
    """Group adjacent exact-negation pairs (two-sided inequalities) into
    equalities; ``build_qcqp`` emits every such pair adjacently.

    Returns (merged, singles): merged entries are (P, q, r, (i_plus, i_minus))
    and singles are (P, q, r, i).
    """
    cons = qcqp.constraints
    merged, singles = [], []
    i = 0
    while i < len(cons):
        if i + 1 < len(cons):
            P1, q1, r1 = cons[i]
            P2, q2, r2 = cons[i + 1]
            if (
                np.array_equal(P2, -P1)
                and np.array_equal(q2, -q1)
                and r2 == -r1
            ):
                merged.append((P1, q1, r1, (i, i + 1)))
                i += 2
                continue
        P1, q1, r1 = cons[i]
        singles.append((P1, q1, r1, i))
        i += 1
    return merged, singles


def _block_relaxation(qcqp: QcqpProblem, sense: str) -> SdpProblem:
    p = qcqp.dim
    equalities = [_corner_unit(p)]
    eq_map: list[tuple[int, int]] = []
    merged, singles = _split_negation_pairs(qcqp)
    for P, qv, r, pair in merged:
        equalities.append((_bordered(P, qv), -r))
        eq_map.append(pair)
    inequalities = []
    in_map: list[int] = []
    for P, qv, r, idx in singles:
        inequalities.append((_bordered(P, qv), -r))
        in_map.append(idx)
    return SdpProblem(
        dim=p + 1,
        cost=_bordered(qcqp.p0, qcqp.q0),
        equalities=equalities,
        inequalities=inequalities,
        sense=sense,
        offset=qcqp.r0,
        meta={
            "num_qcqp_constraints": qcqp.num_constraints,
            "eq_pairs": eq_map,
            "ineq_singles": in_map,
        },
    )


def lagrangian_dual(qcqp: QcqpProblem) -> SdpProblem:
    """The dual SDP: maximize gamma + sum(lambda_i r_i) + r0 over the
    bordered-block LMI with lambda >= 0.

    Stored through its conic-dual data (same trace form the solver runs);
    the solver's dual variables are exactly (gamma, lambda), recoverable via
    ``qcqp_multipliers``.  Adjacent exact-negation pairs collapse to one free
    multiplier each, which changes nothing about the optimal value.
    """
    return _block_relaxation(qcqp, sense="max")


def bidual(qcqp: QcqpProblem) -> SdpProblem:
    """The trace-linear relaxation over [[X, x], [x', 1]] >= 0.

    For QCQPs built by ``build_qcqp`` the integrality pairs reduce to
    diag(X) = x equalities, so this coincides with ``build_sdp``.
    """
    return _block_relaxation(qcqp, sense="min")


def qcqp_multipliers(problem: SdpProblem, solution) -> tuple[float, np.ndarray]:
    """Map solver duals of a ``_block_relaxation`` problem back to (gamma, lambda).

    Merged pairs split their free multiplier into the positive/negative
    parts; stray negative inequality duals (feasibility noise) clamp to 0.
    """
    if "eq_pairs" not in problem.meta:
        raise ValueError("problem was not built by lagrangian_dual/bidual")
    lam = np.zeros(problem.meta["num_qcqp_constraints"])
    gamma = float(solution.equality_duals[0])
    for slot, (i_plus, i_minus) in enumerate(problem.meta["eq_pairs"], start=1):
        delta = -float(solution.equality_duals[slot])
        lam[i_plus] = max(delta, 0.0)
        lam[i_minus] = max(-delta, 0.0)
    for slot, idx in enumerate(problem.meta["ineq_singles"]):
        lam[idx] = max(float(solution.inequality_duals[slot]), 0.0)
    return gamma, lam
