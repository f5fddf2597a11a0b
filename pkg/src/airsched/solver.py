"""Dense primal-dual interior-point solver for trace-constrained SDPs.

Solves, over one positive-semidefinite block Z and nonnegative slacks s,

    minimize    <C, Z>
    subject to  <A_k, Z> = b_k          k = 1..me
                <G_l, Z> + s_l = h_l    l = 1..q,   s >= 0,  Z >= 0,

with the conic dual

    maximize    b'y - h'lam
    subject to  S = C - sum_k y_k A_k + sum_l lam_l G_l >= 0,  lam >= 0.

The method is infeasible-start path following with Nesterov-Todd scaling of
the PSD block and a Mehrotra predictor-corrector step.  Each iteration forms
the dense Schur complement over all constraints (the design envelope is one
block of order a few hundred), factors it once and reuses the factor for the
corrector.  Iterates stay strictly inside both cones via a
fraction-to-boundary rule, so the returned Z is positive definite up to
floating-point error.

Problems with ``sense == "max"`` carry maximize-form data (their value is
the conic dual optimum); the reported ``objective`` is then the dual
objective and ``dual_objective`` the primal one, so ``objective`` always
means the problem's optimal value in its own sense.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg as sla

from .relax import SdpProblem

OPTIMAL = "OPTIMAL"
MAX_ITERS = "MAX_ITERS"
INFEASIBLE_SUSPECTED = "INFEASIBLE_SUSPECTED"

# Centering floor on the Mehrotra parameter.  A pure predictor endgame can
# stop anywhere on a non-singleton optimal face; keeping some centering in
# every step makes the iterates track the central path, whose limit is the
# analytic center of that face.
_SIGMA_MIN = 0.3


@dataclass
class SolverOptions:
    """Tolerances and step control.

    ``init_scale`` sets the starting point Z = init_scale * I; callers
    solving scheduling relaxations pass (n+1)/N so the trace constraint
    holds at the start, the generic default is 1.
    """

    gap_tol: float = 1e-7
    feas_tol: float = 1e-7
    max_iters: int = 100
    step_fraction: float = 0.98
    init_scale: Optional[float] = None

    def __post_init__(self):
        if self.gap_tol <= 0 or self.feas_tol <= 0:
            raise ValueError("tolerances must be positive")
        if not 0 < self.step_fraction < 1:
            raise ValueError("step_fraction must lie in (0, 1)")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")


@dataclass
class Extraction:
    x: np.ndarray
    X: np.ndarray
    schur_residual: float


@dataclass
class SdpSolution:
    Z: np.ndarray
    x: np.ndarray
    X: np.ndarray
    objective: float
    dual_objective: float
    equality_duals: np.ndarray
    inequality_duals: np.ndarray
    status: str
    iterations: int


def extract(Z: np.ndarray) -> Extraction:
    """Split Z into (x, X) per the bordered block convention.

    x is the last column (above the corner) divided by the corner entry,
    X the leading block; ``schur_residual`` is how far X - x x' is from
    being positive semidefinite (0 when Z itself is PSD with unit corner).
    """
    Z = np.asarray(Z, dtype=float)
    if Z.ndim != 2 or Z.shape[0] != Z.shape[1]:
        raise ValueError("Z must be a square matrix")
    corner = Z[-1, -1]
    if corner <= 0:
        raise ValueError(f"corner entry Z[N,N] = {corner} must be positive")
    x = Z[:-1, -1] / corner
    X = np.array(Z[:-1, :-1])
    if X.size:
        schur = X - np.outer(x, x)
        lam_min = float(np.linalg.eigvalsh(0.5 * (schur + schur.T))[0])
    else:
        lam_min = 0.0
    return Extraction(x=x, X=X, schur_residual=max(0.0, -lam_min))


def _check_symmetric(mat: np.ndarray, name: str, N: int) -> np.ndarray:
    mat = np.asarray(mat, dtype=float)
    if mat.shape != (N, N):
        raise ValueError(f"{name} must be {N}x{N}")
    scale = max(1.0, float(np.abs(mat).max()) if mat.size else 1.0)
    if np.abs(mat - mat.T).max(initial=0.0) > 1e-10 * scale:
        raise ValueError(f"{name} must be symmetric")
    return 0.5 * (mat + mat.T)


def _max_step_psd(L: np.ndarray, direction: np.ndarray) -> float:
    """sup {a >= 0 : M + a*direction >= 0} for M = L L' positive definite."""
    B = sla.solve_triangular(L, direction, lower=True)
    B = sla.solve_triangular(L, B.T, lower=True)
    lam_min = float(np.linalg.eigvalsh(0.5 * (B + B.T))[0])
    if lam_min >= 0.0:
        return math.inf
    return 1.0 / (-lam_min)


def _max_step_nonneg(v: np.ndarray, dv: np.ndarray) -> float:
    neg = dv < 0
    if not neg.any():
        return math.inf
    return float(np.min(v[neg] / (-dv[neg])))


def _factor_spd(M: np.ndarray):
    """Cholesky with escalating diagonal jitter; the Schur complement gets
    badly conditioned near convergence."""
    dim = M.shape[0]
    base = max(1.0, float(np.trace(M)) / max(dim, 1))
    jitter = 0.0
    for _ in range(10):
        try:
            shifted = M if jitter == 0.0 else M + jitter * np.eye(dim)
            return sla.cho_factor(shifted, lower=True)
        except np.linalg.LinAlgError:
            jitter = base * 1e-14 if jitter == 0.0 else jitter * 100.0
    raise np.linalg.LinAlgError("Schur complement factorization failed")


def solve(problem: SdpProblem, opts: Optional[SolverOptions] = None) -> SdpSolution:
    """Run the interior-point iteration on ``problem``.

    Returns the best iterate found (minimal gap + residual merit).  Status
    OPTIMAL certifies the SdpSolution residual contract: per-constraint
    feasibility within ``feas_tol``, relative duality gap within ``gap_tol``
    and a positive-definite Z.

    Intended for problems that are strictly feasible or detectably not;
    there is no facial reduction.  Implicit equalities (inequalities tight
    at every feasible point) degrade the convergence rate but are handled.
    """
    if opts is None:
        opts = SolverOptions()
    N = problem.dim
    if N < 1:
        raise ValueError("matrix dimension must be >= 1")
    C = _check_symmetric(problem.cost, "cost", N)
    eq_mats = [_check_symmetric(A, f"equalities[{k}]", N)
               for k, (A, _) in enumerate(problem.equalities)]
    in_mats = [_check_symmetric(G, f"inequalities[{l}]", N)
               for l, (G, _) in enumerate(problem.inequalities)]
    b = np.array([float(v) for _, v in problem.equalities])
    h = np.array([float(v) for _, v in problem.inequalities])
    me, q = len(eq_mats), len(in_mats)
    J = me + q
    mats = np.stack(eq_mats + in_mats) if J else np.zeros((0, N, N))
    mats_flat = mats.reshape(J, N * N)
    rhs_all = np.concatenate([b, h])
    offset = float(problem.offset)

    tau = float(opts.init_scale) if opts.init_scale is not None else 1.0
    dual_scale = max(1.0, float(np.linalg.norm(C)) / math.sqrt(N))
    Z = tau * np.eye(N)
    S = dual_scale * np.eye(N)
    y = np.zeros(me)
    w = dual_scale * np.ones(q)
    s = np.maximum(1.0, np.abs(h))

    c_norm = 1.0 + float(np.linalg.norm(C))
    sf = opts.step_fraction
    cone_size = N + q

    def metrics(Z, S, y, w, s):
        vals = mats_flat @ Z.reshape(-1) if J else np.zeros(0)
        pobj = float(np.tensordot(C, Z)) + offset
        dobj = float(b @ y - h @ w) + offset
        gap_rel = abs(pobj - dobj) / (1.0 + abs(pobj))
        eq_res = float(np.max(np.abs(vals[:me] - b) / (1.0 + np.abs(b)))) if me else 0.0
        in_vals = vals[me:]
        viol = float(np.max(np.maximum(in_vals - h, 0.0) / (1.0 + np.abs(h)))) if q else 0.0
        slack_res = float(np.max(np.abs(h - in_vals - s) / (1.0 + np.abs(h)))) if q else 0.0
        Rd = C - np.tensordot(y, mats[:me], axes=1) if me else C.copy()
        if q:
            Rd = Rd + np.tensordot(w, mats[me:], axes=1)
        Rd = Rd - S
        dinf = float(np.linalg.norm(Rd)) / c_norm
        rp = rhs_all - vals
        if q:
            rp = rp.copy()
            rp[me:] -= s
        return pobj, dobj, gap_rel, eq_res, viol, slack_res, dinf, Rd, rp

    best = None
    best_merit = math.inf
    status = MAX_ITERS
    iterations = 0

    for it in range(opts.max_iters + 1):
        pobj, dobj, gap_rel, eq_res, viol, slack_res, dinf, Rd, rp = metrics(Z, S, y, w, s)
        merit = gap_rel + eq_res + viol + slack_res + dinf
        snapshot = (Z.copy(), S.copy(), y.copy(), w.copy(), s.copy(), pobj, dobj)
        if merit < best_merit:
            best_merit = merit
            best = snapshot
        converged = (
            gap_rel <= opts.gap_tol
            and eq_res <= opts.feas_tol
            and viol <= opts.feas_tol
            and slack_res <= opts.feas_tol
            and dinf <= opts.feas_tol
        )
        if converged:
            status = OPTIMAL
            best = snapshot
            break
        pinf = max(eq_res, slack_res, viol)
        if dobj > 1e8 * max(1.0, abs(pobj)) and pinf > 1e3 * opts.feas_tol:
            status = INFEASIBLE_SUSPECTED
            break
        if pobj < -1e8 * max(1.0, abs(dobj)) and dinf > 1e3 * opts.feas_tol:
            status = INFEASIBLE_SUSPECTED
            break
        if it == opts.max_iters:
            break
        iterations = it + 1

        mu = (float(np.tensordot(Z, S)) + float(s @ w)) / cone_size
        try:
            Lz = np.linalg.cholesky(Z)
            Ls = np.linalg.cholesky(S)
        except np.linalg.LinAlgError:
            break  # cone interior lost to roundoff; return best iterate
        _, sv, Vt = np.linalg.svd(Ls.T @ Lz)
        sv = np.maximum(sv, 1e-250)
        G = (Lz @ Vt.T) * (sv ** -0.5)[None, :]
        Ginv = (sv ** 0.5)[:, None] * (Vt @ sla.solve_triangular(Lz, np.eye(N), lower=True))
        W = G @ G.T

        if J:
            WmW = np.einsum("ab,jbc,cd->jad", W, mats, W, optimize=True)
            K = mats_flat @ WmW.reshape(J, -1).T
            K = 0.5 * (K + K.T)
            if q:
                K[np.arange(me, J), np.arange(me, J)] += s / w
            try:
                factor = _factor_spd(K)
            except np.linalg.LinAlgError:
                break

        def direction(Dhat, dnn):
            E = G @ Dhat @ G.T - W @ Rd @ W
            if J:
                rhs = rp - mats_flat @ E.reshape(-1)
                if q:
                    rhs[me:] -= dnn / w
                xi = sla.cho_solve(factor, rhs)
            else:
                xi = np.zeros(0)
            dy = xi[:me]
            dw = -xi[me:]
            dS = Rd - (np.tensordot(dy, mats[:me], axes=1) if me else 0.0)
            if q:
                dS = dS + np.tensordot(dw, mats[me:], axes=1)
            dS = 0.5 * (dS + dS.T)
            dZ = G @ Dhat @ G.T - W @ dS @ W
            dZ = 0.5 * (dZ + dZ.T)
            ds = dnn / w - (s / w) * dw if q else np.zeros(0)
            return dZ, dS, dy, dw, ds

        # predictor (affine scaling)
        Dhat_aff = np.diag(-sv)
        dnn_aff = -(s * w)
        dZa, dSa, dya, dwa, dsa = direction(Dhat_aff, dnn_aff)
        ap = min(1.0, sf * min(_max_step_psd(Lz, dZa), _max_step_nonneg(s, dsa)))
        ad = min(1.0, sf * min(_max_step_psd(Ls, dSa), _max_step_nonneg(w, dwa)))
        mu_aff = (
            float(np.tensordot(Z + ap * dZa, S + ad * dSa))
            + float((s + ap * dsa) @ (w + ad * dwa))
        ) / cone_size
        sigma = min(1.0, max(_SIGMA_MIN, (max(mu_aff, 0.0) / mu) ** 3)) if mu > 0 else 0.1

        # corrector (centering + second-order term)
        dZa_hat = Ginv @ dZa @ Ginv.T
        dSa_hat = G.T @ dSa @ G
        H = dZa_hat @ dSa_hat
        num = -(H + H.T)
        np.fill_diagonal(num, num.diagonal() + 2.0 * sigma * mu - 2.0 * sv ** 2)
        Dhat = num / (sv[:, None] + sv[None, :])
        dnn = sigma * mu - s * w - dsa * dwa
        dZ, dS, dy, dw, ds = direction(Dhat, dnn)

        ap = min(1.0, sf * min(_max_step_psd(Lz, dZ), _max_step_nonneg(s, ds)))
        ad = min(1.0, sf * min(_max_step_psd(Ls, dS), _max_step_nonneg(w, dw)))
        Z = Z + ap * dZ
        Z = 0.5 * (Z + Z.T)
        s = s + ap * ds
        y = y + ad * dy
        w = w + ad * dw
        S = S + ad * dS
        S = 0.5 * (S + S.T)

    Z, S, y, w, s, pobj, dobj = best
    corner = Z[-1, -1]
    if N > 1 and corner > 0:
        ext = extract(Z)
        x, X = ext.x, ext.X
    else:
        x, X = Z[:-1, -1].copy(), np.array(Z[:-1, :-1])
    primal_value, dual_value = pobj, dobj
    if problem.sense == "max":
        primal_value, dual_value = dobj, pobj
    return SdpSolution(
        Z=Z,
        x=x,
        X=X,
        objective=primal_value,
        dual_objective=dual_value,
        equality_duals=y,
        inequality_duals=w,
        status=status,
        iterations=iterations,
    )
