"""Multi-restart recovery of the structural matrix.

Each restart starts from a random dense matrix and alternates two moves:
solve the relaxed problem (minimize the rank/trace surrogate subject to
the reconstruction and covariance residuals staying within their
slacks), then keep only the tau largest-magnitude entries per row. The
sparse candidate after each threshold step is scored with the penalized
objective at a fixed reference weight, and the best-scoring candidate
across all restarts wins.

The relaxed solve is a dense SQP: at each iterate a quadratic model
with a damped-BFGS Hessian is minimized subject to the two linearized
constraints (an active-set enumeration suffices for two inequalities),
and an l1 merit function with Armijo backtracking accepts the step.
Being a local method matters here: each restart converges to a nearby
stationary point instead of funneling into one global attractor, which
is what keeps the restart population diverse enough to visit the true
structure's basin.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .datagen import Dataset, center
from .objective import Hyperparams, objective
from .scm_core import StructuralMatrix

__all__ = [
    "SolverControls",
    "RestartRecord",
    "DiscoveryResult",
    "SolverAbort",
    "solve_relaxed",
    "row_threshold",
    "objective_of",
    "slcd",
]

FORMAT_VERSION = 1


@dataclass(frozen=True)
class SolverControls:
    """Knobs of the relaxed solve and the restart loop.

    max_inner_steps caps SQP iterations per solve call. backtrack_factor
    and armijo_c drive the merit line search; step_init is the initial
    trial step of the constraint-restoration fallback used when the
    quadratic subproblem has no usable solution. grad_tol is the
    stationarity tolerance. The penalty fields set the reference weight
    at which candidates are compared: mu_init * growth^(rounds - 1),
    1000 with the defaults; mu_init also seeds the merit weight. seed
    feeds the restart initializations.
    """

    max_inner_steps: int = 500
    step_init: float = 1e-2
    backtrack_factor: float = 0.5
    armijo_c: float = 1e-4
    penalty_mu_init: float = 1.0
    penalty_growth: float = 10.0
    penalty_outer_rounds: int = 4
    grad_tol: float = 1e-6
    seed: int = 0

    def __post_init__(self):
        if self.max_inner_steps < 1:
            raise ValueError("max_inner_steps must be positive")
        if not 0 < self.backtrack_factor < 1:
            raise ValueError("backtrack_factor must be in (0, 1)")
        if not 0 < self.armijo_c < 1:
            raise ValueError("armijo_c must be in (0, 1)")
        if not self.step_init > 0:
            raise ValueError("step_init must be positive")
        if not self.penalty_growth > 1:
            raise ValueError("penalty_growth must exceed 1")
        if self.penalty_outer_rounds < 1:
            raise ValueError("penalty_outer_rounds must be positive")
        if not self.grad_tol > 0:
            raise ValueError("grad_tol must be positive")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")

    @property
    def final_penalty_weight(self) -> float:
        return self.penalty_mu_init * self.penalty_growth ** (self.penalty_outer_rounds - 1)

    def to_json(self) -> dict:
        return {
            "max_inner_steps": self.max_inner_steps,
            "step_init": self.step_init,
            "backtrack_factor": self.backtrack_factor,
            "armijo_c": self.armijo_c,
            "penalty_mu_init": self.penalty_mu_init,
            "penalty_growth": self.penalty_growth,
            "penalty_outer_rounds": self.penalty_outer_rounds,
            "grad_tol": self.grad_tol,
            "seed": self.seed,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "SolverControls":
        return cls(**obj)


@dataclass(frozen=True)
class RestartRecord:
    """Diagnostics for one restart: its best candidate's score and
    residuals, the running minimum after it, and the work spent."""

    index: int
    seed: int
    objective: float
    running_min: float
    recon_residual: float
    cov_residual: float
    iterations: int
    wall_ms: float
    aborted: bool = False
    message: str = ""

    def to_json(self) -> dict:
        def clean(v):
            return None if not math.isfinite(v) else v

        return {
            "index": self.index,
            "seed": self.seed,
            "objective": clean(self.objective),
            "running_min": clean(self.running_min),
            "recon_residual": clean(self.recon_residual),
            "cov_residual": clean(self.cov_residual),
            "iterations": self.iterations,
            "wall_ms": self.wall_ms,
            "aborted": self.aborted,
            "message": self.message,
        }


@dataclass(frozen=True)
class DiscoveryResult:
    """Estimate returned by slcd: the winning matrix, its score, the
    per-restart log, and the configuration that produced it."""

    D_opt: np.ndarray
    J_min: float
    restarts: list[RestartRecord] = field(default_factory=list)
    hp: Hyperparams = Hyperparams()
    controls: SolverControls = SolverControls()
    wall_ms: float = 0.0

    def to_json(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "estimated_matrix": StructuralMatrix(np.asarray(self.D_opt)).to_json(),
            "j_min": self.J_min,
            "hyperparams": self.hp.to_json(),
            "controls": self.controls.to_json(),
            "restarts": [r.to_json() for r in self.restarts],
            "wall_ms": self.wall_ms,
        }


class SolverAbort(RuntimeError):
    """Raised when every restart failed to produce a finite candidate."""

    def __init__(self, message: str, records: list[RestartRecord]):
        super().__init__(message)
        self.records = records


class _Workspace:
    """Precomputed pieces shared by every solve on one dataset: the Gram
    matrix G = X X^T (so the reconstruction residual is a trace form
    independent of m in cost), the covariance, and the resolved slacks."""

    def __init__(self, X: np.ndarray, Sigma: np.ndarray, sigma_diag: np.ndarray,
                 hp: Hyperparams):
        self.n = X.shape[0]
        self.G = X @ X.T
        self.Sigma = np.asarray(Sigma, dtype=float)
        self.sd = np.asarray(sigma_diag, dtype=float)
        self.I = np.eye(self.n)
        self.sigma = hp.sigma
        self.lam = hp.lam
        from .objective import resolve_epsilons

        self.eps1, self.eps2 = resolve_epsilons(hp, X, self.Sigma)

    def fg(self, z: np.ndarray) -> tuple[float, np.ndarray]:
        """Smooth part (rank + lam * trace surrogates) and its gradient."""
        n = self.n
        D = z.reshape(n, n)
        U, s, Vt = np.linalg.svd(D)
        sig2 = self.sigma * self.sigma
        f = float(np.sum(1.0 - np.exp(-(s * s) / sig2)))
        d = np.diag(D)
        f += self.lam * float(np.sum(1.0 - np.exp(-(d * d) / sig2)))
        g = (U * (2.0 * s / sig2 * np.exp(-(s * s) / sig2))) @ Vt
        g[np.arange(n), np.arange(n)] += self.lam * (2.0 * d / sig2) * np.exp(-(d * d) / sig2)
        return f, g.ravel()

    def cons(self, z: np.ndarray) -> tuple[np.ndarray, list[np.ndarray]]:
        """Constraint values (residual minus slack) and their gradients."""
        n = self.n
        D = z.reshape(n, n)
        E = self.I - D
        recon = float(np.sum((E @ self.G) * E))
        R = self.Sigma - (D * self.sd) @ D.T
        cov = float(np.sum(R * R))
        a1 = (-2.0 * (E @ self.G)).ravel()
        a2 = (-4.0 * (R @ (D * self.sd))).ravel()
        return np.array([recon - self.eps1, cov - self.eps2]), [a1, a2]


def _qp_solve(B, g, A, c):
    """min g.p + 0.5 p.B.p subject to A[i].p + c[i] <= 0, by active-set
    enumeration (at most two constraints). Returns (step, multipliers)
    or (None, None) when B is not usable."""
    k = len(A)
    try:
        Bf = np.linalg.cholesky(B)
    except np.linalg.LinAlgError:
        return None, None

    def bsolve(v):
        return np.linalg.solve(Bf.T, np.linalg.solve(Bf, v))

    p0 = -bsolve(g)
    if all(A[i] @ p0 + c[i] <= 1e-10 * max(1.0, abs(c[i])) for i in range(k)):
        return p0, np.zeros(k)
    best = None
    for size in (1, 2):
        if size > k:
            break
        for act in combinations(range(k), size):
            Am = np.array([A[i] for i in act])
            BiA = np.array([bsolve(Am[j]) for j in range(size)]).T
            S = Am @ BiA
            rhs = np.array([c[i] for i in act]) + Am @ p0
            try:
                lam = np.linalg.solve(S, rhs)
            except np.linalg.LinAlgError:
                continue
            if np.any(lam < -1e-12):
                continue
            p = p0 - BiA @ lam
            ok = True
            for i in range(k):
                if i not in act and A[i] @ p + c[i] > 1e-8 * max(1.0, abs(c[i])):
                    ok = False
                    break
            lams = np.zeros(k)
            for j, i in enumerate(act):
                lams[i] = lam[j]
            if ok:
                return p, lams
            if best is None:
                best = (p, lams)
    if best is not None:
        return best
    return None, None


def _sqp(ws: _Workspace, D0: np.ndarray, controls: SolverControls) -> tuple[np.ndarray, int]:
    """One local solve of the relaxed problem from D0. Returns the final
    iterate and the number of SQP iterations consumed."""
    n = ws.n
    nv = n * n
    z = np.asarray(D0, dtype=float).ravel().copy()
    B = np.eye(nv)
    nu = controls.penalty_mu_init

    f, g = ws.fg(z)
    c, A = ws.cons(z)
    iters = 0
    if not (np.isfinite(f) and np.all(np.isfinite(c))):
        return z.reshape(n, n), iters
    for it in range(controls.max_inner_steps):
        iters = it + 1
        p, lams = _qp_solve(B, g, A, c)
        if p is None:
            B = np.eye(nv)
            p, lams = _qp_solve(B, g, A, c)
        alpha0 = 1.0
        if p is None:
            viol = max(c[0], 0.0) + max(c[1], 0.0)
            if viol <= 0.0:
                break
            p = -(max(c[0], 0.0) * np.asarray(A[0]) + max(c[1], 0.0) * np.asarray(A[1]))
            pn = np.linalg.norm(p)
            if pn < 1e-300:
                break
            p /= pn
            lams = np.zeros(2)
            alpha0 = controls.step_init
        nu = max(nu, 2.0 * float(np.max(np.abs(lams))) + 1.0)
        viol0 = max(c[0], 0.0) + max(c[1], 0.0)
        phi0 = f + nu * viol0
        dphi = float(g @ p) - nu * viol0
        if dphi > -1e-16:
            dphi = -1e-16
        pn = float(np.linalg.norm(p))
        if pn < controls.grad_tol and viol0 <= 0.0:
            break
        alpha = alpha0
        ok = False
        while alpha > 1e-16:
            zn = z + alpha * p
            fn, gn = ws.fg(zn)
            cn, An = ws.cons(zn)
            phin = fn + nu * (max(cn[0], 0.0) + max(cn[1], 0.0))
            if np.isfinite(phin) and phin <= phi0 + controls.armijo_c * alpha * dphi:
                ok = True
                break
            alpha *= controls.backtrack_factor
        if not ok:
            break
        gl_old = g + lams[0] * np.asarray(A[0]) + lams[1] * np.asarray(A[1])
        gl_new = gn + lams[0] * np.asarray(An[0]) + lams[1] * np.asarray(An[1])
        s_vec = zn - z
        y_vec = gl_new - gl_old
        sBs = float(s_vec @ (B @ s_vec))
        sy = float(s_vec @ y_vec)
        if sy < 0.2 * sBs:
            theta = 0.8 * sBs / max(sBs - sy, 1e-300)
            y_vec = theta * y_vec + (1.0 - theta) * (B @ s_vec)
            sy = float(s_vec @ y_vec)
        if sy > 1e-300:
            Bs = B @ s_vec
            B = B - np.outer(Bs, Bs) / sBs + np.outer(y_vec, y_vec) / sy
        z, f, g, c, A = zn, fn, gn, cn, An
        if float(np.linalg.norm(alpha * p)) < 1e-14:
            break
    return z.reshape(n, n), iters


def solve_relaxed(D_init, X, Sigma, sigma_diag, hp: Hyperparams,
                  controls: SolverControls = SolverControls(),
                  return_info: bool = False):
    """Locally minimize the rank/trace surrogate subject to the two
    residual constraints, starting from D_init.

    The result never scores worse than D_init under the reference
    penalty weight; if the solve fails to improve, D_init is returned
    unchanged.
    """
    D_init = np.asarray(D_init, dtype=float)
    X = np.asarray(X, dtype=float)
    ws = _Workspace(X, Sigma, sigma_diag, hp)
    D, iters = _sqp(ws, D_init, controls)
    mu = controls.final_penalty_weight
    j_out = objective(D, X, Sigma, sigma_diag, hp, mu, mu).total
    j_in = objective(D_init, X, Sigma, sigma_diag, hp, mu, mu).total
    if not np.isfinite(j_out) or j_out > j_in:
        D = D_init.copy()
    if return_info:
        return D, {"iterations": iters}
    return D


def row_threshold(D, tau: int) -> np.ndarray:
    """Keep the tau largest-magnitude entries of each row, zeroing the
    rest. Ties keep the lowest column index (stable sort)."""
    D = np.asarray(D, dtype=float)
    if tau < 1:
        raise ValueError(f"tau must be at least 1, got {tau}")
    out = np.zeros_like(D)
    for i in range(D.shape[0]):
        keep = np.argsort(-np.abs(D[i]), kind="stable")[:tau]
        out[i, keep] = D[i, keep]
    return out


def objective_of(D, X, hp: Hyperparams, mu: float | None = None) -> float:
    """Penalized objective at the reference penalty weight, used to
    compare candidates. X is expected to be centered; the covariance is
    taken as X X^T / m."""
    X = np.asarray(X, dtype=float)
    Sigma = (X @ X.T) / X.shape[1]
    sd = np.diag(Sigma).copy()
    if mu is None:
        mu = SolverControls().final_penalty_weight
    return objective(D, X, Sigma, sd, hp, mu, mu).total


def _as_dataset(data) -> Dataset:
    if isinstance(data, Dataset):
        return data
    return Dataset(X=np.asarray(data, dtype=float), spec_name="", seed=0, centered=False)


def slcd(data, hp: Hyperparams = Hyperparams(),
         controls: SolverControls = SolverControls()) -> DiscoveryResult:
    """Recover a structural matrix from data.

    Runs hp.restarts random initializations; each alternates
    hp.iterations rounds of relaxed solve and row thresholding. Every
    post-threshold candidate is scored at the reference penalty weight
    and the global best is returned. Deterministic for fixed data, hp,
    and controls.seed: restart r draws its start from
    SeedSequence(entropy=controls.seed, spawn_key=(r,)).
    """
    ds = _as_dataset(data)
    if ds.m < 2:
        raise ValueError("discovery needs at least 2 samples")
    if not ds.centered:
        ds = center(ds)
    X = ds.X
    n, m = X.shape
    Sigma = (X @ X.T) / m
    sd = np.diag(Sigma).copy()
    hp_res = hp.with_resolved_epsilons(X, Sigma)
    tau_eff = min(hp_res.tau, n)
    mu = controls.final_penalty_weight
    ws = _Workspace(X, Sigma, sd, hp_res)

    t_start = time.perf_counter()
    best_j = math.inf
    best_d: np.ndarray | None = None
    records: list[RestartRecord] = []
    for r in range(hp_res.restarts):
        t0 = time.perf_counter()
        rng = np.random.default_rng(np.random.SeedSequence(entropy=controls.seed, spawn_key=(r,)))
        D = rng.uniform(-1.0, 1.0, (n, n))
        iters = 0
        local_j = math.inf
        local_d: np.ndarray | None = None
        local_res = (math.nan, math.nan)
        for _ in range(hp_res.iterations):
            D, it = _sqp(ws, D, controls)
            iters += it
            D = row_threshold(D, tau_eff)
            bd = objective(D, X, Sigma, sd, hp_res, mu, mu)
            if np.isfinite(bd.total) and bd.total < local_j:
                local_j = bd.total
                local_d = D.copy()
                local_res = (bd.recon_residual, bd.cov_residual)
        wall = (time.perf_counter() - t0) * 1000.0
        if local_d is None:
            records.append(RestartRecord(
                index=r, seed=controls.seed, objective=math.nan,
                running_min=best_j, recon_residual=math.nan,
                cov_residual=math.nan, iterations=iters, wall_ms=wall,
                aborted=True, message="no finite candidate produced",
            ))
            continue
        if local_j < best_j:
            best_j = local_j
            best_d = local_d
        records.append(RestartRecord(
            index=r, seed=controls.seed, objective=local_j,
            running_min=best_j, recon_residual=local_res[0],
            cov_residual=local_res[1], iterations=iters, wall_ms=wall,
        ))
    if best_d is None:
        raise SolverAbort("every restart aborted without a finite candidate", records)
    total_wall = (time.perf_counter() - t_start) * 1000.0
    return DiscoveryResult(
        D_opt=best_d, J_min=best_j, restarts=records,
        hp=hp_res, controls=controls, wall_ms=total_wall,
    )
