"""The discovery objective: smoothed rank plus weighted smoothed trace,
with reconstruction and induced-covariance constraint residuals.

The rank of D is approximated by the smoothed-L0 surrogate
sum_i (1 - exp(-s_i^2 / sigma^2)) over its singular values, and the
trace-support term applies the same surrogate to the diagonal. Both
constraints enter through squared hinges: a residual only contributes
once it exceeds its slack epsilon. Analytic gradients are provided and
are checked against finite differences in the test suite.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .scm_core import _matrix_entries

__all__ = [
    "EPS_REL",
    "Hyperparams",
    "ObjectiveBreakdown",
    "resolve_epsilons",
    "smoothed_rank",
    "smoothed_trace",
    "residuals",
    "objective",
    "gradient",
]

# Relative scale for the default constraint slacks. eps1 covers the
# reconstruction residual ||X - DX||_F^2, whose natural size is
# n * m * mean-variance; eps2 covers the covariance residual, whose
# natural size is ||Sigma||_F^2. Keeping the factor this small makes the
# constraints behave like equalities, which is what separates the true
# structure from the many loosely-fitting dense matrices: with a looser
# slack, whole families of wrong supports become feasible and the rank
# term alone cannot tell them apart.
EPS_REL = 1e-8


@dataclass(frozen=True)
class Hyperparams:
    """Algorithm hyperparameters.

    sigma is the smoothing width of the rank/trace surrogates, lam the
    trace weight, tau the per-row sparsity budget, iterations the number
    of solve-threshold repetitions per restart, and restarts the number
    of random re-initializations. eps1/eps2 are the constraint slacks;
    leave them None to resolve data-relative defaults at solve time.
    """

    sigma: float = 0.3
    lam: float = 5.0
    tau: int = 2
    eps1: float | None = None
    eps2: float | None = None
    iterations: int = 5
    restarts: int = 20

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if self.lam < 0:
            raise ValueError(f"lam must be nonnegative, got {self.lam}")
        if self.tau < 1:
            raise ValueError(f"tau must be a positive integer, got {self.tau}")
        for name in ("eps1", "eps2"):
            v = getattr(self, name)
            if v is not None and v < 0:
                raise ValueError(f"{name} must be nonnegative, got {v}")
        if self.iterations < 1:
            raise ValueError(f"iterations must be positive, got {self.iterations}")
        if self.restarts < 1:
            raise ValueError(f"restarts must be positive, got {self.restarts}")

    def with_resolved_epsilons(self, X: np.ndarray, Sigma: np.ndarray) -> "Hyperparams":
        eps1, eps2 = resolve_epsilons(self, X, Sigma)
        return replace(self, eps1=eps1, eps2=eps2)

    def to_json(self) -> dict:
        return {
            "sigma": self.sigma,
            "lambda": self.lam,
            "tau": self.tau,
            "eps1": self.eps1,
            "eps2": self.eps2,
            "iterations": self.iterations,
            "restarts": self.restarts,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Hyperparams":
        kwargs = dict(obj)
        if "lambda" in kwargs:
            kwargs["lam"] = kwargs.pop("lambda")
        return cls(**kwargs)


@dataclass(frozen=True)
class ObjectiveBreakdown:
    """The objective value split into its four ingredients."""

    smoothed_rank: float
    smoothed_trace: float
    recon_residual: float
    cov_residual: float
    total: float

    def to_json(self) -> dict:
        return {
            "smoothed_rank": self.smoothed_rank,
            "smoothed_trace": self.smoothed_trace,
            "recon_residual": self.recon_residual,
            "cov_residual": self.cov_residual,
            "total": self.total,
        }


def resolve_epsilons(hp: Hyperparams, X: np.ndarray, Sigma: np.ndarray) -> tuple[float, float]:
    """Effective constraint slacks: explicit values pass through, None
    becomes EPS_REL * n * m * mean(variance) for the reconstruction side
    and EPS_REL * ||Sigma||_F^2 for the covariance side."""
    n, m = X.shape
    if hp.eps1 is None:
        eps1 = EPS_REL * n * m * float(np.mean(np.diag(Sigma)))
    else:
        eps1 = float(hp.eps1)
    if hp.eps2 is None:
        eps2 = EPS_REL * float(np.sum(Sigma * Sigma))
    else:
        eps2 = float(hp.eps2)
    return eps1, eps2


def _surrogate(values: np.ndarray, sigma: float) -> float:
    return float(np.sum(1.0 - np.exp(-(values * values) / (sigma * sigma))))


def smoothed_rank(D: np.ndarray, sigma: float) -> float:
    """sum_i (1 - exp(-s_i^2/sigma^2)) over the singular values of D.
    Approaches rank(D) as sigma shrinks."""
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    s = np.linalg.svd(_matrix_entries(D), compute_uv=False)
    return _surrogate(s, sigma)


def smoothed_trace(D: np.ndarray, sigma: float) -> float:
    """Same surrogate applied to the diagonal entries of D; counts how
    many diagonal entries are far from zero."""
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    return _surrogate(np.diag(_matrix_entries(D)), sigma)


def _check_dims(D, X, Sigma, sigma_diag):
    n = D.shape[0]
    if D.shape != (n, n):
        raise ValueError(f"D must be square, got {D.shape}")
    if X.shape[0] != n:
        raise ValueError(f"X has {X.shape[0]} rows, D is {n}x{n}")
    if Sigma.shape != (n, n):
        raise ValueError(f"Sigma shape {Sigma.shape} does not match n={n}")
    if sigma_diag.shape != (n,):
        raise ValueError(f"sigma_diag shape {sigma_diag.shape} does not match n={n}")


def residuals(D, X, Sigma, sigma_diag) -> tuple[float, float]:
    """Squared constraint residuals (||X - DX||_F^2,
    ||Sigma - D diag(sigma_diag) D^T||_F^2)."""
    D = _matrix_entries(D)
    X = np.asarray(X, dtype=float)
    Sigma = np.asarray(Sigma, dtype=float)
    sd = np.asarray(sigma_diag, dtype=float)
    _check_dims(D, X, Sigma, sd)
    E = X - D @ X
    recon = float(np.sum(E * E))
    R = Sigma - (D * sd) @ D.T
    cov = float(np.sum(R * R))
    return recon, cov


def objective(D, X, Sigma, sigma_diag, hp: Hyperparams, mu1: float, mu2: float) -> ObjectiveBreakdown:
    """Penalized objective: smoothed_rank + lam * smoothed_trace plus
    squared-hinge penalties mu * max(0, residual - eps)^2 for each
    constraint."""
    if mu1 < 0 or mu2 < 0:
        raise ValueError("penalty weights must be nonnegative")
    D = _matrix_entries(D)
    eps1, eps2 = resolve_epsilons(hp, np.asarray(X, dtype=float), np.asarray(Sigma, dtype=float))
    rank = smoothed_rank(D, hp.sigma)
    trace = smoothed_trace(D, hp.sigma)
    recon, cov = residuals(D, X, Sigma, sigma_diag)
    # NaN residuals must poison the total, so the hinge cannot use
    # Python's max (max(0.0, nan) is 0.0)
    h1 = float(np.maximum(0.0, recon - eps1))
    h2 = float(np.maximum(0.0, cov - eps2))
    total = rank + hp.lam * trace + mu1 * h1 * h1 + mu2 * h2 * h2
    return ObjectiveBreakdown(
        smoothed_rank=rank,
        smoothed_trace=trace,
        recon_residual=recon,
        cov_residual=cov,
        total=total,
    )


def gradient(D, X, Sigma, sigma_diag, hp: Hyperparams, mu1: float, mu2: float) -> np.ndarray:
    """Analytic gradient of objective(...).total with respect to D.

    At repeated singular values the rank term's derivative is not
    unique; the subgradient induced by the computed SVD is returned.
    """
    D = _matrix_entries(D)
    X = np.asarray(X, dtype=float)
    Sigma = np.asarray(Sigma, dtype=float)
    sd = np.asarray(sigma_diag, dtype=float)
    _check_dims(D, X, Sigma, sd)
    if not np.all(np.isfinite(D)):
        raise ValueError("non-finite matrix entries")
    n = D.shape[0]
    sig2 = hp.sigma * hp.sigma
    eps1, eps2 = resolve_epsilons(hp, X, Sigma)

    U, s, Vt = np.linalg.svd(D)
    g = (U * (2.0 * s / sig2 * np.exp(-(s * s) / sig2))) @ Vt

    d = np.diag(D)
    g[np.arange(n), np.arange(n)] += hp.lam * (2.0 * d / sig2) * np.exp(-(d * d) / sig2)

    E = X - D @ X
    recon = float(np.sum(E * E))
    h1 = float(np.maximum(0.0, recon - eps1))
    if h1 > 0.0 and mu1 > 0.0:
        g += mu1 * (-4.0 * h1) * (E @ X.T)

    R = Sigma - (D * sd) @ D.T
    cov = float(np.sum(R * R))
    h2 = float(np.maximum(0.0, cov - eps2))
    if h2 > 0.0 and mu2 > 0.0:
        g += mu2 * (-8.0 * h2) * (R @ (D * sd))
    return g
