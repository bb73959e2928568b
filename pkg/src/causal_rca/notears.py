"""NOTEARS: least-squares structure learning under the trace-exponential
acyclicity constraint, solved with an augmented Lagrangian.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.optimize as sopt
from scipy.special import expit

from .dataset import BinaryDataset
from .graph import DEFAULT_OMEGA, WeightedAdjacency

log = logging.getLogger(__name__)

# exp(x) overflows float64 just above 709; trace(exp(A*A)) is bounded by d*exp(rho(A*A))
_EXP_LIMIT = 700.0


@dataclass(frozen=True)
class NotearsConfig:
    lambda1: float = 0.1
    max_outer_iter: int = 100
    h_tol: float = 1e-8
    rho_max: float = 1e16
    omega: float = DEFAULT_OMEGA
    loss: str = "l2"
    init_jitter: float = 1e-4

    def __post_init__(self):
        if self.lambda1 < 0:
            raise ValueError("lambda1 must be >= 0")
        if self.max_outer_iter < 1:
            raise ValueError("max_outer_iter must be positive")
        if not self.h_tol > 0:
            raise ValueError("h_tol must be positive")
        if not self.rho_max > 1:
            raise ValueError("rho_max must exceed 1")
        if self.init_jitter < 0:
            raise ValueError("init_jitter must be >= 0")
        if self.loss not in ("l2", "logistic"):
            raise ValueError(f"unknown loss {self.loss!r}")


@dataclass(frozen=True)
class FitResult:
    """Weighted estimate plus solver diagnostics."""

    adjacency: WeightedAdjacency
    h: float
    iterations: int
    converged: bool
    extra: dict = field(default_factory=dict)

    def diagnostics(self) -> dict:
        return {"h": self.h, "iterations": self.iterations, "converged": self.converged, **self.extra}


def initial_point(d: int, jitter: float) -> np.ndarray:
    """Zero matrix plus a fixed nonnegative off-diagonal perturbation.

    Exactly symmetric problems (two identical columns) have a symmetric
    saddle at which both solvers stall with both directions shrunk to zero;
    a deterministic perturbation lets them leave it.
    """
    a = jitter * np.random.Generator(np.random.PCG64(0)).random((d, d))
    np.fill_diagonal(a, 0.0)
    return a


def h_trexp(a: np.ndarray) -> tuple[float, np.ndarray]:
    """``tr(exp(A*A)) - d`` and its gradient ``exp(A*A)^T * 2A``."""
    a = np.asarray(a, dtype=float)
    if not np.all(np.isfinite(a)):
        raise FloatingPointError("adjacency has non-finite entries")
    sq = a * a
    # Gershgorin bound on the spectral radius of the nonnegative matrix A*A
    bound = min(sq.sum(axis=0).max(), sq.sum(axis=1).max()) if sq.size else 0.0
    if bound > _EXP_LIMIT:
        raise FloatingPointError(
            f"matrix exponential would overflow (max |entry| = {np.abs(a).max():.3g})")
    e = sla.expm(sq)
    value = float(np.trace(e) - a.shape[0])
    # tr(exp(B)) >= d for nonnegative B; clip rounding below zero
    return max(value, 0.0), e.T * a * 2.0


def loss_ls(a: np.ndarray, x: np.ndarray) -> tuple[float, np.ndarray]:
    """``1/(2M) ||X - XA||_F^2`` and its gradient ``-(1/M) X^T (X - XA)``."""
    m = x.shape[0]
    r = x - x @ a
    return 0.5 / m * float(np.sum(r * r)), -1.0 / m * (x.T @ r)


def loss_logistic(a: np.ndarray, x: np.ndarray) -> tuple[float, np.ndarray]:
    m = x.shape[0]
    z = x @ a
    value = float(np.sum(np.logaddexp(0.0, z) - x * z)) / m
    return value, x.T @ (expit(z) - x) / m


LOSSES = {"l2": loss_ls, "logistic": loss_logistic}


def prepare_data(data: BinaryDataset, loss: str = "l2") -> np.ndarray:
    """Float matrix for the solvers; the squared loss has no intercept, so
    columns are centred (not rescaled)."""
    x = data.as_float()
    if loss == "l2":
        x = x - x.mean(axis=0, keepdims=True)
    return x


def notears(data: BinaryDataset, cfg: NotearsConfig = NotearsConfig()) -> FitResult:
    if data.m < 2:
        raise ValueError("need at least two samples")
    x = prepare_data(data, cfg.loss)
    loss_fn = LOSSES[cfg.loss]
    d = data.n
    rho, alpha, h = 1.0, 0.0, np.inf

    def unpack(w):
        return (w[: d * d] - w[d * d:]).reshape(d, d)

    def objective(w):
        a = unpack(w)
        try:
            h_val, g_h = h_trexp(a)
        except FloatingPointError:
            # trial points of the line search can overshoot; reject them
            return np.inf, np.zeros_like(w)
        loss, g_loss = loss_fn(a, x)
        obj = loss + 0.5 * rho * h_val * h_val + alpha * h_val + cfg.lambda1 * w.sum()
        g_smooth = g_loss + (rho * h_val + alpha) * g_h
        return obj, np.concatenate([g_smooth + cfg.lambda1, -g_smooth + cfg.lambda1], axis=None)

    # A = P - N with P, N >= 0; diagonal pinned to zero through the bounds
    diag = np.eye(d, dtype=bool).ravel()
    bounds = [(0.0, 0.0) if on_diag else (0.0, None) for on_diag in np.tile(diag, 2)]
    w = np.concatenate([initial_point(d, cfg.init_jitter).ravel(), np.zeros(d * d)])
    n_outer = 0
    n_evals = 0
    for n_outer in range(1, cfg.max_outer_iter + 1):
        while rho < cfg.rho_max:
            sol = sopt.minimize(objective, w, method="L-BFGS-B", jac=True, bounds=bounds)
            n_evals += sol.nfev
            w_new = sol.x
            h_new, _ = h_trexp(unpack(w_new))
            if h_new > 0.25 * h:
                rho *= 10
            else:
                break
        w, h = w_new, h_new
        alpha += rho * h
        log.debug("notears outer %d: h=%.3e rho=%.1e", n_outer, h, rho)
        if h <= cfg.h_tol or rho >= cfg.rho_max:
            break

    a = unpack(w)
    np.fill_diagonal(a, 0.0)
    converged = bool(h <= cfg.h_tol)
    if not converged:
        log.warning("notears stopped with h=%.3e > h_tol=%.1e", h, cfg.h_tol)
    return FitResult(WeightedAdjacency(a, data.labels), float(h), n_outer, converged,
                     {"rho": rho, "function_evals": n_evals})
