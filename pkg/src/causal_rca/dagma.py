"""DAGMA: log-determinant acyclicity over M-matrices, solved along a central path."""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .dataset import BinaryDataset
from .graph import DEFAULT_OMEGA, WeightedAdjacency
from .notears import FitResult, initial_point, loss_ls, prepare_data

log = logging.getLogger(__name__)


class DomainError(ArithmeticError):
    """``sI - A*A`` is not a nonsingular M-matrix."""


@dataclass(frozen=True)
class DagmaConfig:
    s: float = 1.0
    mu_schedule: tuple[float, ...] = (1.0, 0.1, 0.01, 0.001)
    lambda1: float = 0.03
    max_inner_iter: int = 20000
    lr: float = 3e-4
    omega: float = DEFAULT_OMEGA
    checkpoint: int = 500
    tol: float = 1e-6
    max_halvings: int = 64
    init_jitter: float = 1e-4

    def __post_init__(self):
        object.__setattr__(self, "mu_schedule", tuple(float(mu) for mu in self.mu_schedule))
        if not self.s > 0:
            raise ValueError("s must be positive")
        mus = self.mu_schedule
        if not mus or any(mu <= 0 for mu in mus) or any(b >= a for a, b in zip(mus, mus[1:])):
            raise ValueError("mu_schedule must be strictly decreasing and positive")
        if self.lambda1 < 0:
            raise ValueError("lambda1 must be >= 0")
        if self.max_inner_iter < 1 or self.checkpoint < 1:
            raise ValueError("iteration counts must be positive")
        if self.init_jitter < 0:
            raise ValueError("init_jitter must be >= 0")
        if not self.lr > 0:
            raise ValueError("lr must be positive")


def _factor(a: np.ndarray, s: float) -> tuple[float, np.ndarray]:
    """log det and inverse of ``sI - A*A`` from a single LU factorisation.

    Raises DomainError unless the matrix is a nonsingular M-matrix: positive
    determinant and entrywise nonnegative inverse.
    """
    d = a.shape[0]
    m = s * np.eye(d) - a * a
    lu, piv = sla.lu_factor(m, check_finite=False)
    diag = np.diag(lu)
    n_swaps = int(np.sum(piv != np.arange(d)))
    sign = (-1) ** n_swaps * np.prod(np.sign(diag))
    if sign <= 0 or np.any(diag == 0):
        raise DomainError("sI - A*A has non-positive determinant")
    inv = sla.lu_solve((lu, piv), np.eye(d), check_finite=False)
    # a Z-matrix with positive determinant can still lie outside the M-matrix
    # cone when two eigenvalues cross zero together; its inverse then has a
    # negative entry
    if np.any(inv < -1e-12):
        raise DomainError("inverse of sI - A*A has negative entries")
    return float(np.sum(np.log(np.abs(diag)))), inv


def h_logdet(a: np.ndarray, s: float = 1.0) -> tuple[float, np.ndarray]:
    """``-log det(sI - A*A) + d log s`` and its gradient ``2 (sI - A*A)^{-T} * A``."""
    a = np.asarray(a, dtype=float)
    logdet, inv = _factor(a, s)
    value = -logdet + a.shape[0] * np.log(s)
    return float(value), 2.0 * inv.T * a


def in_domain(a: np.ndarray, s: float = 1.0) -> bool:
    try:
        _factor(np.asarray(a, dtype=float), s)
    except DomainError:
        return False
    return True


def _objective(a, x, mu, lambda1, s):
    loss, g_loss = loss_ls(a, x)
    h, g_h = h_logdet(a, s)
    obj = mu * (loss + lambda1 * np.abs(a).sum()) + h
    grad = mu * (g_loss + lambda1 * np.sign(a)) + g_h
    return obj, grad, h


def _adam_stage(a, x, mu, cfg, off_diag):
    """Minimise one central-path subproblem from ``a``; returns (a, h, iters)."""
    beta1, beta2, eps = 0.99, 0.999, 1e-8
    lr = cfg.lr
    m1 = np.zeros_like(a)
    m2 = np.zeros_like(a)
    obj, grad, h = _objective(a, x, mu, cfg.lambda1, cfg.s)
    obj_prev_check = obj
    it = 0
    for it in range(1, cfg.max_inner_iter + 1):
        grad = grad * off_diag
        m1 = beta1 * m1 + (1 - beta1) * grad
        m2 = beta2 * m2 + (1 - beta2) * grad * grad
        step = (m1 / (1 - beta1**it)) / (np.sqrt(m2 / (1 - beta2**it)) + eps)
        for _ in range(cfg.max_halvings):
            candidate = a - lr * step
            try:
                obj_new, grad_new, h_new = _objective(candidate, x, mu, cfg.lambda1, cfg.s)
            except DomainError:
                lr *= 0.5
                continue
            break
        else:
            raise DomainError(f"step rejected {cfg.max_halvings} times at mu={mu}, lr={lr:.3e}")
        # _objective only returns for iterates inside the M-matrix domain
        a, obj, grad, h = candidate, obj_new, grad_new, h_new
        if it % cfg.checkpoint == 0:
            if obj > obj_prev_check:
                lr *= 0.5
            elif abs(obj_prev_check - obj) <= cfg.tol * abs(obj_prev_check):
                break
            obj_prev_check = obj
    return a, h, it


def dagma(data: BinaryDataset, cfg: DagmaConfig = DagmaConfig()) -> FitResult:
    if data.m < 2:
        raise ValueError("need at least two samples")
    x = prepare_data(data, "l2")
    d = data.n
    off_diag = 1.0 - np.eye(d)
    a = initial_point(d, cfg.init_jitter)
    h = 0.0
    total = 0
    converged = True
    for mu in cfg.mu_schedule:
        a, h, iters = _adam_stage(a, x, mu, cfg, off_diag)
        total += iters
        if iters >= cfg.max_inner_iter:
            converged = False
        log.debug("dagma mu=%g: h=%.3e after %d iterations", mu, h, iters)
    if not converged:
        log.info("dagma: at least one stage hit max_inner_iter=%d", cfg.max_inner_iter)
    np.fill_diagonal(a, 0.0)
    return FitResult(WeightedAdjacency(a, data.labels), float(h), total, converged,
                     {"stages": len(cfg.mu_schedule)})
