"""Bounded Levenberg-Marquardt least squares.

A small, dependency-free (numpy only) implementation so that the iteration
history, the bound projection and the status codes are under our control.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from ..exceptions import InvalidParameterError, NonFiniteModelError

logger = logging.getLogger(__name__)

CONVERGED = "converged"
MAX_ITER = "max-iterations"
SINGULAR = "singular"
NON_DECAYING = "non-decaying"


@dataclass
class FitResult:
    params: np.ndarray
    stderr: np.ndarray
    residual_norm: float
    status: str
    n_iter: int = 0
    names: tuple = ()
    covariance: np.ndarray | None = None
    history: list = field(default_factory=list, repr=False)
    n_data: int = 0

    @property
    def converged(self) -> bool:
        return self.status == CONVERGED

    def as_dict(self) -> dict:
        return {n: float(v) for n, v in zip(self.names, self.params)}

    def stderr_dict(self) -> dict:
        return {n: float(v) for n, v in zip(self.names, self.stderr)}

    def rows(self):
        """(label, value, stderr) rows in parameter order."""
        for n, v, e in zip(self.names, self.params, self.stderr):
            yield n, float(v), float(e)


def _project(theta, lo, hi):
    return np.minimum(np.maximum(theta, lo), hi)


def numeric_jacobian(fun, theta, lo, hi, free, rel_step=1e-6):
    """Central differences with step rel_step * max(|theta|, 1e-2); falls
    back to one-sided differences at a bound."""
    r0 = fun(theta)
    J = np.zeros((r0.size, theta.size))
    for j in np.flatnonzero(free):
        h = rel_step * max(abs(theta[j]), 1e-2)
        up = theta.copy()
        dn = theta.copy()
        up[j] = min(theta[j] + h, hi[j])
        dn[j] = max(theta[j] - h, lo[j])
        span = up[j] - dn[j]
        if span <= 0:
            continue
        J[:, j] = (fun(up) - fun(dn)) / span
    return r0, J


def lm_minimize(residual, x0, bounds=None, free=None, tol=1e-12,
                max_iter=200, xtol=1e-14, jacobian=None, names=None):
    """Minimize ``sum(residual(theta)**2)``.

    Steps are accepted only if they lower the cost, so the cost recorded in
    ``FitResult.history`` is monotone non-increasing. Iteration stops when
    an accepted step changes the cost by less than ``tol`` relative, when
    the step is below ``xtol`` relative, or after ``max_iter`` Jacobian
    evaluations. Rank-deficient Jacobians (for example a model that does
    not depend on a free parameter) end with status ``"singular"`` and
    infinite standard errors.
    """
    theta = np.array(x0, dtype=np.float64)
    n = theta.size
    lo, hi = (np.full(n, -np.inf), np.full(n, np.inf)) if bounds is None else (
        np.broadcast_to(np.asarray(b, dtype=np.float64), (n,)).copy() for b in bounds)
    if np.any(lo > hi):
        raise InvalidParameterError("lower bound above upper bound")
    if np.any(theta < lo) or np.any(theta > hi):
        raise InvalidParameterError("initial parameters outside bounds")
    free = np.ones(n, bool) if free is None else np.asarray(free, bool)
    names = tuple(names) if names is not None else tuple(f"p{i}" for i in range(n))

    def fun(t):
        r = np.asarray(residual(t), dtype=np.float64)
        if not np.all(np.isfinite(r)):
            raise NonFiniteModelError(f"model returned non-finite residuals at {t}")
        return r

    def jac(t):
        if jacobian is not None:
            r = fun(t)
            J = np.asarray(jacobian(t), dtype=np.float64).copy()
            J[:, ~free] = 0.0
            return r, J
        return numeric_jacobian(fun, t, lo, hi, free)

    r, J = jac(theta)
    cost = float(r @ r)
    history = [cost]
    lam = 1e-3
    status = MAX_ITER
    n_iter = 0
    idx = np.flatnonzero(free)

    while n_iter < max_iter:
        n_iter += 1
        if _rank_deficient(J[:, idx]):
            status = SINGULAR
            break
        # parameters held at a bound by the gradient sit out this step
        g_all = J.T @ r
        pinned = ((theta <= lo) & (g_all > 0)) | ((theta >= hi) & (g_all < 0))
        step_idx = np.flatnonzero(free & ~pinned)
        if cost == 0.0 or step_idx.size == 0:
            status = CONVERGED
            break
        Jf = J[:, step_idx]
        g = g_all[step_idx]
        A = Jf.T @ Jf
        d = np.diag(A).copy()
        accepted = False
        while lam < 1e16:
            try:
                step = np.linalg.solve(A + lam * np.diag(d), -g)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            trial = theta.copy()
            trial[step_idx] += step
            trial = _project(trial, lo, hi)
            r_new = fun(trial)
            cost_new = float(r_new @ r_new)
            if cost_new < cost:
                accepted = True
                break
            if np.all(np.abs(trial - theta) <= xtol * (np.abs(theta) + xtol)):
                break
            lam *= 10.0
        if not accepted:
            # no downhill step left at machine resolution: a minimum
            status = CONVERGED
            break
        dx = trial - theta
        rel_change = (cost - cost_new) / max(cost, 1e-300)
        theta = trial
        cost = cost_new
        history.append(cost)
        lam = max(lam / 10.0, 1e-12)
        logger.debug("lm iter %d cost %.6e lambda %.1e", n_iter, cost, lam)
        if rel_change < tol or np.all(np.abs(dx) <= xtol * (np.abs(theta) + xtol)):
            r, J = jac(theta)
            status = CONVERGED
            break
        r, J = jac(theta)

    stderr, cov = _stderr(J, idx, cost, r.size, n)
    if status != SINGULAR and not np.all(np.isfinite(stderr[idx])):
        status = SINGULAR
    return FitResult(params=theta, stderr=stderr, residual_norm=cost,
                     status=status, n_iter=n_iter, names=names,
                     covariance=cov, history=history, n_data=r.size)


def _rank_deficient(Jf):
    s = np.linalg.svd(Jf, compute_uv=False)
    return s.size == 0 or s[-1] <= 1e-13 * s[0]


def _stderr(J, idx, cost, m, n):
    stderr = np.zeros(n)
    cov = np.zeros((n, n))
    dof = m - idx.size
    Jf = J[:, idx]
    if _rank_deficient(Jf):
        stderr[idx] = np.inf
        cov[np.ix_(idx, idx)] = np.inf
        return stderr, cov
    # column scaling keeps the normal matrix well conditioned
    scale = np.linalg.norm(Jf, axis=0)
    Js = Jf / scale
    inv = np.linalg.pinv(Js.T @ Js) / np.outer(scale, scale)
    s2 = cost / dof if dof > 0 else np.inf
    c = inv * s2
    cov[np.ix_(idx, idx)] = c
    stderr[idx] = np.sqrt(np.clip(np.diag(c), 0.0, None))
    return stderr, cov
