"""Inner optimizers of Sliding Frank-Wolfe.

``lasso_amplitudes`` solves the convex amplitude problem on a fixed support;
``sliding_step`` moves amplitudes and positions jointly.

Both minimize ``0.5 * ||y - sum_k alpha_k phi(x_k)||^2 + lam * sum_k |alpha_k|``,
so amplitudes are soft-thresholded at ``lam``.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import linalg, optimize

from sfwlines.forward import _pixels
from sfwlines.kernels import KernelModel
from sfwlines.measures import DiscreteMeasure, ParamDomain, ParamPoint

log = logging.getLogger(__name__)


class ConvergenceWarning(UserWarning):
    pass


@dataclass(frozen=True)
class OptimizerSettings:
    max_iters: int = 500
    grad_tol: float = 1e-8
    step_tol: float = 1e-10
    nonneg: bool = True

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not (self.grad_tol > 0 and self.step_tol > 0):
            raise ValueError("tolerances must be positive")


def _kkt_violation(G, c, alpha, lam, nonneg):
    """Largest violation of the first-order conditions of the amplitude problem."""
    g = G @ alpha - c
    viol = np.where(alpha > 0, np.abs(g + lam), np.abs(g - lam))
    zero = alpha == 0
    if nonneg:
        viol[zero] = np.maximum(-(g[zero] + lam), 0.0)
    else:
        viol[zero] = np.maximum(np.abs(g[zero]) - lam, 0.0)
    return float(viol.max()) if viol.size else 0.0


def _polish(G, c, alpha, lam, nonneg):
    """Solve the stationarity equations on the current support and sign pattern."""
    act = np.flatnonzero(alpha)
    if act.size == 0:
        return alpha
    signs = np.sign(alpha[act])
    try:
        a = linalg.solve(G[np.ix_(act, act)], c[act] - lam * signs, assume_a="pos")
    except (linalg.LinAlgError, ValueError):
        return alpha
    if not np.all(np.isfinite(a)) or np.any(np.sign(a) != signs):
        return alpha
    out = alpha.copy()
    out[act] = a
    return out


def lasso_objective(G, c, yy, alpha, lam) -> float:
    return float(0.5 * yy - c @ alpha + 0.5 * alpha @ G @ alpha + lam * np.abs(alpha).sum())


def lasso_gram(G: np.ndarray, c: np.ndarray, lam: float, alpha_init: np.ndarray,
               s: OptimizerSettings) -> tuple[np.ndarray, bool]:
    """Cyclic coordinate descent on the Gram form, then an active-set polish.

    ``G = Phi Phi^T`` and ``c = Phi y`` for the atoms as rows of ``Phi``.
    Returns the amplitudes and whether the first-order conditions hold to
    ``s.grad_tol``.
    """
    K = len(c)
    alpha = np.array(alpha_init, dtype=float, copy=True)
    if s.nonneg:
        alpha = np.maximum(alpha, 0.0)
    diag = np.diag(G).copy()
    for it in range(s.max_iters):
        for k in range(K):
            if diag[k] <= 0:
                alpha[k] = 0.0
                continue
            b = c[k] - G[k] @ alpha + diag[k] * alpha[k]
            if s.nonneg:
                a = max(b - lam, 0.0) / diag[k]
            else:
                a = np.sign(b) * max(abs(b) - lam, 0.0) / diag[k]
            alpha[k] = a
        polished = _polish(G, c, alpha, lam, s.nonneg)
        if _kkt_violation(G, c, polished, lam, s.nonneg) <= s.grad_tol:
            return polished, True
        if _kkt_violation(G, c, alpha, lam, s.nonneg) <= s.grad_tol:
            return alpha, True
    return alpha, False


def lasso_amplitudes(model: KernelModel, points: list[ParamPoint], y, lam: float,
                     alpha_init=None, s: OptimizerSettings | None = None) -> np.ndarray:
    """Optimal amplitudes for atoms fixed at ``points``."""
    s = s or OptimizerSettings()
    if not points:
        raise ValueError("need at least one point")
    if not lam >= 0:
        raise ValueError("lambda must be >= 0")
    yv = _pixels(model, y)
    if not np.all(np.isfinite(yv)):
        raise ValueError("observation has non-finite pixels")
    etas = np.array([p.eta for p in points])
    thetas = np.array([p.theta for p in points])
    Phi = model.images(etas, thetas)
    G = Phi @ Phi.T
    c = Phi @ yv
    a0 = np.zeros(len(points)) if alpha_init is None else np.asarray(alpha_init, dtype=float)
    if a0.shape != (len(points),) or not np.all(np.isfinite(a0)):
        raise ValueError("alpha_init must be finite with one entry per point")
    alpha, ok = lasso_gram(G, c, lam, a0, s)
    if not ok:
        warnings.warn(f"amplitude LASSO did not reach grad_tol={s.grad_tol} "
                      f"in {s.max_iters} sweeps", ConvergenceWarning, stacklevel=2)
    return alpha


def _eta_scale(model: KernelModel) -> float:
    return model.N / 10.0 if model.kind == "gl" else 0.1


def sliding_step(model: KernelModel, m: DiscreteMeasure, y, lam: float, d: ParamDomain,
                 s: OptimizerSettings | None = None,
                 trace: list | None = None) -> DiscreteMeasure:
    """Jointly refine amplitudes and positions of all spikes.

    Amplitude signs are frozen at entry (a spike may shrink to zero but not
    change sign), which makes the l1 term linear. Positions stay in ``d``.
    The result never has a larger objective than ``m``. If ``trace`` is a
    list, the objective after every inner iteration is appended to it.
    """
    s = s or OptimizerSettings()
    if not len(m):
        raise ValueError("sliding needs a nonempty measure")
    if not lam > 0:
        raise ValueError("lambda must be positive")
    yv = _pixels(model, y)
    K = len(m)
    signs = np.where(m.alphas < 0, -1.0, 1.0)
    if s.nonneg:
        signs[:] = 1.0
    es = _eta_scale(model)
    scale = np.concatenate([np.ones(K), np.full(K, es), np.ones(K)])

    def unpack(z):
        v = z * scale
        return v[:K], v[K:2 * K], v[2 * K:]

    def fun(z):
        a, e, t = unpack(z)
        phi, g_eta, g_theta = model.grads(e, t)
        r = yv - a @ phi
        f = 0.5 * float(r @ r) + lam * float(signs @ a)
        ga = -(phi @ r) + lam * signs
        ge = -a * (g_eta @ r)
        gt = -a * (g_theta @ r)
        return f, np.concatenate([ga, ge, gt]) * scale

    a0 = np.abs(m.alphas) * signs if not s.nonneg else np.maximum(m.alphas, 0.0)
    z0 = np.concatenate([a0, m.etas, m.thetas]) / scale
    bounds = ([(0.0, None) if sg > 0 else (None, 0.0) for sg in signs]
              + [(d.eta_min / es, d.eta_max / es)] * K
              + [(d.theta_min, d.theta_max)] * K)
    z0 = np.clip(z0, [b[0] if b[0] is not None else -np.inf for b in bounds],
                 [b[1] if b[1] is not None else np.inf for b in bounds])

    start_obj = _measure_objective(model, m, yv, lam)
    if trace is not None:
        trace.append(start_obj)
    callback = None
    if trace is not None:
        def callback(zk):
            trace.append(fun(zk)[0])

    try:
        res = optimize.minimize(
            fun, z0, jac=True, method="L-BFGS-B", bounds=bounds, callback=callback,
            options={"maxiter": s.max_iters, "ftol": s.step_tol, "gtol": s.grad_tol,
                     "maxcor": 20})
        z = res.x
        if not np.all(np.isfinite(z)):
            raise FloatingPointError("non-finite sliding iterate")
    except (FloatingPointError, ValueError) as exc:
        log.warning("sliding step failed (%s); keeping input measure", exc)
        return m
    a, e, t = unpack(z)
    e = np.clip(e, d.eta_min, d.eta_max)
    t = np.clip(t, d.theta_min, d.theta_max)
    out = DiscreteMeasure.from_arrays(e, t, a)
    new_obj = _measure_objective(model, out, yv, lam)
    log.debug("sliding: %d iters, objective %.12g -> %.12g (%s)",
              res.nit, start_obj, new_obj, res.message)
    if not np.isfinite(new_obj):
        raise FloatingPointError("non-finite objective after sliding")
    if new_obj > start_obj:
        return m
    return out


def _measure_objective(model, m, yv, lam) -> float:
    r = yv - (m.alphas @ model.images(m.etas, m.thetas) if len(m) else 0.0)
    return 0.5 * float(r @ r) + lam * float(np.abs(m.alphas).sum())
