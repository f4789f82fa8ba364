"""Sliding Frank-Wolfe driver for the BLASSO over line parameters."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from sfwlines.forward import _pixels
from sfwlines.kernels import KernelModel
from sfwlines.measures import DiscreteMeasure, ParamDomain, prune
from sfwlines.radon import GreedySettings, greedy_candidate
from sfwlines.solvers import OptimizerSettings, lasso_gram, sliding_step

log = logging.getLogger(__name__)

STOP_OPTIMAL = "optimal"
STOP_KMAX = "k_max_reached"
STOP_STALLED = "stalled"


@dataclass(frozen=True)
class SFWConfig:
    lam: float
    domain: ParamDomain
    k_max: int = 20
    cert_tol: float = 1e-2
    prune_tol: float | None = None  # None: 1e-6 * max |alpha|
    radon_P: int = 128
    optimizer: OptimizerSettings = field(default_factory=OptimizerSettings)
    greedy: GreedySettings = field(default_factory=GreedySettings)

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("lambda must be positive")
        if self.k_max < 1:
            raise ValueError("k_max must be >= 1")
        if not self.cert_tol > 0:
            raise ValueError("cert_tol must be positive")
        if self.prune_tol is not None and self.prune_tol < 0:
            raise ValueError("prune_tol must be >= 0")
        if self.radon_P < 2:
            raise ValueError("radon_P must be >= 2")


@dataclass(frozen=True)
class SFWReport:
    measure: DiscreteMeasure
    objective_trace: tuple[float, ...]
    cert_sup_trace: tuple[float, ...]
    stop_reason: str
    iterations: int

    def to_dict(self) -> dict:
        return {
            "measure": self.measure.to_dict(),
            "objective_trace": list(self.objective_trace),
            "cert_sup_trace": list(self.cert_sup_trace),
            "stop_reason": self.stop_reason,
            "iterations": self.iterations,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SFWReport":
        return cls(DiscreteMeasure.from_dict(d["measure"]),
                   tuple(float(v) for v in d["objective_trace"]),
                   tuple(float(v) for v in d["cert_sup_trace"]),
                   d["stop_reason"], int(d["iterations"]))


def _amplitudes(model, m, yv, lam, opt):
    Phi = model.images(m.etas, m.thetas)
    alpha, ok = lasso_gram(Phi @ Phi.T, Phi @ yv, lam, m.alphas, opt)
    if not ok:
        log.warning("amplitude LASSO stopped before reaching grad_tol")
    return m.with_amplitudes(alpha)


def _objective(model, m, yv, lam):
    r = yv - (m.alphas @ model.images(m.etas, m.thetas) if len(m) else 0.0)
    return 0.5 * float(r @ r) + lam * float(np.abs(m.alphas).sum())


def sfw_run(model: KernelModel, y, cfg: SFWConfig) -> SFWReport:
    """Recover a sparse measure of lines from ``y``.

    Each iteration inserts the spike maximizing the certificate, re-fits all
    amplitudes, slides amplitudes and positions jointly, then prunes spikes
    that vanished. Stops when the certificate no longer exceeds
    ``1 + cert_tol`` anywhere in the domain.
    """
    yv = _pixels(model, y)
    if not np.all(np.isfinite(yv)):
        raise ValueError("observation has non-finite pixels")
    lam = cfg.lam
    opt = cfg.optimizer
    m = DiscreteMeasure()
    obj_trace: list[float] = []
    cert_trace: list[float] = []
    reason = STOP_KMAX
    iters = 0

    for j in range(1, cfg.k_max + 1):
        iters = j
        x_new, score = greedy_candidate(model, m, yv, lam, cfg.domain, cfg.radon_P,
                                        cfg.greedy, nonneg=opt.nonneg)
        cert_trace.append(score)
        if score <= 1.0 + cfg.cert_tol:
            reason = STOP_OPTIMAL
            obj_trace.append(_objective(model, m, yv, lam))
            log.info("iter %d: %d spikes, objective %.10g, cert sup %.6f -> optimal",
                     j, len(m), obj_trace[-1], score)
            break
        prev_obj = _objective(model, m, yv, lam)
        trial = _amplitudes(model, m.with_spike(x_new, 0.0), yv, lam, opt)
        try:
            trial = sliding_step(model, trial, yv, lam, cfg.domain, opt)
        except FloatingPointError:
            reason = STOP_STALLED
            break
        tol = cfg.prune_tol
        if tol is None:
            tol = 1e-6 * float(np.abs(trial.alphas).max(initial=0.0))
        pruned = prune(trial, tol)
        if len(pruned) != len(trial) and len(pruned):
            pruned = _amplitudes(model, pruned, yv, lam, opt)
        obj = _objective(model, pruned, yv, lam)
        if not math.isfinite(obj):
            reason = STOP_STALLED
            break
        m = pruned
        obj_trace.append(obj)
        log.info("iter %d: %d spikes, objective %.10g, cert sup %.6f",
                 j, len(m), obj, score)
        if obj >= prev_obj - 1e-14 * (1.0 + abs(prev_obj)) and j > 1:
            reason = STOP_STALLED
            log.info("no objective decrease; stopping")
            break

    return SFWReport(m, tuple(obj_trace), tuple(cert_trace), reason, iters)
