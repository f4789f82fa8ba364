"""Coarse line search on the residual through a discrete Radon transform.

The greedy step of Frank-Wolfe needs the global maximizer of the
certificate. Lines in the residual show up as peaks of its Radon transform,
so local maxima of the transform seed a few bounded local ascents on the
certificate itself.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy import ndimage, optimize

from sfwlines.forward import _pixels, certificate_field
from sfwlines.kernels import KernelModel
from sfwlines.measures import DiscreteMeasure, ParamDomain, ParamPoint

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class RadonGrid:
    """Radon transform sampled on a ``P x P`` (theta, eta) grid; rows index theta."""

    theta_samples: np.ndarray
    eta_samples: np.ndarray
    values: np.ndarray

    def point(self, p: int, q: int) -> ParamPoint:
        return ParamPoint(self.eta_samples[q], self.theta_samples[p])

    def cell_size(self) -> tuple[float, float]:
        return (self.theta_samples[1] - self.theta_samples[0],
                self.eta_samples[1] - self.eta_samples[0])


@dataclass(frozen=True)
class GreedySettings:
    max_count: int = 10
    min_fraction: float = 0.3
    refine_top: int = 3
    ascent_iters: int = 200
    ascent_tol: float = 1e-10


def radon_transform(img, d: ParamDomain, P: int, model: KernelModel) -> RadonGrid:
    """Line integrals of ``img`` over the lines of a uniform ``P x P`` parameter grid.

    Samples are taken with unit step along the dominant axis of each line and
    interpolated bilinearly; the image is zero outside its support.
    """
    if P < 2:
        raise ValueError("P must be >= 2")
    N = model.N
    img = np.asarray(_pixels(model, img)).reshape(N, N)
    thetas = np.linspace(d.theta_min, d.theta_max, P)
    etas = np.linspace(d.eta_min, d.eta_max, P)
    values = np.empty((P, P))
    for p, th in enumerate(thetas):
        rows, cols, ds = model.line_coords(th, etas)
        samples = ndimage.map_coordinates(
            img, [rows.ravel(), cols.ravel()], order=1, mode="constant", cval=0.0)
        values[p] = ds * samples.reshape(rows.shape).sum(axis=1)
    return RadonGrid(thetas, etas, values)


def find_local_maxima(g: RadonGrid, max_count: int = 10,
                      min_fraction: float = 0.3) -> list[ParamPoint]:
    """Strict 8-neighbour maxima above ``min_fraction`` of the grid maximum.

    Sorted by value (descending), ties by theta index then eta index.
    """
    if max_count < 1 or not 0 <= min_fraction <= 1:
        raise ValueError("bad max_count/min_fraction")
    v = g.values
    top = v.max()
    if not top > 0:
        return []
    padded = np.pad(v, 1, mode="constant", constant_values=-np.inf)
    P0, P1 = v.shape
    strict = np.ones_like(v, dtype=bool)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di == 0 and dj == 0:
                continue
            strict &= v > padded[1 + di:1 + di + P0, 1 + dj:1 + dj + P1]
    strict &= v >= min_fraction * top
    ps, qs = np.nonzero(strict)
    order = sorted(range(len(ps)), key=lambda i: (-v[ps[i], qs[i]], ps[i], qs[i]))
    return [g.point(ps[i], qs[i]) for i in order[:max_count]]


def _ascend(model: KernelModel, r: np.ndarray, lam: float, d: ParamDomain,
            x0: ParamPoint, signed: bool, s: GreedySettings) -> tuple[ParamPoint, float]:
    scale = 1.0 / lam
    sign = 1.0
    if signed:
        v0 = scale * float(model.images(x0.eta, x0.theta)[0] @ r)
        sign = 1.0 if v0 >= 0 else -1.0

    def f(z):
        phi, g_eta, g_theta = model.grads(z[0], z[1])
        val = sign * scale * float(phi[0] @ r)
        grad = sign * scale * np.array([g_eta[0] @ r, g_theta[0] @ r])
        return -val, -grad

    res = optimize.minimize(
        f, np.array([x0.eta, x0.theta]), jac=True, method="L-BFGS-B",
        bounds=d.bounds(),
        options={"maxiter": s.ascent_iters, "ftol": 1e-15, "gtol": 1e-12})
    z = np.clip(res.x, [d.eta_min, d.theta_min], [d.eta_max, d.theta_max])
    return ParamPoint(z[0], z[1]), -float(f(z)[0])


def coarse_candidates(model: KernelModel, r: np.ndarray, lam: float, d: ParamDomain,
                      P: int, cfg: GreedySettings | None = None,
                      nonneg: bool = True) -> list[tuple[ParamPoint, float]]:
    """Radon local maxima of the residual ``r`` ranked by their certificate value."""
    s = cfg or GreedySettings()
    grid = radon_transform(r, d, P, model)
    if not nonneg:
        grid = RadonGrid(grid.theta_samples, grid.eta_samples, np.abs(grid.values))
    cands = find_local_maxima(grid, s.max_count, s.min_fraction)
    if not cands:
        p, q = np.unravel_index(np.argmax(grid.values), grid.values.shape)
        cands = [grid.point(p, q)]
    etas = np.array([c.eta for c in cands])
    thetas = np.array([c.theta for c in cands])
    coarse = certificate_field(model, r, lam, etas, thetas)
    if not nonneg:
        coarse = np.abs(coarse)
    order = sorted(range(len(cands)), key=lambda i: (-coarse[i], i))
    return [(cands[i], float(coarse[i])) for i in order]


def greedy_candidate(model: KernelModel, m: DiscreteMeasure, y, lam: float,
                     d: ParamDomain, P: int, cfg: GreedySettings | None = None,
                     nonneg: bool = True) -> tuple[ParamPoint, float]:
    """Approximate ``argmax_x eta(x)`` (or ``|eta(x)|`` when signed) over ``d``.

    Returns the refined point and its certificate score. With ``nonneg`` the
    score is the certificate itself; otherwise its absolute value.
    """
    if not lam > 0:
        raise ValueError("lambda must be positive")
    s = cfg or GreedySettings()
    yv = _pixels(model, y)
    r = yv - (m.alphas @ model.images(m.etas, m.thetas) if len(m) else 0.0)
    if not np.any(r):
        return d.center(), 0.0

    ranked = coarse_candidates(model, r, lam, d, P, s, nonneg)[:s.refine_top]
    best, best_val = ranked[0]
    for cand, coarse in ranked:
        x, val = _ascend(model, r, lam, d, cand, not nonneg, s)
        log.debug("candidate %s coarse=%.6g refined %s -> %.6g", cand, coarse, x, val)
        if val > best_val:
            best, best_val = x, val
    return best, best_val
