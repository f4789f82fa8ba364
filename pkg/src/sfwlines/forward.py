"""Acquisition operator, BLASSO objective and dual certificate.

The objective is ``0.5 * ||y - Phi m||^2 + lam * |m|(X)`` and the dual
certificate is

    eta(x) = (1 / lam) * <phi(x), y - Phi m>.

With the 1/2 on the fidelity, the Fermat rule says a measure is optimal iff
``|eta| <= 1`` on the whole domain and ``eta(x_k) = sign(alpha_k)`` at its
spikes, which is what the stopping tests check.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from sfwlines.kernels import KernelModel
from sfwlines.measures import DiscreteMeasure, ParamPoint, tv_norm


class DimensionError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Observation:
    """An ``N x N`` real image stored as a flat row-major vector."""

    pixels: np.ndarray
    side: int

    def __post_init__(self):
        px = np.ascontiguousarray(self.pixels, dtype=float).ravel()
        if px.size != self.side * self.side:
            raise DimensionError(
                f"{px.size} pixels is not a {self.side}x{self.side} image")
        px.setflags(write=False)
        object.__setattr__(self, "pixels", px)

    @classmethod
    def from_image(cls, img) -> "Observation":
        img = np.asarray(img, dtype=float)
        if img.ndim != 2 or img.shape[0] != img.shape[1]:
            raise DimensionError(f"expected a square image, got shape {img.shape}")
        return cls(img.ravel(), img.shape[0])

    def image(self) -> np.ndarray:
        return self.pixels.reshape(self.side, self.side)

    def __eq__(self, other):
        if not isinstance(other, Observation):
            return NotImplemented
        return self.side == other.side and np.array_equal(self.pixels, other.pixels)


def _pixels(model: KernelModel, y) -> np.ndarray:
    if isinstance(y, Observation):
        if y.side != model.N:
            raise DimensionError(f"observation side {y.side} != model side {model.N}")
        return y.pixels
    y = np.asarray(y, dtype=float).ravel()
    if y.size != model.N * model.N:
        raise DimensionError(f"observation has {y.size} pixels, model expects {model.N ** 2}")
    return y


def synthesize(model: KernelModel, etas, thetas, alphas) -> np.ndarray:
    """``sum_k alpha_k phi(eta_k, theta_k)`` as a flat vector."""
    alphas = np.asarray(alphas, dtype=float)
    if alphas.size == 0:
        return np.zeros(model.N * model.N)
    return alphas @ model.images(etas, thetas)


def apply(model: KernelModel, m: DiscreteMeasure) -> Observation:
    return Observation(synthesize(model, m.etas, m.thetas, m.alphas), model.N)


def residual(model: KernelModel, m: DiscreteMeasure, y) -> Observation:
    yv = _pixels(model, y)
    return Observation(yv - synthesize(model, m.etas, m.thetas, m.alphas), model.N)


def objective(model: KernelModel, m: DiscreteMeasure, y, lam: float) -> float:
    if not lam > 0:
        raise ValueError("lambda must be positive")
    r = residual(model, m, y).pixels
    return 0.5 * float(r @ r) + lam * tv_norm(m)


def certificate_field(model: KernelModel, r: np.ndarray, lam: float, etas, thetas) -> np.ndarray:
    """Certificate of residual ``r`` at many points at once."""
    return (model.images(etas, thetas) @ r) / lam


def certificate(model: KernelModel, m: DiscreteMeasure, y, lam: float, x: ParamPoint) -> float:
    if not lam > 0:
        raise ValueError("lambda must be positive")
    r = residual(model, m, y).pixels
    return float(certificate_field(model, r, lam, x.eta, x.theta)[0])


def certificate_grad(model: KernelModel, m: DiscreteMeasure, y, lam: float,
                     x: ParamPoint) -> tuple[float, float]:
    """Partials of the certificate in (eta, theta)."""
    if not lam > 0:
        raise ValueError("lambda must be positive")
    r = residual(model, m, y).pixels
    _, g_eta, g_theta = model.grads(x.eta, x.theta)
    return float(g_eta[0] @ r) / lam, float(g_theta[0] @ r) / lam
