"""Gaussian-line (GL) and chirp-line (CL) measurement kernels.

Both kernels map a line parameter ``(eta, theta)`` to an ``N x N`` image,
flattened row-major into a vector of length ``N**2``.

GL grid: pixel ``(row i, col j)`` sits at ``u = (j - M, i - M)``; ``u1`` is
horizontal, ``u2`` vertical, and ``theta`` is measured from the vertical axis.

CL grid: pixel ``(row k, col n)`` is time ``t_n = n / (N - 1)`` and frequency
bin ``omega_k = k``. Rows are frequency, columns are time. ``theta`` is the
angle of the ridge with respect to the time axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Union

import numpy as np

from sfwlines.measures import HALF_PI, ParamDomain, ParamPoint

SQRT_2PI = math.sqrt(2.0 * math.pi)

# CL angles are kept this far from +-pi/2 by the default parameter box.
CL_THETA_MARGIN = 1e-3


class KernelDomainError(ValueError):
    """Raised when a kernel is evaluated outside its admissible angle range."""


@lru_cache(maxsize=8)
def _gl_grid(M: int) -> tuple[np.ndarray, np.ndarray]:
    r = np.arange(-M, M + 1, dtype=float)
    u2, u1 = np.meshgrid(r, r, indexing="ij")
    u1 = u1.ravel()
    u2 = u2.ravel()
    u1.setflags(write=False)
    u2.setflags(write=False)
    return u1, u2


@lru_cache(maxsize=8)
def _cl_grid(N: int) -> tuple[np.ndarray, np.ndarray]:
    idx = np.arange(N, dtype=float)
    omega, t = np.meshgrid(idx, idx / (N - 1), indexing="ij")
    t = t.ravel()
    omega = omega.ravel()
    t.setflags(write=False)
    omega.setflags(write=False)
    return t, omega


@dataclass(frozen=True)
class GLConfig:
    """Gaussian line kernel: a line blurred by a separable Gaussian PSF.

    ``sigma1``/``sigma2`` are the PSF standard deviations (pixels) along the
    horizontal and vertical axes, and the image side is ``N = 2 * M + 1``.
    """

    sigma1: float = 1.0
    sigma2: float = 1.0
    M: int = 32

    kind = "gl"

    def __post_init__(self):
        if not (self.sigma1 > 0 and self.sigma2 > 0):
            raise ValueError("PSF widths must be positive")
        if int(self.M) != self.M or self.M < 1:
            raise ValueError("M must be a positive integer")

    @property
    def N(self) -> int:
        return 2 * self.M + 1

    @property
    def eta_scale(self) -> float:
        return float(self.N)

    def default_domain(self) -> ParamDomain:
        reach = self.M + 3.0 * self.sigma1
        return ParamDomain(-HALF_PI + 1e-3, HALF_PI, -reach, reach)

    def default_radon_size(self) -> int:
        return 128

    def images(self, etas, thetas) -> np.ndarray:
        etas = np.atleast_1d(np.asarray(etas, dtype=float))[:, None]
        thetas = np.atleast_1d(np.asarray(thetas, dtype=float))[:, None]
        u1, u2 = _gl_grid(self.M)
        c, s = np.cos(thetas), np.sin(thetas)
        var = self.sigma1 ** 2 * c ** 2 + self.sigma2 ** 2 * s ** 2
        d = (u1 - etas) * c + u2 * s
        return np.exp(-0.5 * d * d / var) / np.sqrt(2.0 * np.pi * var)

    def grads(self, etas, thetas) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Images and their partials in eta and theta, each of shape (K, N**2)."""
        etas = np.atleast_1d(np.asarray(etas, dtype=float))[:, None]
        thetas = np.atleast_1d(np.asarray(thetas, dtype=float))[:, None]
        u1, u2 = _gl_grid(self.M)
        c, s = np.cos(thetas), np.sin(thetas)
        var = self.sigma1 ** 2 * c ** 2 + self.sigma2 ** 2 * s ** 2
        dvar = 2.0 * (self.sigma2 ** 2 - self.sigma1 ** 2) * s * c
        du1 = u1 - etas
        d = du1 * c + u2 * s
        dd_dtheta = -du1 * s + u2 * c
        phi = np.exp(-0.5 * d * d / var) / np.sqrt(2.0 * np.pi * var)
        g_eta = (d * c / var) * phi
        g_theta = phi * (-(d / var) * dd_dtheta + (d * d - var) / (2.0 * var * var) * dvar)
        return phi, g_eta, g_theta

    def line_coords(self, theta: float, etas: np.ndarray):
        """Unit-step samples (rows, cols) along lines ``(etas, theta)`` and the arc length per step."""
        M = self.M
        steps = np.arange(-M, M + 1, dtype=float)
        etas = np.asarray(etas, dtype=float)[:, None]
        c, s = math.cos(theta), math.sin(theta)
        if abs(c) >= abs(s):
            u2 = np.broadcast_to(steps, (etas.shape[0], steps.size))
            u1 = etas - u2 * (s / c)
            ds = 1.0 / abs(c)
        else:
            u1 = np.broadcast_to(steps, (etas.shape[0], steps.size))
            u2 = (etas - u1) * (c / s)
            ds = 1.0 / abs(s)
        return u2 + M, u1 + M, ds


@dataclass(frozen=True)
class CLConfig:
    """Chirp line kernel: the closed-form spectrogram ridge of a linear chirp.

    ``sigma`` is the Gaussian window parameter in normalized time units and
    ``N`` the number of time samples (= frequency bins).
    """

    sigma: float = 0.05
    N: int = 256
    theta_max: float = 1.25

    kind = "cl"

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        if int(self.N) != self.N or self.N < 2:
            raise ValueError("N must be an integer >= 2")
        if not 0 < self.theta_max <= HALF_PI - CL_THETA_MARGIN:
            raise ValueError("theta_max must lie in (0, pi/2 - margin]")

    @property
    def M(self) -> int:
        return (self.N - 1) // 2

    @property
    def eta_scale(self) -> float:
        return 1.0

    def default_domain(self) -> ParamDomain:
        reach = math.tan(self.theta_max)
        return ParamDomain(-self.theta_max, self.theta_max, -reach, 1.0 + reach)

    def default_radon_size(self) -> int:
        return 180

    def _check(self, thetas: np.ndarray):
        if np.any(np.abs(thetas) >= HALF_PI) or not np.all(np.isfinite(thetas)):
            raise KernelDomainError("chirp-line kernel needs |theta| < pi/2")

    def images(self, etas, thetas) -> np.ndarray:
        etas = np.atleast_1d(np.asarray(etas, dtype=float))[:, None]
        thetas = np.atleast_1d(np.asarray(thetas, dtype=float))[:, None]
        self._check(thetas)
        t, omega = _cl_grid(self.N)
        n1 = self.N - 1
        s2 = self.sigma ** 2
        tan = np.tan(thetas)
        den = 1.0 + s2 * s2 * n1 * n1 * tan * tan
        d = omega - n1 * (etas + tan * t)
        return (s2 / np.sqrt(den)) * np.exp(-2.0 * np.pi * s2 * d * d / den)

    def grads(self, etas, thetas) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        etas = np.atleast_1d(np.asarray(etas, dtype=float))[:, None]
        thetas = np.atleast_1d(np.asarray(thetas, dtype=float))[:, None]
        self._check(thetas)
        t, omega = _cl_grid(self.N)
        n1 = self.N - 1
        s2 = self.sigma ** 2
        tan = np.tan(thetas)
        sec2 = 1.0 + tan * tan
        den = 1.0 + s2 * s2 * n1 * n1 * tan * tan
        dden = 2.0 * s2 * s2 * n1 * n1 * tan * sec2
        d = omega - n1 * (etas + tan * t)
        dd_dtheta = -n1 * t * sec2
        phi = (s2 / np.sqrt(den)) * np.exp(-2.0 * np.pi * s2 * d * d / den)
        k = 2.0 * np.pi * s2
        g_eta = (2.0 * k * n1 * d / den) * phi
        g_theta = phi * (-0.5 * dden / den - 2.0 * k * d * dd_dtheta / den
                         + k * d * d * dden / (den * den))
        return phi, g_eta, g_theta

    def line_coords(self, theta: float, etas: np.ndarray):
        """Unit-step samples (rows, cols) along ridges ``(etas, theta)`` and the arc length per step."""
        n1 = self.N - 1
        steps = np.arange(self.N, dtype=float)
        etas = np.asarray(etas, dtype=float)[:, None]
        tan = math.tan(theta)
        if abs(tan) <= 1.0:
            cols = np.broadcast_to(steps, (etas.shape[0], steps.size))
            rows = n1 * etas + cols * tan
            ds = math.sqrt(1.0 + tan * tan)
        else:
            rows = np.broadcast_to(steps, (etas.shape[0], steps.size))
            cols = (rows - n1 * etas) / tan
            ds = math.sqrt(1.0 + 1.0 / (tan * tan))
        return rows, cols, ds


KernelModel = Union[GLConfig, CLConfig]


def kernel_image(model: KernelModel, x: ParamPoint) -> np.ndarray:
    return model.images(x.eta, x.theta)[0]


def kernel_grad_image(model: KernelModel, x: ParamPoint) -> tuple[np.ndarray, np.ndarray]:
    _, g_eta, g_theta = model.grads(x.eta, x.theta)
    return g_eta[0], g_theta[0]


def gl_sigma_theta_sq(theta: float, cfg: GLConfig) -> float:
    """Variance of the blurred-line profile at angle ``theta``."""
    return cfg.sigma1 ** 2 * math.cos(theta) ** 2 + cfg.sigma2 ** 2 * math.sin(theta) ** 2


def gl_eval(x: ParamPoint, u: tuple[float, float], cfg: GLConfig) -> float:
    var = gl_sigma_theta_sq(x.theta, cfg)
    d = (u[0] - x.eta) * math.cos(x.theta) + u[1] * math.sin(x.theta)
    return math.exp(-0.5 * d * d / var) / math.sqrt(2.0 * math.pi * var)


def gl_image(x: ParamPoint, cfg: GLConfig) -> np.ndarray:
    return kernel_image(cfg, x)


def gl_grad_image(x: ParamPoint, cfg: GLConfig) -> tuple[np.ndarray, np.ndarray]:
    return kernel_grad_image(cfg, x)


def cl_sigma_n(theta: float, cfg: CLConfig) -> float:
    """Peak height of the chirp-line ridge at angle ``theta``."""
    if not abs(theta) < HALF_PI:
        raise KernelDomainError("chirp-line kernel needs |theta| < pi/2")
    s2 = cfg.sigma ** 2
    tan = math.tan(theta)
    return s2 / math.sqrt(1.0 + s2 * s2 * (cfg.N - 1) ** 2 * tan * tan)


def cl_eval(x: ParamPoint, tw: tuple[float, float], cfg: CLConfig) -> float:
    peak = cl_sigma_n(x.theta, cfg)
    n1 = cfg.N - 1
    s2 = cfg.sigma ** 2
    tan = math.tan(x.theta)
    d = tw[1] - n1 * (x.eta + tan * tw[0])
    return peak * math.exp(-2.0 * math.pi * s2 * d * d / (1.0 + s2 * s2 * n1 * n1 * tan * tan))


def cl_image(x: ParamPoint, cfg: CLConfig) -> np.ndarray:
    return kernel_image(cfg, x)


def cl_grad_image(x: ParamPoint, cfg: CLConfig) -> tuple[np.ndarray, np.ndarray]:
    return kernel_grad_image(cfg, x)


def model_to_dict(model: KernelModel) -> dict:
    if model.kind == "gl":
        return {"kind": "gl", "sigma1": model.sigma1, "sigma2": model.sigma2, "M": model.M}
    return {"kind": "cl", "sigma": model.sigma, "N": model.N, "theta_max": model.theta_max}


def model_from_dict(d: dict) -> KernelModel:
    kind = d.get("kind")
    if kind == "gl":
        return GLConfig(float(d["sigma1"]), float(d["sigma2"]), int(d["M"]))
    if kind == "cl":
        return CLConfig(float(d["sigma"]), int(d["N"]), float(d.get("theta_max", 1.25)))
    raise ValueError(f"unknown kernel kind {kind!r}")
