"""Synthetic observations with known ground truth.

Gaussian-line images get i.i.d. Gaussian pixel noise. Chirp experiments
build the complex 1D signal, add noise to it, and take a Gaussian-window
spectrogram, so interference between chirps is genuine rather than modelled.

Random numbers come from numpy's PCG64 bit generator seeded with the given
integer; normals use numpy's ziggurat ``standard_normal``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from sfwlines.forward import Observation, apply
from sfwlines.kernels import KernelDomainError, KernelModel, model_from_dict, model_to_dict
from sfwlines.measures import HALF_PI, DiscreteMeasure

WINDOW_CUTOFF = 1e-12


def rng_gaussian(seed: int, count: int) -> np.ndarray:
    if count < 0:
        raise ValueError("count must be >= 0")
    return np.random.Generator(np.random.PCG64(seed)).standard_normal(count)


@dataclass(frozen=True)
class GroundTruth:
    lines: DiscreteMeasure
    model: KernelModel
    noise_sigma: float
    seed: int
    noise_kind: str = "complex"  # chirp noise only: "complex" or "real"

    def to_dict(self) -> dict:
        return {
            "lines": self.lines.to_dict()["lines"],
            "model": model_to_dict(self.model),
            "noise_sigma": self.noise_sigma,
            "seed": self.seed,
            "noise_kind": self.noise_kind,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GroundTruth":
        return cls(DiscreteMeasure.from_dict({"lines": d["lines"]}),
                   model_from_dict(d["model"]), float(d["noise_sigma"]),
                   int(d["seed"]), d.get("noise_kind", "complex"))


def synth_gl(gt: GroundTruth) -> Observation:
    if gt.model.kind != "gl":
        raise ValueError("synth_gl needs a Gaussian-line model")
    clean = apply(gt.model, gt.lines)
    if gt.noise_sigma == 0:
        return clean
    N = gt.model.N
    noise = gt.noise_sigma * rng_gaussian(gt.seed, N * N)
    return Observation(clean.pixels + noise, N)


def synth_chirp_signal(lines: DiscreteMeasure, N: int, noise_sigma: float, seed: int,
                       noise_kind: str = "complex") -> np.ndarray:
    """Sum of linear chirps sampled at ``t_n = n / N``, plus noise.

    A line ``(eta, theta)`` has instantaneous frequency
    ``(N - 1) * (eta + tan(theta) * t)`` cycles per unit time, so its ridge
    follows the chirp-line kernel.
    """
    t = np.arange(N) / N
    f = np.zeros(N, dtype=complex)
    n1 = N - 1
    for p, a in zip(lines.points, lines.amplitudes):
        if not abs(p.theta) < HALF_PI:
            raise KernelDomainError("chirp needs |theta| < pi/2")
        beta = n1 * math.tan(p.theta)
        f += a * np.exp(2j * np.pi * (n1 * p.eta * t + 0.5 * beta * t * t))
    if noise_sigma > 0:
        z = rng_gaussian(seed, 2 * N)
        if noise_kind == "complex":
            f += noise_sigma / math.sqrt(2.0) * (z[:N] + 1j * z[N:])
        elif noise_kind == "real":
            f += noise_sigma * z[:N]
        else:
            raise ValueError(f"unknown noise kind {noise_kind!r}")
    return f


def spectrogram(f, sigma: float, N: int | None = None) -> Observation:
    """``|V[n, k]|**2`` for the Gaussian window ``exp(-pi t^2 / sigma^2)``.

    ``V[n, k] = (1/N) sum_m f[m] h((m - n)/N) exp(-2i pi k (m - n) / N)`` with
    the signal zero outside ``[0, N-1]`` and the window cut where it drops
    below 1e-12. Rows of the result are frequency bins ``k``, columns time ``n``.
    """
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    f = np.asarray(f, dtype=complex)
    N = f.size if N is None else N
    if f.size != N:
        raise ValueError("signal length must equal N")
    half = int(math.floor(sigma * N * math.sqrt(-math.log(WINDOW_CUTOFF) / math.pi)))
    offsets = np.arange(-half, half + 1)
    h = np.exp(-np.pi * (offsets / N) ** 2 / sigma ** 2)
    keep = h > WINDOW_CUTOFF
    offsets, h = offsets[keep], h[keep]

    m = np.arange(N)[:, None] + offsets[None, :]  # (time n, offset j)
    inside = (m >= 0) & (m < N)
    g = np.where(inside, f[np.clip(m, 0, N - 1)], 0.0) * h[None, :]
    buf = np.zeros((N, N), dtype=complex)
    cols = np.broadcast_to(offsets % N, g.shape)
    rows = np.broadcast_to(np.arange(N)[:, None], g.shape)
    np.add.at(buf, (rows, cols), g)
    V = np.fft.fft(buf, axis=1) / N  # (n, k)
    return Observation((np.abs(V) ** 2).T.copy(), N)


def synth_cl(gt: GroundTruth) -> Observation:
    if gt.model.kind != "cl":
        raise ValueError("synth_cl needs a chirp-line model")
    N = gt.model.N
    f = synth_chirp_signal(gt.lines, N, gt.noise_sigma, gt.seed, gt.noise_kind)
    return spectrogram(f, gt.model.sigma, N)


def synthesize_observation(gt: GroundTruth) -> Observation:
    return synth_gl(gt) if gt.model.kind == "gl" else synth_cl(gt)
