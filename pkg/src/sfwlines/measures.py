"""Parameter points, parameter boxes and finite discrete measures.

A line is identified by an offset ``eta`` and an angle ``theta``. The unit of
``eta`` is owned by the kernel model (pixels for Gaussian lines, normalized
frequency for chirp lines); nothing here depends on it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

HALF_PI = 0.5 * math.pi


@dataclass(frozen=True)
class ParamPoint:
    eta: float
    theta: float

    def __post_init__(self):
        if not (-HALF_PI < self.theta <= HALF_PI):
            raise ValueError(f"theta={self.theta!r} outside (-pi/2, pi/2]")
        object.__setattr__(self, "eta", float(self.eta))
        object.__setattr__(self, "theta", float(self.theta))

    def as_array(self) -> np.ndarray:
        return np.array([self.eta, self.theta])


@dataclass(frozen=True)
class ParamDomain:
    """Compact box ``[theta_min, theta_max] x [eta_min, eta_max]``."""

    theta_min: float
    theta_max: float
    eta_min: float
    eta_max: float

    def __post_init__(self):
        vals = (self.theta_min, self.theta_max, self.eta_min, self.eta_max)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("domain bounds must be finite")
        if not (self.theta_min < self.theta_max and self.eta_min < self.eta_max):
            raise ValueError(f"degenerate domain {self}")
        if self.theta_min <= -HALF_PI or self.theta_max > HALF_PI:
            raise ValueError("theta bounds must lie in (-pi/2, pi/2]")

    def contains(self, x: ParamPoint) -> bool:
        return (self.theta_min <= x.theta <= self.theta_max
                and self.eta_min <= x.eta <= self.eta_max)

    def center(self) -> ParamPoint:
        return ParamPoint(0.5 * (self.eta_min + self.eta_max),
                          0.5 * (self.theta_min + self.theta_max))

    def bounds(self) -> list[tuple[float, float]]:
        """(eta, theta) bounds in the order used by the optimizers."""
        return [(self.eta_min, self.eta_max), (self.theta_min, self.theta_max)]


@dataclass(frozen=True)
class DiscreteMeasure:
    """Finite sum of weighted Dirac masses ``sum_k alpha_k delta_{x_k}``.

    Spikes keep their insertion order; no canonical sorting is applied.
    """

    points: tuple[ParamPoint, ...] = ()
    amplitudes: tuple[float, ...] = ()

    def __post_init__(self):
        pts = tuple(self.points)
        amps = tuple(float(a) for a in self.amplitudes)
        if len(pts) != len(amps):
            raise ValueError(
                f"{len(pts)} points but {len(amps)} amplitudes")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "amplitudes", amps)

    def __len__(self):
        return len(self.points)

    @classmethod
    def from_arrays(cls, etas: Iterable[float], thetas: Iterable[float],
                    amplitudes: Iterable[float]) -> "DiscreteMeasure":
        pts = tuple(ParamPoint(float(e), float(t)) for e, t in zip(etas, thetas))
        return cls(pts, tuple(float(a) for a in amplitudes))

    @property
    def etas(self) -> np.ndarray:
        return np.array([p.eta for p in self.points], dtype=float)

    @property
    def thetas(self) -> np.ndarray:
        return np.array([p.theta for p in self.points], dtype=float)

    @property
    def alphas(self) -> np.ndarray:
        return np.array(self.amplitudes, dtype=float)

    def with_spike(self, x: ParamPoint, alpha: float) -> "DiscreteMeasure":
        return DiscreteMeasure(self.points + (x,), self.amplitudes + (float(alpha),))

    def with_amplitudes(self, amplitudes: Sequence[float]) -> "DiscreteMeasure":
        return DiscreteMeasure(self.points, tuple(float(a) for a in amplitudes))

    def to_dict(self) -> dict:
        return {
            "lines": [
                {"eta": p.eta, "theta": p.theta, "amplitude": a}
                for p, a in zip(self.points, self.amplitudes)
            ]
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DiscreteMeasure":
        lines = d["lines"]
        return cls.from_arrays([ln["eta"] for ln in lines],
                               [ln["theta"] for ln in lines],
                               [ln["amplitude"] for ln in lines])


def tv_norm(m: DiscreteMeasure) -> float:
    """Total-variation norm of a discrete measure, i.e. the l1 norm of its amplitudes."""
    return float(sum(abs(a) for a in m.amplitudes))


def prune(m: DiscreteMeasure, tol: float) -> DiscreteMeasure:
    """Drop every spike with ``|amplitude| <= tol``; survivors keep their order."""
    if tol < 0:
        raise ValueError("tol must be >= 0")
    keep = [i for i, a in enumerate(m.amplitudes) if abs(a) > tol]
    return DiscreteMeasure(tuple(m.points[i] for i in keep),
                           tuple(m.amplitudes[i] for i in keep))


def clamp_to_domain(x: ParamPoint, d: ParamDomain) -> ParamPoint:
    return ParamPoint(min(max(x.eta, d.eta_min), d.eta_max),
                      min(max(x.theta, d.theta_min), d.theta_max))
