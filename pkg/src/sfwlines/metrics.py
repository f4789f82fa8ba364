"""Comparison of estimated lines against ground truth."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from sfwlines.measures import DiscreteMeasure

BRUTE_FORCE_MAX = 9


@dataclass(frozen=True)
class ErrorReport:
    delta_theta_bar: float
    delta_eta_bar: float
    delta_alpha_bar: float
    matched_count: int
    true_count: int
    est_count: int
    assignment: tuple[tuple[int, int], ...]

    @property
    def empty(self) -> bool:
        return self.matched_count == 0

    def to_dict(self) -> dict:
        def num(v):
            return None if math.isnan(v) else v
        return {
            "delta_theta_bar": num(self.delta_theta_bar),
            "delta_eta_bar": num(self.delta_eta_bar),
            "delta_alpha_bar": num(self.delta_alpha_bar),
            "matched_count": self.matched_count,
            "true_count": self.true_count,
            "est_count": self.est_count,
            "assignment": [list(p) for p in self.assignment],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ErrorReport":
        def num(v):
            return math.nan if v is None else float(v)
        return cls(num(d["delta_theta_bar"]), num(d["delta_eta_bar"]),
                   num(d["delta_alpha_bar"]), int(d["matched_count"]),
                   int(d["true_count"]), int(d["est_count"]),
                   tuple((int(a), int(b)) for a, b in d["assignment"]))


def cost_matrix(est: DiscreteMeasure, truth: DiscreteMeasure, eta_scale: float) -> np.ndarray:
    """Pairwise ``|d theta| + |d eta| / eta_scale``; rows are estimates."""
    dt = np.abs(est.thetas[:, None] - truth.thetas[None, :])
    de = np.abs(est.etas[:, None] - truth.etas[None, :]) / eta_scale
    return dt + de


def _brute_force(C: np.ndarray) -> list[tuple[int, int]]:
    ne, nt = C.shape
    best, best_cost = None, math.inf
    if ne >= nt:
        for perm in itertools.permutations(range(ne), nt):
            c = sum(C[perm[j], j] for j in range(nt))
            if c < best_cost - 1e-15:
                best, best_cost = [(perm[j], j) for j in range(nt)], c
    else:
        for perm in itertools.permutations(range(nt), ne):
            c = sum(C[i, perm[i]] for i in range(ne))
            if c < best_cost - 1e-15:
                best, best_cost = [(i, perm[i]) for i in range(ne)], c
    return sorted(best)


def match_lines(est: DiscreteMeasure, truth: DiscreteMeasure,
                eta_scale: float = 1.0) -> tuple[tuple[int, int], ...]:
    """Minimum-cost one-to-one pairing ``(est index, truth index)``.

    Amplitudes play no role. Small instances are solved by enumeration, larger
    ones with the Hungarian algorithm; both are exact.
    """
    if not len(est) or not len(truth):
        return ()
    C = cost_matrix(est, truth, eta_scale)
    if max(C.shape) <= BRUTE_FORCE_MAX and math.perm(max(C.shape), min(C.shape)) <= 400_000:
        return tuple(_brute_force(C))
    rows, cols = linear_sum_assignment(C)
    return tuple(sorted(zip(rows.tolist(), cols.tolist())))


def param_errors(est: DiscreteMeasure, truth: DiscreteMeasure,
                 assignment) -> ErrorReport:
    """Mean absolute parameter errors over matched pairs (NaN if nothing matched)."""
    assignment = tuple((int(i), int(j)) for i, j in assignment)
    if not assignment:
        return ErrorReport(math.nan, math.nan, math.nan, 0, len(truth), len(est), ())
    ie = [i for i, _ in assignment]
    it = [j for _, j in assignment]
    dt = np.abs(est.thetas[ie] - truth.thetas[it]).mean()
    de = np.abs(est.etas[ie] - truth.etas[it]).mean()
    da = np.abs(est.alphas[ie] - truth.alphas[it]).mean()
    return ErrorReport(float(dt), float(de), float(da), len(assignment),
                       len(truth), len(est), assignment)


def evaluate(est: DiscreteMeasure, truth: DiscreteMeasure, eta_scale: float = 1.0) -> ErrorReport:
    return param_errors(est, truth, match_lines(est, truth, eta_scale))
