"""Off-the-grid recovery of lines in images with the Sliding Frank-Wolfe algorithm."""

from sfwlines.measures import (
    DiscreteMeasure,
    ParamDomain,
    ParamPoint,
    clamp_to_domain,
    prune,
    tv_norm,
)
from sfwlines.kernels import CLConfig, GLConfig, KernelModel
from sfwlines.forward import (
    Observation,
    apply,
    certificate,
    certificate_grad,
    objective,
    residual,
)
from sfwlines.solvers import OptimizerSettings, lasso_amplitudes, sliding_step
from sfwlines.sfw import SFWConfig, SFWReport, sfw_run

__all__ = [
    "CLConfig",
    "DiscreteMeasure",
    "GLConfig",
    "KernelModel",
    "Observation",
    "OptimizerSettings",
    "ParamDomain",
    "ParamPoint",
    "SFWConfig",
    "SFWReport",
    "apply",
    "certificate",
    "certificate_grad",
    "clamp_to_domain",
    "lasso_amplitudes",
    "objective",
    "prune",
    "residual",
    "sfw_run",
    "sliding_step",
    "tv_norm",
]

__version__ = "0.1.0"
