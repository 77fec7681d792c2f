"""Invariant-ellipsoid design of linear and generalized-homogeneous state feedback."""

__version__ = "0.1.0"

from .controller import HomogeneousController, LinearController, sup_u_bound
from .dilation import Dilation, MonotonicityCert, certify_monotone, dmap, norm_bracket
from .ellipsoid import (
    EllipsoidCertificate,
    LinearPlant,
    lmi_invariance,
    min_trace_homogeneous,
    min_trace_linear,
    mu_range_attractiveness,
    mu_range_invariance,
    refit_X_fixed_K,
    solve_g0_omega,
    upgrade_linear,
)
from .homnorm import HomNormContext, hom_norm, hom_norm_gradient, hom_project
from .synthesis import GeneratorSolution, make_dilation, solve_generator, solve_stabilizing

__all__ = [
    "Dilation", "EllipsoidCertificate", "GeneratorSolution", "HomNormContext",
    "HomogeneousController", "LinearController", "LinearPlant", "MonotonicityCert",
    "certify_monotone", "dmap", "hom_norm", "hom_norm_gradient", "hom_project",
    "lmi_invariance", "make_dilation", "min_trace_homogeneous", "min_trace_linear",
    "mu_range_attractiveness", "mu_range_invariance", "norm_bracket", "refit_X_fixed_K",
    "solve_g0_omega", "solve_generator", "solve_stabilizing", "sup_u_bound", "upgrade_linear",
]
