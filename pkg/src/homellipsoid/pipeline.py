"""Design and verification steps shared by the CLI and scripted use."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import ellipsoid as ell
from .controller import HomogeneousController
from .dilation import Dilation
from .errors import InfeasibleError, NotMonotoneError
from .synthesis import make_dilation, solve_generator

log = logging.getLogger(__name__)

MODES = ("linear", "homogeneous", "upgrade", "refit")
MARGIN_TOL = 1e-7


@dataclass
class Design:
    mode: str
    controller: HomogeneousController
    certificate: ell.EllipsoidCertificate
    linear: Optional[ell.EllipsoidCertificate] = None


def _linear(problem, gs):
    s = problem.solver
    cert = ell.min_trace_linear(problem.plant, gs, u_bar=problem.u_bar, eps=s.eps, **s.search())
    log.info("linear design: beta=%.6g trace=%.6g margins=%s", cert.beta, cert.trace, cert.margins)
    return cert


def controller_for(cert):
    if cert.family == "homogeneous":
        d = Dilation(cert.Gd, mu=cert.mu)
    else:
        d = Dilation.standard(cert.X.shape[0])
    try:
        return HomogeneousController(cert.K0, cert.K, cert.P, d, cert.mu)
    except NotMonotoneError as exc:
        raise InfeasibleError(f"certificate shape is not monotone for the dilation: {exc}") from exc


def design(problem, mode="refit"):
    """Run one design mode on ``problem``.

    ``linear`` minimizes the trace of the linear family; ``homogeneous``
    minimizes the homogeneous family at ``problem.mu``; ``upgrade`` reuses
    the linear optimum for degree ``mu``; ``refit`` keeps a linear gain
    (``problem.gain`` as a total gain, else the linear optimum) and
    re-optimizes ``X`` for the homogeneous constraints.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    plant = problem.plant
    gs = solve_generator(plant.A, plant.B)
    log.info("generator residual %.3e, n_tilde=%d", gs.residual, gs.n_tilde)
    s = problem.solver
    lin = None
    if mode == "linear":
        cert = lin = _linear(problem, gs)
    elif mode == "homogeneous":
        d = make_dilation(gs, problem.mu)
        cert = ell.min_trace_homogeneous(plant, gs, d, u_bar=problem.u_bar, eps=s.eps, **s.search())
    elif mode == "upgrade":
        lin = _linear(problem, gs)
        cert = ell.upgrade_linear(lin, gs, problem.mu)
    else:
        d = make_dilation(gs, problem.mu)
        if problem.gain is not None:
            K = np.asarray(problem.gain) - gs.K0
        else:
            lin = _linear(problem, gs)
            K = lin.K
        cert = ell.refit_X_fixed_K(plant, gs, d, K, rho=problem.rho, eps=s.eps, **s.search())
    log.info("%s certificate: beta=%.6g trace=%.6g margins=%s", mode, cert.beta, cert.trace, cert.margins)
    history = cert.info.get("history", [])
    for b, status, obj in history:
        log.debug("beta=%.6g status=%s objective=%.6g", b, status, obj)
    return Design(mode, controller_for(cert), cert, lin)


@dataclass
class VerifyReport:
    margins: dict
    margins_ok: bool
    gain_error: float
    boundary: ell.BoundaryCheck

    @property
    def ok(self):
        return self.margins_ok and self.gain_error <= 1e-6 and self.boundary.ok


def verify(controller, cert, plant, samples=10_000, seed=0, tol=MARGIN_TOL):
    """Re-check the certificate margins and run the boundary Monte-Carlo with ``controller``."""
    margins = ell.certificate_margins(cert)
    margins_ok = min(margins.values()) >= -tol
    K = cert.K
    gain_error = float(np.abs(controller.K - K).max() / max(1.0, np.abs(K).max()))
    gain_error = max(gain_error, float(np.abs(controller.K0 - cert.K0).max() / max(1.0, np.abs(cert.K0).max())))
    check = ell.boundary_check(controller.P, controller, plant, samples=samples, seed=seed, tol=tol)
    return VerifyReport(margins, margins_ok, gain_error, check)
