"""Linear dilations ``d(s) = exp(s Gd)`` and their monotonicity certificates."""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import numerics
from .errors import DimensionError, InconsistentGeneratorError, NotMonotoneError

ANTI_HURWITZ_TOL = 1e-10
PD_RTOL = 1e-10


@dataclass(frozen=True)
class Dilation:
    """Dilation group generated by an anti-Hurwitz matrix ``Gd``.

    ``mu`` and ``G0`` record how the generator was built (``Gd = I + mu G0``);
    both are informational.
    """

    Gd: np.ndarray
    mu: float = 0.0
    G0: Optional[np.ndarray] = None

    def __post_init__(self):
        Gd = numerics.as_matrix(self.Gd, "Gd")
        if Gd.shape[0] != Gd.shape[1]:
            raise DimensionError(f"Gd must be square, got {Gd.shape}")
        object.__setattr__(self, "Gd", Gd)
        re = np.linalg.eigvals(Gd).real
        if re.size and re.min() <= ANTI_HURWITZ_TOL:
            raise InconsistentGeneratorError(
                f"Gd is not anti-Hurwitz (min real part of eigenvalues {re.min():.3e})"
            )

    @property
    def n(self):
        return self.Gd.shape[0]

    @classmethod
    def standard(cls, n):
        """Uniform dilation ``d(s) = e^s I``."""
        return cls(np.eye(n), mu=0.0)

    @property
    def is_standard(self):
        return np.array_equal(self.Gd, np.eye(self.n))

    def __call__(self, s):
        return dmap(self, s)


def dmap(d, s):
    """Matrix ``d(s) = expm(s Gd)``."""
    if d.is_standard:
        return math.exp(s) * np.eye(d.n)
    return numerics.expm(d.Gd, s)


@dataclass(frozen=True)
class MonotonicityCert:
    """``P`` with ``P Gd + Gd^T P > 0`` plus the contraction rates bounding ``||d(s)||_P``.

    For ``s <= 0``: ``exp(alpha s) <= ||d(s)||_P <= exp(beta s)``; the
    inequalities flip for ``s >= 0``.
    """

    P: np.ndarray
    alpha: float
    beta: float


def _pd_threshold(P):
    return PD_RTOL * max(np.trace(P) / P.shape[0], 1e-300)


def certify_monotone(d, P):
    """Check strict monotonicity of ``d`` in the norm ``||x||_P``.

    Raises
    ------
    NotMonotoneError
        If ``P`` or ``P Gd + Gd^T P`` is not positive definite; the offending
        eigenvalue is attached.
    """
    P = numerics.sym(numerics.as_matrix(P, "P"))
    if P.shape != d.Gd.shape:
        raise DimensionError(f"P has shape {P.shape}, Gd has {d.Gd.shape}")
    thr = _pd_threshold(P)
    lp = numerics.min_eig(P)
    if lp <= thr:
        raise NotMonotoneError("P", lp)
    lm = numerics.min_eig(P @ d.Gd + d.Gd.T @ P)
    if lm <= thr:
        raise NotMonotoneError("P Gd + Gd^T P", lm)
    Ph = numerics.sqrtm_psd(P)
    Pih = numerics.inv_sqrtm_pd(P)
    S = Ph @ d.Gd @ Pih
    w = numerics.sym_eig(S + S.T).values
    return MonotonicityCert(P=P, alpha=0.5 * float(w[-1]), beta=0.5 * float(w[0]))


def norm_bracket(cert, r):
    """Interval containing ``s`` with ``||d(-s) x||_P = 1`` given ``r = ||x||_P``."""
    if r <= 0:
        raise ValueError("r must be positive")
    lr = math.log(r)
    if r >= 1.0:
        return lr / cert.alpha, lr / cert.beta
    return lr / cert.beta, lr / cert.alpha


def p_operator_norm(M, P):
    """Induced norm of ``M`` with respect to ``||x||_P``."""
    Ph = numerics.sqrtm_psd(P)
    Pih = numerics.inv_sqrtm_pd(P)
    return float(np.linalg.norm(Ph @ M @ Pih, 2))
