"""State-feedback laws: the homogeneous controller and its linear special case.

The homogeneous law is

    u(x) = K0 x + ||x||_{d,P}^(mu+1) K d(-ln ||x||_{d,P}) x,

with ``u(0) = 0``. Below ``norm_floor`` the second term is continued by a
linear ramp in the norm (``mu > -1``) or evaluated on the unit sphere
(``mu = -1``) so the integrator never sees ``d(-ln r)`` for tiny ``r``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import numerics
from .dilation import Dilation
from .errors import DegenerateInputError, NotApplicableError
from .homnorm import HomNormContext


@dataclass(frozen=True)
class LinearController:
    """``u = K x``."""

    K: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "K", numerics.as_matrix(self.K, "K"))

    def eval_u(self, x):
        return self.K @ np.asarray(x, dtype=float)

    def eval_many(self, X):
        return np.atleast_2d(X) @ self.K.T


@dataclass(frozen=True)
class HomogeneousController:
    K0: np.ndarray
    K: np.ndarray
    P: np.ndarray
    d: Dilation
    mu: float
    norm_floor: float = 1e-9
    ctx: HomNormContext = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "K0", numerics.as_matrix(self.K0, "K0"))
        object.__setattr__(self, "K", numerics.as_matrix(self.K, "K"))
        object.__setattr__(self, "P", numerics.sym(numerics.as_matrix(self.P, "P")))
        object.__setattr__(self, "mu", float(self.mu))
        object.__setattr__(self, "ctx", HomNormContext(self.d, self.P))

    @classmethod
    def from_certificate(cls, cert, norm_floor=1e-9):
        d = Dilation(cert.Gd, mu=cert.mu)
        return cls(cert.K0, cert.K, cert.P, d, cert.mu, norm_floor)

    @property
    def is_linear(self):
        return self.mu == 0.0 and self.d.is_standard

    def eval_u(self, x):
        x = np.asarray(x, dtype=float)
        if self.is_linear:
            return (self.K0 + self.K) @ x
        base = self.K0 @ x
        if not np.any(x):
            return base
        try:
            r, pi = self.ctx.project(x)
        except DegenerateInputError:
            return base
        if self.mu == -1.0:
            # r^(mu+1) = 1: the feedback term lives on the unit sphere
            return base + self.K @ pi
        if r >= self.norm_floor:
            return base + r ** (self.mu + 1.0) * (self.K @ pi)
        # ramp matching the exact value at r = norm_floor
        return base + (r * self.norm_floor**self.mu) * (self.K @ pi)

    def eval_many(self, X):
        return np.array([self.eval_u(x) for x in np.atleast_2d(X)])

    def sup_u_bound(self):
        return sup_u_bound(self)


def sup_u_bound(c):
    """Supremum of ``||u(x)||`` over ``x != 0`` for ``mu = -1`` and ``K0 = 0``.

    Equals ``sqrt(lambda_max(P^(-1/2) K^T K P^(-1/2)))``, the largest value of
    ``||K pi||`` on the unit ``P``-sphere.

    Raises
    ------
    NotApplicableError
        ``mu != -1`` or ``K0 != 0``.
    """
    if c.mu != -1.0 or np.abs(c.K0).max(initial=0.0) > 1e-12 * (1.0 + np.abs(c.K).max(initial=0.0)):
        raise NotApplicableError("sup_u_bound needs mu = -1 and K0 = 0")
    Pih = numerics.inv_sqrtm_pd(c.P)
    M = Pih @ c.K.T @ c.K @ Pih
    return math.sqrt(max(numerics.sym_eig(M).max, 0.0))
