"""Invariant and attractive ellipsoids for linear and homogeneous state feedback.

All LMIs are written in the variables ``X = P^-1`` and ``Y = K X``. With
``A0 = A + B K0`` the invariance block is

    W(X, Y, beta) = [[A0 X + X A0^T + B Y + Y^T B^T + beta X, D],
                     [D^T,                                 -beta Q]] <= 0,

shared by the linear and the homogeneous families; the homogeneous family
adds ``Gd X + X Gd^T > 0``. Strict inequalities are imposed with a margin
``STRICT_EPS``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import numerics
from .conic import SdpProblem, Var, beta_search, solve_sdp
from .errors import (
    DimensionError,
    InfeasibleFamilyError,
    NoSolutionError,
    OutOfRangeError,
    PreconditionError,
    RefitInfeasibleError,
    UpgradeInfeasibleError,
)
from .synthesis import make_dilation

log = logging.getLogger(__name__)

STRICT_EPS = 1e-6
G0W_RTOL = 1e-8
SPHERE_TOL = 1e-8


@dataclass(frozen=True)
class LinearPlant:
    """``dx/dt = A x + B u + D w`` with admissible disturbances ``w^T Q w <= 1``."""

    A: np.ndarray
    B: np.ndarray
    D: np.ndarray
    Q: np.ndarray

    def __post_init__(self):
        A = numerics._require_square(self.A, "A")
        n = A.shape[0]
        B = numerics.as_matrix(self.B, "B")
        if B.shape[0] != n and B.size == n:
            B = B.reshape(n, 1)
        D = numerics.as_matrix(self.D, "D")
        if D.shape[0] != n and D.size == n:
            D = D.reshape(n, 1)
        Q = numerics._require_square(self.Q, "Q")
        if B.shape[0] != n:
            raise DimensionError(f"B has {B.shape[0]} rows, expected {n}")
        if D.shape[0] != n:
            raise DimensionError(f"D has {D.shape[0]} rows, expected {n}")
        if Q.shape[0] != D.shape[1]:
            raise DimensionError(f"Q is {Q.shape}, D has {D.shape[1]} columns")
        if numerics.min_eig(Q) <= 0:
            raise PreconditionError("Q must be positive definite")
        for k, v in dict(A=A, B=B, D=D, Q=numerics.sym(Q)).items():
            object.__setattr__(self, k, v)

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def m(self):
        return self.B.shape[1]

    @property
    def p(self):
        return self.D.shape[1]


@dataclass(frozen=True)
class DisturbanceShape:
    Q: np.ndarray
    D: np.ndarray
    G0w: Optional[np.ndarray] = None
    Gdw: Optional[np.ndarray] = None


@dataclass(frozen=True)
class EllipsoidCertificate:
    """Solution ``(X, Y, beta)`` of one LMI family plus the data needed to re-check it.

    ``family`` is ``"linear"``, ``"homogeneous"`` or ``"bounded-control"``
    (a linear-form certificate that also carries ``u_bar``). ``margins``
    holds the scaled minimum eigenvalue of every constraint, so all entries
    are ``>= 0`` up to solver accuracy.
    """

    X: np.ndarray
    Y: np.ndarray
    beta: float
    family: str
    margins: dict
    A0: np.ndarray
    B: np.ndarray
    D: np.ndarray
    Q: np.ndarray
    K0: np.ndarray
    Gd: np.ndarray
    mu: float = 0.0
    u_bar: Optional[float] = None
    rho: Optional[float] = None
    info: dict = field(default_factory=dict, compare=False)

    @property
    def P(self):
        return np.linalg.inv(self.X)

    @property
    def K(self):
        return np.linalg.solve(self.X, self.Y.T).T

    @property
    def trace(self):
        return float(np.trace(self.X))

    @property
    def worst_margin(self):
        return min(self.margins.values())


# -- disturbance generator and mu ranges ---------------------------------------
def solve_g0_omega(gs, D):
    """Solve ``G0 D = D G0w`` for ``G0w`` by least squares.

    Raises
    ------
    PreconditionError
        ``D`` is zero.
    NoSolutionError
        Residual above ``1e-8 (1 + ||D||)``: the disturbance does not
        commute with the dilation and the homogeneous design is inapplicable.
    """
    D = numerics.as_matrix(D, "D")
    if D.shape[0] != gs.n and D.size == gs.n:
        D = D.reshape(gs.n, 1)
    nD = np.linalg.norm(D, 2)
    if nD == 0.0:
        raise PreconditionError("D must be nonzero")
    p = D.shape[1]
    M = np.kron(np.eye(p), D)
    rhs = (gs.G0 @ D).ravel(order="F")
    z, _ = numerics.lstsq(M, rhs)
    G0w = z.reshape(p, p, order="F")
    res = float(np.linalg.norm(gs.G0 @ D - D @ G0w, 2))
    if res > G0W_RTOL * (1 + nD):
        raise NoSolutionError("G0 D = D G0w", res)
    return G0w


def disturbance_shape(plant, gs, mu):
    G0w = solve_g0_omega(gs, plant.D)
    p = plant.p
    return DisturbanceShape(plant.Q, plant.D, G0w, np.eye(p) + mu * (np.eye(p) + G0w))


@dataclass(frozen=True)
class Interval:
    """Interval of ``mu`` values; ``lo``/``hi`` may be infinite."""

    lo: float
    hi: float
    lo_closed: bool = False
    hi_closed: bool = False

    @property
    def empty(self):
        if self.lo < self.hi:
            return False
        return not (self.lo == self.hi and self.lo_closed and self.hi_closed)

    def __contains__(self, mu):
        above = mu >= self.lo if self.lo_closed else mu > self.lo
        below = mu <= self.hi if self.hi_closed else mu < self.hi
        return bool(above and below)

    def intersect(self, other):
        if self.lo > other.lo:
            lo, lc = self.lo, self.lo_closed
        elif self.lo < other.lo:
            lo, lc = other.lo, other.lo_closed
        else:
            lo, lc = self.lo, self.lo_closed and other.lo_closed
        if self.hi < other.hi:
            hi, hc = self.hi, self.hi_closed
        elif self.hi > other.hi:
            hi, hc = other.hi, other.hi_closed
        else:
            hi, hc = self.hi, self.hi_closed and other.hi_closed
        return Interval(lo, hi, lc, hc)

    def __str__(self):
        return f"{'[' if self.lo_closed else '('}{self.lo:.6g}, {self.hi:.6g}{']' if self.hi_closed else ')'}"


def _affine_interval(coeffs):
    """Open set of ``mu`` with ``1 + mu c > 0`` for every ``c`` in ``coeffs``."""
    lo, hi = -math.inf, math.inf
    for c in coeffs:
        if c > 0:
            lo = max(lo, -1.0 / c)
        elif c < 0:
            hi = min(hi, -1.0 / c)
    return Interval(lo, hi)


def mu_range_invariance(gs, G0w):
    """``mu`` with ``1 + mu (1 + Re lambda_i(G0w)) > 0`` for all ``i``, within ``[-1, 1/n_tilde]``."""
    G0w = numerics._require_square(G0w, "G0w")
    coeffs = 1.0 + np.linalg.eigvals(G0w).real
    lo, hi = gs.mu_range
    return _affine_interval(coeffs).intersect(Interval(lo, hi, True, True))


def mu_range_attractiveness(G0w, Q):
    """``mu`` with ``Q Gdw + Gdw^T Q > 0`` for ``Gdw = I + mu (I + G0w)``.

    Equivalent to ``1 + mu (1 + lambda_i(S) / 2) > 0`` with
    ``S = Q^(1/2) G0w Q^(-1/2) + Q^(-1/2) G0w^T Q^(1/2)``.
    """
    G0w = numerics._require_square(G0w, "G0w")
    Q = numerics._require_square(Q, "Q")
    Qh = numerics.sqrtm_psd(Q)
    Qih = numerics.inv_sqrtm_pd(Q)
    S = Qh @ G0w @ Qih
    lam = numerics.sym_eig(S + S.T).values
    return _affine_interval(1.0 + 0.5 * lam)


# -- LMI blocks ----------------------------------------------------------------
def invariance_block(A0, B, D, Q, X, Y, beta):
    """The block matrix ``W(X, Y, beta)``; invariance requires ``W <= 0``."""
    M11 = A0 @ X + B @ Y
    M11 = M11 + M11.T + beta * X
    return np.block([[M11, D], [D.T, -beta * Q]])


def bounded_control_block(X, Y, u_bar):
    """``[[X, Y^T], [Y, u_bar^2 I]]``; ``>= 0`` bounds ``|K x| <= u_bar`` on ``x^T X^-1 x <= 1``."""
    m = Y.shape[0]
    return np.block([[X, Y.T], [Y, u_bar**2 * np.eye(m)]])


def bounded_control_constraint(u_bar):
    """Cone callable for :class:`SdpProblem` imposing the bounded-control LMI."""
    if u_bar <= 0:
        raise ValueError("u_bar must be positive")
    return lambda v: bounded_control_block(v["X"], v["Y"], u_bar)


def _scaled_min_eig(M):
    w = numerics.sym_eig(M).values
    return float(w[0]) / max(1.0, float(np.abs(w).max()))


def lmi_invariance(X, Y, beta, A0, B, D, Q, Gd=None):
    """Scaled eigenvalue margins of the invariance LMI family.

    Returns a dict with ``"invariance"`` (for ``-W``), ``"X"`` and, when
    ``Gd`` is given, ``"GdX"`` (for ``Gd X + X Gd^T``). Negative entries
    mean the corresponding inequality is violated.
    """
    out = {
        "invariance": _scaled_min_eig(-invariance_block(A0, B, D, Q, X, Y, beta)),
        "X": _scaled_min_eig(X),
    }
    if Gd is not None:
        out["GdX"] = _scaled_min_eig(Gd @ X + X @ Gd.T)
    return out


def certificate_margins(cert):
    """Recompute every margin recorded on ``cert`` from its matrices."""
    homogeneous = cert.family == "homogeneous"
    out = lmi_invariance(
        cert.X, cert.Y, cert.beta, cert.A0, cert.B, cert.D, cert.Q,
        Gd=cert.Gd if homogeneous else None,
    )
    if cert.u_bar is not None:
        out["bounded-control"] = _scaled_min_eig(bounded_control_block(cert.X, cert.Y, cert.u_bar))
    if cert.rho is not None:
        Acl = cert.A0 + cert.B @ cert.K
        S = Acl @ cert.X + cert.rho * (cert.Gd @ cert.X)
        out["decay"] = _scaled_min_eig(-(S + S.T))
    return out


# -- trace minimization ----------------------------------------------------------
def _family(plant, A0, u_bar, Gd, eps):
    n, m = plant.n, plant.m
    B, D, Q = plant.B, plant.D, plant.Q
    E = eps * np.eye(n)

    def family(beta):
        cones = {
            "invariance": lambda v: -invariance_block(A0, B, D, Q, v["X"], v["Y"], beta),
            "X": lambda v: v["X"] - E,
        }
        if Gd is not None:
            cones["GdX"] = lambda v: Gd @ v["X"] + v["X"] @ Gd.T - E
        if u_bar is not None:
            cones["bounded-control"] = bounded_control_constraint(u_bar)
        return SdpProblem(
            variables=[Var("X", (n, n), symmetric=True), Var("Y", (m, n))],
            objective=lambda v: np.trace(v["X"]),
            cones=cones,
        )

    return family


def _certificate(plant, gs, X, Y, beta, family, Gd, mu, u_bar=None, rho=None, info=None):
    cert = EllipsoidCertificate(
        X=numerics.sym(X), Y=Y, beta=float(beta), family=family, margins={},
        A0=gs.A0, B=plant.B, D=plant.D, Q=plant.Q, K0=gs.K0, Gd=Gd, mu=float(mu),
        u_bar=u_bar, rho=rho, info=info or {},
    )
    return replace(cert, margins=certificate_margins(cert))


def min_trace_linear(plant, gs, u_bar=None, eps=STRICT_EPS, **search):
    """Minimize ``trace(X)`` over the linear invariance family.

    The Schur complement of ``W`` is
    ``A0 X + X A0^T + B Y + Y^T B^T + beta X + D Q^-1 D^T / beta <= 0``,
    so this is the classical invariant-ellipsoid design for the linear
    feedback ``u = (K0 + K) x``. ``u_bar`` optionally adds the
    bounded-control LMI.

    Raises
    ------
    InfeasibleFamilyError
    """
    beta, sol = beta_search(_family(plant, gs.A0, u_bar, None, eps), **search)
    family = "linear" if u_bar is None else "bounded-control"
    return _certificate(
        plant, gs, sol.values["X"], sol.values["Y"], beta, family,
        np.eye(plant.n), 0.0, u_bar=u_bar, info=sol.diagnostics,
    )


def min_trace_homogeneous(plant, gs, d, u_bar=None, eps=STRICT_EPS, check_mu=True, **search):
    """Minimize ``trace(X)`` over the homogeneous invariance family for dilation ``d``.

    Raises
    ------
    NoSolutionError
        ``G0 D = D G0w`` has no solution.
    OutOfRangeError
        ``d.mu`` violates the disturbance-dilation condition.
    InfeasibleFamilyError
    """
    G0w = solve_g0_omega(gs, plant.D)
    if check_mu:
        rng = mu_range_invariance(gs, G0w)
        if d.mu not in rng:
            raise OutOfRangeError(f"mu={d.mu} outside the invariance range {rng}")
    beta, sol = beta_search(_family(plant, gs.A0, u_bar, d.Gd, eps), **search)
    return _certificate(
        plant, gs, sol.values["X"], sol.values["Y"], beta, "homogeneous",
        d.Gd, d.mu, u_bar=u_bar, info=sol.diagnostics,
    )


def upgrade_linear(cert, gs, mu):
    """Reuse a linear certificate for the homogeneous controller of degree ``mu``.

    The linear optimum stays valid when ``Gd X + X Gd^T > 0`` for
    ``Gd = I + mu G0``; this is checked directly.

    Raises
    ------
    UpgradeInfeasibleError
        With the most negative eigenvalue of ``Gd X + X Gd^T``.
    """
    d = make_dilation(gs, mu)
    lam = numerics.min_eig(d.Gd @ cert.X + cert.X @ d.Gd.T)
    thr = 1e-10 * np.trace(cert.X) / cert.X.shape[0]
    if lam <= thr:
        raise UpgradeInfeasibleError(mu, lam)
    up = replace(cert, family="homogeneous", Gd=d.Gd, mu=float(mu), margins={})
    return replace(up, margins=certificate_margins(up))


def refit_X_fixed_K(plant, gs, d, K, rho=None, eps=STRICT_EPS, **search):
    """Minimize ``trace(X)`` with the gain ``K`` fixed, i.e. ``Y = K X``.

    Constraints are the invariance block, ``X > 0`` and ``Gd X + X Gd^T > 0``.
    When ``rho`` is given, the decay inequality
    ``(A0 + B K) X + X (A0 + B K)^T + rho (Gd X + X Gd^T) <= 0`` is added.

    Raises
    ------
    RefitInfeasibleError
    """
    n = plant.n
    K = numerics.as_matrix(K, "K")
    if K.shape != (plant.m, n):
        raise DimensionError(f"K must be {(plant.m, n)}, got {K.shape}")
    A0, B, D, Q, Gd = gs.A0, plant.B, plant.D, plant.Q, d.Gd
    Acl = A0 + B @ K
    E = eps * np.eye(n)

    def family(beta):
        cones = {
            "invariance": lambda v: -invariance_block(A0, B, D, Q, v["X"], K @ v["X"], beta),
            "X": lambda v: v["X"] - E,
            "GdX": lambda v: Gd @ v["X"] + v["X"] @ Gd.T - E,
        }
        if rho is not None:
            def decay(v):
                S = Acl @ v["X"] + rho * (Gd @ v["X"])
                return -(S + S.T)
            cones["decay"] = decay
        return SdpProblem(
            variables=[Var("X", (n, n), symmetric=True)],
            objective=lambda v: np.trace(v["X"]),
            cones=cones,
        )

    try:
        beta, sol = beta_search(family, **search)
    except InfeasibleFamilyError as exc:
        raise RefitInfeasibleError(f"no X for the fixed gain: {exc}") from exc
    X = sol.values["X"]
    return _certificate(
        plant, gs, X, K @ X, beta, "homogeneous", Gd, d.mu,
        rho=None if rho is None else float(rho), info=sol.diagnostics,
    )


# -- boundary oracle -------------------------------------------------------------
def closed_loop_rhs(plant, controller, x, w):
    return plant.A @ x + plant.B @ controller.eval_u(x) + plant.D @ w


def boundary_derivative(P, controller, plant, x, w):
    """``x^T P f(x, w)`` for ``x`` on the unit ``P``-sphere.

    Non-positive values everywhere on the sphere (for admissible ``w``)
    are equivalent to invariance of the ellipsoid.

    Raises
    ------
    PreconditionError
        ``| x^T P x - 1 | > 1e-8``.
    """
    x = np.asarray(x, dtype=float)
    q = float(x @ P @ x)
    if abs(q - 1.0) > SPHERE_TOL:
        raise PreconditionError(f"x is not on the unit P-sphere (x^T P x = {q:.12g})")
    return float(x @ P @ closed_loop_rhs(plant, controller, x, np.asarray(w, dtype=float)))


def hom_norm_rate(ctx, controller, plant, x, w):
    """Time derivative of ``||x||_{d,P}`` along the closed loop."""
    return float(ctx.gradient(x) @ closed_loop_rhs(plant, controller, x, np.asarray(w, dtype=float)))


def sample_unit_sphere_P(P, size, rng):
    """``size`` points with ``x^T P x = 1``: ``x = P^(-1/2) v``, ``v`` uniform on the sphere."""
    v = rng.standard_normal((size, P.shape[0]))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return v @ numerics.inv_sqrtm_pd(P)


def sample_Q_ball(Q, size, rng):
    """Uniform samples of ``{w : w^T Q w <= 1}``."""
    p = Q.shape[0]
    v = rng.standard_normal((size, p))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    r = rng.uniform(size=(size, 1)) ** (1.0 / p)
    return (v * r) @ numerics.inv_sqrtm_pd(Q)


@dataclass(frozen=True)
class BoundaryCheck:
    worst: float
    violations: int
    samples: int
    counterexample: Optional[tuple] = None

    @property
    def ok(self):
        return self.violations == 0


def boundary_check(P, controller, plant, samples=10_000, seed=0, tol=1e-7):
    """Monte-Carlo search for ``x^T P f(x, w) > tol`` over the sphere and the disturbance ball."""
    if samples <= 0:
        raise ValueError("samples must be positive")
    rng = np.random.default_rng(seed)
    X = sample_unit_sphere_P(P, samples, rng)
    W = sample_Q_ball(plant.Q, samples, rng)
    worst, arg, bad = -math.inf, None, 0
    for x, w in zip(X, W):
        # renormalize against rounding in the sampler
        x = x / math.sqrt(x @ P @ x)
        val = boundary_derivative(P, controller, plant, x, w)
        if val > tol:
            bad += 1
        if val > worst:
            worst, arg = val, (x, w)
    return BoundaryCheck(worst, bad, samples, arg if bad else None)
