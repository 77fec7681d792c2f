"""Homogeneous design equations: dilation generator, ``K0``/``A0`` and the stabilizing pair.

The generator pair ``(G0, Y0)`` solves

    A G0 - G0 A + B Y0 = A,    G0 B = 0,

after which ``K0 = Y0 (G0 - I)^-1`` and ``A0 = A + B K0`` satisfy
``A0 Gd = (Gd + mu I) A0`` and ``Gd B = B`` for ``Gd = I + mu G0``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from . import numerics
from .conic import SdpProblem, Var, solve_sdp
from .dilation import Dilation
from .errors import (
    DegenerateSolutionError,
    DimensionError,
    NoSolutionError,
    OutOfRangeError,
    SynthesisInfeasibleError,
)

log = logging.getLogger(__name__)

RESIDUAL_RTOL = 1e-8
SINGULAR_RTOL = 1e-9
MAX_RETRIES = 5
HOMOGENEITY_TOL = 1e-7
CONE_EPS = 1e-6


@dataclass(frozen=True)
class GeneratorSolution:
    """Particular solution of the generator equations and the derived gains."""

    A: np.ndarray
    B: np.ndarray
    G0: np.ndarray
    Y0: np.ndarray
    residual: float
    K0: np.ndarray
    A0: np.ndarray
    n_tilde: int

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def m(self):
        return self.B.shape[1]

    @property
    def mu_range(self):
        """Closed interval ``[-1, 1/n_tilde]`` of admissible homogeneity degrees."""
        return -1.0, 1.0 / self.n_tilde


def generator_system(A, B):
    """Vectorized form ``M z = rhs`` of the generator equations.

    Unknowns are ``z = [vec(G0); vec(Y0)]`` with column-major ``vec``.
    """
    n, m = B.shape
    I = np.eye(n)
    top = np.hstack([np.kron(I, A) - np.kron(A.T, I), np.kron(I, B)])
    bottom = np.hstack([np.kron(B.T, I), np.zeros((n * m, m * n))])
    M = np.vstack([top, bottom])
    rhs = np.concatenate([A.ravel(order="F"), np.zeros(n * m)])
    return M, rhs


def _unpack(z, n, m):
    G0 = z[: n * n].reshape(n, n, order="F")
    Y0 = z[n * n:].reshape(m, n, order="F")
    return G0, Y0


def generator_residual(A, B, G0, Y0):
    """Return ``(||A G0 - G0 A + B Y0 - A||, ||G0 B||)`` in the spectral norm."""
    r1 = np.linalg.norm(A @ G0 - G0 @ A + B @ Y0 - A, 2)
    r2 = np.linalg.norm(G0 @ B, 2)
    return float(r1), float(r2)


def _is_singular(M):
    sv = np.linalg.svd(M, compute_uv=False)
    return sv[-1] <= SINGULAR_RTOL * max(sv[0], 1e-300)


def solve_generator(A, B, seed=0):
    """Solve the generator equations by minimum-norm least squares.

    Parameters
    ----------
    A, B : array_like
        Plant matrices, ``(A, B)`` controllable.
    seed : int
        Seed for the null-space perturbation used when ``G0 - I`` comes out
        singular.

    Returns
    -------
    GeneratorSolution

    Raises
    ------
    NoSolutionError
        The least-squares residual exceeds ``1e-8 (1 + ||A||)``.
    DegenerateSolutionError
        ``G0 - I`` stays singular after the retries.
    """
    A = numerics._require_square(A, "A")
    B = numerics.as_matrix(B, "B")
    n = A.shape[0]
    if B.shape[0] != n:
        raise DimensionError(f"B has {B.shape[0]} rows, expected {n}")
    m = B.shape[1]
    n_tilde = numerics.controllability_index(A, B)
    if np.linalg.norm(np.linalg.matrix_power(A, n), 2) > 1e-8 * (1 + np.linalg.norm(A, 2)) ** n:
        log.warning("A is not nilpotent; solving the generator equations anyway")

    M, rhs = generator_system(A, B)
    z, res = numerics.lstsq(M, rhs)
    scale = 1.0 + np.linalg.norm(A, 2)
    if res > RESIDUAL_RTOL * scale:
        raise NoSolutionError("generator equations", res)

    I = np.eye(n)
    G0, Y0 = _unpack(z, n, m)
    if _is_singular(G0 - I):
        # move along the null space of M; the equations stay satisfied
        _, sv, Vt = np.linalg.svd(M)
        rank = int(np.sum(sv > numerics.RANK_RTOL * sv[0]))
        N = Vt[rank:].T
        rng = np.random.default_rng(seed)
        for _ in range(MAX_RETRIES):
            if N.shape[1] == 0:
                break
            zt = z + N @ rng.normal(scale=0.1, size=N.shape[1])
            G0, Y0 = _unpack(zt, n, m)
            if not _is_singular(G0 - I):
                z = zt
                break
        else:
            G0, Y0 = _unpack(z, n, m)
        if _is_singular(G0 - I):
            raise DegenerateSolutionError("G0 - I is singular for every particular solution tried")

    return _finish(A, B, G0, Y0, n_tilde)


def _finish(A, B, G0, Y0, n_tilde):
    n = A.shape[0]
    K0 = np.linalg.solve((G0 - np.eye(n)).T, Y0.T).T
    A0 = A + B @ K0
    r1, r2 = generator_residual(A, B, G0, Y0)
    # A0 G0 - G0 A0 = A0 is the mu-free part of A0 Gd = (Gd + mu I) A0
    h = np.linalg.norm(A0 @ G0 - G0 @ A0 - A0, 2)
    if h > HOMOGENEITY_TOL * (1 + np.linalg.norm(A0, 2)):
        log.warning("homogeneity identity residual %.3e exceeds tolerance", h)
    return GeneratorSolution(
        A=A, B=B, G0=G0, Y0=Y0, residual=max(r1, r2), K0=K0, A0=A0, n_tilde=n_tilde
    )


def from_generator(A, B, G0, Y0):
    """Build a :class:`GeneratorSolution` from a given ``(G0, Y0)`` without solving.

    The residual is recorded, not enforced, so externally supplied fixtures
    can be inspected.
    """
    A = numerics._require_square(A, "A")
    B = numerics.as_matrix(B, "B")
    G0 = numerics.as_matrix(G0, "G0")
    Y0 = numerics.as_matrix(Y0, "Y0")
    n_tilde = numerics.controllability_index(A, B)
    if _is_singular(G0 - np.eye(A.shape[0])):
        raise DegenerateSolutionError("G0 - I is singular")
    return _finish(A, B, G0, Y0, n_tilde)


def make_dilation(gs, mu):
    """Dilation with generator ``Gd = I + mu G0``.

    Raises
    ------
    OutOfRangeError
        ``mu`` outside ``[-1, 1/n_tilde]``.
    InconsistentGeneratorError
        ``Gd`` fails the anti-Hurwitz check.
    """
    lo, hi = gs.mu_range
    mu = float(mu)
    if not (lo - 1e-12 <= mu <= hi + 1e-12):
        raise OutOfRangeError(f"mu={mu} outside [{lo}, {hi:.6g}]")
    if mu == 0.0:
        return Dilation(np.eye(gs.n), mu=0.0, G0=gs.G0)
    return Dilation(np.eye(gs.n) + mu * gs.G0, mu=mu, G0=gs.G0)


def homogeneity_residual(gs, d):
    """Return ``(||A0 Gd - (Gd + mu I) A0||, ||Gd B - B||)``."""
    Gd = d.Gd
    n = gs.n
    r1 = np.linalg.norm(gs.A0 @ Gd - (Gd + d.mu * np.eye(n)) @ gs.A0, 2)
    r2 = np.linalg.norm(Gd @ gs.B - gs.B, 2)
    return float(r1), float(r2)


@dataclass(frozen=True)
class StabilizingPair:
    X: np.ndarray
    Y: np.ndarray
    rho: float

    @property
    def K(self):
        return np.linalg.solve(self.X, self.Y.T).T


def stabilizing_residual(gs, d, X, Y, rho):
    """Spectral norm of ``A0 X + X A0^T + B Y + Y^T B^T + rho (Gd X + X Gd^T)``."""
    S = gs.A0 @ X + gs.B @ Y + rho * (d.Gd @ X)
    return float(np.linalg.norm(S + S.T, 2))


def solve_stabilizing(gs, d, rho=1.0):
    """Find ``X = X^T > 0`` and ``Y`` solving the homogeneous stabilization equation.

    The equation is imposed entrywise on the upper triangle, with
    ``trace(X) = n`` fixing the scale and the strict cones replaced by
    ``X >= eps I`` and ``Gd X + X Gd^T >= eps I``.

    Raises
    ------
    SynthesisInfeasibleError
        The backend did not return an optimal point.
    """
    if rho <= 0:
        raise ValueError("rho must be positive")
    n, m = gs.n, gs.m
    A0, B, Gd = gs.A0, gs.B, d.Gd
    iu = np.triu_indices(n)
    eps = CONE_EPS * np.eye(n)

    def lyap(v):
        S = A0 @ v["X"] + B @ v["Y"] + rho * (Gd @ v["X"])
        return S + S.T

    prob = SdpProblem(
        variables=[Var("X", (n, n), symmetric=True), Var("Y", (m, n))],
        objective=None,
        cones={
            "X": lambda v: v["X"] - eps,
            "GdX + XGd^T": lambda v: Gd @ v["X"] + v["X"] @ Gd.T - eps,
        },
        equalities={
            "stabilizing equation": lambda v: lyap(v)[iu],
            "trace normalization": lambda v: np.atleast_1d(np.trace(v["X"]) - n),
        },
    )
    sol = solve_sdp(prob)
    if sol.status != "optimal":
        raise SynthesisInfeasibleError(
            f"stabilizing equation: backend status {sol.status} ({sol.message})"
        )
    return StabilizingPair(X=sol.values["X"], Y=sol.values["Y"], rho=float(rho))
