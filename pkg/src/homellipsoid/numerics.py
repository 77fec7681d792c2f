"""Dense linear-algebra helpers with explicit tolerances.

Matrices are plain ``numpy.ndarray`` values. The matrix exponential is
delegated to :func:`scipy.linalg.expm` (scaling and squaring with a degree-13
Pade approximant), eigen and least-squares solves to LAPACK via numpy.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DimensionError, NotControllableError

RANK_RTOL = 1e-9


def as_matrix(M, name="matrix"):
    """Return ``M`` as a finite 2-D float array."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.ndim != 2:
        raise DimensionError(f"{name} must be two-dimensional, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError(f"{name} has non-finite entries")
    return M


def _require_square(M, name="matrix"):
    M = as_matrix(M, name)
    if M.shape[0] != M.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {M.shape}")
    return M


def sym(M):
    """Symmetric part ``(M + M^T) / 2``."""
    return 0.5 * (M + M.T)


def expm(M, s=1.0):
    """Return ``exp(s * M)`` for a square matrix ``M``."""
    M = _require_square(M)
    if s == 0.0:
        return np.eye(M.shape[0])
    return scipy.linalg.expm(s * M)


@dataclass(frozen=True)
class EigenReport:
    """Eigenvalues (ascending) and orthonormal eigenvectors of a symmetric matrix."""

    values: np.ndarray
    vectors: np.ndarray
    residual: float

    @property
    def min(self):
        return float(self.values[0])

    @property
    def max(self):
        return float(self.values[-1])


def sym_eig(M):
    """Eigendecomposition of the symmetric part of ``M``.

    The reconstruction residual ``||S - V diag(w) V^T||_2`` is returned with
    the result so callers can check it against ``1e-10 * (1 + ||S||)``.
    """
    S = sym(_require_square(M))
    w, V = np.linalg.eigh(S)
    residual = float(np.linalg.norm(S - (V * w) @ V.T, 2)) if S.size else 0.0
    return EigenReport(values=w, vectors=V, residual=residual)


def min_eig(M):
    return sym_eig(M).min


def sqrtm_psd(M):
    """Symmetric square root of a positive semidefinite matrix."""
    rep = sym_eig(M)
    w = np.clip(rep.values, 0.0, None)
    return (rep.vectors * np.sqrt(w)) @ rep.vectors.T


def inv_sqrtm_pd(M):
    rep = sym_eig(M)
    if rep.min <= 0:
        raise np.linalg.LinAlgError("matrix is not positive definite")
    return (rep.vectors / np.sqrt(rep.values)) @ rep.vectors.T


def lstsq(A, b):
    """Minimum-norm least-squares solution of ``A z = b``.

    Returns
    -------
    z : ndarray
        Minimum-norm minimizer of ``||A z - b||``.
    residual : float
        ``||A z - b||_2`` at the returned solution.
    """
    A = as_matrix(A, "A")
    b = np.asarray(b, dtype=float)
    z, *_ = np.linalg.lstsq(A, b, rcond=None)
    residual = float(np.linalg.norm(A @ z - b))
    return z, residual


def numerical_rank(M, rtol=RANK_RTOL):
    sv = np.linalg.svd(np.atleast_2d(M), compute_uv=False)
    if sv.size == 0 or sv[0] == 0.0:
        return 0
    return int(np.sum(sv > rtol * sv[0]))


def controllability_index(A, B, rtol=RANK_RTOL):
    """Smallest ``k`` with ``rank [B, AB, ..., A^(k-1) B] = n``.

    Raises
    ------
    NotControllableError
        If the rank never reaches ``n``; the error carries the achieved rank.
    """
    A = _require_square(A, "A")
    B = as_matrix(B, "B")
    n = A.shape[0]
    if B.shape[0] != n:
        raise DimensionError(f"B has {B.shape[0]} rows, expected {n}")
    blocks = []
    block = B
    rank = 0
    for k in range(1, n + 1):
        blocks.append(block)
        rank = numerical_rank(np.hstack(blocks), rtol)
        if rank == n:
            return k
        block = A @ block
    raise NotControllableError(rank, n)
