"""Canonical homogeneous norm ``||x||_{d,P}``, its gradient and the homogeneous projection.

The norm is ``exp(s_x)`` where ``s_x`` solves ``||d(-s) x||_P = 1``. The root
is found on ``phi(s) = log ||d(-s) x||_P``, which is strictly decreasing with
slope in ``[-alpha, -beta]``; bisection inside the certified bracket is
switched to Newton once the bracket is narrower than ``NEWTON_WIDTH``.
"""

import math

import numpy as np

from . import numerics
from .dilation import certify_monotone, dmap
from .errors import DegenerateInputError

ZERO_TOL = 1e-12
NEWTON_WIDTH = 0.5
MAX_ITER = 200
EIG_COND_MAX = 1e6


class HomNormContext:
    """Everything needed to evaluate ``||.||_{d,P}`` repeatedly.

    Parameters
    ----------
    d : Dilation
    P : array_like
        Shape matrix; ``d`` must be strictly monotone in ``||.||_P``.
    tol : float
        Root tolerance on ``| ||d(-s)x||_P - 1 |``.
    cert : MonotonicityCert, optional
        Reuse an existing certificate instead of recomputing it.
    """

    def __init__(self, d, P=None, tol=1e-12, cert=None):
        if cert is None:
            cert = certify_monotone(d, P)
        self.d = d
        self.cert = cert
        self.P = cert.P
        self.tol = tol
        self.n = d.n
        Gd = d.Gd
        self._standard = d.is_standard
        self._eig = None
        if not self._standard:
            lam, V = np.linalg.eig(Gd)
            if np.linalg.cond(V) < EIG_COND_MAX:
                Vi = np.linalg.inv(V)
                H = V.conj().T @ self.P @ V
                self._eig = (lam, V, Vi, H)
        self._mean_rate = float(np.mean(np.linalg.eigvals(Gd).real)) if self.n else 1.0

    # -- phi(s) and phi'(s) for a batch of vectors -------------------------
    def _phi(self, X, Yc, s):
        if self._eig is not None:
            lam, V, _, H = self._eig
            # factor out the largest exponent so q neither overflows nor underflows
            E = -s[:, None] * lam[None, :]
            shift = E.real.max(axis=1)
            Z = np.exp(E - shift[:, None]) * Yc
            HZ = Z @ H.T
            q = np.einsum("ni,ni->n", Z.conj(), HZ).real
            dq = -2.0 * np.einsum("ni,ni->n", (Z * lam[None, :]).conj(), HZ).real
            return shift + 0.5 * np.log(q), 0.5 * dq / q
        phi = np.empty(len(s))
        dphi = np.empty(len(s))
        PG = self.P @ self.d.Gd
        for i, (x, si) in enumerate(zip(X, s)):
            v = numerics.expm(self.d.Gd, -si) @ x
            q = v @ self.P @ v
            phi[i] = 0.5 * math.log(q)
            dphi[i] = -(v @ PG @ v) / q
        return phi, dphi

    def _solve(self, X):
        """Return ``s_x`` for each row of ``X`` (rows with ``||x||_P`` ~ 0 give -inf)."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        r = np.sqrt(np.maximum(np.einsum("ni,ij,nj->n", X, self.P, X), 0.0))
        s = np.full(len(X), -np.inf)
        live = r > ZERO_TOL
        if not live.any():
            return s, r
        Xl = X[live]
        lr = np.log(r[live])
        a, b = self.cert.alpha, self.cert.beta
        lo = np.where(lr >= 0, lr / a, lr / b)
        hi = np.where(lr >= 0, lr / b, lr / a)
        if self._standard:
            s[live] = lr
            return s, r
        pad = 1e-12 * (1.0 + np.abs(lo) + np.abs(hi))
        lo, hi = lo - pad, hi + pad
        Yc = Xl @ self._eig[2].T if self._eig is not None else None
        cur = 0.5 * (lo + hi)
        done = np.zeros(len(Xl), dtype=bool)
        for _ in range(MAX_ITER):
            idx = np.flatnonzero(~done)
            if idx.size == 0:
                break
            sc = cur[idx]
            phi, dphi = self._phi(Xl[idx], None if Yc is None else Yc[idx], sc)
            conv = np.abs(np.expm1(np.clip(phi, -1.0, 1.0))) <= self.tol
            done[idx[conv]] = True
            # phi decreasing: positive phi means the root lies to the right
            pos = phi > 0
            lo[idx] = np.where(pos, sc, lo[idx])
            hi[idx] = np.where(pos, hi[idx], sc)
            newton = sc - phi / dphi
            ok = (hi[idx] - lo[idx] < NEWTON_WIDTH) & (newton > lo[idx]) & (newton < hi[idx])
            nxt = np.where(ok, newton, 0.5 * (lo[idx] + hi[idx]))
            cur[idx] = np.where(conv, sc, nxt)
            # a collapsed bracket means we are at floating-point resolution
            tiny = (hi[idx] - lo[idx]) <= 4 * np.finfo(float).eps * (1 + np.abs(sc))
            done[idx[tiny]] = True
        s[live] = cur
        return s, r

    def _solve_one(self, x):
        """Scalar fast path of :meth:`_solve` for the eigendecomposed case."""
        r2 = float(x @ self.P @ x)
        r = math.sqrt(max(r2, 0.0))
        if r <= ZERO_TOL:
            return -math.inf, r, None
        lr = math.log(r)
        if self._standard:
            return lr, r, None
        if self._eig is None:
            s, rr = self._solve(x[None, :])
            return float(s[0]), float(rr[0]), None
        a, b = self.cert.alpha, self.cert.beta
        lo, hi = (lr / a, lr / b) if lr >= 0 else (lr / b, lr / a)
        pad = 1e-12 * (1.0 + abs(lo) + abs(hi))
        lo -= pad
        hi += pad
        lam, _, Vi, H = self._eig
        y = Vi @ x
        # start from the estimate of an isotropic dilation with the mean rate
        s = min(max(lr / self._mean_rate, lo), hi)
        eps = 4 * np.finfo(float).eps
        lmin, lmax = float(lam.real.min()), float(lam.real.max())
        dx_old = hi - lo
        for _ in range(MAX_ITER):
            shift = -s * lmin if s >= 0 else -s * lmax
            z = np.exp(-s * lam - shift) * y
            Hz = H @ z
            q = np.vdot(z, Hz).real
            phi = shift + 0.5 * math.log(q)
            if abs(phi) < 1.0 and abs(math.expm1(phi)) <= self.tol:
                return s, r, z * math.exp(shift)
            dphi = -np.vdot(lam * z, Hz).real / q
            if phi > 0:
                lo = s
            else:
                hi = s
            if hi - lo <= eps * (1 + abs(s)):
                return s, r, z * math.exp(shift)
            step = s - phi / dphi
            # Newton inside the bracket, kept only while it converges fast enough
            if lo < step < hi and (hi - lo < NEWTON_WIDTH or abs(step - s) <= 0.5 * dx_old):
                dx_old = abs(step - s)
                s = step
            else:
                dx_old = hi - lo
                s = 0.5 * (lo + hi)
        return s, r, np.exp(-s * lam) * y

    # -- public API ---------------------------------------------------------
    def norm(self, x):
        s, _, _ = self._solve_one(np.asarray(x, dtype=float))
        return 0.0 if s == -math.inf else math.exp(s)

    def norms(self, X):
        """Vectorized :meth:`norm` over the rows of ``X``."""
        s, _ = self._solve(X)
        return np.exp(s)

    def project(self, x):
        """Return ``(||x||_{d,P}, d(-ln||x||_{d,P}) x)``."""
        x = np.asarray(x, dtype=float)
        s, r, z = self._solve_one(x)
        if r <= ZERO_TOL:
            raise DegenerateInputError("x is numerically zero")
        if self._standard:
            return math.exp(s), x / math.exp(s)
        if z is not None:
            return math.exp(s), (self._eig[1] @ z).real
        return math.exp(s), self.dmap(-s) @ x

    def projects(self, X):
        """Row-wise :meth:`project`; rows at the origin yield zero projections."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        s, r = self._solve(X)
        live = r > ZERO_TOL
        Pi = np.zeros_like(X)
        if self._standard:
            Pi[live] = X[live] / np.exp(s[live])[:, None]
        elif self._eig is not None:
            lam, V, Vi, _ = self._eig
            Z = np.exp(-s[live][:, None] * lam[None, :]) * (X[live] @ Vi.T)
            Pi[live] = (Z @ V.T).real
        else:
            for i in np.flatnonzero(live):
                Pi[i] = self.dmap(-s[i]) @ X[i]
        return np.exp(s), Pi

    def dmap(self, s):
        if self._eig is not None:
            lam, V, Vi, _ = self._eig
            return ((V * np.exp(s * lam)) @ Vi).real
        return dmap(self.d, s)

    def gradient(self, x):
        """Gradient of ``||.||_{d,P}`` at ``x != 0`` as a column-shaped 1-D array."""
        r, pi = self.project(x)
        ds = self.dmap(-math.log(r))
        Ppi = self.P @ pi
        return r * (ds.T @ Ppi) / (Ppi @ (self.d.Gd @ pi))


def hom_norm(ctx, x):
    return ctx.norm(x)


def hom_norm_gradient(ctx, x):
    return ctx.gradient(x)


def hom_project(ctx, x):
    return ctx.project(x)[1]
