"""Fixed-step closed-loop simulation, disturbance signals and performance metrics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import numerics
from .errors import DivergenceError

DIVERGENCE_BOUND = 1e9


# -- disturbances ----------------------------------------------------------------
@dataclass(frozen=True)
class Sinusoid:
    """``w(t) = amplitude * sin(frequency * t)``."""

    amplitude: np.ndarray
    frequency: float = 1.0

    def __call__(self, t):
        return np.asarray(self.amplitude, dtype=float) * math.sin(self.frequency * t)

    def spec(self):
        return {"kind": "sinusoid", "amplitude": list(map(float, self.amplitude)),
                "frequency": float(self.frequency)}


@dataclass(frozen=True)
class ZeroDisturbance:
    p: int

    def __call__(self, t):
        return np.zeros(self.p)

    def spec(self):
        return {"kind": "zero", "p": self.p}


class RandomAdmissible:
    """Smooth random disturbance that stays in ``{w : w^T Q w <= 1}``.

    ``w(t) = Q^(-1/2) sum_k a_k sin(omega_k t + phi_k)`` with
    ``sum_k ||a_k|| = level <= 1``, so admissibility holds at every ``t``.

    Parameters
    ----------
    Q : array_like
    seed : int
    n_terms : int
        Number of harmonics.
    max_frequency : float
        Frequencies are drawn uniformly from ``(0, max_frequency]``.
    level : float, optional
        ``sum ||a_k||``; drawn from ``[0.5, 1]`` when omitted.
    """

    def __init__(self, Q, seed, n_terms=5, max_frequency=2.0, level=None):
        self.Q = numerics.as_matrix(Q, "Q")
        self.seed = int(seed)
        self.n_terms = int(n_terms)
        self.max_frequency = float(max_frequency)
        rng = np.random.default_rng(self.seed)
        p = self.Q.shape[0]
        a = rng.standard_normal((self.n_terms, p))
        weights = rng.uniform(0.2, 1.0, self.n_terms)
        a *= (weights / np.linalg.norm(a, axis=1))[:, None]
        self.level = float(rng.uniform(0.5, 1.0) if level is None else level)
        a *= self.level / weights.sum()
        self._coef = a @ numerics.inv_sqrtm_pd(self.Q)
        self._freq = self.max_frequency * (1.0 - rng.uniform(size=self.n_terms))
        self._phase = rng.uniform(0.0, 2 * math.pi, self.n_terms)

    def __call__(self, t):
        return np.sin(self._freq * t + self._phase) @ self._coef

    def spec(self):
        return {"kind": "random", "seed": self.seed, "n_terms": self.n_terms,
                "max_frequency": self.max_frequency, "level": self.level}


# -- trajectories ----------------------------------------------------------------
@dataclass
class Trajectory:
    t: np.ndarray
    x: np.ndarray
    u: np.ndarray
    w: np.ndarray
    hom_norm: Optional[np.ndarray] = None

    @property
    def dt(self):
        return float(self.t[1] - self.t[0]) if len(self.t) > 1 else 0.0


def simulate(plant, controller, disturbance, T, dt, x0, norm_ctx=None):
    """Classical RK4 on ``dx/dt = A x + B u(x) + D w(t)``.

    ``u`` and ``w`` are evaluated at every stage; the stored histories hold
    their values at the grid points. The homogeneous-norm history uses
    ``norm_ctx`` if given, else the controller's own context when it has one.

    Raises
    ------
    DivergenceError
        ``||x||`` exceeds ``1e9`` or becomes non-finite.
    """
    if dt <= 0 or T < dt:
        raise ValueError("need dt > 0 and T >= dt")
    A, B, D = plant.A, plant.B, plant.D
    N = int(round(T / dt))
    t = dt * np.arange(N + 1)
    x = np.array(x0, dtype=float).reshape(plant.n)
    xs = np.empty((N + 1, plant.n))
    us = np.empty((N + 1, plant.m))
    ws = np.empty((N + 1, plant.p))
    u_of = controller.eval_u

    def rhs(tk, xk):
        w = disturbance(tk)
        u = u_of(xk)
        return A @ xk + B @ u + D @ w, u, w

    h2 = 0.5 * dt
    for k in range(N):
        tk = t[k]
        k1, us[k], ws[k] = rhs(tk, x)
        xs[k] = x
        k2 = rhs(tk + h2, x + h2 * k1)[0]
        k3 = rhs(tk + h2, x + h2 * k2)[0]
        k4 = rhs(tk + dt, x + dt * k3)[0]
        x = x + (dt / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
        nx = float(np.linalg.norm(x))
        if not (nx <= DIVERGENCE_BOUND):
            raise DivergenceError(t[k + 1], nx)
    xs[N] = x
    us[N] = u_of(x)
    ws[N] = disturbance(t[N])
    ctx = norm_ctx if norm_ctx is not None else getattr(controller, "ctx", None)
    hn = ctx.norms(xs) if ctx is not None else None
    return Trajectory(t=t, x=xs, u=us, w=ws, hom_norm=hn)


# -- metrics ---------------------------------------------------------------------
def metrics(tr, window=None):
    """L-infinity and L2 norms of every state and control channel over ``window``.

    ``window = (t_start, t_end)`` defaults to the last third of the horizon.
    ``L2 = sqrt(sum v^2 dt)`` over the grid points inside the window.
    """
    if window is None:
        window = steady_window(tr.t[-1])
    t0, t1 = window
    sel = (tr.t >= t0 - 1e-12) & (tr.t <= t1 + 1e-12)
    if not sel.any():
        raise ValueError(f"window {window} contains no grid points")
    dt = tr.dt
    out = {"window_start": float(t0), "window_end": float(t1)}
    for prefix, arr in (("x", tr.x), ("u", tr.u)):
        seg = arr[sel]
        for i in range(arr.shape[1]):
            out[f"{prefix}{i + 1}_linf"] = float(np.abs(seg[:, i]).max())
            out[f"{prefix}{i + 1}_l2"] = float(math.sqrt(np.sum(seg[:, i] ** 2) * dt))
    if tr.hom_norm is not None:
        out["homnorm_linf"] = float(tr.hom_norm[sel].max())
    return out


def steady_window(T):
    return (2.0 * T / 3.0, float(T))


@dataclass
class ComparisonReport:
    linear: dict
    homogeneous: dict
    improvement: dict = field(default_factory=dict)
    trajectories: tuple = field(default=(), repr=False)

    def lines(self):
        for tag, m in (("linear", self.linear), ("homogeneous", self.homogeneous)):
            for k, v in m.items():
                yield f"{tag}.{k}={v:.17g}"
        for k, v in self.improvement.items():
            yield f"improvement_pct.{k}={v:.17g}"


def improvement(lin, hom):
    out = {}
    for k, a in lin.items():
        if k.startswith("window") or k not in hom:
            continue
        out[k] = 0.0 if a == 0 else (a - hom[k]) / a * 100.0
    return out


def compare(plant, lin, hom, disturbance, T, dt, x0, window=None, norm_ctx=None):
    """Simulate both controllers with identical inputs and compare steady-state metrics."""
    tl = simulate(plant, lin, disturbance, T, dt, x0, norm_ctx=norm_ctx)
    th = simulate(plant, hom, disturbance, T, dt, x0, norm_ctx=norm_ctx)
    ml, mh = metrics(tl, window), metrics(th, window)
    return ComparisonReport(ml, mh, improvement(ml, mh), (tl, th))
