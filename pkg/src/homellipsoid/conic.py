"""Small semidefinite programs and the scalar search over ``beta``.

Problems are stated with plain numpy callables: every cone and equality is a
function of a dict of variable values that must be affine in those values.
The affine maps are recovered by probing with basis elements, handed to
cvxpy (Clarabel interior point by default), and every returned point is
re-verified outside the solver with a symmetric eigendecomposition.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import cvxpy as cp
import numpy as np

from . import numerics
from .errors import DimensionError, InfeasibleFamilyError

log = logging.getLogger(__name__)

VIOLATION_RTOL = 1e-7
DEFAULT_SOLVER = "CLARABEL"
# second attempt after an inaccurate solve; near-parallel cones (e.g. X >= eps
# next to Gd X + X Gd^T >= eps with Gd = I) stall the default linear solves
RETRY_OPTIONS = {
    "CLARABEL": {"iterative_refinement_reltol": 1e-14, "iterative_refinement_abstol": 1e-14,
                 "iterative_refinement_max_iter": 50},
}
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class Var:
    """Matrix unknown; ``symmetric`` variables are parametrized by their upper triangle."""

    name: str
    shape: tuple
    symmetric: bool = False

    @property
    def size(self):
        r, c = self.shape
        return r * (r + 1) // 2 if self.symmetric else r * c


@dataclass
class SdpProblem:
    """Linear objective over affine semidefinite and equality constraints.

    Attributes
    ----------
    variables : list of Var
    objective : callable or None
        Affine scalar function of the variable dict to minimize; ``None``
        means a pure feasibility problem.
    cones : dict
        Name to callable returning a square matrix required to be ``>= 0``
        (its symmetric part is used).
    equalities : dict
        Name to callable returning an array required to vanish.
    """

    variables: List[Var]
    objective: Optional[Callable] = None
    cones: Dict[str, Callable] = field(default_factory=dict)
    equalities: Dict[str, Callable] = field(default_factory=dict)


@dataclass
class SdpSolution:
    status: str  # optimal | infeasible | numerical-failure
    values: Dict[str, np.ndarray]
    objective: float
    violation: float
    margins: Dict[str, float] = field(default_factory=dict)
    message: str = ""
    diagnostics: dict = field(default_factory=dict)

    @property
    def ok(self):
        return self.status == "optimal"


# -- packing ------------------------------------------------------------------
def _layout(variables):
    offs, k = {}, 0
    names = set()
    for v in variables:
        if v.name in names:
            raise DimensionError(f"duplicate variable {v.name!r}")
        names.add(v.name)
        if v.symmetric and v.shape[0] != v.shape[1]:
            raise DimensionError(f"symmetric variable {v.name!r} must be square")
        offs[v.name] = (k, v)
        k += v.size
    return offs, k


def unpack(z, variables):
    """Variable dict from the flat parameter vector ``z``."""
    out = {}
    offs, _ = _layout(variables)
    for name, (k, v) in offs.items():
        seg = z[k:k + v.size]
        if v.symmetric:
            r = v.shape[0]
            M = np.zeros((r, r))
            iu = np.triu_indices(r)
            M[iu] = seg
            M = M + np.triu(M, 1).T
            out[name] = M
        else:
            out[name] = seg.reshape(v.shape)
    return out


def affine_map(fn, variables, nz):
    """Return ``(F, c, shape)`` with ``vec(fn(z)) = F z + c`` (row-major ``vec``)."""
    c0 = np.asarray(fn(unpack(np.zeros(nz), variables)), dtype=float)
    shape = c0.shape
    c = c0.ravel()
    F = np.empty((c.size, nz))
    e = np.zeros(nz)
    for i in range(nz):
        e[i] = 1.0
        F[:, i] = np.asarray(fn(unpack(e, variables)), dtype=float).ravel() - c
        e[i] = 0.0
    return F, c, shape


# -- verification -------------------------------------------------------------
def cone_margins(p, values):
    """Scaled minimum eigenvalue of each cone expression at ``values``."""
    out = {}
    for name, fn in p.cones.items():
        M = numerics.as_matrix(fn(values), name)
        rep = numerics.sym_eig(M)
        scale = max(1.0, float(np.abs(rep.values).max()) if rep.values.size else 0.0)
        out[name] = rep.min / scale
    return out


def equality_residuals(p, values):
    out = {}
    for name, fn in p.equalities.items():
        r = np.asarray(fn(values), dtype=float)
        out[name] = float(np.abs(r).max()) if r.size else 0.0
    return out


def _run(prob, solver, options):
    with warnings.catch_warnings():
        # inaccurate solves are caught by the re-verification in solve_sdp
        warnings.simplefilter("ignore", UserWarning)
        prob.solve(solver=solver, **options)


def solve_sdp(p, solver=DEFAULT_SOLVER, tol=VIOLATION_RTOL):
    """Solve ``p`` and re-verify the returned point.

    The status is ``"optimal"`` only when the solver reports success and the
    worst scaled cone violation, recomputed from the user callables, is at
    most ``tol``.
    """
    offs, nz = _layout(p.variables)
    z = cp.Variable(nz)
    cons = []
    for name, fn in p.cones.items():
        F, c, shape = affine_map(fn, p.variables, nz)
        if len(shape) != 2 or shape[0] != shape[1]:
            raise DimensionError(f"cone {name!r} is not square: {shape}")
        E = cp.reshape(F @ z + c, shape, order="C")
        cons.append(0.5 * (E + E.T) >> 0)
    for name, fn in p.equalities.items():
        F, c, _ = affine_map(fn, p.variables, nz)
        cons.append(F @ z + c == 0)
    if p.objective is not None:
        f, f0, _ = affine_map(lambda v: np.atleast_1d(p.objective(v)), p.variables, nz)
        obj = cp.Minimize(f[0] @ z + f0[0])
    else:
        obj = cp.Minimize(0)
    prob = cp.Problem(obj, cons)
    try:
        _run(prob, solver, {})
        if prob.status == cp.OPTIMAL_INACCURATE and solver in RETRY_OPTIONS:
            log.debug("inaccurate solve, retrying with %s", RETRY_OPTIONS[solver])
            _run(prob, solver, RETRY_OPTIONS[solver])
    except cp.error.SolverError as exc:
        return SdpSolution("numerical-failure", {}, math.inf, math.inf, message=str(exc))

    status = prob.status
    if status in (cp.INFEASIBLE, cp.INFEASIBLE_INACCURATE):
        return SdpSolution("infeasible", {}, math.inf, math.inf, message=status)
    if z.value is None or status not in (cp.OPTIMAL, cp.OPTIMAL_INACCURATE):
        return SdpSolution("numerical-failure", {}, math.inf, math.inf, message=str(status))

    values = unpack(np.asarray(z.value, dtype=float), p.variables)
    margins = cone_margins(p, values)
    violation = max([0.0] + [-m for m in margins.values()])
    objective = float(np.squeeze(p.objective(values))) if p.objective is not None else 0.0
    diag = {"solver_status": status, "equality_residuals": equality_residuals(p, values)}
    if violation > tol:
        return SdpSolution(
            "numerical-failure", values, objective, violation, margins,
            message=f"re-verified cone violation {violation:.3e} > {tol:.1e}", diagnostics=diag,
        )
    return SdpSolution("optimal", values, objective, violation, margins, message=status, diagnostics=diag)


# -- beta search --------------------------------------------------------------
def beta_search(family, beta_range=(1e-3, 1e3), budget=40, refine_steps=25, solver=DEFAULT_SOLVER):
    """Minimize the optimal objective of ``family(beta)`` over ``beta``.

    A logarithmic grid of ``budget`` points is evaluated first, then a
    golden-section search on ``log(beta)`` refines between the grid
    neighbours of the best feasible point. Infeasible evaluations count as
    ``+inf``, so no unimodality is assumed beyond the bracket.

    Returns
    -------
    beta : float
    solution : SdpSolution
        ``solution.diagnostics["history"]`` lists ``(beta, status, objective)``.

    Raises
    ------
    InfeasibleFamilyError
        No grid point is feasible.
    """
    lo, hi = beta_range
    if not 0 < lo <= hi:
        raise ValueError("beta range must satisfy 0 < beta_min <= beta_max")
    grid = np.logspace(math.log10(lo), math.log10(hi), max(int(budget), 1))
    history = []
    cache = {}

    def evaluate(b):
        b = float(b)
        if b not in cache:
            sol = solve_sdp(family(b), solver=solver)
            cache[b] = sol
            history.append((b, sol.status, sol.objective))
        sol = cache[b]
        return sol.objective if sol.ok else math.inf

    vals = [evaluate(b) for b in grid]
    best = int(np.argmin(vals))
    if not math.isfinite(vals[best]):
        raise InfeasibleFamilyError(grid, [cache[float(b)].status for b in grid])

    a = math.log(grid[max(best - 1, 0)])
    c = math.log(grid[min(best + 1, len(grid) - 1)])
    if refine_steps > 0 and c > a:
        x1 = c - GOLDEN * (c - a)
        x2 = a + GOLDEN * (c - a)
        f1, f2 = evaluate(math.exp(x1)), evaluate(math.exp(x2))
        for _ in range(refine_steps):
            if f1 <= f2:
                c, x2, f2 = x2, x1, f1
                x1 = c - GOLDEN * (c - a)
                f1 = evaluate(math.exp(x1))
            else:
                a, x1, f1 = x1, x2, f2
                x2 = a + GOLDEN * (c - a)
                f2 = evaluate(math.exp(x2))

    feasible = [(s.objective, b) for b, s in cache.items() if s.ok]
    _, beta = min(feasible)
    sol = cache[beta]
    sol.diagnostics["history"] = history
    return beta, sol
