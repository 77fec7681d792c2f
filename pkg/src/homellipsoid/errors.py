"""Exception types raised across the package.

Each failure mode the design procedure can hit gets its own class so the CLI
can map it to an exit code without string matching.
"""


class HomEllipsoidError(Exception):
    """Base class for all package errors."""


class DimensionError(HomEllipsoidError, ValueError):
    """Matrix shapes are inconsistent with the requested operation."""


class NotControllableError(HomEllipsoidError):
    def __init__(self, rank, n):
        self.rank = rank
        self.n = n
        super().__init__(f"pair (A, B) is not controllable: rank {rank} < {n}")


class NotMonotoneError(HomEllipsoidError):
    def __init__(self, what, eigenvalue):
        self.what = what
        self.eigenvalue = eigenvalue
        super().__init__(f"{what} is not positive definite (min eigenvalue {eigenvalue:.3e})")


class DegenerateInputError(HomEllipsoidError, ValueError):
    """Input vector too close to the origin for a gradient or projection."""


class NoSolutionError(HomEllipsoidError):
    def __init__(self, what, residual):
        self.what = what
        self.residual = residual
        super().__init__(f"{what} has no solution (least-squares residual {residual:.3e})")


class DegenerateSolutionError(HomEllipsoidError):
    """G0 - I is numerically singular for every particular solution tried."""


class OutOfRangeError(HomEllipsoidError, ValueError):
    """Homogeneity degree outside its admissible interval."""


class InconsistentGeneratorError(HomEllipsoidError):
    """Gd = I + mu*G0 failed the anti-Hurwitz check."""


class InfeasibleError(HomEllipsoidError):
    """Base class for conic problems without a feasible point."""


class SynthesisInfeasibleError(InfeasibleError):
    pass


class InfeasibleFamilyError(InfeasibleError):
    def __init__(self, betas, statuses=None):
        self.betas = list(betas)
        self.statuses = list(statuses or [])
        shown = ", ".join(f"{b:.3g}" for b in self.betas[:8])
        more = "" if len(self.betas) <= 8 else f", ... ({len(self.betas)} total)"
        super().__init__(f"no feasible beta among [{shown}{more}]")


class UpgradeInfeasibleError(InfeasibleError):
    def __init__(self, mu, eigenvalue):
        self.mu = mu
        self.eigenvalue = eigenvalue
        super().__init__(
            f"mu={mu} violates Gd X + X Gd^T > 0 (min eigenvalue {eigenvalue:.3e})"
        )


class RefitInfeasibleError(InfeasibleError):
    pass


class NotApplicableError(HomEllipsoidError):
    """Operation called outside the configuration it is defined for."""


class PreconditionError(HomEllipsoidError, ValueError):
    pass


class DivergenceError(HomEllipsoidError):
    def __init__(self, t, norm):
        self.t = t
        self.norm = norm
        super().__init__(f"state norm {norm:.3e} exceeded the divergence bound at t={t:.6g}")
