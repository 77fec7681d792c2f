"""Rotary inverted pendulum linearized about the upright position.

State ordering is ``(theta, alpha, dtheta, dalpha)``: arm angle, pendulum
angle and their rates. The reference matrices below are externally reported design
values for this plant and serve as consistency fixtures only.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import PreconditionError


@dataclass(frozen=True)
class PendulumParams:
    Rm: float = 8.4        # motor resistance [ohm]
    Km: float = 0.042      # back-emf constant [V s/rad]
    mr: float = 0.095      # arm mass [kg]
    r: float = 0.085       # arm length [m]
    Jr: Optional[float] = None   # arm inertia, default r^2 mr / 3
    br: float = 1e-3       # arm damping [N m s/rad]
    mp: float = 0.024      # pendulum mass [kg]
    Lp: float = 0.129      # pendulum length [m]
    l: Optional[float] = None    # pivot to center of mass, default Lp / 2
    Jp: Optional[float] = None   # pendulum inertia, default mp Lp^2 / 3
    bp: float = 5e-5       # pendulum damping [N m s/rad]
    g: float = 9.81
    Jt: Optional[float] = None   # total inertia determinant, derived when None

    def __post_init__(self):
        if self.Jr is None:
            object.__setattr__(self, "Jr", self.r**2 * self.mr / 3.0)
        if self.l is None:
            object.__setattr__(self, "l", self.Lp / 2.0)
        if self.Jp is None:
            object.__setattr__(self, "Jp", self.mp * self.Lp**2 / 3.0)
        if self.Jt is None:
            Jt = self.Jp * self.Jr + self.mp * self.l**2 * self.Jr + self.Jp * self.mp * self.r**2
            object.__setattr__(self, "Jt", Jt)
        for name in ("Rm", "Km", "mr", "r", "Jr", "mp", "Lp", "l", "Jp", "Jt", "g"):
            if getattr(self, name) <= 0:
                raise PreconditionError(f"{name} must be positive")
        for name in ("br", "bp"):
            if getattr(self, name) < 0:
                raise PreconditionError(f"{name} must be non-negative")


def build_pendulum(p=None):
    """Return ``(A, B)`` of the linearized pendulum."""
    p = p or PendulumParams()
    Jt, l, r, mp = p.Jt, p.l, p.r, p.mp
    kv = p.Km**2 / p.Rm
    A = np.array([
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [0.0, l**2 * r * p.g * mp**2 / Jt, -(p.br * p.Jp + kv * p.Jp) / Jt, -l * r * mp * p.bp / Jt],
        [0.0, p.g * l * mp * p.Jr / Jt, -(l * r * mp * p.br + kv * l * r * mp) / Jt, -p.Jr * p.bp / Jt],
    ])
    B = (p.Km / p.Rm) * np.array([[0.0], [0.0], [p.Jp / Jt], [l * r * mp / Jt]])
    return A, B


# externally reported design values for this plant
REFERENCE_G0 = np.array([
    [-3.0, 2.02, 0.0, 0.0],
    [0.0, -1.0, 0.0, 0.0],
    [0.0, 0.38, -2.0, 2.02],
    [0.0, 0.0, 0.0, 0.0],
])
REFERENCE_Y0 = np.array([[0.0, 10.65, -0.73, 0.47]])
REFERENCE_K = np.array([[27.12, -177.13, 10.91, -17.93]])
REFERENCE_X = np.array([
    [1.33, 0.11, -0.87, 0.42],
    [0.11, 0.05, -0.51, -0.58],
    [-0.87, -0.51, 48.52, 35.47],
    [0.42, -0.58, 35.47, 30.13],
])
REFERENCE_MAX_X1 = {"linear": 0.1296, "homogeneous": 0.0494}

# disturbance setting of the simulation study
DISTURBANCE_D = np.eye(4)
DISTURBANCE_Q = np.diag([2.0, 2.0, 1.0, 2.0])
SINUSOID_AMPLITUDE = np.array([0.2, 0.3, 0.3, 0.4])
SINUSOID_FREQUENCY = 0.5
MU = -0.7

# hardware-rig gain and disturbance input, kept as an input fixture
RIG_K = np.array([[2.0, -35.0, 1.5, -3.0]])
RIG_D = np.array([[0.0], [0.0], [2.53], [2.50]])
RIG_Q = np.array([[1.0]])
