"""Random instance generators shared by the tests."""

import numpy as np

from homellipsoid import numerics
from homellipsoid.dilation import Dilation


def random_monotone(rng, n=4, spread=0.3):
    """Random anti-Hurwitz generator with a shape matrix certifying monotonicity."""
    while True:
        Gd = np.eye(n) + spread * rng.normal(size=(n, n))
        L = rng.normal(size=(n, n))
        P = L @ L.T + 0.5 * np.eye(n)
        if numerics.min_eig(P @ Gd + Gd.T @ P) > 1e-2:
            return Dilation(Gd), P


def random_controllable(rng, n, m=1):
    while True:
        A = rng.normal(size=(n, n))
        B = rng.normal(size=(n, m))
        C = np.hstack([np.linalg.matrix_power(A, k) @ B for k in range(n)])
        if np.linalg.svd(C, compute_uv=False)[-1] > 1e-2:
            return A, B
