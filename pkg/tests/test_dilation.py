import math

import numpy as np
import pytest
import scipy.linalg

from helpers import random_monotone
from homellipsoid import numerics
from homellipsoid.dilation import (
    Dilation,
    MonotonicityCert,
    certify_monotone,
    dmap,
    norm_bracket,
    p_operator_norm,
)
from homellipsoid.errors import InconsistentGeneratorError, NotMonotoneError
from homellipsoid.pendulum import REFERENCE_G0, REFERENCE_X


def test_dmap_zero_and_standard():
    d = Dilation(np.eye(4) - 0.7 * REFERENCE_G0, mu=-0.7)
    assert np.allclose(dmap(d, 0.0), np.eye(4))
    ds = Dilation.standard(3)
    np.testing.assert_allclose(dmap(ds, 1.3), math.exp(1.3) * np.eye(3))


def test_dmap_group_law():
    rng = np.random.default_rng(1)
    d = Dilation(np.eye(4) - 0.7 * REFERENCE_G0)
    for s1, s2 in rng.uniform(-3, 3, size=(20, 2)):
        lhs = dmap(d, s1) @ dmap(d, s2)
        rhs = dmap(d, s1 + s2)
        assert np.abs(lhs - rhs).max() <= 1e-9 * max(1.0, np.abs(rhs).max())


def test_anti_hurwitz_enforced():
    with pytest.raises(InconsistentGeneratorError):
        Dilation(np.diag([1.0, -0.5]))


def test_certify_examples():
    c = certify_monotone(Dilation(np.eye(3)), np.eye(3))
    assert c.alpha == pytest.approx(1.0) and c.beta == pytest.approx(1.0)
    c = certify_monotone(Dilation(np.diag([1.0, 2.0])), np.eye(2))
    assert c.alpha == pytest.approx(2.0) and c.beta == pytest.approx(1.0)


def test_certify_reference_configuration():
    d = Dilation(np.eye(4) - 0.7 * REFERENCE_G0, mu=-0.7)
    c = certify_monotone(d, np.linalg.inv(REFERENCE_X))
    assert c.alpha >= c.beta > 0


def test_certify_rejects():
    d = Dilation(np.diag([1.0, 2.0]))
    with pytest.raises(NotMonotoneError) as info:
        certify_monotone(d, np.diag([1.0, -1.0]))
    assert info.value.eigenvalue < 0
    # P > 0 but P Gd + Gd^T P indefinite
    Gd = np.array([[1.0, 10.0], [0.0, 1.0]])
    with pytest.raises(NotMonotoneError):
        certify_monotone(Dilation(Gd), np.eye(2))


def test_norm_bracket_examples():
    c = MonotonicityCert(np.eye(2), alpha=2.0, beta=1.0)
    assert norm_bracket(c, 1.0) == (0.0, 0.0)
    lo, hi = norm_bracket(c, math.exp(2.0))
    assert lo == pytest.approx(1.0) and hi == pytest.approx(2.0)


def test_norm_bracket_contains_root_grid_scan():
    rng = np.random.default_rng(2)
    for _ in range(10):
        d, P = random_monotone(rng)
        c = certify_monotone(d, P)
        for x in rng.normal(size=(10, 4)) * rng.uniform(0.01, 100):
            r = math.sqrt(x @ P @ x)
            lo, hi = norm_bracket(c, r)
            grid = np.linspace(lo - 1.0, hi + 1.0, 2001)
            V = scipy.linalg.expm(-grid[:, None, None] * d.Gd) @ x
            g = np.sqrt(np.einsum("ki,ij,kj->k", V, P, V)) - 1.0
            k = np.flatnonzero(np.diff(np.sign(g)) != 0)
            assert k.size == 1
            step = grid[1] - grid[0]
            assert lo - step <= grid[k[0]] <= hi + step


def test_contraction_bounds():
    # for s < 0: alpha s <= ln ||d(s)||_P <= beta s
    rng = np.random.default_rng(4)
    for _ in range(10):
        d, P = random_monotone(rng)
        c = certify_monotone(d, P)
        for s in np.linspace(-3, -0.1, 12):
            ln = math.log(p_operator_norm(dmap(d, s), P))
            assert c.alpha * s - 1e-9 <= ln <= c.beta * s + 1e-9


def test_small_mu_is_monotone():
    rng = np.random.default_rng(5)
    n = 4
    G0 = rng.normal(size=(n, n))
    L = rng.normal(size=(n, n))
    P = L @ L.T + np.eye(n)
    for mu in (-0.05, -0.01, 0.01, 0.05):
        if numerics.min_eig(2 * P + mu * (P @ G0 + G0.T @ P)) > 0:
            certify_monotone(Dilation(np.eye(n) + mu * G0), P)
