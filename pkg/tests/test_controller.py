import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from homellipsoid import ellipsoid as ell
from homellipsoid.controller import HomogeneousController, LinearController, sup_u_bound
from homellipsoid.dilation import Dilation
from homellipsoid.errors import NotApplicableError

from helpers import random_monotone


def _rhs(plant, ctrl, x):
    return plant.A @ x + plant.B @ ctrl.eval_u(x)


def test_linear_controller_eval():
    c = LinearController(np.array([[1.0, -2.0]]))
    X = np.array([[1.0, 1.0], [0.5, 0.0]])
    assert np.allclose(c.eval_many(X)[:, 0], [-1.0, 0.5])
    assert c.eval_u([1.0, 1.0]) == pytest.approx([-1.0])


def test_mu_zero_is_linear(rng):
    K0 = np.array([[0.5, -1.0, 0.2]])
    K = rng.normal(size=(1, 3))
    c = HomogeneousController(K0, K, np.eye(3), Dilation.standard(3), 0.0)
    assert c.is_linear
    X = rng.normal(size=(1000, 3))
    assert np.allclose(c.eval_many(X), X @ (K0 + K).T, rtol=1e-12, atol=1e-12)


def test_standard_dilation_formula_reduces_to_linear(rng):
    # with d(s) = e^s I the general formula r^(mu+1) K d(-ln r) x equals r^mu K x
    d, P = Dilation.standard(3), np.diag([1.0, 2.0, 3.0])
    K = rng.normal(size=(1, 3))
    c = HomogeneousController(np.zeros((1, 3)), K, P, d, -0.5)
    for x in rng.normal(size=(50, 3)):
        r = np.sqrt(x @ P @ x)
        assert c.eval_u(x) == pytest.approx(r**-0.5 * (K @ x), rel=1e-9)


def test_zero_state(pend_controllers):
    _, hom = pend_controllers
    assert np.array_equal(hom.eval_u(np.zeros(4)), np.zeros(1))


def test_closed_loop_homogeneity(pend_controllers, pend_plant):
    _, hom = pend_controllers
    rng = np.random.default_rng(4)
    worst = 0.0
    for _ in range(50):
        x = rng.normal(size=4)
        s = rng.uniform(-2, 2)
        ds = hom.ctx.dmap(s)
        lhs = _rhs(pend_plant, hom, ds @ x)
        rhs = np.exp(hom.mu * s) * ds @ _rhs(pend_plant, hom, x)
        worst = max(worst, np.linalg.norm(lhs - rhs) / max(1.0, np.linalg.norm(rhs)))
    assert worst <= 1e-7


def test_continuity_at_origin(pend_controllers):
    _, hom = pend_controllers
    x = np.array([0.3, -0.2, 0.1, 0.4])
    gain = np.abs(hom.K).sum() * np.sqrt(np.linalg.eigvalsh(np.linalg.inv(hom.P)).max())
    sizes = []
    for t in 10.0 ** -np.arange(0, 40, 4):
        y = t * x
        r = hom.ctx.norm(y)
        size = np.linalg.norm(hom.eval_u(y))
        # |u| <= |K0 y| + r^(mu+1) |K pi| with pi on the unit P-sphere
        assert size <= np.linalg.norm(hom.K0 @ y) + r ** (hom.mu + 1) * gain * (1 + 1e-9)
        sizes.append(size)
    assert sizes[-1] < 1e-2
    assert all(b < a for a, b in zip(sizes, sizes[1:]))


def test_norm_floor_ramp_continuous(pend_controllers):
    _, ref = pend_controllers
    # a raised floor keeps the dilated points well conditioned
    hom = HomogeneousController(ref.K0, ref.K, ref.P, ref.d, ref.mu, norm_floor=1e-2)
    pi = hom.ctx.project(np.array([1.0, 0.5, -0.3, 0.2]))[1]
    s0 = np.log(hom.norm_floor)
    above = hom.eval_u(hom.ctx.dmap(s0 + 1e-9) @ pi)
    below = hom.eval_u(hom.ctx.dmap(s0 - 1e-9) @ pi)
    assert np.allclose(above, below, rtol=1e-6)
    # below the floor the feedback term is linear in the norm
    r_half = hom.ctx.dmap(s0 - np.log(2.0)) @ pi
    base = hom.K0 @ r_half
    assert np.allclose(hom.eval_u(r_half) - base, 0.5 * hom.norm_floor ** (hom.mu + 1) * (hom.K @ pi), rtol=1e-6)


def test_sup_bound_scalar():
    for k in (-3.0, 0.0, 2.5):
        c = HomogeneousController(np.zeros((1, 1)), np.array([[k]]), np.eye(1), Dilation.standard(1), -1.0)
        assert sup_u_bound(c) == pytest.approx(abs(k))


def test_sup_bound_zero_gain():
    c = HomogeneousController(np.zeros((1, 2)), np.zeros((1, 2)), np.eye(2), Dilation.standard(2), -1.0)
    assert c.sup_u_bound() == 0.0


def test_sup_bound_not_applicable(pend_controllers):
    _, hom = pend_controllers
    with pytest.raises(NotApplicableError):
        hom.sup_u_bound()


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_sup_bound_sharp(seed):
    rng = np.random.default_rng(seed)
    d, P = random_monotone(rng, n=3)
    d = Dilation(d.Gd, mu=-1.0)
    K = rng.normal(size=(1, 3))
    c = HomogeneousController(np.zeros((1, 3)), K, P, d, -1.0)
    bound = c.sup_u_bound()
    xs = ell.sample_unit_sphere_P(P, 4000, rng)
    # scale the points off the sphere: u is constant along dilation orbits
    s = rng.uniform(-3, 3, size=len(xs))
    us = np.array([np.linalg.norm(c.eval_u(c.ctx.dmap(si) @ x)) for x, si in zip(xs, s)])
    assert us.max() <= bound * (1 + 1e-6)
    assert us.max() >= 0.95 * bound


def test_bounded_at_minus_one_near_origin(rng):
    d, P = random_monotone(rng, n=3)
    d = Dilation(d.Gd, mu=-1.0)
    c = HomogeneousController(np.zeros((1, 3)), rng.normal(size=(1, 3)), P, d, -1.0)
    bound = c.sup_u_bound()
    for t in 10.0 ** -np.arange(0, 30, 3):
        assert np.linalg.norm(c.eval_u(t * np.array([1.0, -1.0, 0.5]))) <= bound * (1 + 1e-6)


def test_from_certificate_roundtrip(pend_refit):
    c = HomogeneousController.from_certificate(pend_refit)
    assert np.allclose(c.K, pend_refit.K) and c.mu == pend_refit.mu
    assert np.allclose(c.P @ pend_refit.X, np.eye(4), atol=1e-6)
