import logging

import numpy as np
import pytest

from homellipsoid import ellipsoid as ell
from homellipsoid import pendulum as pd
from homellipsoid.controller import HomogeneousController, LinearController
from homellipsoid.synthesis import make_dilation, solve_generator

logging.getLogger("homellipsoid.synthesis").setLevel(logging.ERROR)

U_BAR = 5.0


@pytest.fixture(scope="session")
def pend_AB():
    return pd.build_pendulum()


@pytest.fixture(scope="session")
def pend_plant(pend_AB):
    A, B = pend_AB
    return ell.LinearPlant(A, B, pd.DISTURBANCE_D, pd.DISTURBANCE_Q)


@pytest.fixture(scope="session")
def pend_gs(pend_AB):
    return solve_generator(*pend_AB)


@pytest.fixture(scope="session")
def pend_d(pend_gs):
    return make_dilation(pend_gs, pd.MU)


@pytest.fixture(scope="session")
def pend_linear(pend_plant, pend_gs):
    return ell.min_trace_linear(pend_plant, pend_gs, u_bar=U_BAR)


@pytest.fixture(scope="session")
def pend_hom(pend_plant, pend_gs, pend_d):
    return ell.min_trace_homogeneous(pend_plant, pend_gs, pend_d, u_bar=U_BAR)


@pytest.fixture(scope="session")
def pend_refit(pend_plant, pend_gs, pend_d, pend_linear):
    return ell.refit_X_fixed_K(pend_plant, pend_gs, pend_d, pend_linear.K)


@pytest.fixture(scope="session")
def pend_controllers(pend_gs, pend_linear, pend_refit):
    lin = LinearController(pend_gs.K0 + pend_linear.K)
    hom = HomogeneousController.from_certificate(pend_refit)
    return lin, hom


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
