import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq

from cvsteering.errors import DegenerateStateError
from cvsteering.polygauss import MultiPoly, PolyGauss, QuadForm
from cvsteering.reid import (
    correlation,
    inferred_variance,
    optimal_phi,
    reid_test,
    rotated_second_moments,
    second_moments,
)
from cvsteering.states import LG, TMSV, Noon, PhotonSubtracted


def subtracted_product(r):
    return 9.0 / (2.0 * (3.0 * math.cosh(4 * r) + 5.0))


@pytest.mark.parametrize("r", [0.0, 0.5, 1.0, 1.5, 2.0])
def test_tmsv_product(r):
    assert reid_test(TMSV(r).wigner()).product == pytest.approx(
        1.0 / (4.0 * math.cosh(2 * r) ** 2), abs=1e-9
    )


@pytest.mark.parametrize("k", [0, 1])
@pytest.mark.parametrize("r", np.round(np.arange(0.1, 2.01, 0.1), 10))
def test_subtracted_product(r, k):
    assert reid_test(PhotonSubtracted(r, 1, k).wigner()).product == pytest.approx(
        subtracted_product(r), abs=1e-8
    )


def test_subtracted_crossing():
    root = brentq(lambda r: reid_test(PhotonSubtracted(r, 1, 1).wigner()).product - 0.25, 0.3, 0.8,
                  xtol=1e-12)
    # arccosh(13/3)/4 = 0.536474...
    assert root == pytest.approx(math.acosh(13.0 / 3.0) / 4.0, abs=1e-9)


@pytest.mark.parametrize("n", range(11))
def test_lg_product_and_correlation(n):
    pg = LG(n).wigner()
    rep = reid_test(pg)
    assert 4 * rep.product == pytest.approx(((2 * n + 1) / (n + 1)) ** 2, abs=1e-9)
    if n:
        _, C, zero = optimal_phi(pg, 0.0)
        assert not zero
        assert abs(C) == pytest.approx(n / (n + 1), abs=1e-9)
    assert not rep.steerable


def test_vacuum_has_zero_correlation():
    phi, C, zero = optimal_phi(LG(0).wigner(), 0.0)
    assert (phi, C, zero) == (0.0, 0.0, True)
    assert reid_test(LG(0).wigner()).product == pytest.approx(0.25)


def test_tmsv_optimal_angles():
    rep = reid_test(TMSV(0.7).wigner())
    # X infers from Y, P_X from P_Y
    assert math.cos(rep.phi1) ** 2 == pytest.approx(1.0, abs=1e-12)
    assert math.sin(rep.phi2) ** 2 == pytest.approx(1.0, abs=1e-12)
    assert rep.g1 == pytest.approx(math.tanh(1.4))
    assert rep.g2 == pytest.approx(-math.tanh(1.4))


@settings(max_examples=40, deadline=None)
@given(st.floats(0.0, 2.0), st.floats(0.0, 2 * math.pi), st.floats(0.0, 2 * math.pi))
def test_inference_never_increases_variance(r, theta, phi):
    S = second_moments(TMSV(r).wigner())
    xx, _, _ = rotated_second_moments(S, theta, phi)
    var, _ = inferred_variance(S, theta, phi)
    assert 0.0 <= var <= xx + 1e-12
    assert abs(correlation(S, theta, phi)) <= 1 + 1e-12


@settings(max_examples=25, deadline=None)
@given(st.floats(0.0, 2 * math.pi))
def test_optimal_phi_beats_scan(theta):
    S = second_moments(Noon(1).wigner())
    phi, C, _ = optimal_phi(S, theta)
    scan = max(abs(correlation(S, theta, p)) for p in np.linspace(0, 2 * math.pi, 2000))
    assert abs(C) >= scan - 1e-12
    assert 0.0 <= phi < 2 * math.pi


def test_report_dict():
    d = reid_test(TMSV(1.0).wigner()).to_dict()
    assert d["four_product"] == pytest.approx(4 * d["product"])
    assert d["steerable"] is True


def test_degenerate_inferring_quadrature():
    # covariance with a zero-variance block
    S = np.diag([0.5, 0.5, 0.0, 0.0])
    with pytest.raises(DegenerateStateError):
        inferred_variance(S, 0.0, 0.0)
