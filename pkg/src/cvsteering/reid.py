"""Reid EPR criterion from exact second moments.

Alice's rotated quadrature ``X_theta = cos(theta) X + sin(theta) P_X`` is
estimated linearly from Bob's ``Y_phi = cos(phi) Y + sin(phi) P_Y``. The
optimal gain ``g = <X_theta Y_phi> / <Y_phi^2>`` leaves the inferred variance
``<X_theta^2> - <X_theta Y_phi>^2 / <Y_phi^2>``; steering is witnessed when
the product of inferred variances for two conjugate angles is below 1/4.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import DegenerateStateError
from .polygauss import PolyGauss, moment

__all__ = [
    "ReidReport",
    "second_moments",
    "rotated_second_moments",
    "correlation",
    "optimal_phi",
    "inferred_variance",
    "reid_test",
]

BOUND = 0.25
SCAN_POINTS = 720
PHI_TOL = 1e-10
ZERO_CORRELATION = 1e-13


def second_moments(pg: PolyGauss) -> np.ndarray:
    """Symmetric 4x4 matrix of ``<v_i v_j>``."""
    S = np.empty((4, 4))
    for i in range(4):
        for j in range(i, 4):
            e = [0, 0, 0, 0]
            e[i] += 1
            e[j] += 1
            S[i, j] = S[j, i] = moment(pg, e)
    return S


def _as_moments(state) -> np.ndarray:
    return state if isinstance(state, np.ndarray) else second_moments(state)


def rotated_second_moments(pg, theta: float, phi: float):
    """``(<X_theta^2>, <Y_phi^2>, <X_theta Y_phi>)``.

    ``pg`` may be a ``PolyGauss`` or a precomputed ``second_moments`` matrix.
    """
    S = _as_moments(pg)
    a = np.array([math.cos(theta), math.sin(theta), 0.0, 0.0])
    b = np.array([0.0, 0.0, math.cos(phi), math.sin(phi)])
    return float(a @ S @ a), float(b @ S @ b), float(a @ S @ b)


def correlation(pg, theta: float, phi: float) -> float:
    xx, yy, xy = rotated_second_moments(pg, theta, phi)
    if xx <= 0 or yy <= 0:
        raise DegenerateStateError("zero quadrature variance")
    return xy / math.sqrt(xx * yy)


def optimal_phi(pg, theta: float):
    """Maximize ``|C(theta, phi)|`` over ``phi`` in ``[0, 2 pi)``.

    Returns ``(phi, C, zero_correlation)``. A coarse scan picks the bracket,
    then a bounded scalar search refines it. For uncorrelated states the
    result is ``(0.0, 0.0, True)``.
    """
    S = _as_moments(pg)
    grid = 2 * math.pi * np.arange(SCAN_POINTS) / SCAN_POINTS
    vals = np.array([abs(correlation(S, theta, p)) for p in grid])
    if vals.max() < ZERO_CORRELATION:
        return 0.0, 0.0, True
    # argmax returns the first maximizer, so ties go to the smaller phi
    i = int(np.argmax(vals))
    step = grid[1] - grid[0]
    res = minimize_scalar(
        lambda p: -abs(correlation(S, theta, p)),
        bounds=(grid[i] - step, grid[i] + step),
        method="bounded",
        options={"xatol": PHI_TOL},
    )
    phi = float(res.x) if -res.fun >= vals[i] else float(grid[i])
    phi %= 2 * math.pi
    return phi, correlation(S, theta, phi), False


def inferred_variance(pg, theta: float, phi: float):
    """Residual variance of ``X_theta`` after optimal inference from ``Y_phi``.

    Returns ``(variance, gain)``.
    """
    xx, yy, xy = rotated_second_moments(pg, theta, phi)
    if yy <= 0:
        raise DegenerateStateError("zero variance of the inferring quadrature")
    gain = xy / yy
    return max(xx - xy * gain, 0.0), gain


@dataclass(frozen=True)
class ReidReport:
    theta1: float
    theta2: float
    phi1: float
    phi2: float
    g1: float
    g2: float
    var1: float
    var2: float
    product: float
    steerable: bool

    def to_dict(self) -> dict:
        out = asdict(self)
        out["four_product"] = 4.0 * self.product
        return out


def reid_test(pg, theta1: float = 0.0, theta2: float = math.pi / 2) -> ReidReport:
    S = _as_moments(pg)
    phi1, _, _ = optimal_phi(S, theta1)
    phi2, _, _ = optimal_phi(S, theta2)
    var1, g1 = inferred_variance(S, theta1, phi1)
    var2, g2 = inferred_variance(S, theta2, phi2)
    product = var1 * var2
    return ReidReport(
        theta1=float(theta1),
        theta2=float(theta2),
        phi1=phi1,
        phi2=phi2,
        g1=g1,
        g2=g2,
        var1=var1,
        var2=var2,
        product=product,
        steerable=bool(product < BOUND),
    )
