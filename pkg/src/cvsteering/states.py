"""Normalized Wigner functions of the supported two-mode state families.

All functions are expressed in the dimensionless quadratures
``(X, P_X, Y, P_Y)`` with the measure ``dX dP_X dY dP_Y``. A Wigner function
written in complex amplitudes ``alpha = (X + i P_X)/sqrt(2)``,
``beta = (Y + i P_Y)/sqrt(2)`` and normalized against ``d^2alpha d^2beta``
becomes the quadrature form after multiplying by 1/4.

Photon subtraction
------------------
Removing a photon with ``a + (-1)^k b`` maps the Wigner function through
the Bopp correspondences ``a rho <-> (alpha + d/dalpha*/2) W`` and
``rho a^dagger <-> (alpha* + d/dalpha/2) W``. In real coordinates, with
``L_q = q + (1/2) d/dq``, the map reduces to

    W -> (L_X^2 + L_PX^2 + L_Y^2 + L_PY^2) W / 2 + (-1)^k (L_X L_Y + L_PX L_PY) W

Coefficient comparison shows that the closed-form single-subtraction
Wigner function with ``(X - Y)^2`` and ``(P_X - P_Y)^2`` terms is the
``k = 1`` case (subtraction with ``a - b``); ``k = 0`` yields the same
expression with ``(X + Y)^2``, ``(P_X + P_Y)^2`` and the sign of the
``sinh(2r)`` term reversed.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DegenerateStateError
from .polygauss import (
    AXES,
    MultiPoly,
    PolyGauss,
    QuadForm,
    GaussianMoments,
)

__all__ = [
    "LG",
    "TMSV",
    "PhotonSubtracted",
    "Noon",
    "StateFamily",
    "parse_state",
    "laguerre_coefficients",
    "lg_wigner",
    "tmsv_quadform",
    "tmsv_whitening",
    "tmsv_wigner",
    "subtract_photons",
    "whitened_subtraction",
    "WhitenedWigner",
    "noon_wigner",
]

X, PX, Y, PY = range(4)


def laguerre_coefficients(n: int) -> list[float]:
    """Power-series coefficients of the Laguerre polynomial ``L_n``."""
    return [(-1) ** j * math.comb(n, j) / math.factorial(j) for j in range(n + 1)]


def _compose(coefs, u: MultiPoly) -> MultiPoly:
    """Horner evaluation of a univariate series at polynomial argument ``u``."""
    out = MultiPoly.constant(coefs[-1], u.nvars)
    for c in reversed(coefs[:-1]):
        out = out * u + c
    return out


def _var(i: int) -> MultiPoly:
    return MultiPoly.variable(i, 4)


def lg_wigner(n: int, m: int) -> PolyGauss:
    """Wigner function of the Laguerre-Gaussian mode ``(n, m)``.

    ``(-1)^(n+m)/pi^2 L_n[4(Q0+Q2)] L_m[4(Q0-Q2)] exp(-4 Q0)`` with
    ``Q0 = |v|^2/4`` and ``Q2 = (X P_Y - Y P_X)/2``.
    """
    n, m = int(n), int(m)
    if n < 0 or m < 0:
        raise ValueError("LG indices must be nonnegative")
    return _lg_cached(n, m)


@lru_cache(maxsize=64)
def _lg_cached(n: int, m: int) -> PolyGauss:
    q0 = _var(X) ** 2 + _var(PX) ** 2 + _var(Y) ** 2 + _var(PY) ** 2
    q2 = 2.0 * (_var(X) * _var(PY) - _var(Y) * _var(PX))
    poly = _compose(laguerre_coefficients(n), q0 + q2)
    if m:
        poly = poly * _compose(laguerre_coefficients(m), q0 - q2)
    poly = poly * ((-1) ** (n + m) / math.pi**2)
    return PolyGauss(poly, QuadForm(np.eye(4)), AXES)


def tmsv_quadform(r: float) -> QuadForm:
    """Exponent ``2 sinh2r (XY - P_X P_Y) - cosh2r |v|^2`` as a matrix."""
    c, s = math.cosh(2 * r), math.sinh(2 * r)
    A = c * np.eye(4)
    A[X, Y] = A[Y, X] = -s
    A[PX, PY] = A[PY, PX] = s
    return QuadForm(A)


def tmsv_wigner(r: float) -> PolyGauss:
    """Two-mode squeezed vacuum with squeezing ``r`` and phase 0."""
    r = float(r)
    if not r >= 0:
        raise ValueError("squeezing must be nonnegative")
    return PolyGauss(MultiPoly.constant(1.0 / math.pi**2, 4), tmsv_quadform(r), AXES)


def tmsv_whitening(r: float) -> np.ndarray:
    """Matrix ``T`` with ``v^T A v = |T v|^2`` for the TMSV exponent ``A``.

    Rows are the principal quadratures ``(X + Y)/sqrt2``, ``(X - Y)/sqrt2``,
    ``(P_X + P_Y)/sqrt2``, ``(P_X - P_Y)/sqrt2`` scaled by ``e^{-r}``,
    ``e^{r}``, ``e^{r}``, ``e^{-r}``. The determinant is -1 (volume preserving).
    """
    return _whitening_parts(math.exp(-r), math.exp(r))[0]


def _whitening_parts(lo, hi):
    """``T`` and ``T^{-1}`` with ``e^{-r}``, ``e^{r}`` replaced by ``lo``, ``hi``."""
    h = 1.0 / math.sqrt(2.0)
    T = np.zeros((4, 4))
    T[0, [X, Y]] = lo * h, lo * h
    T[1, [X, Y]] = hi * h, -hi * h
    T[2, [PX, PY]] = hi * h, hi * h
    T[3, [PX, PY]] = lo * h, -lo * h
    T_inv = np.zeros((4, 4))
    T_inv[[X, Y], 0] = hi * h, hi * h
    T_inv[[X, Y], 1] = lo * h, -lo * h
    T_inv[[PX, PY], 2] = lo * h, lo * h
    T_inv[[PX, PY], 3] = hi * h, -hi * h
    return T, T_inv


# Parametric construction: polynomials in (w1..w4, C, S) where C = cosh r,
# S = sinh r, so e^{r} = C + S and e^{-r} = C - S enter linearly.
_C, _S = 4, 5


def _cs_matrix(cosh_part: np.ndarray, sinh_part: np.ndarray):
    """Entry-wise linear forms ``a C + b S`` as 6-variable polynomials."""
    return [
        [
            MultiPoly.variable(_C, 6, cosh_part[i, j]) + MultiPoly.variable(_S, 6, sinh_part[i, j])
            for j in range(4)
        ]
        for i in range(4)
    ]


def _frame_operators():
    # e^{+-r} = C +- S: the cosh part is T(lo=hi=1), the sinh part T(lo=-1, hi=1)
    T_c, Tinv_c = _whitening_parts(1.0, 1.0)
    T_s, Tinv_s = _whitening_parts(-1.0, 1.0)
    return _cs_matrix(T_c, T_s), _cs_matrix(Tinv_c, Tinv_s)


def _w_derivative(poly: MultiPoly, j: int) -> MultiPoly:
    # d/dw_j of poly * exp(-|w|^2), divided by the Gaussian
    return poly.derivative(j) - MultiPoly.variable(j, 6, 2.0) * poly


def _ladder(poly: MultiPoly, axis: int, T, T_inv) -> MultiPoly:
    # (q + (1/2) d/dq) W for physical axis q, with W written in w = T v
    out = MultiPoly.zero(6)
    for j in range(4):
        out = out + T_inv[axis][j] * MultiPoly.variable(j, 6) * poly
        out = out + 0.5 * T[j][axis] * _w_derivative(poly, j)
    return out


def _subtraction_map(poly: MultiPoly, k: int, T, T_inv) -> MultiPoly:
    sign = (-1) ** k
    first = {i: _ladder(poly, i, T, T_inv) for i in range(4)}
    out = MultiPoly.zero(6)
    for i in range(4):
        out = out + 0.5 * _ladder(first[i], i, T, T_inv)
    out = out + sign * _ladder(first[Y], X, T, T_inv)
    out = out + sign * _ladder(first[PY], PX, T, T_inv)
    return out


@lru_cache(maxsize=8)
def _parametric_subtraction(order: int, k: int):
    """Unnormalized whitened Wigner polynomial and its mass, both in (C, S)."""
    T, T_inv = _frame_operators()
    poly = MultiPoly.constant(1.0 / math.pi**2, 6)
    for _ in range(order):
        poly = _subtraction_map(poly, k, T, T_inv)
    # mass = pi^2 * E[w^e] under N(0, I/2), times C^a S^b
    weights = GaussianMoments(np.eye(4) / 2.0).many(poly.exps[:, :4]) * math.pi**2
    mass = MultiPoly(poly.exps[:, 4:], poly.coefs * weights, nvars=2)
    return poly, mass


@dataclass(frozen=True)
class WhitenedWigner:
    """``poly(T v) * exp(-|T v|^2)``: a Wigner function in its whitening frame.

    Pointwise evaluation in this frame stays accurate at squeezing levels
    where the expanded quadrature-frame polynomial loses precision.
    """

    poly: MultiPoly
    T: np.ndarray

    def __call__(self, points) -> np.ndarray:
        w = np.asarray(points, dtype=float) @ self.T.T
        return self.poly(w) * np.exp(-np.sum(w * w, axis=-1))

    def to_polygauss(self) -> PolyGauss:
        return PolyGauss(self.poly.substitute(self.T), QuadForm(self.T.T @ self.T), AXES)


def whitened_subtraction(r: float, order: int, k: int) -> WhitenedWigner:
    """Normalized photon-subtracted state in the TMSV whitening frame."""
    r = float(r)
    if order not in (1, 2):
        raise ValueError("subtraction order must be 1 or 2")
    if k not in (0, 1):
        raise ValueError("k must be 0 or 1")
    if not r > 0:
        raise DegenerateStateError("photon subtraction from the vacuum (r <= 0) has zero norm")
    poly, mass_poly = _parametric_subtraction(order, k)
    cs = np.array([math.cosh(r), math.sinh(r)])
    scale = np.prod(cs[None, :] ** poly.exps[:, 4:], axis=1)
    mass = float(mass_poly(cs))
    if not mass > 1e-300:
        raise DegenerateStateError(f"subtracted state has non-positive norm {mass!r}")
    w_poly = MultiPoly(poly.exps[:, :4], poly.coefs * scale / mass, nvars=4)
    return WhitenedWigner(w_poly, tmsv_whitening(r))


def subtract_photons(r: float, order: int, k: int) -> PolyGauss:
    """Normalized Wigner function of ``(a + (-1)^k b)^order |TMSV(r)>``.

    The subtraction map is applied in the frame ``w = T v`` that turns the
    TMSV Gaussian into ``exp(-|w|^2)``; applying it directly in ``v`` loses
    all precision at large ``r`` through cancellations of size ``e^{4r}``.
    Beyond ``r ~ 2`` the expanded quadrature-frame polynomial itself becomes
    ill-conditioned for integration; use ``whitened_subtraction`` there.
    """
    return whitened_subtraction(r, order, k).to_polygauss()


def noon_wigner(N: int) -> PolyGauss:
    """N00N state ``(|N,0> - |0,N>)/sqrt(2)`` (relative phase pi)."""
    N = int(N)
    if N < 1:
        raise ValueError("N00N photon number must be at least 1")
    terms: dict = {}
    # -2^N * 2 Re[(X + i P_X)^N (Y - i P_Y)^N]
    for a in range(N + 1):
        for b in range(N + 1):
            if (a + b) % 2:
                continue
            phase = (-1) ** ((a + b) // 2) * (-1) ** b
            c = -(2.0**N) * 2.0 * phase * math.comb(N, a) * math.comb(N, b)
            key = (N - a, a, N - b, b)
            terms[key] = terms.get(key, 0.0) + c
    cross = MultiPoly.from_terms(terms, 4)
    lag = laguerre_coefficients(N)
    rad_a = 2.0 * (_var(X) ** 2 + _var(PX) ** 2)
    rad_b = 2.0 * (_var(Y) ** 2 + _var(PY) ** 2)
    local = (_compose(lag, rad_a) + _compose(lag, rad_b)) * ((-1) ** N * math.factorial(N))
    poly = (cross + local) * (1.0 / (2.0 * math.pi**2 * math.factorial(N)))
    return PolyGauss(poly, QuadForm(np.eye(4)), AXES)


@dataclass(frozen=True)
class LG:
    """Laguerre-Gaussian mode of the 2D oscillator."""

    n: int
    m: int = 0

    def __post_init__(self):
        if int(self.n) != self.n or int(self.m) != self.m or self.n < 0 or self.m < 0:
            raise ValueError("LG requires integers n, m >= 0")

    def wigner(self) -> PolyGauss:
        return lg_wigner(self.n, self.m)

    @property
    def label(self) -> str:
        return f"lg:n={self.n},m={self.m}"


@dataclass(frozen=True)
class TMSV:
    """Two-mode squeezed vacuum."""

    r: float

    def __post_init__(self):
        if not (math.isfinite(self.r) and self.r >= 0):
            raise ValueError("TMSV requires r >= 0")

    def wigner(self) -> PolyGauss:
        return tmsv_wigner(self.r)

    @property
    def label(self) -> str:
        return f"tmsv:r={self.r!r}"


@dataclass(frozen=True)
class PhotonSubtracted:
    """Photon-subtracted two-mode squeezed vacuum."""

    r: float
    order: int = 1
    k: int = 1

    def __post_init__(self):
        if not (math.isfinite(self.r) and self.r >= 0):
            raise ValueError("photon subtraction requires r >= 0")
        if self.order not in (1, 2):
            raise ValueError("order must be 1 or 2")
        if self.k not in (0, 1):
            raise ValueError("k must be 0 or 1")

    def wigner(self) -> PolyGauss:
        return subtract_photons(self.r, self.order, self.k)

    @property
    def label(self) -> str:
        return f"sub:r={self.r!r},order={self.order},k={self.k}"


@dataclass(frozen=True)
class Noon:
    """N00N state with relative phase pi."""

    N: int

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise ValueError("N00N requires an integer N >= 1")

    def wigner(self) -> PolyGauss:
        return noon_wigner(self.N)

    @property
    def label(self) -> str:
        return f"noon:N={self.N}"


StateFamily = LG | TMSV | PhotonSubtracted | Noon

_GRAMMAR = {
    "lg": (LG, {"n": int, "m": int}),
    "tmsv": (TMSV, {"r": float}),
    "sub": (PhotonSubtracted, {"r": float, "order": int, "k": int}),
    "noon": (Noon, {"N": int}),
}

_SPEC_RE = re.compile(r"^\s*([a-z]+)\s*:\s*(.*?)\s*$")


def parse_state(text: str) -> StateFamily:
    """Parse ``lg:n=1,m=0``, ``tmsv:r=1``, ``sub:r=1,order=1,k=1`` or ``noon:N=2``."""
    match = _SPEC_RE.match(text)
    if not match or match.group(1) not in _GRAMMAR:
        raise ValueError(f"unknown state spec {text!r}")
    cls, fields = _GRAMMAR[match.group(1)]
    values = {}
    for item in filter(None, (p.strip() for p in match.group(2).split(","))):
        key, sep, raw = item.partition("=")
        key = key.strip()
        if not sep or key not in fields:
            raise ValueError(f"bad parameter {item!r} in {text!r}")
        if key in values:
            raise ValueError(f"duplicate parameter {key!r} in {text!r}")
        try:
            values[key] = fields[key](raw.strip())
        except ValueError:
            raise ValueError(f"bad value for {key!r} in {text!r}") from None
    missing = set(fields) - set(values)
    if missing:
        raise ValueError(f"missing parameters {sorted(missing)} in {text!r}")
    return cls(**values)
