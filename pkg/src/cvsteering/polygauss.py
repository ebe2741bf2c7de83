"""Exact calculus for polynomial-times-Gaussian phase-space functions.

Every Wigner function handled by this package has the form

    f(v) = P(v) * exp(-v^T A v)

with ``P`` a real multivariate polynomial and ``A`` a symmetric positive
definite matrix. Integrals, marginals and moments are computed exactly by
reducing monomials against Gaussian moments (Isserlis' theorem).

Axes are ordered ``(X, P_X, Y, P_Y)`` for full two-mode functions; marginals
carry the subset of labels they were reduced to.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DegenerateStateError, IntegrabilityError

__all__ = [
    "AXES",
    "MultiPoly",
    "QuadForm",
    "PolyGauss",
    "GaussianMoments",
    "evaluate",
    "evaluate_grid",
    "differentiate",
    "integrate",
    "marginalize",
    "restrict",
    "moment",
    "mul_poly",
    "to_json",
    "from_json",
]

AXES = ("X", "P_X", "Y", "P_Y")

PRUNE_RTOL = 1e-15
SYMMETRY_RTOL = 1e-12


class MultiPoly:
    """Sparse real polynomial stored as parallel exponent/coefficient arrays.

    Parameters
    ----------
    exps : array_like of int, shape (T, n)
        One row of nonnegative exponents per term.
    coefs : array_like of float, shape (T,)
        Term coefficients.

    Duplicate exponent rows are merged and negligible coefficients pruned
    on construction, so two polynomials with the same terms compare equal.
    """

    __slots__ = ("exps", "coefs")

    def __init__(self, exps, coefs, nvars: int | None = None):
        exps = np.asarray(exps, dtype=np.int64)
        coefs = np.asarray(coefs, dtype=float)
        if exps.ndim != 2:
            if nvars is None:
                raise ValueError("nvars is required for an empty polynomial")
            exps = exps.reshape(0, nvars)
        if np.any(exps < 0):
            raise ValueError("exponents must be nonnegative")
        exps, coefs = _combine(exps, coefs)
        exps.setflags(write=False)
        coefs.setflags(write=False)
        self.exps = exps
        self.coefs = coefs

    @classmethod
    def from_terms(cls, terms: Mapping[tuple, float], nvars: int) -> "MultiPoly":
        if not terms:
            return cls.zero(nvars)
        idx = np.array(list(terms.keys()), dtype=np.int64).reshape(-1, nvars)
        return cls(idx, np.array(list(terms.values()), dtype=float))

    @classmethod
    def zero(cls, nvars: int) -> "MultiPoly":
        return cls(np.zeros((0, nvars), dtype=np.int64), np.zeros(0))

    @classmethod
    def constant(cls, value: float, nvars: int) -> "MultiPoly":
        return cls(np.zeros((1, nvars), dtype=np.int64), [value])

    @classmethod
    def variable(cls, axis: int, nvars: int, coef: float = 1.0) -> "MultiPoly":
        e = np.zeros((1, nvars), dtype=np.int64)
        e[0, axis] = 1
        return cls(e, [coef])

    @classmethod
    def linear(cls, weights: Sequence[float]) -> "MultiPoly":
        """Homogeneous linear form sum_i w_i v_i."""
        n = len(weights)
        return cls(np.eye(n, dtype=np.int64), np.asarray(weights, dtype=float))

    @property
    def nvars(self) -> int:
        return self.exps.shape[1]

    @property
    def degree(self) -> int:
        if len(self.coefs) == 0:
            return 0
        return int(self.exps.sum(axis=1).max())

    def max_exponents(self) -> np.ndarray:
        if len(self.coefs) == 0:
            return np.zeros(self.nvars, dtype=np.int64)
        return self.exps.max(axis=0)

    def terms(self) -> dict:
        return {tuple(int(i) for i in e): float(c) for e, c in zip(self.exps, self.coefs)}

    def __len__(self) -> int:
        return len(self.coefs)

    def __repr__(self) -> str:
        return f"MultiPoly(nvars={self.nvars}, terms={len(self)}, degree={self.degree})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, MultiPoly):
            return NotImplemented
        return (
            self.exps.shape == other.exps.shape
            and np.array_equal(self.exps, other.exps)
            and np.array_equal(self.coefs, other.coefs)
        )

    __hash__ = None

    def __add__(self, other: "MultiPoly") -> "MultiPoly":
        if not isinstance(other, MultiPoly):
            other = MultiPoly.constant(float(other), self.nvars)
        return MultiPoly(
            np.vstack([self.exps, other.exps]), np.concatenate([self.coefs, other.coefs])
        )

    __radd__ = __add__

    def __neg__(self) -> "MultiPoly":
        return MultiPoly(self.exps, -self.coefs)

    def __sub__(self, other: "MultiPoly") -> "MultiPoly":
        if not isinstance(other, MultiPoly):
            other = MultiPoly.constant(float(other), self.nvars)
        return self + (-other)

    def __rsub__(self, other) -> "MultiPoly":
        return (-self) + other

    def __mul__(self, other) -> "MultiPoly":
        if isinstance(other, MultiPoly):
            return _poly_product(self, other)
        return MultiPoly(self.exps, self.coefs * float(other))

    __rmul__ = __mul__

    def __truediv__(self, scalar: float) -> "MultiPoly":
        return MultiPoly(self.exps, self.coefs / float(scalar))

    def __pow__(self, p: int) -> "MultiPoly":
        out = MultiPoly.constant(1.0, self.nvars)
        for _ in range(int(p)):
            out = out * self
        return out

    def derivative(self, axis: int) -> "MultiPoly":
        mask = self.exps[:, axis] > 0
        e = self.exps[mask].copy()
        c = self.coefs[mask] * e[:, axis]
        e[:, axis] -= 1
        return MultiPoly(e, c, nvars=self.nvars)

    def __call__(self, points) -> np.ndarray:
        """Evaluate at points of shape (n,) or (N, n)."""
        pts = np.asarray(points, dtype=float)
        scalar = pts.ndim == 1
        pts = np.atleast_2d(pts)
        if len(self.coefs) == 0:
            out = np.zeros(len(pts))
        else:
            out = np.empty(len(pts))
            chunk = max(1, 2_000_000 // max(1, self.exps.size))
            for start in range(0, len(pts), chunk):
                block = pts[start : start + chunk]
                mono = np.prod(block[:, None, :] ** self.exps[None, :, :], axis=2)
                out[start : start + chunk] = mono @ self.coefs
        return out[0] if scalar else out

    def select(self, axes: Sequence[int]) -> "MultiPoly":
        """Set every axis not in ``axes`` to zero and drop it."""
        others = [i for i in range(self.nvars) if i not in axes]
        mask = np.all(self.exps[:, others] == 0, axis=1) if others else np.ones(len(self), bool)
        return MultiPoly(self.exps[mask][:, list(axes)], self.coefs[mask], nvars=len(axes))

    def substitute(self, T) -> "MultiPoly":
        """Return ``Q(v) = P(T v)`` for a square matrix ``T``."""
        T = np.asarray(T, dtype=float)
        n = self.nvars
        if len(self) == 0:
            return MultiPoly.zero(n)
        forms = [MultiPoly.linear(T[i]) for i in range(n)]
        powers = [[MultiPoly.constant(1.0, n)] for _ in range(n)]
        top = self.max_exponents()
        for i in range(n):
            for _ in range(int(top[i])):
                powers[i].append(powers[i][-1] * forms[i])
        pieces_e, pieces_c = [], []
        for e, c in zip(self.exps, self.coefs):
            term = powers[0][e[0]] * c
            for i in range(1, n):
                if e[i]:
                    term = term * powers[i][e[i]]
            pieces_e.append(term.exps)
            pieces_c.append(term.coefs)
        return MultiPoly(np.vstack(pieces_e), np.concatenate(pieces_c))

    def dense(self) -> np.ndarray:
        """Dense coefficient array indexed by exponent tuple."""
        shape = tuple(int(d) + 1 for d in self.max_exponents())
        out = np.zeros(shape)
        np.add.at(out, tuple(self.exps.T), self.coefs)
        return out


def _combine(exps: np.ndarray, coefs: np.ndarray):
    """Merge duplicate exponent rows and prune negligible coefficients."""
    if len(coefs) == 0:
        return exps.reshape(0, exps.shape[1]).copy(), coefs.copy()
    base = int(exps.max()) + 1
    weights = base ** np.arange(exps.shape[1], dtype=np.int64)
    keys = exps @ weights
    uniq, first, inverse = np.unique(keys, return_index=True, return_inverse=True)
    summed = np.bincount(inverse.ravel(), weights=coefs, minlength=len(uniq))
    out_exps = exps[first]
    scale = np.max(np.abs(summed)) if len(summed) else 0.0
    keep = np.abs(summed) > PRUNE_RTOL * scale
    return out_exps[keep].copy(), summed[keep]


def _poly_product(p: MultiPoly, q: MultiPoly) -> MultiPoly:
    if p.nvars != q.nvars:
        raise ValueError("polynomials live in different dimensions")
    if len(p) == 0 or len(q) == 0:
        return MultiPoly.zero(p.nvars)
    exps = (p.exps[:, None, :] + q.exps[None, :, :]).reshape(-1, p.nvars)
    coefs = np.outer(p.coefs, q.coefs).ravel()
    return MultiPoly(exps, coefs)


@dataclass(frozen=True)
class QuadForm:
    """Symmetric matrix ``A`` of the exponent ``-v^T A v``."""

    A: np.ndarray

    def __post_init__(self):
        A = np.array(self.A, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError("quadratic form must be a square matrix")
        scale = max(np.max(np.abs(A)), 1.0)
        if np.max(np.abs(A - A.T)) > SYMMETRY_RTOL * scale:
            raise ValueError("quadratic form must be symmetric")
        A = 0.5 * (A + A.T)
        A.setflags(write=False)
        object.__setattr__(self, "A", A)

    @property
    def dim(self) -> int:
        return self.A.shape[0]

    def check_integrable(self):
        if np.any(np.linalg.eigvalsh(self.A) <= 0):
            raise IntegrabilityError("Gaussian exponent is not positive definite")

    @property
    def covariance(self) -> np.ndarray:
        """Covariance ``A^{-1}/2`` of the normalized Gaussian."""
        self.check_integrable()
        return np.linalg.inv(self.A) / 2.0

    @property
    def mass(self) -> float:
        """Integral of ``exp(-v^T A v)`` over R^n."""
        self.check_integrable()
        return math.sqrt(math.pi**self.dim / np.linalg.det(self.A))

    def __call__(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        return np.exp(-np.einsum("...i,ij,...j->...", pts, self.A, pts))


@dataclass(frozen=True)
class PolyGauss:
    """The function ``poly(v) * exp(-v^T quad.A v)`` over labelled axes."""

    poly: MultiPoly
    quad: QuadForm
    axes: tuple = field(default=AXES)

    def __post_init__(self):
        object.__setattr__(self, "axes", tuple(self.axes))
        if self.poly.nvars != self.quad.dim or len(self.axes) != self.quad.dim:
            raise ValueError("polynomial, quadratic form and axes disagree on dimension")

    @property
    def dim(self) -> int:
        return self.quad.dim

    def axis_index(self, label: str) -> int:
        try:
            return self.axes.index(label)
        except ValueError:
            raise KeyError(f"axis {label!r} not in {self.axes}") from None

    def __call__(self, points) -> np.ndarray:
        return evaluate(self, points)

    def scaled(self, factor: float) -> "PolyGauss":
        return PolyGauss(self.poly * factor, self.quad, self.axes)


class GaussianMoments:
    """Memoized raw moments ``E[v^e]`` of a zero-mean Gaussian.

    Uses the Isserlis recursion
    ``E[v_i v^e] = sum_j cov[i, j] e_j E[v^(e - 1_j)]``.
    """

    def __init__(self, cov):
        self.cov = np.asarray(cov, dtype=float)
        off = self.cov - np.diag(np.diag(self.cov))
        self._diagonal = not np.any(off)
        self._cache: dict = {}

    def __call__(self, e) -> float:
        e = tuple(int(x) for x in e)
        if sum(e) % 2:
            return 0.0
        if self._diagonal:
            out = 1.0
            for i, k in enumerate(e):
                if k % 2:
                    return 0.0
                out *= _double_factorial(k - 1) * self.cov[i, i] ** (k // 2)
            return out
        return self._recurse(e)

    def _recurse(self, e: tuple) -> float:
        if not any(e):
            return 1.0
        hit = self._cache.get(e)
        if hit is not None:
            return hit
        i = next(k for k, x in enumerate(e) if x)
        rest = list(e)
        rest[i] -= 1
        total = 0.0
        for j, count in enumerate(rest):
            if count and self.cov[i, j] != 0.0:
                sub = list(rest)
                sub[j] -= 1
                total += self.cov[i, j] * count * self._recurse(tuple(sub))
        self._cache[e] = total
        return total

    def many(self, exps: np.ndarray) -> np.ndarray:
        return np.array([self(e) for e in exps], dtype=float)


def _double_factorial(k: int) -> int:
    return math.prod(range(k, 0, -2)) if k > 0 else 1


def evaluate(pg: PolyGauss, v) -> np.ndarray | float:
    """Pointwise value of ``pg`` at one point (n,) or many points (N, n)."""
    pts = np.asarray(v, dtype=float)
    return pg.poly(pts) * pg.quad(pts)


def evaluate_grid(pg: PolyGauss, *coords) -> np.ndarray:
    """Evaluate a 1D or 2D ``PolyGauss`` on the tensor grid of ``coords``.

    The polynomial part is evaluated as ``V_x C V_y^T`` with Vandermonde
    matrices, which is much cheaper than pointwise evaluation.
    """
    if len(coords) != pg.dim or pg.dim not in (1, 2):
        raise ValueError("evaluate_grid supports 1D and 2D functions only")
    C = pg.poly.dense()
    A = pg.quad.A
    if pg.dim == 1:
        (x,) = (np.asarray(c, dtype=float) for c in coords)
        V = np.vander(x, C.shape[0], increasing=True)
        return (V @ C) * np.exp(-A[0, 0] * x * x)
    x, y = (np.asarray(c, dtype=float) for c in coords)
    Vx = np.vander(x, C.shape[0], increasing=True)
    Vy = np.vander(y, C.shape[1], increasing=True)
    poly = Vx @ C @ Vy.T
    expo = (
        A[0, 0] * (x * x)[:, None]
        + 2.0 * A[0, 1] * np.outer(x, y)
        + A[1, 1] * (y * y)[None, :]
    )
    return poly * np.exp(-expo)


def differentiate(pg: PolyGauss, axis) -> PolyGauss:
    """Exact partial derivative along ``axis`` (label or index)."""
    i = pg.axis_index(axis) if isinstance(axis, str) else int(axis)
    grad_quad = MultiPoly.linear(-2.0 * pg.quad.A[i])
    poly = pg.poly.derivative(i) + grad_quad * pg.poly
    return PolyGauss(poly, pg.quad, pg.axes)


def mul_poly(pg: PolyGauss, q: MultiPoly) -> PolyGauss:
    return PolyGauss(pg.poly * q, pg.quad, pg.axes)


def integrate(pg: PolyGauss) -> float:
    """Integral of ``pg`` over all of R^n."""
    mass = pg.quad.mass
    if len(pg.poly) == 0:
        return 0.0
    moments = GaussianMoments(pg.quad.covariance)
    return float(mass * np.dot(pg.poly.coefs, moments.many(pg.poly.exps)))


def moment(pg: PolyGauss, multi_index) -> float:
    """Normalized moment ``int v^k pg / int pg``.

    ``multi_index`` is a sequence of exponents, one per axis, or a mapping
    from axis label to exponent.
    """
    if isinstance(multi_index, Mapping):
        e = [0] * pg.dim
        for label, k in multi_index.items():
            e[pg.axis_index(label)] += int(k)
        multi_index = e
    total = integrate(pg)
    if abs(total) < 1e-300:
        raise DegenerateStateError("moment of a zero-mass function")
    mono = MultiPoly(np.asarray([multi_index], dtype=np.int64), [1.0])
    return integrate(mul_poly(pg, mono)) / total


def _resolve(pg: PolyGauss, labels: Iterable) -> list:
    idx = [pg.axis_index(a) if isinstance(a, str) else int(a) for a in labels]
    if len(set(idx)) != len(idx):
        raise ValueError("repeated axis")
    return idx


def marginalize(pg: PolyGauss, keep) -> PolyGauss:
    """Integrate out every axis not in ``keep``.

    Writing the integrated block as ``b = M k + z`` with
    ``M = -A_bb^{-1} A_bk`` decouples the exponent into the Schur complement
    on the kept axes plus an independent Gaussian in ``z``, whose moments
    then reduce the polynomial.
    """
    kept = _resolve(pg, keep)
    if not kept or len(kept) >= pg.dim:
        raise ValueError("keep must be a proper nonempty subset of the axes")
    dropped = [i for i in range(pg.dim) if i not in kept]
    A = pg.quad.A
    pg.quad.check_integrable()
    Akk = A[np.ix_(kept, kept)]
    Akb = A[np.ix_(kept, dropped)]
    Abb = A[np.ix_(dropped, dropped)]
    Abb_inv = np.linalg.inv(Abb)
    schur = Akk - Akb @ Abb_inv @ Akb.T
    M = -Abb_inv @ Akb.T  # (nb, nk)
    nk, nb = len(kept), len(dropped)
    # Reorder to (kept..., dropped...) then substitute b = M k + z.
    order = kept + dropped
    poly = MultiPoly(pg.poly.exps[:, order], pg.poly.coefs)
    if np.any(M):
        poly = _shift_block(poly, nk, M)
    moments = GaussianMoments(Abb_inv / 2.0)
    weights = moments.many(poly.exps[:, nk:]) if len(poly) else np.zeros(0)
    factor = math.sqrt(math.pi**nb / np.linalg.det(Abb))
    reduced = MultiPoly(poly.exps[:, :nk], poly.coefs * weights * factor, nvars=nk)
    axes = tuple(pg.axes[i] for i in kept)
    return PolyGauss(reduced, QuadForm(schur), axes)


def _shift_block(poly: MultiPoly, nk: int, M: np.ndarray) -> MultiPoly:
    """Substitute ``b_j -> z_j + sum_i M[j, i] k_i`` for the trailing block."""
    if len(poly) == 0:
        return poly
    n = poly.nvars
    nb = n - nk
    forms = []
    for j in range(nb):
        w = np.zeros(n)
        w[:nk] = M[j]
        w[nk + j] = 1.0
        forms.append(MultiPoly.linear(w))
    cache: dict = {}

    def power(j: int, p: int) -> MultiPoly:
        key = (j, p)
        if key not in cache:
            cache[key] = MultiPoly.constant(1.0, n) if p == 0 else power(j, p - 1) * forms[j]
        return cache[key]

    pieces_e, pieces_c = [], []
    groups: dict = {}
    for e, c in zip(poly.exps, poly.coefs):
        groups.setdefault(tuple(e[nk:]), []).append((e, c))
    for eb, members in groups.items():
        sub = MultiPoly.constant(1.0, n)
        for j, p in enumerate(eb):
            if p:
                sub = sub * power(j, p)
        head_e = np.zeros((len(members), n), dtype=np.int64)
        head_c = np.empty(len(members))
        for r, (e, c) in enumerate(members):
            head_e[r, :nk] = e[:nk]
            head_c[r] = c
        prod = MultiPoly(head_e, head_c) * sub
        pieces_e.append(prod.exps)
        pieces_c.append(prod.coefs)
    return MultiPoly(np.vstack(pieces_e), np.concatenate(pieces_c))


def restrict(pg: PolyGauss, keep) -> PolyGauss:
    """Slice of ``pg`` with every axis outside ``keep`` set to zero."""
    kept = _resolve(pg, keep)
    A = pg.quad.A[np.ix_(kept, kept)]
    return PolyGauss(pg.poly.select(kept), QuadForm(A), tuple(pg.axes[i] for i in kept))


def to_json(pg: PolyGauss) -> str:
    """Debug dump ``{"A": rows, "terms": [{"idx": [...], "c": float}]}``."""
    payload = {
        "A": pg.quad.A.tolist(),
        "terms": [{"idx": [int(i) for i in e], "c": float(c)} for e, c in zip(pg.poly.exps, pg.poly.coefs)],
    }
    if pg.axes != AXES:
        payload["axes"] = list(pg.axes)
    return json.dumps(payload)


def from_json(text: str) -> PolyGauss:
    payload = json.loads(text)
    A = np.asarray(payload["A"], dtype=float)
    n = A.shape[0]
    terms = {tuple(t["idx"]): t["c"] for t in payload["terms"]}
    axes = tuple(payload.get("axes", AXES[:n]))
    return PolyGauss(MultiPoly.from_terms(terms, n), QuadForm(A), axes)
