"""Bell-CHSH tests with displaced-parity correlators.

The correlator for displacements ``(alpha, beta)`` is the Wigner transform

    Pi(alpha, beta) = pi^2 W(sqrt2 Re alpha, sqrt2 Im alpha, sqrt2 Re beta, sqrt2 Im beta)

which lies in ``[-1, 1]``. The CHSH combination is

    BI = Pi(a1, b1) + Pi(a1, b2) + Pi(a2, b1) - Pi(a2, b2)

and local realism requires ``|BI| <= 2``.

Real-only searches restrict each party's displacement to one quadrature
axis. Laguerre-Gaussian modes correlate ``X`` with ``P_Y``, so Bob's
displacement is taken along ``P_Y`` (imaginary ``beta``) for them; every
other family correlates ``X`` with ``Y`` and uses real ``beta``.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import minimize

from .polygauss import PolyGauss, restrict
from .states import LG, TMSV, Noon, PhotonSubtracted, StateFamily, whitened_subtraction

__all__ = [
    "BellSettings",
    "BellReport",
    "displacement_points",
    "wigner_transform",
    "bell_sum",
    "tmsv_bell_closed_form",
    "tmsv_bell_exact",
    "bell_optimize",
    "write_trace",
]

LOCAL_BOUND = 2.0
# rounding guard: product states reach |BI| = 2 exactly
VIOLATION_TOL = 1e-9
N_STARTS = 64
INIT_BOX = 0.5
R_INIT = (0.0, 5.0)
R_MIN, R_MAX = 1e-3, 6.0
SEARCH_BOX = 10.0
XATOL = 1e-10
FATOL = 1e-13
MAXFEV = 4000
SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class BellSettings:
    """Alice's displacements ``s1, s2`` and Bob's ``t1, t2``."""

    s1: complex
    s2: complex
    t1: complex
    t2: complex
    r: float | None = None

    def __post_init__(self):
        for name in ("s1", "s2", "t1", "t2"):
            z = complex(getattr(self, name))
            if not (math.isfinite(z.real) and math.isfinite(z.imag)):
                raise ValueError(f"setting {name} is not finite")
            if abs(z) > SEARCH_BOX * (1 + 1e-12):
                raise ValueError(f"setting {name} is outside the search box |z| <= {SEARCH_BOX}")
            object.__setattr__(self, name, z)

    def to_dict(self) -> dict:
        out = {k: [getattr(self, k).real, getattr(self, k).imag] for k in ("s1", "s2", "t1", "t2")}
        out["r"] = self.r
        return out


@dataclass(frozen=True)
class BellReport:
    settings: BellSettings
    bi: float
    abs_bi: float
    violation: bool
    starts: int
    evaluations: int
    seed: int
    state: str = ""
    free_r: bool = False
    trace: list = field(default_factory=list, repr=False, compare=False)

    @property
    def ratio(self) -> float:
        return self.abs_bi / LOCAL_BOUND

    def to_dict(self) -> dict:
        return {
            "state": self.state,
            "settings": self.settings.to_dict(),
            "bi": self.bi,
            "abs_bi": self.abs_bi,
            "ratio": self.ratio,
            "violation": self.violation,
            "free_r": self.free_r,
            "optimizer": {"starts": self.starts, "evaluations": self.evaluations, "seed": self.seed},
        }


def displacement_points(alphas, betas) -> np.ndarray:
    """Phase-space points ``sqrt2 (Re a, Im a, Re b, Im b)``, shape (N, 4)."""
    a = np.asarray(alphas, dtype=complex)
    b = np.asarray(betas, dtype=complex)
    return SQRT2 * np.stack([a.real, a.imag, b.real, b.imag], axis=-1)


def wigner_transform(pg: Callable, alpha, beta) -> np.ndarray | float:
    """Displaced-parity value ``pi^2 W`` at ``(alpha, beta)``.

    ``pg`` is a ``PolyGauss`` or any callable evaluating a quadrature
    Wigner function on an array of points.
    """
    out = math.pi**2 * np.asarray(pg(displacement_points(alpha, beta)))
    return float(out) if out.ndim == 0 else out


def _chsh(pg: Callable, s1, s2, t1, t2) -> float:
    v = wigner_transform(pg, [s1, s1, s2, s2], [t1, t2, t1, t2])
    return float(v[0] + v[1] + v[2] - v[3])


def bell_sum(pg: Callable, settings: BellSettings) -> float:
    """Signed CHSH combination ``Pi(s1,t1) + Pi(s1,t2) + Pi(s2,t1) - Pi(s2,t2)``."""
    return _chsh(pg, settings.s1, settings.s2, settings.t1, settings.t2)


def tmsv_bell_closed_form(J: float, r: float) -> float:
    """Large-squeezing TMSV Bell sum ``1 - exp(-4u) + 2 exp(-u)``, ``u = J e^{2r}``."""
    if J < 0:
        raise ValueError("J must be nonnegative")
    u = J * math.exp(2 * r)
    return 1.0 - math.exp(-4 * u) + 2.0 * math.exp(-u)


def tmsv_bell_exact(J: float, r: float) -> float:
    """TMSV Bell sum at ``alpha = (0, sqrt J)``, ``beta = (0, -sqrt J)`` for any ``r``."""
    return 1.0 + 2.0 * math.exp(-2 * J * math.cosh(2 * r)) - math.exp(-4 * J * math.exp(2 * r))


def _with_r(family: StateFamily, r: float) -> StateFamily:
    if isinstance(family, TMSV):
        return TMSV(r)
    if isinstance(family, PhotonSubtracted):
        return PhotonSubtracted(r, family.order, family.k)
    raise ValueError(f"squeezing is not a parameter of {type(family).__name__}")


def _transform_function(family: StateFamily, plane: tuple) -> Callable:
    """Fast Wigner evaluator for ``family`` on (N, 4) points."""
    if isinstance(family, PhotonSubtracted):
        return whitened_subtraction(family.r, family.order, family.k)
    pg = family.wigner()
    if plane is None:
        return pg
    sliced = restrict(pg, plane)
    cols = [pg.axis_index(a) for a in plane]
    return lambda pts: sliced(np.asarray(pts)[..., cols])


def _plane(family: StateFamily) -> tuple:
    return ("X", "P_Y") if isinstance(family, LG) else ("X", "Y")


class _Objective:
    """``-|BI|`` as a function of the flat search vector.

    Real searches use one coordinate per displacement; complex searches use
    (re, im) pairs. With free squeezing the last coordinate is ``r`` and the
    displacements are stored scaled by ``e^{r}``, which keeps the optimum at
    order-one coordinates however large ``r`` grows.
    """

    def __init__(self, family: StateFamily, free_r: bool, complex_search: bool):
        self.family = family
        self.free_r = free_r
        self.complex_search = complex_search
        self.bob_imag = isinstance(family, LG) and not complex_search
        plane = None if complex_search else _plane(family)
        self._plane = plane
        self._fixed = None if free_r else _transform_function(family, plane)
        self._cache_r = None
        self._cache_fn = None
        self.evaluations = 0

    @property
    def ndim(self) -> int:
        return (8 if self.complex_search else 4) + (1 if self.free_r else 0)

    def decode(self, x) -> BellSettings:
        x = np.asarray(x, dtype=float)
        r = None
        scale = 1.0
        if self.free_r:
            r = float(np.clip(x[-1], R_MIN, R_MAX))
            scale = math.exp(-r)
            x = x[:-1]
        if self.complex_search:
            z = (x[0::2] + 1j * x[1::2]) * scale
        else:
            z = x.astype(complex) * scale
            if self.bob_imag:
                z[2:] *= 1j
        z = np.where(np.abs(z) > SEARCH_BOX, z * SEARCH_BOX / np.maximum(np.abs(z), 1e-300), z)
        return BellSettings(*z, r=r)

    def function(self, r: float | None) -> Callable:
        if not self.free_r:
            return self._fixed
        if r != self._cache_r:
            self._cache_r = r
            self._cache_fn = _transform_function(_with_r(self.family, r), self._plane)
        return self._cache_fn

    def signed(self, x) -> tuple:
        settings = self.decode(x)
        return bell_sum(self.function(settings.r), settings), settings

    def __call__(self, x) -> float:
        self.evaluations += 1
        return -abs(self.signed(x)[0])


def _initial_points(objective: _Objective, seed: int, starts: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    n_disp = objective.ndim - (1 if objective.free_r else 0)
    x0 = rng.uniform(-INIT_BOX, INIT_BOX, size=(starts, n_disp))
    # Every other start is antisymmetric (t_i = -s_i), the pattern of the
    # known symmetric optima.
    half = n_disp // 2
    x0[1::2, half:] = -x0[1::2, :half]
    if objective.free_r:
        r0 = rng.uniform(*R_INIT, size=(starts, 1))
        x0 = np.hstack([x0, r0])
    return x0


def _local_search(args) -> tuple:
    family, free_r, complex_search, x0, record = args
    objective = _Objective(family, free_r, complex_search)
    trace = []
    callback = None
    if record:
        def callback(xk):
            value, settings = objective.signed(xk)
            trace.append((len(trace), value, settings))
    res = minimize(
        objective,
        x0,
        method="Nelder-Mead",
        callback=callback,
        options={"xatol": XATOL, "fatol": FATOL, "maxfev": MAXFEV, "adaptive": objective.ndim > 4},
    )
    value, settings = objective.signed(res.x)
    return value, settings, objective.evaluations, trace


def bell_optimize(
    family: StateFamily,
    free_r: bool = False,
    seed: int = 0,
    starts: int = N_STARTS,
    complex_search: bool = False,
    n_jobs: int = 1,
    trace: bool = False,
) -> BellReport:
    """Multi-start Nelder-Mead maximization of ``|BI|``.

    Parameters
    ----------
    family : StateFamily
        State to test. With ``free_r`` its squeezing is ignored and searched.
    free_r : bool
        Also optimize the squeezing parameter (TMSV and photon-subtracted).
    seed : int
        Seed for the start points; equal seeds give identical reports.
    starts : int
        Number of local searches.
    complex_search : bool
        Search full complex displacements instead of one quadrature axis per
        party.
    n_jobs : int
        Worker processes for the local searches.
    trace : bool
        Keep the iteration history of the winning start.
    """
    if free_r and not isinstance(family, (TMSV, PhotonSubtracted)):
        raise ValueError("free squeezing requires a TMSV or photon-subtracted family")
    objective = _Objective(family, free_r, complex_search)
    x0 = _initial_points(objective, seed, starts)
    jobs = [(family, free_r, complex_search, x, False) for x in x0]
    if n_jobs > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(_local_search, jobs))
    else:
        results = [_local_search(job) for job in jobs]
    # ties keep the lowest start index
    best = max(range(len(results)), key=lambda i: (abs(results[i][0]), -i))
    value, settings, _, _ = results[best]
    history = []
    if trace:
        history = _local_search((family, free_r, complex_search, x0[best], True))[3]
    return BellReport(
        settings=settings,
        bi=value,
        abs_bi=abs(value),
        violation=abs(value) > LOCAL_BOUND + VIOLATION_TOL,
        starts=starts,
        evaluations=sum(r[2] for r in results),
        seed=seed,
        state=getattr(family, "label", ""),
        free_r=free_r,
        trace=history,
    )


def write_trace(report: BellReport, path) -> None:
    """Optimizer history as CSV ``iteration,bi,<settings...>``."""
    names = ["s1_re", "s1_im", "s2_re", "s2_im", "t1_re", "t1_im", "t2_re", "t2_im", "r"]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["iteration", "bi", *names])
        for it, value, s in report.trace:
            flat = [getattr(s, k) for k in ("s1", "s2", "t1", "t2")]
            row = [x for z in flat for x in (z.real, z.imag)]
            row.append(s.r if s.r is not None else "")
            writer.writerow([it, f"{value:.17g}", *(f"{v:.17g}" if v != "" else "" for v in row)])
