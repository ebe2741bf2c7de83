import csv
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cvsteering.bell import (
    BellSettings,
    bell_optimize,
    bell_sum,
    tmsv_bell_closed_form,
    tmsv_bell_exact,
    wigner_transform,
    write_trace,
)
from cvsteering.polygauss import restrict
from cvsteering.states import LG, TMSV, Noon, PhotonSubtracted, whitened_subtraction


def parity_functions():
    yield "vacuum", LG(0).wigner()
    for n in (1, 2, 4):
        yield f"lg{n}", LG(n).wigner()
    yield "lg21", LG(2, 1).wigner()
    for r in (0.5, 2.0):
        yield f"tmsv{r}", TMSV(r).wigner()
    for order in (1, 2):
        for k in (0, 1):
            yield f"sub{order}{k}", whitened_subtraction(1.2, order, k)
    for N in range(1, 6):
        yield f"noon{N}", Noon(N).wigner()


@pytest.mark.parametrize("name,pg", list(parity_functions()))
def test_parity_bound(name, pg):
    rng = np.random.default_rng(0)
    alpha = rng.normal(scale=0.8, size=10_000) + 1j * rng.normal(scale=0.8, size=10_000)
    beta = rng.normal(scale=0.8, size=10_000) + 1j * rng.normal(scale=0.8, size=10_000)
    assert np.max(np.abs(wigner_transform(pg, alpha, beta))) <= 1 + 1e-9


def test_vacuum_and_single_photon_parity():
    assert wigner_transform(LG(0).wigner(), 0, 0) == pytest.approx(1.0)
    assert wigner_transform(Noon(1).wigner(), 0, 0) == pytest.approx(-1.0)


@pytest.mark.parametrize("r", [0.0, 0.5, 1.3])
@pytest.mark.parametrize("J", [0.01, 0.2])
def test_tmsv_transform_on_one_mode(J, r):
    value = wigner_transform(TMSV(r).wigner(), math.sqrt(J), 0.0)
    assert value == pytest.approx(math.exp(-2 * J * math.cosh(2 * r)), rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.0, 0.5), st.floats(0.0, 3.0))
def test_tmsv_bell_sum_matches_exact_expression(J, r):
    s = math.sqrt(J)
    bi = bell_sum(TMSV(r).wigner(), BellSettings(0.0, s, 0.0, -s))
    assert bi == pytest.approx(tmsv_bell_exact(J, r), abs=1e-12)


def test_closed_form_values():
    r = 3.9
    assert tmsv_bell_closed_form(math.log(2) / 3 * math.exp(-2 * r), r) == pytest.approx(2.19055, abs=1e-4)
    assert tmsv_bell_closed_form(0.0, 1.0) == 2.0
    assert tmsv_bell_closed_form(0.00009467, 3.9) == pytest.approx(2.19055, abs=1e-4)
    # exact and large-r forms agree once e^{-2r} J is negligible
    assert tmsv_bell_exact(0.00009467, 3.9) == pytest.approx(tmsv_bell_closed_form(0.00009467, 3.9), abs=1e-4)
    with pytest.raises(ValueError):
        tmsv_bell_closed_form(-1.0, 1.0)


@settings(max_examples=30, deadline=None)
@given(st.floats(-1, 1), st.floats(-1, 1))
def test_equal_settings_never_violate(a, b):
    z = complex(a, b)
    bi = bell_sum(Noon(1).wigner(), BellSettings(z, z, z, z))
    assert -2 - 1e-12 <= bi <= 2 + 1e-12


def test_printed_settings():
    noon = bell_sum(Noon(1).wigner(), BellSettings(0.0610285, -0.339053, -0.0610285, 0.339053))
    assert noon == pytest.approx(-2.2387, abs=1e-3)
    tmsv = bell_sum(TMSV(3.8853675).wigner(), BellSettings(0.0036990, -0.0115244, -0.0039127, 0.0113108))
    assert tmsv == pytest.approx(2.32449, abs=2e-3)
    sub1 = bell_sum(whitened_subtraction(3.0, 1, 1), BellSettings(-0.0067, 0.0201, 0.0067, -0.0201))
    assert sub1 == pytest.approx(-2.5444, abs=2e-3)
    sub2 = bell_sum(whitened_subtraction(4.4015, 2, 1), BellSettings(-0.1338, -0.1392, -0.1365, -0.1311))
    assert sub2 == pytest.approx(2.6305, abs=2e-3)


def test_settings_validation():
    with pytest.raises(ValueError):
        BellSettings(complex("nan"), 0, 0, 0)
    with pytest.raises(ValueError):
        BellSettings(11.0, 0, 0, 0)
    assert BellSettings(1, 2j, 0, 0).to_dict()["s2"] == [0.0, 2.0]


def brute_force_lg1(step=0.002, half=0.4):
    """Exact max |BI| on a grid, with Alice on X and Bob on P_Y.

    For fixed (a1, a2) the sum splits into u[b1] + v[b2] with
    u = M[a1] + M[a2] and v = M[a1] - M[a2], so the 4D scan reduces to a
    scan over (a1, a2).
    """
    pg = LG(1).wigner()
    grid = np.arange(-half, half + step / 2, step)
    sl = restrict(pg, ("X", "P_Y"))
    pts = math.sqrt(2.0) * np.stack(np.meshgrid(grid, grid, indexing="ij"), axis=-1)
    M = math.pi**2 * sl(pts.reshape(-1, 2)).reshape(len(grid), len(grid))
    best = 0.0
    for i in range(len(grid)):
        u = M[i][None, :] + M
        v = M[i][None, :] - M
        hi = u.max(axis=1) + v.max(axis=1)
        lo = u.min(axis=1) + v.min(axis=1)
        best = max(best, hi.max(), -lo.min())
    return best


def test_optimizer_against_brute_force_grid():
    brute = brute_force_lg1()
    rep = bell_optimize(LG(1), seed=0, starts=16)
    assert rep.abs_bi <= brute + 1e-3
    assert rep.abs_bi >= brute - 1e-3
    assert rep.abs_bi == pytest.approx(2 * 1.11934, abs=1e-4)


def test_report_invariants():
    rep = bell_optimize(Noon(1), seed=3, starts=8)
    assert rep.abs_bi == abs(rep.bi) <= 4
    assert rep.violation == (rep.abs_bi > 2)
    assert rep.starts == 8 and rep.evaluations > 0 and rep.seed == 3
    d = rep.to_dict()
    assert d["optimizer"] == {"starts": 8, "evaluations": rep.evaluations, "seed": 3}


def test_same_seed_same_report():
    a = bell_optimize(PhotonSubtracted(0.8), seed=11, starts=6)
    b = bell_optimize(PhotonSubtracted(0.8), seed=11, starts=6)
    assert a == b
    assert a.to_dict() == b.to_dict()


def test_parallel_matches_serial():
    a = bell_optimize(LG(2), seed=5, starts=4)
    b = bell_optimize(LG(2), seed=5, starts=4, n_jobs=2)
    assert a == b


def test_product_state_is_not_a_violation():
    rep = bell_optimize(LG(0), seed=0, starts=4)
    assert rep.abs_bi == pytest.approx(2.0, abs=1e-9)
    assert not rep.violation


@pytest.mark.parametrize("N", [2, 3])
def test_larger_noon_no_violation_found(N):
    assert not bell_optimize(Noon(N), seed=0, starts=16).violation


def test_free_r_requires_squeezing():
    with pytest.raises(ValueError):
        bell_optimize(LG(1), free_r=True)


def test_complex_search_at_least_real():
    real = bell_optimize(Noon(1), seed=0, starts=8)
    cplx = bell_optimize(Noon(1), seed=0, starts=8, complex_search=True)
    assert cplx.abs_bi >= real.abs_bi - 1e-6


def test_trace_csv(tmp_path):
    rep = bell_optimize(TMSV(0.5), seed=0, starts=2, trace=True)
    assert rep.trace
    write_trace(rep, tmp_path / "trace.csv")
    rows = list(csv.reader(open(tmp_path / "trace.csv")))
    assert rows[0][:2] == ["iteration", "bi"]
    assert len(rows) == len(rep.trace) + 1
    assert abs(float(rows[-1][1])) == pytest.approx(rep.abs_bi, abs=1e-6)
