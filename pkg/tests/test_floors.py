import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from entfloor.errors import InfeasibleError
from entfloor.floors import (
    CONJECTURED,
    EXACT,
    REGION_I,
    REGION_IIA,
    REGION_IIB,
    REGION_S,
    classify_purity_czz,
    floor_local_stats,
    floor_mutual_info,
    floor_purity_czz,
    floor_xx_yy_zz,
    floor_xx_zz,
    golden_max,
    local_stats_feasible,
)
from entfloor.qstate import (
    SampleFamily,
    check_density,
    connected_czz,
    log_negativity,
    purity,
    purity_P,
    sample_batch,
)
from oracles import log_negativity_oracle, reduced_first, trace_expectation, von_neumann

unit = st.floats(-1, 1, allow_nan=False)


def assert_witness(res, words, targets, tol=1e-9):
    rho = check_density(res.witness)
    for w, t in zip(words, targets):
        assert trace_expectation(rho, w) == pytest.approx(t, abs=tol), w
    if res.status == EXACT:
        assert log_negativity_oracle(rho) == pytest.approx(res.value, abs=tol)


# --- <xx>, <zz> -----------------------------------------------------------------


def test_xx_zz_examples():
    assert floor_xx_zz(1, 1).value == 1.0
    assert floor_xx_zz(0.4, 0.5).value == 0.0
    assert floor_xx_zz(-0.7, 0.6).value == pytest.approx(math.log2(1.3), abs=1e-12)
    assert floor_xx_zz(-0.7, 0.6).value == pytest.approx(0.378512, abs=1e-6)


@given(unit, unit)
def test_xx_zz_witness(cxx, czz):
    res = floor_xx_zz(cxx, czz)
    assert res.status == EXACT
    assert res.value == pytest.approx(max(0.0, math.log2(max(abs(cxx) + abs(czz), 1e-300))), abs=1e-12)
    assert_witness(res, ["xx", "zz"], [cxx, czz])


@given(unit, unit, st.floats(0, 1))
def test_xx_zz_monotone(cxx, czz, grow):
    base = floor_xx_zz(cxx, czz).value
    bigger_x = math.copysign(abs(cxx) + grow * (1 - abs(cxx)), cxx)
    bigger_z = math.copysign(abs(czz) + grow * (1 - abs(czz)), czz)
    assert floor_xx_zz(bigger_x, czz).value >= base
    assert floor_xx_zz(cxx, bigger_z).value >= base


def test_xx_zz_rejects_out_of_range():
    with pytest.raises(InfeasibleError):
        floor_xx_zz(1.2, 0)
    with pytest.raises(InfeasibleError):
        floor_xx_zz(0, float("nan"))


# --- <xx>, <yy>, <zz> -----------------------------------------------------------


def test_xx_yy_zz_examples():
    assert floor_xx_yy_zz(-1, -1, -1).value == 1.0
    assert floor_xx_yy_zz(0, 0, 0).value == 0.0
    # (0.5, 0.5, 0.5) admits no state; the sign pattern (+, -, +) does
    assert floor_xx_yy_zz(0.5, -0.5, 0.5).value == pytest.approx(math.log2(1.25), abs=1e-12)


def test_xx_yy_zz_infeasible():
    with pytest.raises(InfeasibleError):
        floor_xx_yy_zz(0.5, 0.5, 0.5)
    with pytest.raises(InfeasibleError):
        floor_xx_yy_zz(1, 1, 1)


def feasible_triples():
    # correlation triples of Bell-diagonal states: the tetrahedron spanned by the four Bell states
    corners = np.array([[1, -1, 1], [-1, 1, 1], [1, 1, -1], [-1, -1, -1]], float)
    return st.lists(st.floats(0, 1), min_size=4, max_size=4).filter(lambda w: sum(w) > 1e-6).map(
        lambda w: tuple(np.array(w) @ corners / sum(w))
    )


@given(feasible_triples())
def test_xx_yy_zz_witness(triple):
    res = floor_xx_yy_zz(*triple)
    expected = max(0.0, math.log2((1 + sum(abs(c) for c in triple)) / 2))
    assert res.value == pytest.approx(expected, abs=1e-12)
    assert_witness(res, ["xx", "yy", "zz"], triple)


@given(feasible_triples(), st.integers(0, 2), st.floats(0, 1))
def test_xx_yy_zz_monotone(triple, axis, shrink):
    smaller = list(triple)
    smaller[axis] *= shrink
    try:
        low = floor_xx_yy_zz(*smaller).value
    except InfeasibleError:
        # one axis alone can leave the Bell tetrahedron
        assume(False)
    assert low <= floor_xx_yy_zz(*triple).value + 1e-15


# --- purity and connected zz ------------------------------------------------------


def test_classify_examples():
    assert classify_purity_czz(0.2, 1.0) == REGION_I
    assert classify_purity_czz(1 / 3, 1.0) == REGION_S
    assert classify_purity_czz(1.0, 1.0) == REGION_IIB
    assert classify_purity_czz(0.5, 0.2) == REGION_S
    assert classify_purity_czz(7 / 15, 1.0) == REGION_IIA
    assert classify_purity_czz(0.5, -0.2) == REGION_S


def test_boundary_witness_realises_region_s_corner():
    rho = np.diag([0.5, 0, 0, 0.5])
    assert purity_P(rho) == pytest.approx(1 / 3)
    assert connected_czz(rho) == pytest.approx(1.0)


def test_classify_rejects_out_of_range():
    with pytest.raises(ValueError):
        classify_purity_czz(1.5, 0)
    with pytest.raises(ValueError):
        classify_purity_czz(0.5, -2)


def test_purity_czz_examples():
    res = floor_purity_czz(1, 1)
    assert res.value == pytest.approx(1.0, abs=1e-12)
    assert res.status == CONJECTURED
    assert res.lower_bound == pytest.approx(math.log2(1.5), abs=1e-12)
    assert res.lower_bound == pytest.approx(0.584963, abs=1e-6)

    res = floor_purity_czz(0.5, 0.2)
    assert (res.value, res.region, res.status) == (0.0, REGION_S, EXACT)

    res = floor_purity_czz(7 / 15, 1.0)
    assert res.region == REGION_IIA
    assert res.value == pytest.approx(math.log2(1 + math.sqrt(0.2)), abs=1e-12)

    with pytest.raises(InfeasibleError) as exc:
        floor_purity_czz(0.2, 1.0)
    assert exc.value.region == REGION_I


@given(st.floats(0, 1), unit)
def test_purity_czz_consistency(P, czz):
    region = classify_purity_czz(P, czz)
    c = abs(czz)
    assert (region == REGION_I) == (P < c * c / 3 - 1e-12)
    assume(region != REGION_I)
    res = floor_purity_czz(P, czz)
    assert res.region == region
    assert res.value >= 0
    # the conjectured value can never fall below the proven bound
    assert res.value >= res.lower_bound - 1e-12
    if region == REGION_S:
        assert res.value == 0.0
    assert floor_purity_czz(P, -czz).value == res.value


@given(st.floats(0, 1))
def test_purity_czz_continuous_at_separable_edge(c):
    P = 1 - 2 * c / 3
    assume(P >= c * c / 3)
    assert floor_purity_czz(min(1.0, P + 1e-12), c).value <= 1e-5


# --- mutual information ------------------------------------------------------------


def test_mutual_info_examples():
    assert floor_mutual_info(2, 0).value == 1.0
    assert floor_mutual_info(1, 1).value == 0.0
    res = floor_mutual_info(1.5, 0.5)
    assert res.value == 0.5
    rho = check_density(res.witness)
    ra = reduced_first(rho)
    assert von_neumann(ra) - von_neumann(rho) == pytest.approx(0.5, abs=1e-9)


def test_mutual_info_rejects_outside_triangle():
    for bad in [(1.5, 1.0), (-0.1, 0.5), (0.5, -0.1)]:
        with pytest.raises(InfeasibleError):
            floor_mutual_info(*bad)


@given(st.floats(0, 2), st.floats(0, 2))
def test_mutual_info_witness(I, S):
    assume(I + S <= 2)
    res = floor_mutual_info(I, S)
    assert res.value == pytest.approx(max(0.0, (I - S) / 2), abs=1e-12)
    rho = check_density(res.witness)
    sa = von_neumann(reduced_first(rho))
    s_ab = von_neumann(rho)
    sb = von_neumann(np.einsum("iaib->ab", rho.reshape(2, 2, 2, 2)))
    assert s_ab == pytest.approx(S, abs=1e-9)
    assert sa + sb - s_ab == pytest.approx(I, abs=1e-9)
    if res.value > 0:
        assert sa - s_ab == pytest.approx(res.value, abs=1e-9)


# --- local statistics --------------------------------------------------------------


def test_local_feasibility_examples():
    assert local_stats_feasible(0.9, 0.2, 0.3, 0.2)
    assert not local_stats_feasible(0.95, 0.2, 0.3, 0.2)
    assert local_stats_feasible(0, 0, 0, 0)


def test_local_stats_examples():
    lam = (0.1 - math.sqrt(0.17)) / 4
    res = floor_local_stats(0.9, 0.2, 0.3, 0.2)
    assert res.details["e"] == 0.0
    assert res.value == pytest.approx(math.log2(1 - 2 * lam), abs=1e-12)
    assert res.value == pytest.approx(math.log2(1.156156), abs=1e-5)
    assert floor_local_stats(0.9, 0.2, 0, 0).value == pytest.approx(math.log2(1.1), abs=1e-12)
    assert floor_local_stats(0.9, 0.2, 0, 0).value == pytest.approx(floor_xx_zz(0.2, 0.9).value, abs=1e-12)
    assert floor_local_stats(0.9, 0, 0.3, 0.2).value == 0.0
    with pytest.raises(InfeasibleError):
        floor_local_stats(0.95, 0.2, 0.3, 0.2)


def local_grid():
    pts = []
    for czz in np.linspace(-0.9, 0.9, 10):
        for cxx in np.linspace(-1, 1, 10):
            for z1, z2 in [(0, 0), (0.3, 0.2), (-0.4, 0.1), (0.5, 0.5), (0.1, -0.6),
                           (0.2, 0.2), (-0.3, -0.3), (0.05, 0.4), (0.6, 0.0), (-0.2, 0.25)]:
                pts.append((czz, cxx, z1, z2))
    return pts


def test_local_stats_dominates_and_witnesses():
    checked = 0
    for czz, cxx, z1, z2 in local_grid():
        if not local_stats_feasible(czz, cxx, z1, z2):
            continue
        res = floor_local_stats(czz, cxx, z1, z2)
        assert res.value >= floor_xx_zz(cxx, czz).value - 1e-12
        assert_witness(res, ["zz", "xx", "z1", "1z"], [czz, cxx, z1, z2])
        checked += 1
    assert checked >= 300


@given(unit, unit, unit, unit)
def test_local_stats_matches_coarse_scan(czz, cxx, z1, z2):
    assume(local_stats_feasible(czz, cxx, z1, z2))
    res = floor_local_stats(czz, cxx, z1, z2)
    e_lo, e_hi = res.details["e_range"]
    # brute-force scan of the witness family's log-negativity over e
    a, b, c, d = (np.real(res.witness[i, i]) for i in range(4))
    best = np.inf
    for e in np.linspace(e_lo, e_hi, 201):
        f = abs(cxx) / 2 - e
        rho = np.array([[a, 0, 0, f], [0, b, e, 0], [0, e, c, 0], [f, 0, 0, d]], dtype=complex)
        best = min(best, log_negativity_oracle(rho))
    assert res.value <= best + 1e-12
    assert res.value >= best - 1e-3


def test_golden_max_finds_boundary_and_interior():
    x, f = golden_max(lambda x: -(x - 0.3) ** 2, 0, 1)
    assert x == pytest.approx(0.3, abs=1e-6)
    x, f = golden_max(lambda x: x, 0, 1)
    assert (x, f) == (1, 1)
    with pytest.raises(ValueError):
        golden_max(lambda x: x, 1, 0)


# --- Monte-Carlo properties ------------------------------------------------------------


def test_separability_inequality_on_separable_mixtures():
    rho = sample_batch("separable-mixture", 100_000, seed=101)
    excess = purity(rho) + connected_czz(rho) / 2 - 1
    assert np.count_nonzero(excess > 1e-12) == 0


@pytest.mark.parametrize("kind", SampleFamily.KINDS)
def test_boundary_i_and_lower_bound_on_samples(kind):
    rho = sample_batch(kind, 100_000, seed=202)
    p, c, q = purity_P(rho), connected_czz(rho), purity(rho)
    assert np.count_nonzero(p < c**2 / 3 - 1e-12) == 0
    bound = np.log2(np.maximum(q + c / 2, 1.0))
    assert np.count_nonzero(log_negativity(rho) < bound - 1e-9) == 0
