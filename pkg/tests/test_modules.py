from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bipdrg.arrays import SUITE_ARRAYS, hypercube_array, valencies
from bipdrg.errors import CaseParameterMismatch, OutOfRangeEta
from bipdrg.modules import (
    INF,
    LocalEigenvalueCase,
    blueprint_endpoint0,
    blueprint_endpoint1,
    blueprint_endpoint2,
    classify_eta,
    consistency_residuals,
    is_consistent,
    psi_of,
    sample_case4_etas,
    tilde,
    tilde_bounds,
)
from bipdrg.polyfams import omega_coeffs, theta_parameter

from conftest import suite_spectrum

Q4 = hypercube_array(4)
Q6 = hypercube_array(6)


def fr(xs):
    return [F(x) for x in xs]


def test_tilde_values():
    assert tilde(F(2), Q4) == -2
    assert tilde(F(0), Q4) == 0
    assert tilde(INF, Q4) == -1 and tilde(-INF, Q4) == -1
    assert tilde(F(4), Q6) == -2
    assert tilde(F(0), Q6) == 2 and tilde(F(2), Q6) == INF
    assert tilde_bounds(Q6, suite_spectrum("Q_6")) == (-2, 2)


def test_tilde_is_even_and_float_friendly():
    for z in (F(1, 3), F(5), F(-7, 2)):
        assert tilde(z, Q6) == tilde(-z, Q6)
    assert abs(tilde(0.0, Q6) - 2.0) < 1e-12


def test_classify():
    sp = suite_spectrum("Q_4")
    c = classify_eta(F(-2), Q4, sp)
    assert (c.tag, c.e, c.n, c.psi) == ("I", 2, 1, 4)
    c = classify_eta(F(0), Q4, sp)
    assert (c.tag, c.e, c.n, c.psi) == ("III", 1, None, 0)
    c = classify_eta(F(-1, 2), Q4, sp)
    assert (c.tag, c.e, c.psi) == ("IV", 0, -2)
    c = classify_eta(F(-1), Q6, suite_spectrum("Q_6"))
    assert c.tag == "IV" and c.psi is None and c.eta_is_minus_one
    c = classify_eta(F(1), SUITE_ARRAYS["2.O_3"], suite_spectrum("2.O_3"))
    assert (c.tag, c.n, c.e) == ("II", 2, 2)
    for bad in (F(-3), F(1, 100)):
        with pytest.raises(OutOfRangeEta):
            classify_eta(bad, Q4, sp)


def test_psi_of():
    assert psi_of(F(-2), Q4) == 4
    assert psi_of(F(0), Q4) == 0
    assert psi_of(F(2), Q6) == 0


def test_endpoint0_q4():
    bp = blueprint_endpoint0(Q4, suite_spectrum("Q_4"))
    assert bp.dimension == 5
    assert list(bp.basis_E_norms) == fr([F(1, 16), F(4, 16), F(6, 16), F(4, 16), F(1, 16)])
    assert list(bp.basis_Astar_norms) == [1, 4, 6, 4, 1]
    assert list(bp.transition[2]) == [6, 0, -2, 0, 6]
    assert bp.tridiag[1][0] == 1 and bp.tridiag[0][1] == 4
    assert is_consistent(bp)


def test_endpoint1_q4():
    bp = blueprint_endpoint1(Q4, suite_spectrum("Q_4"))
    assert bp.dimension == 3 and bp.e_indices == (1, 2, 3)
    assert bp.basis_E_norms[0] == F(1, 4)
    assert list(bp.basis_Astar_norms) == [1, 2, 1]
    assert bp.local_eigenvalue == Q4.b_(3) - 1
    assert is_consistent(bp)


def test_endpoint2_case1_q4():
    bp = blueprint_endpoint2(Q4, suite_spectrum("Q_4"), F(-2))
    assert bp.dimension == 1 and bp.e_indices == (2,)
    assert bp.basis_E_norms == (1,) and bp.basis_Astar_norms == (1,)
    assert is_consistent(bp)


def test_endpoint2_case3_q4():
    bp = blueprint_endpoint2(Q4, suite_spectrum("Q_4"), F(0))
    assert bp.dimension == 2 and bp.e_indices == (1, 3)
    assert bp.basis_Astar_norms[0] == 1
    assert [list(r) for r in bp.transition] == [[1, 1], [2, -2]]
    assert bp.estar_dims == (0, 0, 1, 1, 0)
    assert is_consistent(bp)


def test_endpoint2_case2_doubled_odd():
    arr = SUITE_ARRAYS["2.O_3"]
    bp = blueprint_endpoint2(arr, suite_spectrum("2.O_3"), F(1))
    assert bp.case.tag == "II" and bp.dimension == arr.D - 3
    assert bp.e_indices == (1, 4)
    assert is_consistent(bp)


def test_case_mismatch():
    sp = suite_spectrum("Q_4")
    with pytest.raises(CaseParameterMismatch):
        blueprint_endpoint2(Q4, sp, LocalEigenvalueCase(F(-2), "II", F(4), 2, 2))
    with pytest.raises(CaseParameterMismatch):
        blueprint_endpoint2(Q4, sp, LocalEigenvalueCase(F(-2), "I", F(4), 1, 1))
    with pytest.raises(CaseParameterMismatch):
        blueprint_endpoint2(Q4, sp, LocalEigenvalueCase(F(-1), "I", None, 2, 1))
    odd = SUITE_ARRAYS["2.O_3"]
    with pytest.raises(CaseParameterMismatch):
        blueprint_endpoint2(odd, suite_spectrum("2.O_3"), LocalEigenvalueCase(F(1), "III", F(1), 1))


def test_case4_samples_include_minus_one():
    for name in SUITE_ARRAYS:
        pts = sample_case4_etas(SUITE_ARRAYS[name], suite_spectrum(name))
        assert len(pts) == 20 and F(-1) in pts
        t1, td = tilde_bounds(SUITE_ARRAYS[name], suite_spectrum(name))
        assert all(t1 < x < td for x in pts)


def _all_blueprints(name):
    arr, sp = SUITE_ARRAYS[name], suite_spectrum(name)
    bps = [blueprint_endpoint0(arr, sp), blueprint_endpoint1(arr, sp)]
    t1, td = tilde_bounds(arr, sp)
    bps += [blueprint_endpoint2(arr, sp, t1), blueprint_endpoint2(arr, sp, td)]
    bps += [blueprint_endpoint2(arr, sp, x) for x in sample_case4_etas(arr, sp)]
    return arr, bps


def test_suite_blueprints_consistent_and_positive(suite_name):
    arr, bps = _all_blueprints(suite_name)
    for bp in bps:
        assert is_consistent(bp), (bp.endpoint, bp.local_eigenvalue, consistency_residuals(bp))
        assert all(x > 0 for x in bp.basis_E_norms)
        assert all(x > 0 for x in bp.basis_Astar_norms)
        assert sum(bp.e_dims) == bp.dimension == sum(bp.estar_dims)
        assert len(bp.transition) == bp.dimension
        assert bp.endpoint == 0 or bp.basis_Astar_norms[0] == 1
        # subdiagonal of A in the E*A basis is c_1, c_2, ...
        for j in range(bp.dimension - 1):
            assert bp.tridiag[j + 1][j] == arr.c_(j + 1)


def test_case4_superdiagonal_is_omega():
    sp = suite_spectrum("Q_6")
    for x in sample_case4_etas(Q6, sp):
        bp = blueprint_endpoint2(Q6, sp, x)
        if x == -1:
            sup = [Q6.b_(i + 1) for i in range(1, bp.dimension)]
        else:
            sup = list(omega_coeffs(Q6, theta_parameter(psi_of(x, Q6), Q6, sp)))[1:bp.dimension]
        assert [bp.tridiag[j - 1][j] for j in range(1, bp.dimension)] == sup


def test_minus_one_is_limit_of_nearby_eta():
    # the eta = -1 branch should agree with psi -> infinity
    sp = suite_spectrum("Q_6")
    exact = blueprint_endpoint2(Q6, sp, F(-1))
    near = blueprint_endpoint2(Q6, sp, F(-1) + F(1, 10**9))
    for a, b in zip(exact.basis_Astar_norms, near.basis_Astar_norms):
        assert abs(float(a) - float(b)) < 1e-6
    for ra, rb in zip(exact.transition, near.transition):
        assert all(abs(float(a) - float(b)) < 1e-6 for a, b in zip(ra, rb))


def test_even_D_theta_d_tilde():
    for name in ("Q_4", "Q_6", "Q_8"):
        arr, sp = SUITE_ARRAYS[name], suite_spectrum(name)
        assert tilde(sp.theta[arr.d], arr) == arr.b_(3) - 1


def test_float_spectrum_blueprints():
    from bipdrg.arrays import IntersectionArray
    from bipdrg.spectra import spectrum
    arr = IntersectionArray(4, (12, 11, 6, 1), (1, 6, 11, 12))
    sp = spectrum(arr)
    t1, td = tilde_bounds(arr, sp)
    for eta in (t1, td, F(-1), (t1 + td) / 2):
        bp = blueprint_endpoint2(arr, sp, eta)
        assert max(consistency_residuals(bp)) < 1e-9


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(sorted(SUITE_ARRAYS)), st.integers(1, 999))
def test_rational_case4_consistent(name, j):
    arr, sp = SUITE_ARRAYS[name], suite_spectrum(name)
    t1, td = tilde_bounds(arr, sp)
    eta = t1 + (td - t1) * F(j, 1000)
    bp = blueprint_endpoint2(arr, sp, eta)
    assert bp.case.tag == "IV"
    assert is_consistent(bp)
    assert all(x > 0 for x in bp.basis_E_norms + bp.basis_Astar_norms)


def test_to_json_roundtrips_through_strings():
    bp = blueprint_endpoint2(Q4, suite_spectrum("Q_4"), F(-1, 2))
    js = bp.to_json()
    assert js["E_norms"] == ["3/8", "1/4", "3/8"]
    assert js["case"] == {"eta": "-1/2", "case": "IV", "e": 0, "psi": "-2/1"}
    assert valencies(Q4) == (1, 4, 6, 4, 1)
