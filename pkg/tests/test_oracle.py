import dataclasses
from fractions import Fraction as F

import numpy as np
import pytest

from bipdrg.errors import AuditFailure, BlueprintMismatch, ProjectorResidual
from bipdrg.graphs import build_hypercube
from bipdrg.modules import classify_eta, tilde_bounds
from bipdrg.oracle import (
    AUDIT_BOUND,
    AUDIT_EQUIV,
    AUDIT_ISO,
    OPERATOR_TOL,
    blueprint_for,
    decompose,
    local_bounds_residual,
    local_spectrum,
    multiplicity_audit,
    operator_residuals,
    operator_set,
    u_eigenvector_checks,
    verify_blueprint,
)

from conftest import GRAPHS, oracle

# frozen from the oracle; the Q_6 local spectrum is {8, 2 (x5), -2 (x9)}
EXPECTED_COUNTS = {
    "Q_4": {"endpoint0": 1, "endpoint1": 3, "endpoint2-caseI": 2},
    "Q_5": {"endpoint0": 1, "endpoint1": 4, "endpoint2-caseI": 5},
    "Q_6": {"endpoint0": 1, "endpoint1": 5, "endpoint2-caseI": 9, "endpoint3": 5},
    "2.O_3": {"endpoint0": 1, "endpoint1": 2, "endpoint2-caseI": 2, "endpoint2-caseII": 1},
    "2.O_4": {"endpoint0": 1, "endpoint1": 3, "endpoint2-caseI": 6, "endpoint2-caseII": 2,
              "endpoint3": 6},
    "folded_8": {"endpoint0": 1, "endpoint1": 7, "endpoint2-caseIV": 20, "endpoint3": 28,
                 "endpoint4": 14},
}
EXPECTED_MULT = {
    "Q_4": {F(-2): 2},
    "Q_5": {F(-2): 5},
    "Q_6": {F(-2): 9},
    "2.O_3": {F(-2): 2, F(1): 1},
    "2.O_4": {F(-2): 6, F(2): 2},
    "folded_8": {F(-2): 20},
}


@pytest.fixture(params=sorted(GRAPHS))
def graph_name(request):
    return request.param


def test_operator_invariants(graph_name):
    g, ops, _ = oracle(graph_name)
    res = operator_residuals(ops)
    assert max(res.values()) < OPERATOR_TOL, res


def test_q4_operators():
    _, ops, _ = oracle("Q_4")
    assert int(ops.estar_mask(2).sum()) == 6
    assert np.linalg.matrix_rank(ops.Estar(2)) == 6
    xh = ops.xhat()
    for i, m in enumerate(ops.spec.m):
        assert abs(float(np.linalg.norm(ops.E_apply(i, xh)) ** 2) - float(m) / 16) < 1e-12
    assert np.allclose(sum(ops.E(i) for i in range(5)), np.eye(16))


def test_wrong_array_rejected():
    from bipdrg.arrays import hypercube_array
    g = build_hypercube(5)
    with pytest.raises(ProjectorResidual, match="not in the predicted spectrum"):
        operator_set(g, 0, arr=hypercube_array(4))
    with pytest.raises(IndexError):
        operator_set(g, 99)


def test_projector_residual_raised():
    g = build_hypercube(4)
    with pytest.raises(ProjectorResidual):
        operator_set(g, 0, tol=-1.0)


def test_local_spectra():
    _, _, dec = oracle("Q_4")
    assert dec.local.eta == (4, 0, 0, 0, -2, -2)
    _, ops, dec = oracle("Q_6")
    eta = dec.local.eta
    assert eta[0] == 8
    assert eta.count(2) == 5 and eta.count(-2) == 9 and len(eta) == 15


def test_local_eigenvalues_in_range(graph_name):
    _, ops, dec = oracle(graph_name)
    assert local_bounds_residual(ops, dec.local) <= 1e-9
    t1, td = tilde_bounds(ops.arr, ops.spec)
    assert all(t1 <= e <= td for e in dec.local.tail)


def test_decomposition_counts(graph_name):
    g, ops, dec = oracle(graph_name)
    assert dec.counts() == EXPECTED_COUNTS[graph_name]
    assert sum(m.dimension for m in dec.modules) == g.n
    assert dec.residual < 1e-10
    assert dec.mult == EXPECTED_MULT[graph_name]
    assert dec.mu == EXPECTED_MULT[graph_name]


def test_modules_mutually_orthogonal():
    _, _, dec = oracle("2.O_3")
    B = np.hstack([m.basis for m in dec.modules])
    assert np.allclose(B.T @ B, np.eye(B.shape[1]), atol=1e-10)


def test_every_thin_module_matches_its_blueprint(graph_name):
    _, ops, dec = oracle(graph_name)
    checked = 0
    for rec in dec.modules:
        bp = blueprint_for(rec, ops.arr, ops.spec)
        if bp is None:
            continue
        rep = verify_blueprint(ops, rec, bp)
        assert rep.ok, rep.failures()
        checked += 1
    assert checked == sum(1 for m in dec.modules if m.endpoint <= 2)


def test_case_classification_agrees(graph_name):
    _, ops, dec = oracle(graph_name)
    for rec in dec.modules:
        if rec.endpoint == 2:
            assert rec.case.tag == classify_eta(rec.eta, ops.arr, ops.spec).tag


def test_audit(graph_name):
    _, ops, dec = oracle(graph_name)
    rep = multiplicity_audit(dec, ops)
    assert rep.checks == {AUDIT_BOUND: True, AUDIT_EQUIV: True, AUDIT_ISO: True}
    assert rep.all_equal and rep.all_endpoint2_thin


def test_u_eigenvectors(graph_name):
    _, ops, dec = oracle(graph_name)
    rep = u_eigenvector_checks(ops, dec)
    assert rep.rows and rep.ok


def test_seed_determinism():
    g = GRAPHS["Q_6"]()
    ops = operator_set(g, 0)
    a = decompose(g, 0, 7, ops).to_json()
    b = decompose(g, 0, 7, ops).to_json()
    assert a == b
    c = decompose(g, 0, 8, ops)
    assert c.counts() == EXPECTED_COUNTS["Q_6"]


def test_base_vertex_does_not_matter():
    g = GRAPHS["2.O_3"]()
    dec = decompose(g, 13)
    assert dec.counts() == EXPECTED_COUNTS["2.O_3"]


def test_tampered_blueprint_detected():
    _, ops, dec = oracle("Q_4")
    rec = next(m for m in dec.modules if m.endpoint == 1)
    bp = blueprint_for(rec, ops.arr, ops.spec)
    bad = dataclasses.replace(bp, basis_Astar_norms=(1, 3, 1))
    with pytest.raises(BlueprintMismatch) as exc:
        verify_blueprint(ops, rec, bad)
    assert "E*A_i" in exc.value.clause
    bad = dataclasses.replace(bp, transition=((1, 1, 1), (2, 0, -2), (1, 1, 1)))
    rep = verify_blueprint(ops, rec, bad, raise_on_failure=False)
    assert rep.failures() == ["(d) transition coefficients"]


def test_tampered_decomposition_detected():
    _, ops, dec = oracle("Q_4")
    mods = [dataclasses.replace(m) for m in dec.modules]
    victim = next(m for m in mods if m.endpoint == 2)
    victim.eta = F(-1)
    fake = dataclasses.replace(dec, modules=mods)
    with pytest.raises(AuditFailure) as exc:
        multiplicity_audit(fake, ops)
    assert exc.value.theorem == AUDIT_BOUND


def test_local_spectrum_direct():
    g = build_hypercube(5)
    ls = local_spectrum(operator_set(g, 0))
    assert ls.eta[0] == ls.p22 == 6
    assert ls.tail == (-2,) * 5


def test_hadamard_fixture_is_case_one():
    from bipdrg.graphs import read_edgelist
    from conftest import DATA
    g = read_edgelist(DATA / "hadamard8.txt")
    ops = operator_set(g, 0)
    dec = decompose(g, 0, 42, ops)
    assert {m.case_tag for m in dec.modules if m.endpoint == 2} == {"I"}
    assert multiplicity_audit(dec, ops).ok
    for rec in dec.modules:
        bp = blueprint_for(rec, ops.arr, ops.spec)
        if bp is not None:
            assert verify_blueprint(ops, rec, bp).ok
