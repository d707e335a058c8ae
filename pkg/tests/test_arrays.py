import json
from fractions import Fraction

import pytest
from hypothesis import given

from bipdrg.arrays import (
    IntersectionArray,
    doubled_odd_array,
    hypercube_array,
    intersection_matrix,
    intersection_tensor,
    num_vertices,
    p22_2,
    validate,
    valencies,
)
from bipdrg.errors import InvalidArray

from conftest import formal_arrays


def test_hypercube_array():
    arr = hypercube_array(4)
    assert arr.b == (4, 3, 2, 1) and arr.c == (1, 2, 3, 4)
    assert validate(arr).ok


def test_doubled_odd_array():
    arr = doubled_odd_array(3)
    assert arr.D == 5 and arr.b == (3, 2, 2, 1, 1) and arr.c == (1, 1, 2, 2, 3)
    assert num_vertices(arr) == 20


def test_valencies_q4():
    assert valencies(hypercube_array(4)) == (1, 4, 6, 4, 1)
    assert num_vertices(hypercube_array(4)) == 16


def test_validation_names_first_failure():
    bad = IntersectionArray(4, (4, 3, 2, 1), (1, 2, 3, 3))
    rep = validate(bad)
    assert not rep.ok and rep.first_failure == "c_4+b_4 = k"
    with pytest.raises(InvalidArray):
        bad.require_valid()
    assert validate(IntersectionArray(3, (3, 2, 1), (1, 2, 3))).first_failure == "D ≥ 4"
    assert validate(IntersectionArray(4, (4, 3, 2), (1, 2, 3, 4))).first_failure == "len(b) = len(c) = D"
    assert validate(IntersectionArray(4, (4, 3, 3, 1), (1, 1, 1, 4))).first_failure == "c_3+b_3 = k"


def test_monotonicity_filters():
    arr = IntersectionArray(4, (4, 2, 3, 1), (1, 2, 1, 4))
    assert "c_2 ≤ c_3" in [n for n, ok in validate(arr).checks if not ok]


def test_intersection_matrix_columns():
    B = intersection_matrix(hypercube_array(4))
    assert [row[1] for row in B] == [4, 0, 2, 0, 0]


def test_tensor_q4_known_entries():
    p = intersection_tensor(hypercube_array(4))
    assert p[0][2][2] == 6           # p^0_{ii} = k_i
    assert p[2][1][1] == 2           # c_2
    assert p[2][2][2] == 4           # the local graph of Q_4 is 4-regular
    assert p22_2(hypercube_array(4)) == 4


def test_json_round_trip(tmp_path):
    arr = doubled_odd_array(3)
    path = tmp_path / "a.json"
    path.write_text(json.dumps(arr.to_json()))
    assert IntersectionArray.load(path) == arr
    with pytest.raises(InvalidArray):
        IntersectionArray.from_json({"D": 4, "b": [4, 3, 2, 1]})
    with pytest.raises(InvalidArray):
        IntersectionArray.from_json({"D": 4, "b": [4, 3, 2, 1.5], "c": [1, 2, 3, 4]})


@given(formal_arrays())
def test_tensor_symmetric_and_consistent(arr):
    p = intersection_tensor(arr)
    kv = valencies(arr)
    D = arr.D
    for h in range(D + 1):
        for i in range(D + 1):
            for j in range(D + 1):
                assert p[h][i][j] == p[h][j][i]
                # k_h p^h_{ij} = k_i p^i_{hj}
                assert kv[h] * p[h][i][j] == kv[i] * p[i][h][j]
    for h in range(D + 1):
        assert p[h][1][h - 1 if h else 0] == (arr.c_(h) if h else 0) or h == 0
        assert sum(p[h][1][j] for j in range(D + 1)) == arr.k


@given(formal_arrays())
def test_valencies_recurrence(arr):
    kv = valencies(arr)
    for i in range(arr.D):
        assert kv[i + 1] * arr.c_(i + 1) == kv[i] * arr.b_(i)
    assert kv[0] == Fraction(1)
