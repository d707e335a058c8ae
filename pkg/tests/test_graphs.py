import numpy as np
import pytest

from bipdrg.arrays import SUITE_ARRAYS, hypercube_array, num_vertices
from bipdrg.errors import InvalidArray, NotBipartite, NotDistanceRegular
from bipdrg.graphs import (
    GraphInstance,
    build_doubled_odd,
    build_folded_cube,
    build_hadamard,
    build_hypercube,
    petersen,
    read_edgelist,
    sylvester_hadamard,
    verify_drg,
    write_edgelist,
)

from conftest import DATA


def path_graph(n):
    adj = np.zeros((n, n), dtype=np.int8)
    for i in range(n - 1):
        adj[i, i + 1] = adj[i + 1, i] = 1
    return GraphInstance(f"P_{n}", adj)


@pytest.mark.parametrize("D", [4, 5, 6])
def test_hypercube(D):
    g = build_hypercube(D)
    assert g.n == 2 ** D and g.num_edges == D * 2 ** (D - 1)
    arr = verify_drg(g)
    assert (arr.b, arr.c) == (hypercube_array(D).b, hypercube_array(D).c)


def test_doubled_odd():
    g = build_doubled_odd(3)
    assert g.n == 20 and g.num_edges == 30
    arr = verify_drg(g)
    assert arr.D == 5
    assert (arr.b, arr.c) == (SUITE_ARRAYS["2.O_3"].b, SUITE_ARRAYS["2.O_3"].c)
    g4 = build_doubled_odd(4)
    assert g4.n == 70 and verify_drg(g4).D == 7


def test_folded_cube():
    g = build_folded_cube(8)
    assert g.n == 128
    arr = verify_drg(g)
    assert arr.b == (8, 7, 6, 5) and arr.c == (1, 2, 3, 8)


def test_hadamard():
    g = build_hadamard(sylvester_hadamard(8), "had8")
    assert g.n == 32
    arr = verify_drg(g)
    assert arr.b == (8, 7, 4, 1) and arr.c == (1, 4, 7, 8)
    assert num_vertices(arr) == 32


def test_builder_ranges():
    for bad in (lambda: build_hypercube(3), lambda: build_doubled_odd(5),
                lambda: build_folded_cube(9), lambda: sylvester_hadamard(12)):
        with pytest.raises(InvalidArray):
            bad()


def test_path_is_not_distance_regular():
    with pytest.raises(NotDistanceRegular) as exc:
        verify_drg(path_graph(5))
    x, y, h = exc.value.witness
    assert 0 <= x < 5 and 0 <= y < 5


def test_disconnected():
    adj = np.zeros((4, 4), dtype=np.int8)
    adj[0, 1] = adj[1, 0] = adj[2, 3] = adj[3, 2] = 1
    with pytest.raises(NotDistanceRegular):
        verify_drg(GraphInstance("2K2", adj))


def test_petersen_is_not_bipartite():
    with pytest.raises(NotBipartite):
        verify_drg(petersen())
    with pytest.raises(NotBipartite):
        verify_drg(read_edgelist(DATA / "petersen.txt"))


def test_edgelist_roundtrip(tmp_path):
    g = build_hypercube(4)
    path = tmp_path / "q4.txt"
    write_edgelist(g, path)
    h = read_edgelist(path)
    assert np.array_equal(g.adjacency, h.adjacency)
    assert h.name == "q4"


def test_fixture_hadamard():
    g = read_edgelist(DATA / "hadamard8.txt")
    assert g.n == 32 and g.num_edges == 128
    assert verify_drg(g).k == 8


@pytest.mark.parametrize("text", ["0 1 2\n", "0 x\n", "0 -1\n", "# only a comment\n", "3 3\n"])
def test_malformed_edgelist(tmp_path, text):
    path = tmp_path / "bad.txt"
    path.write_text(text)
    with pytest.raises(InvalidArray):
        read_edgelist(path)


def test_distances_q4():
    d = build_hypercube(4).distances()
    assert d[0, 15] == 4 and d[0, 3] == 2
    assert (np.bincount(d[0]) == [1, 4, 6, 4, 1]).all()
