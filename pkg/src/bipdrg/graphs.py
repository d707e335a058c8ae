"""Concrete graphs: construction, edge-list I/O and distance-regularity checks."""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np

from .arrays import IntersectionArray, intersection_tensor
from .errors import InvalidArray, NotBipartite, NotDistanceRegular

FULL_TENSOR_CHECK_MAX_N = 300


@dataclass
class GraphInstance:
    name: str
    adjacency: np.ndarray
    _dist: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    @property
    def num_edges(self) -> int:
        return int(self.adjacency.sum()) // 2

    def distances(self) -> np.ndarray:
        """All-pairs distances by frontier expansion; -1 marks unreachable pairs."""
        if self._dist is None:
            n = self.n
            A = self.adjacency.astype(np.float64)
            dist = np.full((n, n), -1, dtype=np.int64)
            np.fill_diagonal(dist, 0)
            frontier = np.eye(n)
            reached = np.eye(n, dtype=bool)
            step = 0
            while True:
                step += 1
                nxt = (frontier @ A > 0) & ~reached
                if not nxt.any():
                    break
                dist[nxt] = step
                reached |= nxt
                frontier = nxt.astype(np.float64)
            self._dist = dist
        return self._dist


def _from_edges(name: str, n: int, edges) -> GraphInstance:
    adj = np.zeros((n, n), dtype=np.int8)
    for u, v in edges:
        if u == v:
            raise InvalidArray(f"loop at vertex {u}")
        adj[u, v] = adj[v, u] = 1
    return GraphInstance(name, adj)


def build_hypercube(D: int) -> GraphInstance:
    if not 4 <= D <= 10:
        raise InvalidArray(f"hypercube dimension must be in 4..10, got {D}")
    n = 1 << D
    edges = [(u, u ^ (1 << i)) for u in range(n) for i in range(D) if u < u ^ (1 << i)]
    return _from_edges(f"Q_{D}", n, edges)


def build_doubled_odd(kk: int) -> GraphInstance:
    """Bipartite double of the Odd graph: (kk-1)- and kk-subsets of a (2kk-1)-set, by inclusion."""
    if kk not in (3, 4):
        raise InvalidArray(f"doubled Odd graph parameter must be 3 or 4, got {kk}")
    ground = range(2 * kk - 1)
    small = [frozenset(s) for s in combinations(ground, kk - 1)]
    big = [frozenset(s) for s in combinations(ground, kk)]
    index = {s: i for i, s in enumerate(small)}
    off = len(small)
    edges = [(index[b - {x}], off + j) for j, b in enumerate(big) for x in b]
    return _from_edges(f"2.O_{kk}", off + len(big), edges)


def build_folded_cube(n: int) -> GraphInstance:
    """The n-cube with antipodal vertices identified; bipartite for even n."""
    if n % 2 or not 8 <= n <= 12:
        raise InvalidArray(f"folded cube parameter must be even and in 8..12, got {n}")
    N = 1 << (n - 1)
    flips = [1 << i for i in range(n - 1)] + [N - 1]
    edges = {(min(u, u ^ f), max(u, u ^ f)) for u in range(N) for f in flips}
    return _from_edges(f"folded_{n}", N, sorted(edges))


def build_hadamard(H: np.ndarray, name: str = "hadamard") -> GraphInstance:
    """Vertices (r_i, s), (c_j, t) with s, t = +-1; (r_i, s) ~ (c_j, t) iff H_ij = s t."""
    m = H.shape[0]
    idx = {}
    for side in ("r", "c"):
        for i in range(m):
            for s in (1, -1):
                idx[(side, i, s)] = len(idx)
    edges = [(idx[("r", i, s)], idx[("c", j, s * int(H[i, j]))])
             for i in range(m) for j in range(m) for s in (1, -1)]
    return _from_edges(name, len(idx), edges)


def sylvester_hadamard(order: int) -> np.ndarray:
    H = np.array([[1]])
    while H.shape[0] < order:
        H = np.block([[H, H], [H, -H]])
    if H.shape[0] != order:
        raise InvalidArray(f"Sylvester matrices have power-of-two order, got {order}")
    return H


def read_edgelist(path, name: Optional[str] = None) -> GraphInstance:
    """One "u v" pair per line, 0-indexed; '#' starts a comment."""
    edges: List[Tuple[int, int]] = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise InvalidArray(f"{path}:{lineno}: expected 'u v', got {line!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise InvalidArray(f"{path}:{lineno}: vertex labels must be integers") from None
        if u < 0 or v < 0:
            raise InvalidArray(f"{path}:{lineno}: negative vertex label")
        edges.append((u, v))
    if not edges:
        raise InvalidArray(f"{path}: no edges")
    n = 1 + max(max(e) for e in edges)
    return _from_edges(name or Path(path).stem, n, edges)


def write_edgelist(g: GraphInstance, path) -> None:
    rows, cols = np.nonzero(np.triu(g.adjacency))
    lines = [f"# {g.name}: {g.n} vertices, {len(rows)} edges"]
    lines += [f"{u} {v}" for u, v in zip(rows, cols)]
    Path(path).write_text("\n".join(lines) + "\n")


def distance_matrices(g: GraphInstance) -> List[np.ndarray]:
    dist = g.distances()
    D = int(dist.max())
    return [(dist == i).astype(np.float64) for i in range(D + 1)]


def verify_drg(g: GraphInstance) -> IntersectionArray:
    """Read off (b, c) from the graph, checking they do not depend on the pair.

    Raises NotBipartite for an odd cycle and NotDistanceRegular (with a
    witness (x, y, h)) when some count differs between two pairs at distance h.
    """
    dist = g.distances()
    if (dist < 0).any():
        x, y = map(int, np.argwhere(dist < 0)[0])
        raise NotDistanceRegular("graph is disconnected", (x, y, None))
    A = g.adjacency.astype(np.float64)
    rows, cols = np.nonzero(np.triu(g.adjacency))
    same = (dist[0, rows] % 2) == (dist[0, cols] % 2)
    if same.any():
        u, v = int(rows[same][0]), int(cols[same][0])
        raise NotBipartite(f"edge {u}-{v} closes an odd cycle", (u, v))
    Ai = distance_matrices(g)
    D = len(Ai) - 1
    b, c = [], []
    for h in range(D + 1):
        mask = dist == h
        # (A A_j)[x, y] counts neighbours of y at distance j from x
        for j, store in ((h - 1, c), (h + 1, b)):
            if not 0 <= j <= D:
                continue
            counts = (Ai[j] @ A)[mask]
            if counts.min() != counts.max():
                x, y = map(int, np.argwhere(mask)[int(np.argmax(counts != counts[0]))])
                raise NotDistanceRegular(
                    f"pairs at distance {h} disagree on the number of neighbours at distance {j}",
                    (x, y, h),
                )
            store.append(int(counts[0]))
    arr = IntersectionArray(D, tuple(b), tuple(c), g.name)
    if g.n <= FULL_TENSOR_CHECK_MAX_N:
        _check_tensor(Ai, dist, arr)
    return arr


def _check_tensor(Ai, dist, arr: IntersectionArray) -> None:
    """Every p^h_{ij} is constant over pairs at distance h and matches the array."""
    p = intersection_tensor(arr)
    D = arr.D
    masks = [dist == h for h in range(D + 1)]
    for i in range(D + 1):
        for j in range(i, D + 1):
            prod_ = Ai[i] @ Ai[j]
            for h in range(D + 1):
                vals = prod_[masks[h]]
                if vals.min() != vals.max() or vals[0] != p[h][i][j]:
                    x, y = map(int, np.argwhere(masks[h])[0])
                    raise NotDistanceRegular(
                        f"p^{h}_{i}{j} is not constant or disagrees with the array", (x, y, h)
                    )


def petersen() -> GraphInstance:
    outer = [(i, (i + 1) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    return _from_edges("petersen", 10, outer + spokes + inner)
