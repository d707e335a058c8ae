"""Intersection arrays of bipartite distance-regular graphs.

An array is stored as ``b = (b_0, ..., b_{D-1})`` and ``c = (c_1, ..., c_D)``.
Bipartiteness forces ``a_i = 0``, so ``a`` is never stored; ``arr.b_(i)`` and
``arr.c_(i)`` extend the sequences with the usual conventions
``c_0 = 0``, ``b_D = 0`` and zero outside ``0..D``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import prod
from pathlib import Path
from typing import List, Optional, Tuple

from .errors import InvalidArray


@dataclass(frozen=True)
class IntersectionArray:
    D: int
    b: Tuple[int, ...]
    c: Tuple[int, ...]
    name: Optional[str] = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "b", tuple(self.b))
        object.__setattr__(self, "c", tuple(self.c))

    @property
    def k(self) -> int:
        return self.b[0]

    @property
    def d(self) -> int:
        return self.D // 2

    def b_(self, i: int) -> int:
        return self.b[i] if 0 <= i < self.D else 0

    def c_(self, i: int) -> int:
        return self.c[i - 1] if 1 <= i <= self.D else 0

    def to_json(self) -> dict:
        out = {"D": self.D, "b": list(self.b), "c": list(self.c)}
        if self.name is not None:
            out["name"] = self.name
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "IntersectionArray":
        try:
            D, b, c = obj["D"], obj["b"], obj["c"]
        except (KeyError, TypeError) as exc:
            raise InvalidArray(f"array JSON needs keys D, b, c: {exc}") from None
        if not isinstance(D, int) or not all(isinstance(x, int) for x in [*b, *c]):
            raise InvalidArray("D, b and c must be integers")
        return cls(D, tuple(b), tuple(c), obj.get("name"))

    @classmethod
    def load(cls, path) -> "IntersectionArray":
        return cls.from_json(json.loads(Path(path).read_text()))

    @cached_property
    def report(self) -> "ValidationReport":
        return validate(self)

    def require_valid(self) -> "IntersectionArray":
        if not self.report.ok:
            raise InvalidArray(f"invalid intersection array: fails {self.report.first_failure!r}")
        return self


def hypercube_array(D: int) -> IntersectionArray:
    return IntersectionArray(D, tuple(D - i for i in range(D)), tuple(range(1, D + 1)), f"Q_{D}")


def doubled_odd_array(kk: int) -> IntersectionArray:
    # 2.O_kk has D = 2kk - 1, with b and c climbing in pairs
    D = 2 * kk - 1
    b = tuple(kk - (i + 1) // 2 for i in range(D))
    c = tuple((i + 1) // 2 for i in range(1, D + 1))
    return IntersectionArray(D, b, c, f"2.O_{kk}")


@dataclass
class ValidationReport:
    checks: List[Tuple[str, bool]]

    @property
    def ok(self) -> bool:
        return all(passed for _, passed in self.checks)

    @property
    def first_failure(self) -> Optional[str]:
        for name, passed in self.checks:
            if not passed:
                return name
        return None


def validate(arr: IntersectionArray) -> ValidationReport:
    """Check the standing assumptions and the bipartite feasibility filters.

    Checks stop at the first structural failure (wrong lengths) since later
    checks would index out of range.
    """
    checks: List[Tuple[str, bool]] = []
    D = arr.D
    checks.append(("D ≥ 4", isinstance(D, int) and D >= 4))
    shape_ok = len(arr.b) == D and len(arr.c) == D
    checks.append(("len(b) = len(c) = D", shape_ok))
    if not shape_ok or D < 1:
        return ValidationReport(checks)
    k = arr.b[0]
    checks.append(("k ≥ 3", k >= 3))
    checks.append(("c_1 = 1", arr.c[0] == 1))
    for i in range(D):
        checks.append((f"b_{i} > 0", arr.b[i] > 0))
    for i in range(1, D + 1):
        checks.append((f"c_{i} > 0", arr.c_(i) > 0))
    for i in range(D + 1):
        checks.append((f"c_{i}+b_{i} = k", arr.c_(i) + arr.b_(i) == k))
    for i in range(1, D):
        checks.append((f"c_{i} ≤ c_{i + 1}", arr.c_(i) <= arr.c_(i + 1)))
    for i in range(D - 1):
        checks.append((f"b_{i} ≥ b_{i + 1}", arr.b_(i) >= arr.b_(i + 1)))
    return ValidationReport(checks)


def valencies(arr: IntersectionArray) -> Tuple[Fraction, ...]:
    """k_i = b_0 ... b_{i-1} / (c_1 ... c_i), exact."""
    return tuple(
        Fraction(prod(arr.b[:i]), prod(arr.c[:i])) for i in range(arr.D + 1)
    )


def num_vertices(arr: IntersectionArray) -> Fraction:
    return sum(valencies(arr))


def intersection_matrix(arr: IntersectionArray) -> List[List[int]]:
    """Tridiagonal matrix B of A acting on the basis A_0, ..., A_D.

    Column i holds the coordinates of A A_i = b_{i-1} A_{i-1} + c_{i+1} A_{i+1}.
    """
    n = arr.D + 1
    B = [[0] * n for _ in range(n)]
    for i in range(n):
        if i > 0:
            B[i - 1][i] = arr.b_(i - 1)
        if i < arr.D:
            B[i + 1][i] = arr.c_(i + 1)
    return B


def intersection_tensor(arr: IntersectionArray) -> List[List[List[Fraction]]]:
    """All p^h_{ij}, indexed ``p[h][i][j]``.

    A_i A_j corresponds to f_i(B) e_j in the A_h basis, and f_i(B) e_j is
    built with the same three-term recurrence that defines f_i.
    """
    D = arr.D
    B = intersection_matrix(arr)

    def apply_B(vec):
        return [sum(B[r][s] * vec[s] for s in range(D + 1)) for r in range(D + 1)]

    # cols[i][j] = f_i(B) e_j
    cols: List[List[List[Fraction]]] = []
    for j in range(D + 1):
        e_j = [Fraction(int(r == j)) for r in range(D + 1)]
        prev, cur = [Fraction(0)] * (D + 1), e_j
        seq = [cur]
        for i in range(D):
            Bcur = apply_B(cur)
            nxt = [(Bcur[r] - arr.b_(i - 1) * prev[r]) / arr.c_(i + 1) for r in range(D + 1)]
            seq.append(nxt)
            prev, cur = cur, nxt
        cols.append(seq)
    return [
        [[cols[j][i][h] for j in range(D + 1)] for i in range(D + 1)]
        for h in range(D + 1)
    ]


def p22_2(arr: IntersectionArray) -> Fraction:
    return intersection_tensor(arr)[2][2][2]


SUITE_ARRAYS: dict = {
    "Q_4": hypercube_array(4),
    "Q_5": hypercube_array(5),
    "Q_6": hypercube_array(6),
    "Q_8": hypercube_array(8),
    "2.O_3": doubled_odd_array(3),
}

