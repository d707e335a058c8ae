"""Closed-form descriptions of thin irreducible T-modules with endpoint <= 2.

A blueprint records, for a module W and a nonzero v in its lowest
subconstituent, the dimensions of E*_iW and E_iW, the square norms of the two
standard bases (as ratios to ||v||^2), the matrix of A in the E*A-basis, and
the transition coefficients expressing the E*A-basis in the E-basis.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Tuple

from .arrays import IntersectionArray, valencies
from .errors import CaseParameterMismatch, OutOfRangeEta
from .polyfams import (
    f_family,
    g_family,
    gamma_family,
    omega_coeffs,
    p_family,
    P_family,
    theta_parameter,
)
from .poly import frac_str

INF = math.inf
ETA_TOL = 1e-10
CONSISTENCY_RTOL = 1e-9


def _exact(*xs) -> bool:
    return all(isinstance(x, (int, Fraction)) for x in xs)


def _equal(a, b, tol: float = ETA_TOL) -> bool:
    if _exact(a, b):
        return a == b
    return abs(float(a) - float(b)) <= tol


def tilde(z, arr: IntersectionArray):
    """z -> -1 - b_2 b_3 / (z^2 - b_2) on the reals extended by infinity."""
    if z == INF or z == -INF:
        return Fraction(-1)
    b2, b3 = arr.b_(2), arr.b_(3)
    denom = z * z - b2
    if denom == 0:
        return INF
    if _exact(z):
        return -1 - Fraction(b2 * b3) / denom
    return -1 - b2 * b3 / denom


def tilde_bounds(arr: IntersectionArray, spec) -> Tuple:
    """(tilde theta_1, tilde theta_d), the range of possible local eigenvalues."""
    return tilde(spec.theta[1], arr), tilde(spec.theta[arr.d], arr)


@dataclass(frozen=True)
class LocalEigenvalueCase:
    eta: object
    tag: str            # "I", "II", "III" or "IV"
    psi: Optional[object]
    e: int              # dimension deficit: W has dimension D-1-e
    n: Optional[int] = None   # the eigenvalue index behind cases I and II

    @property
    def eta_is_minus_one(self) -> bool:
        return self.psi is None

    def to_json(self) -> dict:
        out = {"eta": frac_str(self.eta), "case": self.tag, "e": self.e}
        out["psi"] = None if self.psi is None else frac_str(self.psi)
        if self.n is not None:
            out["n"] = self.n
        return out


def psi_of(eta, arr: IntersectionArray):
    b2, b3 = arr.b_(2), arr.b_(3)
    if _exact(eta):
        return b2 * (1 - Fraction(b3) / (1 + eta))
    return b2 * (1 - b3 / (1 + eta))


def classify_eta(eta, arr: IntersectionArray, spec) -> LocalEigenvalueCase:
    t1, td = tilde_bounds(arr, spec)
    lo_ok = eta >= t1 or _equal(eta, t1)
    hi_ok = eta <= td or _equal(eta, td)
    if not (lo_ok and hi_ok):
        raise OutOfRangeEta(f"eta={frac_str(eta)} lies outside [{frac_str(t1)}, {frac_str(td)}]")
    odd = arr.D % 2 == 1
    minus_one = _equal(eta, -1)
    psi = None if minus_one else psi_of(eta, arr)
    if _equal(eta, t1):
        return LocalEigenvalueCase(eta, "I", psi, 2, 1)
    if _equal(eta, td):
        if odd:
            return LocalEigenvalueCase(eta, "II", psi, 2, arr.d)
        return LocalEigenvalueCase(eta, "III", psi, 1)
    return LocalEigenvalueCase(eta, "IV", psi, 0)


@dataclass(frozen=True)
class ModuleBlueprint:
    endpoint: int
    case: Optional[LocalEigenvalueCase]
    dimension: int
    estar_dims: Tuple[int, ...]
    e_dims: Tuple[int, ...]
    e_indices: Tuple[int, ...]
    astar_indices: Tuple[int, ...]
    basis_E_norms: Tuple
    basis_Astar_norms: Tuple
    tridiag: Tuple[Tuple, ...]
    transition: Tuple[Tuple, ...]
    local_eigenvalue: Optional[object] = None

    def to_json(self) -> dict:
        def row(xs):
            return [frac_str(x) for x in xs]

        return {
            "endpoint": self.endpoint,
            "case": None if self.case is None else self.case.to_json(),
            "dimension": self.dimension,
            "estar_dims": list(self.estar_dims),
            "e_dims": list(self.e_dims),
            "E_indices": list(self.e_indices),
            "EA_indices": list(self.astar_indices),
            "E_norms": row(self.basis_E_norms),
            "EA_norms": row(self.basis_Astar_norms),
            "tridiag": [row(r) for r in self.tridiag],
            "transition": [row(r) for r in self.transition],
            "local_eigenvalue": None if self.local_eigenvalue is None
            else frac_str(self.local_eigenvalue),
        }


def _flags(D: int, support) -> Tuple[int, ...]:
    support = set(support)
    return tuple(int(i in support) for i in range(D + 1))


def _tridiag(size: int, sub, sup) -> Tuple[Tuple, ...]:
    """A basis_j = sub[j] basis_{j+1} + sup[j] basis_{j-1}, as M[i][j]."""
    M = [[Fraction(0)] * size for _ in range(size)]
    for j in range(size):
        if j + 1 < size:
            M[j + 1][j] = sub[j]
        if j >= 1:
            M[j - 1][j] = sup[j]
    return tuple(tuple(r) for r in M)


def _transition(polys, rows, thetas) -> Tuple[Tuple, ...]:
    return tuple(tuple(polys[i](t) for t in thetas) for i in rows)


def blueprint_endpoint0(arr: IntersectionArray, spec) -> ModuleBlueprint:
    D = arr.D
    th, m, n = spec.theta, spec.m, spec.nverts
    idx = tuple(range(D + 1))
    f = f_family(arr)
    return ModuleBlueprint(
        endpoint=0,
        case=None,
        dimension=D + 1,
        estar_dims=_flags(D, idx),
        e_dims=_flags(D, idx),
        e_indices=idx,
        astar_indices=idx,
        basis_E_norms=tuple(m[i] / n for i in idx),
        basis_Astar_norms=valencies(arr),
        tridiag=_tridiag(D + 1, [arr.c_(j + 1) for j in idx], [arr.b_(j - 1) for j in idx]),
        transition=_transition(f, idx, th),
        local_eigenvalue=None,
    )


def blueprint_endpoint1(arr: IntersectionArray, spec) -> ModuleBlueprint:
    D, k = arr.D, arr.k
    th, m, n = spec.theta, spec.m, spec.nverts
    kv = valencies(arr)
    e_idx = tuple(range(1, D))
    a_idx = tuple(range(D - 1))
    p = p_family(arr)
    size = D - 1
    return ModuleBlueprint(
        endpoint=1,
        case=None,
        dimension=size,
        estar_dims=_flags(D, range(1, D)),
        e_dims=_flags(D, e_idx),
        e_indices=e_idx,
        astar_indices=a_idx,
        basis_E_norms=tuple(m[i] * (k * k - th[i] ** 2) / (n * k * (k - 1)) for i in e_idx),
        basis_Astar_norms=tuple(kv[i] * arr.b_(i) * arr.b_(i + 1) / (k * arr.b_(1)) for i in a_idx),
        tridiag=_tridiag(size, [arr.c_(j + 1) for j in range(size)],
                         [arr.b_(j + 1) for j in range(size)]),
        transition=_transition(p, a_idx, [th[j] for j in e_idx]),
        local_eigenvalue=Fraction(arr.b_(3) - 1),
    )


def _check_case(arr: IntersectionArray, spec, case: LocalEigenvalueCase) -> None:
    odd = arr.D % 2 == 1
    if case.tag not in ("I", "II", "III", "IV"):
        raise CaseParameterMismatch(f"unknown case {case.tag!r}")
    if case.tag == "II" and not odd:
        raise CaseParameterMismatch("case II needs odd D")
    if case.tag == "III" and odd:
        raise CaseParameterMismatch("case III needs even D")
    if case.tag in ("I", "II"):
        want = 1 if case.tag == "I" else arr.d
        if case.n != want:
            raise CaseParameterMismatch(f"case {case.tag} needs n={want}, got n={case.n}")
        if not _equal(case.eta, tilde(spec.theta[want], arr)):
            raise CaseParameterMismatch(f"eta={frac_str(case.eta)} is not tilde theta_{want}")
    expected_e = {"I": 2, "II": 2, "III": 1, "IV": 0}[case.tag]
    if case.e != expected_e:
        raise CaseParameterMismatch(f"case {case.tag} has e={expected_e}, got e={case.e}")


def blueprint_endpoint2(arr: IntersectionArray, spec, case) -> ModuleBlueprint:
    """Blueprint of a thin endpoint-2 module; ``case`` may be a bare eta."""
    if not isinstance(case, LocalEigenvalueCase):
        case = classify_eta(case, arr, spec)
    _check_case(arr, spec, case)
    if case.tag in ("I", "II"):
        return _blueprint_short(arr, spec, case)
    if case.tag == "III":
        return _blueprint_case3(arr, spec, case)
    return _blueprint_case4(arr, spec, case)


def _blueprint_short(arr, spec, case) -> ModuleBlueprint:
    D, k, nn = arr.D, arr.k, case.n
    th, m, N = spec.theta, spec.m, spec.nverts
    b, c = arr.b_, arr.c_
    kv = valencies(arr)
    p = p_family(arr)
    tn = th[nn]
    pn = [pi(tn) for pi in p]
    e_idx = tuple(i for i in range(1, D) if i not in (nn, D - nn))
    a_idx = tuple(range(D - 3))
    base = k * b(1) * (tn ** 2 - b(2))
    e_norms = tuple(m[i] * (th[i] ** 2 - k * k) * (th[i] ** 2 - tn ** 2) / (N * base) for i in e_idx)
    a_norms = tuple(kv[i] * b(i) * b(i + 1) * c(i + 1) * c(i + 2) / base * pn[i + 2] / pn[i]
                    for i in a_idx)
    w = [Fraction(0)] + [Fraction(b(i + 1) * c(i + 2), c(i)) * pn[i - 1] * pn[i + 2]
                         / (pn[i] * pn[i + 1]) for i in range(1, D - 3)]
    size = D - 3
    gamma = gamma_family(arr, spec, nn)
    return ModuleBlueprint(
        endpoint=2,
        case=case,
        dimension=size,
        estar_dims=_flags(D, range(2, D - 1)),
        e_dims=_flags(D, e_idx),
        e_indices=e_idx,
        astar_indices=a_idx,
        basis_E_norms=e_norms,
        basis_Astar_norms=a_norms,
        tridiag=_tridiag(size, [c(j + 1) for j in range(size)], w),
        transition=_transition(gamma, a_idx, [th[j] for j in e_idx]),
        local_eigenvalue=case.eta,
    )


def _blueprint_case3(arr, spec, case) -> ModuleBlueprint:
    D, k, d = arr.D, arr.k, arr.d
    th, m, N = spec.theta, spec.m, spec.nverts
    b, c = arr.b_, arr.c_
    kv = valencies(arr)
    tp = theta_parameter(Fraction(0) if spec.exact else 0.0, arr, spec)
    P0 = [Pi(tp.value) for Pi in P_family(arr)]
    e_idx = tuple(i for i in range(1, D) if i != d)
    a_idx = tuple(range(D - 2))
    base = k * b(1) * b(2)
    e_norms = tuple(m[i] * (k - th[i]) * (k + th[i]) * th[i] ** 2 / (N * base) for i in e_idx)
    a_norms = tuple(-kv[i] * b(i) * b(i + 1) * c(i + 1) * c(i + 2) / base * P0[i + 2] / P0[i]
                    for i in a_idx)
    size = D - 2
    om = omega_coeffs(arr, tp)
    g = g_family(arr, tp)
    return ModuleBlueprint(
        endpoint=2,
        case=case,
        dimension=size,
        estar_dims=_flags(D, range(2, D)),
        e_dims=_flags(D, e_idx),
        e_indices=e_idx,
        astar_indices=a_idx,
        basis_E_norms=e_norms,
        basis_Astar_norms=a_norms,
        tridiag=_tridiag(size, [c(j + 1) for j in range(size)], om[:size]),
        transition=_transition(g, a_idx, [th[j] for j in e_idx]),
        local_eigenvalue=case.eta,
    )


def _blueprint_case4(arr, spec, case) -> ModuleBlueprint:
    D, k = arr.D, arr.k
    th, m, N = spec.theta, spec.m, spec.nverts
    b, c = arr.b_, arr.c_
    kv = valencies(arr)
    e_idx = tuple(range(1, D))
    a_idx = tuple(range(D - 1))
    size = D - 1
    if case.eta_is_minus_one:
        base = k * b(1)
        e_norms = tuple(m[i] * (k - th[i]) * (k + th[i]) / (N * base) for i in e_idx)
        a_norms = tuple(kv[i] * b(i) * b(i + 1) / base for i in a_idx)
        sup = [Fraction(0)] + [b(i + 1) for i in range(1, size)]
        polys = p_family(arr)
    else:
        psi = case.psi
        tp = theta_parameter(psi, arr, spec)
        Pv = [Pi(psi) for Pi in P_family(arr)]
        base = k * b(1) * (psi - b(2))
        e_norms = tuple(m[i] * (th[i] - k) * (th[i] + k) * (th[i] ** 2 - psi) / (N * base)
                        for i in e_idx)
        a_norms = tuple(kv[i] * b(i) * b(i + 1) * c(i + 1) * c(i + 2) / base * Pv[i + 2] / Pv[i]
                        for i in a_idx)
        sup = list(omega_coeffs(arr, tp))
        polys = g_family(arr, tp)
    return ModuleBlueprint(
        endpoint=2,
        case=case,
        dimension=size,
        estar_dims=_flags(D, range(2, D + 1)),
        e_dims=_flags(D, e_idx),
        e_indices=e_idx,
        astar_indices=a_idx,
        basis_E_norms=e_norms,
        basis_Astar_norms=a_norms,
        tridiag=_tridiag(size, [c(j + 1) for j in range(size)], sup),
        transition=_transition(polys, a_idx, [th[j] for j in e_idx]),
        local_eigenvalue=case.eta,
    )


def transition_matrix(bp: ModuleBlueprint) -> List[List]:
    """Row i: coordinates of the i-th E*A basis vector in the E basis."""
    return [list(r) for r in bp.transition]


def consistency_residuals(bp: ModuleBlueprint) -> List[float]:
    """Relative residual of sum_j T[i][j]^2 ||E_j v||^2 = ||E*A_i v||^2 per row."""
    out = []
    for row, target in zip(bp.transition, bp.basis_Astar_norms):
        lhs = sum(t * t * e for t, e in zip(row, bp.basis_E_norms))
        if _exact(lhs, target):
            out.append(0.0 if lhs == target else abs(float(lhs - target)) / max(1.0, abs(float(target))))
        else:
            out.append(abs(float(lhs) - float(target)) / max(1.0, abs(float(target))))
    return out


def is_consistent(bp: ModuleBlueprint, rtol: float = CONSISTENCY_RTOL) -> bool:
    rows = zip(bp.transition, bp.basis_Astar_norms)
    if all(_exact(t) for r in bp.transition for t in r) and all(_exact(x) for x in bp.basis_E_norms):
        return all(sum(t * t * e for t, e in zip(row, bp.basis_E_norms)) == target
                   for row, target in rows)
    return max(consistency_residuals(bp), default=0.0) <= rtol


def sample_case4_etas(arr: IntersectionArray, spec, count: int = 20) -> List:
    """``count`` local eigenvalues strictly inside (tilde theta_1, tilde theta_d), -1 among them."""
    t1, td = tilde_bounds(arr, spec)
    pts = [t1 + (td - t1) * Fraction(j, count + 1) for j in range(1, count + 1)]
    if not any(_equal(x, -1) for x in pts):
        nearest = min(range(count), key=lambda j: abs(float(pts[j]) + 1))
        pts[nearest] = Fraction(-1)
    return sorted(pts)
