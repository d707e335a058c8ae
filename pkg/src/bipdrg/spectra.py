"""Eigenvalues and multiplicities of a bipartite distance-regular array."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Tuple

import numpy as np

from .arrays import IntersectionArray, num_vertices, valencies
from .errors import NonPositiveMultiplicity, RootSeparationFailure
from .poly import Poly, frac_str

DEFAULT_RTOL = 1e-9
ROOT_WIDTH = 1e-12


@dataclass(frozen=True)
class Spectrum:
    theta: Tuple
    m: Tuple
    nverts: Fraction
    exact: bool
    # half-widths of the certified isolating intervals (0 for exact roots)
    radius: Tuple[float, ...] = field(default=(), compare=False)

    @property
    def D(self) -> int:
        return len(self.theta) - 1

    def to_json(self) -> dict:
        return {
            "theta": [frac_str(t) for t in self.theta],
            "m": [frac_str(x) for x in self.m],
            "exact": self.exact,
        }


def characteristic_polynomial(arr: IntersectionArray) -> Poly:
    """det(t I - B) for the tridiagonal intersection matrix B (monic, integral)."""
    q_prev, q = Poly.const(1), Poly.x()
    for i in range(1, arr.D + 1):
        q_prev, q = q, q.shift(1) - q_prev * (arr.b_(i - 1) * arr.c_(i))
    return q


def _deflate(p: Poly, root) -> Poly:
    # synthetic division by (t - root); caller guarantees p(root) == 0
    n = p.degree
    out = [0] * n
    acc = 0
    for i in range(n, 0, -1):
        acc = acc * root + p.coeffs[i]
        out[i - 1] = acc
    return Poly(out)


def _sign(p: Poly, t: float) -> int:
    v = p(Fraction(t))
    return (v > 0) - (v < 0)


def _refine(p: Poly, approx: float, width: float) -> Tuple[float, float]:
    """Bisect a sign change of ``p`` near ``approx`` down to ``width``."""
    delta = max(1e-9, 1e-9 * abs(approx))
    lo, hi = approx - delta, approx + delta
    for _ in range(60):
        if _sign(p, lo) * _sign(p, hi) < 0:
            break
        delta *= 2
        lo, hi = approx - delta, approx + delta
    else:
        raise RootSeparationFailure(f"no sign change isolates the root near {approx!r}")
    s_lo = _sign(p, lo)
    while hi - lo > width:
        mid = (lo + hi) / 2
        if mid in (lo, hi):
            break
        s_mid = _sign(p, mid)
        if s_mid == 0:
            return mid, mid
        if s_mid == s_lo:
            lo = mid
        else:
            hi = mid
    return lo, hi


def eigenvalues(arr: IntersectionArray) -> Tuple[Tuple, Tuple[float, ...]]:
    """Roots of det(t I - B), strictly decreasing, with isolating radii.

    Integer roots (the only possible rational ones, as the polynomial is monic
    and integral) are found exactly by scanning ``[-k, k]``; the rest are
    isolated by exact-sign bisection to width ``ROOT_WIDTH``.
    """
    arr.require_valid()
    k = arr.k
    q = characteristic_polynomial(arr)
    exact_roots = []
    rest = q
    for t in range(-k, k + 1):
        if rest.degree > 0 and rest(t) == 0:
            exact_roots.append(Fraction(t))
            rest = _deflate(rest, t)
    roots: List[Tuple[object, float, float]] = [(r, float(r), float(r)) for r in exact_roots]
    if rest.degree > 0:
        # the symmetrised intersection matrix has the same spectrum
        n = arr.D + 1
        S = np.zeros((n, n))
        for i in range(1, n):
            S[i - 1, i] = S[i, i - 1] = np.sqrt(arr.b_(i - 1) * arr.c_(i))
        approx = sorted(np.linalg.eigvalsh(S), reverse=True)
        for a in approx:
            if any(abs(a - float(r)) < 1e-6 for r in exact_roots):
                continue
            lo, hi = _refine(rest, float(a), ROOT_WIDTH)
            roots.append(((lo + hi) / 2, lo, hi))
    if len(roots) != arr.D + 1:
        raise RootSeparationFailure(f"found {len(roots)} roots, expected {arr.D + 1}")
    roots.sort(key=lambda r: r[1], reverse=True)
    for (_, lo1, _), (_, _, hi2) in zip(roots, roots[1:]):
        if hi2 >= lo1:
            raise RootSeparationFailure("isolating intervals overlap")
    theta = tuple(r[0] for r in roots)
    radius = tuple((r[2] - r[1]) / 2 for r in roots)
    return theta, radius


def multiplicities(arr: IntersectionArray, theta) -> Tuple:
    """m_h = |X| / sum_i f_i(theta_h)^2 / k_i.

    This inverts the orthogonality relation of the f_i, which holds for
    exactly one choice of weights on the D+1 distinct eigenvalues.
    """
    from .polyfams import f_family

    f = f_family(arr)
    kv = valencies(arr)
    n = num_vertices(arr)
    m = []
    for t in theta:
        denom = sum(fi(t) ** 2 / ki for fi, ki in zip(f, kv))
        if denom <= 0:
            raise NonPositiveMultiplicity(f"degenerate weight at theta={t!r}")
        mh = n / denom
        if mh <= 0:
            raise NonPositiveMultiplicity(f"m <= 0 at theta={t!r}")
        m.append(mh)
    total = sum(m)
    if abs(float(total - n)) > DEFAULT_RTOL * float(n):
        raise NonPositiveMultiplicity(f"multiplicities sum to {total}, expected {n}")
    return tuple(m)


def spectrum(arr: IntersectionArray) -> Spectrum:
    theta, radius = eigenvalues(arr)
    exact = all(isinstance(t, Fraction) for t in theta)
    m = multiplicities(arr, theta)
    return Spectrum(theta, m, num_vertices(arr), exact, radius)


@dataclass
class LemmaReport:
    checks: List[Tuple[str, bool, float]]

    @property
    def ok(self) -> bool:
        return all(c[1] for c in self.checks)

    def failures(self) -> List[str]:
        return [c[0] for c in self.checks if not c[1]]


def _close(a, b, rtol: float, scale: float = 1.0) -> Tuple[bool, float]:
    res = abs(float(a - b))
    if isinstance(a, (int, Fraction)) and isinstance(b, (int, Fraction)):
        return a == b, res
    return res <= rtol * max(1.0, scale), res


def verify_spectral_lemmas(arr: IntersectionArray, spec: Spectrum,
                           rtol: float = DEFAULT_RTOL) -> LemmaReport:
    D, k, d = arr.D, arr.k, arr.d
    th, m, n = spec.theta, spec.m, spec.nverts
    checks: List[Tuple[str, bool, float]] = []

    ok, res = _close(th[0], k, rtol, k)
    checks.append(("theta_0 = k", ok, res))
    checks.append(("theta strictly decreasing", all(a > b for a, b in zip(th, th[1:])), 0.0))
    res = max(abs(float(th[i] + th[D - i])) for i in range(D + 1))
    exact_sym = spec.exact and all(th[i] + th[D - i] == 0 for i in range(D + 1))
    checks.append(("theta_{D-i} = -theta_i", exact_sym or res <= rtol * k, res))
    ok, res = _close(m[0], 1, rtol)
    checks.append(("m_0 = 1", ok, res))
    checks.append(("m_i > 0", all(x > 0 for x in m), 0.0))
    ok, res = _close(sum(m), n, rtol, float(n))
    checks.append(("sum m_i = |X|", ok, res))
    ok, res = _close(sum(x * t for x, t in zip(m, th)), 0, rtol, float(n) * k)
    checks.append(("sum m_i theta_i = 0", ok, res))
    if D % 2 == 0:
        ok, res = _close(th[d], 0, rtol, k)
        checks.append(("theta_d = 0 (D even)", ok, res))
    else:
        ok, res = _close(th[d + 1], -th[d], rtol, k)
        checks.append(("theta_d > 0, theta_{d+1} = -theta_d (D odd)", ok and th[d] > 0, res))
    b2 = arr.b_(2)
    checks.append(("theta_1^2 > b_2 > theta_d^2", th[1] ** 2 > b2 > th[d] ** 2, 0.0))
    checks.append(("-1 < theta_1 < k", -1 < th[1] < k, 0.0))
    checks.append(("theta_D < -1", th[D] < -1, 0.0))

    # orthogonality of the f_i against the weights m_h
    from .polyfams import f_family

    f = f_family(arr)
    kv = valencies(arr)
    fv = [[fi(t) for t in th] for fi in f]
    worst, ok = 0.0, True
    for i in range(D + 1):
        for j in range(D + 1):
            lhs = sum(fv[i][h] * fv[j][h] * m[h] for h in range(D + 1))
            rhs = n * kv[i] if i == j else 0
            good, res = _close(lhs, rhs, 1e-8, float(n * kv[i]))
            ok &= good
            worst = max(worst, res / float(n * kv[i]))
    checks.append(("f-orthogonality", ok, worst))
    return LemmaReport(checks)


def theta_squared_bounds(spec: Spectrum, arr: IntersectionArray) -> Tuple[object, object]:
    """(theta_1^2, theta_d^2), the edges of the admissible theta ranges."""
    return spec.theta[1] ** 2, spec.theta[arr.d] ** 2


def index_of(spec: Spectrum, value, tol: float = 1e-8) -> Optional[int]:
    for i, t in enumerate(spec.theta):
        if abs(float(t - value)) <= tol:
            return i
    return None
