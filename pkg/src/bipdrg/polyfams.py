"""The polynomial families f_i, p_i, P_i, g_i and the bivariate Psi_i.

Everything is exact when the array and the parameter are rational.  The g
family depends on a real parameter ``theta`` that must avoid the zeros of the
P_i; ``ThetaParameter`` carries the admissibility proof (a regime tag).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import prod
from numbers import Number
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from .arrays import IntersectionArray, valencies
from .errors import InadmissibleTheta, ParityViolation
from .poly import BiPoly, Poly, frac_str, poly_to_json

LAM = Poly.x()
FLOAT_RTOL = 1e-8


def s(i: int) -> int:
    return i % 2


@dataclass(frozen=True)
class PolySeq:
    family: str
    polys: Tuple[Poly, ...]
    theta: Optional[object] = None

    def __getitem__(self, i: int) -> Poly:
        return self.polys[i]

    def __len__(self) -> int:
        return len(self.polys)

    def __iter__(self) -> Iterator[Poly]:
        return iter(self.polys)

    def to_json(self) -> dict:
        out = {"family": self.family, "polys": [poly_to_json(p) for p in self.polys]}
        if self.theta is not None:
            out["theta"] = frac_str(self.theta)
        return out


def f_family(arr: IntersectionArray) -> PolySeq:
    """f_0 = 1, lam f_i = b_{i-1} f_{i-1} + c_{i+1} f_{i+1}."""
    f = [Poly.const(Fraction(1))]
    prev = Poly()
    for i in range(arr.D):
        nxt = (LAM * f[i] - prev * arr.b_(i - 1)) / arr.c_(i + 1)
        prev = f[i]
        f.append(nxt)
    return PolySeq("f", tuple(f))


def p_family(arr: IntersectionArray) -> PolySeq:
    """p_i = f_i + f_{i-2} + f_{i-4} + ... (same parity as i)."""
    f = f_family(arr)
    p = []
    for i in range(arr.D + 1):
        p.append(f[i] + (p[i - 2] if i >= 2 else Poly()))
    return PolySeq("p", tuple(p))


def p_family_recurrence(arr: IntersectionArray) -> PolySeq:
    """p_0 = 1, lam p_i = c_{i+1} p_{i+1} + b_{i+1} p_{i-1}; used as a cross-check."""
    p = [Poly.const(Fraction(1))]
    prev = Poly()
    for i in range(arr.D):
        nxt = (LAM * p[i] - prev * arr.b_(i + 1)) / arr.c_(i + 1)
        prev = p[i]
        p.append(nxt)
    return PolySeq("p", tuple(p))


def P_family(arr: IntersectionArray, p: Optional[PolySeq] = None) -> PolySeq:
    """P_i with p_i(lam) = lam^{s(i)} P_i(lam^2)."""
    p = p or p_family(arr)
    out = []
    for i, pi in enumerate(p):
        if i % 2 == 0:
            if not pi.is_even():
                raise ParityViolation(f"p_{i} is not even")
            out.append(pi.even_part_in_square())
        else:
            if not pi.is_odd():
                raise ParityViolation(f"p_{i} is not odd")
            out.append(pi.odd_part_in_square())
    return PolySeq("P", tuple(out))


def _kbb(arr: IntersectionArray, kv, i: int):
    return kv[i] * arr.b_(i) * arr.b_(i + 1)


def psi_family(arr: IntersectionArray, p: Optional[PolySeq] = None) -> Tuple[BiPoly, ...]:
    """Psi_i = sum_{h <= i, i-h even} p_h(lam) p_h(mu) k_i b_i b_{i+1} / (k_h b_h b_{h+1})."""
    p = p or p_family(arr)
    kv = valencies(arr)
    out = []
    for i in range(arr.D - 1):
        acc = BiPoly()
        for h in range(i % 2, i + 1, 2):
            acc = acc + BiPoly.outer(p[h], p[h]) * (_kbb(arr, kv, i) / _kbb(arr, kv, h))
        out.append(acc)
    return tuple(out)


REGIMES = ("above-theta1-sq", "below-thetad-sq-odd", "nonpositive-even")


@dataclass(frozen=True)
class ThetaParameter:
    value: object
    regime: str
    D_even: bool


def theta_parameter(value, arr: IntersectionArray, spec) -> ThetaParameter:
    """Tag ``value`` with its admissible regime or raise ``InadmissibleTheta``."""
    if isinstance(value, ThetaParameter):
        return value
    t1sq = spec.theta[1] ** 2
    tdsq = spec.theta[arr.d] ** 2
    even = arr.D % 2 == 0
    if value > t1sq:
        regime = REGIMES[0]
    elif not even and value < tdsq:
        regime = REGIMES[1]
    elif even and value <= 0:
        regime = REGIMES[2]
    else:
        raise InadmissibleTheta(
            f"theta={value} is outside the admissible ranges for D={arr.D}"
            f" (need > {t1sq} or {'<= 0' if even else f'< {tdsq}'})"
        )
    return ThetaParameter(value, regime, even)


def P_values(arr: IntersectionArray, t, P: Optional[PolySeq] = None) -> List:
    P = P or P_family(arr)
    return [Pi(t) for Pi in P]


def _weighted_p_sum(arr: IntersectionArray, p: PolySeq, Pv: Sequence, i: int) -> Poly:
    kv = valencies(arr)
    acc = Poly()
    for h in range(i % 2, i + 1, 2):
        acc = acc + p[h] * ((Pv[h] / Pv[i]) * (_kbb(arr, kv, i) / _kbb(arr, kv, h)))
    return acc


def g_family(arr: IntersectionArray, theta, spec=None) -> PolySeq:
    """g_0 .. g_{D-2} at an admissible ``theta`` (value or ThetaParameter)."""
    if not isinstance(theta, ThetaParameter):
        if spec is None:
            raise InadmissibleTheta("a spectrum is needed to check admissibility of theta")
        theta = theta_parameter(theta, arr, spec)
    p = p_family(arr)
    Pv = P_values(arr, theta.value)
    g = tuple(_weighted_p_sum(arr, p, Pv, i) for i in range(arr.D - 1))
    return PolySeq("g", g, theta.value)


def gamma_family(arr: IntersectionArray, spec, n: int) -> PolySeq:
    """The g-type family weighted by p_h(theta_n)/p_i(theta_n), i <= D-4.

    theta_n^2 lies on the boundary of the admissible range, so this bypasses
    ``theta_parameter``; p_i(theta_n) != 0 for i <= D-2 by the sign lemmas.
    """
    p = p_family(arr)
    tn = spec.theta[n]
    pv = [pi(tn) for pi in p]
    return PolySeq("gamma", tuple(_weighted_p_sum(arr, p, pv, i) for i in range(arr.D - 3)), tn)


def omega_coeffs(arr: IntersectionArray, theta, spec=None) -> Tuple:
    """(omega_0, ..., omega_{D-2}); omega_0 = 0 and omega_{D-2} may vanish."""
    if not isinstance(theta, ThetaParameter):
        if spec is None:
            raise InadmissibleTheta("a spectrum is needed to check admissibility of theta")
        theta = theta_parameter(theta, arr, spec)
    Pv = P_values(arr, theta.value)
    out = [Fraction(0)]
    for i in range(1, arr.D - 1):
        out.append(
            Fraction(arr.b_(i + 1) * arr.c_(i + 2), arr.c_(i))
            * (Pv[i - 1] * Pv[i + 2]) / (Pv[i] * Pv[i + 1])
        )
    return tuple(out)


def g_family_recurrence(arr: IntersectionArray, theta, spec=None) -> PolySeq:
    """g_i generated by lam g_i = c_{i+1} g_{i+1} + omega_i g_{i-1}."""
    if not isinstance(theta, ThetaParameter):
        theta = theta_parameter(theta, arr, spec)
    om = omega_coeffs(arr, theta)
    g = [Poly.const(Fraction(1))]
    prev = Poly()
    for i in range(arr.D - 2):
        nxt = (LAM * g[i] - prev * om[i]) / arr.c_(i + 1)
        prev = g[i]
        g.append(nxt)
    return PolySeq("g", tuple(g), theta.value)


def leading_law(arr: IntersectionArray, i: int) -> Fraction:
    return Fraction(1, prod(arr.c[:i]))


# ---------------------------------------------------------------------------
# identity checks


def _is_exact(x) -> bool:
    if isinstance(x, Poly):
        return all(isinstance(c, (int, Fraction)) for c in x.coeffs)
    if isinstance(x, BiPoly):
        return all(isinstance(c, (int, Fraction)) for c in x.terms.values())
    return isinstance(x, (int, Fraction))


def _magnitude(x) -> float:
    if isinstance(x, Poly):
        return x.max_abs_coeff()
    if isinstance(x, BiPoly):
        return max((abs(float(c)) for c in x.terms.values()), default=0.0)
    return abs(float(x))


def compare(lhs, rhs, rtol: float = FLOAT_RTOL, scale: float = 0.0) -> Tuple[bool, float]:
    """Exact equality when both sides are rational, else relative tolerance.

    Returns (ok, residual) with the residual scaled by max(1, |lhs|, |rhs|, scale).
    Pass ``scale`` for sums whose terms are much larger than the result.
    """
    if isinstance(lhs, Number) and isinstance(rhs, (Poly, BiPoly)):
        lhs = Poly.const(lhs) if isinstance(rhs, Poly) else BiPoly({(0, 0): lhs})
    if isinstance(rhs, Number) and isinstance(lhs, (Poly, BiPoly)):
        rhs = Poly.const(rhs) if isinstance(lhs, Poly) else BiPoly({(0, 0): rhs})
    diff = lhs - rhs
    scale = max(1.0, _magnitude(lhs), _magnitude(rhs), scale)
    res = _magnitude(diff) / scale
    if _is_exact(lhs) and _is_exact(rhs):
        return diff == 0 if isinstance(diff, Number) else diff.is_zero(), res
    return res <= rtol, res


@dataclass
class IdentityReport:
    results: Dict[str, Tuple[bool, float]] = field(default_factory=dict)

    def record(self, name: str, ok: bool, residual: float) -> None:
        prev_ok, prev_res = self.results.get(name, (True, 0.0))
        self.results[name] = (prev_ok and ok, max(prev_res, residual))

    def check(self, name: str, lhs, rhs, rtol: float = FLOAT_RTOL, scale: float = 0.0) -> None:
        self.record(name, *compare(lhs, rhs, rtol, scale))

    @property
    def ok(self) -> bool:
        return all(ok for ok, _ in self.results.values())

    def failures(self) -> List[str]:
        return [k for k, (ok, _) in self.results.items() if not ok]

    def merge(self, other: "IdentityReport") -> "IdentityReport":
        for name, (ok, res) in other.results.items():
            self.record(name, ok, res)
        return self


def default_theta_samples(arr: IntersectionArray, spec) -> List:
    """A few admissible parameters from each regime."""
    t1sq = spec.theta[1] ** 2
    tdsq = spec.theta[arr.d] ** 2
    samples = [t1sq + Fraction(1, 3), t1sq + 5]
    if arr.D % 2 == 0:
        samples += [Fraction(0), Fraction(-1), Fraction(-7, 2)]
    else:
        samples += [tdsq - Fraction(1, 2), Fraction(0), Fraction(-3)]
    if not spec.exact:
        samples = [float(x) for x in samples]
    return samples


def verify_polynomial_identities(arr: IntersectionArray, spec,
                                 thetas: Optional[Sequence] = None) -> IdentityReport:
    D, k = arr.D, arr.k
    b, c = arr.b_, arr.c_
    kv = valencies(arr)
    n = spec.nverts
    th, m = spec.theta, spec.m
    rep = IdentityReport()

    f = f_family(arr)
    p = p_family(arr)
    P = P_family(arr, p)
    psi = psi_family(arr, p)

    for i in range(D):
        rep.check("f_recurrence", LAM * f[i], f[i - 1] * b(i - 1) + f[i + 1] * c(i + 1)
                  if i > 0 else f[1] * c(1))
    for i in range(D + 1):
        rep.check("f_at_k_is_valency", f[i](k), kv[i])
        rep.check("leading_coefficient_law", f[i].leading, leading_law(arr, i))
        rep.check("leading_coefficient_law", p[i].leading, leading_law(arr, i))
        rep.record("degree_law", f[i].degree == i and p[i].degree == i, 0.0)

    # p: partial sums against the three-term recurrence
    prec = p_family_recurrence(arr)
    for i in range(D + 1):
        rep.check("p_sum_equals_recurrence", p[i], prec[i])
    for i in range(D):
        rhs = p[i + 1] * c(i + 1) + (p[i - 1] * b(i + 1) if i > 0 else Poly())
        rep.check("p_recurrence", LAM * p[i], rhs)
    for h in range(1, D):
        rep.check("p_vanishing_at_interior_eigenvalues", p[D - 1](th[h]), 0)
        rep.check("p_vanishing_at_interior_eigenvalues", p[D](th[h]), 0)
    pv = [[pi(t) for t in th] for pi in p]
    for i in range(D - 1):
        for j in range(D - 1):
            lhs = sum(pv[i][h] * pv[j][h] * (k * k - th[h] ** 2) * m[h] for h in range(D + 1))
            rhs = n * kv[i] * b(i) * b(i + 1) if i == j else 0
            rep.check("p_orthogonality", lhs / (n * kv[i] * b(i) * b(i + 1)),
                      rhs / (n * kv[i] * b(i) * b(i + 1)))
    sign_D = 1 if D % 2 == 0 else -1
    for h in range(D + 1):
        rep.check("p_D_plus_p_D-1_is_J", pv[D][h] + pv[D - 1][h], n if h == 0 else 0)
        rep.check("p_D_minus_p_D-1_is_signed_J'", pv[D][h] - pv[D - 1][h],
                  sign_D * n if h == D else 0)

    # P: substitution and recurrence
    for i in range(D + 1):
        rep.check("P_substitution", P[i].compose_square().shift(s(i)), p[i])
        deg = i // 2
        rep.record("P_degree", P[i].degree == deg, 0.0)
    for i in range(D):
        prevP = P[i - 1] if i > 0 else Poly()
        rep.check("P_recurrence", P[i].shift(s(i)), P[i + 1] * c(i + 1) + prevP * b(i + 1))

    # Psi
    rep.check("psi_base_cases", psi[0], BiPoly({(0, 0): 1}))
    rep.check("psi_base_cases", psi[1], BiPoly({(1, 1): 1}))
    for i in range(D - 1):
        rep.check("psi_symmetric", psi[i], psi[i].swap())
    for i in range(2, D - 1):
        rhs = psi[i] - psi[i - 2] * Fraction(b(i) * b(i + 1), c(i) * c(i - 1))
        rep.check("psi_product_split", BiPoly.outer(p[i], p[i]), rhs)
    lam2_minus_mu2 = BiPoly({(2, 0): 1, (0, 2): -1})
    for i in range(1, D):
        lhs = BiPoly.outer(p[i + 1], p[i - 1]) - BiPoly.outer(p[i - 1], p[i + 1])
        rhs = lam2_minus_mu2 * psi[i - 1] * Fraction(1, c(i) * c(i + 1))
        rep.check("christoffel_darboux", lhs, rhs)
    mu = Poly.x()
    psi_at = [[psi[i].at_lam(t) for t in th] for i in range(D - 1)]
    for i in range(D - 1):
        for j in range(D - 1):
            lhs, size = Poly(), 0.0
            for h in range(D + 1):
                w = (k * k - th[h] ** 2) * m[h]
                term = psi_at[i][h] * psi_at[j][h] * (mu * mu - th[h] ** 2) * w
                lhs, size = lhs + term, size + term.max_abs_coeff()
            if i == j:
                rhs = p[i] * p[i + 2] * (n * kv[i] * b(i) * b(i + 1) * c(i + 1) * c(i + 2))
            else:
                rhs = Poly()
            rep.check("psi_orthogonality", lhs, rhs, scale=size)

    for t in thetas if thetas is not None else default_theta_samples(arr, spec):
        rep.merge(_verify_g_identities(arr, spec, t, p, P))
    return rep


def _verify_g_identities(arr, spec, t, p: PolySeq, P: PolySeq) -> IdentityReport:
    D, k = arr.D, arr.k
    b, c = arr.b_, arr.c_
    kv = valencies(arr)
    n, th, m = spec.nverts, spec.theta, spec.m
    rep = IdentityReport()
    tp = theta_parameter(t, arr, spec)
    g = g_family(arr, tp)
    grec = g_family_recurrence(arr, tp)
    om = omega_coeffs(arr, tp)
    Pv = P_values(arr, t, P)

    for i in range(D - 1):
        rep.check("g_definition_equals_recurrence", g[i], grec[i])
        rep.check("leading_coefficient_law", g[i].leading, leading_law(arr, i))
        rep.record("degree_law", g[i].degree == i, 0.0)
    rep.check("g_base_cases", g[0], Poly.const(1))
    if D > 2:
        rep.check("g_base_cases", g[1], LAM)
    for i in range(D - 1):
        nxt = g[i + 1] if i + 1 <= D - 2 else p[D - 1]
        rhs = nxt * c(i + 1) + (g[i - 1] * om[i] if i > 0 else Poly())
        rep.check("g_recurrence", LAM * g[i], rhs)
    for i in range(2, D - 1):
        rhs = g[i] - g[i - 2] * (Fraction(b(i) * b(i + 1), c(i - 1) * c(i)) * Pv[i - 2] / Pv[i])
        rep.check("p_from_g", p[i], rhs)
    quad = Poly((-t, 0, 1))
    for i in range(D - 1):
        lhs = quad * g[i] / (c(i + 1) * c(i + 2))
        rhs = p[i + 2] - p[i] * (Pv[i + 2] / Pv[i])
        rep.check("g_times_quadratic", lhs, rhs)
    gv = [[gi(x) for x in th] for gi in g]
    for i in range(D - 1):
        scale = n * kv[i] * b(i) * b(i + 1) * c(i + 1) * c(i + 2)
        for j in range(D - 1):
            lhs = sum(gv[i][h] * gv[j][h] * (k * k - th[h] ** 2) * (t - th[h] ** 2) * m[h]
                      for h in range(D + 1))
            rhs = scale * Pv[i + 2] / Pv[i] if i == j else 0
            rep.check("g_orthogonality", lhs / scale, rhs / scale)
    if D % 2 == 0 and t == 0:
        for h in range(1, D):
            if h != arr.d:
                rep.check("g_last_vanishes", gv[D - 2][h], 0)
    return rep


# ---------------------------------------------------------------------------
# sign lemmas


@dataclass
class SignReport:
    results: Dict[str, Tuple[bool, int]] = field(default_factory=dict)

    def record(self, name: str, ok: bool) -> None:
        prev_ok, count = self.results.get(name, (True, 0))
        self.results[name] = (prev_ok and ok, count + 1)

    @property
    def ok(self) -> bool:
        return all(ok for ok, _ in self.results.values())

    def failures(self) -> List[str]:
        return [k for k, (ok, _) in self.results.items() if not ok]


def sample_interval(lo, hi, count: int = 20, offset=Fraction(1, 10**6)) -> List:
    """``count`` equispaced interior points of (lo, hi) plus both ends nudged inward."""
    pts = [lo + (hi - lo) * Fraction(j, count + 1) for j in range(1, count + 1)]
    return [lo + offset] + pts + [hi - offset]


def _num(spec, x):
    return x if spec.exact else float(x)


def verify_sign_lemmas(arr: IntersectionArray, spec, count: int = 20) -> SignReport:
    D, k, d = arr.D, arr.k, arr.d
    th = spec.theta
    p = p_family(arr)
    P = P_family(arr, p)
    rep = SignReport()

    def pattern(i):
        return -1 if (i // 2) % 2 else 1

    # p_i(theta) > 0 above theta_1; at theta_1 up to D-2 with two zeros on top
    for t in sample_interval(th[1], _num(spec, 2 * k), count, _num(spec, Fraction(1, 10**6))):
        rep.record("p_positive_above_theta1", all(p[i](t) > 0 for i in range(D + 1)))
    rep.record("p_at_theta1", all(p[i](th[1]) > 0 for i in range(D - 1)))
    rep.record("p_at_theta1", compare(p[D - 1](th[1]), 0)[0] and compare(p[D](th[1]), 0)[0])

    if D % 2 == 1:
        for t in sample_interval(_num(spec, 0), th[d], count, _num(spec, Fraction(1, 10**6))):
            rep.record("p_alternating_below_thetad",
                       all(pattern(i) * p[i](t) > 0 for i in range(D + 1)))
        rep.record("p_at_thetad", all(pattern(i) * p[i](th[d]) > 0 for i in range(D - 1)))
        rep.record("p_at_thetad", compare(p[D - 1](th[d]), 0)[0] and compare(p[D](th[d]), 0)[0])

    t1sq, tdsq = th[1] ** 2, th[d] ** 2
    off = _num(spec, Fraction(1, 10**6))
    for t in sample_interval(t1sq, _num(spec, 4 * k * k), count, off):
        rep.record("P_positive_above_theta1_sq", all(P[i](t) > 0 for i in range(D + 1)))
    if D % 2 == 1:
        for t in sample_interval(_num(spec, -k * k), tdsq, count, off):
            rep.record("P_alternating_below_thetad_sq",
                       all(pattern(i) * P[i](t) > 0 for i in range(D + 1)))
    else:
        for t in sample_interval(_num(spec, -k * k), _num(spec, 0), count, off):
            rep.record("P_alternating_nonpositive",
                       all(pattern(i) * P[i](t) > 0 for i in range(D + 1)))
        rep.record("P_alternating_nonpositive",
                   all(pattern(i) * P[i](0) > 0 for i in range(D)))
        rep.record("P_D_vanishes_at_zero", P[D](0) == 0)
    return rep
