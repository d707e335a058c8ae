"""Dense polynomials in one and two variables.

Coefficients are whatever numbers you hand in.  With ``Fraction`` (or ``int``)
coefficients every operation is exact, which is the intended use; a float
anywhere silently turns the result into floats.
"""
from __future__ import annotations

from fractions import Fraction
from numbers import Number
from typing import Dict, Iterable, Sequence, Tuple


def _trim(coeffs):
    coeffs = list(coeffs)
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    return tuple(coeffs)


class Poly:
    """Polynomial in one variable, coefficients in ascending degree order."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        self.coeffs: Tuple = _trim(coeffs)

    @classmethod
    def const(cls, value) -> "Poly":
        return cls((value,))

    @classmethod
    def x(cls) -> "Poly":
        return cls((0, 1))

    @classmethod
    def monomial(cls, degree: int, coeff=1) -> "Poly":
        return cls((0,) * degree + (coeff,))

    @property
    def degree(self) -> int:
        # the zero polynomial gets degree -1
        return len(self.coeffs) - 1

    @property
    def leading(self):
        return self.coeffs[-1] if self.coeffs else 0

    def coeff(self, i: int):
        return self.coeffs[i] if 0 <= i < len(self.coeffs) else 0

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_even(self) -> bool:
        return all(c == 0 for c in self.coeffs[1::2])

    def is_odd(self) -> bool:
        return all(c == 0 for c in self.coeffs[0::2])

    def __call__(self, t):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * t + c
        return acc

    def __add__(self, other) -> "Poly":
        other = _as_poly(other)
        n = max(len(self.coeffs), len(other.coeffs))
        return Poly(self.coeff(i) + other.coeff(i) for i in range(n))

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly(-c for c in self.coeffs)

    def __sub__(self, other) -> "Poly":
        return self + (-_as_poly(other))

    def __rsub__(self, other) -> "Poly":
        return _as_poly(other) - self

    def __mul__(self, other) -> "Poly":
        if isinstance(other, Number):
            return Poly(c * other for c in self.coeffs)
        other = _as_poly(other)
        if self.is_zero() or other.is_zero():
            return Poly()
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return Poly(out)

    __rmul__ = __mul__

    def __truediv__(self, scalar) -> "Poly":
        if isinstance(scalar, int):
            scalar = Fraction(scalar)
        return Poly(c / scalar for c in self.coeffs)

    def __eq__(self, other) -> bool:
        if isinstance(other, Number):
            other = Poly.const(other)
        if not isinstance(other, Poly):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self) -> str:
        return f"Poly({[str(c) for c in self.coeffs]})"

    def shift(self, k: int) -> "Poly":
        """Multiply by the k-th power of the variable."""
        return Poly((0,) * k + self.coeffs) if self.coeffs else Poly()

    def compose_square(self) -> "Poly":
        """Return q with q(t) = self(t**2)."""
        out = []
        for c in self.coeffs:
            out.extend((c, 0))
        return Poly(out)

    def even_part_in_square(self) -> "Poly":
        """For an even polynomial p(t) = q(t**2), return q."""
        return Poly(self.coeffs[0::2])

    def odd_part_in_square(self) -> "Poly":
        """For an odd polynomial p(t) = t q(t**2), return q."""
        return Poly(self.coeffs[1::2])

    def max_abs_coeff(self) -> float:
        return max((abs(float(c)) for c in self.coeffs), default=0.0)


def _as_poly(value) -> Poly:
    if isinstance(value, Poly):
        return value
    return Poly.const(value)


class BiPoly:
    """Polynomial in two commuting variables (lam, mu).

    Stored sparsely as ``{(i, j): coeff}`` for the monomial lam**i mu**j.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Dict[Tuple[int, int], object] | None = None):
        self.terms = {k: v for k, v in (terms or {}).items() if v != 0}

    @classmethod
    def outer(cls, p: Poly, q: Poly) -> "BiPoly":
        """The product p(lam) q(mu)."""
        terms = {}
        for i, a in enumerate(p.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(q.coeffs):
                if b:
                    terms[(i, j)] = a * b
        return cls(terms)

    @classmethod
    def from_lam(cls, p: Poly) -> "BiPoly":
        return cls({(i, 0): c for i, c in enumerate(p.coeffs)})

    @classmethod
    def from_mu(cls, p: Poly) -> "BiPoly":
        return cls({(0, j): c for j, c in enumerate(p.coeffs)})

    def __add__(self, other: "BiPoly") -> "BiPoly":
        terms = dict(self.terms)
        for k, v in other.terms.items():
            terms[k] = terms.get(k, 0) + v
        return BiPoly(terms)

    def __neg__(self) -> "BiPoly":
        return BiPoly({k: -v for k, v in self.terms.items()})

    def __sub__(self, other: "BiPoly") -> "BiPoly":
        return self + (-other)

    def __mul__(self, other) -> "BiPoly":
        if isinstance(other, Number):
            return BiPoly({k: v * other for k, v in self.terms.items()})
        terms: Dict[Tuple[int, int], object] = {}
        for (i1, j1), a in self.terms.items():
            for (i2, j2), b in other.terms.items():
                key = (i1 + i2, j1 + j2)
                terms[key] = terms.get(key, 0) + a * b
        return BiPoly(terms)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, BiPoly):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __repr__(self) -> str:
        body = ", ".join(f"{k}: {v}" for k, v in sorted(self.terms.items()))
        return f"BiPoly({{{body}}})"

    def is_zero(self) -> bool:
        return not self.terms

    def __call__(self, lam, mu):
        return sum((c * lam**i * mu**j for (i, j), c in self.terms.items()), 0)

    def at_lam(self, lam) -> Poly:
        """Substitute a value for lam; the result is a polynomial in mu."""
        deg = max((j for _, j in self.terms), default=-1)
        out = [0] * (deg + 1)
        for (i, j), c in self.terms.items():
            out[j] += c * lam**i
        return Poly(out)

    def swap(self) -> "BiPoly":
        return BiPoly({(j, i): c for (i, j), c in self.terms.items()})

    def degree_lam(self) -> int:
        return max((i for i, _ in self.terms), default=-1)


def frac_str(value) -> str:
    """Serialize a coefficient: exact as "num/den", floats via repr."""
    if isinstance(value, (int, Fraction)):
        value = Fraction(value)
        return f"{value.numerator}/{value.denominator}"
    return repr(float(value))


def parse_frac(text: str):
    if "/" in text or text.lstrip("-").isdigit():
        return Fraction(text)
    return float(text)


def poly_to_json(p: Poly) -> list:
    return [frac_str(c) for c in p.coeffs]


def poly_from_json(items: Sequence[str]) -> Poly:
    return Poly(parse_frac(s) for s in items)
