"""Exact rational scalars, finitely supported vectors, and certified norms.

Scalars are stdlib ``Fraction`` values (canonical reduced form, arbitrary
precision); this module adds the dyadic fast-path helpers, text renderings,
a certified rational square-root upper bound, and the sparse vector type
used for all orbit coordinates.
"""

from __future__ import annotations

from fractions import Fraction
from math import isqrt
from typing import Iterable, Mapping

ExactScalar = Fraction

ZERO = Fraction(0)
ONE = Fraction(1)


def scalar(num, den=1) -> Fraction:
    """Build an ExactScalar from ints, strings like '3/4', or Fractions."""
    if isinstance(num, str):
        return Fraction(num)
    return Fraction(num, den)


def is_dyadic(q: Fraction) -> bool:
    """True when the denominator is a power of two."""
    d = q.denominator
    return d & (d - 1) == 0


def dyadic_parts(q: Fraction) -> tuple[int, int]:
    """Write q as m * 2**e with m odd (m = e = 0 for zero).

    Raises ValueError for non-dyadic input.
    """
    num, den = q.numerator, q.denominator
    if den & (den - 1):
        raise ValueError(f"{q} is not dyadic")
    if num == 0:
        return 0, 0
    e = -(den.bit_length() - 1)
    tz = (num & -num).bit_length() - 1
    return num >> tz, e + tz


def render(q: Fraction) -> str:
    """Canonical 'num/den' text form (plain integer when den == 1)."""
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def render_dyadic(q: Fraction) -> str:
    """'m*2^e' form for dyadic values; falls back to 'num/den'."""
    if not is_dyadic(q):
        return render(q)
    m, e = dyadic_parts(q)
    return f"{m}*2^{e}"


def decimal_str(q: Fraction, digits: int = 12) -> str:
    """Decimal rendering with the given number of fractional digits."""
    sign = "-" if q < 0 else ""
    q = abs(q)
    scaled = (q.numerator * 10**digits + q.denominator // 2) // q.denominator
    whole, frac = divmod(scaled, 10**digits)
    return f"{sign}{whole}.{str(frac).zfill(digits)}"


def rational_sqrt_upper(q: Fraction, bits: int = 64) -> Fraction:
    """Certified upper bound r >= sqrt(q) with r - sqrt(q) <= 2**-bits * max(1, sqrt(q)).

    Exact for values whose scaled mantissa is a perfect square (so
    rational_sqrt_upper(4) == 2 and rational_sqrt_upper(0) == 0).
    """
    if q < 0:
        raise ValueError("negative input")
    if q == 0:
        return ZERO
    shift = bits + 1
    n, d = q.numerator, q.denominator
    target = (n * d) << (2 * shift)
    s = isqrt(target)
    if s * s == target:
        return Fraction(s, d << shift)
    return Fraction(s + 1, d << shift)


def log2_floor(q: Fraction) -> int:
    """floor(log2(q)) for q > 0, exact."""
    if q <= 0:
        raise ValueError("positive input required")
    n, d = q.numerator, q.denominator
    e = n.bit_length() - d.bit_length()
    # 2**e <= q < 2**(e+2); settle the boundary exactly
    if (n >> e if e >= 0 else n << -e) >= d:
        if (n >> (e + 1) if e + 1 >= 0 else n << -(e + 1)) >= d:
            return e + 1
        return e
    return e - 1


class FiniteVector:
    """Immutable finitely supported vector over the basis (e_k)_{k>=0}.

    Coordinates are ExactScalars; zero coordinates are never stored.
    """

    __slots__ = ("_c",)

    def __init__(self, coords: Mapping[int, Fraction] | Iterable[tuple[int, Fraction]] = ()):
        items = coords.items() if isinstance(coords, Mapping) else coords
        c = {}
        for k, q in items:
            if k < 0:
                raise ValueError("negative basis index")
            q = Fraction(q)
            if q:
                c[int(k)] = q
        self._c = c

    @classmethod
    def basis(cls, k: int, coeff=1) -> "FiniteVector":
        return cls({k: Fraction(coeff)})

    @classmethod
    def zero(cls) -> "FiniteVector":
        return cls()

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(sorted(self._c))

    def items(self):
        return sorted(self._c.items())

    def __getitem__(self, k: int) -> Fraction:
        return self._c.get(k, ZERO)

    def __len__(self):
        return len(self._c)

    def __bool__(self):
        return bool(self._c)

    def __eq__(self, other):
        return isinstance(other, FiniteVector) and self._c == other._c

    def __hash__(self):
        return hash(frozenset(self._c.items()))

    def __neg__(self):
        return FiniteVector({k: -q for k, q in self._c.items()})

    def __add__(self, other: "FiniteVector") -> "FiniteVector":
        c = dict(self._c)
        for k, q in other._c.items():
            s = c.get(k, ZERO) + q
            if s:
                c[k] = s
            else:
                c.pop(k, None)
        out = FiniteVector.__new__(FiniteVector)
        out._c = c
        return out

    def __sub__(self, other: "FiniteVector") -> "FiniteVector":
        return self + (-other)

    def scale(self, a) -> "FiniteVector":
        a = Fraction(a)
        if not a:
            return FiniteVector()
        return FiniteVector({k: a * q for k, q in self._c.items()})

    def __rmul__(self, a):
        return self.scale(a)

    def restrict(self, lo: int, hi: int) -> "FiniteVector":
        """Coordinate projection onto indices lo <= k < hi."""
        return FiniteVector({k: q for k, q in self._c.items() if lo <= k < hi})

    def norm_sq_l2(self) -> Fraction:
        """Sum of squared coordinates, exact."""
        return sum((q * q for q in self._c.values()), ZERO)

    def norm_l1(self) -> Fraction:
        return sum((abs(q) for q in self._c.values()), ZERO)

    def norm_pp_float(self, p: float) -> float:
        """Sum |x_k|^p as a float, for exponents outside {1, 2}."""
        return sum(abs(float(q)) ** p for q in self._c.values())

    def is_dyadic(self) -> bool:
        return all(is_dyadic(q) for q in self._c.values())

    def max_index(self) -> int:
        if not self._c:
            return -1
        return max(self._c)

    def to_json(self) -> dict:
        return {str(k): render(q) for k, q in self.items()}

    @classmethod
    def from_json(cls, data: Mapping[str, str]) -> "FiniteVector":
        return cls({int(k): Fraction(v) for k, v in data.items()})

    def __repr__(self):
        inside = ", ".join(f"{k}: {render(q)}" for k, q in self.items())
        return f"FiniteVector({{{inside}}})"


def vec_combine(a, x: FiniteVector, b, y: FiniteVector) -> FiniteVector:
    """a*x + b*y in canonical form (zeros pruned)."""
    return x.scale(a) + y.scale(b)


class NormValue:
    """A norm evaluation: exact for p in {1, 2}, float with tolerance otherwise.

    For p == 2 the stored value is the squared norm (the exactness
    convention used by every ball test here).
    """

    __slots__ = ("p", "value", "exact", "tolerance")

    def __init__(self, p, value, exact: bool, tolerance: float = 0.0):
        self.p = p
        self.value = value
        self.exact = exact
        self.tolerance = tolerance

    def __repr__(self):
        tag = "exact" if self.exact else f"tol={self.tolerance}"
        return f"NormValue(p={self.p}, {self.value}, {tag})"


DEFAULT_FLOAT_TOL = 1e-12


def norm_value(x: FiniteVector, p=2) -> NormValue:
    if p == 2:
        return NormValue(2, x.norm_sq_l2(), True)
    if p == 1:
        return NormValue(1, x.norm_l1(), True)
    return NormValue(p, x.norm_pp_float(float(p)), False, DEFAULT_FLOAT_TOL)


def in_ball(x: FiniteVector, center: FiniteVector, eps_sq, p=2) -> bool:
    """Membership test ||x - center||_p^p <= eps_sq.

    For p == 2, eps_sq is compared against the exact squared distance; for
    p == 1 against the exact l1 distance. Other exponents use floats with
    DEFAULT_FLOAT_TOL slack and must be requested explicitly.
    """
    if eps_sq <= 0:
        raise ValueError("eps_sq must be positive")
    d = x - center
    if p == 2:
        return d.norm_sq_l2() <= eps_sq
    if p == 1:
        return d.norm_l1() <= eps_sq
    return d.norm_pp_float(float(p)) <= float(eps_sq) + DEFAULT_FLOAT_TOL
