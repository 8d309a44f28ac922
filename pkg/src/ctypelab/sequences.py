"""Closed-form integer sequences for operator parameters.

Presets describe their tau/delta/Delta (and a/f) sequences with these small
closed forms so that classifiers can both evaluate exact prefix values and
decide the handful of asymptotic predicates the certificates need. Explicit
tables carry no asymptotics: predicates on them return None (undetermined).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

INF = math.inf


class Seq:
    kind = "abstract"

    def value(self, k: int) -> int:
        raise NotImplementedError

    def __call__(self, k: int) -> int:
        return self.value(k)

    def is_closed_form(self) -> bool:
        return self.kind != "table"

    def descriptor(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class GeometricSeq(Seq):
    """a * 2**(c*k); covers plain powers of two via a == 1."""

    a: int
    c: int
    kind = "geo"

    def value(self, k: int) -> int:
        return self.a * (1 << (self.c * k))

    def descriptor(self) -> dict:
        return {"kind": "geo", "a": self.a, "c": self.c}


@dataclass(frozen=True)
class PowQuadSeq(Seq):
    """2**(c*k*k + d)."""

    c: int
    d: int
    kind = "quad"

    def value(self, k: int) -> int:
        return 1 << (self.c * k * k + self.d)

    def descriptor(self) -> dict:
        return {"kind": "quad", "c": self.c, "d": self.d}


@dataclass(frozen=True)
class KPowQuadSeq(Seq):
    """k * 2**(c*k*k + d)."""

    c: int
    d: int
    kind = "kquad"

    def value(self, k: int) -> int:
        return k << (self.c * k * k + self.d)

    def descriptor(self) -> dict:
        return {"kind": "kquad", "c": self.c, "d": self.d}


@dataclass(frozen=True)
class AffineSeq(Seq):
    """a*k + b."""

    a: int
    b: int
    kind = "affine"

    def value(self, k: int) -> int:
        return self.a * k + self.b

    def descriptor(self) -> dict:
        return {"kind": "affine", "a": self.a, "b": self.b}


@dataclass(frozen=True)
class TableSeq(Seq):
    """Explicit finite table, 1-indexed; no extension rule."""

    values: tuple
    kind = "table"

    def value(self, k: int) -> int:
        if not 1 <= k <= len(self.values):
            raise IndexError(f"table sequence has no entry {k}")
        return self.values[k - 1]

    def descriptor(self) -> dict:
        return {"kind": "table", "values": list(self.values)}


def seq_from_descriptor(d: dict) -> Seq:
    kind = d["kind"]
    if kind == "geo":
        return GeometricSeq(d["a"], d["c"])
    if kind == "quad":
        return PowQuadSeq(d["c"], d["d"])
    if kind == "kquad":
        return KPowQuadSeq(d["c"], d["d"])
    if kind == "affine":
        return AffineSeq(d["a"], d["b"])
    if kind == "table":
        return TableSeq(tuple(d["values"]))
    raise ValueError(f"unknown sequence kind {kind!r}")


# growth rank used to compare cross-kind pairs: affine < geo < quad/kquad
_RANK = {"affine": 0, "geo": 1, "quad": 2, "kquad": 2}


def limsup_ratio(s: Seq, t: Seq):
    """limsup s(k)/t(k): a Fraction, math.inf, or None when undecidable."""
    ks, kt = s.kind, t.kind
    if ks == "table" or kt == "table":
        return None
    if ks == "affine" and kt == "affine":
        if s.a == 0 and t.a == 0:
            return Fraction(s.b, t.b)
        if s.a == 0:
            return Fraction(0)
        if t.a == 0:
            return INF
        return Fraction(s.a, t.a)
    if ks == "geo" and kt == "geo":
        if s.c < t.c:
            return Fraction(0)
        if s.c > t.c:
            return INF
        return Fraction(s.a, t.a)
    if ks in ("quad", "kquad") and kt in ("quad", "kquad"):
        if s.c < t.c:
            return Fraction(0)
        if s.c > t.c:
            return INF
        if ks == kt:
            return Fraction(2) ** (s.d - t.d) if s.d >= t.d else Fraction(1, 2 ** (t.d - s.d))
        if ks == "kquad":  # extra factor k on top
            return INF
        return Fraction(0)
    # cross-rank pairs
    if _RANK[ks] < _RANK[kt]:
        return Fraction(0)
    if _RANK[ks] > _RANK[kt]:
        return INF
    return None


def ratio_limit_zero(s: Seq, t: Seq) -> Optional[bool]:
    r = limsup_ratio(s, t)
    if r is None:
        return None
    return r == 0


def diff_limsup_infinite(s: Seq, t: Seq) -> Optional[bool]:
    """Does limsup (s(k) - t(k)) == +infinity?"""
    ks, kt = s.kind, t.kind
    if ks == "table" or kt == "table":
        return None
    r = limsup_ratio(s, t)
    if r is INF:
        return True
    if r is None:
        return None
    if r == 0:
        return False
    # comparable leading growth; decide by coefficients
    if ks == "affine" and kt == "affine":
        return s.a > t.a
    if ks == "geo" and kt == "geo" and s.c == t.c:
        return s.a > t.a
    if ks == "quad" and kt == "quad" and s.c == t.c:
        return s.d > t.d
    if ks == "kquad" and kt == "kquad" and s.c == t.c:
        return s.d > t.d
    return None


def succ_ratio_limit_zero(s: Seq) -> Optional[bool]:
    """Does s(k)/s(k+1) tend to 0?"""
    if s.kind in ("quad", "kquad"):
        return True
    if s.kind in ("geo", "affine"):
        return False
    return None


def eventually_monotone_decay(kind_set: set) -> bool:
    """Whether exponent differences built from these kinds are eventually monotone.

    All closed forms here have eventually monotone first differences, which
    is what the geometric tail certificates rely on beyond the probe range.
    """
    return "table" not in kind_set
