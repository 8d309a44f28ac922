"""Named operator presets and the JSON operator-spec loader.

Each preset pins a closed-form parameter family; the growth constant C is
free so experiments can run a small instance (C=1) while certificates are
searched for the minimal C that closes them.
"""

from __future__ import annotations

import json
from fractions import Fraction

from . import sequences as sq
from .operators import C2Family, CPlusFamily, CTypeOperator, GenericFamily, ParameterError


def build_example55(C: int = 1, p=2, n_max: int = 64, b1: int = 1) -> CTypeOperator:
    """Variant-1 family with tau = 2^(Ck), delta = 2*2^(Ck), Delta = 10*2^(Ck)."""
    fam = CPlusFamily(
        1,
        tau=sq.GeometricSeq(1, C),
        delta=sq.GeometricSeq(2, C),
        Delta=sq.GeometricSeq(10, C),
        b1=b1,
    )
    return CTypeOperator(fam, p=p, n_max=n_max, preset_name=f"example55(C={C})")


def build_example59(C: int = 1, p=2, n_max: int = 64, b1: int = 1) -> CTypeOperator:
    """Variant-2 family with tau = 2^(Ck^2), delta = 2^(Ck^2+1), Delta = 2^(2Ck^2+4)."""
    fam = CPlusFamily(
        2,
        tau=sq.PowQuadSeq(C, 0),
        delta=sq.PowQuadSeq(C, 1),
        Delta=sq.PowQuadSeq(2 * C, 4),
        b1=b1,
    )
    return CTypeOperator(fam, p=p, n_max=n_max, preset_name=f"example59(C={C})")


def build_c2mix(C: int = 1, p=2, n_max: int = 64, b1: int = 1) -> CTypeOperator:
    """Group family with sliding half/double runs:
    Delta = 2^(2Ck^2+5), delta = 2^(Ck^2+1), tau = 2^(Ck^2),
    a_k = k*2^(Ck^2+1), f_k = 2^(2Ck^2+4)."""
    fam = C2Family(
        a=sq.KPowQuadSeq(C, 1),
        f=sq.PowQuadSeq(2 * C, 4),
        tau=sq.PowQuadSeq(C, 0),
        delta=sq.PowQuadSeq(C, 1),
        Delta=sq.PowQuadSeq(2 * C, 5),
        b1=b1,
    )
    return CTypeOperator(fam, p=p, n_max=n_max, preset_name=f"c2mix(C={C})")


def build_thsmx(C: int = 1, p=2, n_max: int = 64, b1: int = 1) -> CTypeOperator:
    """Variant-1 family with delta = 2k, tau = k, Delta = 2^(k+1); rich
    unimodular point spectrum."""
    fam = CPlusFamily(
        1,
        tau=sq.AffineSeq(1, 0),
        delta=sq.AffineSeq(2, 0),
        Delta=sq.GeometricSeq(2, 1),
        b1=b1,
    )
    return CTypeOperator(fam, p=p, n_max=n_max, preset_name="thsmx")


PRESETS = {
    "example55": build_example55,
    "example59": build_example59,
    "c2mix": build_c2mix,
    "thsmx": build_thsmx,
}

# Minimal growth constants closing the full certificate chains, derived by
# exhaustive search (see criteria.minimal_certificate_constant and the
# acceptance suite, which re-derives and asserts them).
RECORDED_MINIMAL_C = {
    "example55": 5,
    "example59": 3,
    "c2mix": 6,
    "example55-vp": 2,
}


def build_preset(name: str, C: int | None = None, p=2, n_max: int = 64, b1: int = 1) -> CTypeOperator:
    base = name
    if name.endswith("-small"):
        base = name[: -len("-small")]
        C = 1 if C is None else C
    if base not in PRESETS:
        raise ParameterError(f"unknown preset {name!r}")
    if C is None:
        C = 1
    return PRESETS[base](C=C, p=p, n_max=n_max, b1=b1)


def operator_from_json(data: dict | str) -> CTypeOperator:
    """Build an operator from the JSON spec format:

    {"family": "cplus1|cplus2|c2|generic", "preset": name, "C": int,
     "p": 1|2, "N_max": int, "b1": int, ...explicit sequence descriptors}
    """
    if isinstance(data, str):
        data = json.loads(data)
    p = data.get("p", 2)
    n_max = data.get("N_max", 64)
    b1 = data.get("b1", 1)
    preset = data.get("preset")
    if preset:
        return build_preset(preset, C=data.get("C"), p=p, n_max=n_max, b1=b1)
    family = data.get("family")
    if family in ("cplus1", "cplus2"):
        fam = CPlusFamily(
            1 if family == "cplus1" else 2,
            tau=sq.seq_from_descriptor(data["tau"]),
            delta=sq.seq_from_descriptor(data["delta"]),
            Delta=sq.seq_from_descriptor(data["Delta"]),
            b1=b1,
        )
        return CTypeOperator(fam, p=p, n_max=n_max)
    if family == "c2":
        fam = C2Family(
            a=sq.seq_from_descriptor(data["a"]),
            f=sq.seq_from_descriptor(data["f"]),
            tau=sq.seq_from_descriptor(data["tau"]),
            delta=sq.seq_from_descriptor(data["delta"]),
            Delta=sq.seq_from_descriptor(data["Delta"]),
            b1=b1,
        )
        return CTypeOperator(fam, p=p, n_max=n_max)
    if family == "generic":
        fam = GenericFamily(
            b=data["b"],
            v=[Fraction(x) for x in data["v"]],
            w=[Fraction(x) for x in data["w"]],
            phi=data["phi"],
        )
        return CTypeOperator(fam, p=p, n_max=min(n_max, fam.n_blocks - 1))
    raise ParameterError(f"unsupported operator spec {data!r}")
