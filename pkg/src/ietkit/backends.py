"""Numeric backends for interval arithmetic.

Two supported backends sit behind one duck-typed interface:

* ``rational`` — exact ``fractions.Fraction`` values, zero tolerance;
* ``float``   — arbitrary-precision binary floats (mpmath) with a
  per-instance mantissa, default 256 bits.

Any other exact ordered-field type (supporting +, -, <, bool) is
accepted and treated like the rational backend with zero tolerance;
scripts use this for quadratic-field arithmetic.
"""

from __future__ import annotations

from contextlib import contextmanager
from fractions import Fraction

import mpmath
from mpmath import mp

RATIONAL = "rational"
FLOAT = "float"
EXACT_CUSTOM = "exact"

DEFAULT_PREC = 256


@contextmanager
def working_precision(prec: int | None):
    """Temporarily set the mpmath mantissa (no-op for exact backends)."""
    if prec is None:
        yield
        return
    with mp.workprec(prec):
        yield


def infer_backend(values) -> str:
    if all(isinstance(v, (int, Fraction)) for v in values):
        return RATIONAL
    if any(isinstance(v, (float, mpmath.mpf)) for v in values):
        return FLOAT
    return EXACT_CUSTOM


def coerce(values, backend: str, prec: int | None):
    if backend == RATIONAL:
        return tuple(Fraction(v) for v in values)
    if backend == FLOAT:
        with working_precision(prec):
            out = []
            for v in values:
                if isinstance(v, Fraction):
                    out.append(mp.mpf(v.numerator) / v.denominator)
                elif isinstance(v, str):
                    out.append(mp.mpf(v))
                else:
                    out.append(mp.mpf(v) if not isinstance(v, mpmath.mpf) else +v)
            return tuple(out)
    return tuple(values)


def default_tolerance(backend: str, prec: int | None):
    """Half the working precision for floats, exact zero otherwise."""
    if backend == FLOAT:
        with working_precision(prec):
            return mp.mpf(2) ** (-(prec // 2))
    return 0


def to_float(x) -> float:
    if isinstance(x, Fraction):
        return x.numerator / x.denominator
    return float(x)


def num_to_str(x, prec: int | None = None) -> str:
    """Serialize a backend number to a string that round-trips."""
    if isinstance(x, Fraction):
        if x.denominator == 1:
            return str(x.numerator)
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, mpmath.mpf):
        dps = mpmath.libmp.prec_to_dps(prec or mp.prec) + 3
        return mpmath.nstr(x, dps, strip_zeros=False)
    return repr(x)


def num_from_str(s: str, backend: str, prec: int | None):
    if backend == RATIONAL:
        return Fraction(s)
    with working_precision(prec):
        return mp.mpf(s)


def backend_tag(backend: str, prec: int | None) -> str:
    return RATIONAL if backend == RATIONAL else f"float{prec}"


def parse_backend_tag(tag: str):
    if tag == RATIONAL:
        return RATIONAL, None
    if tag.startswith("float"):
        return FLOAT, int(tag[len("float"):] or DEFAULT_PREC)
    raise ValueError(f"unknown backend tag: {tag}")
