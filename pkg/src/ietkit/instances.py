"""Ready-made instances used by the test-suite, the scripts and the CLI.

All constructors build every length inside one precision context; doing
the arithmetic at a lower ambient precision would silently corrupt deep
renormalization paths (the map's combinatorics are only as accurate as
the least accurate length).
"""

from __future__ import annotations

import functools
import math

from mpmath import mp

from .backends import working_precision
from .combinatorics import PermutationPair
from .iet_core import Iet
from .self_similar import RauzyLoop, build_self_similar, find_loops

GOLDEN_LOG2 = math.log2((1 + math.sqrt(5)) / 2)


def prec_for_depth(depth: int, per_step_log2: float = GOLDEN_LOG2) -> int:
    """Mantissa large enough to run ``depth`` elementary steps: twice the
    expected length contraction plus a safety margin, so the tie guard
    (half the mantissa) stays below the smallest honest gap."""
    return int(2.2 * per_step_log2 * depth) + 192


def golden_rotation(prec: int = 256, depth_hint: int | None = None) -> Iet:
    """Rotation by the golden conjugate as a two-interval exchange; the
    self-similar fixed point of the shortest renormalization loop."""
    if depth_hint is not None:
        prec = max(prec, prec_for_depth(depth_hint))
    pi = PermutationPair.parse("A B / B A")
    with working_precision(prec):
        g = (mp.sqrt(5) - 1) / 2
        lengths = [1 - g, g]
    return Iet(pi, lengths, prec=prec)


def rotation(alpha, prec: int = 256) -> Iet:
    """Rotation by alpha in (0,1) as a two-interval exchange."""
    pi = PermutationPair.parse("A B / B A")
    with working_precision(prec):
        a = mp.mpf(alpha) if not hasattr(alpha, "denominator") else alpha
        lengths = [1 - a, a]
    return Iet(pi, lengths, prec=prec)


def sqrt2_rotation(prec: int = 256, depth_hint: int | None = None) -> Iet:
    """Rotation by sqrt(2)-1 (all partial quotients equal to 2)."""
    if depth_hint is not None:
        prec = max(prec, prec_for_depth(depth_hint, per_step_log2=1.3))
    pi = PermutationPair.parse("A B / B A")
    with working_precision(prec):
        a = mp.sqrt(2) - 1
        lengths = [1 - a, a]
    return Iet(pi, lengths, prec=prec)


def alpha_from_quotients(quotients, prec: int = 256):
    """The irrational in (0,1) with the given continued-fraction partial
    quotients (evaluated back-to-front, golden tail appended)."""
    with working_precision(prec):
        x = (mp.sqrt(5) - 1) / 2  # tail beyond the prescribed quotients
        for a in reversed(list(quotients)):
            x = 1 / (a + x)
        return +x


def rotation_from_quotients(quotients, prec: int = 256) -> Iet:
    return rotation(alpha_from_quotients(quotients, prec), prec)


@functools.lru_cache(maxsize=None)
def h2_loop(max_len: int = 8) -> RauzyLoop:
    """First primitive loop on the genus-2 pair (A B C D / D C B A) whose
    absolute block is hyperbolic (no eigenvalue near the unit circle), so
    the stable space is Lagrangian.  Deterministic: loops are enumerated
    in (length, word) order."""
    import numpy as np
    pi = PermutationPair.parse("A B C D / D C B A")
    for loop in find_loops(pi, max_len):
        from .combinatorics import absolute_cycle_basis
        K = np.array(absolute_cycle_basis(pi), float).T
        M = np.array(loop.loop_matrix.rows, float)
        C = np.linalg.lstsq(K, M @ K, rcond=None)[0]
        moduli = np.abs(np.linalg.eigvals(C))
        if np.all(np.abs(moduli - 1) > 0.05):
            return loop
    raise LookupError(f"no hyperbolic loop of length <= {max_len}")


def h2_self_similar(prec: int = 256, depth_hint: int | None = None) -> Iet:
    """Self-similar four-interval instance with hyperbolic absolute block;
    the workhorse d = 4 admissible example."""
    return build_self_similar(h2_loop(), prec=prec, depth_hint=depth_hint)
