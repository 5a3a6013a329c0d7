#!/usr/bin/env python3
"""Derive the stored genus-3 square-tiled loop data in self_similar.py.

Construction, fully reproducible:

1. Build the quaternion-group origami: 8 unit squares indexed by the
   unit quaternions, right neighbor q*i, top neighbor q*j.  Its corner
   gluing identifies the 32 square corners into 4 cone points of angle
   4*pi (the commutator of the two neighbor maps is q -> -q), so the
   surface has genus 3 and the return maps of minimal directions are
   9-interval exchanges.

2. Flow in the direction (-gamma, 1), gamma the golden conjugate
   (gamma^2 = 1 - gamma), and compute the first-return map to the bottom
   edge of the identity square by exact interval propagation over the
   quadratic field Q(gamma).  The direction is the contracting
   eigendirection of [[2,1],[1,1]], so the return map is self-similar
   after renormalization.

3. Run Rauzy-Veech induction with exact Q(gamma) arithmetic until the
   projectivized state (permutation pair, normalized lengths) repeats;
   the repeating segment is the stored loop word.

The script re-certifies the loop through the package before printing:
d = 9, g = 3, s = 4, unit-modulus spectrum on the non-dominant part of
the absolute block, and a one-dimensional stable space.
"""

from __future__ import annotations

import sys
from fractions import Fraction

sys.setrecursionlimit(100000)

from ietkit.combinatorics import PermutationPair, omega_matrix, singularity_cycles
from ietkit.iet_core import Iet
from ietkit.rauzy_veech import iterate, elementary_step
from ietkit import self_similar as ss

import numpy as np


class QG:
    """Exact element a + b*gamma of Q(gamma), gamma = (sqrt(5)-1)/2."""

    __slots__ = ("a", "b")

    def __init__(self, a, b=0):
        self.a = Fraction(a)
        self.b = Fraction(b)

    def __add__(self, o):
        o = _qg(o)
        return QG(self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __sub__(self, o):
        o = _qg(o)
        return QG(self.a - o.a, self.b - o.b)

    def __rsub__(self, o):
        return _qg(o) - self

    def __neg__(self):
        return QG(-self.a, -self.b)

    def __mul__(self, o):
        o = _qg(o)
        # gamma^2 = 1 - gamma
        return QG(self.a * o.a + self.b * o.b, self.a * o.b + self.b * o.a - self.b * o.b)

    __rmul__ = __mul__

    def inverse(self):
        n = self.a * self.a - self.a * self.b - self.b * self.b
        if n == 0:
            raise ZeroDivisionError
        return QG((self.a - self.b) / n, -self.b / n)

    def __truediv__(self, o):
        return self * _qg(o).inverse()

    def sign(self) -> int:
        # a + b*gamma = p + q*sqrt(5), p = a - b/2, q = b/2
        p = self.a - self.b / 2
        q = self.b / 2
        if p == 0 and q == 0:
            return 0
        if p >= 0 and q >= 0:
            return 1
        if p <= 0 and q <= 0:
            return -1
        big = p * p > 5 * q * q
        if p > 0:
            return 1 if big else -1
        return -1 if big else 1

    def __lt__(self, o):
        return (self - _qg(o)).sign() < 0

    def __le__(self, o):
        return (self - _qg(o)).sign() <= 0

    def __gt__(self, o):
        return (self - _qg(o)).sign() > 0

    def __ge__(self, o):
        return (self - _qg(o)).sign() >= 0

    def __eq__(self, o):
        try:
            o = _qg(o)
        except TypeError:
            return NotImplemented
        return self.a == o.a and self.b == o.b

    def __hash__(self):
        return hash((self.a, self.b))

    def __abs__(self):
        return self if self.sign() >= 0 else -self

    def __bool__(self):
        return self.sign() != 0

    def __float__(self):
        return float(self.a) + float(self.b) * 0.6180339887498949

    def __repr__(self):
        return f"({self.a} + {self.b} g)"


def _qg(x):
    if isinstance(x, QG):
        return x
    if isinstance(x, (int, Fraction)):
        return QG(x)
    raise TypeError(f"cannot coerce {x!r}")


GAMMA = QG(0, 1)
ONE = QG(1)


# -- quaternion units -------------------------------------------------------------
# index = sign*4 + base, sign in {0:+,1:-}, base in {0:1, 1:i, 2:j, 3:k}

_BASE_MUL = {
    (0, 0): (0, 0), (0, 1): (0, 1), (0, 2): (0, 2), (0, 3): (0, 3),
    (1, 0): (0, 1), (2, 0): (0, 2), (3, 0): (0, 3),
    (1, 1): (1, 0), (2, 2): (1, 0), (3, 3): (1, 0),
    (1, 2): (0, 3), (2, 1): (1, 3),
    (2, 3): (0, 1), (3, 2): (1, 1),
    (3, 1): (0, 2), (1, 3): (1, 2),
}


def qmul(x: int, y: int) -> int:
    sx, bx = divmod(x, 4)
    sy, by = divmod(y, 4)
    sz, bz = _BASE_MUL[(bx, by)]
    return ((sx + sy + sz) % 2) * 4 + bz


I_UNIT, J_UNIT = 1, 2
NEG = 4  # index offset of -1


def right_mul(unit: int):
    return [qmul(q, unit) for q in range(8)]


H = right_mul(I_UNIT)            # right neighbor
V = right_mul(J_UNIT)            # top neighbor
H_INV = [H.index(q) for q in range(8)]


def check_origami():
    com = [H[V[H_INV[q]]] for q in range(8)]
    com = [None] * 8
    for q in range(8):
        # corner word h v h^-1 v^-1 acting by right multiplication
        w = qmul(qmul(qmul(I_UNIT, J_UNIT), qmul(NEG, I_UNIT)), qmul(NEG, J_UNIT))
        com[q] = qmul(q, w)
    cycles = set()
    seen = [False] * 8
    lens = []
    for q in range(8):
        if seen[q]:
            continue
        c = 0
        p = q
        while not seen[p]:
            seen[p] = True
            p = com[p]
            c += 1
        lens.append(c)
    assert sorted(lens) == [2, 2, 2, 2], f"corner cycles {lens}"
    print("origami check: 4 cone points of angle 4*pi (genus 3)  OK")


# -- first-return map by exact interval propagation --------------------------------


def first_return_iet():
    """Return map of the (-gamma, 1)-direction flow to the bottom edge of
    square 0, as (PermutationPair, lengths in QG)."""
    s0 = 0
    sq_up = V
    sq_left_up = [V[H_INV[q]] for q in range(8)]
    # piece: (cur_lo, cur_hi, square, delta); src = cur - delta
    active = [(QG(0), QG(1), s0, QG(0))]
    returned = []
    guard = 0
    while active:
        guard += 1
        assert guard < 100000
        lo, hi, sq, delta = active.pop()
        parts = []
        if lo < GAMMA and GAMMA < hi:
            parts = [(lo, GAMMA), (GAMMA, hi)]
        else:
            parts = [(lo, hi)]
        for plo, phi in parts:
            if plo >= GAMMA:
                nlo, nhi = plo - GAMMA, phi - GAMMA
                nsq = sq_up[sq]
                ndelta = delta - GAMMA
            else:
                nlo, nhi = plo + ONE - GAMMA, phi + ONE - GAMMA
                nsq = sq_left_up[sq]
                ndelta = delta + ONE - GAMMA
            if nsq == s0:
                returned.append((nlo - ndelta, nhi - ndelta, ndelta))
            else:
                active.append((nlo, nhi, nsq, ndelta))
    returned.sort(key=lambda t: float(t[0]))
    # verify tiling of the source
    total = QG(0)
    pos = QG(0)
    for slo, shi, _ in returned:
        assert slo == pos, "source gaps"
        pos = shi
        total = total + (shi - slo)
    assert total == ONE
    # merge contiguous pieces with equal translation
    merged = []
    for slo, shi, delta in returned:
        if merged and merged[-1][2] == delta and merged[-1][1] == slo:
            merged[-1] = (merged[-1][0], shi, delta)
        else:
            merged.append((slo, shi, delta))
    d = len(merged)
    print(f"return map has {d} intervals")
    letters = [chr(ord("A") + i) for i in range(d)]
    dests = sorted(range(d), key=lambda i: float(merged[i][0] + merged[i][2]))
    bottom_order = [letters[i] for i in dests]
    pi = PermutationPair.from_rows(letters, bottom_order)
    lengths = [shi - slo for (slo, shi, _) in merged]
    # destination must tile as well
    pos = QG(0)
    for i in dests:
        slo, shi, delta = merged[i]
        assert slo + delta == pos, "destination gaps"
        pos = shi + delta
    return pi, lengths


def main():
    check_origami()
    pi, lengths = first_return_iet()
    print("base return map:", pi)
    print("lengths:", [str(x) for x in lengths], [round(float(x), 6) for x in lengths])
    om = omega_matrix(pi)
    s = singularity_cycles(pi).s
    print(f"d={pi.d} g={om.genus} s={s}  (d = 2g+s-1: {pi.d == 2*om.genus + s - 1})")

    iet = Iet(pi, lengths)  # exact custom backend, tol 0
    states = {}
    cur = iet
    word = []
    n0 = n1 = None
    for n in range(4000):
        total = sum(cur.lengths, QG(0))
        state = (cur.pi, tuple(l / total for l in cur.lengths))
        if state in states:
            n0, n1 = states[state], n
            break
        states[state] = n
        nxt, _, st = elementary_step(cur)
        word.append(st.value)
        cur = nxt
    assert n0 is not None, "no periodicity found within depth"
    print(f"projective state repeats: n0={n0}, n1={n1}, period={n1-n0}")
    loop_word = "".join(word[n0:n1])

    # base permutation at level n0
    base = iet
    for _ in range(n0):
        base, _, _ = elementary_step(base)
    base_pi = base.pi
    print("loop base pi:", base_pi)
    print("loop word:", loop_word)

    # certify through the package
    loop = ss.loop_from_word(base_pi, loop_word, prec=320)
    val = ss.validate_loop(loop)
    print("loop validation:", val)
    om2 = omega_matrix(base_pi)
    s2 = singularity_cycles(base_pi).s
    print(f"loop invariants: d={base_pi.d} g={om2.genus} s={s2} "
          f"pf={loop.pf_eigenvalue:.6f} subdominant_ratio={loop.subdominant_ratio:.6f}")

    from ietkit.combinatorics import absolute_cycle_basis
    import numpy.linalg as la
    K = np.array(absolute_cycle_basis(base_pi), float).T
    M = np.array(loop.loop_matrix.rows, float)
    # spectrum restricted to the absolute block
    C = la.lstsq(K, M @ K, rcond=None)[0]
    evs = la.eigvals(C)
    moduli = sorted(np.abs(evs))
    print("absolute-block eigenvalue moduli:", [round(m, 8) for m in moduli])
    n_unit = sum(1 for m in moduli if abs(m - 1) < 1e-6)
    print(f"unit-modulus count in absolute block: {n_unit} (expect 4)")

    print("\nPaste into self_similar.py:")
    print(f'EW_BASE_PI = "{base_pi}"')
    print(f'EW_STEP_WORD = "{loop_word}"')


if __name__ == "__main__":
    main()
