"""Combinatorial data of interval exchanges.

A permutation pair is the pair of bijections (top, bottom) from a finite
alphabet onto {1..d}.  From it we derive the antisymmetric intersection
form, the genus, the singularity cycles and the Euler-type identity
d = 2g + s - 1 that ties them together.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

from . import intmat
from .errors import ReducibleError, StructuralError

L, R = "L", "R"


@dataclass(frozen=True)
class PermutationPair:
    """Pair of bijections alphabet -> {1..d}.

    ``letters`` fixes the canonical alphabet order once and for all;
    every matrix in the package is indexed in that order.
    """

    letters: tuple[str, ...]
    top: tuple[int, ...]     # top[i] = top position (1-based) of letters[i]
    bottom: tuple[int, ...]  # bottom[i] = bottom position of letters[i]

    def __post_init__(self):
        d = len(self.letters)
        if d < 2:
            raise StructuralError("need at least 2 letters")
        if len(set(self.letters)) != d:
            raise StructuralError("letters must be distinct")
        for name, ranks in (("top", self.top), ("bottom", self.bottom)):
            if sorted(ranks) != list(range(1, d + 1)):
                raise StructuralError(f"{name} row is not a bijection onto 1..{d}")

    # -- constructors ---------------------------------------------------

    @classmethod
    def from_rows(cls, top_row, bottom_row) -> "PermutationPair":
        """Build from the two reading orders, e.g. ("A","B"), ("B","A")."""
        top_row = tuple(str(x) for x in top_row)
        bottom_row = tuple(str(x) for x in bottom_row)
        if sorted(top_row) != sorted(bottom_row):
            raise StructuralError("rows use different alphabets")
        letters = top_row  # canonical order = top reading order
        pos_t = {a: i + 1 for i, a in enumerate(top_row)}
        pos_b = {a: i + 1 for i, a in enumerate(bottom_row)}
        if len(pos_b) != len(bottom_row):
            raise StructuralError("repeated letter in bottom row")
        return cls(letters, tuple(pos_t[a] for a in letters), tuple(pos_b[a] for a in letters))

    @classmethod
    def parse(cls, text: str) -> "PermutationPair":
        """Parse "A B C / C B A" (whitespace-separated rows)."""
        parts = text.split("/")
        if len(parts) != 2:
            raise StructuralError("expected 'top / bottom'")
        return cls.from_rows(parts[0].split(), parts[1].split())

    @classmethod
    def from_json(cls, data) -> "PermutationPair":
        if isinstance(data, str):
            data = json.loads(data)
        return cls.from_rows(data["top"], data["bottom"])

    # -- views -----------------------------------------------------------

    @property
    def d(self) -> int:
        return len(self.letters)

    def pi_t(self, letter: str) -> int:
        return self.top[self.letters.index(letter)]

    def pi_b(self, letter: str) -> int:
        return self.bottom[self.letters.index(letter)]

    def top_order(self) -> tuple[str, ...]:
        """Letters in top reading order."""
        return tuple(a for _, a in sorted(zip(self.top, self.letters)))

    def bottom_order(self) -> tuple[str, ...]:
        return tuple(a for _, a in sorted(zip(self.bottom, self.letters)))

    def top_letter_at(self, pos: int) -> str:
        return self.letters[self.top.index(pos)]

    def bottom_letter_at(self, pos: int) -> str:
        return self.letters[self.bottom.index(pos)]

    def swapped(self) -> "PermutationPair":
        """Exchange the roles of top and bottom (combinatorics of the inverse map)."""
        return PermutationPair(self.letters, self.bottom, self.top)

    def relabel(self, mapping: dict) -> "PermutationPair":
        return PermutationPair(tuple(str(mapping[a]) for a in self.letters), self.top, self.bottom)

    def is_irreducible(self) -> bool:
        return check_irreducible(self)

    def assert_irreducible(self):
        if not self.is_irreducible():
            raise ReducibleError(f"reducible combinatorial data: {self}")

    def __str__(self) -> str:
        return " ".join(self.top_order()) + " / " + " ".join(self.bottom_order())

    def to_json(self) -> dict:
        return {"top": list(self.top_order()), "bottom": list(self.bottom_order())}


def check_irreducible(pi: PermutationPair) -> bool:
    """True iff no proper prefix {1..k} is sent to itself by bottom∘top⁻¹."""
    d = pi.d
    for k in range(1, d):
        top_set = {a for a in pi.letters if pi.top[pi.letters.index(a)] <= k}
        bot_set = {a for a in pi.letters if pi.bottom[pi.letters.index(a)] <= k}
        if top_set == bot_set:
            return False
    return True


@dataclass(frozen=True)
class IntersectionForm:
    """Antisymmetric d x d integer matrix with entries in {-1,0,1}."""

    matrix: tuple
    rank: int

    @property
    def genus(self) -> int:
        return self.rank // 2


def omega_matrix(pi: PermutationPair) -> IntersectionForm:
    """Intersection form: +1 where top order increases but bottom order
    decreases, -1 in the mirror case, 0 otherwise.  Rank is computed
    exactly over the rationals (its parity carries the genus)."""
    pi.assert_irreducible()
    d = pi.d
    m = []
    for i in range(d):
        row = []
        for j in range(d):
            if pi.top[i] < pi.top[j] and pi.bottom[i] > pi.bottom[j]:
                row.append(1)
            elif pi.top[i] > pi.top[j] and pi.bottom[i] < pi.bottom[j]:
                row.append(-1)
            else:
                row.append(0)
        m.append(tuple(row))
    m = tuple(m)
    r = intmat.rank(m)
    if r % 2 != 0:
        raise AssertionError("intersection form rank must be even")
    return IntersectionForm(m, r)


@dataclass(frozen=True)
class SingularityStructure:
    """Permutation of the 2d marks (letter, L/R) and its cycles."""

    sigma: tuple          # tuple of ((letter, side), (letter, side)) pairs
    cycles: tuple         # tuple of cycles, each a tuple of marks

    @property
    def s(self) -> int:
        return len(self.cycles)

    def sigma_map(self) -> dict:
        return dict(self.sigma)


def _sigma_of(pi: PermutationPair):
    d = pi.d
    alpha_t = pi.top_letter_at(d)
    alpha_b = pi.bottom_letter_at(d)
    first_t = pi.top_letter_at(1)
    first_b = pi.bottom_letter_at(1)
    sigma = {}
    for a in pi.letters:
        # right mark: move to the next interval on the top, except at the
        # top's right end where we jump to the bottom's last letter.
        if a == alpha_t:
            sigma[(a, R)] = (alpha_b, R)
        else:
            sigma[(a, R)] = (pi.top_letter_at(pi.pi_t(a) + 1), L)
        # left mark: move to the previous interval on the bottom, except
        # at the bottom's left end where we jump to the top's first letter.
        if a == first_b:
            sigma[(a, L)] = (first_t, L)
        else:
            sigma[(a, L)] = (pi.bottom_letter_at(pi.pi_b(a) - 1), R)
    return sigma


def _mark_key(pi: PermutationPair):
    idx = {a: i for i, a in enumerate(pi.letters)}
    return lambda mark: (idx[mark[0]], 0 if mark[1] == L else 1)


def singularity_cycles(pi: PermutationPair) -> SingularityStructure:
    """Decompose the mark permutation into cycles; the cycle count s
    satisfies d = 2g + s - 1 against the intersection form's genus."""
    pi.assert_irreducible()
    sigma = _sigma_of(pi)
    key = _mark_key(pi)
    seen = set()
    cycles = []
    for mark in sorted(sigma, key=key):
        if mark in seen:
            continue
        cyc = [mark]
        seen.add(mark)
        nxt = sigma[mark]
        while nxt != mark:
            cyc.append(nxt)
            seen.add(nxt)
            nxt = sigma[nxt]
        cycles.append(tuple(cyc))
    cycles.sort(key=lambda c: key(c[0]))
    return SingularityStructure(tuple(sorted(sigma.items(), key=lambda kv: key(kv[0]))), tuple(cycles))


def epsilon(mark) -> int:
    """Sign of a mark: -1 on left endpoints, +1 on right endpoints."""
    return -1 if mark[1] == L else 1


def gamma_boundary_matrix(pi: PermutationPair):
    """Matrix of the boundary operator restricted to piecewise constants.

    Rows are indexed by singularity cycles (canonical order), columns by
    the canonical alphabet; the (C, a) entry is the signed count of the
    two marks of letter a inside cycle C.  Integer entries in {-1,0,1}.
    """
    sing = singularity_cycles(pi)
    idx = {a: i for i, a in enumerate(pi.letters)}
    rows = []
    for cyc in sing.cycles:
        row = [0] * pi.d
        for mark in cyc:
            row[idx[mark[0]]] += epsilon(mark)
        rows.append(tuple(row))
    return tuple(rows)


def absolute_cycle_basis(pi: PermutationPair):
    """Primitive integer basis of ker(boundary) inside piecewise constants.

    This 2g-dimensional space plays the role of the absolute homology of
    the suspended surface; the cocycle restricted to it drops the
    trivially-neutral relative directions.
    """
    return intmat.kernel_basis(gamma_boundary_matrix(pi))


def euler_identity_holds(pi: PermutationPair) -> bool:
    g = omega_matrix(pi).genus
    s = singularity_cycles(pi).s
    return pi.d == 2 * g + s - 1


def irreducible_bottom_rows(d: int):
    """All irreducible pairs with top row fixed to the first d letters.

    Genus, singularity data and the intersection form are invariant under
    relabeling, so these canonical representatives exhaust all invariant
    checks while keeping the sweep to d! candidates instead of (d!)^2.
    """
    letters = tuple("ABCDEFGHIJ"[:d])
    for perm in itertools.permutations(letters):
        pair = PermutationPair.from_rows(letters, perm)
        if pair.is_irreducible():
            yield pair
