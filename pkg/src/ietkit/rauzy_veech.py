"""Rauzy-Veech renormalization and the integer renormalization cocycle.

Each elementary step induces the map on the shorter interval obtained by
cutting whichever of the two rightmost intervals (top or bottom) is the
shorter one.  The integer matrices attached to the steps are kept exact
(arbitrary-precision ints); products along a path satisfy the cocycle
relation with equality, not tolerance.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field

from . import backends, intmat
from .backends import working_precision
from .combinatorics import PermutationPair
from .errors import ConnectionError_, DepthError, StructuralError
from .iet_core import Iet


class StepType(enum.Enum):
    # named after the row whose last interval gets cut
    TOP = "T"
    BOTTOM = "B"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class KzMatrix:
    """Unimodular nonnegative integer matrix of the renormalization cocycle."""

    rows: tuple

    def __post_init__(self):
        if not intmat.is_nonnegative(self.rows):
            raise StructuralError("cocycle matrices must be nonnegative")

    @property
    def det(self) -> int:
        return intmat.det_bareiss(self.rows)

    def validate(self) -> "KzMatrix":
        if self.det != 1:
            raise StructuralError("cocycle matrix must have determinant 1")
        return self

    def norm(self) -> int:
        return intmat.entry_sum(self.rows)

    def __matmul__(self, other: "KzMatrix") -> "KzMatrix":
        return KzMatrix(intmat.mat_mul(self.rows, other.rows))


def step_permutation(pi: PermutationPair, step_type: StepType) -> PermutationPair:
    """Combinatorial part of an elementary step (no lengths needed).

    Cutting the top's last interval reinserts its letter into the top row
    right after the bottom's last letter; the mirror move cuts the
    bottom's last interval.
    """
    d = pi.d
    alpha_t = pi.top_letter_at(d)
    alpha_b = pi.bottom_letter_at(d)
    if step_type is StepType.TOP:
        order = [a for a in pi.top_order() if a != alpha_t]
        order.insert(order.index(alpha_b) + 1, alpha_t)
        return PermutationPair(
            pi.letters,
            tuple(order.index(a) + 1 for a in pi.letters),
            pi.bottom,
        )
    order = [a for a in pi.bottom_order() if a != alpha_b]
    order.insert(order.index(alpha_t) + 1, alpha_b)
    return PermutationPair(
        pi.letters,
        pi.top,
        tuple(order.index(a) + 1 for a in pi.letters),
    )


def elementary_matrix_indices(pi: PermutationPair, step_type: StepType) -> tuple[int, int]:
    """(row, col) of the off-diagonal unit in the elementary cocycle matrix."""
    i_t = pi.letters.index(pi.top_letter_at(pi.d))
    i_b = pi.letters.index(pi.bottom_letter_at(pi.d))
    return (i_t, i_b) if step_type is StepType.TOP else (i_b, i_t)


def elementary_step(iet: Iet):
    """One renormalization step.

    Returns (induced map on the shortened interval, elementary matrix,
    step type).  A tie between the two rightmost break points means the
    algorithm halts on a connection.
    """
    pi = iet.pi
    d = pi.d
    with working_precision(iet.prec):
        u = iet.top_singularities()[-1]
        v = iet.bottom_singularities()[-1]
        if abs(u - v) <= iet.tol:
            raise ConnectionError_(f"tie u_{d-1} = v_{d-1} = {u}; renormalization halts")
        step_type = StepType.TOP if u > v else StepType.BOTTOM
        alpha_t = pi.top_letter_at(d)
        alpha_b = pi.bottom_letter_at(d)
        by_letter = dict(zip(pi.letters, iet.lengths))
        if step_type is StepType.TOP:
            by_letter[alpha_b] = by_letter[alpha_b] - by_letter[alpha_t]
        else:
            by_letter[alpha_t] = by_letter[alpha_t] - by_letter[alpha_b]
        new_pi = step_permutation(pi, step_type)
        new_lengths = tuple(by_letter[a] for a in pi.letters)
        induced = Iet(new_pi, new_lengths, iet.left, iet.prec, iet.tol)
    matrix = KzMatrix(intmat.elementary(d, *elementary_matrix_indices(pi, step_type)))
    return induced, matrix, step_type


@dataclass(frozen=True)
class PathStep:
    step_type: StepType
    elem: tuple[int, int]        # off-diagonal unit of the elementary matrix
    pi: PermutationPair          # combinatorics after the step
    lengths: tuple               # lengths after the step


@dataclass(frozen=True)
class AccelerationData:
    """Times 0 = n_0 < n_1 < ... at which the windowed cocycle product
    first becomes strictly positive, with the window matrices."""

    times: tuple
    windows: tuple               # windows[k] = product over (n_k, n_{k+1}), int rows
    truncated: bool              # path ended inside an incomplete window

    def __len__(self):
        return len(self.times)


class CocyclePath:
    """A finite Rauzy-Veech orbit with its exact cocycle.

    Products B(m, n) are computed lazily by balanced multiplication over
    the step list; the prefix products at acceleration times are
    memoized (entries grow exponentially, memoizing every prefix would
    be quadratic in memory).
    """

    def __init__(self, initial: Iet, steps: list[PathStep]):
        self.initial = initial
        self.steps = list(steps)
        self._prefix_cache: dict[int, tuple] = {}
        self._acc: AccelerationData | None = None
        self._iet_cache: dict[int, Iet] = {0: initial}

    @property
    def depth(self) -> int:
        return len(self.steps)

    @property
    def d(self) -> int:
        return self.initial.d

    def pi_at(self, n: int) -> PermutationPair:
        return self.initial.pi if n == 0 else self.steps[n - 1].pi

    def lengths_at(self, n: int) -> tuple:
        return self.initial.lengths if n == 0 else self.steps[n - 1].lengths

    def iet_at(self, n: int) -> Iet:
        if n not in self._iet_cache:
            self._iet_cache[n] = Iet(
                self.pi_at(n), self.lengths_at(n), self.initial.left,
                self.initial.prec, self.initial.tol,
            )
        return self._iet_cache[n]

    def step_types(self) -> tuple[StepType, ...]:
        return tuple(s.step_type for s in self.steps)

    # -- exact products ----------------------------------------------------

    def _elem(self, k: int):
        d = self.d
        return intmat.elementary(d, *self.steps[k].elem)

    def _product(self, m: int, n: int):
        if m == n:
            return intmat.identity(self.d)
        if n - m == 1:
            return self._elem(m)
        mid = (m + n) // 2
        return intmat.mat_mul(self._product(mid, n), self._product(m, mid))

    def matrix(self, m: int, n: int) -> KzMatrix:
        """Exact cocycle product B(m, n), m <= n."""
        if not 0 <= m <= n <= self.depth:
            raise DepthError(f"need 0 <= {m} <= {n} <= depth {self.depth}")
        if m == 0:
            acc_set = set(self.acceleration().times)
            if n in acc_set or n == self.depth:
                if n not in self._prefix_cache:
                    self._prefix_cache[n] = self._product(0, n)
                return KzMatrix(self._prefix_cache[n])
        return KzMatrix(self._product(m, n))

    # -- acceleration --------------------------------------------------------

    def acceleration(self) -> AccelerationData:
        """Positivity times: each next time is the first at which the
        windowed product has all entries positive; minimality is certified
        by the previous product having had a zero entry."""
        if self._acc is None:
            times = [0]
            windows = []
            w = intmat.identity(self.d)
            for k in range(self.depth):
                prev_had_zero = not intmat.is_positive(w)
                w = intmat.mat_mul(self._elem(k), w)
                if intmat.is_positive(w):
                    assert prev_had_zero  # certifies minimality of this time
                    times.append(k + 1)
                    windows.append(w)
                    w = intmat.identity(self.d)
            truncated = times[-1] < self.depth
            self._acc = AccelerationData(tuple(times), tuple(windows), truncated)
        return self._acc

    def acceleration_times(self) -> tuple:
        return self.acceleration().times

    # -- dynamics helpers ------------------------------------------------------

    def visits(self, m: int, n: int, alpha_idx: int, x=None, max_steps: int = 10**6):
        """Visit itinerary of the level-n interval ``alpha_idx`` under the
        level-m map: list of (beta index at level m, translation offset)
        until the first return to the level-n interval.

        Exactness is inherited from the backend: offsets are backend
        numbers, valid for the whole subinterval by the tower property.
        """
        src = self.iet_at(m)
        tgt = self.iet_at(n)
        with working_precision(self.initial.prec):
            if x is None:
                a, b = tgt.interval(tgt.pi.letters[alpha_idx])
                x = (a + b) / 2
            right = tgt.endpoints()[1]
            x0 = x
            out = [(src.top_index_of(x), x - x0)]
            x = src.evaluate(x)
            steps = 1
            while not x < right:
                out.append((src.top_index_of(x), x - x0))
                x = src.evaluate(x)
                steps += 1
                if steps > max_steps:
                    raise DepthError("visit itinerary exceeded max_steps")
        return out

    def export_jsonl(self, fp):
        """One JSON record per step; window matrices only at acceleration
        times (decimal integer strings)."""
        acc = self.acceleration()
        at = {t: k for k, t in enumerate(acc.times) if k > 0}
        prec = self.initial.prec
        for idx in range(1, self.depth + 1):
            rec = {
                "index": idx,
                "type": str(self.steps[idx - 1].step_type),
                "lengths": [backends.num_to_str(x, prec) for x in self.lengths_at(idx)],
            }
            if idx in at:
                w = acc.windows[at[idx] - 1]
                rec["matrix"] = [[str(e) for e in row] for row in w]
            fp.write(json.dumps(rec, sort_keys=True) + "\n")


def iterate(iet: Iet, depth: int) -> CocyclePath:
    """Run ``depth`` elementary steps; a tie raises with the step index."""
    if depth < 0:
        raise StructuralError("depth must be >= 0")
    steps = []
    cur = iet
    for k in range(depth):
        try:
            nxt, mat, st = elementary_step(cur)
        except ConnectionError_ as e:
            raise ConnectionError_(f"connection at step {k}: {e}", step=k) from e
        elem = elementary_matrix_indices(cur.pi, st)
        steps.append(PathStep(st, elem, nxt.pi, nxt.lengths))
        cur = nxt
    return CocyclePath(iet, steps)


def visit_count_check(path: CocyclePath, m: int, n: int, rng=None) -> bool:
    """Cross-check the cocycle matrix against brute-force orbit counts.

    For each level-n interval, iterate the level-m map to first return
    and count visits to each level-m interval; True iff every count
    equals the corresponding exact matrix entry.
    """
    B = path.matrix(m, n).rows
    d = path.d
    tgt = path.iet_at(n)
    with working_precision(path.initial.prec):
        for alpha in range(d):
            a, b = tgt.interval(tgt.pi.letters[alpha])
            if rng is None:
                x = (a + b) / 2
            else:
                t = rng.random()
                x = a + (b - a) * (t * 0.8 + 0.1)
            counts = [0] * d
            for beta, _ in path.visits(m, n, alpha, x=x):
                counts[beta] += 1
            if tuple(counts) != tuple(B[alpha]):
                return False
    return True


def balanced_inequality(path: CocyclePath, n: int):
    """(max length, |I| / ||B(0,n)||, min length) at level n — the exact
    per-step balance sandwich for the entrywise-sum norm."""
    with working_precision(path.initial.prec):
        lens = path.lengths_at(n)
        total = sum(path.initial.lengths)
        mid = total / path.matrix(0, n).norm()
        return max(lens), mid, min(lens)
