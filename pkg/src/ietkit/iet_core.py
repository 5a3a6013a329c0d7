"""Concrete interval exchange transformations.

An ``Iet`` bundles a permutation pair with positive interval lengths and
a left endpoint.  Evaluation, orbits, Birkhoff sums and connection
detection live here; renormalization lives in ``rauzy_veech``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction

from . import backends
from .backends import EXACT_CUSTOM, FLOAT, RATIONAL, working_precision
from .combinatorics import PermutationPair
from .errors import DomainError, SingularityError, StructuralError


@dataclass(frozen=True)
class ConnectionWitness:
    """A forward orbit of a bottom singularity hitting a top singularity."""

    k: int
    l: int
    m: int
    residual: object


class Iet:
    """Interval exchange map: piecewise translation determined by
    (permutation pair, length vector, left endpoint).

    Immutable after construction; safe to share across threads.
    """

    def __init__(self, pi: PermutationPair, lengths, left=0, prec=None, tol=None):
        pi.assert_irreducible()
        backend = backends.infer_backend(tuple(lengths))
        if backend == FLOAT:
            prec = prec or backends.DEFAULT_PREC
        lengths = backends.coerce(lengths, backend, prec)
        if len(lengths) != pi.d:
            raise StructuralError("one length per letter required")
        if not all(x > 0 for x in lengths):
            raise StructuralError("lengths must be positive")
        if backend == FLOAT:
            with working_precision(prec):
                left = backends.coerce([left], backend, prec)[0]
        elif backend == RATIONAL:
            left = Fraction(left)
        self.pi = pi
        self.lengths = tuple(lengths)
        self.left = left
        self.backend = backend
        self.prec = prec
        self.tol = tol if tol is not None else backends.default_tolerance(backend, prec)
        self._build()

    def _build(self):
        with working_precision(self.prec):
            by_letter = dict(zip(self.pi.letters, self.lengths))
            u = [self.left]
            for a in self.pi.top_order():
                u.append(u[-1] + by_letter[a])
            v = [self.left]
            for a in self.pi.bottom_order():
                v.append(v[-1] + by_letter[a])
            self._u = tuple(u)  # u[0] < u[1] < ... < u[d]
            self._v = tuple(v)
            top_start = {a: u[i] for i, a in enumerate(self.pi.top_order())}
            bot_start = {a: v[i] for i, a in enumerate(self.pi.bottom_order())}
            self._translation = tuple(
                bot_start[a] - top_start[a] for a in self.pi.letters
            )
            self._top_start = tuple(top_start[a] for a in self.pi.letters)

    # -- geometry ---------------------------------------------------------

    @property
    def d(self) -> int:
        return self.pi.d

    def total_length(self):
        return self._u[-1] - self._u[0]

    def top_singularities(self):
        """Interior break points u_1 < ... < u_{d-1} of the map."""
        return self._u[1:-1]

    def bottom_singularities(self):
        """Interior break points v_1 < ... < v_{d-1} of the inverse map."""
        return self._v[1:-1]

    def endpoints(self):
        return self._u[0], self._u[-1]

    def interval(self, letter: str):
        """Closure endpoints [a, b] of the top interval of ``letter``."""
        i = self.pi.letters.index(letter)
        by_letter = dict(zip(self.pi.letters, self.lengths))
        return self._top_start[i], self._top_start[i] + by_letter[letter]

    def translation(self, letter: str):
        return self._translation[self.pi.letters.index(letter)]

    def top_index_of(self, x) -> int:
        """Canonical-alphabet index of the top interval containing x.

        Points within ``tol`` of an interior singularity (or outside the
        interval) are domain errors: translation surfaces have one-sided
        limits only, callers must perturb explicitly.
        """
        u = self._u
        if x < u[0] or x > u[-1] or abs(x - u[0]) <= self.tol or abs(x - u[-1]) <= self.tol:
            raise DomainError(f"point {x} outside the open interval", point=x)
        lo, hi = 0, len(u) - 1
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if x < u[mid]:
                hi = mid
            else:
                lo = mid
        for i in (lo, lo + 1):
            if 0 < i < len(u) - 1 and abs(x - u[i]) <= self.tol:
                raise SingularityError(f"point {x} at singularity u_{i}", point=x)
        letter = self.pi.top_order()[lo]
        return self.pi.letters.index(letter)

    def evaluate(self, x):
        """Apply the exchange: translate x by the offset of its interval."""
        with working_precision(self.prec):
            return x + self._translation[self.top_index_of(x)]

    def __call__(self, x):
        return self.evaluate(x)

    def inverse(self) -> "Iet":
        """The inverse exchange (top and bottom rows swapped)."""
        return Iet(self.pi.swapped(), self.lengths, self.left, self.prec, self.tol)

    def normalized(self, total=1) -> "Iet":
        with working_precision(self.prec):
            scale = total / self.total_length()
            return Iet(self.pi, tuple(x * scale for x in self.lengths), 0, self.prec)

    # -- dynamics ---------------------------------------------------------

    def orbit(self, x, n: int):
        """Yield x, T(x), ..., T^{n-1}(x); raises if a singularity is hit."""
        with working_precision(self.prec):
            for _ in range(n):
                yield x
                x = self.evaluate(x)

    def iterate(self, x, n: int):
        with working_precision(self.prec):
            for _ in range(n):
                x = self.evaluate(x)
            return x

    def to_json(self) -> dict:
        return {
            "pi": self.pi.to_json(),
            "lengths": [backends.num_to_str(x, self.prec) for x in self.lengths],
            "left": backends.num_to_str(self.left, self.prec),
            "backend": backends.backend_tag(self.backend, self.prec),
        }

    def dump(self) -> str:
        return json.dumps(self.to_json(), indent=1, sort_keys=True)

    @classmethod
    def from_json(cls, data) -> "Iet":
        if isinstance(data, str):
            data = json.loads(data)
        backend, prec = backends.parse_backend_tag(data["backend"])
        lengths = [backends.num_from_str(s, backend, prec) for s in data["lengths"]]
        left = backends.num_from_str(data.get("left", "0"), backend, prec)
        return cls(PermutationPair.from_json(data["pi"]), lengths, left, prec)

    def __repr__(self):
        ls = ", ".join(backends.num_to_str(x, 53) if self.backend == FLOAT else str(x)
                       for x in self.lengths)
        return f"Iet({self.pi}; lengths=({ls}))"


def birkhoff_sum(iet: Iet, phi, x, n: int):
    """Sum phi over the first n points of the orbit of x.

    ``phi`` may be a callable or anything with an ``eval`` method (a
    piecewise function).  Errors identify the failing orbit step.
    """
    f = phi.eval if hasattr(phi, "eval") else phi
    total = 0.0
    with working_precision(iet.prec):
        for j in range(n):
            try:
                total += f(x)
                x = iet.evaluate(x)
            except DomainError as e:
                raise DomainError(f"orbit hit a singularity at step {j}", point=x) from e
    return total


def detect_connection(iet: Iet, max_m: int, tol=None):
    """Search for T^m(v_l) = u_k up to depth max_m within tolerance.

    Returns the first witness in (m, l, k) lexicographic order, or None.
    A None answer means "none found up to depth max_m", never a proof of
    minimality.
    """
    if tol is None:
        tol = iet.tol if iet.backend == FLOAT else 0
    if max_m < 0:
        raise StructuralError("max_m must be >= 0")
    with working_precision(iet.prec):
        us = iet.top_singularities()
        points = list(iet.bottom_singularities())
        alive = [True] * len(points)
        for m in range(max_m + 1):
            for li, p in enumerate(points):
                if not alive[li]:
                    continue
                for ki, u in enumerate(us):
                    if abs(p - u) <= tol:
                        return ConnectionWitness(k=ki + 1, l=li + 1, m=m, residual=abs(p - u))
            if m == max_m:
                break
            for li, p in enumerate(points):
                if not alive[li]:
                    continue
                try:
                    points[li] = iet.evaluate(p)
                except DomainError:
                    alive[li] = False  # orbit left the open domain; cannot continue it
    return None
