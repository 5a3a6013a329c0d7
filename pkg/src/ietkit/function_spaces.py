"""Piecewise functions on the top intervals and the boundary operator.

A ``PiecewiseFunction`` stores, per interval, an exact polynomial part
in the centered local coordinate t in [-1/2, 1/2] (x = a + (t+1/2)*len)
plus an optional uniformly-sampled remainder with a tracked error
bound.  Solver-critical paths use the polynomial parts exactly and only
bound the sampled remainder.

Piecewise-constant vectors (one value per letter, canonical alphabet
order) are plain numpy arrays throughout the package.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from numpy.polynomial import polynomial as P

from . import backends, intmat
from .backends import working_precision
from .combinatorics import (
    PermutationPair, SingularityStructure, epsilon, gamma_boundary_matrix,
    omega_matrix, singularity_cycles,
)
from .errors import ConsistencyError, DegreeError, DomainError, StructuralError
from .iet_core import Iet


def affine_compose(coeffs, u: float, v: float):
    """Coefficients of p(u*t + v) from coefficients of p (low-to-high), by Horner."""
    aff = np.array([v, u])
    res = np.array([0.0])
    for c in np.asarray(coeffs, dtype=float)[::-1]:
        res = P.polyadd(P.polymul(res, aff), [c])
    return res


def _trim(coeffs) -> np.ndarray:
    """Drop trailing coefficients that cannot affect values on [-1/2, 1/2]."""
    c = np.asarray(coeffs, dtype=float)
    scale = float(np.max(np.abs(c))) if c.size else 0.0
    if scale == 0.0:
        return np.zeros(1)
    keep = c.size
    while keep > 1 and abs(c[keep - 1]) < 1e-15 * scale:
        keep -= 1
    return c[:keep]


def _critical_points(coeffs, lo, hi):
    der = P.polyder(coeffs)
    der = _trim(der)
    if der.size <= 1:
        return []
    try:
        roots = P.polyroots(der)
    except Exception:
        return list(np.linspace(lo, hi, 4 * coeffs.size)[1:-1])
    return [r.real for r in roots if abs(r.imag) < 1e-10 and lo <= r.real <= hi]


def poly_sup(coeffs, lo=-0.5, hi=0.5) -> float:
    """Exact (by formula) sup of |p| on [lo, hi]: endpoints + critical points."""
    coeffs = _trim(coeffs)
    if coeffs.size == 0:
        return 0.0
    cand = [lo, hi] + _critical_points(coeffs, lo, hi)
    return float(max(abs(P.polyval(c, coeffs)) for c in cand))


def poly_total_variation(coeffs, lo=-0.5, hi=0.5) -> float:
    """Total variation of p on [lo, hi] via its monotonicity intervals."""
    coeffs = _trim(coeffs)
    if coeffs.size <= 1:
        return 0.0
    pts = sorted(set([lo, hi] + [t for t in _critical_points(coeffs, lo, hi)
                                 if lo < t < hi]))
    vals = [P.polyval(t, coeffs) for t in pts]
    return float(sum(abs(b - a) for a, b in zip(vals, vals[1:])))


class PiecewiseFunction:
    """Function on the disjoint union of the top intervals of an exchange."""

    def __init__(self, iet: Iet, coeffs, samples=None, sample_err: float = 0.0):
        self.iet = iet
        self.coeffs = [np.atleast_1d(np.asarray(c, dtype=float)) for c in coeffs]
        if len(self.coeffs) != iet.d:
            raise StructuralError("one coefficient list per interval required")
        self.samples = None if samples is None else [np.asarray(s, float) for s in samples]
        if self.samples is not None and any(s.size < 2 for s in self.samples):
            raise StructuralError("sampled parts need at least 2 grid points")
        self.sample_err = float(sample_err)

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, iet: Iet) -> "PiecewiseFunction":
        return cls(iet, [np.zeros(1) for _ in range(iet.d)])

    @classmethod
    def from_constants(cls, iet: Iet, values) -> "PiecewiseFunction":
        values = np.asarray(values, dtype=float)
        return cls(iet, [np.array([v]) for v in values])

    @classmethod
    def from_global_poly(cls, iet: Iet, global_coeffs) -> "PiecewiseFunction":
        """Restrict one global polynomial (coeffs in x, low-to-high)."""
        cs = []
        with working_precision(iet.prec):
            for a in iet.pi.letters:
                lo, hi = iet.interval(a)
                ell = backends.to_float(hi - lo)
                a0 = backends.to_float(lo)
                # x = a0 + (t + 1/2) ell
                cs.append(affine_compose(np.asarray(global_coeffs, float), ell, a0 + 0.5 * ell))
        return cls(iet, cs)

    @classmethod
    def from_callable(cls, f, iet: Iet, degree: int = 24) -> "PiecewiseFunction":
        """Least-squares polynomial fit per interval on Chebyshev nodes.

        Suitable for analytic inputs; the attained fit residual is stored
        in ``sample_err`` as an evaluation error bound.
        """
        cs = []
        worst = 0.0
        with working_precision(iet.prec):
            for a in iet.pi.letters:
                lo, hi = iet.interval(a)
                lo = backends.to_float(lo)
                hi = backends.to_float(hi)
                nodes = np.cos(np.pi * (np.arange(4 * degree) + 0.5) / (4 * degree))
                xs = lo + (nodes + 1) / 2 * (hi - lo)
                ys = np.array([f(x) for x in xs])
                fit = np.polynomial.Polynomial.fit(xs, ys, degree, domain=[lo, hi],
                                                   window=[-0.5, 0.5])
                cs.append(fit.coef)
                worst = max(worst, float(np.max(np.abs(fit(xs) - ys))))
        out = cls(iet, cs)
        out.sample_err = worst
        return out

    # -- evaluation ---------------------------------------------------------

    def local_coord(self, alpha: int, x) -> float:
        a = self.iet.pi.letters[alpha]
        with working_precision(self.iet.prec):
            lo, hi = self.iet.interval(a)
            return backends.to_float((x - lo) / (hi - lo)) - 0.5

    def eval_local(self, alpha: int, t: float) -> float:
        val = float(P.polyval(t, self.coeffs[alpha]))
        if self.samples is not None:
            s = self.samples[alpha]
            val += float(np.interp(t, np.linspace(-0.5, 0.5, s.size), s))
        return val

    def eval(self, x) -> float:
        alpha = self.iet.top_index_of(x)
        return self.eval_local(alpha, self.local_coord(alpha, x))

    __call__ = eval

    def left_limit(self, alpha: int) -> float:
        v = self.eval_local(alpha, -0.5)
        if not math.isfinite(v):
            raise DomainError(f"undefined left limit on interval {alpha}")
        return v

    def right_limit(self, alpha: int) -> float:
        v = self.eval_local(alpha, 0.5)
        if not math.isfinite(v):
            raise DomainError(f"undefined right limit on interval {alpha}")
        return v

    # -- calculus -----------------------------------------------------------

    def _lengths_float(self):
        with working_precision(self.iet.prec):
            return [backends.to_float(l) for l in self.iet.lengths]

    def derivative(self) -> "PiecewiseFunction":
        """d/dx; exact on polynomial parts, finite differences on samples."""
        ells = self._lengths_float()
        cs = []
        for c, ell in zip(self.coeffs, ells):
            if c.size <= 1:
                cs.append(np.zeros(1))
            else:
                cs.append(P.polyder(c) / ell)
        samples = None
        err = self.sample_err
        if self.samples is not None:
            samples = []
            for s, ell in zip(self.samples, ells):
                h = ell / (s.size - 1)
                samples.append(np.gradient(s, h))
                err = err / h + h  # first-order bound; callers treat as heuristic
        out = PiecewiseFunction(self.iet, cs, samples, err)
        return out

    def primitive_zero_mean(self) -> "PiecewiseFunction":
        """Antiderivative in x with zero mean on every interval (polynomial
        parts only; raises if a sampled part is present)."""
        if self.samples is not None:
            raise DegreeError("primitive requires a polynomial-only representation")
        ells = self._lengths_float()
        cs = []
        for c, ell in zip(self.coeffs, ells):
            F = P.polyint(c) * ell            # d/dt antiderivative scaled to x
            # only even powers contribute to the mean on [-1/2, 1/2]
            mean = sum(F[k] / (k + 1) * (0.5 ** k) for k in range(2, F.size, 2))
            F[0] = -mean
            cs.append(F)
        return PiecewiseFunction(self.iet, cs)

    def integral(self) -> float:
        ells = self._lengths_float()
        tot = 0.0
        for alpha, (c, ell) in enumerate(zip(self.coeffs, ells)):
            tot += ell * sum(c[k] / (k + 1) * (0.5 ** k) for k in range(0, c.size, 2))
            if self.samples is not None:
                s = self.samples[alpha]
                tot += ell * float(np.trapezoid(s, dx=1.0 / (s.size - 1)))
        return tot

    def per_interval_means(self) -> np.ndarray:
        ells = self._lengths_float()
        out = np.zeros(self.iet.d)
        for alpha, (c, ell) in enumerate(zip(self.coeffs, ells)):
            out[alpha] = sum(c[k] / (k + 1) * (0.5 ** k) for k in range(0, c.size, 2))
            if self.samples is not None:
                s = self.samples[alpha]
                out[alpha] += float(np.trapezoid(s, dx=1.0 / (s.size - 1)))
        return out

    def sup_norm(self) -> float:
        """Sup of the stored representation (exact on polynomial parts);
        the sampled-remainder error bound is tracked separately in
        ``sample_err`` and added by ``sup_bound``."""
        worst = 0.0
        for alpha, c in enumerate(self.coeffs):
            if self.samples is None:
                worst = max(worst, poly_sup(c))
            else:
                s = self.samples[alpha]
                grid = np.linspace(-0.5, 0.5, max(s.size, 64))
                vals = P.polyval(grid, c) + np.interp(grid, np.linspace(-0.5, 0.5, s.size), s)
                worst = max(worst, float(np.max(np.abs(vals))))
        return worst

    def sup_bound(self) -> float:
        """Certified upper bound: representation sup plus the error bound."""
        return self.sup_norm() + self.sample_err

    # -- algebra --------------------------------------------------------------

    def _check_same_domain(self, other: "PiecewiseFunction"):
        if self.iet is not other.iet and self.iet.pi != other.iet.pi:
            raise StructuralError("piecewise functions live on different exchanges")

    def __add__(self, other):
        if isinstance(other, PiecewiseFunction):
            self._check_same_domain(other)
            cs = [P.polyadd(a, b) for a, b in zip(self.coeffs, other.coeffs)]
            samples, err = _merge_samples(self, other, +1)
            return PiecewiseFunction(self.iet, cs, samples, err)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, PiecewiseFunction):
            self._check_same_domain(other)
            cs = [P.polysub(a, b) for a, b in zip(self.coeffs, other.coeffs)]
            samples, err = _merge_samples(self, other, -1)
            return PiecewiseFunction(self.iet, cs, samples, err)
        return NotImplemented

    def __mul__(self, scalar):
        cs = [c * float(scalar) for c in self.coeffs]
        samples = None if self.samples is None else [s * float(scalar) for s in self.samples]
        return PiecewiseFunction(self.iet, cs, samples, abs(float(scalar)) * self.sample_err)

    __rmul__ = __mul__

    def __neg__(self):
        return self * (-1.0)

    def shift_constants(self, values) -> "PiecewiseFunction":
        """Subtract a piecewise-constant vector (canonical order)."""
        values = np.asarray(values, float)
        cs = [P.polysub(c, [v]) for c, v in zip(self.coeffs, values)]
        return PiecewiseFunction(self.iet, cs, self.samples, self.sample_err)

    def max_degree(self) -> int:
        return max(c.size - 1 for c in self.coeffs)

    def to_json(self) -> dict:
        recs = []
        for alpha in range(self.iet.d):
            rec = {"poly": [repr(float(c)) for c in self.coeffs[alpha]]}
            if self.samples is not None:
                rec["samples"] = [float(v) for v in self.samples[alpha]]
                rec["grid"] = int(self.samples[alpha].size)
            recs.append(rec)
        return {"intervals": recs, "sample_err": self.sample_err}

    @classmethod
    def from_json(cls, iet: Iet, data) -> "PiecewiseFunction":
        if isinstance(data, str):
            data = json.loads(data)
        cs = [np.array([float(x) for x in rec["poly"]]) for rec in data["intervals"]]
        samples = None
        if any("samples" in rec for rec in data["intervals"]):
            samples = [np.asarray(rec.get("samples", [0.0, 0.0]), float) for rec in data["intervals"]]
        return cls(iet, cs, samples, float(data.get("sample_err", 0.0)))


def _merge_samples(f: PiecewiseFunction, g: PiecewiseFunction, sign: int):
    if f.samples is None and g.samples is None:
        return None, f.sample_err + g.sample_err
    out = []
    for alpha in range(f.iet.d):
        sf = f.samples[alpha] if f.samples is not None else np.zeros(2)
        sg = g.samples[alpha] if g.samples is not None else np.zeros(2)
        n = max(sf.size, sg.size)
        grid = np.linspace(-0.5, 0.5, n)
        vf = np.interp(grid, np.linspace(-0.5, 0.5, sf.size), sf)
        vg = np.interp(grid, np.linspace(-0.5, 0.5, sg.size), sg)
        out.append(vf + sign * vg)
    return out, f.sample_err + g.sample_err


# -- boundary operator ---------------------------------------------------------


def boundary(phi, sing: SingularityStructure) -> np.ndarray:
    """Signed sums of one-sided limits over the singularity cycles.

    ``phi`` is a PiecewiseFunction or a piecewise-constant vector; the
    output is indexed by the canonical cycle order.
    """
    if not isinstance(phi, PiecewiseFunction):
        raise StructuralError(
            "boundary expects a PiecewiseFunction; for piecewise-constant "
            "vectors use boundary_vector(pi, chi)"
        )
    letters = phi.iet.pi.letters
    idx = {a: i for i, a in enumerate(letters)}
    out = np.zeros(len(sing.cycles))
    for ci, cyc in enumerate(sing.cycles):
        tot = 0.0
        for mark in cyc:
            alpha = idx[mark[0]]
            val = phi.left_limit(alpha) if mark[1] == "L" else phi.right_limit(alpha)
            tot += epsilon(mark) * val
        out[ci] = tot
    return out


def boundary_vector(pi: PermutationPair, chi) -> np.ndarray:
    """Boundary of a piecewise-constant vector (exact integer matrix)."""
    M = np.array(gamma_boundary_matrix(pi), dtype=float)
    return M @ np.asarray(chi, dtype=float)


def bv_seminorm(phi: PiecewiseFunction, order: int = 0) -> float:
    """Total variation of the order-th derivative, summed over intervals.

    Exact (by formula) on polynomial parts; grid sums plus the stored
    error bound on sampled parts.
    """
    if order < 0:
        raise DegreeError("order must be >= 0")
    f = phi
    for _ in range(order):
        if f.max_degree() == 0 and f.samples is None:
            f = PiecewiseFunction.zero(f.iet)
            break
        f = f.derivative()
    tot = 0.0
    for alpha in range(f.iet.d):
        tot += poly_total_variation(f.coeffs[alpha])
        if f.samples is not None:
            s = f.samples[alpha]
            tot += float(np.sum(np.abs(np.diff(s)))) + f.sample_err
    return tot


# -- polynomial spaces and their dimensions ------------------------------------


def _boundary_constraint_matrix(pi: PermutationPair, r: int, lengths=None):
    """Matrix of chi -> (boundary of the i-th derivative, i < r) on the
    coefficient space of piecewise polynomials of degree < r.

    With ``lengths=None`` the intervals are taken of unit length and all
    entries are exact rationals; the kernel dimension is length-independent.
    """
    sing = singularity_cycles(pi)
    d = pi.d
    idx = {a: i for i, a in enumerate(pi.letters)}
    exact = lengths is None
    if exact:
        ells = [Fraction(1)] * d
        half = Fraction(1, 2)
        zero = Fraction(0)
    else:
        ells = [float(l) for l in lengths]
        half = 0.5
        zero = 0.0
    rows = []
    for i in range(r):
        for cyc in sing.cycles:
            row = [zero] * (d * r)
            for mark in cyc:
                alpha = idx[mark[0]]
                side = -half if mark[1] == "L" else half
                e = epsilon(mark)
                for k in range(i, r):
                    fall = math.perm(k, i)
                    if exact:
                        row[alpha * r + k] += e * fall * side ** (k - i)
                    else:
                        row[alpha * r + k] += e * fall * side ** (k - i) / ells[alpha] ** i
            rows.append(tuple(row))
    return tuple(rows)


def poly_space_dims(pi: PermutationPair, mu: int, r: int):
    """Dimensions (full, boundary-kernel, coboundary) of the degree-<r
    piecewise-polynomial spaces: (r*d, (2g-1)*r + 1, mu + r - 1).

    The middle value is additionally verified by an exact rank
    computation of the boundary constraints; a mismatch is a bug signal,
    not a data error.
    """
    if r < 1:
        raise StructuralError("r must be >= 1")
    g = omega_matrix(pi).genus
    if mu > g:
        raise StructuralError("mu cannot exceed the genus")
    d = pi.d
    dims = (r * d, (2 * g - 1) * r + 1, mu + r - 1)
    M = _boundary_constraint_matrix(pi, r)
    kernel_dim = r * d - intmat.rank(M)
    if kernel_dim != dims[1]:
        raise ConsistencyError(
            f"boundary-kernel rank check failed for {pi}, r={r}: "
            f"formula {dims[1]}, exact {kernel_dim}"
        )
    return dims


def gamma_del_r_basis(iet: Iet, r: int) -> np.ndarray:
    """Orthonormal basis (columns) of the degree-<r polynomials with
    vanishing boundary of every derivative, in instance coordinates."""
    M = np.array(_boundary_constraint_matrix(iet.pi, r, iet.lengths), dtype=float)
    u, s, vt = np.linalg.svd(M)
    tol = max(M.shape) * np.finfo(float).eps * (s[0] if s.size else 1.0)
    null_dim = M.shape[1] - int(np.sum(s > tol))
    basis = vt[M.shape[1] - null_dim:].T
    expected = poly_space_dims(iet.pi, 0, r)[1]
    if null_dim != expected:
        raise ConsistencyError(f"float kernel dimension {null_dim} != formula {expected}")
    return basis


def coefficient_vector(phi: PiecewiseFunction, r: int) -> np.ndarray:
    """Flatten a degree-<r piecewise polynomial into the coefficient layout
    used by the basis builders (per-interval blocks of r local monomials)."""
    if phi.samples is not None:
        raise DegreeError("coefficient vector requires polynomial-only data")
    d = phi.iet.d
    out = np.zeros(d * r)
    for alpha, c in enumerate(phi.coeffs):
        if c.size > r:
            raise DegreeError(f"degree {c.size - 1} exceeds r-1 = {r - 1}")
        out[alpha * r: alpha * r + c.size] = c
    return out


def piecewise_from_coefficients(iet: Iet, vec, r: int) -> PiecewiseFunction:
    vec = np.asarray(vec, float)
    return PiecewiseFunction(iet, [vec[alpha * r:(alpha + 1) * r] for alpha in range(iet.d)])


def coboundary_of_polynomial(iet: Iet, global_coeffs) -> PiecewiseFunction:
    """psi∘T - psi for a global polynomial psi (exact piecewise polynomial)."""
    global_coeffs = np.asarray(global_coeffs, float)
    cs = []
    with working_precision(iet.prec):
        for a in iet.pi.letters:
            tau = backends.to_float(iet.translation(a))
            lo, hi = iet.interval(a)
            ell = backends.to_float(hi - lo)
            a0 = backends.to_float(lo)
            shifted = affine_compose(global_coeffs, 1.0, tau)  # psi(x + tau)
            diff = P.polysub(shifted, global_coeffs)
            cs.append(affine_compose(diff, ell, a0 + 0.5 * ell))
    return PiecewiseFunction(iet, cs)


def gamma_t_r_basis(iet: Iet, r: int, stable_basis: np.ndarray) -> np.ndarray:
    """Columns spanning the coboundary subspace of degree-<r polynomials:
    the stable piecewise constants plus coboundaries of x^j, j = 2..r."""
    d = iet.d
    cols = []
    for v in np.atleast_2d(stable_basis.T):
        cols.append(coefficient_vector(PiecewiseFunction.from_constants(iet, v), r))
    for j in range(2, r + 1):
        mono = np.zeros(j + 1)
        mono[j] = 1.0
        cols.append(coefficient_vector(coboundary_of_polynomial(iet, mono), r))
    return np.array(cols).T if cols else np.zeros((d * r, 0))


def conjugacy_class_basis(iet: Iet, r: int, stable_basis: np.ndarray):
    """Orthonormal basis (columns) of the quotient of the boundary-kernel
    polynomials by the coboundary subspace, in coefficient space.

    Dimension matches (g-1)(2r-1) + g - mu + 1 at level r, i.e. the
    difference of the two closed-form dimensions.
    """
    Bd = gamma_del_r_basis(iet, r)
    Bt = gamma_t_r_basis(iet, r, stable_basis)
    if Bt.shape[1] == 0:
        return Bd, Bd, Bt
    Qt, _ = np.linalg.qr(Bt)
    resid = Bd - Qt @ (Qt.T @ Bd)
    u, s, vt = np.linalg.svd(resid, full_matrices=False)
    keep = int(np.sum(s > 1e-9 * (s[0] if s.size else 1.0)))
    mu = Bt.shape[1] - (r - 1)
    g = omega_matrix(iet.pi).genus
    expected = ((2 * g - 1) * r + 1) - (mu + r - 1)
    if keep != expected:
        raise ConsistencyError(
            f"quotient dimension {keep} != expected {expected} (r={r}, mu={mu})"
        )
    return u[:, :keep], Bd, Bt


def class_coordinates(chi: PiecewiseFunction, r: int, quotient_basis: np.ndarray) -> np.ndarray:
    """Coordinates of a piecewise polynomial's class in the quotient basis."""
    return quotient_basis.T @ coefficient_vector(chi, r)
