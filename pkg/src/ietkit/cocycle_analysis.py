"""Lyapunov spectrum, stable spaces, and finite-depth certification of
the Diophantine conditions behind the solvable classes DC(eta, theta, sigma).

Everything here certifies asymptotic O(.) statements only at finite
depth, by regression over the accelerated subsequence; reports carry the
raw point clouds and never claim proofs.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import intmat
from .backends import to_float, working_precision
from .combinatorics import absolute_cycle_basis
from .errors import ConnectionError_, ConsistencyError, DepthError, InsufficientDataError
from .iet_core import Iet
from .rauzy_veech import CocyclePath, StepType, iterate


def fit_line(xs, ys):
    """Least-squares line fit: (slope, intercept, max abs residual, r2)."""
    xs = np.asarray(xs, float)
    ys = np.asarray(ys, float)
    if xs.size < 2:
        raise InsufficientDataError("need at least two points to fit")
    A = np.vstack([xs, np.ones_like(xs)]).T
    (slope, intercept), *_ = np.linalg.lstsq(A, ys, rcond=None)
    resid = ys - (slope * xs + intercept)
    ss_res = float(np.sum(resid ** 2))
    ss_tot = float(np.sum((ys - ys.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), float(np.max(np.abs(resid))), r2


# -- restricted cocycle coordinates ------------------------------------------


class _KerDelFrames:
    """Exact bases of the boundary-kernel block at every level of a path,
    with the window matrices rewritten in those coordinates.

    The rewriting is verified exactly: a failure means the cocycle does
    not preserve the kernel of the boundary operator, i.e. a bug.
    """

    def __init__(self, path: CocyclePath):
        self.path = path
        self._basis_cache: dict = {}
        self._window_cache: dict = {}

    def basis(self, pi):
        if pi not in self._basis_cache:
            self._basis_cache[pi] = tuple(absolute_cycle_basis(pi))  # rows
        return self._basis_cache[pi]

    def basis_matrix(self, pi):
        return np.array(self.basis(pi), dtype=float).T  # d x 2g, columns

    def window_restricted(self, k: int) -> np.ndarray:
        """Window matrix in kernel coordinates (exact solve, float out)."""
        acc = self.path.acceleration()
        t0, t1 = acc.times[k], acc.times[k + 1]
        pi0, pi1 = self.path.pi_at(t0), self.path.pi_at(t1)
        W = acc.windows[k]
        key = (pi0, pi1, W)
        if key not in self._window_cache:
            K0 = intmat.transpose(self.basis(pi0))   # d x 2g columns
            K1 = intmat.transpose(self.basis(pi1))
            BK0 = intmat.mat_mul(W, K0)
            K1t = intmat.transpose(K1)
            G = intmat.mat_mul(K1t, K1)
            C = intmat.mat_mul(intmat.invert_exact(G), intmat.mat_mul(K1t, BK0))
            if not intmat.mat_eq(intmat.mat_mul(K1, C), BK0):
                raise ConsistencyError("cocycle does not preserve the boundary kernel")
            self._window_cache[key] = np.array(
                [[float(Fraction(x)) for x in row] for row in C], dtype=float
            )
        return self._window_cache[key]


def _window_float(path: CocyclePath, k: int) -> np.ndarray:
    return np.array(path.acceleration().windows[k], dtype=float)


# -- Lyapunov spectrum ---------------------------------------------------------


@dataclass
class LyapunovOptions:
    gap_factor: float = 0.1          # gap threshold as a fraction of the top exponent
    discard_fraction: float = 0.0    # burn-in windows excluded from the averages
    min_windows: int = 20


@dataclass
class LyapunovReport:
    """Exponent estimates per elementary renormalization step (natural log).

    ``exponents`` covers the full d-dimensional cocycle; the
    ``exponents_absolute`` block is the restriction to the kernel of the
    boundary operator, which drops the trivially-neutral relative
    directions; ``mu_estimate`` counts its exponents below the gap.
    """

    exponents: tuple
    exponents_absolute: tuple
    mu_estimate: int
    gap_threshold: float
    depth: int
    windows_used: int

    def to_json(self) -> dict:
        return {
            "exponents": list(self.exponents),
            "exponents_absolute": list(self.exponents_absolute),
            "mu_estimate": self.mu_estimate,
            "gap_threshold": self.gap_threshold,
            "depth": self.depth,
            "windows_used": self.windows_used,
        }


def _qr_accumulate(windows, dim: int, elementary_span: int, burn: int):
    """Standard orthonormal-frame push-forward: log volume growth of the
    nested subframes, re-orthonormalized at every accelerated step."""
    Q = np.eye(dim)
    logs = np.zeros(dim)
    for k, A in enumerate(windows):
        Z = A @ Q
        Q, Rm = np.linalg.qr(Z)
        diag = np.abs(np.diag(Rm))
        if k >= burn:
            logs += np.log(diag)
    return np.sort(logs / elementary_span)[::-1]


def lyapunov_spectrum(path: CocyclePath, opts: LyapunovOptions | None = None) -> LyapunovReport:
    opts = opts or LyapunovOptions()
    acc = path.acceleration()
    K = len(acc.windows)
    if K < opts.min_windows:
        raise DepthError(f"need >= {opts.min_windows} acceleration windows, have {K}")
    burn = int(K * opts.discard_fraction)
    span = acc.times[-1] - acc.times[burn]
    d = path.d
    full = _qr_accumulate((_window_float(path, k) for k in range(K)), d, span, burn)
    frames = _KerDelFrames(path)
    dim_abs = len(frames.basis(path.pi_at(0)))
    restricted = _qr_accumulate(
        (frames.window_restricted(k) for k in range(K)), dim_abs, span, burn
    )
    gap = opts.gap_factor * max(full[0], 1e-300)
    mu = int(np.sum(np.asarray(restricted) < -gap))
    return LyapunovReport(
        exponents=tuple(full),
        exponents_absolute=tuple(restricted),
        mu_estimate=mu,
        gap_threshold=gap,
        depth=path.depth,
        windows_used=K - burn,
    )


# -- stable space ---------------------------------------------------------------


@dataclass
class StableSpace:
    """Orthonormal basis (columns) of the estimated contracting directions."""

    basis: np.ndarray
    mu: int
    windows_used: int
    indeterminate: bool = False


def stable_space(path: CocyclePath, depth: int | None = None,
                 report: LyapunovReport | None = None) -> StableSpace:
    """Estimate the contracting subspace at time zero by the backward
    orthonormal-frame sweep over the transposed windows (the leading
    frame of the reversed transposed cocycle converges to the singular
    frame of the forward product; its trailing block spans the most
    contracted directions).

    The estimate is computed inside the boundary-kernel block and lifted
    back to the full space.
    """
    if report is None:
        report = lyapunov_spectrum(path)
    acc = path.acceleration()
    K = len(acc.windows)
    k_use = K if depth is None else max(1, min(K, depth))
    mu = report.mu_estimate
    indeterminate = all(abs(t) < report.gap_threshold for t in report.exponents_absolute)
    frames = _KerDelFrames(path)
    dim_abs = len(report.exponents_absolute)
    U = np.eye(dim_abs)
    for k in range(k_use - 1, -1, -1):
        W = frames.window_restricted(k)
        U, _ = np.linalg.qr(W.T @ U)
    restricted = U[:, dim_abs - mu:] if mu > 0 else np.zeros((dim_abs, 0))
    K0 = frames.basis_matrix(path.pi_at(0))
    lifted = K0 @ restricted
    if mu > 0:
        lifted, _ = np.linalg.qr(lifted)
    return StableSpace(basis=lifted, mu=mu, windows_used=k_use,
                       indeterminate=indeterminate)


# -- Diophantine certification ---------------------------------------------------


@dataclass
class DcTestOptions:
    eps_c: float = 0.05        # growth-exponent cap for the subexponential flags
    floor: float = 0.5         # lower bound for the non-decay check on sampled vectors
    n_test_vectors: int = 8
    seed: int = 0
    resid_cap: float = 1.5     # max log-residual for a regression to count as stable
    min_points: int = 10
    n_stable_starts: int = 6   # subsampled start levels for the stable forward norms
    cap_log: float = 110.0     # certification window: levels with log||B(0,n_k)|| below this
    max_exact_levels: int = 64
    min_subfit_points: int = 4
    refine_bits: int = 250     # rounding precision of the refined stable basis


@dataclass
class CondResult:
    passed: bool
    slope: float | None = None
    max_resid: float | None = None
    note: str = ""
    points: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {"passed": self.passed, "slope": self.slope,
                "max_resid": self.max_resid, "note": self.note,
                "points": self.points}


@dataclass
class DiophantineReport:
    """Finite-depth certificate of the conditions defining DC(eta, theta, sigma).

    All flags are certified *at the reported depth only*; the estimates
    are regression slopes over the accelerated subsequence, with the raw
    point clouds included for external plotting.
    """

    eta_hat: float
    theta_hat: float
    sigma_hat: float
    mu: int
    cond_a: CondResult
    cond_b: CondResult
    cond_c: CondResult
    cond_d: CondResult
    depth: int
    n_windows: int
    d: int
    options: DcTestOptions

    @property
    def admissible(self) -> bool:
        """Solvability inequality (4d + d(d-1)/sigma) * eta < theta,
        recomputed from the stored estimates on every access."""
        d = self.d
        if self.eta_hat <= 0:
            return self.theta_hat > 0
        if self.sigma_hat <= 0:
            return False
        return (4 * d + d * (d - 1) / self.sigma_hat) * self.eta_hat < self.theta_hat

    def to_json(self) -> dict:
        return {
            "eta_hat": self.eta_hat,
            "theta_hat": self.theta_hat,
            "sigma_hat": self.sigma_hat,
            "mu": self.mu,
            "admissible": self.admissible,
            "depth": self.depth,
            "n_windows": self.n_windows,
            "d": self.d,
            "cond_a": self.cond_a.to_json(),
            "cond_b": self.cond_b.to_json(),
            "cond_c": self.cond_c.to_json(),
            "cond_d": self.cond_d.to_json(),
            "defaults": {"eps_c": self.options.eps_c, "floor": self.options.floor,
                          "seed": self.options.seed},
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["condition", "k", "x_log_norm_prefix", "y_log_quantity"])
        for name, cond in (("a", self.cond_a), ("b", self.cond_b),
                           ("c", self.cond_c), ("d", self.cond_d)):
            for row in cond.points:
                w.writerow([name] + list(row))
        return buf.getvalue()


def _scaled_prefix_norms(windows):
    """Log of the entrywise-sum norms of the prefix products (scaled
    float propagation; forward-stable for nonnegative matrices)."""
    logs = []
    P = None
    scale = 0.0
    for A in windows:
        P = A.copy() if P is None else A @ P
        m = float(np.max(np.abs(P)))
        P /= m
        scale += math.log(m)
        logs.append(scale + math.log(float(np.sum(P))))
    return logs


def _frac(x) -> Fraction:
    """Exact rational value of a backend number (including binary floats)."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(*x.as_integer_ratio())
    # mpmath mpf: sign/mantissa/exponent quadruple
    sign, man, exp, _ = x._mpf_
    if man == 0:
        return Fraction(0)
    val = Fraction(man) * (Fraction(2) ** exp)
    return -val if sign else val


def _frac_log(x: Fraction) -> float:
    """log |x| for a rational with possibly huge numerator/denominator."""
    if x == 0:
        return -math.inf
    return math.log(abs(x.numerator)) - math.log(x.denominator)


def _exact_matvec_lognorm(rows, v) -> float:
    """log of the sup-norm of (integer matrix) @ (rational vector), exact."""
    best = Fraction(0)
    for r in rows:
        s = sum(Fraction(a) * b for a, b in zip(r, v))
        if abs(s) > best:
            best = abs(s)
    return _frac_log(best)


def _cols_as_fracs(V: np.ndarray):
    return [[_frac(float(V[i, j])) for i in range(V.shape[0])] for j in range(V.shape[1])]


def _exact_restriction_lognorms(prefixes, cols) -> list:
    """Per-level log of max_j ||B(0,n_k) v_j||_inf, all exact."""
    out = []
    for B in prefixes:
        out.append(max(_exact_matvec_lognorm(B, v) for v in cols))
    return out


def _round_frac(x: Fraction, bits: int) -> Fraction:
    den = 1 << bits
    return Fraction(round(x * den), den)


def _exact_gram_schmidt(cols):
    """Exact orthogonalization of rational columns; each output column is
    rescaled to sup-norm one (rational), pairwise exactly orthogonal."""
    out = []
    for v in cols:
        w = list(v)
        for u in out:
            num = sum(a * b for a, b in zip(w, u))
            den = sum(a * a for a in u)
            coef = num / den
            w = [a - coef * b for a, b in zip(w, u)]
        m = max(abs(a) for a in w)
        if m == 0:
            continue
        out.append([a / m for a in w])
    return out


def _refined_stable(path: CocyclePath, S0: np.ndarray, prefixes, logB0, opts):
    """Sharpen the float stable basis by one exact inverse-power step.

    The inverse of an exact prefix product amplifies the contracted
    directions, shrinking the float basis's transverse error by the
    spectral gap; the result is re-orthogonalized exactly and rounded to
    ``refine_bits`` to keep downstream rationals manageable.
    """
    mu = S0.shape[1]
    if mu == 0:
        return [], 0.0
    m_ref = 0
    for i in range(len(prefixes)):
        if logB0[i] <= 28.0:
            m_ref = i
    B = prefixes[m_ref]
    cols = []
    for j in range(mu):
        rhs = [_frac(float(S0[i, j])) for i in range(S0.shape[0])]
        w = intmat.solve_exact(B, rhs)
        cols.append(list(w))
    cols = _exact_gram_schmidt(cols)
    cols = [[_round_frac(x, opts.refine_bits) for x in c] for c in cols]
    floor_log = max(math.log(1e-16) - logB0[m_ref], -opts.refine_bits * math.log(2) + 4)
    return cols, floor_log


def _masked_fit(xs, ys, valid, min_pts: int):
    """Fit over the valid points; falls back to the earliest levels when
    the validity mask leaves too few."""
    pts = [(x, y) for x, y, ok in zip(xs, ys, valid) if ok]
    if len(pts) < min_pts:
        pts = list(zip(xs, ys))[:max(min_pts, 4)]
    if len(pts) < 2:
        raise InsufficientDataError("certification window too short")
    return fit_line([p[0] for p in pts], [p[1] for p in pts]), len(pts)


def dc_test(path: CocyclePath, gamma_s, opts: DcTestOptions | None = None) -> DiophantineReport:
    """Certify the four defining conditions at the path's depth.

    eta comes from the growth of window norms against prefix norms over
    the whole path; the restriction norms behind theta, sigma and the
    subexponential flags are computed *exactly* (integer prefix products
    against rational vectors) over a certification window of levels, so
    no floating-point noise floor pollutes the decay fits.  The only
    approximation left is the stable basis itself, which is refined by
    an exact inverse-power step and carries an explicit validity floor.
    """
    opts = opts or DcTestOptions()
    if isinstance(gamma_s, StableSpace):
        S0 = gamma_s.basis
    else:
        S0 = np.asarray(gamma_s, float)
    acc = path.acceleration()
    K = len(acc.windows)
    if K < 20:
        raise DepthError(f"need >= 20 acceleration windows, have {K}")
    if K < opts.min_points:
        raise InsufficientDataError("regression needs more acceleration windows")
    d = path.d
    windows_f = [_window_float(path, k) for k in range(K)]
    logB0 = _scaled_prefix_norms(windows_f)   # logB0[k] = log||B(0, n_{k+1})||

    # condition (a): window growth against prefix norms, full depth
    win_lognorms = [math.log(intmat.entry_sum(acc.windows[k])) for k in range(K)]
    xs_a = [0.0] + logB0[:-1]     # log||B(0,n_k)|| matching window (n_k, n_{k+1})
    slope_a, _, resid_a, _ = fit_line(xs_a, win_lognorms)
    eta_hat = max(0.0, slope_a)
    cond_a = CondResult(
        passed=resid_a <= opts.resid_cap, slope=slope_a, max_resid=resid_a,
        points=[(k, xs_a[k], win_lognorms[k]) for k in range(K)],
    )

    # certification window: exact integer prefix products
    prefixes = []
    P = None
    for k in range(K):
        if len(prefixes) >= opts.max_exact_levels or logB0[k] > opts.cap_log:
            break
        P = acc.windows[k] if P is None else intmat.mat_mul(acc.windows[k], P)
        prefixes.append(P)
    kc = len(prefixes)
    if kc < opts.min_subfit_points:
        raise InsufficientDataError("certification window too short")
    logB0c = logB0[:kc]

    # condition (b): exact restriction to the zero-average hyperplane
    with working_precision(path.initial.prec):
        lam = [_frac(x) for x in path.initial.lengths]
    gamma0 = [[Fraction(x) for x in v] for v in intmat.kernel_basis([tuple(lam)])]
    logs_b = _exact_restriction_lognorms(prefixes, gamma0)
    if kc >= opts.min_points:
        slope_b, _, resid_b, _ = fit_line(logB0c, logs_b)
        n_b = kc
    else:
        (slope_b, _, resid_b, _), n_b = _masked_fit(logB0c, logs_b, [True] * kc,
                                                    opts.min_subfit_points)
    theta_hat = 1.0 - slope_b
    cond_b = CondResult(
        passed=resid_b <= opts.resid_cap, slope=slope_b, max_resid=resid_b,
        note=f"exact restriction norms over {n_b} levels",
        points=[(k, logB0c[k], logs_b[k]) for k in range(kc)],
    )

    # sigma: exact decay on the (refined) stable block
    mu = S0.shape[1]
    S_ref, floor_log = _refined_stable(path, S0, prefixes, logB0, opts)
    if mu > 0:
        logs_s = _exact_restriction_lognorms(prefixes, S_ref)
        cut = int(np.argmin(logs_s))  # decay-then-bounce guard for the noise floor
        valid = [logs_s[k] - logB0c[k] > floor_log + 9.0 and k <= cut for k in range(kc)]
        (slope_s0, _, _, _), _ = _masked_fit(logB0c, logs_s, valid, opts.min_subfit_points)
        sigma_hat = -slope_s0
    else:
        logs_s = []
        sigma_hat = 0.0

    # condition (c): stable forward norms between levels + quotient inverse
    if mu > 0:
        # per-level stable frames from one backward sweep (each accurate to
        # machine epsilon independently of the level)
        frames_at = _stable_frames(path, mu, kc)
        starts = sorted({int(round(t)) for t in
                         np.linspace(0, max(0, kc - opts.min_subfit_points),
                                     opts.n_stable_starts)})
        best: dict[int, float] = {}
        for j in starts:
            Sj = _cols_as_fracs(frames_at[j])
            M = None
            for l in range(j, kc):
                M = acc.windows[l] if M is None else intmat.mat_mul(acc.windows[l], M)
                val = max(_exact_matvec_lognorm(M, c) for c in Sj)
                # valid while the signal clears the frame noise amplified
                # by the growth between the two levels
                base = logB0c[j - 1] if j > 0 else 0.0
                if val > math.log(1e-13) + (logB0c[l] - base):
                    best[l] = max(best.get(l, -math.inf), val)
        ls = sorted(best)
        if len(ls) >= 2:
            vals = [best[l] for l in ls]
            cut_c = ls[int(np.argmin(vals))]
            valid_c = [l <= cut_c for l in ls]
            (slope_cs, _, _, _), _ = _masked_fit([logB0c[l] for l in ls], vals,
                                                 valid_c, opts.min_subfit_points)
        else:
            slope_cs = 0.0
        quot_logs = []
        U0 = _exact_complement(S_ref, d)
        for l in range(kc):
            quot_logs.append(_quotient_inverse_lognorm(prefixes[l], S_ref, U0, d))
        cut_q = int(np.argmin(quot_logs))
        valid_q = [quot_logs[k] + logB0c[k] < -floor_log - 9.0 and k <= cut_q
                   for k in range(kc)]
        (slope_cq, _, _, _), _ = _masked_fit(logB0c, quot_logs, valid_q,
                                             opts.min_subfit_points)
        passed_c = (slope_cs < opts.eps_c) and (slope_cq < opts.eps_c)
        pts_c = [(l, logB0c[l], best[l]) for l in ls] + \
                [(l, logB0c[l], quot_logs[l]) for l in range(kc)]
        cond_c = CondResult(passed=passed_c, slope=max(slope_cs, slope_cq), points=pts_c,
                            note="max of stable-forward and quotient-inverse slopes")
    else:
        cond_c = CondResult(passed=False, slope=None, note="no stable block estimated")

    # condition (d): no sampled vector outside the stable block may decay
    frames = _KerDelFrames(path)
    kb = frames.basis(path.pi_at(0))
    g = len(kb) // 2
    if mu >= g:
        cond_d = CondResult(passed=True, note="stable block is Lagrangian; automatic")
    else:
        rng = np.random.default_rng(opts.seed)
        fails = 0
        pts_d = []
        for i in range(opts.n_test_vectors):
            coeffs = [Fraction(int(c)) for c in rng.integers(-9, 10, size=len(kb))]
            if all(c == 0 for c in coeffs):
                coeffs[0] = Fraction(1)
            v = [sum(c * Fraction(b[i2]) for c, b in zip(coeffs, kb))
                 for i2 in range(d)]
            for s_col in S_ref:  # remove the (refined) stable component
                num = sum(a * b for a, b in zip(v, s_col))
                den = sum(a * a for a in s_col)
                v = [a - (num / den) * b for a, b in zip(v, s_col)]
            m = max(abs(a) for a in v)
            v = [a / m for a in v]
            logs = [_exact_matvec_lognorm(B, v) for B in prefixes]
            tail_max = max(logs[kc // 2:])
            pts_d.append((i, float(tail_max), math.log(opts.floor)))
            if tail_max < math.log(opts.floor):
                fails += 1
        cond_d = CondResult(passed=fails == 0, points=pts_d,
                            note=f"floor {opts.floor} on {opts.n_test_vectors} sampled vectors")

    return DiophantineReport(
        eta_hat=eta_hat, theta_hat=theta_hat, sigma_hat=sigma_hat, mu=mu,
        cond_a=cond_a, cond_b=cond_b, cond_c=cond_c, cond_d=cond_d,
        depth=path.depth, n_windows=K, d=d, options=opts,
    )


def _stable_frames(path: CocyclePath, mu: int, kc: int):
    """Full-space stable frames at levels 0..kc-1 from one backward sweep."""
    acc = path.acceleration()
    K = len(acc.windows)
    U = np.eye(path.d)
    frames = {}
    for k in range(K - 1, -1, -1):
        W = _window_float(path, k)
        U, _ = np.linalg.qr(W.T @ U)
        if k < kc:
            frames[k] = U[:, path.d - mu:].copy()
    return [frames[k] for k in range(kc)]


def _exact_complement(cols, d: int):
    """Exact rational orthogonal complement of the span of the columns."""
    if not cols:
        return [[Fraction(1 if i == j else 0) for i in range(d)] for j in range(d)]
    M = [tuple(c) for c in cols]        # rows = column vectors; kernel of this
    comp = intmat.kernel_basis(M)
    return _exact_gram_schmidt([[Fraction(x) for x in v] for v in comp])


def _quotient_inverse_lognorm(B_rows, S_ref, U0, d: int) -> float:
    """log of (an entrywise-norm surrogate for) the inverse of the induced
    quotient map: Gram-matrix inverse of the off-stable image of the
    complement, all in exact arithmetic."""
    if not U0:
        return 0.0
    BU = [[sum(Fraction(B_rows[i][j]) * u[j] for j in range(d)) for u in U0]
          for i in range(d)]            # d x (d-mu)
    if S_ref:
        Sl = [[sum(Fraction(B_rows[i][j]) * s[j] for j in range(d)) for i in range(d)]
              for s in S_ref]           # stable frame at the image level (columns)
        Sl = _exact_gram_schmidt(Sl)
        for s_col in Sl:
            den = sum(a * a for a in s_col)
            for c in range(len(U0)):
                num = sum(BU[i][c] * s_col[i] for i in range(d))
                coef = num / den
                for i in range(d):
                    BU[i][c] -= coef * s_col[i]
    G = [[sum(BU[i][a] * BU[i][b] for i in range(d)) for b in range(len(U0))]
         for a in range(len(U0))]
    Ginv = intmat.invert_exact(G)
    norm = max(sum(abs(x) for x in row) for row in Ginv)
    return 0.5 * _frac_log(Fraction(norm))


# -- continued-fraction cross-check (d = 2) -------------------------------------


@dataclass
class CfCrosscheck:
    quotients: tuple
    convergents: tuple
    rv_runs: tuple
    runs_match: bool
    eta_hat: float
    cf_slope: float
    difference: float

    def to_json(self) -> dict:
        return {"quotients": list(self.quotients),
                "convergents": [str(q) for q in self.convergents],
                "rv_runs": list(self.rv_runs), "runs_match": self.runs_match,
                "eta_hat": self.eta_hat, "cf_slope": self.cf_slope,
                "difference": self.difference}


def continued_fraction(alpha, n_terms: int, prec: int | None = None):
    """Partial quotients and convergent denominators of alpha in (0,1).

    A terminating expansion (rational alpha within working precision)
    raises: rational rotation data means a connection.
    """
    quotients = []
    with working_precision(prec):
        x = alpha
        guard = 2.0 ** (-(prec or 53) / 2)
        for _ in range(n_terms):
            if x == 0 or (not isinstance(x, Fraction) and abs(to_float(x)) < guard):
                raise ConnectionError_("rational rotation number: continued fraction terminates")
            inv = 1 / x
            a = int(inv)
            quotients.append(a)
            x = inv - a
    qs = []
    qm1, qm2 = 1, 0  # q_k = a_k q_{k-1} + q_{k-2}
    for a in quotients:
        qk = a * qm1 + qm2
        qs.append(qk)
        qm2, qm1 = qm1, qk
    return tuple(quotients), tuple(qs)


def run_lengths(types) -> tuple:
    runs = []
    for t in types:
        if runs and runs[-1][0] == t:
            runs[-1][1] += 1
        else:
            runs.append([t, 1])
    return tuple(n for _, n in runs)


def cf_crosscheck(alpha, depth: int, prec: int = 256,
                  dc_opts: DcTestOptions | None = None) -> CfCrosscheck:
    """Two-interval sanity check: the renormalization runs encode the
    partial quotients, and the matrix-based eta estimate agrees with the
    classical fit of log a_{k+1} against log q_k.

    The first run is one step short of the first quotient (the subtractive
    algorithm acts on (1 - alpha, alpha)); a leading zero run is dropped.
    """
    from .combinatorics import PermutationPair
    pi = PermutationPair.parse("A B / B A")
    with working_precision(prec):
        from mpmath import mp
        a_mpf = mp.mpf(alpha) if not isinstance(alpha, Fraction) else alpha
        iet = Iet(pi, [1 - a_mpf, a_mpf], prec=prec if not isinstance(alpha, Fraction) else None)
    path = iterate(iet, depth)
    # only the quotients actually consumed by the path enter the comparison
    quotients, qs = continued_fraction(a_mpf, max(4, depth // 2), prec)
    consumed = 0
    n_q = 0
    for a in quotients:
        consumed += a
        n_q += 1
        if consumed >= depth + 1:
            break
    quotients, qs = quotients[:n_q], qs[:n_q]
    expected = [quotients[0] - 1] + list(quotients[1:])
    if expected[0] == 0:
        expected = expected[1:]
    runs = run_lengths(path.step_types())
    # the final run may be cut off by the finite depth
    n_cmp = min(len(runs) - 1, len(expected))
    runs_match = all(runs[i] == expected[i] for i in range(n_cmp))

    report = dc_test(path, stable_space(path), dc_opts)
    ln_a = [math.log(quotients[k + 1]) for k in range(len(quotients) - 1)]
    ln_q = [math.log(qs[k]) for k in range(len(quotients) - 1)]
    cf_slope, _, _, _ = fit_line(ln_q, ln_a)
    cf_slope = max(0.0, cf_slope)
    return CfCrosscheck(
        quotients=quotients, convergents=qs, rv_runs=runs, runs_match=runs_match,
        eta_hat=report.eta_hat, cf_slope=cf_slope,
        difference=abs(report.eta_hat - cf_slope),
    )
