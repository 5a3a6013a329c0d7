import math

import numpy as np
import pytest
from mpmath import mp
from numpy.polynomial import polynomial as P

from ietkit.backends import working_precision
from ietkit.cocycle_analysis import fit_line
from ietkit.cohomology_solver import (
    SolveOptions, birkhoff_bound_check, birkhoff_bound_samples, build_correction,
    decay_log, solve, solve_higher, special_sum,
)
from ietkit.errors import DecayFailureError, DepthError, HypothesisError
from ietkit.function_spaces import PiecewiseFunction, coboundary_of_polynomial
from ietkit.instances import golden_rotation, h2_self_similar, rotation_from_quotients
from ietkit.rauzy_veech import iterate


def fit_phi(iet, f, degree=28):
    return PiecewiseFunction.from_callable(f, iet, degree=degree)


GOLDEN = float((5 ** 0.5 - 1) / 2)
DEN = np.exp(2j * np.pi * GOLDEN) - 1


def fourier_solution(x):
    return (np.exp(2j * np.pi * x) / DEN).real


# -- special sums ---------------------------------------------------------------


def test_special_sum_matches_matrix_on_constants(golden_path):
    chi = np.array([2.0, -1.0])
    phi = PiecewiseFunction.from_constants(golden_path.iet_at(0), chi)
    for m, n in ((0, 4), (0, 9), (3, 11)):
        cur = phi if m == 0 else special_sum(golden_path, 0, m, phi)
        out = special_sum(golden_path, m, n, cur if m else phi)
        B = np.array(golden_path.matrix(m, n).rows, float)
        expect = B @ (np.array([cur.coeffs[a][0] for a in range(2)]) if m else chi)
        got = np.array([out.coeffs[a][0] for a in range(2)])
        assert np.array_equal(got, expect)


def test_special_sum_matches_matrix_h2(h2_path):
    chi = np.array([1.0, 2.0, -3.0, 5.0])
    phi = PiecewiseFunction.from_constants(h2_path.iet_at(0), chi)
    out = special_sum(h2_path, 0, 7, phi)
    B = np.array(h2_path.matrix(0, 7).rows, float)
    got = np.array([out.coeffs[a][0] for a in range(4)])
    assert np.array_equal(got, B @ chi)


def test_special_sum_identity(golden_path):
    phi = fit_phi(golden_path.iet_at(0), lambda x: math.sin(2 * math.pi * x))
    out = special_sum(golden_path, 5, 5, phi)
    with working_precision(golden_path.initial.prec):
        for x in (0.1, 0.3):
            pt = mp.mpf(x) * golden_path.iet_at(5).total_length()
            assert abs(out.eval(pt) - phi.eval(pt)) < 1e-12


def test_special_sum_brute_force_crosscheck(golden_path):
    phi = fit_phi(golden_path.iet_at(0), lambda x: math.cos(2 * math.pi * x))
    n = golden_path.acceleration().times[6]
    out = special_sum(golden_path, 0, n, phi)
    T0 = golden_path.iet_at(0)
    Tn = golden_path.iet_at(n)
    with working_precision(T0.prec):
        lo, hi = Tn.interval(Tn.pi.letters[1])
        x = (lo + hi) / 2
        right = Tn.endpoints()[1]
        tot = phi.eval(x)
        pt = T0.evaluate(x)
        while not pt < right:
            tot += phi.eval(pt)
            pt = T0.evaluate(pt)
        assert abs(out.eval(x) - tot) < 1e-10


def test_decay_of_corrected_cosine(golden_path, golden_analysis):
    _, gs, dc = golden_analysis
    phi = fit_phi(golden_path.iet_at(0), lambda x: math.cos(2 * math.pi * x))
    sol = solve(golden_path, phi, report=dc, gamma_s=gs)
    pts = sol.decay_points[1:]
    slope, _, _, r2 = fit_line([p[1] for p in pts], [p[2] for p in pts])
    assert slope < 0 and r2 > 0.9
    assert sol.omega_fit > dc.eta_hat


# -- orbit-sum domination ---------------------------------------------------------


def test_birkhoff_bound_single_step(golden_path):
    phi = PiecewiseFunction.from_constants(golden_path.iet_at(0), [GOLDEN, GOLDEN - 1])
    with working_precision(golden_path.initial.prec):
        lhs, rhs = birkhoff_bound_check(golden_path, phi, mp.mpf("0.37"), 1)
    assert lhs <= rhs


def test_birkhoff_bound_golden_long_orbit(golden_path):
    phi = PiecewiseFunction.from_constants(golden_path.iet_at(0), [GOLDEN, GOLDEN - 1])
    with working_precision(golden_path.initial.prec):
        lhs, rhs = birkhoff_bound_check(golden_path, phi, mp.mpf("0.123456"), 1000)
    assert lhs <= rhs


def test_birkhoff_bound_depth_error(golden_path):
    phi = PiecewiseFunction.from_constants(golden_path.iet_at(0), [1.0, -1.0])
    shallow = iterate(golden_rotation(), 4)
    with pytest.raises(DepthError):
        with working_precision(shallow.initial.prec):
            birkhoff_bound_check(shallow, phi, mp.mpf("0.001"), 800)


def test_birkhoff_bound_samples_h2(h2_path):
    phi = fit_phi(h2_path.iet_at(0), lambda x: math.sin(2 * math.pi * x), degree=20)
    rng = np.random.default_rng(0)
    pairs = birkhoff_bound_samples(h2_path, phi, 50, 500, rng)
    assert len(pairs) == 50
    assert all(l <= r for l, r in pairs)


# -- correction operator ----------------------------------------------------------


def test_zero_mean_primitive_of_constant():
    T = golden_rotation()
    c = 3.0
    phi = PiecewiseFunction.from_constants(T, [c, c])
    prim = phi.primitive_zero_mean()
    with working_precision(T.prec):
        for a in T.pi.letters:
            lo, hi = T.interval(a)
            mid = (lo + hi) / 2
            x = lo + (hi - lo) / 4
            # c * (x - midpoint)
            assert abs(prim.eval(x) - c * float(x - mid)) < 1e-12


def test_correction_requires_admissible(golden_path, golden_analysis):
    _, gs, dc = golden_analysis
    import copy
    bad = copy.copy(dc)
    bad.eta_hat = 5.0
    with pytest.raises(HypothesisError):
        build_correction(golden_path, gs, report=bad)


def test_series_terms_decay_geometrically(golden_path, golden_analysis):
    _, gs, dc = golden_analysis
    corr = build_correction(golden_path, gs, report=dc)
    phi = fit_phi(golden_path.iet_at(0), lambda x: math.sin(4 * math.pi * x) + 0.3 * x)
    coords, terms, tail = corr.delta_series(0, phi.derivative())
    pos = [t for t in terms if t > 1e-300]
    ratios = [b / a for a, b in zip(pos, pos[1:])]
    assert np.median(ratios) < 0.7
    assert tail < 1e-6


def test_intertwining_defect_within_tail(golden_path, golden_analysis):
    _, gs, dc = golden_analysis
    corr = build_correction(golden_path, gs, report=dc)
    phi = fit_phi(golden_path.iet_at(0), lambda x: math.cos(2 * math.pi * x))
    dphi = phi.derivative()
    k = corr.L // 2
    acc = golden_path.acceleration()
    # S(0, n_k) P^(0) dphi  vs  P^(k) S(0, n_k) dphi, compared modulo the
    # stable block at level k
    f0, c0, diag0 = corr.apply_at(0, dphi)
    lhs_fun = special_sum(golden_path, 0, acc.times[k], f0)
    lhs_vec = np.array(golden_path.matrix(0, acc.times[k]).rows, float) @ corr.rep_vector(0, c0)
    xi = special_sum(golden_path, 0, acc.times[k], dphi)
    fk, ck, diagk = corr.apply_at(k, xi)
    rhs_vec = corr.rep_vector(k, ck)
    diff_fun = lhs_fun - fk
    diff_vec = lhs_vec - rhs_vec + diff_fun.per_interval_means()
    Sk = corr.frames[k]
    resid = diff_vec - Sk @ (Sk.T @ diff_vec)  # defect modulo the stable block
    defect = float(np.linalg.norm(resid, np.inf))
    tail = diag0["tail_bound"] * float(np.sum(np.abs(
        np.array(golden_path.matrix(0, acc.times[k]).rows, float))))
    assert defect <= tail + 1e-9


# -- solve -------------------------------------------------------------------------


def test_solve_fourier_oracle(golden_path, golden_analysis):
    _, gs, dc = golden_analysis
    phi = fit_phi(golden_path.iet_at(0), lambda x: math.cos(2 * math.pi * x))
    sol = solve(golden_path, phi, report=dc, gamma_s=gs)
    assert sol.residual <= 1e-6
    xs = np.linspace(0.001, 0.999, 500)
    oracle = np.array([fourier_solution(x) for x in xs]) - fourier_solution(sol.base_point)
    got = sol.u.eval_many(xs)
    assert np.max(np.abs(got - oracle)) <= 1e-6
    assert np.linalg.norm(sol.chi_class) < 1e-8


def test_solve_coboundary_roundtrip(golden_path, golden_analysis):
    _, gs, dc = golden_analysis
    rng = np.random.default_rng(1)
    for _ in range(3):
        coeffs = rng.uniform(-1, 1, size=4)
        phi = coboundary_of_polynomial(golden_path.iet_at(0), coeffs)
        sol = solve(golden_path, phi, report=dc, gamma_s=gs)
        assert np.linalg.norm(sol.chi_class) <= 1e-8
        xs = np.linspace(0.002, 0.998, 400)
        exact = P.polyval(xs, coeffs) - P.polyval(sol.base_point, coeffs)
        assert np.max(np.abs(sol.u.eval_many(xs) - exact)) <= 1e-8


def test_solve_stable_constant_input(golden_path, golden_analysis):
    _, gs, dc = golden_analysis
    chi = 0.4 * gs.basis[:, 0]
    phi = PiecewiseFunction.from_constants(golden_path.iet_at(0), chi)
    sol = solve(golden_path, phi, report=dc, gamma_s=gs)
    assert np.linalg.norm(sol.chi_class) < 1e-8
    xs = np.linspace(0.01, 0.99, 200)
    assert np.max(np.abs(sol.u.eval_many(xs))) < 10.0  # bounded transfer


def test_solve_boundary_violation_rejected(golden_path, golden_analysis):
    _, gs, dc = golden_analysis
    from ietkit.errors import DomainError
    T = golden_path.iet_at(0)
    phi = PiecewiseFunction.from_constants(T, [1.0, -1.0])
    pi3 = None  # two-letter boundary vanishes identically; use a jumpy function
    bad = PiecewiseFunction(T, [np.array([0.0, 1.0]), np.array([5.0])])
    with pytest.raises(DomainError):
        solve(golden_path, bad, report=dc, gamma_s=gs)


def test_solve_non_admissible_rejected():
    # Liouville-flavored rotation: quotients grow doubly exponentially
    alpha = rotation_from_quotients([2, 4, 16, 256, 65536], prec=4000)
    path = iterate(alpha, 300)
    from ietkit.cocycle_analysis import dc_test, stable_space
    gs = stable_space(path)
    dc = dc_test(path, gs)
    assert not dc.admissible
    phi = fit_phi(path.iet_at(0), lambda x: math.cos(2 * math.pi * x))
    with pytest.raises(HypothesisError):
        solve(path, phi, report=dc, gamma_s=gs)


def test_solve_h2_coboundary(h2_path, h2_analysis):
    _, gs, dc = h2_analysis
    coeffs = [0.2, 0.9, -0.5]
    phi = coboundary_of_polynomial(h2_path.iet_at(0), coeffs)
    sol = solve(h2_path, phi, report=dc, gamma_s=gs)
    assert np.linalg.norm(sol.chi_class) <= 1e-8
    xs = np.linspace(0.01, 0.99, 300) * float(h2_path.iet_at(0).total_length())
    exact = P.polyval(xs, coeffs) - P.polyval(sol.base_point, coeffs)
    assert np.max(np.abs(sol.u.eval_many(xs) - exact)) <= 1e-8


# -- higher regularity -------------------------------------------------------------


def test_solve_higher_r1_equals_solve(golden_path, golden_analysis):
    _, gs, dc = golden_analysis
    phi = fit_phi(golden_path.iet_at(0), lambda x: math.cos(2 * math.pi * x))
    s1 = solve(golden_path, phi, report=dc, gamma_s=gs)
    sh = solve_higher(golden_path, phi, 1, report=dc, gamma_s=gs)
    assert np.allclose(s1.chi_class, sh.chi_class)
    assert s1.residual == sh.residual


def test_solve_higher_fourier_derivative(golden_path, golden_analysis):
    _, gs, dc = golden_analysis
    phi = fit_phi(golden_path.iet_at(0), lambda x: math.cos(2 * math.pi * x))
    sol = solve_higher(golden_path, phi, 3, report=dc, gamma_s=gs)
    assert len(sol.residuals) == 3
    assert all(r < 1e-5 for r in sol.residuals)
    xs = np.linspace(0.001, 0.999, 500)
    d_oracle = np.array([(2j * np.pi * np.exp(2j * np.pi * x) / DEN).real for x in xs])
    got = np.array([sol.derivatives[0](x) for x in xs])
    got -= got.mean() - d_oracle.mean()  # derivative fixed up to a constant
    assert np.max(np.abs(got - d_oracle)) <= 1e-4
    assert np.linalg.norm(sol.chi_class) < 1e-6


def test_solve_higher_class_dimension(golden_path, golden_analysis):
    _, gs, dc = golden_analysis
    phi = fit_phi(golden_path.iet_at(0), lambda x: math.cos(2 * math.pi * x))
    for r in (2, 3):
        sol = solve_higher(golden_path, phi, r, report=dc, gamma_s=gs)
        g = mu = 1
        assert sol.class_basis.shape[1] == (g - 1) * (2 * r - 1) + g - mu + 1
