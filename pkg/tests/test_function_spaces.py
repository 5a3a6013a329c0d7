import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st
from mpmath import mp

from ietkit import intmat
from ietkit.backends import working_precision
from ietkit.combinatorics import (
    PermutationPair, absolute_cycle_basis, irreducible_bottom_rows, omega_matrix,
    singularity_cycles,
)
from ietkit.errors import ConsistencyError, DegreeError
from ietkit.function_spaces import (
    PiecewiseFunction, boundary, boundary_vector, bv_seminorm,
    coboundary_of_polynomial, conjugacy_class_basis, poly_space_dims,
    gamma_del_r_basis,
)
from ietkit.iet_core import Iet
from ietkit.instances import golden_rotation, h2_self_similar

AB = PermutationPair.parse("A B / B A")


def test_boundary_of_constants_two_letters():
    T = golden_rotation()
    sing = singularity_cycles(AB)
    one = PiecewiseFunction.from_constants(T, [1.0, 1.0])
    assert np.allclose(boundary(one, sing), 0.0)
    assert np.allclose(boundary_vector(AB, [2.0, -3.0]), 0.0)


def test_boundary_of_continuous_periodic_function():
    T = golden_rotation()
    sing = singularity_cycles(AB)
    phi = PiecewiseFunction.from_callable(lambda x: math.cos(2 * math.pi * x), T)
    assert np.max(np.abs(boundary(phi, sing))) < 1e-10


def test_boundary_detects_jump():
    T = golden_rotation()
    sing = singularity_cycles(AB)
    phi = PiecewiseFunction.from_constants(T, [1.0, 0.0])
    # d = 2 has a single cycle whose signs cancel per letter
    assert np.allclose(boundary(phi, sing), 0.0)
    pi3 = PermutationPair.parse("A B C / C A B")
    T3 = Iet(pi3, [Fraction(1, 3)] * 3)
    chi = np.array([1.0, -2.0, 0.5])
    sing3 = singularity_cycles(pi3)
    M = np.array([[sum((1 if m == (a, "R") else -1 if m == (a, "L") else 0)
                       for m in cyc) for a in pi3.letters]
                  for cyc in sing3.cycles], dtype=float)
    assert np.allclose(boundary_vector(pi3, chi), M @ chi)


@given(st.floats(-3, 3), st.floats(-3, 3),
       st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2))
def test_boundary_linearity(a, b, p0, p1, q0, q1):
    T = _unit_square_iet()
    sing = singularity_cycles(T.pi)
    f = PiecewiseFunction(T, [np.array([p0, p1]), np.array([q0, q1])])
    g = PiecewiseFunction(T, [np.array([q1, p0]), np.array([p1, q0])])
    lhs = boundary(a * f + b * g, sing)
    rhs = a * boundary(f, sing) + b * boundary(g, sing)
    assert np.allclose(lhs, rhs, atol=1e-9)


def _unit_square_iet():
    return Iet(AB, [Fraction(1, 2), Fraction(1, 2) + Fraction(1, 10)])


def test_bv_constants_zero():
    T = golden_rotation()
    phi = PiecewiseFunction.from_constants(T, [3.0, -1.0])
    assert bv_seminorm(phi, 0) == 0.0


def test_bv_linear_is_range():
    T = Iet(AB, [Fraction(2, 5), Fraction(3, 5)])
    phi = PiecewiseFunction.from_global_poly(T, [0.0, 1.0])  # x
    assert abs(bv_seminorm(phi, 0) - 1.0) < 1e-12  # ranges add to total length


def test_bv_cosine_is_four():
    T = golden_rotation()
    phi = PiecewiseFunction.from_callable(lambda x: math.cos(2 * math.pi * x), T, degree=28)
    assert abs(bv_seminorm(phi, 0) - 4.0) < 1e-9


def test_bv_order_exceeds_representation():
    T = golden_rotation()
    phi = PiecewiseFunction.from_constants(T, [1.0, 2.0])
    assert bv_seminorm(phi, 3) == 0.0  # derivatives of constants stay representable


def test_derivative_kills_piecewise_constants():
    T = golden_rotation()
    phi = PiecewiseFunction.from_global_poly(T, [0.0, 0.0, 1.0])
    chi = PiecewiseFunction.from_constants(T, [0.7, -0.2])
    d1 = (phi + chi).derivative()
    d2 = phi.derivative()
    xs = np.linspace(0.05, 0.9, 40)
    with working_precision(T.prec):
        for x in xs:
            assert abs(d1.eval(mp.mpf(float(x))) - d2.eval(mp.mpf(float(x)))) < 1e-9


def test_primitive_zero_mean_means_vanish():
    T = golden_rotation()
    phi = PiecewiseFunction.from_callable(lambda x: math.sin(2 * math.pi * x), T, degree=24)
    prim = phi.primitive_zero_mean()
    assert np.max(np.abs(prim.per_interval_means())) < 1e-14
    d = prim.derivative()
    with working_precision(T.prec):
        for x in (0.11, 0.47, 0.83):
            assert abs(d.eval(mp.mpf(x)) - phi.eval(mp.mpf(x))) < 1e-9


def test_poly_space_dims_examples():
    assert poly_space_dims(AB, 1, 1) == (2, 2, 1)
    ew_pi = PermutationPair.parse("A B C D E F G H I / I C G B E A H F D")
    assert poly_space_dims(ew_pi, 1, 3) == (27, 16, 3)


def test_poly_space_dims_rejects_bad_mu():
    from ietkit.errors import StructuralError
    with pytest.raises(StructuralError):
        poly_space_dims(AB, 2, 1)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_dims_match_exact_rank_small(d):
    for pi in irreducible_bottom_rows(d):
        for r in (1, 2, 3):
            poly_space_dims(pi, 0, r)  # raises ConsistencyError on mismatch


def test_kernel_of_boundary_has_absolute_dimension():
    for d in (2, 3, 4, 5, 6):
        for pi in irreducible_bottom_rows(d):
            g = omega_matrix(pi).genus
            assert len(absolute_cycle_basis(pi)) == 2 * g
            # and it coincides with the column space of the intersection form
            om_cols = intmat.column_space_basis(omega_matrix(pi).matrix)
            assert intmat.same_subspace(om_cols, absolute_cycle_basis(pi))


def test_coboundary_pointwise():
    T = h2_self_similar()
    coeffs = [0.3, -0.4, 1.1, 0.2]
    phi = coboundary_of_polynomial(T, coeffs)
    from numpy.polynomial import polynomial as P
    rng = np.random.default_rng(2)
    with working_precision(T.prec):
        for _ in range(40):
            x = mp.mpf(float(rng.uniform(0.02, 0.98))) * T.total_length()
            try:
                expected = P.polyval(float(T.evaluate(x)), coeffs) - P.polyval(float(x), coeffs)
            except Exception:
                continue
            assert abs(phi.eval(x) - expected) < 1e-10


def test_quotient_dimension_formula_golden():
    T = golden_rotation()
    g_dir = np.array([[0.8506508083520399], [-0.5257311121191336]])
    for r in (1, 2, 3, 4):
        Q, Bd, Bt = conjugacy_class_basis(T, r, g_dir)
        g, mu = 1, 1
        assert Q.shape[1] == (g - 1) * (2 * r - 1) + g - mu + 1
        assert Bd.shape[1] == (2 * g - 1) * r + 1
        assert Bt.shape[1] == mu + r - 1


def test_quotient_dimension_formula_h2(h2_analysis):
    _, gs, _ = h2_analysis
    T = h2_self_similar(depth_hint=2500)
    r = 3
    Q, Bd, Bt = conjugacy_class_basis(T, r, gs.basis)
    g, mu = 2, 2
    assert Bd.shape[1] == (2 * g - 1) * r + 1
    assert Bt.shape[1] == mu + r - 1
    assert Q.shape[1] == ((2 * g - 1) * r + 1) - (mu + r - 1)


def test_gamma_del_basis_orthonormal():
    T = golden_rotation()
    B = gamma_del_r_basis(T, 3)
    assert np.allclose(B.T @ B, np.eye(B.shape[1]), atol=1e-12)


def test_piecewise_json_roundtrip():
    T = golden_rotation()
    phi = PiecewiseFunction(T, [np.array([1.0, 0.5]), np.array([-2.0])],
                            samples=[np.linspace(0, 1, 9), np.zeros(9)],
                            sample_err=1e-9)
    again = PiecewiseFunction.from_json(T, phi.to_json())
    with working_precision(T.prec):
        for x in (0.1, 0.5, 0.9):
            assert abs(phi.eval(mp.mpf(x)) - again.eval(mp.mpf(x))) < 1e-12
