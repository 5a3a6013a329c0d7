import math
from fractions import Fraction

import numpy as np
import pytest
from mpmath import mp

from ietkit.cocycle_analysis import (
    DcTestOptions, LyapunovOptions, cf_crosscheck, continued_fraction, dc_test,
    lyapunov_spectrum, run_lengths, stable_space,
)
from ietkit.errors import ConnectionError_, DepthError
from ietkit.instances import (
    alpha_from_quotients, golden_rotation, rotation_from_quotients, sqrt2_rotation,
)
from ietkit.rauzy_veech import iterate

LOG_PHI = math.log((1 + math.sqrt(5)) / 2)


def test_golden_exponents(golden_path):
    rep = lyapunov_spectrum(golden_path)
    assert abs(rep.exponents[0] - LOG_PHI) < 5e-3
    assert abs(rep.exponents[0] + rep.exponents[1]) < 1e-6
    assert rep.mu_estimate == 1


def test_determinant_one_exponent_sum(h2_path):
    rep = lyapunov_spectrum(h2_path)
    assert abs(sum(rep.exponents)) < 1e-6


def test_symplectic_pairing(h2_path):
    rep = lyapunov_spectrum(h2_path, LyapunovOptions(discard_fraction=0.3))
    ex = rep.exponents_absolute
    for i in range(len(ex) // 2):
        assert abs(ex[i] + ex[-(i + 1)]) < 2e-3


def test_min_windows_enforced():
    path = iterate(golden_rotation(), 20)
    with pytest.raises(DepthError):
        lyapunov_spectrum(path)


def test_stable_space_matches_eigenvector(golden_path):
    # contracting eigenvector of the period matrix [[1,1],[1,2]]
    ss = stable_space(golden_path)
    M = np.array([[1.0, 1.0], [1.0, 2.0]])
    evals, evecs = np.linalg.eig(M)
    v = evecs[:, np.argmin(np.abs(evals))]
    v /= np.linalg.norm(v)
    got = ss.basis.ravel()
    assert min(np.linalg.norm(got - v), np.linalg.norm(got + v)) < 1e-8


def test_stable_space_depth_doubling_invariance(h2_path):
    rep = lyapunov_spectrum(h2_path, LyapunovOptions(discard_fraction=0.3))
    K = len(h2_path.acceleration().windows)
    s1 = stable_space(h2_path, depth=K // 2, report=rep)
    s2 = stable_space(h2_path, depth=K, report=rep)
    # Grassmannian gap via projection difference
    P1 = s1.basis @ s1.basis.T
    P2 = s2.basis @ s2.basis.T
    assert np.linalg.norm(P1 - P2, 2) < 1e-6


def test_stable_space_exact_oracle_self_similar(h2_path):
    from ietkit.instances import h2_loop
    loop = h2_loop()
    M = np.array(loop.loop_matrix.rows, float)
    evals, evecs = np.linalg.eig(M)
    idx = np.argsort(np.abs(evals))[:2]
    exact = np.real(evecs[:, idx])
    exact, _ = np.linalg.qr(exact)
    ss = stable_space(h2_path)
    assert ss.mu == 2
    P1 = exact @ exact.T
    P2 = ss.basis @ ss.basis.T
    assert np.linalg.norm(P1 - P2, 2) < 1e-8


def test_dc_golden(golden_path, golden_analysis):
    _, _, dc = golden_analysis
    assert dc.eta_hat < 0.02
    assert dc.cond_a.passed and dc.cond_b.passed and dc.cond_c.passed
    assert dc.cond_d.passed and "automatic" in dc.cond_d.note  # mu = g = 1
    assert 1.8 < dc.theta_hat < 2.2
    assert 0.9 < dc.sigma_hat < 1.1
    assert dc.admissible


def test_dc_admissible_recomputed(golden_analysis):
    _, _, dc = golden_analysis
    assert dc.admissible
    dc.eta_hat = 10.0  # stored estimates drive the flag
    assert not dc.admissible
    dc.eta_hat = 0.0


def test_dc_h2(h2_analysis):
    _, _, dc = h2_analysis
    assert dc.admissible and dc.mu == 2
    assert dc.eta_hat < 0.02
    assert all(c.passed for c in (dc.cond_a, dc.cond_b, dc.cond_c, dc.cond_d))


def test_dc_report_serialization(golden_analysis):
    _, _, dc = golden_analysis
    payload = dc.to_json()
    assert payload["admissible"] is True
    assert set(payload["defaults"]) == {"eps_c", "floor", "seed"}
    csv_text = dc.to_csv()
    assert csv_text.splitlines()[0].startswith("condition,")


def test_continued_fraction_golden():
    with mp.workprec(300):
        g = (mp.sqrt(5) - 1) / 2
    qs, dens = continued_fraction(g, 12, prec=300)
    assert qs == (1,) * 12
    assert dens[:6] == (1, 2, 3, 5, 8, 13)


def test_continued_fraction_rational_raises():
    with pytest.raises(ConnectionError_):
        continued_fraction(Fraction(5, 17), 20)


def test_run_lengths():
    from ietkit.rauzy_veech import StepType
    seq = [StepType.BOTTOM, StepType.TOP, StepType.TOP, StepType.BOTTOM]
    assert run_lengths(seq) == (1, 2, 1)


def test_cf_crosscheck_golden():
    with mp.workprec(800):
        g = (mp.sqrt(5) - 1) / 2
    cc = cf_crosscheck(g, 400, prec=800)
    assert cc.runs_match
    assert set(cc.quotients) == {1}
    assert cc.eta_hat < .05 and cc.cf_slope < .05
    assert cc.difference < 0.05


def test_cf_crosscheck_sqrt2():
    with mp.workprec(800):
        a = mp.sqrt(2) - 1
    cc = cf_crosscheck(a, 300, prec=800)
    assert cc.runs_match
    assert set(cc.quotients) == {2}
    assert cc.eta_hat < 0.05 and cc.cf_slope < 0.05


def test_cf_crosscheck_growing_quotients():
    quotients = list(range(1, 26))
    alpha = alpha_from_quotients(quotients, prec=2000)
    cc = cf_crosscheck(alpha, 320, prec=2000)
    assert cc.runs_match
    assert cc.quotients[:6] == (1, 2, 3, 4, 5, 6)
    assert cc.eta_hat > 0.0
    assert cc.difference < 0.1
