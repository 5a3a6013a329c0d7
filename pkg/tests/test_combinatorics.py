import json

import pytest
from hypothesis import given, strategies as st

from ietkit import intmat
from ietkit.combinatorics import (
    PermutationPair, check_irreducible, euler_identity_holds,
    gamma_boundary_matrix, irreducible_bottom_rows, omega_matrix,
    singularity_cycles,
)
from ietkit.errors import ReducibleError, StructuralError

AB = PermutationPair.parse("A B / B A")
ABCD = PermutationPair.parse("A B C D / D C B A")


def test_irreducibility_examples():
    assert check_irreducible(AB)
    assert not check_irreducible(PermutationPair.from_rows("AB", "AB"))
    assert check_irreducible(ABCD)  # every proper prefix differs


def test_malformed_rows_rejected():
    with pytest.raises(StructuralError):
        PermutationPair.from_rows(("A", "B"), ("A", "A"))
    with pytest.raises(StructuralError):
        PermutationPair.from_rows(("A", "B"), ("A", "C"))
    with pytest.raises(StructuralError):
        PermutationPair.from_rows(("A",), ("A",))


def test_omega_two_letters():
    om = omega_matrix(AB)
    assert om.matrix == ((0, 1), (-1, 0))
    assert om.rank == 2 and om.genus == 1


def test_omega_reversal_four_letters():
    om = omega_matrix(ABCD)
    assert om.rank == 4 and om.genus == 2


def test_omega_rejects_reducible():
    with pytest.raises(ReducibleError):
        omega_matrix(PermutationPair.from_rows("AB", "AB"))


def test_singularity_cycle_two_letters():
    sing = singularity_cycles(AB)
    assert sing.s == 1
    (cycle,) = sing.cycles
    assert len(cycle) == 4
    # the traced cycle visits (A,R) -> (B,L) -> (A,L) -> (B,R)
    sigma = sing.sigma_map()
    assert sigma[("A", "R")] == ("B", "L")
    assert sigma[("B", "L")] == ("A", "L")
    assert sigma[("A", "L")] == ("B", "R")
    assert sigma[("B", "R")] == ("A", "R")


def test_euler_identity_examples():
    assert euler_identity_holds(AB)      # 2 = 2*1 + 1 - 1
    assert euler_identity_holds(ABCD)    # 4 = 2*2 + 1 - 1
    assert singularity_cycles(ABCD).s == 1


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_exhaustive_invariants_small(d):
    # omega/sigma invariants are relabeling-invariant, so canonical top
    # rows exhaust all cases
    for pi in irreducible_bottom_rows(d):
        om = omega_matrix(pi)
        assert om.rank % 2 == 0
        assert intmat.mat_eq(
            om.matrix, tuple(tuple(-x for x in r) for r in intmat.transpose(om.matrix))
        )
        assert all(x in (-1, 0, 1) for r in om.matrix for x in r)
        assert euler_identity_holds(pi)


@given(st.integers(2, 5), st.randoms(use_true_random=False))
def test_relabeling_invariance(d, rnd):
    pis = list(irreducible_bottom_rows(d))
    pi = pis[rnd.randrange(len(pis))]
    letters = list(pi.letters)
    rnd.shuffle(letters)
    relabeled = pi.relabel(dict(zip(pi.letters, letters)))
    assert omega_matrix(relabeled).rank == omega_matrix(pi).rank
    c1 = sorted(len(c) for c in singularity_cycles(relabeled).cycles)
    c2 = sorted(len(c) for c in singularity_cycles(pi).cycles)
    assert c1 == c2


def test_boundary_matrix_columns_sum_to_zero():
    for pi in (AB, ABCD, PermutationPair.parse("A B C / C A B")):
        M = gamma_boundary_matrix(pi)
        for col in zip(*M):
            assert sum(col) == 0


def test_serialization_roundtrip():
    for text in ("A B / B A", "A B C D / D C B A", "A B C / C A B"):
        pi = PermutationPair.parse(text)
        assert str(pi) == text
        again = PermutationPair.from_json(json.dumps(pi.to_json()))
        assert again == pi


def test_swapped_is_inverse_combinatorics():
    sw = ABCD.swapped()
    assert sw.top_order() == ABCD.bottom_order()
    assert sw.bottom_order() == ABCD.top_order()
