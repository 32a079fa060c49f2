from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qdouble.algebra_core import (QZ, ModSolver, RootSum, cyclotomic_polynomial, hermite_normal_form,
                                  matmul, rational_det, rational_inverse, rootsum_norm_sq,
                                  smith_normal_form, snf_diagonal)
from qdouble.errors import NoSolution, NotRational

small_mats = st.integers(1, 4).flatmap(
    lambda m: st.integers(1, 4).flatmap(
        lambda n: st.lists(st.lists(st.integers(-20, 20), min_size=n, max_size=n), min_size=m, max_size=m)))


def test_qz_reduces_mod_one():
    assert str(QZ(7, 4)) == "3/4"
    assert QZ(-1, 3) == QZ(2, 3)
    assert QZ.parse("5/2") == QZ(1, 2)
    assert QZ(Fraction(9, 6)).as_fraction() == Fraction(1, 2)


def test_snf_examples():
    assert snf_diagonal([[2, 4], [6, 8]]) == [2, 4]
    assert snf_diagonal([[0, 0], [0, 0]]) == [0, 0]
    assert snf_diagonal([[4, 0], [0, 6]]) == [2, 12]


@given(small_mats)
def test_snf_certificate(A):
    U, D, V = smith_normal_form(A)
    assert matmul(matmul(U, A), V) == D
    assert abs(rational_det(U)) == 1 and abs(rational_det(V)) == 1
    diag = [D[i][i] for i in range(min(len(D), len(D[0])))]
    assert all(x >= 0 for x in diag)
    for a, b in zip(diag, diag[1:]):
        assert (b == 0) if a == 0 else (b % a == 0)
    off = [D[i][j] for i in range(len(D)) for j in range(len(D[0])) if i != j]
    assert not any(off)


@given(small_mats)
def test_hnf_is_canonical(A):
    n = len(A[0])
    H = hermite_normal_form(A, n)
    # adding a combination of rows does not change the lattice
    extra = [sum(r[j] for r in A) for j in range(n)]
    assert hermite_normal_form(A + [extra], n) == H
    assert hermite_normal_form(list(reversed(A)), n) == H


def test_rational_inverse():
    A = [[2, 1], [1, 1]]
    assert matmul(A, rational_inverse(A)) == [[1, 0], [0, 1]]
    assert rational_det([[Fraction(1, 2), 0], [0, 4]]) == 2


def test_modsolver_solution_and_inconsistency():
    S = ModSolver([[2, 0], [0, 3]])
    x = S.solve([QZ(1, 2), QZ(1, 3)])
    assert (2 * x[0].as_fraction()) % 1 == Fraction(1, 2)
    assert (3 * x[1].as_fraction()) % 1 == Fraction(1, 3)
    with pytest.raises(NoSolution):
        ModSolver([[1], [1]]).solve([QZ(0), QZ(1, 2)])


@given(small_mats, st.integers(2, 12))
def test_modsolver_batch_matches_single(A, den):
    rng = np.random.default_rng(len(A) * 31 + den)
    x = rng.integers(0, den, size=len(A[0]))
    b = (np.array(A) @ x) % den
    S = ModSolver(A)
    X, d2 = S.solve_batch(b[:, None], den)
    single = S.solve([QZ(int(v), den) for v in b])
    assert [QZ(int(v), d2) for v in X[:, 0]] == single
    # A x = b / den modulo 1
    lhs = np.array(A) @ X[:, 0]
    assert not ((lhs * den - b * d2) % (den * d2)).any()


def test_cyclotomic_polynomials():
    assert cyclotomic_polynomial(1) == (-1, 1)
    assert cyclotomic_polynomial(4) == (1, 0, 1)
    assert cyclotomic_polynomial(8) == (1, 0, 0, 0, 1)
    assert cyclotomic_polynomial(6) == (1, -1, 1)


@given(st.integers(2, 24))
def test_sum_of_all_roots_vanishes(n):
    assert RootSum(n, [1] * n).is_zero()
    assert not RootSum(n, [1] + [0] * (n - 1)).is_zero()


def test_rootsum_norms():
    # quadratic Gauss sum for p = 5 has |g|^2 = 5
    g = RootSum.from_phases([QZ(x * x, 5) for x in range(5)])
    assert rootsum_norm_sq(g) == 5
    assert RootSum(8, [0, 1, 0, 0, 0, 0, 0, 0]) == RootSum(4, [1, 0, 0, 0]).lift(8) * \
        RootSum(8, [0, 1, 0, 0, 0, 0, 0, 0])
    with pytest.raises(NotRational):
        RootSum(4, [0, 1, 0, 0]).rational_value()
    assert abs(complex(RootSum(4, [0, 1, 0, 0]).numeric()) - 1j) < 1e-30
