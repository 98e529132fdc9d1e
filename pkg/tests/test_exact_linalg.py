"""Exact linear algebra checked against sympy as an independent oracle."""
from __future__ import annotations

import itertools
import random
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from crncert.exact_linalg import (
    DimensionMismatch,
    EmptyIndexSet,
    NotSquare,
    OutOfRange,
    RatMatrix,
    ShapeMismatch,
    ZeroMatrix,
    compound,
    det,
    hadamard_compound,
    is_P0,
    kernel_basis,
    minor,
    rank,
    reduced_determinant,
    subsets,
)

_ENTRY = st.fractions(min_value=-4, max_value=4, max_denominator=3)
_SMALL_INT = st.integers(min_value=-2, max_value=2)


def _sym(A: RatMatrix) -> sympy.Matrix:
    return sympy.Matrix(A.nrows, A.ncols, lambda i, j: sympy.Rational(A[i, j].numerator, A[i, j].denominator))


def _frac(x) -> Fraction:
    x = sympy.Rational(x)
    return Fraction(int(x.p), int(x.q))


@st.composite
def matrices(draw, n=None, m=None, entries=_ENTRY, max_dim=4):
    n = draw(st.integers(1, max_dim)) if n is None else n
    m = draw(st.integers(1, max_dim)) if m is None else m
    return RatMatrix([[draw(entries) for _ in range(m)] for _ in range(n)])


@st.composite
def product_pairs(draw, entries=_SMALL_INT):
    n, k, m = (draw(st.integers(1, 4)) for _ in range(3))
    return draw(matrices(n, k, entries)), draw(matrices(k, m, entries))


@st.composite
def square_pairs(draw, entries=_SMALL_INT):
    """A (n x m) and B (m x n) so that AB is square."""
    n, m = draw(st.integers(1, 4)), draw(st.integers(1, 4))
    return draw(matrices(n, m, entries)), draw(matrices(m, n, entries))


def _principal_minor_sum(C: RatMatrix, r: int) -> Fraction:
    S = _sym(C)
    return sum((_frac(S.extract(list(a), list(a)).det()) for a in itertools.combinations(range(C.nrows), r)), Fraction(0))


def _charpoly_coefficient(C: RatMatrix, r: int) -> Fraction:
    # det(lam I - C) = sum_k (-1)^k E_k lam^(n-k), E_k the k-th principal minor sum
    lam = sympy.Symbol("lam")
    coeffs = _sym(C).charpoly(lam).all_coeffs()
    return _frac(coeffs[r]) * (-1) ** r


# -- oracles -----------------------------------------------------------------


@settings(max_examples=200)
@given(matrices())
def test_rank_matches_sympy(A):
    assert rank(A) == _sym(A).rank()


@settings(max_examples=200)
@given(st.integers(1, 5).flatmap(lambda n: matrices(n, n)))
def test_det_matches_sympy(A):
    assert det(A) == _frac(_sym(A).det())


@settings(max_examples=100)
@given(matrices(), st.data())
def test_minor_matches_submatrix_determinant(A, data):
    k = data.draw(st.integers(1, min(A.nrows, A.ncols)))
    alpha = data.draw(st.sampled_from(subsets(A.nrows, k)))
    beta = data.draw(st.sampled_from(subsets(A.ncols, k)))
    assert minor(A, alpha, beta) == _frac(_sym(A).extract(list(alpha), list(beta)).det())


@settings(max_examples=100)
@given(matrices(), st.data())
def test_compound_entries_are_minors_in_lex_order(A, data):
    k = data.draw(st.integers(1, min(A.nrows, A.ncols)))
    C = compound(A, k)
    rows, cols = subsets(A.nrows, k), subsets(A.ncols, k)
    assert C.shape == (len(rows), len(cols))
    for i, a in enumerate(rows):
        for j, b in enumerate(cols):
            assert C[i, j] == minor(A, a, b)


@settings(max_examples=200)
@given(product_pairs(), st.data())
def test_cauchy_binet(pair, data):
    A, B = pair
    k = data.draw(st.integers(1, min(A.nrows, B.ncols, A.ncols)))
    assert compound(A @ B, k) == compound(A, k) @ compound(B, k)


def test_subsets_are_lexicographic_and_complete():
    for d in range(1, 7):
        for k in range(1, d + 1):
            assert subsets(d, k) == list(itertools.combinations(range(d), k))


@settings(max_examples=100)
@given(matrices(entries=_SMALL_INT), st.data())
def test_hadamard_compound_is_entrywise_product(A, data):
    B = data.draw(matrices(A.nrows, A.ncols, _SMALL_INT))
    r = data.draw(st.integers(1, min(A.shape)))
    assert hadamard_compound(A, B, r) == compound(A, r).hadamard(compound(B, r))


@settings(max_examples=200)
@given(square_pairs())
def test_reduced_determinant_matches_both_oracles(pair):
    A, B = pair
    if A.is_zero():
        with pytest.raises(ZeroMatrix):
            reduced_determinant(A, B)
        return
    r = rank(A)
    value = reduced_determinant(A, B)
    C = A @ B
    assert value == _principal_minor_sum(C, r)
    assert value == _charpoly_coefficient(C, r)


@settings(max_examples=200)
@given(square_pairs())
def test_reduced_determinant_nonzero_iff_rank_preserved(pair):
    A, B = pair
    if A.is_zero():
        return
    assert (reduced_determinant(A, B) != 0) == (rank(A @ B @ A) == rank(A))


def test_reduced_determinant_five_parameter_example():
    A = RatMatrix([[-1, 0], [1, -1], [1, 1]])
    rng = random.Random(7)
    for _ in range(20):
        a, b, c, d, e = (Fraction(rng.randint(1, 50), rng.randint(1, 50)) for _ in range(5))
        B = RatMatrix([[-a, b, c], [0, -d, e]])
        assert reduced_determinant(A, B) == a * d + a * e + 2 * (b * e + c * d)
    # second compounds as printed next to the example
    assert compound(A, 2) == RatMatrix([[1], [-1], [2]])


@settings(max_examples=100)
@given(matrices())
def test_kernel_basis_spans_nullspace(A):
    K = kernel_basis(A)
    assert len(K) == A.ncols - rank(A)
    for v in K:
        assert all(x == 0 for x in A.matvec(v))
    if K:
        assert rank(RatMatrix(K)) == len(K)


@settings(max_examples=100)
@given(st.integers(1, 4).flatmap(lambda n: matrices(n, n, _SMALL_INT)))
def test_is_P0_matches_principal_minor_enumeration(A):
    S = _sym(A)
    expected = all(
        S.extract(list(a), list(a)).det() >= 0 for k in range(1, A.nrows + 1) for a in itertools.combinations(range(A.nrows), k)
    )
    assert is_P0(A) == expected


# -- errors ------------------------------------------------------------------

_A = RatMatrix([[1, 2], [3, 4], [5, 6]])


@pytest.mark.parametrize(
    "call, exc",
    [
        (lambda: minor(_A, [0, 5], [0, 1]), OutOfRange),
        (lambda: minor(_A, [1, 0], [0, 1]), OutOfRange),
        (lambda: minor(_A, [], []), EmptyIndexSet),
        (lambda: minor(_A, [0, 1], [0]), DimensionMismatch),
        (lambda: det(_A), NotSquare),
        (lambda: compound(_A, 3), OutOfRange),
        (lambda: compound(_A, 0), OutOfRange),
        (lambda: _A @ _A, ShapeMismatch),
        (lambda: reduced_determinant(_A, _A), ShapeMismatch),
        (lambda: reduced_determinant(RatMatrix.zeros(2, 2), RatMatrix.zeros(2, 2)), ZeroMatrix),
        (lambda: RatMatrix([[1, 2], [3]]), ShapeMismatch),
    ],
)
def test_invalid_input_raises(call, exc):
    with pytest.raises(exc):
        call()


def test_linalg_errors_are_value_errors():
    with pytest.raises(ValueError):
        det(_A)
