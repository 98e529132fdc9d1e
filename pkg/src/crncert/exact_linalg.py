"""Exact rational linear algebra.

Everything here works on :class:`RatMatrix`, an immutable dense matrix of
:class:`fractions.Fraction` entries. Minors are computed by Laplace expansion
along the first row of the submatrix, memoized per matrix on the pair
``(row_set, col_set)`` so that enumerating all minors of all sizes shares work.
Rank, determinants and kernels go through fraction-free (Bareiss) elimination on
an integer-scaled copy.

Compound matrices index their rows and columns by k-subsets in lexicographic
order (the order produced by :func:`itertools.combinations`) everywhere.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

__all__ = [
    "LinalgError",
    "DimensionMismatch",
    "OutOfRange",
    "EmptyIndexSet",
    "ShapeMismatch",
    "ZeroMatrix",
    "NotSquare",
    "RatMatrix",
    "as_fraction",
    "subsets",
    "rank",
    "minor",
    "det",
    "compound",
    "hadamard_compound",
    "reduced_determinant",
    "kernel_basis",
    "is_P0",
]


class LinalgError(ValueError):
    """Base class for errors raised by this module."""


class DimensionMismatch(LinalgError):
    pass


class OutOfRange(LinalgError):
    pass


class EmptyIndexSet(OutOfRange):
    """0x0 minors are deliberately undefined here."""


class ShapeMismatch(LinalgError):
    pass


class ZeroMatrix(LinalgError):
    pass


class NotSquare(LinalgError):
    pass


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        # floats are accepted only when they are exactly representable
        return Fraction(x)
    return Fraction(x)


def subsets(d: int, k: int) -> list[tuple[int, ...]]:
    """All k-subsets of range(d) in the global lexicographic order."""
    return list(itertools.combinations(range(d), k))


class RatMatrix:
    """Immutable dense matrix with exact rational entries."""

    __slots__ = ("_rows", "nrows", "ncols", "_minor_cache", "_int_rows", "_hash")

    def __init__(self, rows: Iterable[Iterable], ncols: int | None = None):
        data = tuple(tuple(as_fraction(v) for v in row) for row in rows)
        if data:
            width = len(data[0])
            if any(len(r) != width for r in data):
                raise ShapeMismatch("ragged rows")
            if ncols is not None and ncols != width:
                raise ShapeMismatch(f"expected {ncols} columns, got {width}")
        else:
            width = ncols or 0
        self._rows = data
        self.nrows = len(data)
        self.ncols = width
        self._minor_cache: dict = {}
        self._int_rows = None
        self._hash = None

    # -- constructors -------------------------------------------------
    @classmethod
    def zeros(cls, n: int, m: int) -> "RatMatrix":
        return cls([[0] * m for _ in range(n)], ncols=m)

    @classmethod
    def identity(cls, n: int) -> "RatMatrix":
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)], ncols=n)

    @classmethod
    def diag(cls, values: Sequence) -> "RatMatrix":
        n = len(values)
        return cls([[values[i] if i == j else 0 for j in range(n)] for i in range(n)], ncols=n)

    @classmethod
    def from_columns(cls, cols: Sequence[Sequence], nrows: int | None = None) -> "RatMatrix":
        if not cols:
            return cls.zeros(nrows or 0, 0)
        n = len(cols[0])
        return cls([[c[i] for c in cols] for i in range(n)], ncols=len(cols))

    # -- basic access -------------------------------------------------
    @property
    def shape(self) -> tuple[int, int]:
        return (self.nrows, self.ncols)

    def __getitem__(self, ij: tuple[int, int]) -> Fraction:
        i, j = ij
        return self._rows[i][j]

    def row(self, i: int) -> tuple[Fraction, ...]:
        return self._rows[i]

    def col(self, j: int) -> tuple[Fraction, ...]:
        return tuple(r[j] for r in self._rows)

    def rows(self) -> tuple[tuple[Fraction, ...], ...]:
        return self._rows

    def columns(self) -> list[tuple[Fraction, ...]]:
        return [self.col(j) for j in range(self.ncols)]

    def tolist(self) -> list[list[Fraction]]:
        return [list(r) for r in self._rows]

    def to_numpy(self):
        import numpy as np

        return np.array([[float(v) for v in r] for r in self._rows], dtype=float).reshape(
            self.nrows, self.ncols
        )

    def __iter__(self) -> Iterator[tuple[Fraction, ...]]:
        return iter(self._rows)

    def __eq__(self, other) -> bool:
        if not isinstance(other, RatMatrix):
            return NotImplemented
        return self.shape == other.shape and self._rows == other._rows

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.shape, self._rows))
        return self._hash

    def __repr__(self) -> str:
        body = ", ".join("[" + ", ".join(str(v) for v in r) + "]" for r in self._rows)
        return f"RatMatrix([{body}])"

    def is_zero(self) -> bool:
        return all(v == 0 for r in self._rows for v in r)

    # -- algebra ------------------------------------------------------
    @property
    def T(self) -> "RatMatrix":
        return RatMatrix([[self._rows[i][j] for i in range(self.nrows)] for j in range(self.ncols)], ncols=self.nrows)

    def __matmul__(self, other: "RatMatrix") -> "RatMatrix":
        if self.ncols != other.nrows:
            raise ShapeMismatch(f"cannot multiply {self.shape} by {other.shape}")
        cols = other.columns()
        return RatMatrix(
            [[sum((a * b for a, b in zip(r, c)), Fraction(0)) for c in cols] for r in self._rows],
            ncols=other.ncols,
        )

    def _check_same(self, other: "RatMatrix") -> None:
        if self.shape != other.shape:
            raise ShapeMismatch(f"{self.shape} vs {other.shape}")

    def __add__(self, other: "RatMatrix") -> "RatMatrix":
        self._check_same(other)
        return RatMatrix([[a + b for a, b in zip(r, s)] for r, s in zip(self._rows, other._rows)], ncols=self.ncols)

    def __sub__(self, other: "RatMatrix") -> "RatMatrix":
        self._check_same(other)
        return RatMatrix([[a - b for a, b in zip(r, s)] for r, s in zip(self._rows, other._rows)], ncols=self.ncols)

    def __neg__(self) -> "RatMatrix":
        return RatMatrix([[-a for a in r] for r in self._rows], ncols=self.ncols)

    def scale(self, c) -> "RatMatrix":
        c = as_fraction(c)
        return RatMatrix([[c * a for a in r] for r in self._rows], ncols=self.ncols)

    def hadamard(self, other: "RatMatrix") -> "RatMatrix":
        self._check_same(other)
        return RatMatrix([[a * b for a, b in zip(r, s)] for r, s in zip(self._rows, other._rows)], ncols=self.ncols)

    def positive_part(self) -> "RatMatrix":
        return RatMatrix([[max(a, Fraction(0)) for a in r] for r in self._rows], ncols=self.ncols)

    def negative_part(self) -> "RatMatrix":
        """Entrywise max(-a, 0), so that A = A_+ - A_-."""
        return RatMatrix([[max(-a, Fraction(0)) for a in r] for r in self._rows], ncols=self.ncols)

    def hstack(self, other: "RatMatrix") -> "RatMatrix":
        if self.nrows != other.nrows:
            raise ShapeMismatch("row counts differ")
        return RatMatrix([r + s for r, s in zip(self._rows, other._rows)], ncols=self.ncols + other.ncols)

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "RatMatrix":
        return RatMatrix([[self._rows[i][j] for j in cols] for i in rows], ncols=len(cols))

    def matvec(self, v: Sequence) -> list[Fraction]:
        return [sum((a * as_fraction(b) for a, b in zip(r, v)), Fraction(0)) for r in self._rows]

    # -- integer view used by Bareiss ---------------------------------
    def _integer_rows(self) -> list[list[int]]:
        """Each row multiplied by the lcm of its denominators (row scaling keeps rank/kernel)."""
        if self._int_rows is None:
            out = []
            for r in self._rows:
                lcm = 1
                for v in r:
                    lcm = lcm * v.denominator // math.gcd(lcm, v.denominator)
                out.append([int(v * lcm) for v in r])
            self._int_rows = out
        return [list(r) for r in self._int_rows]

    # -- memoized minors ----------------------------------------------
    def _minor(self, rows: tuple[int, ...], cols: tuple[int, ...]) -> Fraction:
        key = (rows, cols)
        cache = self._minor_cache
        hit = cache.get(key)
        if hit is not None:
            return hit
        if len(rows) == 1:
            val = self._rows[rows[0]][cols[0]]
        else:
            first = self._rows[rows[0]]
            rest = rows[1:]
            val = Fraction(0)
            for pos, j in enumerate(cols):
                a = first[j]
                if a == 0:
                    continue
                sub = self._minor(rest, cols[:pos] + cols[pos + 1:])
                if sub:
                    val += a * sub if pos % 2 == 0 else -a * sub
        cache[key] = val
        return val


def _check_index_set(idx: Sequence[int], bound: int, what: str) -> tuple[int, ...]:
    t = tuple(idx)
    if not t:
        raise EmptyIndexSet(f"empty {what} index set")
    if any(b <= a for a, b in zip(t, t[1:])):
        raise OutOfRange(f"{what} indices must be strictly increasing: {t}")
    if t[0] < 0 or t[-1] >= bound:
        raise OutOfRange(f"{what} index out of range: {t}")
    return t


def minor(A: RatMatrix, alpha: Sequence[int], beta: Sequence[int]) -> Fraction:
    """A[alpha|beta]: determinant of the rows alpha and columns beta of A."""
    if len(alpha) != len(beta):
        raise DimensionMismatch(f"|alpha| = {len(alpha)} but |beta| = {len(beta)}")
    a = _check_index_set(alpha, A.nrows, "row")
    b = _check_index_set(beta, A.ncols, "column")
    return A._minor(a, b)


def _bareiss(rows: list[list[int]]) -> tuple[list[list[int]], list[int], int]:
    """Fraction-free row echelon form.

    Returns (echelon rows, pivot columns, sign of the row permutation).
    """
    M = rows
    n = len(M)
    m = len(M[0]) if n else 0
    pivots: list[int] = []
    prev = 1
    r = 0
    sign = 1
    for c in range(m):
        if r >= n:
            break
        p = next((i for i in range(r, n) if M[i][c] != 0), None)
        if p is None:
            continue
        if p != r:
            M[r], M[p] = M[p], M[r]
            sign = -sign
        piv = M[r][c]
        for i in range(r + 1, n):
            mic = M[i][c]
            Mi, Mr = M[i], M[r]
            for j in range(c + 1, m):
                Mi[j] = (piv * Mi[j] - mic * Mr[j]) // prev
            Mi[c] = 0
        pivots.append(c)
        prev = piv
        r += 1
    return M, pivots, sign


def rank(A: RatMatrix) -> int:
    if A.nrows == 0 or A.ncols == 0:
        return 0
    _, piv, _ = _bareiss(A._integer_rows())
    return len(piv)


def det(A: RatMatrix) -> Fraction:
    """Determinant via Bareiss (exact)."""
    if A.nrows != A.ncols:
        raise NotSquare(f"shape {A.shape}")
    n = A.nrows
    if n == 0:
        raise EmptyIndexSet("0x0 determinant")
    scale = Fraction(1)
    for r in A.rows():
        lcm = 1
        for v in r:
            lcm = lcm * v.denominator // math.gcd(lcm, v.denominator)
        scale *= lcm
    M, piv, sign = _bareiss(A._integer_rows())
    if len(piv) < n:
        return Fraction(0)
    return Fraction(sign * M[n - 1][n - 1]) / scale


def compound(A: RatMatrix, k: int) -> RatMatrix:
    """k-th multiplicative compound, indexed lexicographically."""
    if not 1 <= k <= min(A.nrows, A.ncols):
        raise OutOfRange(f"k = {k} not in [1, {min(A.nrows, A.ncols)}]")
    rs = subsets(A.nrows, k)
    cs = subsets(A.ncols, k)
    return RatMatrix([[A._minor(a, b) for b in cs] for a in rs], ncols=len(cs))


def hadamard_compound(A: RatMatrix, B: RatMatrix, r: int) -> RatMatrix:
    """A o^r B: entrywise product of the r-th compounds of equally shaped A and B."""
    if A.shape != B.shape:
        raise ShapeMismatch(f"{A.shape} vs {B.shape}")
    return compound(A, r).hadamard(compound(B, r))


def reduced_determinant(A: RatMatrix, B: RatMatrix) -> Fraction:
    """Sum of the r x r principal minors of AB, with r = rank(A).

    This is the determinant of AB viewed as a map on the image of A.
    """
    if B.shape != (A.ncols, A.nrows):
        raise ShapeMismatch(f"B must be {A.ncols}x{A.nrows}, got {B.nrows}x{B.ncols}")
    r = rank(A)
    if r == 0:
        raise ZeroMatrix("reduced determinant needs a nonzero A")
    AB = A @ B
    return sum((AB._minor(a, a) for a in subsets(AB.nrows, r)), Fraction(0))


def kernel_basis(A: RatMatrix) -> list[list[Fraction]]:
    """Exact basis of {v : Av = 0}, one vector per free column."""
    m = A.ncols
    if A.nrows == 0:
        return [[Fraction(int(i == j)) for i in range(m)] for j in range(m)]
    M, piv, _ = _bareiss(A._integer_rows())
    R = [[Fraction(v) for v in row] for row in M[: len(piv)]]
    # back substitution to reduced echelon form
    for i in reversed(range(len(piv))):
        c = piv[i]
        p = R[i][c]
        R[i] = [v / p for v in R[i]]
        for k in range(i):
            f = R[k][c]
            if f:
                R[k] = [a - f * b for a, b in zip(R[k], R[i])]
    free = [j for j in range(m) if j not in set(piv)]
    basis = []
    for f in free:
        v = [Fraction(0)] * m
        v[f] = Fraction(1)
        for i, c in enumerate(piv):
            v[c] = -R[i][f]
        basis.append(v)
    return basis


def is_P0(A: RatMatrix) -> bool:
    """True iff every principal minor of A is nonnegative."""
    if A.nrows != A.ncols:
        raise NotSquare(f"shape {A.shape}")
    n = A.nrows
    for k in range(1, n + 1):
        for a in subsets(n, k):
            if A._minor(a, a) < 0:
                return False
    return True
