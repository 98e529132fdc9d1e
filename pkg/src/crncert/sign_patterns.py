"""Sign patterns, achievable minor signs, and the SSD family.

A pattern entry is one of POS, NEG, ZERO or ANY. ANY stands for an unconstrained
real entry. The set of signs a minor can take over a pattern is decided by a
scan over the permutation terms of the determinant:

* a term can be positive (negative) when its fixed-sign factors allow it; an
  ANY factor in an otherwise nonzero term allows both;
* if some term can be positive, instantiate its entries at 1 and every other
  free entry at a small epsilon. Every other term then carries at least two
  epsilon factors (two permutations differ in at least two positions), so the
  chosen term dominates and the determinant is positive. Likewise for negative;
* the pattern set is connected, so both signs imply zero is attained. With
  exactly one strict sign possible, no nonzero term contains ANY and all nonzero
  terms share a sign, so zero is impossible. With no strict sign possible every
  term vanishes identically.

So the scan decides the sign set exactly.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

from .exact_linalg import (
    DimensionMismatch,
    OutOfRange,
    RatMatrix,
    ShapeMismatch,
    subsets,
)

__all__ = [
    "Sign",
    "SignSet",
    "SignPatternMatrix",
    "HasAnyEntry",
    "SquareClass",
    "SSDResult",
    "sign_of",
    "minor_sign_set",
    "classify_square_pattern",
    "is_SSD",
    "is_r_SSD",
]


class HasAnyEntry(ValueError):
    pass


class Sign(enum.Enum):
    POS = "+"
    NEG = "-"
    ZERO = "0"
    ANY = "?"

    def __neg__(self) -> "Sign":
        return _NEG_SIGN[self]

    def __str__(self) -> str:
        return self.value


_NEG_SIGN = {Sign.POS: Sign.NEG, Sign.NEG: Sign.POS, Sign.ZERO: Sign.ZERO, Sign.ANY: Sign.ANY}


def sign_of(x) -> Sign:
    return Sign.POS if x > 0 else Sign.NEG if x < 0 else Sign.ZERO


@dataclass(frozen=True)
class SignSet:
    can_neg: bool
    can_zero: bool
    can_pos: bool

    def __post_init__(self):
        if not (self.can_neg or self.can_zero or self.can_pos):
            raise ValueError("a sign set cannot be empty")

    def __contains__(self, s: int) -> bool:
        return {-1: self.can_neg, 0: self.can_zero, 1: self.can_pos}[s]

    @property
    def strict(self) -> bool:
        """Exactly one strict sign and no zero."""
        return not self.can_zero

    def times(self, s: int) -> "SignSet":
        """Sign set of c * x for a fixed number c of sign s."""
        if s == 0:
            return SignSet(False, True, False)
        if s > 0:
            return self
        return SignSet(self.can_pos, self.can_zero, self.can_neg)

    def __str__(self) -> str:
        return "{" + ",".join(c for c, f in zip("-0+", (self.can_neg, self.can_zero, self.can_pos)) if f) + "}"


class SignPatternMatrix:
    """Immutable matrix of :class:`Sign` entries."""

    __slots__ = ("_rows", "nrows", "ncols")

    def __init__(self, rows: Iterable[Iterable], ncols: int | None = None):
        data = tuple(tuple(_coerce(v) for v in r) for r in rows)
        width = len(data[0]) if data else (ncols or 0)
        if any(len(r) != width for r in data):
            raise ShapeMismatch("ragged rows")
        self._rows = data
        self.nrows = len(data)
        self.ncols = width

    @classmethod
    def of_matrix(cls, A: RatMatrix) -> "SignPatternMatrix":
        return cls([[sign_of(v) for v in r] for r in A.rows()], ncols=A.ncols)

    @classmethod
    def parse(cls, text: str) -> "SignPatternMatrix":
        """Rows separated by ';' or newlines, entries from '+', '-', '0', '?'."""
        rows = [r.split() for r in text.replace(";", "\n").splitlines() if r.strip()]
        return cls(rows)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nrows, self.ncols)

    def __getitem__(self, ij) -> Sign:
        i, j = ij
        return self._rows[i][j]

    def rows(self):
        return self._rows

    @property
    def T(self) -> "SignPatternMatrix":
        return SignPatternMatrix([[self._rows[i][j] for i in range(self.nrows)] for j in range(self.ncols)], ncols=self.nrows)

    def __neg__(self) -> "SignPatternMatrix":
        return SignPatternMatrix([[-v for v in r] for r in self._rows], ncols=self.ncols)

    def has_any(self) -> bool:
        return any(v is Sign.ANY for r in self._rows for v in r)

    def __eq__(self, other) -> bool:
        return isinstance(other, SignPatternMatrix) and self.shape == other.shape and self._rows == other._rows

    def __hash__(self) -> int:
        return hash((self.shape, self._rows))

    def __str__(self) -> str:
        return "\n".join(" ".join(str(v) for v in r) for r in self._rows)

    def __repr__(self) -> str:
        return f"SignPatternMatrix({'; '.join(' '.join(str(v) for v in r) for r in self._rows)!r})"

    def contains(self, A: RatMatrix) -> bool:
        """True iff the numeric matrix A lies in this pattern."""
        if A.shape != self.shape:
            return False
        for prow, arow in zip(self._rows, A.rows()):
            for p, a in zip(prow, arow):
                if p is not Sign.ANY and sign_of(a) is not p:
                    return False
        return True


def _coerce(v) -> Sign:
    if isinstance(v, Sign):
        return v
    if isinstance(v, str):
        return Sign(v)
    return sign_of(v)


def _term_signs(P: SignPatternMatrix, rows: Sequence[int], cols: Sequence[int]) -> tuple[bool, bool]:
    """(can_pos, can_neg) of det P(rows|cols) by a pruned permutation-term scan."""
    k = len(rows)
    R = P.rows()
    found_pos = found_neg = False
    # DFS assigning a column to each row; track permutation parity incrementally
    used = [False] * k

    def dfs(i: int, sign: int, has_any: bool, parity: int) -> bool:
        nonlocal found_pos, found_neg
        if i == k:
            if has_any:
                found_pos = found_neg = True
            else:
                s = sign if parity % 2 == 0 else -sign
                if s > 0:
                    found_pos = True
                else:
                    found_neg = True
            return found_pos and found_neg
        row = R[rows[i]]
        for jpos in range(k):
            if used[jpos]:
                continue
            e = row[cols[jpos]]
            if e is Sign.ZERO:
                continue
            # number of already used positions greater than jpos = inversions added
            inv = sum(1 for q in range(jpos + 1, k) if used[q])
            used[jpos] = True
            if e is Sign.ANY:
                stop = dfs(i + 1, sign, True, parity + inv)
            else:
                stop = dfs(i + 1, sign if e is Sign.POS else -sign, has_any, parity + inv)
            used[jpos] = False
            if stop:
                return True
        return False

    dfs(0, 1, False, 0)
    return found_pos, found_neg


def minor_sign_set(P: SignPatternMatrix, alpha: Sequence[int], beta: Sequence[int]) -> SignSet:
    """Exact set of signs of det(P'(alpha|beta)) as P' ranges over the pattern P."""
    if len(alpha) != len(beta):
        raise DimensionMismatch(f"|alpha| = {len(alpha)} but |beta| = {len(beta)}")
    if not alpha:
        raise OutOfRange("empty index set")
    if max(alpha) >= P.nrows or max(beta) >= P.ncols or min(alpha) < 0 or min(beta) < 0:
        raise OutOfRange("index out of range")
    can_pos, can_neg = _term_signs(P, tuple(alpha), tuple(beta))
    return SignSet(can_neg=can_neg, can_zero=(can_pos == can_neg), can_pos=can_pos)


class SquareClass(enum.Enum):
    SNS_POS = "sns_pos"
    SNS_NEG = "sns_neg"
    SIGN_SINGULAR = "sign_singular"
    MIXED = "mixed"


def classify_square_pattern(P: SignPatternMatrix) -> SquareClass:
    if P.nrows != P.ncols:
        raise ShapeMismatch(f"pattern must be square, got {P.shape}")
    if P.has_any():
        raise HasAnyEntry("classification applies to qualitative classes only")
    s = minor_sign_set(P, range(P.nrows), range(P.ncols))
    if not s.can_zero:
        return SquareClass.SNS_POS if s.can_pos else SquareClass.SNS_NEG
    if not (s.can_pos or s.can_neg):
        return SquareClass.SIGN_SINGULAR
    return SquareClass.MIXED


@dataclass(frozen=True)
class SSDResult:
    holds: bool
    witness: tuple[tuple[int, ...], tuple[int, ...]] | None = None

    def __bool__(self) -> bool:
        return self.holds


def _ssd_at_size(A: RatMatrix, P: SignPatternMatrix, k: int):
    for a in subsets(A.nrows, k):
        for b in subsets(A.ncols, k):
            if A._minor(a, b) == 0:
                continue
            s = minor_sign_set(P, a, b)
            if s.can_pos and s.can_neg:
                return (a, b)
    return None


def is_SSD(A: RatMatrix) -> SSDResult:
    """Every square submatrix of A is singular or sign nonsingular."""
    P = SignPatternMatrix.of_matrix(A)
    for k in range(1, min(A.shape) + 1):
        w = _ssd_at_size(A, P, k)
        if w is not None:
            return SSDResult(False, w)
    return SSDResult(True)


def is_r_SSD(A: RatMatrix, r: int) -> SSDResult:
    """Every r x r submatrix of A is singular or sign nonsingular."""
    if not 1 <= r <= min(A.shape):
        raise OutOfRange(f"r = {r} not in [1, {min(A.shape)}]")
    w = _ssd_at_size(A, SignPatternMatrix.of_matrix(A), r)
    return SSDResult(w is None, w)


def all_patterns(rows: int, cols: int, alphabet=(Sign.POS, Sign.NEG, Sign.ZERO, Sign.ANY)):
    """Every pattern of the given shape over the alphabet (test helper)."""
    for entries in itertools.product(alphabet, repeat=rows * cols):
        yield SignPatternMatrix([entries[i * cols:(i + 1) * cols] for i in range(rows)], ncols=cols)
