"""Concordance, accordance and their M-/semi- variants, decided from minors.

Sign conventions. For a network with stoichiometric matrix G (rank r) and rate
pattern V (m x n) the product vector is G o^r (-V^t): entry (alpha, beta) is
G[alpha|beta] times the (-V^t)[alpha|beta] minor. Concordance means the vector
is strictly positive for every V in the pattern, or strictly negative for every
V. For an explicit exponent matrix M shaped like G the vector is G o^r (-M).
Weakly reversible networks that are concordant always land on the positive side.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .crn_model import Network, gamma_bar, rate_pattern, stoichiometric_matrices
from .exact_linalg import (
    RatMatrix,
    ShapeMismatch,
    det,
    rank,
    reduced_determinant,
    subsets,
)
from .graphs import arc_cycle_counts, complex_digraph, is_weakly_reversible
from .sign_patterns import SignPatternMatrix, minor_sign_set

__all__ = [
    "ZeroStoichiometry",
    "NotWeaklyReversible",
    "VectorSign",
    "classify_vector",
    "hadamard_sign",
    "is_compatible",
    "Verdict",
    "ConcordanceVerdict",
    "AccordanceResult",
    "concordance",
    "accordance",
    "pattern_concordance",
    "pattern_accordance",
    "m_concordance",
    "m_accordance",
    "semiconcordance",
    "semiaccordance",
    "is_normal",
    "wsd_flags",
    "WSDFlags",
    "weakly_reversible_shortcut",
    "DiagonalScaling",
    "wr_cycle_scaling",
    "IncompatibilityCertificate",
    "verify_incompatibility",
    "strong_incompatibility_search",
]


class ZeroStoichiometry(ValueError):
    pass


class NotWeaklyReversible(ValueError):
    pass


# ---------------------------------------------------------------------------
# numeric vectors and matrix pairs


class VectorSign(enum.Enum):
    Pos = "pos"  # >= 0 and not all zero
    Neg = "neg"
    Zero = "zero"
    Mixed = "mixed"


def classify_vector(values) -> VectorSign:
    pos = any(v > 0 for v in values)
    neg = any(v < 0 for v in values)
    if pos and neg:
        return VectorSign.Mixed
    if pos:
        return VectorSign.Pos
    if neg:
        return VectorSign.Neg
    return VectorSign.Zero


def hadamard_sign(A: RatMatrix, B: RatMatrix, r: int) -> VectorSign:
    """Sign class of A o^r B."""
    if A.shape != B.shape:
        raise ShapeMismatch(f"{A.shape} vs {B.shape}")
    vals = (A._minor(a, b) * B._minor(a, b) for a in subsets(A.nrows, r) for b in subsets(A.ncols, r))
    return classify_vector(list(vals))


def is_compatible(A: RatMatrix, B: RatMatrix) -> bool:
    """A[alpha|beta] B[alpha|beta] >= 0 for all square index pairs of all sizes."""
    if A.shape != B.shape:
        raise ShapeMismatch(f"{A.shape} vs {B.shape}")
    for k in range(1, min(A.shape) + 1):
        for a in subsets(A.nrows, k):
            for b in subsets(A.ncols, k):
                x = A._minor(a, b)
                if x and x * B._minor(a, b) < 0:
                    return False
    return True


# ---------------------------------------------------------------------------
# pattern versions


class Verdict(enum.Enum):
    ConcordantPos = "concordant_pos"
    ConcordantNeg = "concordant_neg"
    StructurallyDiscordant = "structurally_discordant"
    Discordant = "discordant"

    @property
    def concordant(self) -> bool:
        return self in (Verdict.ConcordantPos, Verdict.ConcordantNeg)


Witness = tuple[tuple[int, ...], tuple[int, ...]]


@dataclass(frozen=True)
class ConcordanceVerdict:
    verdict: Verdict
    rank: int
    witness: tuple[Witness, ...] = ()  # index pairs whose products take opposite signs

    @property
    def concordant(self) -> bool:
        return self.verdict.concordant


def _signed_products(A: RatMatrix, P: SignPatternMatrix, k: int):
    """Yield (alpha, beta, sign set of A[alpha|beta] * P-minor) for nonzero A-minors."""
    for a in subsets(A.nrows, k):
        for b in subsets(A.ncols, k):
            x = A._minor(a, b)
            if x == 0:
                continue
            yield a, b, minor_sign_set(P, a, b).times(1 if x > 0 else -1)


def pattern_concordance(A: RatMatrix, P: SignPatternMatrix, positive_only: bool = False) -> ConcordanceVerdict:
    """Classify A o^r P over every matrix in the pattern P (P shaped like A)."""
    if A.shape != P.shape:
        raise ShapeMismatch(f"{A.shape} vs {P.shape}")
    r = rank(A)
    if r == 0:
        raise ZeroStoichiometry("stoichiometric matrix is zero")
    pos_w = neg_w = None
    for a, b, s in _signed_products(A, P, r):
        if s.can_pos and pos_w is None:
            pos_w = (a, b)
        if s.can_neg and neg_w is None:
            neg_w = (a, b)
        if pos_w and neg_w:
            break
    if pos_w and not neg_w:
        return ConcordanceVerdict(Verdict.ConcordantPos, r)
    if neg_w and not pos_w:
        if positive_only:
            return ConcordanceVerdict(Verdict.Discordant, r, (neg_w,))
        return ConcordanceVerdict(Verdict.ConcordantNeg, r)
    if not pos_w and not neg_w:
        return ConcordanceVerdict(Verdict.StructurallyDiscordant, r)
    return ConcordanceVerdict(Verdict.Discordant, r, (pos_w, neg_w) if pos_w != neg_w else (pos_w,))


@dataclass(frozen=True)
class AccordanceResult:
    holds: bool
    witness: Witness | None = None  # an index pair whose product can be negative

    def __bool__(self) -> bool:
        return self.holds


def pattern_accordance(A: RatMatrix, P: SignPatternMatrix) -> AccordanceResult:
    """A[alpha|beta] times the P-minor cannot be negative, for all sizes."""
    if A.shape != P.shape:
        raise ShapeMismatch(f"{A.shape} vs {P.shape}")
    for k in range(1, min(A.shape) + 1):
        for a, b, s in _signed_products(A, P, k):
            if s.can_neg:
                return AccordanceResult(False, (a, b))
    return AccordanceResult(True)


def _gamma_and_pattern(net: Network) -> tuple[RatMatrix, SignPatternMatrix]:
    return stoichiometric_matrices(net).gamma, -rate_pattern(net).T


def concordance(net: Network) -> ConcordanceVerdict:
    return pattern_concordance(*_gamma_and_pattern(net))


def accordance(net: Network) -> AccordanceResult:
    return pattern_accordance(*_gamma_and_pattern(net))


# ---------------------------------------------------------------------------
# explicit exponent matrices (mass action and its relatives)


def _gamma_bar_of(net_or_gamma) -> RatMatrix:
    if isinstance(net_or_gamma, Network):
        return gamma_bar(net_or_gamma).gamma
    return net_or_gamma


def m_concordance(net_or_gamma, M: RatMatrix) -> VectorSign:
    """Sign class of Gamma_bar o^r (-M), r = rank Gamma_bar."""
    G = _gamma_bar_of(net_or_gamma)
    if G.shape != M.shape:
        raise ShapeMismatch(f"M must be {G.shape}, got {M.shape}")
    r = rank(G)
    if r == 0:
        raise ZeroStoichiometry("stoichiometric matrix is zero")
    return hadamard_sign(G, -M, r)


def m_accordance(net_or_gamma, M: RatMatrix) -> bool:
    """Gamma_bar and -M are compatible."""
    G = _gamma_bar_of(net_or_gamma)
    if G.shape != M.shape:
        raise ShapeMismatch(f"M must be {G.shape}, got {M.shape}")
    return is_compatible(G, -M)


def semiconcordance(net: Network) -> VectorSign:
    t = gamma_bar(net)
    return m_concordance(t.gamma, t.gamma_left)


def semiaccordance(net: Network) -> bool:
    t = gamma_bar(net)
    return m_accordance(t.gamma, t.gamma_left)


def is_normal(net: Network) -> bool:
    return semiconcordance(net) is not VectorSign.Zero


@dataclass(frozen=True)
class WSDFlags:
    wsd: bool
    r_strong: bool
    r_strong_neg: bool
    rank: int


def wsd_flags(gamma: RatMatrix) -> WSDFlags:
    """WSD family of a matrix: compatibility of gamma with -gamma_minus."""
    Mneg = gamma.negative_part()
    s = m_concordance(gamma, Mneg)
    return WSDFlags(
        wsd=m_accordance(gamma, Mneg),
        r_strong=s is VectorSign.Pos,
        r_strong_neg=s is VectorSign.Neg,
        rank=rank(gamma),
    )


# ---------------------------------------------------------------------------
# weakly reversible networks


def weakly_reversible_shortcut(net: Network) -> ConcordanceVerdict:
    """Concordance of a weakly reversible network, testing only the positive side."""
    if not is_weakly_reversible(net):
        raise NotWeaklyReversible("network is not weakly reversible")
    return pattern_concordance(*_gamma_and_pattern(net), positive_only=True)


@dataclass(frozen=True)
class DiagonalScaling:
    entries: tuple

    def __post_init__(self):
        if any(not e > 0 for e in self.entries):
            raise ValueError("diagonal scaling entries must be positive")

    @property
    def dim(self) -> int:
        return len(self.entries)

    def matrix(self) -> RatMatrix:
        return RatMatrix.diag(list(self.entries))


def wr_cycle_scaling(net: Network) -> DiagonalScaling:
    """D = diag(k_j), k_j = number of simple cycles of the complex digraph through arc j.

    Verified exactly: reduced_determinant(Gamma_bar, -D Gamma_bar_l^t) > 0.
    """
    if not is_weakly_reversible(net):
        raise NotWeaklyReversible("network is not weakly reversible")
    g = complex_digraph(net)
    k = arc_cycle_counts(g)
    D = DiagonalScaling(tuple(Fraction(v) for v in k))
    t = gamma_bar(net)
    value = reduced_determinant(t.gamma, -(D.matrix() @ t.gamma_left.T))
    if value <= 0:
        raise ArithmeticError(f"cycle scaling failed verification (value {value})")
    return D


# ---------------------------------------------------------------------------
# strong incompatibility


@dataclass(frozen=True)
class IncompatibilityCertificate:
    """D on reactions then outflows with det(Gamma D_r (-M^t) + D_o) < 0 and Gamma d_r - d_o <= 0."""

    D: tuple[Fraction, ...]
    det_value: Fraction
    constraint_vector: tuple[Fraction, ...]

    def reaction_part(self, m: int) -> tuple[Fraction, ...]:
        return self.D[:m]

    def outflow_part(self, m: int) -> tuple[Fraction, ...]:
        return self.D[m:]


def _augmented_product(G: RatMatrix, M: RatMatrix, d: Sequence[Fraction]) -> RatMatrix:
    n, m = G.shape
    dr, do = d[:m], d[m:]
    rows = []
    for i in range(n):
        row = []
        for k in range(n):
            v = -sum((G[i, j] * dr[j] * M[k, j] for j in range(m)), Fraction(0))
            if i == k:
                v += do[i]
            row.append(v)
        rows.append(row)
    return RatMatrix(rows, ncols=n)


def verify_incompatibility(net_or_gamma, M: RatMatrix, cert: IncompatibilityCertificate) -> bool:
    G = _gamma_bar_of(net_or_gamma)
    n, m = G.shape
    d = cert.D
    if len(d) != n + m or any(not v > 0 for v in d):
        return False
    value = det(_augmented_product(G, M, d))
    constraint = [sum((G[i, j] * d[j] for j in range(m)), Fraction(0)) - d[m + i] for i in range(n)]
    return value < 0 and value == cert.det_value and all(c <= 0 for c in constraint) and tuple(constraint) == cert.constraint_vector


# log-space box for the search; rationalization loses anything below 1e-6 anyway
_LOG_BOUND = 12.0


def _rationalize(x: float) -> Fraction:
    f = Fraction(x).limit_denominator(10**6)
    if f <= 0:
        f = Fraction(1, 10**6)
    return f


def strong_incompatibility_search(
    net_or_gamma, M: RatMatrix, budget: int = 10_000, seed: int = 0
) -> IncompatibilityCertificate | None:
    """Look for D showing that -M is strongly incompatible with Gamma_bar.

    Heuristic: outflows are tied to reactions by d_o = max(Gamma d_r, 0) + exp(t),
    which keeps the linear constraint exact, and the normalized determinant is
    pushed below zero by multi-start random sampling in log space followed by
    coordinate descent. A candidate is rationalized (denominators up to 1e6) and
    re-verified exactly. None means "not found", never "does not exist".
    """
    G = _gamma_bar_of(net_or_gamma)
    if G.shape != M.shape:
        raise ShapeMismatch(f"M must be {G.shape}, got {M.shape}")
    if is_compatible(G, -M):
        # compatibility forces det > 0 for every D, so no certificate exists
        return None
    n, m = G.shape
    Gf = G.to_numpy()
    Mf = M.to_numpy()
    rng = np.random.default_rng(seed)
    evals = 0

    def build(s: np.ndarray, t: np.ndarray):
        dr = np.exp(s)
        do = np.maximum(Gf @ dr, 0.0) + np.exp(t)
        return dr, do

    def objective(s, t) -> float:
        nonlocal evals
        evals += 1
        dr, do = build(s, t)
        N = -(Gf * dr) @ Mf.T + np.diag(do)
        scale = np.abs(N).sum(axis=1)
        scale[scale == 0] = 1.0
        sign, logdet = np.linalg.slogdet(N / scale[:, None])
        return float(sign * math.exp(logdet)) if sign != 0 else 0.0

    def certify(s, t) -> IncompatibilityCertificate | None:
        dr = [_rationalize(float(v)) for v in np.exp(s)]
        extra = [_rationalize(float(v)) for v in np.exp(t)]
        gd = [sum((G[i, j] * dr[j] for j in range(m)), Fraction(0)) for i in range(n)]
        do = [max(gd[i], Fraction(0)) + extra[i] for i in range(n)]
        d = tuple(dr + do)
        value = det(_augmented_product(G, M, d))
        if value >= 0:
            return None
        constraint = tuple(gd[i] - do[i] for i in range(n))
        return IncompatibilityCertificate(d, value, constraint)

    starts = max(1, budget // 20)
    best = []
    for _ in range(starts):
        if evals >= budget // 2:
            break
        s = rng.uniform(-6.0, 6.0, size=m)
        t = rng.uniform(-8.0, 2.0, size=n)
        f = objective(s, t)
        if f < -1e-9:
            cert = certify(s, t)
            if cert is not None:
                return cert
        best.append((f, s, t))
    best.sort(key=lambda item: item[0])
    for f, s, t in best[:10]:
        step = 2.0
        while step > 1e-3 and evals < budget:
            improved = False
            for idx in range(m + n):
                for delta in (step, -step):
                    s2, t2 = s.copy(), t.copy()
                    if idx < m:
                        s2[idx] = np.clip(s2[idx] + delta, -_LOG_BOUND, _LOG_BOUND)
                    else:
                        t2[idx - m] = np.clip(t2[idx - m] + delta, -_LOG_BOUND, _LOG_BOUND)
                    f2 = objective(s2, t2)
                    if f2 < f:
                        f, s, t, improved = f2, s2, t2, True
                        if f < -1e-9:
                            cert = certify(s, t)
                            if cert is not None:
                                return cert
            if not improved:
                step /= 2
    return None
