"""Constructive counterexamples: power-law kinetics with colliding states or
multiple positive equilibria, checked numerically.

Everything here is floating point. The structural verdicts that license a
construction stay exact; a witness that cannot be built raises
ConstructionFailed and never changes a verdict.

Common core. For a stoichiometric matrix G (rank r) and exponent matrix M
shaped like G, the reduced determinant of G D1 M^t D2 is, by Cauchy-Binet,

    f(D1, D2) = sum over (alpha, beta) of G[alpha|beta] M[alpha|beta] d1^beta d2^alpha.

If those products take both signs, concentrating weight on a positive term and
then on a negative one gives scalings where f has opposite signs; bisecting
along the log-linear path between them finds f = 0, and a kernel vector of
G D1 M^t D2 inside im G then turns into two states with equal reaction vectors.
If every product is zero, f vanishes identically and any scaling will do.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .concordance import (
    IncompatibilityCertificate,
    VectorSign,
    concordance,
    m_accordance,
    m_concordance,
    verify_incompatibility,
)
from .crn_model import Network, gamma_bar
from .exact_linalg import RatMatrix, ShapeMismatch, rank, subsets
from .feasibility import positive_kernel_vector

__all__ = [
    "DEFAULT_TOL",
    "ForcedNone",
    "PreconditionFailed",
    "ConstructionFailed",
    "PowerLawKinetics",
    "ScalingPath",
    "CollisionWitness",
    "EquilibriaPairWitness",
    "OpenSystemWitness",
    "ResidualReport",
    "collision_witness",
    "class_multistationarity_witness",
    "open_collision_witness",
    "open_multistationarity_witness",
    "verify_witness",
]

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-9
BISECTION_ITERATIONS = 200
BISECTION_TOL = 1e-12
# states closer than this (max-norm) do not count as distinct
SEPARATION = 1e-6


class ForcedNone(ValueError):
    """A structural test proves that no witness of the requested kind exists."""


class PreconditionFailed(ForcedNone):
    """The network does not meet the hypotheses of the construction."""


class ConstructionFailed(RuntimeError):
    """The numerical construction did not reach tolerance; the verdict stands."""


# ---------------------------------------------------------------------------
# data


def _as_tuple2(a) -> tuple[tuple[float, ...], ...]:
    return tuple(tuple(float(v) for v in row) for row in np.asarray(a, dtype=float))


@dataclass(frozen=True)
class PowerLawKinetics:
    """Rates v(x) = E * exp(exponents @ ln x); exponents is m x n."""

    exponents: tuple[tuple[float, ...], ...]
    rate_constants: tuple[float, ...]

    def __post_init__(self):
        if any(not k > 0 for k in self.rate_constants):
            raise ValueError("rate constants must be positive")
        if len(self.exponents) != len(self.rate_constants):
            raise ValueError("one exponent row per rate constant")

    @classmethod
    def of(cls, exponents, rate_constants) -> "PowerLawKinetics":
        return cls(_as_tuple2(exponents), tuple(float(v) for v in rate_constants))

    def rates(self, x: Sequence[float]) -> np.ndarray:
        # nonpositive points give nan, which fails every residual check
        with np.errstate(invalid="ignore", divide="ignore"):
            lx = np.log(np.asarray(x, dtype=float))
        return np.asarray(self.rate_constants) * np.exp(np.asarray(self.exponents) @ lx)

    def in_class_of(self, pattern: RatMatrix) -> bool:
        """Exponents share the sign pattern of ``pattern`` (m x n)."""
        return all(
            (e > 0) - (e < 0) == (p > 0) - (p < 0)
            for erow, prow in zip(self.exponents, pattern.rows())
            for e, p in zip(erow, prow)
        )


@dataclass(frozen=True)
class ScalingPath:
    """Log-linear path between two concentrated scalings of (D1, D2)."""

    start: tuple[float, ...]  # ln d1 then ln d2
    end: tuple[float, ...]
    t_star: float
    value_at_t_star: float  # reduced determinant divided by its absolute-term scale

    def point(self, t: float) -> np.ndarray:
        a, b = np.asarray(self.start), np.asarray(self.end)
        return (1 - t) * a + t * b


@dataclass(frozen=True)
class CollisionWitness:
    """Two positive states with equal net production (IC1 or IC2 failure).

    For an open-system witness ``outflow`` holds the outflow rates E'' and the
    compared quantity is G E x^{M^t} - E'' x.
    """

    kinetics: PowerLawKinetics
    x: tuple[float, ...]
    y: tuple[float, ...]
    residual: float
    class_offset: float
    outflow: tuple[float, ...] | None = None
    path: ScalingPath | None = None


@dataclass(frozen=True)
class EquilibriaPairWitness:
    kinetics: PowerLawKinetics
    x: tuple[float, ...]
    y: tuple[float, ...]
    residual_x: float
    residual_y: float
    class_offset: float


@dataclass(frozen=True)
class OpenSystemWitness:
    """Equilibria x, y of c + G E x^{M^t} - D x."""

    kinetics: PowerLawKinetics
    outflow: tuple[float, ...]
    inflow: tuple[float, ...]
    x: tuple[float, ...]
    y: tuple[float, ...]
    residual_x: float
    residual_y: float


@dataclass(frozen=True)
class ResidualReport:
    checks: dict[str, tuple[float, bool]] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(ok for _, ok in self.checks.values())

    def __bool__(self) -> bool:
        return self.passed

    def failures(self) -> list[str]:
        return [k for k, (_, ok) in self.checks.items() if not ok]


# ---------------------------------------------------------------------------
# numerics


def _matvec_fsum(A: np.ndarray, v: np.ndarray) -> np.ndarray:
    return np.array([math.fsum(a * b for a, b in zip(row, v)) for row in A])


def _floats(v) -> tuple[float, ...]:
    return tuple(float(a) for a in v)


def _maxabs(v) -> float:
    v = np.asarray(v, dtype=float)
    return float(np.max(np.abs(v))) if v.size else 0.0


def _image_offset(G: np.ndarray, v: np.ndarray) -> float:
    """Max-norm distance of v from im G (least-squares projection)."""
    if not np.any(G):
        return _maxabs(v)
    coef, *_ = np.linalg.lstsq(G, v, rcond=None)
    return _maxabs(v - G @ coef)


def _image_basis(G: np.ndarray, r: int) -> np.ndarray:
    U, _, _ = np.linalg.svd(G)
    return U[:, :r]


@dataclass
class _Terms:
    """Nonzero Cauchy-Binet terms of the reduced determinant."""

    coef: list[Fraction]
    rows: list[tuple[int, ...]]
    cols: list[tuple[int, ...]]
    n: int
    m: int

    def log_exponents(self) -> np.ndarray:
        """Indicator matrix: term k uses ln d1_j (j in cols) and ln d2_i (i in rows)."""
        X = np.zeros((len(self.coef), self.m + self.n))
        for k, (a, b) in enumerate(zip(self.rows, self.cols)):
            X[k, list(b)] = 1.0
            X[k, [self.m + i for i in a]] = 1.0
        return X

    def exact_value(self, pow2: Sequence[int]) -> Fraction:
        """f at d = 2**pow2 (first m entries for D1, then n for D2)."""
        total = Fraction(0)
        for c, a, b in zip(self.coef, self.rows, self.cols):
            e = sum(pow2[j] for j in b) + sum(pow2[self.m + i] for i in a)
            total += c * (Fraction(2) ** e)
        return total


def _terms(G: RatMatrix, M: RatMatrix, r: int) -> _Terms:
    n, m = G.shape
    t = _Terms([], [], [], n, m)
    for a in subsets(n, r):
        for b in subsets(m, r):
            g = G._minor(a, b)
            if g == 0:
                continue
            c = g * M._minor(a, b)
            if c != 0:
                t.coef.append(c)
                t.rows.append(a)
                t.cols.append(b)
    return t


def _concentrated(terms: _Terms, k: int) -> tuple[np.ndarray, int]:
    """Smallest power-of-two weight on term k that makes it dominate f (exact check)."""
    want = 1 if terms.coef[k] > 0 else -1
    for p in range(1, 64):
        pow2 = [0] * (terms.m + terms.n)
        for j in terms.cols[k]:
            pow2[j] = p
        for i in terms.rows[k]:
            pow2[terms.m + i] = p
        v = terms.exact_value(pow2)
        if (v > 0) - (v < 0) == want:
            return np.asarray(pow2, dtype=float) * math.log(2.0), p
    raise ConstructionFailed("could not make a single term dominate")


def _bisect(terms: _Terms, a: np.ndarray, b: np.ndarray) -> ScalingPath:
    X = terms.log_exponents()
    c = np.array([float(v) for v in terms.coef])

    def g(t: float) -> float:
        L = X @ ((1 - t) * a + t * b)
        w = np.exp(L - L.max())
        return math.fsum(c * w) / math.fsum(np.abs(c) * w)

    lo, hi = 0.0, 1.0
    glo = g(lo)
    mid, gm = 0.5, g(0.5)
    for _ in range(BISECTION_ITERATIONS):
        mid = 0.5 * (lo + hi)
        gm = g(mid)
        if abs(gm) <= BISECTION_TOL:
            break
        if (gm > 0) == (glo > 0):
            lo, glo = mid, gm
        else:
            hi = mid
    if abs(gm) > BISECTION_TOL:
        raise ConstructionFailed(f"bisection stalled at |f| = {abs(gm):.3g}")
    return ScalingPath(_floats(a), _floats(b), float(mid), float(gm))


def _singular_scalings(G: RatMatrix, M: RatMatrix, rng: np.random.Generator):
    """Yield (d1, d2, path) with G D1 M^t D2 singular on im G.

    Requires the products G[alpha|beta] M[alpha|beta] to be all zero or of
    both signs. Yields candidates in a seeded order so callers can retry.
    """
    r = rank(G)
    n, m = G.shape
    terms = _terms(G, M, r)
    if not terms.coef:
        # reduced determinant vanishes for every scaling
        for _ in range(8):
            yield np.exp(rng.uniform(-1, 1, m)), np.exp(rng.uniform(-1, 1, n)), None
        return
    pos = [k for k, c in enumerate(terms.coef) if c > 0]
    neg = [k for k, c in enumerate(terms.coef) if c < 0]
    if not pos or not neg:
        raise ForcedNone("reduced determinant has one strict sign for every scaling")
    pairs = [(p, q) for p in pos for q in neg]
    order = rng.permutation(len(pairs))
    for idx in order[:64]:
        p, q = pairs[idx]
        a, _ = _concentrated(terms, p)
        b, _ = _concentrated(terms, q)
        try:
            path = _bisect(terms, a, b)
        except ConstructionFailed as exc:
            log.info("pair %s/%s: %s", p, q, exc)
            continue
        ell = path.point(path.t_star)
        ell = ell - np.concatenate([np.full(m, ell[:m].max()), np.full(n, ell[m:].max())])
        yield np.exp(ell[:m]), np.exp(ell[m:]), path


def _kernel_in_image(Gf: np.ndarray, Mf: np.ndarray, d1, d2, r: int) -> np.ndarray | None:
    """Unit vector dx in im G with G D1 M^t D2 dx ~ 0, or None if ill-conditioned."""
    U = _image_basis(Gf, r)
    K = (Gf * d1) @ Mf.T @ (d2[:, None] * U)
    _, s, Vt = np.linalg.svd(K)
    if s[0] == 0:
        return U[:, 0]
    if s[-1] > 1e-9 * s[0]:
        log.info("kernel check failed: sigma_min/sigma_max = %.3g", s[-1] / s[0])
        return None
    if r > 1 and s[-2] < 1e-12 * s[0]:
        log.info("kernel is not one-dimensional; using the last singular direction")
    dx = U @ Vt[-1]
    return dx / _maxabs(dx)


# ---------------------------------------------------------------------------
# IC1 / IC2 collisions


def _collide(G: RatMatrix, M: RatMatrix, tol: float, seed: int):
    """Shared driver: (kinetics, x, y, path) with G E w(x) = G E w(y)."""
    rng = np.random.default_rng(seed)
    n, m = G.shape
    r = rank(G)
    Gf, Mf = G.to_numpy().astype(float), M.to_numpy().astype(float)
    for d1, d2, path in _singular_scalings(G, M, rng):
        dx = _kernel_in_image(Gf, Mf, d1, d2, r)
        if dx is None:
            continue
        # size dx so that the largest exponent step d2*dx is 1
        dx = dx / _maxabs(d2 * dx)
        u2 = d2 * dx
        x = np.where(dx != 0, dx / np.where(u2 != 0, np.expm1(u2), 1.0), 1.0 / d2)
        y = x + dx
        if np.any(x <= 0) or np.any(y <= 0):
            continue
        # w(y) - w(x) = Dt M^t D2 dx with Dt = w(x) * expm1(u)/u
        u = Mf.T @ u2
        wx = np.exp(Mf.T @ np.log(x))
        ratio = np.where(np.abs(u) > 1e-300, np.expm1(u) / np.where(u != 0, u, 1.0), 1.0)
        E = d1 / (wx * ratio)
        E = E / _maxabs(E * wx)
        kin = PowerLawKinetics.of(Mf.T, E)
        res = _maxabs(_matvec_fsum(Gf, kin.rates(x)) - _matvec_fsum(Gf, kin.rates(y)))
        if res <= tol and _maxabs(x - y) > SEPARATION:
            return kin, x, y, path
        log.info("collision candidate rejected: residual %.3g", res)
    raise ConstructionFailed("no candidate reached the residual tolerance")


def collision_witness(net: Network, M: RatMatrix, tol: float = DEFAULT_TOL, seed: int = 0) -> CollisionWitness:
    """x != y in one stoichiometry class with G E x^{M^t} = G E y^{M^t} (IC1 fails).

    Raises ForcedNone when G o^r (-M) is strictly one-signed, i.e. when every
    M-power-law system is injective on stoichiometry classes.
    """
    G = gamma_bar(net).gamma
    if G.shape != M.shape:
        raise ShapeMismatch(f"M must be {G.shape}, got {M.shape}")
    if m_concordance(G, M) in (VectorSign.Pos, VectorSign.Neg):
        raise ForcedNone("network is M-concordant")
    kin, x, y, path = _collide(G, M, tol, seed)
    Gf = G.to_numpy().astype(float)
    res = _maxabs(_matvec_fsum(Gf, kin.rates(x)) - _matvec_fsum(Gf, kin.rates(y)))
    return CollisionWitness(kin, _floats(x), _floats(y), res, _image_offset(Gf, x - y), None, path)


def open_collision_witness(net: Network, M: RatMatrix, tol: float = DEFAULT_TOL, seed: int = 0) -> CollisionWitness:
    """x != y with G E' x^{M^t} - E'' x equal at both (IC2 fails).

    Runs the collision construction on [G | -I] with exponents [M | I].
    Raises ForcedNone when G and -M are compatible.
    """
    G = gamma_bar(net).gamma
    if G.shape != M.shape:
        raise ShapeMismatch(f"M must be {G.shape}, got {M.shape}")
    if m_accordance(G, M):
        raise ForcedNone("network is M-accordant")
    n, m = G.shape
    Gt = G.hstack(-RatMatrix.identity(n))
    Mt = M.hstack(RatMatrix.identity(n))
    kin, x, y, path = _collide(Gt, Mt, tol, seed)
    E = np.asarray(kin.rate_constants)
    reaction = PowerLawKinetics.of(M.to_numpy().astype(float).T, E[:m])
    outflow = E[m:]
    Gf = G.to_numpy().astype(float)

    def f(v):
        return _matvec_fsum(Gf, reaction.rates(v)) - outflow * v

    res = _maxabs(f(x) - f(y))
    return CollisionWitness(reaction, _floats(x), _floats(y), res, 0.0, _floats(outflow), path)


# ---------------------------------------------------------------------------
# multiple positive equilibria on a stoichiometry class


def _discordant_exponents(G: RatMatrix, L: RatMatrix, rng: np.random.Generator, budget: int = 2000) -> RatMatrix:
    """M' with the sign pattern of L and G o^r (-M') not strictly signed."""
    if m_concordance(G, L) in (VectorSign.Mixed, VectorSign.Zero):
        return L
    support = [(i, j) for i in range(L.nrows) for j in range(L.ncols) if L[i, j] != 0]
    for spread in (2, 4, 8, 16):
        for _ in range(budget // 4):
            rows = [[Fraction(0)] * L.ncols for _ in range(L.nrows)]
            for (i, j), e in zip(support, rng.integers(-spread, spread + 1, len(support))):
                rows[i][j] = Fraction(2) ** int(e)
            cand = RatMatrix(rows, ncols=L.ncols)
            if m_concordance(G, cand) in (VectorSign.Mixed, VectorSign.Zero):
                return cand
    raise ConstructionFailed("no exponent matrix in the class exposes discordance")


def class_multistationarity_witness(
    net: Network, tol: float = DEFAULT_TOL, seed: int = 0, scale: float = 1.0
) -> EquilibriaPairWitness:
    """Two positive equilibria on one stoichiometry class for physical power-law kinetics.

    x = 1 is an equilibrium for E = diag(z) with z >> 0 in ker G. A singular
    scaling of a discordant exponent matrix gives M0 and dx in im G with
    G M0 dx = 0; exponents are then bent so that y = 1 + dx is an equilibrium
    too. ``scale`` > 1 enlarges the exponents (M0 -> scale*M0, dx -> dx/scale).
    """
    verdict = concordance(net)
    if verdict.concordant:
        raise PreconditionFailed("network is concordant")
    t = gamma_bar(net)
    G, L = t.gamma, t.gamma_left
    z = positive_kernel_vector(G)
    if z is None:
        raise PreconditionFailed("network admits no positive equilibria")
    rng = np.random.default_rng(seed)
    Mp = _discordant_exponents(G, L, rng)
    n, m = G.shape
    r = rank(G)
    Gf, Mf = G.to_numpy().astype(float), Mp.to_numpy().astype(float)
    zf = np.array([float(v) for v in z])
    zf = zf / zf.max()
    for d1, d2, _ in _singular_scalings(G, Mp, rng):
        dx = _kernel_in_image(Gf, Mf, d1, d2, r)
        if dx is None:
            continue
        M0 = (d1[:, None] * Mf.T) * d2[None, :] * scale  # m x n
        dx = dx / scale
        h = M0 @ dx
        shrink = 0.5 / max(_maxabs(dx), _maxabs(h / zf))
        dx, h = dx * min(1.0, shrink), h * min(1.0, shrink)
        D2 = np.where(dx != 0, np.log1p(dx) / np.where(dx != 0, dx, 1.0), 1.0)
        q = h / zf
        D1 = np.where(h != 0, h / np.where(q != 0, np.log1p(q), 1.0), 1.0)
        expo = M0 / D1[:, None] / D2[None, :]
        kin = PowerLawKinetics.of(expo, zf)
        x, y = np.ones(n), 1.0 + dx
        rx = _maxabs(_matvec_fsum(Gf, kin.rates(x)))
        ry = _maxabs(_matvec_fsum(Gf, kin.rates(y)))
        off = _image_offset(Gf, x - y)
        if max(rx, ry, off) <= tol and _maxabs(x - y) > SEPARATION and kin.in_class_of(L.T):
            return EquilibriaPairWitness(kin, _floats(x), _floats(y), rx, ry, off)
        log.info("equilibria candidate rejected: residuals %.3g %.3g offset %.3g", rx, ry, off)
    raise ConstructionFailed("no candidate reached the residual tolerance")


# ---------------------------------------------------------------------------
# fully open system


def open_multistationarity_witness(
    net: Network, cert: IncompatibilityCertificate, M: RatMatrix | None = None, tol: float = DEFAULT_TOL
) -> OpenSystemWitness:
    """Two positive equilibria of the fully open system from a strong-incompatibility certificate.

    The outflow block of the certificate is raised by mu so that
    D_o + mu I - G D_r M^t becomes singular; z spans its kernel, x = 1,
    y = exp(z), and z is halved until the inflow c is positive.
    """
    t = gamma_bar(net)
    G = t.gamma
    M = t.gamma_left if M is None else M
    if not verify_incompatibility(G, M, cert):
        raise ConstructionFailed("certificate does not verify")
    n, m = G.shape
    Gf, Mf = G.to_numpy().astype(float), M.to_numpy().astype(float)
    dr = np.array([float(v) for v in cert.D[:m]])
    do = np.array([float(v) for v in cert.D[m:]])
    N = np.diag(do) - (Gf * dr) @ Mf.T
    lam, vecs = np.linalg.eig(N)
    cands = [k for k in range(n) if abs(lam[k].imag) <= 1e-12 * max(1.0, abs(lam[k])) and lam[k].real < 0]
    if not cands:
        raise ConstructionFailed("no negative real eigenvalue to absorb")
    k = min(cands, key=lambda i: lam[i].real)
    mu = -lam[k].real
    z = np.real(vecs[:, k])
    # one inverse-iteration step sharpens the kernel vector
    A = N + mu * np.eye(n)
    try:
        z = np.linalg.solve(A + 1e-13 * np.abs(A).max() * np.eye(n), z)
    except np.linalg.LinAlgError:
        pass
    z = z / _maxabs(z)
    D1 = np.concatenate([dr, do + mu])
    Gt = np.hstack([Gf, -np.eye(n)])
    Mt = np.hstack([Mf, np.eye(n)])  # n x (m+n)
    for _ in range(60):
        u = Mt.T @ z
        ratio = np.where(u != 0, np.expm1(u) / np.where(u != 0, u, 1.0), 1.0)
        E = D1 / ratio
        c = -_matvec_fsum(Gt, E)
        if np.all(c > 0):
            break
        z = z / 2
    else:
        raise ConstructionFailed("inflow never became positive")
    kin = PowerLawKinetics.of(Mf.T, E[:m])
    out = E[m:]
    x, y = np.ones(n), np.exp(z)

    def f(v):
        return c + _matvec_fsum(Gf, kin.rates(v)) - out * v

    rx, ry = _maxabs(f(x)), _maxabs(f(y))
    if max(rx, ry) > tol or _maxabs(x - y) <= SEPARATION:
        raise ConstructionFailed(f"residuals {rx:.3g}, {ry:.3g}")
    return OpenSystemWitness(kin, _floats(out), _floats(c), _floats(x), _floats(y), rx, ry)


# ---------------------------------------------------------------------------
# verification


def verify_witness(net: Network, witness, tol: float = DEFAULT_TOL) -> ResidualReport:
    """Recompute every residual with compensated sums and check it against tol."""
    G = gamma_bar(net).gamma.to_numpy().astype(float)
    x = np.asarray(witness.x, dtype=float)
    y = np.asarray(witness.y, dtype=float)
    kin = witness.kinetics
    checks: dict[str, tuple[float, bool]] = {}
    sep = _maxabs(x - y)
    checks["distinct"] = (sep, sep > SEPARATION)
    checks["positive"] = (float(min(x.min(), y.min())), bool(x.min() > 0 and y.min() > 0))
    if isinstance(witness, CollisionWitness):
        if witness.outflow is None:
            res = _maxabs(_matvec_fsum(G, kin.rates(x)) - _matvec_fsum(G, kin.rates(y)))
            off = _image_offset(G, x - y)
            checks["class_offset"] = (off, off <= tol)
        else:
            out = np.asarray(witness.outflow)
            res = _maxabs(_matvec_fsum(G, kin.rates(x)) - out * x - _matvec_fsum(G, kin.rates(y)) + out * y)
        checks["residual"] = (res, res <= tol)
    elif isinstance(witness, EquilibriaPairWitness):
        rx = _maxabs(_matvec_fsum(G, kin.rates(x)))
        ry = _maxabs(_matvec_fsum(G, kin.rates(y)))
        off = _image_offset(G, x - y)
        checks["residual_x"] = (rx, rx <= tol)
        checks["residual_y"] = (ry, ry <= tol)
        checks["class_offset"] = (off, off <= tol)
    elif isinstance(witness, OpenSystemWitness):
        c = np.asarray(witness.inflow)
        out = np.asarray(witness.outflow)
        rx = _maxabs(c + _matvec_fsum(G, kin.rates(x)) - out * x)
        ry = _maxabs(c + _matvec_fsum(G, kin.rates(y)) - out * y)
        checks["residual_x"] = (rx, rx <= tol)
        checks["residual_y"] = (ry, ry <= tol)
        checks["inflow_positive"] = (float(c.min()), bool(c.min() > 0))
        checks["outflow_positive"] = (float(out.min()), bool(out.min() > 0))
    else:
        raise TypeError(f"unknown witness type {type(witness).__name__}")
    return ResidualReport(checks)
