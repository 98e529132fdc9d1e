"""Exact linear feasibility, bounded classes, positive equilibria and siphons.

Strict inequalities never reach the solver: every query here is homogeneous, so
"x >> 0" is posed as "x >= 1".
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .crn_model import Network, gamma_bar, irreversible_expansion, stoichiometric_matrices
from .exact_linalg import RatMatrix

__all__ = [
    "LinearSystem",
    "solve_feasibility",
    "bounded_classes",
    "bounded_classes_certificate",
    "admits_positive_equilibria",
    "positive_kernel_vector",
    "is_siphon",
    "minimal_siphons",
    "all_siphons",
    "NotASiphon",
    "Siphon",
    "is_critical_siphon",
    "siphon_details",
    "PersistenceFlags",
    "persistence_flags",
]

log = logging.getLogger(__name__)


@dataclass
class LinearSystem:
    """Rows ``a . x (rel) b`` with rel in {'>=', '='}; every variable is free."""

    nvars: int
    rows: list[tuple[list[Fraction], str, Fraction]] = field(default_factory=list)

    def add(self, coeffs: Sequence, rel: str, rhs) -> "LinearSystem":
        if rel not in (">=", "="):
            raise ValueError(f"relation must be '>=' or '=', got {rel!r}")
        if len(coeffs) != self.nvars:
            raise ValueError("coefficient count differs from nvars")
        self.rows.append(([Fraction(c) for c in coeffs], rel, Fraction(rhs)))
        return self

    def satisfied_by(self, x: Sequence[Fraction]) -> bool:
        for a, rel, b in self.rows:
            lhs = sum((ai * xi for ai, xi in zip(a, x)), Fraction(0))
            if (rel == "=" and lhs != b) or (rel == ">=" and lhs < b):
                return False
        return True


def solve_feasibility(sys: LinearSystem) -> list[Fraction] | None:
    """Exact Phase-I simplex with Bland's rule. Returns a feasible point or None.

    Free variables are split as x = u - v with u, v >= 0, each '>=' row gets a
    surplus column, rows are negated so that right-hand sides are nonnegative,
    and one artificial column per row starts the basis.
    """
    nv = sys.nvars
    nrows = len(sys.rows)
    if nrows == 0:
        return [Fraction(0)] * nv
    n_ineq = sum(1 for _, rel, _ in sys.rows if rel == ">=")
    ncols = 2 * nv + n_ineq + nrows  # u, v, surplus, artificial
    art0 = 2 * nv + n_ineq
    T: list[list[Fraction]] = []
    k = 0
    for i, (a, rel, b) in enumerate(sys.rows):
        row = [Fraction(0)] * (ncols + 1)
        for j, c in enumerate(a):
            row[j] = c
            row[nv + j] = -c
        if rel == ">=":
            row[2 * nv + k] = Fraction(-1)
            k += 1
        row[ncols] = b
        if b < 0:
            row = [-v for v in row]
        row[art0 + i] = Fraction(1)
        T.append(row)
    basis = [art0 + i for i in range(nrows)]
    # reduced costs of the phase-one objective (sum of artificials)
    cost = [Fraction(0)] * (ncols + 1)
    for row in T:
        for j in range(ncols + 1):
            if j < art0 or j == ncols:
                cost[j] -= row[j]
    while True:
        enter = next((j for j in range(ncols) if cost[j] < 0), None)
        if enter is None:
            break
        best = None
        for i, row in enumerate(T):
            if row[enter] > 0:
                ratio = row[ncols] / row[enter]
                if best is None or ratio < best[0] or (ratio == best[0] and basis[i] < basis[best[1]]):
                    best = (ratio, i)
        if best is None:  # unbounded direction; cannot happen for phase one
            break
        r = best[1]
        pr = T[r]
        pv = pr[enter]
        pr = [v / pv for v in pr]
        T[r] = pr
        for i in range(nrows):
            if i != r and T[i][enter]:
                f = T[i][enter]
                Ti = T[i]
                T[i] = [a - f * b for a, b in zip(Ti, pr)]
        if cost[enter]:
            f = cost[enter]
            cost = [a - f * b for a, b in zip(cost, pr)]
        basis[r] = enter
    if -cost[ncols] != 0:
        return None
    sol = [Fraction(0)] * ncols
    for i, bi in enumerate(basis):
        sol[bi] = T[i][ncols]
    x = [sol[j] - sol[nv + j] for j in range(nv)]
    assert sys.satisfied_by(x), "simplex returned an infeasible point"
    return x


# ---------------------------------------------------------------------------
# equilibria and conservation


def bounded_classes_certificate(net: Network) -> list[Fraction] | None:
    """p with Gamma^t p = 0 and p >= 1, or None."""
    G = stoichiometric_matrices(net).gamma
    n = net.n
    sys = LinearSystem(n)
    for j in range(G.ncols):
        sys.add(G.col(j), "=", 0)
    for i in range(n):
        sys.add([int(i == k) for k in range(n)], ">=", 1)
    return solve_feasibility(sys)


def bounded_classes(net: Network) -> bool:
    return bounded_classes_certificate(net) is not None


def positive_kernel_vector(A: RatMatrix) -> list[Fraction] | None:
    """z with A z = 0 and z >= 1, or None."""
    m = A.ncols
    sys = LinearSystem(m)
    for i in range(A.nrows):
        sys.add(A.row(i), "=", 0)
    for j in range(m):
        sys.add([int(j == k) for k in range(m)], ">=", 1)
    return solve_feasibility(sys)


def admits_positive_equilibria(net: Network) -> bool:
    return positive_kernel_vector(gamma_bar(net).gamma) is not None


# ---------------------------------------------------------------------------
# siphons


class NotASiphon(ValueError):
    pass


def _irreversible_sides(net: Network) -> list[tuple[frozenset[int], frozenset[int]]]:
    return [(r.left.species, r.right.species) for r in irreversible_expansion(net).reactions]


def is_siphon(net: Network, sigma: Iterable[int]) -> bool:
    """Every reaction producing a species of sigma consumes a species of sigma."""
    s = frozenset(sigma)
    if not s:
        return False
    return all(not (right & s) or (left & s) for left, right in _irreversible_sides(net))


def minimal_siphons(net: Network) -> list[frozenset[int]]:
    """All inclusion-minimal siphons, sorted by (size, members).

    Branch and bound: seed with one species s, forbid every species before s,
    then repeatedly pick a reaction that produces into the current set without
    consuming from it and branch on which of its reactants joins the set. Each
    branch forbids the reactants tried before it, so a minimal siphon with
    smallest element s is reached along exactly one path.
    """
    sides = _irreversible_sides(net)
    n = net.n
    found: set[frozenset[int]] = set()

    def grow(cur: frozenset[int], forbidden: frozenset[int]) -> None:
        if any(m <= cur for m in found):
            return
        for left, right in sides:
            if right & cur and not left & cur:
                cands = sorted(left - forbidden)
                extra = frozenset()
                for c in cands:
                    grow(cur | {c}, forbidden | extra)
                    extra = extra | {c}
                return
        found.add(cur)

    for s in range(n):
        grow(frozenset({s}), frozenset(range(s)))
    minimal = [a for a in found if not any(b < a for b in found)]
    return sorted(minimal, key=lambda a: (len(a), sorted(a)))


def all_siphons(net: Network) -> list[frozenset[int]]:
    """Every siphon, sorted by (size, members).

    Siphons are not in general unions of minimal siphons when a species occurs
    on both sides of a reaction, so this is a separate include/exclude search.
    A partial assignment is abandoned as soon as some reaction produces an
    included species while all of its reactants are excluded.
    """
    sides = _irreversible_sides(net)
    n = net.n
    out: list[frozenset[int]] = []

    def dead(inc: frozenset[int], exc: frozenset[int]) -> bool:
        return any(right & inc and left <= exc for left, right in sides)

    def rec(i: int, inc: frozenset[int], exc: frozenset[int]) -> None:
        if dead(inc, exc):
            return
        if i == n:
            if inc:
                out.append(inc)
            return
        rec(i + 1, inc | {i}, exc)
        rec(i + 1, inc, exc | {i})

    rec(0, frozenset(), frozenset())
    return sorted(out, key=lambda a: (len(a), sorted(a)))


def _psemiflow(G: RatMatrix, sigma: frozenset[int]) -> list[Fraction] | None:
    """p >= 0, supported in sigma, summing to 1, with Gamma^t p = 0."""
    n = G.nrows
    sys = LinearSystem(n)
    for j in range(G.ncols):
        sys.add(G.col(j), "=", 0)
    for i in range(n):
        unit = [int(i == k) for k in range(n)]
        sys.add(unit, "=" if i not in sigma else ">=", 0)
    sys.add([1] * n, "=", 1)
    return solve_feasibility(sys)


def _face_meets_nontrivial_class(G: RatMatrix, sigma: frozenset[int]) -> bool:
    """Exists x, w with x = 0 on sigma, x >= 1 off sigma, x + G w >= 1."""
    n, m = G.shape
    sys = LinearSystem(n + m)
    for i in range(n):
        unit = [int(i == k) for k in range(n)] + [0] * m
        if i in sigma:
            sys.add(unit, "=", 0)
        else:
            sys.add(unit, ">=", 1)
        sys.add([int(i == k) for k in range(n)] + list(G.row(i)), ">=", 1)
    return solve_feasibility(sys) is not None


@dataclass(frozen=True)
class Siphon:
    species: frozenset[int]
    minimal: bool
    critical: bool
    psemiflow: tuple[Fraction, ...] | None

    def names(self, net: Network) -> list[str]:
        return [net.species[i] for i in sorted(self.species)]


def siphon_details(net: Network, sigma: Iterable[int], minimal: bool | None = None) -> Siphon:
    s = frozenset(sigma)
    if not is_siphon(net, s):
        raise NotASiphon(f"{sorted(s)} is not a siphon")
    G = stoichiometric_matrices(net).gamma
    critical = _face_meets_nontrivial_class(G, s)
    p = _psemiflow(G, s)
    if p is not None:
        # a P-semiflow supported in the siphon certifies non-criticality
        assert not critical, "LP says critical although a P-semiflow exists"
    elif not critical:
        log.info("siphon %s: non-critical by LP, no P-semiflow inside it", sorted(s))
    if minimal is None:
        minimal = s in set(minimal_siphons(net))
    return Siphon(s, minimal, critical, tuple(p) if p is not None else None)


def is_critical_siphon(net: Network, sigma: Iterable[int]) -> bool:
    return siphon_details(net, sigma, minimal=False).critical


@dataclass(frozen=True)
class PersistenceFlags:
    pc1: bool
    pc2: bool
    critical_siphons: tuple[frozenset[int], ...] = ()


def persistence_flags(net: Network) -> PersistenceFlags:
    mins = minimal_siphons(net)
    critical = tuple(s for s in all_siphons(net) if is_critical_siphon(net, s))
    full = frozenset(range(net.n))
    pc1 = all(s == full for s in mins) and full not in critical
    return PersistenceFlags(pc1=pc1, pc2=not critical, critical_siphons=critical)
