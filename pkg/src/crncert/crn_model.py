"""Reaction networks: data model, text format, stoichiometric matrices, rate patterns.

File format, one reaction per line::

    # comment
    A + B <-> C        # reversible
    2A --> B           # irreversible
    C -> 0             # '0' is the empty complex
    1/2 X + Y -> Z     # rational coefficients (unless strict_integer=True)
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .exact_linalg import RatMatrix
from .sign_patterns import Sign, SignPatternMatrix

__all__ = [
    "ParseError",
    "Complex",
    "Reaction",
    "Network",
    "StoichTriple",
    "NetworkPredicates",
    "KineticsClass",
    "PowerLaw",
    "parse_network",
    "render_network",
    "stoichiometric_matrices",
    "irreversible_expansion",
    "gamma_bar",
    "rate_pattern",
    "network_predicates",
    "permute_network",
]


class ParseError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.message = message
        self.line = line
        self.column = column


@dataclass(frozen=True)
class Complex:
    """Sorted (species index, multiplicity) pairs with positive multiplicities."""

    terms: tuple[tuple[int, Fraction], ...] = ()

    @classmethod
    def of(cls, mapping: Mapping[int, object]) -> "Complex":
        items = []
        for i, c in mapping.items():
            c = Fraction(c)
            if c < 0:
                raise ValueError("multiplicities must be nonnegative")
            if c:
                items.append((int(i), c))
        return cls(tuple(sorted(items)))

    def get(self, i: int) -> Fraction:
        for j, c in self.terms:
            if j == i:
                return c
        return Fraction(0)

    @property
    def species(self) -> frozenset[int]:
        return frozenset(i for i, _ in self.terms)

    def is_empty(self) -> bool:
        return not self.terms

    def vector(self, n: int) -> list[Fraction]:
        v = [Fraction(0)] * n
        for i, c in self.terms:
            v[i] = c
        return v

    def render(self, names: Sequence[str]) -> str:
        if not self.terms:
            return "0"
        parts = []
        for i, c in self.terms:
            coef = "" if c == 1 else str(c) + (" " if c.denominator != 1 else "")
            parts.append(f"{coef}{names[i]}")
        return " + ".join(parts)


@dataclass(frozen=True)
class Reaction:
    left: Complex
    right: Complex
    reversible: bool
    label: str


@dataclass(frozen=True)
class Network:
    species: tuple[str, ...]
    reactions: tuple[Reaction, ...]

    @property
    def n(self) -> int:
        return len(self.species)

    @property
    def m(self) -> int:
        return len(self.reactions)

    @classmethod
    def from_stoichiometry(
        cls,
        left: RatMatrix | Sequence[Sequence],
        right: RatMatrix | Sequence[Sequence],
        reversible: Sequence[bool] | None = None,
        species: Sequence[str] | None = None,
    ) -> "Network":
        """Build a network from its reactant and product matrices (species x reactions)."""
        L = left if isinstance(left, RatMatrix) else RatMatrix(left)
        R = right if isinstance(right, RatMatrix) else RatMatrix(right)
        if L.shape != R.shape:
            raise ValueError("left and right matrices differ in shape")
        n, m = L.shape
        names = tuple(species) if species is not None else tuple(f"X{i + 1}" for i in range(n))
        rev = list(reversible) if reversible is not None else [False] * m
        rxns = []
        for j in range(m):
            lc = Complex.of({i: L[i, j] for i in range(n)})
            rc = Complex.of({i: R[i, j] for i in range(n)})
            rxns.append(Reaction(lc, rc, bool(rev[j]), f"R{j + 1}"))
        return cls(names, tuple(rxns))

    @classmethod
    def from_gamma(cls, gamma: RatMatrix | Sequence[Sequence], species: Sequence[str] | None = None) -> "Network":
        """Irreversible simple network whose stoichiometric matrix is gamma."""
        G = gamma if isinstance(gamma, RatMatrix) else RatMatrix(gamma)
        return cls.from_stoichiometry(G.negative_part(), G.positive_part(), None, species)


@dataclass(frozen=True)
class StoichTriple:
    gamma: RatMatrix
    gamma_left: RatMatrix
    gamma_right: RatMatrix


@dataclass(frozen=True)
class NetworkPredicates:
    is_simple: bool
    is_simply_reversible: bool
    is_fully_irreversible: bool


class KineticsClass(enum.Enum):
    GeneralKinetics = "GK"
    WeakGeneralKinetics = "WGK"
    PositiveGeneralKinetics = "GK+"
    MassAction = "MA"
    PhysicalPowerLaw = "PPLK"

    @classmethod
    def parse(cls, token: str) -> "KineticsClass":
        for k in cls:
            if token in (k.value, k.name):
                return k
        raise ValueError(f"unknown kinetics class {token!r}")


@dataclass(frozen=True)
class PowerLaw:
    """Power-law kinetics with an explicit n x m exponent-transpose matrix M."""

    M: RatMatrix


# ---------------------------------------------------------------------------
# parser

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<arrow><-->|<->|-->|->)
  | (?P<plus>\+)
  | (?P<num>\d+(?:/\d+)?)
  | (?P<name>[A-Za-z][A-Za-z0-9_]*)
    """,
    re.VERBOSE,
)


def _tokenize(line: str, lineno: int):
    pos = 0
    toks = []
    while pos < len(line):
        mt = _TOKEN.match(line, pos)
        if mt is None:
            ch = line[pos]
            if ch in "<>-=":
                raise ParseError(f"malformed arrow near {line[pos:pos + 4]!r}", lineno, pos + 1)
            raise ParseError(f"unexpected character {ch!r}", lineno, pos + 1)
        kind = mt.lastgroup
        if kind != "ws":
            toks.append((kind, mt.group(), pos + 1))
        pos = mt.end()
    return toks


def _parse_complex(toks, lineno, strict_integer, species, casefold):
    """Parse tokens of one side. Returns a dict name -> Fraction."""
    if not toks:
        raise ParseError("missing complex", lineno, 1)
    if len(toks) == 1 and toks[0][0] == "num" and toks[0][1] == "0":
        return {}
    terms: dict[str, Fraction] = {}
    i = 0
    expect_term = True
    while i < len(toks):
        kind, text, col = toks[i]
        if expect_term:
            coef = Fraction(1)
            if kind == "num":
                if "/" in text:
                    if strict_integer:
                        raise ParseError(f"bad coefficient {text!r}: integers only", lineno, col)
                    p, q = text.split("/")
                    if int(q) == 0:
                        raise ParseError(f"bad coefficient {text!r}: zero denominator", lineno, col)
                    coef = Fraction(int(p), int(q))
                else:
                    coef = Fraction(int(text))
                if coef <= 0:
                    raise ParseError(f"bad coefficient {text!r}: must be positive", lineno, col)
                i += 1
                if i >= len(toks) or toks[i][0] != "name":
                    where = toks[i][2] if i < len(toks) else col + len(text)
                    raise ParseError(f"coefficient {text!r} must be followed by a species", lineno, where)
                kind, text, col = toks[i]
            if kind != "name":
                raise ParseError(f"expected species, found {text!r}", lineno, col)
            folded = text.casefold()
            if folded in casefold and casefold[folded] != text:
                raise ParseError(
                    f"species {text!r} clashes with {casefold[folded]!r} (names differ only by case)",
                    lineno,
                    col,
                )
            casefold[folded] = text
            if text not in species:
                species.append(text)
            terms[text] = terms.get(text, Fraction(0)) + coef
            expect_term = False
        else:
            if kind != "plus":
                raise ParseError(f"expected '+' or arrow, found {text!r}", lineno, col)
            expect_term = True
        i += 1
    if expect_term:
        raise ParseError("dangling '+'", lineno, toks[-1][2])
    return terms


def parse_network(text: str, strict_integer: bool = False) -> Network:
    species: list[str] = []
    casefold: dict[str, str] = {}
    raw = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0]
        if not line.strip():
            continue
        toks = _tokenize(line, lineno)
        arrows = [k for k, t in enumerate(toks) if t[0] == "arrow"]
        if len(arrows) != 1:
            col = toks[arrows[1]][2] if len(arrows) > 1 else len(line.rstrip()) + 1
            msg = "more than one arrow" if arrows else "missing arrow"
            raise ParseError(msg, lineno, col)
        a = arrows[0]
        arrow = toks[a][1]
        if a == 0:
            raise ParseError("missing left complex", lineno, toks[a][2])
        if a == len(toks) - 1:
            raise ParseError("missing right complex", lineno, toks[a][2] + len(arrow))
        left = _parse_complex(toks[:a], lineno, strict_integer, species, casefold)
        right = _parse_complex(toks[a + 1:], lineno, strict_integer, species, casefold)
        if not left and not right:
            raise ParseError("reaction between two empty complexes", lineno, toks[a][2])
        raw.append((left, right, arrow.startswith("<")))
    index = {s: i for i, s in enumerate(species)}
    rxns = tuple(
        Reaction(
            Complex.of({index[s]: c for s, c in left.items()}),
            Complex.of({index[s]: c for s, c in right.items()}),
            rev,
            f"R{j + 1}",
        )
        for j, (left, right, rev) in enumerate(raw)
    )
    return Network(tuple(species), rxns)


def render_network(net: Network) -> str:
    lines = []
    for r in net.reactions:
        arrow = "<->" if r.reversible else "->"
        lines.append(f"{r.left.render(net.species)} {arrow} {r.right.render(net.species)}")
    return "\n".join(lines) + ("\n" if lines else "")


# ---------------------------------------------------------------------------
# derived matrices


def stoichiometric_matrices(net: Network) -> StoichTriple:
    n = net.n
    L = RatMatrix.from_columns([r.left.vector(n) for r in net.reactions], nrows=n)
    R = RatMatrix.from_columns([r.right.vector(n) for r in net.reactions], nrows=n)
    if not net.reactions:
        L = R = RatMatrix.zeros(n, 0)
    return StoichTriple(R - L, L, R)


def irreversible_expansion(net: Network) -> Network:
    """Each reversible reaction becomes forward then backward, in place."""
    out = []
    for r in net.reactions:
        if r.reversible:
            out.append(Reaction(r.left, r.right, False, r.label + ".f"))
            out.append(Reaction(r.right, r.left, False, r.label + ".b"))
        else:
            out.append(r)
    return Network(net.species, tuple(out))


def gamma_bar(net: Network) -> StoichTriple:
    """Stoichiometric matrices of the irreversible expansion."""
    return stoichiometric_matrices(irreversible_expansion(net))


def rate_pattern(net: Network) -> SignPatternMatrix:
    """m x n sign pattern of the rate Jacobian allowed for the network."""
    rows = []
    for r in net.reactions:
        L, R = r.left.species, r.right.species
        row = []
        for i in range(net.n):
            if not r.reversible:
                row.append(Sign.POS if i in L else Sign.ZERO)
            elif i in L and i in R:
                row.append(Sign.ANY)
            elif i in L:
                row.append(Sign.POS)
            elif i in R:
                row.append(Sign.NEG)
            else:
                row.append(Sign.ZERO)
        rows.append(row)
    return SignPatternMatrix(rows, ncols=net.n)


def network_predicates(net: Network) -> NetworkPredicates:
    simple = all(not (r.left.species & r.right.species) for r in net.reactions)
    return NetworkPredicates(
        is_simple=simple,
        is_simply_reversible=simple and all(r.reversible for r in net.reactions),
        is_fully_irreversible=not any(r.reversible for r in net.reactions),
    )


def permute_network(net: Network, species_order: Sequence[int], reaction_order: Sequence[int]) -> Network:
    """Relabel species (new position k holds old species species_order[k]) and reorder reactions."""
    new_index = {old: new for new, old in enumerate(species_order)}

    def remap(c: Complex) -> Complex:
        return Complex.of({new_index[i]: v for i, v in c.terms})

    rxns = tuple(
        Reaction(remap(net.reactions[j].left), remap(net.reactions[j].right), net.reactions[j].reversible, f"R{k + 1}")
        for k, j in enumerate(reaction_order)
    )
    return Network(tuple(net.species[i] for i in species_order), rxns)
