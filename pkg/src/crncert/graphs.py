"""Complex digraphs, DSR/SR graphs, cycle classification and Condition (*).

Cycle enumeration runs Johnson's algorithm (``networkx.simple_cycles``) on the
simple digraph obtained by replacing each undirected edge with two antiparallel
arcs and collapsing parallel arcs. Each node cycle is then expanded over the
parallel edges between consecutive vertices; a cycle may not use one edge twice,
so an undirected edge never forms a 2-cycle with itself, while two distinct
parallel edges can.
"""

from __future__ import annotations

import enum
import itertools
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence, Union

import networkx as nx

from .crn_model import (
    Complex,
    Network,
    irreversible_expansion,
    rate_pattern,
    stoichiometric_matrices,
)
from .exact_linalg import RatMatrix
from .sign_patterns import Sign, SignPatternMatrix

__all__ = [
    "ComplexDigraph",
    "complex_digraph",
    "is_weakly_reversible",
    "arc_cycle_counts",
    "Direction",
    "Edge",
    "DSRGraph",
    "DSRMode",
    "dsr_graph",
    "dsr_graph_of_pair",
    "sr_graph",
    "Cycle",
    "enumerate_cycles",
    "ECycleNotSCycle",
    "ECyclePairSRIntersection",
    "StarVerdict",
    "condition_star",
    "export_dot",
]


# ---------------------------------------------------------------------------
# complex digraph


@dataclass(frozen=True)
class ComplexDigraph:
    species: tuple[str, ...]
    complexes: tuple[Complex, ...]
    arcs: tuple[tuple[int, int], ...]  # (source complex, target complex), one per irreversible reaction
    Y: RatMatrix  # species x complexes
    theta: RatMatrix  # complexes x arcs, -1 at the source and +1 at the target

    def nx_graph(self) -> nx.MultiDiGraph:
        g = nx.MultiDiGraph()
        g.add_nodes_from(range(len(self.complexes)))
        for k, (s, t) in enumerate(self.arcs):
            g.add_edge(s, t, key=k)
        return g


def complex_digraph(net: Network) -> ComplexDigraph:
    exp = irreversible_expansion(net)
    index: dict[Complex, int] = {}
    arcs = []
    for r in exp.reactions:
        for c in (r.left, r.right):
            if c not in index:
                index[c] = len(index)
        arcs.append((index[r.left], index[r.right]))
    complexes = tuple(index)
    n, c, m = net.n, len(complexes), len(arcs)
    Y = RatMatrix.from_columns([cx.vector(n) for cx in complexes], nrows=n) if c else RatMatrix.zeros(n, 0)
    theta_rows = [[0] * m for _ in range(c)]
    for k, (s, t) in enumerate(arcs):
        theta_rows[s][k] -= 1
        theta_rows[t][k] += 1
    theta = RatMatrix(theta_rows, ncols=m)
    return ComplexDigraph(net.species, complexes, tuple(arcs), Y, theta)


def is_weakly_reversible(g: ComplexDigraph | Network) -> bool:
    """Every connected component of the complex digraph is strongly connected."""
    if isinstance(g, Network):
        g = complex_digraph(g)
    comp = {}
    for k, scc in enumerate(nx.strongly_connected_components(g.nx_graph())):
        for v in scc:
            comp[v] = k
    # a component is strongly connected iff no arc joins two different SCCs
    return all(comp[s] == comp[t] for s, t in g.arcs)


def arc_cycle_counts(g: ComplexDigraph) -> list[int]:
    """Number of simple cycles of the complex digraph through each arc.

    Parallel arcs are distinct, so a node cycle is counted once per choice of
    arcs along it. A self-loop is a cycle of its own.
    """
    simple = nx.DiGraph()
    simple.add_nodes_from(range(len(g.complexes)))
    parallel: dict[tuple[int, int], list[int]] = defaultdict(list)
    for k, (s, t) in enumerate(g.arcs):
        parallel[(s, t)].append(k)
        if s != t:
            simple.add_edge(s, t)
    counts = [0] * len(g.arcs)
    for k, (s, t) in enumerate(g.arcs):
        if s == t:
            counts[k] = 1
    for cyc in nx.simple_cycles(simple):
        steps = [(cyc[i], cyc[(i + 1) % len(cyc)]) for i in range(len(cyc))]
        sizes = [len(parallel[st]) for st in steps]
        total = 1
        for s in sizes:
            total *= s
        for st, size in zip(steps, sizes):
            for k in parallel[st]:
                counts[k] += total // size
    return counts


# ---------------------------------------------------------------------------
# DSR graphs


class Direction(enum.Enum):
    UNDIRECTED = "undirected"
    R_TO_S = "R->S"
    S_TO_R = "S->R"


@dataclass(frozen=True)
class Edge:
    id: int
    species: int
    reaction: int
    sign: int  # +1 or -1
    label: Fraction | None  # None stands for the formal label infinity
    direction: Direction

    def arcs(self) -> list[tuple[tuple[int, int], tuple[int, int]]]:
        s, r = (0, self.species), (1, self.reaction)
        if self.direction is Direction.UNDIRECTED:
            return [(s, r), (r, s)]
        if self.direction is Direction.S_TO_R:
            return [(s, r)]
        return [(r, s)]


class DSRMode(enum.Enum):
    ReversibleAsSingle = "single"
    ReversibleAsPairs = "pairs"


@dataclass(frozen=True)
class DSRGraph:
    species: tuple[str, ...]
    reactions: tuple[str, ...]
    edges: tuple[Edge, ...]

    def vertex_name(self, v: tuple[int, int]) -> str:
        return self.species[v[1]] if v[0] == 0 else self.reactions[v[1]]


def _pattern_signs(s: Sign) -> tuple[int, ...]:
    return {Sign.POS: (1,), Sign.NEG: (-1,), Sign.ZERO: (), Sign.ANY: (1, -1)}[s]


def dsr_graph_of_pair(
    A: RatMatrix,
    B: SignPatternMatrix,
    species: Sequence[str] | None = None,
    reactions: Sequence[str] | None = None,
) -> DSRGraph:
    """Union DSR graph of A (n x m, numeric) with every B (m x n) in a sign pattern.

    An R->S edge comes from each nonzero A[i, j] and an S->R edge from each sign
    B[j, i] can take. Opposite edges of equal sign merge into one undirected edge
    labelled |A[i, j]|; leftover S->R edges carry the label infinity. When B[j, i]
    can take either sign, the union would also hold an R->S copy of the merged
    edge; it only duplicates cycles through the undirected edge and is left out.
    """
    n, m = A.shape
    if B.shape != (m, n):
        raise ValueError(f"B must be {m}x{n}, got {B.shape}")
    species = tuple(species) if species is not None else tuple(f"X{i + 1}" for i in range(n))
    reactions = tuple(reactions) if reactions is not None else tuple(f"R{j + 1}" for j in range(m))
    edges = []
    for i in range(n):
        for j in range(m):
            a = A[i, j]
            a_sign = (a > 0) - (a < 0)
            merged = False
            for s in _pattern_signs(B[j, i]):
                if s == a_sign:
                    edges.append((i, j, s, abs(a), Direction.UNDIRECTED))
                    merged = True
                else:
                    edges.append((i, j, s, None, Direction.S_TO_R))
            if a_sign and not merged:
                edges.append((i, j, a_sign, abs(a), Direction.R_TO_S))
    return DSRGraph(
        species,
        reactions,
        tuple(Edge(k, *e) for k, e in enumerate(edges)),
    )


def dsr_graph(net: Network, mode: DSRMode | str = DSRMode.ReversibleAsSingle) -> DSRGraph:
    mode = DSRMode(mode) if isinstance(mode, str) else mode
    if mode is DSRMode.ReversibleAsPairs:
        net = irreversible_expansion(net)
    gamma = stoichiometric_matrices(net).gamma
    return dsr_graph_of_pair(gamma, -rate_pattern(net), net.species, [r.label for r in net.reactions])


def sr_graph(A: RatMatrix, species: Sequence[str] | None = None, reactions: Sequence[str] | None = None) -> DSRGraph:
    """SR graph of a matrix: the DSR graph of (A, A^t); every edge is undirected."""
    return dsr_graph_of_pair(A, SignPatternMatrix.of_matrix(A).T, species, reactions)


# ---------------------------------------------------------------------------
# cycles


@dataclass(frozen=True)
class Cycle:
    """A simple cycle given by one admissible traversal.

    ``edges`` and ``vertices`` follow the canonical traversal: the admissible
    orientation and rotation with the smallest vertex sequence. ``orientations``
    holds every admissible traversal as a tuple of (edge id, from-vertex) pairs
    in the same rotation-independent form (a frozenset per orientation).
    """

    vertices: tuple[tuple[int, int], ...]
    edges: tuple[int, ...]
    orientations: frozenset[frozenset[tuple[int, tuple[int, int]]]] = field(compare=False)

    @property
    def edge_set(self) -> frozenset[int]:
        return frozenset(self.edges)

    def __len__(self) -> int:
        return len(self.edges)

    def key(self):
        return (len(self.edges), self.vertices, self.edges)


def enumerate_cycles(g: DSRGraph) -> list[Cycle]:
    """All simple cycles respecting edge directions, each once, in canonical order."""
    arcs: dict[tuple, list[int]] = defaultdict(list)
    simple = nx.DiGraph()
    for e in g.edges:
        for u, v in e.arcs():
            arcs[(u, v)].append(e.id)
            simple.add_edge(u, v)
    traversals: dict[frozenset[int], set[tuple]] = defaultdict(set)
    for node_cycle in nx.simple_cycles(simple):
        if len(node_cycle) < 2:
            continue
        k = len(node_cycle)
        steps = [(node_cycle[t], node_cycle[(t + 1) % k]) for t in range(k)]
        for choice in itertools.product(*(arcs[st] for st in steps)):
            if len(set(choice)) != k:
                continue
            traversals[frozenset(choice)].add((tuple(node_cycle), choice))
    out = []
    for eset, travs in traversals.items():
        best = None
        orients = set()
        for verts, eids in travs:
            orients.add(frozenset((e, verts[t]) for t, e in enumerate(eids)))
            rot = min(range(len(verts)), key=lambda t: (verts[t:] + verts[:t], eids[t:] + eids[:t]))
            cand = (verts[rot:] + verts[:rot], eids[rot:] + eids[:rot])
            if best is None or cand < best:
                best = cand
        out.append(Cycle(best[0], best[1], frozenset(orients)))
    out.sort(key=Cycle.key)
    return out


def _edge_map(g: DSRGraph) -> dict[int, Edge]:
    return {e.id: e for e in g.edges}


def cycle_parity(g: DSRGraph, c: Cycle) -> int:
    """P(c) = (-1)^(|c|/2) times the product of edge signs."""
    em = _edge_map(g)
    s = 1
    for e in c.edges:
        s *= em[e].sign
    return s * (-1) ** (len(c.edges) // 2)


def is_s_cycle(g: DSRGraph, c: Cycle) -> bool:
    em = _edge_map(g)
    labels = [em[e].label for e in c.edges]
    if any(lab is None for lab in labels):
        return False
    odd = Fraction(1)
    even = Fraction(1)
    for t, lab in enumerate(labels):
        if t % 2 == 0:
            odd *= lab
        else:
            even *= lab
    return odd == even


def _compatibly_oriented(c1: Cycle, c2: Cycle, common: frozenset[int]) -> bool:
    if not common:
        return True
    for o1 in c1.orientations:
        d1 = {e: v for e, v in o1 if e in common}
        for o2 in c2.orientations:
            if all(d1[e] == v for e, v in o2 if e in common):
                return True
    return False


def _components_all_odd(g: DSRGraph, common: frozenset[int]) -> bool:
    em = _edge_map(g)
    h = nx.MultiGraph()
    for e in common:
        h.add_edge((0, em[e].species), (1, em[e].reaction), key=e)
    for comp in nx.connected_components(h):
        if h.subgraph(comp).number_of_edges() % 2 == 0:
            return False
    return True


def have_s_to_r_intersection(g: DSRGraph, c1: Cycle, c2: Cycle) -> bool:
    """Compatibly oriented cycles sharing at least one edge, where every connected
    component of the shared edges has an odd number of edges.

    Edge-disjoint cycles never qualify: the reversible futile cycle has two
    vertex-disjoint e-cycles and still satisfies Condition (*).
    """
    common = c1.edge_set & c2.edge_set
    if not common:
        return False
    return _compatibly_oriented(c1, c2, common) and _components_all_odd(g, common)


@dataclass(frozen=True)
class ECycleNotSCycle:
    cycle: Cycle


@dataclass(frozen=True)
class ECyclePairSRIntersection:
    first: Cycle
    second: Cycle


@dataclass(frozen=True)
class StarVerdict:
    satisfied: bool
    violation: Union[ECycleNotSCycle, ECyclePairSRIntersection, None] = None

    def __bool__(self) -> bool:
        return self.satisfied


def condition_star(g: DSRGraph) -> StarVerdict:
    """All e-cycles are s-cycles and no two e-cycles have S-to-R intersection."""
    ecycles = [c for c in enumerate_cycles(g) if cycle_parity(g, c) == 1]
    for c in ecycles:
        if not is_s_cycle(g, c):
            return StarVerdict(False, ECycleNotSCycle(c))
    for c1, c2 in itertools.combinations(ecycles, 2):
        if have_s_to_r_intersection(g, c1, c2):
            return StarVerdict(False, ECyclePairSRIntersection(c1, c2))
    return StarVerdict(True)


def describe_cycle(g: DSRGraph, c: Cycle) -> str:
    return " - ".join(g.vertex_name(v) for v in c.vertices)


# ---------------------------------------------------------------------------
# DOT export


def _dot_quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_dot(g: DSRGraph | ComplexDigraph) -> str:
    if isinstance(g, ComplexDigraph):
        return _complex_dot(g)
    lines = ["digraph DSR {", "  node [fontname=Helvetica];"]
    for name in g.species:
        lines.append(f"  {_dot_quote('S_' + name)} [shape=circle, label={_dot_quote(name)}];")
    for j, label in enumerate(g.reactions):
        lines.append(f"  {_dot_quote(f'R_{j + 1}')} [shape=box, style=filled, fillcolor=lightgray, label={_dot_quote(label)}];")
    for e in g.edges:
        s = _dot_quote("S_" + g.species[e.species])
        r = _dot_quote(f"R_{e.reaction + 1}")
        label = "inf" if e.label is None else str(e.label)
        attrs = [f"label={_dot_quote(label)}"]
        if e.sign < 0:
            attrs.append("style=dashed")
        if e.direction is Direction.UNDIRECTED:
            attrs.append("dir=none")
            src, dst = s, r
        elif e.direction is Direction.S_TO_R:
            src, dst = s, r
        else:
            src, dst = r, s
        lines.append(f"  {src} -> {dst} [{', '.join(attrs)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _complex_dot(g: ComplexDigraph) -> str:
    lines = ["digraph complexes {", "  node [shape=plaintext, fontname=Helvetica];"]
    for k, c in enumerate(g.complexes):
        lines.append(f"  C{k} [label={_dot_quote(c.render(g.species))}];")
    for s, t in g.arcs:
        lines.append(f"  C{s} -> C{t};")
    lines.append("}")
    return "\n".join(lines) + "\n"
