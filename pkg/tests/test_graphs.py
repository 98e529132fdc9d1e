"""DSR graphs, cycles and Condition (*), with a brute-force cycle oracle."""
from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crncert.crn_model import parse_network
from crncert.exact_linalg import RatMatrix
from crncert.graphs import (
    Direction,
    DSRMode,
    ECycleNotSCycle,
    complex_digraph,
    condition_star,
    cycle_parity,
    describe_cycle,
    dsr_graph,
    enumerate_cycles,
    export_dot,
    is_s_cycle,
    is_weakly_reversible,
    sr_graph,
)

from conftest import CORPUS, load, random_network_text


def _brute_cycles(g) -> set[frozenset[int]]:
    """Edge sets of simple directed-respecting cycles by exhaustive DFS."""
    out: dict[tuple, list[tuple[int, tuple]]] = {}
    for e in g.edges:
        for u, v in e.arcs():
            out.setdefault(u, []).append((e.id, v))
    found: set[frozenset[int]] = set()

    def dfs(start, u, seen_v, used):
        for eid, v in out.get(u, []):
            if eid in used:
                continue
            if v == start and len(used) >= 1:
                found.add(frozenset(used | {eid}))
            elif v not in seen_v:
                dfs(start, v, seen_v | {v}, used | {eid})

    for start in list(out):
        dfs(start, start, {start}, frozenset())
    return found


def _brute_weakly_reversible(net) -> bool:
    cd = complex_digraph(net)
    succ: dict = {}
    for u, v in cd.arcs:
        succ.setdefault(u, set()).add(v)

    def reach(a):
        seen, stack = {a}, [a]
        while stack:
            for w in succ.get(stack.pop(), ()):
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return seen

    return all(u in reach(v) for u, v in cd.arcs)


@pytest.mark.parametrize("mode", list(DSRMode))
@pytest.mark.parametrize("name", CORPUS)
def test_cycles_match_brute_force_on_corpus(name, mode):
    g = dsr_graph(load(name), mode)
    cycles = enumerate_cycles(g)
    assert {c.edge_set for c in cycles} == _brute_cycles(g)
    assert len({c.edge_set for c in cycles}) == len(cycles)


@settings(max_examples=60)
@given(st.integers(0, 10_000))
def test_cycles_match_brute_force_random(seed):
    net = parse_network(random_network_text(random.Random(seed), max_species=5, max_reactions=4))
    g = dsr_graph(net)
    assert {c.edge_set for c in enumerate_cycles(g)} == _brute_cycles(g)


@pytest.mark.parametrize("name", CORPUS)
def test_weak_reversibility_matches_reachability(name):
    net = load(name)
    assert is_weakly_reversible(net) == _brute_weakly_reversible(net)


@settings(max_examples=100)
@given(st.integers(0, 10_000))
def test_weak_reversibility_random(seed):
    net = parse_network(random_network_text(random.Random(seed)))
    assert is_weakly_reversible(net) == _brute_weakly_reversible(net)


# corpus goldens: Condition (*) holds for these networks
@pytest.mark.parametrize("name", ["exbasic", "exfutile", "exfutilerev"])
def test_condition_star_holds(name):
    assert condition_star(dsr_graph(load(name)))


def test_condition_star_fails_for_weakly_reversible_triangle():
    assert not condition_star(dsr_graph(load("exWR")))


def test_violation_is_reported():
    verdict = condition_star(dsr_graph(load("exWR")))
    assert verdict.violation is not None
    if isinstance(verdict.violation, ECycleNotSCycle):
        g = dsr_graph(load("exWR"))
        c = verdict.violation.cycle
        assert cycle_parity(g, c) == 1 and not is_s_cycle(g, c)


def test_edges_of_mixed_reaction():
    # A + D -> B + D: D is both reactant and product, so its R->S edge vanishes
    g = dsr_graph(parse_network("A + D -> B + D"))
    kinds = sorted((g.species[e.species], e.direction, e.sign) for e in g.edges)
    assert kinds == [
        ("A", Direction.UNDIRECTED, -1),
        ("B", Direction.R_TO_S, 1),
        ("D", Direction.S_TO_R, -1),
    ]


def test_sr_graph_is_undirected_with_abs_labels():
    g = sr_graph(RatMatrix([[-2, 0], [1, 3]]))
    assert all(e.direction is Direction.UNDIRECTED for e in g.edges)
    assert sorted(e.label for e in g.edges) == [1, 2, 3]


def test_describe_cycle_names_vertices():
    g = dsr_graph(load("exbasic"))
    (c,) = enumerate_cycles(g)
    assert set(describe_cycle(g, c).split(" - ")) == {"A", "B", "R1", "R2"}


def test_dot_export_is_well_formed():
    g = dsr_graph(load("exbasic"))
    dot = export_dot(g)
    assert dot.startswith("digraph DSR {") and dot.rstrip().endswith("}")
    assert dot.count(" -> ") == len(g.edges)
    for s in g.species:
        assert f'label="{s}"' in dot
    cd = export_dot(complex_digraph(load("exbasic")))
    assert cd.count(" -> ") == 4 and 'label="A + B"' in cd
