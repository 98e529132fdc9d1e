"""Implication engine, report rendering and the command-line interface.

Structural flags go in, per-kinetics claim statuses come out. Every status
carries the id of the rule that produced it; the rules live in ``RULES`` and
``EQUILIBRIUM_RULES`` so the documentation and the engine read the same data.
"""

from __future__ import annotations

import argparse
import enum
import json
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

from . import __version__
from .concordance import (
    Verdict,
    VectorSign,
    accordance,
    concordance,
    semiaccordance,
    semiconcordance,
    strong_incompatibility_search,
    wsd_flags,
)
from .crn_model import (
    KineticsClass,
    Network,
    ParseError,
    gamma_bar,
    network_predicates,
    parse_network,
    rate_pattern,
    render_network,
    stoichiometric_matrices,
)
from .exact_linalg import rank
from .feasibility import (
    admits_positive_equilibria,
    all_siphons,
    bounded_classes,
    minimal_siphons,
    persistence_flags,
    siphon_details,
)
from .graphs import DSRMode, condition_star, describe_cycle, dsr_graph, enumerate_cycles, export_dot, is_weakly_reversible
from .sign_patterns import is_r_SSD, is_SSD
from . import witnesses as wit

__all__ = [
    "CLAIMS",
    "APPLICABLE",
    "Status",
    "Rule",
    "RULES",
    "EquilibriumRule",
    "EQUILIBRIUM_RULES",
    "StructuralFlags",
    "Claim",
    "EquilibriumStatement",
    "ClaimSet",
    "AnalysisReport",
    "InconsistentFlags",
    "structural_flags",
    "derive_claims",
    "analyze",
    "render_text",
    "render_json",
    "report_dict",
    "cli_main",
]

GK = KineticsClass.GeneralKinetics
WGK = KineticsClass.WeakGeneralKinetics
GKP = KineticsClass.PositiveGeneralKinetics
MA = KineticsClass.MassAction
PPLK = KineticsClass.PhysicalPowerLaw
ALL_KINETICS = (GK, WGK, GKP, MA, PPLK)

CLAIMS = ("IC1''", "IC1'", "IC1", "IC1a", "IC1-", "IC2''", "IC2'", "IC2")

# claims that make sense for each kinetics class (boundary behaviour decides)
APPLICABLE: dict[KineticsClass, tuple[str, ...]] = {
    GK: ("IC1''", "IC1'", "IC1", "IC1-", "IC2''", "IC2'", "IC2"),
    WGK: ("IC1'", "IC1", "IC1-", "IC2'", "IC2"),
    GKP: ("IC1", "IC1-", "IC2"),
    MA: CLAIMS,
    PPLK: ("IC1'", "IC1", "IC1a", "IC1-", "IC2'", "IC2"),
}

# stronger claim => weaker claim
CLAIM_ORDER = (
    ("IC1''", "IC1'"),
    ("IC1a", "IC1'"),
    ("IC1'", "IC1"),
    ("IC1", "IC1-"),
    ("IC2''", "IC2'"),
    ("IC2'", "IC2"),
    ("IC2", "IC1-"),
)


class Status(enum.Enum):
    Holds = "holds"
    FailsForSomeChoice = "fails_for_some_choice"
    NotDetermined = "not_determined"


class InconsistentFlags(AssertionError):
    pass


# ---------------------------------------------------------------------------
# flags


@dataclass(frozen=True)
class StructuralFlags:
    """Every structural predicate the rules consume; None means not computed/not applicable."""

    species: int
    reactions: int
    zero_stoichiometry: bool
    rank: int
    concordance: Verdict | None = None
    accordant: bool | None = None
    semiconcordance: VectorSign | None = None
    semiaccordant: bool | None = None
    normal: bool | None = None
    ssd: bool | None = None
    r_ssd: bool | None = None
    wsd: bool | None = None
    r_strong_wsd: bool | None = None
    r_strong_neg_wsd: bool | None = None
    weakly_reversible: bool | None = None
    condition_star_single: bool | None = None
    condition_star_pairs: bool | None = None
    bc1: bool | None = None
    admits_positive_equilibria: bool | None = None
    pc1: bool | None = None
    pc2: bool | None = None
    is_simple: bool | None = None
    is_simply_reversible: bool | None = None
    is_fully_irreversible: bool | None = None
    strong_incompatibility: str | None = None  # "certified" | "excluded" | "unknown"

    @property
    def concordant(self) -> bool:
        return self.zero_stoichiometry or (self.concordance is not None and self.concordance.concordant)

    @property
    def semiconcordant(self) -> bool:
        return self.zero_stoichiometry or self.semiconcordance in (VectorSign.Pos, VectorSign.Neg)

    def as_dict(self) -> dict:
        out = {}
        for name in self.__dataclass_fields__:
            v = getattr(self, name)
            out[name] = v.value if isinstance(v, enum.Enum) else v
        return out


def _check(cond: bool, what: str) -> None:
    if not cond:
        raise InconsistentFlags(what)


def check_flag_consistency(f: StructuralFlags) -> None:
    """Implications that must hold between independently computed flags."""
    if f.zero_stoichiometry:
        return
    conc = f.concordant
    sd = f.concordance is Verdict.StructurallyDiscordant
    if f.accordant and not sd:
        _check(conc, "accordant and not structurally discordant, yet not concordant")
    if f.weakly_reversible and f.accordant:
        _check(conc, "weakly reversible and accordant, yet not concordant")
    if f.weakly_reversible and conc:
        _check(bool(f.pc2), "weakly reversible and concordant, yet a critical siphon exists")
    if f.is_simply_reversible:
        _check(f.accordant == f.ssd, "simply reversible: accordance differs from SSD")
        _check((f.concordance is Verdict.ConcordantPos) == f.r_ssd, "simply reversible: concordance differs from r-SSD")
    if f.semiaccordant and f.normal:
        _check(f.semiconcordant, "semiaccordant and normal, yet not semiconcordant")
    if f.condition_star_single or f.condition_star_pairs:
        _check(bool(f.accordant), "Condition (*) holds, yet not accordant")


def structural_flags(net: Network, search_budget: int = 10_000, seed: int = 0) -> StructuralFlags:
    n, m = net.n, net.m
    S = stoichiometric_matrices(net)
    if m == 0 or S.gamma.is_zero():
        return StructuralFlags(species=n, reactions=m, zero_stoichiometry=True, rank=0)
    t = gamma_bar(net)
    r = rank(S.gamma)
    preds = network_predicates(net)
    conc = concordance(net)
    w = wsd_flags(t.gamma)
    semi_acc = semiaccordance(net)
    if semi_acc:
        strong = "excluded"
    else:
        cert = strong_incompatibility_search(t.gamma, t.gamma_left, budget=search_budget, seed=seed)
        strong = "certified" if cert is not None else "unknown"
    persist = persistence_flags(net)
    semic = semiconcordance(net)
    f = StructuralFlags(
        species=n,
        reactions=m,
        zero_stoichiometry=False,
        rank=r,
        concordance=conc.verdict,
        accordant=bool(accordance(net)),
        semiconcordance=semic,
        semiaccordant=semi_acc,
        normal=semic is not VectorSign.Zero,
        ssd=bool(is_SSD(S.gamma)),
        r_ssd=bool(is_r_SSD(S.gamma, r)),
        wsd=w.wsd,
        r_strong_wsd=w.r_strong,
        r_strong_neg_wsd=w.r_strong_neg,
        weakly_reversible=is_weakly_reversible(net),
        condition_star_single=bool(condition_star(dsr_graph(net, DSRMode.ReversibleAsSingle))),
        condition_star_pairs=bool(condition_star(dsr_graph(net, DSRMode.ReversibleAsPairs))),
        bc1=bounded_classes(net),
        admits_positive_equilibria=admits_positive_equilibria(net),
        pc1=persist.pc1,
        pc2=persist.pc2,
        is_simple=preds.is_simple,
        is_simply_reversible=preds.is_simply_reversible,
        is_fully_irreversible=preds.is_fully_irreversible,
        strong_incompatibility=strong,
    )
    check_flag_consistency(f)
    return f


# ---------------------------------------------------------------------------
# rule table


Premise = Callable[[StructuralFlags], bool]

PREMISES: dict[str, Premise] = {
    "zero_stoichiometry": lambda f: f.zero_stoichiometry,
    "concordant": lambda f: f.concordant,
    "not_concordant": lambda f: not f.concordant,
    "accordant": lambda f: f.zero_stoichiometry or bool(f.accordant),
    "not_accordant": lambda f: not f.zero_stoichiometry and f.accordant is False,
    "semiconcordant": lambda f: f.semiconcordant,
    "not_semiconcordant": lambda f: not f.semiconcordant,
    "semiaccordant": lambda f: f.zero_stoichiometry or bool(f.semiaccordant),
    "not_semiaccordant": lambda f: not f.zero_stoichiometry and f.semiaccordant is False,
}


@dataclass(frozen=True)
class Rule:
    id: str
    premise: str
    kinetics: tuple[KineticsClass, ...]
    claims: tuple[str, ...]
    status: Status
    summary: str


_PLGK = (GK, WGK, GKP, PPLK)  # classes containing physical power-law kinetics

RULES: tuple[Rule, ...] = (
    Rule("zero-stoichiometry", "zero_stoichiometry", ALL_KINETICS, CLAIMS, Status.Holds,
         "a zero stoichiometric matrix makes every claim trivial"),
    Rule("concordant-injective", "concordant", (GK,), ("IC1''",), Status.Holds,
         "concordance gives injectivity on classes up to shared facets"),
    Rule("concordant-injective", "concordant", (WGK, PPLK), ("IC1'",), Status.Holds,
         "concordance gives injectivity on classes with one point interior"),
    Rule("concordant-injective", "concordant", (GKP,), ("IC1",), Status.Holds,
         "concordance gives injectivity on positive parts of classes"),
    Rule("concordant-injective", "concordant", (MA,), ("IC1''",), Status.Holds,
         "mass action is general kinetics"),
    Rule("concordant-powerlaw", "concordant", (PPLK,), ("IC1a",), Status.Holds,
         "concordance gives injectivity where rate sums are positive"),
    Rule("discordant-collision", "not_concordant", _PLGK, ("IC1",), Status.FailsForSomeChoice,
         "a discordant exponent matrix yields colliding states on a class"),
    Rule("accordant-open-injective", "accordant", (GK, MA), ("IC2''",), Status.Holds,
         "accordance gives injectivity of the fully open system"),
    Rule("accordant-open-injective", "accordant", (WGK, PPLK), ("IC2'",), Status.Holds,
         "accordance gives injectivity of the fully open system"),
    Rule("accordant-open-injective", "accordant", (GKP,), ("IC2",), Status.Holds,
         "accordance gives injectivity of the fully open system"),
    Rule("not-accordant-open-collision", "not_accordant", _PLGK, ("IC2",), Status.FailsForSomeChoice,
         "incompatibility with some exponent matrix yields an open-system collision"),
    Rule("semiconcordant-injective", "semiconcordant", (MA,), ("IC1a",), Status.Holds,
         "semiconcordance gives mass-action injectivity on classes"),
    Rule("not-semiconcordant-collision", "not_semiconcordant", (MA,), ("IC1",), Status.FailsForSomeChoice,
         "singular semiclass member yields a mass-action collision"),
    Rule("semiaccordant-open-injective", "semiaccordant", (MA,), ("IC2''",), Status.Holds,
         "semiaccordance gives mass-action injectivity of the fully open system"),
    Rule("not-semiaccordant-open-collision", "not_semiaccordant", (MA,), ("IC2",), Status.FailsForSomeChoice,
         "incompatibility with -Gamma_l yields a mass-action open-system collision"),
)


@dataclass(frozen=True)
class Claim:
    status: Status
    rule: str


@dataclass(frozen=True)
class EquilibriumStatement:
    kinetics: KineticsClass
    text: str
    status: Status
    rule: str


@dataclass
class ClaimSet:
    claims: dict[tuple[KineticsClass, str], Claim] = field(default_factory=dict)
    equilibria: list[EquilibriumStatement] = field(default_factory=list)

    def status(self, k: KineticsClass, claim: str) -> Status:
        c = self.claims.get((k, claim))
        return c.status if c else Status.NotDetermined

    def holds(self, k: KineticsClass, claim: str) -> bool:
        return self.status(k, claim) is Status.Holds

    def fails(self, k: KineticsClass, claim: str) -> bool:
        return self.status(k, claim) is Status.FailsForSomeChoice


@dataclass(frozen=True)
class EquilibriumRule:
    id: str
    kinetics: tuple[KineticsClass, ...]
    applies: Callable[[StructuralFlags, ClaimSet, KineticsClass], bool]
    text: str
    status: Status
    exclusive: bool = False  # only the first applicable exclusive statement is reported


def _class_statement(pers: str, bc1: bool):
    def applies(f: StructuralFlags, cs: ClaimSet, k: KineticsClass) -> bool:
        if f.zero_stoichiometry or not cs.holds(k, "IC1'"):
            return False
        if pers == "pc2":
            return bool(f.pc2) and f.bc1 == bc1
        return bool(f.pc1) and f.bc1 == bc1

    return applies


EQUILIBRIUM_RULES: tuple[EquilibriumRule, ...] = (
    EquilibriumRule("facet-persistent-unique-equilibrium", ALL_KINETICS, _class_statement("pc1", True),
                    "each stoichiometry class other than {0} contains a unique equilibrium, which is positive",
                    Status.Holds, exclusive=True),
    EquilibriumRule("facet-persistent-at-most-one-equilibrium", ALL_KINETICS, _class_statement("pc1", False),
                    "no stoichiometry class contains more than one equilibrium",
                    Status.Holds, exclusive=True),
    EquilibriumRule("persistent-unique-equilibrium", ALL_KINETICS, _class_statement("pc2", True),
                    "each nontrivial stoichiometry class contains exactly one equilibrium, which is positive",
                    Status.Holds, exclusive=True),
    EquilibriumRule("persistent-at-most-one-equilibrium", ALL_KINETICS, _class_statement("pc2", False),
                    "each nontrivial stoichiometry class contains at most one equilibrium",
                    Status.Holds, exclusive=True),
    EquilibriumRule("injective-at-most-one-positive", ALL_KINETICS,
                    lambda f, cs, k: cs.holds(k, "IC1"),
                    "no stoichiometry class contains more than one positive equilibrium",
                    Status.Holds, exclusive=True),
    EquilibriumRule("discordant-multistationary", _PLGK,
                    lambda f, cs, k: not f.concordant and bool(f.admits_positive_equilibria),
                    "some stoichiometry class contains multiple positive equilibria for some choice of kinetics",
                    Status.FailsForSomeChoice),
    EquilibriumRule("not-accordant-open-multistationary", _PLGK,
                    lambda f, cs, k: f.accordant is False,
                    "the fully open system has multiple positive equilibria for some choice of kinetics",
                    Status.FailsForSomeChoice),
    EquilibriumRule("strong-incompatibility-open-multistationary", (MA,),
                    lambda f, cs, k: f.strong_incompatibility == "certified",
                    "the fully open system has multiple positive equilibria for some choice of rate constants",
                    Status.FailsForSomeChoice),
    EquilibriumRule("strong-incompatibility-unknown", (MA,),
                    lambda f, cs, k: f.strong_incompatibility == "unknown",
                    "multiple positive equilibria of the fully open system not determined "
                    "(strong incompatibility of -Gamma_l not established by the search)",
                    Status.NotDetermined),
)


def _close(cs: ClaimSet, kinetics: Sequence[KineticsClass]) -> None:
    """Propagate holds down and failures up the claim order, within each class."""
    changed = True
    while changed:
        changed = False
        for k in kinetics:
            app = APPLICABLE[k]
            for strong, weak in CLAIM_ORDER:
                if strong not in app or weak not in app:
                    continue
                if cs.holds(k, strong) and (k, weak) not in cs.claims:
                    cs.claims[(k, weak)] = Claim(Status.Holds, "claim-order")
                    changed = True
                if cs.fails(k, weak) and (k, strong) not in cs.claims:
                    cs.claims[(k, strong)] = Claim(Status.FailsForSomeChoice, "claim-order")
                    changed = True
    for k in kinetics:
        for claim in APPLICABLE[k]:
            cs.claims.setdefault((k, claim), Claim(Status.NotDetermined, "no-rule"))


def check_claim_monotonicity(cs: ClaimSet) -> None:
    for (k, _), _c in list(cs.claims.items()):
        app = APPLICABLE[k]
        for strong, weak in CLAIM_ORDER:
            if strong in app and weak in app:
                if cs.holds(k, strong):
                    _check(cs.holds(k, weak), f"{k.value}: {strong} holds but {weak} does not")
                if cs.fails(k, weak):
                    _check(cs.fails(k, strong), f"{k.value}: {weak} fails but {strong} does not")


def derive_claims(f: StructuralFlags, kinetics: Sequence[KineticsClass] = ALL_KINETICS) -> ClaimSet:
    cs = ClaimSet()
    for rule in RULES:
        if not PREMISES[rule.premise](f):
            continue
        for k in rule.kinetics:
            if k not in kinetics:
                continue
            for claim in rule.claims:
                if claim not in APPLICABLE[k]:
                    continue
                prev = cs.claims.get((k, claim))
                if prev is not None and prev.status is not rule.status:
                    raise InconsistentFlags(f"rules {prev.rule} and {rule.id} disagree on {k.value}.{claim}")
                cs.claims.setdefault((k, claim), Claim(rule.status, rule.id))
    _close(cs, [k for k in ALL_KINETICS if k in kinetics])
    check_claim_monotonicity(cs)
    for k in ALL_KINETICS:
        if k not in kinetics:
            continue
        taken = False
        for er in EQUILIBRIUM_RULES:
            if k not in er.kinetics:
                continue
            if er.exclusive:
                if taken or not er.applies(f, cs, k):
                    continue
                taken = True
            elif not er.applies(f, cs, k):
                continue
            cs.equilibria.append(EquilibriumStatement(k, er.text, er.status, er.id))
    return cs


# ---------------------------------------------------------------------------
# report


@dataclass
class AnalysisReport:
    network: Network
    flags: StructuralFlags
    claims: ClaimSet
    kinetics: tuple[KineticsClass, ...]
    witnesses: dict[str, dict] = field(default_factory=dict)
    options: dict = field(default_factory=dict)
    timing: float = 0.0  # seconds; never rendered, so output stays byte-identical


def _witness_dict(w) -> dict:
    d: dict = {"kind": type(w).__name__}
    kin = w.kinetics
    d["exponents"] = [list(r) for r in kin.exponents]
    d["rate_constants"] = list(kin.rate_constants)
    for name in ("outflow", "inflow"):
        v = getattr(w, name, None)
        if v is not None:
            d[name] = list(v)
    d["x"] = list(w.x)
    d["y"] = list(w.y)
    for name in ("residual", "residual_x", "residual_y", "class_offset"):
        if hasattr(w, name):
            d[name] = getattr(w, name)
    return d


def _attempt(fn, *args, **kwargs) -> dict:
    try:
        return _witness_dict(fn(*args, **kwargs))
    except wit.ForcedNone as exc:
        return {"kind": "none", "reason": f"no witness exists: {exc}"}
    except wit.ConstructionFailed as exc:
        return {"kind": "failed", "reason": str(exc)}


def _witnesses_for(net: Network, f: StructuralFlags, seed: int, budget: int) -> dict[str, dict]:
    out: dict[str, dict] = {}
    if f.zero_stoichiometry:
        return out
    t = gamma_bar(net)
    if not f.concordant and f.admits_positive_equilibria:
        out["class_multistationarity"] = _attempt(wit.class_multistationarity_witness, net, seed=seed)
    if not f.semiconcordant:
        out["mass_action_collision"] = _attempt(wit.collision_witness, net, t.gamma_left, seed=seed)
    if f.semiaccordant is False:
        out["mass_action_open_collision"] = _attempt(wit.open_collision_witness, net, t.gamma_left, seed=seed)
    if f.strong_incompatibility == "certified":
        cert = strong_incompatibility_search(t.gamma, t.gamma_left, budget=budget, seed=seed)
        out["mass_action_open_multistationarity"] = _attempt(wit.open_multistationarity_witness, net, cert)
    return out


def analyze(
    net: Network,
    kinetics: Sequence[KineticsClass] | None = None,
    witnesses: bool = False,
    seed: int = 0,
    budget: int = 10_000,
) -> AnalysisReport:
    start = time.perf_counter()
    ks = tuple(k for k in ALL_KINETICS if kinetics is None or k in kinetics)
    flags = structural_flags(net, search_budget=budget, seed=seed)
    claims = derive_claims(flags, ks)
    rep = AnalysisReport(net, flags, claims, ks, options={"kinetics": [k.value for k in ks], "seed": seed,
                                                           "budget": budget, "witnesses": witnesses})
    if witnesses:
        rep.witnesses = _witnesses_for(net, flags, seed, budget)
    rep.timing = time.perf_counter() - start
    return rep


def report_dict(rep: AnalysisReport) -> dict:
    net = rep.network
    claims = {}
    for k in rep.kinetics:
        for c in APPLICABLE[k]:
            cl = rep.claims.claims[(k, c)]
            claims[f"{k.value}.{c}"] = {"status": cl.status.value, "rule": cl.rule}
    return {
        "network": {
            "species": list(net.species),
            "reactions": render_network(net).splitlines(),
        },
        "flags": rep.flags.as_dict(),
        "claims": claims,
        "equilibria": [
            {"kinetics": e.kinetics.value, "statement": e.text, "status": e.status.value, "rule": e.rule}
            for e in rep.claims.equilibria
        ],
        "witnesses": rep.witnesses,
        "meta": {"tool": "crncert", "version": __version__, "options": rep.options},
    }


def render_json(rep: AnalysisReport) -> str:
    return json.dumps(report_dict(rep), indent=2, sort_keys=False) + "\n"


_KINETICS_WORDS = {
    GK: "general kinetics",
    WGK: "weak general kinetics",
    GKP: "positive general kinetics",
    MA: "mass action kinetics",
    PPLK: "physical power-law kinetics",
}

_VERDICT_WORDS = {
    Verdict.ConcordantPos: "concordant (positive side)",
    Verdict.ConcordantNeg: "concordant (negative side)",
    Verdict.StructurallyDiscordant: "structurally discordant",
    Verdict.Discordant: "discordant",
}


def _yes(b) -> str:
    return "n/a" if b is None else ("yes" if b else "no")


def render_text(rep: AnalysisReport) -> str:
    f = rep.flags
    lines = ["Network:"]
    body = render_network(rep.network)
    lines += [f"  {ln}" for ln in body.splitlines()] or ["  (no reactions)"]
    lines.append("")
    lines.append("Structure:")
    if f.zero_stoichiometry:
        lines.append("  stoichiometric matrix is zero; every claim holds trivially")
    else:
        lines += [
            f"  rank {f.rank}; the network is {_VERDICT_WORDS[f.concordance]}, "
            f"{'accordant' if f.accordant else 'not accordant'}",
            f"  semiconcordance {f.semiconcordance.value}; {'semiaccordant' if f.semiaccordant else 'not semiaccordant'}; "
            f"{'normal' if f.normal else 'not normal'}",
            f"  SSD {_yes(f.ssd)}; {f.rank}-SSD {_yes(f.r_ssd)}",
            f"  irreversible stoichiometric matrix WSD {_yes(f.wsd)}; {f.rank}-strongly WSD {_yes(f.r_strong_wsd)}; "
            f"{f.rank}-strongly negatively WSD {_yes(f.r_strong_neg_wsd)}",
            f"  Condition (*): reversible reactions as single vertices {_yes(f.condition_star_single)}, "
            f"as pairs {_yes(f.condition_star_pairs)}",
            f"  weakly reversible {_yes(f.weakly_reversible)}; positive equilibria possible {_yes(f.admits_positive_equilibria)}",
            f"  BC1 {_yes(f.bc1)}; PC1 {_yes(f.pc1)}; PC2 {_yes(f.pc2)}",
            f"  strong incompatibility of -Gamma_l: {f.strong_incompatibility}",
        ]
    lines.append("")
    words = {Status.Holds: "holds", Status.FailsForSomeChoice: "fails for some choice", Status.NotDetermined: "not determined"}
    for k in rep.kinetics:
        lines.append(f"Claims for {_KINETICS_WORDS[k]} ({k.value}):")
        for c in APPLICABLE[k]:
            cl = rep.claims.claims[(k, c)]
            lines.append(f"  claim {c} {words[cl.status]}  [{cl.rule}]")
        if k is MA and rep.claims.fails(MA, "IC2"):
            lines.append("  the fully open system fails to be injective for some choice of rate constants")
        for e in rep.claims.equilibria:
            if e.kinetics is k:
                lines.append(f"  {e.text}  [{e.rule}]")
        lines.append("")
    if rep.witnesses:
        lines.append("Witnesses:")
        for name, d in rep.witnesses.items():
            if d["kind"] in ("none", "failed"):
                lines.append(f"  {name}: {d['reason']}")
                continue
            res = max(d.get(key, 0.0) for key in ("residual", "residual_x", "residual_y"))
            lines.append(f"  {name}: {d['kind']}, max residual {res:.3e}")
            lines.append(f"    x = {_fmt(d['x'])}")
            lines.append(f"    y = {_fmt(d['y'])}")
        lines.append("")
    return "\n".join(lines)


def _fmt(v) -> str:
    return "(" + ", ".join(f"{a:.10g}" for a in v) + ")"


# ---------------------------------------------------------------------------
# CLI

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_CONSTRUCTION = 0, 1, 2, 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit 2, which is reserved for parse errors
        raise _UsageError(message)


def _build_parser() -> _Parser:
    p = _Parser(prog="crncert", description="Certify injectivity and multistationarity of reaction networks.")
    p.add_argument("--version", action="version", version=f"crncert {__version__}")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    a = sub.add_parser("analyze", help="structural flags and injectivity claims")
    a.add_argument("file")
    a.add_argument("--kinetics", nargs="+", metavar="K", help="restrict to kinetics classes (GK WGK GK+ MA PPLK)")
    a.add_argument("--json", action="store_true", help="structured output")
    a.add_argument("--witnesses", action="store_true", help="attempt numerical witnesses for failure claims")
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--budget", type=int, default=10_000)

    d = sub.add_parser("dsr", help="DSR graph cycles and Condition (*)")
    d.add_argument("file")
    d.add_argument("--mode", choices=[m.value for m in DSRMode], default=DSRMode.ReversibleAsSingle.value)
    d.add_argument("--dot", metavar="OUT", help="write the graph in DOT format ('-' for stdout)")

    s = sub.add_parser("siphons", help="siphons, criticality and P-semiflows")
    s.add_argument("file")

    mt = sub.add_parser("matrices", help="dump stoichiometric matrices and the rate pattern")
    mt.add_argument("file")

    w = sub.add_parser("witness", help="construct one numerical witness")
    w.add_argument("file")
    w.add_argument("--type", required=True, choices=["collision", "class-mpe", "open-collision", "open-mpe"])
    w.add_argument("--seed", type=int, default=0)
    w.add_argument("--budget", type=int, default=10_000)
    w.add_argument("--json", action="store_true")
    return p


def _load(path: str) -> Network:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise _UsageError(f"cannot read {path}: {exc.strerror or exc}") from exc
    return parse_network(text)


def _matrix_text(name: str, A) -> list[str]:
    rows = [[str(v) for v in row] for row in A.rows()]
    width = max((len(c) for r in rows for c in r), default=1)
    out = [f"{name}:"]
    out += ["  [" + " ".join(c.rjust(width) for c in r) + "]" for r in rows] or ["  (empty)"]
    return out


def _cmd_analyze(args, out) -> int:
    net = _load(args.file)
    ks = None
    if args.kinetics:
        try:
            ks = [KineticsClass.parse(tok) for item in args.kinetics for tok in item.split(",") if tok]
        except ValueError as exc:
            raise _UsageError(str(exc)) from exc
    rep = analyze(net, kinetics=ks, witnesses=args.witnesses, seed=args.seed, budget=args.budget)
    out.write(render_json(rep) if args.json else render_text(rep))
    return EXIT_OK


def _cmd_dsr(args, out) -> int:
    net = _load(args.file)
    g = dsr_graph(net, args.mode)
    cycles = enumerate_cycles(g)
    verdict = condition_star(g)
    lines = [f"DSR graph ({args.mode}): {len(g.species)} species, {len(g.reactions)} reactions, "
             f"{len(g.edges)} edges, {len(cycles)} cycles"]
    for c in cycles:
        lines.append(f"  {describe_cycle(g, c)}")
    lines.append(f"Condition (*): {'satisfied' if verdict else 'violated'}")
    if not verdict:
        v = verdict.violation
        if hasattr(v, "cycle"):
            lines.append(f"  e-cycle that is not an s-cycle: {describe_cycle(g, v.cycle)}")
        else:
            lines.append(f"  e-cycles with odd S-to-R intersection: {describe_cycle(g, v.first)} / {describe_cycle(g, v.second)}")
    out.write("\n".join(lines) + "\n")
    if args.dot:
        dot = export_dot(g)
        if args.dot == "-":
            out.write(dot)
        else:
            try:
                Path(args.dot).write_text(dot)
            except OSError as exc:
                raise _UsageError(f"cannot write {args.dot}: {exc.strerror or exc}") from exc
    return EXIT_OK


def _cmd_siphons(args, out) -> int:
    net = _load(args.file)
    mins = set(minimal_siphons(net))
    lines = []
    for s in all_siphons(net):
        d = siphon_details(net, s, minimal=s in mins)
        names = "{" + ", ".join(d.names(net)) + "}"
        tags = ["minimal" if d.minimal else "non-minimal", "critical" if d.critical else "non-critical"]
        if d.psemiflow is not None:
            tags.append("P-semiflow " + _fmt([float(v) for v in d.psemiflow]))
        lines.append(f"{names}: {', '.join(tags)}")
    if not lines:
        lines.append("no siphons")
    p = persistence_flags(net) if net.m else None
    if p is not None:
        lines.append(f"PC1 {_yes(p.pc1)}; PC2 {_yes(p.pc2)}")
    out.write("\n".join(lines) + "\n")
    return EXIT_OK


def _cmd_matrices(args, out) -> int:
    net = _load(args.file)
    s = stoichiometric_matrices(net)
    t = gamma_bar(net)
    lines = [f"species: {' '.join(net.species)}"]
    for name, A in (("Gamma", s.gamma), ("Gamma_l", s.gamma_left), ("Gamma_r", s.gamma_right),
                    ("Gamma_bar", t.gamma), ("Gamma_bar_l", t.gamma_left), ("Gamma_bar_r", t.gamma_right)):
        lines += _matrix_text(name, A)
    P = rate_pattern(net)
    lines.append("rate pattern (reactions x species):")
    lines += ["  [" + " ".join(e.value for e in row) + "]" for row in P.rows()] or ["  (empty)"]
    out.write("\n".join(lines) + "\n")
    return EXIT_OK


def _cmd_witness(args, out, err) -> int:
    net = _load(args.file)
    t = gamma_bar(net)
    try:
        if args.type == "collision":
            w = wit.collision_witness(net, t.gamma_left, seed=args.seed)
        elif args.type == "class-mpe":
            w = wit.class_multistationarity_witness(net, seed=args.seed)
        elif args.type == "open-collision":
            w = wit.open_collision_witness(net, t.gamma_left, seed=args.seed)
        else:
            cert = strong_incompatibility_search(t.gamma, t.gamma_left, budget=args.budget, seed=args.seed)
            if cert is None:
                err.write("no strong-incompatibility certificate found within budget (unknown, not absent)\n")
                return EXIT_CONSTRUCTION
            w = wit.open_multistationarity_witness(net, cert)
    except wit.ForcedNone as exc:
        err.write(f"no witness exists: {exc}\n")
        return EXIT_CONSTRUCTION
    except wit.ConstructionFailed as exc:
        err.write(f"construction failed: {exc}\n")
        return EXIT_CONSTRUCTION
    d = _witness_dict(w)
    d["verified"] = bool(wit.verify_witness(net, w))
    if args.json:
        out.write(json.dumps(d, indent=2) + "\n")
    else:
        out.write(f"{d['kind']} (verified: {'yes' if d['verified'] else 'no'})\n")
        for key in ("x", "y", "rate_constants", "outflow", "inflow"):
            if key in d:
                out.write(f"  {key} = {_fmt(d[key])}\n")
        out.write("  exponents =\n")
        for row in d["exponents"]:
            out.write(f"    {_fmt(row)}\n")
        for key in ("residual", "residual_x", "residual_y", "class_offset"):
            if key in d:
                out.write(f"  {key} = {d[key]:.3e}\n")
    return EXIT_OK


def cli_main(argv: Sequence[str] | None = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise _UsageError("a subcommand is required")
        if args.command == "analyze":
            return _cmd_analyze(args, out)
        if args.command == "dsr":
            return _cmd_dsr(args, out)
        if args.command == "siphons":
            return _cmd_siphons(args, out)
        if args.command == "matrices":
            return _cmd_matrices(args, out)
        return _cmd_witness(args, out, err)
    except _UsageError as exc:
        err.write(f"crncert: error: {exc}\n")
        err.write(parser.format_usage())
        return EXIT_USAGE
    except ParseError as exc:
        err.write(f"crncert: parse error: {exc}\n")
        return EXIT_PARSE
