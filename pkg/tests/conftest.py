from __future__ import annotations

import random
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import settings

from crncert.crn_model import Network, parse_network
from crncert.exact_linalg import RatMatrix

settings.register_profile("crncert", derandomize=True, deadline=None)
settings.load_profile("crncert")

CORPUS_DIR = Path(__file__).resolve().parent.parent / "corpus"
CORPUS = sorted(p.stem for p in CORPUS_DIR.glob("*.crn"))

_SPECIES = "ABCDEFGH"


def load(name: str) -> Network:
    return parse_network((CORPUS_DIR / f"{name}.crn").read_text())


def random_network_text(rng: random.Random, max_species: int = 8, max_reactions: int = 6) -> str:
    """Random reaction list with small integer coefficients and no trivial reactions."""
    n = rng.randint(2, max_species)
    m = rng.randint(1, max_reactions)
    species = _SPECIES[:n]

    def side() -> dict[str, int]:
        k = rng.choice([0, 1, 1, 2, 2, 3])
        return {s: rng.choice([1, 1, 2]) for s in rng.sample(species, min(k, n))}

    def fmt(c: dict[str, int]) -> str:
        if not c:
            return "0"
        return " + ".join((f"{v}{s}" if v > 1 else s) for s, v in sorted(c.items()))

    lines = []
    while len(lines) < m:
        left, right = side(), side()
        if left == right:
            continue
        arrow = rng.choice(["->", "->", "<->"])
        lines.append(f"{fmt(left)} {arrow} {fmt(right)}")
    return "\n".join(lines)


def random_network(seed: int, **kw) -> Network:
    return parse_network(random_network_text(random.Random(seed), **kw))


def random_rat_matrix(rng: random.Random, n: int, m: int, lo: int = -3, hi: int = 3, denom: int = 1) -> RatMatrix:
    return RatMatrix([[Fraction(rng.randint(lo, hi), rng.randint(1, denom)) for _ in range(m)] for _ in range(n)])


@pytest.fixture(params=CORPUS)
def corpus_name(request) -> str:
    return request.param


# -- acceptance summary ------------------------------------------------------

ACCEPTANCE: dict[int, tuple[str, bool, str]] = {}


def record(criterion: int, title: str, ok: bool, detail: str = "") -> None:
    ACCEPTANCE[criterion] = (title, ok, detail)
    print(f"criterion {criterion:2d} {'PASS' if ok else 'FAIL'}: {title}" + (f" ({detail})" if detail else ""))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        title, ok, detail = ACCEPTANCE[k]
        line = f"criterion {k:2d} {'PASS' if ok else 'FAIL'}: {title}"
        terminalreporter.write_line(line + (f" ({detail})" if detail and not ok else ""))
