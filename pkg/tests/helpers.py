"""Shared test oracles and generators.

``oracle_eval`` is an independent evaluator working at absolute times with
per-quantifier unrolling windows; it never touches representative-point
machinery, so agreement with the library evaluator is a real cross-check.
"""

from __future__ import annotations

import random

from justltl import (
    Acc,
    App,
    Atom,
    Bang,
    Bottom,
    Constant,
    Derivation,
    Formula,
    Gen,
    Implies,
    InterpretedSystem,
    Just,
    Know,
    Line,
    NAcc,
    Next,
    Query,
    ShiftL,
    ShiftR,
    Sum,
    Term,
    Until,
    Always,
    Variable,
    not_,
)
from justltl.proofs import Justification


BOT = Bottom()


def oracle_eval(sys: InterpretedSystem, run_idx: int, n: int, f: Formula) -> bool:
    """Naive horizon-unrolled truth at absolute time n of the given run."""
    run = sys.runs[run_idx]
    p_len, l_len = len(run.prefix), len(run.loop)

    def rep(m: int) -> int:
        return m if m < p_len else p_len + (m - p_len) % l_len

    def ev(m: int, g: Formula) -> bool:
        if isinstance(g, Bottom):
            return False
        if isinstance(g, Atom):
            return g.name in sys.valuation.get((run_idx, rep(m)), frozenset())
        if isinstance(g, Implies):
            return (not ev(m, g.left)) or ev(m, g.right)
        if isinstance(g, Next):
            return ev(m + 1, g.arg)
        if isinstance(g, Always):
            return all(ev(k, g.arg) for k in range(m, max(m, p_len) + l_len))
        if isinstance(g, Until):
            for k in range(m, max(m, p_len) + 2 * l_len):
                if ev(k, g.right):
                    return True
                if not ev(k, g.left):
                    return False
            return False
        if isinstance(g, (Just, Know)):
            if isinstance(g, Just):
                table = sys.evidence.get((g.agent, run_idx, rep(m), g.term), frozenset())
                if g.body not in table:
                    return False
            label = run.state(m)[g.agent]
            for ri2, run2 in enumerate(sys.runs):
                for k in range(run2.n_reps):
                    if run2.state(k)[g.agent] == label:
                        if not oracle_eval(sys, ri2, k, g.body):
                            return False
            return True
        raise TypeError(f"unknown formula {g!r}")

    return ev(n, f)


# ---------------------------------------------------------------------------
# Seeded random ASTs


def random_term(rng: random.Random, depth: int, agent: int) -> Term:
    if depth == 0 or rng.random() < 0.4:
        name = rng.choice(["c1", "c2", "x1", "x2"])
        cls = Constant if name.startswith("c") else Variable
        return cls(name, agent)
    op = rng.choice(["bang", "query", "sum", "app", "acc", "gen", "nacc", "shiftr", "shiftl"])
    if op == "sum":
        return Sum(random_term(rng, depth - 1, agent), random_term(rng, depth - 1, agent))
    if op == "app":
        return App(random_term(rng, depth - 1, agent), random_term(rng, depth - 1, agent))
    inner = random_term(rng, depth - 1, agent)
    return {"bang": Bang, "query": Query, "acc": Acc, "gen": Gen, "nacc": NAcc,
            "shiftr": ShiftR, "shiftl": ShiftL}[op](inner)


def random_formula(
    rng: random.Random,
    depth: int,
    h: int = 2,
    atoms: tuple = ("p", "q", "r"),
    p_just: float = 0.1,
    allow_know: bool = False,
) -> Formula:
    if depth == 0 or rng.random() < 0.25:
        return BOT if rng.random() < 0.1 else Atom(rng.choice(atoms))
    roll = rng.random()
    if roll < p_just:
        agent = rng.randint(1, h)
        body = random_formula(rng, depth - 1, h, atoms, p_just, allow_know)
        return Just(random_term(rng, 1, agent), agent, body)
    if allow_know and roll < p_just + 0.1:
        return Know(rng.randint(1, h), random_formula(rng, depth - 1, h, atoms, p_just, allow_know))
    op = rng.choice(["implies", "next", "always", "until", "not"])
    a = random_formula(rng, depth - 1, h, atoms, p_just, allow_know)
    if op == "implies":
        return Implies(a, random_formula(rng, depth - 1, h, atoms, p_just, allow_know))
    if op == "until":
        return Until(a, random_formula(rng, depth - 1, h, atoms, p_just, allow_know))
    if op == "next":
        return Next(a)
    if op == "always":
        return Always(a)
    return not_(a)


# ---------------------------------------------------------------------------
# Derivation composition (for machine-generated theorems)


def merge_derivations(parts: list[Derivation]) -> tuple[list[Line], list[int]]:
    """Concatenate derivations with renumbered lines; returns lines and the
    new index of each part's conclusion."""
    lines: list[Line] = []
    finals: list[int] = []
    offset = 0
    for d in parts:
        remap: dict[int, int] = {}
        for ln in d.lines:
            new_index = offset + len(remap) + 1
            remap[ln.index] = new_index
            just = ln.just
            if just.refs:
                just = Justification(just.rule, just.name, tuple(remap[r] for r in just.refs))
            lines.append(Line(new_index, ln.formula, just))
        finals.append(lines[-1].index)
        offset = lines[-1].index
    return lines, finals


def compose_by_mp(parts: list[Derivation], target: Formula) -> Derivation:
    """Derive target from the parts' conclusions via one tautology + mp chain."""
    lines, finals = merge_derivations(parts)
    taut = target
    formulas = {ln.index: ln.formula for ln in lines}
    for idx in reversed(finals):
        taut = Implies(formulas[idx], taut)
    next_idx = lines[-1].index + 1
    lines.append(Line(next_idx, taut, Justification("axiom", "prop")))
    prev = next_idx
    current = taut
    for idx in finals:
        next_idx += 1
        current = current.right
        lines.append(Line(next_idx, current, Justification("mp", refs=(idx, prev))))
        prev = next_idx
    return Derivation(tuple(lines))


# ---------------------------------------------------------------------------
# Hand-built semantic fixtures


PRINCIPLE_INSTANCES = {
    "box-access": "[x1]_1 G p -> G [acc(x1)]_1 p",
    "generalize": "G [x1]_1 p -> [gen(x1)]_1 G p",
    "next-access": "[x1]_1 G p -> [nacc(x1)]_1 X p",
    "next-right": "[x1]_1 X p -> X [shiftr(x1)]_1 p",
    "next-left": "X [x1]_1 p -> [shiftl(x1)]_1 X p",
}

_PRINCIPLE_OPS = {
    "box-access": "acc",
    "generalize": "gen",
    "next-access": "nacc",
    "next-right": "shiftr",
    "next-left": "shiftl",
}


def principle_conditioned_system(principle: str):
    """Single-run system with distinct local states, p true everywhere, and
    evidence seeded so the given principle's condition holds after closure."""
    import json

    from justltl import Point, close_evidence, load_system, parse_formula, parse_term

    op = _PRINCIPLE_OPS[principle]
    doc = {
        "agents": 1,
        "runs": [{"prefix": [["e", "a"]], "loop": [["e", "b"], ["e", "c"]]}],
        "valuation": [
            {"run": 0, "time": 0, "atoms": ["p"]},
            {"run": 0, "time": 1, "atoms": ["p"]},
            {"run": 0, "time": 2, "atoms": ["p"]},
        ],
        "evidence": [],
        "universe": {"terms": ["x1", f"{op}(x1)"], "formulas": ["p", "G p", "X p"]},
    }
    sys = load_system(json.dumps(doc))
    x1 = parse_term("x1", 1)
    opt = parse_term(f"{op}(x1)", 1)
    p = Atom("p")
    gp, xp = parse_formula("G p", 1), parse_formula("X p", 1)
    points = [Point(0, n) for n in range(3)]
    seeds = {
        "box-access": [(1, q, x1, gp) for q in points] + [(1, q, opt, p) for q in points],
        "generalize": [(1, q, x1, p) for q in points] + [(1, q, opt, gp) for q in points],
        "next-access": [(1, q, x1, gp) for q in points] + [(1, q, opt, xp) for q in points],
        "next-right": [(1, q, x1, xp) for q in points] + [(1, q, opt, p) for q in points],
        "next-left": [(1, q, x1, p) for q in points] + [(1, q, opt, xp) for q in points],
    }[principle]
    return close_evidence(sys, seeds, None)


def enumerate_principle_instances(sys, principle: str) -> list[Formula]:
    """Every instance of the principle whose bodies and terms fit the universe."""
    out: list[Formula] = []
    fm = sys.universe.formulas
    for agent in range(1, sys.h + 1):
        terms = sys.universe.terms.get(agent, frozenset())
        for t in sorted(terms, key=str):
            if principle == "box-access" and Acc(t) in terms:
                for f in fm:
                    if isinstance(f, Always):
                        out.append(
                            Implies(Just(t, agent, f), Always(Just(Acc(t), agent, f.arg)))
                        )
            elif principle == "generalize" and Gen(t) in terms:
                for f in fm:
                    if Always(f) in fm:
                        out.append(
                            Implies(Always(Just(t, agent, f)), Just(Gen(t), agent, Always(f)))
                        )
            elif principle == "next-access" and NAcc(t) in terms:
                for f in fm:
                    if isinstance(f, Always) and Next(f.arg) in fm:
                        out.append(
                            Implies(Just(t, agent, f), Just(NAcc(t), agent, Next(f.arg)))
                        )
            elif principle == "next-right" and ShiftR(t) in terms:
                for f in fm:
                    if isinstance(f, Next):
                        out.append(
                            Implies(Just(t, agent, f), Next(Just(ShiftR(t), agent, f.arg)))
                        )
            elif principle == "next-left" and ShiftL(t) in terms:
                for f in fm:
                    if Next(f) in fm:
                        out.append(
                            Implies(Next(Just(t, agent, f)), Just(ShiftL(t), agent, Next(f)))
                        )
    return out


def kt1_counterexample_system():
    """Asynchronous, forgetful system falsifying a KT1 instance."""
    import json

    from justltl import load_system

    doc = {
        "agents": 1,
        "runs": [
            {"prefix": [], "loop": [["e", "a"], ["e", "b"]]},
            {"prefix": [], "loop": [["e", "a"]]},
            {"prefix": [], "loop": [["e", "b"]]},
        ],
        "valuation": [
            {"run": 0, "time": 0, "atoms": ["p"]},
            {"run": 0, "time": 1, "atoms": ["p"]},
            {"run": 1, "time": 0, "atoms": ["p"]},
        ],
        "universe": {"terms": [], "formulas": []},
    }
    return load_system(json.dumps(doc))
