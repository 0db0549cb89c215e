"""Interpreted systems over lasso runs, evidence functions, and the evaluator.

Runs are finitized to lassos (finite prefix + nonempty repeating loop), so
every run is a total function from time to global states and all temporal
clauses are decided exactly over representative times ``0 .. |prefix|+|loop|-1``.
Evidence functions are finite tables over a declared universe of terms and
formulas that is closed under subterms and subformulas; closure conditions
are required exactly where both the constructed term and the produced
formula stay inside the universe.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from typing import Iterable, Iterator, Mapping, Optional

from .proofs import ConstantSpec
from .syntax import (
    Acc,
    Always,
    App,
    Atom,
    Bang,
    Bottom,
    Constant,
    Formula,
    Gen,
    Implies,
    Just,
    Know,
    NAcc,
    Next,
    Query,
    ShiftL,
    ShiftR,
    Sum,
    Term,
    Until,
    not_,
    parse_formula,
    parse_term,
    render,
    render_term,
    retag_term,
    subformulas,
    subterms,
    validate_formula,
)


class SystemFormatError(ValueError):
    pass


class UniverseError(ValueError):
    """A justification subformula mentions a term or body outside the universe."""


@dataclass(frozen=True)
class LassoRun:
    prefix: tuple[tuple[str, ...], ...]
    loop: tuple[tuple[str, ...], ...]

    def __post_init__(self):
        if not self.loop:
            raise SystemFormatError("lasso loop must be nonempty")

    @property
    def n_reps(self) -> int:
        return len(self.prefix) + len(self.loop)

    def normalize(self, n: int) -> int:
        p = len(self.prefix)
        return n if n < p else p + (n - p) % len(self.loop)

    def state(self, n: int) -> tuple[str, ...]:
        p = len(self.prefix)
        return self.prefix[n] if n < p else self.loop[(n - p) % len(self.loop)]


@dataclass(frozen=True)
class Point:
    run: int
    time: int

    def __str__(self) -> str:
        return f"r{self.run}:{self.time}"


@dataclass(frozen=True)
class Universe:
    """Per-agent term tables plus a shared formula table, subterm/subformula closed."""

    terms: Mapping[int, frozenset]
    formulas: frozenset

    def has_term(self, agent: int, t: Term) -> bool:
        return t in self.terms.get(agent, frozenset())


def make_universe(h: int, term_shapes: Iterable[Term], formulas: Iterable[Formula]) -> Universe:
    """Instantiate agent-generic term shapes for every agent and close everything."""
    shapes = list(term_shapes)
    per_agent: dict[int, set] = {i: set() for i in range(1, h + 1)}
    for i in range(1, h + 1):
        for shape in shapes:
            per_agent[i].update(subterms(retag_term(shape, i)))
    fmls: set[Formula] = set()
    for f in formulas:
        validate_formula(f, h)
        fmls.update(subformulas(f))
    for g in fmls:
        if isinstance(g, Just):
            per_agent[g.agent].update(subterms(g.term))
    return Universe({i: frozenset(ts) for i, ts in per_agent.items()}, frozenset(fmls))


@dataclass(frozen=True)
class InterpretedSystem:
    h: int
    runs: tuple[LassoRun, ...]
    valuation: Mapping  # (run, time) -> frozenset[str]
    evidence: Mapping  # (agent, run, time, Term) -> frozenset[Formula]
    universe: Universe

    def __post_init__(self):
        for run in self.runs:
            for state in run.prefix + run.loop:
                if len(state) != self.h + 1:
                    raise SystemFormatError(
                        f"global state {state} must have {self.h + 1} components"
                    )
        for (ri, n) in self.valuation:
            self._check_rep(ri, n, "valuation")
        for (agent, ri, n, t) in self.evidence:
            self._check_rep(ri, n, "evidence")
            if not 1 <= agent <= self.h:
                raise SystemFormatError(f"evidence agent {agent} out of range")
            if not self.universe.has_term(agent, t):
                raise SystemFormatError(
                    f"evidence term {render_term(t)} is outside the universe"
                )
            for f in self.evidence[(agent, ri, n, t)]:
                if f not in self.universe.formulas:
                    raise SystemFormatError(
                        f"evidence formula {render(f)} is outside the universe"
                    )

    def _check_rep(self, ri: int, n: int, what: str) -> None:
        if not 0 <= ri < len(self.runs):
            raise SystemFormatError(f"{what} run index {ri} out of range")
        if not 0 <= n < self.runs[ri].n_reps:
            raise SystemFormatError(
                f"{what} time {n} is not representative for run {ri}"
            )

    # -- basic views ------------------------------------------------------

    def reps(self) -> Iterator[Point]:
        for ri, run in enumerate(self.runs):
            for n in range(run.n_reps):
                yield Point(ri, n)

    def normalize(self, p: Point) -> Point:
        return Point(p.run, self.runs[p.run].normalize(p.time))

    def local_state(self, p: Point, agent: int) -> str:
        return self.runs[p.run].state(p.time)[agent]

    def atoms_at(self, p: Point) -> frozenset:
        q = self.normalize(p)
        return self.valuation.get((q.run, q.time), frozenset())

    def evidence_at(self, agent: int, p: Point, t: Term) -> frozenset:
        q = self.normalize(p)
        return self.evidence.get((agent, q.run, q.time, t), frozenset())

    def future_times(self, p: Point) -> range:
        """Representative times reachable from p along the run's time order:
        the prefix tail plus the full loop (every loop position recurs)."""
        run = self.runs[p.run]
        n = run.normalize(p.time)
        return range(n if n < len(run.prefix) else len(run.prefix), run.n_reps)

    def related(self, agent: int, p: Point) -> tuple[Point, ...]:
        """All representative points indistinguishable from p for the agent."""
        classes = _class_cache(self)
        q = self.normalize(p)
        return classes[(agent, self.local_state(q, agent))]


def _class_cache(sys: InterpretedSystem) -> dict:
    cached = getattr(sys, "_classes", None)
    if cached is None:
        classes: dict[tuple[int, str], list[Point]] = {}
        for p in sys.reps():
            for agent in range(1, sys.h + 1):
                classes.setdefault((agent, sys.local_state(p, agent)), []).append(p)
        cached = {key: tuple(points) for key, points in classes.items()}
        object.__setattr__(sys, "_classes", cached)
    return cached


def indistinguishable(sys: InterpretedSystem, p: Point, q: Point, agent: int) -> bool:
    """Agent-i indistinguishability: equal i-th local state components."""
    return sys.local_state(sys.normalize(p), agent) == sys.local_state(sys.normalize(q), agent)


# ---------------------------------------------------------------------------
# Truth relation


def eval_formula(sys: InterpretedSystem, p: Point, f: Formula, _memo: Optional[dict] = None) -> bool:
    """Truth of f at point p; raises UniverseError on out-of-universe evidence use."""
    if _memo is None:
        _memo = {}
    p = sys.normalize(p)
    key = (p.run, p.time, f)
    hit = _memo.get(key)
    if hit is not None:
        return hit
    result = _eval(sys, p, f, _memo)
    _memo[key] = result
    return result


def _eval(sys: InterpretedSystem, p: Point, f: Formula, memo: dict) -> bool:
    if isinstance(f, Bottom):
        return False
    if isinstance(f, Atom):
        return f.name in sys.atoms_at(p)
    if isinstance(f, Implies):
        return (not eval_formula(sys, p, f.left, memo)) or eval_formula(sys, p, f.right, memo)
    if isinstance(f, Next):
        return eval_formula(sys, Point(p.run, p.time + 1), f.arg, memo)
    if isinstance(f, Always):
        return all(
            eval_formula(sys, Point(p.run, m), f.arg, memo) for m in sys.future_times(p)
        )
    if isinstance(f, Until):
        run = sys.runs[p.run]
        horizon = len(run.prefix) + 2 * len(run.loop)
        for m in range(p.time, horizon):
            if eval_formula(sys, Point(p.run, m), f.right, memo):
                return True
            if not eval_formula(sys, Point(p.run, m), f.left, memo):
                return False
        return False
    if isinstance(f, Just):
        if not sys.universe.has_term(f.agent, f.term):
            raise UniverseError(f"term {render_term(f.term)} is outside the universe")
        if f.body not in sys.universe.formulas:
            raise UniverseError(f"formula {render(f.body)} is outside the universe")
        if f.body not in sys.evidence_at(f.agent, p, f.term):
            return False
        return all(eval_formula(sys, q, f.body, memo) for q in sys.related(f.agent, p))
    if isinstance(f, Know):
        return all(eval_formula(sys, q, f.body, memo) for q in sys.related(f.agent, p))
    raise TypeError(f"unknown formula node {f!r}")


def find_counterexample(sys: InterpretedSystem, f: Formula) -> Optional[Point]:
    memo: dict = {}
    for p in sys.reps():
        if not eval_formula(sys, p, f, memo):
            return p
    return None


def is_valid(sys: InterpretedSystem, f: Formula) -> bool:
    """True iff f holds at every point (by periodicity: every representative)."""
    return find_counterexample(sys, f) is None


# ---------------------------------------------------------------------------
# Admissibility, closure, strong evidence


@dataclass(frozen=True)
class Violation:
    condition: str
    detail: str


@dataclass(frozen=True)
class EvidenceReport:
    ok: bool
    violations: tuple[Violation, ...]


def _certified_formulas(sys: InterpretedSystem, cs: Optional[ConstantSpec], agent: int, c: str):
    if cs is None:
        return ()
    return tuple(f for f in sys.universe.formulas if cs.certifies(agent, c, f))


def check_admissible(sys: InterpretedSystem, cs: Optional[ConstantSpec] = None) -> EvidenceReport:
    """Verify the six evidence conditions over the universe and representatives."""
    out: list[Violation] = []
    reps = tuple(sys.reps())
    for agent in range(1, sys.h + 1):
        terms = sys.universe.terms.get(agent, frozenset())
        for t in terms:
            # 1. monotonicity across indistinguishable points
            for p in reps:
                here = sys.evidence_at(agent, p, t)
                for q in sys.related(agent, p):
                    missing = here - sys.evidence_at(agent, q, t)
                    for f in sorted(missing, key=render):
                        out.append(
                            Violation(
                                "monotonicity",
                                f"agent {agent}: {render(f)} at {p} for {render_term(t)} "
                                f"but not at {q}",
                            )
                        )
            if isinstance(t, Constant) and cs is not None:
                for f in _certified_formulas(sys, cs, agent, t.name):
                    for p in reps:
                        if f not in sys.evidence_at(agent, p, t):
                            out.append(
                                Violation(
                                    "constant specification",
                                    f"agent {agent}: {render(f)} missing at {p} for {t.name}",
                                )
                            )
            elif isinstance(t, App):
                for p in reps:
                    target = sys.evidence_at(agent, p, t)
                    for imp in sys.evidence_at(agent, p, t.left):
                        if (
                            isinstance(imp, Implies)
                            and imp.left in sys.evidence_at(agent, p, t.right)
                            and imp.right not in target
                        ):
                            out.append(
                                Violation(
                                    "application",
                                    f"agent {agent}: {render(imp.right)} missing at {p} "
                                    f"for {render_term(t)}",
                                )
                            )
            elif isinstance(t, Sum):
                for p in reps:
                    target = sys.evidence_at(agent, p, t)
                    for side in (t.left, t.right):
                        for f in sys.evidence_at(agent, p, side):
                            if f not in target:
                                out.append(
                                    Violation(
                                        "sum",
                                        f"agent {agent}: {render(f)} missing at {p} "
                                        f"for {render_term(t)}",
                                    )
                                )
            elif isinstance(t, Bang):
                for p in reps:
                    target = sys.evidence_at(agent, p, t)
                    for f in sys.evidence_at(agent, p, t.arg):
                        claim = Just(t.arg, agent, f)
                        if claim in sys.universe.formulas and claim not in target:
                            out.append(
                                Violation(
                                    "positive introspection",
                                    f"agent {agent}: {render(claim)} missing at {p} "
                                    f"for {render_term(t)}",
                                )
                            )
            elif isinstance(t, Query):
                for p in reps:
                    target = sys.evidence_at(agent, p, t)
                    have = sys.evidence_at(agent, p, t.arg)
                    for f in sys.universe.formulas:
                        claim = not_(Just(t.arg, agent, f))
                        if claim in sys.universe.formulas and f not in have and claim not in target:
                            out.append(
                                Violation(
                                    "negative introspection",
                                    f"agent {agent}: {render(claim)} missing at {p} "
                                    f"for {render_term(t)}",
                                )
                            )
    return EvidenceReport(not out, tuple(out))


def _term_size(t: Term) -> int:
    return sum(1 for _ in subterms(t))


def close_evidence(
    core: InterpretedSystem,
    seed: Iterable[tuple[int, Point, Term, Formula]],
    cs: Optional[ConstantSpec] = None,
) -> InterpretedSystem:
    """Least evidence function over the universe containing the seed and
    satisfying the six conditions; negative introspection is computed after
    each argument term's entries are final (conditions only write to
    structurally larger terms, so one structural pass is a fixpoint)."""
    table: dict[tuple[int, int, int, Term], set] = {}
    by_term: dict[tuple[int, Term], list] = {}
    for agent, p, t, f in seed:
        q = core.normalize(p)
        if not core.universe.has_term(agent, t):
            raise SystemFormatError(f"seed term {render_term(t)} outside the universe")
        if f not in core.universe.formulas:
            raise SystemFormatError(f"seed formula {render(f)} outside the universe")
        by_term.setdefault((agent, t), []).append((q, f))

    def cell(agent: int, p: Point, t: Term) -> set:
        return table.setdefault((agent, p.run, p.time, t), set())

    reps = tuple(core.reps())
    for agent in range(1, core.h + 1):
        terms = sorted(core.universe.terms.get(agent, frozenset()), key=_term_size)
        for t in terms:
            for q, f in by_term.get((agent, t), ()):
                cell(agent, q, t).add(f)
            if isinstance(t, Constant) and cs is not None:
                certified = _certified_formulas(core, cs, agent, t.name)
                for p in reps:
                    cell(agent, p, t).update(certified)
            elif isinstance(t, App):
                for p in reps:
                    right = table.get((agent, p.run, p.time, t.right), set())
                    for imp in table.get((agent, p.run, p.time, t.left), set()):
                        if isinstance(imp, Implies) and imp.left in right:
                            cell(agent, p, t).add(imp.right)
            elif isinstance(t, Sum):
                for p in reps:
                    for side in (t.left, t.right):
                        got = table.get((agent, p.run, p.time, side))
                        if got:
                            cell(agent, p, t).update(got)
            elif isinstance(t, Bang):
                for p in reps:
                    for f in table.get((agent, p.run, p.time, t.arg), set()):
                        claim = Just(t.arg, agent, f)
                        if claim in core.universe.formulas:
                            cell(agent, p, t).add(claim)
            elif isinstance(t, Query):
                for p in reps:
                    have = table.get((agent, p.run, p.time, t.arg), set())
                    for f in core.universe.formulas:
                        claim = not_(Just(t.arg, agent, f))
                        if claim in core.universe.formulas and f not in have:
                            cell(agent, p, t).add(claim)
            # monotonicity: equalize within each indistinguishability class
            seen: set = set()
            for p in reps:
                if p in seen:
                    continue
                cls = core.related(agent, p)
                seen.update(cls)
                union: set = set()
                for q in cls:
                    union |= table.get((agent, q.run, q.time, t), set())
                if union:
                    for q in cls:
                        table[(agent, q.run, q.time, t)] = set(union)

    evidence = {
        key: frozenset(val) for key, val in table.items() if val
    }
    return replace(core, evidence=evidence)


def check_strong(sys: InterpretedSystem) -> EvidenceReport:
    """Every evidence entry must already make its justification assertion true."""
    out: list[Violation] = []
    memo: dict = {}
    for (agent, ri, n, t), formulas in sorted(
        sys.evidence.items(), key=lambda kv: (kv[0][0], kv[0][1], kv[0][2], render_term(kv[0][3]))
    ):
        p = Point(ri, n)
        for f in sorted(formulas, key=render):
            if not eval_formula(sys, p, Just(t, agent, f), memo):
                out.append(
                    Violation(
                        "strong evidence",
                        f"agent {agent}: {render(f)} in evidence at {p} for "
                        f"{render_term(t)} but [{render_term(t)}]_{agent} {render(f)} fails",
                    )
                )
    return EvidenceReport(not out, tuple(out))


_PRINCIPLE_CONDITIONS = ("box-access", "generalize", "next-access", "next-right", "next-left")


def check_principle_condition(sys: InterpretedSystem, principle: str) -> EvidenceReport:
    """Check the evidence-level condition matching one connecting principle."""
    if principle not in _PRINCIPLE_CONDITIONS:
        raise ValueError(f"unknown principle {principle!r}")
    out: list[Violation] = []
    reps = tuple(sys.reps())

    def entries():
        for (agent, ri, n, t), formulas in sys.evidence.items():
            yield agent, Point(ri, n), t, formulas

    if principle == "box-access":
        for agent, p, t, formulas in entries():
            if not sys.universe.has_term(agent, Acc(t)):
                continue
            for f in formulas:
                if isinstance(f, Always):
                    for m in sys.future_times(p):
                        q = Point(p.run, m)
                        if f.arg not in sys.evidence_at(agent, q, Acc(t)):
                            out.append(
                                Violation(
                                    principle,
                                    f"agent {agent}: G-content {render(f.arg)} missing at {q} "
                                    f"for {render_term(Acc(t))}",
                                )
                            )
    elif principle == "generalize":
        for agent in range(1, sys.h + 1):
            for t in sys.universe.terms.get(agent, frozenset()):
                if not sys.universe.has_term(agent, Gen(t)):
                    continue
                for f in sys.universe.formulas:
                    if Always(f) not in sys.universe.formulas:
                        continue
                    for p in reps:
                        held = all(
                            f in sys.evidence_at(agent, Point(p.run, m), t)
                            for m in sys.future_times(p)
                        )
                        if held and Always(f) not in sys.evidence_at(agent, p, Gen(t)):
                            out.append(
                                Violation(
                                    principle,
                                    f"agent {agent}: G {render(f)} missing at {p} "
                                    f"for {render_term(Gen(t))}",
                                )
                            )
    elif principle == "next-access":
        for agent, p, t, formulas in entries():
            if not sys.universe.has_term(agent, NAcc(t)):
                continue
            for f in formulas:
                if isinstance(f, Always) and Next(f.arg) in sys.universe.formulas:
                    if Next(f.arg) not in sys.evidence_at(agent, p, NAcc(t)):
                        out.append(
                            Violation(
                                principle,
                                f"agent {agent}: X {render(f.arg)} missing at {p} "
                                f"for {render_term(NAcc(t))}",
                            )
                        )
    elif principle == "next-right":
        for agent, p, t, formulas in entries():
            if not sys.universe.has_term(agent, ShiftR(t)):
                continue
            succ = sys.normalize(Point(p.run, p.time + 1))
            for f in formulas:
                if isinstance(f, Next):
                    if f.arg not in sys.evidence_at(agent, succ, ShiftR(t)):
                        out.append(
                            Violation(
                                principle,
                                f"agent {agent}: {render(f.arg)} missing at {succ} "
                                f"for {render_term(ShiftR(t))}",
                            )
                        )
    elif principle == "next-left":
        for agent, p, t, formulas in entries():
            if not sys.universe.has_term(agent, ShiftL(t)):
                continue
            for f in formulas:
                if Next(f) not in sys.universe.formulas:
                    continue
                for q in reps:
                    if q.run == p.run and sys.normalize(Point(q.run, q.time + 1)) == p:
                        if Next(f) not in sys.evidence_at(agent, q, ShiftL(t)):
                            out.append(
                                Violation(
                                    principle,
                                    f"agent {agent}: X {render(f)} missing at {q} "
                                    f"for {render_term(ShiftL(t))}",
                                )
                            )
    return EvidenceReport(not out, tuple(out))


# ---------------------------------------------------------------------------
# System file format (JSON)


def load_system(data, h: Optional[int] = None) -> InterpretedSystem:
    """Load a system from a JSON document (dict or text), validating shapes."""
    if isinstance(data, str):
        data = json.loads(data)
    try:
        agents = int(data["agents"])
        runs = tuple(
            LassoRun(
                tuple(tuple(state) for state in run.get("prefix", [])),
                tuple(tuple(state) for state in run["loop"]),
            )
            for run in data["runs"]
        )
        uni = data.get("universe", {})
        term_shapes = [parse_term(s, 1) for s in uni.get("terms", [])]
        formulas = [parse_formula(s, agents) for s in uni.get("formulas", [])]
        universe = make_universe(agents, term_shapes, formulas)
        valuation = {}
        for entry in data.get("valuation", []):
            key = (int(entry["run"]), int(entry["time"]))
            valuation[key] = valuation.get(key, frozenset()) | frozenset(entry["atoms"])
        evidence: dict = {}
        for entry in data.get("evidence", []):
            agent = int(entry["agent"])
            t = parse_term(entry["term"], agent)
            key = (agent, int(entry["run"]), int(entry["time"]), t)
            fs = frozenset(parse_formula(s, agents) for s in entry["formulas"])
            evidence[key] = evidence.get(key, frozenset()) | fs
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, SystemFormatError):
            raise
        raise SystemFormatError(f"malformed system document: {exc}") from exc
    return InterpretedSystem(agents, runs, valuation, evidence, universe)


def save_system(sys: InterpretedSystem) -> dict:
    """Serialize to the documented JSON shape; inverse of load_system."""
    term_strings = sorted(
        {render_term(retag_term(t, 1)) for ts in sys.universe.terms.values() for t in ts}
    )
    return {
        "agents": sys.h,
        "runs": [
            {
                "prefix": [list(state) for state in run.prefix],
                "loop": [list(state) for state in run.loop],
            }
            for run in sys.runs
        ],
        "valuation": [
            {"run": ri, "time": n, "atoms": sorted(atoms)}
            for (ri, n), atoms in sorted(sys.valuation.items())
            if atoms
        ],
        "evidence": [
            {
                "agent": agent,
                "run": ri,
                "time": n,
                "term": render_term(t),
                "formulas": sorted(render(f) for f in formulas),
            }
            for (agent, ri, n, t), formulas in sorted(
                sys.evidence.items(),
                key=lambda kv: (kv[0][0], kv[0][1], kv[0][2], render_term(kv[0][3])),
            )
            if formulas
        ],
        "universe": {
            "terms": term_strings,
            "formulas": sorted(render(f) for f in sys.universe.formulas),
        },
    }
