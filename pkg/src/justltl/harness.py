"""Random-system generation, soundness fuzzing, and run-property detectors.

Generated systems are strong by construction: evidence seeds are drawn only
from facts already true at every indistinguishable point, then closed under
the admissibility conditions.  Fuzz reports embed the master seed and every
offending system serialized for bit-identical replay.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, replace
from typing import Iterable, Optional, Sequence

from .proofs import ConstantSpec, J5LTL, SchematicTotalCS
from .semantics import (
    InterpretedSystem,
    LassoRun,
    Point,
    close_evidence,
    eval_formula,
    find_counterexample,
    make_universe,
    save_system,
)
from .syntax import (
    Always,
    App,
    Atom,
    Bang,
    Formula,
    Implies,
    Just,
    Know,
    Next,
    Query,
    Sum,
    Term,
    Until,
    and_,
    diamond_,
    iff_,
    not_,
    or_,
    parse_formula,
    parse_term,
    render,
    render_term,
    subformulas,
)


@dataclass(frozen=True)
class GenParams:
    h: int = 2
    max_runs: int = 3
    max_prefix: int = 3
    max_loop: int = 3
    alphabet: int = 3
    atoms: tuple = ("p", "q", "r")
    seed_entries: int = 4
    rng_seed: int = 0
    uniform_shape: bool = False  # one shared (prefix, loop) shape per system
    include_constants: bool = True
    extra_formulas: tuple = ()  # rendered formulas merged into the universe

    def __post_init__(self):
        for name in ("h", "max_runs", "max_loop", "alphabet"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.max_prefix < 0 or self.seed_entries < 0:
            raise ValueError("max_prefix and seed_entries must be nonnegative")


_TERM_SHAPES = (
    "x1",
    "x2",
    "x1 * x2",
    "x1 + x2",
    "!x1",
    "!x2",
    "?x1",
    "?x2",
    "acc(x1)",
    "gen(x1)",
    "nacc(x1)",
    "shiftr(x1)",
    "shiftl(x1)",
)


def _universe_formulas(params: GenParams) -> list[Formula]:
    a = [Atom(name) for name in params.atoms[:3]]
    while len(a) < 2:
        a.append(Atom("p"))
    p, q = a[0], a[1]
    fmls: list[Formula] = list(a)
    fmls += [Implies(p, q), Implies(p, p), not_(p), Next(p), Next(q), Always(p), Until(p, q)]
    if len(a) > 2:
        fmls.append(Implies(q, a[2]))
    for agent in range(1, params.h + 1):
        for var, body in (("x1", p), ("x1", q), ("x2", p)):
            jf = Just(parse_term(var, agent), agent, body)
            fmls += [jf, not_(jf)]
    return fmls


def gen_strong_system(params: GenParams, cs: Optional[ConstantSpec] = None) -> InterpretedSystem:
    """A random admissible strong system, deterministic per rng_seed."""
    rng = random.Random(params.rng_seed)
    labels = [f"s{k}" for k in range(params.alphabet)]

    def state() -> tuple:
        return tuple(rng.choice(labels) for _ in range(params.h + 1))

    n_runs = rng.randint(1, params.max_runs)
    shared = (rng.randint(0, params.max_prefix), rng.randint(1, params.max_loop))
    runs = []
    for _ in range(n_runs):
        pre, loop = shared if params.uniform_shape else (
            rng.randint(0, params.max_prefix),
            rng.randint(1, params.max_loop),
        )
        runs.append(
            LassoRun(tuple(state() for _ in range(pre)), tuple(state() for _ in range(loop)))
        )

    shapes = [parse_term(s, 1) for s in _TERM_SHAPES]
    if params.include_constants:
        shapes.append(parse_term("c1", 1))
    formulas = _universe_formulas(params)
    formulas += [parse_formula(s, params.h) for s in params.extra_formulas]
    universe = make_universe(params.h, shapes, formulas)

    valuation = {}
    for ri, run in enumerate(runs):
        for n in range(run.n_reps):
            atoms = frozenset(name for name in params.atoms if rng.random() < 0.5)
            if atoms:
                valuation[(ri, n)] = atoms

    core = InterpretedSystem(params.h, tuple(runs), valuation, {}, universe)

    # seed candidates: evidence-free facts true at every indistinguishable point
    temporal_pool = [f for f in universe.formulas if _evidence_free(f)]
    temporal_pool.sort(key=render)
    seeds = []
    reps = tuple(core.reps())
    memo: dict = {}
    for _ in range(params.seed_entries):
        for _attempt in range(20):
            agent = rng.randint(1, params.h)
            p = rng.choice(reps)
            t = rng.choice(sorted(universe.terms[agent], key=render_key))
            f = rng.choice(temporal_pool)
            if all(eval_formula(core, q, f, memo) for q in core.related(agent, p)):
                seeds.append((agent, p, t, f))
                break
    return close_evidence(core, seeds, cs)


def render_key(t: Term) -> str:
    return render_term(t)


def _evidence_free(f: Formula) -> bool:
    return not any(isinstance(g, (Just, Know)) for g in subformulas(f))


def fits_universe(sys: InterpretedSystem, f: Formula) -> bool:
    """Can f be evaluated on sys without universe errors?"""
    for g in subformulas(f):
        if isinstance(g, Just):
            if not sys.universe.has_term(g.agent, g.term):
                return False
            if g.body not in sys.universe.formulas:
                return False
    return True


# ---------------------------------------------------------------------------
# Axiom-instance pools for the soundness fuzz

_CORE_SCHEMAS = (
    "prop",
    "k-next",
    "k-always",
    "fun",
    "mix",
    "ind",
    "u1",
    "u2",
    "app",
    "sum",
    "refl",
    "pos-intro",
    "neg-intro",
)


def schema_instances(sys: InterpretedSystem, rng: random.Random, per_schema: int = 3):
    """Instantiate every core axiom schema over the system's universe."""
    formulas = sorted(sys.universe.formulas, key=render)
    small = [f for f in formulas if sum(1 for _ in subformulas(f)) <= 6] or formulas

    def pick():
        return rng.choice(small)

    out: list[tuple[str, Formula]] = []
    for _ in range(per_schema):
        p, q, r = pick(), pick(), pick()
        out.append(("prop", Implies(p, Implies(q, p))))
        out.append(("prop", Implies(Implies(p, q), Implies(Implies(q, r), Implies(p, r)))))
        out.append(("prop", or_(p, not_(p))))
        out.append(("k-next", Implies(Next(Implies(p, q)), Implies(Next(p), Next(q)))))
        out.append(
            ("k-always", Implies(Always(Implies(p, q)), Implies(Always(p), Always(q))))
        )
        out.append(("fun", iff_(Next(not_(p)), not_(Next(p)))))
        out.append(("mix", Implies(Always(p), and_(p, Next(Always(p))))))
        out.append(("ind", Implies(Always(Implies(p, Next(p))), Implies(p, Always(p)))))
        out.append(("u1", Implies(Until(p, q), diamond_(q))))
        out.append(("u2", iff_(Until(p, q), or_(q, and_(p, Next(Until(p, q)))))))

    for agent in range(1, sys.h + 1):
        terms = sys.universe.terms.get(agent, frozenset())
        impls = [f for f in formulas if isinstance(f, Implies) and f.left in sys.universe.formulas]
        apps = sorted((t for t in terms if isinstance(t, App)), key=render_key)
        sums = sorted((t for t in terms if isinstance(t, Sum)), key=render_key)
        bangs = sorted((t for t in terms if isinstance(t, Bang)), key=render_key)
        queries = sorted((t for t in terms if isinstance(t, Query)), key=render_key)
        plain = sorted(terms, key=render_key)
        count = 0
        for t in apps:
            for imp in impls:
                f = Implies(
                    Just(t.left, agent, imp),
                    Implies(Just(t.right, agent, imp.left), Just(t, agent, imp.right)),
                )
                if fits_universe(sys, f):
                    out.append(("app", f))
                    count += 1
                    if count >= per_schema:
                        break
            if count >= per_schema:
                break
        count = 0
        for t in sums:
            for f0 in formulas:
                left = Implies(Just(t.left, agent, f0), Just(t, agent, f0))
                if fits_universe(sys, left):
                    out.append(("sum", left))
                    count += 1
                right = Implies(Just(t.right, agent, f0), Just(t, agent, f0))
                if count < per_schema and fits_universe(sys, right):
                    out.append(("sum", right))
                    count += 1
                if count >= per_schema:
                    break
            if count >= per_schema:
                break
        count = 0
        for t in plain:
            for f0 in formulas:
                f = Implies(Just(t, agent, f0), f0)
                if fits_universe(sys, f):
                    out.append(("refl", f))
                    count += 1
                    if count >= per_schema:
                        break
            if count >= per_schema:
                break
        count = 0
        for t in bangs:
            for f0 in formulas:
                inner = Just(t.arg, agent, f0)
                f = Implies(inner, Just(t, agent, inner))
                if fits_universe(sys, f):
                    out.append(("pos-intro", f))
                    count += 1
                    if count >= per_schema:
                        break
            if count >= per_schema:
                break
        count = 0
        for t in queries:
            for f0 in formulas:
                inner = not_(Just(t.arg, agent, f0))
                f = Implies(inner, Just(t, agent, inner))
                if fits_universe(sys, f):
                    out.append(("neg-intro", f))
                    count += 1
                    if count >= per_schema:
                        break
            if count >= per_schema:
                break
    return out


@dataclass(frozen=True)
class FuzzViolation:
    kind: str
    formula: str
    point: str
    rng_seed: int
    system: dict


@dataclass(frozen=True)
class FuzzReport:
    trials: int
    instances_checked: int
    violations: tuple
    master_seed: int
    per_schema_counts: dict

    @property
    def ok(self) -> bool:
        return not self.violations


def fuzz_soundness(
    params: GenParams,
    sys_count: int,
    extra_formulas: Sequence[Formula] = (),
    cs: Optional[ConstantSpec] = None,
) -> FuzzReport:
    """Generate strong systems and require every core axiom instance (and
    every extra formula that fits each universe) to be valid on all of them."""
    if cs is None:
        cs = SchematicTotalCS(J5LTL)
    master = params.rng_seed
    violations: list[FuzzViolation] = []
    checked = 0
    per_schema: dict[str, int] = {}
    for k in range(sys_count):
        trial_params = replace(params, rng_seed=master + k)
        sys = gen_strong_system(trial_params, cs)
        rng = random.Random(master + 7919 * (k + 1))
        pool = list(schema_instances(sys, rng))
        pool += [("extra", f) for f in extra_formulas if fits_universe(sys, f)]
        serialized = None
        for kind, f in pool:
            checked += 1
            per_schema[kind] = per_schema.get(kind, 0) + 1
            bad = find_counterexample(sys, f)
            if bad is not None:
                if serialized is None:
                    serialized = save_system(sys)
                violations.append(
                    FuzzViolation(kind, render(f), str(bad), trial_params.rng_seed, serialized)
                )
    return FuzzReport(sys_count, checked, tuple(violations), master, per_schema)


# ---------------------------------------------------------------------------
# Local-state sequences and run properties


def _collapse(seq: Iterable[str]) -> tuple:
    out: list = []
    for item in seq:
        if not out or out[-1] != item:
            out.append(item)
    return tuple(out)


def lss(run: LassoRun, n: int, agent: int) -> tuple:
    """Agent's local states over times 0..n with consecutive repeats removed."""
    return _collapse(run.state(m)[agent] for m in range(n + 1))


def _primitive(word: tuple) -> tuple:
    for d in range(1, len(word) + 1):
        if len(word) % d == 0 and word == word[:d] * (len(word) // d):
            return word[:d]
    return word


def _cyclic_collapse(word: tuple) -> tuple:
    out = list(_collapse(word))
    while len(out) > 1 and out[0] == out[-1]:
        out.pop()
    return tuple(out)


def flss(run: LassoRun, n: int, agent: int) -> tuple:
    """Canonical form of the collapsed future local-state sequence from n.

    Returns (prefix, loop): a stutter-free finite prefix plus the primitive
    repeating part; the loop is empty when the future is eventually constant,
    making equality of the infinite collapsed sequences decidable.
    """
    p_len, l_len = len(run.prefix), len(run.loop)
    loop_states = tuple(run.loop[k][agent] for k in range(l_len))
    if len(set(loop_states)) == 1:
        head = [run.state(m)[agent] for m in range(n, p_len)]
        head.append(loop_states[0])
        return _collapse(head), ()
    cycle = _primitive(_cyclic_collapse(loop_states))
    window = [run.state(m)[agent] for m in range(n, p_len + 4 * l_len)]
    z = _collapse(window)
    c = len(cycle)
    r = len(z) - c
    while r > 0 and z[r - 1] == z[r - 1 + c]:
        r -= 1
    return tuple(z[:r]), _primitive(tuple(z[r : r + c]))


@dataclass(frozen=True)
class PropertyProfile:
    unique_initial: bool
    synchronous: bool
    perfect_recall: tuple  # per agent, index agent-1
    no_learning: tuple

    def to_dict(self) -> dict:
        return {
            "unique_initial": self.unique_initial,
            "synchronous": self.synchronous,
            "perfect_recall": list(self.perfect_recall),
            "no_learning": list(self.no_learning),
        }


def detect_properties(sys: InterpretedSystem) -> PropertyProfile:
    """Classify a system: computed, never declared."""
    unique = len({sys.runs[ri].state(0) for ri in range(len(sys.runs))}) == 1

    window = max(len(r.prefix) for r in sys.runs) + max(len(r.loop) for r in sys.runs)
    synchronous = True
    for agent in range(1, sys.h + 1):
        seen: dict[str, int] = {}
        for t in range(window):
            for run in sys.runs:
                label = run.state(t)[agent]
                if seen.setdefault(label, t) != t:
                    synchronous = False
        if not synchronous:
            break

    recall, learning = [], []
    for agent in range(1, sys.h + 1):
        pr = nl = True
        classes: dict[str, list[Point]] = {}
        for p in sys.reps():
            classes.setdefault(sys.local_state(p, agent), []).append(p)
        for members in classes.values():
            histories = {lss(sys.runs[p.run], p.time, agent) for p in members}
            futures = {flss(sys.runs[p.run], p.time, agent) for p in members}
            if len(histories) > 1:
                pr = False
            if len(futures) > 1:
                nl = False
        recall.append(pr)
        learning.append(nl)
    return PropertyProfile(unique, synchronous, tuple(recall), tuple(learning))


# ---------------------------------------------------------------------------
# Knowledge-and-time principles (evaluator-only modality)

KT_ALIASES = {
    "kt1": "notquitepr",
    "kt2": "prsync",
    "kt3": "pr",
    "kt4": "nl",
    "kt5": "nlsync",
    "knowexch": "knowexch",
}
KT_NAMES = tuple(KT_ALIASES)


def _know_dual(agent: int, f: Formula) -> Formula:
    return not_(Know(agent, not_(f)))


def kt_instance(name: str, agent: int, pool: Sequence[Formula]) -> Formula:
    """One instance of a knowledge-and-time principle over pool formulas."""
    key = name.lower()
    key = {v: k for k, v in KT_ALIASES.items()}.get(key, key)
    phi = pool[0]
    psi = pool[1 % len(pool)]
    chi = pool[2 % len(pool)]
    if key == "kt1":
        return Implies(Know(agent, Always(phi)), Always(Know(agent, phi)))
    if key == "kt2":
        return Implies(Know(agent, Next(phi)), Next(Know(agent, phi)))
    if key == "kt3":
        left = and_(Know(agent, phi), Next(and_(Know(agent, psi), not_(Know(agent, chi)))))
        inner = Until(Know(agent, psi), not_(chi))
        return Implies(left, _know_dual(agent, Until(Know(agent, phi), inner)))
    if key == "kt4":
        u = Until(Know(agent, phi), Know(agent, psi))
        return Implies(u, Know(agent, u))
    if key == "kt5":
        return Implies(Next(Know(agent, phi)), Know(agent, Next(phi)))
    if key == "knowexch":
        return iff_(Know(agent, phi), Know(1, phi))
    raise ValueError(f"unknown principle {name!r}")


@dataclass(frozen=True)
class KTReport:
    checked: int
    violations: tuple  # (principle, agent, formula str, point str)

    @property
    def ok(self) -> bool:
        return not self.violations


def check_kt_principles(
    sys: InterpretedSystem,
    pool: Sequence[Formula],
    principles: Sequence[str] = KT_NAMES,
    agents: Optional[Sequence[int]] = None,
) -> KTReport:
    """Validity of principle instances over rotations of the formula pool."""
    agents = tuple(agents) if agents is not None else tuple(range(1, sys.h + 1))
    violations = []
    checked = 0
    for name in principles:
        for agent in agents:
            for k in range(len(pool)):
                rotated = tuple(pool[k:]) + tuple(pool[:k])
                f = kt_instance(name, agent, rotated)
                checked += 1
                bad = find_counterexample(sys, f)
                if bad is not None:
                    violations.append((name, agent, render(f), str(bad)))
    return KTReport(checked, tuple(violations))
