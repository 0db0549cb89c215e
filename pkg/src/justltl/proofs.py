"""Axiom-schema recognition, constant specifications, and the Hilbert checker.

Three proof systems are supported:

* ``ltl``     -- propositional + temporal axioms, rules MP / necX / necG;
* ``ltl-alt`` -- the induction-rule presentation (axioms prop, k-next, fun,
  u2; rules MP / necX / uind) in which ``G`` is a defined connective and is
  therefore rejected inside line formulas;
* ``j5ltl``   -- ltl plus the per-agent justification axioms, the csnec rule,
  and optionally the five connecting principles as extra axiom schemas.

Axiom names used throughout (files, reports, the CLI):
prop, k-next, k-always, fun, mix, ind, u1, u2, app, sum, refl, pos-intro,
neg-intro, box-access, generalize, next-access, next-right, next-left.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Iterable, Optional, Union

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
    Variable,
    and_,
    contains_always,
    contains_know,
    diamond_,
    iff_,
    not_,
    or_,
    parse_formula,
    propositional_skeleton,
    render,
    validate_formula,
)

PRINCIPLES = ("box-access", "generalize", "next-access", "next-right", "next-left")


class TautologyCapError(RuntimeError):
    """Raised when a skeleton has more distinct atoms than the truth-table cap."""


def is_tautology(f: Formula, max_atoms: int = 20) -> bool:
    """Truth-table validity of the propositional skeleton of f."""
    skeleton, assignment = propositional_skeleton(f)
    atoms = sorted(assignment, key=lambda a: a.name)
    if len(atoms) > max_atoms:
        raise TautologyCapError(
            f"skeleton has {len(atoms)} atoms, above the cap of {max_atoms}"
        )

    def ev(g: Formula, row: dict[Formula, bool]) -> bool:
        if isinstance(g, Bottom):
            return False
        if isinstance(g, Atom):
            return row[g]
        return (not ev(g.left, row)) or ev(g.right, row)

    for bits in itertools.product((False, True), repeat=len(atoms)):
        if not ev(skeleton, dict(zip(atoms, bits))):
            return False
    return True


# ---------------------------------------------------------------------------
# Schema matching.  Patterns are ordinary formulas whose metavariables are
# atoms / variables with a '?' name prefix (unwritable in concrete syntax);
# the lone agent metavariable of a schema is the placeholder index 0.

_PHI = Atom("?phi")
_PSI = Atom("?psi")
_T = Variable("?t", 0)
_S = Variable("?s", 0)


def _match_term(pat: Term, t: Term, env: dict) -> bool:
    if isinstance(pat, Variable) and pat.name.startswith("?"):
        if pat.name in env:
            return env[pat.name] == t
        env[pat.name] = t
        return True
    if type(pat) is not type(t):
        return False
    if isinstance(pat, (Constant, Variable)):
        return pat.name == t.name
    if isinstance(pat, (Sum, App)):
        return _match_term(pat.left, t.left, env) and _match_term(pat.right, t.right, env)
    return _match_term(pat.arg, t.arg, env)


def _match_agent(pat_agent: int, agent: int, env: dict) -> bool:
    if pat_agent == 0:
        if "?i" in env:
            return env["?i"] == agent
        env["?i"] = agent
        return True
    return pat_agent == agent


def _match(pat: Formula, f: Formula, env: dict) -> bool:
    if isinstance(pat, Atom) and pat.name.startswith("?"):
        if pat.name in env:
            return env[pat.name] == f
        env[pat.name] = f
        return True
    if type(pat) is not type(f):
        return False
    if isinstance(pat, (Atom, Bottom)):
        return pat == f
    if isinstance(pat, (Implies, Until)):
        return _match(pat.left, f.left, env) and _match(pat.right, f.right, env)
    if isinstance(pat, (Next, Always)):
        return _match(pat.arg, f.arg, env)
    if isinstance(pat, Just):
        return (
            _match_agent(pat.agent, f.agent, env)
            and _match_term(pat.term, f.term, env)
            and _match(pat.body, f.body, env)
        )
    if isinstance(pat, Know):
        return _match_agent(pat.agent, f.agent, env) and _match(pat.body, f.body, env)
    raise TypeError(f"unknown pattern node {pat!r}")


def matches_schema(f: Formula, pattern: Formula) -> bool:
    return _match(pattern, f, {})


def _j(t: Term, body: Formula) -> Formula:
    return Just(t, 0, body)


# Temporal schemas (shared by ltl and, minus k-always/mix/ind/u1, by ltl-alt).
_TEMPORAL_SCHEMAS: dict[str, tuple[Formula, ...]] = {
    "k-next": (Implies(Next(Implies(_PHI, _PSI)), Implies(Next(_PHI), Next(_PSI))),),
    "k-always": (Implies(Always(Implies(_PHI, _PSI)), Implies(Always(_PHI), Always(_PSI))),),
    "fun": (iff_(Next(not_(_PHI)), not_(Next(_PHI))),),
    "mix": (Implies(Always(_PHI), and_(_PHI, Next(Always(_PHI)))),),
    "ind": (Implies(Always(Implies(_PHI, Next(_PHI))), Implies(_PHI, Always(_PHI))),),
    "u1": (Implies(Until(_PHI, _PSI), diamond_(_PSI)),),
    "u2": (iff_(Until(_PHI, _PSI), or_(_PSI, and_(_PHI, Next(Until(_PHI, _PSI))))),),
}

# Justification schemas; "sum" covers both halves of the summed-evidence pair.
_JUST_SCHEMAS: dict[str, tuple[Formula, ...]] = {
    "app": (
        Implies(_j(_T, Implies(_PHI, _PSI)), Implies(_j(_S, _PHI), _j(App(_T, _S), _PSI))),
    ),
    "sum": (
        Implies(_j(_T, _PHI), _j(Sum(_T, _S), _PHI)),
        Implies(_j(_S, _PHI), _j(Sum(_T, _S), _PHI)),
    ),
    "refl": (Implies(_j(_T, _PHI), _PHI),),
    "pos-intro": (Implies(_j(_T, _PHI), _j(Bang(_T), _j(_T, _PHI))),),
    "neg-intro": (Implies(not_(_j(_T, _PHI)), _j(Query(_T), not_(_j(_T, _PHI)))),),
}

_PRINCIPLE_SCHEMAS: dict[str, tuple[Formula, ...]] = {
    "box-access": (Implies(_j(_T, Always(_PHI)), Always(_j(Acc(_T), _PHI))),),
    "generalize": (Implies(Always(_j(_T, _PHI)), _j(Gen(_T), Always(_PHI))),),
    "next-access": (Implies(_j(_T, Always(_PHI)), _j(NAcc(_T), Next(_PHI))),),
    "next-right": (Implies(_j(_T, Next(_PHI)), Next(_j(ShiftR(_T), _PHI))),),
    "next-left": (Implies(Next(_j(_T, _PHI)), _j(ShiftL(_T), Next(_PHI))),),
}

_ALL_SCHEMAS = {**_TEMPORAL_SCHEMAS, **_JUST_SCHEMAS, **_PRINCIPLE_SCHEMAS}

_LTL_AXIOMS = ("prop", "k-next", "k-always", "fun", "mix", "ind", "u1", "u2")
_LTL_ALT_AXIOMS = ("prop", "k-next", "fun", "u2")
_J5_AXIOMS = _LTL_AXIOMS + ("app", "sum", "refl", "pos-intro", "neg-intro")


@dataclass(frozen=True)
class SystemId:
    """A proof system selector: base calculus, enabled principles, csnec variant."""

    base: str = "j5ltl"
    principles: frozenset = frozenset()
    csnec_variant: bool = False

    def __post_init__(self):
        if self.base not in ("ltl", "ltl-alt", "j5ltl"):
            raise ValueError(f"unknown system {self.base!r}")
        bad = set(self.principles) - set(PRINCIPLES)
        if bad:
            raise ValueError(f"unknown principles {sorted(bad)}")
        if self.principles and self.base != "j5ltl":
            raise ValueError("connecting principles require the j5ltl system")
        object.__setattr__(self, "principles", frozenset(self.principles))

    def axiom_names(self) -> tuple[str, ...]:
        if self.base == "ltl":
            return _LTL_AXIOMS
        if self.base == "ltl-alt":
            return _LTL_ALT_AXIOMS
        order = [p for p in PRINCIPLES if p in self.principles]
        return _J5_AXIOMS + tuple(order)

    def has_rule(self, rule: str) -> bool:
        rules = {"mp", "necX"}
        if self.base in ("ltl", "j5ltl"):
            rules.add("necG")
        if self.base == "ltl-alt":
            rules.add("uind")
        if self.base == "j5ltl":
            rules.add("csnec")
        return rule in rules


LTL = SystemId("ltl")
LTL_ALT = SystemId("ltl-alt")
J5LTL = SystemId("j5ltl")


def j5ltl_with(*principles: str, csnec_variant: bool = False) -> SystemId:
    return SystemId("j5ltl", frozenset(principles), csnec_variant)


def matches_named_axiom(f: Formula, name: str) -> bool:
    """Does f instantiate the named schema?  'prop' means tautology."""
    if name == "prop":
        try:
            return is_tautology(f)
        except TautologyCapError:
            return False
    patterns = _ALL_SCHEMAS.get(name)
    if patterns is None:
        raise ValueError(f"unknown axiom name {name!r}")
    return any(matches_schema(f, p) for p in patterns)


def match_axiom(f: Formula, sys: SystemId) -> Optional[str]:
    """First schema of the system (in documented order) that f instantiates."""
    for name in sys.axiom_names():
        if matches_named_axiom(f, name):
            return name
    return None


# ---------------------------------------------------------------------------
# Constant specifications


class SchemaCertificates:
    """Lazy axiom set certified by one constant under a total specification."""

    def __init__(self, sys: SystemId):
        self.sys = sys

    def __contains__(self, f) -> bool:
        return isinstance(f, Formula) and match_axiom(f, self.sys) is not None


@dataclass(frozen=True)
class SchematicTotalCS:
    """Total constant specification: every constant of every agent certifies
    every axiom of the bound system.  Axiomatically appropriate by construction.
    """

    sys: SystemId

    def certifies(self, agent: int, constant: str, f: Formula) -> bool:
        return match_axiom(f, self.sys) is not None

    def constant_for(self, agent: int, f: Formula) -> str:
        """A mnemonic constant name for an axiom instance, stable per schema."""
        name = match_axiom(f, self.sys)
        if name is None:
            raise ConstantSpecError(f"not an axiom of {self.sys.base}: {render(f)}")
        return "c_" + name.replace("-", "_")


class ConstantSpecError(ValueError):
    pass


@dataclass(frozen=True)
class ExplicitCS:
    """Finite constant specification as a set of (agent, constant, axiom) entries."""

    entries: frozenset  # of (int, str, Formula)

    @staticmethod
    def make(entries: Iterable[tuple[int, str, Formula]], sys: SystemId) -> "ExplicitCS":
        frozen = frozenset(entries)
        for agent, constant, f in frozen:
            if match_axiom(f, sys) is None:
                raise ConstantSpecError(
                    f"constant specification entry ({agent}, {constant}) is not an "
                    f"axiom of {sys.base}: {render(f)}"
                )
        return ExplicitCS(frozen)

    def certifies(self, agent: int, constant: str, f: Formula) -> bool:
        return (agent, constant, f) in self.entries

    def constant_for(self, agent: int, f: Formula) -> str:
        for a, c, g in self.entries:
            if a == agent and g == f:
                return c
        raise ConstantSpecError(
            f"no constant for agent {agent} certifies: {render(f)}"
        )


ConstantSpec = Union[SchematicTotalCS, ExplicitCS]


def cs_lookup(cs: ConstantSpec, agent: int, constant: str, sys: SystemId):
    """The set of formulas the constant certifies for the agent.

    For an explicit specification this is a frozenset; for the total
    specification it is a lazy membership object over all axioms of sys.
    """
    if isinstance(cs, SchematicTotalCS):
        return SchemaCertificates(sys)
    return frozenset(f for a, c, f in cs.entries if a == agent and c == constant)


# ---------------------------------------------------------------------------
# Derivations and the checker


@dataclass(frozen=True)
class Justification:
    rule: str  # axiom | mp | necX | necG | csnec | uind
    name: str = ""  # schema name, for axiom lines
    refs: tuple = ()  # referenced line indices

    def __str__(self) -> str:
        if self.rule == "axiom":
            return f"axiom {self.name}"
        if self.refs:
            return self.rule + " " + " ".join(str(r) for r in self.refs)
        return self.rule


def axiom(name: str) -> Justification:
    return Justification("axiom", name=name)


def mp(antecedent: int, implication: int) -> Justification:
    return Justification("mp", refs=(antecedent, implication))


def nec_next(ref: int) -> Justification:
    return Justification("necX", refs=(ref,))


def nec_always(ref: int) -> Justification:
    return Justification("necG", refs=(ref,))


def csnec() -> Justification:
    return Justification("csnec")


def until_ind(ref: int) -> Justification:
    return Justification("uind", refs=(ref,))


@dataclass(frozen=True)
class Line:
    index: int
    formula: Formula
    just: Justification


@dataclass(frozen=True)
class Derivation:
    lines: tuple[Line, ...]

    @property
    def conclusion(self) -> Formula:
        return self.lines[-1].formula

    def __len__(self) -> int:
        return len(self.lines)


@dataclass(frozen=True)
class CheckReport:
    ok: bool
    first_failure: Optional[tuple[int, str]] = None
    axioms_used: frozenset = frozenset()
    principles_used: frozenset = frozenset()
    constants_used: frozenset = frozenset()


def check_derivation(d: Derivation, sys: SystemId, cs: Optional[ConstantSpec] = None) -> CheckReport:
    """Validate every line of d against the rules of sys; never raises."""
    by_index: dict[int, Formula] = {}
    axioms_used: set[str] = set()
    constants_used: set[tuple[int, str]] = set()

    def fail(line: Line, reason: str) -> CheckReport:
        return CheckReport(False, (line.index, reason))

    prev_index = 0
    for line in d.lines:
        if line.index <= prev_index:
            return fail(line, f"line index {line.index} does not increase")
        prev_index = line.index
        f, just = line.formula, line.just
        if contains_know(f):
            return fail(line, "knowledge operator K_i is not part of the proof language")
        if sys.base == "ltl-alt" and contains_always(f):
            return fail(line, "G is a defined connective here; expand it first")
        refs = []
        for r in just.refs:
            if r not in by_index:
                return fail(line, f"reference to missing or later line {r}")
            refs.append(by_index[r])

        if just.rule == "axiom":
            if just.name not in sys.axiom_names():
                return fail(line, f"axiom {just.name!r} is not part of this system")
            if not matches_named_axiom(f, just.name):
                return fail(line, f"formula does not instantiate axiom {just.name!r}")
            axioms_used.add(just.name)
        elif just.rule == "mp":
            antecedent, implication = refs
            if implication != Implies(antecedent, f):
                return fail(
                    line,
                    f"mp needs line {just.refs[1]} to be (line {just.refs[0]} -> this line)",
                )
        elif just.rule == "necX":
            if f != Next(refs[0]):
                return fail(line, "necX line must be X of the referenced line")
        elif just.rule == "necG":
            if not sys.has_rule("necG"):
                return fail(line, "necG is not a rule of this system")
            if f != Always(refs[0]):
                return fail(line, "necG line must be G of the referenced line")
        elif just.rule == "csnec":
            if not sys.has_rule("csnec"):
                return fail(line, "csnec is not a rule of this system")
            if cs is None:
                return fail(line, "csnec used but no constant specification given")
            ok, why = _check_csnec(f, sys, cs, constants_used)
            if not ok:
                return fail(line, why)
        elif just.rule == "uind":
            if not sys.has_rule("uind"):
                return fail(line, "uind is not a rule of this system")
            ok, why = _check_uind(f, refs[0])
            if not ok:
                return fail(line, why)
        else:
            return fail(line, f"unknown rule {just.rule!r}")
        by_index[line.index] = f

    return CheckReport(
        True,
        None,
        frozenset(axioms_used),
        frozenset(axioms_used & set(PRINCIPLES)),
        frozenset(constants_used),
    )


def _check_csnec(f: Formula, sys: SystemId, cs: ConstantSpec, used: set) -> tuple[bool, str]:
    if not (isinstance(f, Just) and isinstance(f.term, Constant)):
        return False, "csnec line must assert a single proof constant"
    c, agent, body = f.term.name, f.agent, f.body
    if cs.certifies(agent, c, body):
        used.add((agent, c))
        return True, ""
    if sys.csnec_variant and isinstance(body, Always) and cs.certifies(agent, c, body.arg):
        used.add((agent, c))
        return True, ""
    return False, f"({agent}, {c}) does not certify {render(body)}"


def _check_uind(f: Formula, premise: Formula) -> tuple[bool, str]:
    # conclusion chi -> ~(phi U psi); premise must be chi -> (~psi & X chi)
    shape = "uind conclusion must have shape chi -> ~(phi U psi)"
    if not (isinstance(f, Implies) and isinstance(f.right, Implies)):
        return False, shape
    chi, neg = f.left, f.right
    if not (isinstance(neg.right, Bottom) and isinstance(neg.left, Until)):
        return False, shape
    psi = neg.left.right
    expected = Implies(chi, and_(not_(psi), Next(chi)))
    if premise != expected:
        return False, "uind premise must be chi -> (~psi & X chi) for the conclusion's chi, psi"
    return True, ""


# ---------------------------------------------------------------------------
# Derivation file format:
#   <n>. <formula> ; axiom <name> | mp <j> <k> | necX <j> | necG <j> | csnec | uind <j>
# Lines starting with '#' are comments.

_LINE_RE = re.compile(
    r"^\s*(?P<idx>\d+)\.\s*(?P<formula>.*?)\s*;\s*(?P<just>"
    r"axiom\s+[\w-]+|mp\s+\d+\s+\d+|necX\s+\d+|necG\s+\d+|csnec|uind\s+\d+"
    r")\s*$"
)


class DerivationFormatError(ValueError):
    pass


def parse_derivation(text: str, h: int) -> Derivation:
    lines = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        m = _LINE_RE.match(raw)
        if m is None:
            raise DerivationFormatError(f"line {lineno}: not a derivation line: {raw!r}")
        try:
            f = parse_formula(m.group("formula"), h)
            validate_formula(f, h)
        except ValueError as exc:
            raise DerivationFormatError(f"line {lineno}: {exc}") from exc
        parts = m.group("just").split()
        rule = parts[0]
        if rule == "axiom":
            just = axiom(parts[1])
        elif rule == "csnec":
            just = csnec()
        else:
            just = Justification(rule, refs=tuple(int(p) for p in parts[1:]))
        lines.append(Line(int(m.group("idx")), f, just))
    if not lines:
        raise DerivationFormatError("empty derivation")
    return Derivation(tuple(lines))


def format_derivation(d: Derivation) -> str:
    return "\n".join(f"{ln.index}. {render(ln.formula)} ; {ln.just}" for ln in d.lines) + "\n"


# ---------------------------------------------------------------------------
# Construction helper used by the derivation builders


class DerivationBuilder:
    """Append-only builder whose helpers fail fast on malformed steps."""

    def __init__(self):
        self._lines: list[Line] = []

    def _add(self, f: Formula, just: Justification) -> int:
        idx = len(self._lines) + 1
        self._lines.append(Line(idx, f, just))
        return idx

    def formula_at(self, idx: int) -> Formula:
        return self._lines[idx - 1].formula

    def axiom(self, f: Formula, name: str) -> int:
        return self._add(f, axiom(name))

    def taut(self, f: Formula) -> int:
        if not is_tautology(f):
            raise AssertionError(f"builder emitted a non-tautology: {render(f)}")
        return self._add(f, axiom("prop"))

    def mp(self, antecedent: int, implication: int) -> int:
        impl = self.formula_at(implication)
        if not (isinstance(impl, Implies) and impl.left == self.formula_at(antecedent)):
            raise AssertionError("builder mp premises do not fit")
        return self._add(impl.right, mp(antecedent, implication))

    def nec_next(self, ref: int) -> int:
        return self._add(Next(self.formula_at(ref)), nec_next(ref))

    def nec_always(self, ref: int) -> int:
        return self._add(Always(self.formula_at(ref)), nec_always(ref))

    def csnec(self, f: Formula) -> int:
        return self._add(f, csnec())

    def until_ind(self, ref: int, until_left: Formula) -> int:
        premise = self.formula_at(ref)
        chi = premise.left
        neg_psi = _and_first(premise.right)  # first conjunct ~psi of the premise
        psi = neg_psi.left
        return self._add(Implies(chi, not_(Until(until_left, psi))), until_ind(ref))

    def prop_mp(self, target: Formula, *premises: int) -> int:
        """Derive target from premise lines via one tautology and mp chaining."""
        taut = target
        for ref in reversed(premises):
            taut = Implies(self.formula_at(ref), taut)
        idx = self.taut(taut)
        for ref in premises:
            idx = self.mp(ref, idx)
        return idx

    def build(self) -> Derivation:
        return Derivation(tuple(self._lines))


def _and_first(f: Formula) -> Formula:
    # and_(a, b) expands to (((a -> F) -> F) -> (b -> F)) -> F ; recover a.
    return f.left.left.left.left


def append_line(d: Derivation, f: Formula, just: Justification) -> Derivation:
    idx = d.lines[-1].index + 1 if d.lines else 1
    return Derivation(d.lines + (Line(idx, f, just),))
