"""Abstract syntax, parser, and printer for justification terms and formulas.

The concrete syntax is plain ASCII.  Temporal operators are written ``X``
(next), ``G`` (always), ``F`` (eventually), and infix ``U`` (until).  A
justification assertion is written ``[t]_i phi`` and the evaluator-only
knowledge modality is ``K_i phi``.  Term operators are ``!``, ``?``, ``+``,
``*`` and the named unary operators ``acc``, ``gen``, ``nacc``, ``shiftr``,
``shiftl``.  Constants are identifiers starting with ``c``, variables start
with ``x``.

Derived connectives (``~``, ``true``, ``|``, ``&``, ``<->``, ``F``) are
expanded into the core grammar at parse time; the core printer re-sugars
only ``~`` and ``true``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator


class ParseError(ValueError):
    """Syntax or arity error, carrying a 1-based line/column position."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


# ---------------------------------------------------------------------------
# Terms


@dataclass(frozen=True)
class Term:
    pass


@dataclass(frozen=True)
class Constant(Term):
    name: str
    agent: int


@dataclass(frozen=True)
class Variable(Term):
    name: str
    agent: int


@dataclass(frozen=True)
class Bang(Term):
    arg: Term


@dataclass(frozen=True)
class Query(Term):
    arg: Term


@dataclass(frozen=True)
class Sum(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class App(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class Acc(Term):
    arg: Term


@dataclass(frozen=True)
class Gen(Term):
    arg: Term


@dataclass(frozen=True)
class NAcc(Term):
    arg: Term


@dataclass(frozen=True)
class ShiftR(Term):
    arg: Term


@dataclass(frozen=True)
class ShiftL(Term):
    arg: Term


# ---------------------------------------------------------------------------
# Formulas


@dataclass(frozen=True)
class Formula:
    pass


@dataclass(frozen=True)
class Atom(Formula):
    name: str


@dataclass(frozen=True)
class Bottom(Formula):
    pass


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Next(Formula):
    arg: Formula


@dataclass(frozen=True)
class Always(Formula):
    arg: Formula


@dataclass(frozen=True)
class Until(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Just(Formula):
    term: Term
    agent: int
    body: Formula


@dataclass(frozen=True)
class Know(Formula):
    """Modal knowledge operator; supported by the evaluator only."""

    agent: int
    body: Formula


BOT = Bottom()


def not_(f: Formula) -> Formula:
    return Implies(f, BOT)


def true_() -> Formula:
    return Implies(BOT, BOT)


def or_(a: Formula, b: Formula) -> Formula:
    return Implies(not_(a), b)


def and_(a: Formula, b: Formula) -> Formula:
    return not_(or_(not_(a), not_(b)))


def iff_(a: Formula, b: Formula) -> Formula:
    return and_(Implies(a, b), Implies(b, a))


def diamond_(f: Formula) -> Formula:
    return not_(Always(not_(f)))


# ---------------------------------------------------------------------------
# Structural utilities


def subterms(t: Term) -> Iterator[Term]:
    """Yield t and every subterm of t."""
    yield t
    if isinstance(t, (Bang, Query, Acc, Gen, NAcc, ShiftR, ShiftL)):
        yield from subterms(t.arg)
    elif isinstance(t, (Sum, App)):
        yield from subterms(t.left)
        yield from subterms(t.right)


def subformulas(f: Formula) -> Iterator[Formula]:
    """Yield f and every subformula of f (terms are not descended into)."""
    yield f
    if isinstance(f, Implies) or isinstance(f, Until):
        yield from subformulas(f.left)
        yield from subformulas(f.right)
    elif isinstance(f, (Next, Always)):
        yield from subformulas(f.arg)
    elif isinstance(f, (Just, Know)):
        yield from subformulas(f.body)


def term_agent(t: Term) -> int:
    """The shared agent index of all leaves of t; raises on a mixed term."""
    agents = {leaf.agent for leaf in subterms(t) if isinstance(leaf, (Constant, Variable))}
    if len(agents) != 1:
        raise ValueError(f"term has leaves for several agents: {sorted(agents)}")
    return agents.pop()


def retag_term(t: Term, agent: int) -> Term:
    """Copy of t with every leaf tagged with the given agent."""
    if isinstance(t, (Constant, Variable)):
        return type(t)(t.name, agent)
    if isinstance(t, (Sum, App)):
        return type(t)(retag_term(t.left, agent), retag_term(t.right, agent))
    return type(t)(retag_term(t.arg, agent))


def contains_know(f: Formula) -> bool:
    return any(isinstance(g, Know) for g in subformulas(f))


def contains_always(f: Formula) -> bool:
    return any(isinstance(g, Always) for g in subformulas(f))


def validate_formula(f: Formula, h: int) -> None:
    """Check agent ranges and per-agent term consistency; raises ValueError."""
    for g in subformulas(f):
        if isinstance(g, Just):
            if not 1 <= g.agent <= h:
                raise ValueError(f"agent index {g.agent} out of range [1, {h}]")
            if term_agent(g.term) != g.agent:
                raise ValueError(
                    f"term {render_term(g.term)} tagged for a different agent than {g.agent}"
                )
        elif isinstance(g, Know):
            if not 1 <= g.agent <= h:
                raise ValueError(f"agent index {g.agent} out of range [1, {h}]")


# ---------------------------------------------------------------------------
# Lexer

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<darrow><->)
  | (?P<arrow>->)
  | (?P<rbrack_agent>\]_(?P<ragent>\d+))
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<sym>[~|&+*!?()\[\]])
    """,
    re.VERBOSE,
)

_KNOW_RE = re.compile(r"^K_(\d+)$")
_RESERVED = {"X", "G", "F", "U", "true", "false"}


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    line: int
    col: int
    agent: int = 0


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    line, line_start = 1, 0
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        col = pos - line_start + 1
        if m.group("ws"):
            line += m.group().count("\n")
            if "\n" in m.group():
                line_start = pos + m.group().rindex("\n") + 1
        elif m.group("rbrack_agent"):
            toks.append(_Tok("rbrack_agent", m.group(), line, col, int(m.group("ragent"))))
        elif m.group("ident"):
            word = m.group()
            know = _KNOW_RE.match(word)
            if know:
                toks.append(_Tok("know", word, line, col, int(know.group(1))))
            elif word in _RESERVED:
                toks.append(_Tok(word, word, line, col))
            else:
                toks.append(_Tok("ident", word, line, col))
        elif m.group("darrow"):
            toks.append(_Tok("<->", "<->", line, col))
        elif m.group("arrow"):
            toks.append(_Tok("->", "->", line, col))
        else:
            toks.append(_Tok(m.group(), m.group(), line, col))
        pos = m.end()
    toks.append(_Tok("eof", "", line, len(text) - line_start + 1))
    return toks


# ---------------------------------------------------------------------------
# Parser

_TERM_UNARY = {"acc": Acc, "gen": Gen, "nacc": NAcc, "shiftr": ShiftR, "shiftl": ShiftL}


class _Parser:
    def __init__(self, text: str, h: int):
        self.toks = _tokenize(text)
        self.pos = 0
        self.h = h

    def peek(self) -> _Tok:
        return self.toks[self.pos]

    def next(self) -> _Tok:
        tok = self.toks[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str) -> _Tok:
        tok = self.next()
        if tok.kind != kind:
            raise ParseError(f"expected {kind!r}, found {tok.text!r}", tok.line, tok.col)
        return tok

    def fail(self, message: str) -> ParseError:
        tok = self.peek()
        return ParseError(message, tok.line, tok.col)

    def check_agent(self, agent: int, tok: _Tok) -> int:
        if not 1 <= agent <= self.h:
            raise ParseError(f"agent index {agent} out of range [1, {self.h}]", tok.line, tok.col)
        return agent

    # formula := impl ; impl := iff ("->" impl)?
    def formula(self) -> Formula:
        left = self.iff()
        if self.peek().kind == "->":
            self.next()
            return Implies(left, self.formula())
        return left

    def iff(self) -> Formula:
        left = self.or_()
        while self.peek().kind == "<->":
            self.next()
            left = iff_(left, self.or_())
        return left

    def or_(self) -> Formula:
        left = self.and_()
        while self.peek().kind == "|":
            self.next()
            left = or_(left, self.and_())
        return left

    def and_(self) -> Formula:
        left = self.until()
        while self.peek().kind == "&":
            self.next()
            left = and_(left, self.until())
        return left

    # until := unary ("U" unary)*, folded to the right
    def until(self) -> Formula:
        operands = [self.unary()]
        while self.peek().kind == "U":
            self.next()
            operands.append(self.unary())
        result = operands[-1]
        for operand in reversed(operands[:-1]):
            result = Until(operand, result)
        return result

    def unary(self) -> Formula:
        tok = self.peek()
        if tok.kind == "~":
            self.next()
            return not_(self.unary())
        if tok.kind == "X":
            self.next()
            return Next(self.unary())
        if tok.kind == "G":
            self.next()
            return Always(self.unary())
        if tok.kind == "F":
            self.next()
            return diamond_(self.unary())
        if tok.kind == "[":
            self.next()
            shape = self.term()
            close = self.expect("rbrack_agent")
            agent = self.check_agent(close.agent, close)
            return Just(retag_term(shape, agent), agent, self.unary())
        if tok.kind == "know":
            self.next()
            agent = self.check_agent(tok.agent, tok)
            return Know(agent, self.unary())
        return self.atomlike()

    def atomlike(self) -> Formula:
        tok = self.next()
        if tok.kind == "false":
            return BOT
        if tok.kind == "true":
            return true_()
        if tok.kind == "ident":
            return Atom(tok.text)
        if tok.kind == "(":
            inner = self.formula()
            self.expect(")")
            return inner
        raise ParseError(f"expected a formula, found {tok.text!r}", tok.line, tok.col)

    # term := sumterm ; sumterm := appterm ("+" appterm)*
    def term(self) -> Term:
        left = self.appterm()
        while self.peek().kind == "+":
            self.next()
            left = Sum(left, self.appterm())
        return left

    def appterm(self) -> Term:
        left = self.prim()
        while self.peek().kind == "*":
            self.next()
            left = App(left, self.prim())
        return left

    def prim(self) -> Term:
        tok = self.next()
        if tok.kind == "!":
            return Bang(self.prim())
        if tok.kind == "?":
            return Query(self.prim())
        if tok.kind == "ident" and tok.text in _TERM_UNARY:
            self.expect("(")
            inner = self.term()
            self.expect(")")
            return _TERM_UNARY[tok.text](inner)
        if tok.kind == "ident":
            if tok.text.startswith("c"):
                return Constant(tok.text, 0)
            if tok.text.startswith("x"):
                return Variable(tok.text, 0)
            raise ParseError(
                f"term identifier {tok.text!r} must start with 'c' (constant) or 'x' (variable)",
                tok.line,
                tok.col,
            )
        if tok.kind == "(":
            inner = self.term()
            self.expect(")")
            return inner
        raise ParseError(f"expected a term, found {tok.text!r}", tok.line, tok.col)


def parse_formula(text: str, h: int) -> Formula:
    """Parse an ASCII formula, expanding derived connectives to core form."""
    parser = _Parser(text, h)
    result = parser.formula()
    tok = parser.peek()
    if tok.kind != "eof":
        raise ParseError(f"trailing input {tok.text!r}", tok.line, tok.col)
    return result


def parse_term(text: str, agent: int) -> Term:
    """Parse an ASCII term with all leaves tagged with the given agent."""
    if agent < 1:
        raise ValueError(f"agent index must be positive, got {agent}")
    parser = _Parser(text, agent)
    shape = parser.term()
    tok = parser.peek()
    if tok.kind != "eof":
        raise ParseError(f"trailing input {tok.text!r}", tok.line, tok.col)
    return retag_term(shape, agent)


# ---------------------------------------------------------------------------
# Printer

_TRUE = true_()


def render_term(t: Term) -> str:
    if isinstance(t, (Constant, Variable)):
        return t.name
    if isinstance(t, Bang):
        return "!" + _render_prim(t.arg)
    if isinstance(t, Query):
        return "?" + _render_prim(t.arg)
    if isinstance(t, Sum):
        return f"{render_term(t.left)} + {_render_app(t.right)}"
    if isinstance(t, App):
        return f"{_render_app(t.left)} * {_render_prim(t.right)}"
    for name, cls in _TERM_UNARY.items():
        if isinstance(t, cls):
            return f"{name}({render_term(t.arg)})"
    raise TypeError(f"unknown term node {t!r}")


def _render_app(t: Term) -> str:
    return f"({render_term(t)})" if isinstance(t, Sum) else render_term(t)


def _render_prim(t: Term) -> str:
    return f"({render_term(t)})" if isinstance(t, (Sum, App)) else render_term(t)


def render(f: Formula) -> str:
    """Render a core formula so that parse_formula(render(f)) == f."""
    if isinstance(f, Bottom):
        return "false"
    if f == _TRUE:
        return "true"
    if isinstance(f, Implies):
        if isinstance(f.right, Bottom):
            return "~" + _render_unary(f.left)
        return f"{_render_impl_left(f.left)} -> {render(f.right)}"
    if isinstance(f, Atom):
        return f.name
    if isinstance(f, Next):
        return "X " + _render_unary(f.arg)
    if isinstance(f, Always):
        return "G " + _render_unary(f.arg)
    if isinstance(f, Until):
        return f"{_render_unary(f.left)} U {_render_unary(f.right)}"
    if isinstance(f, Just):
        return f"[{render_term(f.term)}]_{f.agent} " + _render_unary(f.body)
    if isinstance(f, Know):
        return f"K_{f.agent} " + _render_unary(f.body)
    raise TypeError(f"unknown formula node {f!r}")


def _is_unary_level(f: Formula) -> bool:
    if isinstance(f, Implies):
        return f == _TRUE or isinstance(f.right, Bottom)
    return not isinstance(f, Until)


def _render_unary(f: Formula) -> str:
    return render(f) if _is_unary_level(f) else f"({render(f)})"


def _render_impl_left(f: Formula) -> str:
    # A left operand of "->" sits at the iff level; anything down to a
    # bare until survives unparenthesised, a nested implication does not.
    if isinstance(f, Implies) and not (f == _TRUE or isinstance(f.right, Bottom)):
        return f"({render(f)})"
    return render(f)


# ---------------------------------------------------------------------------
# Propositional skeleton


def _skeleton_names() -> Iterator[str]:
    letters = "ABCDEFGHIJKLMNOPQRSTUVWZ"
    for ch in letters:
        yield ch
    k = 1
    while True:
        for ch in letters:
            yield f"{ch}{k}"
        k += 1


def propositional_skeleton(f: Formula) -> tuple[Formula, dict[Formula, Formula]]:
    """Replace each maximal non-implicational subformula by a fresh atom.

    Identical subformulas share an atom.  Returns the skeleton and the
    assignment from fresh atoms back to the replaced subformulas, so that
    substituting the assignment into the skeleton reproduces the input.
    """
    names = _skeleton_names()
    mapping: dict[Formula, Formula] = {}

    def walk(g: Formula) -> Formula:
        if isinstance(g, Bottom):
            return g
        if isinstance(g, Implies):
            return Implies(walk(g.left), walk(g.right))
        if g not in mapping:
            mapping[g] = Atom(next(names))
        return mapping[g]

    skeleton = walk(f)
    assignment = {atom: sub for sub, atom in mapping.items()}
    return skeleton, assignment


def substitute_atoms(f: Formula, assignment: dict[Formula, Formula]) -> Formula:
    """Replace atoms of f by their assignment images (inverse of the skeleton)."""
    if isinstance(f, Atom):
        return assignment.get(f, f)
    if isinstance(f, Bottom):
        return f
    if isinstance(f, Implies):
        return Implies(substitute_atoms(f.left, assignment), substitute_atoms(f.right, assignment))
    if isinstance(f, Next):
        return Next(substitute_atoms(f.arg, assignment))
    if isinstance(f, Always):
        return Always(substitute_atoms(f.arg, assignment))
    if isinstance(f, Until):
        return Until(substitute_atoms(f.left, assignment), substitute_atoms(f.right, assignment))
    if isinstance(f, Just):
        return Just(f.term, f.agent, substitute_atoms(f.body, assignment))
    if isinstance(f, Know):
        return Know(f.agent, substitute_atoms(f.body, assignment))
    raise TypeError(f"unknown formula node {f!r}")
