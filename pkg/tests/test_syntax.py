import pytest
from hypothesis import given, settings, strategies as st

from justltl import (
    Acc,
    App,
    Atom,
    Bang,
    Bottom,
    Constant,
    Gen,
    Implies,
    Just,
    Know,
    NAcc,
    Next,
    Always,
    ParseError,
    Query,
    ShiftL,
    ShiftR,
    Sum,
    Until,
    Variable,
    and_,
    diamond_,
    iff_,
    or_,
    parse_formula,
    parse_term,
    propositional_skeleton,
    render,
    render_term,
)
from justltl.syntax import substitute_atoms

H = 3
BOT = Bottom()


class TestParseFormula:
    def test_false_is_bottom(self):
        assert parse_formula("false", H) == BOT

    def test_negation_abbreviation(self):
        assert parse_formula("~p", H) == Implies(Atom("p"), BOT)

    def test_true_abbreviation(self):
        assert parse_formula("true", H) == Implies(BOT, BOT)

    def test_box_access_shape(self):
        f = parse_formula("[x1]_1 G p -> G [acc(x1)]_1 p", H)
        x1 = Variable("x1", 1)
        assert f == Implies(
            Just(x1, 1, Always(Atom("p"))),
            Always(Just(Acc(x1), 1, Atom("p"))),
        )

    def test_derived_connectives_expand(self):
        p, q = Atom("p"), Atom("q")
        assert parse_formula("p | q", H) == or_(p, q)
        assert parse_formula("p & q", H) == and_(p, q)
        assert parse_formula("p <-> q", H) == iff_(p, q)
        assert parse_formula("F p", H) == diamond_(p)

    def test_implication_right_associative(self):
        p, q, r = Atom("p"), Atom("q"), Atom("r")
        assert parse_formula("p -> q -> r", H) == Implies(p, Implies(q, r))

    def test_iff_binds_tighter_than_arrow(self):
        # per the published grammar: impl := iff ("->" impl)?
        p, q, r = Atom("p"), Atom("q"), Atom("r")
        assert parse_formula("p <-> q -> r", H) == Implies(iff_(p, q), r)

    def test_until_right_associative(self):
        p, q, r = Atom("p"), Atom("q"), Atom("r")
        assert parse_formula("p U q U r", H) == Until(p, Until(q, r))

    def test_know_operator(self):
        assert parse_formula("K_2 p", H) == Know(2, Atom("p"))

    def test_agent_out_of_range(self):
        with pytest.raises(ParseError):
            parse_formula("[x1]_4 p", H)
        with pytest.raises(ParseError):
            parse_formula("K_0 p", H)

    def test_syntax_error_carries_position(self):
        with pytest.raises(ParseError) as err:
            parse_formula("p -> (q", H)
        assert err.value.line == 1
        assert err.value.column > 0

    def test_term_arity_misuse(self):
        with pytest.raises(ParseError):
            parse_formula("[acc(x1, x2)]_1 p", H)
        with pytest.raises(ParseError):
            parse_formula("[p]_1 q", H)  # term idents must start with c or x


class TestParseTerm:
    def test_constant(self):
        assert parse_term("c1", 1) == Constant("c1", 1)

    def test_witness_shape(self):
        assert parse_term("shiftl(acc(x1))", 1) == ShiftL(Acc(Variable("x1", 1)))

    def test_boxbox_witness_shape(self):
        t = parse_term("(c1*gen(c2*c3))*x1", 1)
        assert t == App(
            App(Constant("c1", 1), Gen(App(Constant("c2", 1), Constant("c3", 1)))),
            Variable("x1", 1),
        )

    def test_application_left_associative(self):
        t = parse_term("c1*c2*c3", 2)
        assert t == App(App(Constant("c1", 2), Constant("c2", 2)), Constant("c3", 2))

    def test_all_leaves_tagged(self):
        t = parse_term("x1 + ?c2", 2)
        assert t == Sum(Variable("x1", 2), Query(Constant("c2", 2)))


class TestRender:
    def test_bottom(self):
        assert render(BOT) == "false"

    def test_always_atom(self):
        assert render(Always(Atom("p"))) == "G p"

    def test_bang_chain(self):
        f = Just(Bang(Constant("c1", 1)), 1, Just(Constant("c1", 1), 1, Atom("p")))
        assert render(f) == "[!c1]_1 [c1]_1 p"
        assert parse_formula(render(f), H) == f


# hypothesis strategies over the core ASTs


@st.composite
def term_strategy(draw, agent: int):
    leaves = st.sampled_from(
        [Constant("c1", agent), Constant("c2", agent), Variable("x1", agent), Variable("x2", agent)]
    )
    return draw(
        st.recursive(
            leaves,
            lambda kids: st.one_of(
                kids.map(Bang),
                kids.map(Query),
                kids.map(Acc),
                kids.map(Gen),
                kids.map(NAcc),
                kids.map(ShiftR),
                kids.map(ShiftL),
                st.tuples(kids, kids).map(lambda ab: Sum(*ab)),
                st.tuples(kids, kids).map(lambda ab: App(*ab)),
            ),
            max_leaves=5,
        )
    )


@st.composite
def formula_strategy(draw):
    atoms = st.sampled_from([Atom("p"), Atom("q"), Atom("r"), BOT])

    @st.composite
    def just_node(draw_inner, kids):
        agent = draw_inner(st.integers(1, H))
        return Just(draw_inner(term_strategy(agent)), agent, draw_inner(kids))

    def extend(kids):
        return st.one_of(
            st.tuples(kids, kids).map(lambda ab: Implies(*ab)),
            kids.map(Next),
            kids.map(Always),
            st.tuples(kids, kids).map(lambda ab: Until(*ab)),
            just_node(kids),
            st.tuples(st.integers(1, H), kids).map(lambda af: Know(*af)),
        )

    return draw(st.recursive(atoms, extend, max_leaves=8))


@given(formula_strategy())
@settings(max_examples=300, deadline=None)
def test_parse_render_round_trip(f):
    assert parse_formula(render(f), H) == f


@given(st.integers(1, H).flatmap(lambda i: st.tuples(st.just(i), term_strategy(i))))
@settings(max_examples=200, deadline=None)
def test_term_round_trip(pair):
    agent, t = pair
    assert parse_term(render_term(t), agent) == t


@given(formula_strategy())
@settings(max_examples=200, deadline=None)
def test_skeleton_substitution_inverse(f):
    skeleton, assignment = propositional_skeleton(f)
    assert substitute_atoms(skeleton, assignment) == f


class TestSkeleton:
    def test_shared_atom(self):
        f = parse_formula("p -> p", H)
        skeleton, assignment = propositional_skeleton(f)
        assert skeleton == Implies(Atom("A"), Atom("A"))
        assert assignment == {Atom("A"): Atom("p")}

    def test_identical_subformulas_share(self):
        f = parse_formula("[x1]_1 p -> [x1]_1 p", H)
        skeleton, assignment = propositional_skeleton(f)
        assert skeleton == Implies(Atom("A"), Atom("A"))
        assert len(assignment) == 1

    def test_distinct_temporal_heads(self):
        f = Implies(Next(Atom("p")), Always(Atom("p")))
        skeleton, assignment = propositional_skeleton(f)
        assert skeleton == Implies(Atom("A"), Atom("B"))
        assert assignment[Atom("A")] == Next(Atom("p"))
        assert assignment[Atom("B")] == Always(Atom("p"))

    def test_bottom_kept_structural(self):
        skeleton, assignment = propositional_skeleton(parse_formula("~p", H))
        assert skeleton == Implies(Atom("A"), BOT)
