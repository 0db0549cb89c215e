"""Mechanical constructors of checker-verifiable derivations.

Each builder returns a derivation that passes ``check_derivation`` in its
declared system; the checker is the correctness oracle for everything here.
Steps the source arguments justify "by propositional reasoning" are emitted
as one tautology line plus a modus-ponens chain (``DerivationBuilder.prop_mp``).
"""

from __future__ import annotations

from dataclasses import dataclass

from .proofs import (
    ConstantSpec,
    ConstantSpecError,
    Derivation,
    DerivationBuilder,
    LTL,
    LTL_ALT,
    SystemId,
    check_derivation,
    j5ltl_with,
)
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
    ShiftL,
    Term,
    Until,
    and_,
    contains_know,
    iff_,
    not_,
    or_,
    render,
    true_,
)


class BuilderError(RuntimeError):
    pass


class PrincipleConfigError(BuilderError):
    """A builder was asked to run without its required connecting principles."""


class UnsupportedRuleError(BuilderError):
    pass


@dataclass(frozen=True)
class TermWitness:
    term: Term
    derivation: Derivation
    conclusion: Formula


def _require_know_free(f: Formula) -> None:
    if contains_know(f):
        raise BuilderError("builders operate on the proof language; K_i is not allowed")


def _require_principles(sys: SystemId, *needed: str) -> None:
    missing = [p for p in needed if p not in sys.principles]
    if missing:
        raise PrincipleConfigError(f"system must enable principles {missing}")


# ---------------------------------------------------------------------------
# Purely temporal lemmas


def _always_next_fragment(b: DerivationBuilder, phi: Formula) -> int:
    """Emit lines deriving G phi -> X phi; returns the final line index."""
    gp = Always(phi)
    mix = b.axiom(Implies(gp, and_(phi, Next(gp))), "mix")
    e1 = b.prop_mp(Implies(gp, phi), mix)
    n = b.nec_next(e1)
    k = b.axiom(Implies(Next(Implies(gp, phi)), Implies(Next(gp), Next(phi))), "k-next")
    e3 = b.mp(n, k)
    return b.prop_mp(Implies(gp, Next(phi)), mix, e3)


def derive_always_next(phi: Formula) -> Derivation:
    """A derivation of G phi -> X phi, valid in ltl."""
    _require_know_free(phi)
    b = DerivationBuilder()
    _always_next_fragment(b, phi)
    return b.build()


def derive_always_always(phi: Formula) -> Derivation:
    """A derivation of G phi -> G G phi, valid in ltl."""
    _require_know_free(phi)
    b = DerivationBuilder()
    gp = Always(phi)
    mix = b.axiom(Implies(gp, and_(phi, Next(gp))), "mix")
    e2 = b.prop_mp(Implies(gp, Next(gp)), mix)
    g = b.nec_always(e2)
    ind = b.axiom(
        Implies(Always(Implies(gp, Next(gp))), Implies(gp, Always(gp))), "ind"
    )
    b.mp(g, ind)
    return b.build()


# ---------------------------------------------------------------------------
# Term-witness lemmas


def _next_access_fragment(b: DerivationBuilder, t: Term, i: int, phi: Formula) -> int:
    """Emit [t]_i G phi -> [shiftl(acc(t))]_i X phi; returns the line index."""
    psi = Just(Acc(t), i, phi)
    lemma = _always_next_fragment(b, psi)
    ba = b.axiom(Implies(Just(t, i, Always(phi)), Always(psi)), "box-access")
    nl = b.axiom(Implies(Next(psi), Just(ShiftL(Acc(t)), i, Next(phi))), "next-left")
    target = Implies(Just(t, i, Always(phi)), Just(ShiftL(Acc(t)), i, Next(phi)))
    return b.prop_mp(target, ba, lemma, nl)


def derive_next_access_term(
    t: Term, i: int, phi: Formula, sys: SystemId | None = None
) -> TermWitness:
    """Witness term shiftl(acc(t)) with a derivation of
    [t]_i G phi -> [shiftl(acc(t))]_i X phi, combining the box-access and
    next-left principles with the G-to-X lemma."""
    _require_know_free(phi)
    sys = sys if sys is not None else j5ltl_with("box-access", "next-left")
    _require_principles(sys, "box-access", "next-left")
    b = DerivationBuilder()
    final = _next_access_fragment(b, t, i, phi)
    d = b.build()
    return TermWitness(ShiftL(Acc(t)), d, b.formula_at(final))


def _constant(cs: ConstantSpec, i: int, f: Formula, role: str) -> str:
    try:
        return cs.constant_for(i, f)
    except ConstantSpecError as exc:
        raise ConstantSpecError(
            f"constant specification is not appropriate for the {role} instance "
            f"{render(f)}: {exc}"
        ) from exc


def derive_boxbox_term(
    t: Term,
    i: int,
    phi: Formula,
    cs: ConstantSpec,
    sys: SystemId | None = None,
) -> TermWitness:
    """Witness term (c_ind * gen(c_prop * c_mix)) * t with a derivation of
    [t]_i G phi -> [..]_i G G phi, using the generalize principle and an
    axiomatically appropriate constant specification."""
    _require_know_free(phi)
    sys = sys if sys is not None else j5ltl_with("generalize")
    _require_principles(sys, "generalize")
    gp = Always(phi)
    f_mix = Implies(gp, and_(phi, Next(gp)))
    step = Implies(gp, Next(gp))
    f_prop = Implies(f_mix, step)
    f_ind = Implies(Always(step), Implies(gp, Always(gp)))
    c_ind = Constant(_constant(cs, i, f_ind, "ind"), i)
    c_prop = Constant(_constant(cs, i, f_prop, "propositional"), i)
    c_mix = Constant(_constant(cs, i, f_mix, "mix"), i)

    b = DerivationBuilder()
    l_prop = b.csnec(Just(c_prop, i, f_prop))
    l_mix = b.csnec(Just(c_mix, i, f_mix))
    inner = App(c_prop, c_mix)
    a1 = b.axiom(
        Implies(Just(c_prop, i, f_prop), Implies(Just(c_mix, i, f_mix), Just(inner, i, step))),
        "app",
    )
    m1 = b.mp(l_prop, a1)
    l_step = b.mp(l_mix, m1)
    g = b.nec_always(l_step)
    gen_t = Gen(inner)
    a2 = b.axiom(Implies(Always(Just(inner, i, step)), Just(gen_t, i, Always(step))), "generalize")
    l_gen = b.mp(g, a2)
    l_ind = b.csnec(Just(c_ind, i, f_ind))
    mid = App(c_ind, gen_t)
    a3 = b.axiom(
        Implies(
            Just(c_ind, i, f_ind),
            Implies(Just(gen_t, i, Always(step)), Just(mid, i, Implies(gp, Always(gp)))),
        ),
        "app",
    )
    m2 = b.mp(l_ind, a3)
    l_mid = b.mp(l_gen, m2)
    witness = App(mid, t)
    a4 = b.axiom(
        Implies(
            Just(mid, i, Implies(gp, Always(gp))),
            Implies(Just(t, i, gp), Just(witness, i, Always(gp))),
        ),
        "app",
    )
    final = b.mp(l_mid, a4)
    return TermWitness(witness, b.build(), b.formula_at(final))


# ---------------------------------------------------------------------------
# Internalization

THEOREM_PRINCIPLES = ("generalize", "next-access")
COROLLARY_PRINCIPLES = ("generalize", "box-access", "next-left")


class InternalizeError(BuilderError):
    pass


def internalize(
    d: Derivation,
    i: int,
    cs: ConstantSpec,
    sys: SystemId | None = None,
    route: str = "next-access",
) -> TermWitness:
    """Lift a derivation of phi into one of [t]_i phi for a constructed term t.

    The term records the proof structure: an axiom becomes its certifying
    constant, modus ponens becomes application, csnec becomes ``!c``, necG
    becomes ``gen``, and necX becomes ``nacc(gen(..))`` (or, on the
    ``box-access`` route, ``shiftl(acc(gen(..)))``).
    """
    if route not in ("next-access", "box-access"):
        raise ValueError(f"unknown internalization route {route!r}")
    needed = THEOREM_PRINCIPLES if route == "next-access" else COROLLARY_PRINCIPLES
    sys = sys if sys is not None else j5ltl_with(*needed)
    _require_principles(sys, *needed)
    for ln in d.lines:
        if ln.just.rule == "uind":
            raise UnsupportedRuleError(
                "the until-induction rule is outside the internalization theorem"
            )
    report = check_derivation(d, sys, cs)
    if not report.ok:
        raise InternalizeError(
            f"input does not check in the internalization system: line "
            f"{report.first_failure[0]}: {report.first_failure[1]}"
        )

    b = DerivationBuilder()
    lifted: dict[int, tuple[Term, int]] = {}  # src index -> (term, out line of [term]f)

    def lift_nec_always(src_ref: int) -> tuple[Term, int]:
        s, out = lifted[src_ref]
        body = d_formulas[src_ref]
        g = b.nec_always(out)
        a = b.axiom(Implies(Always(Just(s, i, body)), Just(Gen(s), i, Always(body))), "generalize")
        return Gen(s), b.mp(g, a)

    d_formulas = {ln.index: ln.formula for ln in d.lines}

    for ln in d.lines:
        f, just = ln.formula, ln.just
        if just.rule == "axiom":
            c = Constant(_constant(cs, i, f, just.name), i)
            out = b.csnec(Just(c, i, f))
            lifted[ln.index] = (c, out)
        elif just.rule == "mp":
            j, k = just.refs
            s_arg, out_arg = lifted[j]
            s_impl, out_impl = lifted[k]
            term = App(s_impl, s_arg)
            a = b.axiom(
                Implies(
                    Just(s_impl, i, d_formulas[k]),
                    Implies(Just(s_arg, i, d_formulas[j]), Just(term, i, f)),
                ),
                "app",
            )
            m = b.mp(out_impl, a)
            lifted[ln.index] = (term, b.mp(out_arg, m))
        elif just.rule == "csnec":
            if f.agent != i:
                raise InternalizeError(
                    f"line {ln.index} introduces a constant for agent {f.agent}; "
                    f"internalization is supported for the target agent {i} only"
                )
            base = b.csnec(f)
            term = Bang(f.term)
            a = b.axiom(Implies(f, Just(term, i, f)), "pos-intro")
            lifted[ln.index] = (term, b.mp(base, a))
        elif just.rule == "necG":
            lifted[ln.index] = lift_nec_always(just.refs[0])
        elif just.rule == "necX":
            (ref,) = just.refs
            body = d_formulas[ref]
            gen_term, gen_out = lift_nec_always(ref)
            if route == "next-access":
                term = NAcc(gen_term)
                a = b.axiom(
                    Implies(Just(gen_term, i, Always(body)), Just(term, i, Next(body))),
                    "next-access",
                )
                lifted[ln.index] = (term, b.mp(gen_out, a))
            else:
                term = ShiftL(Acc(gen_term))
                frag = _next_access_fragment(b, gen_term, i, body)
                lifted[ln.index] = (term, b.mp(gen_out, frag))
        else:  # pragma: no cover - checker already rejected unknown rules
            raise UnsupportedRuleError(f"rule {just.rule!r} cannot be internalized")

    term, _ = lifted[d.lines[-1].index]
    out = b.build()
    return TermWitness(term, out, out.conclusion)


# ---------------------------------------------------------------------------
# Translation between the two temporal presentations

TT = true_()


class TranslationError(BuilderError):
    pass


def expand_always(f: Formula) -> Formula:
    """Rewrite every G subformula to its until-defined form ~(true U ~..)."""
    if isinstance(f, (Bottom, Atom)):
        return f
    if isinstance(f, Implies):
        return Implies(expand_always(f.left), expand_always(f.right))
    if isinstance(f, Next):
        return Next(expand_always(f.arg))
    if isinstance(f, Always):
        return not_(Until(TT, not_(expand_always(f.arg))))
    if isinstance(f, Until):
        return Until(expand_always(f.left), expand_always(f.right))
    if isinstance(f, Just):
        return Just(f.term, f.agent, expand_always(f.body))
    if isinstance(f, Know):
        return Know(f.agent, expand_always(f.body))
    raise TypeError(f"unknown formula node {f!r}")


def _boxed(f: Formula) -> Formula:
    return not_(Until(TT, not_(f)))


def _x_combine(b: DerivationBuilder, a: Formula, c: Formula) -> int:
    """Emit X a -> (X c -> X (a & c)) in ltl-alt; returns the line index."""
    conj = and_(a, c)
    t = b.taut(Implies(a, Implies(c, conj)))
    n = b.nec_next(t)
    k1 = b.axiom(
        Implies(Next(Implies(a, Implies(c, conj))), Implies(Next(a), Next(Implies(c, conj)))),
        "k-next",
    )
    m1 = b.mp(n, k1)
    k2 = b.axiom(Implies(Next(Implies(c, conj)), Implies(Next(c), Next(conj))), "k-next")
    return b.prop_mp(Implies(Next(a), Implies(Next(c), Next(conj))), m1, k2)


def _u2_instance(left: Formula, right: Formula) -> Formula:
    u = Until(left, right)
    return iff_(u, or_(right, and_(left, Next(u))))


def _fun_instance(f: Formula) -> Formula:
    return iff_(Next(not_(f)), not_(Next(f)))


def _alt_mix(b: DerivationBuilder, phi: Formula) -> int:
    """Emit B phi -> (phi & X B phi) in ltl-alt, B being the defined box."""
    u = Until(TT, not_(phi))
    bphi = not_(u)
    u2 = b.axiom(_u2_instance(TT, not_(phi)), "u2")
    fun = b.axiom(_fun_instance(u), "fun")
    return b.prop_mp(Implies(bphi, and_(phi, Next(bphi))), u2, fun)


def _alt_u1(b: DerivationBuilder, phi: Formula, psi: Formula) -> int:
    """Emit (phi U psi) -> ~~(true U ~~psi), the expansion image of u1."""
    u = Until(TT, not_(not_(psi)))
    chi = not_(u)
    u2 = b.axiom(_u2_instance(TT, not_(not_(psi))), "u2")
    fun = b.axiom(_fun_instance(u), "fun")
    premise = b.prop_mp(Implies(chi, and_(not_(psi), Next(chi))), u2, fun)
    uind = b.until_ind(premise, phi)
    return b.prop_mp(Implies(Until(phi, psi), not_(chi)), uind)


def _alt_gk(b: DerivationBuilder, phi: Formula, psi: Formula) -> int:
    """Emit B(phi -> psi) -> (B phi -> B psi) in ltl-alt."""
    bphi, bpsi, bimp = _boxed(phi), _boxed(psi), _boxed(Implies(phi, psi))
    chi = and_(bphi, bimp)
    m1 = _alt_mix(b, phi)
    m2 = _alt_mix(b, Implies(phi, psi))
    xc = _x_combine(b, bphi, bimp)
    premise = b.prop_mp(Implies(chi, and_(not_(not_(psi)), Next(chi))), m1, m2, xc)
    uind = b.until_ind(premise, TT)
    return b.prop_mp(Implies(bimp, Implies(bphi, bpsi)), uind)


def _alt_ind(b: DerivationBuilder, phi: Formula) -> int:
    """Emit B(phi -> X phi) -> (phi -> B phi) in ltl-alt."""
    bstep = _boxed(Implies(phi, Next(phi)))
    bphi = _boxed(phi)
    chi = and_(phi, bstep)
    m = _alt_mix(b, Implies(phi, Next(phi)))
    xc = _x_combine(b, phi, bstep)
    premise = b.prop_mp(Implies(chi, and_(not_(not_(phi)), Next(chi))), m, xc)
    uind = b.until_ind(premise, TT)
    return b.prop_mp(Implies(bstep, Implies(phi, bphi)), uind)


def _alt_nec_always(b: DerivationBuilder, phi_line: int) -> int:
    """From an ltl-alt line proving phi, emit B phi."""
    phi = b.formula_at(phi_line)
    t = b.taut(TT)
    xt = b.nec_next(t)
    premise = b.prop_mp(Implies(TT, and_(not_(not_(phi)), Next(TT))), phi_line, xt)
    uind = b.until_ind(premise, TT)
    return b.mp(t, uind)


def translate_std_to_alt(d: Derivation) -> Derivation:
    """Translate an ltl derivation into an ltl-alt derivation of the
    G-expanded conclusion, macro-expanding mix/k-always/ind/u1 and necG."""
    report = check_derivation(d, LTL)
    if not report.ok:
        raise TranslationError(
            f"input does not check in ltl: line {report.first_failure[0]}: "
            f"{report.first_failure[1]}"
        )
    b = DerivationBuilder()
    out: dict[int, int] = {}
    for ln in d.lines:
        f = expand_always(ln.formula)
        just = ln.just
        if just.rule == "axiom":
            name = just.name
            if name in ("prop", "k-next", "fun", "u2"):
                idx = b.axiom(f, name)
            elif name == "mix":
                idx = _alt_mix(b, expand_always(ln.formula.left.arg))
            elif name == "k-always":
                inner = ln.formula.left.arg
                idx = _alt_gk(b, expand_always(inner.left), expand_always(inner.right))
            elif name == "ind":
                idx = _alt_ind(b, expand_always(ln.formula.left.arg.left))
            elif name == "u1":
                until = ln.formula.left
                idx = _alt_u1(b, expand_always(until.left), expand_always(until.right))
            else:  # pragma: no cover - ltl has no further axioms
                raise TranslationError(f"axiom {name!r} has no ltl-alt expansion")
            if b.formula_at(idx) != f:
                raise AssertionError(f"fragment for {name} missed its target: {render(f)}")
        elif just.rule == "mp":
            idx = b.mp(out[just.refs[0]], out[just.refs[1]])
        elif just.rule == "necX":
            idx = b.nec_next(out[just.refs[0]])
        elif just.rule == "necG":
            idx = _alt_nec_always(b, out[just.refs[0]])
        else:  # pragma: no cover - ltl has no further rules
            raise TranslationError(f"rule {just.rule!r} has no ltl-alt expansion")
        out[ln.index] = idx
    return b.build()


def _ltl_uind(b: DerivationBuilder, premise_idx: int, until_left: Formula) -> int:
    """Expand one until-induction step inside an ltl derivation."""
    premise = b.formula_at(premise_idx)
    chi = premise.left
    neg_psi = premise.right.left.left.left.left  # first conjunct of the and_ layout
    psi = neg_psi.left
    l1 = b.prop_mp(Implies(chi, Next(chi)), premise_idx)
    l2 = b.prop_mp(Implies(chi, not_(psi)), premise_idx)
    g1 = b.nec_always(l1)
    ind = b.axiom(
        Implies(Always(Implies(chi, Next(chi))), Implies(chi, Always(chi))), "ind"
    )
    l3 = b.mp(g1, ind)
    g2 = b.nec_always(l2)
    gk = b.axiom(
        Implies(Always(Implies(chi, not_(psi))), Implies(Always(chi), Always(not_(psi)))),
        "k-always",
    )
    l4 = b.mp(g2, gk)
    l5 = b.prop_mp(Implies(chi, Always(not_(psi))), l3, l4)
    u1 = b.axiom(Implies(Until(until_left, psi), not_(Always(not_(psi)))), "u1")
    return b.prop_mp(Implies(chi, not_(Until(until_left, psi))), l5, u1)


def translate_alt_to_std(d: Derivation) -> Derivation:
    """Translate an ltl-alt derivation into an ltl derivation of the same
    conclusion, expanding each until-induction step via the derivable rules."""
    report = check_derivation(d, LTL_ALT)
    if not report.ok:
        raise TranslationError(
            f"input does not check in ltl-alt: line {report.first_failure[0]}: "
            f"{report.first_failure[1]}"
        )
    b = DerivationBuilder()
    out: dict[int, int] = {}
    for ln in d.lines:
        just = ln.just
        if just.rule == "axiom":
            idx = b.axiom(ln.formula, just.name)
        elif just.rule == "mp":
            idx = b.mp(out[just.refs[0]], out[just.refs[1]])
        elif just.rule == "necX":
            idx = b.nec_next(out[just.refs[0]])
        elif just.rule == "uind":
            until_left = ln.formula.right.left.left
            idx = _ltl_uind(b, out[just.refs[0]], until_left)
            if b.formula_at(idx) != ln.formula:
                raise AssertionError("until-induction expansion missed its target")
        else:  # pragma: no cover - ltl-alt has no further rules
            raise TranslationError(f"rule {just.rule!r} has no ltl expansion")
        out[ln.index] = idx
    return b.build()
