"""Toolkit for a multi-agent justification logic with linear-time operators.

Parse the language, check Hilbert-style derivations, construct derivations
mechanically (including internalized proof terms), evaluate formulas on
interpreted systems with evidence functions, and property-test soundness.
"""

from .builders import (
    BuilderError,
    InternalizeError,
    PrincipleConfigError,
    TermWitness,
    TranslationError,
    UnsupportedRuleError,
    derive_always_always,
    derive_always_next,
    derive_boxbox_term,
    derive_next_access_term,
    expand_always,
    internalize,
    translate_alt_to_std,
    translate_std_to_alt,
)
from .harness import (
    FuzzReport,
    GenParams,
    KTReport,
    PropertyProfile,
    check_kt_principles,
    detect_properties,
    flss,
    fuzz_soundness,
    gen_strong_system,
    kt_instance,
    lss,
    schema_instances,
)
from .proofs import (
    CheckReport,
    ConstantSpecError,
    Derivation,
    DerivationBuilder,
    DerivationFormatError,
    ExplicitCS,
    J5LTL,
    LTL,
    LTL_ALT,
    Line,
    PRINCIPLES,
    SchematicTotalCS,
    SystemId,
    TautologyCapError,
    check_derivation,
    cs_lookup,
    format_derivation,
    is_tautology,
    j5ltl_with,
    match_axiom,
    parse_derivation,
)
from .semantics import (
    EvidenceReport,
    InterpretedSystem,
    LassoRun,
    Point,
    SystemFormatError,
    Universe,
    UniverseError,
    check_admissible,
    check_principle_condition,
    check_strong,
    close_evidence,
    eval_formula,
    find_counterexample,
    indistinguishable,
    is_valid,
    load_system,
    make_universe,
    save_system,
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
    ParseError,
    Query,
    ShiftL,
    ShiftR,
    Sum,
    Term,
    Until,
    Variable,
    and_,
    diamond_,
    iff_,
    not_,
    or_,
    parse_formula,
    parse_term,
    propositional_skeleton,
    render,
    render_term,
    subformulas,
    subterms,
    term_agent,
    true_,
    validate_formula,
)

__version__ = "0.1.0"
