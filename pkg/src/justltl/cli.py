"""Command-line front end.

Exit codes: 0 success / valid, 1 logical failure (proof rejected, formula
invalid, violations found), 2 usage or I/O error.  ``--json`` switches the
report on standard output to a single machine-readable JSON object.
"""

from __future__ import annotations

import argparse
import json
import sys as _sys
from dataclasses import replace
from pathlib import Path

from . import builders, harness, proofs, semantics
from .proofs import (
    ConstantSpecError,
    Derivation,
    DerivationFormatError,
    ExplicitCS,
    SchematicTotalCS,
    SystemId,
    check_derivation,
    format_derivation,
    parse_derivation,
)
from .semantics import Point, SystemFormatError, UniverseError, load_system
from .syntax import ParseError, parse_formula, parse_term, render, render_term


class UsageError(RuntimeError):
    pass


def _system_id(args) -> SystemId:
    principles = frozenset(
        p.strip() for p in (args.principles or "").split(",") if p.strip()
    )
    return SystemId(args.system, principles, getattr(args, "csnec_variant", False))


def _constant_spec(args, sys_id: SystemId):
    spec = getattr(args, "cs", "total") or "total"
    if spec == "total":
        return SchematicTotalCS(sys_id)
    if spec.startswith("file:"):
        path = Path(spec[len("file:") :])
        try:
            entries = json.loads(path.read_text())
        except OSError as exc:
            raise UsageError(f"cannot read constant specification: {exc}") from exc
        parsed = []
        for entry in entries:
            parsed.append(
                (
                    int(entry["agent"]),
                    str(entry["constant"]),
                    parse_formula(entry["formula"], args.agents),
                )
            )
        return ExplicitCS.make(parsed, sys_id)
    raise UsageError(f"--cs must be 'total' or 'file:<path>', got {spec!r}")


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise UsageError(str(exc)) from exc


def _load_system_file(path: str):
    try:
        return load_system(_read(path))
    except (SystemFormatError, ParseError, ValueError) as exc:
        raise UsageError(f"bad system file {path}: {exc}") from exc


def _emit(args, payload: dict, human: str) -> None:
    if args.json:
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print(human)


def _parse_point(text: str) -> Point:
    try:
        run_part, time_part = text.split(":")
        return Point(int(run_part.lstrip("r")), int(time_part))
    except ValueError as exc:
        raise UsageError(f"--at must look like r0:0, got {text!r}") from exc


def _write_or_print(args, d: Derivation) -> None:
    text = format_derivation(d)
    if getattr(args, "output", None):
        Path(args.output).write_text(text)
    elif not args.json:
        print(text, end="")


# -- subcommand handlers (return the exit code) -----------------------------


def _cmd_check_proof(args) -> int:
    sys_id = _system_id(args)
    cs = _constant_spec(args, sys_id) if sys_id.base == "j5ltl" else None
    d = parse_derivation(_read(args.proof), args.agents)
    report = check_derivation(d, sys_id, cs)
    payload = {
        "ok": report.ok,
        "lines": len(d),
        "conclusion": render(d.conclusion),
        "axioms_used": sorted(report.axioms_used),
        "principles_used": sorted(report.principles_used),
        "constants_used": sorted(f"{a}:{c}" for a, c in report.constants_used),
        "first_failure": (
            None
            if report.ok
            else {"line": report.first_failure[0], "reason": report.first_failure[1]}
        ),
    }
    if report.ok:
        _emit(args, payload, f"ok: {len(d)} lines, conclusion {render(d.conclusion)}")
        return 0
    line, reason = report.first_failure
    _emit(args, payload, f"rejected at line {line}: {reason}")
    return 1


def _cmd_internalize(args) -> int:
    needed = (
        builders.THEOREM_PRINCIPLES
        if args.route == "next-access"
        else builders.COROLLARY_PRINCIPLES
    )
    extra = frozenset(p.strip() for p in (args.principles or "").split(",") if p.strip())
    sys_id = SystemId("j5ltl", frozenset(needed) | extra, args.csnec_variant)
    cs = _constant_spec(args, sys_id)
    d = parse_derivation(_read(args.proof), args.agents)
    witness = builders.internalize(d, args.agent, cs, sys_id, route=args.route)
    _write_or_print(args, witness.derivation)
    payload = {
        "term": render_term(witness.term),
        "conclusion": render(witness.conclusion),
        "lines": len(witness.derivation),
    }
    _emit(args, payload, f"term: {render_term(witness.term)}")
    return 0


def _cmd_build_lemma(args) -> int:
    phi = parse_formula(args.formula, args.agents)
    if args.lemma == "always-next":
        d = builders.derive_always_next(phi)
        term = None
    elif args.lemma == "always-always":
        d = builders.derive_always_always(phi)
        term = None
    else:
        if not args.term:
            raise UsageError(f"--term is required for {args.lemma}")
        t = parse_term(args.term, args.agent)
        if args.lemma == "next-access-term":
            witness = builders.derive_next_access_term(t, args.agent, phi)
        else:
            sys_id = proofs.j5ltl_with("generalize")
            witness = builders.derive_boxbox_term(
                t, args.agent, phi, _constant_spec(args, sys_id), sys_id
            )
        d, term = witness.derivation, witness.term
    _write_or_print(args, d)
    payload = {
        "lemma": args.lemma,
        "lines": len(d),
        "conclusion": render(d.conclusion),
        "term": render_term(term) if term is not None else None,
    }
    _emit(args, payload, f"{len(d)} lines, conclusion {render(d.conclusion)}")
    return 0


def _cmd_translate(args) -> int:
    d = parse_derivation(_read(args.proof), args.agents)
    out = builders.translate_std_to_alt(d) if args.to == "alt" else builders.translate_alt_to_std(d)
    _write_or_print(args, out)
    payload = {
        "to": args.to,
        "lines": len(out),
        "conclusion": render(out.conclusion),
    }
    _emit(args, payload, f"{len(out)} lines, conclusion {render(out.conclusion)}")
    return 0


def _cmd_eval(args) -> int:
    system = _load_system_file(args.system_file)
    f = parse_formula(args.formula, system.h)
    point = _parse_point(args.at)
    if not (0 <= point.run < len(system.runs)) or point.time < 0:
        raise UsageError(f"point {args.at} is outside the system's runs")
    value = semantics.eval_formula(system, point, f)
    _emit(args, {"value": value, "formula": render(f), "at": args.at}, str(value).lower())
    return 0 if value else 1


def _cmd_validate(args) -> int:
    system = _load_system_file(args.system_file)
    f = parse_formula(args.formula, system.h)
    bad = semantics.find_counterexample(system, f)
    payload = {
        "valid": bad is None,
        "formula": render(f),
        "counterexample": None if bad is None else str(bad),
    }
    _emit(args, payload, "valid" if bad is None else f"invalid at {bad}")
    return 0 if bad is None else 1


def _cmd_check_system(args) -> int:
    system = _load_system_file(args.system_file)
    sys_id = SystemId("j5ltl", frozenset(proofs.PRINCIPLES))
    cs = _constant_spec(args, sys_id)
    admissible = semantics.check_admissible(system, cs)
    strong = semantics.check_strong(system)
    conditions = {}
    for name in args.condition or []:
        conditions[name] = semantics.check_principle_condition(system, name)
    ok = admissible.ok and strong.ok and all(r.ok for r in conditions.values())
    payload = {
        "ok": ok,
        "admissible": admissible.ok,
        "strong": strong.ok,
        "violations": [
            {"condition": v.condition, "detail": v.detail}
            for v in admissible.violations + strong.violations
        ]
        + [
            {"condition": name, "detail": v.detail}
            for name, rep in conditions.items()
            for v in rep.violations
        ],
    }
    lines = [f"admissible: {admissible.ok}", f"strong evidence: {strong.ok}"]
    lines += [f"condition {name}: {rep.ok}" for name, rep in conditions.items()]
    for v in payload["violations"][:10]:
        lines.append(f"  {v['condition']}: {v['detail']}")
    _emit(args, payload, "\n".join(lines))
    return 0 if ok else 1


def _gen_params(args) -> harness.GenParams:
    return harness.GenParams(
        h=args.agents,
        max_runs=args.max_runs,
        max_prefix=args.max_prefix,
        max_loop=args.max_loop,
        alphabet=args.alphabet,
        rng_seed=args.seed,
        uniform_shape=args.uniform_shape,
    )


def _cmd_fuzz(args) -> int:
    params = _gen_params(args)
    report = harness.fuzz_soundness(params, args.trials)
    payload = {
        "trials": report.trials,
        "instances_checked": report.instances_checked,
        "seed": report.master_seed,
        "violations": [
            {
                "kind": v.kind,
                "formula": v.formula,
                "point": v.point,
                "rng_seed": v.rng_seed,
                "system": v.system,
            }
            for v in report.violations
        ],
        "per_schema": report.per_schema_counts,
    }
    if args.report_dir:
        from .report import write_fuzz_report

        write_fuzz_report(report, args.report_dir)
    _emit(
        args,
        payload,
        f"{report.trials} systems, {report.instances_checked} instances, "
        f"{len(report.violations)} violations",
    )
    return 0 if report.ok else 1


def _cmd_detect(args) -> int:
    if args.system_file:
        profiles = [harness.detect_properties(_load_system_file(args.system_file))]
    else:
        cs = SchematicTotalCS(proofs.J5LTL)
        profiles = []
        for k in range(args.count):
            params = replace(_gen_params(args), rng_seed=args.seed + k)
            profiles.append(harness.detect_properties(harness.gen_strong_system(params, cs)))
    payload = {
        "profiles": [p.to_dict() for p in profiles],
        "summary": {
            "systems": len(profiles),
            "synchronous": sum(p.synchronous for p in profiles),
            "unique_initial": sum(p.unique_initial for p in profiles),
            "perfect_recall_all": sum(all(p.perfect_recall) for p in profiles),
            "no_learning_all": sum(all(p.no_learning) for p in profiles),
        },
    }
    if args.report_dir:
        from .report import write_detect_report

        write_detect_report(profiles, args.report_dir)
    human = "\n".join(
        f"system {k}: {json.dumps(p.to_dict(), sort_keys=True)}" for k, p in enumerate(profiles)
    )
    _emit(args, payload, human)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="justltl",
        description="Temporal justification logic toolkit: parse, check, build, evaluate, fuzz.",
    )
    parser.add_argument("--json", action="store_true", help="machine-readable JSON output")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, with_system=True):
        p.add_argument("--agents", type=int, default=8, help="agent count bound for parsing")
        if with_system:
            p.add_argument(
                "--system", choices=["ltl", "ltl-alt", "j5ltl"], default="j5ltl"
            )
            p.add_argument("--principles", default="", help="comma list of principle names")
            p.add_argument("--csnec-variant", action="store_true")
        p.add_argument("--cs", default="total", help="'total' or 'file:<path>'")

    p = sub.add_parser("check-proof", help="check a derivation file")
    add_common(p)
    p.add_argument("proof")
    p.set_defaults(handler=_cmd_check_proof)

    p = sub.add_parser("internalize", help="lift a derivation to [t]_i form")
    p.add_argument("--agents", type=int, default=8)
    p.add_argument("--agent", type=int, required=True)
    p.add_argument("--route", choices=["next-access", "box-access"], default="next-access")
    p.add_argument("--principles", default="")
    p.add_argument("--csnec-variant", action="store_true")
    p.add_argument("--cs", default="total")
    p.add_argument("-o", "--output", help="write the lifted derivation here")
    p.add_argument("proof")
    p.set_defaults(handler=_cmd_internalize)

    p = sub.add_parser("build-lemma", help="emit a mechanical derivation")
    p.add_argument("--agents", type=int, default=8)
    p.add_argument(
        "--lemma",
        required=True,
        choices=["always-next", "always-always", "next-access-term", "boxbox-term"],
    )
    p.add_argument("--formula", required=True)
    p.add_argument("--term", help="witness argument term (for the term lemmas)")
    p.add_argument("--agent", type=int, default=1)
    p.add_argument("--cs", default="total")
    p.add_argument("-o", "--output")
    p.set_defaults(handler=_cmd_build_lemma)

    p = sub.add_parser("translate", help="translate between the temporal presentations")
    p.add_argument("--agents", type=int, default=8)
    p.add_argument("--to", choices=["alt", "std"], required=True)
    p.add_argument("-o", "--output")
    p.add_argument("proof")
    p.set_defaults(handler=_cmd_translate)

    p = sub.add_parser("eval", help="evaluate a formula at a point")
    p.add_argument("--system-file", required=True)
    p.add_argument("--at", required=True, help="point as r<run>:<time>")
    p.add_argument("formula")
    p.set_defaults(handler=_cmd_eval)

    p = sub.add_parser("validate", help="check validity over all points")
    p.add_argument("--system-file", required=True)
    p.add_argument("formula")
    p.set_defaults(handler=_cmd_validate)

    p = sub.add_parser("check-system", help="admissibility / strong evidence checks")
    p.add_argument("--system-file", required=True)
    p.add_argument("--agents", type=int, default=8)
    p.add_argument("--cs", default="total")
    p.add_argument(
        "--condition",
        action="append",
        choices=list(proofs.PRINCIPLES),
        help="also check this principle's evidence condition (repeatable)",
    )
    p.set_defaults(handler=_cmd_check_system)

    def add_gen(p):
        p.add_argument("--agents", type=int, default=2)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--max-runs", type=int, default=3)
        p.add_argument("--max-prefix", type=int, default=3)
        p.add_argument("--max-loop", type=int, default=3)
        p.add_argument("--alphabet", type=int, default=3)
        p.add_argument("--uniform-shape", action="store_true")
        p.add_argument("--report-dir", help="also write CSV + figure reports here")

    p = sub.add_parser("fuzz", help="soundness fuzz over generated strong systems")
    add_gen(p)
    p.add_argument("--trials", type=int, default=50)
    p.set_defaults(handler=_cmd_fuzz)

    p = sub.add_parser("detect", help="classify run properties")
    add_gen(p)
    p.add_argument("--system-file")
    p.add_argument("--count", type=int, default=20, help="generated systems when no file given")
    p.set_defaults(handler=_cmd_detect)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except (
        UsageError,
        ParseError,
        DerivationFormatError,
        SystemFormatError,
        ConstantSpecError,
        UniverseError,
        builders.BuilderError,
        OSError,
    ) as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
