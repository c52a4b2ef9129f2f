"""Command-line driver: ``ppreflect COMMAND FILE [TERMS] [flags]``.

Commands read their configuration (functor, cone, models, transformations)
from ``query`` blocks in the document; a block named after the command
(hyphens as underscores) overrides the others.  Exit codes: 0 all checks
pass, 1 some check fails, 2 some check is unknown and none fails, 64 usage
or input errors.
"""
from __future__ import annotations

import argparse
import random
import sys
from typing import Sequence

from .completion import (
    Distinct, Equal, NoCanonicalForm, NotConePreserving, check_universal_property, equal, normalize, readback, reflect,
)
from .deduction import Budget, UniverseOracle
from .dsl import ParseError, SpecDocument, TermSyntaxError, load, parse_term
from .eqlz import (
    InvalidEqualizer, build_equalizer_theory, check_instances, check_model_respects, correspondence_eq, cross_check_guards,
    functor_to_partial_algebra, guard_traces_replay, preserves_equalizer,
)
from .fincat import (
    FinFunctor, enumerate_nat_trans, identity_nat, is_equalizer_cone,
    is_product_cone, naturality_failures, opposite, validate_category, validate_functor,
    yoneda_bijection_failures,
)
from .lambek import EmbeddingContext, comparison_iso, yoneda_counterexample
from .msa import IllSorted, SortMismatch, enumerate_terms, render
from .report import EXIT_USAGE, Report
from .theories import InvalidCone, listing, preserves_cones, theory_of_category, theory_of_functor, theory_with_cones

COMMANDS = ("validate", "yoneda-check", "counterexample", "build-theory", "normalize", "equal",
            "adjunction-check", "lambek-demo", "eqlz-demo")

# budget size used when --budget-size is not given
DEFAULT_SIZE = {"adjunction-check": 5, "lambek-demo": 5, "eqlz-demo": 5}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    flags = argparse.ArgumentParser(add_help=False)
    flags.add_argument("--budget-size", type=int, default=None, metavar="N",
                       help="term-size bound for universes and samples")
    flags.add_argument("--budget-iters", type=int, default=10_000, metavar="N",
                       help="merge/iteration bound for saturation")
    flags.add_argument("--engine", choices=("nbe", "saturation"), default="nbe")
    flags.add_argument("--format", choices=("text", "structured"), default="text")
    flags.add_argument("--seed", type=int, default=0, metavar="N", help="seed for sampled terms")
    ap = _Parser(prog="ppreflect", description="Reflection of presheaves into product-preserving ones.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[flags])
        p.add_argument("file", help=".cat specification")
        if name == "normalize":
            p.add_argument("term")
        elif name == "equal":
            p.add_argument("lhs")
            p.add_argument("rhs")
    return ap


# --- configuration helpers -----------------------------------------------------

def _budget(args, command: str) -> Budget:
    size = args.budget_size if args.budget_size is not None else DEFAULT_SIZE.get(command, Budget().size)
    if size < 1 or args.budget_iters < 1:
        raise UsageError("budgets must be positive")
    return Budget(size=size, iterations=args.budget_iters)


def _functor(doc: SpecDocument, cfg: dict) -> FinFunctor:
    if "functor" in cfg:
        name = cfg["functor"][0]
        if name not in doc.functors:
            raise UsageError(f"unknown functor {name!r}")
        return doc.functors[name]
    if not doc.functors:
        raise UsageError("the document declares no functor")
    return list(doc.functors.values())[-1]


def _cones(doc: SpecDocument, F: FinFunctor, cfg: dict):
    cat = doc.category_of(F.name)
    cones = doc.product_cones(cat)
    if "cones" in cfg:
        cones = [c for c in cones if c.name in cfg["cones"]]
    return cones


def _reflect(doc: SpecDocument, args, command: str):
    cfg = doc.config(command)
    F = _functor(doc, cfg)
    return reflect(F.category, _cones(doc, F, cfg), F, mode=args.engine, budget=_budget(args, command))


def _term(text: str, R):
    try:
        return parse_term(text, R.theory.signature)
    except (TermSyntaxError, IllSorted) as exc:
        raise UsageError(f"cannot read term {text!r}: {exc}") from exc


def _context(doc: SpecDocument, args, command: str):
    cfg = doc.config(command)
    cone_name = cfg.get("cone", [None])[0]
    for name, (cat, c) in doc.cones.items():
        if (cone_name is None and not getattr(c, "nullary", True)) or name == cone_name:
            W = doc.categories[cat]
            ctx = EmbeddingContext(opposite(W), tuple(doc.product_cones(cat)), _budget(args, command))
            return ctx, ctx.cone(name)
    raise UsageError("no binary product cone to work with" if cone_name is None else f"unknown cone {cone_name!r}")


# --- commands ----------------------------------------------------------------------

def cmd_validate(doc: SpecDocument, args) -> Report:
    rep = Report(f"validate {args.file}")
    for name, cat in doc.categories.items():
        errs = validate_category(cat)
        rep.add(f"category.{name}", not errs, [str(e) for e in errs[:5]] or None,
                objects=len(cat.objects), morphisms=len(cat.morphisms))
    for name, (cat, c) in doc.cones.items():
        check = is_equalizer_cone if hasattr(c, "e") else is_product_cone
        ok, w = check(doc.categories[cat], c)
        rep.add(f"cone.{name}", ok, w)
    for name, F in doc.functors.items():
        errs = validate_functor(F)
        rep.add(f"functor.{name}", not errs, errs[:5] or None)
    for name, a in doc.nats.items():
        bad = naturality_failures(a)
        rep.add(f"nat.{name}", not bad, bad[:5] or None)
    return rep


def cmd_yoneda_check(doc: SpecDocument, args) -> Report:
    rep = Report(f"Yoneda bijections in {args.file}")
    for name, F in doc.functors.items():
        if validate_functor(F):
            rep.add(f"{name}", False, "not a functor")
            continue
        for a in F.category.objects:
            bad = yoneda_bijection_failures(F, a)
            rep.add(f"{name}.{a}", not bad, bad[:3] or None, size=len(F.carriers[a]))
    return rep


def cmd_counterexample(doc: SpecDocument, args) -> Report:
    ctx, cone = _context(doc, args, "counterexample")
    if cone.left != cone.right:
        raise UsageError(f"cone {cone.name} is not of the form I + I")
    return yoneda_counterexample(ctx, cone.left)


def cmd_build_theory(doc: SpecDocument, args) -> Report:
    rep = Report(f"theories of {args.file}")
    cfg = doc.config("build-theory")
    for name, cat in doc.categories.items():
        th = theory_of_category(cat)
        n_eq = len(cat.objects) + sum(1 for _ in cat.composable())
        rep.add(f"{name}.category", len(th.signature.symbols) == len(cat.morphisms) and len(th.equations) == n_eq,
                {"symbols": len(th.signature.symbols), "equations": len(th.equations)}
                if len(th.equations) != n_eq else None,
                sorts=len(th.signature.sorts), symbols=len(th.signature.symbols), equations=len(th.equations))
        cones = doc.product_cones(name)
        if cones:
            ct = theory_with_cones(cat, cones)
            added = sum(1 if c.nullary else 3 for c in cones)
            rep.add(f"{name}.cones", len(ct.equations) == n_eq + added, None if len(ct.equations) == n_eq + added
                    else {"equations": len(ct.equations)}, symbols=len(ct.signature.symbols), equations=len(ct.equations))
    if doc.functors:
        F = _functor(doc, cfg)
        cat = F.category
        ft = theory_of_functor(cat, _cones(doc, F, cfg), F)
        n_const = sum(len(F.carriers[a]) for a in cat.objects)
        n_new = sum(len(F.carriers[cat.dom[m]]) for m in cat.morphisms)
        ok = len(ft.constants) == n_const and len(ft.equations) - len(theory_with_cones(cat, ft.cones).equations) == n_new
        rep.add(f"functor.{F.name}", ok, None if ok else "constant or equation count mismatch",
                constants=len(ft.constants), symbols=len(ft.signature.symbols), equations=len(ft.equations))
        rep.appendix = [f"theory of {F.name}:", *listing(ft).splitlines()]
    return rep


def cmd_normalize(doc: SpecDocument, args) -> Report:
    R = _reflect(doc, args, "normalize")
    t = _term(args.term, R)
    rep = Report(f"normalize {render(t)}")
    try:
        nf = readback(R, normalize(R, t)) if R.engine() == "nbe" else None
    except NoCanonicalForm as exc:
        nf = None
        reason = str(exc)
    else:
        reason = None if nf is not None else R.normalizer.problem or "saturation engine selected"
    if nf is None:
        rep.add("normal_form", None, None, R.budget.record(), term=render(t), reason=reason)
    else:
        rep.add("normal_form", True, None, R.budget.record(), term=render(t), normal_form=render(nf), sort=t.sort)
    return rep


def cmd_equal(doc: SpecDocument, args) -> Report:
    R = _reflect(doc, args, "equal")
    s, t = _term(args.lhs, R), _term(args.rhs, R)
    try:
        res = equal(R, s, t)
    except SortMismatch as exc:
        raise UsageError(str(exc)) from exc
    rec = res.record()
    rep = Report(f"equal {render(s)} {render(t)}")
    if isinstance(res, Equal):
        rep.add("equal", True, None, rec["budget"], **{k: v for k, v in rec.items() if k != "budget"})
    elif isinstance(res, Distinct):
        rep.add("equal", False, rec["separator"], rec["budget"],
                **{k: v for k, v in rec.items() if k not in ("budget", "separator")})
    else:
        rep.add("equal", None, None, rec["budget"], **{k: v for k, v in rec.items() if k != "budget"})
    return rep


def _proved_pairs(R, size: int, budget: Budget, count: int, rng: random.Random):
    th = R.theory
    oracle = UniverseOracle(th.signature, th.equations, Budget(size=size, iterations=budget.iterations))
    pairs = []
    for members in oracle.graph.classes():
        rep = min(members, key=lambda u: (u.size, render(u)))
        pairs += [(rep, u) for u in members if u is not rep]
    pairs.sort(key=lambda p: (render(p[0]), render(p[1])))
    if len(pairs) > count:
        pairs = rng.sample(pairs, count)
    return pairs, oracle


def cmd_adjunction_check(doc: SpecDocument, args) -> Report:
    cfg = doc.config("adjunction-check")
    R = _reflect(doc, args, "adjunction-check")
    F = R.functor
    budget = R.budget
    rng = random.Random(args.seed)
    pool = [t for a in F.category.objects for t in enumerate_terms(R.theory.signature, a, budget.size)]
    samples = pool if len(pool) <= 400 else rng.sample(pool, 400)
    pairs, oracle = _proved_pairs(R, budget.size, budget, 200, rng)
    rep = Report(f"adjunction check for {F.name}")
    rep.add("proved_pairs", True if len(pairs) >= 200 else None, None, oracle.budget.record(),
            pairs=len(pairs), truncated=oracle.truncated)
    models = cfg.get("models") or [n for n, G in doc.functors.items()
                                   if G.category is F.category and preserves_cones(G, R.cones)[0]]
    chosen = {n: doc.nats[n] for n in cfg.get("nats", []) if n in doc.nats}
    for name in models:
        G = doc.functors.get(name)
        if G is None:
            raise UsageError(f"unknown model {name!r}")
        ok, w = preserves_cones(G, R.cones)
        if not ok:
            rep.add(f"{name}.preserves_cones", False, w)
            continue
        gammas = [a for a in chosen.values() if a.target is G] or enumerate_nat_trans(F, G, limit=16)
        if not gammas:
            rep.add(f"{name}.transformations", None, None, count=0)
        for i, gamma in enumerate(gammas):
            sub = check_universal_property(R, G, gamma, samples, pairs)
            rep.extend(sub, prefix=f"{name}.{i}.")
    return rep


def cmd_lambek_demo(doc: SpecDocument, args) -> Report:
    ctx, cone = _context(doc, args, "lambek-demo")
    ci = comparison_iso(ctx, cone, mode=args.engine)
    return ci.report


def cmd_eqlz_demo(doc: SpecDocument, args) -> Report:
    budget = _budget(args, "eqlz-demo")
    found = [(n, doc.equalizer_cones(n)) for n in doc.categories if doc.equalizer_cones(n)]
    if not found:
        raise UsageError("the document declares no equalizer")
    catname, eqs = found[0]
    cat = doc.categories[catname]
    cones = doc.product_cones(catname)
    functors = [F for F in doc.functors.values() if F.category is cat]
    models = [(G, identity_nat(G)) for G in functors
              if all(preserves_equalizer(G, c)[0] for c in eqs) and preserves_cones(G, cones)[0]]
    rep = Report(f"equalizer theory of {catname}")
    et = build_equalizer_theory(cat, eqs, None, cones, budget)
    rep.add("generic.fixpoint", True if et.converged else None, None, budget.record(), rounds=et.transcript())
    rep.extend(cross_check_guards(et), prefix="generic.")
    for F in functors:
        et = build_equalizer_theory(cat, eqs, F, cones, budget)
        p = f"{F.name}."
        rep.add(p + "fixpoint", True if et.converged else None, None, budget.record(), rounds=et.transcript())
        bad = guard_traces_replay(et)
        rep.add(p + "guard_replay", not bad, bad[:3] or None, guards=len(et.guard_traces))
        usable = [(G, g) for G, g in models if G is F]
        rep.extend(cross_check_guards(et, usable), prefix=p)
        for G, g in usable:
            rep.extend(check_model_respects(et, G, g), prefix=p)
        rep.extend(correspondence_eq(F, et), prefix=p)
        inst = check_instances(et, functor_to_partial_algebra(F, et))
        preserves = all(preserves_equalizer(F, c)[0] for c in eqs)
        witness = next((r.witness for r in inst.records if r.verdict == "fail"), None)
        agree = inst.passed == preserves
        rep.add(p + "instances", agree, None if agree else {"instances_hold": inst.passed, "preserves": preserves},
                preserves=preserves, instances_hold=inst.passed, instance_witness=witness)
    return rep


HANDLERS = {
    "validate": cmd_validate, "yoneda-check": cmd_yoneda_check, "counterexample": cmd_counterexample,
    "build-theory": cmd_build_theory, "normalize": cmd_normalize, "equal": cmd_equal,
    "adjunction-check": cmd_adjunction_check, "lambek-demo": cmd_lambek_demo, "eqlz-demo": cmd_eqlz_demo,
}


def run(command: str, doc: SpecDocument, args) -> Report:
    return HANDLERS[command](doc, args)


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        doc = load(args.file)
    except OSError as exc:
        print(f"ppreflect: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ParseError as exc:
        for d in exc.diagnostics:
            print(f"{args.file}:{d}", file=sys.stderr)
        return EXIT_USAGE
    try:
        rep = run(args.command, doc, args)
    except (UsageError, KeyError, ValueError, InvalidCone, InvalidEqualizer, NotConePreserving) as exc:
        # bad configuration or input data rather than a failed check
        print(f"ppreflect: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print(rep.structured() if args.format == "structured" else rep.text())
    return rep.exit_code()


if __name__ == "__main__":
    sys.exit(main())
