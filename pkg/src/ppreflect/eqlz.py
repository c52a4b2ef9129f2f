"""Equalizer theories: a partial ``eql : A -> E`` per equalizer ``E -e-> A =f,g=> B``.

``eql(t)`` is a term only when ``f(t) ≈ g(t)`` is derivable, and what is
derivable depends on which ``eql`` terms exist.  :func:`build_equalizer_theory`
computes this pair by alternating rounds over a size-bounded universe:

1. the typable terms: everything built from the base signature, plus
   ``eql(t)`` for each ``t`` admitted by the previous round;
2. the derivable equalities: congruence closure over those terms with the
   base equations, ``e(eql(y)) ≈ y`` and ``x ≈ eql(e(x))``;
3. admit every ``t`` with ``f(t)`` and ``g(t)`` in one class.

Rounds stop when nothing new is admitted.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Sequence

from .deduction import Budget, Proved, Trace, UniverseOracle, Unknown, replay
from .fincat import EqualizerCone, FinCategory, FinFunctor, NatTrans, ProductCone, elem_name, is_equalizer_cone
from .msa import (
    App, Equation, FinAlgebra, FunctionSymbol, Signature, Term, Var, _compositions, render,
)
from .report import Report
from .theories import (
    ConeTheory, FunctorTheory, algebra_to_functor, functor_to_algebra, preserves_cones,
    theory_of_functor, theory_with_cones,
)

__all__ = [
    "InvalidEqualizer", "Round", "EssentialTheory", "build_equalizer_theory",
    "preserves_equalizer", "functor_to_partial_algebra", "partial_algebra_check",
    "check_instances", "correspondence_eq", "eval_in_model", "check_model_respects", "guard_traces_replay",
    "cross_check_guards",
]


class InvalidEqualizer(Exception):
    pass


@dataclass
class Round:
    index: int
    typable: int
    admitted: int
    new: int
    classes: int
    merges: int

    def as_dict(self) -> dict:
        return {"round": self.index, "typable": self.typable, "admitted": self.admitted,
                "new": self.new, "classes": self.classes, "merges": self.merges}


@dataclass
class EssentialTheory:
    base: ConeTheory
    eq_cones: tuple[EqualizerCone, ...]
    eql_symbols: dict[str, FunctionSymbol]
    signature: Signature
    equations: tuple[Equation, ...]
    budget: Budget
    variables: tuple[Var, ...] = ()
    rounds: list[Round] = field(default_factory=list)
    admitted: dict[str, frozenset[Term]] = field(default_factory=dict)
    typable: tuple[Term, ...] = ()
    guard_traces: dict[Term, Trace] = field(default_factory=dict)
    oracle: UniverseOracle | None = None
    converged: bool = False
    truncated: bool = False

    @property
    def category(self) -> FinCategory:
        return self.base.category

    def cone(self, name: str) -> EqualizerCone:
        for c in self.eq_cones:
            if c.name == name:
                return c
        raise KeyError(name)

    def is_typable(self, t: Term) -> bool:
        return t in self._typable_set

    def derivable(self, s: Term, t: Term) -> Proved | Unknown:
        return self.oracle.decide(s, t)  # type: ignore[union-attr]

    def guard(self, cone: EqualizerCone, t: Term) -> tuple[Term, Term]:
        return App(self.base.mor(cone.f), (t,)), App(self.base.mor(cone.g), (t,))

    def eql(self, cone: EqualizerCone, t: Term) -> App:
        return App(self.eql_symbols[cone.name], (t,))

    def transcript(self) -> list[dict]:
        return [r.as_dict() for r in self.rounds]

    def __post_init__(self):
        self._typable_set = frozenset(self.typable)


def _eql_equations(base: ConeTheory, cones: Sequence[EqualizerCone],
                   syms: dict[str, FunctionSymbol]) -> list[Equation]:
    cat = base.category
    eqs = []
    for c in cones:
        a, e_obj = cat.cod[c.e], cat.dom[c.e]
        e, q = base.mor(c.e), syms[c.name]
        y, x = Var("y", a), Var("x", e_obj)
        eqs.append(Equation(App(e, (App(q, (y,)),)), y, a, "beta"))
        eqs.append(Equation(x, App(q, (App(e, (x,)),)), e_obj, "eta"))
    return eqs


def _typable(base_sig: Signature, eql: dict[FunctionSymbol, frozenset[Term]], max_size: int,
             variables: Sequence[Var]) -> list[Term]:
    """Terms up to ``max_size`` where every ``eql`` argument is admitted; size-major order."""
    buckets: dict[tuple[str, int], list[Term]] = {}
    sorts = base_sig.sorts
    for n in range(1, max_size + 1):
        for a in sorts:
            out: list[Term] = []
            if n == 1:
                out.extend(v for v in variables if v.sort == a)
            for f in base_sig.by_result[a]:
                if f.arity == 0:
                    if n == 1:
                        out.append(App(f, ()))
                    continue
                for split in _compositions(n - 1, f.arity):
                    pools = [buckets[(s, k)] for s, k in zip(f.args, split)]
                    out.extend(App(f, args) for args in itertools.product(*pools))
            for q, ok in eql.items():
                if q.result == a and n > 1:
                    out.extend(App(q, (t,)) for t in buckets[(q.args[0], n - 1)] if t in ok)
            buckets[(a, n)] = out
    return [t for n in range(1, max_size + 1) for a in sorts for t in buckets[(a, n)]]


def build_equalizer_theory(cat: FinCategory, eq_cones: Iterable[EqualizerCone],
                           F: FinFunctor | None = None, cones: Iterable[ProductCone] = (),
                           budget: Budget = Budget(size=5, iterations=100_000),
                           variables: Iterable[Var] | None = None,
                           max_rounds: int | None = None) -> EssentialTheory:
    """Bounded alternating fixpoint for the equalizer theory.

    With ``F`` the closed terms over the functor theory are used; without it
    each sort gets one variable, standing for a generic element.
    ``max_rounds`` defaults to ``budget.rounds``.
    """
    eq_cones = tuple(eq_cones)
    for c in eq_cones:
        ok, w = is_equalizer_cone(cat, c)
        if not ok:
            raise InvalidEqualizer(f"{c.name} is not an equalizer: {w}")
    base = theory_of_functor(cat, cones, F) if F is not None else theory_with_cones(cat, cones)
    if variables is None:
        variables = () if F is not None else tuple(Var(f"x{a}", a) for a in cat.objects)
    variables = tuple(variables)
    unique = len(eq_cones) == 1
    syms = {c.name: FunctionSymbol("eql" if unique else f"eql_{c.name}", (cat.cod[c.e],), cat.dom[c.e], "eql", c.name)
            for c in eq_cones}
    sig = Signature(cat.objects, [*base.signature.symbols, *syms.values()])
    equations = tuple(base.equations) + tuple(_eql_equations(base, eq_cones, syms))
    max_rounds = budget.rounds if max_rounds is None else max_rounds

    admitted: dict[str, frozenset[Term]] = {c.name: frozenset() for c in eq_cones}
    traces: dict[Term, Trace] = {}
    rounds: list[Round] = []
    converged = False
    truncated = False
    oracle = None
    typable: list[Term] = []
    for i in range(1, max_rounds + 1):
        typable = _typable(base.signature, {syms[n]: ts for n, ts in admitted.items()}, budget.size, variables)
        oracle = UniverseOracle(sig, equations, budget, variables, universe=typable)
        truncated = oracle.truncated
        g = oracle.graph
        new: dict[str, set[Term]] = {c.name: set() for c in eq_cones}
        for c in eq_cones:
            a = cat.cod[c.e]
            for t in typable:
                if t.sort != a or t.size >= budget.size or t in admitted[c.name]:
                    continue
                ft, gt = App(base.mor(c.f), (t,)), App(base.mor(c.g), (t,))
                if g.same(ft, gt):
                    new[c.name].add(t)
                    traces[App(syms[c.name], (t,))] = g.explain(ft, gt)
        n_new = sum(len(v) for v in new.values())
        admitted = {n: admitted[n] | frozenset(new[n]) for n in admitted}
        rounds.append(Round(i, len(typable), sum(len(v) for v in admitted.values()), n_new,
                            len(g.members), g.merges))
        if n_new == 0 or truncated:
            converged = n_new == 0 and not truncated
            break
    else:
        truncated = True
    return EssentialTheory(base, eq_cones, syms, sig, equations, budget, variables, rounds, admitted,
                           tuple(typable), traces, oracle, converged, truncated)


def guard_traces_replay(et: EssentialTheory) -> list[tuple[str, str]]:
    """Replay every stored guard derivation; returns the failures."""
    bad = []
    for q, tr in et.guard_traces.items():
        c = et.cone(q.symbol.ref)  # type: ignore[attr-defined]
        want = et.guard(c, q.args[0])  # type: ignore[attr-defined]
        try:
            concl = replay(et.equations, tr, et.signature)
        except Exception as exc:  # noqa: BLE001 -- report any replay failure
            bad.append((render(q), str(exc)))
            continue
        if (concl.lhs, concl.rhs) != want:
            bad.append((render(q), f"trace concludes {concl}"))
    return bad


# --- partial algebras and functors --------------------------------------------------

def preserves_equalizer(F: FinFunctor, cone: EqualizerCone) -> tuple[bool, tuple | None]:
    """Whether ``F(e)`` is injective with image ``{x : F(f)(x) = F(g)(x)}``."""
    cat = F.category
    a = cat.cod[cone.e]
    image: dict[Hashable, Hashable] = {}
    for y in F.carriers[cat.dom[cone.e]]:
        x = F.action[cone.e][y]
        if x in image:
            return False, ("not_injective", image[x], y)
        image[x] = y
    for x in F.carriers[a]:
        eq = F.action[cone.f][x] == F.action[cone.g][x]
        if eq != (x in image):
            return False, ("image", x)
    return True, None


def functor_to_partial_algebra(F: FinFunctor, et: EssentialTheory) -> FinAlgebra:
    """``F`` as a partial algebra: ``eql(x)`` is the first ``y`` with ``F(e)(y) = x``,
    defined only where ``F(f)(x) = F(g)(x)`` and such a ``y`` exists."""
    base = functor_to_algebra(F, et.base)
    ops = dict(base.ops)
    cat = F.category
    for c in et.eq_cones:
        table = {}
        for x in F.carriers[cat.cod[c.e]]:
            if F.action[c.f][x] != F.action[c.g][x]:
                continue
            ys = [y for y in F.carriers[cat.dom[c.e]] if F.action[c.e][y] == x]
            if ys:
                table[(x,)] = ys[0]
        ops[et.eql_symbols[c.name]] = table
    return FinAlgebra(et.signature, dict(base.carriers), ops, frozenset(et.eql_symbols.values()))


def _morphism_symbol(sig: Signature, m: str) -> FunctionSymbol:
    for s in sig.symbols:
        if s.kind == "morphism" and s.ref == m:
            return s
    raise KeyError(m)


def partial_algebra_check(alg: FinAlgebra, cone: EqualizerCone) -> tuple[bool, tuple | None]:
    """``eql`` defined exactly on the equalized part, a section of ``e`` there, and
    ``eql(e(y)) = y`` for every ``y``.  Witnesses: ``("domain", x)``,
    ``("beta", x)``, ``("eta", y)``."""
    sig = alg.signature
    e, f, g = (_morphism_symbol(sig, m) for m in (cone.e, cone.f, cone.g))
    q = next(s for s in sig.symbols if s.kind == "eql" and s.ref == cone.name)
    tq = alg.ops.get(q, {})
    for x in alg.carriers[e.result]:
        want = alg.ops[f][(x,)] == alg.ops[g][(x,)]
        if want != ((x,) in tq):
            return False, ("domain", x)
        if want and alg.ops[e][(tq[(x,)],)] != x:
            return False, ("beta", x)
    for y in alg.carriers[e.args[0]]:
        x = alg.ops[e][(y,)]
        if tq.get((x,)) != y:
            return False, ("eta", y)
    return True, None


def check_instances(et: EssentialTheory, alg: FinAlgebra) -> Report:
    """Evaluate every generated beta and eta instance in ``alg``.

    An instance whose ``eql`` application is undefined in ``alg`` counts as a
    failure: the theory typed that application, so the algebra must define it.
    """
    rep = Report("beta/eta instances")
    for c in et.eq_cones:
        e = et.base.mor(c.e)
        for kind in ("beta", "eta"):
            bad = None
            n = 0
            for t in et.typable:
                if kind == "beta":
                    if t not in et.admitted[c.name]:
                        continue
                    lhs, rhs = App(e, (et.eql(c, t),)), t
                else:
                    if t.sort != et.category.dom[c.e] or App(e, (t,)) not in et.admitted[c.name]:
                        continue
                    lhs, rhs = t, et.eql(c, App(e, (t,)))
                if not (lhs.closed and rhs.closed):
                    continue
                n += 1
                try:
                    ok = alg.evaluate(lhs) == alg.evaluate(rhs)
                except KeyError:
                    ok = False
                if not ok and bad is None:
                    bad = f"{render(lhs)} ≈ {render(rhs)}"
            rep.add(f"{kind}.{c.name}", bad is None, bad, instances=n)
    return rep


def correspondence_eq(F: FinFunctor, et: EssentialTheory) -> Report:
    """Equalizer preservation versus the partial-algebra laws, per cone, plus the
    functor -> partial algebra -> functor round trip."""
    rep = Report(f"equalizer correspondence for {F.name}")
    alg = functor_to_partial_algebra(F, et)
    for c in et.eq_cones:
        p, pw = preserves_equalizer(F, c)
        a, aw = partial_algebra_check(alg, c)
        rep.add(f"agree.{c.name}", p == a, None if p == a else {"preserves": pw, "algebra": aw},
                preserves=p, algebra=a, algebra_witness=aw)
    ok, w = preserves_cones(F, et.base.cones)
    plain = FinAlgebra(et.base.signature, alg.carriers,
                       {s: t for s, t in alg.ops.items() if s.kind != "eql"})
    back = algebra_to_functor(plain, et.base, name=F.name)
    same = back.carriers == F.carriers and all(back.action[m] == F.action[m] for m in F.category.morphisms)
    rep.add("round_trip", same, None if same else "tables differ")
    return rep


# --- evaluation into models -------------------------------------------------------

def eval_in_model(et: EssentialTheory, G: FinFunctor, gamma: NatTrans, t: Term,
                  memo: dict | None = None) -> Hashable:
    """Extension of ``γ : F -> G`` to typable closed terms; ``eql`` by inverting ``G(e)``."""
    memo = {} if memo is None else memo
    if t in memo:
        return memo[t]
    s = t.symbol  # type: ignore[attr-defined]
    cat = G.category
    if s.kind == "const":
        a, x = s.ref
        v = gamma.components[a][x]
    elif s.kind == "morphism":
        v = G.action[s.ref][eval_in_model(et, G, gamma, t.args[0], memo)]  # type: ignore[attr-defined]
    elif s.kind == "eql":
        c = et.cone(s.ref)
        x = eval_in_model(et, G, gamma, t.args[0], memo)  # type: ignore[attr-defined]
        ys = [y for y in G.carriers[cat.dom[c.e]] if G.action[c.e][y] == x]
        if len(ys) != 1:
            raise ValueError(f"{G.name}({c.e}) has {len(ys)} preimages of {elem_name(x)}")
        v = ys[0]
    else:
        from .completion import GammaHat
        v = GammaHat(et.base, G, gamma)(t)  # type: ignore[arg-type]
    memo[t] = v
    return v


def check_model_respects(et: EssentialTheory, G: FinFunctor, gamma: NatTrans) -> Report:
    """Every derivable class is sent to a single element of ``G``."""
    rep = Report(f"equalizer theory into {G.name}")
    memo: dict = {}
    bad = None
    classes = 0
    for members in et.oracle.graph.classes():  # type: ignore[union-attr]
        closed = [t for t in members if t.closed]
        if not closed:
            continue
        classes += 1
        vals = {eval_in_model(et, G, gamma, t, memo) for t in closed}
        if len(vals) > 1 and bad is None:
            bad = sorted(render(t) for t in closed)[:4]
    rep.add("classes_respected", bad is None, bad, et.budget.record(), classes=classes)
    return rep


def cross_check_guards(et: EssentialTheory, models: Sequence[tuple[FinFunctor, NatTrans]] = ()) -> Report:
    """Admission of ``eql(t)`` against independent evidence, for every candidate ``t``.

    * ``fixpoint_oracle``: a fresh closure over the final universe proves
      ``f(t) ≈ g(t)`` exactly for the admitted ``t``;
    * ``base_oracle``: for ``eql``-free ``t``, the bounded oracle of the base
      theory alone agrees with admission;
    * ``models``: admitted ``t`` have ``f(t) = g(t)`` in every supplied model,
      and some model separates each rejected ``t``.
    """
    from .deduction import derives

    rep = Report("eql admission")
    fresh = UniverseOracle(et.signature, et.equations, et.budget, et.variables, universe=et.typable)
    base = et.base
    memos = [{} for _ in models]
    for c in et.eq_cones:
        a, b = et.category.cod[c.e], et.category.cod[c.f]
        cands = [t for t in et.typable if t.sort == a and t.size < et.budget.size]
        bad_fix, bad_base, bad_model, unseparated = [], [], [], []
        n_base = 0
        for t in cands:
            ft, gt = et.guard(c, t)
            adm = t in et.admitted[c.name]
            if adm != isinstance(fresh.decide(ft, gt), Proved):
                bad_fix.append(render(t))
            if not any(s.kind == "eql" for s in (u.symbol for u in _apps(t))):
                n_base += 1
                d = derives(base.equations, Equation(ft, gt, b), et.budget, base.signature)
                if adm != isinstance(d, Proved):
                    bad_base.append(render(t))
            if t.closed and models:
                vals = [(eval_in_model(et, G, gm, ft, m), eval_in_model(et, G, gm, gt, m))
                        for (G, gm), m in zip(models, memos)]
                if adm and any(x != y for x, y in vals):
                    bad_model.append(render(t))
                if not adm and all(x == y for x, y in vals):
                    unseparated.append(render(t))
        rep.add(f"fixpoint_oracle.{c.name}", not bad_fix, bad_fix[:3] or None, candidates=len(cands))
        rep.add(f"base_oracle.{c.name}", not bad_base, bad_base[:3] or None, candidates=n_base)
        if models:
            rep.add(f"models.sound.{c.name}", not bad_model, bad_model[:3] or None)
            rep.add(f"models.separate.{c.name}", True if not unseparated else None,
                    unseparated[:3] or None, rejected=sum(t not in et.admitted[c.name] for t in cands))
    return rep


def _apps(t: Term):
    if isinstance(t, App):
        yield t
        for a in t.args:
            yield from _apps(a)
