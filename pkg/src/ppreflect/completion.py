"""The free cone-preserving completion ``L(F)``: closed terms of the functor
theory modulo its equations.

Carriers of ``L(F)`` are never built.  Elements are closed terms, and equality
is decided by normalization by evaluation into eta-long values:

* at the apex of a binary cone every value is ``PairV`` (``UnitV`` for a
  nullary cone);
* elsewhere a value is a constant of ``F`` or a morphism stuck on a pair.

When the cones do not admit such normal forms (an apex reachable from itself,
or two cones sharing an apex) the engine answers by budgeted saturation
instead, with an honest ``Unknown`` when budgets run out.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Iterable, Sequence, Union

from .deduction import Budget, Proved, derives, format_trace
from .fincat import (
    ConeCollection, FinCategory, FinFunctor, NatTrans, ProductCone, elem_name,
    enumerate_nat_trans, identity_nat, naturality_failures, yoneda,
)
from .models import enumerate_models
from .msa import App, Equation, IllSorted, SortMismatch, Term, Var, render, sort_of, subterms
from .report import Report
from .theories import FunctorTheory, preserves_cones, theory_of_functor

__all__ = [
    "PairV", "UnitV", "ConstV", "StuckV", "Value",
    "NoCanonicalForm", "CoherenceError", "NotConePreserving",
    "Normalizer", "ReflectedPresheaf", "reflect",
    "Equal", "Distinct", "Unknown", "Separator",
    "eta_unit", "act_morphism", "normalize", "readback", "equal", "map_L",
    "GammaHat", "gamma_hat", "check_universal_property", "find_separator",
]


# --- values ---------------------------------------------------------------------

@dataclass(frozen=True)
class PairV:
    cone: str
    left: "Value"
    right: "Value"


@dataclass(frozen=True)
class UnitV:
    cone: str


@dataclass(frozen=True)
class ConstV:
    obj: str
    elem: Hashable


@dataclass(frozen=True)
class StuckV:
    head: str
    arg: "Value"


Value = Union[PairV, UnitV, ConstV, StuckV]


class NoCanonicalForm(Exception):
    pass


class CoherenceError(Exception):
    """Two routes through the category gave different normal forms."""


class NotConePreserving(Exception):
    pass


class Normalizer:
    """Evaluation of closed terms of a functor theory into eta-long values."""

    def __init__(self, th: FunctorTheory):
        self.theory = th
        self.cat = th.category
        self.F = th.functor
        self.problem: str | None = None
        self.apex: dict[str, ProductCone] = {}
        for c in th.cones:
            if c.apex in self.apex:
                self.problem = f"object {c.apex} is the apex of two cones"
            self.apex[c.apex] = c
        if self.problem is None and ConeCollection(self.cat, th.cones).has_cycle():
            self.problem = "cone apex graph has a cycle"
        self._fact: dict[str, list[tuple[int, str]]] = {}
        self._apply: dict[tuple[str, Value], Value] = {}
        self._const: dict[tuple[str, Hashable], Value] = {}
        self._eval: dict[Term, Value] = {}
        self._by_value: dict[str, dict[Value, list[Hashable]]] = {}

    @property
    def supported(self) -> bool:
        return self.problem is None

    def factorizations(self, k: str) -> list[tuple[int, str]]:
        """``(side, m)`` with ``k = m ∘ proj_side`` for the cone at ``dom(k)``; fst side first."""
        got = self._fact.get(k)
        if got is None:
            cat = self.cat
            c = self.apex.get(cat.dom[k])
            got = []
            if c is not None and not c.nullary:
                for side, proj in ((0, c.fst), (1, c.snd)):
                    for m in cat.hom(cat.cod[proj], cat.cod[k]):
                        if cat.comp[(m, proj)] == k:
                            got.append((side, m))
            self._fact[k] = got
        return got

    def const(self, a: str, e: Hashable) -> Value:
        key = (a, e)
        v = self._const.get(key)
        if v is None:
            c = self.apex.get(a)
            if c is None:
                v = ConstV(a, e)
            elif c.nullary:
                v = UnitV(c.name)
            else:
                F = self.F
                v = PairV(c.name, self.const(c.left, F.action[c.fst][e]), self.const(c.right, F.action[c.snd][e]))
            self._const[key] = v
        return v

    def _constants_matching(self, apex: str, v: Value) -> list[Hashable]:
        table = self._by_value.get(apex)
        if table is None:
            table = {}
            for e in self.F.carriers[apex]:
                table.setdefault(self.const(apex, e), []).append(e)
            self._by_value[apex] = table
        return table.get(v, [])

    def apply(self, k: str, v: Value) -> Value:
        """The value of ``k(t)`` where ``t`` has value ``v``."""
        key = (k, v)
        out = self._apply.get(key)
        if out is None:
            out = self._apply_uncached(k, v)
            self._apply[key] = out
        return out

    def _apply_uncached(self, k: str, v: Value) -> Value:
        cat, F = self.cat, self.F
        if isinstance(v, ConstV):
            return self.const(cat.cod[k], F.action[k][v.elem])
        if isinstance(v, StuckV):
            return self.apply(cat.comp[(k, v.head)], v.arg)
        y = cat.cod[k]
        c = self.apex.get(y)
        if c is not None:
            if c.nullary:
                return UnitV(c.name)
            return PairV(c.name, self.apply(cat.comp[(c.fst, k)], v), self.apply(cat.comp[(c.snd, k)], v))
        if isinstance(v, PairV):
            routes = [self.apply(m, v.left if side == 0 else v.right) for side, m in self.factorizations(k)]
            if routes:
                if any(r != routes[0] for r in routes[1:]):
                    raise CoherenceError(
                        f"{k} factors through several projections with different results: "
                        + ", ".join(render(self.readback(r)) for r in routes))
                return routes[0]
        hits = self._constants_matching(cat.dom[k], v)
        if hits:
            results = {self.const(y, F.action[k][e]) for e in hits}
            if len(results) > 1:
                raise CoherenceError(f"constants {hits} at {cat.dom[k]} share a normal form but {k} separates them")
            return results.pop()
        return StuckV(k, v)

    def eval(self, t: Term) -> Value:
        v = self._eval.get(t)
        if v is not None:
            return v
        if isinstance(t, Var):
            raise ValueError("only closed terms have normal forms")
        s = t.symbol
        if s.kind == "const":
            v = self.const(*s.ref)
        elif s.kind == "morphism":
            v = self.apply(s.ref, self.eval(t.args[0]))
        elif s.kind == "pair":
            v = PairV(s.ref, self.eval(t.args[0]), self.eval(t.args[1]))
        elif s.kind == "unit":
            v = UnitV(s.ref)
        else:
            raise NoCanonicalForm(f"symbol {s.name} has no evaluation rule")
        self._eval[t] = v
        return v

    def readback(self, v: Value) -> Term:
        th = self.theory
        if isinstance(v, PairV):
            return App(th.cone_symbols[v.cone], (self.readback(v.left), self.readback(v.right)))
        if isinstance(v, UnitV):
            return App(th.cone_symbols[v.cone], ())
        if isinstance(v, ConstV):
            return th.const(v.obj, v.elem)
        return App(th.mor(v.head), (self.readback(v.arg),))


# --- the reflected presheaf -------------------------------------------------------

@dataclass
class ReflectedPresheaf:
    """Handle on ``L(F)``; see :func:`reflect`."""

    theory: FunctorTheory
    mode: str = "nbe"
    budget: Budget = field(default_factory=Budget)
    models: list[tuple[FinFunctor, list[NatTrans] | None]] = field(default_factory=list)
    model_search_size: int = 3

    def __post_init__(self):
        if self.mode not in ("nbe", "saturation"):
            raise ValueError(f"unknown engine mode {self.mode!r}")
        self.normalizer = Normalizer(self.theory)

    @property
    def category(self) -> FinCategory:
        return self.theory.category

    @property
    def functor(self) -> FinFunctor:
        return self.theory.functor

    @property
    def cones(self) -> tuple[ProductCone, ...]:
        return self.theory.cones

    def engine(self) -> str:
        return "nbe" if self.mode == "nbe" and self.normalizer.supported else "saturation"


def reflect(cat: FinCategory, cones: Iterable[ProductCone], F: FinFunctor, mode: str = "nbe",
            budget: Budget | None = None, models: Sequence[tuple[FinFunctor, list[NatTrans] | None]] = ()) -> ReflectedPresheaf:
    th = theory_of_functor(cat, cones, F)
    return ReflectedPresheaf(th, mode, budget or Budget(), list(models))


def eta_unit(R: ReflectedPresheaf, a: str, x: Hashable) -> App:
    """The unit ``F -> L(F)`` at ``a``: the constant term for ``x``."""
    if x not in R.functor.carriers[a]:
        raise KeyError(f"{x!r} is not an element of {R.functor.name}({a})")
    return R.theory.const(a, x)


def act_morphism(R: ReflectedPresheaf, f: str, t: Term) -> App:
    """``L(F)(f)`` applied to ``t``: the term ``f(t)``."""
    want = R.category.dom[f]
    got = sort_of(t, R.theory.signature)
    if got != want:
        raise IllSorted([], f"{f} expects sort {want}, got {got}")
    return App(R.theory.mor(f), (t,))


def normalize(R: ReflectedPresheaf, t: Term) -> Value:
    sort_of(t, R.theory.signature)
    if not t.closed:
        raise ValueError("normalize expects a closed term")
    n = R.normalizer
    if not n.supported:
        raise NoCanonicalForm(n.problem)
    return n.eval(t)


def readback(R: ReflectedPresheaf, v: Value) -> Term:
    return R.normalizer.readback(v)


# --- equality results ---------------------------------------------------------------

@dataclass
class Separator:
    model: FinFunctor
    gamma: NatTrans
    values: tuple[Hashable, Hashable]
    source: str

    def describe(self) -> dict:
        return {
            "model": self.model.name,
            "source": self.source,
            "gamma": {a: {elem_name(x): elem_name(y) for x, y in comp.items()}
                      for a, comp in self.gamma.components.items()},
            "values": [elem_name(v) for v in self.values],
        }


@dataclass
class Equal:
    lhs: Term
    rhs: Term
    normal_form: Value | None
    engine: str
    budget: Budget
    trace: str | None = None
    nf_term: Term | None = None
    kind = "equal"

    def record(self) -> dict:
        nf = None if self.nf_term is None else render(self.nf_term)
        return {"result": "equal", "terms": [render(self.lhs), render(self.rhs)],
                "normal_forms": [nf, nf], "separator": None, "engine": self.engine,
                "budget": self.budget.record()}


@dataclass
class Distinct:
    lhs: Term
    rhs: Term
    separator: Separator
    normal_forms: tuple[str | None, str | None]
    engine: str
    budget: Budget
    kind = "distinct"

    def record(self) -> dict:
        return {"result": "distinct", "terms": [render(self.lhs), render(self.rhs)],
                "normal_forms": list(self.normal_forms), "separator": self.separator.describe(),
                "engine": self.engine, "budget": self.budget.record()}


@dataclass
class Unknown:
    lhs: Term
    rhs: Term
    normal_forms: tuple[str | None, str | None]
    engine: str
    budget: Budget
    report: dict = field(default_factory=dict)
    kind = "unknown"

    def record(self) -> dict:
        return {"result": "unknown", "terms": [render(self.lhs), render(self.rhs)],
                "normal_forms": list(self.normal_forms), "separator": None,
                "engine": self.engine, "budget": self.budget.record(), "report": self.report}


EqResult = Union[Equal, Distinct, Unknown]


def equal(R: ReflectedPresheaf, s: Term, t: Term) -> EqResult:
    """Decide ``s ≈ t`` in ``L(F)``.

    ``Equal`` means identical normal forms (or a saturation proof),
    ``Distinct`` carries a cone-preserving model and transformation whose
    extension separates the two terms, ``Unknown`` reports what ran out.
    """
    sig = R.theory.signature
    a, b = sort_of(s, sig), sort_of(t, sig)
    if a != b:
        raise SortMismatch(f"{render(s)} : {a} vs {render(t)} : {b}")
    if not (s.closed and t.closed):
        raise ValueError("equal expects closed terms")
    engine = R.engine()
    nfs: tuple[str | None, str | None] = (None, None)
    if engine == "nbe":
        vs, vt = R.normalizer.eval(s), R.normalizer.eval(t)
        nfs = (render(R.normalizer.readback(vs)), render(R.normalizer.readback(vt)))
        if vs == vt:
            return Equal(s, t, vs, engine, R.budget, nf_term=R.normalizer.readback(vs))
    else:
        d = derives(R.theory.equations, Equation(s, t, a), R.budget, sig, strategy="saturate")
        if isinstance(d, Proved):
            return Equal(s, t, None, engine, R.budget, trace=format_trace(d.trace))
    sep = find_separator(R, s, t)
    if sep is not None:
        return Distinct(s, t, sep, nfs, engine, R.budget)
    return Unknown(s, t, nfs, engine, R.budget, {"separators": "none found"})


# --- universal morphism ----------------------------------------------------------------

class GammaHat:
    """The extension ``γ̂ : L(F) -> G`` of ``γ : F -> G`` along the unit, by structural recursion."""

    def __init__(self, th: FunctorTheory, G: FinFunctor, gamma: NatTrans):
        ok, w = preserves_cones(G, th.cones)
        if not ok:
            raise NotConePreserving(f"{G.name} does not preserve cone {w}")
        self.theory, self.G, self.gamma = th, G, gamma
        self.inverse: dict[str, dict[tuple, Hashable]] = {}
        for c in th.cones:
            if c.nullary:
                self.inverse[c.name] = {(): G.carriers[c.apex][0]}
            else:
                self.inverse[c.name] = {(G.action[c.fst][z], G.action[c.snd][z]): z for z in G.carriers[c.apex]}
        self._memo: dict[Term, Hashable] = {}

    def __call__(self, t: Term) -> Hashable:
        v = self._memo.get(t)
        if v is not None or t in self._memo:
            return v
        s = t.symbol  # type: ignore[attr-defined]
        if s.kind == "const":
            a, x = s.ref
            v = self.gamma.components[a][x]
        elif s.kind == "morphism":
            v = self.G.action[s.ref][self(t.args[0])]  # type: ignore[attr-defined]
        elif s.kind == "pair":
            v = self.inverse[s.ref][(self(t.args[0]), self(t.args[1]))]  # type: ignore[attr-defined]
        elif s.kind == "unit":
            v = self.inverse[s.ref][()]
        else:
            raise ValueError(f"no rule for symbol {s.name}")
        self._memo[t] = v
        return v


def gamma_hat(R: ReflectedPresheaf | FunctorTheory, G: FinFunctor, gamma: NatTrans, t: Term) -> Hashable:
    th = R.theory if isinstance(R, ReflectedPresheaf) else R
    return GammaHat(th, G, gamma)(t)


def _separator_candidates(R: ReflectedPresheaf):
    th = R.theory
    F = th.functor
    if preserves_cones(F, th.cones)[0]:
        yield "self", F, [identity_nat(F)]
    for a in th.category.objects:
        Y = yoneda(th.category, a)
        if preserves_cones(Y, th.cones)[0]:
            yield "yoneda", Y, None
    for G, gammas in R.models:
        if preserves_cones(G, th.cones)[0]:
            yield "user", G, gammas
    for G in enumerate_models(th.category, th.cones, R.model_search_size, limit=64):
        yield "search", G, None


def find_separator(R: ReflectedPresheaf, s: Term, t: Term, nat_limit: int = 256) -> Separator | None:
    F = R.functor
    for source, G, gammas in _separator_candidates(R):
        if gammas is None:
            gammas = enumerate_nat_trans(F, G, limit=nat_limit)
        for gamma in gammas:
            h = GammaHat(R.theory, G, gamma)
            vs, vt = h(s), h(t)
            if vs != vt:
                return Separator(G, gamma, (vs, vt), source)
    return None


def map_L(alpha: NatTrans, t: Term, target: FunctorTheory) -> Term:
    """``L(α)`` on terms: replace each constant ``(a, x)`` by ``(a, α_a(x))``."""
    if isinstance(t, Var):
        raise ValueError("map_L expects closed terms")
    s = t.symbol
    if s.kind == "const":
        a, x = s.ref
        return target.const(a, alpha.components[a][x])
    return App(s, tuple(map_L(alpha, u, target) for u in t.args))


# --- universal property check -------------------------------------------------------------

def classify(R: ReflectedPresheaf, terms: Sequence[Term]) -> list[list[Term]]:
    """Group terms into ≈-classes using the equality engine."""
    groups: list[list[Term]] = []
    if R.engine() == "nbe":
        by_nf: dict[Value, list[Term]] = {}
        for t in terms:
            by_nf.setdefault(R.normalizer.eval(t), []).append(t)
        return list(by_nf.values())
    for t in terms:
        for g in groups:
            if g[0].sort == t.sort and isinstance(equal(R, g[0], t), Equal):
                g.append(t)
                break
        else:
            groups.append([t])
    return groups


def check_universal_property(R: ReflectedPresheaf, G: FinFunctor, gamma: NatTrans,
                             samples: Iterable[Term], proved_pairs: Iterable[tuple[Term, Term]] = (),
                             max_solutions: int = 1000) -> Report:
    th = R.theory
    cat = th.category
    rep = Report(f"universal property into {G.name}")
    budget = R.budget.record()
    nat_bad = naturality_failures(gamma)
    rep.add("gamma.natural", not nat_bad, nat_bad[:3] or None)
    h = GammaHat(th, G, gamma)

    bad = [(a, elem_name(x)) for a in cat.objects for x in R.functor.carriers[a]
           if h(th.const(a, x)) != gamma.components[a][x]]
    rep.add("eta", not bad, bad[:5] or None, count=sum(len(R.functor.carriers[a]) for a in cat.objects))

    closed: dict[Term, None] = {}
    for a in cat.objects:
        for x in R.functor.carriers[a]:
            closed[th.const(a, x)] = None
    for t in samples:
        for u in subterms(t):
            closed[u] = None
    pool = list(closed)

    bad = []
    n = 0
    for t in pool:
        for f in cat.out_of(t.sort):
            n += 1
            if G.action[f][h(t)] != h(App(th.mor(f), (t,))):
                bad.append((render(t), f))
    rep.add("naturality", not bad, bad[:5] or None, checked=n)

    pairs = list(proved_pairs)
    if pairs:
        bad = [(render(s), render(t)) for s, t in pairs if h(s) != h(t)]
        rep.add("well_defined", not bad, bad[:5] or None, pairs=len(pairs))

    groups = classify(R, pool)
    sols = _natural_extensions(th, G, gamma, pool, groups, max_solutions)
    diverge = None
    for sol in sols:
        for i, g in enumerate(groups):
            if sol[i] != h(g[0]):
                diverge = (render(g[0]), elem_name(sol[i]), elem_name(h(g[0])))
                break
        if diverge:
            break
    complete = len(sols) < max_solutions
    rep.add("uniqueness", (diverge is None) if complete else None, diverge,
            budget, classes=len(groups), extensions=len(sols), samples=len(pool))
    return rep


def _natural_extensions(th: FunctorTheory, G: FinFunctor, gamma: NatTrans, pool: list[Term],
                        groups: list[list[Term]], cap: int) -> list[list[Hashable]]:
    """All class-to-element assignments natural on the sampled terms and extending γ."""
    index = {t: i for i, g in enumerate(groups) for t in g}
    cones = {c.name: c for c in th.cones}
    # constraints: (kind, target group, data)
    fixed: dict[int, set] = {}
    links: list[tuple] = []
    for t in pool:
        i = index[t]
        s = t.symbol
        if s.kind == "const":
            a, x = s.ref
            fixed.setdefault(i, set()).add(gamma.components[a][x])
        elif s.kind == "morphism":
            links.append(("map", i, index[t.args[0]], s.ref))
        elif s.kind == "pair":
            c = cones[s.ref]
            links.append(("proj", i, index[t.args[0]], c.fst))
            links.append(("proj", i, index[t.args[1]], c.snd))
        elif s.kind == "unit":
            fixed.setdefault(i, set()).update(G.carriers[t.sort])
    order = sorted(range(len(groups)), key=lambda i: min(t.size for t in groups[i]))
    assign: dict[int, Hashable] = {}
    sols: list[list[Hashable]] = []

    def ok() -> bool:
        for kind, i, j, f in links:
            if i in assign and j in assign:
                if kind == "map" and G.action[f][assign[j]] != assign[i]:
                    return False
                if kind == "proj" and G.action[f][assign[i]] != assign[j]:
                    return False
        return True

    def go(k: int) -> bool:
        if k == len(order):
            sols.append([assign[i] for i in range(len(groups))])
            return len(sols) >= cap
        i = order[k]
        dom = G.carriers[groups[i][0].sort]
        for v in dom:
            if i in fixed and v not in fixed[i]:
                continue
            assign[i] = v
            if ok() and go(k + 1):
                return True
            del assign[i]
        return False

    go(0)
    return sols


def cross_validate(R: ReflectedPresheaf, budget: Budget) -> Report:
    """Compare NbE normal forms with the bounded oracle on every closed term up to ``budget.size``.

    A term pair the oracle proves equal but NbE separates is a soundness gap in
    the engine; on any such mismatch ``R`` is switched to saturation mode.
    """
    from .deduction import UniverseOracle
    from .msa import enumerate_terms

    rep = Report("engine cross-validation")
    if R.engine() != "nbe":
        rep.add("nbe.available", None, None, budget.record(), reason=R.normalizer.problem)
        return rep
    th = R.theory
    oracle = UniverseOracle(th.signature, th.equations, budget)
    seen: dict[Term, tuple[Term, Value]] = {}
    bad = None
    n = 0
    for a in th.category.objects:
        for t in enumerate_terms(th.signature, a, budget.size):
            n += 1
            root = oracle.class_of(t)
            v = R.normalizer.eval(t)
            first = seen.setdefault(root, (t, v))
            if first[1] != v and bad is None:
                bad = (render(first[0]), render(t))
    rep.add("oracle_implies_nbe", bad is None, bad, budget.record(), terms=n, oracle_classes=len(seen), truncated=oracle.truncated)
    if bad is not None:
        R.mode = "saturation"
    return rep
