"""Finite categories, cones, set-valued functors and natural transformations.

Composition convention, used everywhere in the package: ``comp[(g, f)]`` is
``g ∘ f`` and is defined exactly when ``cod(f) == dom(g)``.

Presheaves on a category are represented as covariant functors on its
opposite, built explicitly with :func:`opposite`.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Iterator, Mapping, Sequence

__all__ = [
    "FinCategory", "CategoryError", "ProductCone", "EqualizerCone", "ConeCollection",
    "FinFunctor", "NatTrans",
    "validate_category", "opposite", "is_product_cone", "is_equalizer_cone",
    "yoneda", "enumerate_nat_trans", "coproduct_presheaf", "copair",
    "functor_iso_check", "validate_functor", "naturality_failures",
    "identity_nat", "compose_nat", "elem_name", "relabel",
    "yoneda_element", "yoneda_transformation", "yoneda_bijection_failures",
]


def elem_name(x: Hashable) -> str:
    """Display name of a carrier element; coproduct tags render as ``L_``/``R_``."""
    if isinstance(x, tuple) and len(x) == 2 and x[0] in (0, 1):
        return ("L_" if x[0] == 0 else "R_") + elem_name(x[1])
    return str(x)


@dataclass(frozen=True)
class CategoryError:
    kind: str
    witness: tuple

    def __str__(self) -> str:
        return f"{self.kind}{self.witness}"


@dataclass(eq=True)
class FinCategory:
    name: str
    objects: tuple[str, ...]
    morphisms: tuple[str, ...]
    dom: dict[str, str]
    cod: dict[str, str]
    identity: dict[str, str]
    comp: dict[tuple[str, str], str]
    _hom: dict = field(default=None, init=False, repr=False, compare=False)  # type: ignore[assignment]

    def hom(self, x: str, y: str) -> tuple[str, ...]:
        if self._hom is None:
            h: dict[tuple[str, str], list[str]] = {(a, b): [] for a in self.objects for b in self.objects}
            for m in self.morphisms:
                h[(self.dom[m], self.cod[m])].append(m)
            self._hom = {k: tuple(v) for k, v in h.items()}
        return self._hom[(x, y)]

    def compose(self, g: str, f: str) -> str:
        """``g ∘ f``."""
        return self.comp[(g, f)]

    def out_of(self, x: str) -> list[str]:
        return [m for m in self.morphisms if self.dom[m] == x]

    def composable(self) -> Iterator[tuple[str, str]]:
        """Pairs ``(g, f)`` with ``cod(f) == dom(g)``, in morphism order."""
        for f in self.morphisms:
            for g in self.morphisms:
                if self.cod[f] == self.dom[g]:
                    yield g, f

    def is_identity(self, m: str) -> bool:
        return self.identity.get(self.dom[m]) == m


def validate_category(cat: FinCategory) -> list[CategoryError]:
    """All violated category laws, each with its witnessing morphisms; empty means valid."""
    errs: list[CategoryError] = []
    objs = set(cat.objects)
    for m in cat.morphisms:
        if cat.dom.get(m) not in objs or cat.cod.get(m) not in objs:
            errs.append(CategoryError("BadEndpoints", (m,)))
    for a in cat.objects:
        i = cat.identity.get(a)
        if i is None or cat.dom.get(i) != a or cat.cod.get(i) != a:
            errs.append(CategoryError("MissingIdentity", (a,)))
    if errs:
        return errs
    for g, f in cat.composable():
        h = cat.comp.get((g, f))
        if h is None:
            errs.append(CategoryError("PartialComposition", (g, f)))
        elif cat.dom.get(h) != cat.dom[f] or cat.cod.get(h) != cat.cod[g]:
            errs.append(CategoryError("BadComposite", (g, f, h)))
    for (g, f) in cat.comp:
        if cat.cod.get(f) != cat.dom.get(g):
            errs.append(CategoryError("UndefinedComposite", (g, f)))
    if errs:
        return errs
    for f in cat.morphisms:
        if cat.comp[(f, cat.identity[cat.dom[f]])] != f or cat.comp[(cat.identity[cat.cod[f]], f)] != f:
            errs.append(CategoryError("BadIdentity", (f,)))
    for f in cat.morphisms:
        for g in cat.out_of(cat.cod[f]):
            gf = cat.comp[(g, f)]
            for h in cat.out_of(cat.cod[g]):
                if cat.comp[(h, gf)] != cat.comp[(cat.comp[(h, g)], f)]:
                    errs.append(CategoryError("NonAssociative", (f, g, h)))
    return errs


def opposite(cat: FinCategory) -> FinCategory:
    name = cat.name[:-3] if cat.name.endswith("^op") else cat.name + "^op"
    return FinCategory(
        name=name,
        objects=cat.objects,
        morphisms=cat.morphisms,
        dom=dict(cat.cod),
        cod=dict(cat.dom),
        identity=dict(cat.identity),
        comp={(f, g): h for (g, f), h in cat.comp.items()},
    )


def relabel(cat: FinCategory, objects: Mapping[str, str], morphisms: Mapping[str, str]) -> FinCategory:
    """The same category with objects and morphisms renamed."""
    return FinCategory(
        name=cat.name,
        objects=tuple(objects[a] for a in cat.objects),
        morphisms=tuple(morphisms[m] for m in cat.morphisms),
        dom={morphisms[m]: objects[a] for m, a in cat.dom.items()},
        cod={morphisms[m]: objects[a] for m, a in cat.cod.items()},
        identity={objects[a]: morphisms[m] for a, m in cat.identity.items()},
        comp={(morphisms[g], morphisms[f]): morphisms[h] for (g, f), h in cat.comp.items()},
    )


# --- cones ---------------------------------------------------------------------

@dataclass(frozen=True)
class ProductCone:
    """Binary product cone ``left <-fst- apex -snd-> right``, or a nullary one (terminal apex)."""

    name: str
    apex: str
    left: str | None = None
    right: str | None = None
    fst: str | None = None
    snd: str | None = None

    @property
    def nullary(self) -> bool:
        return self.fst is None


@dataclass(frozen=True)
class EqualizerCone:
    """``e : E -> A`` equalizing ``f, g : A -> B``."""

    name: str
    e: str
    f: str
    g: str


def _cone_shape_errors(cat: FinCategory, cone: ProductCone) -> str | None:
    if cone.apex not in cat.objects:
        return f"apex {cone.apex} is not an object"
    if cone.nullary:
        return None
    for m, end in ((cone.fst, cone.left), (cone.snd, cone.right)):
        if m not in cat.dom:
            return f"{m} is not a morphism"
        if cat.dom[m] != cone.apex or cat.cod[m] != end:
            return f"{m} is not a morphism {cone.apex} -> {end}"
    return None


def is_product_cone(cat: FinCategory, cone: ProductCone) -> tuple[bool, tuple | None]:
    """Check the universal property by exhaustive mediator search.

    Returns ``(True, None)`` or ``(False, witness)`` where the witness is
    ``(X, p, q, mediators)`` (``(X, mediators)`` for nullary cones), or
    ``("shape", message)`` when the cone is not even well-typed.
    """
    bad = _cone_shape_errors(cat, cone)
    if bad:
        return False, ("shape", bad)
    for x in cat.objects:
        into = cat.hom(x, cone.apex)
        if cone.nullary:
            if len(into) != 1:
                return False, (x, into)
            continue
        for p in cat.hom(x, cone.left):
            for q in cat.hom(x, cone.right):
                meds = tuple(m for m in into
                             if cat.comp[(cone.fst, m)] == p and cat.comp[(cone.snd, m)] == q)
                if len(meds) != 1:
                    return False, (x, p, q, meds)
    return True, None


def is_equalizer_cone(cat: FinCategory, cone: EqualizerCone) -> tuple[bool, tuple | None]:
    e, f, g = cone.e, cone.f, cone.g
    if cat.dom[f] != cat.dom[g] or cat.cod[f] != cat.cod[g] or cat.cod[e] != cat.dom[f]:
        return False, ("shape", "e, f, g do not form a fork")
    if cat.comp[(f, e)] != cat.comp[(g, e)]:
        return False, ("commute", e)
    src = cat.dom[f]
    for x in cat.objects:
        for m in cat.hom(x, src):
            if cat.comp[(f, m)] != cat.comp[(g, m)]:
                continue
            us = tuple(u for u in cat.hom(x, cat.dom[e]) if cat.comp[(e, u)] == m)
            if len(us) != 1:
                return False, (x, m, us)
    return True, None


class ConeCollection(tuple):
    """A validated tuple of product cones in one category."""

    def __new__(cls, cat: FinCategory, cones: Iterable[ProductCone] = ()):
        self = super().__new__(cls, tuple(cones))
        self.category = cat
        return self

    def invalid(self) -> list[tuple[ProductCone, tuple]]:
        out = []
        for c in self:
            ok, w = is_product_cone(self.category, c)
            if not ok:
                out.append((c, w))
        return out

    def dependency_edges(self) -> list[tuple[str, str]]:
        """Edges apex -> factor for every binary cone."""
        out = []
        for c in self:
            if not c.nullary:
                out.append((c.apex, c.left))
                out.append((c.apex, c.right))
        return out

    def has_cycle(self) -> bool:
        graph: dict[str, list[str]] = {}
        for a, b in self.dependency_edges():
            graph.setdefault(a, []).append(b)
        state: dict[str, int] = {}

        def visit(v: str) -> bool:
            state[v] = 1
            for w in graph.get(v, ()):
                s = state.get(w, 0)
                if s == 1 or (s == 0 and visit(w)):
                    return True
            state[v] = 2
            return False

        return any(state.get(v, 0) == 0 and visit(v) for v in list(graph))


# --- functors and natural transformations ---------------------------------------

@dataclass
class FinFunctor:
    """Covariant functor into finite sets: carriers per object, tables per morphism."""

    category: FinCategory
    carriers: dict[str, tuple]
    action: dict[str, dict]
    name: str = "F"

    def __call__(self, m: str, x: Hashable) -> Hashable:
        return self.action[m][x]

    def size(self, a: str) -> int:
        return len(self.carriers[a])


@dataclass
class NatTrans:
    source: FinFunctor
    target: FinFunctor
    components: dict[str, dict]

    def __call__(self, a: str, x: Hashable) -> Hashable:
        return self.components[a][x]

    def key(self) -> tuple:
        return tuple(tuple(self.components[a][x] for x in self.source.carriers[a])
                     for a in self.source.category.objects)


def validate_functor(F: FinFunctor) -> list[str]:
    cat = F.category
    errs = []
    for m in cat.morphisms:
        table = F.action.get(m)
        if table is None:
            errs.append(f"no table for {m}")
            continue
        src, dst = F.carriers[cat.dom[m]], set(F.carriers[cat.cod[m]])
        for x in src:
            if x not in table:
                errs.append(f"{m} undefined at {x!r}")
            elif table[x] not in dst:
                errs.append(f"{m}({x!r}) = {table[x]!r} outside carrier")
    if errs:
        return errs
    for a in cat.objects:
        i = cat.identity[a]
        for x in F.carriers[a]:
            if F.action[i][x] != x:
                errs.append(f"F({i}) is not the identity at {x!r}")
    for g, f in cat.composable():
        gf = cat.comp[(g, f)]
        for x in F.carriers[cat.dom[f]]:
            if F.action[gf][x] != F.action[g][F.action[f][x]]:
                errs.append(f"F({gf}) != F({g})F({f}) at {x!r}")
    return errs


def naturality_failures(alpha: NatTrans) -> list[tuple]:
    F, G = alpha.source, alpha.target
    cat = F.category
    out = []
    for m in cat.morphisms:
        a, b = cat.dom[m], cat.cod[m]
        for x in F.carriers[a]:
            if G.action[m][alpha.components[a][x]] != alpha.components[b][F.action[m][x]]:
                out.append((m, x))
    return out


def yoneda(cat: FinCategory, a: str) -> FinFunctor:
    """The representable ``Hom(a, -)`` as a covariant functor on ``cat``.

    Passing the opposite of a category gives the presheaf ``Hom(-, a)`` on the
    original one: its carrier at ``x`` is ``Hom(x, a)`` read there.
    """
    carriers = {x: cat.hom(a, x) for x in cat.objects}
    action = {m: {h: cat.comp[(m, h)] for h in carriers[cat.dom[m]]} for m in cat.morphisms}
    return FinFunctor(cat, carriers, action, name=f"y({a})")


def identity_nat(F: FinFunctor) -> NatTrans:
    return NatTrans(F, F, {a: {x: x for x in F.carriers[a]} for a in F.category.objects})


def compose_nat(beta: NatTrans, alpha: NatTrans) -> NatTrans:
    """``beta ∘ alpha``."""
    return NatTrans(alpha.source, beta.target,
                    {a: {x: beta.components[a][alpha.components[a][x]] for x in alpha.source.carriers[a]}
                     for a in alpha.source.category.objects})


def enumerate_nat_trans(F: FinFunctor, G: FinFunctor, limit: int | None = None) -> list[NatTrans]:
    """Every natural transformation ``F -> G``, in a fixed order.

    Backtracks over elements of ``F``; choosing where ``x`` goes forces where
    every ``F(m)(x)`` goes, which prunes most of the search.
    """
    cat = F.category
    slots = [(a, x) for a in cat.objects for x in F.carriers[a]]
    outs = {a: cat.out_of(a) for a in cat.objects}
    results: list[NatTrans] = []
    assign: dict[tuple[str, Hashable], Hashable] = {}

    def propagate(a: str, x: Hashable, v: Hashable, log: list) -> bool:
        stack = [(a, x, v)]
        while stack:
            a, x, v = stack.pop()
            if (a, x) in assign:
                if assign[(a, x)] != v:
                    return False
                continue
            assign[(a, x)] = v
            log.append((a, x))
            for m in outs[a]:
                stack.append((cat.cod[m], F.action[m][x], G.action[m][v]))
        return True

    def go(i: int) -> bool:
        while i < len(slots) and slots[i] in assign:
            i += 1
        if i == len(slots):
            results.append(NatTrans(F, G, {a: {x: assign[(a, x)] for x in F.carriers[a]}
                                           for a in cat.objects}))
            return limit is not None and len(results) >= limit
        a, x = slots[i]
        for v in G.carriers[a]:
            log: list = []
            ok = propagate(a, x, v, log)
            if ok and go(i + 1):
                return True
            for k in log:
                del assign[k]
        return False

    go(0)
    return results


def coproduct_presheaf(F: FinFunctor, G: FinFunctor, name: str | None = None) -> tuple[FinFunctor, NatTrans, NatTrans]:
    """Pointwise disjoint union with its two injections; elements are ``(0, x)`` / ``(1, y)``."""
    cat = F.category
    carriers = {a: tuple((0, x) for x in F.carriers[a]) + tuple((1, y) for y in G.carriers[a])
                for a in cat.objects}
    action = {}
    for m in cat.morphisms:
        t = {(0, x): (0, F.action[m][x]) for x in F.carriers[cat.dom[m]]}
        t.update({(1, y): (1, G.action[m][y]) for y in G.carriers[cat.dom[m]]})
        action[m] = t
    S = FinFunctor(cat, carriers, action, name=name or f"{F.name}+{G.name}")
    inl = NatTrans(F, S, {a: {x: (0, x) for x in F.carriers[a]} for a in cat.objects})
    inr = NatTrans(G, S, {a: {y: (1, y) for y in G.carriers[a]} for a in cat.objects})
    return S, inl, inr


def copair(S: FinFunctor, alpha: NatTrans, beta: NatTrans) -> NatTrans:
    """``[alpha, beta] : F ⊔ G -> H`` on the coproduct ``S`` built by :func:`coproduct_presheaf`."""
    comps = {}
    for a in S.category.objects:
        comps[a] = {}
        for tag, x in S.carriers[a]:
            src = alpha if tag == 0 else beta
            comps[a][(tag, x)] = src.components[a][x]
    return NatTrans(S, alpha.target, comps)


def functor_iso_check(F: FinFunctor, G: FinFunctor, alpha: NatTrans) -> bool:
    for a in F.category.objects:
        comp = alpha.components[a]
        if len(F.carriers[a]) != len(G.carriers[a]):
            return False
        if len({comp[x] for x in F.carriers[a]}) != len(G.carriers[a]):
            return False
    return True


def yoneda_element(alpha: NatTrans, a: str) -> Hashable:
    """``α ↦ α_a(id_a)`` for ``α : Hom(a, -) -> F``."""
    return alpha.components[a][alpha.source.category.identity[a]]


def yoneda_transformation(F: FinFunctor, a: str, x: Hashable) -> NatTrans:
    """The transformation ``Hom(a, -) -> F`` sending ``h`` to ``F(h)(x)``."""
    Y = yoneda(F.category, a)
    return NatTrans(Y, F, {b: {h: F.action[h][x] for h in Y.carriers[b]} for b in F.category.objects})


def yoneda_bijection_failures(F: FinFunctor, a: str) -> list[str]:
    """Problems with ``Nat(Hom(a, -), F) ≅ F(a)``: count, and both round trips."""
    nats = enumerate_nat_trans(yoneda(F.category, a), F)
    out = []
    if len(nats) != len(F.carriers[a]):
        out.append(f"|Nat| = {len(nats)} but |F({a})| = {len(F.carriers[a])}")
    for alpha in nats:
        if yoneda_transformation(F, a, yoneda_element(alpha, a)).key() != alpha.key():
            out.append(f"transformation {alpha.key()} is not recovered from its element")
    for x in F.carriers[a]:
        if yoneda_element(yoneda_transformation(F, a, x), a) != x:
            out.append(f"element {elem_name(x)} is not recovered")
    return out
