"""Theories built from category data, and the algebra/functor correspondences.

* :func:`theory_of_category` -- one sort per object, one unary symbol per
  morphism, equations ``id(x) ≈ x`` and ``(g∘f)(x) ≈ g(f(x))``.
* :func:`theory_with_cones` -- adds ``pair`` with its three equations per
  binary cone and ``unit`` with ``x ≈ unit`` per nullary cone.
* :func:`theory_of_functor` -- adds a constant per element of ``F`` and
  ``F(f)(c) ≈ f(c)`` for every morphism ``f`` and element ``c``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Hashable, Iterable

from .fincat import (
    ConeCollection, FinCategory, FinFunctor, ProductCone, elem_name,
    is_product_cone, validate_functor,
)
from .msa import (
    App, Equation, FinAlgebra, FunctionSymbol, Signature, Term, Theory, Var,
    find_violation, render,
)

__all__ = [
    "CategoryTheory", "ConeTheory", "FunctorTheory", "InvalidCone", "NotAModel",
    "theory_of_category", "theory_with_cones", "theory_of_functor",
    "algebra_to_functor", "functor_to_algebra", "preserves_cones", "listing",
]


class InvalidCone(Exception):
    def __init__(self, cone: ProductCone, witness):
        self.cone, self.witness = cone, witness
        super().__init__(f"cone {cone.name} is not a product cone: {witness}")


class NotAModel(Exception):
    def __init__(self, equation: Equation, assignment):
        self.equation, self.assignment = equation, assignment
        super().__init__(f"algebra violates {equation} under {assignment}")


@dataclass
class CategoryTheory:
    category: FinCategory
    theory: Theory
    morphism_symbols: dict[str, FunctionSymbol]

    @property
    def signature(self) -> Signature:
        return self.theory.signature

    @property
    def equations(self) -> tuple[Equation, ...]:
        return self.theory.equations

    def mor(self, name: str) -> FunctionSymbol:
        return self.morphism_symbols[name]


@dataclass
class ConeTheory(CategoryTheory):
    cones: tuple[ProductCone, ...] = ()
    cone_symbols: dict[str, FunctionSymbol] = field(default_factory=dict)

    def cone(self, name: str) -> ProductCone:
        for c in self.cones:
            if c.name == name:
                return c
        raise KeyError(name)


@dataclass
class FunctorTheory(ConeTheory):
    functor: FinFunctor = None  # type: ignore[assignment]
    constants: dict[tuple[str, Hashable], FunctionSymbol] = field(default_factory=dict)

    def const(self, obj: str, elem: Hashable) -> App:
        return App(self.constants[(obj, elem)], ())


def _morphism_symbol(cat: FinCategory, m: str) -> FunctionSymbol:
    return FunctionSymbol(m, (cat.dom[m],), cat.cod[m], "morphism", m)


def _category_parts(cat: FinCategory) -> tuple[dict[str, FunctionSymbol], list[Equation]]:
    syms = {m: _morphism_symbol(cat, m) for m in cat.morphisms}
    eqs: list[Equation] = []
    for a in cat.objects:
        x = Var("x", a)
        eqs.append(Equation(App(syms[cat.identity[a]], (x,)), x, a, "id"))
    for g, f in cat.composable():
        x = Var("x", cat.dom[f])
        gf = cat.comp[(g, f)]
        eqs.append(Equation(App(syms[gf], (x,)), App(syms[g], (App(syms[f], (x,)),)), cat.cod[g], "comp"))
    return syms, eqs


def theory_of_category(cat: FinCategory) -> CategoryTheory:
    syms, eqs = _category_parts(cat)
    sig = Signature(cat.objects, syms.values())
    return CategoryTheory(cat, Theory(sig, tuple(eqs)), syms)


def _cone_parts(cat: FinCategory, cones: Iterable[ProductCone], syms: dict[str, FunctionSymbol]):
    cones = tuple(cones)
    binary_shapes = [(c.left, c.right) for c in cones if not c.nullary]
    n_nullary = sum(c.nullary for c in cones)
    csyms: dict[str, FunctionSymbol] = {}
    eqs: list[Equation] = []
    for c in cones:
        if c.nullary:
            name = "unit" if n_nullary == 1 else f"unit_{c.name}"
            u = FunctionSymbol(name, (), c.apex, "unit", c.name)
            csyms[c.name] = u
            x = Var("x", c.apex)
            eqs.append(Equation(x, App(u, ()), c.apex, "unit"))
            continue
        unique = binary_shapes.count((c.left, c.right)) == 1
        p = FunctionSymbol("pair" if unique else f"pair_{c.name}", (c.left, c.right), c.apex, "pair", c.name)
        csyms[c.name] = p
        x, y, z = Var("x", c.left), Var("y", c.right), Var("z", c.apex)
        fst, snd = syms[c.fst], syms[c.snd]
        pxy = App(p, (x, y))
        eqs.append(Equation(App(fst, (pxy,)), x, c.left, "fst"))
        eqs.append(Equation(App(snd, (pxy,)), y, c.right, "snd"))
        eqs.append(Equation(App(p, (App(fst, (z,)), App(snd, (z,)))), z, c.apex, "pair"))
    return csyms, eqs


def theory_with_cones(cat: FinCategory, cones: Iterable[ProductCone]) -> ConeTheory:
    cones = tuple(cones)
    for c in cones:
        ok, w = is_product_cone(cat, c)
        if not ok:
            raise InvalidCone(c, w)
    syms, eqs = _category_parts(cat)
    csyms, ceqs = _cone_parts(cat, cones, syms)
    sig = Signature(cat.objects, [*syms.values(), *csyms.values()])
    return ConeTheory(cat, Theory(sig, tuple(eqs + ceqs)), syms, cones, csyms)


def theory_of_functor(cat: FinCategory, cones: Iterable[ProductCone], F: FinFunctor) -> FunctorTheory:
    errs = validate_functor(F)
    if errs:
        raise ValueError(f"invalid functor {F.name}: {errs[:3]}")
    base = theory_with_cones(cat, cones)
    consts: dict[tuple[str, Hashable], FunctionSymbol] = {}
    for a in cat.objects:
        for c in F.carriers[a]:
            consts[(a, c)] = FunctionSymbol(f"{a}.{elem_name(c)}", (), a, "const", (a, c))
    eqs: list[Equation] = []
    for m in cat.morphisms:
        a, b = cat.dom[m], cat.cod[m]
        for c in F.carriers[a]:
            d = F.action[m][c]
            eqs.append(Equation(App(consts[(b, d)], ()), App(base.mor(m), (App(consts[(a, c)], ()),)), b, "const"))
    sig = Signature(cat.objects, [*base.signature.symbols, *consts.values()])
    return FunctorTheory(cat, Theory(sig, base.equations + tuple(eqs)), base.morphism_symbols,
                         base.cones, base.cone_symbols, F, consts)


# --- correspondences ---------------------------------------------------------

def functor_to_algebra(F: FinFunctor, th: CategoryTheory) -> FinAlgebra:
    """Read ``F`` as an algebra for ``th``.

    For a cone theory, ``pair`` sends ``(a, b)`` to an element of ``F(C)``
    with those projections (the first one if several exist, the first element
    of ``F(C)`` if none does), so that a functor not preserving the cone yields
    an algebra that fails the cone equations rather than no algebra at all.
    """
    cat = th.category
    ops: dict[FunctionSymbol, dict] = {}
    for m, s in th.morphism_symbols.items():
        ops[s] = {(x,): y for x, y in F.action[m].items()}
    if isinstance(th, ConeTheory):
        for c in th.cones:
            s = th.cone_symbols[c.name]
            apex = F.carriers[c.apex]
            if c.nullary:
                ops[s] = {(): apex[0]} if apex else {}
                continue
            table = {}
            for a in F.carriers[c.left]:
                for b in F.carriers[c.right]:
                    hits = [z for z in apex if F.action[c.fst][z] == a and F.action[c.snd][z] == b]
                    if hits:
                        table[(a, b)] = hits[0]
                    elif apex:
                        table[(a, b)] = apex[0]
            ops[s] = table
    if isinstance(th, FunctorTheory):
        for (a, e), s in th.constants.items():
            ops[s] = {(): e}
    return FinAlgebra(th.signature, {a: tuple(F.carriers[a]) for a in cat.objects}, ops)


def algebra_to_functor(alg: FinAlgebra, th: CategoryTheory, name: str = "F") -> FinFunctor:
    for eq in th.equations:
        if eq.label in ("id", "comp"):
            bad = find_violation(alg, eq)
            if bad is not None:
                raise NotAModel(eq, {v.name: x for v, x in bad.items()})
    cat = th.category
    action = {m: {args[0]: y for args, y in alg.ops[s].items()} for m, s in th.morphism_symbols.items()}
    F = FinFunctor(cat, {a: tuple(alg.carriers[a]) for a in cat.objects}, action, name=name)
    errs = validate_functor(F)
    if errs:
        raise NotAModel(th.equations[0], errs[0])
    return F


def preserves_cones(F: FinFunctor, cones: Iterable[ProductCone]) -> tuple[bool, tuple | None]:
    """Whether ``F(C) -> F(A) × F(B)`` is a bijection for every binary cone and
    ``F(C)`` a singleton for every nullary one.

    The witness names the cone and either two apex elements with equal
    projections or a pair of factor elements that nothing projects onto.
    """
    for c in cones:
        apex = F.carriers[c.apex]
        if c.nullary:
            if len(apex) != 1:
                return False, (c.name, "apex", apex)
            continue
        seen: dict[tuple, Hashable] = {}
        for z in apex:
            key = (F.action[c.fst][z], F.action[c.snd][z])
            if key in seen:
                return False, (c.name, "collision", seen[key], z)
            seen[key] = z
        for a in F.carriers[c.left]:
            for b in F.carriers[c.right]:
                if (a, b) not in seen:
                    return False, (c.name, "missing", a, b)
    return True, None


def listing(th: CategoryTheory) -> str:
    """Sorted text listing of sorts, symbols and equations."""
    lines = ["sorts:"]
    lines += [f"  {a}" for a in sorted(th.signature.sorts)]
    lines.append("symbols:")
    lines += sorted(f"  {s!r}" for s in th.signature.symbols)
    lines.append("equations:")
    lines += sorted(f"  [{e.label}] {e}" for e in th.equations)
    return "\n".join(lines)
