"""Yoneda versus Lambek on chosen coproducts.

Work happens in ``W = 𝒜^op``: a coproduct ``A + B`` of the base category is a
product cone ``A <- A+B -> B`` in ``W`` whose projections are the coproduct
injections, and presheaves on ``𝒜`` are covariant functors on ``W``.

* :func:`yoneda_counterexample` enumerates every ``y(I+I) -> y(I) ⊔ y(I)`` and
  checks that none inverts the copairing ``[y(inl), y(inr)]``.
* :func:`comparison_iso` checks that the reflection ``L(y(A) ⊔ y(B))`` is
  isomorphic to ``y(A+B)``: the forward map is the universal extension of
  the copairing, the backward map sends ``e`` to ``e(pair(A.id, B.id))``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Hashable

from .completion import (
    Equal, GammaHat, NotConePreserving, ReflectedPresheaf, act_morphism, equal, eta_unit, reflect,
)
from .deduction import Budget
from .fincat import (
    ConeCollection, FinCategory, FinFunctor, NatTrans, ProductCone, compose_nat, coproduct_presheaf,
    elem_name, enumerate_nat_trans, identity_nat, naturality_failures, opposite,
    validate_category, yoneda,
)
from .msa import App, Term, enumerate_terms, render
from .report import Report
from .theories import InvalidCone, preserves_cones

__all__ = [
    "EmbeddingContext", "CopairingError", "yoneda_counterexample", "lambek_embed", "Embedded",
    "SubcategoryCoproduct", "subcategory_coproduct", "ComparisonIso", "comparison_iso",
]


class CopairingError(Exception):
    """A supplied copairing is not a well-typed natural transformation into ``y(I+I)``."""


@dataclass
class EmbeddingContext:
    """A base category with chosen coproducts, given as product cones in its opposite."""

    base: FinCategory
    cones: tuple[ProductCone, ...]
    budget: Budget = field(default_factory=lambda: Budget(size=5))

    def __post_init__(self):
        errs = validate_category(self.base)
        if errs:
            raise ValueError(f"invalid category {self.base.name}: {errs[0]}")
        self.working = opposite(self.base)
        self.cones = ConeCollection(self.working, self.cones)
        bad = self.cones.invalid()
        if bad:
            raise InvalidCone(*bad[0])

    @classmethod
    def from_cones(cls, cones: ConeCollection, budget: Budget | None = None) -> "EmbeddingContext":
        """Context whose working category is ``cones.category``."""
        return cls(opposite(cones.category), tuple(cones), budget or Budget(size=5))

    def y(self, a: str) -> FinFunctor:
        return yoneda(self.working, a)

    def cone_for(self, left: str, right: str | None = None) -> ProductCone:
        right = left if right is None else right
        for c in self.cones:
            if not c.nullary and (c.left, c.right) == (left, right):
                return c
        raise KeyError(f"no chosen coproduct {left} + {right}")

    def cone(self, name: str) -> ProductCone:
        for c in self.cones:
            if c.name == name:
                return c
        raise KeyError(name)


def _copairing(ctx: EmbeddingContext, cone: ProductCone) -> tuple[FinFunctor, FinFunctor, NatTrans]:
    """``S = y(A) ⊔ y(B)``, ``y(A+B)`` and ``[y(inl), y(inr)] : S -> y(A+B)``."""
    W = ctx.working
    S, _, _ = coproduct_presheaf(ctx.y(cone.left), ctx.y(cone.right),
                                 name=f"y({cone.left})+y({cone.right})")
    P = ctx.y(cone.apex)
    comps = {}
    for x in W.objects:
        comps[x] = {}
        for tag, h in S.carriers[x]:
            comps[x][(tag, h)] = W.comp[(h, cone.fst if tag == 0 else cone.snd)]
    return S, P, NatTrans(S, P, comps)


def _check_copairing(ctx: EmbeddingContext, S: FinFunctor, P: FinFunctor, cp: NatTrans) -> None:
    for x in ctx.working.objects:
        for z in S.carriers[x]:
            if z not in cp.components.get(x, {}):
                raise CopairingError(f"copairing undefined at {x}, {elem_name(z)}")
            v = cp.components[x][z]
            if v not in P.carriers[x]:
                raise CopairingError(f"copairing sends {elem_name(z)} at {x} to {v!r}, "
                                     f"which is not an element of {P.name}({x})")
    bad = naturality_failures(cp)
    if bad:
        raise CopairingError(f"copairing is not natural at {bad[0]}")


def yoneda_counterexample(ctx: EmbeddingContext, I: str, copairing: NatTrans | None = None) -> Report:
    """Check that ``y`` does not send the chosen coproduct ``I + I`` to a coproduct."""
    cone = ctx.cone_for(I)
    W = ctx.working
    S, P, cp = _copairing(ctx, cone)
    if copairing is not None:
        _check_copairing(ctx, S, P, copairing)
        cp = copairing
    candidates = enumerate_nat_trans(P, S)
    expected = 2 * len(W.hom(I, cone.apex))
    rep = Report(f"Yoneda and the coproduct {I}+{I} = {cone.apex}")
    rep.add("nat_count", len(candidates) == expected,
            None if len(candidates) == expected else {"found": len(candidates), "expected": expected},
            count=len(candidates), expected=expected)
    ident = identity_nat(P).key()
    inverting = []
    for i, f in enumerate(candidates):
        comp = compose_nat(cp, f)
        ok = comp.key() != ident
        moved = next(((x, e, comp.components[x][e]) for x in W.objects for e in P.carriers[x]
                      if comp.components[x][e] != e), None)
        rep.add(f"candidate.{i}", ok, None if ok else "composite is the identity",
                sends_id_to=elem_name(f.components[cone.apex][W.identity[cone.apex]]),
                first_moved=None if moved is None else [moved[0], moved[1], moved[2]])
        if not ok:
            inverting.append(i)
    if inverting:
        rep.add("counterexample", False, {"inverting": inverting},
                note="no counterexample here: the copairing has a section")
    else:
        rep.add("counterexample", True, candidates=len(candidates))
    return rep


@dataclass
class Embedded:
    functor: FinFunctor
    note: str


def lambek_embed(ctx: EmbeddingContext, a: str | FinFunctor) -> Embedded:
    """``ŷ(a)``: the representable ``y(a)``, checked to preserve the chosen cones.

    Passing a functor instead of an object runs the same tag check on it.
    """
    F = ctx.y(a) if isinstance(a, str) else a
    ok, w = preserves_cones(F, ctx.cones)
    if not ok:
        raise NotConePreserving(f"{F.name} does not preserve cone {w}")
    return Embedded(F, f"{F.name} preserves all {len(ctx.cones)} chosen cones; no reflection needed")


@dataclass
class SubcategoryCoproduct:
    reflected: ReflectedPresheaf
    presheaf: FinFunctor
    left: Callable[[str, Hashable], Term]
    right: Callable[[str, Hashable], Term]


def subcategory_coproduct(ctx: EmbeddingContext, a: str, b: str, mode: str = "nbe") -> SubcategoryCoproduct:
    """``L(y(a) ⊔ y(b))`` with injections ``η ∘ inl`` and ``η ∘ inr``."""
    S, _, _ = coproduct_presheaf(ctx.y(a), ctx.y(b), name=f"y({a})+y({b})")
    R = reflect(ctx.working, ctx.cones, S, mode=mode, budget=ctx.budget)
    return SubcategoryCoproduct(R, S,
                                lambda x, h: eta_unit(R, x, (0, h)),
                                lambda x, h: eta_unit(R, x, (1, h)))


@dataclass
class ComparisonIso:
    cone: ProductCone
    reflected: ReflectedPresheaf
    target: FinFunctor
    gamma: NatTrans
    phi: GammaHat
    psi: dict[str, dict[str, Term]]
    counts: dict[str, int]
    report: Report

    @property
    def verified(self) -> bool:
        return self.report.passed


def comparison_iso(ctx: EmbeddingContext, cone: ProductCone | str, mode: str = "nbe",
                   mutate: str | None = None) -> ComparisonIso:
    """Check ``L(y(A) ⊔ y(B)) ≅ y(A+B)`` for a chosen cone.

    ``mutate`` names an object at which the copairing has its two sides
    swapped; the checks are expected to catch it.
    """
    if isinstance(cone, str):
        cone = ctx.cone(cone)
    W = ctx.working
    A, B, P = cone.left, cone.right, cone.apex
    sc = subcategory_coproduct(ctx, A, B, mode)
    R, S = sc.reflected, sc.presheaf
    th = R.theory
    _, G, gamma = _copairing(ctx, cone)
    if mutate is not None:
        comps = {x: dict(c) for x, c in gamma.components.items()}
        for (tag, h) in S.carriers[mutate]:
            comps[mutate][(tag, h)] = W.comp[(h, cone.snd if tag == 0 else cone.fst)]
        gamma = NatTrans(S, G, comps)
    phi = GammaHat(th, G, gamma)
    universal = App(th.cone_symbols[cone.name], (sc.left(A, W.identity[A]), sc.right(B, W.identity[B])))
    psi = {x: {e: act_morphism(R, e, universal) for e in G.carriers[x]} for x in W.objects}
    counts = {x: len(G.carriers[x]) for x in W.objects}

    rep = Report(f"comparison L(y({A})+y({B})) ≅ y({P})")
    bad = naturality_failures(gamma)
    rep.add("gamma_natural", not bad, bad[:3] or None)

    bad = []
    for m in W.morphisms:
        x, z = W.dom[m], W.cod[m]
        for e in G.carriers[x]:
            lhs = psi[z][G.action[m][e]]
            rhs = act_morphism(R, m, psi[x][e])
            if not isinstance(equal(R, lhs, rhs), Equal):
                bad.append((m, e))
    rep.add("psi_natural", not bad, bad[:3] or None, pairs=sum(len(G.carriers[W.dom[m]]) for m in W.morphisms))

    bad = [(x, e, phi(psi[x][e])) for x in W.objects for e in G.carriers[x] if phi(psi[x][e]) != e]
    rep.add("phi_psi_identity", not bad, bad[:3] or None, counts=counts)

    bad = []
    n = 0
    for x in W.objects:
        for z in S.carriers[x]:
            n += 1
            c = eta_unit(R, x, z)
            if not isinstance(equal(R, psi[x][phi(c)], c), Equal):
                bad.append((x, elem_name(z)))
    rep.add("psi_phi_eta", not bad, bad[:3] or None, constants=n)

    bad = []
    n = 0
    for x in W.objects:
        for t in enumerate_terms(th.signature, x, ctx.budget.size):
            n += 1
            v = phi(t)
            if not isinstance(equal(R, psi[x][v], t), Equal):
                bad.append(render(t))
                if len(bad) >= 3:
                    break
    rep.add("round_trip", not bad, bad or None, ctx.budget.record(), terms=n)
    return ComparisonIso(cone, R, G, gamma, phi, psi, counts, rep)
