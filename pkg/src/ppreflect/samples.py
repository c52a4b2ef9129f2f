"""Sample categories and presheaves shipped with the package."""
from __future__ import annotations

import itertools

from .fincat import (
    ConeCollection, EqualizerCone, FinCategory, FinFunctor, ProductCone,
    coproduct_presheaf, opposite, yoneda,
)


def _fn_name(m: int, n: int, images: tuple[int, ...]) -> str:
    if m == n and images == tuple(range(m)):
        return f"id_{m}"
    if (m, n) == (1, 2):
        return "inl" if images == (0,) else "inr"
    if (m, n) == (2, 1):
        return "codiag"
    return f"d{m}{n}_" + "".join(map(str, images)) if images else f"d{m}{n}"


def delta(sizes: tuple[int, ...] = (0, 1, 2)) -> FinCategory:
    """Skeleton of finite sets: objects are sizes, morphisms all functions.

    With the default sizes this is the category Δ with objects 0, 1, 2; the
    injections ``inl, inr : 1 -> 2`` make ``2`` the coproduct ``1 + 1``.
    """
    objects = tuple(str(n) for n in sizes)
    morphs: dict[str, tuple[int, int, tuple[int, ...]]] = {}
    for m in sizes:
        for n in sizes:
            for images in itertools.product(range(n), repeat=m):
                morphs[_fn_name(m, n, images)] = (m, n, images)
    by_data = {v: k for k, v in morphs.items()}
    comp = {}
    for f, (m, n, fi) in morphs.items():
        for g, (n2, p, gi) in morphs.items():
            if n2 == n:
                comp[(g, f)] = by_data[(m, p, tuple(gi[i] for i in fi))]
    names = tuple(morphs)
    return FinCategory(
        name="Delta",
        objects=objects,
        morphisms=names,
        dom={k: str(v[0]) for k, v in morphs.items()},
        cod={k: str(v[1]) for k, v in morphs.items()},
        identity={str(n): f"id_{n}" for n in sizes},
        comp=comp,
    )


def delta_op() -> FinCategory:
    return opposite(delta())


def delta_op_cones(terminal: bool = True) -> ConeCollection:
    """``2 = 1 + 1`` in Δ, read as a product cone in Δ^op, plus the initial object 0 as terminal."""
    cat = delta_op()
    cones = [ProductCone("plus", "2", "1", "1", "inl", "inr")]
    if terminal:
        cones.append(ProductCone("zero", "0"))
    return ConeCollection(cat, cones)


def poset(name: str, elements: list[str], leq: list[tuple[str, str]]) -> FinCategory:
    """Thin category of a partial order given by generating relations."""
    rel = {(a, a) for a in elements} | set(leq)
    changed = True
    while changed:
        changed = False
        for (a, b), (c, d) in itertools.product(list(rel), repeat=2):
            if b == c and (a, d) not in rel:
                rel.add((a, d))
                changed = True
    morphs = {}
    for a in elements:
        for b in elements:
            if (a, b) in rel:
                morphs[f"id_{a}" if a == b else f"{a}_{b}"] = (a, b)
    by_ends = {v: k for k, v in morphs.items()}
    comp = {}
    for f, (a, b) in morphs.items():
        for g, (b2, c) in morphs.items():
            if b2 == b:
                comp[(g, f)] = by_ends[(a, c)]
    return FinCategory(name, tuple(elements), tuple(morphs),
                       {k: v[0] for k, v in morphs.items()}, {k: v[1] for k, v in morphs.items()},
                       {a: f"id_{a}" for a in elements}, comp)


def diamond() -> FinCategory:
    """The 4-element poset bot < a, b < top."""
    return poset("Diamond", ["bot", "a", "b", "top"], [("bot", "a"), ("bot", "b"), ("a", "top"), ("b", "top")])


def equalizer_category() -> FinCategory:
    """``E --e--> A ==f,g==> B`` with ``f∘e = g∘e = h``; ``e`` is an equalizer of ``f, g``."""
    morphs = {"id_E": ("E", "E"), "id_A": ("A", "A"), "id_B": ("B", "B"),
              "e": ("E", "A"), "f": ("A", "B"), "g": ("A", "B"), "h": ("E", "B")}
    comp = {}
    for m, (a, b) in morphs.items():
        comp[(f"id_{b}", m)] = m
        comp[(m, f"id_{a}")] = m
    comp[("f", "e")] = "h"
    comp[("g", "e")] = "h"
    return FinCategory("Eq", ("E", "A", "B"), tuple(morphs),
                       {k: v[0] for k, v in morphs.items()}, {k: v[1] for k, v in morphs.items()},
                       {"E": "id_E", "A": "id_A", "B": "id_B"}, comp)


def equalizer_cone() -> EqualizerCone:
    return EqualizerCone("eq", "e", "f", "g")


def eq_functor(E: tuple, A: tuple, B: tuple, e: dict, f: dict, g: dict, name: str = "F") -> FinFunctor:
    cat = equalizer_category()
    h = {x: f[e[x]] for x in E}
    action = {"id_E": {x: x for x in E}, "id_A": {x: x for x in A}, "id_B": {x: x for x in B},
              "e": e, "f": f, "g": g, "h": h}
    return FinFunctor(cat, {"E": E, "A": A, "B": B}, action, name=name)


def eq_preserving_functor() -> FinFunctor:
    """F(A) = {0,1,2}, F(f) = id, F(g) swaps 1 and 2; F(E) = {0} is exactly the equalized part."""
    return eq_functor(("0",), ("0", "1", "2"), ("0", "1", "2"),
                      {"0": "0"}, {"0": "0", "1": "1", "2": "2"}, {"0": "0", "1": "2", "2": "1"},
                      name="Fe")


def eq_nonpreserving_functor() -> FinFunctor:
    """Same as :func:`eq_preserving_functor` but F(E) has two elements mapping to 0."""
    return eq_functor(("0", "0b"), ("0", "1", "2"), ("0", "1", "2"),
                      {"0": "0", "0b": "0"}, {"0": "0", "1": "1", "2": "2"}, {"0": "0", "1": "2", "2": "1"},
                      name="Fbad")


def sample_presheaves() -> list[FinFunctor]:
    """Three presheaves on Δ (covariant functors on Δ^op) used across the tests."""
    cat = delta_op()
    y1 = yoneda(cat, "1")
    y2 = yoneda(cat, "2")
    f, _, _ = coproduct_presheaf(y1, y1, name="y(1)+y(1)")
    terminal = FinFunctor(cat, {a: ("*",) for a in cat.objects},
                          {m: {"*": "*"} for m in cat.morphisms}, name="1")
    return [f, y2, terminal]
