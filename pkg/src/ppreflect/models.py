"""Enumeration of small cone-preserving functors, used as separator candidates."""
from __future__ import annotations

import itertools
from typing import Iterator, Sequence

from .fincat import FinCategory, FinFunctor, ProductCone


def _size_vectors(cat: FinCategory, cones: Sequence[ProductCone], max_size: int) -> Iterator[dict[str, int]]:
    for sizes in itertools.product(range(max_size + 1), repeat=len(cat.objects)):
        n = dict(zip(cat.objects, sizes))
        ok = True
        for c in cones:
            want = 1 if c.nullary else n[c.left] * n[c.right]
            if n[c.apex] != want:
                ok = False
                break
        if ok and all(n[cat.dom[m]] == 0 or n[cat.cod[m]] > 0 for m in cat.morphisms):
            yield n


def enumerate_models(cat: FinCategory, cones: Sequence[ProductCone], max_size: int = 3,
                     limit: int | None = 200, max_nodes: int = 200_000) -> list[FinFunctor]:
    """Cone-preserving functors with every carrier of size at most ``max_size``.

    Carriers are ``0..n-1``.  Tables are chosen morphism by morphism with
    functoriality and cone bijectivity checked as soon as the entries involved
    are fixed.  Stops after ``limit`` models or ``max_nodes`` search nodes.
    """
    out: list[FinFunctor] = []
    budget = [max_nodes]
    free = [m for m in cat.morphisms if not cat.is_identity(m)]
    for n in _size_vectors(cat, cones, max_size):
        carriers = {a: tuple(range(n[a])) for a in cat.objects}
        tables: dict[str, tuple[int, ...]] = {cat.identity[a]: carriers[a] for a in cat.objects}

        def consistent(m: str) -> bool:
            for g, f in cat.composable():
                if m not in (g, f, cat.comp[(g, f)]):
                    continue
                gf = cat.comp[(g, f)]
                if g in tables and f in tables and gf in tables:
                    tg, tf, tgf = tables[g], tables[f], tables[gf]
                    if any(tgf[x] != tg[tf[x]] for x in carriers[cat.dom[f]]):
                        return False
            for c in cones:
                if c.nullary or m not in (c.fst, c.snd):
                    continue
                if c.fst in tables and c.snd in tables:
                    pairs = {(tables[c.fst][z], tables[c.snd][z]) for z in carriers[c.apex]}
                    if len(pairs) != len(carriers[c.apex]):
                        return False
            return True

        def go(i: int) -> bool:
            budget[0] -= 1
            if budget[0] <= 0:
                return True
            if i == len(free):
                action = {m: dict(enumerate(t)) for m, t in tables.items()}
                out.append(FinFunctor(cat, dict(carriers), action,
                                      name=f"M{len(out)}[{','.join(str(n[a]) for a in cat.objects)}]"))
                return limit is not None and len(out) >= limit
            m = free[i]
            src, dst = carriers[cat.dom[m]], carriers[cat.cod[m]]
            for t in itertools.product(dst, repeat=len(src)):
                tables[m] = t
                if consistent(m) and go(i + 1):
                    return True
                del tables[m]
            return False

        if go(0):
            break
    return out
