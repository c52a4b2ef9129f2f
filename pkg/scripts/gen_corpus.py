"""Regenerate the shipped .cat files from the sample constructions."""
from __future__ import annotations

import argparse
from pathlib import Path

from ppreflect.fincat import FinCategory, FinFunctor, elem_name
from ppreflect.samples import (
    delta, eq_nonpreserving_functor, eq_preserving_functor, equalizer_category,
)


def category_block(cat: FinCategory, auto_identities: bool = True) -> str:
    ids = set(cat.identity.values())
    lines = [f"category {cat.name} {{", f"  objects: {', '.join(cat.objects)};", "  morphisms:"]
    ms = [m for m in cat.morphisms if not (auto_identities and m in ids)]
    lines += [f"    {m} : {cat.dom[m]} -> {cat.cod[m]};" for m in ms]
    lines.append("  compose:")
    for (g, f), h in cat.comp.items():
        if g in ids or f in ids:
            continue
        lines.append(f"    {g} . {f} = {h};")
    lines.append("}")
    return "\n".join(lines)


def functor_block(F: FinFunctor, cat_name: str) -> str:
    cat = F.category
    lines = [f"functor {F.name} : {cat_name} {{"]
    for a in cat.objects:
        lines.append(f"  {a} -> {{ {', '.join(elem_name(x) for x in F.carriers[a])} }};")
    ids = set(cat.identity.values())
    for m in cat.morphisms:
        if m in ids:
            continue
        table = ", ".join(f"{elem_name(x)} => {elem_name(y)}" for x, y in F.action[m].items())
        lines.append(f"  {m} -> [{table}];")
    lines.append("}")
    return "\n".join(lines)


def delta_file() -> str:
    return "\n\n".join([
        "# Finite sets of size 0, 1, 2 with all functions; inl, inr : 1 -> 2 make 2 = 1 + 1.",
        category_block(delta()),
        "category DeltaOp = op Delta;",
        "# the coproduct 1 + 1 and the initial object, as cones in the opposite category",
        "cone plus { apex: 2, left: 1, right: 1, fst: inl, snd: inr }",
        "terminal zero { apex: 0 }",
        "functor Y1 = hom(1) : DeltaOp;\nfunctor Y2 = hom(2) : DeltaOp;\nfunctor S = Y1 + Y1;",
        "functor T : DeltaOp {\n  0 -> { x };\n  1 -> { x };\n  2 -> { x };\n"
        + "".join(f"  {m} -> [x => x];\n" for m in delta().morphisms if not m.startswith("id_"))
        + "}",
        "query default { functor: S; models: Y2, T; cone: plus; }",
    ]) + "\n"


def pairs_file() -> str:
    """Δ^op restricted to 1 and 2, renamed so that O2 = O1 × O1 with projections fst, snd."""
    d = delta()
    keep = [m for m in d.morphisms if d.dom[m] != "0" and d.cod[m] != "0"]
    ren = {"id_1": "id_O1", "id_2": "id_O2", "inl": "fst", "inr": "snd", "codiag": "diag",
           "d22_00": "c1", "d22_11": "c2", "d22_10": "swap"}
    obj = {"1": "O1", "2": "O2"}
    lines = ["category P {", "  objects: O1, O2;", "  morphisms:"]
    lines += [f"    {ren[m]} : {obj[d.cod[m]]} -> {obj[d.dom[m]]};" for m in keep if not m.startswith("id_")]
    lines.append("  compose:")
    for (g, f), h in d.comp.items():
        if g in keep and f in keep and not g.startswith("id_") and not f.startswith("id_"):
            lines.append(f"    {ren[f]} . {ren[g]} = {ren[h]};")
    lines.append("}")
    # F(O1) = {a, b}, F(O2) = pairs; F preserves the product
    pairs = ["aa", "ab", "ba", "bb"]
    acts = {
        "fst": {p: p[0] for p in pairs}, "snd": {p: p[1] for p in pairs},
        "diag": {"a": "aa", "b": "bb"},
        "c1": {p: p[0] * 2 for p in pairs}, "c2": {p: p[1] * 2 for p in pairs},
        "swap": {p: p[::-1] for p in pairs},
    }
    fl = ["functor F : P {", "  O1 -> { a, b };", "  O2 -> { aa, ab, ba, bb };"]
    fl += [f"  {m} -> [{', '.join(f'{x} => {y}' for x, y in t.items())}];" for m, t in acts.items()]
    fl.append("}")
    return "\n\n".join([
        "# O2 is the product O1 x O1 with projections fst and snd.",
        "\n".join(lines),
        "cone prod { apex: O2, left: O1, right: O1, fst: fst, snd: snd }",
        "\n".join(fl),
        "query default { functor: F; models: F; cone: prod; }",
    ]) + "\n"


def equalizer_file() -> str:
    cat = equalizer_category()
    return "\n\n".join([
        "# e : E -> A equalizes f, g : A -> B.",
        category_block(cat),
        "equalizer eq { e: e, f: f, g: g }",
        functor_block(eq_preserving_functor(), cat.name),
        "# F(E) has a second element over 0, so F(e) is no longer injective",
        functor_block(eq_nonpreserving_functor(), cat.name),
        "query default { functor: Fe; models: Fe; }",
    ]) + "\n"


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "corpus"))
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, text in [("delta.cat", delta_file()), ("pairs.cat", pairs_file()), ("equalizer.cat", equalizer_file())]:
        (out / name).write_text(text, encoding="utf-8")
        print(f"wrote {out / name}")


if __name__ == "__main__":
    main()
