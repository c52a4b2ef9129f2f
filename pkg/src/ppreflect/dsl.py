"""The ``.cat`` specification language.

Declarations::

    category NAME { objects: a, b; morphisms: f : a -> b; identities: a = id_a;
                    compose: g . f = h; }
    category NAME = op OTHER;
    cone NAME [: CAT] { apex: c, left: a, right: b, fst: p, snd: q }
    terminal NAME [: CAT] { apex: t }
    equalizer NAME [: CAT] { e: e, f: f, g: g }
    functor NAME : CAT { OBJ -> { x, y }; MORPH -> [ x => y, y => y ]; }
    functor NAME = hom(OBJ) : CAT;          functor NAME = F + G;
    nat NAME : F -> G { OBJ : [ x => y ]; }
    query NAME { key: value, ...; }

``#`` starts a comment.  Identities default to ``id_OBJ`` and the entries
``id . f = f`` and ``f . id = f`` are filled in; every other composable pair
must be listed.  Cones without ``: CAT`` belong to the most recent category.

Terms: ``f(t)``, ``pair(s, t)``, ``unit``, ``eql(t)`` and constants
``OBJ.elem``, resolved against a theory's signature.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Hashable

from .fincat import (
    EqualizerCone, FinCategory, FinFunctor, NatTrans, ProductCone, coproduct_presheaf, elem_name,
    opposite, yoneda,
)
from .msa import App, FunctionSymbol, IllSorted, Signature, Term

__all__ = [
    "Diagnostic", "ParseError", "SpecDocument", "parse", "analyze", "load", "print_document",
    "parse_term", "TermSyntaxError",
]


@dataclass(frozen=True)
class Diagnostic:
    line: int
    col: int
    message: str

    def __str__(self) -> str:
        return f"{self.line}:{self.col}: {self.message}"


class ParseError(Exception):
    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = diagnostics
        super().__init__("\n".join(map(str, diagnostics)))


# --- lexer ---------------------------------------------------------------------

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+) | (?P<nl>\n) | (?P<comment>\#[^\n]*)
  | (?P<string>"[^"\n]*")
  | (?P<arrow>->) | (?P<fat>=>)
  | (?P<ident>[A-Za-z0-9_][A-Za-z0-9_'^]*)
  | (?P<punct>[{}\[\]();:,.=+])
""", re.VERBOSE)


@dataclass(frozen=True)
class Tok:
    kind: str
    text: str
    line: int
    col: int


def _lex(src: str) -> list[Tok]:
    out = []
    line, start, pos = 1, 0, 0
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if m is None:
            raise ParseError([Diagnostic(line, pos - start + 1, f"unexpected character {src[pos]!r}")])
        kind = m.lastgroup
        if kind == "nl":
            line, start = line + 1, m.end()
        elif kind not in ("ws", "comment"):
            text = m.group()
            if kind == "string":
                text = text[1:-1]
            out.append(Tok(kind, text, line, pos - start + 1))
        pos = m.end()
    out.append(Tok("eof", "", line, pos - start + 1))
    return out


# --- syntax tree ------------------------------------------------------------------

Pos = tuple[int, int]


@dataclass
class CategoryDecl:
    name: str
    objects: list[str]
    morphisms: list[tuple[str, str, str]]
    identities: list[tuple[str, str]] | None
    compose: list[tuple[str, str, str]]
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass
class OppositeDecl:
    name: str
    source: str
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass
class ConeDecl:
    kind: str  # product | terminal | equalizer
    name: str
    category: str | None
    fields: list[tuple[str, str]]
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass
class FunctorDecl:
    name: str
    category: str
    carriers: list[tuple[str, list[str]]]
    actions: list[tuple[str, list[tuple[str, str]]]]
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass
class FunctorExprDecl:
    name: str
    expr: tuple  # ("hom", obj, cat) | ("sum", left, right)
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass
class NatDecl:
    name: str
    source: str
    target: str
    components: list[tuple[str, list[tuple[str, str]]]]
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass
class QueryDecl:
    name: str
    entries: list[tuple[str, list[str]]]
    pos: Pos = field(default=(0, 0), compare=False)


Decl = CategoryDecl | OppositeDecl | ConeDecl | FunctorDecl | FunctorExprDecl | NatDecl | QueryDecl


@dataclass
class SpecDocument:
    decls: list
    categories: dict[str, FinCategory] = field(default_factory=dict, compare=False)
    cones: dict[str, tuple[str, ProductCone | EqualizerCone]] = field(default_factory=dict, compare=False)
    functors: dict[str, FinFunctor] = field(default_factory=dict, compare=False)
    nats: dict[str, NatTrans] = field(default_factory=dict, compare=False)
    queries: dict[str, dict[str, list[str]]] = field(default_factory=dict, compare=False)

    def product_cones(self, cat: str) -> list[ProductCone]:
        return [c for k, c in self.cones.values() if k == cat and isinstance(c, ProductCone)]

    def equalizer_cones(self, cat: str) -> list[EqualizerCone]:
        return [c for k, c in self.cones.values() if k == cat and isinstance(c, EqualizerCone)]

    def category_of(self, functor: str) -> str:
        F = self.functors[functor]
        return next(n for n, c in self.categories.items() if c is F.category)

    def config(self, command: str | None = None) -> dict[str, list[str]]:
        """Query entries merged in order, the block named after ``command`` last."""
        out: dict[str, list[str]] = {}
        key = None if command is None else command.replace("-", "_")
        for name, entries in self.queries.items():
            if name != key:
                out.update(entries)
        if key in self.queries:
            out.update(self.queries[key])
        return out


# --- parser ---------------------------------------------------------------------------

class _Parser:
    def __init__(self, src: str):
        self.toks = _lex(src)
        self.i = 0

    @property
    def tok(self) -> Tok:
        return self.toks[self.i]

    def error(self, msg: str, tok: Tok | None = None):
        t = tok or self.tok
        raise ParseError([Diagnostic(t.line, t.col, msg)])

    def at(self, text: str) -> bool:
        return self.tok.kind in ("punct", "arrow", "fat") and self.tok.text == text

    def expect(self, text: str) -> Tok:
        if not self.at(text):
            self.error(f"unexpected token {self.tok.text or 'end of input'!r}, expected {text!r}")
        t = self.tok
        self.i += 1
        return t

    def ident(self, what: str = "identifier") -> str:
        if self.tok.kind != "ident":
            self.error(f"unexpected token {self.tok.text or 'end of input'!r}, expected {what}")
        t = self.tok
        self.i += 1
        return t.text

    def keyword(self, word: str) -> None:
        if self.tok.kind != "ident" or self.tok.text != word:
            self.error(f"unexpected token {self.tok.text or 'end of input'!r}, expected {word!r}")
        self.i += 1

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.i += 1
            return True
        return False

    def separated(self, item, end: str, sep: str = ",") -> list:
        out = []
        while not self.at(end):
            out.append(item())
            if not self.accept(sep):
                break
        return out

    def document(self) -> SpecDocument:
        decls = []
        while self.tok.kind != "eof":
            t = self.tok
            if t.kind != "ident":
                self.error(f"unexpected token {t.text!r}, expected a declaration")
            handler = {"category": self.category, "cone": self.cone, "terminal": self.cone,
                       "equalizer": self.cone, "functor": self.functor, "nat": self.nat,
                       "query": self.query}.get(t.text)
            if handler is None:
                self.error(f"unknown declaration {t.text!r}")
            decls.append(handler())
        return SpecDocument(decls)

    def category(self):
        t = self.tok
        self.i += 1
        name = self.ident("category name")
        if self.accept("="):
            self.keyword("op")
            src = self.ident("category name")
            self.expect(";")
            return OppositeDecl(name, src, (t.line, t.col))
        self.expect("{")
        objects: list[str] = []
        morphisms: list[tuple[str, str, str]] = []
        identities = None
        compose: list[tuple[str, str, str]] = []
        while not self.at("}"):
            sec = self.tok
            key = self.ident("section name")
            self.expect(":")
            if key == "objects":
                objects += self.separated(self.ident, ";")
            elif key == "morphisms":
                morphisms += self.separated(self._morphism, "}", ";")
                continue
            elif key == "identities":
                identities = (identities or []) + self.separated(self._binding, "}", ";")
                continue
            elif key == "compose":
                compose += self.separated(self._composite, "}", ";")
                continue
            else:
                self.error(f"unknown category section {key!r}", sec)
            self.accept(";")
        self.expect("}")
        return CategoryDecl(name, objects, morphisms, identities, compose, (t.line, t.col))

    def _section_end(self) -> bool:
        # a new "key :" pair starts the next section
        nxt = self.toks[self.i + 1] if self.i + 1 < len(self.toks) else None
        return self.tok.kind == "ident" and nxt is not None and nxt.text == ":" and \
            self.tok.text in ("objects", "morphisms", "identities", "compose")

    def _morphism(self):
        if self._section_end():
            return None
        name = self.ident("morphism name")
        self.expect(":")
        a = self.ident("object")
        self.expect("->")
        b = self.ident("object")
        return (name, a, b)

    def _binding(self):
        if self._section_end():
            return None
        a = self.ident("object")
        self.expect("=")
        return (a, self.ident("morphism"))

    def _composite(self):
        if self._section_end():
            return None
        g = self.ident("morphism")
        self.expect(".")
        f = self.ident("morphism")
        self.expect("=")
        return (g, f, self.ident("morphism"))

    def cone(self):
        t = self.tok
        kind = {"cone": "product", "terminal": "terminal", "equalizer": "equalizer"}[t.text]
        self.i += 1
        name = self.ident("cone name")
        cat = self.ident("category name") if self.accept(":") else None
        self.expect("{")

        def entry():
            k = self.ident("field name")
            self.expect(":")
            return (k, self.ident())
        fields = self.separated(entry, "}")
        self.accept(";")
        self.expect("}")
        return ConeDecl(kind, name, cat, fields, (t.line, t.col))

    def functor(self):
        t = self.tok
        self.i += 1
        name = self.ident("functor name")
        if self.accept("="):
            expr = self._functor_expr()
            self.expect(";")
            return FunctorExprDecl(name, expr, (t.line, t.col))
        self.expect(":")
        cat = self.ident("category name")
        self.expect("{")
        carriers, actions = [], []
        while not self.at("}"):
            key = self.ident("object or morphism")
            self.expect("->")
            if self.accept("{"):
                carriers.append((key, self.separated(self.ident, "}")))
                self.expect("}")
            elif self.at("["):
                actions.append((key, self._table()))
            else:
                self.error("expected '{' (carrier) or '[' (action table)")
            if not self.accept(";"):
                break
        self.expect("}")
        return FunctorDecl(name, cat, carriers, actions, (t.line, t.col))

    def _functor_expr(self):
        left = self._functor_atom()
        while self.accept("+"):
            left = ("sum", left, self._functor_atom())
        return left

    def _functor_atom(self):
        if self.tok.kind == "ident" and self.tok.text == "hom":
            self.i += 1
            self.expect("(")
            obj = self.ident("object")
            self.expect(")")
            self.expect(":")
            return ("hom", obj, self.ident("category name"))
        return ("ref", self.ident("functor name"))

    def _table(self) -> list[tuple[str, str]]:
        self.expect("[")

        def entry():
            x = self.ident("element")
            self.expect("=>")
            return (x, self.ident("element"))
        out = self.separated(entry, "]")
        self.expect("]")
        return out

    def nat(self):
        t = self.tok
        self.i += 1
        name = self.ident("transformation name")
        self.expect(":")
        src = self.ident("functor name")
        self.expect("->")
        dst = self.ident("functor name")
        self.expect("{")
        comps = []
        while not self.at("}"):
            obj = self.ident("object")
            self.expect(":")
            comps.append((obj, self._table()))
            if not self.accept(";"):
                break
        self.expect("}")
        return NatDecl(name, src, dst, comps, (t.line, t.col))

    def query(self):
        t = self.tok
        self.i += 1
        name = self.ident("query name")
        self.expect("{")
        entries = []
        while not self.at("}"):
            key = self.ident("key")
            self.expect(":")

            def value():
                if self.tok.kind in ("ident", "string"):
                    v = self.tok.text
                    self.i += 1
                    return v
                self.error("expected a value")
            entries.append((key, self.separated(value, ";")))
            if not self.accept(";"):
                break
        self.expect("}")
        return QueryDecl(name, entries, (t.line, t.col))


def _clean(decl):
    # drop the None placeholders left by section look-ahead
    if isinstance(decl, CategoryDecl):
        decl.morphisms = [m for m in decl.morphisms if m is not None]
        decl.compose = [c for c in decl.compose if c is not None]
        if decl.identities is not None:
            decl.identities = [b for b in decl.identities if b is not None]
    return decl


def parse(src: str) -> SpecDocument:
    """Parse and analyze ``src``; raises :class:`ParseError` with positioned diagnostics."""
    doc = _Parser(src).document()
    doc.decls = [_clean(d) for d in doc.decls]
    analyze(doc)
    return doc


def load(path: str) -> SpecDocument:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())


# --- semantic analysis -------------------------------------------------------------------

class _Analyzer:
    def __init__(self, doc: SpecDocument):
        self.doc = doc
        self.diags: list[Diagnostic] = []
        self.names: set[str] = set()
        self.last_category: str | None = None

    def err(self, pos: Pos, msg: str) -> None:
        self.diags.append(Diagnostic(pos[0], pos[1], msg))

    def declare(self, name: str, pos: Pos) -> bool:
        if name in self.names:
            self.err(pos, f"duplicate declaration {name!r}")
            return False
        self.names.add(name)
        return True

    def run(self) -> None:
        for d in self.doc.decls:
            getattr(self, type(d).__name__)(d)

    def CategoryDecl(self, d: CategoryDecl) -> None:
        if not self.declare(d.name, d.pos):
            return
        objs = list(d.objects)
        if len(set(objs)) != len(objs):
            self.err(d.pos, f"duplicate object in category {d.name}")
            return
        dom, cod = {}, {}
        morphs = []
        for m, a, b in d.morphisms:
            for o in (a, b):
                if o not in objs:
                    self.err(d.pos, f"unknown id {o!r} in morphism {m}")
                    return
            if m in dom:
                self.err(d.pos, f"duplicate morphism {m!r}")
                return
            dom[m], cod[m] = a, b
            morphs.append(m)
        identity = dict(d.identities) if d.identities is not None else {}
        for a in objs:
            i = identity.setdefault(a, f"id_{a}")
            if i not in dom:
                dom[i], cod[i] = a, a
                morphs.append(i)
            elif (dom[i], cod[i]) != (a, a):
                self.err(d.pos, f"identity {i} is not an endomorphism of {a}")
                return
        ids = set(identity.values())
        comp = {}
        for g, f, h in d.compose:
            for m in (g, f, h):
                if m not in dom:
                    self.err(d.pos, f"unknown id {m!r} in composition {g} . {f}")
                    return
            if cod[f] != dom[g]:
                self.err(d.pos, f"composition {g} . {f} is not composable")
                return
            if (g, f) in comp and comp[(g, f)] != h:
                self.err(d.pos, f"duplicate composition entry {g} . {f}")
                return
            comp[(g, f)] = h
        for f in morphs:
            comp.setdefault((identity[cod[f]], f), f)
            comp.setdefault((f, identity[dom[f]]), f)
        for f in morphs:
            for g in morphs:
                if dom[g] == cod[f] and (g, f) not in comp and not (g in ids or f in ids):
                    self.err(d.pos, f"non-total composition table: missing {g} . {f}")
                    return
        self.doc.categories[d.name] = FinCategory(d.name, tuple(objs), tuple(morphs), dom, cod, identity, comp)
        self.last_category = d.name

    def OppositeDecl(self, d: OppositeDecl) -> None:
        if not self.declare(d.name, d.pos):
            return
        src = self.doc.categories.get(d.source)
        if src is None:
            self.err(d.pos, f"unknown id {d.source!r}")
            return
        op = opposite(src)
        op.name = d.name
        self.doc.categories[d.name] = op
        self.last_category = d.name

    def ConeDecl(self, d: ConeDecl) -> None:
        if not self.declare(d.name, d.pos):
            return
        catname = d.category or self.last_category
        cat = self.doc.categories.get(catname) if catname else None
        if cat is None:
            self.err(d.pos, f"unknown id {catname!r}" if catname else "cone declared before any category")
            return
        want = {"product": ("apex", "left", "right", "fst", "snd"), "terminal": ("apex",),
                "equalizer": ("e", "f", "g")}[d.kind]
        fields = dict(d.fields)
        if len(fields) != len(d.fields):
            self.err(d.pos, f"duplicate field in {d.name}")
            return
        if set(fields) != set(want):
            self.err(d.pos, f"{d.kind} {d.name} needs fields {', '.join(want)}")
            return
        for k, v in fields.items():
            pool = cat.objects if k in ("apex", "left", "right") else cat.morphisms
            if v not in pool:
                self.err(d.pos, f"unknown id {v!r} in {d.name}")
                return
        if d.kind == "equalizer":
            cone = EqualizerCone(d.name, fields["e"], fields["f"], fields["g"])
        elif d.kind == "terminal":
            cone = ProductCone(d.name, fields["apex"])
        else:
            cone = ProductCone(d.name, fields["apex"], fields["left"], fields["right"], fields["fst"], fields["snd"])
        self.doc.cones[d.name] = (catname, cone)

    def _elements(self, F: FinFunctor, obj: str) -> dict[str, Hashable]:
        return {elem_name(x): x for x in F.carriers[obj]}

    def FunctorDecl(self, d: FunctorDecl) -> None:
        if not self.declare(d.name, d.pos):
            return
        cat = self.doc.categories.get(d.category)
        if cat is None:
            self.err(d.pos, f"unknown id {d.category!r}")
            return
        carriers = {}
        for obj, elems in d.carriers:
            if obj not in cat.objects:
                self.err(d.pos, f"unknown id {obj!r} in functor {d.name}")
                return
            if obj in carriers or len(set(elems)) != len(elems):
                self.err(d.pos, f"duplicate carrier entry for {obj} in functor {d.name}")
                return
            carriers[obj] = tuple(elems)
        for a in cat.objects:
            carriers.setdefault(a, ())
        action = {}
        for m, table in d.actions:
            if m not in cat.morphisms:
                self.err(d.pos, f"unknown id {m!r} in functor {d.name}")
                return
            t = dict(table)
            src = carriers[cat.dom[m]]
            if set(t) != set(src) or len(t) != len(table):
                self.err(d.pos, f"non-total action table for {m} in functor {d.name}")
                return
            action[m] = t
        for a, i in cat.identity.items():
            action.setdefault(i, {x: x for x in carriers[a]})
        for m in cat.morphisms:
            if m not in action:
                if carriers[cat.dom[m]]:
                    self.err(d.pos, f"non-total functor {d.name}: no table for {m}")
                    return
                action[m] = {}
        self.doc.functors[d.name] = FinFunctor(cat, carriers, action, name=d.name)

    def _functor_value(self, expr, pos: Pos) -> FinFunctor | None:
        kind = expr[0]
        if kind == "ref":
            F = self.doc.functors.get(expr[1])
            if F is None:
                self.err(pos, f"unknown id {expr[1]!r}")
            return F
        if kind == "hom":
            cat = self.doc.categories.get(expr[2])
            if cat is None or expr[1] not in cat.objects:
                self.err(pos, f"unknown id {expr[2] if cat is None else expr[1]!r}")
                return None
            return yoneda(cat, expr[1])
        a, b = self._functor_value(expr[1], pos), self._functor_value(expr[2], pos)
        if a is None or b is None:
            return None
        if a.category is not b.category:
            self.err(pos, "sum of functors on different categories")
            return None
        return coproduct_presheaf(a, b)[0]

    def FunctorExprDecl(self, d: FunctorExprDecl) -> None:
        if not self.declare(d.name, d.pos):
            return
        F = self._functor_value(d.expr, d.pos)
        if F is not None:
            self.doc.functors[d.name] = FinFunctor(F.category, F.carriers, F.action, name=d.name)

    def NatDecl(self, d: NatDecl) -> None:
        if not self.declare(d.name, d.pos):
            return
        F, G = self.doc.functors.get(d.source), self.doc.functors.get(d.target)
        if F is None or G is None:
            self.err(d.pos, f"unknown id {d.source if F is None else d.target!r}")
            return
        if F.category is not G.category:
            self.err(d.pos, f"{d.name}: functors on different categories")
            return
        comps = {}
        for obj, table in d.components:
            if obj not in F.category.objects:
                self.err(d.pos, f"unknown id {obj!r} in {d.name}")
                return
            src, dst = self._elements(F, obj), self._elements(G, obj)
            comp = {}
            for x, y in table:
                if x not in src or y not in dst:
                    self.err(d.pos, f"unknown id {x if x not in src else y!r} in {d.name} at {obj}")
                    return
                comp[src[x]] = dst[y]
            if len(comp) != len(src) or len(table) != len(src):
                self.err(d.pos, f"non-total component {obj} in {d.name}")
                return
            comps[obj] = comp
        for a in F.category.objects:
            if a not in comps:
                if F.carriers[a]:
                    self.err(d.pos, f"non-total transformation {d.name}: no component at {a}")
                    return
                comps[a] = {}
        self.doc.nats[d.name] = NatTrans(F, G, comps)

    def QueryDecl(self, d: QueryDecl) -> None:
        if not self.declare(d.name, d.pos):
            return
        self.doc.queries[d.name] = dict(d.entries)


def analyze(doc: SpecDocument) -> SpecDocument:
    a = _Analyzer(doc)
    a.run()
    if a.diags:
        raise ParseError(a.diags)
    return doc


# --- printer ---------------------------------------------------------------------------------

def _table(pairs: list[tuple[str, str]]) -> str:
    return "[" + ", ".join(f"{x} => {y}" for x, y in pairs) + "]"


def _expr(e) -> str:
    if e[0] == "ref":
        return e[1]
    if e[0] == "hom":
        return f"hom({e[1]}) : {e[2]}"
    right = _expr(e[2])
    return f"{_expr(e[1])} + {right}"


def print_document(doc: SpecDocument) -> str:
    out = []
    for d in doc.decls:
        if isinstance(d, CategoryDecl):
            lines = [f"category {d.name} {{", f"  objects: {', '.join(d.objects)};"]
            if d.morphisms:
                lines.append("  morphisms: " + "; ".join(f"{m} : {a} -> {b}" for m, a, b in d.morphisms) + ";")
            if d.identities is not None:
                lines.append("  identities: " + "; ".join(f"{a} = {i}" for a, i in d.identities) + ";")
            if d.compose:
                lines.append("  compose: " + "; ".join(f"{g} . {f} = {h}" for g, f, h in d.compose) + ";")
            lines.append("}")
            out.append("\n".join(lines))
        elif isinstance(d, OppositeDecl):
            out.append(f"category {d.name} = op {d.source};")
        elif isinstance(d, ConeDecl):
            kw = {"product": "cone", "terminal": "terminal", "equalizer": "equalizer"}[d.kind]
            cat = f" : {d.category}" if d.category else ""
            out.append(f"{kw} {d.name}{cat} {{ " + ", ".join(f"{k}: {v}" for k, v in d.fields) + " }")
        elif isinstance(d, FunctorDecl):
            lines = [f"functor {d.name} : {d.category} {{"]
            for obj, elems in d.carriers:
                lines.append(f"  {obj} -> {{ {', '.join(elems)} }};")
            for m, table in d.actions:
                lines.append(f"  {m} -> {_table(table)};")
            lines.append("}")
            out.append("\n".join(lines))
        elif isinstance(d, FunctorExprDecl):
            out.append(f"functor {d.name} = {_expr(d.expr)};")
        elif isinstance(d, NatDecl):
            lines = [f"nat {d.name} : {d.source} -> {d.target} {{"]
            lines += [f"  {obj} : {_table(t)};" for obj, t in d.components]
            lines.append("}")
            out.append("\n".join(lines))
        elif isinstance(d, QueryDecl):
            body = "; ".join(f"{k}: " + ", ".join(_quote(v) for v in vs) for k, vs in d.entries)
            out.append(f"query {d.name} {{ {body}; }}" if body else f"query {d.name} {{ }}")
    return "\n\n".join(out) + "\n"


def _quote(v: str) -> str:
    return v if re.fullmatch(r"[A-Za-z0-9_][A-Za-z0-9_'^]*", v) else f'"{v}"'


# --- terms ------------------------------------------------------------------------------------

class TermSyntaxError(ValueError):
    def __init__(self, col: int, message: str):
        self.col = col
        super().__init__(f"column {col}: {message}")


_TERM_TOKEN = re.compile(r"\s*(?:(?P<name>[A-Za-z0-9_][A-Za-z0-9_'^.]*)|(?P<p>[(),]))")


def parse_term(text: str, sig: Signature) -> Term:
    """Read a closed term; overloaded names are resolved by argument sorts."""
    toks: list[tuple[str, str, int]] = []
    pos = 0
    while pos < len(text):
        m = _TERM_TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            if text[pos:].strip() == "":
                break
            raise TermSyntaxError(pos + 1, f"unexpected character {text[pos]!r}")
        kind = "name" if m.group("name") else "p"
        toks.append((kind, m.group(kind), m.start(kind) + 1))
        pos = m.end()
    toks.append(("eof", "", len(text) + 1))
    i = 0

    def term() -> Term:
        nonlocal i
        kind, name, col = toks[i]
        if kind != "name":
            raise TermSyntaxError(col, f"unexpected {name or 'end of input'!r}, expected a term")
        i += 1
        args: list[Term] = []
        if toks[i][1] == "(":
            i += 1
            while toks[i][1] != ")":
                args.append(term())
                if toks[i][1] == ",":
                    i += 1
                elif toks[i][1] != ")":
                    raise TermSyntaxError(toks[i][2], f"unexpected {toks[i][1] or 'end of input'!r}, expected ',' or ')'")
            i += 1
        return _resolve(sig, name, args, col)

    t = term()
    if toks[i][0] != "eof":
        raise TermSyntaxError(toks[i][2], f"unexpected {toks[i][1]!r} after term")
    return t


def _resolve(sig: Signature, name: str, args: list[Term], col: int) -> Term:
    cands: list[FunctionSymbol] = sig.by_name.get(name, [])
    if not cands:
        raise TermSyntaxError(col, f"unknown symbol {name!r}")
    sorts = tuple(a.sort for a in args)
    fits = [s for s in cands if s.args == sorts]
    if not fits:
        want = " or ".join(f"{s.name}({', '.join(s.args)})" for s in cands)
        raise IllSorted([col], f"{name} applied to ({', '.join(sorts)}), expected {want}")
    return App(fits[0], tuple(args))
