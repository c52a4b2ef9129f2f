"""Multi-sorted algebra kernel.

Sorts are plain strings.  Terms are hash-consed: building the same tree twice
returns the same object, so ``s is t`` is structural equality and terms can be
used directly as dictionary keys by identity.

Variables carry their sort, which keeps the per-sort variable pools disjoint by
construction (``Var("x", "A")`` and ``Var("x", "B")`` are different variables).
"""
from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Iterator, Mapping, Sequence

__all__ = [
    "FunctionSymbol", "Signature", "Term", "Var", "App", "var", "app",
    "Equation", "Theory", "FinAlgebra", "AlgebraHom",
    "IllSorted", "SortMismatch",
    "sort_of", "substitute", "substitute_all", "match", "subterms",
    "enumerate_terms", "count_terms", "term_table", "satisfies", "find_violation",
    "render",
]


class IllSorted(Exception):
    """Raised when a term violates the typing judgment.

    ``path`` is the list of argument positions leading to the offending node.
    """

    def __init__(self, path: Sequence[int], message: str):
        self.path = tuple(path)
        super().__init__(f"ill-sorted at {list(self.path)}: {message}")


class SortMismatch(Exception):
    pass


@dataclass(frozen=True)
class FunctionSymbol:
    name: str
    args: tuple[str, ...]
    result: str
    kind: str = "op"
    ref: Hashable = None

    @property
    def arity(self) -> int:
        return len(self.args)

    def __repr__(self) -> str:
        if self.args:
            return f"{self.name} : {', '.join(self.args)} -> {self.result}"
        return f"{self.name} : {self.result}"


_LOCK = threading.Lock()
_TABLE: dict[tuple, "Term"] = {}


class Term:
    __slots__ = ("sort", "size", "closed", "_vars")

    def __repr__(self) -> str:
        return render(self)


class Var(Term):
    __slots__ = ("name",)

    def __new__(cls, name: str, sort: str) -> "Var":
        key = ("v", name, sort)
        t = _TABLE.get(key)
        if t is not None:
            return t  # type: ignore[return-value]
        with _LOCK:
            t = _TABLE.get(key)
            if t is None:
                t = object.__new__(cls)
                t.name = name
                t.sort = sort
                t.size = 1
                t.closed = False
                t._vars = frozenset((t,))
                _TABLE[key] = t
        return t  # type: ignore[return-value]

    def __reduce__(self):
        return (Var, (self.name, self.sort))


class App(Term):
    __slots__ = ("symbol", "args")

    def __new__(cls, symbol: FunctionSymbol, args: tuple[Term, ...] = ()) -> "App":
        key = ("a", symbol, args)
        t = _TABLE.get(key)
        if t is not None:
            return t  # type: ignore[return-value]
        with _LOCK:
            t = _TABLE.get(key)
            if t is None:
                t = object.__new__(cls)
                t.symbol = symbol
                t.args = args
                t.sort = symbol.result
                t.size = 1 + sum(a.size for a in args)
                t.closed = all(a.closed for a in args)
                t._vars = None
                _TABLE[key] = t
        return t  # type: ignore[return-value]

    def __reduce__(self):
        return (App, (self.symbol, self.args))

    @property
    def head(self) -> FunctionSymbol:
        return self.symbol


def var(name: str, sort: str) -> Var:
    return Var(name, sort)


def app(symbol: FunctionSymbol, *args: Term) -> App:
    return App(symbol, tuple(args))


def free_vars(t: Term) -> frozenset[Var]:
    if t._vars is None:
        t._vars = frozenset().union(*(free_vars(a) for a in t.args)) if t.args else frozenset()
    return t._vars


def render(t: Term) -> str:
    if isinstance(t, Var):
        return t.name
    if not t.args:
        return t.symbol.name
    return f"{t.symbol.name}({', '.join(render(a) for a in t.args)})"


def subterms(t: Term) -> Iterator[Term]:
    """Post-order, each distinct subterm once."""
    seen: set[Term] = set()
    stack: list[tuple[Term, bool]] = [(t, False)]
    while stack:
        u, expanded = stack.pop()
        if u in seen:
            continue
        if expanded or isinstance(u, Var) or not u.args:
            seen.add(u)
            yield u
        else:
            stack.append((u, True))
            for a in reversed(u.args):
                stack.append((a, False))


@dataclass(frozen=True)
class Equation:
    lhs: Term
    rhs: Term
    sort: str
    label: str = field(default="", compare=False)

    def __str__(self) -> str:
        return f"{render(self.lhs)} ≈ {render(self.rhs)} : {self.sort}"

    def flipped(self) -> "Equation":
        return Equation(self.rhs, self.lhs, self.sort, self.label)

    @property
    def variables(self) -> frozenset[Var]:
        return free_vars(self.lhs) | free_vars(self.rhs)


class Signature:
    """Sorts plus function symbols, with lookup by name."""

    def __init__(self, sorts: Iterable[str], symbols: Iterable[FunctionSymbol]):
        self.sorts: tuple[str, ...] = tuple(dict.fromkeys(sorts))
        self.symbols: tuple[FunctionSymbol, ...] = tuple(dict.fromkeys(symbols))
        known = set(self.sorts)
        for s in self.symbols:
            bad = [x for x in (*s.args, s.result) if x not in known]
            if bad:
                raise ValueError(f"symbol {s.name} uses undeclared sorts {bad}")
        self._symset = frozenset(self.symbols)
        self.by_name: dict[str, list[FunctionSymbol]] = {}
        for s in self.symbols:
            self.by_name.setdefault(s.name, []).append(s)
        self.by_result: dict[str, list[FunctionSymbol]] = {a: [] for a in self.sorts}
        for s in self.symbols:
            self.by_result[s.result].append(s)

    def __contains__(self, symbol: FunctionSymbol) -> bool:
        return symbol in self._symset

    def __len__(self) -> int:
        return len(self.symbols)

    def constants(self, sort: str) -> list[FunctionSymbol]:
        return [s for s in self.by_result[sort] if not s.args]


@dataclass
class Theory:
    signature: Signature
    equations: tuple[Equation, ...]

    @property
    def sorts(self) -> tuple[str, ...]:
        return self.signature.sorts


def sort_of(term: Term, sig: Signature | None = None) -> str:
    """The unique sort assigned to ``term`` by the typing judgment."""

    def go(t: Term, path: list[int]) -> str:
        if isinstance(t, Var):
            if sig is not None and t.sort not in sig.sorts:
                raise IllSorted(path, f"variable {t.name} has unknown sort {t.sort}")
            return t.sort
        if sig is not None and t.symbol not in sig:
            raise IllSorted(path, f"symbol {t.symbol.name} not in signature")
        if len(t.args) != t.symbol.arity:
            raise IllSorted(path, f"{t.symbol.name} expects {t.symbol.arity} arguments, got {len(t.args)}")
        for i, (a, want) in enumerate(zip(t.args, t.symbol.args)):
            got = go(a, path + [i])
            if got != want:
                raise IllSorted(path + [i], f"{t.symbol.name} argument {i} has sort {got}, expected {want}")
        return t.symbol.result

    return go(term, [])


def substitute(s: Term, x: Var, r: Term) -> Term:
    """``s[r/x]``."""
    if r.sort != x.sort:
        raise SortMismatch(f"cannot substitute {render(r)} : {r.sort} for {x.name} : {x.sort}")
    return substitute_all(s, {x: r})


def substitute_all(s: Term, sigma: Mapping[Var, Term]) -> Term:
    """Simultaneous substitution."""
    if isinstance(s, Var):
        return sigma.get(s, s)
    if s.closed or not s.args:
        return s
    return App(s.symbol, tuple(substitute_all(a, sigma) for a in s.args))


def match(pattern: Term, term: Term, sigma: dict[Var, Term] | None = None) -> dict[Var, Term] | None:
    """Syntactic one-way matching; non-linear variables must bind identical terms."""
    sigma = {} if sigma is None else sigma
    stack = [(pattern, term)]
    while stack:
        p, t = stack.pop()
        if isinstance(p, Var):
            if p.sort != t.sort:
                return None
            bound = sigma.get(p)
            if bound is None:
                sigma[p] = t
            elif bound is not t:
                return None
        elif p.closed:
            if p is not t:
                return None
        else:
            if not isinstance(t, App) or t.symbol != p.symbol:
                return None
            stack.extend(zip(p.args, t.args))
    return sigma


# --- enumeration -----------------------------------------------------------

def _compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    """Ordered ways to write ``total`` as ``parts`` positive integers, lexicographic."""
    if parts == 0:
        if total == 0:
            yield ()
        return
    if parts == 1:
        if total >= 1:
            yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _variable_pool(sig: Signature, variables: bool | Iterable[Var]) -> dict[str, list[Var]]:
    pool: dict[str, list[Var]] = {a: [] for a in sig.sorts}
    if variables is True:
        for a in sig.sorts:
            pool[a].append(Var("x", a))
    elif variables:
        for v in variables:
            pool.setdefault(v.sort, []).append(v)
    return pool


def term_table(sig: Signature, max_size: int, variables: bool | Iterable[Var] = False) -> dict[tuple[str, int], list[Term]]:
    """All well-sorted terms bucketed by (sort, exact size), deterministic order."""
    pool = _variable_pool(sig, variables)
    table: dict[tuple[str, int], list[Term]] = {}
    for n in range(1, max_size + 1):
        for a in sig.sorts:
            bucket: list[Term] = []
            if n == 1:
                bucket.extend(pool.get(a, ()))
            for f in sig.by_result[a]:
                k = f.arity
                if k == 0:
                    if n == 1:
                        bucket.append(App(f, ()))
                    continue
                for sizes in _compositions(n - 1, k):
                    choices = [table.get((s, m), ()) for s, m in zip(f.args, sizes)]
                    if any(not c for c in choices):
                        continue
                    for combo in itertools.product(*choices):
                        bucket.append(App(f, combo))
            table[(a, n)] = bucket
    return table


def enumerate_terms(sig: Signature, sort: str, max_size: int, variables: bool | Iterable[Var] = False) -> Iterator[Term]:
    """Every well-sorted term of ``sort`` with at most ``max_size`` nodes, once each.

    Order is by size, then by symbol order in the signature, then by argument
    sizes and arguments.  ``variables=True`` admits one variable ``x`` per sort;
    an iterable of :class:`Var` admits exactly those.
    """
    if max_size < 1:
        raise ValueError("max_size must be at least 1")
    table = term_table(sig, max_size, variables)
    for n in range(1, max_size + 1):
        yield from table[(sort, n)]


def count_terms(sig: Signature, sort: str, max_size: int, variables: bool | Iterable[Var] = False) -> int:
    """Number of terms ``enumerate_terms`` yields, via the counting recurrence."""
    pool = _variable_pool(sig, variables)
    counts: dict[tuple[str, int], int] = {}
    for n in range(1, max_size + 1):
        for a in sig.sorts:
            c = len(pool.get(a, ())) if n == 1 else 0
            for f in sig.by_result[a]:
                if f.arity == 0:
                    c += n == 1
                    continue
                for sizes in _compositions(n - 1, f.arity):
                    prod = 1
                    for s, m in zip(f.args, sizes):
                        prod *= counts.get((s, m), 0)
                    c += prod
            counts[(a, n)] = c
    return sum(counts[(sort, n)] for n in range(1, max_size + 1))


# --- finite algebras ---------------------------------------------------------

@dataclass
class FinAlgebra:
    """Finite carriers per sort and total operation tables per symbol.

    ``ops[f]`` maps argument tuples to results.  Symbols missing from ``ops``
    are treated as undefined; ``partial`` lists symbols allowed to be partial
    (only the equalizer-theory ``eql`` uses this).
    """

    signature: Signature
    carriers: dict[str, tuple]
    ops: dict[FunctionSymbol, dict[tuple, Hashable]]
    partial: frozenset[FunctionSymbol] = frozenset()

    def problems(self) -> list[str]:
        out = []
        for f in self.signature.symbols:
            table = self.ops.get(f)
            if table is None:
                out.append(f"no table for {f.name}")
                continue
            domain = itertools.product(*(self.carriers[a] for a in f.args))
            for args in domain:
                if args not in table:
                    if f not in self.partial:
                        out.append(f"{f.name} undefined at {args}")
                elif table[args] not in self.carriers[f.result]:
                    out.append(f"{f.name}{args} = {table[args]!r} outside carrier {f.result}")
        return out

    def evaluate(self, t: Term, assignment: Mapping[Var, Hashable] | None = None):
        """Value of ``t``; raises KeyError when a partial operation is undefined."""
        if isinstance(t, Var):
            return assignment[t]  # type: ignore[index]
        args = tuple(self.evaluate(a, assignment) for a in t.args)
        return self.ops[t.symbol][args]


@dataclass
class AlgebraHom:
    source: FinAlgebra
    target: FinAlgebra
    maps: dict[str, dict]

    def failures(self) -> list[tuple]:
        """Every (symbol, argument tuple) where the homomorphism square fails."""
        out = []
        for f in self.source.signature.symbols:
            for args, val in self.source.ops.get(f, {}).items():
                lhs = self.maps[f.result][val]
                image = tuple(self.maps[a][x] for a, x in zip(f.args, args))
                rhs = self.target.ops[f].get(image)
                if lhs != rhs:
                    out.append((f.name, args))
        return out

    def is_homomorphism(self) -> bool:
        return not self.failures()


def find_violation(alg: FinAlgebra, eq: Equation) -> dict[Var, Hashable] | None:
    """An assignment under which the two sides differ, or None.

    Homomorphisms out of the open term algebra are determined by where they
    send variables, so quantifying over assignments of the equation's free
    variables is the same as quantifying over those homomorphisms.
    """
    vs = sorted(eq.variables, key=lambda v: (v.sort, v.name))
    for values in itertools.product(*(alg.carriers[v.sort] for v in vs)):
        rho = dict(zip(vs, values))
        if alg.evaluate(eq.lhs, rho) != alg.evaluate(eq.rhs, rho):
            return rho
    return None


def satisfies(alg: FinAlgebra, eq: Equation) -> bool:
    return find_violation(alg, eq) is None
