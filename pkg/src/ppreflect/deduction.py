"""Equational deduction: derivation traces, a proof-producing congruence
closure, and the bounded derivation search used as an oracle.

Two ways to populate the congruence closure are offered:

``universe``
    every term up to the size bound is added, every axiom instance whose two
    sides both lie in that universe is merged, and congruence is closed.  A
    goal is proved exactly when some chain of rewrite steps, all of whose
    intermediate terms stay within the bound, connects its two sides.

``saturate``
    start from the goal's subterms and grow the term set by matching axiom
    sides against congruence classes, round by round, until the sides merge
    or a budget runs out.

Neither strategy can refute; they return :class:`Proved` or :class:`Unknown`.
"""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .msa import (
    App, Equation, Signature, Term, Var, free_vars, match, render,
    substitute, substitute_all, subterms, term_table,
)

__all__ = [
    "Budget", "Step", "Trace", "Proved", "Refuted", "Unknown", "Decision",
    "TermGraph", "TraceError", "replay", "format_trace", "derives",
    "UniverseOracle", "saturate",
]


@dataclass(frozen=True)
class Budget:
    size: int = 9
    iterations: int = 10_000
    rounds: int = 8
    max_terms: int = 50_000

    def doubled(self) -> "Budget":
        return Budget(self.size * 2, self.iterations * 2, self.rounds * 2, self.max_terms * 2)

    def record(self) -> dict:
        return {"size": self.size, "iterations": self.iterations,
                "rounds": self.rounds, "max_terms": self.max_terms}


# --- traces -------------------------------------------------------------------

@dataclass(frozen=True)
class Step:
    rule: str
    premises: tuple[int, ...]
    lhs: Term
    rhs: Term
    sort: str
    var: Var | None = None
    term: Term | None = None

    def line(self) -> str:
        prem = " ".join(str(p) for p in self.premises)
        extra = f" [{self.var.name}:={render(self.term)}]" if self.var is not None else ""
        head = f"{self.rule} {prem}".rstrip()
        return f"{head}{extra} ⟹ {render(self.lhs)} ≈ {render(self.rhs)} : {self.sort}"


@dataclass
class Trace:
    steps: list[Step] = field(default_factory=list)

    def add(self, step: Step) -> int:
        self.steps.append(step)
        return len(self.steps)

    def __len__(self) -> int:
        return len(self.steps)

    @property
    def conclusion(self) -> Step:
        return self.steps[-1]


def format_trace(trace: Trace) -> str:
    """One rule application per line; premises refer to 1-based line numbers."""
    return "\n".join(s.line() for s in trace.steps)


class TraceError(Exception):
    pass


def replay(equations: Iterable[Equation], trace: Trace, sig: Signature | None = None) -> Equation:
    """Check every line of ``trace`` against the deduction rules.

    Returns the final equation; raises :class:`TraceError` at the first line
    that does not follow from its premises.
    """
    axioms = {(e.lhs, e.rhs, e.sort) for e in equations}
    done: list[Step] = []

    def prem(i: int) -> Step:
        if not 1 <= i <= len(done):
            raise TraceError(f"line {len(done) + 1}: premise {i} out of range")
        return done[i - 1]

    for n, st in enumerate(trace.steps, 1):
        ok = False
        if st.rule == "ax":
            ok = (st.lhs, st.rhs, st.sort) in axioms
        elif st.rule == "refl":
            ok = st.lhs is st.rhs and st.lhs.sort == st.sort
        elif st.rule == "symm":
            p = prem(st.premises[0])
            ok = p.lhs is st.rhs and p.rhs is st.lhs and p.sort == st.sort
        elif st.rule == "trans":
            p, q = prem(st.premises[0]), prem(st.premises[1])
            ok = p.rhs is q.lhs and p.lhs is st.lhs and q.rhs is st.rhs and p.sort == st.sort
        elif st.rule == "subst":
            p = prem(st.premises[0])
            ok = (st.var is not None and st.term is not None and st.term.sort == st.var.sort
                  and substitute(p.lhs, st.var, st.term) is st.lhs
                  and substitute(p.rhs, st.var, st.term) is st.rhs and p.sort == st.sort)
        elif st.rule == "cong":
            l, r = st.lhs, st.rhs
            ok = (isinstance(l, App) and isinstance(r, App) and l.symbol == r.symbol
                  and len(st.premises) == len(l.args) and st.sort == l.sort)
            if ok:
                for i, (a, b) in zip(st.premises, zip(l.args, r.args)):
                    p = prem(i)
                    if not (p.lhs is a and p.rhs is b):
                        ok = False
        if not ok:
            raise TraceError(f"line {n} does not follow: {st.line()}")
        if sig is not None:
            from .msa import sort_of
            if sort_of(st.lhs, sig) != st.sort or sort_of(st.rhs, sig) != st.sort:
                raise TraceError(f"line {n} is ill-sorted")
        done.append(st)
    if not done:
        raise TraceError("empty trace")
    last = done[-1]
    return Equation(last.lhs, last.rhs, last.sort)


# --- decisions ----------------------------------------------------------------

@dataclass
class Proved:
    trace: Trace
    budget: Budget

    kind = "proved"


@dataclass
class Refuted:
    witness: object
    kind = "refuted"


@dataclass
class Unknown:
    budget: Budget
    report: dict = field(default_factory=dict)
    kind = "unknown"


Decision = Proved | Refuted | Unknown


# --- congruence closure with proof forest -------------------------------------

class BudgetExceeded(Exception):
    pass


class TermGraph:
    """Union-find over concrete terms with congruence closure.

    Every union is recorded as an edge between two concrete terms in a proof
    forest, labelled with its justification, so any derived equality can be
    explained as a replayable trace.
    """

    def __init__(self, max_merges: int | None = None):
        self.parent: dict[Term, Term] = {}
        self.members: dict[Term, list[Term]] = {}
        self.uses: dict[Term, list[Term]] = {}
        self.table: dict[tuple, Term] = {}
        self.minrep: dict[Term, Term] = {}
        self.edges: dict[Term, list[tuple[Term, tuple]]] = {}
        self.merges = 0
        self.max_merges = max_merges
        self._pending: deque = deque()

    def __contains__(self, t: Term) -> bool:
        return t in self.parent

    def __len__(self) -> int:
        return len(self.parent)

    def find(self, t: Term) -> Term:
        parent = self.parent
        root = t
        while parent[root] is not root:
            root = parent[root]
        while parent[t] is not root:
            parent[t], t = root, parent[t]
        return root

    def roots(self) -> list[Term]:
        return list(self.members)

    def classes(self) -> list[list[Term]]:
        return list(self.members.values())

    def _key(self, t: App) -> tuple:
        return (t.symbol, tuple(self.find(a) for a in t.args))

    def add(self, t: Term) -> Term:
        if t in self.parent:
            return t
        for u in subterms(t):
            if u in self.parent:
                continue
            self.parent[u] = u
            self.members[u] = [u]
            self.uses[u] = []
            self.minrep[u] = u
            self.edges[u] = []
            if isinstance(u, App):
                for a in u.args:
                    self.uses[self.find(a)].append(u)
                key = self._key(u)
                other = self.table.get(key)
                if other is None:
                    self.table[key] = u
                else:
                    self._pending.append((u, other, ("cong",)))
        self._process()
        return t

    def union(self, a: Term, b: Term, reason: tuple) -> None:
        self._pending.append((a, b, reason))
        self._process()

    def _process(self) -> None:
        pending = self._pending
        while pending:
            a, b, reason = pending.popleft()
            ra, rb = self.find(a), self.find(b)
            if ra is rb:
                continue
            if self.max_merges is not None and self.merges >= self.max_merges:
                pending.clear()
                raise BudgetExceeded
            self.merges += 1
            self.edges[a].append((b, reason))
            self.edges[b].append((a, reason))
            if len(self.members[ra]) < len(self.members[rb]):
                ra, rb = rb, ra
            # rb joins ra
            self.parent[rb] = ra
            self.members[ra].extend(self.members.pop(rb))
            m1, m2 = self.minrep[ra], self.minrep.pop(rb)
            if (m2.size, render(m2)) < (m1.size, render(m1)):
                self.minrep[ra] = m2
            moved = self.uses.pop(rb)
            for u in moved:
                key = self._key(u)
                other = self.table.get(key)
                if other is None:
                    self.table[key] = u
                elif self.find(other) is not self.find(u):
                    pending.append((u, other, ("cong",)))
            self.uses[ra].extend(moved)

    def same(self, a: Term, b: Term) -> bool:
        return a in self.parent and b in self.parent and self.find(a) is self.find(b)

    # --- explanation --------------------------------------------------------

    def _path(self, a: Term, b: Term) -> list[tuple[Term, Term, tuple]]:
        prev: dict[Term, tuple[Term, tuple] | None] = {a: None}
        queue = deque([a])
        while queue:
            u = queue.popleft()
            if u is b:
                break
            for v, reason in self.edges[u]:
                if v not in prev:
                    prev[v] = (u, reason)
                    queue.append(v)
        path = []
        u = b
        while prev[u] is not None:
            p, reason = prev[u]  # type: ignore[misc]
            path.append((p, u, reason))
            u = p
        path.reverse()
        return path

    def explain(self, a: Term, b: Term) -> Trace:
        if not self.same(a, b):
            raise ValueError(f"{render(a)} and {render(b)} are not known equal")
        trace = Trace()
        memo: dict[tuple[Term, Term], int] = {}
        self._explain(a, b, trace, memo)
        return trace

    def _explain(self, a: Term, b: Term, trace: Trace, memo: dict) -> int:
        if (a, b) in memo:
            return memo[(a, b)]
        if a is b:
            i = trace.add(Step("refl", (), a, a, a.sort))
            memo[(a, b)] = i
            return i
        acc = None
        for u, v, reason in self._path(a, b):
            i = self._edge(u, v, reason, trace, memo)
            if acc is None:
                acc = i
            else:
                first = trace.steps[acc - 1]
                acc = trace.add(Step("trans", (acc, i), first.lhs, v, a.sort))
        memo[(a, b)] = acc  # type: ignore[assignment]
        return acc  # type: ignore[return-value]

    def _edge(self, u: Term, v: Term, reason: tuple, trace: Trace, memo: dict) -> int:
        kind = reason[0]
        if kind == "cong":
            prems = tuple(self._explain(x, y, trace, memo) for x, y in zip(u.args, v.args))
            return trace.add(Step("cong", prems, u, v, u.sort))
        eq, sigma = reason[1], reason[2]
        i = _instance(eq, sigma, trace)
        st = trace.steps[i - 1]
        if st.lhs is u and st.rhs is v:
            return i
        if st.lhs is v and st.rhs is u:
            return trace.add(Step("symm", (i,), u, v, u.sort))
        raise AssertionError("edge does not match its recorded instance")


def _instance(eq: Equation, sigma: dict[Var, Term], trace: Trace) -> int:
    """Lines deriving ``eq`` instantiated by ``sigma``: ax then one subst per variable."""
    i = trace.add(Step("ax", (), eq.lhs, eq.rhs, eq.sort))
    lhs, rhs = eq.lhs, eq.rhs
    order = sorted(sigma, key=lambda x: (x.sort, x.name))
    dom = set(order)
    clash = any(free_vars(sigma[x]) & dom for x in order)
    if clash:
        taken = set(dom)
        for t in sigma.values():
            taken |= free_vars(t)
        fresh = {}
        for x in order:
            k = 0
            while Var(f"{x.name}'{k}", x.sort) in taken:
                k += 1
            fresh[x] = Var(f"{x.name}'{k}", x.sort)
            taken.add(fresh[x])
        for x in order:
            lhs, rhs = substitute(lhs, x, fresh[x]), substitute(rhs, x, fresh[x])
            i = trace.add(Step("subst", (i,), lhs, rhs, eq.sort, x, fresh[x]))
        order_pairs = [(fresh[x], sigma[x]) for x in order]
    else:
        order_pairs = [(x, sigma[x]) for x in order]
    for x, r in order_pairs:
        if x is r:
            continue
        lhs, rhs = substitute(lhs, x, r), substitute(rhs, x, r)
        i = trace.add(Step("subst", (i,), lhs, rhs, eq.sort, x, r))
    return i


# --- rule indexing --------------------------------------------------------------

@dataclass(frozen=True)
class _Rule:
    pattern: Term
    template: Term
    eq: Equation


def _rules(equations: Iterable[Equation]) -> list[_Rule]:
    out = []
    for eq in equations:
        out.append(_Rule(eq.lhs, eq.rhs, eq))
        if eq.rhs is not eq.lhs:
            out.append(_Rule(eq.rhs, eq.lhs, eq))
    return out


def _instantiate(rule: _Rule, sigma: dict[Var, Term]) -> tuple[Term, Term]:
    return substitute_all(rule.pattern, sigma), substitute_all(rule.template, sigma)


def _edge_reason(rule: _Rule, sigma: dict[Var, Term]) -> tuple:
    return ("ax", rule.eq, dict(sigma))


# --- universe oracle -------------------------------------------------------------

class UniverseOracle:
    """Congruence closure over every term up to a size bound.

    Build once, then ask many goals; ``decide`` returns a :class:`Proved` with
    a replayable trace or an :class:`Unknown`.  An explicit ``universe``
    (closed under subterms) replaces the enumerated one.
    """

    def __init__(self, sig: Signature, equations: Sequence[Equation], budget: Budget = Budget(),
                 variables: Iterable[Var] = (), universe: Iterable[Term] | None = None):
        self.signature = sig
        self.equations = tuple(equations)
        self.budget = budget
        self.variables = tuple(variables)
        self.graph = TermGraph(max_merges=budget.iterations)
        self.truncated = False
        if universe is None:
            table = term_table(sig, budget.size, self.variables)
            universe = [t for n in range(1, budget.size + 1) for a in sig.sorts for t in table[(a, n)]]
        self.universe: list[Term] = list(universe)
        try:
            self._build()
        except BudgetExceeded:
            self.truncated = True

    def _build(self) -> None:
        g = self.graph
        for t in self.universe:
            g.add(t)
        by_head: dict[object, list[_Rule]] = {}
        var_rules: dict[str, list[_Rule]] = {}
        for r in _rules(self.equations):
            if isinstance(r.pattern, Var):
                var_rules.setdefault(r.pattern.sort, []).append(r)
            else:
                by_head.setdefault(r.pattern.symbol, []).append(r)
        for t in self.universe:
            cands = var_rules.get(t.sort, [])
            if isinstance(t, App):
                cands = cands + by_head.get(t.symbol, [])
            for r in cands:
                sigma = match(r.pattern, t)
                if sigma is None:
                    continue
                if not free_vars(r.template) <= sigma.keys():
                    continue  # the same instance is found from the other side
                other = substitute_all(r.template, sigma)
                if other in g:
                    g.union(t, other, _edge_reason(r, sigma))

    def decide(self, lhs: Term, rhs: Term) -> "Proved | Unknown":
        g = self.graph
        if lhs is rhs:
            tr = Trace()
            tr.add(Step("refl", (), lhs, lhs, lhs.sort))
            return Proved(tr, self.budget)
        if g.same(lhs, rhs):
            return Proved(g.explain(lhs, rhs), self.budget)
        return Unknown(self.budget, {"universe": len(self.universe), "merges": g.merges,
                                     "truncated": self.truncated,
                                     "in_universe": lhs in g and rhs in g})

    def class_of(self, t: Term) -> Term:
        return self.graph.find(t)


_ORACLES: dict[tuple, UniverseOracle] = {}


def derives(equations: Sequence[Equation], goal: Equation, budget: Budget = Budget(),
            sig: Signature | None = None, strategy: str = "universe") -> "Proved | Unknown":
    """Semi-decide ``equations ⊢ goal`` within ``budget``.

    ``sig`` defaults to the symbols occurring in the equations and goal.
    Universe oracles are cached per (signature, equations, budget, variables).
    """
    if goal.lhs is goal.rhs:
        tr = Trace()
        tr.add(Step("refl", (), goal.lhs, goal.lhs, goal.sort))
        return Proved(tr, budget)
    if sig is None:
        sig = _signature_of(equations, goal)
    if strategy == "saturate":
        return saturate(sig, equations, goal.lhs, goal.rhs, budget)
    gvars = tuple(sorted(free_vars(goal.lhs) | free_vars(goal.rhs), key=lambda v: (v.sort, v.name)))
    key = (id(sig), tuple(equations), budget, gvars)
    oracle = _ORACLES.get(key)
    if oracle is None or oracle.signature is not sig:
        oracle = UniverseOracle(sig, equations, budget, gvars)
        if len(_ORACLES) > 32:
            _ORACLES.clear()
        _ORACLES[key] = oracle
    return oracle.decide(goal.lhs, goal.rhs)


def _signature_of(equations: Iterable[Equation], goal: Equation) -> Signature:
    syms, sorts = {}, {}
    for t in itertools.chain(*((e.lhs, e.rhs) for e in equations), (goal.lhs, goal.rhs)):
        for u in subterms(t):
            sorts[u.sort] = None
            if isinstance(u, App):
                syms[u.symbol] = None
                for a in u.symbol.args:
                    sorts[a] = None
    return Signature(sorts, syms)


# --- goal-directed saturation -----------------------------------------------------

def _ematch(g: TermGraph, pattern: Term, root: Term, sigma: dict) -> Iterable[dict]:
    if isinstance(pattern, Var):
        if pattern.sort != root.sort:
            return
        bound = sigma.get(pattern)
        if bound is None:
            s = dict(sigma)
            s[pattern] = root
            yield s
        elif g.find(bound) is root:
            yield sigma
        return
    if pattern.closed:
        if pattern in g and g.find(pattern) is root:
            yield sigma
        return
    for m in g.members[root]:
        if isinstance(m, App) and m.symbol == pattern.symbol:
            partial = [sigma]
            for p, a in zip(pattern.args, m.args):
                ra = g.find(a)
                partial = [s2 for s in partial for s2 in _ematch(g, p, ra, s)]
                if not partial:
                    break
            yield from partial


def saturate(sig: Signature, equations: Sequence[Equation], lhs: Term, rhs: Term,
             budget: Budget = Budget(), graph: TermGraph | None = None) -> "Proved | Unknown":
    """Goal-directed equality saturation.

    Each round matches every axiom side against every class and adds the
    instantiated other side (variables bound to the smallest class member) when
    it fits the size bound.  Templates with variables unbound by the match are
    skipped.
    """
    g = graph if graph is not None else TermGraph(max_merges=budget.iterations)
    rules = [r for r in _rules(equations) if free_vars(r.template) <= free_vars(r.pattern)]
    g.add(lhs)
    g.add(rhs)
    stop = "fixpoint"
    rounds = 0
    try:
        while not g.same(lhs, rhs):
            if rounds >= budget.rounds:
                stop = "rounds"
                break
            rounds += 1
            todo = []
            for r in rules:
                roots = [x for x in g.roots() if x.sort == r.pattern.sort]
                for root in roots:
                    for sigma in _ematch(g, r.pattern, root, {}):
                        concrete = {x: g.minrep[g.find(c)] for x, c in sigma.items()}
                        a, b = _instantiate(r, concrete)
                        if a.size > budget.size or b.size > budget.size:
                            continue
                        if a in g and b in g and g.same(a, b):
                            continue
                        todo.append((a, b, _edge_reason(r, concrete)))
            if not todo:
                break
            for a, b, reason in todo:
                if len(g) >= budget.max_terms:
                    stop = "terms"
                    raise BudgetExceeded
                g.add(a)
                g.add(b)
                g.union(a, b, reason)
                if g.same(lhs, rhs):
                    break
    except BudgetExceeded:
        if stop == "fixpoint":
            stop = "iterations"
    if g.same(lhs, rhs):
        return Proved(g.explain(lhs, rhs), budget)
    return Unknown(budget, {"rounds": rounds, "terms": len(g), "merges": g.merges, "stopped": stop})
