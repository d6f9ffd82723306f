"""Problem processors and the proof-search driver.

Dependency graph estimation with SCC decomposition, reduction pairs via
linear polynomial interpretations over the naturals, the simple context
processor, and a round-robin driver producing a deterministic proof trace.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, NamedTuple, Optional

from .cdp import CdpProblem, ContextualRule, erase, nested_context_term
from .patterns import ForbiddenPattern, forbidden_positions, in_pi_orth
from .terms import (
    App,
    Rule,
    Symbol,
    Term,
    TOKEN,
    Var,
    rename_apart,
    replace_at,
    substitute,
    unify,
    variables,
)


class WalkCapExceeded(RuntimeError):
    """More candidate walks than the configured cap."""


@dataclass(frozen=True)
class DependencyGraph:
    size: int
    edges: frozenset

    @cached_property
    def _succ(self) -> dict:
        out: dict = {i: [] for i in range(self.size)}
        for i, j in sorted(self.edges):
            out[i].append(j)
        return out

    def successors(self, i: int) -> list:
        return self._succ.get(i, [])

    def has_edge(self, i: int, j: int) -> bool:
        return (i, j) in self.edges


def _cap_ren(t: Term, defined: frozenset, counter: itertools.count) -> Term:
    """REN(CAP(t)): subterms with defined root become fresh variables and
    every variable occurrence is linearized."""
    if isinstance(t, Var):
        return Var(f"!r{next(counter)}")
    if t.sym in defined:
        return Var(f"!r{next(counter)}")
    return App(t.sym, tuple(_cap_ren(a, defined, counter) for a in t.args))


def dependency_graph(problem: CdpProblem) -> DependencyGraph:
    """Over-approximation of the concrete 2-chains between pairs.

    Token-rooted right-hand sides force an empty rewrite interlude, so they
    must unify directly with the next left-hand side; otherwise the usual
    REN(CAP(.)) estimation applies.
    """
    defined = problem.rules.defined
    edges = set()
    for i, alpha in enumerate(problem.pairs):
        rhs = alpha.rhs
        if not (isinstance(rhs, App) and rhs.sym.kind == TOKEN):
            rhs = _cap_ren(rhs, defined, itertools.count(1))
        for j, beta in enumerate(problem.pairs):
            s, l = rename_apart([rhs, beta.lhs])
            if unify(s, l) is not None:
                edges.add((i, j))
    return DependencyGraph(len(problem.pairs), frozenset(edges))


def _tarjan(size: int, successors) -> list:
    index = {}
    low = {}
    on_stack = set()
    stack: list = []
    counter = itertools.count()
    sccs: list = []

    def visit(v):
        index[v] = low[v] = next(counter)
        stack.append(v)
        on_stack.add(v)
        for w in successors(v):
            if w not in index:
                visit(w)
                low[v] = min(low[v], low[w])
            elif w in on_stack:
                low[v] = min(low[v], index[w])
        if low[v] == index[v]:
            comp = []
            while True:
                w = stack.pop()
                on_stack.discard(w)
                comp.append(w)
                if w == v:
                    break
            sccs.append(sorted(comp))

    for v in range(size):
        if v not in index:
            visit(v)
    return sccs


@dataclass(frozen=True)
class SccDetails:
    graph: DependencyGraph
    components: "tuple[tuple[int, ...], ...]"
    dropped: "tuple[ContextualRule, ...]"


def _scc_split(problem: CdpProblem):
    graph = dependency_graph(problem)
    comps = _tarjan(graph.size, graph.successors)
    cyclic = [
        tuple(c) for c in comps if len(c) > 1 or graph.has_edge(c[0], c[0])
    ]
    cyclic.sort(key=lambda c: c[0])
    subs = [problem.with_pairs(tuple(problem.pairs[i] for i in c)) for c in cyclic]
    kept = {i for c in cyclic for i in c}
    dropped = tuple(p for i, p in enumerate(problem.pairs) if i not in kept)
    return subs, SccDetails(graph, tuple(cyclic), dropped)


def scc_processor(problem: CdpProblem) -> list:
    """One sub-problem per strongly connected component with at least one edge."""
    subs, _ = _scc_split(problem)
    return subs


# ---------------------------------------------------------------------------
# polynomial interpretations


def _term_poly(t: Term, interp: dict):
    """Linear polynomial of a term: (constant, {var: coefficient})."""
    if isinstance(t, Var):
        return 0, {t.name: 1}
    coeffs = interp[t.sym]
    const = coeffs[0]
    acc: dict = {}
    for c, arg in zip(coeffs[1:], t.args):
        if c == 0:
            continue
        ac, avars = _term_poly(arg, interp)
        const += c * ac
        for v, k in avars.items():
            acc[v] = acc.get(v, 0) + c * k
    return const, acc


def _weakly_geq(lhs_poly, rhs_poly) -> bool:
    lc, lv = lhs_poly
    rc, rv = rhs_poly
    if lc < rc:
        return False
    return all(lv.get(v, 0) >= k for v, k in rv.items())


def _strictly_gt(lhs_poly, rhs_poly) -> bool:
    lc, lv = lhs_poly
    rc, rv = rhs_poly
    if lc < rc + 1:
        return False
    return all(lv.get(v, 0) >= k for v, k in rv.items())


@dataclass(frozen=True)
class PolyInterpretation:
    """Per-symbol linear polynomials: (constant, one coefficient per argument)."""

    coefficients: "tuple[tuple[Symbol, tuple], ...]"

    @cached_property
    def mapping(self) -> dict:
        return dict(self.coefficients)

    def of_term(self, t: Term):
        return _term_poly(t, self.mapping)

    def evaluate(self, t: Term, assignment: dict) -> int:
        const, coeffs = self.of_term(t)
        return const + sum(c * assignment.get(v, 0) for v, c in coeffs.items())

    def render(self) -> list:
        lines = []
        for sym, coeffs in self.coefficients:
            args = [f"x{i}" for i in range(1, sym.arity + 1)]
            parts = []
            if coeffs[0] or all(c == 0 for c in coeffs[1:]):
                parts.append(str(coeffs[0]))
            for c, a in zip(coeffs[1:], args):
                if c == 1:
                    parts.append(a)
                elif c > 1:
                    parts.append(f"{c}*{a}")
            head = f"[{sym.name}]({','.join(args)})" if args else f"[{sym.name}]"
            lines.append(f"{head} = {' + '.join(parts)}")
        return lines


def _constraint_symbols(t: Term) -> set:
    out = set()
    stack = [t]
    while stack:
        s = stack.pop()
        if isinstance(s, App):
            out.add(s.sym)
            stack.extend(s.args)
    return out


def find_interpretation(rules, stripped_pairs, coeff_max: int = 2):
    """Search coefficients in [0, coeff_max] orienting every rule and pair
    weakly and at least one pair strictly (absolute positiveness).

    Returns (PolyInterpretation, strict pair indices) or None.  Deterministic:
    symbols assigned in decreasing frequency order, coefficient tuples in
    lexicographic order, first hit wins.
    """
    constraints = [(r.lhs, r.rhs, None) for r in rules]
    constraints += [(p.lhs, p.rhs, i) for i, p in enumerate(stripped_pairs)]
    if not stripped_pairs:
        return None

    freq: dict = {}
    for l, r, _ in constraints:
        for sym in list(_constraint_symbols(l)) + list(_constraint_symbols(r)):
            freq[sym] = freq.get(sym, 0) + 1
    symbols = sorted(freq, key=lambda s: (-freq[s], s.name))
    order = {sym: k for k, sym in enumerate(symbols)}

    due: dict = {k: [] for k in range(len(symbols))}
    for con in constraints:
        syms = _constraint_symbols(con[0]) | _constraint_symbols(con[1])
        if syms:
            due[max(order[s] for s in syms)].append(con)

    pair_cons = [(l, r, i) for l, r, i in constraints if i is not None]
    interp: dict = {}

    def assign(k: int):
        if k == len(symbols):
            strict = [i for l, r, i in pair_cons
                      if _strictly_gt(_term_poly(l, interp), _term_poly(r, interp))]
            return strict or None
        sym = symbols[k]
        for coeffs in itertools.product(range(coeff_max + 1), repeat=sym.arity + 1):
            interp[sym] = coeffs
            if all(_weakly_geq(_term_poly(l, interp), _term_poly(r, interp))
                   for l, r, _ in due[k]):
                found = assign(k + 1)
                if found:
                    return found
        del interp[sym]
        return None

    strict = assign(0)
    if strict is None:
        return None
    ordered = tuple(sorted(interp.items(), key=lambda kv: kv[0].name))
    return PolyInterpretation(ordered), strict


@dataclass(frozen=True)
class PolyDetails:
    interpretation: PolyInterpretation
    removed: "tuple[ContextualRule, ...]"


def reduction_pair_processor(problem: CdpProblem, coeff_max: int = 2) -> list:
    """Remove the strictly oriented pairs under a found interpretation, or
    return the problem unchanged when the search fails."""
    found = find_interpretation(problem.rules.rules, [p.strip() for p in problem.pairs], coeff_max)
    if found is None:
        return [problem]
    _, strict = found
    strict_set = set(strict)
    rest = tuple(p for i, p in enumerate(problem.pairs) if i not in strict_set)
    return [problem.with_pairs(rest)]


# ---------------------------------------------------------------------------
# simple context processor


@dataclass(frozen=True)
class WalkRecord:
    indices: "tuple[int, ...]"
    pairs: "tuple[ContextualRule, ...]"
    context: Term
    term: Term
    position: tuple
    blocker: Optional[ForbiddenPattern]


@dataclass(frozen=True)
class ScpDetails:
    n: int
    pair: ContextualRule
    walks: "tuple[WalkRecord, ...]"


@dataclass
class ScpReport:
    n: int
    deletable: list
    walks: dict
    capped: list


def enumerate_walks(graph: DependencyGraph, start: int, n: int, cap: int) -> list:
    """All walks of n vertices starting at start; vertices may repeat."""
    out: list = []
    stack = [(start,)]
    while stack:
        w = stack.pop()
        if len(w) == n:
            out.append(w)
            if len(out) > cap:
                raise WalkCapExceeded(f"more than {cap} walks")
            continue
        for nxt in reversed(graph.successors(w[-1])):
            stack.append(w + (nxt,))
    return out


def walk_record(problem: CdpProblem, walk, orth) -> WalkRecord:
    renamed = tuple(problem.pairs[j].renamed(k + 1) for k, j in enumerate(walk))
    ctx, pos = nested_context_term(renamed)
    term = replace_at(ctx, pos, erase(renamed[-1].rhs))
    blocker = None
    for pat in orth:
        if pos in forbidden_positions([pat], term):
            blocker = pat
            break
    return WalkRecord(tuple(walk), renamed, ctx, term, pos, blocker)


def orthogonal_patterns(problem: CdpProblem) -> list:
    return [p for p in problem.patterns if in_pi_orth(p, problem.rules)]


def scp_report(problem: CdpProblem, n: int, walk_cap: int = 10000) -> ScpReport:
    if n <= 1:
        raise ValueError("the simple context processor requires n > 1")
    graph = dependency_graph(problem)
    orth = orthogonal_patterns(problem)
    report = ScpReport(n, [], {}, [])
    for i in range(len(problem.pairs)):
        try:
            walks = enumerate_walks(graph, i, n, walk_cap)
        except WalkCapExceeded:
            report.capped.append(i)
            continue
        records = [walk_record(problem, w, orth) for w in walks]
        report.walks[i] = records
        if all(r.blocker is not None for r in records):
            report.deletable.append(i)
    return report


def scp_processor(problem: CdpProblem, n: int, walk_cap: int = 10000) -> list:
    """Delete every pair whose length-n walks are all blocked by an
    orthogonal pattern (vacuously deletable when no walk exists)."""
    report = scp_report(problem, n, walk_cap)
    deletable = set(report.deletable)
    rest = tuple(p for i, p in enumerate(problem.pairs) if i not in deletable)
    return [problem.with_pairs(rest)]


# ---------------------------------------------------------------------------
# driver


@dataclass(frozen=True)
class ProofNode:
    """One processor application: input problem, outputs, and justification."""

    problem: CdpProblem
    processor: str
    outputs: "tuple[CdpProblem, ...]"
    details: object = None


@dataclass(frozen=True)
class ProveConfig:
    scp_depth: int = 3
    coeff_max: int = 2
    walk_cap: int = 10000
    timeout: Optional[float] = None


class ProveOutcome(NamedTuple):
    verdict: str
    trace: list


def _prove_full(problem: CdpProblem, config: Optional[ProveConfig] = None):
    """Run the pipeline; returns (verdict, trace, stuck leaf problems)."""
    cfg = config or ProveConfig()
    start = time.monotonic()
    trace: list = []
    pending = [problem]
    stuck: list = []
    timed_out = False
    while pending:
        if cfg.timeout is not None and time.monotonic() - start > cfg.timeout:
            stuck.extend(pending)
            timed_out = True
            break
        prob = pending.pop(0)
        if not prob.pairs:
            continue

        subs, details = _scc_split(prob)
        if [s.pairs for s in subs] != [prob.pairs]:
            trace.append(ProofNode(prob, "scc", tuple(subs), details))
            pending.extend(subs)
            continue

        report = scp_report(prob, cfg.scp_depth, cfg.walk_cap)
        if report.deletable:
            cur = prob
            for i in report.deletable:
                pair = prob.pairs[i]
                nxt = cur.with_pairs(tuple(p for p in cur.pairs if p != pair))
                trace.append(ProofNode(
                    cur, f"scp_{report.n}", (nxt,),
                    ScpDetails(report.n, pair, tuple(report.walks[i])),
                ))
                cur = nxt
            pending.append(cur)
            continue

        found = find_interpretation(
            prob.rules.rules, [p.strip() for p in prob.pairs], cfg.coeff_max)
        if found is not None:
            interp, strict = found
            strict_set = set(strict)
            removed = tuple(p for i, p in enumerate(prob.pairs) if i in strict_set)
            out = prob.with_pairs(tuple(p for i, p in enumerate(prob.pairs)
                                        if i not in strict_set))
            trace.append(ProofNode(prob, "poly", (out,), PolyDetails(interp, removed)))
            pending.append(out)
            continue

        stuck.append(prob)

    verdict = "proved" if not stuck and not timed_out else "maybe"
    return verdict, trace, stuck


def prove(problem: CdpProblem, config: Optional[ProveConfig] = None) -> ProveOutcome:
    """Round-robin pipeline (scc, scp, reduction pair) until every leaf has an
    empty pair set or no processor makes progress."""
    verdict, trace, _ = _prove_full(problem, config)
    return ProveOutcome(verdict, trace)
