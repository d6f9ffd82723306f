"""Deterministic random generators shared by the randomized suites."""

import itertools

from fpterm import (
    BELOW,
    ForbiddenPattern,
    HERE,
    PatternSet,
    Rule,
    Symbol,
    Trs,
    Var,
)
from fpterm.terms import App, is_linear, positions, replace_at, subterm_at, variables

SMALL_SIG = (Symbol("a", 0), Symbol("b", 0), Symbol("f", 1), Symbol("g", 1))
WIDE_SIG = SMALL_SIG + (Symbol("h", 2),)
VARS = ("x", "y", "z")


def rand_term(rng, symbols, var_names, max_depth):
    """Random term; leaves are constants or variables."""
    if max_depth <= 1:
        leaves = [s for s in symbols if s.arity == 0]
        if var_names and rng.random() < 0.4:
            return Var(rng.choice(var_names))
        return App(rng.choice(leaves), ())
    sym = rng.choice(symbols)
    if sym.arity == 0:
        if var_names and rng.random() < 0.3:
            return Var(rng.choice(var_names))
        return App(sym, ())
    return App(sym, tuple(rand_term(rng, symbols, var_names, max_depth - 1)
                          for _ in range(sym.arity)))


def rand_ground(rng, symbols, max_depth):
    return rand_term(rng, symbols, (), max_depth)


def ground_pool(symbols, max_depth):
    """All ground terms up to the given depth, in a deterministic order."""
    by_depth = {1: [App(s, ()) for s in symbols if s.arity == 0]}
    for d in range(2, max_depth + 1):
        smaller = [t for k in range(1, d) for t in by_depth[k]]
        level = list(by_depth[d - 1])
        for sym in symbols:
            if sym.arity == 0:
                continue
            for args in itertools.product(smaller, repeat=sym.arity):
                t = App(sym, args)
                if t not in level and max(_depth(a) for a in args) == d - 1:
                    level.append(t)
        by_depth[d] = level
    out = []
    for d in range(1, max_depth + 1):
        for t in by_depth[d]:
            if t not in out:
                out.append(t)
    return out


def _depth(t):
    if not isinstance(t, App) or not t.args:
        return 1
    return 1 + max(_depth(a) for a in t.args)


def rand_rule(rng, symbols, max_depth=3):
    """lhs rooted at a non-nullary or nullary symbol, rhs over the lhs variables."""
    heads = list(symbols)
    head = rng.choice(heads)
    lhs = App(head, tuple(rand_term(rng, symbols, VARS, max_depth - 1)
                          for _ in range(head.arity)))
    lhs_vars = variables(lhs)
    rhs = rand_term(rng, symbols, tuple(lhs_vars), max_depth)
    return Rule(lhs, rhs)


def rand_trs(rng, symbols=SMALL_SIG, max_rules=2, max_depth=3):
    n = rng.randint(1, max_rules)
    rules = []
    for _ in range(n):
        rule = rand_rule(rng, symbols, max_depth)
        if rule not in rules:
            rules.append(rule)
    return Trs(tuple(rules))


def pattern_from_subterm(rng, t, flag=None):
    """A pattern whose term matches some subterm of t (guaranteed anchor)."""
    o = rng.choice(positions(t))
    sub = subterm_at(t, o)
    # generalize a few random subterms to fresh variables
    term = sub
    for k in range(rng.randint(0, 2)):
        ps = positions(term)
        q = rng.choice(ps)
        if q == ():
            continue
        term = replace_at(term, q, Var(f"w{k}"))
    p = rng.choice(positions(term))
    if flag is None:
        flag = rng.choice((HERE, BELOW))
    return ForbiddenPattern(term, p, flag)


def rand_patterns(rng, trs, ground_source, count=2):
    pats = []
    for _ in range(count):
        pats.append(pattern_from_subterm(rng, rng.choice(ground_source)))
    return PatternSet(pats)
