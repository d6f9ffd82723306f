"""The worked systems used across the test suite."""

from fpterm import (
    BELOW,
    ForbiddenPattern,
    HERE,
    PatternSet,
    Rule,
    Symbol,
    Trs,
    Var,
    hole,
    make_problem,
)
from fpterm.cdp import ContextualRule
from fpterm.terms import MARKED

# stream system: inf(x) -> cons(x, inf(s(x))),  2nd(cons(x, cons(y, zs))) -> y
CONS = Symbol("cons", 2)
INF = Symbol("inf", 1)
S = Symbol("s", 1)
SND = Symbol("2nd", 1)
ZERO = Symbol("0", 0)

X, Y, ZS = Var("x"), Var("y"), Var("zs")

R_STREAM = Trs((
    Rule(INF(X), CONS(X, INF(S(X)))),
    Rule(SND(CONS(X, CONS(Y, ZS))), Y),
))
PI_STREAM = PatternSet([ForbiddenPattern(CONS(X, CONS(Y, ZS)), (2, 2), HERE)])
PI_STREAM_BELOW = PatternSet([ForbiddenPattern(CONS(X, CONS(Y, ZS)), (), BELOW)])

# loop system: a -> f(a),  f(x) -> g(x)
A = Symbol("a", 0)
F = Symbol("f", 1)
G = Symbol("g", 1)

R_LOOP = Trs((
    Rule(A(), F(A())),
    Rule(F(X), G(X)),
))
PI_LOOP = PatternSet([ForbiddenPattern(F(X), (1,), HERE)])

# the single-rule system a -> f(a) used by the context-processor examples
R_SINGLE = Trs((Rule(A(), F(A())),))

A_MARKED = Symbol("a#", 0, MARKED, base=A)
SELF_PAIR = ContextualRule(A_MARKED(), A_MARKED(), F(hole()), (1,), "user")

PI_TRIPLE_F = PatternSet([ForbiddenPattern(F(F(F(X))), (1, 1), BELOW)])


def context_problem():
    """The worked single-pair problem with the f(f(f(x))) blocking pattern."""
    return make_problem([SELF_PAIR], R_SINGLE, PI_TRIPLE_F)


def synthesis_seed_problem():
    """The same single-pair problem with no patterns at all."""
    return make_problem([SELF_PAIR], R_SINGLE, PatternSet())


def stream_term():
    """cons(0, cons(s(0), inf(s(s(0)))))."""
    return CONS(ZERO(), CONS(S(ZERO()), INF(S(S(ZERO())))))
