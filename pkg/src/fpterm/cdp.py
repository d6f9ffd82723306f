"""Contextual dependency pairs.

Construction of the pair set (strict per the defining construction, or a
compatibility variant without the stability/definedness filters), the
erase mapping, nested contexts, and a chain-replay oracle used by tests.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Optional

from .patterns import (
    ABOVE,
    ForbiddenPattern,
    PatternSet,
    allowed_positions,
    forbidden_positions,
    stb,
)
from .terms import (
    EPS,
    HOLE,
    MARKED,
    TOKEN,
    App,
    PositionError,
    Rule,
    Symbol,
    Term,
    Trs,
    Var,
    fun_positions,
    is_prefix,
    match,
    pos_str,
    positions,
    replace_at,
    substitute,
    subterm_at,
    var_positions,
    variables,
)

DPC = "DPc"
VC = "Vc"
AC = "Ac"
SC = "Sc"
USER = "user"
ORIGINS = (DPC, VC, AC, SC, USER)
STRUCTURAL_ORIGINS = frozenset({VC, AC, SC})

HOLE_SYMBOL = Symbol("[]", 0, kind=HOLE)


def hole() -> App:
    return App(HOLE_SYMBOL, ())


def hole_positions(t: Term) -> list:
    return [p for p in fun_positions(t) if subterm_at(t, p).sym.kind == HOLE]


class MalformedProblem(ValueError):
    pass


class ChainError(ValueError):
    """Structurally broken chain-step data."""


@dataclass(frozen=True)
class ContextualRule:
    """A rewrite pair with an attached one-hole context."""

    lhs: Term
    rhs: Term
    context: Term
    hole_position: tuple
    origin: str = USER

    def __post_init__(self):
        if self.origin not in ORIGINS:
            raise ValueError(f"unknown origin {self.origin!r}")
        if hole_positions(self.context) != [self.hole_position]:
            raise ValueError("context must contain exactly one hole, at hole_position")
        lhs_vars = set(variables(self.lhs))
        for t in (self.rhs, self.context):
            extra = set(variables(t)) - lhs_vars
            if extra:
                raise ValueError(f"variables {sorted(extra)} do not occur in the lhs")

    def strip(self) -> Rule:
        """The pair without its context, as an ordinary rule."""
        return Rule(self.lhs, self.rhs)

    def renamed(self, index: int) -> "ContextualRule":
        sigma = {v: Var(f"{v}_{index}") for v in variables(self.lhs)}
        return ContextualRule(
            substitute(self.lhs, sigma),
            substitute(self.rhs, sigma),
            substitute(self.context, sigma),
            self.hole_position,
            self.origin,
        )

    def variant_of(self, other: "ContextualRule") -> bool:
        if self.origin != other.origin or self.hole_position != other.hole_position:
            return False
        return _match_seq(
            (self.lhs, self.rhs, self.context), (other.lhs, other.rhs, other.context)
        ) and _match_seq(
            (other.lhs, other.rhs, other.context), (self.lhs, self.rhs, self.context)
        )

    def __str__(self):
        return f"{self.lhs} -> {self.rhs} [{self.context}]"


def _match_seq(pats, subs) -> bool:
    sigma: dict = {}
    for p, s in zip(pats, subs):
        sigma = match(p, s, sigma)
        if sigma is None:
            return False
    return True


def erase(t: Term, marking: Optional[Mapping] = None, token: Optional[Symbol] = None) -> Term:
    """Unmark marked symbols and strip token wrappers.

    When a marking/token is supplied, unknown marked symbols or a foreign
    token signal a malformed problem.
    """
    if isinstance(t, Var):
        return t
    if t.sym.kind == TOKEN:
        if token is not None and t.sym != token:
            raise MalformedProblem(f"unexpected token symbol {t.sym.name}")
        return erase(t.args[0], marking, token)
    if t.sym.kind == MARKED:
        if marking is not None and t.sym not in marking.values():
            raise MalformedProblem(f"unknown marked symbol {t.sym.name}")
        return App(t.sym.base, tuple(erase(a, marking, token) for a in t.args))
    return App(t.sym, tuple(erase(a, marking, token) for a in t.args))


def nested_context_term(pairs: Iterable[ContextualRule]):
    """Plug the contexts of consecutive pairs into one another.

    Returns (context, position): the nested one-hole context and the
    composite hole position.  Pairs should be renamed apart first.
    """
    pairs = list(pairs)
    if not pairs:
        raise ValueError("need at least one pair")
    ctx = pairs[0].context
    pos = pairs[0].hole_position
    for p in pairs[1:]:
        ctx = replace_at(ctx, pos, p.context)
        pos = pos + p.hole_position
    return ctx, pos


def nested_context(pairs: Iterable[ContextualRule]):
    """The nested-context term with the erased last right-hand side plugged in,
    together with the composite hole position."""
    pairs = list(pairs)
    ctx, pos = nested_context_term(pairs)
    return replace_at(ctx, pos, erase(pairs[-1].rhs)), pos


@dataclass(frozen=True)
class CdpProblem:
    """Pairs + rules + patterns + token symbol, plus the marking bijection."""

    pairs: "tuple[ContextualRule, ...]"
    rules: Trs
    patterns: PatternSet
    token: Symbol
    marking: "tuple[tuple[Symbol, Symbol], ...]"

    def __post_init__(self):
        if self.token.kind != TOKEN:
            raise MalformedProblem("token symbol must have token kind")
        for pat in self.patterns:
            if pat.flag == ABOVE:
                raise MalformedProblem("a-flagged patterns are not admitted in problems")
        for pair in self.pairs:
            for t in (pair.lhs, pair.rhs):
                for p in positions(t):
                    sub = subterm_at(t, p)
                    if isinstance(sub, Var):
                        continue
                    if sub.sym.kind in (TOKEN, MARKED) and p != EPS:
                        raise MalformedProblem(
                            f"{sub.sym.name} must only occur at the root of {t}"
                        )
            for p in fun_positions(pair.context):
                sym = subterm_at(pair.context, p).sym
                if sym.kind in (TOKEN, MARKED):
                    raise MalformedProblem("contexts must not contain token or marked symbols")

    @cached_property
    def marking_map(self) -> dict:
        return dict(self.marking)

    def erase(self, t: Term) -> Term:
        return erase(t, self.marking_map, self.token)

    def with_pairs(self, pairs) -> "CdpProblem":
        return CdpProblem(tuple(pairs), self.rules, self.patterns, self.token, self.marking)

    def with_patterns(self, patterns: PatternSet) -> "CdpProblem":
        return CdpProblem(self.pairs, self.rules, patterns, self.token, self.marking)

    def __str__(self):
        return "; ".join(str(p) for p in self.pairs)


def _fresh_symbol_name(base: str, taken: set) -> str:
    name = base
    while name in taken:
        name += "'"
    return name


def make_problem(pairs, rules: Trs, patterns: PatternSet, token: Optional[Symbol] = None) -> CdpProblem:
    """Assemble a problem from explicit pairs, inferring token and marking."""
    pairs = tuple(pairs)
    marking: dict = {}
    found_token = token
    for pair in pairs:
        for t in (pair.lhs, pair.rhs):
            for p in fun_positions(t):
                sym = subterm_at(t, p).sym
                if sym.kind == MARKED:
                    marking[sym.base] = sym
                elif sym.kind == TOKEN and found_token is None:
                    found_token = sym
    if found_token is None:
        taken = {s.name for s in rules.signature} | {s.name for s in marking.values()}
        found_token = Symbol(_fresh_symbol_name("T", taken), 1, TOKEN)
    ordered = tuple(sorted(marking.items(), key=lambda kv: kv[0].name))
    return CdpProblem(pairs, rules, patterns, found_token, ordered)


def build_cdps(trs: Trs, patterns: PatternSet, mode: str = "strict") -> CdpProblem:
    """The contextual dependency pairs of a rewrite system.

    strict: positions filtered by the stable patterns, activation pairs only
    for defined symbols.  compat: both filters dropped (the historically
    displayed over-approximation).
    """
    if mode not in ("strict", "compat"):
        raise ValueError(f"mode must be strict or compat, got {mode!r}")
    for pat in patterns:
        if pat.flag == ABOVE:
            raise ValueError("a-flagged patterns are not supported by the pair construction")

    stable = stb(patterns, trs)
    defined = trs.defined
    taken = {s.name for s in trs.signature}
    marking: dict = {}

    def marked(sym: Symbol) -> Symbol:
        if sym not in marking:
            name = _fresh_symbol_name(sym.name + "#", taken)
            taken.add(name)
            marking[sym] = Symbol(name, sym.arity, MARKED, base=sym)
        return marking[sym]

    token = Symbol(_fresh_symbol_name("T", taken), 1, TOKEN)
    taken.add(token.name)

    pairs: list = []

    def add(lhs, rhs, ctx, pos, origin):
        cand = ContextualRule(lhs, rhs, ctx, pos, origin)
        if not any(cand.variant_of(p) for p in pairs):
            pairs.append(cand)

    for rule in trs.rules:
        lhs_marked = App(marked(rule.lhs.sym), rule.lhs.args)
        rhs = rule.rhs
        funs = set(fun_positions(rhs))
        if mode == "strict":
            candidates = [p for p in allowed_positions(stable, rhs) if p in funs]
        else:
            candidates = fun_positions(rhs)
        for p in candidates:
            sub = subterm_at(rhs, p)
            if sub.sym in defined:
                add(lhs_marked, App(marked(sub.sym), sub.args),
                    replace_at(rhs, p, hole()), p, DPC)
        for p in var_positions(rhs):
            add(lhs_marked, App(token, (subterm_at(rhs, p),)),
                replace_at(rhs, p, hole()), p, VC)

    rhs_symbols: list = []
    for rule in trs.rules:
        for p in fun_positions(rule.rhs):
            sym = subterm_at(rule.rhs, p).sym
            if sym not in rhs_symbols:
                rhs_symbols.append(sym)

    for sym in rhs_symbols:
        if mode == "compat" or sym in defined:
            xs = tuple(Var(f"x{i}") for i in range(1, sym.arity + 1))
            add(App(token, (App(sym, xs),)), App(marked(sym), xs), hole(), EPS, AC)

    for sym in rhs_symbols:
        if sym.arity >= 1:
            xs = tuple(Var(f"x{i}") for i in range(1, sym.arity + 1))
            for i in range(1, sym.arity + 1):
                ctx = App(sym, xs[: i - 1] + (hole(),) + xs[i:])
                add(App(token, (App(sym, xs),)), App(token, (xs[i - 1],)), ctx, (i,), SC)

    ordered = tuple(sorted(marking.items(), key=lambda kv: kv[0].name))
    return CdpProblem(tuple(pairs), trs, patterns, token, ordered)


@dataclass(frozen=True)
class ChainStep:
    """One chain element: a pair, its instantiation, and the plain rewrite
    interlude that follows the pair application."""

    pair: ContextualRule
    subst: dict
    plain_steps: tuple = ()  # of (position, rule)


@dataclass(frozen=True)
class ReplayEvent:
    kind: str  # "pair" or "plain"
    before: Term
    after: Term
    position: tuple
    origin: Optional[str] = None
    rule: Optional[Rule] = None


def replay_chain(problem: CdpProblem, steps) -> Optional[list]:
    """Replay chain steps; returns the event list or None when some chain
    condition fails.  Structurally broken data raises ChainError."""
    steps = list(steps)
    if not steps:
        return []
    events = []
    current = substitute(steps[0].pair.lhs, steps[0].subst)
    tracked = EPS
    for step in steps:
        pair = step.pair
        if not any(pair.variant_of(p) for p in problem.pairs):
            return None
        try:
            at = subterm_at(current, tracked)
        except PositionError as exc:
            raise ChainError(str(exc))
        if at != substitute(pair.lhs, step.subst):
            return None
        if tracked not in allowed_positions(problem.patterns, problem.erase(current)):
            return None
        inst_ctx = substitute(pair.context, step.subst)
        inst_rhs = substitute(pair.rhs, step.subst)
        replacement = replace_at(inst_ctx, pair.hole_position, inst_rhs)
        after = replace_at(current, tracked, replacement)
        events.append(ReplayEvent("pair", current, after, tracked, origin=pair.origin))
        current = after
        tracked = tracked + pair.hole_position

        rhs_token = isinstance(pair.rhs, App) and pair.rhs.sym.kind == TOKEN
        if rhs_token and step.plain_steps:
            return None
        for pos, rule in step.plain_steps:
            if rule not in problem.rules.rules:
                raise ChainError(f"rule {rule} is not part of the problem")
            if is_prefix(pos, tracked):
                return None
            if pos not in allowed_positions(problem.patterns, problem.erase(current)):
                return None
            try:
                sub = subterm_at(current, pos)
            except PositionError as exc:
                raise ChainError(str(exc))
            sigma = match(rule.lhs, sub)
            if sigma is None:
                raise ChainError(f"rule {rule} does not apply at {pos_str(pos)}")
            after = replace_at(current, pos, substitute(rule.rhs, sigma))
            events.append(ReplayEvent("plain", current, after, pos, rule=rule))
            current = after
    return events


def validate_chain(problem: CdpProblem, steps) -> bool:
    """True iff the steps replay as a proper chain for the problem."""
    return replay_chain(problem, steps) is not None
