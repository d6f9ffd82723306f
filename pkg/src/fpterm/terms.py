"""First-order terms over a finite signature.

Positions, substitutions, matching, unification, overlap detection and
plain (unrestricted) rewriting.  Everything here is immutable and purely
functional, so values can be shared freely between concurrent workers.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping, Optional, Union

PLAIN = "plain"
MARKED = "marked"
TOKEN = "token"
HOLE = "hole"

#: Positions are 1-based index sequences; the empty tuple is the root.
Position = "tuple[int, ...]"
EPS: tuple = ()


class PositionError(ValueError):
    """A position that does not exist in the term it was used on."""


@dataclass(frozen=True)
class Symbol:
    """Function symbol.  Marked symbols remember the plain symbol they mark."""

    name: str
    arity: int
    kind: str = PLAIN
    base: Optional["Symbol"] = None

    def __post_init__(self):
        if self.kind == HOLE and self.arity != 0:
            raise ValueError("hole symbols are nullary")
        if self.kind == TOKEN and self.arity != 1:
            raise ValueError("token symbols are unary")
        if self.kind == MARKED:
            if self.base is None or self.base.arity != self.arity:
                raise ValueError(f"marked symbol {self.name!r} needs a base of equal arity")
        elif self.base is not None:
            raise ValueError("only marked symbols carry a base symbol")

    def __call__(self, *args: "Term") -> "App":
        return App(self, tuple(args))

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class App:
    sym: Symbol
    args: "tuple[Term, ...]" = ()

    def __post_init__(self):
        if len(self.args) != self.sym.arity:
            raise ValueError(
                f"{self.sym.name} has arity {self.sym.arity}, got {len(self.args)} arguments"
            )

    def __str__(self):
        if not self.args:
            return self.sym.name
        return f"{self.sym.name}({','.join(str(a) for a in self.args)})"


Term = Union[Var, App]


def pos_str(p) -> str:
    """Render a position; the root is written ``e``."""
    return "e" if not p else ".".join(str(i) for i in p)


def is_prefix(p, q) -> bool:
    """p <= q: p is at or above q."""
    return len(p) <= len(q) and q[: len(p)] == p


def strict_prefix(p, q) -> bool:
    """p < q: p is strictly above q."""
    return len(p) < len(q) and q[: len(p)] == p


def parallel(p, q) -> bool:
    return not is_prefix(p, q) and not is_prefix(q, p)


def positions(t: Term) -> list:
    """All positions of t in lexicographic (= pre-order) order."""
    out = [EPS]
    if isinstance(t, App):
        for i, arg in enumerate(t.args, start=1):
            out.extend((i,) + q for q in positions(arg))
    return out


def fun_positions(t: Term) -> list:
    return [p for p in positions(t) if isinstance(subterm_at(t, p), App)]


def var_positions(t: Term) -> list:
    return [p for p in positions(t) if isinstance(subterm_at(t, p), Var)]


def subterm_at(t: Term, p) -> Term:
    for i in p:
        if not isinstance(t, App) or not 1 <= i <= len(t.args):
            raise PositionError(f"position {pos_str(p)} not in term")
        t = t.args[i - 1]
    return t


def replace_at(t: Term, p, u: Term) -> Term:
    """t with the subterm at p replaced by u."""
    if not p:
        return u
    i = p[0]
    if not isinstance(t, App) or not 1 <= i <= len(t.args):
        raise PositionError(f"position {pos_str(p)} not in term")
    args = list(t.args)
    args[i - 1] = replace_at(args[i - 1], p[1:], u)
    return App(t.sym, tuple(args))


def variables(t: Term) -> list:
    """Variable names of t in order of first occurrence."""
    out, seen = [], set()
    stack = [t]
    while stack:
        s = stack.pop()
        if isinstance(s, Var):
            if s.name not in seen:
                seen.add(s.name)
                out.append(s.name)
        else:
            stack.extend(reversed(s.args))
    return out


def is_ground(t: Term) -> bool:
    return not variables(t)


def is_linear(t: Term) -> bool:
    names = [str(subterm_at(t, p)) for p in var_positions(t)]
    return len(names) == len(set(names))


def term_size(t: Term) -> int:
    return len(positions(t))


def substitute(t: Term, sigma: Mapping) -> Term:
    if isinstance(t, Var):
        return sigma.get(t.name, t)
    if not t.args:
        return t
    return App(t.sym, tuple(substitute(a, sigma) for a in t.args))


def match(pattern: Term, subject: Term, bindings: Optional[Mapping] = None):
    """Substitution sigma with pattern*sigma == subject, or None.

    Repeated pattern variables must bind syntactically equal subterms.
    """
    sigma = dict(bindings) if bindings else {}
    stack = [(pattern, subject)]
    while stack:
        p, s = stack.pop()
        if isinstance(p, Var):
            bound = sigma.get(p.name)
            if bound is None:
                sigma[p.name] = s
            elif bound != s:
                return None
        elif isinstance(s, App) and p.sym == s.sym:
            stack.extend(zip(p.args, s.args))
        else:
            return None
    return sigma


def _occurs(name: str, t: Term) -> bool:
    return name in variables(t)


def unify(s: Term, t: Term):
    """Most general unifier of s and t (idempotent), or None.

    Performs the occurs check, so cyclic bindings are rejected.
    """
    eqs = [(s, t)]
    sigma: dict = {}
    while eqs:
        a, b = eqs.pop()
        if a == b:
            continue
        if isinstance(b, Var) and not isinstance(a, Var):
            a, b = b, a
        if isinstance(a, Var):
            if _occurs(a.name, b):
                return None
            bind = {a.name: b}
            eqs = [(substitute(x, bind), substitute(y, bind)) for x, y in eqs]
            sigma = {v: substitute(u, bind) for v, u in sigma.items()}
            sigma[a.name] = b
        elif a.sym == b.sym:
            eqs.extend(zip(a.args, b.args))
        else:
            return None
    return sigma


def is_variant(s: Term, t: Term) -> bool:
    """True iff s and t are equal up to variable renaming."""
    return match(s, t) is not None and match(t, s) is not None


@dataclass(frozen=True)
class Rule:
    lhs: Term
    rhs: Term

    def __post_init__(self):
        if isinstance(self.lhs, Var):
            raise ValueError("rule left-hand side must not be a variable")
        extra = set(variables(self.rhs)) - set(variables(self.lhs))
        if extra:
            raise ValueError(f"right-hand side introduces variables {sorted(extra)}")

    def __str__(self):
        return f"{self.lhs} -> {self.rhs}"


@dataclass(frozen=True)
class Trs:
    """A term rewriting system; the signature is derived from the rules."""

    rules: "tuple[Rule, ...]"

    @cached_property
    def signature(self) -> tuple:
        seen: dict = {}
        for rule in self.rules:
            for t in (rule.lhs, rule.rhs):
                for p in fun_positions(t):
                    sym = subterm_at(t, p).sym
                    seen.setdefault(sym, None)
        return tuple(seen)

    @cached_property
    def defined(self) -> frozenset:
        return frozenset(r.lhs.sym for r in self.rules)

    @cached_property
    def constructors(self) -> frozenset:
        return frozenset(s for s in self.signature if s not in self.defined)

    def __str__(self):
        return "; ".join(str(r) for r in self.rules)


def _rename_free(vars_used: set, base: str) -> str:
    name = base
    while name in vars_used:
        name += "'"
    return name


def rename_disjoint(t: Term, avoid: Iterable) -> Term:
    """Rename the variables of t away from the given names."""
    avoid = set(avoid)
    sigma = {}
    for v in variables(t):
        if v in avoid:
            fresh = _rename_free(avoid | set(variables(t)) | set(sigma), v)
            sigma[v] = Var(fresh)
            avoid.add(fresh)
    return substitute(t, sigma) if sigma else t


def overlaps(rule: Rule, t: Term, p) -> bool:
    """True iff rule's lhs unifies with t at the non-variable position p.

    The rule is renamed apart from t internally.
    """
    if p not in positions(t):
        return False
    sub = subterm_at(t, p)
    if not isinstance(sub, App):
        return False
    lhs = rename_disjoint(rule.lhs, variables(t))
    return unify(lhs, sub) is not None


def rewrite_step(trs: Trs, t: Term, p) -> list:
    """All one-step rewrite results of t at position p, one per applicable rule."""
    sub = subterm_at(t, p)
    out = []
    for rule in trs.rules:
        sigma = match(rule.lhs, sub)
        if sigma is not None:
            res = replace_at(t, p, substitute(rule.rhs, sigma))
            if res not in out:
                out.append(res)
    return out


def suffix_variables(value, index: int):
    """Append ``_index`` to every variable name of a Term or Rule."""
    if isinstance(value, Rule):
        sigma = {v: Var(f"{v}_{index}") for v in variables(value.lhs)}
        return Rule(substitute(value.lhs, sigma), substitute(value.rhs, sigma))
    sigma = {v: Var(f"{v}_{index}") for v in variables(value)}
    return substitute(value, sigma)


def rename_apart(items: list) -> list:
    """Consistently rename so the items are pairwise variable-disjoint.

    Deterministic: item i gets the suffix ``_i+1``.
    """
    return [suffix_variables(item, i + 1) for i, item in enumerate(items)]
