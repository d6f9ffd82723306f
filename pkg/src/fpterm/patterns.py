"""Forbidden-pattern semantics.

Forbidden/allowed positions, restricted rewriting, bounded exploration,
stability, orthogonality, pattern generalization and the outermost
encoding.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .terms import (
    EPS,
    App,
    Position,
    Rule,
    Term,
    Trs,
    Var,
    fun_positions,
    is_linear,
    is_prefix,
    is_variant,
    match,
    overlaps,
    parallel,
    pos_str,
    positions,
    replace_at,
    strict_prefix,
    substitute,
    subterm_at,
    term_size,
    variables,
)

HERE = "h"
BELOW = "b"
ABOVE = "a"
FLAGS = (HERE, BELOW, ABOVE)


@dataclass(frozen=True)
class ForbiddenPattern:
    """A triple <term, position, flag> restricting where rewriting may occur."""

    term: Term
    position: tuple
    flag: str

    def __post_init__(self):
        if self.flag not in FLAGS:
            raise ValueError(f"flag must be one of {FLAGS}, got {self.flag!r}")
        if self.position not in positions(self.term):
            raise ValueError(f"position {pos_str(self.position)} not in pattern term")

    def __str__(self):
        return f"<{self.term}, {pos_str(self.position)}, {self.flag}>"


def same_pattern(a: ForbiddenPattern, b: ForbiddenPattern) -> bool:
    """Equality up to variable renaming."""
    return a.flag == b.flag and a.position == b.position and is_variant(a.term, b.term)


class PatternSet:
    """Ordered pattern collection, deduplicated modulo variable renaming."""

    def __init__(self, patterns: Iterable[ForbiddenPattern] = ()):
        items = []
        for p in patterns:
            if not any(same_pattern(p, q) for q in items):
                items.append(p)
        self._items = tuple(items)

    def __iter__(self):
        return iter(self._items)

    def __len__(self):
        return len(self._items)

    def __bool__(self):
        return bool(self._items)

    def __getitem__(self, i):
        return self._items[i]

    def __eq__(self, other):
        return isinstance(other, PatternSet) and self._items == other._items

    def __repr__(self):
        return f"PatternSet({list(self._items)!r})"

    def __str__(self):
        return "{" + ", ".join(str(p) for p in self._items) + "}"

    def union(self, other: Iterable[ForbiddenPattern]) -> "PatternSet":
        return PatternSet(list(self._items) + list(other))

    def contains_variant(self, p: ForbiddenPattern) -> bool:
        return any(same_pattern(p, q) for q in self._items)


def anchor_positions(pattern: ForbiddenPattern, s: Term) -> list:
    """Positions o.p where the pattern term matches s at o; the flag is ignored."""
    out = []
    for o in positions(s):
        if match(pattern.term, subterm_at(s, o)) is not None:
            q = o + pattern.position
            if q not in out:
                out.append(q)
    return sorted(out)


def forbidden_positions(patterns: Iterable[ForbiddenPattern], s: Term) -> list:
    """All positions of s forbidden by some pattern, sorted lexicographically."""
    pos = positions(s)
    out = set()
    for pat in patterns:
        anchors = anchor_positions(pat, s)
        if pat.flag == HERE:
            out.update(anchors)
        elif pat.flag == BELOW:
            out.update(p for p in pos if any(strict_prefix(q, p) for q in anchors))
        else:  # ABOVE
            out.update(p for p in pos if any(strict_prefix(p, q) for q in anchors))
    return sorted(out)


def allowed_positions(patterns: Iterable[ForbiddenPattern], s: Term) -> list:
    forbidden = set(forbidden_positions(patterns, s))
    return [p for p in positions(s) if p not in forbidden]


def pi_step(trs: Trs, patterns: Iterable[ForbiddenPattern], t: Term) -> list:
    """All restricted one-step reductions of t as (position, rule, result) triples.

    Deterministic lexicographic (position, rule index) order.
    """
    out = []
    for p in allowed_positions(patterns, t):
        sub = subterm_at(t, p)
        for rule in trs.rules:
            sigma = match(rule.lhs, sub)
            if sigma is not None:
                out.append((p, rule, replace_at(t, p, substitute(rule.rhs, sigma))))
    return out


@dataclass
class DerivationNode:
    """Node of a bounded derivation tree; treated as immutable once built."""

    term: Term
    steps: tuple = ()
    truncated: bool = False

    def is_normal_form(self) -> bool:
        return not self.steps and not self.truncated

    def max_depth(self) -> int:
        if not self.steps:
            return 0
        return 1 + max(child.max_depth() for _, _, child in self.steps)

    def any_normal_form(self) -> bool:
        if self.is_normal_form():
            return True
        return any(child.any_normal_form() for _, _, child in self.steps)

    def any_truncated(self) -> bool:
        if self.truncated:
            return True
        return any(child.any_truncated() for _, _, child in self.steps)

    def find_normal_form(self) -> Optional[Term]:
        """First normal-form leaf in deterministic DFS order, if any."""
        if self.is_normal_form():
            return self.term
        for _, _, child in self.steps:
            nf = child.find_normal_form()
            if nf is not None:
                return nf
        return None

    def has_cycle(self) -> bool:
        """True iff some root-to-node path repeats a term."""

        def walk(node, seen):
            if node.term in seen:
                return True
            seen = seen | {node.term}
            return any(walk(child, seen) for _, _, child in node.steps)

        return walk(self, frozenset())

    def node_count(self) -> int:
        return 1 + sum(child.node_count() for _, _, child in self.steps)


def explore(trs: Trs, patterns, t: Term, depth: int = 50, width: int = 10000) -> DerivationNode:
    """Breadth-first derivation tree of restricted reductions from t.

    Cut at the given depth and total node budget (``width``).  A node whose
    successors would exceed the budget is left unexpanded and flagged
    ``truncated``; budget exhaustion is never raised.
    """
    root = DerivationNode(t)
    made = 1
    queue = deque([(root, depth)])
    while queue:
        node, d = queue.popleft()
        succs = pi_step(trs, patterns, node.term)
        if not succs:
            continue
        if d <= 0 or made + len(succs) > width:
            node.truncated = True
            continue
        children = []
        for pos, rule, res in succs:
            child = DerivationNode(res)
            children.append((pos, rule, child))
            queue.append((child, d - 1))
        made += len(succs)
        node.steps = tuple(children)
    return root


def _offending_positions(t: Term, p, flag: str, trs: Trs) -> list:
    """Non-variable positions parallel to p (and strictly below it for h-flags)
    where some rule overlaps t."""
    out = []
    for q in fun_positions(t):
        if parallel(q, p) or (flag == HERE and strict_prefix(p, q)):
            if any(overlaps(rule, t, q) for rule in trs.rules):
                out.append(q)
    return out


def is_stable(pattern: ForbiddenPattern, trs: Trs) -> bool:
    """Stability: the pattern keeps matching under reductions that cannot
    touch the forbidden position.  "Below p" is read strictly below p.
    a-flagged patterns are never stable."""
    if pattern.flag == ABOVE:
        return False
    if not is_linear(pattern.term):
        return False
    return not _offending_positions(pattern.term, pattern.position, pattern.flag, trs)


def stb(patterns: Iterable[ForbiddenPattern], trs: Trs) -> PatternSet:
    return PatternSet([p for p in patterns if is_stable(p, trs)])


def in_pi_orth(pattern: ForbiddenPattern, trs: Trs) -> bool:
    """Orthogonality to the rules: linear, h/b-flagged, and no rule overlaps
    the pattern term parallel to or strictly below its position."""
    if pattern.flag not in (HERE, BELOW):
        return False
    if not is_linear(pattern.term):
        return False
    return not _offending_positions(pattern.term, pattern.position, HERE, trs)


def _fresh_names(used):
    i = 0
    while True:
        i += 1
        name = f"z{i}"
        if name not in used:
            used.add(name)
            yield name


def generalize(pattern: ForbiddenPattern, trs: Trs) -> ForbiddenPattern:
    """Widen the pattern until it is orthogonal to the rules.

    Linearizes the term, then repeatedly replaces offending subterms
    (innermost first) by fresh variables.  Every term matched by the input
    is matched by the output; position and flag are preserved.
    """
    if pattern.flag not in (HERE, BELOW):
        raise ValueError("only h- and b-patterns can be generalized")
    term = pattern.term
    used = set(variables(term))
    fresh = _fresh_names(used)

    seen = set()
    lin = term
    for q in var_positions_of(term):
        name = subterm_at(term, q).name
        if name in seen:
            lin = replace_at(lin, q, Var(next(fresh)))
        else:
            seen.add(name)
    term = lin

    while True:
        # offending = overlapped parallel to or strictly below the position,
        # i.e. the orthogonality criterion (same for h- and b-flags)
        offending = _offending_positions(term, pattern.position, HERE, trs)
        if not offending:
            break
        q = sorted(offending, key=lambda q: (-len(q), q))[0]
        assert not is_prefix(q, pattern.position)
        term = replace_at(term, q, Var(next(fresh)))

    out = ForbiddenPattern(term, pattern.position, pattern.flag)
    assert in_pi_orth(out, trs)
    return out


def var_positions_of(t: Term) -> list:
    return [p for p in positions(t) if isinstance(subterm_at(t, p), Var)]


def outermost_encode(trs: Trs) -> PatternSet:
    """Pattern set under which restricted rewriting is outermost rewriting:
    one b-pattern <lhs, root, b> per rule."""
    return PatternSet([ForbiddenPattern(rule.lhs, EPS, BELOW) for rule in trs.rules])
