"""Automated synthesis of forbidden patterns.

Walks of bounded length through the dependency graph yield nested contexts;
hole positions that are not yet forbidden become h-flagged patterns, which
are generalized until orthogonal.  Available on the fly (patterns feed the
running analysis, pairs are deleted as they become justified) or as an
iterated two-phase process (patterns first, fresh proof from scratch after).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Union

from .cdp import STRUCTURAL_ORIGINS, CdpProblem, ContextualRule, build_cdps
from .patterns import (
    HERE,
    ForbiddenPattern,
    PatternSet,
    forbidden_positions,
    generalize,
    same_pattern,
)
from .processors import (
    ProofNode,
    ProveConfig,
    WalkCapExceeded,
    _prove_full,
    dependency_graph,
    enumerate_walks,
    orthogonal_patterns,
    scp_report,
    walk_record,
)
from .terms import Trs, term_size


def classify_structural(pair: ContextualRule) -> bool:
    """Variable-descent, activation and shift pairs are structural."""
    return pair.origin in STRUCTURAL_ORIGINS


@dataclass(frozen=True)
class SynthesisConfig:
    n: int = 2
    mode: str = "on_the_fly"  # or "two_phase"
    pair_filter: Union[str, Sequence[ContextualRule]] = "non_structural"
    max_pattern_size: int = 25
    max_iterations: int = 5

    def __post_init__(self):
        if self.n <= 1:
            raise ValueError("synthesis depth must exceed 1")
        if self.max_pattern_size <= 0 or self.max_iterations <= 0:
            raise ValueError("limits must be positive")
        if self.mode not in ("on_the_fly", "two_phase"):
            raise ValueError(f"unknown mode {self.mode!r}")


@dataclass(frozen=True)
class SynthRecord:
    walk: tuple
    pairs: tuple
    term: object
    position: tuple
    raw: Optional[ForbiddenPattern]
    pattern: Optional[ForbiddenPattern]
    already_blocked: Optional[ForbiddenPattern]
    oversize: bool = False

    @property
    def generalized(self) -> bool:
        return self.pattern is not None and self.raw is not None and self.pattern != self.raw


@dataclass(frozen=True)
class SynthDetails:
    pair: ContextualRule
    records: "tuple[SynthRecord, ...]"


@dataclass(frozen=True)
class SynthesisResult:
    patterns: PatternSet
    verdict: str
    trace: list
    iterations: int


def _select_pairs(pairs, pair_filter) -> list:
    if pair_filter == "all":
        return list(pairs)
    if pair_filter in ("non_structural", "nonstructural"):
        return [p for p in pairs if not classify_structural(p)]
    selected = []
    for wanted in pair_filter:
        for p in pairs:
            if p.variant_of(wanted) and p not in selected:
                selected.append(p)
    return selected


def _records_for_pair(problem: CdpProblem, pair: ContextualRule, n: int,
                      walk_cap: int, max_pattern_size: int):
    """Pattern candidates for every unblocked length-n walk from the pair.

    Raises WalkCapExceeded when the walk budget is blown.
    """
    index = problem.pairs.index(pair)
    graph = dependency_graph(problem)
    walks = enumerate_walks(graph, index, n, walk_cap)
    orth = orthogonal_patterns(problem)
    created: list = []
    records: list = []
    dropped = False
    for walk in walks:
        rec = walk_record(problem, walk, orth)
        if rec.blocker is not None:
            records.append(SynthRecord(walk, rec.pairs, rec.term, rec.position,
                                       None, None, rec.blocker))
            continue
        raw = ForbiddenPattern(rec.term, rec.position, HERE)
        pattern = generalize(raw, problem.rules)
        if term_size(pattern.term) > max_pattern_size:
            dropped = True
            records.append(SynthRecord(walk, rec.pairs, rec.term, rec.position,
                                       raw, None, None, oversize=True))
            continue
        created.append(pattern)
        records.append(SynthRecord(walk, rec.pairs, rec.term, rec.position,
                                   raw, pattern, None))
    return PatternSet(created), records, dropped


def synthesize_for_pair(problem: CdpProblem, pair: ContextualRule, n: int,
                        walk_cap: int = 10000, max_pattern_size: int = 25) -> PatternSet:
    """Patterns that forbid the hole position of every currently unblocked
    length-n walk starting at the pair."""
    patterns, _, _ = _records_for_pair(problem, pair, n, walk_cap, max_pattern_size)
    return patterns


def synthesize(trs: Trs, config: Optional[SynthesisConfig] = None,
               problem: Optional[CdpProblem] = None,
               prove_config: Optional[ProveConfig] = None) -> SynthesisResult:
    """Run the synthesis schema.

    The working pair set is restricted to the selected pairs; walks are
    enumerated within that subset only.  In two-phase mode the full pair set
    is rebuilt from scratch for each proof attempt.
    """
    cfg = config or SynthesisConfig()
    pcfg = prove_config or ProveConfig()
    base = problem if problem is not None else build_cdps(trs, PatternSet(), "strict")
    if cfg.mode == "on_the_fly":
        return _on_the_fly(base, cfg, pcfg)
    return _two_phase(trs, base, cfg, pcfg, rebuild=problem is None)


def _on_the_fly(base: CdpProblem, cfg: SynthesisConfig, pcfg: ProveConfig) -> SynthesisResult:
    targets = _select_pairs(base.pairs, cfg.pair_filter)
    work = base.with_pairs(tuple(targets))
    trace: list = []
    added: list = []
    attempted: list = []
    iterations = 0
    budget = cfg.max_iterations * max(1, len(base.pairs))

    residues = [work]
    while True:
        simplified = []
        for prob in residues:
            verdict, tr, rest = _prove_full(prob, pcfg)
            trace.extend(tr)
            simplified.extend(rest)
        residues = simplified
        if not residues:
            return SynthesisResult(PatternSet(added), "proved", trace, iterations)

        progressed = False
        for k, prob in enumerate(residues):
            for pair in prob.pairs:
                if any(pair.variant_of(a) for a in attempted):
                    continue
                iterations += 1
                if iterations > budget:
                    return SynthesisResult(PatternSet(added), "maybe", trace, iterations)
                try:
                    patterns, records, _ = _records_for_pair(
                        prob, pair, cfg.n, pcfg.walk_cap, cfg.max_pattern_size)
                except WalkCapExceeded:
                    attempted.append(pair)
                    continue
                enriched = prob.with_patterns(prob.patterns.union(patterns))
                for p in patterns:
                    if not any(p == q for q in added):
                        added.append(p)
                trace.append(ProofNode(prob, "synthesize", (enriched,),
                                       SynthDetails(pair, tuple(records))))
                report = scp_report(enriched, cfg.n, pcfg.walk_cap)
                if enriched.pairs.index(pair) in report.deletable:
                    residues[k] = enriched
                    progressed = True
                else:
                    attempted.append(pair)
                    residues[k] = enriched
                break
            if progressed:
                break
        if not progressed:
            return SynthesisResult(PatternSet(added), "maybe", trace, iterations)


def _two_phase(trs: Trs, base: CdpProblem, cfg: SynthesisConfig, pcfg: ProveConfig,
               rebuild: bool) -> SynthesisResult:
    patterns = base.patterns
    added: list = []
    trace: list = []
    verdict = "maybe"
    iteration = 0
    for iteration in range(1, cfg.max_iterations + 1):
        restricted = base.with_pairs(
            tuple(_select_pairs(base.pairs, cfg.pair_filter))).with_patterns(patterns)
        new: list = []
        for pair in restricted.pairs:
            try:
                pats, records, _ = _records_for_pair(
                    restricted, pair, cfg.n, pcfg.walk_cap, cfg.max_pattern_size)
            except WalkCapExceeded:
                continue
            trace.append(ProofNode(restricted, "synthesize", (restricted,),
                                   SynthDetails(pair, tuple(records))))
            for p in pats:
                if not patterns.contains_variant(p) and not any(
                        same_pattern(p, q) for q in new):
                    new.append(p)
        if not new and iteration > 1:
            break
        patterns = patterns.union(new)
        added.extend(new)
        full = build_cdps(trs, patterns, "strict") if rebuild else base.with_patterns(patterns)
        verdict, tr, _ = _prove_full(full, pcfg)
        trace.extend(tr)
        if verdict == "proved" or not new:
            break
    return SynthesisResult(PatternSet(added), verdict, trace, iteration)
