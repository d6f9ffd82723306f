"""Termination prover and rewriting engine for term rewriting restricted by
forbidden patterns: contextual dependency pairs, the simple context processor
and automated pattern synthesis."""

from .terms import (
    App,
    EPS,
    PositionError,
    Rule,
    Symbol,
    Term,
    Trs,
    Var,
    match,
    overlaps,
    positions,
    rename_apart,
    replace_at,
    rewrite_step,
    substitute,
    subterm_at,
    unify,
)
from .patterns import (
    ABOVE,
    BELOW,
    DerivationNode,
    ForbiddenPattern,
    HERE,
    PatternSet,
    allowed_positions,
    anchor_positions,
    explore,
    forbidden_positions,
    generalize,
    in_pi_orth,
    is_stable,
    outermost_encode,
    pi_step,
    stb,
)
from .cdp import (
    CdpProblem,
    ChainStep,
    ContextualRule,
    build_cdps,
    erase,
    hole,
    make_problem,
    nested_context,
    validate_chain,
)
from .processors import (
    DependencyGraph,
    PolyInterpretation,
    ProofNode,
    ProveConfig,
    dependency_graph,
    prove,
    reduction_pair_processor,
    scc_processor,
    scp_processor,
)
from .synthesis import (
    SynthesisConfig,
    SynthesisResult,
    classify_structural,
    synthesize,
    synthesize_for_pair,
)
from .frontend import InputSpec, ParseError, parse, print_input, render_trace, run_cli

__version__ = "0.1.0"
