"""Input format, proof-trace rendering and the command line interface.

The input format is a TPDB-style sectioned file:

    (VAR x y)
    (RULES f(x) -> g(x) a -> f(a))
    (STRATEGY OUTERMOST)
    (FORBIDDEN (cons(x,cons(y,z)), 2.2, h))

Identifiers consist of [A-Za-z0-9_'+*:<>=-]; "->" is reserved.  COMMENT
section bodies are skipped verbatim up to the matching parenthesis.
Positions are written "e" (root) or dot-separated 1-based indices.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field
from typing import Optional

from .cdp import CdpProblem, build_cdps
from .patterns import (
    ForbiddenPattern,
    PatternSet,
    explore,
    outermost_encode,
)
from .processors import (
    PolyDetails,
    ProofNode,
    ProveConfig,
    SccDetails,
    ScpDetails,
    dependency_graph,
    prove,
)
from .synthesis import SynthDetails, SynthesisConfig, synthesize
from .terms import App, Rule, Symbol, Term, Trs, Var, pos_str

FULL = "full"
OUTERMOST = "outermost"

IDENT_CHARS = frozenset(
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789_'+*:<>=-"
)
KEYWORDS = ("VAR", "RULES", "STRATEGY", "FORBIDDEN", "COMMENT")


class ParseError(ValueError):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        super().__init__(f"line {line}, column {col}: {message}")
        self.line = line
        self.col = col


@dataclass(frozen=True)
class InputSpec:
    trs: Trs
    strategy: str = FULL
    declared_patterns: PatternSet = field(default_factory=PatternSet)
    var_names: "tuple[str, ...]" = ()
    warnings: "tuple[str, ...]" = field(default=(), compare=False)

    def __post_init__(self):
        if self.strategy == OUTERMOST and self.declared_patterns:
            raise ValueError("outermost strategy and declared patterns are mutually exclusive")

    def effective_patterns(self) -> PatternSet:
        if self.strategy == OUTERMOST:
            return outermost_encode(self.trs)
        return self.declared_patterns


class _Scanner:
    def __init__(self, text: str):
        self.text = text
        self.i = 0
        self.line = 1
        self.col = 1

    def eof(self) -> bool:
        return self.i >= len(self.text)

    def peek(self) -> str:
        return self.text[self.i] if self.i < len(self.text) else ""

    def advance(self) -> str:
        ch = self.text[self.i]
        self.i += 1
        if ch == "\n":
            self.line += 1
            self.col = 1
        else:
            self.col += 1
        return ch

    def skip_ws(self):
        while not self.eof() and self.peek().isspace():
            self.advance()

    def error(self, message: str):
        raise ParseError(message, self.line, self.col)

    def next_token(self):
        """(kind, text, line, col) with kind in lparen/rparen/comma/dot/ident."""
        self.skip_ws()
        if self.eof():
            self.error("unexpected end of input")
        line, col = self.line, self.col
        ch = self.peek()
        if ch == "(":
            self.advance()
            return ("lparen", "(", line, col)
        if ch == ")":
            self.advance()
            return ("rparen", ")", line, col)
        if ch == ",":
            self.advance()
            return ("comma", ",", line, col)
        if ch == ".":
            self.advance()
            return ("dot", ".", line, col)
        if ch in IDENT_CHARS:
            chars = []
            while not self.eof() and self.peek() in IDENT_CHARS:
                chars.append(self.advance())
            return ("ident", "".join(chars), line, col)
        self.error(f"unexpected character {ch!r}")

    def skip_comment_body(self):
        depth = 0
        while True:
            if self.eof():
                self.error("unterminated COMMENT section")
            ch = self.advance()
            if ch == "(":
                depth += 1
            elif ch == ")":
                if depth == 0:
                    return
                depth -= 1


class _TokenStream:
    def __init__(self, tokens):
        self.tokens = tokens
        self.i = 0

    def eof(self) -> bool:
        return self.i >= len(self.tokens)

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def next(self):
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of section", 0, 0)
        self.i += 1
        return tok

    def expect(self, kind: str, what: str):
        tok = self.next()
        if tok[0] != kind:
            raise ParseError(f"expected {what}, found {tok[1]!r}", tok[2], tok[3])
        return tok


class _Builder:
    """Symbol table: arities fixed by first use and checked globally."""

    def __init__(self, var_names):
        self.var_names = set(var_names)
        self.arities: dict = {}
        self.symbols: dict = {}
        self.first_use: dict = {}

    def symbol(self, name: str, arity: int, line: int, col: int) -> Symbol:
        known = self.arities.get(name)
        if known is None:
            self.arities[name] = arity
            self.symbols[name] = Symbol(name, arity)
            self.first_use[name] = (line, col)
        elif known != arity:
            raise ParseError(
                f"arity conflict for {name!r}: used with {arity} arguments, "
                f"previously {known}", line, col)
        return self.symbols[name]

    def parse_term(self, ts: _TokenStream) -> Term:
        tok = ts.expect("ident", "a term")
        _, name, line, col = tok
        if name == "->":
            raise ParseError("'->' cannot start a term", line, col)
        nxt = ts.peek()
        if nxt is not None and nxt[0] == "lparen":
            if name in self.var_names:
                raise ParseError(f"variable {name!r} cannot take arguments", line, col)
            ts.next()
            args = [self.parse_term(ts)]
            while True:
                tok = ts.next()
                if tok[0] == "comma":
                    args.append(self.parse_term(ts))
                elif tok[0] == "rparen":
                    break
                else:
                    raise ParseError(f"expected ',' or ')', found {tok[1]!r}", tok[2], tok[3])
            sym = self.symbol(name, len(args), line, col)
            return App(sym, tuple(args))
        if name in self.var_names:
            return Var(name)
        return App(self.symbol(name, 0, line, col), ())


def _parse_position(ts: _TokenStream):
    tok = ts.expect("ident", "a position")
    _, text, line, col = tok
    if text == "e":
        return ()
    if not text.isdigit():
        raise ParseError(f"bad position component {text!r}", line, col)
    indices = [int(text)]
    while True:
        nxt = ts.peek()
        if nxt is None or nxt[0] != "dot":
            break
        ts.next()
        tok = ts.expect("ident", "a position index")
        if not tok[1].isdigit():
            raise ParseError(f"bad position component {tok[1]!r}", tok[2], tok[3])
        indices.append(int(tok[1]))
    for i in indices:
        if i < 1:
            raise ParseError("position indices are 1-based", line, col)
    return tuple(indices)


def parse(text) -> InputSpec:
    """Parse an input file into a rewrite system plus strategy/patterns."""
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    scanner = _Scanner(text)
    sections = []
    while True:
        scanner.skip_ws()
        if scanner.eof():
            break
        tok = scanner.next_token()
        if tok[0] != "lparen":
            raise ParseError(f"expected '(', found {tok[1]!r}", tok[2], tok[3])
        kw = scanner.next_token()
        if kw[0] != "ident" or kw[1] not in KEYWORDS:
            raise ParseError(f"expected a section keyword, found {kw[1]!r}", kw[2], kw[3])
        if kw[1] == "COMMENT":
            scanner.skip_comment_body()
            continue
        body = []
        depth = 0
        while True:
            tok = scanner.next_token()
            if tok[0] == "lparen":
                depth += 1
            elif tok[0] == "rparen":
                if depth == 0:
                    break
                depth -= 1
            body.append(tok)
        sections.append((kw[1], body, (kw[2], kw[3])))

    var_names: list = []
    for name, body, _ in sections:
        if name == "VAR":
            for tok in body:
                if tok[0] != "ident":
                    raise ParseError(f"expected a variable name, found {tok[1]!r}",
                                     tok[2], tok[3])
                if tok[1] not in var_names:
                    var_names.append(tok[1])

    builder = _Builder(var_names)
    rules: list = []
    patterns: list = []
    strategy: Optional[str] = None
    warnings: list = []

    for name, body, loc in sections:
        ts = _TokenStream(body)
        if name == "VAR":
            continue
        if name == "STRATEGY":
            tok = ts.expect("ident", "a strategy name")
            if tok[1] not in ("OUTERMOST", "FULL"):
                raise ParseError(f"unsupported strategy {tok[1]!r}", tok[2], tok[3])
            if strategy is not None:
                raise ParseError("duplicate STRATEGY section", *loc)
            strategy = OUTERMOST if tok[1] == "OUTERMOST" else FULL
            if not ts.eof():
                tok = ts.next()
                raise ParseError("trailing input in STRATEGY section", tok[2], tok[3])
        elif name == "RULES":
            while not ts.eof():
                first = ts.peek()
                lhs = builder.parse_term(ts)
                arrow = ts.expect("ident", "'->'")
                if arrow[1] != "->":
                    raise ParseError(f"expected '->', found {arrow[1]!r}", arrow[2], arrow[3])
                rhs = builder.parse_term(ts)
                try:
                    rules.append(Rule(lhs, rhs))
                except ValueError as exc:
                    raise ParseError(str(exc), first[2], first[3])
        elif name == "FORBIDDEN":
            while not ts.eof():
                opener = ts.expect("lparen", "'('")
                term = builder.parse_term(ts)
                ts.expect("comma", "','")
                position = _parse_position(ts)
                ts.expect("comma", "','")
                flag = ts.expect("ident", "a flag")
                if flag[1] not in ("h", "b", "a"):
                    raise ParseError(f"flag must be h, b or a, found {flag[1]!r}",
                                     flag[2], flag[3])
                ts.expect("rparen", "')'")
                try:
                    patterns.append(ForbiddenPattern(term, position, flag[1]))
                except ValueError as exc:
                    raise ParseError(str(exc), opener[2], opener[3])

    for rule in rules:
        lhs_syms = {t.sym.name for t in _subapps(rule.lhs)}
        for t in _subapps(rule.rhs):
            if t.sym.arity == 0 and t.sym.name not in lhs_syms:
                msg = (f"identifier {t.sym.name!r} is not declared as a variable; "
                       "treating it as a constant")
                if msg not in warnings:
                    warnings.append(msg)

    try:
        return InputSpec(
            trs=Trs(tuple(rules)),
            strategy=strategy or FULL,
            declared_patterns=PatternSet(patterns),
            var_names=tuple(var_names),
            warnings=tuple(warnings),
        )
    except ValueError as exc:
        raise ParseError(str(exc), 1, 1)


def _subapps(t: Term):
    stack = [t]
    while stack:
        s = stack.pop()
        if isinstance(s, App):
            yield s
            stack.extend(s.args)


def parse_term(text: str, spec: InputSpec) -> Term:
    """Parse a standalone term over the signature of a parsed input.

    Fresh symbols are admitted with their arity fixed by first use; uses of
    known symbols are checked against the input's signature.
    """
    scanner = _Scanner(text)
    tokens = []
    while True:
        scanner.skip_ws()
        if scanner.eof():
            break
        tokens.append(scanner.next_token())
    builder = _Builder(spec.var_names)
    for sym in spec.trs.signature:
        builder.arities[sym.name] = sym.arity
        builder.symbols[sym.name] = sym
    ts = _TokenStream(tokens)
    term = builder.parse_term(ts)
    if not ts.eof():
        tok = ts.next()
        raise ParseError(f"trailing input after term: {tok[1]!r}", tok[2], tok[3])
    return term


def pattern_line(p: ForbiddenPattern) -> str:
    return f"({p.term}, {pos_str(p.position)}, {p.flag})"


def print_input(spec: InputSpec) -> str:
    """Canonical text form; parse(print_input(spec)) == spec."""
    out = []
    if spec.var_names:
        out.append(f"(VAR {' '.join(spec.var_names)})")
    lines = [f"  {rule.lhs} -> {rule.rhs}" for rule in spec.trs.rules]
    out.append("(RULES\n" + "\n".join(lines) + ("\n" if lines else "") + ")")
    if spec.strategy == OUTERMOST:
        out.append("(STRATEGY OUTERMOST)")
    if spec.declared_patterns:
        body = "\n".join(f"  {pattern_line(p)}" for p in spec.declared_patterns)
        out.append("(FORBIDDEN\n" + body + "\n)")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# trace rendering


def _render_node(node: ProofNode) -> list:
    lines: list = []
    det = node.details
    if node.processor == "scc":
        assert isinstance(det, SccDetails)
        lines.append(
            f"dependency graph: {len(det.components)} cyclic component(s), "
            f"{len(det.dropped)} pair(s) dropped"
        )
        for k, comp in enumerate(det.components, start=1):
            members = " ; ".join(str(node.problem.pairs[i]) for i in comp)
            lines.append(f"  component {k}: {members}")
        for pair in det.dropped:
            lines.append(f"  dropped: {pair}")
    elif node.processor.startswith("scp"):
        assert isinstance(det, ScpDetails)
        lines.append(f"SCP_{det.n} deletes {det.pair}")
        for rec in det.walks:
            walk = " ; ".join(str(p) for p in rec.pairs)
            lines.append(f"  walk {walk}")
            status = f"blocked by {rec.blocker}" if rec.blocker else "not blocked"
            lines.append(
                f"    context {rec.context} term {rec.term} "
                f"position {pos_str(rec.position)} {status}"
            )
    elif node.processor == "poly":
        assert isinstance(det, PolyDetails)
        removed = " ; ".join(str(p) for p in det.removed)
        lines.append(f"polynomial interpretation removes {removed}")
        for entry in det.interpretation.render():
            lines.append(f"  {entry}")
    elif node.processor == "synthesize":
        assert isinstance(det, SynthDetails)
        lines.append(f"synthesis for {det.pair}")
        for rec in det.records:
            walk = " ; ".join(str(p) for p in rec.pairs)
            if rec.already_blocked is not None:
                lines.append(f"  walk {walk}: already blocked by {rec.already_blocked}")
            elif rec.oversize:
                lines.append(f"  walk {walk}: pattern over the size limit, dropped")
            elif rec.generalized:
                lines.append(
                    f"  walk {walk}: synthesized {rec.pattern} "
                    f"(generalized from <{rec.raw.term}, "
                    f"{pos_str(rec.raw.position)}, {rec.raw.flag}>)"
                )
            else:
                lines.append(
                    f"  walk {walk}: synthesized {rec.pattern} "
                    f"(orthogonal without generalization)"
                )
    else:
        lines.append(f"{node.processor}: {len(node.outputs)} output problem(s)")
    return lines


def render_trace(trace) -> str:
    """Deterministic human-readable proof tree."""
    if not trace:
        return "trivially finite: no pairs\n"
    lines: list = []
    for node in trace:
        lines.extend(_render_node(node))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# command line


def _read_input(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, "r", encoding="utf-8") as handle:
        return handle.read()


def _add_common(sub):
    sub.add_argument("file", help="input file ('-' for stdin)")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fpterm",
        description="Termination prover and rewriting engine for rewriting "
                    "restricted by forbidden patterns.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prove", help="run the full proof pipeline")
    _add_common(p)
    p.add_argument("--scp-depth", type=int, default=3, metavar="N")
    p.add_argument("--mode", choices=("strict", "compat"), default="strict")
    p.add_argument("--coeff-max", type=int, default=2, metavar="K")
    p.add_argument("--walk-cap", type=int, default=10000, metavar="N")
    p.add_argument("--timeout", type=float, default=None, metavar="SECONDS")

    p = sub.add_parser("synthesize", help="synthesize forbidden patterns")
    _add_common(p)
    p.add_argument("--synthesize", choices=("onthefly", "twophase"), default="onthefly",
                   dest="synth_mode")
    p.add_argument("--scp-depth", type=int, default=3, metavar="N")
    p.add_argument("--pair-filter", choices=("all", "nonstructural"), default="nonstructural")
    p.add_argument("--max-iterations", type=int, default=5, metavar="N")
    p.add_argument("--coeff-max", type=int, default=2, metavar="K")
    p.add_argument("--walk-cap", type=int, default=10000, metavar="N")
    p.add_argument("--timeout", type=float, default=None, metavar="SECONDS")

    p = sub.add_parser("cdps", help="print the constructed pair set")
    _add_common(p)
    p.add_argument("--mode", choices=("strict", "compat"), default="strict")

    p = sub.add_parser("graph", help="print the dependency graph")
    _add_common(p)
    p.add_argument("--mode", choices=("strict", "compat"), default="strict")

    p = sub.add_parser("rewrite", help="normalize a term under the restriction")
    _add_common(p)
    p.add_argument("--term", required=True)
    p.add_argument("--depth", type=int, default=50)
    p.add_argument("--width", type=int, default=10000)

    return parser


def run_cli(argv=None) -> int:
    """Exit codes: 0 proved / normal form found, 1 maybe, 2 input error."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    try:
        spec = parse(_read_input(args.file))
    except (ParseError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for warning in spec.warnings:
        print(f"warning: {warning}", file=sys.stderr)

    if args.command == "prove":
        problem = build_cdps(spec.trs, spec.effective_patterns(), args.mode)
        config = ProveConfig(args.scp_depth, args.coeff_max, args.walk_cap, args.timeout)
        verdict, trace = prove(problem, config)
        print(render_trace(trace), end="")
        print(f"verdict: {verdict}")
        return 0 if verdict == "proved" else 1

    if args.command == "synthesize":
        try:
            config = SynthesisConfig(
                n=args.scp_depth,
                mode="on_the_fly" if args.synth_mode == "onthefly" else "two_phase",
                pair_filter=args.pair_filter,
                max_iterations=args.max_iterations,
            )
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        problem = build_cdps(spec.trs, spec.effective_patterns(), "strict")
        pcfg = ProveConfig(args.scp_depth, args.coeff_max, args.walk_cap, args.timeout)
        result = synthesize(spec.trs, config, problem=problem, prove_config=pcfg)
        print(render_trace(result.trace), end="")
        if result.patterns:
            print("(FORBIDDEN")
            for pat in result.patterns:
                print(f"  {pattern_line(pat)}")
            print(")")
        else:
            print("no patterns synthesized")
        print(f"verdict: {result.verdict}")
        return 0 if result.verdict == "proved" else 1

    if args.command == "cdps":
        problem = build_cdps(spec.trs, spec.effective_patterns(), args.mode)
        if args.mode == "compat":
            print("mode compat: stability filter and definedness restriction disabled")
        for pair in problem.pairs:
            print(pair)
        return 0

    if args.command == "graph":
        problem = build_cdps(spec.trs, spec.effective_patterns(), args.mode)
        graph = dependency_graph(problem)
        for i, pair in enumerate(problem.pairs):
            print(f"p{i}: {pair}")
        for i, j in sorted(graph.edges):
            print(f"p{i} -> p{j}")
        return 0

    if args.command == "rewrite":
        try:
            term = parse_term(args.term, spec)
        except ParseError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        node = explore(spec.trs, spec.effective_patterns(), term,
                       depth=args.depth, width=args.width)
        nf = node.find_normal_form()
        if nf is not None:
            print(nf)
            return 0
        print(f"no normal form within budget (depth {args.depth}, width {args.width})")
        return 1

    raise AssertionError(f"unhandled command {args.command}")


def main() -> None:
    sys.exit(run_cli())
