import pytest

from fpterm import (
    ABOVE,
    BELOW,
    ForbiddenPattern,
    HERE,
    PatternSet,
    Rule,
    Symbol,
    Trs,
    Var,
    allowed_positions,
    anchor_positions,
    explore,
    forbidden_positions,
    generalize,
    in_pi_orth,
    is_stable,
    outermost_encode,
    pi_step,
    positions,
    rewrite_step,
    stb,
)
from fpterm.terms import App, is_variant

from systems import (
    A,
    CONS,
    F,
    G,
    INF,
    PI_LOOP,
    PI_STREAM,
    PI_STREAM_BELOW,
    R_LOOP,
    R_SINGLE,
    R_STREAM,
    S,
    SND,
    X,
    Y,
    ZERO,
    ZS,
    stream_term,
)


class TestAnchors:
    def test_stream(self):
        pat = PI_STREAM[0]
        assert anchor_positions(pat, stream_term()) == [(2, 2)]

    def test_no_match(self):
        b = Symbol("b", 0)
        pat = ForbiddenPattern(F(X), (1,), HERE)
        assert anchor_positions(pat, G(b())) == []

    def test_below_anchor(self):
        # oracle: enumerate candidate anchors o by hand; only o = root matches
        pat = ForbiddenPattern(F(F(F(X))), (1, 1), BELOW)
        assert anchor_positions(pat, F(F(F(A())))) == [(1, 1)]


class TestForbiddenAllowed:
    def test_empty(self):
        assert forbidden_positions(PatternSet(), stream_term()) == []

    def test_here(self):
        assert forbidden_positions(PI_LOOP, F(A())) == [(1,)]
        assert allowed_positions(PI_LOOP, F(A())) == [()]

    def test_below(self):
        pats = [ForbiddenPattern(F(F(F(X))), (1, 1), BELOW)]
        assert forbidden_positions(pats, F(F(F(A())))) == [(1, 1, 1)]

    def test_below_root_anchor(self):
        # oracle: anchor at the root forbids every strict descendant
        assert allowed_positions(PI_STREAM_BELOW, stream_term()) == [()]

    def test_above_flag(self):
        pats = [ForbiddenPattern(A(), (), ABOVE)]
        t = F(F(A()))
        assert forbidden_positions(pats, t) == [(), (1,)]

    def test_no_patterns_allows_everything(self):
        t = stream_term()
        assert allowed_positions(PatternSet(), t) == positions(t)


class TestPiStep:
    def test_restricted(self):
        steps = pi_step(R_LOOP, PI_LOOP, F(A()))
        assert [(p, str(r), t) for p, r, t in steps] == [((), "f(x) -> g(x)", G(A()))]

    def test_empty_patterns_collapse(self):
        t = F(A())
        unrestricted = [(p, res) for p in positions(t) for res in rewrite_step(R_LOOP, t, p)]
        got = [(p, res) for p, _, res in pi_step(R_LOOP, PatternSet(), t)]
        assert got == unrestricted

    def test_stream_normal_form(self):
        assert pi_step(R_STREAM, PI_STREAM, stream_term()) == []


class TestExplore:
    def test_loop_prefix(self):
        node = explore(R_LOOP, PI_LOOP, A(), depth=6)
        seen = [node.term]
        cur = node
        for _ in range(4):
            assert len(cur.steps) == 1
            cur = cur.steps[0][2]
            seen.append(cur.term)
        assert seen == [A(), F(A()), G(A()), G(F(A())), G(G(A()))]

    def test_normal_form_single_node(self):
        node = explore(R_STREAM, PI_STREAM, stream_term(), depth=5)
        assert node.is_normal_form()
        assert node.steps == ()

    def test_second_of_stream(self):
        # oracle: the 3-step hand derivation
        # 2nd(inf(0)) -> 2nd(cons(0, inf(s(0))))
        #             -> 2nd(cons(0, cons(s(0), inf(s(s(0))))))
        #             -> s(0)
        start = SND(INF(ZERO()))
        node = explore(R_STREAM, PI_STREAM, start, depth=5)
        assert node.find_normal_form() == S(ZERO())
        assert node.max_depth() == 3

    def test_budget_reported_not_raised(self):
        node = explore(R_SINGLE, PatternSet(), A(), depth=3, width=3)
        assert node.any_truncated()


class TestStability:
    def test_loop_pattern_stable(self):
        # oracle: f(x) has no non-variable position parallel to or below 1
        assert is_stable(PI_LOOP[0], R_LOOP)

    def test_below_at_root_stable(self):
        # oracle: no position is parallel to the root
        assert is_stable(PI_STREAM_BELOW[0], R_STREAM)

    def test_nonlinear_unstable(self):
        f2 = Symbol("f2", 2)
        pat = ForbiddenPattern(f2(X, X), (1,), HERE)
        assert not is_stable(pat, R_LOOP)

    def test_above_never_stable(self):
        pat = ForbiddenPattern(F(X), (1,), ABOVE)
        assert not is_stable(pat, R_LOOP)

    def test_stb(self):
        assert list(stb(PatternSet(), R_LOOP)) == []
        assert list(stb(PI_LOOP, R_LOOP)) == list(PI_LOOP)
        f2 = Symbol("f2", 2)
        nonlinear = PatternSet([ForbiddenPattern(f2(X, X), (1,), HERE)])
        assert list(stb(nonlinear, R_LOOP)) == []


class TestOrthogonality:
    def test_triple_f(self):
        pat = ForbiddenPattern(F(F(F(X))), (1, 1), BELOW)
        assert in_pi_orth(pat, R_SINGLE)

    def test_ffa_orthogonal(self):
        # overlap at exactly the pattern position does not count
        pat = ForbiddenPattern(F(F(A())), (1, 1), HERE)
        assert in_pi_orth(pat, R_SINGLE)

    def test_nonlinear_not_orthogonal(self):
        xp = Var("x'")
        pat = ForbiddenPattern(CONS(X, CONS(xp, INF(S(xp)))), (2, 2), HERE)
        assert not in_pi_orth(pat, R_STREAM)

    def test_overlap_below_not_orthogonal(self):
        pat = ForbiddenPattern(F(F(X)), (), BELOW)
        trs = Trs((Rule(F(F(X)), F(X)),))
        assert not in_pi_orth(pat, trs)


class TestGeneralize:
    def test_stream_pattern(self):
        xp = Var("x'")
        raw = ForbiddenPattern(CONS(X, CONS(xp, INF(S(xp)))), (2, 2), HERE)
        out = generalize(raw, R_STREAM)
        z = Var("z")
        expected = CONS(X, CONS(Y, INF(S(z))))
        assert is_variant(out.term, expected)
        assert out.position == (2, 2)
        assert out.flag == HERE
        assert in_pi_orth(out, R_STREAM)

    def test_already_orthogonal_unchanged(self):
        pat = ForbiddenPattern(F(F(A())), (1, 1), HERE)
        assert generalize(pat, R_SINGLE) == pat

    def test_fixpoint(self):
        pat = ForbiddenPattern(F(F(F(X))), (1, 1), BELOW)
        assert generalize(pat, R_SINGLE) == pat

    def test_rejects_above(self):
        pat = ForbiddenPattern(F(X), (1,), ABOVE)
        with pytest.raises(ValueError):
            generalize(pat, R_SINGLE)

    def test_match_set_widens(self):
        xp = Var("x'")
        raw = ForbiddenPattern(CONS(X, CONS(xp, INF(S(xp)))), (2, 2), HERE)
        out = generalize(raw, R_STREAM)
        from fpterm import match, substitute
        inst = substitute(raw.term, {"x": ZERO(), "x'": S(ZERO())})
        assert match(out.term, inst) is not None


class TestOutermostEncode:
    def test_single_rule(self):
        enc = outermost_encode(R_SINGLE)
        assert list(enc) == [ForbiddenPattern(A(), (), BELOW)]

    def test_stream_rules(self):
        enc = outermost_encode(R_STREAM)
        assert len(enc) == 2
        assert enc[0] == ForbiddenPattern(INF(X), (), BELOW)
        assert enc[1] == ForbiddenPattern(SND(CONS(X, CONS(Y, ZS))), (), BELOW)


class TestPatternSet:
    def test_dedup_modulo_renaming(self):
        p1 = ForbiddenPattern(F(X), (1,), HERE)
        p2 = ForbiddenPattern(F(Y), (1,), HERE)
        assert len(PatternSet([p1, p2])) == 1

    def test_distinct_positions_kept(self):
        p1 = ForbiddenPattern(F(X), (1,), HERE)
        p2 = ForbiddenPattern(F(X), (), HERE)
        assert len(PatternSet([p1, p2])) == 2

    def test_position_validated(self):
        with pytest.raises(ValueError):
            ForbiddenPattern(F(X), (2,), HERE)
