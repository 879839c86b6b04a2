"""Expression kernel tests: parsing, rendering, enumeration, canonical form."""

import pytest
from hypothesis import given, settings, strategies as st

from derivekit.expr import (
    PLACEHOLDER,
    add,
    integer,
    mul,
    ncmul,
    power,
    rational,
    subexpressions,
    sym,
    symbols_of,
    func,
)
from derivekit.parser import ParseError, parse

from oracles import collect_symbol_leaves, walk_subtrees


class TestParse:
    def test_single_leaf(self):
        e = parse("x")
        assert e.kind == "symbol"
        assert e.render_text == "x"

    def test_product_with_reciprocal(self):
        e = parse("h*w/2")
        assert e == mul(sym("h"), sym("w"), power(integer(2), integer(-1)))

    def test_unbalanced_paren_position(self):
        with pytest.raises(ParseError) as err:
            parse("(")
        assert "position 1" in str(err.value)

    def test_empty_input(self):
        with pytest.raises(ParseError):
            parse("")

    def test_unknown_character(self):
        with pytest.raises(ParseError) as err:
            parse("a $ b")
        assert err.value.position == 3

    def test_trailing_garbage(self):
        with pytest.raises(ParseError):
            parse("a b")

    def test_float_rejected(self):
        with pytest.raises(ParseError):
            parse("1.5*x")

    def test_literal_fraction_is_rational(self):
        assert parse("1/2") == rational(1, 2)
        assert parse("3/6") == rational(1, 2)
        assert parse("-1/2") == rational(-1, 2)

    def test_symbol_fraction_is_power(self):
        assert parse("w/2") == mul(sym("w"), power(integer(2), integer(-1)))

    def test_subtraction_desugars(self):
        assert parse("a - b") == add(sym("a"), mul(integer(-1), sym("b")))

    def test_noncommutative_precedence(self):
        # @ binds between + and *
        assert parse("a@b*c") == ncmul(sym("a"), mul(sym("b"), sym("c")))
        assert parse("x + a@b") == add(sym("x"), ncmul(sym("a"), sym("b")))

    def test_dagger_names(self):
        e = parse("a†@a")
        assert sorted(symbols_of(e)) == ["a", "a†"]

    def test_function_call(self):
        e = parse("Sum(a*b, q)")
        assert e == func("Sum", mul(sym("a"), sym("b")), sym("q"))

    def test_placeholder(self):
        assert parse("?") is PLACEHOLDER


class TestRender:
    def test_commutative_children_sorted(self):
        assert add(sym("b"), sym("a")).render_text == "a + b"
        assert mul(sym("b"), sym("a")).render_text == "a*b"

    def test_order_is_length_then_lex(self):
        e = add(sym("ab"), sym("c"))
        assert e.render_text == "c + ab"

    def test_noncommutative_order_preserved(self):
        e = ncmul(sym("b"), sym("a"))
        assert e.render_text == "b@a"

    def test_latex_power(self):
        assert power(sym("hbar"), integer(2)).render_latex == r"\hbar^{2}"

    def test_latex_names(self):
        assert sym("omega_0").render_latex == r"\omega_{0}"
        assert sym("a†").render_latex == r"a^{\dagger}"
        assert rational(1, 2).render_latex == r"\frac{1}{2}"

    def test_latex_sum_function(self):
        e = func("Sum", mul(sym("a"), sym("b")), sym("q"))
        assert e.render_latex == r"\sum_{q}\left(a b\right)"

    def test_render_deterministic(self):
        e = parse("hbar*omega_0*(a†@a + 1/2)")
        assert e.render_text == parse(e.render_text).render_text


class TestCanonicalisation:
    def test_flattening(self):
        assert add(add(sym("a"), sym("b")), sym("c")) == parse("a + b + c")
        assert mul(mul(sym("a"), sym("b")), sym("c")) == parse("a*b*c")

    def test_identities(self):
        assert add(sym("a"), integer(0)) == sym("a")
        assert mul(sym("a"), integer(1)) == sym("a")
        assert mul(sym("a"), integer(0)) == integer(0)
        assert power(sym("a"), integer(1)) == sym("a")
        assert power(sym("a"), integer(0)) == integer(1)

    def test_rational_reduction(self):
        assert rational(4, 6) == rational(2, 3)
        assert rational(4, 2) == integer(2)
        with pytest.raises(ValueError):
            rational(1, 0)


class TestSubexpressions:
    def test_leaf(self):
        assert subexpressions(sym("x")) == frozenset({sym("x")})

    def test_shared_subtrees_deduplicate(self):
        e = add(sym("x"), mul(sym("x"), sym("y")))
        got = {s.render_text for s in subexpressions(e)}
        assert got == {"x", "y", "x*y", "x + x*y"}

    def test_power(self):
        e = power(sym("a"), integer(2))
        got = {s.render_text for s in subexpressions(e)}
        assert got == {"a", "2", "a**2"}

    def test_against_walk_oracle(self):
        e = parse("hbar*omega_0*(a†@a + b†@b) + Sum(p**2/(2*m), k)")
        got = {s.render_text for s in subexpressions(e)}
        want = {s.render_text for s in walk_subtrees(e)}
        assert got == want

    def test_count_bounded_by_nodes(self):
        e = parse("(a + b)*(a + b)")
        assert len(subexpressions(e)) <= e.node_count


class TestSymbols:
    def test_numerals_excluded(self):
        assert symbols_of(parse("2*x + y")) == {"x", "y"}

    def test_placeholder_excluded(self):
        assert symbols_of(parse("x")) == {"x"}
        assert symbols_of(PLACEHOLDER) == frozenset()

    def test_operator_symbols(self):
        e = parse("hbar*omega_0*(a†@a + b†@b)")
        assert symbols_of(e) == {"hbar", "omega_0", "a†", "a", "b†", "b"}

    def test_against_leaf_oracle(self):
        e = parse("Sum(p**2/(2*m), k) + c*m*T")
        assert symbols_of(e) == frozenset(collect_symbol_leaves(e))


# Random canonical trees for the round-trip property.
_names = st.sampled_from(["x", "y", "z", "hbar", "omega_0", "a†", "q"])


def _exprs(depth: int):
    leaf = st.one_of(
        _names.map(sym),
        st.integers(-9, 9).map(integer),
        st.tuples(st.integers(-9, 9), st.integers(1, 9)).map(lambda t: rational(*t)),
        st.just(PLACEHOLDER),
    )
    if depth == 0:
        return leaf
    sub = _exprs(depth - 1)
    return st.one_of(
        leaf,
        st.lists(sub, min_size=2, max_size=3).map(lambda xs: add(*xs)),
        st.lists(sub, min_size=2, max_size=3).map(lambda xs: mul(*xs)),
        st.lists(sub, min_size=2, max_size=3).map(lambda xs: ncmul(*xs)),
        st.tuples(sub, st.integers(-3, 3).map(integer)).map(lambda t: power(*t)),
        st.tuples(sub, _names.map(sym)).map(lambda t: func("Sum", *t)),
    )


class TestRoundTrip:
    @settings(max_examples=300, deadline=None)
    @given(_exprs(3))
    def test_parse_render_round_trip(self, e):
        r = e.render_text
        again = parse(r)
        assert again == e
        assert again.render_text == r

    @settings(max_examples=150, deadline=None)
    @given(_exprs(3))
    def test_render_injective_on_distinct_trees(self, e):
        # Idempotence of render-parse-render; rendering twice is identical.
        assert parse(e.render_text).render_text == e.render_text

    def test_spec_round_trip_example(self):
        t = "h*w/2"
        once = parse(t).render_text
        assert parse(once).render_text == once
