import itertools

import pytest

from gamesynth import ltlf
from gamesynth.errors import AlphabetError, CapacityError
from gamesynth.ltlf import (
    Atom,
    And,
    Eventually,
    Globally,
    Implies,
    LtlfSyntaxError,
    Next,
    Not,
    Or,
    Release,
    TRUE,
    FALSE,
    Until,
    WeakNext,
    all_labels,
    dfa_accepts,
    eval_trace,
    make_label,
    parse,
    pretty,
    propositions,
    to_dfa,
    to_nnf,
)

p, q, r = Atom("p"), Atom("q"), Atom("r")
E = frozenset()
P = make_label("p")
Q = make_label("q")
PQ = make_label("p", "q")


def traces_over(names, max_len):
    labels = all_labels(names)
    for n in range(1, max_len + 1):
        yield from itertools.product(labels, repeat=n)


# A pool of formulas exercising every operator, nested temporal combinations,
# and the arch-style task shape.
FORMULA_POOL = [
    "F p",
    "G p",
    "p U q",
    "X p",
    "N p",
    "F (p & X q)",
    "p",
    "!p",
    "true",
    "false",
    "p & q",
    "p | q",
    "p -> q",
    "X X p",
    "N N p",
    "G (p -> X q)",
    "(p U q) U r",
    "p U (q U r)",
    "p R q",
    "(p R q) | (q U r)",
    "F (p & q & r) & G (!(p & q) -> !r)",
    "G F p",
    "F G p",
    "!(p U q)",
    "N (p R q)",
]


class TestParse:
    def test_single_operator(self):
        assert parse("F p") == Eventually(p)

    def test_arch_shape(self):
        got = parse("F(c1 & c2 & b) & G(!(c1 & c2) -> !b)")
        c1, c2, b = Atom("c1"), Atom("c2"), Atom("b")
        want = And(
            Eventually(And(And(c1, c2), b)),
            Globally(Implies(Not(And(c1, c2)), Not(b))),
        )
        assert got == want

    def test_dangling_binary_operator(self):
        with pytest.raises(LtlfSyntaxError) as exc:
            parse("U p")
        assert exc.value.offset == 0

    def test_unbalanced_parens(self):
        with pytest.raises(LtlfSyntaxError):
            parse("(p & q")

    def test_trailing_operator(self):
        with pytest.raises(LtlfSyntaxError):
            parse("p &")

    def test_empty(self):
        with pytest.raises(LtlfSyntaxError):
            parse("   ")

    def test_reserved_word_not_atom(self):
        with pytest.raises(LtlfSyntaxError):
            parse("U")

    def test_precedence(self):
        assert parse("!p & q") == And(Not(p), q)
        assert parse("p U q & r") == And(Until(p, q), r)
        assert parse("p & q | r") == Or(And(p, q), r)
        assert parse("p | q -> r") == Implies(Or(p, q), r)
        assert parse("X p U q") == Until(Next(p), q)

    def test_right_assoc_until_implies(self):
        assert parse("p U q U r") == Until(p, Until(q, r))
        assert parse("p -> q -> r") == Implies(p, Implies(q, r))

    def test_roundtrip_pool(self):
        for text in FORMULA_POOL:
            f = parse(text)
            assert parse(pretty(f)) == f

    def test_propositions_derived(self):
        f = parse("F (p & X q) | r")
        assert propositions(f) == frozenset({"p", "q", "r"})


class TestEvalTrace:
    def test_next_fails_at_last_position(self):
        # X needs a position i+1 to exist
        assert eval_trace(Next(p), [P], 0) is False

    def test_weak_next_at_last_position(self):
        assert eval_trace(WeakNext(p), [E], 0) is True
        assert eval_trace(WeakNext(p), [E, E], 0) is False

    def test_eventually(self):
        assert eval_trace(Eventually(p), [E, P], 0) is True
        assert eval_trace(Eventually(p), [E, E], 0) is False

    def test_until_and_globally(self):
        assert eval_trace(Until(p, q), [P, P, Q], 0) is True
        assert eval_trace(Globally(p), [P, E], 0) is False

    def test_position_argument(self):
        assert eval_trace(p, [E, P], 1) is True
        with pytest.raises(IndexError):
            eval_trace(p, [E, P], 2)
        with pytest.raises(IndexError):
            eval_trace(p, [E], -1)


class TestNnf:
    def test_de_morgan(self):
        assert to_nnf(Not(And(p, q))) == Or(Not(p), Not(q))

    def test_next_duality(self):
        f = Not(Next(p))
        g = to_nnf(f)
        assert g == WeakNext(Not(p))
        for t in traces_over(["p"], 3):
            assert eval_trace(f, t, 0) == eval_trace(g, t, 0)

    def test_globally_expansion(self):
        assert to_nnf(Globally(p)) == Release(FALSE, p)

    def test_until_release_duality(self):
        assert to_nnf(Not(Until(p, q))) == Release(Not(p), Not(q))
        assert to_nnf(Not(Release(p, q))) == Until(Not(p), Not(q))

    def test_shape_negations_on_atoms_only(self):
        def check(f):
            if isinstance(f, Not):
                assert isinstance(f.arg, Atom)
            assert not isinstance(f, (Eventually, Globally, Implies))
            for name in ("arg", "left", "right"):
                child = getattr(f, name, None)
                if child is not None:
                    check(child)

        for text in FORMULA_POOL:
            check(to_nnf(parse(text)))

    def test_preserves_semantics_on_pool(self):
        for text in FORMULA_POOL:
            f = parse(text)
            g = to_nnf(f)
            names = sorted(propositions(f)) or ["p"]
            for t in traces_over(names, 3):
                assert eval_trace(f, t, 0) == eval_trace(g, t, 0), (text, t)


class TestToDfa:
    def test_eventually_two_states(self):
        d = to_dfa(Eventually(p), {"p"})
        assert d.num_states == 2
        assert d.step(d.initial, E) == d.initial
        assert d.initial not in d.accepting
        sink = d.step(d.initial, P)
        assert sink in d.accepting
        assert d.step(sink, E) == sink and d.step(sink, P) == sink

    def test_true_single_state(self):
        d = to_dfa(TRUE, {"p"})
        assert d.num_states == 1
        assert d.initial in d.accepting

    def test_totality_and_determinism(self):
        for text in FORMULA_POOL:
            f = parse(text)
            d = to_dfa(f, propositions(f) or {"p"})
            seen = set()
            for s in range(d.num_states):
                for label in d.alphabet:
                    key = (s, label)
                    assert key in d.delta
                    assert key not in seen
                    seen.add(key)
            assert len(d.delta) == d.num_states * len(d.alphabet)

    def test_alphabet_error(self):
        with pytest.raises(AlphabetError):
            to_dfa(Eventually(p), {"q"})
        with pytest.raises(AlphabetError):
            to_dfa(Eventually(p), {"p"}, alphabet=[make_label("z")])

    def test_capacity_error(self):
        f = parse("F (p & X (q & X (r & X p)))")
        with pytest.raises(CapacityError):
            to_dfa(f, {"p", "q", "r"}, max_states=2)

    def test_restricted_alphabet(self):
        d = to_dfa(Until(p, q), {"p", "q"}, alphabet=[P, Q])
        assert dfa_accepts(d, [P, Q]) is True
        with pytest.raises(AlphabetError):
            dfa_accepts(d, [PQ])

    def test_arch_bounded_exhaustive(self):
        f = parse("F (c1 & c2 & b) & G (!(c1 & c2) -> !b)")
        names = ["b", "c1", "c2"]
        d = to_dfa(f, names)
        for t in traces_over(names, 4):
            assert dfa_accepts(d, t) == eval_trace(f, t, 0), t


class TestDfaAccepts:
    def test_simple(self):
        d = to_dfa(Eventually(p), {"p"})
        assert dfa_accepts(d, [P]) is True
        assert dfa_accepts(d, [E, E]) is False

    def test_until_matches_eval(self):
        f = Until(p, q)
        d = to_dfa(f, {"p", "q"})
        t = [P, Q]
        assert dfa_accepts(d, t) is True
        assert dfa_accepts(d, t) == eval_trace(f, t, 0)

    def test_empty_trace_rejected(self):
        d = to_dfa(Eventually(p), {"p"})
        with pytest.raises(ValueError):
            dfa_accepts(d, [])


def test_oracle_equivalence_smoke():
    # The full bounded-exhaustive run lives in the acceptance suite; here we
    # spot-check a couple of formulas at shorter depth to fail fast.
    for text in ["X p", "N p", "p U q", "!(p U q)"]:
        f = parse(text)
        names = sorted(propositions(f))
        d = to_dfa(f, names)
        for t in traces_over(names, 3):
            assert dfa_accepts(d, t) == eval_trace(f, t, 0), (text, t)
