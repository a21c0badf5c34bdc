"""Randomized formula properties (structure-aware, bounded sizes)."""

import itertools

from hypothesis import given, settings, strategies as st

from gamesynth.ltlf import (
    And,
    Atom,
    Eventually,
    FALSE,
    Globally,
    Implies,
    Next,
    Not,
    Or,
    Release,
    TRUE,
    Until,
    WeakNext,
    all_labels,
    eval_trace,
    parse,
    pretty,
    to_nnf,
)

atoms = st.sampled_from([Atom("p"), Atom("q"), Atom("r")])
leaves = st.one_of(atoms, st.just(TRUE), st.just(FALSE))


def formulas(depth=3):
    return st.recursive(
        leaves,
        lambda sub: st.one_of(
            st.builds(Not, sub),
            st.builds(Next, sub),
            st.builds(WeakNext, sub),
            st.builds(Eventually, sub),
            st.builds(Globally, sub),
            st.builds(And, sub, sub),
            st.builds(Or, sub, sub),
            st.builds(Implies, sub, sub),
            st.builds(Until, sub, sub),
            st.builds(Release, sub, sub),
        ),
        max_leaves=8,
    )


@given(formulas())
@settings(max_examples=200, deadline=None)
def test_pretty_parse_roundtrip(f):
    assert parse(pretty(f)) == f


@given(formulas())
@settings(max_examples=100, deadline=None)
def test_nnf_equivalent_on_short_traces(f):
    g = to_nnf(f)
    labels = all_labels(["p", "q"])
    for n in (1, 2, 3):
        for t in itertools.product(labels, repeat=n):
            assert eval_trace(f, t, 0) == eval_trace(g, t, 0)
