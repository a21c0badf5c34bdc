import os

import numpy as np
import pytest

from gamesynth.domain import Arrangement, ELSE, PropositionDef, ROBOT_GRIPPER, WorldSpec
from gamesynth.errors import FormatError
from gamesynth.explicit_io import export_explicit, import_explicit
from gamesynth.game import Choice, Player, ProbTermination, RatioTurns, StochasticGame, build_game
from gamesynth.ltlf import parse, to_dfa
from gamesynth.product import build_product
from gamesynth.solver import extract_strategy, value_iteration

from oracles import make_pg


def read(path):
    with open(path, "r", newline="") as fh:
        return fh.read()


def games_isomorphic(a: StochasticGame, b: StochasticGame) -> bool:
    if (a.var_names, a.states, a.initial, a.control) != (
        b.var_names, b.states, b.initial, b.control,
    ):
        return False
    if a.labels != b.labels:
        return False
    if set(a.propositions) != set(b.propositions):
        return False
    for ra, rb in zip(a.choices, b.choices):
        if len(ra) != len(rb):
            return False
        for ca, cb in zip(ra, rb):
            if ca.action != cb.action:
                return False
            if sorted(zip(ca.succs, ca.probs)) != sorted(zip(cb.succs, cb.probs)):
                return False
    return True


def two_state_game():
    return StochasticGame(
        var_names=("x",),
        states=((0,), (1,)),
        initial=0,
        control=(Player.ROBOT, Player.HUMAN),
        choices=(
            (Choice("a0", (1,), (1.0,)),),
            (Choice("wait", (1,), (1.0,)),),
        ),
        propositions=("goal",),
        labels=(frozenset(), frozenset({"goal"})),
    )


def domain_game(tm=RatioTurns(1, 1)):
    world = WorldSpec(
        objects=("O0",),
        locations=(ELSE, ROBOT_GRIPPER, "human_gripper", "L1"),
        robot_success={("O0", "grasp"): 0.9},
        propositions=(PropositionDef("goal", "O0", "L1"),),
    )
    return build_game(world, Arrangement((ELSE,)), tm)


def random_explicit_game(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 12))
    control = tuple(Player.ROBOT if rng.random() < 0.5 else Player.HUMAN for _ in range(n))
    props = ("p", "q")
    labels = tuple(
        frozenset(name for name in props if rng.random() < 0.3) for _ in range(n)
    )
    rows = []
    for s in range(n):
        row = []
        for ci in range(int(rng.integers(1, 4))):
            width = int(rng.integers(1, min(4, n + 1)))
            succs = tuple(int(t) for t in rng.choice(n, size=width, replace=False))
            raw = rng.random(width) + 0.1
            probs = raw / raw.sum()
            probs = tuple(float(p) for p in probs[:-1]) + (
                float(1.0 - probs[:-1].sum()),
            )
            row.append(Choice(f"act{ci}", succs, probs))
        rows.append(tuple(row))
    return StochasticGame(
        var_names=("v0", "v1"),
        states=tuple((int(rng.integers(0, 5)), int(rng.integers(0, 5))) for _ in range(n)),
        initial=int(rng.integers(0, n)),
        control=control,
        choices=tuple(rows),
        propositions=props,
        labels=labels,
    )


class TestExport:
    def test_two_state_format(self, tmp_path):
        bundle = export_explicit(two_state_game(), str(tmp_path))
        tra = read(bundle.tra).splitlines()
        assert tra[0] == "2 2 2"
        assert tra[1] == "0 0 1 1 a0"
        sta = read(bundle.sta).splitlines()
        assert sta[0] == "(x)"
        assert sta[1] == "0:(0)"
        lab = read(bundle.lab).splitlines()
        assert lab[0] == '0="init" 1="goal"'
        assert lab[1] == "0: 0"
        assert lab[2] == "1: 1"
        pla = read(bundle.pla).splitlines()
        assert pla == ["0 1", "1 2"]

    def test_prob_shortest_decimal(self, tmp_path):
        g = domain_game()
        bundle = export_explicit(g, str(tmp_path))
        body = read(bundle.tra)
        assert " 0.9 " in body
        assert " 0.1 " in body
        assert " 1 " in body  # deterministic transitions print as `1`

    def test_header_counts_match_body(self, tmp_path):
        for seed in range(5):
            g = random_explicit_game(seed)
            bundle = export_explicit(g, str(tmp_path / str(seed)))
            lines = [l for l in read(bundle.tra).splitlines() if l.strip()]
            n_states, n_choices, n_trans = (int(x) for x in lines[0].split())
            assert n_trans == len(lines) - 1
            assert n_states == g.num_states
            assert n_choices == g.num_choices

    def test_strategy_file(self, tmp_path):
        pg = build_product(
            domain_game(),
            to_dfa(parse("F goal"), ("goal",), alphabet=domain_game().occurring_labels()),
        )
        v = value_iteration(pg)
        strat = extract_strategy(pg, v)
        bundle = export_explicit(pg, str(tmp_path), strategy=strat)
        lines = read(bundle.str_).splitlines()
        assert len(lines) == pg.num_states
        assert all(len(l.split()) == 2 for l in lines)


class TestRoundTrip:
    def test_export_import_export_byte_identical(self, tmp_path):
        for seed in range(50):
            g = random_explicit_game(seed)
            d1 = str(tmp_path / f"a{seed}")
            d2 = str(tmp_path / f"b{seed}")
            b1 = export_explicit(g, d1)
            back = import_explicit(d1)
            b2 = export_explicit(back, d2)
            for f1, f2 in zip((b1.sta, b1.tra, b1.lab, b1.pla), (b2.sta, b2.tra, b2.lab, b2.pla)):
                assert read(f1) == read(f2), (seed, f1)

    def test_isomorphic_domain_games(self, tmp_path):
        for i, tm in enumerate([RatioTurns(1, 1), RatioTurns(2, 1), ProbTermination(0.05)]):
            g = domain_game(tm)
            d = str(tmp_path / str(i))
            export_explicit(g, d)
            back = import_explicit(d)
            assert games_isomorphic(g, back)

    def test_product_roundtrip(self, tmp_path):
        g = domain_game()
        pg = build_product(
            g, to_dfa(parse("F goal"), ("goal",), alphabet=g.occurring_labels())
        )
        d = str(tmp_path)
        export_explicit(pg, d)
        back = import_explicit(d)
        assert games_isomorphic(pg.to_game(), back)
        assert "target" in back.propositions


class TestFaults:
    def write_good(self, d):
        export_explicit(two_state_game(), d)

    def mutate(self, d, suffix, fn):
        path = os.path.join(d, "model." + suffix)
        text = read(path)
        with open(path, "w", newline="\n") as fh:
            fh.write(fn(text))

    @pytest.mark.parametrize(
        "suffix,mutator,expect",
        [
            ("tra", lambda t: t.replace("2 2 2", "2 2 3"), "header claims 3"),
            ("tra", lambda t: t.replace("0 0 1 1 a0", "0 0 1 0.5 a0"), "sum"),
            ("tra", lambda t: t.replace("0 0 1 1 a0", "0 0 9 1 a0"), "out of range"),
            ("tra", lambda t: t.replace("2 2 2", "nope"), "header"),
            (
                "tra",
                lambda t: t.replace("0 0 1 1 a0", "0 0 1 0.5 a0\n0 0 1 0.5 b0")
                .replace("2 2 2", "2 2 3"),
                "conflicting actions",
            ),
            ("tra", lambda t: t.replace("0 0 1 1 a0", "0 1 1 1 a0"), "non-contiguous"),
            ("sta", lambda t: t.replace("1:(1)", "5:(1)"), "out of order"),
            ("sta", lambda t: t.replace("1:(1)", "1:(1,2)"), "expected 1 values"),
            ("lab", lambda t: t.replace("1: 1", "1: 7"), "unknown label id"),
            ("lab", lambda t: t.replace('0="init"', '0=init'), "bad header entry"),
            ("pla", lambda t: t.replace("1 2", "1 3"), "player must be 1 or 2"),
            ("pla", lambda t: t.replace("1 2\n", ""), "no player assigned"),
        ],
    )
    def test_malformed_rejected_with_location(self, tmp_path, suffix, mutator, expect):
        d = str(tmp_path)
        self.write_good(d)
        self.mutate(d, suffix, mutator)
        with pytest.raises(FormatError) as exc:
            import_explicit(d)
        assert expect in str(exc.value)
        assert exc.value.filename == "model." + suffix
        assert exc.value.line >= 0

    def test_probability_sum_names_src_and_choice(self, tmp_path):
        d = str(tmp_path)
        self.write_good(d)
        self.mutate(d, "tra", lambda t: t.replace("0 0 1 1 a0", "0 0 1 0.5 a0"))
        with pytest.raises(FormatError) as exc:
            import_explicit(d)
        assert "(0, 0)" in str(exc.value)

    def test_missing_file(self, tmp_path):
        d = str(tmp_path)
        self.write_good(d)
        os.remove(os.path.join(d, "model.lab"))
        with pytest.raises(FormatError):
            import_explicit(d)


def test_reserved_init_proposition_rejected(tmp_path):
    g = two_state_game()
    import dataclasses

    bad = dataclasses.replace(g, propositions=("init",), labels=(frozenset(), frozenset({"init"})))
    with pytest.raises(ValueError):
        export_explicit(bad, str(tmp_path))
