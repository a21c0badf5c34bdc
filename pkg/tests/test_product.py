import numpy as np
import pytest

from gamesynth.domain import Arrangement, ELSE, PropositionDef, ROBOT_GRIPPER, WorldSpec
from gamesynth.errors import AlphabetError
from gamesynth.game import Player, RatioTurns, build_game
from gamesynth.ltlf import TRUE, parse, to_dfa
from gamesynth.product import build_product
from gamesynth.solver import value_iteration

from oracles import make_pg


def small_game():
    world = WorldSpec(
        objects=("O0",),
        locations=(ELSE, ROBOT_GRIPPER, "human_gripper", "L1"),
        propositions=(PropositionDef("goal", "O0", "L1"),),
    )
    return build_game(world, Arrangement((ELSE,)), RatioTurns(1, 1))


class TestBuildProduct:
    def test_true_formula_everything_target(self):
        g = small_game()
        d = to_dfa(TRUE, g.propositions, alphabet=g.occurring_labels())
        pg = build_product(g, d)
        assert pg.target == frozenset(range(pg.num_states))
        # with every state absorbing-by-acceptance, only the initial survives
        assert pg.num_states == 1

    def test_true_formula_without_absorption_isomorphic(self):
        g = small_game()
        d = to_dfa(TRUE, g.propositions, alphabet=g.occurring_labels())
        pg = build_product(g, d, absorb_targets=False)
        assert pg.num_states == g.num_states
        assert pg.target == frozenset(range(pg.num_states))
        for (s, _q), ctrl in zip(pg.states, pg.control):
            assert g.control[s] is ctrl

    def test_unreachable_proposition_empty_target(self):
        g = small_game()
        d = to_dfa(parse("F nothere"), g.propositions + ("nothere",))
        pg = build_product(g, d)
        assert pg.target == frozenset()

    def test_two_by_two_enumeration(self):
        # game: s0 robot -> s1 (labeled p), s1 human -> s0; DFA of F p
        g0 = make_pg(
            "RH",
            [
                [("go", (1,), (1.0,))],
                [("back", (0,), (1.0,))],
            ],
            target=(),
        )
        from gamesynth.game import StochasticGame

        game = StochasticGame(
            var_names=("s",),
            states=((0,), (1,)),
            initial=0,
            control=(Player.ROBOT, Player.HUMAN),
            choices=g0.choices,
            propositions=("p",),
            labels=(frozenset(), frozenset({"p"})),
        )
        d = to_dfa(parse("F p"), {"p"})
        pg = build_product(game, d)
        assert pg.num_states <= 4
        assert pg.states[0] == (0, d.initial)
        targets = {pg.states[t] for t in pg.target}
        assert all(q in d.accepting for _, q in targets)
        assert len(pg.target) >= 1

    def test_initial_label_consumed(self):
        # initial game state already satisfies the task: product starts accepting
        from gamesynth.game import StochasticGame

        game = StochasticGame(
            var_names=("s",),
            states=((0,),),
            initial=0,
            control=(Player.ROBOT,),
            choices=((),),
            propositions=("p",),
            labels=(frozenset({"p"}),),
        )
        d = to_dfa(parse("F p"), {"p"})
        pg = build_product(game, d)
        assert pg.initial in pg.target
        # absorption injects the self-loop, so no deadlock either
        assert pg.choices[pg.initial][0].succs == (pg.initial,)

    def test_label_outside_alphabet(self):
        g = small_game()
        d = to_dfa(parse("F goal"), {"goal"}, alphabet=[frozenset()])
        with pytest.raises(AlphabetError):
            build_product(g, d)

    def test_size_bound(self):
        g = small_game()
        d = to_dfa(parse("F goal"), g.propositions, alphabet=g.occurring_labels())
        pg = build_product(g, d)
        assert pg.num_states <= g.num_states * d.num_states


def test_absorption_does_not_change_values():
    g = small_game()
    d = to_dfa(parse("F goal"), g.propositions, alphabet=g.occurring_labels())
    absorbed = build_product(g, d, absorb_targets=True)
    raw = build_product(g, d, absorb_targets=False)
    va = value_iteration(absorbed, eps=1e-9)
    vr = value_iteration(raw, eps=1e-9)
    pos_a = {st: va.values[i] for i, st in enumerate(absorbed.states)}
    pos_r = {st: vr.values[i] for i, st in enumerate(raw.states)}
    shared = set(pos_a) & set(pos_r)
    assert shared
    for st in shared:
        assert pos_a[st] == pytest.approx(pos_r[st], abs=1e-6)


def test_projection_soundness_bounded_paths():
    g = small_game()
    d = to_dfa(parse("F goal"), g.propositions, alphabet=g.occurring_labels())
    pg = build_product(g, d, absorb_targets=False)

    def walk(pi, depth, q_expect):
        s, q = pg.states[pi]
        assert q == q_expect
        if depth == 0:
            return
        for pch, gch in zip(pg.choices[pi], g.choices[s]):
            assert pch.action == gch.action
            assert pch.probs == gch.probs
            for succ_pi, succ_s in zip(pch.succs, gch.succs):
                assert pg.states[succ_pi][0] == succ_s
                walk(succ_pi, depth - 1, d.step(q, g.labels[succ_s]))

    walk(pg.initial, 4, d.step(d.initial, g.labels[g.initial]))
