import json
import math
import os
from functools import lru_cache

import numpy as np
import pytest

from gamesynth.errors import ParamError, ScenarioError
from gamesynth.game import Player, ProbTermination, RatioTurns, build_game, validate_game
from gamesynth.reporting import render_bench_figures
from gamesynth.scenarios import (
    CSV_HEADER,
    DRAW,
    HUMAN_WIN,
    ROBOT_WIN,
    TttState,
    bench_csv,
    gen_pickplace,
    gen_tictactoe,
    load_scenario_file,
    parse_scenario,
    run_bench,
    tremble_distribution,
    ttt_winner,
)
from gamesynth.synthesis import synthesize_for

from oracles import brute_force_values


EMPTY = (0,) * 9


@lru_cache(maxsize=None)
def ttt_minimax(board, turn, win_for):
    """1 if the `win_for` player can force a win from here, else 0; the
    winner's side maximizes, the other minimizes. Deterministic placements."""
    w = ttt_winner(board)
    if w is not None:
        return 1 if w == win_for else 0
    if all(board):
        return 0
    vals = []
    for c in range(9):
        if not board[c]:
            nb = list(board)
            nb[c] = turn
            vals.append(ttt_minimax(tuple(nb), 3 - turn, win_for))
    return max(vals) if turn == win_for else min(vals)


class TestTremble:
    def test_sigma_zero_point_mass(self):
        assert tremble_distribution(EMPTY, 4, 0.0) == [(4, 1.0)]

    def test_sigma_tiny_point_mass(self):
        dist = dict(tremble_distribution(EMPTY, 4, 1e-9))
        assert dist[4] == pytest.approx(1.0)

    def test_center_mass_empty_board(self):
        # direct evaluation of the weight formula: 1 / (1 + 4e^-1/2 + 4e^-1)
        expected = 1.0 / (1.0 + 4.0 * math.exp(-0.5) + 4.0 * math.exp(-1.0))
        dist = dict(tremble_distribution(EMPTY, 4, 1.0))
        assert dist[4] == pytest.approx(expected, abs=1e-12)
        assert expected == pytest.approx(0.2042, abs=5e-5)

    def test_sums_to_one_and_open_support(self):
        board = (1, 0, 2, 0, 0, 1, 0, 2, 0)
        for intended in (1, 3, 4, 6, 8):
            dist = tremble_distribution(board, intended, 1.0)
            assert sum(p for _, p in dist) == pytest.approx(1.0, abs=1e-12)
            assert all(board[c] == 0 for c, _ in dist)

    def test_occupied_neighbors_remap(self):
        # everything around the center is taken: mass collapses onto the
        # two remaining cells but still sums to one
        board = (1, 2, 1, 2, 0, 1, 2, 1, 0)
        dist = tremble_distribution(board, 4, 1.0)
        assert {c for c, _ in dist} == {4, 8}
        assert sum(p for _, p in dist) == pytest.approx(1.0, abs=1e-12)

    def test_remap_tie_breaks_to_lowest_index(self):
        # landing on occupied cell 1 with 0 and 2 free and equidistant
        board = (0, 1, 0, 2, 2, 2, 1, 1, 0)
        dist = dict(tremble_distribution(board, 0, 1.0))
        heavy_to_0 = dist[0]
        dist2 = dict(tremble_distribution(board, 2, 1.0))
        assert heavy_to_0 > dist2[0]  # cell 1's mass went to index 0, not 2

    def test_intended_occupied_rejected(self):
        with pytest.raises(ParamError):
            tremble_distribution((1,) + (0,) * 8, 0, 1.0)


class TestTicTacToe:
    def test_sigma_zero_matches_minimax(self):
        scn = gen_tictactoe(0.0)
        assert validate_game(scn.game).ok
        robot = synthesize_for(scn.game, scn.robot_win_formula, eps=1e-9)
        assert robot.value_at_initial == pytest.approx(
            ttt_minimax(EMPTY, 1, 1), abs=1e-9
        )
        human = synthesize_for(
            scn.game, scn.human_win_formula, eps=1e-9, maximizer=Player.HUMAN
        )
        assert human.value_at_initial == pytest.approx(
            ttt_minimax(EMPTY, 1, 2), abs=1e-9
        )

    def test_no_double_win_states(self):
        scn = gen_tictactoe(1.0)
        for label in scn.game.labels:
            assert not ({ROBOT_WIN, HUMAN_WIN} <= label)

    def test_terminal_absorbing(self):
        scn = gen_tictactoe(0.0)
        for s, label in enumerate(scn.game.labels):
            if label & {ROBOT_WIN, HUMAN_WIN, DRAW}:
                (choice,) = scn.game.choices[s]
                assert choice.succs == (s,)

    def test_robot_moves_first(self):
        scn = gen_tictactoe(0.5)
        assert scn.game.control[scn.game.initial] is Player.ROBOT

    def test_sigma_one_robot_win_positive(self):
        scn = gen_tictactoe(1.0)
        syn = synthesize_for(scn.game, scn.robot_win_formula, eps=1e-8)
        assert syn.value_at_initial > 0.05

    def test_turn_parity_invariant(self):
        scn = gen_tictactoe(1.0)
        meta = scn.game.meta
        for st in meta.game_states:
            robots = sum(1 for c in st.board if c == 1)
            humans = sum(1 for c in st.board if c == 2)
            assert robots - humans in (0, 1)


class TestGenPickPlace:
    def test_param_errors(self):
        with pytest.raises(ParamError):
            gen_pickplace(0, 5, RatioTurns(1, 1))
        with pytest.raises(ParamError):
            gen_pickplace(2, 4, RatioTurns(1, 1))

    def test_ratio_value_below_one(self):
        scn = gen_pickplace(1, 4, RatioTurns(1, 1))
        game = build_game(scn.world, scn.init, scn.turn_model)
        syn = synthesize_for(game, scn.formula, eps=1e-9)
        assert syn.value_at_initial < 1.0
        expect = brute_force_values(syn.product)
        assert np.max(np.abs(syn.result.values.values - expect)) <= 1e-6

    def test_prob_termination_value_one(self):
        scn = gen_pickplace(1, 4, ProbTermination(0.05))
        game = build_game(scn.world, scn.init, scn.turn_model)
        syn = synthesize_for(game, scn.formula, eps=1e-6)
        assert syn.value_at_initial == pytest.approx(1.0, abs=1e-4)

    def test_formula_shape(self):
        scn = gen_pickplace(3, 7, RatioTurns(1, 1))
        assert scn.formula == "F p_O0_L1 & F p_O1_L2 & F p_O2_L3"
        assert len(scn.world.objects) == 3
        assert len(scn.world.locations) == 7

    def test_generation_deterministic(self):
        a = gen_pickplace(2, 5, RatioTurns(2, 1))
        b = gen_pickplace(2, 5, RatioTurns(2, 1))
        assert a == b


class TestBench:
    def matrix(self):
        return [
            (1, 4, RatioTurns(1, 1)),
            (1, 4, ProbTermination(0.05)),
            (1, 5, RatioTurns(1, 1)),
        ]

    def test_csv_shape_and_determinism(self):
        results = run_bench(self.matrix(), eps=1e-6)
        text = bench_csv(results)
        lines = text.strip().split("\n")
        assert lines[0] == CSV_HEADER
        assert len(lines) == 4
        # deterministic apart from the timing columns
        again = bench_csv(run_bench(self.matrix(), eps=1e-6))

        def strip_times(csv_text):
            out = []
            for line in csv_text.strip().split("\n")[1:]:
                cols = line.split(",")
                out.append(cols[:6] + cols[8:])
            return out

        assert strip_times(text) == strip_times(again)

    def test_capacity_becomes_status_row(self):
        results = run_bench([(2, 6, RatioTurns(1, 1))], max_states=10)
        assert results[0].status == "capacity_error"
        line = bench_csv(results).strip().split("\n")[1]
        assert line.endswith(",,,,,capacity_error")

    def test_empty_matrix_rejected(self):
        with pytest.raises(ParamError):
            run_bench([])

    def test_figures_rendered(self, tmp_path):
        results = run_bench(self.matrix(), eps=1e-6)
        paths = render_bench_figures(results, str(tmp_path))
        assert len(paths) == 4
        for p in paths:
            assert os.path.getsize(p) > 0

    def test_transitions_direction_prob_vs_ratio(self):
        results = run_bench(
            [(1, 5, RatioTurns(1, 1)), (1, 5, ProbTermination(0.05))]
        )
        ratio, prob = results
        assert prob.transitions >= ratio.transitions


class TestScenarioFiles:
    def test_tictactoe_scenario(self, tmp_path):
        path = tmp_path / "ttt.json"
        path.write_text(json.dumps({"kind": "tictactoe", "sigma": 0.0}))
        scn = load_scenario_file(str(path))
        assert scn.kind == "tictactoe"
        game = scn.build()
        assert ROBOT_WIN in game.propositions

    def test_pickplace_scenario(self, tmp_path):
        data = {
            "objects": ["O0"],
            "locations": ["else", "robot_gripper", "human_gripper", "L1"],
            "init": {"O0": "else"},
            "robot_success": {"O0": {"grasp": 0.9, "place": 0.9}},
            "turn_model": {"ratio": [1, 1]},
            "formula": "F p_O0_L1",
            "propositions": [{"name": "p_O0_L1", "object": "O0", "location": "L1"}],
        }
        path = tmp_path / "w.json"
        path.write_text(json.dumps(data))
        scn = load_scenario_file(str(path))
        game = scn.build()
        assert validate_game(game).ok
        syn = synthesize_for(game, scn.default_formula)
        assert 0.0 <= syn.value_at_initial <= 1.0

    def test_unknown_keys_rejected(self):
        with pytest.raises(ScenarioError):
            parse_scenario("x", {"kind": "tictactoe", "sgima": 1.0})
        with pytest.raises(ScenarioError):
            parse_scenario(
                "y",
                {
                    "objects": ["O0"],
                    "locations": ["else", "robot_gripper", "human_gripper"],
                    "init": {"O0": "else"},
                    "turn_model": {"ratio": [1, 1]},
                    "formula": "true",
                    "wat": 1,
                },
            )

    def test_missing_formula_rejected(self):
        with pytest.raises(ScenarioError):
            parse_scenario(
                "z",
                {
                    "objects": ["O0"],
                    "locations": ["else", "robot_gripper", "human_gripper"],
                    "init": {"O0": "else"},
                    "turn_model": {"ratio": [1, 1]},
                },
            )
