"""Case-study generators and the benchmark harness.

Two families: parameterized pick-and-place worlds (objects start in the
catch-all region; the task is to deliver object i to location i), and
tic-tac-toe against a human where both players suffer a trembling hand: an
intended placement lands per a discretized Gaussian and is remapped to the
nearest unoccupied cell.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional

from .domain import (
    Arrangement,
    ELSE,
    HUMAN_GRIPPER,
    PropositionDef,
    ROBOT_GRIPPER,
    WORLD_KEYS,
    WorldSpec,
    parse_world,
)
from .errors import CapacityError, ParamError, ScenarioError
from .game import (
    Choice,
    Player,
    STAY,
    StochasticGame,
    TurnModel,
    build_game,
    parse_turn_model,
)
from .synthesis import synthesize_for

ROBOT_WIN = "RobotWin"
HUMAN_WIN = "HumanWin"
DRAW = "Draw"

DEFAULT_ROBOT_SUCCESS = 0.9


# ---------------------------------------------------------------------------
# Pick-and-place benchmarks


@dataclass(frozen=True)
class PickPlaceScenario:
    world: WorldSpec
    init: Arrangement
    formula: str
    turn_model: TurnModel


def gen_pickplace(
    num_objects: int,
    num_locations: int,
    turn_model: TurnModel,
    robot_success: float = DEFAULT_ROBOT_SUCCESS,
) -> PickPlaceScenario:
    """Deterministic benchmark world: `num_locations` regions counting the
    two grippers and the catch-all, objects starting in the catch-all, and a
    conjunction of eventualities placing object i at location Li+1."""
    if num_objects < 1:
        raise ParamError("need at least one object")
    if num_locations < num_objects + 3:
        raise ParamError(
            f"need at least {num_objects + 3} locations for {num_objects} objects"
        )
    objects = tuple(f"O{i}" for i in range(num_objects))
    free = tuple(f"L{i + 1}" for i in range(num_locations - 3))
    locations = (ELSE, ROBOT_GRIPPER, HUMAN_GRIPPER) + free
    props = tuple(
        PropositionDef(f"p_O{i}_L{i + 1}", f"O{i}", f"L{i + 1}")
        for i in range(num_objects)
    )
    success = {}
    for obj in objects:
        success[(obj, "grasp")] = robot_success
        success[(obj, "place")] = robot_success
    world = WorldSpec(
        objects=objects,
        locations=locations,
        robot_success=success,
        propositions=props,
    )
    init = Arrangement((ELSE,) * num_objects)
    formula = " & ".join(f"F {pd.name}" for pd in props)
    return PickPlaceScenario(world=world, init=init, formula=formula, turn_model=turn_model)


# ---------------------------------------------------------------------------
# Trembling-hand tic-tac-toe

# cell i sits at (column, row) = (i % 3, i // 3) on a unit grid
_COORDS = tuple((i % 3, i // 3) for i in range(9))
_WIN_LINES = (
    (0, 1, 2), (3, 4, 5), (6, 7, 8),
    (0, 3, 6), (1, 4, 7), (2, 5, 8),
    (0, 4, 8), (2, 4, 6),
)


def _dist2(a: int, b: int) -> float:
    (ax, ay), (bx, by) = _COORDS[a], _COORDS[b]
    return float((ax - bx) ** 2 + (ay - by) ** 2)


def ttt_winner(board) -> Optional[int]:
    for line in _WIN_LINES:
        v = board[line[0]]
        if v and all(board[c] == v for c in line):
            return v
    return None


def ttt_terminal(board) -> bool:
    return ttt_winner(board) is not None or all(board)


def tremble_distribution(board, intended: int, sigma: float) -> list:
    """Distribution over landing cells for a marker aimed at `intended`.

    Gaussian weights exp(-d^2 / (2 sigma^2)) over all nine cell centers,
    each landing remapped to its nearest unoccupied cell (ties to the lowest
    index), masses summed. Returns (cell, probability) pairs sorted by cell.
    """
    if board[intended]:
        raise ParamError(f"intended cell {intended} is occupied")
    open_cells = [c for c in range(9) if not board[c]]
    if sigma <= 0.0:
        return [(intended, 1.0)]
    weights = [math.exp(-_dist2(intended, c) / (2.0 * sigma * sigma)) for c in range(9)]
    total = sum(weights)
    if total <= 0.0:  # exp underflow far from intended: degenerate case
        return [(intended, 1.0)]
    mass = {c: 0.0 for c in open_cells}
    for c in range(9):
        landing = min(open_cells, key=lambda o: (_dist2(c, o), o))
        mass[landing] += weights[c] / total
    out = [(c, mass[c]) for c in open_cells if mass[c] > 0.0]
    norm = sum(p for _, p in out)
    return [(c, p / norm) for c, p in out]


@dataclass(frozen=True)
class TttState:
    board: tuple  # 9 cells: 0 empty, 1 robot marker, 2 human marker
    turn: Player


@dataclass(frozen=True)
class TttMeta:
    sigma: float
    game_states: tuple  # TttState per index


@dataclass(frozen=True)
class TttScenario:
    game: StochasticGame
    sigma: float
    robot_win_formula: str = f"F {ROBOT_WIN}"
    human_win_formula: str = f"F {HUMAN_WIN}"


def _ttt_label(board):
    w = ttt_winner(board)
    if w == 1:
        return frozenset({ROBOT_WIN})
    if w == 2:
        return frozenset({HUMAN_WIN})
    if all(board):
        return frozenset({DRAW})
    return frozenset()


def gen_tictactoe(sigma: float) -> TttScenario:
    """Turn-based tic-tac-toe game; the robot moves first, the marks of both
    players tremble with the same `sigma`, terminal boards are absorbing."""
    if sigma < 0.0:
        raise ParamError("sigma must be non-negative")
    initial = TttState((0,) * 9, Player.ROBOT)
    index = {initial: 0}
    order = [initial]
    rows = []
    pos = 0
    while pos < len(order):
        st = order[pos]
        pos += 1
        if ttt_terminal(st.board):
            rows.append((Choice(STAY, (pos - 1,), (1.0,)),))
            continue
        marker = 1 if st.turn is Player.ROBOT else 2
        nxt = Player.HUMAN if st.turn is Player.ROBOT else Player.ROBOT
        row = []
        for cell in range(9):
            if st.board[cell]:
                continue
            succs = []
            probs = []
            for landing, prob in tremble_distribution(st.board, cell, sigma):
                board = list(st.board)
                board[landing] = marker
                succ = TttState(tuple(board), nxt)
                if succ not in index:
                    index[succ] = len(order)
                    order.append(succ)
                succs.append(index[succ])
                probs.append(prob)
            row.append(Choice(f"place({cell})", tuple(succs), tuple(probs)))
        rows.append(tuple(row))

    return TttScenario(
        game=StochasticGame(
            var_names=tuple(f"cell{i}" for i in range(9)) + ("turn",),
            states=tuple(st.board + (int(st.turn),) for st in order),
            initial=0,
            control=tuple(st.turn for st in order),
            choices=tuple(rows),
            propositions=(ROBOT_WIN, HUMAN_WIN, DRAW),
            labels=tuple(_ttt_label(st.board) for st in order),
            meta=TttMeta(sigma=sigma, game_states=tuple(order)),
        ),
        sigma=sigma,
    )


# ---------------------------------------------------------------------------
# Scenario files


SCENARIO_EXTRA_KEYS = {"kind", "name", "description", "turn_model", "formula"}


@dataclass(frozen=True)
class Scenario:
    """A registered, playable scenario: a game plus a default objective."""

    scenario_id: str
    kind: str  # "pickplace" | "tictactoe"
    description: str
    default_formula: str
    build: Callable[[], StochasticGame] = field(compare=False)
    maximizer: Player = Player.ROBOT


def parse_scenario(scenario_id: str, data: Mapping) -> Scenario:
    """Parse a scenario JSON document (see README for the schema)."""
    kind = data.get("kind", "pickplace")
    if kind == "tictactoe":
        extra = set(data) - {"kind", "name", "description", "sigma", "formula", "objective"}
        if extra:
            raise ScenarioError(f"unknown scenario keys {sorted(extra)}")
        sigma = float(data.get("sigma", 1.0))
        objective = data.get("objective", "robot_win")
        if objective not in ("robot_win", "human_win"):
            raise ScenarioError("objective must be robot_win or human_win")
        formula = data.get(
            "formula", f"F {ROBOT_WIN}" if objective == "robot_win" else f"F {HUMAN_WIN}"
        )
        return Scenario(
            scenario_id=scenario_id,
            kind="tictactoe",
            description=data.get("description", f"tic-tac-toe, sigma={sigma:g}"),
            default_formula=formula,
            build=lambda: gen_tictactoe(sigma).game,
            maximizer=Player.ROBOT if objective == "robot_win" else Player.HUMAN,
        )
    if kind != "pickplace":
        raise ScenarioError(f"unknown scenario kind {kind!r}")
    extra = set(data) - WORLD_KEYS - SCENARIO_EXTRA_KEYS
    if extra:
        raise ScenarioError(f"unknown scenario keys {sorted(extra)}")
    if "turn_model" not in data or "formula" not in data:
        raise ScenarioError("pickplace scenarios need `turn_model` and `formula`")
    world, init = parse_world({k: v for k, v in data.items() if k in WORLD_KEYS})
    turn_model = parse_turn_model(data["turn_model"])
    formula = str(data["formula"])
    return Scenario(
        scenario_id=scenario_id,
        kind="pickplace",
        description=data.get("description", f"pick-and-place, {turn_model.describe()}"),
        default_formula=formula,
        build=lambda: build_game(world, init, turn_model),
    )


def load_scenario_file(path: str) -> Scenario:
    with open(path, "r") as fh:
        data = json.load(fh)
    scenario_id = data.get("name") or path.rsplit("/", 1)[-1].removesuffix(".json")
    return parse_scenario(scenario_id, data)


def builtin_registry() -> dict:
    """Always-available scenarios (files can shadow these by id)."""
    out = {}
    for scenario in (
        parse_scenario(
            "tictactoe",
            {"kind": "tictactoe", "sigma": 1.0,
             "description": "trembling-hand tic-tac-toe, sigma = 1 cell"},
        ),
        parse_scenario(
            "tictactoe_precise",
            {"kind": "tictactoe", "sigma": 0.0,
             "description": "deterministic tic-tac-toe"},
        ),
    ):
        out[scenario.scenario_id] = scenario
    return out


# ---------------------------------------------------------------------------
# Benchmark harness


@dataclass(frozen=True)
class BenchResult:
    scenario: str
    objects: int
    locations: int
    turn_model: str
    states: Optional[int]
    transitions: Optional[int]
    build_s: Optional[float]
    solve_s: Optional[float]
    value: Optional[float]
    status: str = "ok"


CSV_HEADER = "scenario,objects,locations,turn_model,states,transitions,build_s,solve_s,value"


def run_bench(
    matrix,
    eps: float = 1e-6,
    max_states: int = 10**6,
    on_result: Optional[Callable[[BenchResult], None]] = None,
) -> list:
    """Build, compose, and solve one scenario per (objects, locations,
    turn model) cell; capacity blowups become status rows, not crashes.

    Reported state/transition counts are those of the solved product."""
    if not matrix:
        raise ParamError("benchmark matrix is empty")
    results = []
    for num_objects, num_locations, turn_model in matrix:
        name = f"pickplace_{num_objects}x{num_locations}_{turn_model.describe()}"
        try:
            t0 = time.perf_counter()
            scn = gen_pickplace(num_objects, num_locations, turn_model)
            game = build_game(scn.world, scn.init, scn.turn_model, max_states=max_states)
            t1 = time.perf_counter()
            syn = synthesize_for(game, scn.formula, eps=eps)
            t2 = time.perf_counter()
            res = BenchResult(
                scenario=name,
                objects=num_objects,
                locations=num_locations,
                turn_model=turn_model.describe(),
                states=syn.product.num_states,
                transitions=syn.product.num_transitions,
                build_s=t1 - t0,
                solve_s=t2 - t1,
                value=syn.value_at_initial,
            )
        except (CapacityError, ParamError) as exc:
            status = "capacity_error" if isinstance(exc, CapacityError) else "param_error"
            res = BenchResult(
                scenario=name,
                objects=num_objects,
                locations=num_locations,
                turn_model=turn_model.describe(),
                states=None,
                transitions=None,
                build_s=None,
                solve_s=None,
                value=None,
                status=status,
            )
        results.append(res)
        if on_result is not None:
            on_result(res)
    return results


def bench_csv(results) -> str:
    lines = [CSV_HEADER]
    for r in results:
        if r.status == "ok":
            lines.append(
                f"{r.scenario},{r.objects},{r.locations},{r.turn_model},"
                f"{r.states},{r.transitions},{r.build_s:.6f},{r.solve_s:.6f},"
                f"{r.value:.10f}"
            )
        else:
            lines.append(
                f"{r.scenario},{r.objects},{r.locations},{r.turn_model},,,,,{r.status}"
            )
    return "\n".join(lines) + "\n"
