"""Two-player turn-based stochastic games over pick-and-place worlds.

`StochasticGame` is the shared explicit representation (also produced by the
scenario generators and the explicit-format importer): indexed states with an
integer-variable valuation each, a controlling player, per-state action
choices with outcome distributions, and a labeling.

`build_game` lifts a world into a game under one of two turn models: a quota
ratio of robot to human actions enforced with counters, or strict alternation
with a per-human-action probability that the human permanently stops
intervening.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum
from typing import Mapping, Optional

from .domain import (
    Arrangement,
    ELSE,
    HUMAN_GRIPPER,
    ROBOT_GRIPPER,
    WorldSpec,
    apply_delta,
    ground_human_actions,
    ground_robot_actions,
    label_of,
)
from .errors import CapacityError, ScenarioError

HUMAN_DONE = "human_done"
STAY = "stay"


class Player(IntEnum):
    ROBOT = 1
    HUMAN = 2


@dataclass(frozen=True)
class RatioTurns:
    """Quota model: `robot_quota` robot actions per `human_quota` human actions."""

    robot_quota: int
    human_quota: int

    def __post_init__(self):
        if self.robot_quota < 1 or self.human_quota < 1:
            raise ScenarioError("turn quotas must be positive integers")

    def describe(self) -> str:
        return f"ratio:{self.robot_quota}:{self.human_quota}"


@dataclass(frozen=True)
class ProbTermination:
    """Strict alternation; each human action may end intervention forever."""

    p_term: float

    def __post_init__(self):
        if not 0.0 < self.p_term <= 1.0:
            raise ScenarioError("p_term must lie in (0, 1]")

    def describe(self) -> str:
        return f"prob:{self.p_term:g}"


TurnModel = RatioTurns | ProbTermination


def parse_turn_model(data: Mapping) -> TurnModel:
    keys = set(data)
    if keys == {"ratio"}:
        r, h = data["ratio"]
        return RatioTurns(int(r), int(h))
    if keys == {"prob_termination"}:
        return ProbTermination(float(data["prob_termination"]))
    raise ScenarioError(f"turn_model must be {{'ratio': [r, h]}} or "
                        f"{{'prob_termination': p}}, got {sorted(keys)}")


@dataclass(frozen=True)
class GameState:
    """Arrangement plus turn bookkeeping; identity of a game state."""

    arrangement: Arrangement
    control: Player
    counter: int = 0  # actions already taken in the current quota block
    human_active: bool = True


@dataclass(frozen=True)
class Choice:
    """One action with its outcome distribution over state indices."""

    action: str
    succs: tuple
    probs: tuple


@dataclass(frozen=True)
class StochasticGame:
    var_names: tuple  # integer state-variable names
    states: tuple  # per state: tuple of ints, one per variable
    initial: int
    control: tuple  # Player per state
    choices: tuple  # per state: tuple of Choice
    propositions: tuple
    labels: tuple  # Label per state
    meta: Optional[object] = field(default=None, compare=False)

    @property
    def num_states(self) -> int:
        return len(self.states)

    @property
    def num_choices(self) -> int:
        return sum(len(c) for c in self.choices)

    @property
    def num_transitions(self) -> int:
        return sum(len(ch.succs) for row in self.choices for ch in row)

    def occurring_labels(self) -> tuple:
        seen = []
        for label in self.labels:
            if label not in seen:
                seen.append(label)
        return tuple(seen)


@dataclass(frozen=True)
class DomainGameMeta:
    """Extra per-state structure kept for validation and live play."""

    world: WorldSpec
    turn_model: TurnModel
    game_states: tuple  # GameState per index


def _merge_outcomes(pairs) -> tuple:
    """Aggregate (succ, prob) pairs by successor, keeping first-seen order."""
    order = []
    acc: dict = {}
    for succ, prob in pairs:
        if succ not in acc:
            acc[succ] = 0.0
            order.append(succ)
        acc[succ] += prob
    return tuple(order), tuple(acc[s] for s in order)


def _drop_held(world: WorldSpec, arr: Arrangement) -> Arrangement:
    # A human who stops intervening does not keep holding an object; anything
    # in the human gripper is returned to the catch-all region.
    held = arr.objects_at(world, HUMAN_GRIPPER)
    if not held:
        return arr
    return apply_delta(arr, world, (held[0], ELSE))


def build_game(
    world: WorldSpec,
    init: Arrangement,
    turn_model: TurnModel,
    max_states: int = 10**6,
) -> StochasticGame:
    """Breadth-first construction of the turn-based game from `init`.

    The robot moves first. Robot states offer grounded robot actions (a
    turn-consuming `stay` when none apply); human states offer grounded moves
    plus `wait`. Under the termination model every human action's outcome
    mass is split between the active copy and a robot-only inactive copy
    labeled with `human_done`.
    """
    ratio = isinstance(turn_model, RatioTurns)
    initial = GameState(init, Player.ROBOT, 0, True)
    index = {initial: 0}
    order = [initial]
    choice_rows = []

    def intern(gs: GameState) -> int:
        if gs not in index:
            if len(order) >= max_states:
                raise CapacityError("game construction", len(order) + 1, max_states)
            index[gs] = len(order)
            order.append(gs)
        return index[gs]

    def robot_succ(gs: GameState, arr: Arrangement) -> GameState:
        if ratio:
            if gs.counter + 1 < turn_model.robot_quota:
                return GameState(arr, Player.ROBOT, gs.counter + 1, True)
            return GameState(arr, Player.HUMAN, 0, True)
        if gs.human_active:
            return GameState(arr, Player.HUMAN, 0, True)
        return GameState(arr, Player.ROBOT, 0, False)

    def human_succs(gs: GameState, arr: Arrangement, prob: float) -> list:
        if ratio:
            if gs.counter + 1 < turn_model.human_quota:
                return [(GameState(arr, Player.HUMAN, gs.counter + 1, True), prob)]
            return [(GameState(arr, Player.ROBOT, 0, True), prob)]
        p = turn_model.p_term
        stopped = GameState(_drop_held(world, arr), Player.ROBOT, 0, False)
        out = []
        if p < 1.0:
            out.append((GameState(arr, Player.ROBOT, 0, True), prob * (1.0 - p)))
        out.append((stopped, prob * p))
        return out

    pos = 0
    while pos < len(order):
        gs = order[pos]
        pos += 1
        row = []
        if gs.control is Player.ROBOT:
            actions = ground_robot_actions(world, gs.arrangement)
            if actions:
                for act in actions:
                    pairs = []
                    for delta, prob in act.outcomes:
                        arr = apply_delta(gs.arrangement, world, delta)
                        pairs.append((intern(robot_succ(gs, arr)), prob))
                    succs, probs = _merge_outcomes(pairs)
                    row.append(Choice(act.name, succs, probs))
            else:
                succ = intern(robot_succ(gs, gs.arrangement))
                row.append(Choice(STAY, (succ,), (1.0,)))
        else:
            for act in ground_human_actions(world, gs.arrangement):
                pairs = []
                for delta, prob in act.outcomes:
                    arr = apply_delta(gs.arrangement, world, delta)
                    for succ_gs, succ_prob in human_succs(gs, arr, prob):
                        pairs.append((intern(succ_gs), succ_prob))
                succs, probs = _merge_outcomes(pairs)
                row.append(Choice(act.name, succs, probs))
        choice_rows.append(tuple(row))
        # states appended during iteration get their rows in later passes

    props = tuple(pd.name for pd in world.propositions)
    if not ratio:
        props = props + (HUMAN_DONE,)

    labels = []
    for gs in order:
        label = label_of(world, gs.arrangement)
        if not ratio and not gs.human_active:
            label = label | {HUMAN_DONE}
        labels.append(label)

    loc_index = {loc: i for i, loc in enumerate(world.locations)}
    var_names = tuple(f"loc_{obj}" for obj in world.objects) + ("control",)
    var_names += ("counter",) if ratio else ("human_active",)

    def encode(gs: GameState) -> tuple:
        values = tuple(loc_index[loc] for loc in gs.arrangement.placement)
        values += (int(gs.control),)
        values += (gs.counter,) if ratio else (int(gs.human_active),)
        return values

    return StochasticGame(
        var_names=var_names,
        states=tuple(encode(gs) for gs in order),
        initial=0,
        control=tuple(gs.control for gs in order),
        choices=tuple(choice_rows),
        propositions=props,
        labels=tuple(labels),
        meta=DomainGameMeta(world=world, turn_model=turn_model, game_states=tuple(order)),
    )


# ---------------------------------------------------------------------------
# Validation


ROBOT_ACTION_PREFIXES = ("grasp(", "place(")
HUMAN_ACTION_PREFIXES = ("move(",)


@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, message: str) -> None:
        self.violations.append(message)


def validate_game(g: StochasticGame) -> ValidationReport:
    """Check structural invariants; returns a report, never raises."""
    report = ValidationReport()
    n = g.num_states
    if not 0 <= g.initial < n:
        report.add(f"initial state {g.initial} out of range")
    if not (len(g.states) == len(g.control) == len(g.choices) == len(g.labels)):
        report.add("per-state tables have inconsistent lengths")
        return report
    prop_set = set(g.propositions)
    for s in range(n):
        if len(g.states[s]) != len(g.var_names):
            report.add(f"state {s}: valuation arity mismatch")
        if not g.choices[s]:
            report.add(f"state {s}: deadlock (no choices)")
        for ci, ch in enumerate(g.choices[s]):
            total = sum(ch.probs)
            if abs(total - 1.0) > 1e-9:
                report.add(f"state {s} choice {ci}: probabilities sum to {total!r}")
            if len(ch.succs) != len(set(ch.succs)):
                report.add(f"state {s} choice {ci}: duplicate successors")
            for succ, prob in zip(ch.succs, ch.probs):
                if not 0 <= succ < n:
                    report.add(f"state {s} choice {ci}: successor {succ} out of range")
                if prob <= 0.0:
                    report.add(f"state {s} choice {ci}: non-positive probability")
        if not g.labels[s] <= prop_set:
            report.add(f"state {s}: label uses undeclared propositions")

    if isinstance(g.meta, DomainGameMeta):
        _validate_domain_game(g, report)
    return report


def _validate_domain_game(g: StochasticGame, report: ValidationReport) -> None:
    meta: DomainGameMeta = g.meta
    world = meta.world
    ratio = isinstance(meta.turn_model, RatioTurns)
    for s, gs in enumerate(meta.game_states):
        if gs.control is not g.control[s]:
            report.add(f"state {s}: control table disagrees with state structure")
        for ci, ch in enumerate(g.choices[s]):
            is_robot_name = ch.action.startswith(ROBOT_ACTION_PREFIXES) or ch.action == STAY
            is_human_name = ch.action.startswith(HUMAN_ACTION_PREFIXES) or ch.action == "wait"
            if g.control[s] is Player.ROBOT and not is_robot_name:
                report.add(f"state {s} choice {ci}: human action {ch.action!r} in robot state")
            if g.control[s] is Player.HUMAN and not is_human_name:
                report.add(f"state {s} choice {ci}: robot action {ch.action!r} in human state")
            if g.control[s] is Player.HUMAN:
                held = gs.arrangement.objects_at(world, ROBOT_GRIPPER)
                for succ in ch.succs:
                    succ_held = meta.game_states[succ].arrangement.objects_at(
                        world, ROBOT_GRIPPER
                    )
                    if succ_held != held:
                        report.add(
                            f"state {s} choice {ci}: human action alters robot gripper"
                        )
        expected = label_of(world, gs.arrangement)
        if not ratio and not gs.human_active:
            expected = expected | {HUMAN_DONE}
        if g.labels[s] != expected:
            report.add(f"state {s}: labeling inconsistent with arrangement")
        if ratio:
            quota = (
                meta.turn_model.robot_quota
                if gs.control is Player.ROBOT
                else meta.turn_model.human_quota
            )
            if not 0 <= gs.counter < quota:
                report.add(f"state {s}: counter {gs.counter} outside quota {quota}")
        elif not gs.human_active and gs.control is not Player.ROBOT:
            report.add(f"state {s}: human control after termination")
