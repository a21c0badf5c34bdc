"""Pick-and-place worlds and their grounding into a robot-only MDP.

A world is a set of objects, a set of regions (always including `else` and
the two gripper regions), per-action robot success probabilities, and
placement propositions. Grounding enumerates grasp/place actions with their
stochastic outcomes; `build_mdp` closes the reachable state space under robot
actions and attaches the labeling.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional

from .errors import CapacityError, ScenarioError
from .ltlf import IDENT_RE, Label

ELSE = "else"
ROBOT_GRIPPER = "robot_gripper"
HUMAN_GRIPPER = "human_gripper"
GRIPPERS = (ROBOT_GRIPPER, HUMAN_GRIPPER)

Delta = Optional[tuple]  # (object, destination) or None for a no-op


@dataclass(frozen=True)
class PropositionDef:
    """Placement predicate: true when `obj` sits at `location`."""

    name: str
    obj: str
    location: str


@dataclass(frozen=True)
class WorldSpec:
    objects: tuple
    locations: tuple
    robot_success: Mapping = field(default_factory=dict)  # (obj, kind) -> prob
    human_likelihood: Mapping = field(default_factory=dict)  # (obj, src, dst) -> weight
    capacities: Mapping = field(default_factory=dict)  # location -> max objects
    stacking: tuple = ()  # (lower location, upper location) pairs
    propositions: tuple = ()  # PropositionDef
    robot_place_to_else: bool = True
    human_move_success: Mapping = field(default_factory=dict)  # (obj, src, dst) -> prob

    def __post_init__(self):
        for special in (ELSE, ROBOT_GRIPPER, HUMAN_GRIPPER):
            if special not in self.locations:
                raise ScenarioError(f"locations must include {special!r}")
        if len(set(self.objects)) != len(self.objects):
            raise ScenarioError("duplicate object ids")
        if len(set(self.locations)) != len(self.locations):
            raise ScenarioError("duplicate location ids")
        for key, prob in self.robot_success.items():
            if not 0.0 <= prob <= 1.0:
                raise ScenarioError(f"robot_success{key} = {prob} outside [0, 1]")
        for key, weight in self.human_likelihood.items():
            if weight < 0.0:
                raise ScenarioError(f"human_likelihood{key} = {weight} negative")
        names = [pd.name for pd in self.propositions]
        if len(set(names)) != len(names):
            raise ScenarioError("duplicate proposition names")

    def object_index(self, obj: str) -> int:
        return self.objects.index(obj)

    def capacity(self, location: str) -> Optional[int]:
        """Max objects at `location`; None means unbounded."""
        if location in GRIPPERS:
            return 1
        if location == ELSE:
            return None
        return self.capacities.get(location)

    def success(self, obj: str, kind: str) -> float:
        return self.robot_success.get((obj, kind), 1.0)


@dataclass(frozen=True)
class Arrangement:
    """Total placement of objects, aligned with WorldSpec.objects order."""

    placement: tuple  # location id per object index

    def location_of(self, world: WorldSpec, obj: str) -> str:
        return self.placement[world.object_index(obj)]

    def count_at(self, location: str) -> int:
        return sum(1 for loc in self.placement if loc == location)

    def objects_at(self, world: WorldSpec, location: str) -> tuple:
        return tuple(
            obj for obj, loc in zip(world.objects, self.placement) if loc == location
        )


def validate_arrangement(world: WorldSpec, arr: Arrangement) -> None:
    if len(arr.placement) != len(world.objects):
        raise ScenarioError("arrangement does not cover all objects")
    for loc in arr.placement:
        if loc not in world.locations:
            raise ScenarioError(f"unknown location {loc!r} in arrangement")
    for loc in set(arr.placement):
        cap = world.capacity(loc)
        if cap is not None and arr.count_at(loc) > cap:
            raise ScenarioError(f"capacity of {loc!r} exceeded")


def apply_delta(arr: Arrangement, world: WorldSpec, delta: Delta) -> Arrangement:
    if delta is None:
        return arr
    obj, dst = delta
    idx = world.object_index(obj)
    placement = list(arr.placement)
    placement[idx] = dst
    return Arrangement(tuple(placement))


@dataclass(frozen=True)
class GroundedAction:
    """One atomic action with its distribution over arrangement deltas."""

    actor: str  # "robot" | "human"
    kind: str  # "grasp" | "place" | "move" | "wait"
    obj: Optional[str]
    src: Optional[str]
    dst: Optional[str]
    outcomes: tuple  # ((delta, probability), ...)

    @property
    def name(self) -> str:
        if self.kind == "grasp":
            return f"grasp({self.obj},{self.src})"
        if self.kind == "place":
            return f"place({self.obj},{self.dst})"
        if self.kind == "move":
            return f"move({self.obj},{self.src},{self.dst})"
        return self.kind

    def __post_init__(self):
        total = sum(prob for _, prob in self.outcomes)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"outcome probabilities sum to {total}, not 1")


def _stochastic(delta: Delta, success: float) -> tuple:
    if success >= 1.0:
        return ((delta, 1.0),)
    fail = 1.0 - success
    # favor the short decimal complement (0.9 -> 0.1) when the sum stays exact
    nice = round(fail, 10)
    if nice > 0.0 and nice + success == 1.0:
        fail = nice
    return ((delta, success), (None, fail))


def _is_supporting(world: WorldSpec, arr: Arrangement, obj: str) -> bool:
    # Grasp is blocked while some object rests on a region stacked above ours.
    loc = arr.location_of(world, obj)
    for lower, upper in world.stacking:
        if lower == loc and arr.count_at(upper) > 0:
            return True
    return False


def _has_room(world: WorldSpec, arr: Arrangement, location: str) -> bool:
    cap = world.capacity(location)
    return cap is None or arr.count_at(location) < cap


def ground_robot_actions(world: WorldSpec, arr: Arrangement) -> list:
    """Robot grasp/place actions applicable in `arr`, in canonical order.

    Grasps are offered object-by-object while the gripper is free; with an
    object held, only places are offered. Failure leaves the arrangement
    unchanged.
    """
    actions = []
    held = arr.objects_at(world, ROBOT_GRIPPER)
    if held:
        obj = held[0]
        for dst in world.locations:
            if dst in GRIPPERS:
                continue
            if dst == ELSE and not world.robot_place_to_else:
                continue
            if not _has_room(world, arr, dst):
                continue
            actions.append(
                GroundedAction(
                    actor="robot",
                    kind="place",
                    obj=obj,
                    src=ROBOT_GRIPPER,
                    dst=dst,
                    outcomes=_stochastic((obj, dst), world.success(obj, "place")),
                )
            )
    else:
        for obj in world.objects:
            src = arr.location_of(world, obj)
            if src in GRIPPERS:
                continue
            if _is_supporting(world, arr, obj):
                continue
            actions.append(
                GroundedAction(
                    actor="robot",
                    kind="grasp",
                    obj=obj,
                    src=src,
                    dst=ROBOT_GRIPPER,
                    outcomes=_stochastic(
                        (obj, ROBOT_GRIPPER), world.success(obj, "grasp")
                    ),
                )
            )
    return actions


def ground_human_actions(world: WorldSpec, arr: Arrangement) -> list:
    """Human relocation actions plus `wait`.

    The human may move any object not in the robot's gripper to any other
    region (including its own gripper) with room, and never touches the
    robot's end-effector. Moves are deterministic unless a per-move success
    hook is configured.
    """
    actions = []
    for obj in world.objects:
        src = arr.location_of(world, obj)
        if src == ROBOT_GRIPPER:
            continue
        for dst in world.locations:
            if dst == src or dst == ROBOT_GRIPPER:
                continue
            if not _has_room(world, arr, dst):
                continue
            success = world.human_move_success.get((obj, src, dst), 1.0)
            actions.append(
                GroundedAction(
                    actor="human",
                    kind="move",
                    obj=obj,
                    src=src,
                    dst=dst,
                    outcomes=_stochastic((obj, dst), success),
                )
            )
    actions.append(
        GroundedAction(
            actor="human", kind="wait", obj=None, src=None, dst=None,
            outcomes=((None, 1.0),),
        )
    )
    return actions


def label_of(world: WorldSpec, arr: Arrangement) -> Label:
    return frozenset(
        pd.name
        for pd in world.propositions
        if arr.placement[world.object_index(pd.obj)] == pd.location
    )


@dataclass(frozen=True)
class Mdp:
    """Robot-only probabilistic abstraction of a world."""

    world: WorldSpec
    states: tuple  # Arrangement per index, discovery order
    initial: int
    actions: tuple  # per state: tuple of GroundedAction
    trans: tuple  # per state: tuple of ((successor, prob), ...) per action
    propositions: tuple
    labels: tuple  # Label per state


def build_mdp(world: WorldSpec, init: Arrangement, max_states: int = 10**6) -> Mdp:
    """Breadth-first closure of `init` under robot actions."""
    validate_arrangement(world, init)
    index = {init: 0}
    states = [init]
    actions: list = []
    trans: list = []
    frontier = 0
    while frontier < len(states):
        arr = states[frontier]
        frontier += 1
        acts = ground_robot_actions(world, arr)
        rows = []
        for act in acts:
            row = []
            for delta, prob in act.outcomes:
                succ = apply_delta(arr, world, delta)
                if succ not in index:
                    if len(states) >= max_states:
                        raise CapacityError("MDP construction", len(states) + 1, max_states)
                    validate_arrangement(world, succ)
                    index[succ] = len(states)
                    states.append(succ)
                row.append((index[succ], prob))
            rows.append(tuple(row))
        actions.append(tuple(acts))
        trans.append(tuple(rows))
    props = tuple(pd.name for pd in world.propositions)
    labels = tuple(label_of(world, arr) for arr in states)
    return Mdp(
        world=world,
        states=tuple(states),
        initial=0,
        actions=tuple(actions),
        trans=tuple(trans),
        propositions=props,
        labels=labels,
    )


# ---------------------------------------------------------------------------
# JSON scenario schema (world-level keys)

WORLD_KEYS = {
    "objects",
    "locations",
    "init",
    "robot_success",
    "human_likelihood",
    "propositions",
    "stacking",
    "capacities",
    "robot_place_to_else",
}


def parse_world(data: Mapping) -> tuple:
    """Build (WorldSpec, initial Arrangement) from a scenario dictionary.

    Only the keys in WORLD_KEYS are understood here; callers reject anything
    else before delegating.
    """
    for key in ("objects", "locations", "init"):
        if key not in data:
            raise ScenarioError(f"missing required key {key!r}")
    objects = tuple(data["objects"])
    locations = tuple(data["locations"])
    for name in objects + locations:
        if not isinstance(name, str) or not IDENT_RE.fullmatch(name):
            raise ScenarioError(f"invalid identifier {name!r}")

    robot_success = {}
    for obj, kinds in dict(data.get("robot_success", {})).items():
        if obj not in objects:
            raise ScenarioError(f"robot_success for unknown object {obj!r}")
        for kind, prob in dict(kinds).items():
            if kind not in ("grasp", "place"):
                raise ScenarioError(f"unknown robot action kind {kind!r}")
            robot_success[(obj, kind)] = float(prob)

    human_likelihood = {}
    for entry in data.get("human_likelihood", []):
        obj, src, dst, weight = entry
        if obj not in objects or src not in locations or dst not in locations:
            raise ScenarioError(f"human_likelihood entry {entry!r} references unknown ids")
        human_likelihood[(obj, src, dst)] = float(weight)

    propositions = []
    for item in data.get("propositions", []):
        extra = set(item) - {"name", "object", "location"}
        if extra:
            raise ScenarioError(f"unknown proposition keys {sorted(extra)}")
        if item["object"] not in objects or item["location"] not in locations:
            raise ScenarioError(f"proposition {item['name']!r} references unknown ids")
        propositions.append(
            PropositionDef(name=item["name"], obj=item["object"], location=item["location"])
        )

    stacking = []
    for lower, upper in data.get("stacking", []):
        if lower not in locations or upper not in locations:
            raise ScenarioError(f"stacking pair ({lower!r}, {upper!r}) references unknown ids")
        stacking.append((lower, upper))

    capacities = {}
    for loc, cap in dict(data.get("capacities", {})).items():
        if loc not in locations:
            raise ScenarioError(f"capacity for unknown location {loc!r}")
        capacities[loc] = int(cap)

    world = WorldSpec(
        objects=objects,
        locations=locations,
        robot_success=robot_success,
        human_likelihood=human_likelihood,
        capacities=capacities,
        stacking=tuple(stacking),
        propositions=tuple(propositions),
        robot_place_to_else=bool(data.get("robot_place_to_else", True)),
    )

    init_map = dict(data["init"])
    if set(init_map) != set(objects):
        raise ScenarioError("init must place every object exactly once")
    init = Arrangement(tuple(init_map[obj] for obj in objects))
    validate_arrangement(world, init)
    return world, init
