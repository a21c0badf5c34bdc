"""Explicit text-file export/import of games: state, transition, label, and
player vectors (plus an optional strategy file).

Four ASCII files with `\\n` newlines describe a game bit-exactly:

  model.sta   line 1: `(var1,var2,...)`; then `idx:(v1,v2,...)` per state
  model.tra   line 1: `numStates numChoices numTransitions`; then
              `src choiceIdx dst prob action`, sorted by (src, choice, dst),
              probabilities printed as the shortest round-tripping decimal
  model.lab   line 1: `0="init" 1="name" ...`; then `stateIdx: id id ...`
              for states with non-empty labels, sorted by state
  model.pla   `idx player` per state, player 1 = robot, 2 = human

Export is canonical (label ids sorted by name, bodies sorted), so
export -> import -> export reproduces files byte for byte.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Optional

from .errors import FormatError
from .game import Choice, Player, StochasticGame
from .product import ProductGame
from .solver import Strategy

INIT_LABEL = "init"


@dataclass(frozen=True)
class ExplicitBundle:
    sta: str
    tra: str
    lab: str
    pla: str
    str_: Optional[str] = None


def _fmt_prob(p: float) -> str:
    s = repr(float(p))
    return s[:-2] if s.endswith(".0") else s


def _as_game(g) -> StochasticGame:
    if isinstance(g, ProductGame):
        return g.to_game()
    return g


def export_explicit(
    g, directory: str, strategy: Strategy | None = None, name: str = "model"
) -> ExplicitBundle:
    """Write the explicit files for a game (or a product, flattened with a
    `dfa` variable and `target` label) into `directory`."""
    game = _as_game(g)
    if INIT_LABEL in game.propositions:
        raise ValueError(f"proposition name {INIT_LABEL!r} is reserved")
    for row in game.choices:
        for ch in row:
            if " " in ch.action:
                raise ValueError(f"action name {ch.action!r} contains a space")

    os.makedirs(directory, exist_ok=True)
    base = os.path.join(directory, name)

    sta_path = base + ".sta"
    with open(sta_path, "w", newline="\n") as fh:
        fh.write("(" + ",".join(game.var_names) + ")\n")
        for i, values in enumerate(game.states):
            fh.write(f"{i}:(" + ",".join(str(v) for v in values) + ")\n")

    tra_path = base + ".tra"
    with open(tra_path, "w", newline="\n") as fh:
        fh.write(f"{game.num_states} {game.num_choices} {game.num_transitions}\n")
        for src in range(game.num_states):
            for ci, ch in enumerate(game.choices[src]):
                for dst, prob in sorted(zip(ch.succs, ch.probs)):
                    fh.write(f"{src} {ci} {dst} {_fmt_prob(prob)} {ch.action}\n")

    lab_path = base + ".lab"
    names = sorted(game.propositions)
    ids = {INIT_LABEL: 0}
    for name_ in names:
        ids[name_] = len(ids)
    with open(lab_path, "w", newline="\n") as fh:
        fh.write(" ".join(f'{ids[n]}="{n}"' for n in [INIT_LABEL] + names) + "\n")
        for i in range(game.num_states):
            tags = sorted(ids[n] for n in game.labels[i])
            if i == game.initial:
                tags = [0] + tags
            if tags:
                fh.write(f"{i}: " + " ".join(str(t) for t in tags) + "\n")

    pla_path = base + ".pla"
    with open(pla_path, "w", newline="\n") as fh:
        for i in range(game.num_states):
            fh.write(f"{i} {int(game.control[i])}\n")

    str_path = None
    if strategy is not None:
        str_path = base + ".str"
        with open(str_path, "w", newline="\n") as fh:
            for i in range(game.num_states):
                if game.control[i] is Player.ROBOT:
                    ci = strategy.robot_choice[i]
                else:
                    ci = strategy.human_choice[i]
                fh.write(f"{i} {game.choices[i][ci].action}\n")

    return ExplicitBundle(sta=sta_path, tra=tra_path, lab=lab_path, pla=pla_path,
                          str_=str_path)


# ---------------------------------------------------------------------------
# Import


def _read_lines(path: str) -> list:
    try:
        with open(path, "r", newline="") as fh:
            return fh.read().split("\n")
    except OSError as exc:
        raise FormatError(os.path.basename(path), 0, f"cannot read: {exc}") from exc


def _parse_state_tuple(text: str, fname: str, lineno: int) -> tuple:
    text = text.strip()
    if not (text.startswith("(") and text.endswith(")")):
        raise FormatError(fname, lineno, f"expected parenthesized tuple, got {text!r}")
    inner = text[1:-1]
    if not inner:
        return ()
    return tuple(part.strip() for part in inner.split(","))


def import_explicit(directory: str, name: str = "model") -> StochasticGame:
    """Rebuild a game from its four explicit files.

    Raises FormatError (with file and line) on malformed lines, header
    mismatches, non-stochastic choices, or dangling indices.
    """
    base = os.path.join(directory, name)
    sta_name, tra_name = name + ".sta", name + ".tra"
    lab_name, pla_name = name + ".lab", name + ".pla"

    # --- states
    lines = _read_lines(base + ".sta")
    if not lines or not lines[0].strip():
        raise FormatError(sta_name, 1, "missing variable header")
    var_names = _parse_state_tuple(lines[0], sta_name, 1)
    states = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        head, sep, rest = line.partition(":")
        if not sep:
            raise FormatError(sta_name, lineno, "expected `idx:(...)`")
        try:
            idx = int(head)
        except ValueError:
            raise FormatError(sta_name, lineno, f"bad state index {head!r}") from None
        if idx != len(states):
            raise FormatError(sta_name, lineno, f"state index {idx} out of order")
        raw = _parse_state_tuple(rest, sta_name, lineno)
        if len(raw) != len(var_names):
            raise FormatError(
                sta_name, lineno,
                f"expected {len(var_names)} values, got {len(raw)}",
            )
        try:
            states.append(tuple(int(v) for v in raw))
        except ValueError:
            raise FormatError(sta_name, lineno, "non-integer state value") from None
    n = len(states)
    if n == 0:
        raise FormatError(sta_name, 1, "no states")

    # --- transitions
    lines = _read_lines(base + ".tra")
    if not lines or not lines[0].strip():
        raise FormatError(tra_name, 1, "missing header")
    header = lines[0].split()
    if len(header) != 3:
        raise FormatError(tra_name, 1, "header must be `numStates numChoices numTransitions`")
    try:
        h_states, h_choices, h_trans = (int(x) for x in header)
    except ValueError:
        raise FormatError(tra_name, 1, "non-integer header field") from None
    if h_states != n:
        raise FormatError(tra_name, 1, f"header states {h_states} != .sta count {n}")

    rows: dict = {}
    seen_transitions = 0
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 5:
            raise FormatError(tra_name, lineno, "expected `src choice dst prob action`")
        try:
            src, ci, dst = int(parts[0]), int(parts[1]), int(parts[2])
            prob = float(parts[3])
        except ValueError:
            raise FormatError(tra_name, lineno, "malformed numeric field") from None
        action = parts[4]
        if not 0 <= src < n:
            raise FormatError(tra_name, lineno, f"source state {src} out of range")
        if not 0 <= dst < n:
            raise FormatError(tra_name, lineno, f"destination state {dst} out of range")
        if not 0.0 < prob <= 1.0:
            raise FormatError(tra_name, lineno, f"probability {prob} outside (0, 1]")
        key = (src, ci)
        entry = rows.setdefault(key, {"action": action, "pairs": [], "line": lineno})
        if entry["action"] != action:
            raise FormatError(
                tra_name, lineno,
                f"choice ({src}, {ci}) has conflicting actions "
                f"{entry['action']!r} and {action!r}",
            )
        if any(dst == d for d, _ in entry["pairs"]):
            raise FormatError(tra_name, lineno, f"duplicate transition to {dst}")
        entry["pairs"].append((dst, prob))
        seen_transitions += 1

    if seen_transitions != h_trans:
        raise FormatError(
            tra_name, 1,
            f"header claims {h_trans} transitions, body has {seen_transitions}",
        )
    if len(rows) != h_choices:
        raise FormatError(
            tra_name, 1, f"header claims {h_choices} choices, body has {len(rows)}"
        )

    choices: list = [[] for _ in range(n)]
    for src in range(n):
        cis = sorted(ci for s, ci in rows if s == src)
        if cis != list(range(len(cis))):
            raise FormatError(
                tra_name, 1, f"state {src} has non-contiguous choice indices {cis}"
            )
        for ci in cis:
            entry = rows[(src, ci)]
            total = sum(p for _, p in entry["pairs"])
            if abs(total - 1.0) > 1e-6:
                raise FormatError(
                    tra_name, entry["line"],
                    f"choice ({src}, {ci}) probabilities sum to {total!r}",
                )
            succs = tuple(d for d, _ in entry["pairs"])
            probs = tuple(p for _, p in entry["pairs"])
            choices[src].append(Choice(entry["action"], succs, probs))
        if not choices[src]:
            raise FormatError(tra_name, 1, f"state {src} has no choices (deadlock)")

    # --- labels
    lines = _read_lines(base + ".lab")
    if not lines or not lines[0].strip():
        raise FormatError(lab_name, 1, "missing label header")
    id_to_name: dict = {}
    for field in lines[0].split():
        head, sep, rest = field.partition("=")
        if not sep or not (rest.startswith('"') and rest.endswith('"')) or len(rest) < 2:
            raise FormatError(lab_name, 1, f"bad header entry {field!r}")
        try:
            label_id = int(head)
        except ValueError:
            raise FormatError(lab_name, 1, f"bad label id {head!r}") from None
        if label_id in id_to_name:
            raise FormatError(lab_name, 1, f"duplicate label id {label_id}")
        id_to_name[label_id] = rest[1:-1]
    if id_to_name.get(0) != INIT_LABEL:
        raise FormatError(lab_name, 1, 'label id 0 must be "init"')

    labels = [set() for _ in range(n)]
    initial = None
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        head, sep, rest = line.partition(":")
        if not sep:
            raise FormatError(lab_name, lineno, "expected `stateIdx: id id ...`")
        try:
            idx = int(head)
        except ValueError:
            raise FormatError(lab_name, lineno, f"bad state index {head!r}") from None
        if not 0 <= idx < n:
            raise FormatError(lab_name, lineno, f"state {idx} out of range")
        for field in rest.split():
            try:
                label_id = int(field)
            except ValueError:
                raise FormatError(lab_name, lineno, f"bad label id {field!r}") from None
            if label_id not in id_to_name:
                raise FormatError(lab_name, lineno, f"unknown label id {label_id}")
            if label_id == 0:
                if initial is not None:
                    raise FormatError(lab_name, lineno, "multiple init states")
                initial = idx
            else:
                labels[idx].add(id_to_name[label_id])
    if initial is None:
        raise FormatError(lab_name, 1, "no state labeled init")

    # --- players
    lines = _read_lines(base + ".pla")
    control: list = [None] * n
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 2:
            raise FormatError(pla_name, lineno, "expected `idx player`")
        try:
            idx, player = int(parts[0]), int(parts[1])
        except ValueError:
            raise FormatError(pla_name, lineno, "malformed numeric field") from None
        if not 0 <= idx < n:
            raise FormatError(pla_name, lineno, f"state {idx} out of range")
        if player not in (1, 2):
            raise FormatError(pla_name, lineno, f"player must be 1 or 2, got {player}")
        if control[idx] is not None:
            raise FormatError(pla_name, lineno, f"duplicate player for state {idx}")
        control[idx] = Player(player)
    missing = [i for i, c in enumerate(control) if c is None]
    if missing:
        raise FormatError(pla_name, 1, f"no player assigned to states {missing[:5]}")

    propositions = tuple(
        id_to_name[i] for i in sorted(id_to_name) if id_to_name[i] != INIT_LABEL
    )
    return StochasticGame(
        var_names=tuple(var_names),
        states=tuple(states),
        initial=initial,
        control=tuple(control),
        choices=tuple(tuple(row) for row in choices),
        propositions=propositions,
        labels=tuple(frozenset(l) for l in labels),
        meta=None,
    )
