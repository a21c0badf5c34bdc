"""Synchronous product of a stochastic game with a DFA.

Product states pair a game state with a DFA state. The DFA is advanced on
the label of every state *entered*, starting with the initial game state's
label (the observation trace begins at the initial observation, so the first
label is consumed before play starts). States whose DFA component is
accepting form the reachability target and are made absorbing for solving.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import AlphabetError
from .game import Choice, STAY, StochasticGame
from .ltlf import Dfa


@dataclass(frozen=True)
class ProductGame:
    game: StochasticGame = field(compare=False)
    dfa: Dfa = field(compare=False)
    states: tuple  # (game state index, dfa state index) per product index
    initial: int
    control: tuple  # Player per product state
    choices: tuple  # per product state: tuple of Choice over product indices
    target: frozenset  # product indices with accepting dfa component

    @property
    def num_states(self) -> int:
        return len(self.states)

    @property
    def num_transitions(self) -> int:
        return sum(len(ch.succs) for row in self.choices for ch in row)

    def to_game(self) -> StochasticGame:
        """Flatten to a plain game with a `dfa` variable and `target` label."""
        g = self.game
        labels = []
        props = g.propositions + ("target",)
        for pi, (s, q) in enumerate(self.states):
            label = g.labels[s]
            if pi in self.target:
                label = label | {"target"}
            labels.append(label)
        return StochasticGame(
            var_names=g.var_names + ("dfa",),
            states=tuple(g.states[s] + (q,) for s, q in self.states),
            initial=self.initial,
            control=self.control,
            choices=self.choices,
            propositions=props,
            labels=tuple(labels),
            meta=None,
        )


def build_product(
    g: StochasticGame, d: Dfa, absorb_targets: bool = True
) -> ProductGame:
    """Reachable product of `g` and `d`.

    Every label emitted by `g` must be in `d`'s alphabet. With
    `absorb_targets` (the default) accepting product states get a single
    `stay` self-loop, which preserves reachability values.
    """
    alphabet = set(d.alphabet)
    for label in g.occurring_labels():
        if label not in alphabet:
            raise AlphabetError(
                f"game label {sorted(label)!r} not in DFA alphabet"
            )

    q0 = d.step(d.initial, g.labels[g.initial])
    start = (g.initial, q0)
    index = {start: 0}
    order = [start]
    rows = []
    target = set()

    pos = 0
    while pos < len(order):
        s, q = order[pos]
        me = pos
        pos += 1
        if q in d.accepting:
            target.add(me)
            if absorb_targets:
                rows.append((Choice(STAY, (me,), (1.0,)),))
                continue
        row = []
        for ch in g.choices[s]:
            succs = []
            for succ in ch.succs:
                succ_q = d.step(q, g.labels[succ])
                key = (succ, succ_q)
                if key not in index:
                    index[key] = len(order)
                    order.append(key)
                succs.append(index[key])
            row.append(Choice(ch.action, tuple(succs), ch.probs))
        rows.append(tuple(row))

    return ProductGame(
        game=g,
        dfa=d,
        states=tuple(order),
        initial=0,
        control=tuple(g.control[s] for s, _ in order),
        choices=tuple(rows),
        target=frozenset(target),
    )
