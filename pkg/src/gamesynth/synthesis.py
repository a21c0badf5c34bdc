"""End-to-end pipeline: formula + game -> DFA -> product -> solved strategy."""

from __future__ import annotations

from dataclasses import dataclass

from .game import Player, StochasticGame
from .ltlf import Dfa, parse, to_dfa
from .product import ProductGame, build_product
from .solver import SolveResult, synthesize


@dataclass(frozen=True)
class Synthesis:
    game: StochasticGame
    dfa: Dfa
    product: ProductGame
    result: SolveResult

    @property
    def value_at_initial(self) -> float:
        return self.result.value_at(self.product.initial)


def synthesize_for(
    game: StochasticGame,
    formula: str,
    eps: float = 1e-6,
    max_iter: int = 100_000,
    maximizer: Player = Player.ROBOT,
    method: str = "jacobi",
    parallelism: int = 1,
) -> Synthesis:
    """Compile `formula` against the game's own labels and solve the product.

    The DFA alphabet is restricted to the labels that actually occur in the
    game, which keeps the automaton small for large proposition sets.
    """
    f = parse(formula)
    dfa = to_dfa(f, game.propositions, alphabet=game.occurring_labels())
    product = build_product(game, dfa)
    result = synthesize(
        product, eps=eps, max_iter=max_iter, maximizer=maximizer,
        method=method, parallelism=parallelism,
    )
    return Synthesis(game=game, dfa=dfa, product=product, result=result)
