"""Stochastic-game strategy synthesis for human-robot pick-and-place worlds.

Pipeline: ground a world into a robot MDP (`domain`), lift it into a
two-player turn-based stochastic game (`game`), compile the finite-trace
task formula into a DFA (`ltlf`), compose (`product`), solve reachability
(`solver`), and either export explicit model files (`explicit_io`) or play
the strategy live over HTTP (`exec_service`).
"""

from .domain import Arrangement, Mdp, PropositionDef, WorldSpec, build_mdp
from .errors import (
    AlphabetError,
    CapacityError,
    FormatError,
    GamesynthError,
    ParamError,
    ScenarioError,
)
from .game import (
    Choice,
    Player,
    ProbTermination,
    RatioTurns,
    StochasticGame,
    build_game,
    validate_game,
)
from .ltlf import Dfa, Formula, dfa_accepts, eval_trace, parse, pretty, to_dfa, to_nnf
from .product import ProductGame, build_product
from .solver import (
    Strategy,
    ValueVector,
    extract_strategy,
    find_mecs,
    prob0,
    prob1,
    synthesize,
    value_iteration,
    verify_strategy,
)
from .synthesis import Synthesis, synthesize_for

__version__ = "0.1.0"
