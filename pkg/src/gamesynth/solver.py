"""Reachability solving on product games.

Qualitative precomputation first: the set of states with value exactly 0
(`prob0`), the set with value exactly 1 against an adversarial opponent
(`prob1`), and the maximal end components (informational for absorbing-target
reachability). Quantitative values are then computed by synchronous (Jacobi)
value-iteration sweeps, taking the max over choices at maximizer states and
the min at minimizer states; a memoryless deterministic strategy is read off
the fixed point.
"""

from __future__ import annotations

import dataclasses
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .game import Player
from .product import ProductGame


class NonConvergenceWarning(RuntimeWarning):
    """Value iteration hit its sweep cap with residual above threshold."""


@dataclass(frozen=True)
class ValueVector:
    values: np.ndarray  # per product state, in [0, 1]
    epsilon: float
    iterations: int
    converged: bool
    residual: float


@dataclass(frozen=True)
class Strategy:
    """Deterministic memoryless choice indices for both players."""

    robot_choice: dict  # robot-controlled state -> choice index
    human_choice: dict  # human-controlled state -> choice index

    def choice_for(self, pg: ProductGame, state: int) -> int:
        if pg.control[state] is Player.ROBOT:
            return self.robot_choice[state]
        return self.human_choice[state]


class _Flat:
    """CSR-style flattening of a product game for vectorized sweeps."""

    def __init__(self, pg: ProductGame):
        n = pg.num_states
        choice_start = np.zeros(n + 1, dtype=np.int64)
        cols = []
        probs = []
        trans_start = [0]
        owner = []
        for s in range(n):
            choice_start[s + 1] = choice_start[s] + len(pg.choices[s])
            for ch in pg.choices[s]:
                owner.append(s)
                cols.extend(ch.succs)
                probs.extend(ch.probs)
                trans_start.append(len(cols))
        self.n = n
        self.choice_start = choice_start
        self.owner = np.asarray(owner, dtype=np.int64)
        self.trans_start = np.asarray(trans_start, dtype=np.int64)
        self.cols = np.asarray(cols, dtype=np.int64)
        self.probs = np.asarray(probs, dtype=np.float64)

    def expected(self, v: np.ndarray) -> np.ndarray:
        """Expected successor value of every choice."""
        return np.add.reduceat(self.probs * v[self.cols], self.trans_start[:-1])


def _supports(pg: ProductGame):
    return [[set(ch.succs) for ch in row] for row in pg.choices]


def _is_max(pg: ProductGame, maximizer: Player) -> np.ndarray:
    return np.asarray([c is maximizer for c in pg.control], dtype=bool)


def prob0(pg: ProductGame, maximizer: Player = Player.ROBOT) -> frozenset:
    """States from which the maximizer cannot reach the target with
    positive probability: complement of the positive-reachability attractor."""
    supports = _supports(pg)
    in_x = [False] * pg.num_states
    for s in pg.target:
        in_x[s] = True
    changed = True
    while changed:
        changed = False
        for s in range(pg.num_states):
            if in_x[s]:
                continue
            if pg.control[s] is maximizer:
                hit = any(any(in_x[t] for t in supp) for supp in supports[s])
            else:
                hit = all(any(in_x[t] for t in supp) for supp in supports[s])
            if hit:
                in_x[s] = True
                changed = True
    return frozenset(s for s in range(pg.num_states) if not in_x[s])


def prob1(pg: ProductGame, maximizer: Player = Player.ROBOT) -> frozenset:
    """States where the maximizer wins almost surely against an adversarial
    opponent. Standard nested fixed point: the outer set shrinks to the
    almost-sure region, the inner set grows from the target while staying
    inside the outer one."""
    n = pg.num_states
    supports = _supports(pg)
    in_y = [True] * n

    def good(supp, in_x) -> bool:
        return all(in_y[t] for t in supp) and any(in_x[t] for t in supp)

    while True:
        in_x = [False] * n
        for s in pg.target:
            if in_y[s]:
                in_x[s] = True
        changed = True
        while changed:
            changed = False
            for s in range(n):
                if in_x[s] or not in_y[s]:
                    continue
                if pg.control[s] is maximizer:
                    ok = any(good(supp, in_x) for supp in supports[s])
                else:
                    ok = all(good(supp, in_x) for supp in supports[s])
                if ok:
                    in_x[s] = True
                    changed = True
        if in_x == in_y:
            return frozenset(s for s in range(n) if in_y[s])
        in_y = in_x


def find_mecs(pg: ProductGame) -> list:
    """Maximal end components, treating both players' choices as
    nondeterminism: maximal state sets closed under some nonempty choice
    subset and strongly connected under it."""
    n = pg.num_states
    supports = _supports(pg)
    enabled = [set(range(len(row))) for row in pg.choices]
    alive = [bool(en) for en in enabled]
    while True:
        # drop choices leaving the alive set, then states with no choices,
        # to a fixpoint (a dying state can orphan earlier states' choices)
        pruning = True
        while pruning:
            pruning = False
            for s in range(n):
                if not alive[s]:
                    continue
                for ci in list(enabled[s]):
                    if any(not alive[t] for t in supports[s][ci]):
                        enabled[s].discard(ci)
                        pruning = True
                if not enabled[s]:
                    alive[s] = False
                    pruning = True
        idx = [s for s in range(n) if alive[s]]
        if not idx:
            return []
        pos = {s: i for i, s in enumerate(idx)}
        rows, cols = [], []
        for s in idx:
            for ci in enabled[s]:
                for t in supports[s][ci]:
                    rows.append(pos[s])
                    cols.append(pos[t])
        graph = csr_matrix(
            (np.ones(len(rows), dtype=np.int8), (rows, cols)),
            shape=(len(idx), len(idx)),
        )
        _, comp = connected_components(graph, directed=True, connection="strong")
        # disable choices that exit their component
        changed = False
        for s in idx:
            for ci in list(enabled[s]):
                if any(comp[pos[t]] != comp[pos[s]] for t in supports[s][ci]):
                    enabled[s].discard(ci)
                    changed = True
            if not enabled[s]:
                alive[s] = False
                changed = True
        if not changed:
            groups: dict = {}
            for s in idx:
                groups.setdefault(comp[pos[s]], set()).add(s)
            return sorted(
                (frozenset(g) for g in groups.values()), key=lambda g: min(g)
            )


def value_iteration(
    pg: ProductGame,
    eps: float = 1e-6,
    max_iter: int = 100_000,
    maximizer: Player = Player.ROBOT,
    method: str = "jacobi",
    parallelism: int = 1,
    check_monotone: bool = False,
) -> ValueVector:
    """Iterate max/min expected-value sweeps to the reachability fixed point.

    States known to have value 0 or 1 are pinned by the qualitative
    precomputation and excluded from updates. Jacobi sweeps read only the
    previous vector, so results are independent of state order and of
    `parallelism`. Stops when the largest per-state change drops below
    `eps`; warns (and flags the result) if `max_iter` is hit first.
    """
    if eps <= 0 or max_iter < 1:
        raise ValueError("eps must be positive and max_iter >= 1")
    n = pg.num_states
    p0 = prob0(pg, maximizer)
    p1 = prob1(pg, maximizer)
    v = np.zeros(n, dtype=np.float64)
    for s in pg.target:
        v[s] = 1.0
    for s in p1:
        v[s] = 1.0
    pinned = np.zeros(n, dtype=bool)
    for s in p0 | p1:
        pinned[s] = True
    free = ~pinned
    if not free.any():
        return ValueVector(v, eps, 0, True, 0.0)

    flat = _Flat(pg)
    is_max = _is_max(pg, maximizer)
    if method == "jacobi":
        sweep = _jacobi_sweeper(flat, is_max, parallelism)
    elif method == "gauss-seidel":
        sweep = _gauss_seidel_sweeper(pg, is_max)
    else:
        raise ValueError(f"unknown method {method!r}")

    iterations = 0
    residual = np.inf
    while iterations < max_iter:
        new = sweep(v)
        new[pinned] = v[pinned]
        np.clip(new, 0.0, 1.0, out=new)
        if check_monotone:
            assert (new >= v - 1e-12).all(), "value sweep not monotone"
            assert (new <= 1.0).all() and (new >= 0.0).all()
        residual = float(np.max(np.abs(new - v))) if n else 0.0
        v = new
        iterations += 1
        if residual < eps:
            return ValueVector(v, eps, iterations, True, residual)
    warnings.warn(
        f"value iteration stopped after {max_iter} sweeps with residual "
        f"{residual:.3e} >= {eps:.3e}",
        NonConvergenceWarning,
    )
    return ValueVector(v, eps, iterations, False, residual)


def _jacobi_sweeper(flat: _Flat, is_max: np.ndarray, parallelism: int):
    starts = flat.choice_start

    def chunk_values(ev: np.ndarray, lo: int, hi: int) -> np.ndarray:
        seg = starts[lo:hi]
        upper = starts[hi]
        best_max = np.maximum.reduceat(ev[:upper], seg)
        best_min = np.minimum.reduceat(ev[:upper], seg)
        return np.where(is_max[lo:hi], best_max, best_min)

    if parallelism <= 1:
        def sweep(v: np.ndarray) -> np.ndarray:
            ev = flat.expected(v)
            return chunk_values(ev, 0, flat.n)

        return sweep

    bounds = np.linspace(0, flat.n, parallelism + 1, dtype=np.int64)
    pool = ThreadPoolExecutor(max_workers=parallelism)

    def sweep(v: np.ndarray) -> np.ndarray:
        ev = flat.expected(v)
        parts = pool.map(
            lambda ab: chunk_values(ev, int(ab[0]), int(ab[1])),
            zip(bounds[:-1], bounds[1:]),
        )
        return np.concatenate(list(parts))

    return sweep


def _gauss_seidel_sweeper(pg: ProductGame, is_max: np.ndarray):
    def sweep(v: np.ndarray) -> np.ndarray:
        new = v.copy()
        for s in range(pg.num_states):
            best = None
            for ch in pg.choices[s]:
                ev = sum(p * new[t] for t, p in zip(ch.succs, ch.probs))
                if best is None:
                    best = ev
                elif is_max[s]:
                    best = max(best, ev)
                else:
                    best = min(best, ev)
            new[s] = best
        return new

    return sweep


_TIE_TOL = 1e-12


def extract_strategy(
    pg: ProductGame, v: ValueVector, maximizer: Player = Player.ROBOT
) -> Strategy:
    """Memoryless deterministic choices achieving the computed values.

    Per state, candidates are the choices attaining the optimal expected
    value; the lowest index wins. Among tied optimal choices of the
    maximizer, preference goes to one with positive probability of strict
    progress toward the target (computed by an attractor ranking over the
    optimal-choice subgame): a plain value argmax may otherwise cycle
    forever inside a region of equal values and silently forfeit them.
    """
    values = v.values
    n = pg.num_states

    kept: list = []  # per state: candidate (optimal) choice indices
    for s in range(n):
        evs = [
            float(np.dot(np.asarray(ch.probs), values[np.asarray(ch.succs, dtype=np.int64)]))
            for ch in pg.choices[s]
        ]
        if pg.control[s] is maximizer:
            best = max(evs)
            kept.append([ci for ci, ev in enumerate(evs) if ev >= best - _TIE_TOL])
        else:
            best = min(evs)
            kept.append([ci for ci, ev in enumerate(evs) if ev <= best + _TIE_TOL])

    # attractor ranking over the optimal-choice subgame: rank = steps in
    # which the maximizer can force positive probability of the target
    rank = [None] * n
    for s in pg.target:
        rank[s] = 0
    level = 0
    changed = True
    while changed:
        changed = False
        level += 1
        for s in range(n):
            if rank[s] is not None:
                continue
            rows = [pg.choices[s][ci] for ci in kept[s]]
            hit = [any(rank[t] is not None and rank[t] < level for t in ch.succs)
                   for ch in rows]
            ok = any(hit) if pg.control[s] is maximizer else all(hit)
            if ok:
                rank[s] = level
                changed = True

    robot_choice = {}
    human_choice = {}
    for s in range(n):
        pick = kept[s][0]
        if pg.control[s] is maximizer and rank[s] is not None and rank[s] > 0:
            for ci in kept[s]:
                ch = pg.choices[s][ci]
                if any(rank[t] is not None and rank[t] < rank[s] for t in ch.succs):
                    pick = ci
                    break
        if pg.control[s] is Player.ROBOT:
            robot_choice[s] = pick
        else:
            human_choice[s] = pick
    return Strategy(robot_choice=robot_choice, human_choice=human_choice)


def induced_game(pg: ProductGame, strat: Strategy) -> ProductGame:
    """Fix the robot's choices; the opponent keeps all of its choices."""
    rows = []
    for s in range(pg.num_states):
        if pg.control[s] is Player.ROBOT:
            rows.append((pg.choices[s][strat.robot_choice[s]],))
        else:
            rows.append(pg.choices[s])
    return dataclasses.replace(pg, choices=tuple(rows))


def verify_strategy(
    pg: ProductGame,
    strat: Strategy,
    v: ValueVector,
    eps: float,
    maximizer: Player = Player.ROBOT,
) -> bool:
    """Check the extracted robot strategy achieves the computed values.

    With the robot fixed, what remains is a single-player minimization (an
    MDP); its value-iteration solution must match `v` within 10*eps at every
    state.
    """
    fixed = induced_game(pg, strat)
    check = value_iteration(fixed, eps=eps, maximizer=maximizer)
    return bool(np.max(np.abs(check.values - v.values)) <= 10.0 * eps)


@dataclass(frozen=True)
class SolveResult:
    values: ValueVector
    strategy: Strategy
    prob0: frozenset
    prob1: frozenset
    mecs: list

    def value_at(self, state: int) -> float:
        return float(self.values.values[state])


def synthesize(
    pg: ProductGame,
    eps: float = 1e-6,
    max_iter: int = 100_000,
    maximizer: Player = Player.ROBOT,
    method: str = "jacobi",
    parallelism: int = 1,
) -> SolveResult:
    """Full pipeline on a product: precompute, iterate, extract."""
    values = value_iteration(
        pg, eps=eps, max_iter=max_iter, maximizer=maximizer,
        method=method, parallelism=parallelism,
    )
    strategy = extract_strategy(pg, values, maximizer=maximizer)
    return SolveResult(
        values=values,
        strategy=strategy,
        prob0=prob0(pg, maximizer),
        prob1=prob1(pg, maximizer),
        mecs=find_mecs(pg),
    )
