"""Live strategy execution: play sessions and the HTTP/JSON service.

A session pins a synthesized strategy for one scenario/formula pair and
walks the product game: the robot replays its optimal choice, the human picks
any offered action, and stochastic outcomes are sampled with a seeded PCG64
generator so a session replays identically from (seed, action sequence).

After every observed change the robot simply re-consults its memoryless
strategy at the current state; in `interruptible` mode a human move is
accepted even on the robot's turn by re-entering the model at the same
arrangement with counters reset.
"""

from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass, field
from typing import Mapping, Optional

import numpy as np
from pydantic import BaseModel

from .game import DomainGameMeta, GameState, Player
from .scenarios import Scenario, TttMeta
from .synthesis import Synthesis, synthesize_for


class NewSessionRequest(BaseModel):
    scenario: str
    formula: Optional[str] = None
    seed: Optional[int] = None


class HumanMoveRequest(BaseModel):
    action: str


class ApiError(Exception):
    """Structured service error: {code, message, detail} + HTTP status."""

    def __init__(self, code: str, message: str, status: int = 400, detail=None):
        super().__init__(message)
        self.code = code
        self.message = message
        self.status = status
        self.detail = detail

    def document(self) -> dict:
        return {"code": self.code, "message": self.message, "detail": self.detail}


@dataclass
class Session:
    session_id: str
    scenario: Scenario
    formula: str
    synthesis: Synthesis
    seed: int
    rng: np.random.Generator
    current: int
    history: list = field(default_factory=list)
    lock: threading.Lock = field(default_factory=threading.Lock)


def _sample_index(rng: np.random.Generator, probs) -> int:
    r = float(rng.random())
    acc = 0.0
    for i, p in enumerate(probs):
        acc += p
        if r < acc:
            return i
    return len(probs) - 1


class SessionManager:
    """All service logic, framework-free; the FastAPI layer is a thin shim.

    Synthesized strategies are cached by (scenario, formula, eps); sessions
    are in-memory only and serialized per session id.
    """

    def __init__(self, registry: Mapping, eps: float = 1e-6, interruptible: bool = False):
        self.registry = dict(registry)
        self.eps = eps
        self.interruptible = interruptible
        self.sessions: dict = {}
        self._synth_cache: dict = {}
        self._counter = itertools.count(1)
        self._lock = threading.Lock()

    # -- session lifecycle

    def scenario_list(self) -> dict:
        return {
            "scenarios": [
                {
                    "id": s.scenario_id,
                    "kind": s.kind,
                    "description": s.description,
                    "default_formula": s.default_formula,
                }
                for s in sorted(self.registry.values(), key=lambda s: s.scenario_id)
            ]
        }

    def _synthesis(self, scenario: Scenario, formula: str) -> Synthesis:
        key = (scenario.scenario_id, formula, self.eps)
        with self._lock:
            cached = self._synth_cache.get(key)
        if cached is not None:
            return cached
        try:
            syn = synthesize_for(
                scenario.build(), formula, eps=self.eps, maximizer=scenario.maximizer
            )
        except Exception as exc:
            raise ApiError(
                "synthesis_error", f"cannot synthesize for {formula!r}: {exc}", 400
            ) from exc
        with self._lock:
            self._synth_cache[key] = syn
        return syn

    def create(self, scenario_id: str, formula: Optional[str] = None,
               seed: Optional[int] = None) -> Session:
        scenario = self.registry.get(scenario_id)
        if scenario is None:
            raise ApiError("unknown_scenario", f"no scenario {scenario_id!r}", 404)
        formula = formula or scenario.default_formula
        syn = self._synthesis(scenario, formula)
        if seed is None:
            seed = int(np.random.SeedSequence().entropy % (2**63))
        with self._lock:
            session_id = f"s{next(self._counter)}"
        session = Session(
            session_id=session_id,
            scenario=scenario,
            formula=formula,
            synthesis=syn,
            seed=int(seed),
            rng=np.random.default_rng(int(seed)),
            current=syn.product.initial,
        )
        with self._lock:
            self.sessions[session_id] = session
        return session

    def get(self, session_id: str) -> Session:
        session = self.sessions.get(session_id)
        if session is None:
            raise ApiError("unknown_session", f"no session {session_id!r}", 404)
        return session

    # -- state rendering

    def _game_state_summary(self, session: Session, product_index: int) -> dict:
        game = session.synthesis.game
        g_idx, _q = session.synthesis.product.states[product_index]
        doc = {
            "index": product_index,
            "labels": sorted(game.labels[g_idx]),
        }
        meta = game.meta
        if isinstance(meta, TttMeta):
            st = meta.game_states[g_idx]
            doc["board"] = list(st.board)
        elif isinstance(meta, DomainGameMeta):
            gs: GameState = meta.game_states[g_idx]
            doc["arrangement"] = {
                obj: loc
                for obj, loc in zip(meta.world.objects, gs.arrangement.placement)
            }
            doc["counter"] = gs.counter
            doc["human_active"] = gs.human_active
        else:
            doc["variables"] = dict(zip(game.var_names, game.states[g_idx]))
        return doc

    def _outcome_delta(self, session: Session, src: int, dst: int):
        game = session.synthesis.game
        meta = game.meta
        s_from = session.synthesis.product.states[src][0]
        s_to = session.synthesis.product.states[dst][0]
        if isinstance(meta, TttMeta):
            before = meta.game_states[s_from].board
            after = meta.game_states[s_to].board
            changed = [c for c in range(9) if before[c] != after[c]]
            return {"cell": changed[0]} if changed else None
        if isinstance(meta, DomainGameMeta):
            before = meta.game_states[s_from].arrangement.placement
            after = meta.game_states[s_to].arrangement.placement
            for obj, b, a in zip(meta.world.objects, before, after):
                if b != a:
                    return {"object": obj, "from": b, "to": a}
            return None
        return None

    def _move_detail(self, session: Session, action: str) -> dict:
        if action.startswith("place(") and action.endswith(")"):
            inner = action[6:-1]
            if inner.isdigit():
                return {"cell": int(inner)}
            obj, dst = inner.split(",")
            return {"object": obj, "to": dst}
        if action.startswith("move(") and action.endswith(")"):
            obj, src, dst = action[5:-1].split(",")
            return {"object": obj, "from": src, "to": dst}
        if action.startswith("grasp(") and action.endswith(")"):
            obj, src = action[6:-1].split(",")
            return {"object": obj, "from": src}
        return {}

    def _is_terminal(self, session: Session, product_index: int) -> bool:
        pg = session.synthesis.product
        if product_index in pg.target:
            return True
        row = pg.choices[product_index]
        return (
            len(row) == 1
            and row[0].succs == (product_index,)
            and row[0].action == "stay"
        )

    def view(self, session: Session) -> dict:
        with session.lock:
            return self._view_locked(session)

    def _view_locked(self, session: Session) -> dict:
        syn = session.synthesis
        pg = syn.product
        values = syn.result.values.values
        current = session.current
        controller = "robot" if pg.control[current] is Player.ROBOT else "human"
        doc = {
            "session_id": session.session_id,
            "scenario": session.scenario.scenario_id,
            "formula": session.formula,
            "seed": session.seed,
            "controller": controller,
            "value": float(values[current]),
            "target_reached": current in pg.target,
            "terminal": self._is_terminal(session, current),
            "step": len(session.history),
            "state": self._game_state_summary(session, current),
            "history": list(session.history),
        }
        if controller == "robot" and not doc["terminal"]:
            doc["robot_actions"] = [
                {
                    "action": ch.action,
                    "expected_value": float(
                        sum(p * values[t] for t, p in zip(ch.succs, ch.probs))
                    ),
                }
                for ch in pg.choices[current]
            ]
        return doc

    # -- moves

    def moves(self, session: Session) -> dict:
        with session.lock:
            pg = session.synthesis.product
            current = session.current
            if self._is_terminal(session, current):
                return {"moves": []}
            if pg.control[current] is not Player.HUMAN:
                raise ApiError("not_your_turn", "the robot controls this state", 409)
            return {"moves": self._moves_locked(session, current)}

    def _moves_locked(self, session: Session, state: int) -> list:
        pg = session.synthesis.product
        out = []
        for ch in pg.choices[state]:
            outcomes = [
                {
                    "probability": float(p),
                    "state": self._game_state_summary(session, t),
                    "delta": self._outcome_delta(session, state, t),
                }
                for t, p in zip(ch.succs, ch.probs)
            ]
            out.append(
                {
                    "action": ch.action,
                    "detail": self._move_detail(session, ch.action),
                    "outcomes": outcomes,
                }
            )
        return out

    def _advance(self, session: Session, actor: str, choice) -> dict:
        pg = session.synthesis.product
        idx = _sample_index(session.rng, choice.probs)
        dst = choice.succs[idx]
        sampled = {
            "probability": float(choice.probs[idx]),
            "state": self._game_state_summary(session, dst),
            "delta": self._outcome_delta(session, session.current, dst),
        }
        session.history.append(
            {
                "actor": actor,
                "action": choice.action,
                "from": session.current,
                "to": dst,
                "delta": sampled["delta"],
            }
        )
        session.current = dst
        return sampled

    def human_move(self, session: Session, action: str) -> dict:
        with session.lock:
            pg = session.synthesis.product
            current = session.current
            if self._is_terminal(session, current):
                raise ApiError("terminal", "the game is over", 409)
            if pg.control[current] is not Player.HUMAN:
                if self.interruptible:
                    return self._interrupt_locked(session, action)
                raise ApiError("not_your_turn", "the robot controls this state", 409)
            match = [ch for ch in pg.choices[current] if ch.action == action]
            if not match:
                raise ApiError(
                    "illegal_move", f"action {action!r} is not available", 400,
                    detail={"legal": [ch.action for ch in pg.choices[current]]},
                )
            sampled = self._advance(session, "human", match[0])
            return {"action": action, "sampled": sampled, "view": self._view_locked(session)}

    def robot_step(self, session: Session) -> dict:
        with session.lock:
            pg = session.synthesis.product
            current = session.current
            if self._is_terminal(session, current):
                raise ApiError("terminal", "the game is over", 409)
            if pg.control[current] is not Player.ROBOT:
                raise ApiError("not_your_turn", "the human controls this state", 409)
            # re-consult the memoryless strategy at whatever state is current
            ci = session.synthesis.result.strategy.robot_choice[current]
            choice = pg.choices[current][ci]
            sampled = self._advance(session, "robot", choice)
            return {
                "action": choice.action,
                "sampled": sampled,
                "view": self._view_locked(session),
            }

    # -- out-of-turn human moves (execution-layer convention)

    def _interrupt_locked(self, session: Session, action: str) -> dict:
        game = session.synthesis.game
        meta = game.meta
        if not isinstance(meta, DomainGameMeta):
            raise ApiError(
                "not_interruptible", "this scenario cannot re-map out-of-turn moves", 409
            )
        pg = session.synthesis.product
        g_idx, q = pg.states[session.current]
        arr = meta.game_states[g_idx].arrangement
        lookup = {}
        for i, gs in enumerate(meta.game_states):
            if gs.counter == 0 and gs.human_active:
                lookup[(gs.arrangement, gs.control)] = i
        human_idx = lookup.get((arr, Player.HUMAN))
        if human_idx is None:
            raise ApiError("unsupported_state", "no human-turn twin for this state", 409)
        match = [ch for ch in game.choices[human_idx] if ch.action == action]
        if not match:
            raise ApiError("illegal_move", f"action {action!r} is not available", 400)
        # sample at the game level, then re-enter at the robot-turn twin with
        # counters reset and the DFA advanced on the new label
        idx = _sample_index(session.rng, match[0].probs)
        landed = match[0].succs[idx]
        landed_arr = meta.game_states[landed].arrangement
        robot_idx = lookup.get((landed_arr, Player.ROBOT))
        if robot_idx is None:
            raise ApiError("unsupported_state", "no robot-turn twin after interrupt", 409)
        q2 = session.synthesis.dfa.step(q, game.labels[robot_idx])
        try:
            target_pi = pg.states.index((robot_idx, q2))
        except ValueError:
            raise ApiError(
                "unsupported_state", "interrupted state outside the solved product", 409
            ) from None
        session.history.append(
            {
                "actor": "human",
                "action": action,
                "from": session.current,
                "to": target_pi,
                "delta": None,
                "interrupt": True,
            }
        )
        session.current = target_pi
        return {
            "action": action,
            "sampled": {
                "probability": float(match[0].probs[idx]),
                "state": self._game_state_summary(session, target_pi),
                "delta": None,
            },
            "view": self._view_locked(session),
        }


# ---------------------------------------------------------------------------
# HTTP layer


def create_app(manager: SessionManager, static_dir: Optional[str] = None):
    """FastAPI application exposing the session manager under /api/v1."""
    from fastapi import FastAPI, Request
    from fastapi.responses import JSONResponse

    app = FastAPI(title="gamesynth play service")

    @app.exception_handler(ApiError)
    async def api_error_handler(_request: Request, exc: ApiError):
        return JSONResponse(status_code=exc.status, content=exc.document())

    @app.get("/api/v1/scenarios")
    def scenarios():
        return manager.scenario_list()

    @app.post("/api/v1/sessions", status_code=201)
    def new_session(body: NewSessionRequest):
        session = manager.create(body.scenario, body.formula, body.seed)
        return {"session_id": session.session_id}

    @app.get("/api/v1/sessions/{session_id}")
    def view(session_id: str):
        return manager.view(manager.get(session_id))

    @app.get("/api/v1/sessions/{session_id}/moves")
    def moves(session_id: str):
        return manager.moves(manager.get(session_id))

    @app.post("/api/v1/sessions/{session_id}/human")
    def human(session_id: str, body: HumanMoveRequest):
        return manager.human_move(manager.get(session_id), body.action)

    @app.post("/api/v1/sessions/{session_id}/robot")
    def robot(session_id: str):
        return manager.robot_step(manager.get(session_id))

    if static_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app
