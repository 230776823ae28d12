"""Local HTTP service for human-in-the-loop episodes.

Each session owns one :class:`~elegantdesign.evolution.Episode`. The engine
evolves until an interaction point, then waits for ``POST .../rating``;
rating resumes evolution up to the next interaction point. Candidate payloads
never name the measure that selected them.
"""

from __future__ import annotations

import json
import secrets
import threading
from pathlib import Path
from typing import Iterator, Optional, Union

from fastapi import FastAPI, HTTPException
from fastapi.responses import StreamingResponse
from pydantic import BaseModel, Field, StrictInt

from .evolution import WEIGHT_ORDER, Episode, EpisodeConfig, ProtocolError
from .metrics import ELEGANCE_MEASURES, profile
from .problem import DesignProblem, ProblemError, load_problem

# keys that would reveal the selecting measure to the designer
_BLINDED_KEYS = ("chosen_measure", "measure")


class CreateSession(BaseModel):
    problem: Union[str, dict]
    config: dict = Field(default_factory=dict)


class Rating(BaseModel):
    stars: StrictInt = Field(ge=1, le=5)


def _blind(record: dict) -> dict:
    return {k: v for k, v in record.items() if k not in _BLINDED_KEYS}


class Session:
    def __init__(self, session_id: str, problem: DesignProblem, config: EpisodeConfig):
        self.id = session_id
        self.problem = problem
        self.config = config
        self.episode = Episode(problem, config)
        self.cond = threading.Condition(threading.RLock())
        self.events: list[dict] = []
        self.log_path: Optional[Path] = None

    def _emit(self, event: str, data: dict) -> None:
        self.events.append({"event": event, "data": data})
        self.cond.notify_all()

    def advance(self) -> None:
        """Evolve to the next interaction point (or the generation cap)."""
        ep = self.episode
        with self.cond:
            was_halted = ep.halted
            while not ep.halted and ep.pending is None:
                if ep.interaction_due:
                    p = ep.present_candidate()
                    self._emit("presentation", {"generation": p.generation})
                else:
                    record = ep.step_generation()
                    self._emit("generation", record)
            if ep.halted and not was_halted:
                self._emit("halt", ep.log.halt_record)

    def descriptor(self) -> dict:
        return {
            "session_id": self.id,
            "problem": self.problem.name,
            "config": self.config.to_dict(),
            "mode": "interactive",
            "status": self.episode.status,
            "generation": self.episode.generation,
        }

    def candidate_payload(self) -> dict:
        p = self.episode.pending
        if p is None:
            raise ProtocolError("no candidate is pending")
        counts = profile(self.problem, p.solution)
        classes = p.solution.to_dict()["classes"]
        for c in classes:
            c["internal_uses"] = counts.internal_uses[c["index"]]
            c["external_couples"] = counts.external_couples[c["index"]]
        return {
            "session_id": self.id,
            "generation": p.generation,
            "classes": classes,
            "metrics": p.metrics.to_dict(),
        }

    def reward_payload(self) -> dict:
        reward = self.episode.reward
        return {
            "weights": reward.weights,
            "weight_order": list(WEIGHT_ORDER),
            "weight_row": reward.weight_row,
            "mean_rewards": dict(zip(ELEGANCE_MEASURES, reward.mean_rewards)),
            "status": self.episode.status,
            "generation": self.episode.generation,
        }

    def event_stream(self, follow: bool) -> Iterator[str]:
        sent = 0
        while True:
            with self.cond:
                if follow and sent == len(self.events) and not self.episode.halted:
                    self.cond.wait(timeout=15.0)
                batch = self.events[sent:]
                sent += len(batch)
                done = self.episode.halted and sent == len(self.events)
            if not batch and follow and not done:
                yield ": keep-alive\n\n"
            for e in batch:
                yield f"event: {e['event']}\ndata: {json.dumps(_blind(e['data']))}\n\n"
            if done or not follow:
                return


class SessionStore:
    def __init__(self, problems: dict[str, DesignProblem], log_dir: Optional[Path] = None):
        self.problems = problems
        self.log_dir = log_dir
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()

    def create(self, problem: DesignProblem, config: EpisodeConfig) -> Session:
        session = Session(secrets.token_hex(8), problem, config)
        with self._lock:
            self._sessions[session.id] = session
        return session

    def get(self, session_id: str) -> Session:
        with self._lock:
            session = self._sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}")
        return session


def create_app(
    problems: Optional[dict[str, DesignProblem]] = None, log_dir: Union[str, Path, None] = None
) -> FastAPI:
    store = SessionStore(dict(problems or {}), Path(log_dir) if log_dir else None)
    app = FastAPI(title="elegantdesign")
    app.state.store = store

    @app.get("/problems")
    def list_problems() -> dict:
        return {
            "problems": [
                {"name": name, "attributes": p.n_attributes, "methods": p.n_methods, "uses": len(p.uses)}
                for name, p in sorted(store.problems.items())
            ]
        }

    @app.post("/sessions", status_code=201)
    def create_session(body: CreateSession) -> dict:
        if isinstance(body.problem, str):
            if body.problem not in store.problems:
                raise HTTPException(status_code=404, detail=f"unknown problem {body.problem!r}")
            problem = store.problems[body.problem]
        else:
            try:
                problem = DesignProblem.from_dict(body.problem)
            except ProblemError as exc:
                raise HTTPException(status_code=422, detail=str(exc)) from exc
        try:
            config = EpisodeConfig.from_dict(body.config)
            if not 2 <= config.k <= problem.n_elements:
                raise ValueError(f"k must lie in [2, {problem.n_elements}]")
        except (TypeError, ValueError) as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        session = store.create(problem, config)
        session.advance()
        return session.descriptor()

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str) -> dict:
        return store.get(session_id).descriptor()

    @app.get("/sessions/{session_id}/candidate")
    def get_candidate(session_id: str) -> dict:
        session = store.get(session_id)
        with session.cond:
            try:
                return session.candidate_payload()
            except ProtocolError as exc:
                raise HTTPException(status_code=409, detail=str(exc)) from exc

    @app.post("/sessions/{session_id}/rating")
    def post_rating(session_id: str, rating: Rating) -> dict:
        session = store.get(session_id)
        with session.cond:
            try:
                session.episode.rate_pending(rating.stars)
            except ProtocolError as exc:
                raise HTTPException(status_code=409, detail=str(exc)) from exc
            session._emit("rating", {"generation": session.episode.generation, "stars": rating.stars})
            payload = session.reward_payload()
        session.advance()
        payload["status"] = session.episode.status
        return payload

    @app.post("/sessions/{session_id}/halt")
    def post_halt(session_id: str) -> dict:
        session = store.get(session_id)
        with session.cond:
            was_halted = session.episode.halted
            log = session.episode.halt()
            if not was_halted:
                session._emit("halt", log.halt_record)
            if store.log_dir is not None and session.log_path is None:
                store.log_dir.mkdir(parents=True, exist_ok=True)
                session.log_path = store.log_dir / f"{session.id}.jsonl"
                log.write(session.log_path)
            return {
                "session": session.descriptor(),
                "log_path": str(session.log_path) if session.log_path else None,
                "log": log.records,
            }

    @app.get("/sessions/{session_id}/history")
    def get_history(session_id: str) -> dict:
        session = store.get(session_id)
        with session.cond:
            log = session.episode.log
            return {
                "generations": [dict(r) for r in log.generations],
                "interactions": [_blind(r) for r in log.of_kind("interaction")],
                "weight_order": list(WEIGHT_ORDER),
                "status": session.episode.status,
            }

    @app.get("/sessions/{session_id}/events")
    def get_events(session_id: str, follow: bool = True) -> StreamingResponse:
        session = store.get(session_id)
        return StreamingResponse(session.event_stream(follow), media_type="text/event-stream")

    return app


def load_problem_dir(directory: Union[str, Path]) -> dict[str, DesignProblem]:
    problems = {}
    for path in sorted(Path(directory).glob("*.json")):
        problem = load_problem(path)
        problems[problem.name] = problem
        problems.setdefault(path.stem, problem)
    return problems


def serve(port: int, problems_dir: Union[str, Path], log_dir: Union[str, Path, None] = None) -> None:  # pragma: no cover
    import uvicorn

    app = create_app(load_problem_dir(problems_dir), log_dir)
    uvicorn.run(app, host="127.0.0.1", port=port)
